//! Truncated block system around the central Fourier index, its exact
//! elimination into a four-parameter solution family `c(n) = S(n)c₀`, and
//! the residual pencil `(U_D, U_E)`.
//!
//! Row `n` of the lattice system reads
//! `[α₄ + α·w(n) − w₄(n)U] c(n) − Σ_s (α·a(s)) c(n+s) = 0`
//! over the 12 unit shifts, with `w(n) = q + (n₁,n₂,n₃)Ω` and
//! `w₄(n) = q₄ + n₄Ω`. The pencil is evaluated without forming `U_D`
//! explicitly: the family is orthonormalized, the full-lattice operator is
//! applied to it, and the singular values of that panel are the residuals.

use std::collections::HashMap;
use std::io::{self, Write};

use num_traits::{One, Zero};

use crate::crystal::CrystalConfig;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::freespace::{one_minus_q40_in, q40_in};
use crate::linalg::{block_adjoint, block_apply, block_inverse, block_mul, block_zero, panel_svd, thin_qr, upper_solve, Block, Panel, ProfileMatrix};
use crate::real::{abs2, lift, lower, Cx, Real};
use crate::spinor::{alpha_dot, multiplicity_labels, projector_onto, Bispinor, Matrix4, MULTIPLICITY_RTOL};
use crate::stencil::{ball, LatticeIndex};

/// Arithmetic used by assembly, elimination and the pencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Standard,
    Extended,
    /// Extended from radius 4 on, where `σ_min` of the interior rows drops
    /// below the `f64` floor.
    Auto,
}

/// Radius from which `Auto` switches to double-double arithmetic; below it
/// plain f64 resolves the line bottom to the same digits.
pub const EXTENDED_FROM_RADIUS: u32 = 4;

impl Precision {
    pub fn resolve(self, radius: u32) -> Self {
        match self {
            Precision::Auto if radius >= EXTENDED_FROM_RADIUS => Precision::Extended,
            Precision::Auto => Precision::Standard,
            p => p,
        }
    }
}

/// How the non-central amplitudes are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Every row with `g₄d < d` is satisfied exactly and the family is the
    /// minimal-norm completion of the central amplitude.
    MinimalNorm,
    /// `S(n_o) = U`, every non-central region row satisfied exactly,
    /// amplitudes outside the region zero.
    PinnedCentre,
}

/// Coordinates in which `c₀` (and so `U_E`, `U_D`, `ρ₁`) are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `c₀` is the central amplitude, `S(n_o) = U`.
    CentralAmplitude,
    /// `c₀` parametrizes the orthogonal projection of the unit central
    /// column onto the solution subspace.
    Projector,
}

/// Sign of the field coupling: `Plus` uses `−α·a(s)` off the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingSign {
    Plus,
    Minus,
}

impl CouplingSign {
    /// Multiplier of `α·a(s)` in the off-diagonal blocks.
    pub fn factor(self) -> f64 {
        match self {
            CouplingSign::Plus => -1.0,
            CouplingSign::Minus => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub family: FamilyKind,
    pub normalization: Normalization,
    pub precision: Precision,
    pub coupling: CouplingSign,
    /// Projection refinement sweeps after the first minimal-norm solve.
    pub refinement_steps: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            family: FamilyKind::MinimalNorm,
            normalization: Normalization::CentralAmplitude,
            precision: Precision::Auto,
            coupling: CouplingSign::Plus,
            refinement_steps: 2,
        }
    }
}

/// Even-sum lattice points with `g₄d ≤ d`, ordered time-major
/// lexicographically by `(n₄, n₁, n₂, n₃)` so the elimination profile stays
/// narrow.
#[derive(Clone, Debug)]
pub struct Region {
    radius: u32,
    points: Vec<LatticeIndex>,
    index: HashMap<LatticeIndex, usize>,
}

fn order_key(n: &LatticeIndex) -> [i32; 4] {
    [n.0[3], n.0[0], n.0[1], n.0[2]]
}

impl Region {
    pub fn new(radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::BadRadius(radius));
        }
        Ok(Self::ball(radius))
    }

    fn ball(radius: u32) -> Self {
        let mut points = ball(radius);
        points.sort_by_key(order_key);
        Self::from_points(radius, points)
    }

    fn from_points(radius: u32, points: Vec<LatticeIndex>) -> Self {
        let index = points.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        Self { radius, points, index }
    }

    /// Same point set in a caller-chosen order; used to check that reported
    /// scalars do not depend on the ordering.
    pub fn with_order(radius: u32, key: impl Fn(&LatticeIndex) -> [i32; 4]) -> Result<Self> {
        let mut r = Self::new(radius)?;
        r.points.sort_by_key(key);
        Ok(Self::from_points(radius, r.points))
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn points(&self) -> &[LatticeIndex] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, n: &LatticeIndex) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn contains(&self, n: &LatticeIndex) -> bool {
        self.index.contains_key(n)
    }

    pub fn origin(&self) -> usize {
        self.index[&LatticeIndex::ORIGIN]
    }
}

pub fn build_region(d: u32) -> Result<Region> {
    Region::new(d)
}

/// Rows of the lattice system restricted to a region, in solver precision.
#[derive(Clone, Debug)]
pub struct BlockSystem<T: Real> {
    region: Region,
    /// Lattice points outside the region whose rows touch it.
    outer: Vec<LatticeIndex>,
    q: [T; 3],
    omega: T,
    /// `1 − q₄` and `−1 − q₄` at `n₄ = 0`.
    upper: T,
    lower: T,
    couplings: [([i32; 4], Block<T>); 12],
    singular_rows: Vec<LatticeIndex>,
}

/// Builds the region rows for `q₄ = q₄₀ + ξ`.
pub fn assemble<T: Real>(region: &Region, cfg: &CrystalConfig, q: [f64; 3], xi: f64, coupling: CouplingSign) -> BlockSystem<T> {
    let xi_t = T::from_f64(xi);
    let upper = one_minus_q40_in::<T>(q) - xi_t;
    let lower = -(T::one() + q40_in::<T>(q)) - xi_t;
    let table = cfg.shift_table();
    let couplings = table.entries.map(|e| {
        let x = alpha_dot(&e.a).scale_re(coupling.factor());
        (e.s, to_block::<T>(&x))
    });
    let mut outer: Vec<LatticeIndex> = Vec::new();
    for n in region.points() {
        for (s, _) in &couplings {
            let m = LatticeIndex(std::array::from_fn(|k| n.0[k] - s[k]));
            if !region.contains(&m) {
                outer.push(m);
            }
        }
    }
    outer.sort_by_key(order_key);
    outer.dedup();
    let q4 = q40_in::<f64>(q) + xi;
    let singular_rows = region.points().iter().filter(|n| (q4 + n.0[3] as f64 * cfg.omega).abs() < 1e-12).copied().collect();
    BlockSystem { region: region.clone(), outer, q: q.map(T::from_f64), omega: T::from_f64(cfg.omega), upper, lower, couplings, singular_rows }
}

fn to_block<T: Real>(m: &Matrix4) -> Block<T> {
    m.0.map(|r| r.map(lift))
}

fn to_matrix<T: Real>(b: &Block<T>) -> Matrix4 {
    Matrix4(b.map(|r| r.map(lower)))
}

fn point_block<T: Real>(p: &Panel<T>, i: usize) -> Block<T> {
    [p[4 * i], p[4 * i + 1], p[4 * i + 2], p[4 * i + 3]]
}

fn add_product<T: Real>(p: &mut Panel<T>, i: usize, a: &Block<T>, b: &Block<T>) {
    let prod = block_mul(a, b);
    for r in 0..4 {
        for c in 0..4 {
            p[4 * i + r][c] += prod[r][c];
        }
    }
}

fn frob2<T: Real>(b: &Block<T>) -> f64 {
    b.iter().flatten().map(|z| abs2(*z).to_f64()).sum()
}

impl<T: Real> BlockSystem<T> {
    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Points outside the region reached by a unit shift from it.
    pub fn outer(&self) -> &[LatticeIndex] {
        &self.outer
    }

    /// Region rows with `w₄(n) ≈ 0`.
    pub fn singular_rows(&self) -> &[LatticeIndex] {
        &self.singular_rows
    }

    /// `α₄ + α·w(n) − w₄(n)U`.
    pub fn diagonal_block(&self, n: &LatticeIndex) -> Block<T> {
        let w: [T; 3] = std::array::from_fn(|k| self.q[k] + T::from_i64(n.0[k] as i64) * self.omega);
        let t = T::from_i64(n.0[3] as i64) * self.omega;
        let up = Cx::new(self.upper - t, T::zero());
        let lo = Cx::new(self.lower - t, T::zero());
        let z = Cx::zero();
        let w3 = Cx::new(w[2], T::zero());
        let wm = Cx::new(w[0], -w[1]);
        let wp = Cx::new(w[0], w[1]);
        [[up, z, w3, wm], [z, up, wp, -w3], [w3, wm, lo, z], [wp, -w3, z, lo]]
    }

    pub fn couplings(&self) -> &[([i32; 4], Block<T>); 12] {
        &self.couplings
    }

    pub fn diagonal(&self, n: &LatticeIndex) -> Matrix4 {
        to_matrix(&self.diagonal_block(n))
    }

    pub fn coupling(&self, s: [i32; 4]) -> Option<Matrix4> {
        self.couplings.iter().find(|(t, _)| *t == s).map(|(_, b)| to_matrix(b))
    }

    /// Frobenius norm of the whole row at `n`.
    pub fn row_norm(&self, n: &LatticeIndex) -> f64 {
        let off: f64 = self.couplings.iter().map(|(_, b)| frob2(b)).sum();
        (frob2(&self.diagonal_block(n)) + off).sqrt()
    }

    /// Every row whose stencil touches the region: region points first,
    /// then the outer shell.
    pub fn residual_rows(&self) -> Vec<LatticeIndex> {
        self.region.points().iter().chain(&self.outer).copied().collect()
    }

    /// Full-lattice operator applied to a panel supported on the region;
    /// rows follow [`Self::residual_rows`].
    pub fn apply(&self, x: &Panel<T>) -> Panel<T> {
        let rows = self.residual_rows();
        let mut out = vec![[Cx::zero(); 4]; 4 * rows.len()];
        for (i, m) in rows.iter().enumerate() {
            if let Some(j) = self.region.index_of(m) {
                add_product(&mut out, i, &self.diagonal_block(m), &point_block(x, j));
            }
            for (s, b) in &self.couplings {
                let v = LatticeIndex(std::array::from_fn(|k| m.0[k] + s[k]));
                if let Some(j) = self.region.index_of(&v) {
                    add_product(&mut out, i, b, &point_block(x, j));
                }
            }
        }
        out
    }
}

/// Rows of the interior set `E` as a sparse operator into region columns.
struct InteriorRows<'a, T: Real> {
    sys: &'a BlockSystem<T>,
    inner: Region,
}

impl<T: Real> InteriorRows<'_, T> {
    /// `(column point, block)` pairs of row `e`.
    fn row(&self, e: &LatticeIndex) -> Vec<(usize, Block<T>)> {
        let v = &self.sys.region;
        let mut out = vec![(v.index_of(e).expect("interior row in region"), self.sys.diagonal_block(e))];
        for (s, b) in &self.sys.couplings {
            let m = LatticeIndex(std::array::from_fn(|k| e.0[k] + s[k]));
            out.push((v.index_of(&m).expect("interior stencil in region"), *b));
        }
        out
    }

    fn apply(&self, x: &Panel<T>) -> Panel<T> {
        let mut out = vec![[Cx::zero(); 4]; 4 * self.inner.len()];
        for (i, e) in self.inner.points().iter().enumerate() {
            for (j, b) in self.row(e) {
                add_product(&mut out, i, &b, &point_block(x, j));
            }
        }
        out
    }

    fn apply_adjoint(&self, y: &Panel<T>) -> Panel<T> {
        let mut out = vec![[Cx::zero(); 4]; 4 * self.sys.region.len()];
        for (i, e) in self.inner.points().iter().enumerate() {
            let yi = point_block(y, i);
            for (j, b) in self.row(e) {
                add_product(&mut out, j, &block_adjoint(&b), &yi);
            }
        }
        out
    }

    /// `G = M M†` over the interior rows, in profile storage.
    fn gram(&self) -> ProfileMatrix<T> {
        let rows: Vec<Vec<(usize, Block<T>)>> = self.inner.points().iter().map(|e| self.row(e)).collect();
        // Column point -> interior rows touching it.
        let mut touching: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for (i, r) in rows.iter().enumerate() {
            for (slot, (j, _)) in r.iter().enumerate() {
                touching.entry(*j).or_default().push((i, slot));
            }
        }
        let mut entries: Vec<Vec<(usize, Block<T>)>> = vec![Vec::new(); rows.len()];
        for (i, r) in rows.iter().enumerate() {
            let mut acc: HashMap<usize, Block<T>> = HashMap::new();
            for (j, bs) in r {
                for &(k, slot) in &touching[j] {
                    if k > i {
                        continue;
                    }
                    let bt = &rows[k][slot].1;
                    let p = block_mul(bs, &block_adjoint(bt));
                    let e = acc.entry(k).or_insert_with(block_zero);
                    for a in 0..4 {
                        for b in 0..4 {
                            e[a][b] += p[a][b];
                        }
                    }
                }
            }
            let mut v: Vec<(usize, Block<T>)> = acc.into_iter().collect();
            v.sort_by_key(|(k, _)| *k);
            entries[i] = v;
        }
        let first: Vec<usize> = (0..4 * rows.len()).map(|r| 4 * entries[r / 4].first().map(|(k, _)| *k).unwrap_or(r / 4)).collect();
        let mut g = ProfileMatrix::with_profile(first);
        for (i, row) in entries.iter().enumerate() {
            for (k, b) in row {
                for a in 0..4 {
                    for c in 0..4 {
                        if *k < i || c <= a {
                            g.add(4 * i + a, 4 * k + c, b[a][c]);
                        }
                    }
                }
            }
        }
        g
    }
}

fn column<T: Real>(p: &Panel<T>, c: usize) -> Vec<Cx<T>> {
    p.iter().map(|r| r[c]).collect()
}

fn set_column<T: Real>(p: &mut Panel<T>, c: usize, v: &[Cx<T>]) {
    for (r, z) in p.iter_mut().zip(v) {
        r[c] = *z;
    }
}

fn unit_central<T: Real>(region: &Region) -> Panel<T> {
    let mut e0 = vec![[Cx::zero(); 4]; 4 * region.len()];
    let o = region.origin();
    for k in 0..4 {
        e0[4 * o + k][k] = Cx::one();
    }
    e0
}

fn minimal_norm_family<T: Real>(sys: &BlockSystem<T>, refinement: u32) -> Result<(Panel<T>, Vec<bool>)> {
    let rows = InteriorRows { sys, inner: Region::ball(sys.region.radius - 1) };
    let factor = rows.gram().factor(0.0).map_err(|(r, pivot)| Error::SingularBlock { point: rows.inner.points()[r / 4], pivot })?;
    let project = |s: &mut Panel<T>| {
        let mut y = rows.apply(s);
        for c in 0..4 {
            let mut col = column(&y, c);
            factor.solve_in_place(&mut col);
            set_column(&mut y, c, &col);
        }
        let corr = rows.apply_adjoint(&y);
        for (a, b) in s.iter_mut().zip(&corr) {
            for c in 0..4 {
                a[c] -= b[c];
            }
        }
    };
    let mut s = unit_central::<T>(&sys.region);
    for _ in 0..=refinement {
        project(&mut s);
    }
    let interior = sys.region.points().iter().map(|n| rows.inner.contains(n)).collect();
    Ok((s, interior))
}

fn pinned_centre_family<T: Real>(sys: &BlockSystem<T>) -> Result<(Panel<T>, Vec<bool>)> {
    let v = &sys.region;
    let o = v.origin();
    let bidx: Vec<usize> = (0..v.len()).filter(|&i| i != o).collect();
    let pos: HashMap<usize, usize> = bidx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let nb = bidx.len();
    let mut links: Vec<Vec<(usize, Block<T>)>> = vec![Vec::new(); nb];
    let mut rhs: Panel<T> = vec![[Cx::zero(); 4]; 4 * nb];
    for (k, &i) in bidx.iter().enumerate() {
        let n = v.points()[i];
        for (s, b) in &sys.couplings {
            let m = LatticeIndex(std::array::from_fn(|t| n.0[t] + s[t]));
            match v.index_of(&m) {
                Some(j) if j == o => {
                    for r in 0..4 {
                        for c in 0..4 {
                            rhs[4 * k + r][c] -= b[r][c];
                        }
                    }
                }
                Some(j) if pos[&j] < k => links[k].push((pos[&j], *b)),
                _ => {}
            }
        }
    }
    let first: Vec<usize> = (0..4 * nb).map(|r| 4 * links[r / 4].iter().map(|(j, _)| *j).min().unwrap_or(r / 4).min(r / 4)).collect();
    let mut a = ProfileMatrix::with_profile(first);
    for (k, &i) in bidx.iter().enumerate() {
        let d = sys.diagonal_block(&v.points()[i]);
        for r in 0..4 {
            for c in 0..=r {
                a.add(4 * k + r, 4 * k + c, d[r][c]);
            }
        }
        for (j, b) in &links[k] {
            for r in 0..4 {
                for c in 0..4 {
                    a.add(4 * k + r, 4 * j + c, b[r][c]);
                }
            }
        }
    }
    let factor = a.factor(1e3 * T::EPSILON).map_err(|(r, pivot)| Error::SingularBlock { point: v.points()[bidx[r / 4]], pivot })?;
    for c in 0..4 {
        let mut col = column(&rhs, c);
        factor.solve_in_place(&mut col);
        set_column(&mut rhs, c, &col);
    }
    let mut s = unit_central::<T>(v);
    for (k, &i) in bidx.iter().enumerate() {
        for r in 0..4 {
            s[4 * i + r] = rhs[4 * k + r];
        }
    }
    let interior = (0..v.len()).map(|i| i != o).collect();
    Ok((s, interior))
}

/// Residual-pencil eigenpairs in `c₀` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    /// `ℛ_j = √λ_j`, ascending.
    pub residuals: [f64; 4],
    /// `U_E`-orthonormal generalized eigenvectors.
    pub vectors: [Bispinor; 4],
    /// Cluster size of each root under [`MULTIPLICITY_RTOL`].
    pub multiplicity: [usize; 4],
}

impl Pencil {
    pub fn lambdas(&self) -> [f64; 4] {
        self.residuals.map(|r| r * r)
    }
}

/// The eliminated family on a region, reported in `f64`.
#[derive(Clone, Debug)]
pub struct SolutionFamily {
    pub region: Region,
    pub xi: f64,
    pub family: FamilyKind,
    pub normalization: Normalization,
    pub precision: Precision,
    pub coupling: CouplingSign,
    /// `S(n)` in region order.
    pub blocks: Vec<Matrix4>,
    /// Full-lattice row residual `(D S)(n)` in region order.
    pub row_residuals: Vec<Matrix4>,
    pub u_e: Matrix4,
    pub u_d: Matrix4,
    pub pencil: Pencil,
    /// Largest `‖(D S)(m)‖/‖row(m)‖` over rows the family satisfies exactly.
    pub interior_residual: f64,
    pub singular_rows: Vec<LatticeIndex>,
    /// `U_E = NᴴN`.
    n_factor: Matrix4,
    /// `U_D = FᴴF`.
    d_factor: Matrix4,
}

/// Eliminates the system into a solution family and evaluates its pencil.
///
/// A field-free configuration has no nonzero minimal-norm family, so it is
/// always solved with [`FamilyKind::PinnedCentre`].
pub fn eliminate<T: Real>(sys: &BlockSystem<T>, opts: &SolverOptions, xi: f64, free: bool) -> Result<SolutionFamily> {
    let family = if free { FamilyKind::PinnedCentre } else { opts.family };
    let (raw, interior) = match family {
        FamilyKind::MinimalNorm => minimal_norm_family(sys, opts.refinement_steps)?,
        FamilyKind::PinnedCentre => pinned_centre_family(sys)?,
    };
    let (q_s, r_s) = thin_qr(&raw);
    if (0..4).any(|k| r_s[k][k].re.to_f64() <= 1e3 * T::EPSILON * r_s[0][0].re.to_f64().max(1.0)) {
        return Err(Error::ZeroNorm);
    }
    let t = sys.apply(&q_s);
    let (sig, v) = panel_svd(&t);

    let o = sys.region.origin();
    let (n_blk, coords): (Block<T>, Vec<[Cx<T>; 4]>) = match opts.normalization {
        Normalization::CentralAmplitude => {
            let qo = point_block(&q_s, o);
            let n = block_inverse(&qo).ok_or(Error::SingularBlock { point: LatticeIndex::ORIGIN, pivot: 0.0 })?;
            (n, (0..4).map(|j| block_apply(&qo, &std::array::from_fn(|r| v[r][j]))).collect())
        }
        Normalization::Projector => (r_s, (0..4).map(|j| upper_solve(&r_s, &std::array::from_fn(|r| v[r][j]))).collect()),
    };
    let sv_vh: Block<T> = std::array::from_fn(|i| std::array::from_fn(|j| v[j][i].conj() * sig[i]));
    let f_blk = block_mul(&sv_vh, &n_blk);

    let blocks: Vec<Matrix4> = (0..sys.region.len()).map(|i| to_matrix(&block_mul(&point_block(&q_s, i), &n_blk))).collect();
    let row_residuals: Vec<Matrix4> = (0..sys.region.len()).map(|i| to_matrix(&block_mul(&point_block(&t, i), &n_blk))).collect();
    let interior_residual = sys
        .region
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| interior[*i])
        .map(|(i, n)| frob2(&point_block(&t, i)).sqrt() / sys.row_norm(n))
        .fold(0.0, f64::max);

    let n_factor = to_matrix(&n_blk);
    let d_factor = to_matrix(&f_blk);
    let residuals = sig.map(|s| s.to_f64());
    let vectors: [Bispinor; 4] = std::array::from_fn(|j| Bispinor(coords[j].map(lower)));
    let lambdas = residuals.map(|r| r * r);
    Ok(SolutionFamily {
        region: sys.region.clone(),
        xi,
        family,
        normalization: opts.normalization,
        coupling: opts.coupling,
        precision: if T::EPSILON < f64::EPSILON { Precision::Extended } else { Precision::Standard },
        blocks,
        row_residuals,
        u_e: n_factor.adjoint() * n_factor,
        u_d: d_factor.adjoint() * d_factor,
        pencil: Pencil { residuals, vectors, multiplicity: multiplicity_labels(&lambdas, MULTIPLICITY_RTOL) },
        interior_residual,
        singular_rows: sys.singular_rows.clone(),
        n_factor,
        d_factor,
    })
}

/// Region, assembly and elimination at detuning `ξ = q₄ − q₄₀`.
pub fn solve(cfg: &CrystalConfig, q: [f64; 3], xi: f64, radius: u32, opts: &SolverOptions) -> Result<SolutionFamily> {
    let region = Region::new(radius)?;
    solve_on(&region, cfg, q, xi, opts)
}

/// As [`solve`] on a prepared region.
pub fn solve_on(region: &Region, cfg: &CrystalConfig, q: [f64; 3], xi: f64, opts: &SolverOptions) -> Result<SolutionFamily> {
    let free = cfg.is_free();
    match opts.precision.resolve(region.radius()) {
        Precision::Extended => eliminate(&assemble::<DoubleDouble>(region, cfg, q, xi, opts.coupling), opts, xi, free),
        _ => eliminate(&assemble::<f64>(region, cfg, q, xi, opts.coupling), opts, xi, free),
    }
}

impl SolutionFamily {
    pub fn central(&self) -> &Matrix4 {
        &self.blocks[self.region.origin()]
    }

    /// `√(c₀†U_Dc₀ / c₀†U_Ec₀)` evaluated through the factors, which keeps
    /// full relative accuracy for small residuals.
    pub fn relative_residual(&self, c0: &Bispinor) -> Result<f64> {
        let e = (self.n_factor * *c0).norm();
        if e == 0.0 || c0.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok((self.d_factor * *c0).norm() / e)
    }

    /// `c(n) = S(n)c₀` in region order.
    pub fn amplitudes(&self, c0: &Bispinor) -> Vec<Bispinor> {
        self.blocks.iter().map(|s| *s * *c0).collect()
    }

    /// Orthogonal projector `ρ₁` onto the lowest root cluster.
    pub fn root_projector(&self) -> Result<Matrix4> {
        let m = self.pencil.multiplicity[0];
        projector_onto(&self.pencil.vectors[..m])
    }

    /// One header block with `U_E`, `U_D`, then one record per region point:
    /// the four lattice coordinates followed by 32 complex entries, the 16
    /// of `S(n)` and the 16 of its row residual, row-major as `re im`.
    pub fn write_dump(&self, w: &mut impl Write) -> io::Result<()> {
        fn entries(w: &mut impl Write, m: &Matrix4) -> io::Result<()> {
            for z in m.0.iter().flatten() {
                write!(w, " {:.17e} {:.17e}", z.re, z.im)?;
            }
            Ok(())
        }
        writeln!(w, "radius {}", self.region.radius())?;
        writeln!(w, "xi {:.17e}", self.xi)?;
        writeln!(w, "normalization {:?}", self.normalization)?;
        write!(w, "U_E")?;
        entries(w, &self.u_e)?;
        writeln!(w)?;
        write!(w, "U_D")?;
        entries(w, &self.u_d)?;
        writeln!(w)?;
        for (i, n) in self.region.points().iter().enumerate() {
            write!(w, "{} {} {} {}", n.0[0], n.0[1], n.0[2], n.0[3])?;
            entries(w, &self.blocks[i])?;
            entries(w, &self.row_residuals[i])?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `(U_E, U_D)` of an eliminated family.
pub fn residual_forms(family: &SolutionFamily) -> (Matrix4, Matrix4) {
    (family.u_e, family.u_d)
}

/// `√(c₀†U_Dc₀ / c₀†U_Ec₀)` from the assembled forms.
pub fn relative_residual(u_d: &Matrix4, u_e: &Matrix4, c0: &Bispinor) -> Result<f64> {
    if c0.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let den = c0.form(u_e).re;
    if den <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((c0.form(u_d).re.max(0.0) / den).sqrt())
}
