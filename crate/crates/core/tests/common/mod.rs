//! Dense brute-force solutions of the truncated lattice system, built from
//! the row formula with nalgebra and independent of the block elimination.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

use estc::crystal::CrystalConfig;
use estc::spinor::{alpha_dot, dirac_matrices, Matrix4, C64};
use estc::stencil::appendix::transverse_config;
use estc::stencil::{ball, LatticeIndex};
use estc::{q40, FamilyKind, SolutionFamily};

pub struct DenseFamily {
    pub points: Vec<LatticeIndex>,
    pub blocks: HashMap<LatticeIndex, Matrix4>,
    pub u_e: Matrix4,
    pub u_d: Matrix4,
}

fn to_dense(m: &Matrix4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m.0[r][c])
}

fn from_dense(m: &DMatrix<C64>) -> Matrix4 {
    Matrix4(std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)])))
}

/// `α₄ + α·w(m) − w₄(m)U` at `q₄ = q₄₀ + ξ`.
fn diagonal(m: &LatticeIndex, cfg: &CrystalConfig, q: [f64; 3], xi: f64) -> Matrix4 {
    let d = dirac_matrices();
    let w: [C64; 3] = std::array::from_fn(|k| C64::new(q[k] + m.0[k] as f64 * cfg.omega, 0.0));
    let w4 = q40(q) + xi + m.0[3] as f64 * cfg.omega;
    d.alpha[3] + alpha_dot(&w) - Matrix4::identity().scale_re(w4)
}

/// Dense operator: rows `rows`, columns `cols`, `c(m + s)` coupled through
/// `−α·a(s)`.
pub fn operator(rows: &[LatticeIndex], cols: &[LatticeIndex], cfg: &CrystalConfig, q: [f64; 3], xi: f64) -> DMatrix<C64> {
    let table = cfg.shift_table();
    let col_of: HashMap<LatticeIndex, usize> = cols.iter().enumerate().map(|(j, n)| (*n, j)).collect();
    let mut d = DMatrix::zeros(4 * rows.len(), 4 * cols.len());
    for (i, m) in rows.iter().enumerate() {
        let mut put = |n: LatticeIndex, blk: Matrix4| {
            if let Some(&j) = col_of.get(&n) {
                d.view_mut((4 * i, 4 * j), (4, 4)).copy_from(&to_dense(&blk));
            }
        };
        put(*m, diagonal(m, cfg, q, xi));
        for e in &table.entries {
            put(*m + LatticeIndex(e.s), alpha_dot(&e.a).scale_re(-1.0));
        }
    }
    d
}

fn shell(points: &[LatticeIndex], cfg: &CrystalConfig) -> Vec<LatticeIndex> {
    let inside: std::collections::HashSet<_> = points.iter().copied().collect();
    let mut out: Vec<LatticeIndex> = Vec::new();
    for n in points {
        for e in &cfg.shift_table().entries {
            let m = *n - LatticeIndex(e.s);
            if !inside.contains(&m) && !out.contains(&m) {
                out.push(m);
            }
        }
    }
    out
}

pub fn dense_family(cfg: &CrystalConfig, q: [f64; 3], xi: f64, radius: u32, family: FamilyKind) -> DenseFamily {
    let v = ball(radius);
    let nv = 4 * v.len();
    let o = v.iter().position(|n| *n == LatticeIndex::ORIGIN).unwrap();
    let mut e0 = DMatrix::<C64>::zeros(nv, 4);
    for k in 0..4 {
        e0[(4 * o + k, k)] = C64::new(1.0, 0.0);
    }
    let raw = match family {
        FamilyKind::MinimalNorm => {
            // Projecting e₀ onto the null space of the interior rows and
            // rescaling to S(o) = U is the same as completing S(o) = U with
            // the least-norm solution of the interior rows; the latter has
            // no cancellation. The least-norm solve goes through a QR of the
            // adjoint, with one residual correction.
            let m = operator(&ball(radius - 1), &v, cfg, q, xi);
            let keep: Vec<usize> = (0..nv).filter(|&c| c / 4 != o).collect();
            let m_rest = m.select_columns(&keep);
            let m_o = m.columns(4 * o, 4).into_owned();
            let qr = m_rest.adjoint().qr();
            let (qm, r) = (qr.q(), qr.r());
            let least_norm = |b: &DMatrix<C64>| &qm * r.adjoint().solve_lower_triangular(b).expect("full row rank");
            let mut s_rest = least_norm(&(-&m_o));
            let resid = -&m_o - &m_rest * &s_rest;
            s_rest += least_norm(&resid);
            let mut s = e0.clone();
            for (r, &c) in keep.iter().enumerate() {
                for k in 0..4 {
                    s[(c, k)] = s_rest[(r, k)];
                }
            }
            s
        }
        FamilyKind::PinnedCentre => {
            // Every region row except the centre, with c(o) given.
            let rows: Vec<LatticeIndex> = v.iter().copied().filter(|n| *n != LatticeIndex::ORIGIN).collect();
            let d = operator(&rows, &v, cfg, q, xi);
            let keep: Vec<usize> = (0..nv).filter(|&c| c / 4 != o).collect();
            let dbb = d.select_columns(&keep);
            let dbo = d.columns(4 * o, 4).into_owned();
            let sb = dbb.lu().solve(&(-dbo)).expect("nonsingular boundary block");
            let mut s = e0.clone();
            for (r, &c) in keep.iter().enumerate() {
                for k in 0..4 {
                    s[(c, k)] = sb[(r, k)];
                }
            }
            s
        }
    };
    let centre = raw.rows(4 * o, 4).into_owned();
    let s = &raw * centre.try_inverse().unwrap();
    let mut rows = v.clone();
    rows.extend(shell(&v, cfg));
    let ds = operator(&rows, &v, cfg, q, xi) * &s;
    let blocks = v.iter().enumerate().map(|(i, n)| (*n, from_dense(&s.rows(4 * i, 4).into_owned()))).collect();
    DenseFamily { points: v, blocks, u_e: from_dense(&(s.adjoint() * &s)), u_d: from_dense(&(ds.adjoint() * &ds)) }
}

/// Largest relative deviations `(S, U_E, U_D)` of an eliminated family from
/// the dense solution.
pub fn deviations(fam: &SolutionFamily, dense: &DenseFamily) -> (f64, f64, f64) {
    let scale = dense.blocks.values().map(|b| b.max_abs()).fold(0.0, f64::max);
    let s = dense.points.iter().map(|n| (fam.blocks[fam.region.index_of(n).unwrap()] - dense.blocks[n]).max_abs()).fold(0.0, f64::max) / scale;
    let ue = (fam.u_e - dense.u_e).max_abs() / dense.u_e.max_abs();
    let ud = (fam.u_d - dense.u_d).max_abs() / dense.u_d.max_abs();
    (s, ue, ud)
}

/// Weak random transverse field, wave vector and off-resonance detuning.
pub fn random_case(seed: u64) -> (CrystalConfig, [f64; 3], f64) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let omega = rng.gen_range(0.05..0.2);
    let amp = rng.gen_range(1e-4..1e-3);
    let cfg = transverse_config(|| amp * rng.gen_range(-1.0..1.0), omega);
    let q = [rng.gen_range(-0.03..0.03), rng.gen_range(-0.03..0.03), rng.gen_range(-0.03..0.03)];
    let xi = rng.gen_range(0.005..0.02) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    (cfg, q, xi)
}
