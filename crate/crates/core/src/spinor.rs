//! Bispinors, 4x4 complex matrices, the Dirac matrices in the standard
//! representation, Dirac-set expansions and the 4x4 Hermitian pencil.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Bispinor(pub [C64; 4]);

impl Bispinor {
    pub const fn new(c: [C64; 4]) -> Self {
        Self(c)
    }

    pub fn zero() -> Self {
        Self([ZERO; 4])
    }

    pub fn unit(k: usize) -> Self {
        let mut c = [ZERO; 4];
        c[k] = ONE;
        Self(c)
    }

    pub fn from_real(x: [f64; 4]) -> Self {
        Self(x.map(|v| C64::new(v, 0.0)))
    }

    /// `self† other`.
    pub fn dot(&self, other: &Self) -> C64 {
        (0..4).map(|k| self.0[k].conj() * other.0[k]).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self(self.0.map(|z| z * a))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// `self† M self`.
    pub fn form(&self, m: &Matrix4) -> C64 {
        self.dot(&(m * self))
    }
}

impl Index<usize> for Bispinor {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for Bispinor {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.0[k]
    }
}

impl Add for Bispinor {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Bispinor {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Matrix4(pub [[C64; 4]; 4]);

impl Matrix4 {
    pub fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_diag([ONE; 4])
    }

    pub fn from_diag(d: [C64; 4]) -> Self {
        let mut m = Self::zero();
        for k in 0..4 {
            m.0[k][k] = d[k];
        }
        m
    }

    pub fn from_real_diag(d: [f64; 4]) -> Self {
        Self::from_diag(d.map(|x| C64::new(x, 0.0)))
    }

    /// Block matrix `[[a, b], [c, d]]` from 2x2 blocks.
    pub fn from_blocks(a: [[C64; 2]; 2], b: [[C64; 2]; 2], c: [[C64; 2]; 2], d: [[C64; 2]; 2]) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a[i][j];
                m.0[i][j + 2] = b[i][j];
                m.0[i + 2][j] = c[i][j];
                m.0[i + 2][j + 2] = d[i][j];
            }
        }
        m
    }

    /// Dyad `u v†`.
    pub fn outer(u: &Bispinor, v: &Bispinor) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| u.0[i] * v.0[j].conj())))
    }

    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|k| self.0[k][k]).sum()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * a)))
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(C64::new(a, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, j: usize) -> Bispinor {
        Bispinor(std::array::from_fn(|i| self.0[i][j]))
    }

    pub fn from_columns(cols: &[Bispinor; 4]) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| cols[j].0[i])))
    }

    /// `max|M − M†| ≤ tol·max|M|`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        (*self * *self - *self).max_abs() <= tol && (*self - self.adjoint()).max_abs() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        (0..4).map(|j| m[0][j] * cofactor(m, 0, j)).sum()
    }

    /// Transpose of the cofactor matrix; `M adj(M) = det(M) U`.
    pub fn adjugate(&self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| cofactor(&self.0, j, i))))
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }
}

fn cofactor(m: &[[C64; 4]; 4], r: usize, c: usize) -> C64 {
    let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
    let a = |i: usize, j: usize| m[rows[i]][cols[j]];
    let minor = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    if (r + c).is_multiple_of(2) {
        minor
    } else {
        -minor
    }
}

impl Index<(usize, usize)> for Matrix4 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for Matrix4 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl Sub for Matrix4 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }
}

impl Neg for Matrix4 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for Matrix4 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum())))
    }
}

impl Mul<&Bispinor> for &Matrix4 {
    type Output = Bispinor;
    fn mul(self, v: &Bispinor) -> Bispinor {
        Bispinor(std::array::from_fn(|i| (0..4).map(|k| self.0[i][k] * v.0[k]).sum()))
    }
}

impl Mul<Bispinor> for Matrix4 {
    type Output = Bispinor;
    fn mul(self, v: Bispinor) -> Bispinor {
        &self * &v
    }
}

/// The Dirac matrices of the standard representation.
#[derive(Clone, Copy, Debug)]
pub struct DiracMatrices {
    pub u: Matrix4,
    /// `α₁, α₂, α₃, α₄` with `α₄ = diag(1, 1, −1, −1)`.
    pub alpha: [Matrix4; 4],
    /// `Σ_k = diag(σ_k, σ_k)`.
    pub sigma: [Matrix4; 3],
}

pub fn pauli() -> [[[C64; 2]; 2]; 3] {
    [[[ZERO, ONE], [ONE, ZERO]], [[ZERO, -I], [I, ZERO]], [[ONE, ZERO], [ZERO, -ONE]]]
}

pub fn dirac_matrices() -> DiracMatrices {
    let z = [[ZERO; 2]; 2];
    let s = pauli();
    let alpha_k = |k: usize| Matrix4::from_blocks(z, s[k], s[k], z);
    let sigma_k = |k: usize| Matrix4::from_blocks(s[k], z, z, s[k]);
    DiracMatrices {
        u: Matrix4::identity(),
        alpha: [alpha_k(0), alpha_k(1), alpha_k(2), Matrix4::from_real_diag([1.0, 1.0, -1.0, -1.0])],
        sigma: [sigma_k(0), sigma_k(1), sigma_k(2)],
    }
}

/// `α·a` for a complex 3-vector `a`.
pub fn alpha_dot(a: &[C64; 3]) -> Matrix4 {
    let d = dirac_matrices();
    (0..3).fold(Matrix4::zero(), |acc, k| acc + d.alpha[k].scale(a[k]))
}

/// `Σ·a` for a complex 3-vector `a`.
pub fn sigma_dot(a: &[C64; 3]) -> Matrix4 {
    let d = dirac_matrices();
    (0..3).fold(Matrix4::zero(), |acc, k| acc + d.sigma[k].scale(a[k]))
}

/// Ordered orthonormal Hermitian basis of the 4x4 matrices.
///
/// Positions (1-based) 1..4 are `U, Σ₃, Σ₁, Σ₂` and 10..12 are `α₃, α₁, α₂`.
/// The rest are filled, in order, with `α₄`, `α₄Σ₃`, `α₄Σ₁`, `α₄Σ₂`, `γ₅`
/// (positions 5..9) and `iα₄γ₅`, `iα₄α₃`, `iα₄α₁`, `iα₄α₂` (13..16), where
/// `γ₅ = −iα₁α₂α₃`. Only the pinned positions carry meaning for comparison
/// with external tables.
#[derive(Clone, Debug)]
pub struct DiracBasis {
    pub elements: [Matrix4; 16],
    pub names: [&'static str; 16],
}

impl DiracBasis {
    pub fn standard() -> Self {
        let d = dirac_matrices();
        let [a1, a2, a3, a4] = d.alpha;
        let [s1, s2, s3] = d.sigma;
        let g5 = (a1 * a2 * a3).scale(-I);
        let ia4 = a4.scale(I);
        Self {
            elements: [d.u, s3, s1, s2, a4, a4 * s3, a4 * s1, a4 * s2, g5, a3, a1, a2, ia4 * g5, ia4 * a3, ia4 * a1, ia4 * a2],
            names: ["U", "S3", "S1", "S2", "a4", "a4S3", "a4S1", "a4S2", "g5", "a3", "a1", "a2", "ia4g5", "ia4a3", "ia4a1", "ia4a2"],
        }
    }

    /// Zero-based index of a named element.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|&n| n == name)
    }

    /// `d_i = tr(B_i† M)/4`.
    pub fn decompose(&self, m: &Matrix4) -> DiracSet {
        DiracSet(std::array::from_fn(|i| (self.elements[i].adjoint() * *m).trace() / 4.0))
    }

    pub fn compose(&self, d: &DiracSet) -> Matrix4 {
        (0..16).fold(Matrix4::zero(), |acc, i| acc + self.elements[i].scale(d.0[i]))
    }
}

/// Coefficients of a matrix over a [`DiracBasis`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracSet(pub [C64; 16]);

impl DiracSet {
    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Eigen-decomposition of a Hermitian 4x4 matrix by cyclic complex Jacobi
/// rotations. Eigenvalues ascend; eigenvectors are orthonormal.
pub fn hermitian_eigen(m: &Matrix4) -> ([f64; 4], [Bispinor; 4]) {
    let mut a = m.hermitian_part();
    let mut v = Matrix4::identity();
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off: f64 =
            (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a.0[i][j].norm_sqr()).sum::<f64>().sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                let g = a.0[p][q].norm();
                if g <= 1e-300 {
                    continue;
                }
                let e = a.0[p][q] / g;
                let tau = (a.0[q][q].re - a.0[p][p].re) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut j = Matrix4::identity();
                j.0[p][p] = C64::new(c, 0.0);
                j.0[p][q] = C64::new(s, 0.0);
                j.0[q][p] = e.conj() * (-s);
                j.0[q][q] = e.conj() * c;
                a = j.adjoint() * a * j;
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                v = v * j;
            }
        }
    }
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&x, &y| a.0[x][x].re.total_cmp(&a.0[y][y].re));
    (idx.map(|k| a.0[k][k].re), idx.map(|k| v.column(k)))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky4(m: &Matrix4) -> Result<Matrix4> {
    let mut l = Matrix4::zero();
    for j in 0..4 {
        let mut d = m.0[j][j].re;
        for k in 0..j {
            d -= l.0[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            let (vals, _) = hermitian_eigen(m);
            return Err(Error::NotPositiveDefinite { smallest: vals[0] });
        }
        let d = d.sqrt();
        l.0[j][j] = C64::new(d, 0.0);
        for i in j + 1..4 {
            let mut s = m.0[i][j];
            for k in 0..j {
                s -= l.0[i][k] * l.0[j][k].conj();
            }
            l.0[i][j] = s / d;
        }
    }
    Ok(l)
}

fn lower_inverse(l: &Matrix4) -> Matrix4 {
    let mut x = Matrix4::zero();
    for c in 0..4 {
        for i in 0..4 {
            let mut s = if i == c { ONE } else { ZERO };
            for k in 0..i {
                s -= l.0[i][k] * x.0[k][c];
            }
            x.0[i][c] = s / l.0[i][i];
        }
    }
    x
}

/// Generalized eigenpairs of the Hermitian pencil `(U_D, U_E)`.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: [f64; 4],
    /// `U_E`-orthonormal: `v_i† U_E v_j = δ_ij`.
    pub vectors: [Bispinor; 4],
    /// Size of the cluster each eigenvalue belongs to.
    pub multiplicity: [usize; 4],
}

/// Default relative gap below which neighbouring roots count as one cluster.
pub const MULTIPLICITY_RTOL: f64 = 1e-6;

/// Groups ascending eigenvalues into clusters: neighbours are merged when
/// `λ_{i+1} − λ_i ≤ rtol·λ_{i+1} + 64ε·λ_max`.
pub fn multiplicity_labels(values: &[f64; 4], rtol: f64) -> [usize; 4] {
    let floor = 64.0 * f64::EPSILON * values[3].abs().max(f64::MIN_POSITIVE);
    let mut group = [0usize; 4];
    for i in 1..4 {
        let gap = values[i] - values[i - 1];
        group[i] = if gap <= rtol * values[i].abs() + floor { group[i - 1] } else { group[i - 1] + 1 };
    }
    std::array::from_fn(|i| group.iter().filter(|&&g| g == group[i]).count())
}

/// Solves `det(U_D − λ U_E) = 0` by whitening with the Cholesky factor of
/// `U_E` followed by a Hermitian eigensolve.
pub fn generalized_eigen(ud: &Matrix4, ue: &Matrix4) -> Result<GeneralizedEigen> {
    let l = cholesky4(&ue.hermitian_part())?;
    let li = lower_inverse(&l);
    let c = li * ud.hermitian_part() * li.adjoint();
    let (values, y) = hermitian_eigen(&c);
    let lit = li.adjoint();
    let vectors = y.map(|yk| lit * yk);
    Ok(GeneralizedEigen { values, vectors, multiplicity: multiplicity_labels(&values, MULTIPLICITY_RTOL) })
}

/// Hermitian projector onto the root subspace of `λ` for the pencil.
///
/// Twofold roots use `U − 2D/tr D`, simple roots `adj(D)/tr adj(D)` with
/// `D = U_D − λ U_E`.
pub fn projector_from_root(ud: &Matrix4, ue: &Matrix4, lambda: f64, multiplicity: usize) -> Result<Matrix4> {
    let d = *ud - ue.scale_re(lambda);
    let scale = ud.max_abs().max(ue.max_abs() * lambda.abs()).max(f64::MIN_POSITIVE);
    match multiplicity {
        2 => {
            let tr = d.trace();
            if tr.norm() <= 1e-300 * scale {
                return Err(Error::DegeneratePencil { trace: tr.norm() });
            }
            Ok(Matrix4::identity() - d.scale(2.0 / tr))
        }
        1 => {
            let adj = d.adjugate();
            let tr = adj.trace();
            if tr.norm() <= 1e-300 * scale.powi(3) {
                return Err(Error::DegeneratePencil { trace: tr.norm() });
            }
            Ok(adj.scale(tr.inv()))
        }
        m => Err(Error::Invalid(format!("projector_from_root supports multiplicity 1 or 2, got {m}"))),
    }
}

/// Orthogonal projector onto the span of the given (linearly independent)
/// bispinors.
pub fn projector_onto(vectors: &[Bispinor]) -> Result<Matrix4> {
    let mut basis: Vec<Bispinor> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = *v;
        for _ in 0..2 {
            for b in &basis {
                w = w - b.scale(b.dot(&w));
            }
        }
        basis.push(w.normalized()?);
    }
    Ok(basis.iter().fold(Matrix4::zero(), |acc, b| acc + Matrix4::outer(b, b)))
}
