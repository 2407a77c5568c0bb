//! Precision-generic kernels: a skyline (profile) Hermitian LDLᴴ
//! factorization, Gram-Schmidt thin QR and a one-sided Jacobi SVD for
//! four-column panels.

use num_traits::{One, Zero};

use crate::real::{abs2, Cx, Real};

/// 4x4 complex block in solver precision.
pub type Block<T> = [[Cx<T>; 4]; 4];

pub fn block_zero<T: Real>() -> Block<T> {
    [[Cx::zero(); 4]; 4]
}

pub fn block_identity<T: Real>() -> Block<T> {
    let mut b = block_zero();
    for (k, row) in b.iter_mut().enumerate() {
        row[k] = Cx::one();
    }
    b
}

pub fn block_mul<T: Real>(a: &Block<T>, b: &Block<T>) -> Block<T> {
    let mut out = block_zero();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn block_add_assign<T: Real>(a: &mut Block<T>, b: &Block<T>) {
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] += b[i][j];
        }
    }
}

pub fn block_adjoint<T: Real>(a: &Block<T>) -> Block<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj()))
}

pub fn block_apply<T: Real>(a: &Block<T>, v: &[Cx<T>; 4]) -> [Cx<T>; 4] {
    std::array::from_fn(|i| (0..4).fold(Cx::zero(), |acc, k| acc + a[i][k] * v[k]))
}

/// Hermitian matrix with a lower skyline profile: row `i` stores columns
/// `first[i]..=i`.
#[derive(Clone, Debug)]
pub struct ProfileMatrix<T: Real> {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<Cx<T>>,
}

impl<T: Real> ProfileMatrix<T> {
    /// Allocates a zero matrix with the given first column per row.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let mut offset = Vec::with_capacity(first.len() + 1);
        let mut acc = 0;
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "profile column beyond diagonal");
            offset.push(acc);
            acc += i - f + 1;
        }
        offset.push(acc);
        Self { first, offset, data: vec![Cx::zero(); acc] }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.data.len()
    }

    /// Adds `z` at `(i, j)` with `j ≤ i`.
    pub fn add(&mut self, i: usize, j: usize, z: Cx<T>) {
        debug_assert!(j <= i && j >= self.first[i]);
        self.data[self.offset[i] + j - self.first[i]] += z;
    }

    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        let (i, j, conj) = if j <= i { (i, j, false) } else { (j, i, true) };
        if j < self.first[i] {
            return Cx::zero();
        }
        let z = self.data[self.offset[i] + j - self.first[i]];
        if conj {
            z.conj()
        } else {
            z
        }
    }

    fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[self.offset[i]..self.offset[i + 1]]
    }

    /// `y = A x` using both triangles.
    pub fn apply(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.dim();
        let mut y = vec![Cx::zero(); n];
        for i in 0..n {
            let f = self.first[i];
            let row = self.row(i);
            let mut acc = Cx::<T>::zero();
            for (k, &a) in row[..i - f].iter().enumerate() {
                acc += a * x[f + k];
                y[f + k] += a.conj() * x[i];
            }
            y[i] += acc + row[i - f] * x[i];
        }
        y
    }

    /// In-place `A = L D Lᴴ` without pivoting. On a pivot with
    /// `|d| ≤ tol·max|A_ii|` returns the offending row.
    pub fn factor(mut self, tol: f64) -> Result<ProfileFactor<T>, (usize, f64)> {
        let n = self.dim();
        let scale = (0..n).map(|i| self.get(i, i).re.abs().to_f64()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut d = vec![T::zero(); n];
        let mut t: Vec<Cx<T>> = Vec::new();
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            t.clear();
            t.extend_from_slice(&self.data[oi..oi + (i - fi)]);
            for j in fi..i {
                let fj = self.first[j];
                let lo = fi.max(fj);
                let oj = self.offset[j];
                let lj = &self.data[oj + lo - fj..oj + j - fj];
                let ti = &t[lo - fi..j - fi];
                let mut acc = Cx::zero();
                for (a, b) in ti.iter().zip(lj) {
                    acc += *a * b.conj();
                }
                t[j - fi] -= acc;
            }
            let mut di = self.data[oi + i - fi].re;
            for j in fi..i {
                let l = t[j - fi] / d[j];
                di -= (t[j - fi] * l.conj()).re;
                self.data[oi + j - fi] = l;
            }
            if !(di.abs().to_f64() > tol * scale) {
                return Err((i, di.to_f64()));
            }
            d[i] = di;
            self.data[oi + i - fi] = Cx::one();
        }
        Ok(ProfileFactor { l: self, d })
    }
}

#[derive(Clone, Debug)]
pub struct ProfileFactor<T: Real> {
    l: ProfileMatrix<T>,
    d: Vec<T>,
}

impl<T: Real> ProfileFactor<T> {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [Cx<T>]) {
        let n = self.dim();
        for i in 0..n {
            let f = self.l.first[i];
            let row = self.l.row(i);
            let mut acc = Cx::zero();
            for (k, &a) in row[..i - f].iter().enumerate() {
                acc += a * b[f + k];
            }
            b[i] -= acc;
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let f = self.l.first[i];
            let row = self.l.row(i);
            let xi = b[i];
            for (k, &a) in row[..i - f].iter().enumerate() {
                b[f + k] -= a.conj() * xi;
            }
        }
    }
}

/// Tall matrix with four columns, stored by rows.
pub type Panel<T> = Vec<[Cx<T>; 4]>;

fn column_dot<T: Real>(p: &Panel<T>, a: usize, b: usize) -> Cx<T> {
    p.iter().fold(Cx::zero(), |acc, r| acc + r[a].conj() * r[b])
}

fn column_norm2<T: Real>(p: &Panel<T>, a: usize) -> T {
    p.iter().fold(T::zero(), |acc, r| acc + abs2(r[a]))
}

/// Thin QR `P = Q R` by classical Gram-Schmidt with one reorthogonalization.
/// `R` is upper triangular with a real non-negative diagonal.
pub fn thin_qr<T: Real>(p: &Panel<T>) -> (Panel<T>, Block<T>) {
    let mut q = p.clone();
    let mut r = block_zero::<T>();
    for j in 0..4 {
        for _pass in 0..2 {
            let coeffs: Vec<Cx<T>> = (0..j).map(|i| column_dot(&q, i, j)).collect();
            for row in q.iter_mut() {
                let mut v = row[j];
                for (i, c) in coeffs.iter().enumerate() {
                    v -= row[i] * *c;
                }
                row[j] = v;
            }
            for (i, c) in coeffs.into_iter().enumerate() {
                r[i][j] += c;
            }
        }
        let nrm = column_norm2(&q, j).sqrt();
        r[j][j] = Cx::new(nrm, T::zero());
        if nrm > T::zero() {
            for row in q.iter_mut() {
                row[j] /= nrm;
            }
        }
    }
    (q, r)
}

/// Singular values (ascending) and right singular vectors (as columns of
/// the returned block, matching the order) of a four-column panel by
/// one-sided Jacobi rotations.
pub fn panel_svd<T: Real>(p: &Panel<T>) -> ([T; 4], Block<T>) {
    let mut a = p.clone();
    let mut v = block_identity::<T>();
    let eps = T::from_f64(T::EPSILON);
    for _sweep in 0..60 {
        let mut rotated = false;
        for pi in 0..3 {
            for qi in pi + 1..4 {
                let alpha = column_norm2(&a, pi);
                let beta = column_norm2(&a, qi);
                let gamma = column_dot(&a, pi, qi);
                let g = abs2(gamma).sqrt();
                if g.is_zero() || !(g > eps * (alpha * beta).sqrt()) {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let tau = (beta - alpha) / (g + g);
                let one = T::one();
                let mut t = one / (tau.abs() + (one + tau * tau).sqrt());
                if tau < T::zero() {
                    t = -t;
                }
                let c = one / (one + t * t).sqrt();
                let s = c * t;
                let ec = e.conj();
                for row in a.iter_mut() {
                    let (x, y) = (row[pi], row[qi]);
                    row[pi] = x * c - y * ec * s;
                    row[qi] = x * s + y * ec * c;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[pi], row[qi]);
                    row[pi] = x * c - y * ec * s;
                    row[qi] = x * s + y * ec * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: [T; 4] = std::array::from_fn(|j| column_norm2(&a, j).sqrt());
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&x, &y| norms[x].partial_cmp(&norms[y]).unwrap_or(std::cmp::Ordering::Equal));
    let sig = idx.map(|k| norms[k]);
    let vs: Block<T> = std::array::from_fn(|r| std::array::from_fn(|c| v[r][idx[c]]));
    (sig, vs)
}

/// Solves `R x = b` for upper triangular `R`.
pub fn upper_solve<T: Real>(r: &Block<T>, b: &[Cx<T>; 4]) -> [Cx<T>; 4] {
    let mut x = *b;
    for i in (0..4).rev() {
        let mut s = x[i];
        for k in i + 1..4 {
            s -= r[i][k] * x[k];
        }
        x[i] = s / r[i][i];
    }
    x
}

/// General 4x4 inverse by Gauss-Jordan with partial pivoting.
pub fn block_inverse<T: Real>(a: &Block<T>) -> Option<Block<T>> {
    let mut m = *a;
    let mut inv = block_identity::<T>();
    for c in 0..4 {
        let p = (c..4).max_by(|&x, &y| abs2(m[x][c]).partial_cmp(&abs2(m[y][c])).unwrap())?;
        if abs2(m[p][c]).is_zero() {
            return None;
        }
        m.swap(c, p);
        inv.swap(c, p);
        let piv = m[c][c];
        for j in 0..4 {
            m[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..4 {
            if r != c {
                let f = m[r][c];
                for j in 0..4 {
                    let (mc, ic) = (m[c][j], inv[c][j]);
                    m[r][j] -= f * mc;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}
