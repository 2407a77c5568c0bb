//! Unit-cell mean values and space-time maps of Hermitian forms `Ψ†OΨ`.
//!
//! Means are Parseval sums over the Fourier amplitudes `c(n) = S(n)c₀`; only
//! operators that carry the vector potential mix different `n`.

use rayon::prelude::*;

use crate::crystal::CrystalConfig;
use crate::error::{Error, Result};
use crate::lattice::SolutionFamily;
use crate::spinor::{alpha_dot, dirac_matrices, Bispinor, Matrix4, C64};
use crate::stencil::LatticeIndex;

/// Dimensionless means: `⟨H⟩/mc²`, `⟨p_k⟩/mc`, `⟨j_k⟩/c` and `⟨Σ_k⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableSet {
    pub hamiltonian: f64,
    pub momentum: [f64; 3],
    pub velocity: [f64; 3],
    pub spin: [f64; 3],
    /// `⟨U⟩`, one by construction.
    pub unit: f64,
    /// Largest imaginary part met among the means.
    pub max_imag: f64,
}

fn amplitude_map(family: &SolutionFamily, c0: &Bispinor) -> Result<(Vec<Bispinor>, f64)> {
    let c = family.amplitudes(c0);
    let norm: f64 = c.iter().map(Bispinor::norm_sqr).sum();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok((c, norm))
}

fn real_part(z: C64, max_imag: &mut f64) -> f64 {
    *max_imag = max_imag.max(z.im.abs());
    z.re
}

/// Mean values over the unit cell for the wave function generated by `c₀`.
pub fn mean_values(family: &SolutionFamily, c0: &Bispinor, cfg: &CrystalConfig, q: [f64; 3]) -> Result<ObservableSet> {
    let (c, norm) = amplitude_map(family, c0)?;
    let dm = dirac_matrices();
    let region = &family.region;
    let table = cfg.shift_table();
    let sign = family.coupling.factor();
    let om = cfg.omega;

    let mut h = C64::new(0.0, 0.0);
    let mut p = [C64::new(0.0, 0.0); 3];
    let mut a = [C64::new(0.0, 0.0); 3];
    let mut s = [C64::new(0.0, 0.0); 3];
    for (i, n) in region.points().iter().enumerate() {
        let v = &c[i];
        let w: [C64; 3] = std::array::from_fn(|k| C64::new(q[k] + n.0[k] as f64 * om, 0.0));
        h += v.form(&(dm.alpha[3] + alpha_dot(&w)));
        let n2 = v.norm_sqr();
        for k in 0..3 {
            p[k] += w[k] * n2;
            a[k] += v.form(&dm.alpha[k]);
            s[k] += v.form(&dm.sigma[k]);
        }
        for e in &table.entries {
            let m = LatticeIndex(std::array::from_fn(|t| n.0[t] + e.s[t]));
            if let Some(j) = region.index_of(&m) {
                let x = alpha_dot(&e.a).scale_re(sign);
                h += v.dot(&(x * c[j]));
                let overlap = v.dot(&c[j]);
                for k in 0..3 {
                    p[k] += e.a[k] * overlap * sign;
                }
            }
        }
    }
    let mut max_imag: f64 = 0.0;
    let mut re = |z: C64| real_part(z / norm, &mut max_imag);
    let hamiltonian = re(h);
    let momentum = p.map(&mut re);
    let velocity = a.map(&mut re);
    let spin = s.map(&mut re);
    let unit = c.iter().map(Bispinor::norm_sqr).sum::<f64>() / norm;
    Ok(ObservableSet { hamiltonian, momentum, velocity, spin, unit, max_imag })
}

/// Sampling window of a field map: one spatial axis against `X₄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapGrid {
    /// Spatial axis `0..3` swept by the map.
    pub axis: usize,
    /// Fixed `(X₁, X₂, X₃)`; the swept axis adds to its entry.
    pub offset: [f64; 3],
    /// Start of the `X₄` window.
    pub time_offset: f64,
    pub space_points: usize,
    pub time_points: usize,
    /// Window length along both axes.
    pub span: f64,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self { axis: 2, offset: [0.0; 3], time_offset: 0.0, space_points: 32, time_points: 32, span: 1.0 }
    }
}

impl MapGrid {
    pub fn space_coords(&self) -> Vec<f64> {
        (0..self.space_points).map(|i| self.span * i as f64 / self.space_points as f64).collect()
    }

    pub fn time_coords(&self) -> Vec<f64> {
        (0..self.time_points).map(|i| self.time_offset + self.span * i as f64 / self.time_points as f64).collect()
    }
}

/// `Ψ†OΨ / Σ|c(n)|²` sampled on a grid; `values[i][j]` is at
/// `(space[i], time[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMap {
    pub operator: String,
    pub grid: MapGrid,
    pub space: Vec<f64>,
    pub time: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub max_imag: f64,
}

/// `Ψ(r′, X₄) = Σ c(n) exp(2πi(n·r′ − n₄X₄))`; the common phase of `q/Ω`
/// and `q₄/Ω` cancels in every Hermitian form.
fn psi(points: &[LatticeIndex], c: &[Bispinor], r: [f64; 3], x4: f64) -> Bispinor {
    let mut out = Bispinor::zero();
    for (n, v) in points.iter().zip(c) {
        let phase = std::f64::consts::TAU * (n.0[0] as f64 * r[0] + n.0[1] as f64 * r[1] + n.0[2] as f64 * r[2] - n.0[3] as f64 * x4);
        out = out + v.scale(C64::from_polar(1.0, phase));
    }
    out
}

pub fn field_map(family: &SolutionFamily, c0: &Bispinor, op: &Matrix4, name: &str, grid: &MapGrid) -> Result<FieldMap> {
    if grid.axis > 2 || grid.space_points == 0 || grid.time_points == 0 || !grid.span.is_finite() {
        return Err(Error::Invalid(format!("bad map grid {grid:?}")));
    }
    let (c, norm) = amplitude_map(family, c0)?;
    let points = family.region.points();
    let space = grid.space_coords();
    let time = grid.time_coords();
    let rows: Vec<(Vec<f64>, f64)> = space
        .par_iter()
        .map(|&x| {
            let mut r = grid.offset;
            r[grid.axis] += x;
            let mut imag: f64 = 0.0;
            let row = time
                .iter()
                .map(|&t| {
                    let p = psi(points, &c, r, t);
                    let z = p.form(op) / norm;
                    imag = imag.max(z.im.abs());
                    z.re
                })
                .collect();
            (row, imag)
        })
        .collect();
    let max_imag = rows.iter().map(|(_, i)| *i).fold(0.0, f64::max);
    let values = rows.into_iter().map(|(r, _)| r).collect();
    Ok(FieldMap { operator: name.to_string(), grid: *grid, space, time, values, max_imag })
}

impl FieldMap {
    pub fn mean(&self) -> f64 {
        let n = self.values.iter().map(Vec::len).sum::<usize>() as f64;
        self.values.iter().flatten().sum::<f64>() / n
    }

    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Average of `Ψ†OΨ / Σ|c|²` over the full 4D unit cell by uniform
/// quadrature with `m` points per axis. Exact once `m` exceeds the largest
/// index difference in the region.
pub fn cell_average(family: &SolutionFamily, c0: &Bispinor, op: &Matrix4, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Invalid("cell quadrature needs at least one point".into()));
    }
    let (c, norm) = amplitude_map(family, c0)?;
    let points = family.region.points();
    let h = 1.0 / m as f64;
    let sums: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / m, ij % m);
            let mut acc = 0.0;
            for k in 0..m {
                for t in 0..m {
                    let p = psi(points, &c, [i as f64 * h, j as f64 * h, k as f64 * h], t as f64 * h);
                    acc += p.form(op).re;
                }
            }
            acc
        })
        .collect();
    Ok(sums.iter().sum::<f64>() / (m as f64).powi(4) / norm)
}

/// `ρ₁c_j` for each basis amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedAmplitude {
    pub amplitude: Bispinor,
    /// `ρ₁c_j` vanishes to rounding.
    pub annihilated: bool,
}

pub fn dressed_amplitudes(rho1: &Matrix4, basis: &[Bispinor; 4]) -> [DressedAmplitude; 4] {
    basis.map(|b| {
        let amplitude = *rho1 * b;
        DressedAmplitude { amplitude, annihilated: amplitude.norm() <= 1e-10 * b.norm() }
    })
}

/// Uncentered correlation `⟨a, b⟩/(‖a‖‖b‖)`: measures pointwise sign
/// agreement of two maps including their offsets.
pub fn uncentered_correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Pearson coefficient of the fluctuations about each map's mean.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let da: Vec<f64> = a.iter().map(|x| x - ma).collect();
    let db: Vec<f64> = b.iter().map(|x| x - mb).collect();
    uncentered_correlation(&da, &db)
}
