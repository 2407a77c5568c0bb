//! Lattice geometry and the coupling constants of the second-order row
//! equations.

pub mod appendix;

use std::ops::{Add, Neg, Sub};

use crate::crystal::{CrystalConfig, ShiftTable, UNIT_SHIFTS};
use crate::error::{Error, Result};
use crate::freespace::WaveFourVector;
use crate::spinor::{alpha_dot, sigma_dot, Matrix4, C64};

/// Point of the even-sum 4D integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex(pub [i32; 4]);

impl LatticeIndex {
    pub const ORIGIN: Self = Self([0; 4]);

    pub fn new(n: [i32; 4]) -> Result<Self> {
        if n.iter().sum::<i32>().rem_euclid(2) != 0 {
            return Err(Error::OddLatticeIndex(n));
        }
        Ok(Self(n))
    }

    pub fn g4d(&self) -> u32 {
        g4d(self.0)
    }

    pub fn spatial(&self) -> [i32; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }
}

impl Add for LatticeIndex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for LatticeIndex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for LatticeIndex {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|x| -x))
    }
}

/// Lattice displacement together with its `g₄d` length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shift {
    pub s: [i32; 4],
    pub g: u32,
}

impl Shift {
    pub fn new(s: [i32; 4]) -> Self {
        Self { s, g: g4d(s) }
    }

    pub fn index(&self) -> LatticeIndex {
        LatticeIndex(self.s)
    }
}

/// `max{|s₁| + |s₂| + |s₃|, |s₄|}`.
pub fn g4d(s: [i32; 4]) -> u32 {
    let spatial = s[0].unsigned_abs() + s[1].unsigned_abs() + s[2].unsigned_abs();
    spatial.max(s[3].unsigned_abs())
}

/// Every even-sum point with `g₄d ≤ radius`, in lexicographic order.
pub fn ball(radius: u32) -> Vec<LatticeIndex> {
    let r = radius as i32;
    let mut out = Vec::new();
    for n1 in -r..=r {
        for n2 in -r..=r {
            for n3 in -r..=r {
                for n4 in -r..=r {
                    let n = [n1, n2, n3, n4];
                    if (n1 + n2 + n3 + n4).rem_euclid(2) == 0 && g4d(n) <= radius {
                        out.push(LatticeIndex(n));
                    }
                }
            }
        }
    }
    out
}

/// The stencil shifts up to `g_max ∈ {1, 2}`: the centre, the 12 unit
/// shifts in conventional order, then the 56 shifts with `g₄d = 2` in
/// lexicographic order.
pub fn enumerate_shifts(g_max: u32) -> Result<Vec<Shift>> {
    if !(1..=2).contains(&g_max) {
        return Err(Error::Invalid(format!("g_max must be 1 or 2, got {g_max}")));
    }
    let mut out = vec![Shift::new([0; 4])];
    out.extend(UNIT_SHIFTS.iter().map(|&s| Shift::new(s)));
    if g_max == 2 {
        out.extend(ball(2).into_iter().filter(|n| n.g4d() == 2).map(|n| Shift::new(n.0)));
    }
    Ok(out)
}

fn cross(a: [f64; 3], b: [C64; 3]) -> [C64; 3] {
    [b[2] * a[1] - b[1] * a[2], b[0] * a[2] - b[2] * a[0], b[1] * a[0] - b[0] * a[1]]
}

/// First-order-in-field coupling `N₁(m, s)` of the second-order row:
/// `−2(a·w)U + iΩ Σ·(ŝ×a) − (s₄Ω + 2w₄) α·a` with `w = q + m Ω`,
/// `w₄ = q₄ + m₄Ω` evaluated at the row point `m`.
pub fn n1_matrix(m: LatticeIndex, s: [i32; 4], cfg: &CrystalConfig, k: &WaveFourVector) -> Result<Matrix4> {
    let table = ShiftTable::new(cfg);
    let entry = table.entries.iter().find(|e| e.s == s).ok_or(Error::NotUnitShift(s))?;
    let om = cfg.omega;
    let w: [f64; 3] = std::array::from_fn(|j| k.q[j] + m.0[j] as f64 * om);
    let w4 = k.q4 + m.0[3] as f64 * om;
    let a = entry.a;
    let a_dot_w: C64 = (0..3).map(|j| a[j] * w[j]).sum();
    let sxa = cross(entry.dir, a).map(|z| z * C64::new(0.0, om));
    Ok(Matrix4::identity().scale(a_dot_w * -2.0) + sigma_dot(&sxa) - alpha_dot(&a).scale_re(s[3] as f64 * om + 2.0 * w4))
}

/// Every way of writing `s` as an unordered pair of unit shifts.
pub fn unit_pairs(s: [i32; 4]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..12 {
        for v in u..12 {
            let t: [i32; 4] = std::array::from_fn(|k| UNIT_SHIFTS[u][k] + UNIT_SHIFTS[v][k]);
            if t == s {
                out.push((u, v));
            }
        }
    }
    out
}

/// Second-order coupling `N₂(s) = Σ μ_uv a(s_u)·a(s_v)` over unordered unit
/// pairs with `s_u + s_v = s`, `μ = 2` for distinct members and 1 otherwise.
pub fn n2_scalar(s: [i32; 4], cfg: &CrystalConfig) -> Result<C64> {
    let pairs = unit_pairs(s);
    if pairs.is_empty() {
        return Err(Error::NotDecomposable(s));
    }
    let t = ShiftTable::new(cfg);
    Ok(pairs
        .into_iter()
        .map(|(u, v)| {
            let mu = if u == v { 1.0 } else { 2.0 };
            let a = t.entries[u].a;
            let b = t.entries[v].a;
            (0..3).map(|k| a[k] * b[k]).sum::<C64>() * mu
        })
        .sum())
}
