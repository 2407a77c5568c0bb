//! Six-wave electromagnetic space-time crystals.
//!
//! Wave `j = 1..3` travels along `−e_j`, wave `j = 4..6` along `+e_{j−3}`;
//! both carry the temporal lattice step `s₄ = −1`. The conjugate field
//! components sit at the negated shifts.

use crate::spinor::C64;

pub type CVec3 = [C64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrystalConfig {
    /// `A₁..A₆`, dimensionless.
    pub amplitudes: [CVec3; 6],
    /// Dimensionless field frequency `ħω₀/(m_e c²)`.
    pub omega: f64,
}

const Z: C64 = C64::new(0.0, 0.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl CrystalConfig {
    pub fn new(amplitudes: [CVec3; 6], omega: f64) -> Self {
        Self { amplitudes, omega }
    }

    pub fn free(omega: f64) -> Self {
        Self { amplitudes: [[Z; 3]; 6], omega }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { amplitudes: self.amplitudes.map(|a| a.map(|z| z * t)), omega: self.omega }
    }

    pub fn is_free(&self) -> bool {
        self.amplitudes.iter().flatten().all(|z| *z == Z)
    }

    pub fn shift_table(&self) -> ShiftTable {
        ShiftTable::new(self)
    }
}

/// Default dimensionless frequency of the reference operating point.
pub const DEFAULT_OMEGA: f64 = 0.1;

/// Linearly polarized crystal: `A₁ = −A₄ = A_m e₂`, `A₂ = −A₅ = A_m e₃`,
/// `A₃ = −A₆ = A_m e₁`.
pub fn estc1(a_m: f64) -> CrystalConfig {
    let a = re(a_m);
    let e1 = [a, Z, Z];
    let e2 = [Z, a, Z];
    let e3 = [Z, Z, a];
    let neg = |v: CVec3| v.map(|z| -z);
    CrystalConfig::new([e2, e3, e1, neg(e2), neg(e3), neg(e1)], DEFAULT_OMEGA)
}

/// Circularly polarized crystal: `A₁ = A₄ = A_m(e₂ + ie₃)/√2` and cyclic.
pub fn estc2(a_m: f64) -> CrystalConfig {
    let a = re(a_m / std::f64::consts::SQRT_2);
    let ia = C64::new(0.0, a_m / std::f64::consts::SQRT_2);
    let w1 = [Z, a, ia];
    let w2 = [ia, Z, a];
    let w3 = [a, ia, Z];
    CrystalConfig::new([w1, w2, w3, w1, w2, w3], DEFAULT_OMEGA)
}

/// `I_A = 2 Σ_j A_j·A_j*`.
pub fn intensity(cfg: &CrystalConfig) -> f64 {
    2.0 * cfg.amplitudes.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()
}

/// One coupling direction of the lattice stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftEntry {
    pub s: [i32; 4],
    /// Field amplitude attached to the shift.
    pub a: CVec3,
    /// Spatial part of `s` as a unit vector.
    pub dir: [f64; 3],
    /// Wave index `1..=6`.
    pub wave: usize,
    /// Whether `a` is the conjugate of the wave amplitude.
    pub conjugate: bool,
}

/// The 12 unit shifts in their conventional order with attached amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftTable {
    pub entries: [ShiftEntry; 12],
}

/// Unit shifts ordered as in the reference coupling tables.
pub const UNIT_SHIFTS: [[i32; 4]; 12] = [
    [0, 0, -1, -1],
    [0, -1, 0, -1],
    [-1, 0, 0, -1],
    [1, 0, 0, -1],
    [0, 1, 0, -1],
    [0, 0, 1, -1],
    [0, 0, -1, 1],
    [0, -1, 0, 1],
    [-1, 0, 0, 1],
    [1, 0, 0, 1],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
];

/// Wave index whose amplitude (or its conjugate) attaches to `s`.
pub fn wave_of_shift(s: [i32; 4]) -> Option<(usize, bool)> {
    let spatial = [s[0], s[1], s[2]];
    let nz: Vec<usize> = (0..3).filter(|&k| spatial[k] != 0).collect();
    if nz.len() != 1 || spatial[nz[0]].abs() != 1 || s[3].abs() != 1 {
        return None;
    }
    let axis = nz[0];
    // Orient to the s₄ = −1 representative.
    let sign = spatial[axis] * -s[3];
    let wave = if sign < 0 { axis + 1 } else { axis + 4 };
    Some((wave, s[3] == 1))
}

impl ShiftTable {
    pub fn new(cfg: &CrystalConfig) -> Self {
        let entries = UNIT_SHIFTS.map(|s| {
            let (wave, conjugate) = wave_of_shift(s).expect("unit shift");
            let a0 = cfg.amplitudes[wave - 1];
            let a = if conjugate { a0.map(|z| z.conj()) } else { a0 };
            ShiftEntry { s, a, dir: [s[0] as f64, s[1] as f64, s[2] as f64], wave, conjugate }
        });
        Self { entries }
    }

    pub fn amplitude_of_shift(&self, s: [i32; 4]) -> Option<CVec3> {
        self.entries.iter().find(|e| e.s == s).map(|e| e.a)
    }
}
