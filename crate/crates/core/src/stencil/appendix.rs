//! Symbolic transcription of the published coupling tables, used as an
//! independent oracle for [`n1_matrix`](super::n1_matrix) and
//! [`n2_scalar`](super::n2_scalar).
//!
//! `A(j, k)` denotes the `k`-th Cartesian component of wave `j`; a trailing
//! `*` marks complex conjugation.

use std::collections::HashSet;

use crate::crystal::{CrystalConfig, UNIT_SHIFTS};
use crate::freespace::WaveFourVector;
use crate::spinor::{DiracBasis, C64};

use super::{n1_matrix, n2_scalar, LatticeIndex};

/// Amplitude component `A_{jk}` or its conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Amp {
    pub wave: u8,
    pub comp: u8,
    pub conj: bool,
}

const fn a(wave: u8, comp: u8) -> Amp {
    Amp { wave, comp, conj: false }
}

const fn ac(wave: u8, comp: u8) -> Amp {
    Amp { wave, comp, conj: true }
}

/// Kinematic factor multiplying an amplitude in an `N₁` entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    W(u8),
    Omega,
    OmegaMinus,
    OmegaPlus,
}

/// `coeff · A · factor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct N1Term {
    pub position: u8,
    pub coeff: C64,
    pub amp: Amp,
    pub factor: Factor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct N1Template {
    pub s: [i32; 4],
    /// Nonzero entries; every other basis position is zero.
    pub terms: Vec<N1Term>,
}

const M2: C64 = C64::new(-2.0, 0.0);
const PI: C64 = C64::new(0.0, 1.0);
const MI: C64 = C64::new(0.0, -1.0);
const M1: C64 = C64::new(-1.0, 0.0);

fn t(position: u8, coeff: C64, amp: Amp, factor: Factor) -> N1Term {
    N1Term { position, coeff, amp, factor }
}

/// The twelve `N₁` Dirac-set templates (positions are 1-based).
pub fn n1_templates() -> Vec<N1Template> {
    use Factor::*;
    let tpl = |s: [i32; 4], terms: Vec<N1Term>| N1Template { s, terms };
    vec![
        tpl(
            [0, 0, -1, -1],
            vec![
                t(1, M2, a(3, 1), W(1)),
                t(1, M2, a(3, 2), W(2)),
                t(3, PI, a(3, 2), Omega),
                t(4, MI, a(3, 1), Omega),
                t(11, M1, a(3, 1), OmegaMinus),
                t(12, M1, a(3, 2), OmegaMinus),
            ],
        ),
        tpl(
            [0, -1, 0, -1],
            vec![
                t(1, M2, a(2, 1), W(1)),
                t(1, M2, a(2, 3), W(3)),
                t(2, PI, a(2, 1), Omega),
                t(3, MI, a(2, 3), Omega),
                t(10, M1, a(2, 3), OmegaMinus),
                t(11, M1, a(2, 1), OmegaMinus),
            ],
        ),
        tpl(
            [-1, 0, 0, -1],
            vec![
                t(1, M2, a(1, 2), W(2)),
                t(1, M2, a(1, 3), W(3)),
                t(2, MI, a(1, 2), Omega),
                t(4, PI, a(1, 3), Omega),
                t(10, M1, a(1, 3), OmegaMinus),
                t(12, M1, a(1, 2), OmegaMinus),
            ],
        ),
        tpl(
            [1, 0, 0, -1],
            vec![
                t(1, M2, a(4, 2), W(2)),
                t(1, M2, a(4, 3), W(3)),
                t(2, PI, a(4, 2), Omega),
                t(4, MI, a(4, 3), Omega),
                t(10, M1, a(4, 3), OmegaMinus),
                t(12, M1, a(4, 2), OmegaMinus),
            ],
        ),
        tpl(
            [0, 1, 0, -1],
            vec![
                t(1, M2, a(5, 1), W(1)),
                t(1, M2, a(5, 3), W(3)),
                t(2, MI, a(5, 1), Omega),
                t(3, PI, a(5, 3), Omega),
                t(10, M1, a(5, 3), OmegaMinus),
                t(11, M1, a(5, 1), OmegaMinus),
            ],
        ),
        tpl(
            [0, 0, 1, -1],
            vec![
                t(1, M2, a(6, 1), W(1)),
                t(1, M2, a(6, 2), W(2)),
                t(3, MI, a(6, 2), Omega),
                t(4, PI, a(6, 1), Omega),
                t(11, M1, a(6, 1), OmegaMinus),
                t(12, M1, a(6, 2), OmegaMinus),
            ],
        ),
        tpl(
            [0, 0, -1, 1],
            vec![
                t(1, M2, ac(6, 1), W(1)),
                t(1, M2, ac(6, 2), W(2)),
                t(3, PI, ac(6, 2), Omega),
                t(4, MI, ac(6, 1), Omega),
                t(11, M1, ac(6, 1), OmegaPlus),
                t(12, M1, ac(6, 2), OmegaPlus),
            ],
        ),
        tpl(
            [0, -1, 0, 1],
            vec![
                t(1, M2, ac(5, 1), W(1)),
                t(1, M2, ac(5, 3), W(3)),
                t(2, PI, ac(5, 1), Omega),
                t(3, MI, ac(5, 3), Omega),
                t(10, M1, ac(5, 3), OmegaPlus),
                t(11, M1, ac(5, 1), OmegaPlus),
            ],
        ),
        tpl(
            [-1, 0, 0, 1],
            vec![
                t(1, M2, ac(4, 2), W(2)),
                t(1, M2, ac(4, 3), W(3)),
                t(2, MI, ac(4, 2), Omega),
                t(4, PI, ac(4, 3), Omega),
                t(10, M1, ac(4, 3), OmegaPlus),
                t(12, M1, ac(4, 2), OmegaPlus),
            ],
        ),
        tpl(
            [1, 0, 0, 1],
            vec![
                t(1, M2, ac(1, 2), W(2)),
                t(1, M2, ac(1, 3), W(3)),
                t(2, PI, ac(1, 2), Omega),
                t(4, MI, ac(1, 3), Omega),
                t(10, M1, ac(1, 3), OmegaPlus),
                t(12, M1, ac(1, 2), OmegaPlus),
            ],
        ),
        tpl(
            [0, 1, 0, 1],
            vec![
                t(1, M2, ac(2, 1), W(1)),
                t(1, M2, ac(2, 3), W(3)),
                t(2, MI, ac(2, 1), Omega),
                t(3, PI, ac(2, 3), Omega),
                t(10, M1, ac(2, 3), OmegaPlus),
                t(11, M1, ac(2, 1), OmegaPlus),
            ],
        ),
        tpl(
            [0, 0, 1, 1],
            vec![
                t(1, M2, ac(3, 1), W(1)),
                t(1, M2, ac(3, 2), W(2)),
                t(3, MI, ac(3, 2), Omega),
                t(4, PI, ac(3, 1), Omega),
                t(11, M1, ac(3, 1), OmegaPlus),
                t(12, M1, ac(3, 2), OmegaPlus),
            ],
        ),
    ]
}

/// One `N₂` entry: `Σ coeff · A · A′`.
#[derive(Clone, Debug, PartialEq)]
pub struct N2Entry {
    pub terms: Vec<(f64, Amp, Amp)>,
}

fn two(pairs: &[(Amp, Amp)]) -> N2Entry {
    N2Entry { terms: pairs.iter().map(|&(x, y)| (2.0, x, y)).collect() }
}

/// `(x + iy)(x − iy) = x² + y²`.
fn square(x: Amp, y: Amp) -> N2Entry {
    N2Entry { terms: vec![(1.0, x, x), (1.0, y, y)] }
}

/// The 56 `N₂` coefficients in published order.
pub fn n2_table() -> Vec<N2Entry> {
    vec![
        two(&[(a(1, 2), a(4, 2)), (a(1, 3), a(4, 3)), (a(2, 1), a(5, 1)), (a(2, 3), a(5, 3)), (a(3, 1), a(6, 1)), (a(3, 2), a(6, 2))]),
        two(&[(ac(1, 2), ac(4, 2)), (ac(1, 3), ac(4, 3)), (ac(2, 1), ac(5, 1)), (ac(2, 3), ac(5, 3)), (ac(3, 1), ac(6, 1)), (ac(3, 2), ac(6, 2))]),
        two(&[(a(3, 1), ac(6, 1)), (a(3, 2), ac(6, 2))]),
        two(&[(a(3, 1), ac(5, 1)), (a(2, 1), ac(6, 1))]),
        two(&[(a(3, 2), ac(4, 2)), (a(1, 2), ac(6, 2))]),
        two(&[(ac(1, 2), a(3, 2)), (a(4, 2), ac(6, 2))]),
        two(&[(ac(2, 1), a(3, 1)), (a(5, 1), ac(6, 1))]),
        two(&[(a(2, 1), ac(5, 1)), (a(2, 3), ac(5, 3))]),
        two(&[(a(2, 3), ac(4, 3)), (a(1, 3), ac(5, 3))]),
        two(&[(ac(1, 3), a(2, 3)), (a(4, 3), ac(5, 3))]),
        two(&[(a(1, 2), ac(4, 2)), (a(1, 3), ac(4, 3))]),
        two(&[(ac(1, 2), a(4, 2)), (ac(1, 3), a(4, 3))]),
        two(&[(a(1, 3), ac(2, 3)), (ac(4, 3), a(5, 3))]),
        two(&[(ac(2, 3), a(4, 3)), (ac(1, 3), a(5, 3))]),
        two(&[(ac(2, 1), a(5, 1)), (ac(2, 3), a(5, 3))]),
        two(&[(a(2, 1), ac(3, 1)), (ac(5, 1), a(6, 1))]),
        two(&[(a(1, 2), ac(3, 2)), (ac(4, 2), a(6, 2))]),
        two(&[(ac(3, 2), a(4, 2)), (ac(1, 2), a(6, 2))]),
        two(&[(ac(3, 1), a(5, 1)), (ac(2, 1), a(6, 1))]),
        two(&[(ac(3, 1), a(6, 1)), (ac(3, 2), a(6, 2))]),
        square(a(3, 1), a(3, 2)),
        two(&[(a(2, 1), a(3, 1))]),
        two(&[(a(1, 2), a(3, 2))]),
        two(&[(a(3, 2), a(4, 2))]),
        two(&[(a(3, 1), a(5, 1))]),
        square(a(2, 1), a(2, 3)),
        two(&[(a(1, 3), a(2, 3))]),
        two(&[(a(2, 3), a(4, 3))]),
        square(a(1, 2), a(1, 3)),
        square(a(4, 2), a(4, 3)),
        two(&[(a(1, 3), a(5, 3))]),
        two(&[(a(4, 3), a(5, 3))]),
        square(a(5, 1), a(5, 3)),
        two(&[(a(2, 1), a(6, 1))]),
        two(&[(a(1, 2), a(6, 2))]),
        two(&[(a(4, 2), a(6, 2))]),
        two(&[(a(5, 1), a(6, 1))]),
        square(a(6, 1), a(6, 2)),
        square(ac(6, 1), ac(6, 2)),
        two(&[(ac(5, 1), ac(6, 1))]),
        two(&[(ac(4, 2), ac(6, 2))]),
        two(&[(ac(1, 2), ac(6, 2))]),
        two(&[(ac(2, 1), ac(6, 1))]),
        square(ac(5, 1), ac(5, 3)),
        two(&[(ac(4, 3), ac(5, 3))]),
        two(&[(ac(1, 3), ac(5, 3))]),
        square(ac(4, 2), ac(4, 3)),
        square(ac(1, 2), ac(1, 3)),
        two(&[(ac(2, 3), ac(4, 3))]),
        two(&[(ac(1, 3), ac(2, 3))]),
        square(ac(2, 1), ac(2, 3)),
        two(&[(ac(3, 1), ac(5, 1))]),
        two(&[(ac(3, 2), ac(4, 2))]),
        two(&[(ac(1, 2), ac(3, 2))]),
        two(&[(ac(2, 1), ac(3, 1))]),
        square(ac(3, 1), ac(3, 2)),
    ]
}

fn amp_value(cfg: &CrystalConfig, x: Amp) -> C64 {
    let z = cfg.amplitudes[x.wave as usize - 1][x.comp as usize - 1];
    if x.conj {
        z.conj()
    } else {
        z
    }
}

/// Lattice shift carried by an amplitude symbol.
pub fn amp_shift(x: Amp) -> [i32; 4] {
    let s = UNIT_SHIFTS.iter().copied().find(|&s| crate::crystal::wave_of_shift(s) == Some((x.wave as usize, false))).expect("wave index 1..=6");
    if x.conj {
        s.map(|v| -v)
    } else {
        s
    }
}

impl N2Entry {
    pub fn evaluate(&self, cfg: &CrystalConfig) -> C64 {
        self.terms.iter().map(|&(c, x, y)| amp_value(cfg, x) * amp_value(cfg, y) * c).sum()
    }

    /// The common shift of all monomials, if they agree.
    pub fn shift(&self) -> Option<[i32; 4]> {
        let mut out = None;
        for &(_, x, y) in &self.terms {
            let (sx, sy) = (amp_shift(x), amp_shift(y));
            let s: [i32; 4] = std::array::from_fn(|k| sx[k] + sy[k]);
            match out {
                None => out = Some(s),
                Some(prev) if prev != s => return None,
                _ => {}
            }
        }
        out
    }
}

impl N1Template {
    /// Dirac set predicted by the template at row point `m`.
    pub fn evaluate(&self, m: LatticeIndex, cfg: &CrystalConfig, k: &WaveFourVector) -> [C64; 16] {
        let om = cfg.omega;
        let w = |j: u8| k.q[j as usize - 1] + m.0[j as usize - 1] as f64 * om;
        let w4 = k.q4 + m.0[3] as f64 * om;
        let mut out = [C64::new(0.0, 0.0); 16];
        for term in &self.terms {
            let f = match term.factor {
                Factor::W(j) => w(j),
                Factor::Omega => om,
                Factor::OmegaMinus => -om + 2.0 * w4,
                Factor::OmegaPlus => om + 2.0 * w4,
            };
            out[term.position as usize - 1] += term.coeff * amp_value(cfg, term.amp) * f;
        }
        out
    }
}

/// Result of one conformance comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Conformance {
    pub label: String,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Transverse amplitudes from a deterministic generator; `next` must yield
/// values in `[−1, 1)`.
pub fn transverse_config(mut next: impl FnMut() -> f64, omega: f64) -> CrystalConfig {
    let mut amps = [[C64::new(0.0, 0.0); 3]; 6];
    for (j, amp) in amps.iter_mut().enumerate() {
        let axis = j % 3;
        for (k, z) in amp.iter_mut().enumerate() {
            if k != axis {
                *z = C64::new(next(), next());
            }
        }
    }
    CrystalConfig::new(amps, omega)
}

/// Compares every `N₁` template against [`n1_matrix`] at the given points.
pub fn check_n1(templates: &[N1Template], cfg: &CrystalConfig, k: &WaveFourVector, points: &[LatticeIndex], tol: f64) -> Vec<Conformance> {
    let basis = DiracBasis::standard();
    templates
        .iter()
        .map(|tpl| {
            let mut dev: f64 = 0.0;
            let mut scale: f64 = f64::MIN_POSITIVE;
            for &m in points {
                let got = match n1_matrix(m, tpl.s, cfg, k) {
                    Ok(n) => basis.decompose(&n).0,
                    Err(_) => {
                        dev = f64::INFINITY;
                        continue;
                    }
                };
                let want = tpl.evaluate(m, cfg, k);
                for i in 0..16 {
                    dev = dev.max((got[i] - want[i]).norm());
                    scale = scale.max(want[i].norm());
                }
            }
            let rel = dev / scale;
            Conformance { label: format!("N1{:?}", tpl.s), max_deviation: rel, passed: rel <= tol }
        })
        .collect()
}

/// Compares a transcribed `N₂` table against [`n2_scalar`]: each entry must
/// carry a single shift with `g₄d = 2`, the shifts must be the 56 distinct
/// ones, and values must agree to `tol` relative.
pub fn check_n2(table: &[N2Entry], cfg: &CrystalConfig, tol: f64) -> Vec<Conformance> {
    let mut seen = HashSet::new();
    let mut out: Vec<Conformance> = table
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let label = format!("N2[{}]", i + 13);
            let Some(s) = e.shift() else {
                return Conformance { label, max_deviation: f64::INFINITY, passed: false };
            };
            let fresh = seen.insert(s) && super::g4d(s) == 2;
            let want = e.evaluate(cfg);
            let got = n2_scalar(s, cfg).unwrap_or(C64::new(f64::NAN, 0.0));
            let scale = want.norm().max(got.norm()).max(f64::MIN_POSITIVE);
            let rel = (got - want).norm() / scale;
            Conformance { label: format!("{label}{s:?}"), max_deviation: rel, passed: fresh && rel <= tol }
        })
        .collect();
    out.push(Conformance {
        label: "N2 count".into(),
        max_deviation: (table.len() as f64 - 56.0).abs(),
        passed: table.len() == 56 && seen.len() == 56,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_setup(seed: u64) -> (CrystalConfig, WaveFourVector, Vec<LatticeIndex>) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let omega = rng.gen_range(0.05..0.5);
        let cfg = transverse_config(|| rng.gen_range(-1.0..1.0), omega);
        let k = WaveFourVector::new([rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)], rng.gen_range(0.5..2.0));
        let pts = vec![LatticeIndex::ORIGIN, LatticeIndex([1, -2, 0, 3]), LatticeIndex([-3, 1, 2, -2])];
        (cfg, k, pts)
    }

    #[test]
    fn n1_templates_match_constructive_formula() {
        for seed in 0..5 {
            let (cfg, k, pts) = random_setup(seed);
            for c in check_n1(&n1_templates(), &cfg, &k, &pts, 1e-13) {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn n2_table_matches_constructive_formula() {
        for seed in 0..5 {
            let (cfg, _, _) = random_setup(seed);
            let res = check_n2(&n2_table(), &cfg, 1e-13);
            assert_eq!(res.len(), 57);
            for c in res {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn corrupted_n2_table_is_detected() {
        let (cfg, _, _) = random_setup(11);
        let mut table = n2_table();
        table[7].terms[0].0 = 1.0;
        assert!(check_n2(&table, &cfg, 1e-13).iter().any(|c| !c.passed));
        let mut table = n2_table();
        table.pop();
        assert!(!check_n2(&table, &cfg, 1e-13).last().unwrap().passed);
    }

    #[test]
    fn n2_pairs_are_conjugate() {
        let (cfg, _, _) = random_setup(3);
        for e in n2_table() {
            let s = e.shift().unwrap();
            let neg = s.map(|v| -v);
            let a = n2_scalar(s, &cfg).unwrap();
            let b = n2_scalar(neg, &cfg).unwrap();
            assert!((a - b.conj()).norm() < 1e-14);
        }
    }
}
