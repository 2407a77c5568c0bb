//! Self-checks runnable from the command line: free-space identities,
//! conformance of the constructive couplings against the transcribed tables,
//! the field-free limit and a consistency pass over a given crystal.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};

use crate::crystal::{intensity, CrystalConfig};
use crate::freespace::{free_basis, free_projectors, p0_operator, q40, zero_model_analytics, zero_model_residual, WaveFourVector};
use crate::lattice::{solve, SolverOptions};
use crate::spinor::{dirac_matrices, DiracBasis, Matrix4, C64};
use crate::stencil::appendix::{check_n1, check_n2, n1_templates, n2_table, transverse_config, N2Entry};
use crate::stencil::{enumerate_shifts, LatticeIndex};

/// Zero-model reference values at `I_A = 3×10⁻⁶`, `q = (0, 0, 0.02)`:
/// `ℛ₊` on the positive and on the negative mass shell.
pub const ZERO_MODEL_REFERENCE: [(f64, f64); 2] = [(1.0, 0.00173205), (-1.0, 2.00040)];
const ZERO_MODEL_INTENSITY: f64 = 3e-6;
const ZERO_MODEL_Q: [f64; 3] = [0.0, 0.0, 0.02];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn within(suite: &'static str, name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self { suite, name: name.into(), max_deviation, tolerance, passed: max_deviation <= tolerance }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check, then a totals line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{verdict} {:<12} {:<40} max_dev={:.3e} tol={:.1e}", c.suite, c.name, c.max_deviation, c.tolerance);
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "checks={} failed={}", self.checks.len(), failed);
        out
    }
}

/// Inputs of a validation run. `n2_table` replaces the transcribed
/// second-order table, which is how a corrupted table is injected.
#[derive(Clone, Debug)]
pub struct ValidationOptions {
    pub cfg: CrystalConfig,
    pub q: [f64; 3],
    pub seed: u64,
    pub n2_table: Option<Vec<N2Entry>>,
}

/// Seed of the random amplitudes used by the conformance suite.
pub const DEFAULT_SEED: u64 = 0x5eed;

impl ValidationOptions {
    pub fn new(cfg: CrystalConfig, q: [f64; 3]) -> Self {
        Self { cfg, q, seed: DEFAULT_SEED, n2_table: None }
    }
}

pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let mut checks = analytic_suite(opts.q);
    checks.extend(conformance_suite(opts.seed, opts.n2_table.as_deref()));
    checks.extend(zero_field_suite(opts.q, opts.cfg.omega));
    if !opts.cfg.is_free() {
        checks.extend(crystal_suite(&opts.cfg, opts.q));
    }
    ValidationReport { checks }
}

/// Free-space identities at wave vector `q`.
pub fn analytic_suite(q: [f64; 3]) -> Vec<Check> {
    const S: &str = "analytic";
    let d = dirac_matrices();
    let mut clifford: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let ac = d.alpha[i] * d.alpha[j] + d.alpha[j] * d.alpha[i];
            let want = if i == j { Matrix4::identity().scale_re(2.0) } else { Matrix4::zero() };
            clifford = clifford.max((ac - want).max_abs());
        }
    }
    let basis = DiracBasis::standard();
    let mut gram: f64 = 0.0;
    for (i, bi) in basis.elements.iter().enumerate() {
        for (j, bj) in basis.elements.iter().enumerate() {
            let g = (bi.adjoint() * *bj).trace() / 4.0;
            gram = gram.max((g - C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm());
        }
    }

    let (pp, pm) = free_projectors(q);
    let id = Matrix4::identity();
    let projector = [
        (pp * pp - pp).max_abs(),
        (pm * pm - pm).max_abs(),
        (pp - pp.adjoint()).max_abs(),
        (pm - pm.adjoint()).max_abs(),
        (pp * pm).max_abs(),
        (pp + pm - id).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let b = free_basis(q);
    let mut ortho: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let g = b[i].dot(&b[j]);
            ortho = ortho.max((g - C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm());
        }
    }
    let recon = (Matrix4::outer(&b[0], &b[0]) + Matrix4::outer(&b[1], &b[1]) - pp)
        .max_abs()
        .max((Matrix4::outer(&b[2], &b[2]) + Matrix4::outer(&b[3], &b[3]) - pm).max_abs());

    let e = q40(q);
    let on_shell = [e, -e].map(|q4| p0_operator(&WaveFourVector::new(q, q4)).det().norm()).into_iter().fold(0.0, f64::max);
    // Both eigenvalues ½(1 ∓ q₄₀/q₄) are twofold.
    let q4 = e + 0.1;
    let off = p0_operator(&WaveFourVector::new(q, q4)).det().norm();
    let off_want = ((q4 * q4 - e * e) / (4.0 * q4 * q4)).powi(2);

    let mut out = vec![
        Check::within(S, "clifford anticommutation", clifford, 1e-15),
        Check::within(S, "dirac basis orthonormality", gram, 1e-14),
        Check::within(S, "free projector identities", projector, 1e-14),
        Check::within(S, "free basis orthonormality", ortho, 1e-14),
        Check::within(S, "free basis reconstruction", recon, 1e-14),
        Check::within(S, "det P0 vanishes on shell", on_shell, 1e-14),
        Check::within(S, "det P0 off shell", (off / off_want - 1.0).abs(), 1e-12),
    ];
    for (sign, want) in ZERO_MODEL_REFERENCE {
        let z = zero_model_analytics(ZERO_MODEL_Q, sign * q40(ZERO_MODEL_Q), ZERO_MODEL_INTENSITY);
        let name = format!("zero model R+ at q4 = {}q40", if sign > 0.0 { "+" } else { "-" });
        out.push(Check::within(S, name, (z.r_plus / want - 1.0).abs(), 1e-5));
    }
    out
}

/// Constructive couplings against the transcribed tables for random
/// transverse amplitudes, plus the stencil counts.
pub fn conformance_suite(seed: u64, n2: Option<&[N2Entry]>) -> Vec<Check> {
    const S: &str = "conformance";
    const TOL: f64 = 1e-13;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let omega = rng.gen_range(0.05..0.5);
    let cfg = transverse_config(|| rng.gen_range(-1.0..1.0), omega);
    let k = WaveFourVector::new(std::array::from_fn(|_| rng.gen_range(-0.3..0.3)), rng.gen_range(0.5..2.0));
    let points = [LatticeIndex::ORIGIN, LatticeIndex([1, -2, 0, 3]), LatticeIndex([-3, 1, 2, -2])];

    let mut out: Vec<Check> = check_n1(&n1_templates(), &cfg, &k, &points, TOL)
        .into_iter()
        .chain(match n2 {
            Some(table) => check_n2(table, &cfg, TOL),
            None => check_n2(&n2_table(), &cfg, TOL),
        })
        .map(|c| Check { suite: S, name: c.label, max_deviation: c.max_deviation, tolerance: TOL, passed: c.passed })
        .collect();
    for (g, want) in [(1, 13usize), (2, 69)] {
        let got = enumerate_shifts(g).map(|s| s.len()).unwrap_or(0);
        out.push(Check { suite: S, name: format!("S{want} count"), max_deviation: got.abs_diff(want) as f64, tolerance: 0.0, passed: got == want });
    }
    out
}

/// Without a field the lattice family at `ξ = 0` reproduces the free
/// solution exactly: `ℛ(c₊) = 0`.
pub fn zero_field_suite(q: [f64; 3], omega: f64) -> Vec<Check> {
    const S: &str = "zero-field";
    let b = free_basis(q);
    let analytic = zero_model_residual(q, q40(q), 0.0, &b[0]);
    let lattice =
        solve(&CrystalConfig::free(omega), q, 0.0, 1, &SolverOptions::default()).and_then(|f| f.relative_residual(&b[0])).unwrap_or(f64::INFINITY);
    vec![Check::within(S, "zero model R(c+, q40)", analytic, 0.0), Check::within(S, "lattice R(c+, q40), d = 1", lattice, 1e-14)]
}

/// Pencil consistency of the configured crystal at `d = 1`, half an
/// intensity above the free shell.
pub fn crystal_suite(cfg: &CrystalConfig, q: [f64; 3]) -> Vec<Check> {
    const S: &str = "crystal";
    let xi = 0.5 * intensity(cfg);
    let family = match solve(cfg, q, xi, 1, &SolverOptions::default()) {
        Ok(f) => f,
        Err(e) => return vec![Check { suite: S, name: format!("solve at d = 1: {e}"), max_deviation: f64::INFINITY, tolerance: 0.0, passed: false }],
    };
    let scale_e = family.u_e.max_abs();
    let scale_d = family.u_d.max_abs();
    let herm = ((family.u_e - family.u_e.adjoint()).max_abs() / scale_e).max((family.u_d - family.u_d.adjoint()).max_abs() / scale_d);
    let mut rayleigh: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let p = &family.pencil;
    for i in 0..4 {
        let r = family.relative_residual(&p.vectors[i]).unwrap_or(f64::INFINITY);
        rayleigh = rayleigh.max((r - p.residuals[i]).abs() / p.residuals[3].max(f64::MIN_POSITIVE));
        for j in 0..4 {
            if i != j {
                let e = p.vectors[i].dot(&(family.u_e * p.vectors[j])).norm();
                let d = p.vectors[i].dot(&(family.u_d * p.vectors[j])).norm();
                ortho = ortho.max(e).max(d / p.residuals[3].powi(2).max(f64::MIN_POSITIVE));
            }
        }
    }
    vec![
        Check::within(S, "U_E, U_D hermitian", herm, 1e-13),
        Check::within(S, "R(v_j) equals sqrt(lambda_j)", rayleigh, 1e-10),
        Check::within(S, "pencil vectors orthogonal", ortho, 1e-10),
    ]
}
