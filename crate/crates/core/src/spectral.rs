//! Spectral curves `ℛ₁(ξ)`, their minima and the parameters of each line.

use rayon::prelude::*;

use crate::crystal::{intensity, CrystalConfig};
use crate::error::{Error, Result};
use crate::freespace::free_basis;
use crate::lattice::{solve, SolutionFamily, SolverOptions};
use crate::observables::{dressed_amplitudes, mean_values};
use crate::spinor::{Bispinor, DiracBasis, DiracSet, Matrix4};

/// One detuning of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint {
    pub xi: f64,
    pub outcome: std::result::Result<PointValues, Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointValues {
    /// `ℛ_j = √λ_j`, ascending.
    pub residuals: [f64; 4],
    pub multiplicity: [usize; 4],
    pub rho1: Matrix4,
}

impl PointValues {
    pub fn lambdas(&self) -> [f64; 4] {
        self.residuals.map(|r| r * r)
    }
}

impl SpectralPoint {
    pub fn r1(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|v| v.residuals[0])
    }
}

/// Shared inputs of every evaluation along a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSetup {
    pub cfg: CrystalConfig,
    pub q: [f64; 3],
    pub radius: u32,
    pub options: SolverOptions,
}

impl CurveSetup {
    pub fn new(cfg: CrystalConfig, q: [f64; 3], radius: u32) -> Self {
        Self { cfg, q, radius, options: SolverOptions::default() }
    }

    pub fn family(&self, xi: f64) -> Result<SolutionFamily> {
        solve(&self.cfg, self.q, xi, self.radius, &self.options)
    }

    fn point(&self, xi: f64) -> SpectralPoint {
        let outcome = self
            .family(xi)
            .and_then(|f| Ok(PointValues { residuals: f.pencil.residuals, multiplicity: f.pencil.multiplicity, rho1: f.root_projector()? }));
        SpectralPoint { xi, outcome }
    }
}

/// Uniform grid of `steps` detunings over `[lo, hi]`.
pub fn xi_grid(range: (f64, f64), steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::TooFewPoints { need: 2, got: steps });
    }
    let (lo, hi) = range;
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

/// Evaluates every grid point independently; failures are recorded on the
/// point. Output order and values do not depend on the thread count.
pub fn scan(setup: &CurveSetup, range: (f64, f64), steps: usize) -> Result<Vec<SpectralPoint>> {
    let grid = xi_grid(range, steps)?;
    Ok(grid.par_iter().map(|&xi| setup.point(xi)).collect())
}

/// Interior local minima of `ℛ₁` on a scan, as brackets of neighbouring
/// grid points.
pub fn local_minima(points: &[SpectralPoint]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in points.windows(3) {
        if let (Some(a), Some(b), Some(c)) = (w[0].r1(), w[1].r1(), w[2].r1()) {
            if b < a && b <= c {
                out.push((w[0].xi, w[2].xi));
            }
        }
    }
    out
}

/// `ℛ₁ᵃᵖ(ξ)² = ℛ₀² + β₀²(ξ − ξ₀)²` fitted around a located minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolaFit {
    pub beta0: f64,
    /// Largest `|ℛ₁ᵃᵖ/ℛ₁ − 1|` over the points used.
    pub max_rel_deviation: f64,
    pub used: usize,
}

/// Which points near the minimum enter the fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitWindow {
    /// `ℛ₁ ≤ k·ℛ₀`.
    Ratio(f64),
    /// `|ξ − ξ₀| ≤ w`.
    HalfWidth(f64),
}

pub const PARABOLA_PARAMETERS: usize = 5;

/// Least-squares `β₀²` of `ℛ₁² − ℛ₀²` against `(ξ − ξ₀)²`.
pub fn fit_parabola(points: &[(f64, f64)], xi0: f64, r0: f64, window: FitWindow) -> Result<ParabolaFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(xi, r)| match window {
            FitWindow::Ratio(k) => r <= k * r0,
            FitWindow::HalfWidth(w) => (xi - xi0).abs() <= w,
        })
        .filter(|&(xi, _)| xi != xi0)
        .collect();
    if used.len() < PARABOLA_PARAMETERS {
        return Err(Error::TooFewPoints { need: PARABOLA_PARAMETERS, got: used.len() });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(xi, r) in &used {
        let x = (xi - xi0) * (xi - xi0);
        sxy += x * (r * r - r0 * r0);
        sxx += x * x;
    }
    let beta2 = sxy / sxx;
    if !(beta2 > 0.0) {
        return Err(Error::Invalid(format!("non-positive curvature {beta2:e}")));
    }
    let beta0 = beta2.sqrt();
    let max_rel_deviation = used.iter().map(|&(xi, r)| ((r0 * r0 + beta2 * (xi - xi0) * (xi - xi0)).sqrt() / r - 1.0).abs()).fold(0.0, f64::max);
    Ok(ParabolaFit { beta0, max_rel_deviation, used: used.len() })
}

/// `δξ = √(ℛ_av² − ℛ₀²)/β₀`.
pub fn half_width(r_av: f64, r0: f64, beta0: f64) -> Result<f64> {
    if r_av < r0 {
        return Err(Error::BelowFloor { r_av, r0 });
    }
    Ok((r_av * r_av - r0 * r0).sqrt() / beta0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineLabel {
    A,
    B,
    Single,
}

impl LineLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            LineLabel::A => "a",
            LineLabel::B => "b",
            LineLabel::Single => "single",
        }
    }
}

/// A located spectral line.
#[derive(Clone, Debug)]
pub struct SpectralLine {
    pub xi0: f64,
    pub r0: f64,
    pub beta0: f64,
    pub fit_deviation: f64,
    /// Reference residual level used for `delta_xi`.
    pub r_av: f64,
    pub delta_xi: f64,
    /// Orthogonal projector onto the lowest root cluster at `ξ₀`.
    pub rho1: Matrix4,
    pub dirac: DiracSet,
    pub label: LineLabel,
    /// Family at `ξ₀`.
    pub family: SolutionFamily,
    pub evaluations: usize,
}

/// Minimizer settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions {
    /// Absolute tolerance on `ξ₀`; `None` uses `1e−3·δξ` of a provisional fit.
    pub tol_xi: Option<f64>,
    /// `ℛ_av` for the half width; `None` uses `√I_A`.
    pub r_av: Option<f64>,
    pub fit_window: f64,
    pub max_evaluations: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { tol_xi: None, r_av: None, fit_window: 3.0, max_evaluations: 200 }
    }
}

/// Below this `ℛ₀` counts as zero and the fit uses a fixed ξ window.
const RESOLUTION_FLOOR: f64 = 1e-13;

const CGOLD: f64 = 0.381_966_011_250_105_1;

/// State of a safeguarded golden-section search on `f = ℛ₁²`: parabolic
/// steps when they stay inside the bracket and shrink, golden steps
/// otherwise.
struct Brent {
    a: f64,
    b: f64,
    x: f64,
    w: f64,
    v: f64,
    fx: f64,
    fw: f64,
    fv: f64,
    d: f64,
    e: f64,
}

impl Brent {
    fn run(&mut self, tol: f64, budget: &mut usize, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<()> {
        loop {
            let xm = 0.5 * (self.a + self.b);
            let tol1 = tol.max(4.0 * f64::EPSILON * self.x.abs());
            let tol2 = 2.0 * tol1;
            if (self.x - xm).abs() <= tol2 - 0.5 * (self.b - self.a) || *budget == 0 {
                return Ok(());
            }
            let mut golden = true;
            if self.e.abs() > tol1 {
                let r = (self.x - self.w) * (self.fx - self.fv);
                let mut q = (self.x - self.v) * (self.fx - self.fw);
                let mut p = (self.x - self.v) * q - (self.x - self.w) * r;
                q = 2.0 * (q - r);
                if q > 0.0 {
                    p = -p;
                }
                q = q.abs();
                let etemp = self.e;
                if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (self.a - self.x) || p >= q * (self.b - self.x)) {
                    self.e = self.d;
                    self.d = p / q;
                    let u = self.x + self.d;
                    if u - self.a < tol2 || self.b - u < tol2 {
                        self.d = tol1.copysign(xm - self.x);
                    }
                    golden = false;
                }
            }
            if golden {
                self.e = if self.x >= xm { self.a - self.x } else { self.b - self.x };
                self.d = CGOLD * self.e;
            }
            let u = if self.d.abs() >= tol1 { self.x + self.d } else { self.x + tol1.copysign(self.d) };
            let fu = f(u)?;
            *budget -= 1;
            if fu <= self.fx {
                if u >= self.x {
                    self.a = self.x;
                } else {
                    self.b = self.x;
                }
                (self.v, self.fv) = (self.w, self.fw);
                (self.w, self.fw) = (self.x, self.fx);
                (self.x, self.fx) = (u, fu);
            } else {
                if u < self.x {
                    self.a = u;
                } else {
                    self.b = u;
                }
                if fu <= self.fw || self.w == self.x {
                    (self.v, self.fv) = (self.w, self.fw);
                    (self.w, self.fw) = (u, fu);
                } else if fu <= self.fv || self.v == self.x || self.v == self.w {
                    (self.v, self.fv) = (u, fu);
                }
            }
        }
    }

    /// Curvature `β²` and floor `ℛ₀²` of the parabola through `x, w, v`.
    fn local_parabola(&self) -> Option<(f64, f64, f64)> {
        let pts = [(self.x, self.fx), (self.w, self.fw), (self.v, self.fv)];
        let (x0, y0) = pts[0];
        let (x1, y1) = pts[1];
        let (x2, y2) = pts[2];
        if x0 == x1 || x1 == x2 || x0 == x2 {
            return None;
        }
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let c2 = (d12 - d01) / (x2 - x0);
        if !(c2 > 0.0) {
            return None;
        }
        // y = c2 (x − ξ₀)² + floor
        let xi0 = 0.5 * (x0 + x1) - d01 / (2.0 * c2);
        let floor = y0 - c2 * (x0 - xi0) * (x0 - xi0);
        Some((c2, floor, xi0))
    }
}

/// Counts solves and keeps the family at the lowest point seen.
struct Objective<'a> {
    setup: &'a CurveSetup,
    evaluations: usize,
    best: Option<(f64, f64, SolutionFamily)>,
}

impl Objective<'_> {
    /// `ℛ₁` and its root vector at `xi`.
    fn eval(&mut self, xi: f64) -> Result<(f64, Bispinor)> {
        self.evaluations += 1;
        let family = self.setup.family(xi)?;
        let (r, c) = (family.pencil.residuals[0], family.pencil.vectors[0]);
        if self.best.as_ref().is_none_or(|(_, rb, _)| r < *rb) {
            self.best = Some((xi, r, family));
        }
        Ok((r, c))
    }

    fn family_at(&mut self, xi: f64) -> Result<SolutionFamily> {
        match self.best.take() {
            Some((x, _, family)) if x == xi => Ok(family),
            _ => {
                self.evaluations += 1;
                self.setup.family(xi)
            }
        }
    }
}

/// Samples whose lowest root keeps less than this weight in the lowest root
/// space at the minimum belong to a crossing branch and stay out of the fit.
const BRANCH_OVERLAP: f64 = 0.5;

/// Locates the minimum of `ℛ₁` inside `bracket` and fits the line there.
pub fn locate_minimum(setup: &CurveSetup, bracket: (f64, f64), opts: &MinimizeOptions) -> Result<SpectralLine> {
    let (lo, hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut obj = Objective { setup, evaluations: 0, best: None };
    let mut f = |xi: f64| -> Result<f64> { obj.eval(xi).map(|(r, _)| r * r) };
    let x1 = lo + CGOLD * (hi - lo);
    let x2 = hi - CGOLD * (hi - lo);
    let (f_lo, f_hi, f1, f2) = (f(lo)?, f(hi)?, f(x1)?, f(x2)?);
    let (x, fx, w, fw) = if f1 <= f2 { (x1, f1, x2, f2) } else { (x2, f2, x1, f1) };
    if !(fx < f_lo && fx < f_hi) {
        return Err(Error::NoInteriorMinimum { lo, hi, f_lo: f_lo.sqrt(), f_mid: fx.sqrt(), f_hi: f_hi.sqrt() });
    }
    let (v, fv) = if f_lo <= f_hi { (lo, f_lo) } else { (hi, f_hi) };
    let mut brent = Brent { a: lo, b: hi, x, w, v, fx, fw, fv, d: 0.0, e: hi - lo };
    let mut budget = opts.max_evaluations;
    let i_a = intensity(&setup.cfg);
    let r_av = opts.r_av.unwrap_or(i_a.sqrt());

    let coarse = opts.tol_xi.unwrap_or(1e-6 * (hi - lo));
    brent.run(coarse, &mut budget, &mut f)?;
    if opts.tol_xi.is_none() {
        if let Some((c2, floor, _)) = brent.local_parabola() {
            let dxi = ((r_av * r_av - floor.max(0.0)).max(0.0)).sqrt() / c2.sqrt();
            let fine = 1e-3 * dxi;
            if fine < coarse {
                brent.run(fine, &mut budget, &mut f)?;
            }
        }
    }
    let xi0 = brent.x;
    let r0 = brent.fx.max(0.0).sqrt();
    // A field-free curve has no natural reference level; its width is zero.
    let r_av = if opts.r_av.is_none() && i_a == 0.0 { r0 } else { r_av };
    // The lowest root may be degenerate, so branches are told apart by the
    // weight a sample's root keeps in the lowest root space at the minimum.
    let rho0 = match &obj.best {
        Some((x, _, family)) if *x == xi0 => family.root_projector()?,
        _ => {
            obj.evaluations += 1;
            setup.family(xi0)?.root_projector()?
        }
    };

    // Sample the bottom out to ℛ₁ ≈ k·ℛ₀ for the curvature fit. A neighbouring
    // branch can cut the window short, so the reach shrinks until enough samples
    // land inside it. A few ulps of ξ₀ is the finest separation that resolves.
    let beta_est = brent.local_parabola().map(|(c2, _, _)| c2.sqrt()).filter(|b| b.is_finite() && *b > 0.0);
    let k = opts.fit_window;
    let resolved = r0 > RESOLUTION_FLOOR;
    let ulp_floor = 16.0 * f64::EPSILON * xi0.abs();
    let mut reach = match beta_est {
        Some(b) if resolved => 0.95 * (k * k - 1.0).sqrt() * r0 / b,
        _ => 1e-3 * (hi - lo),
    }
    .max(ulp_floor);
    let mut samples = Vec::new();
    let fit = loop {
        for t in [0.25, 0.5, 0.75, 1.0] {
            for xi in [xi0 - t * reach, xi0 + t * reach] {
                let (r, c) = obj.eval(xi)?;
                let overlap = (rho0 * c).norm_sqr() / c.norm_sqr();
                if overlap >= BRANCH_OVERLAP {
                    samples.push((xi, r));
                }
            }
        }
        let window = if resolved { FitWindow::Ratio(k) } else { FitWindow::HalfWidth(reach) };
        match fit_parabola(&samples, xi0, r0, window) {
            Err(Error::TooFewPoints { .. }) if resolved && reach > ulp_floor => reach = (0.25 * reach).max(ulp_floor),
            Err(Error::TooFewPoints { .. }) if resolved => {
                break fit_parabola(&samples, xi0, r0, FitWindow::HalfWidth(reach))?;
            }
            other => break other?,
        }
    };
    let family = obj.family_at(xi0)?;
    let evaluations = obj.evaluations;
    let rho1 = family.root_projector()?;
    let dirac = DiracBasis::standard().decompose(&rho1);
    Ok(SpectralLine {
        xi0,
        r0,
        beta0: fit.beta0,
        fit_deviation: fit.max_rel_deviation,
        r_av,
        delta_xi: half_width(r_av, r0, fit.beta0)?,
        rho1,
        dirac,
        label: LineLabel::Single,
        family,
        evaluations,
    })
}

impl SpectralLine {
    /// `ρ₁c_j` for the first free state `c_j` at `q` that `ρ₁` keeps.
    pub fn dressed_root(&self, q: [f64; 3]) -> Result<Bispinor> {
        dressed_amplitudes(&self.rho1, &free_basis(q)).into_iter().find(|d| !d.annihilated).map(|d| d.amplitude).ok_or(Error::ZeroVector)
    }
}

/// Mean `⟨Σ₃⟩` of the lowest root of a located line.
pub fn line_spin(setup: &CurveSetup, line: &SpectralLine) -> Result<f64> {
    let m = mean_values(&line.family, &line.family.pencil.vectors[0], &setup.cfg, setup.q)?;
    Ok(m.spin[2])
}

/// Labels located lines. One line is `single`; two lines are `a` (lower
/// `ξ₀`) and `b`, and must carry mean spins of opposite sign.
pub fn classify_doublet(lines: &[(f64, f64)]) -> Result<Vec<LineLabel>> {
    match lines {
        [_] => Ok(vec![LineLabel::Single]),
        [(xa, sa), (xb, sb)] => {
            if xa == xb {
                return Err(Error::Classification("both lines sit at the same detuning".into()));
            }
            if !(sa * sb < 0.0) {
                return Err(Error::Classification(format!("spins {sa:e} and {sb:e} do not have opposite signs")));
            }
            Ok(if xa < xb { vec![LineLabel::A, LineLabel::B] } else { vec![LineLabel::B, LineLabel::A] })
        }
        _ => Err(Error::Classification(format!("expected one or two lines, got {}", lines.len()))),
    }
}

/// Scans a window, locates every interior minimum of `ℛ₁`, and labels the
/// resulting lines.
pub fn find_lines(setup: &CurveSetup, range: (f64, f64), steps: usize, opts: &MinimizeOptions) -> Result<Vec<SpectralLine>> {
    let points = scan(setup, range, steps)?;
    let brackets = local_minima(&points);
    if brackets.is_empty() {
        let f = |i: usize| points[i].r1().unwrap_or(f64::NAN);
        return Err(Error::NoInteriorMinimum { lo: range.0, hi: range.1, f_lo: f(0), f_mid: f(points.len() / 2), f_hi: f(points.len() - 1) });
    }
    let mut lines = brackets.iter().map(|&b| locate_minimum(setup, b, opts)).collect::<Result<Vec<_>>>()?;
    if lines.len() <= 2 {
        let keys = lines.iter().map(|l| Ok((l.xi0, line_spin(setup, l)?))).collect::<Result<Vec<_>>>()?;
        let labels = if lines.len() == 1 { vec![LineLabel::Single] } else { classify_doublet(&keys)? };
        for (l, lab) in lines.iter_mut().zip(labels) {
            l.label = lab;
        }
    }
    Ok(lines)
}
