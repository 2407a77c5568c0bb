use std::fmt::Write as _;
use std::path::PathBuf;

use estc::observables::{pearson, uncentered_correlation};
use estc::spinor::dirac_matrices;
use estc::stencil::appendix::n2_table;
use estc::validate::ValidationOptions;
use estc::{field_map, find_lines, locate_minimum, mean_values, run_validation, CurveSetup, MapGrid, Matrix4, SpectralLine, SpectralPoint};

use crate::config::RunConfig;
use crate::output::{header, num, write, Record};
use crate::CliError;

pub struct Context {
    /// Resolved: every default filled in.
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Context {
    fn setup(&self) -> CurveSetup {
        let mut s = CurveSetup::new(self.cfg.crystal(), self.cfg.q, self.cfg.radius);
        s.options = self.cfg.solver_options();
        s
    }

    /// Writes `name` under the output directory and echoes it to stdout.
    fn emit(&self, name: &str, contents: &str) -> Result<(), CliError> {
        write(&self.out, name, contents)?;
        print!("{contents}");
        Ok(())
    }
}

pub fn validate(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let mut opts = ValidationOptions::new(cfg.crystal(), cfg.q);
    opts.seed = cfg.validate.seed.unwrap_or(opts.seed);
    if !cfg.validate.corrupt_n2_entries.is_empty() {
        let mut table = n2_table();
        for &i in &cfg.validate.corrupt_n2_entries {
            table[i].terms[0].0 = -table[i].terms[0].0;
        }
        opts.n2_table = Some(table);
    }
    let report = run_validation(&opts);
    ctx.emit("validate.txt", &(header("validate", cfg) + &report.render()))?;
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::Numerical(format!("{n} validation checks failed"))),
    }
}

/// The scan table; failed points are listed in a trailer after the rows.
fn scan_table(cfg: &RunConfig, points: &[SpectralPoint]) -> (String, Vec<String>) {
    let mut text = header("scan", cfg);
    text.push_str("xi,R1,R2,R3,R4\n");
    let mut failures = Vec::new();
    for p in points {
        match &p.outcome {
            Ok(v) => {
                let r: Vec<String> = v.residuals.iter().map(|&x| num(x)).collect();
                let _ = writeln!(text, "{},{}", num(p.xi), r.join(","));
            }
            Err(e) => failures.push(format!("xi={}: {e}", num(p.xi))),
        }
    }
    for f in &failures {
        let _ = writeln!(text, "# error {f}");
    }
    (text, failures)
}

pub fn scan(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let points = estc::scan(&ctx.setup(), cfg.scan_range(), cfg.scan.steps)?;
    let (text, failures) = scan_table(cfg, &points);
    write(&ctx.out, "scan.csv", &text)?;
    println!("wrote {} points to {}", points.len() - failures.len(), ctx.out.join("scan.csv").display());
    match failures.len() {
        0 => Ok(()),
        n => Err(CliError::Numerical(format!("{n} of {} scan points failed; first: {}", points.len(), failures[0]))),
    }
}

fn locate(ctx: &Context) -> Result<Vec<SpectralLine>, CliError> {
    let cfg = &ctx.cfg;
    let setup = ctx.setup();
    let opts = cfg.minimize_options();
    Ok(match cfg.minimize.bracket {
        Some([lo, hi]) => vec![locate_minimum(&setup, (lo, hi), &opts)?],
        None => find_lines(&setup, cfg.scan_range(), cfg.scan.steps, &opts)?,
    })
}

fn line_record(rec: &mut Record, line: &SpectralLine) {
    rec.section(&format!("line.{}", line.label.as_str()))
        .float("xi0", line.xi0)
        .float("R0", line.r0)
        .float("beta0", line.beta0)
        .float("delta_xi", line.delta_xi)
        .float("R_av", line.r_av)
        .float("fit_deviation", line.fit_deviation)
        .int("evaluations", line.evaluations)
        .floats("residuals", &line.family.pencil.residuals)
        .dirac("rho1", &line.rho1);
}

fn doublet_splitting(rec: &mut Record, lines: &[SpectralLine]) {
    if let [a, b] = lines {
        rec.float("splitting", (b.xi0 - a.xi0).abs());
    }
}

pub fn minimize(ctx: &Context) -> Result<(), CliError> {
    let lines = locate(ctx)?;
    let mut rec = Record::default();
    rec.int("lines", lines.len());
    doublet_splitting(&mut rec, &lines);
    for l in &lines {
        line_record(&mut rec, l);
    }
    ctx.emit("minimize.txt", &(header("minimize", &ctx.cfg) + rec.text()))
}

pub fn observe(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let lines = locate(ctx)?;
    let crystal = cfg.crystal();
    let mut rec = Record::default();
    rec.int("lines", lines.len());
    doublet_splitting(&mut rec, &lines);
    for l in &lines {
        let c0 = l.dressed_root(cfg.q)?;
        let m = mean_values(&l.family, &c0, &crystal, cfg.q)?;
        rec.section(&format!("line.{}", l.label.as_str()))
            .float("xi0", l.xi0)
            .float("R0", l.r0)
            .float("hamiltonian", m.hamiltonian)
            .floats("momentum", &m.momentum)
            .floats("velocity", &m.velocity)
            .floats("spin", &m.spin)
            .float("unit", m.unit)
            .float("max_imag", m.max_imag);
    }
    ctx.emit("observe.txt", &(header("observe", cfg) + rec.text()))
}

fn operator(name: &str) -> Matrix4 {
    let d = dirac_matrices();
    match name {
        "U" => d.u,
        "alpha1" => d.alpha[0],
        "alpha2" => d.alpha[1],
        "alpha3" => d.alpha[2],
        "alpha4" => d.alpha[3],
        "sigma1" => d.sigma[0],
        "sigma2" => d.sigma[1],
        "sigma3" => d.sigma[2],
        other => unreachable!("operator `{other}` passed the config check"),
    }
}

pub fn fieldmap(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let fm = &cfg.fieldmap;
    let lines = locate(ctx)?;
    let op = operator(&fm.operator);
    let grid = MapGrid { axis: fm.axis - 1, space_points: fm.space_points, time_points: fm.time_points, span: fm.span, ..MapGrid::default() };
    let mut rec = Record::default();
    rec.string("operator", &fm.operator).int("lines", lines.len());
    let mut maps = Vec::new();
    for l in &lines {
        let c0 = l.dressed_root(cfg.q)?;
        let map = field_map(&l.family, &c0, &op, &fm.operator, &grid)?;
        let name = format!("fieldmap_{}.csv", l.label.as_str());
        let mut text = header("fieldmap", cfg);
        let _ = writeln!(text, "# operator {} line {} xi0 {}", fm.operator, l.label.as_str(), num(l.xi0));
        let _ = writeln!(text, "X{},X4,value", fm.axis);
        for (it, &t) in map.time.iter().enumerate() {
            for (ix, &x) in map.space.iter().enumerate() {
                let _ = writeln!(text, "{},{},{}", num(x), num(t), num(map.values[it][ix]));
            }
        }
        write(&ctx.out, &name, &text)?;
        rec.section(&format!("line.{}", l.label.as_str()))
            .string("file", &name)
            .float("xi0", l.xi0)
            .float("mean", map.mean())
            .float("max_imag", map.max_imag);
        maps.push(map.flat());
    }
    if let [a, b] = &maps[..] {
        rec.section("pair").float("correlation", uncentered_correlation(a, b)).float("pearson", pearson(a, b));
    }
    ctx.emit("fieldmap.txt", &(header("fieldmap", cfg) + rec.text()))
}
