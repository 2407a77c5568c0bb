//! Deterministic text outputs. Floats are written with 17 significant
//! digits so files round-trip and reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use estc::{DiracBasis, Matrix4};

use crate::config::RunConfig;
use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Leading comment block naming the command and echoing the resolved config.
pub fn header(command: &str, cfg: &RunConfig) -> String {
    let mut out = format!("# estc {command} {}\n# config:\n", env!("CARGO_PKG_VERSION"));
    for line in cfg.to_toml().lines() {
        match line {
            "" => out.push_str("#\n"),
            l => {
                let _ = writeln!(out, "#   {l}");
            }
        }
    }
    out
}

/// Key-value document; values are numbers, quoted strings or arrays.
#[derive(Default)]
pub struct Record {
    text: String,
}

impl Record {
    pub fn section(&mut self, name: &str) -> &mut Self {
        let _ = writeln!(self.text, "\n[{name}]");
        self
    }

    pub fn float(&mut self, key: &str, x: f64) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {}", num(x));
        self
    }

    pub fn int(&mut self, key: &str, x: usize) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {x}");
        self
    }

    pub fn string(&mut self, key: &str, s: &str) -> &mut Self {
        let _ = writeln!(self.text, "{key} = \"{s}\"");
        self
    }

    pub fn floats(&mut self, key: &str, xs: &[f64]) -> &mut Self {
        let items: Vec<String> = xs.iter().map(|&x| num(x)).collect();
        let _ = writeln!(self.text, "{key} = [{}]", items.join(", "));
        self
    }

    /// Trace and the real Dirac set of a Hermitian matrix.
    pub fn dirac(&mut self, key: &str, m: &Matrix4) -> &mut Self {
        let basis = DiracBasis::standard();
        let set = basis.decompose(m);
        let re: Vec<f64> = set.0.iter().map(|z| z.re).collect();
        self.float(&format!("{key}_trace"), m.trace().re);
        self.floats(&format!("{key}_dirac"), &re);
        let names: Vec<String> = basis.names.iter().map(|n| format!("\"{n}\"")).collect();
        let _ = writeln!(self.text, "{key}_dirac_names = [{}]", names.join(", "));
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
