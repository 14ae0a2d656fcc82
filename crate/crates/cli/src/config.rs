//! Scenario files (TOML) and command-line overrides.

use std::path::Path;

use momenta_core::scenarios::Scenario;
use momenta_core::BracketRule;

use crate::error::{CliError, CliResult};

pub fn parse_scenario(text: &str, origin: &str) -> CliResult<Scenario> {
    let s: Scenario = toml::from_str(text).map_err(|e| CliError::Usage(format!("{origin}: {e}")))?;
    s.validate()
        .map_err(|e| CliError::Usage(format!("{origin}: {e}")))?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn to_toml(s: &Scenario) -> CliResult<String> {
    toml::to_string(s).map_err(|e| CliError::Usage(format!("cannot serialize scenario: {e}")))
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<u32>,
    pub hbar: Option<f64>,
    pub t_end: Option<f64>,
    pub tol: Option<f64>,
    pub classical: bool,
    pub saturate: bool,
    pub rule: Option<BracketRule>,
}

impl Overrides {
    pub fn apply(&self, mut s: Scenario) -> CliResult<Scenario> {
        if let Some(n) = self.order {
            s.order = n;
        }
        if let Some(h) = self.hbar {
            s.hbar = h;
        }
        if let Some(t) = self.t_end {
            s.integrator.t_end = t;
        }
        if let Some(tol) = self.tol {
            s.integrator.atol = tol;
            s.integrator.rtol = tol;
        }
        if let Some(r) = self.rule {
            s.rule = r;
        }
        if self.classical && self.saturate {
            return Err(CliError::Usage("--classical and --saturate exclude each other".into()));
        }
        if self.classical {
            s = s.classical_companion();
        }
        if self.saturate {
            s.moments.saturate = true;
            s.moments.physical = true;
        }
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }
}
