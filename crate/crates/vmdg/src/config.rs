//! Flat `key = value` run configuration shared by the config file and the
//! CLI flags (flags override file entries; unknown keys are errors).

use crate::error::{Error, Result};
use crate::maxwell::MaxwellFluxKind;
use crate::scenario::Scenario;
use crate::study::StudyMode;
use crate::vlasov::VelocityMapping;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: String,
    pub k: usize,
    pub n_x: usize,
    pub n_v: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub flux: MaxwellFluxKind,
    pub mapping: Option<VelocityMapping>,
    pub stride: usize,
    pub out: Option<String>,
    pub seed: u64,
    pub adaptive_dt: bool,
    pub levels: usize,
    pub mode: StudyMode,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "free_streaming".to_string(),
            k: 2,
            n_x: 16,
            n_v: 16,
            cfl: 0.15,
            t_final: 1.0,
            flux: MaxwellFluxKind::Upwind,
            mapping: None,
            stride: 10,
            out: None,
            seed: 0,
            adaptive_dt: false,
            levels: 4,
            mode: StudyMode::Spatial,
            trials: 20,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for key `{key}`")))
}

impl RunConfig {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = value.to_string(),
            "k" => self.k = parse(key, value)?,
            "n_x" => self.n_x = parse(key, value)?,
            "n_v" => self.n_v = parse(key, value)?,
            "cfl" => self.cfl = parse(key, value)?,
            "t_final" => self.t_final = parse(key, value)?,
            "flux" => self.flux = MaxwellFluxKind::parse(value)?,
            "mapping" => {
                self.mapping = Some(match value {
                    "classical" => VelocityMapping::Classical,
                    "relativistic" => VelocityMapping::Relativistic,
                    _ => return Err(Error::Config(format!("unknown mapping `{value}`"))),
                })
            }
            "stride" => self.stride = parse(key, value)?,
            "out" => self.out = Some(value.to_string()),
            "seed" => self.seed = parse(key, value)?,
            "adaptive_dt" => self.adaptive_dt = parse(key, value)?,
            "levels" => self.levels = parse(key, value)?,
            "mode" => self.mode = StudyMode::parse(value)?,
            "trials" => self.trials = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parse the flat UTF-8 `key = value` format; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Resolve the scenario, honoring a mapping override by switching to the
    /// catalog variant with that transport law.
    pub fn load_scenario(&self) -> Result<Scenario> {
        let s = Scenario::lookup(&self.scenario)?;
        match self.mapping {
            None => Ok(s),
            Some(m) if m == s.mapping => Ok(s),
            Some(VelocityMapping::Relativistic) => {
                Scenario::lookup(&format!("{}_relativistic", self.scenario)).map_err(|_| {
                    Error::Config(format!(
                        "scenario `{}` has no relativistic variant",
                        self.scenario
                    ))
                })
            }
            Some(VelocityMapping::Classical) => {
                let base = self.scenario.trim_end_matches("_relativistic");
                Scenario::lookup(base).map_err(|_| {
                    Error::Config(format!(
                        "scenario `{}` has no classical variant",
                        self.scenario
                    ))
                })
            }
        }
    }

    /// Non-fatal flags; the error analysis wants `k >= ceil((d_x+1)/2) = 1`.
    pub fn warnings(&self) -> Vec<String> {
        let mut warn = Vec::new();
        if self.k < 1 {
            warn.push(format!(
                "k = {} is below the analysis regime k >= 1; orders are not covered",
                self.k
            ));
        }
        warn
    }
}
