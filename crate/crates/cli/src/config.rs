//! Experiment configuration: JSON on disk, validated into core types.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use colding::{FlowSolution, Grid, Mode, PotentialSolution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowSpec {
    FlatTorus {
        n: usize,
        #[serde(rename = "T")]
        horizon: f64,
        tau_min: f64,
        points_per_dim: usize,
        /// Defaults to 2π per axis.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        periods: Option<Vec<f64>>,
    },
    RoundSphere {
        n: usize,
        #[serde(rename = "T")]
        horizon: f64,
        tau_min: f64,
        sphere_a0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub amplitude: f64,
    pub wave: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    ConstantInSpace {
        c: f64,
    },
    TorusSpectral {
        base: f64,
        modes: Vec<ModeSpec>,
        #[serde(default = "one")]
        decay: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Acceptance windows and caps. Defaults are the published criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub entropy_abs: f64,
    pub entropy_derivative_abs: f64,
    pub finite_difference_abs: f64,
    pub closed_form_runtime_s: f64,
    pub soliton_abs: f64,
    pub soliton_samples: usize,
    pub soliton_rate_min: f64,
    pub soliton_runtime_s: f64,
    pub area_rate: [f64; 2],
    pub area_richardson_abs: f64,
    pub area_runtime_s: f64,
    pub volume_rate: [f64; 2],
    pub tail_cap: f64,
    pub tail_min_n: usize,
    pub monotone_rate: [f64; 2],
    pub dwn_abs_floor: f64,
    pub top_rung_min_n: usize,
    pub hat_h_variation: f64,
    pub b2_variation: f64,
    /// Scaled values below this count as exactly zero.
    pub zero_floor: f64,
    pub tamper_decay: f64,
    pub tamper_growth: [f64; 2],
    pub reduction_ns: Vec<usize>,
    pub reduction_rel: f64,
    pub level_set_rate: [f64; 2],
    pub newton_residual: f64,
    /// Floor on ε_N for finite-difference noise when d𝒲/dλ ≈ 0.
    pub derivative_noise: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            entropy_abs: 1e-10,
            entropy_derivative_abs: 1e-8,
            finite_difference_abs: 1e-6,
            closed_form_runtime_s: 1.0,
            soliton_abs: 1e-10,
            soliton_samples: 10,
            soliton_rate_min: 0.8,
            soliton_runtime_s: 30.0,
            area_rate: [0.9, 1.1],
            area_richardson_abs: 1e-6,
            area_runtime_s: 120.0,
            volume_rate: [1.7, 2.3],
            tail_cap: 1e-12,
            tail_min_n: 256,
            monotone_rate: [0.8, 1.2],
            dwn_abs_floor: 1e-4,
            top_rung_min_n: 4096,
            hat_h_variation: 0.25,
            b2_variation: 0.30,
            zero_floor: 1e-9,
            tamper_decay: 0.9,
            tamper_growth: [0.8, 1.2],
            reduction_ns: vec![8, 16, 32, 64, 100],
            reduction_rel: 1e-10,
            level_set_rate: [0.9, 1.1],
            newton_residual: 1e-12,
            derivative_noise: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub csv: String,
    pub summary: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: "samples.csv".into(),
            summary: "summary.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub flow: FlowSpec,
    pub potential: PotentialSpec,
    #[serde(rename = "N_ladder")]
    pub n_ladder: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    #[serde(default = "half")]
    pub lambda0_fraction: f64,
    /// Relative step for dW_N/dλ.
    #[serde(default = "h_rel")]
    pub h_rel: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn half() -> f64 {
    0.5
}

fn h_rel() -> f64 {
    1e-3
}

/// Field-level validation failures.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub problems: Vec<(String, String)>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (field, msg)) in self.problems.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{field}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(field: &str, msg: impl Into<String>) -> Self {
        ConfigError {
            problems: vec![(field.into(), msg.into())],
        }
    }
}

/// Which model a config describes; decides criterion applicability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TorusConstant,
    TorusSpectral,
    SphereSoliton,
    Sphere,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::TorusConstant => "torus_constant",
            Family::TorusSpectral => "torus_spectral",
            Family::SphereSoliton => "sphere_soliton",
            Family::Sphere => "round_sphere",
        })
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::single("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn family(&self) -> Family {
        match (&self.flow, &self.potential) {
            (FlowSpec::FlatTorus { .. }, PotentialSpec::ConstantInSpace { .. }) => {
                Family::TorusConstant
            }
            (FlowSpec::FlatTorus { .. }, PotentialSpec::TorusSpectral { .. }) => {
                Family::TorusSpectral
            }
            (FlowSpec::RoundSphere { sphere_a0, .. }, _) if *sphere_a0 == 0.0 => {
                Family::SphereSoliton
            }
            (FlowSpec::RoundSphere { .. }, _) => Family::Sphere,
        }
    }

    pub fn dim(&self) -> usize {
        match self.flow {
            FlowSpec::FlatTorus { n, .. } | FlowSpec::RoundSphere { n, .. } => n,
        }
    }

    pub fn tau_range(&self) -> (f64, f64) {
        match self.flow {
            FlowSpec::FlatTorus {
                tau_min, horizon, ..
            }
            | FlowSpec::RoundSphere {
                tau_min, horizon, ..
            } => (tau_min, horizon),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        let mut bad = |field: &str, msg: String| problems.push((field.to_string(), msg));
        let (tau_min, horizon) = self.tau_range();
        if !(tau_min > 0.0 && tau_min < horizon && horizon.is_finite()) {
            bad("flow", format!("need 0 < tau_min < T, got tau_min = {tau_min}, T = {horizon}"));
        }
        if self.dim() == 0 {
            bad("flow.n", "must be >= 1".into());
        }
        match &self.flow {
            FlowSpec::FlatTorus {
                n,
                points_per_dim,
                periods,
                ..
            } => {
                if *points_per_dim < 8 || points_per_dim % 2 != 0 {
                    bad("flow.points_per_dim", format!("must be even and >= 8, got {points_per_dim}"));
                }
                if let Some(p) = periods {
                    if p.len() != *n {
                        bad("flow.periods", format!("need {n} entries, got {}", p.len()));
                    } else if p.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
                        bad("flow.periods", "periods must be positive".into());
                    }
                }
            }
            FlowSpec::RoundSphere { n, sphere_a0, .. } => {
                if *sphere_a0 < 0.0 {
                    bad("flow.sphere_a0", format!("must be >= 0, got {sphere_a0}"));
                }
                if *n == 1 && *sphere_a0 == 0.0 {
                    bad("flow", "round S^1 with a0 = 0 is degenerate".into());
                }
            }
        }
        match (&self.flow, &self.potential) {
            (FlowSpec::RoundSphere { .. }, PotentialSpec::TorusSpectral { .. }) => {
                bad("potential.kind", "torus_spectral requires a flat_torus flow".into());
            }
            (FlowSpec::FlatTorus { n, .. }, PotentialSpec::TorusSpectral { base, modes, decay }) => {
                let sum: f64 = modes.iter().map(|m| m.amplitude.abs()).sum();
                if !(*base > sum) {
                    bad("potential.base", format!("must exceed sum |amplitude| = {sum}, got {base}"));
                }
                for (i, m) in modes.iter().enumerate() {
                    if m.wave.len() != *n {
                        bad(&format!("potential.modes[{i}].wave"), format!("need {n} components"));
                    }
                }
                if !(*decay > 0.0) {
                    bad("potential.decay", format!("must be positive, got {decay}"));
                }
            }
            _ => {}
        }
        if self.n_ladder.is_empty() {
            bad("N_ladder", "must not be empty".into());
        }
        for (i, &n) in self.n_ladder.iter().enumerate() {
            if n < colding::nspace::MIN_N {
                bad(&format!("N_ladder[{i}]"), format!("must be >= 8, got {n}"));
            }
        }
        if self.n_ladder.windows(2).any(|w| w[1] <= w[0]) {
            bad("N_ladder", "must be strictly increasing".into());
        } else if self.n_ladder.len() >= 3 {
            let r = self.n_ladder[1] as f64 / self.n_ladder[0] as f64;
            let geometric = self
                .n_ladder
                .windows(2)
                .all(|w| (w[1] as f64 / w[0] as f64 - r).abs() < 1e-12 * r);
            if !geometric {
                bad("N_ladder", "must be geometric (constant ratio)".into());
            }
        }
        if self.lambda_grid.is_empty() {
            bad("lambda_grid", "must not be empty".into());
        }
        if !(self.lambda0_fraction > 0.0 && self.lambda0_fraction < 1.0) {
            bad("lambda0_fraction", format!("must lie in (0, 1), got {}", self.lambda0_fraction));
        }
        if !(self.h_rel > 0.0 && self.h_rel < 0.1) {
            bad("h_rel", format!("must lie in (0, 0.1), got {}", self.h_rel));
        }
        for (i, &l) in self.lambda_grid.iter().enumerate() {
            let field = format!("lambda_grid[{i}]");
            if !(l > tau_min && l < horizon) {
                bad(&field, format!("{l} not in (tau_min, T) = ({tau_min}, {horizon})"));
            } else if l * (1.0 + self.h_rel) >= horizon {
                bad(&field, format!("{l}·(1 + h_rel) reaches T = {horizon}"));
            } else if l * (1.0 - self.h_rel) * self.lambda0_fraction <= tau_min {
                bad(&field, format!("volume lower end {l}·lambda0_fraction is below tau_min"));
            }
        }
        let t = &self.tolerances;
        for (name, w) in [
            ("tolerances.area_rate", t.area_rate),
            ("tolerances.volume_rate", t.volume_rate),
            ("tolerances.monotone_rate", t.monotone_rate),
            ("tolerances.level_set_rate", t.level_set_rate),
            ("tolerances.tamper_growth", t.tamper_growth),
        ] {
            if !(w[0] <= w[1]) {
                bad(name, format!("window [{}, {}] is empty", w[0], w[1]));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }

    /// The flow and potential as core types.
    pub fn build(&self) -> Result<(FlowSolution, PotentialSolution), ConfigError> {
        let core = |field: &str, e: colding::Error| ConfigError::single(field, e.to_string());
        let flow = match &self.flow {
            FlowSpec::FlatTorus {
                n,
                horizon,
                tau_min,
                points_per_dim,
                periods,
            } => {
                let periods = periods.clone().unwrap_or_else(|| vec![2.0 * PI; *n]);
                let grid = Grid::new(*n, *points_per_dim, periods).map_err(|e| core("flow", e))?;
                FlowSolution::flat_torus(grid, *horizon, *tau_min).map_err(|e| core("flow", e))?
            }
            FlowSpec::RoundSphere {
                n,
                horizon,
                tau_min,
                sphere_a0,
            } => FlowSolution::round_sphere(*n, *sphere_a0, *horizon, *tau_min)
                .map_err(|e| core("flow", e))?,
        };
        let sol = match &self.potential {
            PotentialSpec::ConstantInSpace { c } => PotentialSolution::constant(*c),
            PotentialSpec::TorusSpectral { base, modes, decay } => {
                PotentialSolution::torus_spectral_with_decay(
                    *base,
                    modes
                        .iter()
                        .map(|m| Mode {
                            amplitude: m.amplitude,
                            wave: m.wave.clone(),
                        })
                        .collect(),
                    *decay,
                )
                .map_err(|e| core("potential", e))?
            }
        };
        Ok((flow, sol))
    }

    /// The same experiment with a tampered decay constant.
    pub fn tampered(&self, decay: f64) -> Option<ExperimentConfig> {
        match &self.potential {
            PotentialSpec::TorusSpectral { base, modes, .. } => {
                let mut cfg = self.clone();
                cfg.potential = PotentialSpec::TorusSpectral {
                    base: *base,
                    modes: modes.clone(),
                    decay,
                };
                Some(cfg)
            }
            _ => None,
        }
    }
}
