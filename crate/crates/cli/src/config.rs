//! Scenario files.
//!
//! A scenario is a single TOML document. Unknown keys anywhere are rejected.

use anyhow::{bail, Context, Result};
use imcf_core::flow::FlowConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    CenteredSphere,
    OffCenterSphere,
    PerturbedConvex,
    BalanceDemo,
    ConjectureExplorer,
    IdentitySuite,
}

impl Scenario {
    pub fn runs_flow(self) -> bool {
        !matches!(self, Scenario::IdentitySuite | Scenario::ConjectureExplorer)
    }
}

/// Radial profile added to the constant radius `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// `cos θ`
    Zonal,
    /// `(3 cos² θ - 1) / 2`
    Quadrupole,
    /// `⟨ω, (1, 1, 1)⟩ / √3`
    Tilted,
    /// `cos θ + ω_x ω_y`
    Mixed,
}

impl Pattern {
    pub fn eval(self, w: &[f64; 3]) -> f64 {
        match self {
            Pattern::Zonal => w[2],
            Pattern::Quadrupole => 0.5 * (3.0 * w[2] * w[2] - 1.0),
            Pattern::Tilted => (w[0] + w[1] + w[2]) / 3f64.sqrt(),
            Pattern::Mixed => w[2] + w[0] * w[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_theta: 96,
            n_phi: 192,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub r0: Option<f64>,
    /// Distance of a sphere's center from the origin.
    pub d: Option<f64>,
    /// Direction (in the tangent space at the origin) of the center offset.
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    pub amplitude: Option<f64>,
    pub pattern: Option<Pattern>,
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl Default for ShapeSpec {
    fn default() -> Self {
        Self {
            r0: None,
            d: None,
            axis: default_axis(),
            amplitude: None,
            pattern: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSpec {
    pub dt_safety: f64,
    pub dt_max: f64,
    #[serde(rename = "stop_A")]
    pub stop_a: f64,
    #[serde(rename = "stop_H_min")]
    pub stop_h_min: f64,
    pub t_max: f64,
    pub record_every: usize,
    /// Steps of the stride-one run used for the evolution identities.
    pub evolution_steps: usize,
    /// Step length of that run.
    pub evolution_dt: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let base = FlowConfig::default();
        Self {
            dt_safety: base.dt_safety,
            dt_max: base.dt_max,
            stop_a: base.stop_area_ratio,
            stop_h_min: base.stop_h_min,
            t_max: base.t_max,
            record_every: base.record_every,
            evolution_steps: 40,
            evolution_dt: 1e-4,
        }
    }
}

impl FlowSpec {
    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            dt_safety: self.dt_safety,
            dt_max: self.dt_max,
            stop_area_ratio: self.stop_a,
            stop_h_min: self.stop_h_min,
            t_max: self.t_max,
            record_every: self.record_every,
            store_graphs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Directory for every artifact; relative paths resolve against the
    /// scenario file.
    pub dir: PathBuf,
    pub trace_csv: String,
    pub summary_json: String,
    pub plots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("output"),
            trace_csv: "trace.csv".into(),
            summary_json: "summary.json".into(),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `|theorem gap| / I_x` allowed where equality is expected.
    pub theorem_gap: f64,
    /// Shortfall of the weighted inequality tolerated, relative to `I_x`.
    pub theorem_slack: f64,
    /// Allowed deviation on equality cases (centered spheres).
    pub equality: f64,
    pub monotone_slack: f64,
    pub brendle: f64,
    pub evolution: f64,
    /// Integral identities, relative to `I`.
    pub identities: f64,
    /// `|J - L| / J`.
    pub j_minus_l: f64,
    /// `(L_x - K)/K` tolerated above zero.
    pub weighted_volume: f64,
    pub balance_angle: f64,
    pub balance_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            theorem_gap: 1e-5,
            theorem_slack: 1e-8,
            equality: 1e-8,
            monotone_slack: 1e-6,
            brendle: 1e-8,
            evolution: 1e-3,
            identities: 1e-6,
            j_minus_l: 1e-8,
            weighted_volume: 1e-8,
            balance_angle: 1e-4,
            balance_max_iter: 5,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("theorem_gap", self.theorem_gap),
            ("theorem_slack", self.theorem_slack),
            ("equality", self.equality),
            ("monotone_slack", self.monotone_slack),
            ("brendle", self.brendle),
            ("evolution", self.evolution),
            ("identities", self.identities),
            ("j_minus_l", self.j_minus_l),
            ("weighted_volume", self.weighted_volume),
            ("balance_angle", self.balance_angle),
        ];
        for (name, value) in all {
            if !(value > 0.0 && value.is_finite()) {
                bail!("tolerance {name} = {value} must be positive");
            }
        }
        if self.balance_max_iter == 0 {
            bail!("tolerance balance_max_iter must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default = "default_dimension")]
    pub n: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub shape: ShapeSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_dimension() -> usize {
    3
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a scenario file and resolves its output directory against the
    /// file's location.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut config =
            Self::parse(&text).with_context(|| format!("invalid scenario {}", path.display()))?;
        if config.output.dir.is_relative() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            config.output.dir = base.join(&config.output.dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 3 {
            bail!("the grid engine supports n = 3 only (got n = {})", self.n);
        }
        self.flow.flow_config().validate()?;
        if self.flow.evolution_steps < 2 || !(self.flow.evolution_dt > 0.0) {
            bail!("evolution_steps must be >= 2 and evolution_dt > 0");
        }
        self.tolerances.validate()?;
        let shape = &self.shape;
        let r0 = shape.r0.context("shape.r0 is required")?;
        if !(r0 > 0.0 && r0 < std::f64::consts::FRAC_PI_2) {
            bail!("shape.r0 = {r0} must lie in (0, π/2)");
        }
        let axis_norm = shape.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(axis_norm > 0.0) {
            bail!("shape.axis must be non-zero");
        }
        match self.scenario {
            Scenario::OffCenterSphere => {
                let d = shape.d.context("shape.d is required for OffCenterSphere")?;
                if !(d > 0.0 && d < r0) {
                    bail!("shape.d = {d} must lie in (0, r0)");
                }
            }
            Scenario::PerturbedConvex => {
                if shape.amplitude.is_none() {
                    bail!("shape.amplitude is required for PerturbedConvex");
                }
            }
            Scenario::BalanceDemo | Scenario::ConjectureExplorer => {
                if shape.d.is_none() && shape.amplitude.is_none() {
                    bail!("{:?} needs shape.d or shape.amplitude", self.scenario);
                }
            }
            Scenario::CenteredSphere | Scenario::IdentitySuite => {}
        }
        if let Some(d) = shape.d {
            if !(d >= 0.0 && d < r0) {
                bail!("shape.d = {d} must lie in [0, r0)");
            }
        }
        if let Some(a) = shape.amplitude {
            if !(a.is_finite() && a.abs() < r0) {
                bail!("shape.amplitude = {a} must be smaller than r0");
            }
            if shape.pattern.is_none() {
                bail!("shape.pattern is required with shape.amplitude");
            }
        }
        Ok(())
    }

    pub fn trace_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.trace_csv)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.summary_json)
    }
}
