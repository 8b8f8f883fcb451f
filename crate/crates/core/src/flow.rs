//! Inverse mean curvature flow of radial graphs.
//!
//! The surface moves with normal speed `1/H` away from the origin. For a
//! radial graph this is the scalar law `∂u/∂t = v/H`, integrated here with
//! classical Runge–Kutta stages. Each stage tendency is passed through the
//! grid's polar filter.

use crate::ambient::WarpedProduct;
use crate::error::{Error, Result};
use crate::functionals::{functionals, q_quantity, FunctionalRecord, MonotoneParams};
use crate::quadrature::unit_sphere_area;
use crate::surface::{compute_geometry, flow_sample, FlowSample, RadialGraph};

/// Time stepping and stopping controls of [`run_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Multiplier on the parabolic step bound `h² min(Hη)²`.
    pub dt_safety: f64,
    pub dt_max: f64,
    /// Stop once `A = |Σ|/ω_{n-1}` reaches this value.
    pub stop_area_ratio: f64,
    /// Stop once `min H` falls to this value.
    pub stop_h_min: f64,
    pub t_max: f64,
    /// Record every this many steps; the last state is always recorded.
    pub record_every: usize,
    /// Keep a copy of every recorded graph.
    pub store_graphs: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_safety: 0.15,
            dt_max: 1e-2,
            stop_area_ratio: 0.98,
            stop_h_min: 0.05,
            t_max: 50.0,
            record_every: 10,
            store_graphs: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::Config(format!(
                "dt_safety = {} outside (0, 1]",
                self.dt_safety
            )));
        }
        if !(self.stop_area_ratio > 0.0 && self.stop_area_ratio < 1.0) {
            return Err(Error::Config(format!(
                "stop_area_ratio = {} outside (0, 1)",
                self.stop_area_ratio
            )));
        }
        if !(self.dt_max > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::Config("dt_max and t_max must be positive".into()));
        }
        if !(self.stop_h_min >= 0.0) {
            return Err(Error::Config("stop_h_min must be non-negative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    ReachedA,
    HFloor,
    TMax,
    ConvexityLost,
    NumericalFailure,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ReachedA => "reached_A",
            StopReason::HFloor => "h_floor",
            StopReason::TMax => "t_max",
            StopReason::ConvexityLost => "convexity_lost",
            StopReason::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub records: Vec<FunctionalRecord>,
    pub stop_reason: StopReason,
    pub stop_time: f64,
    pub steps: usize,
    pub record_every: usize,
    /// Graph at every record, when requested.
    pub graphs: Option<Vec<RadialGraph>>,
    pub final_graph: RadialGraph,
    /// Message of the error behind [`StopReason::NumericalFailure`].
    pub failure: Option<String>,
}

impl FlowTrace {
    pub fn last(&self) -> &FunctionalRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }
}

fn check_speed(min_h: f64) -> Result<()> {
    if min_h.is_nan() {
        return Err(Error::Numerical("mean curvature is NaN".into()));
    }
    if min_h <= 0.0 {
        return Err(Error::FlowSingularity { min_h });
    }
    Ok(())
}

/// Polar-filtered radial velocity `v/H` of a sample.
fn velocity(graph: &RadialGraph, sample: FlowSample) -> Result<Vec<f64>> {
    check_speed(sample.min_mean_curvature)?;
    let mut speed = sample.speed;
    graph.grid().polar_filter(&mut speed);
    Ok(speed)
}

fn stage_velocity<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    k: &[f64],
    scale: f64,
) -> Result<Vec<f64>> {
    let u = graph
        .u()
        .iter()
        .zip(k)
        .map(|(u, k)| u + scale * k)
        .collect();
    let stage = RadialGraph::new(graph.grid().clone(), u)?;
    velocity(&stage, flow_sample(space, &stage)?)
}

fn rk4<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    k1: &[f64],
    dt: f64,
) -> Result<RadialGraph> {
    let k2 = stage_velocity(space, graph, k1, 0.5 * dt)?;
    let k3 = stage_velocity(space, graph, &k2, 0.5 * dt)?;
    let k4 = stage_velocity(space, graph, &k3, dt)?;
    let u = graph
        .u()
        .iter()
        .enumerate()
        .map(|(i, u)| u + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    RadialGraph::new(graph.grid().clone(), u)
}

/// Advances `graph` by one explicit step of length `dt`.
pub fn imcf_step<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    dt: f64,
) -> Result<RadialGraph> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    let k1 = velocity(graph, flow_sample(space, graph)?)?;
    rk4(space, graph, &k1, dt)
}

/// Parabolic step bound: the linearized flow diffuses with coefficient
/// `1/(Hη)²` in the `h` metric.
pub fn stable_time_step(graph: &RadialGraph, sample: &FlowSample, dt_safety: f64) -> f64 {
    let h = graph.grid().spacing();
    dt_safety * h * h * sample.min_diffusion_scale
}

/// Runs the flow from `graph` until a stop criterion fires.
///
/// Loss of convexity and numerical breakdown end the run with the
/// corresponding [`StopReason`]; only invalid input is an error.
pub fn run_flow<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    config: &FlowConfig,
) -> Result<FlowTrace> {
    config.validate()?;
    let fields = compute_geometry(space, graph)?;
    if !fields.is_strictly_convex() {
        return Err(Error::HypothesisViolation(format!(
            "initial graph is not strictly convex (min principal curvature {})",
            fields.min_principal_curvature()
        )));
    }
    let omega = unit_sphere_area(space.dimension() - 1);
    let mut sample = flow_sample(space, graph)?;
    let mut current = graph.clone();
    let mut records = Vec::new();
    let mut graphs = config.store_graphs.then(Vec::new);
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut failure = None;
    let stop_a = config.stop_area_ratio;

    let stop_reason = loop {
        let area_ratio = sample.area / omega;
        let reason = if area_ratio >= stop_a * (1.0 - 1e-9) {
            Some(StopReason::ReachedA)
        } else if sample.min_mean_curvature <= config.stop_h_min {
            Some(StopReason::HFloor)
        } else if sample.min_principal_curvature <= 0.0 {
            Some(StopReason::ConvexityLost)
        } else if t >= config.t_max * (1.0 - 1e-12) {
            Some(StopReason::TMax)
        } else {
            None
        };
        if steps.is_multiple_of(config.record_every) || reason.is_some() {
            let fields = compute_geometry(space, &current)?;
            records.push(functionals(space, &current, &fields, t)?);
            if let Some(g) = graphs.as_mut() {
                g.push(current.clone());
            }
        }
        if let Some(reason) = reason {
            break reason;
        }

        // d𝒜/dt = 𝒜 gives the time left until stop_A
        let to_target = (stop_a / area_ratio).ln();
        let mut dt = stable_time_step(&current, &sample, config.dt_safety)
            .min(config.dt_max)
            .min(config.t_max - t);
        if to_target > 0.0 {
            dt = dt.min(to_target);
        }
        let next = velocity(&current, sample)
            .and_then(|k1| rk4(space, &current, &k1, dt))
            .and_then(|g| flow_sample(space, &g).map(|s| (g, s)));
        match next {
            Ok((g, s)) => {
                current = g;
                sample = s;
                t += dt;
                steps += 1;
            }
            Err(e) => {
                failure = Some(e.to_string());
                break StopReason::NumericalFailure;
            }
        }
    };

    Ok(FlowTrace {
        records,
        stop_reason,
        stop_time: t,
        steps,
        record_every: config.record_every,
        graphs,
        final_graph: current,
        failure,
    })
}

/// Largest relative deviations between finite-difference rates of the
/// integrated quantities and their evolution formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionResiduals {
    /// `d|Σ|/dt` against `∫ dΣ`.
    pub area: f64,
    /// `dJ/dt` against `n∫ρ/H dΣ`.
    pub support: f64,
    /// `dI/dt` against `-2J + 2∫ρσ₂/H dΣ`.
    pub rho_h: f64,
    /// Largest normalized excess of `dI/dt` over `((n-2)/(n-1)) I - 2J`.
    pub rho_h_bound_excess: f64,
    /// Largest normalized shortfall of `dJ/dt` below `(n/(n-1)) J`.
    pub support_bound_deficit: f64,
    /// Number of interior records compared.
    pub samples: usize,
}

impl EvolutionResiduals {
    pub fn max_residual(&self) -> f64 {
        self.area.max(self.support).max(self.rho_h)
    }
}

/// Three-point derivative at the middle of unevenly spaced samples.
fn central_difference(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Compares the recorded trace with the evolution equations of `|Σ|`, `J`
/// and `I` at every interior record.
///
/// Residuals are normalized by the larger of the rate and the quantity
/// itself, since `dI/dt` changes sign along the flow.
pub fn evolution_checks<W: WarpedProduct + ?Sized>(
    space: &W,
    trace: &FlowTrace,
) -> Result<EvolutionResiduals> {
    if trace.record_every != 1 {
        return Err(Error::Usage(format!(
            "evolution checks need every step recorded, got stride {}",
            trace.record_every
        )));
    }
    let graphs = trace
        .graphs
        .as_ref()
        .ok_or_else(|| Error::Usage("evolution checks need stored graphs".into()))?;
    let records = &trace.records;
    if records.len() < 3 {
        return Err(Error::Usage(format!(
            "evolution checks need at least 3 records, got {}",
            records.len()
        )));
    }
    let n = space.dimension() as f64;
    let mut out = EvolutionResiduals {
        area: 0.0,
        support: 0.0,
        rho_h: 0.0,
        rho_h_bound_excess: f64::NEG_INFINITY,
        support_bound_deficit: f64::NEG_INFINITY,
        samples: 0,
    };
    for k in 1..records.len() - 1 {
        let (a, b, c) = (&records[k - 1], &records[k], &records[k + 1]);
        let times = [a.t, b.t, c.t];
        let d_area = central_difference(times, [a.area, b.area, c.area]);
        let d_support = central_difference(times, [a.support, b.support, c.support]);
        let d_rho_h = central_difference(times, [a.rho_h, b.rho_h, c.rho_h]);

        let fields = compute_geometry(space, &graphs[k])?;
        let h = &fields.mean_curvature;
        let area_rate = fields.area();
        let support_rate = n * fields.integrate_by(|i| fields.rho[i] / h[i]);
        let rho_h_rate = -2.0 * b.support
            + 2.0 * fields.integrate_by(|i| fields.rho[i] * fields.sigma2[i] / h[i]);

        let scale_area = area_rate.abs().max(b.area);
        let scale_support = support_rate.abs().max(b.support.abs());
        let scale_rho_h = rho_h_rate.abs().max(b.rho_h.abs());
        out.area = out
            .area
            .max(relative((d_area - area_rate).abs(), scale_area));
        out.support = out
            .support
            .max(relative((d_support - support_rate).abs(), scale_support));
        out.rho_h = out
            .rho_h
            .max(relative((d_rho_h - rho_h_rate).abs(), scale_rho_h));

        let bound_i = (n - 2.0) / (n - 1.0) * b.rho_h - 2.0 * b.support;
        out.rho_h_bound_excess = out
            .rho_h_bound_excess
            .max(relative(d_rho_h - bound_i, scale_rho_h));
        let bound_j = n / (n - 1.0) * b.support;
        out.support_bound_deficit = out
            .support_bound_deficit
            .max(relative(bound_j - d_support, scale_support));
        out.samples += 1;
    }
    Ok(out)
}

/// Tolerances of [`monotonicity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneTolerances {
    /// Allowed increase of `Q` between records, relative to `max(1, |Q|)`.
    pub slack: f64,
    /// Allowed shortfall of the Brendle-type inequality, relative to `J`.
    pub brendle: f64,
}

impl Default for MonotoneTolerances {
    fn default() -> Self {
        Self {
            slack: 1e-6,
            brendle: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneVerdict {
    pub passed: bool,
    pub monotone: bool,
    pub brendle_holds: bool,
    /// `Q` at every record.
    pub q: Vec<f64>,
    /// Largest increase `Q(t_{k+1}) - Q(t_k)`.
    pub max_increase: f64,
    /// Smallest `((n-1)∫ρ/H - J - α) / J` over the records.
    pub min_brendle_margin: f64,
    /// Indices `k` with `Q(t_{k+1})` above `Q(t_k)` plus slack.
    pub violations: Vec<usize>,
}

/// Checks that `Q` does not increase along `trace` and that the
/// Brendle-type hypothesis holds at every record.
pub fn monotonicity_check(
    trace: &FlowTrace,
    params: &MonotoneParams,
    tol: &MonotoneTolerances,
) -> Result<MonotoneVerdict> {
    if let Some(bad) = trace.records.iter().find(|r| r.area_ratio > 1.0) {
        return Err(Error::HypothesisViolation(format!(
            "A = {} > 1 at t = {}",
            bad.area_ratio, bad.t
        )));
    }
    let q = trace
        .records
        .iter()
        .map(|r| q_quantity(r, params))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    for (k, pair) in q.windows(2).enumerate() {
        let increase = pair[1] - pair[0];
        max_increase = max_increase.max(increase);
        if increase > tol.slack * pair[0].abs().max(1.0) {
            violations.push(k);
        }
    }
    let min_brendle_margin = trace
        .records
        .iter()
        .map(|r| (r.brendle_gap() - params.alpha) / r.support.abs())
        .fold(f64::INFINITY, f64::min);
    let monotone = violations.is_empty();
    let brendle_holds = min_brendle_margin >= -tol.brendle;
    Ok(MonotoneVerdict {
        passed: monotone && brendle_holds,
        monotone,
        brendle_holds,
        q,
        max_increase,
        min_brendle_margin,
        violations,
    })
}
