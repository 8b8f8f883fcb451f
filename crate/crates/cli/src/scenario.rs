//! Runs one configured scenario and collects its verdicts.

use crate::config::{Scenario, ScenarioConfig};
use anyhow::{Context, Result};
use imcf_core::ambient::ModelSpace;
use imcf_core::balance::{balance, estimate_equator};
use imcf_core::flow::{
    evolution_checks, monotonicity_check, run_flow, FlowConfig, FlowTrace, MonotoneTolerances,
    StopReason,
};
use imcf_core::functionals::{
    functionals, inequality_at, moment_vector, naive_rhs, FunctionalRecord, InequalityReport,
    MonotoneParams, RayIntegrals, ReferencePoint,
};
use imcf_core::grid::SphericalGrid;
use imcf_core::surface::{
    compute_geometry, identity_residuals, offcenter_sphere_graph, GeometryFields, RadialGraph,
};
use nalgebra::Vector4;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    /// The statement under test.
    pub statement: &'static str,
    pub check: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Verdict {
    fn new(
        statement: &'static str,
        check: impl Into<String>,
        value: f64,
        tolerance: f64,
        passed: bool,
    ) -> Self {
        Self {
            statement,
            check: check.into(),
            passed,
            value,
            tolerance,
        }
    }

    fn at_most(
        statement: &'static str,
        check: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(statement, check, value, tolerance, value <= tolerance)
    }

    fn at_least(
        statement: &'static str,
        check: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(statement, check, value, tolerance, value >= tolerance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordSummary {
    pub t: f64,
    pub area: f64,
    #[serde(rename = "A")]
    pub area_ratio: f64,
    #[serde(rename = "I")]
    pub rho_h: f64,
    #[serde(rename = "J")]
    pub support: f64,
    #[serde(rename = "L")]
    pub weighted_volume: f64,
    #[serde(rename = "calK")]
    pub area_power: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "min_H")]
    pub min_h: f64,
    pub lambda_min: f64,
    pub umbilicity: f64,
}

impl From<&FunctionalRecord> for RecordSummary {
    fn from(r: &FunctionalRecord) -> Self {
        Self {
            t: r.t,
            area: r.area,
            area_ratio: r.area_ratio,
            rho_h: r.rho_h,
            support: r.support,
            weighted_volume: r.weighted_volume,
            area_power: r.area_power,
            q: r.monotone_q,
            min_h: r.min_h,
            lambda_min: r.lambda_min,
            umbilicity: r.umbilicity,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalitySummary {
    pub x: [f64; 4],
    #[serde(rename = "I_x")]
    pub i_x: f64,
    #[serde(rename = "L_x")]
    pub l_x: f64,
    pub rhs_theorem: f64,
    pub rhs_naive: f64,
    pub theorem_gap: f64,
    pub naive_gap: f64,
}

impl InequalitySummary {
    fn new(x: &Vector4<f64>, r: &InequalityReport) -> Self {
        Self {
            x: [x[0], x[1], x[2], x[3]],
            i_x: r.lhs,
            l_x: r.l_x,
            rhs_theorem: r.rhs_theorem,
            rhs_naive: r.rhs_naive,
            theorem_gap: r.theorem_gap,
            naive_gap: r.naive_gap,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    /// `|(n-2)I - 2∫pσ₂| / I`
    pub minkowski: f64,
    /// `|∫(Hp - (n-1)ρ)| / I`
    pub laplace_rho: f64,
    /// `|J - L| / J`
    pub j_minus_l: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub stop_reason: &'static str,
    pub stop_time: f64,
    pub steps: usize,
    pub records: usize,
    pub q_strict_decreases: usize,
    pub max_q_increase: f64,
    pub min_brendle_margin: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionSummary {
    pub samples: usize,
    pub area: f64,
    pub support: f64,
    pub rho_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceSummary {
    pub iterations: usize,
    pub center: [f64; 4],
    pub residual_angle: f64,
    pub balanced_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub vector: [f64; 4],
    pub norm: f64,
    pub rhs_naive: f64,
    /// `|m| - rhs_naive`: the supremum over `x` of the naive gap.
    pub conjecture_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub n: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub initial: RecordSummary,
    pub identities: IdentitySummary,
    pub origin: InequalitySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_center: Option<InequalitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentSummary>,
    pub verdicts: Vec<Verdict>,
    pub all_passed: bool,
}

/// Everything a scenario produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub summary: Summary,
    /// Records for the trace file; the initial record alone without a flow.
    pub records: Vec<FunctionalRecord>,
    /// Set when the flow broke down; artifacts are still written.
    pub failure: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.summary.all_passed
    }
}

/// Builds the initial surface described by `[shape]`.
pub fn initial_graph(config: &ScenarioConfig, grid: Arc<SphericalGrid>) -> Result<RadialGraph> {
    let shape = &config.shape;
    let r0 = shape.r0.context("shape.r0 is required")?;
    let graph = match (config.scenario, shape.d, shape.amplitude, shape.pattern) {
        (Scenario::CenteredSphere, ..) => RadialGraph::constant(grid, r0)?,
        (_, Some(d), ..) => offcenter_sphere_graph(grid, r0, d, shape.axis)?,
        (_, None, Some(a), Some(p)) => RadialGraph::from_fn(grid, |w| r0 + a * p.eval(w))?,
        _ => RadialGraph::constant(grid, r0)?,
    };
    Ok(graph)
}

/// The 26 unit vectors `(1, a/2, b/2, c/2)/|·|` with `a, b, c ∈ {-1, 0, 1}`
/// not all zero.
pub fn sample_directions() -> Vec<Vector4<f64>> {
    let mut out = Vec::with_capacity(26);
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                if (a, b, c) != (0, 0, 0) {
                    let v = Vector4::new(1.0, 0.5 * a as f64, 0.5 * b as f64, 0.5 * c as f64);
                    out.push(v.normalize());
                }
            }
        }
    }
    out
}

struct Initial {
    space: ModelSpace,
    graph: RadialGraph,
    fields: GeometryFields,
    record: FunctionalRecord,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let space = ModelSpace::sphere(config.n)?;
    let grid = Arc::new(SphericalGrid::new(config.grid.n_theta, config.grid.n_phi)?);
    let graph = initial_graph(config, grid)?;
    let fields = compute_geometry(&space, &graph)?;
    let record = functionals(&space, &graph, &fields, 0.0)?;
    let ctx = Initial {
        space,
        graph,
        fields,
        record,
    };
    let mut verdicts = Vec::new();
    let tol = &config.tolerances;

    let identities = identities(&ctx)?;
    verdicts.push(Verdict::at_most(
        "minkowski_identity",
        "|(n-2)I - 2∫pσ₂| / I",
        identities.minkowski,
        tol.identities,
    ));
    verdicts.push(Verdict::at_most(
        "minkowski_identity",
        "|∫(Hp - (n-1)ρ)| / I",
        identities.laplace_rho,
        tol.identities,
    ));
    verdicts.push(Verdict::at_most(
        "minkowski_identity",
        "|J - L| / J",
        identities.j_minus_l,
        tol.j_minus_l,
    ));

    let origin_report =
        inequality_at(&ctx.graph, &ctx.fields, &ctx.record, ReferencePoint::Origin)?;
    let origin = InequalitySummary::new(&Vector4::x(), &origin_report);
    weighted_volume_verdicts(config, &ctx, &mut verdicts)?;

    let mut summary_flow = None;
    let mut evolution = None;
    let mut balance_summary = None;
    let mut estimated_center = None;
    let mut moment = None;
    let mut records = vec![ctx.record];
    let mut failure = None;

    if config.scenario.runs_flow() {
        let flow_config = config.flow.flow_config();
        let (trace, center) = if config.scenario == Scenario::BalanceDemo {
            let out = balance(
                &ctx.space,
                &ctx.graph,
                &flow_config,
                tol.balance_angle,
                tol.balance_max_iter,
            )?;
            let spread = out.graph.radial_spread();
            verdicts.push(Verdict::at_most(
                "theorem_1_2",
                "balanced surface max |u - mean(u)|",
                spread,
                tol.balance_angle,
            ));
            balance_summary = Some(BalanceSummary {
                iterations: out.iterations,
                center: [out.center[0], out.center[1], out.center[2], out.center[3]],
                residual_angle: out.residual_angle,
                balanced_spread: spread,
            });
            (out.trace, Some(out.center))
        } else {
            let trace = run_flow(&ctx.space, &ctx.graph, &flow_config)?;
            let center = if trace.stop_reason == StopReason::ReachedA
                && config.scenario != Scenario::CenteredSphere
            {
                let end = compute_geometry(&ctx.space, &trace.final_graph)?;
                Some(estimate_equator(&trace.final_graph, &end)?)
            } else {
                None
            };
            (trace, center)
        };
        if matches!(
            trace.stop_reason,
            StopReason::ConvexityLost | StopReason::NumericalFailure
        ) {
            failure = Some(format!(
                "flow stopped with {} at t = {}: {}",
                trace.stop_reason.as_str(),
                trace.stop_time,
                trace.failure.as_deref().unwrap_or("convexity lost")
            ));
        }
        summary_flow = Some(flow_verdicts(config, &trace, &mut verdicts)?);
        records = trace.records.clone();
        if let Some(x) = center {
            let report = inequality_at(
                &ctx.graph,
                &ctx.fields,
                &ctx.record,
                ReferencePoint::Point(x),
            )?;
            estimated_center = Some(InequalitySummary::new(&x, &report));
        }
        if failure.is_none() {
            evolution = Some(evolution_verdict(config, &ctx, &mut verdicts)?);
        }
    }

    match config.scenario {
        Scenario::CenteredSphere => {
            verdicts.push(Verdict::at_most(
                "theorem_1_2",
                "|theorem gap| / I at the center",
                origin_report.theorem_gap.abs() / origin_report.lhs,
                tol.equality,
            ));
            verdicts.push(Verdict::at_most(
                "prop_4_2",
                "|naive gap| / I on the centered sphere",
                origin_report.naive_gap.abs() / origin_report.lhs,
                tol.equality,
            ));
            verdicts.push(Verdict::at_most(
                "prop_2_4_monotone",
                "|Q(0)|",
                ctx.record.monotone_q.abs(),
                tol.equality,
            ));
        }
        Scenario::OffCenterSphere | Scenario::BalanceDemo => {
            if let Some(x) = &estimated_center {
                verdicts.push(Verdict::at_most(
                    "theorem_1_2",
                    "|theorem gap| / I_x at the estimated center",
                    x.theorem_gap.abs() / x.i_x,
                    tol.theorem_gap,
                ));
            }
            if config.scenario == Scenario::OffCenterSphere {
                verdicts.push(Verdict::new(
                    "prop_4_2",
                    "naive gap at the origin (must be negative)",
                    origin_report.naive_gap,
                    0.0,
                    origin_report.naive_gap < 0.0,
                ));
            }
        }
        Scenario::PerturbedConvex => {
            if let Some(x) = &estimated_center {
                verdicts.push(Verdict::new(
                    "theorem_1_2",
                    "theorem gap at the estimated center (must be positive)",
                    x.theorem_gap,
                    0.0,
                    x.theorem_gap > 0.0,
                ));
            }
            verdicts.push(Verdict::at_least(
                "prop_2_4_monotone",
                "Q(0)",
                ctx.record.monotone_q,
                0.0,
            ));
        }
        Scenario::ConjectureExplorer => {
            let m = moment_vector(&ctx.graph, &ctx.fields);
            let rhs = naive_rhs(config.n, ctx.record.area_ratio);
            moment = Some(MomentSummary {
                vector: [m.vector[0], m.vector[1], m.vector[2], m.vector[3]],
                norm: m.norm,
                rhs_naive: rhs,
                conjecture_margin: m.norm - rhs,
            });
            if let Some(x) = m.direction {
                let report = inequality_at(
                    &ctx.graph,
                    &ctx.fields,
                    &ctx.record,
                    ReferencePoint::Point(x),
                )?;
                verdicts.push(Verdict::at_least(
                    "theorem_1_2",
                    "theorem gap / I_x at x = m/|m|",
                    report.theorem_gap / report.lhs,
                    -tol.theorem_slack,
                ));
                estimated_center = Some(InequalitySummary::new(&x, &report));
            }
        }
        Scenario::IdentitySuite => {}
    }

    let all_passed = verdicts.iter().all(|v| v.passed);
    let summary = Summary {
        scenario: config.scenario,
        n: config.n,
        n_theta: config.grid.n_theta,
        n_phi: config.grid.n_phi,
        initial: RecordSummary::from(&ctx.record),
        identities,
        origin,
        estimated_center,
        flow: summary_flow,
        evolution,
        balance: balance_summary,
        moment,
        verdicts,
        all_passed,
    };
    Ok(Report {
        summary,
        records,
        failure,
    })
}

fn identities(ctx: &Initial) -> Result<IdentitySummary> {
    let res = identity_residuals(&ctx.space, &ctx.fields)?;
    let i = ctx.record.rho_h;
    Ok(IdentitySummary {
        minkowski: res.minkowski.abs() / i,
        laplace_rho: res.laplace_rho.abs() / i,
        j_minus_l: ctx.record.j_minus_l.abs() / ctx.record.support,
    })
}

fn weighted_volume_verdicts(
    config: &ScenarioConfig,
    ctx: &Initial,
    verdicts: &mut Vec<Verdict>,
) -> Result<()> {
    let k = ctx.record.area_power;
    let rays = RayIntegrals::new(&ctx.graph);
    let mut worst = f64::NEG_INFINITY;
    for x in sample_directions() {
        worst = worst.max((rays.weighted_volume(&x)? - k) / k);
    }
    verdicts.push(Verdict::at_most(
        "prop_4_1",
        "max (L_x - calK) / calK over 26 directions",
        worst,
        config.tolerances.weighted_volume,
    ));
    let at_origin = (ctx.record.weighted_volume - k) / k;
    if config.scenario == Scenario::CenteredSphere {
        verdicts.push(Verdict::at_most(
            "prop_4_1",
            "|L - calK| / calK at the center",
            at_origin.abs(),
            config.tolerances.weighted_volume,
        ));
    } else {
        verdicts.push(Verdict::at_most(
            "prop_4_1",
            "(L - calK) / calK at the origin",
            at_origin,
            config.tolerances.weighted_volume,
        ));
    }
    Ok(())
}

fn flow_verdicts(
    config: &ScenarioConfig,
    trace: &FlowTrace,
    verdicts: &mut Vec<Verdict>,
) -> Result<FlowSummary> {
    let tol = &config.tolerances;
    let check = monotonicity_check(
        trace,
        &MonotoneParams::brendle(config.n),
        &MonotoneTolerances {
            slack: tol.monotone_slack,
            brendle: tol.brendle,
        },
    )?;
    let increases = check.violations.len() as f64;
    verdicts.push(Verdict::at_most(
        "prop_2_4_monotone",
        "record pairs where Q increases beyond slack",
        increases,
        0.0,
    ));
    verdicts.push(Verdict::at_least(
        "brendle_hypothesis",
        "min ((n-1)∫ρ/H - J) / J over records",
        check.min_brendle_margin,
        -tol.brendle,
    ));
    if config.scenario == Scenario::CenteredSphere {
        let worst = trace
            .records
            .iter()
            .map(|r| (r.brendle_gap() / r.support).abs())
            .fold(0.0, f64::max);
        verdicts.push(Verdict::at_most(
            "brendle_hypothesis",
            "max |(n-1)∫ρ/H - J| / J on the centered sphere",
            worst,
            tol.brendle,
        ));
    }
    Ok(FlowSummary {
        stop_reason: trace.stop_reason.as_str(),
        stop_time: trace.stop_time,
        steps: trace.steps,
        records: trace.records.len(),
        q_strict_decreases: check.q.windows(2).filter(|p| p[1] < p[0]).count(),
        max_q_increase: check.max_increase,
        min_brendle_margin: check.min_brendle_margin,
        failure: trace.failure.clone(),
    })
}

/// A short stride-one flow from the initial surface, compared against the
/// first-variation formulas.
fn evolution_verdict(
    config: &ScenarioConfig,
    ctx: &Initial,
    verdicts: &mut Vec<Verdict>,
) -> Result<EvolutionSummary> {
    let flow = &config.flow;
    let short = FlowConfig {
        dt_max: flow.evolution_dt,
        t_max: flow.evolution_dt * flow.evolution_steps as f64,
        record_every: 1,
        store_graphs: true,
        ..flow.flow_config()
    };
    let trace = run_flow(&ctx.space, &ctx.graph, &short)?;
    let res = evolution_checks(&ctx.space, &trace)?;
    verdicts.push(Verdict::at_most(
        "evolution_identities",
        "max relative residual of d|Σ|/dt, dJ/dt, dI/dt",
        res.max_residual(),
        config.tolerances.evolution,
    ));
    Ok(EvolutionSummary {
        samples: res.samples,
        area: res.area,
        support: res.support,
        rho_h: res.rho_h,
    })
}
