//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs at grid 96 × 192 unless a criterion says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use imcf_core::ambient::ModelSpace;
use imcf_core::balance::balance;
use imcf_core::flow::{
    evolution_checks, monotonicity_check, run_flow, FlowConfig, FlowTrace, MonotoneTolerances,
    StopReason,
};
use imcf_core::functionals::{
    functionals, inequality_at, moment_vector, naive_rhs, FunctionalRecord, MonotoneParams,
    RayIntegrals, ReferencePoint,
};
use imcf_core::grid::SphericalGrid;
use imcf_core::oracle::{offcenter_oracle, sphere_closed_forms};
use imcf_core::surface::{
    compute_geometry, identity_residuals, offcenter_sphere_graph, GeometryFields, RadialGraph,
};
use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

type Outcome = Result<String, String>;

const N_THETA: usize = 96;
const N_PHI: usize = 192;
const OFFCENTER_AXIS: [f64; 3] = [0.0, 0.6, 0.8];
const OFFCENTER_D: f64 = 0.25;

fn space() -> ModelSpace {
    ModelSpace::sphere(3).expect("n = 3 is valid")
}

fn grid_at(n_theta: usize) -> Arc<SphericalGrid> {
    Arc::new(SphericalGrid::new(n_theta, 2 * n_theta).expect("valid grid"))
}

fn grid() -> Arc<SphericalGrid> {
    static GRID: OnceLock<Arc<SphericalGrid>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(SphericalGrid::new(N_THETA, N_PHI).expect("valid grid")))
        .clone()
}

fn analyze(graph: &RadialGraph) -> Result<(GeometryFields, FunctionalRecord), String> {
    let space = space();
    let fields = compute_geometry(&space, graph).map_err(|e| e.to_string())?;
    let record = functionals(&space, graph, &fields, 0.0).map_err(|e| e.to_string())?;
    Ok((fields, record))
}

fn offcenter_center() -> Vector4<f64> {
    let (s, c) = OFFCENTER_D.sin_cos();
    Vector4::new(
        c,
        s * OFFCENTER_AXIS[0],
        s * OFFCENTER_AXIS[1],
        s * OFFCENTER_AXIS[2],
    )
}

fn offcenter_graph(n_theta: usize) -> RadialGraph {
    offcenter_sphere_graph(grid_at(n_theta), FRAC_PI_6, OFFCENTER_D, OFFCENTER_AXIS)
        .expect("valid off-center sphere")
}

fn perturbed_graph() -> RadialGraph {
    RadialGraph::from_fn(grid(), |w| FRAC_PI_4 + 0.05 * w[2]).expect("valid graph")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Flow traces shared between criteria; the Brendle check reads them all.
#[derive(Default)]
struct Traces {
    list: Mutex<Vec<(&'static str, FlowTrace, bool)>>,
}

impl Traces {
    fn add(&self, name: &'static str, trace: &FlowTrace, centered: bool) {
        self.list
            .lock()
            .unwrap()
            .push((name, trace.clone(), centered));
    }
}

fn closed_form_equality() -> Outcome {
    let g = RadialGraph::constant(grid(), FRAC_PI_4).map_err(|e| e.to_string())?;
    let (_, record) = analyze(&g)?;
    let rhs = naive_rhs(3, record.area_ratio);
    let exact = 2.0 * 2f64.sqrt() * PI;
    if (exact - 8.885766).abs() > 5e-7 {
        return Err(format!("closed form {exact} does not round to 8.885766"));
    }
    let (e_i, e_rhs) = (rel(record.rho_h, exact), rel(rhs, exact));
    let detail = format!(
        "I = {:.9}, rhs_naive = {rhs:.9}, rel errors {e_i:.1e} / {e_rhs:.1e}",
        record.rho_h
    );
    if e_i <= 1e-8 && e_rhs <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exponential_area_law(traces: &Traces) -> Outcome {
    let g = RadialGraph::constant(grid(), FRAC_PI_6).map_err(|e| e.to_string())?;
    let trace = run_flow(&space(), &g, &FlowConfig::default()).map_err(|e| e.to_string())?;
    traces.add("centered sphere", &trace, true);
    if trace.stop_reason != StopReason::ReachedA {
        return Err(format!("stopped with {}", trace.stop_reason.as_str()));
    }
    let a0 = trace.records[0].area_ratio;
    let worst = trace
        .records
        .iter()
        .map(|r| (r.area_ratio / (a0 * r.t.exp()) - 1.0).abs())
        .fold(0.0, f64::max);
    let expected_stop = (0.98f64 / 0.25).ln();
    let detail = format!(
        "A0 = {a0:.12}, max |A/(A0 e^t) - 1| = {worst:.2e} over {} records, stop at t = {:.6} (ln(0.98/0.25) = {expected_stop:.6}), {} steps",
        trace.records.len(),
        trace.stop_time,
        trace.steps
    );
    if worst <= 1e-4 && rel(a0, 0.25) < 1e-12 && (trace.stop_time - expected_stop).abs() < 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn monotone_quantity(traces: &Traces) -> Outcome {
    let trace = run_flow(&space(), &perturbed_graph(), &FlowConfig::default())
        .map_err(|e| e.to_string())?;
    traces.add("perturbed convex", &trace, false);
    if trace.stop_reason != StopReason::ReachedA {
        return Err(format!("stopped with {}", trace.stop_reason.as_str()));
    }
    let verdict = monotonicity_check(
        &trace,
        &MonotoneParams::brendle(3),
        &MonotoneTolerances::default(),
    )
    .map_err(|e| e.to_string())?;
    let q0 = verdict.q[0];
    let detail = format!(
        "Q(0) = {q0:.6e}, Q(end) = {:.3e}, max increase {:.2e}, {} records, {} violations",
        verdict.q.last().copied().unwrap_or(f64::NAN),
        verdict.max_increase,
        verdict.q.len(),
        verdict.violations.len()
    );
    if verdict.monotone && q0 > 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn theorem_rigidity(traces: &Traces) -> Outcome {
    let g = offcenter_graph(N_THETA);
    let space = space();
    let out = balance(&space, &g, &FlowConfig::default(), 1e-4, 5).map_err(|e| e.to_string())?;
    traces.add("balanced off-center sphere", &out.trace, false);
    let (fields, record) = analyze(&g)?;
    let report = inequality_at(&g, &fields, &record, ReferencePoint::Point(out.center))
        .map_err(|e| e.to_string())?;
    let gap = report.theorem_gap.abs() / report.lhs;
    let spread = out.graph.radial_spread();
    let center_error = (out.center - offcenter_center()).norm();
    let detail = format!(
        "{} iterations, |x - c| = {center_error:.2e}, |gap|/I_x = {gap:.2e}, balanced spread {spread:.2e}",
        out.iterations
    );
    if gap <= 1e-5 && spread <= 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn naive_counterexample() -> Outcome {
    let gaps: Vec<f64> = [N_THETA / 2, N_THETA]
        .iter()
        .map(|&n| {
            let g = offcenter_graph(n);
            let (fields, record) = analyze(&g)?;
            inequality_at(&g, &fields, &record, ReferencePoint::Origin)
                .map(|r| r.naive_gap)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let (coarse, fine) = (gaps[0], gaps[1]);
    let error = (fine - coarse).abs();
    let oracle = offcenter_oracle(3, FRAC_PI_6, OFFCENTER_D).map_err(|e| e.to_string())?;
    let detail = format!(
        "naive gap {fine:.9} (oracle {:.9}), doubling error estimate {error:.1e}",
        oracle.naive_gap
    );
    if fine < 0.0 && fine.abs() > 10.0 * error && rel(fine, oracle.naive_gap) < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sample_directions() -> Vec<Vector4<f64>> {
    let mut out = Vec::new();
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

fn weighted_volume_bound() -> Outcome {
    let directions = sample_directions();
    let surfaces = [
        (
            "centered",
            RadialGraph::constant(grid(), FRAC_PI_6).map_err(|e| e.to_string())?,
            Some(Vector4::x()),
        ),
        (
            "off-center",
            offcenter_graph(N_THETA),
            Some(offcenter_center()),
        ),
        ("perturbed", perturbed_graph(), None),
    ];
    let mut worst_margin = f64::INFINITY;
    let mut worst_equality = 0.0f64;
    let mut strict_min = f64::INFINITY;
    for (name, g, center) in &surfaces {
        let (_, record) = analyze(g)?;
        let k = record.area_power;
        let rays = RayIntegrals::new(g);
        for x in &directions {
            let l = rays.weighted_volume(x).map_err(|e| e.to_string())?;
            let margin = (k - l) / k;
            worst_margin = worst_margin.min(margin);
            if center.is_some() {
                strict_min = strict_min.min(margin);
            }
            if margin < -1e-8 {
                return Err(format!("{name}: L_x exceeds K by {:.2e} relative", -margin));
            }
        }
        if let Some(c) = center {
            let l = rays.weighted_volume(c).map_err(|e| e.to_string())?;
            worst_equality = worst_equality.max((k - l).abs() / k);
        }
    }
    let detail = format!(
        "26 directions x 3 surfaces: min (K - L_x)/K = {worst_margin:.3e}, at-center |K - L_x|/K = {worst_equality:.1e}, off-center-x min gap on spheres {strict_min:.3e}"
    );
    if worst_margin >= -1e-8 && worst_equality <= 1e-8 && strict_min > 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Deterministic smooth convex graphs: a constant radius plus small
/// polynomials of degree ≤ 3 in the direction.
fn random_convex_graphs(count: usize) -> Vec<RadialGraph> {
    let space = space();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut out = Vec::new();
    while out.len() < count {
        let base = rng.gen_range(0.35..1.0);
        let coeffs: Vec<f64> = (0..13).map(|_| rng.gen_range(-0.04..0.04)).collect();
        let g = RadialGraph::from_fn(grid(), |w| {
            let (x, y, z) = (w[0], w[1], w[2]);
            let monomials = [
                x,
                y,
                z,
                x * y,
                y * z,
                z * x,
                x * x - y * y,
                3.0 * z * z - 1.0,
                x * y * z,
                x * x * x,
                y * y * y,
                z * z * z,
                x * z * z,
            ];
            base + coeffs
                .iter()
                .zip(monomials)
                .map(|(c, m)| c * m)
                .sum::<f64>()
        })
        .expect("positive radii");
        let convex = compute_geometry(&space, &g)
            .map(|f| f.is_strictly_convex())
            .unwrap_or(false);
        if convex {
            out.push(g);
        }
    }
    out
}

fn integral_identities() -> Outcome {
    let space = space();
    let mut worst = [0.0f64; 3];
    for g in random_convex_graphs(10) {
        let (fields, record) = analyze(&g)?;
        let res = identity_residuals(&space, &fields).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(res.minkowski.abs() / record.rho_h);
        worst[1] = worst[1].max(res.laplace_rho.abs() / record.rho_h);
        worst[2] = worst[2].max(record.j_minus_l.abs() / record.support);
    }
    let detail = format!(
        "10 graphs: max |(n-2)I - 2∫pK|/I = {:.1e}, max |∫(Hp - (n-1)ρ)|/I = {:.1e}, max |J - L|/J = {:.1e}",
        worst[0], worst[1], worst[2]
    );
    if worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn evolution_identities(traces: &Traces) -> Outcome {
    let g = RadialGraph::constant(grid(), FRAC_PI_6).map_err(|e| e.to_string())?;
    let config = FlowConfig {
        dt_max: 1e-4,
        t_max: 0.02,
        record_every: 1,
        store_graphs: true,
        ..FlowConfig::default()
    };
    let space = space();
    let trace = run_flow(&space, &g, &config).map_err(|e| e.to_string())?;
    let res = evolution_checks(&space, &trace).map_err(|e| e.to_string())?;
    let mut light = trace.clone();
    light.graphs = None;
    traces.add("centered sphere, dt = 1e-4", &light, true);
    let detail = format!(
        "{} samples: d|Σ|/dt {:.1e}, dJ/dt {:.1e}, dI/dt {:.1e}; bound excess dI/dt {:.1e}, dJ/dt {:.1e}",
        res.samples, res.area, res.support, res.rho_h, res.rho_h_bound_excess, res.support_bound_deficit
    );
    if res.max_residual() <= 1e-3
        && res.rho_h_bound_excess <= 1e-3
        && res.support_bound_deficit <= 1e-3
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brendle_hypothesis(traces: &Traces) -> Outcome {
    let list = traces.list.lock().unwrap();
    if list.is_empty() {
        return Err("no flow traces were recorded".into());
    }
    let mut worst = f64::INFINITY;
    let mut worst_equality = 0.0f64;
    let mut records = 0;
    for (_, trace, centered) in list.iter() {
        for r in &trace.records {
            let margin = r.brendle_gap() / r.support;
            worst = worst.min(margin);
            if *centered {
                worst_equality = worst_equality.max(margin.abs());
            }
            records += 1;
        }
    }
    let names: Vec<&str> = list.iter().map(|(n, _, _)| *n).collect();
    let detail = format!(
        "{records} records from [{}]: min ((n-1)∫ρ/H - J)/J = {worst:.2e}, centered |gap|/J ≤ {worst_equality:.1e}",
        names.join(", ")
    );
    if worst >= -1e-8 && worst_equality <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let specs = [
        (FRAC_PI_6, 0.25),
        (0.4, 0.1),
        (0.6, 0.3),
        (0.7, 0.5),
        (FRAC_PI_4, 0.2),
    ];
    let axes = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [0.0, 0.6, 0.8],
        [0.48, 0.6, 0.64],
        [0.0, 1.0, 0.0],
    ];
    let mut worst = 0.0f64;
    for ((r0, d), axis) in specs.iter().zip(axes) {
        let g = offcenter_sphere_graph(grid(), *r0, *d, axis).map_err(|e| e.to_string())?;
        let (_, record) = analyze(&g)?;
        let o = offcenter_oracle(3, *r0, *d).map_err(|e| e.to_string())?;
        let errors = [
            rel(record.area, o.area),
            rel(record.weighted_volume, o.weighted_volume),
            rel(record.support, o.weighted_volume),
            rel(record.rho_h, o.rho_h),
            rel(record.area_power, o.area_power),
        ];
        worst = errors.iter().copied().fold(worst, f64::max);
    }
    // the centered closed forms anchor the same pipeline
    let centered = sphere_closed_forms(3, 0.6).map_err(|e| e.to_string())?;
    let (_, record) = analyze(&RadialGraph::constant(grid(), 0.6).map_err(|e| e.to_string())?)?;
    worst = worst.max(rel(record.rho_h, centered.rho_h));
    let detail = format!("5 sphere specs: max relative deviation of |Σ|, L, J, I, K = {worst:.2e}");
    if worst <= 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn moment_vector_invariance() -> Outcome {
    let cases = [
        (0.0, [0.0, 0.0, 1.0]),
        (0.1, [1.0, 0.0, 0.0]),
        (0.25, [0.0, 0.6, 0.8]),
        (0.4, [0.48, 0.6, 0.64]),
        (0.45, [0.0, -1.0, 0.0]),
    ];
    let mut worst = 0.0f64;
    for (d, axis) in cases {
        let g = offcenter_sphere_graph(grid(), FRAC_PI_6, d, axis).map_err(|e| e.to_string())?;
        let (fields, _) = analyze(&g)?;
        worst = worst.max((moment_vector(&g, &fields).norm - 3.0 * PI).abs());
    }
    let detail = format!("5 centers: max ||m| - 3π| = {worst:.2e}");
    if worst <= 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let traces = Arc::new(Traces::default());
    type Job = (usize, &'static str, Box<dyn FnOnce() -> Outcome + Send>);
    let t = |f: fn(&Traces) -> Outcome| {
        let traces = traces.clone();
        Box::new(move || f(&traces)) as Box<dyn FnOnce() -> Outcome + Send>
    };
    let independent: Vec<Job> = vec![
        (
            1,
            "closed-form equality on the centered sphere",
            Box::new(closed_form_equality),
        ),
        (2, "exponential area law", t(exponential_area_law)),
        (3, "monotone quantity", t(monotone_quantity)),
        (
            4,
            "weighted inequality equality and balancing",
            t(theorem_rigidity),
        ),
        (
            5,
            "off-center spheres violate the unweighted inequality",
            Box::new(naive_counterexample),
        ),
        (
            6,
            "weighted volume bounded by the area power",
            Box::new(weighted_volume_bound),
        ),
        (
            7,
            "integral identities on random convex graphs",
            Box::new(integral_identities),
        ),
        (8, "evolution identities", t(evolution_identities)),
        (10, "oracle equivalence", Box::new(oracle_equivalence)),
        (
            11,
            "moment vector rotation invariance",
            Box::new(moment_vector_invariance),
        ),
    ];
    let handles: Vec<_> = independent
        .into_iter()
        .map(|(id, name, job)| {
            let handle = std::thread::spawn(move || {
                let start = Instant::now();
                let outcome = job();
                (outcome, start.elapsed().as_secs_f64())
            });
            (id, name, handle)
        })
        .collect();
    let mut results: Vec<(usize, &str, Outcome, f64)> = handles
        .into_iter()
        .map(|(id, name, handle)| {
            let (outcome, secs) = handle
                .join()
                .unwrap_or_else(|_| (Err("panicked".to_string()), 0.0));
            (id, name, outcome, secs)
        })
        .collect();
    // reads the traces of 2, 3, 4 and 8
    let start = Instant::now();
    let brendle = brendle_hypothesis(&traces);
    results.push((
        9,
        "Brendle-type hypothesis along every flow",
        brendle,
        start.elapsed().as_secs_f64(),
    ));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, outcome, secs) in &results {
        match outcome {
            Ok(detail) => println!("PASS [{id:>2}] {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name} ({secs:.1} s): {detail}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
