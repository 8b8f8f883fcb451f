//! Scalar functionals of a radial graph, the monotone quantity `Q` and the
//! inequality gaps built from them.
//!
//! Names follow the quantities they integrate:
//! `rho_h = ∫ρH dΣ`, `support = ∫p dΣ`, `weighted_volume = n∫_Ω ρ dΩ`,
//! `area_power = ω_{n-1} A^{n/(n-1)}` with `A = |Σ|/ω_{n-1}`.

use crate::ambient::WarpedProduct;
use crate::error::{Error, Result};
use crate::quadrature::{simpson, unit_sphere_area};
use crate::surface::{GeometryFields, RadialGraph};
use nalgebra::Vector4;

/// Panels of the per-ray Simpson rule used for `L_x`.
pub const RADIAL_SIMPSON_PANELS: usize = 256;

/// Functionals of one hypersurface at flow time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalRecord {
    pub t: f64,
    pub dimension: usize,
    /// `|Σ|`
    pub area: f64,
    /// `A = |Σ| / ω_{n-1}`
    pub area_ratio: f64,
    /// `I = ∫ρH dΣ`
    pub rho_h: f64,
    /// `J = ∫p dΣ`
    pub support: f64,
    /// `L = n∫_Ω ρ dΩ`
    pub weighted_volume: f64,
    /// `𝒦 = ω_{n-1} A^{n/(n-1)}`
    pub area_power: f64,
    /// `Q` with `α = 0`.
    pub monotone_q: f64,
    /// `J - L`; zero in the continuum on the sphere.
    pub j_minus_l: f64,
    pub min_h: f64,
    pub lambda_min: f64,
    /// `∫(|a|² - H²/(n-1)) dΣ`
    pub umbilicity: f64,
    /// `∫ρ/H dΣ`, the left side of the Brendle-type inequality up to `n-1`.
    pub rho_over_h: f64,
}

impl FunctionalRecord {
    /// `(n-1)∫ρ/H dΣ - J`; non-negative by the Brendle-type inequality.
    pub fn brendle_gap(&self) -> f64 {
        (self.dimension as f64 - 1.0) * self.rho_over_h - self.support
    }
}

/// Constants of the monotone quantity: `α` and the derived `β`, `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl MonotoneParams {
    pub fn new(alpha: f64, dimension: usize) -> Self {
        let n = dimension as f64;
        Self {
            alpha,
            beta: (n - 1.0) / (n - 2.0) * alpha,
            gamma: 2.0 * (n - 1.0) * (n - 1.0) / (n * (n - 2.0)) * alpha,
        }
    }

    /// `α = 0`, the case covered by the Brendle-type inequality.
    pub fn brendle(dimension: usize) -> Self {
        Self::new(0.0, dimension)
    }
}

/// `Q = A^{-(n-2)/(n-1)} [I - (n-1)(J + β)(A^{-2/(n-1)} - 1) + γ A^{-2/(n-1)}]`.
pub fn monotone_quantity(
    dimension: usize,
    area_ratio: f64,
    rho_h: f64,
    support: f64,
    params: &MonotoneParams,
) -> Result<f64> {
    if !(area_ratio > 0.0) {
        return Err(Error::Domain(format!(
            "normalized area must be positive, got {area_ratio}"
        )));
    }
    let n = dimension as f64;
    let inv = area_ratio.powf(-2.0 / (n - 1.0));
    Ok(area_ratio.powf(-(n - 2.0) / (n - 1.0))
        * (rho_h - (n - 1.0) * (support + params.beta) * (inv - 1.0) + params.gamma * inv))
}

/// `Q` evaluated on a record.
pub fn q_quantity(record: &FunctionalRecord, params: &MonotoneParams) -> Result<f64> {
    monotone_quantity(
        record.dimension,
        record.area_ratio,
        record.rho_h,
        record.support,
        params,
    )
}

/// `(n-1) ω_{n-1} (A^{(n-2)/(n-1)} - A^{n/(n-1)})`, the value of `I` on the
/// centered geodesic sphere of normalized area `A`.
pub fn naive_rhs(dimension: usize, area_ratio: f64) -> f64 {
    let n = dimension as f64;
    let omega = unit_sphere_area(dimension - 1);
    (n - 1.0) * omega * (area_ratio.powf((n - 2.0) / (n - 1.0)) - area_ratio.powf(n / (n - 1.0)))
}

/// Integrates every functional of `graph` given its geometry.
pub fn functionals<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    fields: &GeometryFields,
    t: f64,
) -> Result<FunctionalRecord> {
    let n = space.dimension();
    let nf = n as f64;
    let omega = unit_sphere_area(n - 1);
    let area = fields.area();
    let area_ratio = area / omega;
    let rho_h = fields.integrate_by(|i| fields.rho[i] * fields.mean_curvature[i]);
    let support = fields.integrate(&fields.support);
    // n∫_0^u η' η^{n-1} dr = η(u)^n
    let eta_n: Vec<f64> = fields.eta.iter().map(|e| e.powi(n as i32)).collect();
    let weighted_volume = graph.grid().integrate(&eta_n);
    let area_power = omega * area_ratio.powf(nf / (nf - 1.0));
    let umbilicity = fields.integrate_by(|i| fields.umbilicity_density(i));
    let rho_over_h = fields.integrate_by(|i| fields.rho[i] / fields.mean_curvature[i]);
    let monotone_q = monotone_quantity(n, area_ratio, rho_h, support, &MonotoneParams::brendle(n))?;
    Ok(FunctionalRecord {
        t,
        dimension: n,
        area,
        area_ratio,
        rho_h,
        support,
        weighted_volume,
        area_power,
        monotone_q,
        j_minus_l: support - weighted_volume,
        min_h: fields.min_mean_curvature(),
        lambda_min: fields.min_principal_curvature(),
        umbilicity,
        rho_over_h,
    })
}

/// `L_x = n∫_Ω ρ_x dΩ` for a unit vector `x ∈ S³ ⊂ R⁴`.
///
/// Uses `ρ_x(q) = ⟨q, x⟩` in the embedding and a composite Simpson rule
/// along every ray.
pub fn rho_x_volume(graph: &RadialGraph, x: &Vector4<f64>) -> Result<f64> {
    RayIntegrals::new(graph).weighted_volume(x)
}

/// Per-ray radial integrals `∫_0^u cos r sin² r dr` and `∫_0^u sin³ r dr`.
///
/// `L_x` is linear in `x`, so these two numbers per ray serve every
/// reference point.
#[derive(Debug, Clone)]
pub struct RayIntegrals<'a> {
    graph: &'a RadialGraph,
    cos_part: Vec<f64>,
    sin_part: Vec<f64>,
}

impl<'a> RayIntegrals<'a> {
    pub fn new(graph: &'a RadialGraph) -> Self {
        let (cos_part, sin_part) = graph
            .u()
            .iter()
            .map(|&u| {
                let c = simpson(|r| r.cos() * r.sin().powi(2), 0.0, u, RADIAL_SIMPSON_PANELS);
                let s = simpson(|r| r.sin().powi(3), 0.0, u, RADIAL_SIMPSON_PANELS);
                (c, s)
            })
            .unzip();
        Self {
            graph,
            cos_part,
            sin_part,
        }
    }

    pub fn weighted_volume(&self, x: &Vector4<f64>) -> Result<f64> {
        if (x.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "reference point must be a unit vector, |x| = {}",
                x.norm()
            )));
        }
        let grid = self.graph.grid();
        let values: Vec<f64> = grid
            .directions()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let tangential = x[1] * w[0] + x[2] * w[1] + x[3] * w[2];
                x[0] * self.cos_part[i] + tangential * self.sin_part[i]
            })
            .collect();
        Ok(3.0 * grid.integrate(&values))
    }
}

/// `m = ∫ q H dΣ` in the embedding; `sup_x ∫ρ_x H dΣ = |m|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentVector {
    pub vector: Vector4<f64>,
    pub norm: f64,
    /// `m / |m|`, or `None` when `|m|` is numerically zero.
    pub direction: Option<Vector4<f64>>,
}

impl MomentVector {
    /// `∫ρ_x H dΣ = ⟨x, m⟩`.
    pub fn weighted_mean_curvature(&self, x: &Vector4<f64>) -> f64 {
        self.vector.dot(x)
    }
}

pub fn moment_vector(graph: &RadialGraph, fields: &GeometryFields) -> MomentVector {
    let mut vector = Vector4::zeros();
    for c in 0..4 {
        vector[c] = fields.integrate_by(|i| graph.point(i)[c] * fields.mean_curvature[i]);
    }
    let norm = vector.norm();
    let scale = fields.integrate_by(|i| fields.mean_curvature[i].abs());
    let direction = (norm > 1e-12 * scale.max(f64::MIN_POSITIVE)).then(|| vector / norm);
    MomentVector {
        vector,
        norm,
        direction,
    }
}

/// Both sides of the weighted Alexandrov–Fenchel-type inequality and of the
/// unweighted ("naive") variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// `I_x = ∫ρ_x H dΣ`
    pub lhs: f64,
    /// `(n-1) ω_{n-1} (L_x/𝒦)(A^{(n-2)/(n-1)} - A^{n/(n-1)})`
    pub rhs_theorem: f64,
    /// same without the `L_x/𝒦` factor
    pub rhs_naive: f64,
    pub theorem_gap: f64,
    pub naive_gap: f64,
    pub l_x: f64,
}

pub fn inequality_report(
    record: &FunctionalRecord,
    l_x: f64,
    i_x: f64,
) -> Result<InequalityReport> {
    if record.area_power == 0.0 || !record.area_power.is_finite() {
        return Err(Error::Degenerate(format!(
            "area power {} cannot normalize L_x",
            record.area_power
        )));
    }
    let rhs_naive = naive_rhs(record.dimension, record.area_ratio);
    let rhs_theorem = l_x / record.area_power * rhs_naive;
    Ok(InequalityReport {
        lhs: i_x,
        rhs_theorem,
        rhs_naive,
        theorem_gap: i_x - rhs_theorem,
        naive_gap: i_x - rhs_naive,
        l_x,
    })
}

/// Which point `x` weights `ρ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferencePoint {
    /// The pole `r = 0`; uses the exact `I` and `L` of the record.
    Origin,
    Point(Vector4<f64>),
}

/// [`inequality_report`] with `L_x` and `I_x` evaluated on the graph.
pub fn inequality_at(
    graph: &RadialGraph,
    fields: &GeometryFields,
    record: &FunctionalRecord,
    x: ReferencePoint,
) -> Result<InequalityReport> {
    match x {
        ReferencePoint::Origin => inequality_report(record, record.weighted_volume, record.rho_h),
        ReferencePoint::Point(x) => {
            let l_x = rho_x_volume(graph, &x)?;
            let i_x = moment_vector(graph, fields).weighted_mean_curvature(&x);
            inequality_report(record, l_x, i_x)
        }
    }
}
