//! Ground truth for geodesic spheres in `S^n`, any `n ≥ 3`.
//!
//! Centered spheres have closed forms. For a sphere whose center sits at
//! distance `d` from the origin, `L` is integrated over the ball in geodesic
//! polar coordinates about its own center, and `I` follows from the
//! integrated Minkowski identity `(n-2) I = 2σ₂ L` (σ₂ is constant on a
//! geodesic sphere). Neither route touches the radial-graph engine.

use crate::error::{Error, Result};
use crate::functionals::{naive_rhs, FunctionalRecord};
use crate::quadrature::{gauss_legendre_interval, unit_sphere_area};
use std::f64::consts::{FRAC_PI_2, PI};

/// Default Gauss–Legendre order per axis of the off-center volume integral.
pub const DEFAULT_ORACLE_ORDER: usize = 256;

/// A geodesic sphere of radius `r0` whose center is at distance `d` from the
/// origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    pub n: usize,
    pub r0: f64,
    pub d: f64,
}

impl SphereSpec {
    /// Requires `0 < r0`, `0 ≤ d` and `r0 + d < π/2`, so the sphere lies in
    /// the open hemisphere about the origin.
    pub fn new(n: usize, r0: f64, d: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension {n} < 3")));
        }
        if !(r0 > 0.0 && d >= 0.0 && r0 + d < FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "sphere (r0 = {r0}, d = {d}) is not inside the open hemisphere"
            )));
        }
        Ok(Self { n, r0, d })
    }

    /// `σ₂ = C(n-1, 2) cot² r0`.
    pub fn sigma2(&self) -> f64 {
        let n = self.n as f64;
        let cot = 1.0 / self.r0.tan();
        0.5 * (n - 1.0) * (n - 2.0) * cot * cot
    }

    /// `H = (n-1) cot r0`.
    pub fn mean_curvature(&self) -> f64 {
        (self.n as f64 - 1.0) / self.r0.tan()
    }
}

/// Closed-form functionals of the geodesic sphere of radius `r0` about the
/// origin.
pub fn sphere_closed_forms(n: usize, r0: f64) -> Result<FunctionalRecord> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension {n} < 3")));
    }
    if !(r0 > 0.0 && r0 < FRAC_PI_2) {
        return Err(Error::Domain(format!("radius {r0} outside (0, π/2)")));
    }
    let nf = n as f64;
    let omega = unit_sphere_area(n - 1);
    let (s, c) = r0.sin_cos();
    let h = (nf - 1.0) * c / s;
    let area_ratio = s.powi(n as i32 - 1);
    let volume = omega * s.powi(n as i32);
    Ok(FunctionalRecord {
        t: 0.0,
        dimension: n,
        area: omega * area_ratio,
        area_ratio,
        rho_h: (nf - 1.0) * omega * c * c * s.powi(n as i32 - 2),
        support: volume,
        weighted_volume: volume,
        area_power: volume,
        monotone_q: 0.0,
        j_minus_l: 0.0,
        min_h: h,
        lambda_min: c / s,
        umbilicity: 0.0,
        rho_over_h: omega * area_ratio * c / h,
    })
}

/// Oracle values for an off-center geodesic sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffCenterOracle {
    pub spec: SphereSpec,
    /// `L = n∫_Ω cos r dV` about the origin, by quadrature.
    pub weighted_volume: f64,
    /// `L` about the sphere's own center, `ω_{n-1} sin^n r0`.
    pub weighted_volume_center: f64,
    /// `I = ∫ρH dΣ` from `(n-2) I = 2σ₂ L`.
    pub rho_h: f64,
    pub area: f64,
    pub area_ratio: f64,
    pub area_power: f64,
    pub rhs_naive: f64,
    /// `I - rhs_naive`; negative whenever `d > 0`.
    pub naive_gap: f64,
    /// Gap of the weighted inequality with `x` at the sphere's center.
    pub theorem_gap: f64,
}

pub fn offcenter_oracle(n: usize, r0: f64, d: f64) -> Result<OffCenterOracle> {
    offcenter_oracle_with_order(n, r0, d, DEFAULT_ORACLE_ORDER)
}

pub fn offcenter_oracle_with_order(
    n: usize,
    r0: f64,
    d: f64,
    order: usize,
) -> Result<OffCenterOracle> {
    let spec = SphereSpec::new(n, r0, d)?;
    if !(d > 0.0) {
        return Err(Error::Domain("off-center oracle needs d > 0".into()));
    }
    let nf = n as f64;
    let omega = unit_sphere_area(n - 1);
    let weighted_volume = offcenter_weighted_volume(&spec, order);
    let area_ratio = r0.sin().powi(n as i32 - 1);
    let area = omega * area_ratio;
    let area_power = omega * area_ratio.powf(nf / (nf - 1.0));
    let weighted_volume_center = omega * r0.sin().powi(n as i32);
    let minkowski = 2.0 * spec.sigma2() / (nf - 2.0);
    let rho_h = minkowski * weighted_volume;
    let rhs_naive = naive_rhs(n, area_ratio);
    let rho_h_center = minkowski * weighted_volume_center;
    let theorem_gap = rho_h_center - weighted_volume_center / area_power * rhs_naive;
    Ok(OffCenterOracle {
        spec,
        weighted_volume,
        weighted_volume_center,
        rho_h,
        area,
        area_ratio,
        area_power,
        rhs_naive,
        naive_gap: rho_h - rhs_naive,
        theorem_gap,
    })
}

/// `n∫_Ω ⟨q, e₀⟩ dV` over the geodesic ball of radius `r0` centered at
/// distance `d` from `e₀`, by iterated Gauss–Legendre quadrature in
/// (distance from the center) × (polar angle from the center–origin axis).
pub fn offcenter_weighted_volume(spec: &SphereSpec, order: usize) -> f64 {
    let n = spec.n as i32;
    let (sd, cd) = spec.d.sin_cos();
    let (s_nodes, s_weights) = gauss_legendre_interval(order, 0.0, spec.r0);
    let (psi_nodes, psi_weights) = gauss_legendre_interval(order, 0.0, PI);
    let mut total = 0.0;
    for (s, ws) in s_nodes.iter().zip(&s_weights) {
        let (ss, cs) = s.sin_cos();
        let radial = ss.powi(n - 1);
        let mut inner = 0.0;
        for (psi, wp) in psi_nodes.iter().zip(&psi_weights) {
            let (sp, cp) = psi.sin_cos();
            // cos of the distance to the origin, with ψ measured from the
            // direction pointing away from it
            let rho = cs * cd - ss * cp * sd;
            inner += wp * rho * sp.powi(n - 2);
        }
        total += ws * radial * inner;
    }
    spec.n as f64 * unit_sphere_area(spec.n - 2) * total
}
