//! Star-shaped hypersurfaces as radial graphs `r = u(θ)` over `S^{n-1}` and
//! their pointwise extrinsic geometry.
//!
//! Conventions: `ξ` is the unit normal pointing into the inner region (the
//! side containing `r = 0`), the shape operator is `aX = -D_X ξ`, so round
//! spheres about the origin have positive principal curvatures, and the
//! support function is `p = ḡ(Dρ, ξ) = -η''(u)/v`.
//!
//! For a graph the induced metric is `g = du ⊗ du + η(u)² h`, the gradient
//! factor is `v = √(1 + |∇u|²_h / η²)` and
//! `b_ij = (-u_{;ij} + 2(η'/η) u_i u_j + ηη' h_ij) / v`,
//! with `u_{;ij}` the Hessian of `u` on the round sphere. Tensor components
//! are stored in the orthonormal frame `(∂_θ, ∂_φ / sin θ)` of `h`.

use crate::ambient::{ModelKind, ModelSpace, WarpedProduct};
use crate::error::{Error, Result};
use crate::grid::SphericalGrid;
use crate::quadrature::weighted_sum;
use nalgebra::Vector4;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

/// Discretized radial graph over a [`SphericalGrid`] (ambient dimension 3).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: Arc<SphericalGrid>,
    u: Vec<f64>,
}

impl RadialGraph {
    /// Wraps nodal radii; every value must be finite and positive.
    pub fn new(grid: Arc<SphericalGrid>, u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} radii for a grid of {} nodes",
                u.len(),
                grid.len()
            )));
        }
        if let Some(bad) = u.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite radius {bad}")));
        }
        if let Some(bad) = u.iter().find(|&&x| x <= 0.0) {
            return Err(Error::NotRadialGraph(format!("non-positive radius {bad}")));
        }
        Ok(Self { grid, u })
    }

    /// Geodesic sphere of radius `r0` about the origin.
    pub fn constant(grid: Arc<SphericalGrid>, r0: f64) -> Result<Self> {
        let u = vec![r0; grid.len()];
        Self::new(grid, u)
    }

    /// Samples `f` at every node direction (a unit vector of `R³`).
    pub fn from_fn<F: Fn(&[f64; 3]) -> f64>(grid: Arc<SphericalGrid>, f: F) -> Result<Self> {
        let u = grid.directions().iter().map(f).collect();
        Self::new(grid, u)
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn into_values(self) -> Vec<f64> {
        self.u
    }

    /// Embedding of node `i` into `S³ ⊂ R⁴`: `(cos u, sin u · ω)`.
    pub fn point(&self, i: usize) -> Vector4<f64> {
        let (s, c) = self.u[i].sin_cos();
        let d = self.grid.directions()[i];
        Vector4::new(c, s * d[0], s * d[1], s * d[2])
    }

    pub fn mean_radius(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    /// Largest deviation of `u` from its mean.
    pub fn radial_spread(&self) -> f64 {
        let mean = self.mean_radius();
        self.u.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
    }
}

/// Geodesic sphere of radius `r0` in `S³` whose center lies at distance `d`
/// from the origin in direction `axis`, written as a radial graph.
///
/// Solves `cos r0 = cos d cos u + sin d cos ψ sin u` per node, where `ψ` is
/// the angle between the node direction and `axis`.
pub fn offcenter_sphere_graph(
    grid: Arc<SphericalGrid>,
    r0: f64,
    d: f64,
    axis: [f64; 3],
) -> Result<RadialGraph> {
    if !(r0 > 0.0 && r0 < FRAC_PI_2) {
        return Err(Error::Domain(format!("radius {r0} outside (0, π/2)")));
    }
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("center distance {d} is negative")));
    }
    if d >= r0 {
        return Err(Error::NotRadialGraph(format!(
            "center distance {d} >= radius {r0}: origin not enclosed"
        )));
    }
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Domain("axis must be non-zero".into()));
    }
    let axis = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let (sd, cd) = d.sin_cos();
    let cr = r0.cos();
    RadialGraph::from_fn(grid, |w| {
        let cos_psi = w[0] * axis[0] + w[1] * axis[1] + w[2] * axis[2];
        let amp = (cd * cd + sd * sd * cos_psi * cos_psi).sqrt();
        let shift = (sd * cos_psi).atan2(cd);
        shift + (cr / amp).clamp(-1.0, 1.0).acos()
    })
}

/// Per-node extrinsic geometry of a radial graph.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub dimension: usize,
    /// Induced metric `(g_11, g_12, g_22)` in the orthonormal frame of `h`.
    pub metric: Vec<[f64; 3]>,
    /// Second fundamental form, same layout as `metric`.
    pub second_form: Vec<[f64; 3]>,
    pub v: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub support: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
    /// Quadrature weight times the area density, so that
    /// `Σ_i f_i area_element_i ≈ ∫_Σ f dΣ`.
    pub area_element: Vec<f64>,
    /// Radial component `ḡ(ξ, ∂_r) = -1/v` of the inner normal.
    pub xi_radial: Vec<f64>,
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `∫_Σ f dΣ` for a nodal field.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        weighted_sum(&self.area_element, f)
    }

    /// `∫_Σ f(i) dΣ` for a per-node closure.
    pub fn integrate_by<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let values: Vec<f64> = (0..self.len()).map(f).collect();
        self.integrate(&values)
    }

    pub fn area(&self) -> f64 {
        crate::quadrature::pairwise_sum(&self.area_element)
    }

    pub fn min_mean_curvature(&self) -> f64 {
        self.mean_curvature
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_principal_curvature(&self) -> f64 {
        self.lambda_min
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `|a|²` at node `i`.
    pub fn shape_norm_sq(&self, i: usize) -> f64 {
        let h = self.mean_curvature[i];
        h * h - 2.0 * self.sigma2[i]
    }

    /// `|a|² - H²/(n-1)`, non-negative and zero exactly at umbilic points.
    pub fn umbilicity_density(&self, i: usize) -> f64 {
        let h = self.mean_curvature[i];
        self.shape_norm_sq(i) - h * h / (self.dimension as f64 - 1.0)
    }

    /// `((n-2)/(n-1)) H² - 2σ₂`, the Newton–MacLaurin slack.
    pub fn newton_maclaurin_slack(&self, i: usize) -> f64 {
        let n = self.dimension as f64;
        let h = self.mean_curvature[i];
        (n - 2.0) / (n - 1.0) * h * h - 2.0 * self.sigma2[i]
    }

    /// Whether the graph is strictly convex at every node.
    pub fn is_strictly_convex(&self) -> bool {
        self.min_principal_curvature() > 0.0
    }
}

/// Computes the pointwise geometry of `graph` inside `space`.
///
/// The grid engine covers ambient dimension 3.
pub fn compute_geometry<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
) -> Result<GeometryFields> {
    let n = space.dimension();
    if n != 3 {
        return Err(Error::Unsupported(format!(
            "grid geometry is implemented for n = 3, got n = {n}"
        )));
    }
    let grid = graph.grid();
    let u = graph.u();
    let jets = Jets::new(space, graph)?;
    let len = grid.len();
    let n_phi = grid.n_phi();
    let weights = grid.quad_weights();
    let mut nodes = vec![NodeGeometry::default(); len];
    nodes
        .par_chunks_mut(n_phi)
        .enumerate()
        .for_each(|(j, row)| {
            for (k, out) in row.iter_mut().enumerate() {
                let i = j * n_phi + k;
                let (grad, hess) = jets.at(grid, j, i);
                *out = NodeGeometry::evaluate(space, u[i], grad, hess, weights[i]);
            }
        });

    let mut fields = GeometryFields {
        dimension: n,
        metric: Vec::with_capacity(len),
        second_form: Vec::with_capacity(len),
        v: Vec::with_capacity(len),
        mean_curvature: Vec::with_capacity(len),
        sigma2: Vec::with_capacity(len),
        lambda_min: Vec::with_capacity(len),
        lambda_max: Vec::with_capacity(len),
        support: Vec::with_capacity(len),
        rho: Vec::with_capacity(len),
        eta: Vec::with_capacity(len),
        area_element: Vec::with_capacity(len),
        xi_radial: Vec::with_capacity(len),
    };
    for node in nodes {
        if !(node.h.is_finite() && node.sigma2.is_finite() && node.v.is_finite()) {
            return Err(Error::Numerical("non-finite curvature".into()));
        }
        fields.metric.push(node.metric);
        fields.second_form.push(node.second_form);
        fields.v.push(node.v);
        fields.mean_curvature.push(node.h);
        fields.sigma2.push(node.sigma2);
        fields.lambda_min.push(node.lambda_min);
        fields.lambda_max.push(node.lambda_max);
        fields.support.push(node.support);
        fields.rho.push(node.rho);
        fields.eta.push(node.eta);
        fields.area_element.push(node.area_element);
        fields.xi_radial.push(-1.0 / node.v);
    }
    Ok(fields)
}

/// First and second derivatives of `u` in grid coordinates.
struct Jets {
    t: Vec<f64>,
    tt: Vec<f64>,
    p: Vec<f64>,
    pp: Vec<f64>,
    tp: Vec<f64>,
}

impl Jets {
    fn new<W: WarpedProduct + ?Sized>(space: &W, graph: &RadialGraph) -> Result<Self> {
        let grid = graph.grid();
        let u = graph.u();
        if let Some(bad) = u.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite radius {bad}")));
        }
        if let Some(bad) = u.iter().find(|&&x| !(x > 0.0 && x < space.r_max())) {
            return Err(Error::NotRadialGraph(format!(
                "radius {bad} outside (0, {})",
                space.r_max()
            )));
        }
        let (t, tt) = grid.theta_derivatives(u);
        let (p, pp) = grid.phi_derivatives(u);
        let tp = grid.theta_derivative(&p);
        Ok(Self { t, tt, p, pp, tp })
    }

    /// Gradient and Hessian of `u` on the round sphere at node `i` of row
    /// `j`, in the orthonormal frame.
    #[inline]
    fn at(&self, grid: &SphericalGrid, j: usize, i: usize) -> ([f64; 2], [f64; 3]) {
        let s = grid.sin_theta()[j];
        let c = grid.cos_theta()[j];
        let grad = [self.t[i], self.p[i] / s];
        let hess = [
            self.tt[i],
            (self.tp[i] - c / s * self.p[i]) / s,
            (self.pp[i] + s * c * self.t[i]) / (s * s),
        ];
        (grad, hess)
    }
}

/// Gradient factor `v` and mean curvature `H` from the warp values and the
/// frame components of the gradient and Hessian of `u`.
#[inline]
fn gradient_factor_and_mean_curvature(
    eta: f64,
    eta1: f64,
    grad: [f64; 2],
    hess: [f64; 3],
) -> ([f64; 3], [f64; 3], f64, f64, f64) {
    let grad_sq = grad[0] * grad[0] + grad[1] * grad[1];
    let v = (1.0 + grad_sq / (eta * eta)).sqrt();
    let metric = [
        grad[0] * grad[0] + eta * eta,
        grad[0] * grad[1],
        grad[1] * grad[1] + eta * eta,
    ];
    let log_slope = 2.0 * eta1 / eta;
    let second_form = [
        (-hess[0] + log_slope * grad[0] * grad[0] + eta * eta1) / v,
        (-hess[1] + log_slope * grad[0] * grad[1]) / v,
        (-hess[2] + log_slope * grad[1] * grad[1] + eta * eta1) / v,
    ];
    let det_g = metric[0] * metric[2] - metric[1] * metric[1];
    let h = (metric[2] * second_form[0] - 2.0 * metric[1] * second_form[1]
        + metric[0] * second_form[2])
        / det_g;
    (metric, second_form, v, h, det_g)
}

/// What one explicit flow step needs from the current graph.
#[derive(Debug, Clone)]
pub struct FlowSample {
    /// Radial speed `v/H` of the inverse mean curvature flow, unfiltered.
    pub speed: Vec<f64>,
    pub area: f64,
    pub min_mean_curvature: f64,
    pub min_principal_curvature: f64,
    /// `min (Hη)²`, the scale of the parabolic step bound.
    pub min_diffusion_scale: f64,
}

/// Computes a [`FlowSample`], skipping everything [`compute_geometry`]
/// builds beyond it.
pub fn flow_sample<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
) -> Result<FlowSample> {
    if space.dimension() != 3 {
        return Err(Error::Unsupported(format!(
            "grid geometry is implemented for n = 3, got n = {}",
            space.dimension()
        )));
    }
    let grid = graph.grid();
    let u = graph.u();
    let jets = Jets::new(space, graph)?;
    let n_phi = grid.n_phi();
    let weights = grid.quad_weights();
    let mut speed = vec![0.0; grid.len()];
    let rows: Vec<[f64; 4]> = speed
        .par_chunks_mut(n_phi)
        .enumerate()
        .map(|(j, row)| {
            let mut acc = [0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY];
            for (k, out) in row.iter_mut().enumerate() {
                let i = j * n_phi + k;
                let (grad, hess) = jets.at(grid, j, i);
                let w = space.warp_unchecked(u[i]);
                let (_, b, v, h, det_g) =
                    gradient_factor_and_mean_curvature(w.eta, w.eta_prime, grad, hess);
                let sigma2 = (b[0] * b[2] - b[1] * b[1]) / det_g;
                let lambda_min = 0.5 * (h - (h * h - 4.0 * sigma2).max(0.0).sqrt());
                *out = v / h;
                acc[0] += weights[i] * w.eta * w.eta * v;
                acc[1] = acc[1].min(h);
                acc[2] = acc[2].min(lambda_min);
                acc[3] = acc[3].min((h * w.eta) * (h * w.eta));
            }
            acc
        })
        .collect();
    if speed.iter().any(|s| s.is_nan()) {
        return Err(Error::Numerical("non-finite mean curvature".into()));
    }
    let row_areas: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let fold = |k: usize| rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
    Ok(FlowSample {
        speed,
        area: crate::quadrature::pairwise_sum(&row_areas),
        min_mean_curvature: fold(1),
        min_principal_curvature: fold(2),
        min_diffusion_scale: fold(3),
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeGeometry {
    metric: [f64; 3],
    second_form: [f64; 3],
    v: f64,
    h: f64,
    sigma2: f64,
    lambda_min: f64,
    lambda_max: f64,
    support: f64,
    rho: f64,
    eta: f64,
    area_element: f64,
}

impl NodeGeometry {
    fn evaluate<W: WarpedProduct + ?Sized>(
        space: &W,
        r: f64,
        grad: [f64; 2],
        hess: [f64; 3],
        weight: f64,
    ) -> Self {
        let w = space.warp_unchecked(r);
        let (eta, eta1) = (w.eta, w.eta_prime);
        let (metric, second_form, v, h, det_g) =
            gradient_factor_and_mean_curvature(eta, eta1, grad, hess);
        let det_b = second_form[0] * second_form[2] - second_form[1] * second_form[1];
        let sigma2 = det_b / det_g;
        let disc = (h * h - 4.0 * sigma2).max(0.0).sqrt();
        NodeGeometry {
            metric,
            second_form,
            v,
            h,
            sigma2,
            lambda_min: 0.5 * (h - disc),
            lambda_max: 0.5 * (h + disc),
            support: -w.eta_double_prime / v,
            rho: eta1,
            eta,
            // dΣ = η^{n-1} v dθ_h with n = 3
            area_element: weight * eta * eta * v,
        }
    }
}

/// `k`-th elementary symmetric polynomial of `lambda`; `σ_0 = 1`.
pub fn sigma_k(lambda: &[f64], k: usize) -> Result<f64> {
    if k > lambda.len() {
        return Err(Error::Domain(format!(
            "k = {k} exceeds the number of principal curvatures {}",
            lambda.len()
        )));
    }
    // e[j] holds σ_j of the prefix processed so far
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &l in lambda {
        for j in (1..=k).rev() {
            e[j] += l * e[j - 1];
        }
    }
    Ok(e[k])
}

/// Integrated forms of the Minkowski-type identity and of
/// `Δ_Σ ρ = -ρ Ric(ξ, ξ) + Hp`; both vanish on closed hypersurfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `(n-2)∫ρH dΣ - 2∫pσ₂ dΣ`.
    pub minkowski: f64,
    /// `∫(Hp - Ric(ξ,ξ) ρ) dΣ`.
    pub laplace_rho: f64,
}

pub fn identity_residuals(
    space: &ModelSpace,
    fields: &GeometryFields,
) -> Result<IdentityResiduals> {
    if space.kind() != ModelKind::Spherical {
        return Err(Error::Domain(
            "integral identities are stated for the spherical ambient".into(),
        ));
    }
    let n = space.dimension() as f64;
    let ricci = (n - 1.0) * space.kappa();
    let rho_h = fields.integrate_by(|i| fields.rho[i] * fields.mean_curvature[i]);
    let p_k = fields.integrate_by(|i| fields.support[i] * fields.sigma2[i]);
    let laplace_rho = fields
        .integrate_by(|i| fields.mean_curvature[i] * fields.support[i] - ricci * fields.rho[i]);
    Ok(IdentityResiduals {
        minkowski: (n - 2.0) * rho_h - 2.0 * p_k,
        laplace_rho,
    })
}
