//! The point a hypersurface flows away from, and rotations that move it to
//! the origin.
//!
//! After the flow has nearly reached an equator, the surface lies close to
//! the great sphere `x^⊥` for some unit `x`. That `x` is recovered as the
//! smallest-eigenvalue direction of the second-moment matrix `∫ q qᵀ dΣ` of
//! the embedded surface.

use crate::ambient::WarpedProduct;
use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowConfig, FlowTrace, StopReason};
use crate::grid::angles_of;
use crate::surface::{compute_geometry, GeometryFields, RadialGraph};
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Proper rotation of `R⁴`, acting on `S³ ⊂ R⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMap {
    matrix: Matrix4<f64>,
}

impl Default for RotationMap {
    fn default() -> Self {
        Self::identity()
    }
}

impl RotationMap {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
        }
    }

    /// Checks orthonormality to `1e-12` and `det = +1`.
    pub fn from_matrix(matrix: Matrix4<f64>) -> Result<Self> {
        let defect = (matrix.transpose() * matrix - Matrix4::identity())
            .abs()
            .max();
        if defect > 1e-12 || (matrix.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "matrix is not a rotation (orthogonality defect {defect:e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// The rotation in the plane of `e₀` and `x` that sends the unit vector
    /// `x` to `e₀`, fixing the orthogonal complement of that plane.
    pub fn to_pole(x: &Vector4<f64>) -> Result<Self> {
        let norm = x.norm();
        if !(norm > 0.0) || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("|x| = {norm} is not 1")));
        }
        let x = x / norm;
        let tangential = Vector4::new(0.0, x[1], x[2], x[3]);
        let s = tangential.norm();
        let e0 = Vector4::x();
        let w = if s > 1e-15 {
            tangential / s
        } else if x[0] > 0.0 {
            return Ok(Self::identity());
        } else {
            Vector4::y()
        };
        let c = x[0];
        let angle = s.atan2(c);
        let (sa, ca) = angle.sin_cos();
        let plane = e0 * e0.transpose() + w * w.transpose();
        let turn = e0 * w.transpose() - w * e0.transpose();
        Ok(Self {
            matrix: Matrix4::identity() + (ca - 1.0) * plane + sa * turn,
        })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn apply(&self, q: &Vector4<f64>) -> Vector4<f64> {
        self.matrix * q
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn after(&self, first: &RotationMap) -> Self {
        Self {
            matrix: self.matrix * first.matrix,
        }
    }

    /// Angle through which the origin `e₀` is moved.
    pub fn angle(&self) -> f64 {
        self.matrix[(0, 0)].clamp(-1.0, 1.0).acos()
    }
}

/// Angle between the unit vector `x` and `e₀`.
pub fn angle_to_pole(x: &Vector4<f64>) -> f64 {
    (x[0] / x.norm()).clamp(-1.0, 1.0).acos()
}

/// Center of the hemisphere bounded by the great sphere that best fits a
/// near-equatorial surface.
///
/// The sign is chosen so that `x` points toward the surface centroid.
pub fn estimate_equator(graph: &RadialGraph, fields: &GeometryFields) -> Result<Vector4<f64>> {
    let points: Vec<Vector4<f64>> = (0..graph.u().len()).map(|i| graph.point(i)).collect();
    let mut moment = Matrix4::zeros();
    for a in 0..4 {
        for b in a..4 {
            let m = fields.integrate_by(|i| points[i][a] * points[i][b]);
            moment[(a, b)] = m;
            moment[(b, a)] = m;
        }
    }
    let centroid = Vector4::from_fn(|a, _| fields.integrate_by(|i| points[i][a]));
    let eigen = SymmetricEigen::new(moment);
    let smallest = eigen.eigenvalues.imin();
    let mut x: Vector4<f64> = eigen.eigenvectors.column(smallest).into_owned();
    x /= x.norm();
    let alignment = x.dot(&centroid);
    if alignment.abs() <= 1e-8 * centroid.norm() {
        return Err(Error::Degenerate(
            "centroid is orthogonal to the fitted pole".into(),
        ));
    }
    if alignment < 0.0 {
        x = -x;
    }
    Ok(x)
}

/// Bisection steps of the per-ray root finding in [`rotate_graph`].
const BISECTION_STEPS: usize = 64;

/// Resamples the image of `graph` under `rotation` as a radial graph on the
/// same grid.
///
/// Each ray is searched by bisection for the crossing of the inside/outside
/// test, which pulls the trial point back through the inverse rotation and
/// compares its radius with the interpolated original graph.
pub fn rotate_graph(graph: &RadialGraph, rotation: &RotationMap) -> Result<RadialGraph> {
    let grid = graph.grid();
    let back = rotation.inverse();
    let u = graph.u();
    let inside = |r: f64, w: &[f64; 3]| -> bool {
        let (s, c) = r.sin_cos();
        let q = back.apply(&Vector4::new(c, s * w[0], s * w[1], s * w[2]));
        let tangential = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        let radius = tangential.atan2(q[0]);
        if tangential < 1e-14 {
            return q[0] > 0.0;
        }
        let (theta, phi) = angles_of(&[q[1] / tangential, q[2] / tangential, q[3] / tangential]);
        radius < grid.interpolate(u, theta, phi)
    };
    let far = PI * (1.0 - 1e-9);
    if !inside(0.0, &[0.0, 0.0, 1.0]) {
        return Err(Error::NotRadialGraph(
            "origin leaves the enclosed region under the rotation".into(),
        ));
    }
    let radii: Vec<Result<f64>> = grid
        .directions()
        .par_iter()
        .map(|w| {
            if inside(far, w) {
                return Err(Error::NotRadialGraph(
                    "rotated surface does not cross every ray".into(),
                ));
            }
            let (mut lo, mut hi) = (0.0, far);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if inside(mid, w) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect();
    RadialGraph::new(grid.clone(), radii.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Outcome of [`balance`].
#[derive(Debug, Clone)]
pub struct Balanced {
    /// The original surface rotated so that its flow is centered.
    pub graph: RadialGraph,
    /// Accumulated rotation applied to the original surface.
    pub rotation: RotationMap,
    /// Flows run, including the final confirming one.
    pub iterations: usize,
    /// The estimated point `x(Σ)` in the original frame.
    pub center: Vector4<f64>,
    /// Angle between the last estimate and `e₀`.
    pub residual_angle: f64,
    /// The flow of the balanced surface.
    pub trace: FlowTrace,
}

/// Rotates `graph` until the point its flow singles out is the origin.
///
/// Every iteration flows the rotated ORIGINAL surface, so rotation errors
/// never accumulate through evolved states.
pub fn balance<W: WarpedProduct + ?Sized>(
    space: &W,
    graph: &RadialGraph,
    config: &FlowConfig,
    tol: f64,
    max_iter: usize,
) -> Result<Balanced> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config(
            "balance needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    let mut rotation = RotationMap::identity();
    let mut current = graph.clone();
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let trace = run_flow(space, &current, config)?;
        if matches!(
            trace.stop_reason,
            StopReason::ConvexityLost | StopReason::NumericalFailure
        ) {
            return Err(Error::Numerical(format!(
                "flow stopped with {} at t = {}",
                trace.stop_reason.as_str(),
                trace.stop_time
            )));
        }
        let fields = compute_geometry(space, &trace.final_graph)?;
        let x = estimate_equator(&trace.final_graph, &fields)?;
        residual = angle_to_pole(&x);
        if residual < tol {
            return Ok(Balanced {
                graph: current,
                center: rotation.inverse().apply(&x),
                rotation,
                iterations: iteration,
                residual_angle: residual,
                trace,
            });
        }
        rotation = RotationMap::to_pole(&x)?.after(&rotation);
        current = rotate_graph(graph, &rotation)?;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::ModelSpace;
    use crate::grid::SphericalGrid;
    use crate::surface::offcenter_sphere_graph;
    use std::f64::consts::FRAC_PI_6;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<SphericalGrid> {
        Arc::new(SphericalGrid::new(n, 2 * n).unwrap())
    }

    fn unit(v: [f64; 4]) -> Vector4<f64> {
        Vector4::from(v).normalize()
    }

    #[test]
    fn to_pole_is_a_rotation_sending_x_to_e0() {
        for v in [
            [0.3, 0.1, -0.5, 0.8],
            [-0.9, 0.1, 0.2, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ] {
            let x = unit(v);
            let r = RotationMap::to_pole(&x).unwrap();
            assert!(RotationMap::from_matrix(*r.matrix()).is_ok());
            assert!((r.apply(&x) - Vector4::x()).norm() < 1e-14);
            assert!((r.angle() - angle_to_pole(&x)).abs() < 1e-7);
            // the orthogonal complement of span(e₀, x) is fixed
            let mut probe = Vector4::new(0.0, 0.3, -0.2, 0.7);
            probe -= x * x.dot(&probe);
            probe[0] = 0.0;
            let w = Vector4::new(0.0, x[1], x[2], x[3]);
            if w.norm() > 1e-12 {
                let w = w.normalize();
                probe -= w * w.dot(&probe);
                assert!((r.apply(&probe) - probe).norm() < 1e-14);
            }
        }
        assert!(RotationMap::to_pole(&Vector4::new(2.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let a = RotationMap::to_pole(&unit([0.5, 0.5, 0.5, 0.5])).unwrap();
        let b = RotationMap::to_pole(&unit([0.9, -0.1, 0.3, 0.0])).unwrap();
        let ab = a.after(&b);
        let q = unit([0.1, 0.2, 0.3, 0.4]);
        assert!((ab.apply(&q) - a.apply(&b.apply(&q))).norm() < 1e-15);
        assert!((ab.inverse().apply(&ab.apply(&q)) - q).norm() < 1e-15);
        assert!(RotationMap::from_matrix(*ab.matrix()).is_ok());
        let mut reflection = Matrix4::identity();
        reflection[(3, 3)] = -1.0;
        assert!(RotationMap::from_matrix(reflection).is_err());
    }

    #[test]
    fn equator_fit_finds_the_center_of_wide_spheres() {
        let space = ModelSpace::sphere(3).unwrap();
        // spheres wider than π/3 have their smallest second moment along
        // the center
        let (r0, d) = (1.3, 0.2f64);
        let w = [0.6, 0.0, 0.8];
        let g = offcenter_sphere_graph(grid(32), r0, d, w).unwrap();
        let fields = compute_geometry(&space, &g).unwrap();
        let x = estimate_equator(&g, &fields).unwrap();
        let expected = Vector4::new(d.cos(), d.sin() * w[0], d.sin() * w[1], d.sin() * w[2]);
        assert!((x - expected).norm() < 1e-8, "{x} vs {expected}");
    }

    #[test]
    fn rotating_an_offcenter_sphere_recenters_it() {
        let axis = [0.0, 0.6, 0.8];
        let g = offcenter_sphere_graph(grid(32), FRAC_PI_6, 0.25, axis).unwrap();
        let center = Vector4::new(0.25f64.cos(), 0.0, 0.6 * 0.25f64.sin(), 0.8 * 0.25f64.sin());
        let r = RotationMap::to_pole(&center).unwrap();
        let moved = rotate_graph(&g, &r).unwrap();
        assert!(moved.radial_spread() < 1e-6, "{}", moved.radial_spread());
        assert!((moved.mean_radius() - FRAC_PI_6).abs() < 1e-6);
        // and back
        let back = rotate_graph(&moved, &r.inverse()).unwrap();
        let err = back
            .u()
            .iter()
            .zip(g.u())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
    }

    #[test]
    fn rotation_that_loses_the_origin_is_rejected() {
        let g = RadialGraph::constant(grid(16), 0.3).unwrap();
        let r = RotationMap::to_pole(&unit([0.5, 0.0, 0.0, 0.866])).unwrap();
        assert!(matches!(
            rotate_graph(&g, &r),
            Err(Error::NotRadialGraph(_))
        ));
    }

    #[test]
    fn centered_sphere_is_already_balanced() {
        let space = ModelSpace::sphere(3).unwrap();
        let g = RadialGraph::constant(grid(16), FRAC_PI_6).unwrap();
        let out = balance(&space, &g, &FlowConfig::default(), 1e-6, 3).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.rotation, RotationMap::identity());
        assert!(out.residual_angle < 1e-10);
    }

    #[test]
    fn balance_reports_non_convergence() {
        let space = ModelSpace::sphere(3).unwrap();
        let g = offcenter_sphere_graph(grid(16), FRAC_PI_6, 0.2, [0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            balance(&space, &g, &FlowConfig::default(), 1e-6, 1),
            Err(Error::NonConvergence { iterations: 1, .. })
        ));
    }
}
