//! Warped-product model spaces `dr² + η(r)² g_{S^{n-1}}` and the potential
//! `ρ = η'(r)`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Values of the warping function and its first three derivatives at one
/// radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValues {
    pub eta: f64,
    pub eta_prime: f64,
    pub eta_double_prime: f64,
    pub eta_triple_prime: f64,
}

impl WarpValues {
    /// The potential `ρ = η'`.
    pub fn rho(&self) -> f64 {
        self.eta_prime
    }
}

/// A warped product `N × [0, r_max)` over the round `S^{n-1}`.
///
/// Implement this to plug a custom warping function into the geometry and
/// flow routines. Only the space forms of [`ModelSpace`] are exercised by the
/// test suite.
pub trait WarpedProduct: Send + Sync {
    /// Ambient dimension `n`.
    fn dimension(&self) -> usize;

    /// Upper bound of the radial coordinate (`f64::INFINITY` when unbounded).
    fn r_max(&self) -> f64;

    /// Warping function and derivatives; callers guarantee `0 ≤ r < r_max`.
    fn warp_unchecked(&self, r: f64) -> WarpValues;

    /// `Ric_M(ξ, ξ)` for a unit vector, when the ambient is Einstein.
    fn ricci_normal(&self) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Spherical,
    Hyperbolic,
    Euclidean,
}

impl ModelKind {
    /// Sectional curvature of the space form.
    pub fn kappa(self) -> f64 {
        match self {
            ModelKind::Spherical => 1.0,
            ModelKind::Hyperbolic => -1.0,
            ModelKind::Euclidean => 0.0,
        }
    }
}

/// Space forms written as warped products with `η = sin r`, `sinh r` or `r`.
///
/// Only the spherical kind satisfies the traced static identity
/// `Δρ + nρ = 0` and has scalar curvature `n(n-1)`; the other two are kept as
/// negative controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpace {
    kind: ModelKind,
    dimension: usize,
    r_max: f64,
}

impl ModelSpace {
    pub fn new(kind: ModelKind, dimension: usize) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::Domain(format!(
                "ambient dimension must be at least 3, got {dimension}"
            )));
        }
        let r_max = match kind {
            ModelKind::Spherical => PI,
            // sentinel only; nothing enforces geometry at large r
            ModelKind::Hyperbolic | ModelKind::Euclidean => f64::INFINITY,
        };
        Ok(Self {
            kind,
            dimension,
            r_max,
        })
    }

    pub fn sphere(dimension: usize) -> Result<Self> {
        Self::new(ModelKind::Spherical, dimension)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Sectional curvature `κ`.
    pub fn kappa(&self) -> f64 {
        self.kind.kappa()
    }

    /// Scalar curvature `n(n-1)κ`.
    pub fn scalar_curvature(&self) -> f64 {
        let n = self.dimension as f64;
        n * (n - 1.0) * self.kappa()
    }

    /// `(η, η', η'')` at `r`; `ρ(r)` is the middle entry.
    pub fn warp_eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        let w = self.warp(r)?;
        Ok((w.eta, w.eta_prime, w.eta_double_prime))
    }

    pub fn warp(&self, r: f64) -> Result<WarpValues> {
        if !(r >= 0.0 && r < self.r_max) {
            return Err(Error::Domain(format!(
                "radius {r} outside [0, {})",
                self.r_max
            )));
        }
        Ok(self.warp_unchecked(r))
    }

    pub fn rho(&self, r: f64) -> Result<f64> {
        Ok(self.warp(r)?.eta_prime)
    }

    /// Radial evaluation of `Δ_M ρ + nρ` for the radial function `ρ = η'(r)`.
    ///
    /// Vanishes identically exactly when the traced static identity holds.
    pub fn static_residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < self.r_max) {
            return Err(Error::Domain(format!(
                "static residual needs 0 < r < {}, got {r}",
                self.r_max
            )));
        }
        let w = self.warp_unchecked(r);
        let n = self.dimension as f64;
        // ρ' = η'', ρ'' = η'''
        Ok(w.eta_triple_prime
            + (n - 1.0) * (w.eta_prime / w.eta) * w.eta_double_prime
            + n * w.eta_prime)
    }
}

impl WarpedProduct for ModelSpace {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn warp_unchecked(&self, r: f64) -> WarpValues {
        match self.kind {
            ModelKind::Spherical => {
                let (s, c) = r.sin_cos();
                WarpValues {
                    eta: s,
                    eta_prime: c,
                    eta_double_prime: -s,
                    eta_triple_prime: -c,
                }
            }
            ModelKind::Hyperbolic => {
                let (s, c) = (r.sinh(), r.cosh());
                WarpValues {
                    eta: s,
                    eta_prime: c,
                    eta_double_prime: s,
                    eta_triple_prime: c,
                }
            }
            ModelKind::Euclidean => WarpValues {
                eta: r,
                eta_prime: 1.0,
                eta_double_prime: 0.0,
                eta_triple_prime: 0.0,
            },
        }
    }

    fn ricci_normal(&self) -> Option<f64> {
        Some((self.dimension as f64 - 1.0) * self.kappa())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    #[allow(clippy::approx_constant)]
    fn warp_values_at_reference_points() {
        let s = ModelSpace::sphere(3).unwrap();
        let (e, e1, e2) = s.warp_eval(FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(e, 0.7071068, epsilon = 1e-7);
        assert_abs_diff_eq!(e1, 0.7071068, epsilon = 1e-7);
        assert_abs_diff_eq!(e2, -0.7071068, epsilon = 1e-7);

        let flat = ModelSpace::new(ModelKind::Euclidean, 3).unwrap();
        assert_eq!(flat.warp_eval(2.0).unwrap(), (2.0, 1.0, 0.0));

        let hyp = ModelSpace::new(ModelKind::Hyperbolic, 3).unwrap();
        assert_eq!(hyp.warp_eval(0.0).unwrap(), (0.0, 1.0, 0.0));
    }

    #[test]
    fn warp_rejects_out_of_range_radius() {
        let s = ModelSpace::sphere(3).unwrap();
        assert!(matches!(s.warp_eval(-0.1), Err(Error::Domain(_))));
        assert!(matches!(s.warp_eval(PI), Err(Error::Domain(_))));
        assert!(matches!(s.warp_eval(f64::NAN), Err(Error::Domain(_))));
        let hyp = ModelSpace::new(ModelKind::Hyperbolic, 3).unwrap();
        assert!(hyp.warp_eval(50.0).is_ok());
    }

    #[test]
    fn dimension_below_three_is_rejected() {
        assert!(ModelSpace::sphere(2).is_err());
    }

    #[test]
    fn space_form_relation_holds_on_samples() {
        for kind in [
            ModelKind::Spherical,
            ModelKind::Hyperbolic,
            ModelKind::Euclidean,
        ] {
            let space = ModelSpace::new(kind, 3).unwrap();
            let upper = if kind == ModelKind::Spherical {
                PI
            } else {
                5.0
            };
            for i in 0..1000 {
                let r = upper * i as f64 / 1000.0;
                let w = space.warp(r).unwrap();
                let residual = w.eta_double_prime + space.kappa() * w.eta;
                assert!(
                    residual.abs() <= 1e-12,
                    "{kind:?} r={r} residual={residual}"
                );
                if r > 0.0 {
                    assert!(w.eta > 0.0);
                }
            }
            assert_eq!(space.warp(0.0).unwrap().eta, 0.0);
        }
    }

    #[test]
    fn static_residual_vanishes_only_on_the_sphere() {
        let s = ModelSpace::sphere(3).unwrap();
        assert_abs_diff_eq!(s.static_residual(0.7).unwrap(), 0.0, epsilon = 1e-15);
        for n in 3..7 {
            let s = ModelSpace::sphere(n).unwrap();
            for i in 1..100 {
                let r = PI * i as f64 / 100.0;
                assert!(s.static_residual(r).unwrap().abs() < 1e-12);
            }
        }
        let flat = ModelSpace::new(ModelKind::Euclidean, 3).unwrap();
        assert_eq!(flat.static_residual(1.3).unwrap(), 3.0);
        let hyp = ModelSpace::new(ModelKind::Hyperbolic, 3).unwrap();
        // 2n cosh r
        assert_abs_diff_eq!(
            hyp.static_residual(0.5).unwrap(),
            6.0 * 0.5f64.cosh(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(hyp.static_residual(0.5).unwrap(), 6.765756, epsilon = 1e-6);
        assert!(matches!(s.static_residual(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_scalar_curvature() {
        let s = ModelSpace::sphere(3).unwrap();
        assert_eq!(s.scalar_curvature(), 6.0);
        assert_eq!(s.ricci_normal(), Some(2.0));
    }
}
