//! Equiangular colatitude × uniform longitude grid on `S²`.
//!
//! Nodes sit at `θ_j = (j + 1/2)π / n_θ` (no pole nodes) and
//! `φ_k = 2πk / n_φ`. Longitude derivatives are spectral; colatitude
//! derivatives are sixth-order centered differences continued across the
//! poles with `f(-θ, φ) = f(θ, φ + π)`.

use crate::error::{Error, Result};
use crate::quadrature::{fejer_weights, weighted_sum};
use rayon::prelude::*;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub const MIN_N_THETA: usize = 16;
pub const MIN_N_PHI: usize = 32;

#[derive(Clone)]
pub struct SphericalGrid {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
    quad_weights: Vec<f64>,
    directions: Vec<[f64; 3]>,
    filter_cutoff: Vec<usize>,
    derivative_cutoff: Vec<usize>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for SphericalGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphericalGrid")
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .finish()
    }
}

impl PartialEq for SphericalGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_theta == other.n_theta && self.n_phi == other.n_phi
    }
}

impl SphericalGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < MIN_N_THETA || n_phi < MIN_N_PHI || !n_phi.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid {n_theta}x{n_phi} too small or odd longitude count \
                 (need n_theta >= {MIN_N_THETA}, even n_phi >= {MIN_N_PHI})"
            )));
        }
        let theta: Vec<f64> = (0..n_theta)
            .map(|j| (j as f64 + 0.5) * PI / n_theta as f64)
            .collect();
        let phi: Vec<f64> = (0..n_phi)
            .map(|k| 2.0 * PI * k as f64 / n_phi as f64)
            .collect();
        let sin_theta: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let cos_theta: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let fejer = fejer_weights(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;

        let mut quad_weights = Vec::with_capacity(n_theta * n_phi);
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        for j in 0..n_theta {
            for &p in &phi {
                quad_weights.push(fejer[j] * dphi);
                let (sp, cp) = p.sin_cos();
                directions.push([sin_theta[j] * cp, sin_theta[j] * sp, cos_theta[j]]);
            }
        }
        let half = n_phi / 2;
        let filter_cutoff = sin_theta
            .iter()
            .map(|s| ((half as f64 * s).floor() as usize).clamp(1, half))
            .collect();

        // Longitude content of a smooth field on a row decays like sin^m θ,
        // so modes far above n_φ sin θ hold only transform roundoff.
        let derivative_cutoff = sin_theta
            .iter()
            .map(|s| ((n_phi as f64 * s).ceil() as usize).clamp(16, half))
            .collect();

        let mut planner = RealFftPlanner::new();
        Ok(Self {
            n_theta,
            n_phi,
            theta,
            phi,
            sin_theta,
            cos_theta,
            quad_weights,
            directions,
            filter_cutoff,
            derivative_cutoff,
            forward: planner.plan_fft_forward(n_phi),
            inverse: planner.plan_fft_inverse(n_phi),
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_phi + k
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    /// Colatitude spacing `π / n_θ`.
    pub fn spacing(&self) -> f64 {
        PI / self.n_theta as f64
    }

    /// Per-node weights for `∫_{S²} f dθ_h`; they sum to `4π`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Unit vector in `R³` of every node.
    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    /// `∫_{S²} f dθ_h` with pairwise summation.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        weighted_sum(&self.quad_weights, f)
    }

    /// Value at extended colatitude index `j` (any integer) and column `k`,
    /// using the across-pole continuation.
    #[inline]
    fn extended(&self, f: &[f64], j: isize, k: usize) -> f64 {
        let n = self.n_theta as isize;
        let jm = j.rem_euclid(2 * n);
        if jm < n {
            f[jm as usize * self.n_phi + k]
        } else {
            let row = (2 * n - 1 - jm) as usize;
            f[row * self.n_phi + (k + self.n_phi / 2) % self.n_phi]
        }
    }

    /// Rows `j-3..=j+3` of `f` in extended colatitude, continued across the
    /// poles: rows past a pole are read from `turned`, the field rotated by
    /// half a turn in longitude.
    #[inline]
    fn stencil_rows<'a>(&self, f: &'a [f64], turned: &'a [f64], j: usize) -> [&'a [f64]; 7] {
        let n = self.n_theta as isize;
        let m = self.n_phi;
        std::array::from_fn(|o| {
            let jm = (j as isize + o as isize - 3).rem_euclid(2 * n);
            if jm < n {
                &f[jm as usize * m..(jm as usize + 1) * m]
            } else {
                let row = (2 * n - 1 - jm) as usize;
                &turned[row * m..(row + 1) * m]
            }
        })
    }

    fn half_turn(&self, f: &[f64]) -> Vec<f64> {
        let half = self.n_phi / 2;
        let mut out = f.to_vec();
        for row in out.chunks_mut(self.n_phi) {
            row.rotate_left(half);
        }
        out
    }

    /// First and second colatitude derivatives, sixth order.
    pub fn theta_derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(f.len(), self.len());
        let h = self.spacing();
        let turned = self.half_turn(f);
        let mut d1 = vec![0.0; f.len()];
        let mut d2 = vec![0.0; f.len()];
        d1.par_chunks_mut(self.n_phi)
            .zip(d2.par_chunks_mut(self.n_phi))
            .enumerate()
            .for_each(|(j, (r1, r2))| {
                let rows = self.stencil_rows(f, &turned, j);
                for k in 0..self.n_phi {
                    let s = rows.map(|r| r[k]);
                    r1[k] = first_difference(&s, h);
                    r2[k] = second_difference(&s, h);
                }
            });
        (d1, d2)
    }

    /// First colatitude derivative only.
    pub fn theta_derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len());
        let h = self.spacing();
        let turned = self.half_turn(f);
        let mut d1 = vec![0.0; f.len()];
        d1.par_chunks_mut(self.n_phi)
            .enumerate()
            .for_each(|(j, r1)| {
                let rows = self.stencil_rows(f, &turned, j);
                for (k, out) in r1.iter_mut().enumerate() {
                    *out = first_difference(&rows.map(|r| r[k]), h);
                }
            });
        d1
    }

    /// First and second longitude derivatives by Fourier differentiation,
    /// truncated above `max(16, n_φ sin θ_j)` on each row.
    pub fn phi_derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(f.len(), self.len());
        let n_phi = self.n_phi;
        let nyquist = n_phi / 2;
        let scale = 1.0 / n_phi as f64;
        let mut d1 = vec![0.0; f.len()];
        let mut d2 = vec![0.0; f.len()];
        d1.par_chunks_mut(n_phi)
            .zip(d2.par_chunks_mut(n_phi))
            .zip(f.par_chunks(n_phi))
            .enumerate()
            .for_each(|(j, ((r1, r2), row))| {
                let cutoff = self.derivative_cutoff[j];
                // The mean carries no derivative; removing it keeps transform
                // roundoff proportional to the row's variation, which matters
                // once it is divided by sin²θ near the poles.
                let mean = row.iter().sum::<f64>() * scale;
                let mut input: Vec<f64> = row.iter().map(|x| x - mean).collect();
                let mut spec = self.forward.make_output_vec();
                self.forward
                    .process(&mut input, &mut spec)
                    .expect("buffer sizes match the plan");
                let mut s1 = spec.clone();
                for (m, (a, b)) in s1.iter_mut().zip(spec.iter_mut()).enumerate() {
                    let km = m as f64;
                    // odd derivative of the Nyquist mode is not representable
                    *a = if m > cutoff || m == nyquist {
                        Complex::new(0.0, 0.0)
                    } else {
                        *a * Complex::new(0.0, km)
                    };
                    *b = if m > cutoff {
                        Complex::new(0.0, 0.0)
                    } else {
                        *b * (-km * km)
                    };
                }
                self.inverse
                    .process(&mut s1, r1)
                    .expect("buffer sizes match the plan");
                self.inverse
                    .process(&mut spec, r2)
                    .expect("buffer sizes match the plan");
                for x in r1.iter_mut().chain(r2.iter_mut()) {
                    *x *= scale;
                }
            });
        (d1, d2)
    }

    /// Removes longitude modes above `⌊(n_φ/2) sin θ_j⌋` (at least 1) on
    /// every row, in place.
    ///
    /// Applied to flow tendencies so that the effective longitude spacing
    /// near the poles matches the colatitude spacing.
    pub fn polar_filter(&self, f: &mut [f64]) {
        assert_eq!(f.len(), self.len());
        let n_phi = self.n_phi;
        let half = n_phi / 2;
        let scale = 1.0 / n_phi as f64;
        f.par_chunks_mut(n_phi).enumerate().for_each(|(j, row)| {
            let cutoff = self.filter_cutoff[j];
            if cutoff >= half {
                return;
            }
            let mut input = row.to_vec();
            let mut spec = self.forward.make_output_vec();
            self.forward
                .process(&mut input, &mut spec)
                .expect("buffer sizes match the plan");
            for c in spec.iter_mut().skip(cutoff + 1) {
                *c = Complex::new(0.0, 0.0);
            }
            self.inverse
                .process(&mut spec, row)
                .expect("buffer sizes match the plan");
            for x in row.iter_mut() {
                *x *= scale;
            }
        });
    }

    /// Sixth-order tensor Lagrange interpolation of a nodal field at an
    /// arbitrary point `(θ, φ)` of the sphere.
    pub fn interpolate(&self, f: &[f64], theta: f64, phi: f64) -> f64 {
        let h = self.spacing();
        let dphi = 2.0 * PI / self.n_phi as f64;
        let s_theta = theta / h - 0.5;
        let base_theta = s_theta.floor();
        let w_theta = lagrange6(s_theta - base_theta);
        let s_phi = phi.rem_euclid(2.0 * PI) / dphi;
        let base_phi = s_phi.floor();
        let w_phi = lagrange6(s_phi - base_phi);
        let bt = base_theta as isize;
        let bp = base_phi as isize;
        let n_phi = self.n_phi as isize;
        let mut acc = 0.0;
        for (a, wa) in w_theta.iter().enumerate() {
            let j = bt + a as isize - 2;
            let mut row = 0.0;
            for (b, wb) in w_phi.iter().enumerate() {
                let k = (bp + b as isize - 2).rem_euclid(n_phi) as usize;
                row += wb * self.extended(f, j, k);
            }
            acc += wa * row;
        }
        acc
    }
}

#[inline]
fn first_difference(s: &[f64; 7], h: f64) -> f64 {
    (-s[0] + 9.0 * s[1] - 45.0 * s[2] + 45.0 * s[4] - 9.0 * s[5] + s[6]) / (60.0 * h)
}

#[inline]
fn second_difference(s: &[f64; 7], h: f64) -> f64 {
    (2.0 * s[0] - 27.0 * s[1] + 270.0 * s[2] - 490.0 * s[3] + 270.0 * s[4] - 27.0 * s[5]
        + 2.0 * s[6])
        / (180.0 * h * h)
}

/// Lagrange weights for nodes at offsets `-2..=3` evaluated at `t ∈ [0, 1)`.
fn lagrange6(t: f64) -> [f64; 6] {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let mut w = [0.0; 6];
    for i in 0..6 {
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..6 {
            if m != i {
                num *= t - nodes[m];
                den *= nodes[i] - nodes[m];
            }
        }
        w[i] = num / den;
    }
    w
}

/// Spherical angles `(θ, φ)` of a unit vector in `R³`.
pub fn angles_of(direction: &[f64; 3]) -> (f64, f64) {
    let [x, y, z] = *direction;
    let rho = x.hypot(y);
    (rho.atan2(z), y.atan2(x))
}
