//! The pressure-root curve `b(a)`, its Legendre transform `f(alpha)`, the
//! extreme ratios `alpha_min`/`alpha_max`, and shape checks on the result.

mod endpoints;
mod legendre;

pub use endpoints::{endpoints, Endpoints};
pub use legendre::{legendre_spectrum, legendre_spectrum_with, LegendreOptions};

use serde::Serialize;

use crate::error::{accept_enclosure, Error, Result};
use crate::maps::MarkovMap;
use crate::numerics::Enclosure;
use crate::pressure::ThermoSystem;

/// One evaluation of `b` on the `a`-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BSample {
    pub a: f64,
    pub b: Enclosure,
    /// `1 / b'(a)` where the derivative is stable.
    pub alpha: Option<f64>,
    pub converged: bool,
    /// `b` was set to zero on the parabolic ray.
    pub on_ray: bool,
}

/// One point of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    /// Minimizing `a` and its `b` enclosure.
    pub a: f64,
    pub b: Enclosure,
    pub f: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    /// All `b` evaluations used for the transform, sorted by `a`.
    pub samples: Vec<BSample>,
    /// Spectrum points in the order of the requested grid.
    pub points: Vec<SpectrumPoint>,
    pub alpha_min: Enclosure,
    /// `None` means `alpha_max` is infinite.
    pub alpha_max: Option<Enclosure>,
    pub dim_lambda: Enclosure,
    /// Start of the constant tail `f = dim Λ` when `b` vanishes on a ray.
    pub alpha_0: Option<f64>,
    /// End `a_c` of the ray `b = 0`.
    pub transition: Option<f64>,
    pub converged: bool,
    pub notes: Vec<String>,
}

impl SpectrumCurve {
    /// Legendre transform of the sampled curve at any `alpha`.
    pub fn f_at(&self, alpha: f64) -> Enclosure {
        legendre::transform(&self.samples, alpha).1
    }

    /// Largest generalized second difference of `f` over consecutive points
    /// in increasing `alpha`. Concavity means this is `<= 0`.
    pub fn max_second_difference(&self) -> f64 {
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.alpha, p.f.value)).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        pts.dedup_by(|x, y| x.0 == y.0);
        pts.windows(3)
            .map(|w| {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                let (x2, y2) = w[2];
                let t = (x1 - x0) / (x2 - x0);
                (1.0 - t) * y0 + t * y2 - y1
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.points.len() < 3 || self.max_second_difference() <= tol
    }

    /// `|f(alpha_min + delta_k) - f(alpha_min)|` on a halving sequence of
    /// offsets. Empty when the spectrum is a single point.
    pub fn endpoint_gaps(&self, steps: usize) -> Vec<f64> {
        let lo = self.alpha_min.value;
        let span = self.alpha_max.map_or(1.0, |e| e.value - lo).min(1.0);
        if span <= 0.0 {
            return Vec::new();
        }
        let f0 = self.f_at(lo).value;
        (0..steps)
            .map(|k| {
                let d = 0.05 * span * 0.5f64.powi(k as i32);
                (self.f_at(lo + d).value - f0).abs()
            })
            .collect()
    }

    /// Gaps to `f(alpha_min)` shrink along the halving sequence and the last
    /// one is within twice the bracket width of `f(alpha_min)`.
    pub fn is_continuous_at_endpoint(&self) -> bool {
        let gaps = self.endpoint_gaps(10);
        if gaps.is_empty() {
            return true;
        }
        let width = self.f_at(self.alpha_min.value).width();
        let shrinking = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        shrinking && *gaps.last().unwrap() <= (2.0 * width).max(1e-3)
    }

    /// `f` never decreases along the points with `alpha >= from`.
    pub fn is_nondecreasing_from(&self, from: f64, tol: f64) -> bool {
        let mut pts: Vec<(f64, f64)> =
            self.points.iter().filter(|p| p.alpha >= from).map(|p| (p.alpha, p.f.value)).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        pts.windows(2).all(|w| w[1].1 >= w[0].1 - tol)
    }
}

/// Enclosure of `b(a)`; see [`ThermoSystem::b_of_a`].
pub fn b_of_a(sys: &ThermoSystem, a: f64, tol: f64) -> Result<Enclosure> {
    sys.b_of_a(a, tol)
}

fn b_value(sys: &ThermoSystem, a: f64) -> Result<f64> {
    Ok(accept_enclosure(sys.b_of_a(a, 1e-12))?.0.value)
}

/// Central-difference quotient of `b` at `a` with step `h`.
pub fn b_derivative(sys: &ThermoSystem, a: f64, h: f64) -> Result<f64> {
    Ok((b_value(sys, a + h)? - b_value(sys, a - h)?) / (2.0 * h))
}

/// `alpha(a) = 1 / b'(a)`. The step starts at `h` and is halved until two
/// successive quotients agree to a relative `1e-6`.
pub fn alpha_of_a(sys: &ThermoSystem, a: f64, h: f64) -> Result<f64> {
    let mut h = h;
    let mut d = b_derivative(sys, a, h)?;
    for _ in 0..8 {
        let d2 = b_derivative(sys, a, 0.5 * h)?;
        if (d - d2).abs() <= 1e-6 * d2.abs().max(1.0) {
            if d2 <= 0.0 {
                return Err(Error::DerivativeUnstable { a });
            }
            return Ok(1.0 / d2);
        }
        h *= 0.5;
        d = d2;
    }
    Err(Error::DerivativeUnstable { a })
}

/// `dim X_∞`, which equals `dim Λ` when there is a parabolic orbit.
pub fn dim_x_infinity(map: &MarkovMap, tol: f64) -> Result<Enclosure> {
    if !map.is_parabolic() {
        return Err(Error::NoParabolicOrbit);
    }
    crate::pressure::bowen_root(map, tol)
}
