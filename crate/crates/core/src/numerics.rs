//! Small numerical kernels: enclosures, compensated log-sum-exp
//! accumulation, bracketed root finding and golden-section search.

use serde::{Deserialize, Serialize};

/// A point estimate together with a lower and upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub value: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn new(lo: f64, value: f64, hi: f64) -> Self {
        Enclosure { lo, value, hi }
    }

    pub fn exact(v: f64) -> Self {
        Enclosure { lo: v, value: v, hi: v }
    }

    /// Builds an enclosure whose value is clamped into `[lo, hi]`.
    pub fn clamped(lo: f64, value: f64, hi: f64) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        Enclosure { lo, value: value.clamp(lo, hi), hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the enclosure (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        if c >= 0.0 {
            Enclosure::new(c * self.lo, c * self.value, c * self.hi)
        } else {
            Enclosure::new(c * self.hi, c * self.value, c * self.lo)
        }
    }

    pub fn add(&self, other: &Enclosure) -> Self {
        Enclosure::new(self.lo + other.lo, self.value + other.value, self.hi + other.hi)
    }

    pub fn shift(&self, c: f64) -> Self {
        Enclosure::new(self.lo + c, self.value + c, self.hi + c)
    }

    pub fn hull(&self, other: &Enclosure) -> Self {
        Enclosure::new(self.lo.min(other.lo), self.value, self.hi.max(other.hi))
    }
}

/// Streaming `log(sum(exp(x_i)))` with a running maximum shift and Neumaier
/// compensation of the scaled sum.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0 }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn add_scaled(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum *= scale;
            self.comp *= scale;
            self.max = x;
        }
        self.add_scaled((x - self.max).exp());
    }

    /// Folds another accumulator into this one.
    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            let scale = (self.max - other.max).exp();
            self.sum *= scale;
            self.comp *= scale;
            self.max = other.max;
        }
        let scale = (other.max - self.max).exp();
        self.add_scaled(other.sum * scale);
        self.add_scaled(other.comp * scale);
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + (self.sum + self.comp).ln()
    }
}

/// Log-sum-exp of a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &x in xs {
        acc.push(x);
    }
    acc.value()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in xs {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Finds `[lo, hi]` with `f(lo) > 0 >= f(hi)` for a nonincreasing `f`,
/// expanding geometrically around `start`.
pub fn bracket_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    step: f64,
    limit: f64,
) -> Option<(f64, f64)> {
    let f0 = f(start);
    if f0.is_nan() {
        return None;
    }
    let mut width = step;
    if f0 > 0.0 {
        let mut lo = start;
        loop {
            let hi = start + width;
            if hi - start > limit {
                return None;
            }
            let fh = f(hi);
            if fh <= 0.0 {
                return Some((lo, hi));
            }
            lo = hi;
            width *= 2.0;
        }
    } else {
        let mut hi = start;
        loop {
            let lo = start - width;
            if start - lo > limit {
                return None;
            }
            let fl = f(lo);
            if fl > 0.0 {
                return Some((lo, hi));
            }
            hi = lo;
            width *= 2.0;
        }
    }
}

/// Root of a continuous function on `[lo, hi]` with a sign change, by the
/// Illinois variant of regula falsi with a bisection safeguard. Returns the
/// final bracket midpoint once the bracket is narrower than `tol`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        return if flo.abs() < fhi.abs() { lo } else { hi };
    }
    let mut side = 0i8;
    for iter in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mut x = if iter % 4 == 3 {
            0.5 * (lo + hi)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !x.is_finite() || x <= lo.min(hi) || x >= lo.max(hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fhi.signum() {
            hi = x;
            fhi = fx;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

/// Plain bisection on `[lo, hi]` for the boundary of the set where `pred`
/// holds, assuming `pred(lo)` and `!pred(hi)`. Returns the last point known to
/// satisfy `pred` and the first known not to.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(
    mut pred: P,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Ordinary least squares fit `y = intercept + slope * x`; returns
/// `(slope, intercept, max |residual|)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}
