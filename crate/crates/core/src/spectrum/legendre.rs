use crate::error::{accept_enclosure, Error, Result};
use crate::exec::map_indexed;
use crate::numerics::{golden_section_min, Enclosure};
use crate::pressure::ThermoSystem;

use super::{alpha_of_a, endpoints, BSample, SpectrumCurve, SpectrumPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreOptions {
    /// Number of uniform samples on the `a`-range.
    pub grid_points: usize,
    /// Word length for the endpoint cycle search; defaults to the system
    /// level capped at 10.
    pub endpoint_level: Option<usize>,
    /// Compute `alpha(a)` at the converged grid samples.
    pub derivatives: bool,
    /// Target width in `a` of the golden-section refinement.
    pub refine_tol: f64,
    /// How far the range may grow past each end, in multiples of its width.
    pub max_extension: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        LegendreOptions { grid_points: 33, endpoint_level: None, derivatives: true, refine_tol: 1e-7, max_extension: 64.0 }
    }
}

/// Index of the minimizing sample and the enclosure of
/// `min_a (b(a) alpha - a)` over the samples.
pub(super) fn transform(samples: &[BSample], alpha: f64) -> (usize, Enclosure) {
    let mut best = (usize::MAX, f64::INFINITY);
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    for (k, s) in samples.iter().enumerate() {
        let v = s.b.value * alpha - s.a;
        if v < best.1 {
            best = (k, v);
        }
        let (x, y) = (s.b.lo * alpha - s.a, s.b.hi * alpha - s.a);
        lo = lo.min(x.min(y));
        hi = hi.min(x.max(y));
    }
    (best.0, Enclosure::clamped(lo, best.1, hi))
}

/// Where `b` vanishes identically: `a <= a_c`, and certainly for
/// `a <= certain`.
#[derive(Debug, Clone, Copy)]
struct Ray {
    a_c: f64,
    certain: f64,
}

fn evaluate(sys: &ThermoSystem, a: f64, tol: f64, ray: Option<Ray>) -> Result<BSample> {
    if let Some(r) = ray {
        if a <= r.certain {
            return Ok(BSample { a, b: Enclosure::exact(0.0), alpha: None, converged: true, on_ray: true });
        }
    }
    let (mut b, mut converged) = accept_enclosure(sys.b_of_a(a, tol))?;
    let mut on_ray = false;
    if let Some(r) = ray {
        if a <= r.a_c {
            b = Enclosure::new(0.0, 0.0, b.hi.max(0.0));
            converged = b.width() <= tol;
            on_ray = true;
        }
    }
    Ok(BSample { a, b, alpha: None, converged, on_ray })
}

fn sort_samples(samples: &mut Vec<BSample>) {
    samples.sort_by(|x, y| x.a.total_cmp(&y.a));
    samples.dedup_by(|x, y| x.a == y.a);
}

/// Refines the minimizer of `b(a) alpha - a` between the neighbours of the
/// best sample.
fn refine(sys: &ThermoSystem, samples: &[BSample], alpha: f64, tol: f64, ray: Option<Ray>, opts: &LegendreOptions) -> Result<Vec<BSample>> {
    let (k, _) = transform(samples, alpha);
    if samples[k].on_ray {
        return Ok(Vec::new());
    }
    let lo = samples[k.saturating_sub(1)].a;
    let hi = samples[(k + 1).min(samples.len() - 1)].a;
    let mut found = Vec::new();
    let mut failure = None;
    golden_section_min(
        |a| match evaluate(sys, a, tol, ray) {
            Ok(s) => {
                found.push(s);
                s.b.value * alpha - a
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        opts.refine_tol,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Grows the sample range on one side while the minimizer for `alpha` sits
/// at that end. Returns `false` if the extension limit was hit.
fn extend(
    sys: &ThermoSystem,
    samples: &mut Vec<BSample>,
    alpha: f64,
    right: bool,
    range: (f64, f64),
    tol: f64,
    ray: Option<Ray>,
    opts: &LegendreOptions,
) -> Result<bool> {
    let width = range.1 - range.0;
    let step = width / (opts.grid_points - 1) as f64;
    loop {
        let (k, _) = transform(samples, alpha);
        let n = samples.len();
        let (edge, inner) = if right { (n - 1, n.saturating_sub(2)) } else { (0, 1.min(n - 1)) };
        let value = |s: &BSample| s.b.value * alpha - s.a;
        if k != edge || value(&samples[edge]) >= value(&samples[inner]) - 1e-12 {
            return Ok(true);
        }
        let a = samples[edge].a;
        let dist = if right { a - range.1 } else { range.0 - a };
        if dist >= opts.max_extension * width {
            return Ok(false);
        }
        let next = if right { a + step.max(dist) } else { a - step.max(dist) };
        samples.push(evaluate(sys, next, tol, ray)?);
        sort_samples(samples);
    }
}

/// [`legendre_spectrum_with`] under default options.
pub fn legendre_spectrum(sys: &ThermoSystem, alpha_grid: &[f64], a_range: (f64, f64), tol: f64) -> Result<SpectrumCurve> {
    legendre_spectrum_with(sys, alpha_grid, a_range, tol, &LegendreOptions::default())
}

/// `f(alpha) = inf_a { b(a) alpha - a }` on `alpha_grid`, with `b` sampled
/// on `a_range` and refined near each minimizer. Values of `alpha` outside
/// `[alpha_min, alpha_max]` are skipped with a note.
pub fn legendre_spectrum_with(
    sys: &ThermoSystem,
    alpha_grid: &[f64],
    a_range: (f64, f64),
    tol: f64,
    opts: &LegendreOptions,
) -> Result<SpectrumCurve> {
    let (a_lo, a_hi) = a_range;
    if !(a_lo.is_finite() && a_hi.is_finite() && a_lo < a_hi) {
        return Err(Error::InvalidInput(format!("a-range [{a_lo}, {a_hi}] must be finite and nonempty")));
    }
    if opts.grid_points < 3 {
        return Err(Error::InvalidInput("at least 3 grid points are required".into()));
    }
    if alpha_grid.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(Error::InvalidInput("alpha values must be finite and positive".into()));
    }
    let exec = sys.execution();
    let mut notes = Vec::new();

    let level = opts.endpoint_level.unwrap_or(sys.level().min(10)).max(2);
    let ends = endpoints(sys, level)?;
    let (dim_lambda, dim_converged) = accept_enclosure(sys.bowen_root(tol))?;
    let ray = sys.map().is_parabolic().then(|| Ray { a_c: -dim_lambda.value, certain: -dim_lambda.hi });

    let step = (a_hi - a_lo) / (opts.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..opts.grid_points).map(|k| a_lo + k as f64 * step).collect();
    let mut samples = map_indexed(exec, grid.len(), |k| evaluate(sys, grid[k], tol, ray))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if opts.derivatives {
        let alphas = map_indexed(exec, samples.len(), |k| {
            let s = &samples[k];
            (s.converged && !s.on_ray && sys.uses_transfer(crate::pressure::Combo::psi_a(s.a, 1.0)))
                .then(|| alpha_of_a(sys, s.a, 1e-4).ok())
                .flatten()
        });
        for (s, al) in samples.iter_mut().zip(alphas) {
            s.alpha = al;
        }
    }
    if let Some(r) = ray {
        samples.push(BSample { a: r.a_c, b: Enclosure::exact(0.0), alpha: None, converged: true, on_ray: true });
    }
    sort_samples(&mut samples);

    let upper = ends.alpha_max.map_or(f64::INFINITY, |e| e.hi);
    let inside = |al: f64| al >= ends.alpha_min.lo - 1e-9 && al <= upper + 1e-9;
    let wanted: Vec<f64> = alpha_grid.iter().cloned().filter(|&al| inside(al)).collect();
    for &al in alpha_grid.iter().filter(|&&al| !inside(al)) {
        notes.push(format!("alpha = {al} lies outside [alpha_min, alpha_max] and was skipped"));
    }

    if !wanted.is_empty() {
        let smallest = wanted.iter().cloned().fold(f64::INFINITY, f64::min);
        let largest = wanted.iter().cloned().fold(0.0, f64::max);
        for (alpha, right) in [(smallest, true), (largest, false)] {
            if !extend(sys, &mut samples, alpha, right, a_range, tol, ray, opts)? {
                notes.push(format!("minimizer for alpha = {alpha} not reached within the extended a-range"));
            }
        }
        let extra = map_indexed(exec, wanted.len(), |k| refine(sys, &samples, wanted[k], tol, ray, opts));
        for e in extra {
            samples.extend(e?);
        }
        sort_samples(&mut samples);
    }

    let points: Vec<SpectrumPoint> = wanted
        .iter()
        .map(|&alpha| {
            let (k, f) = transform(&samples, alpha);
            SpectrumPoint { alpha, a: samples[k].a, b: samples[k].b, f }
        })
        .collect();

    let alpha_0 = ray.and_then(|r| {
        let slope = samples
            .iter()
            .filter(|s| s.a > r.a_c + 1e-12)
            .map(|s| s.b.value / (s.a - r.a_c))
            .fold(f64::INFINITY, f64::min);
        (slope.is_finite() && slope > 1e-3).then(|| 1.0 / slope)
    });

    let unconverged = samples.iter().filter(|s| !s.converged).count();
    if unconverged > 0 {
        notes.push(format!("{unconverged} of {} b-samples did not reach tolerance {tol:e}", samples.len()));
    }
    if !dim_converged {
        notes.push(format!("dim Λ enclosure wider than {tol:e}"));
    }
    Ok(SpectrumCurve {
        converged: unconverged == 0 && dim_converged,
        samples,
        points,
        alpha_min: ends.alpha_min,
        alpha_max: ends.alpha_max,
        dim_lambda,
        alpha_0,
        transition: ray.map(|r| r.a_c),
        notes,
    })
}
