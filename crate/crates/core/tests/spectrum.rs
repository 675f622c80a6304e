use proptest::prelude::*;
use spectra_core::maps::{build_map, presets, MapSpec};
use spectra_core::pressure::ThermoSystem;
use spectra_core::spectrum::{alpha_of_a, b_derivative, b_of_a, dim_x_infinity, endpoints, legendre_spectrum};
use spectra_core::symbolic::Potential;
use spectra_core::Error;

const LN2: f64 = std::f64::consts::LN_2;

fn system(spec: MapSpec, phi: Potential) -> ThermoSystem {
    ThermoSystem::new(build_map(&spec).unwrap(), phi).unwrap()
}

fn bernoulli() -> ThermoSystem {
    system(presets::doubling(), Potential::bernoulli(&[0.25, 0.75]))
}

fn lebesgue() -> ThermoSystem {
    system(presets::doubling(), Potential::constant(2, -LN2))
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let up = g(hi) > g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == up {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn entropy2(t: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    (h(t) + h(1.0 - t)) / LN2
}

/// Besicovitch–Eggleston spectrum by scanning `t` on a fine grid.
fn besicovitch(alpha: f64) -> f64 {
    let at = |t: f64| (-t * 0.25f64.ln() - (1.0 - t) * 0.75f64.ln()) / LN2;
    let alpha = alpha.clamp(at(0.0), at(1.0));
    let n = 200_000;
    for k in 0..n {
        let (t0, t1) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
        let (a0, a1) = (at(t0), at(t1));
        if (a0 - alpha) * (a1 - alpha) <= 0.0 {
            let s = if a1 == a0 { 0.0 } else { (alpha - a0) / (a1 - a0) };
            let t = t0 + s * (t1 - t0);
            return entropy2(t);
        }
    }
    panic!("alpha {alpha} outside the spectrum");
}

#[test]
fn b_of_a_examples() {
    let sys = lebesgue();
    for a in [-2.0, -0.5, 0.0, 1.0, 3.0] {
        assert!((b_of_a(&sys, a, 1e-12).unwrap().value - (1.0 + a)).abs() < 1e-12);
    }
    let sys = bernoulli();
    assert!((b_of_a(&sys, 0.0, 1e-12).unwrap().value - 1.0).abs() < 1e-12);
    let oracle = bisect(|b| 0.25f64.powf(b) + 0.75f64.powf(b) - 0.5, 0.0, 10.0);
    let b = b_of_a(&sys, 1.0, 1e-12).unwrap();
    assert!((b.value - oracle).abs() < 1e-11, "{} vs {oracle}", b.value);
    assert!((oracle - 2.60).abs() < 0.01);
}

#[test]
fn alpha_of_a_examples() {
    assert!((alpha_of_a(&lebesgue(), 0.7, 1e-3).unwrap() - 1.0).abs() < 1e-6);
    let sys = bernoulli();
    let h = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln()) / LN2;
    assert!((alpha_of_a(&sys, 0.0, 1e-3).unwrap() - h).abs() < 1e-6);
    let uniform = -(0.25f64.ln() + 0.75f64.ln()) / (2.0 * LN2);
    assert!((alpha_of_a(&sys, -1.0, 1e-3).unwrap() - uniform).abs() < 1e-6);
    assert!((uniform - 1.2075).abs() < 1e-4);
}

#[test]
fn degenerate_spectrum() {
    let curve = legendre_spectrum(&lebesgue(), &[0.5, 1.0, 1.5], (-3.0, 3.0), 1e-12).unwrap();
    assert_eq!(curve.alpha_min.value, 1.0);
    assert_eq!(curve.alpha_max.unwrap().value, 1.0);
    assert_eq!(curve.points.len(), 1);
    assert!((curve.points[0].f.value - 1.0).abs() < 1e-12);
    assert_eq!(curve.notes.iter().filter(|n| n.contains("skipped")).count(), 2);
}

#[test]
fn bernoulli_spectrum_matches_closed_form() {
    let uniform = -(0.25f64.ln() + 0.75f64.ln()) / (2.0 * LN2);
    let h = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln()) / LN2;
    let amin = (4.0f64 / 3.0).ln() / LN2;
    let alphas = [amin, 0.6, h, 1.0, uniform, 1.6, 1.9, 2.0];
    let curve = legendre_spectrum(&bernoulli(), &alphas, (-6.0, 6.0), 1e-10).unwrap();
    assert_eq!(curve.points.len(), alphas.len());
    for p in &curve.points {
        let f = besicovitch(p.alpha);
        assert!((p.f.value - f).abs() < 1e-6, "alpha {}: {} vs {f}", p.alpha, p.f.value);
    }
    assert!((curve.f_at(uniform).value - 1.0).abs() < 1e-9);
    assert!((curve.f_at(h).value - h).abs() < 1e-6);
    assert!(curve.is_concave(1e-6));
    assert!(curve.is_continuous_at_endpoint());
}

/// Extreme ratios `-S phi / S psi` over all periodic words of length <= 3.
fn brute_cycle_ratios(p: [f64; 2]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for len in 1..=3 {
        for code in 0..(1 << len) {
            let ones = (0..len).filter(|k| code >> k & 1 == 1).count();
            let num = -(ones as f64 * p[1].ln() + (len - ones) as f64 * p[0].ln());
            let r = num / (len as f64 * LN2);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

#[test]
fn endpoints_match_cycle_enumeration() {
    let (lo, hi) = brute_cycle_ratios([0.25, 0.75]);
    let e = endpoints(&bernoulli(), 3).unwrap();
    assert!((e.alpha_min.value - lo).abs() < 1e-6);
    assert!((e.alpha_max.unwrap().value - hi).abs() < 1e-6);
    assert!((lo - 0.4150).abs() < 1e-4 && (hi - 2.0).abs() < 1e-12);

    let e = endpoints(&lebesgue(), 3).unwrap();
    assert_eq!((e.alpha_min.value, e.alpha_max.unwrap().value), (1.0, 1.0));

    let farey = system(presets::farey(), Potential::constant(2, -LN2));
    let e = endpoints(&farey, 6).unwrap();
    assert!(e.alpha_max.is_none());
    assert!(e.alpha_min.value.is_finite());
}

#[test]
fn dimension_of_the_infinite_level_set() {
    for spec in [presets::manneville_pomeau(0.5), presets::farey()] {
        let m = build_map(&spec).unwrap();
        let d = match dim_x_infinity(&m, 1e-2) {
            Ok(e) => e,
            Err(e) => e.enclosure().unwrap(),
        };
        assert!((d.value - 1.0).abs() <= 1e-2, "{d:?}");
    }
    let d = build_map(&presets::doubling()).unwrap();
    assert!(matches!(dim_x_infinity(&d, 1e-6), Err(Error::NoParabolicOrbit)));
}

#[test]
fn sampled_b_is_nondecreasing_and_convex() {
    for sys in [bernoulli(), system(presets::slopes_2_4(), Potential::constant(2, -LN2))] {
        let curve = legendre_spectrum(&sys, &[1.0], (-4.0, 4.0), 1e-10).unwrap();
        let s = &curve.samples;
        assert!(s.windows(2).all(|w| w[1].b.value >= w[0].b.value - 1e-10));
        for w in s.windows(3) {
            let t = (w[1].a - w[0].a) / (w[2].a - w[0].a);
            let chord = (1.0 - t) * w[0].b.value + t * w[2].b.value;
            assert!(w[1].b.value <= chord + 1e-9);
        }
    }
}

#[test]
fn envelope_identity_and_upper_bound() {
    let sys = bernoulli();
    let curve = legendre_spectrum(&sys, &[1.0], (-5.0, 5.0), 1e-10).unwrap();
    let amin = curve.alpha_min.value;
    for s in curve.samples.iter().filter(|s| s.alpha.is_some()) {
        let alpha = s.alpha.unwrap();
        let f = curve.f_at(alpha);
        let direct = s.b.value * alpha - s.a;
        assert!((f.value - direct).abs() <= f.width() + s.b.width() * alpha + 1e-6, "a = {}", s.a);
        if s.b.value > 0.0 {
            assert!(alpha <= amin + 1.0 / s.b.value + 1e-9);
        }
        assert!(f.value <= curve.dim_lambda.hi + 1e-9);
    }
}

#[test]
fn legendre_identity_on_hyperbolic_examples() {
    let examples = [
        bernoulli(),
        system(presets::slopes_2_4(), Potential::constant(2, -LN2)),
        system(presets::golden_mean(), Potential::constant(2, -0.4812118250596034)),
    ];
    for sys in &examples {
        for a in [-2.0, -1.0, 0.0, 0.5, 1.5] {
            let alpha = alpha_of_a(sys, a, 1e-3).unwrap();
            let d1 = b_derivative(sys, a, 1e-3).unwrap();
            let d2 = b_derivative(sys, a, 3e-4).unwrap();
            assert!((alpha * d1 - 1.0).abs() < 1e-3 && (alpha * d2 - 1.0).abs() < 1e-3, "a = {a}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn alpha_at_zero_is_entropy_over_lyapunov(p in 0.05f64..0.95) {
        let sys = system(presets::doubling(), Potential::bernoulli(&[p, 1.0 - p]));
        prop_assert!((b_of_a(&sys, 0.0, 1e-12).unwrap().value - 1.0).abs() < 1e-12);
        let h = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / LN2;
        prop_assert!((alpha_of_a(&sys, 0.0, 1e-3).unwrap() - h).abs() < 1e-6);
    }
}
