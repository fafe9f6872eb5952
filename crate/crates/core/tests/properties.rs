use lundberg_core::bounds::{dichotomous_expected_max, expected_max_bounds, min_tail_bounds};
use lundberg_core::embedding::AtomicDistribution;
use lundberg_core::excess::{d_minus, d_plus};
use lundberg_core::montecarlo::Moments;
use lundberg_core::quadrature::{integrate_to_infinity, integrate_with_breakpoints};
use lundberg_core::{adjustment_coefficient, Distribution, DistributionSpec};
use proptest::prelude::*;

fn gaussian() -> impl Strategy<Value = DistributionSpec> {
    (0.1..3.0f64, 0.2..3.0f64).prop_map(|(mu, sigma)| DistributionSpec::Gaussian { mu, sigma })
}

fn double_exponential() -> impl Strategy<Value = DistributionSpec> {
    (0.2..3.0f64, 0.2..3.0f64, 0.02..0.98f64).prop_map(|(theta, mu, u)| {
        let p0 = theta / (mu + theta);
        let p = p0 + (0.99 - p0) * u.max(0.05);
        DistributionSpec::DoubleExponential { p, theta, mu }
    })
}

fn shifted_exponential() -> impl Strategy<Value = DistributionSpec> {
    (0.2..3.0f64, 0.05..0.95f64).prop_map(|(theta, u)| DistributionSpec::ShiftedExponential { theta, delta: u / theta })
}

fn two_point() -> impl Strategy<Value = DistributionSpec> {
    (-3.0..-0.1f64, 0.1..3.0f64, 0.05..0.95f64).prop_map(|(x_minus, x_plus, u)| {
        let p0 = -x_minus / (x_plus - x_minus);
        DistributionSpec::TwoPoint { x_minus, x_plus, p_plus: p0 + (0.995 - p0) * u }
    })
}

fn finite_support() -> impl Strategy<Value = DistributionSpec> {
    prop::collection::vec((-3.0..3.0f64, 0.05..1.0f64), 2..7)
        .prop_map(|raw| {
            let mut pts = raw;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
            let total: f64 = pts.iter().map(|p| p.1).sum();
            let mut atoms: Vec<(f64, f64)> = pts.iter().map(|&(x, w)| (x, w / total)).collect();
            // Force a negative atom and a positive mean.
            atoms[0].0 = atoms[0].0.min(-0.2);
            let mean: f64 = atoms.iter().map(|(x, p)| x * p).sum();
            let last = atoms.len() - 1;
            if mean <= 0.05 {
                atoms[last].0 += (0.1 - mean) / atoms[last].1;
            }
            let sum: f64 = atoms[..last].iter().map(|a| a.1).sum();
            atoms[last].1 = 1.0 - sum;
            DistributionSpec::FiniteSupport { atoms }
        })
        .prop_filter("valid", |s| Distribution::validate(s.clone()).is_ok())
}

fn lomax_mix() -> impl Strategy<Value = DistributionSpec> {
    (0.3..0.8f64, 2.0..10.0f64, 0.5..2.0f64, 2.5..5.0f64)
        .prop_map(|(q, lambda, s, gamma)| DistributionSpec::LomaxMix { q, lambda, s, gamma })
        .prop_filter("positive mean", |s| Distribution::validate(s.clone()).is_ok())
}

fn any_law() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![gaussian(), double_exponential(), shifted_exponential(), two_point(), finite_support(), lomax_mix()]
}

fn law(spec: DistributionSpec) -> Distribution {
    Distribution::validate(spec).unwrap()
}

/// `E[exp(-tX)]` by integrating the density directly.
fn moment_by_density(d: &Distribution, t: f64) -> f64 {
    let f = |x: f64| d.pdf(x).unwrap() * (-t * x).exp();
    match *d.spec() {
        DistributionSpec::Gaussian { mu, sigma } => {
            let c = mu - t * sigma * sigma;
            let pts: Vec<f64> = (-8..=8).map(|k| c + k as f64 * 2.0 * sigma).collect();
            integrate_with_breakpoints(f, c - 40.0 * sigma, c + 40.0 * sigma, &pts, 1e-12).unwrap().value
        }
        DistributionSpec::ShiftedExponential { delta, .. } => integrate_to_infinity(f, -delta, 1e-12).unwrap().value,
        _ => {
            let left = integrate_to_infinity(|y| f(-y), 0.0, 1e-12).unwrap().value;
            left + integrate_to_infinity(f, 0.0, 1e-12).unwrap().value
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_match_density_quadrature(spec in prop_oneof![gaussian(), double_exponential(), shifted_exponential(), lomax_mix()], u in 0.0..0.9f64) {
        let d = law(spec);
        let rate = d.divergence_rate();
        let t = if rate.is_finite() { u * rate } else { 3.0 * u };
        let closed = d.neg_exp_moment(t).unwrap();
        let quad = moment_by_density(&d, t);
        prop_assert!(((closed - quad) / quad).abs() < 1e-8, "{closed} vs {quad}");
    }

    #[test]
    fn conditional_moments_respect_jensen(spec in any_law(), u in 0.0..1.0f64) {
        let d = law(spec);
        let alpha = adjustment_coefficient(&d, 1e-12).unwrap().alpha;
        let hi = d.ess_sup().min(10.0);
        let x_up = u * hi * 0.999;
        if let Ok(v) = d.cond_upper_exp_moment(alpha, x_up) {
            prop_assert!(v > 0.0 && v <= 1.0 + 1e-12, "upper {v} at {x_up}");
        }
        let lo = d.ess_inf().max(-10.0);
        let x_low = u * lo * 0.999;
        if let Ok(v) = d.cond_lower_exp_moment(alpha, x_low) {
            prop_assert!(v >= 1.0 - 1e-12, "lower {v} at {x_low}");
        }
    }

    #[test]
    fn alpha_is_the_positive_root(spec in any_law()) {
        let d = law(spec);
        let r = adjustment_coefficient(&d, 1e-12).unwrap();
        prop_assert!(r.alpha > 0.0);
        prop_assert!(r.solver.residual.abs() < 1e-9);
        prop_assert!(d.neg_exp_moment(0.5 * r.alpha).unwrap() < 1.0);
        prop_assert!((r.riskiness * r.alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excess_constants_are_nonnegative_and_shrink_with_cap(spec in any_law(), cap in 0.05..5.0f64) {
        let d = law(spec);
        let alpha = adjustment_coefficient(&d, 1e-12).unwrap().alpha;
        let capped = d_plus(&d, alpha, Some(cap)).unwrap().value;
        let wider = d_plus(&d, alpha, Some(2.0 * cap)).unwrap().value;
        prop_assert!(capped >= 0.0 && capped <= wider + 1e-9);
        if let Ok(full) = d_plus(&d, alpha, None) {
            prop_assert!(wider <= full.value + 1e-9);
        }
        let m = d_minus(&d, alpha, None).unwrap().value;
        prop_assert!(m >= 0.0 && d_minus(&d, alpha, Some(cap)).unwrap().value <= m + 1e-9);
    }

    #[test]
    fn bounds_are_ordered(alpha in 0.01..5.0f64, d in 0.01..5.0f64, d0 in 0.0..3.0f64, x in 0.0..10.0f64) {
        let b = expected_max_bounds(alpha, d, d0);
        prop_assert!(b.lower > 0.0 && b.lower <= b.upper);
        let t = min_tail_bounds(alpha, x, d0);
        prop_assert!(0.0 <= t.lower && t.lower <= t.upper && t.upper <= 1.0);
    }

    #[test]
    fn dichotomous_value_sits_inside_its_bounds(p in 0.52..0.98f64, d in 0.1..8.0f64) {
        let alpha = (p / (1.0 - p)).ln();
        let exact = dichotomous_expected_max(p, d).unwrap();
        let b = expected_max_bounds(alpha, d, 2.0);
        prop_assert!(b.lower <= exact * (1.0 + 1e-12) && exact <= b.upper * (1.0 + 1e-12), "{b:?} {exact}");
    }

    #[test]
    fn barycenter_is_monotone_above_the_diagonal(spec in finite_support(), xs in prop::collection::vec(-4.0..4.0f64, 1..20)) {
        let d = law(spec);
        let f = AtomicDistribution::from_distribution(&d).unwrap();
        let top = *f.atoms().last().unwrap();
        let mut xs: Vec<f64> = xs.into_iter().filter(|&x| x <= top).collect();
        xs.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for x in xs {
            let h = f.barycenter(x).unwrap();
            prop_assert!(h >= x - 1e-12 && h >= prev - 1e-12);
            prev = h;
        }
    }

    #[test]
    fn merged_moments_match_one_pass(v in prop::collection::vec(-100.0..100.0f64, 2..300), cut in 0usize..300) {
        let cut = cut % v.len();
        let mut whole = Moments::default();
        v.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        v[..cut].iter().for_each(|&x| a.push(x));
        v[cut..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        prop_assert!((a.mean() - whole.mean()).abs() < 1e-9);
        prop_assert!((a.stderr() - whole.stderr()).abs() < 1e-9);
    }
}

#[test]
fn gaussian_residual_laws_are_ordered() {
    for (mu, sigma) in [(1.0, 1.0), (0.3, 2.0), (2.0, 0.5)] {
        let d = law(DistributionSpec::Gaussian { mu, sigma });
        let alpha = 2.0 * mu / (sigma * sigma);
        let mut prev = 0.0;
        for i in 0..200 {
            let x = i as f64 * 0.05 * sigma;
            let v = d.cond_upper_exp_moment(alpha, x).unwrap();
            assert!(v >= prev - 1e-13, "{mu} {sigma} at {x}: {v} < {prev}");
            prev = v;
        }
    }
}
