use super::*;
use crate::model::ModelParams;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn q(t: f64, x: f64, y: f64) -> DensityQuery<f64> {
    DensityQuery::new(t, x, y).unwrap()
}

fn spec(delta: f64, theta: f64) -> SkewSpec<f64> {
    SkewSpec::new(delta, theta).unwrap()
}

fn tight() -> QuadSettings<f64> {
    QuadSettings::tight()
}

/// Standard normal CDF via a high-order series/continued fraction of erfc.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        // Maclaurin series of erf
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for n in 1..200 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for n in 1..300 {
            let an = n as f64 / 2.0;
            d = x + an * d;
            d = 1.0 / d;
            c = x + an / c;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
    }
}

fn bessel_mass(t: f64, x: f64, delta: f64) -> f64 {
    integrate_with_breaks(
        |y| bessel_density(&q(t, x, y), delta).unwrap(),
        &half_line_breaks(t, x),
        &tight(),
    )
    .unwrap()
    .value
}

fn skew_mass(t: f64, x: f64, s: &SkewSpec<f64>) -> f64 {
    integrate_with_breaks(
        |y| skew_density(&q(t, x, y), s).unwrap(),
        &line_breaks(t, x),
        &tight(),
    )
    .unwrap()
    .value
}

#[test]
fn maxwell_from_origin() {
    assert_eq!(bessel_density(&q(1.0, 0.0, 0.0), 3.0).unwrap(), 0.0);
    for i in 1..60 {
        let y = i as f64 * 0.1;
        let maxwell = y * y * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * y * y).exp();
        assert_relative_eq!(
            bessel_density(&q(1.0, 0.0, y), 3.0).unwrap(),
            maxwell,
            max_relative = 1e-12
        );
    }
}

#[test]
fn three_dimensional_density_matches_closed_form() {
    // BES^3 from x: (y/x) (phi_t(y-x) - phi_t(y+x))
    let t = 0.7;
    let x = 1.3;
    for i in 1..40 {
        let y = i as f64 * 0.15;
        let g = |u: f64| (-u * u / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
        let exact = y / x * (g(y - x) - g(y + x));
        assert_relative_eq!(
            bessel_density(&q(t, x, y), 3.0).unwrap(),
            exact,
            max_relative = 1e-10
        );
    }
}

#[test]
fn bessel_density_normalizes() {
    assert!((bessel_mass(1.0, 1.0, 1.5) - 1.0).abs() < 1e-8);
    for delta in [0.7, 1.0, 1.5, 2.0, 3.0] {
        for x in [0.0, 0.5, 2.0] {
            let m = bessel_mass(1.0, x, delta);
            assert!((m - 1.0).abs() < 1e-7, "delta={delta} x={x} mass={m}");
        }
    }
}

#[test]
fn skew_density_normalizes() {
    let m = skew_mass(1.0, 0.5, &spec(1.3, 0.4));
    assert!((m - 1.0).abs() < 1e-7, "{m}");
    for delta in [0.7, 1.5] {
        for theta in [-0.5, 0.0, 0.5] {
            for x in [-1.0, 0.0, 1.0] {
                let m = skew_mass(1.0, x, &spec(delta, theta));
                assert!((m - 1.0).abs() < 1e-7, "delta={delta} theta={theta} x={x} mass={m}");
            }
        }
    }
}

#[test]
fn domain_errors() {
    assert!(DensityQuery::new(0.0, 1.0, 1.0).is_err());
    assert!(bessel_density(&q(1.0, 1.0, 1.0), 0.0).is_err());
    assert!(bessel_density(&q(1.0, -1.0, 1.0), 1.0).is_err());
    assert!(killed_density(&q(1.0, 1.0, 1.0), 2.0).is_err());
    assert!(killed_density(&q(1.0, 0.0, 1.0), 1.0).is_err());
    assert!(skew_density(&q(1.0, 1.0, 1.0), &spec(2.5, 0.0)).is_err());
    let p = ModelParams::new(0.5, 0.5).unwrap();
    assert!(het_density(1.0, 1.0, 0.0, &p, 0.0).is_err());
}

#[test]
fn killed_one_dimensional_is_method_of_images() {
    for t in [0.3, 1.0, 2.5] {
        for x in [0.2, 1.0, 3.0] {
            for i in 1..30 {
                let y = i as f64 * 0.2;
                let g = |u: f64| (-u * u / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
                let images = g(y - x) - g(y + x);
                let k = killed_density(&q(t, x, y), 1.0).unwrap();
                assert!((k - images).abs() <= 1e-11 * images.max(1e-300) + 1e-300, "t={t} x={x} y={y}");
            }
        }
    }
}

#[test]
fn killed_never_exceeds_free() {
    for delta in [0.1, 0.7, 1.0, 1.5, 1.9] {
        for x in [0.1, 1.0, 2.0] {
            for i in 1..40 {
                let y = i as f64 * 0.1;
                let k = killed_density(&q(1.0, x, y), delta).unwrap();
                let p = bessel_density(&q(1.0, x, y), delta).unwrap();
                assert!(k <= p * (1.0 + 1e-12), "delta={delta} x={x} y={y}");
                assert!(k >= 0.0);
            }
        }
    }
}

#[test]
fn killed_density_is_dual_to_higher_dimension() {
    // killed BES^delta is (x/y)^{2-delta} times the free BES^{4-delta} density
    for delta in [-2.0, -0.5, 0.0, 0.3, 1.0, 1.6] {
        for x in [0.5, 1.0, 2.0] {
            for i in 1..20 {
                let y = i as f64 * 0.25;
                let k = killed_density(&q(1.0, x, y), delta).unwrap();
                let dual = bessel_density(&q(1.0, x, y), 4.0 - delta).unwrap() * (x / y).powf(2.0 - delta);
                assert_relative_eq!(k, dual, max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn survival_probability_oracles() {
    let s = survival_probability(1.0, 1.0, 1.0).unwrap();
    assert!((s - (2.0 * phi(1.0) - 1.0)).abs() < 1e-8, "{s}");
    assert!((s - 0.6826894921370859).abs() < 1e-8);
    // BESQ^0 from y is absorbed by t with probability exp(-y/2t); y = x^2
    for (t, x) in [(1.0f64, 2.0f64), (0.5, 1.0), (3.0, 1.5)] {
        let s = survival_probability(t, x, 0.0).unwrap();
        let exact = 1.0 - (-x * x / (2.0 * t)).exp();
        assert!((s - exact).abs() < 1e-8, "t={t} x={x} s={s} exact={exact}");
    }
    assert!(survival_probability(1e-4, 1.0, 0.5).unwrap() > 1.0 - 1e-9);
    assert!(survival_probability(1.0, 1.0, 2.0).is_err());
}

#[test]
fn survival_decreases_in_time() {
    for delta in [-1.0, 0.0, 0.7, 1.5] {
        let mut last = 1.0;
        for k in 1..15 {
            let t = 0.1 * k as f64;
            let s = survival_probability(t, 1.0, delta).unwrap();
            assert!(s <= last + 1e-10, "delta={delta} t={t}");
            last = s;
        }
    }
}

#[test]
fn unified_and_case_forms_agree() {
    for delta in [0.3, 0.7, 1.0, 1.3, 1.8] {
        for theta in [-0.9, -0.4, 0.0, 0.4, 0.9] {
            let s = spec(delta, theta);
            for t in [0.4, 1.0, 2.0] {
                for x in [-2.0, -0.5, 0.3, 1.5] {
                    for y in [-3.0, -1.0, -0.2, 0.1, 0.8, 2.5] {
                        let u = skew_density(&q(t, x, y), &s).unwrap();
                        let c = skew_density_cases(&q(t, x, y), &s).unwrap();
                        assert!(
                            (u - c).abs() <= 1e-12 * u.abs().max(1e-300) + 1e-300,
                            "delta={delta} theta={theta} t={t} x={x} y={y}: {u} vs {c}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn printed_case_form_is_not_a_density() {
    let s = spec(1.3, 0.4);
    let printed = integrate_with_breaks(
        |y| skew_density_cases_as_printed(&q(1.0, 0.5, y), &s).unwrap_or(0.0),
        &line_breaks(1.0, 0.5),
        &tight(),
    )
    .unwrap()
    .value;
    let survive = survival_probability(1.0, 0.5, 1.3).unwrap();
    assert!((printed - (1.0 - 0.4 * survive)).abs() < 1e-7, "{printed}");
    let min = (1..200)
        .map(|i| skew_density_cases_as_printed(&q(1.0, 0.5, -0.02 * i as f64), &s).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.0);
}

#[test]
fn symmetric_skew_density() {
    let s = spec(1.4, 0.0);
    for x in [0.3, 1.0] {
        for y in [0.2, 0.9, 2.0] {
            let p = bessel_density(&q(1.0, x, y), 1.4).unwrap();
            let k = killed_density(&q(1.0, x, y), 1.4).unwrap();
            assert_relative_eq!(
                skew_density(&q(1.0, x, y), &s).unwrap(),
                0.5 * (p + k),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                skew_density(&q(1.0, x, y), &s).unwrap(),
                skew_density(&q(1.0, -x, -y), &s).unwrap(),
                max_relative = 1e-14
            );
        }
    }
}

#[test]
fn skew_from_origin_is_weighted_bessel() {
    let s = spec(1.3, 0.4);
    for y in [-2.0f64, -0.5, 0.5, 2.0] {
        let p = bessel_density(&q(1.0, 0.0, y.abs()), 1.3).unwrap();
        let w = if y > 0.0 { 0.7 } else { 0.3 };
        assert_relative_eq!(skew_density(&q(1.0, 0.0, y), &s).unwrap(), w * p, max_relative = 1e-14);
    }
}

#[test]
fn visited_mass_is_nonnegative() {
    for delta in [0.2, 0.9, 1.5, 1.95] {
        for x in [1e-3, 0.4, 2.0, 6.0] {
            for y in [1e-3, 0.4, 2.0, 6.0, 20.0] {
                for t in [0.05, 1.0, 10.0] {
                    let p = bessel_density(&q(t, x, y), delta).unwrap();
                    let k = killed_density(&q(t, x, y), delta).unwrap();
                    assert!(p - k >= -1e-13 * p, "delta={delta} x={x} y={y} t={t}");
                }
            }
        }
    }
}

#[test]
fn origin_branch_is_the_limit() {
    for delta in [0.7, 1.5, 3.0] {
        for y in [0.2, 1.0, 2.5] {
            let at0 = bessel_density(&q(1.0, 0.0, y), delta).unwrap();
            let near = bessel_density(&q(1.0, 1e-6, y), delta).unwrap();
            assert!(((at0 - near) / at0).abs() < 1e-4, "delta={delta} y={y}");
        }
    }
}

#[test]
fn large_arguments_do_not_overflow() {
    let p = bessel_density(&q(0.01, 50.0, 50.1), 1.5).unwrap();
    assert!(p.is_finite() && p > 0.0);
    let s = skew_density(&q(0.01, -50.0, -50.1), &spec(1.5, 0.3)).unwrap();
    assert!(s.is_finite() && s > 0.0);
}

fn ck_plain(delta: f64, x: f64, y: f64) -> (f64, f64) {
    let lhs = integrate_with_breaks(
        |u| {
            bessel_density(&q(0.5, x, u), delta).unwrap() * bessel_density(&q(0.5, u, y), delta).unwrap()
        },
        &[0.0, x.min(y), x.max(y), x.max(y) + 10.0, f64::INFINITY],
        &tight(),
    )
    .unwrap()
    .value;
    (lhs, bessel_density(&q(1.0, x, y), delta).unwrap())
}

#[test]
fn chapman_kolmogorov_plain() {
    for delta in [0.7, 1.5, 3.0] {
        for (x, y) in [(0.5, 0.7), (1.0, 1.8), (0.0, 1.2), (2.0, 0.5)] {
            let (lhs, rhs) = ck_plain(delta, x, y);
            assert!((lhs - rhs).abs() <= 1e-5 * rhs, "delta={delta} x={x} y={y}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn chapman_kolmogorov_skew() {
    let s = spec(1.3, 0.4);
    for (x, y) in [(0.5f64, 0.7f64), (-1.0, 0.8), (0.3, -1.2), (-0.6, -0.4), (0.0, 1.0)] {
        let lhs = integrate_with_breaks(
            |u| skew_density(&q(0.5, x, u), &s).unwrap() * skew_density(&q(0.5, u, y), &s).unwrap(),
            &[f64::NEG_INFINITY, -10.0, -x.abs().max(y.abs()), 0.0, x.abs().max(y.abs()), 10.0, f64::INFINITY],
            &tight(),
        )
        .unwrap()
        .value;
        let rhs = skew_density(&q(1.0, x, y), &s).unwrap();
        assert!((lhs - rhs).abs() <= 1e-5 * rhs, "x={x} y={y}: {lhs} vs {rhs}");
    }
}

fn het_mass(x: f64, params: &ModelParams<f64>, theta: f64) -> f64 {
    let gap = 1e-300;
    let f = |y: f64| if y == 0.0 { 0.0 } else { het_density(1.0, x, y, params, theta).unwrap() };
    let a = x.abs().max(1.0);
    integrate_with_breaks(
        f,
        &[f64::NEG_INFINITY, -40.0 * a, -a, -gap, 0.0, gap, a, 40.0 * a, f64::INFINITY],
        &tight(),
    )
    .unwrap()
    .value
}

#[test]
fn het_density_normalizes() {
    let p = ModelParams::new(0.5, 0.5).unwrap();
    let m = het_mass(1.0, &p, 0.0);
    assert!((m - 1.0).abs() < 1e-6, "{m}");
    let m = het_mass(1.0, &ModelParams::new(0.3, 0.8).unwrap(), 0.5);
    assert!((m - 1.0).abs() < 1e-6, "{m}");
}

#[test]
fn het_density_trap_deficit_is_survival() {
    let p = ModelParams::new(0.5, 0.0).unwrap();
    let m = het_mass(1.0, &p, 0.3);
    let s = survival_probability(1.0, h_transform(1.0, 0.5), 0.0).unwrap();
    assert!((m - s).abs() < 1e-6, "{m} vs {s}");
    assert!((s - 0.864664716763387).abs() < 1e-8);
}

#[test]
fn het_density_even_from_origin() {
    let p = ModelParams::new(0.5, 0.5).unwrap();
    for y in [0.1, 0.5, 1.3, 4.0] {
        assert_relative_eq!(
            het_density(1.0, 0.0, y, &p, 0.0).unwrap(),
            het_density(1.0, 0.0, -y, &p, 0.0).unwrap(),
            max_relative = 1e-14
        );
    }
}

#[test]
fn transient_dispatch_is_one_sided() {
    let s = spec(3.0, 0.2);
    assert_eq!(signed_bessel_density(&q(1.0, 1.0, -1.0), &s).unwrap(), 0.0);
    assert_relative_eq!(
        signed_bessel_density(&q(1.0, -1.0, -2.0), &s).unwrap(),
        bessel_density(&q(1.0, 1.0, 2.0), 3.0).unwrap()
    );
    assert_relative_eq!(
        signed_bessel_density(&q(1.0, 0.0, -2.0), &s).unwrap(),
        0.4 * bessel_density(&q(1.0, 0.0, 2.0), 3.0).unwrap()
    );
}

#[test]
fn cdf_of_maxwell_reaches_one() {
    let t = cdf_from_density(|y| bessel_density(&q(1.0, 0.0, y), 3.0).unwrap(), 0.0, 12.0).unwrap();
    assert!((t.total_mass() - 1.0).abs() < 1e-6);
    assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
}

proptest! {
    #[test]
    fn skew_density_is_nonnegative(
        delta in 0.05f64..1.95,
        theta in -1.0f64..=1.0,
        t in 0.05f64..5.0,
        x in -5.0f64..5.0,
        y in -5.0f64..5.0,
    ) {
        let v = skew_density(&q(t, x, y), &spec(delta, theta)).unwrap();
        prop_assert!(v >= 0.0 && !v.is_nan());
    }

    #[test]
    fn skew_mirror(delta in 0.1f64..1.9, theta in -0.9f64..0.9, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(y != 0.0);
        let a = skew_density(&q(1.0, x, y), &spec(delta, theta)).unwrap();
        let b = skew_density(&q(1.0, -x, -y), &spec(delta, -theta)).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
    }
}
