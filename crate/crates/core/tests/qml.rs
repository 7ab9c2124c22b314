use proptest::prelude::*;
use qfrac::qcore::{q_gamma, QParams};
use qfrac::qml::*;
use qfrac::Error;

/// `E_{0.5,0.5}(0.2)` at q = 0.5 from a 500-term, 50-digit summation.
const ML_HALF_HALF_AT_02: f64 = 0.889_151_563_837_371_403_280_564_092_309_399_434;

fn spec(q: f64, al: f64, be: f64, la: f64) -> MLSpec {
    MLSpec::new(al, be, la, QParams::new(q).unwrap()).unwrap()
}

fn product(q: f64, c: f64) -> f64 {
    let mut acc = 1.0;
    let mut t = c;
    while t.abs() > 1e-18 {
        acc *= 1.0 - t;
        t *= q;
    }
    acc
}

/// `sum_{k<500} lambda^k x^(k alpha) (s; q)_(k alpha) / Gamma_q(alpha k + beta)`
/// with every q-Gamma and q-Pochhammer expanded into infinite products.
fn brute_force(q: f64, al: f64, be: f64, la: f64, x: f64, s: f64) -> f64 {
    let w = la * (x * (1.0 - q)).powf(al);
    let base = (1.0 - q).powf(be - 1.0) / product(q, q);
    let mut sum = 0.0;
    let mut wk = 1.0;
    for k in 0..500 {
        let ka = al * k as f64;
        let shift = if s == 0.0 { 1.0 } else { product(q, s) / product(q, s * q.powf(ka)) };
        sum += wk * base * product(q, q.powf(ka + be)) * shift;
        wk *= w;
    }
    sum
}

#[test]
fn spec_validation() {
    let p = QParams::new(0.5).unwrap();
    assert!(MLSpec::new(0.0, 1.0, 1.0, p).is_err());
    assert!(MLSpec::new(-1.0, 1.0, 1.0, p).is_err());
    assert!(MLSpec::new(1.0, f64::NAN, 1.0, p).is_err());
}

#[test]
fn zero_lambda_and_full_shift() {
    let s = spec(0.5, 0.7, 1.3, 0.0);
    let recip = 1.0 / q_gamma(s.params(), 1.3).unwrap();
    assert!((ml_eval(&s, 2.0, 0.0).unwrap() - recip).abs() < 1e-15);
    let s = spec(0.5, 0.7, 1.3, 0.8);
    assert!((ml_eval(&s, 0.5, 0.5).unwrap() - recip).abs() < 1e-15);
}

#[test]
fn brute_force_spot_value() {
    let v = ml_eval(&spec(0.5, 0.5, 0.5, 0.2), 1.0, 0.0).unwrap();
    assert!((v - brute_force(0.5, 0.5, 0.5, 0.2, 1.0, 0.0)).abs() < 1e-10);
    assert!((v - ML_HALF_HALF_AT_02).abs() < 1e-14);
}

#[test]
fn shifted_argument_on_the_lattice() {
    for (q, al, be, la) in [(0.5, 0.5, 0.5, 0.6), (0.7, 1.3, 0.9, -1.1), (0.9, 0.8, 2.0, 3.0)] {
        let s = spec(q, al, be, la);
        let x = 1.0;
        let a = q.powi(3);
        let v = ml_eval(&s, x, a).unwrap();
        let want = brute_force(q, al, be, la, x, a / x);
        assert!((v - want).abs() < 1e-10 * want.abs().max(1.0), "{q}: {v} vs {want}");
    }
}

#[test]
fn argument_errors() {
    let s = spec(0.5, 0.5, 0.5, 0.2);
    assert!(matches!(ml_eval(&s, 0.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(ml_eval(&s, 1.0, 2.0), Err(Error::Domain(_))));
    assert!(matches!(ml_eval(&spec(0.5, 0.5, 0.0, 0.2), 1.0, 0.0), Err(Error::Pole(_))));
}

#[test]
fn bound_check_examples() {
    assert_eq!(ml_bound_check(&spec(0.5, 0.8, 1.0, 0.0), 7.0).ratio, 0.0);
    let b = ml_bound_check(&spec(0.5, 1.0, 1.0, 1.0), 1.0);
    assert!((b.ratio - 0.5).abs() < 1e-15);
    assert!((b.tail_bound - 4.0).abs() < 1e-14);
    let b = ml_bound_check(&spec(0.5, 1.0, 1.0, 3.0), 1.0);
    assert!((b.ratio - 1.5).abs() < 1e-15);
    assert!(matches!(ml_eval(&spec(0.5, 1.0, 1.0, 3.0), 1.0, 0.0), Err(Error::Divergence { .. })));
}

#[test]
fn divergence_at_the_boundary() {
    // ratio exactly one: |lambda| (x (1 - q))^alpha with q = 0.5, x = 2, alpha = 1.
    assert!(matches!(ml_eval(&spec(0.5, 1.0, 1.0, 1.0), 2.0, 0.0), Err(Error::Divergence { .. })));
    assert!(ml_eval(&spec(0.5, 1.0, 1.0, 0.99), 2.0, 0.0).is_ok());
    // Convergent but slower than the default term cap allows.
    assert!(matches!(ml_eval(&spec(0.5, 1.0, 1.0, 0.9999), 2.0, 0.0), Err(Error::NonConvergence { .. })));
}

#[test]
fn detailed_reports_certificate() {
    let v = ml_eval_detailed(&spec(0.7, 0.9, 1.1, 2.0), 0.8, 0.0).unwrap();
    assert!(v.terms >= 3);
    assert!(v.tail_bound <= 1e-15 * v.value.abs());
    assert!(v.ratio < 1.0);
}

fn any_q() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.3, 0.5, 0.7, 0.9])
}

/// `(q, alpha, beta, lambda, x)` with ratio below `frac`.
fn admissible(frac: f64) -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (any_q(), 0.2f64..2.0, 0.2f64..2.0, -1.0f64..1.0, 0.1f64..1.0).prop_map(move |(q, al, be, t, x)| {
        let limit = frac / (x * (1.0 - q)).powf(al);
        (q, al, be, t * limit, x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matches_brute_force((q, al, be, la, x) in admissible(0.95)) {
        let v = ml_eval(&spec(q, al, be, la), x, 0.0).unwrap();
        let want = brute_force(q, al, be, la, x, 0.0);
        let scale = brute_force(q, al, be, la.abs(), x, 0.0);
        prop_assert!((v - want).abs() <= 1e-10 * scale);
    }

    #[test]
    fn term_ratio_bound(q in any_q(), al in 0.1f64..=1.0, be in 1.0f64..2.0, t in -1.0f64..1.0, x in 0.1f64..1.0) {
        let la = t * 0.95 / (x * (1.0 - q)).powf(al);
        let s = spec(q, al, be, la);
        let p = s.params();
        let r = ml_bound_check(&s, x).ratio;
        let z = la * x.powf(al);
        let term = |k: i32| z.powi(k) / q_gamma(p, al * k as f64 + be).unwrap();
        for k in 0..40 {
            let (a, b) = (term(k), term(k + 1));
            if a != 0.0 {
                prop_assert!((b / a).abs() <= r / (1.0 - q) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn certificate_survives_tighter_tolerance((q, al, be, la, x) in admissible(0.9)) {
        let loose = QParams::new(q).unwrap();
        let tight = QParams::with_tolerances(q, loose.eps_product(), loose.eps_series() / 10.0, loose.max_terms()).unwrap();
        let a = ml_eval(&MLSpec::new(al, be, la, loose).unwrap(), x, 0.0).unwrap();
        let b = ml_eval(&MLSpec::new(al, be, la, tight).unwrap(), x, 0.0).unwrap();
        prop_assert!((a - b).abs() <= 10.0 * loose.eps_series() * a.abs());
    }

    #[test]
    fn nondecreasing_in_lambda(q in any_q(), al in 0.2f64..2.0, be in 0.2f64..2.0, x in 0.1f64..1.0, f1 in 0.0f64..0.95, f2 in 0.0f64..0.95) {
        let limit = 1.0 / (x * (1.0 - q)).powf(al);
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let a = ml_eval(&spec(q, al, be, lo * limit), x, 0.0).unwrap();
        let b = ml_eval(&spec(q, al, be, hi * limit), x, 0.0).unwrap();
        // Both sums stop within eps_series of their limits.
        prop_assert!(a <= b * (1.0 + 4e-15));
    }

    #[test]
    fn divergence_exactly_past_ratio_one(q in any_q(), al in 0.2f64..2.0, x in 0.1f64..1.0, r in 0.5f64..1.5) {
        let la = r / (x * (1.0 - q)).powf(al);
        let s = spec(q, al, 1.0, la);
        let diverged = matches!(ml_eval(&s, x, 0.0), Err(Error::Divergence { .. }));
        prop_assert_eq!(diverged, s.ratio(x) >= 1.0);
    }
}
