//! Geometric closure for lattice sums that run toward the origin.
//!
//! A grid stops at `x_M = b q^M`, while integrals from zero run over every
//! `x_M q^i`. Sampled functions that behave like a power of `x` near zero have
//! a constant lattice ratio `u_(M+1) / u_M`, so the missing samples are
//! continued geometrically with the ratio of the two deepest samples.

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TailFit<T> {
    /// Both deepest samples vanish.
    Zero,
    /// Continue with `u_(M+i) = u_M r^i`.
    Ratio(T),
    /// The deepest samples do not look like a convergent power law.
    Unfit,
}

/// Largest accepted value of `q r`.
const MAX_DECAY: f64 = 0.999_99;

const MAX_EXTENSION: usize = 5_000_000;

pub(crate) fn fit<T: Real>(values: &[T], q: T) -> TailFit<T> {
    let n = values.len();
    if n < 2 {
        return TailFit::Unfit;
    }
    let (last, prev) = (values[n - 1], values[n - 2]);
    if last == T::zero() {
        return TailFit::Zero;
    }
    if prev == T::zero() {
        return TailFit::Unfit;
    }
    let r = last / prev;
    if !r.is_finite() || r < T::zero() || q * r >= T::lit(MAX_DECAY) {
        return TailFit::Unfit;
    }
    TailFit::Ratio(r)
}

/// Number of extra lattice points after which `(q r)^E` drops below 1e-18.
pub(crate) fn extension_len<T: Real>(decay: T) -> usize {
    if decay <= T::zero() {
        return 1;
    }
    let e = (T::lit(1e-18).ln() / decay.ln()).ceil();
    e.to_usize().unwrap_or(MAX_EXTENSION).clamp(1, MAX_EXTENSION)
}

/// `S_t = sum_{i >= 1} rho^i c_(t+i)` for `t = 0..=t_max`.
///
/// `c` must extend past `t_max` far enough that `rho^i` has decayed; beyond its
/// end `c` is assumed to continue with ratio `kappa`.
pub(crate) fn closure_sums<T: Real>(c: &[T], rho: T, kappa: T, t_max: usize) -> Vec<T> {
    let len = c.len();
    debug_assert!(len > t_max + 1);
    let rk = rho * kappa;
    let mut s = c[len - 1] * rk / (T::one() - rk);
    let mut out = vec![T::zero(); t_max + 1];
    for t in (0..len - 1).rev() {
        s = rho * (c[t + 1] + s);
        if t <= t_max {
            out[t] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_power_law() {
        let q: f64 = 0.5;
        let v: Vec<f64> = (0..10).map(|m| q.powi(m).powf(-0.3)).collect();
        match fit(&v, q) {
            TailFit::Ratio(r) => assert!((r - q.powf(-0.3)).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert_eq!(fit(&[1.0, -1.0], q), TailFit::Unfit);
        assert_eq!(fit(&[0.0, 0.0], q), TailFit::Zero);
        assert_eq!(fit(&[1.0, 4.0], q), TailFit::Unfit);
    }

    #[test]
    fn closure_matches_direct_sum() {
        let c: Vec<f64> = (0..400).map(|j| 1.0 - 0.5f64.powi(j + 1)).collect();
        let rho = 0.6;
        let s = closure_sums(&c, rho, 1.0, 3);
        for t in 0..=3 {
            let direct: f64 = (1..390 - t).map(|i| rho.powi(i as i32) * c[t + i]).sum();
            assert!((s[t] - direct).abs() < 1e-13, "{t}: {} vs {direct}", s[t]);
        }
    }
}
