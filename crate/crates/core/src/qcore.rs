//! q-numbers, q-Pochhammer symbols and the q-Gamma function.
//!
//! Infinite products are truncated once the current factor is within
//! `eps_product` of one and the geometric tail bound confirms it. Factors of
//! the form `1 - q^t` are evaluated as `-expm1(t ln q)`, which keeps full
//! relative precision when `q` is close to one.

use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Lattice ratio together with truncation tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams<T: Real = f64> {
    q: T,
    eps_product: T,
    eps_series: T,
    max_terms: usize,
}

pub const DEFAULT_MAX_TERMS: usize = 10_000;

fn default_eps<T: Real>() -> T {
    T::lit(1e-15).max(T::epsilon() * T::lit(0.5))
}

impl<T: Real> QParams<T> {
    pub fn new(q: T) -> Result<Self> {
        Self::with_tolerances(q, default_eps(), default_eps(), DEFAULT_MAX_TERMS)
    }

    pub fn with_tolerances(q: T, eps_product: T, eps_series: T, max_terms: usize) -> Result<Self> {
        if !(q > T::zero() && q < T::one()) {
            return Err(invalid(format!("q must lie in (0, 1), got {q}")));
        }
        if !(eps_product > T::zero() && eps_product.is_finite()) {
            return Err(invalid(format!("eps_product must be positive, got {eps_product}")));
        }
        if !(eps_series > T::zero() && eps_series.is_finite()) {
            return Err(invalid(format!("eps_series must be positive, got {eps_series}")));
        }
        if max_terms == 0 {
            return Err(invalid("max_terms must be at least 1"));
        }
        Ok(Self { q, eps_product, eps_series, max_terms })
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::with_tolerances(self.q, self.eps_product, self.eps_series, max_terms)
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn eps_product(&self) -> T {
        self.eps_product
    }

    pub fn eps_series(&self) -> T {
        self.eps_series
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn ln_q(&self) -> T {
        self.q.ln()
    }

    /// `q^t` for real `t`.
    pub fn pow(&self, t: T) -> T {
        (t * self.ln_q()).exp()
    }

    /// `1 - q^t`, accurate for small `|t ln q|`.
    pub fn one_minus_pow(&self, t: T) -> T {
        -(t * self.ln_q()).exp_m1()
    }
}

pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy)]
enum Base<T> {
    /// Factors `1 - a q^k`.
    Value(T),
    /// Factors `1 - q^(e + k)`.
    QPow(T),
}

impl<T: Real> Base<T> {
    fn magnitude(self, p: &QParams<T>, k: usize) -> T {
        let k = T::from_usize(k).unwrap();
        match self {
            Base::Value(a) => a.abs() * p.pow(k),
            Base::QPow(e) => p.pow(e + k),
        }
    }

    fn factor(self, p: &QParams<T>, k: usize) -> (T, bool) {
        let kk = T::from_usize(k).unwrap();
        match self {
            Base::Value(a) => {
                let f = T::one() - a * p.pow(kk);
                (f, f.abs() < T::int_window())
            }
            Base::QPow(e) => {
                let t = e + kk;
                if t.as_integer() == Some(0) {
                    (T::zero(), true)
                } else {
                    (p.one_minus_pow(t), false)
                }
            }
        }
    }
}

/// Truncated `prod (num factors) / prod (den factors)` over `k >= 0`.
fn infinite_ratio<T: Real>(p: &QParams<T>, num: Base<T>, den: Option<Base<T>>) -> Result<T> {
    let mut acc = T::one();
    let eps = p.eps_product();
    for k in 0..p.max_terms() {
        let tn = num.magnitude(p, k);
        let td = den.map_or(T::zero(), |d| d.magnitude(p, k));
        if tn < eps && td < eps && tn.max(td) < T::lit(0.5) {
            return Ok(acc);
        }
        let (fnum, zero_num) = num.factor(p, k);
        if zero_num {
            return Ok(T::zero());
        }
        acc = acc * fnum;
        if let Some(d) = den {
            let (fden, zero_den) = d.factor(p, k);
            if zero_den {
                return Err(Error::Pole(format!("vanishing denominator factor at k = {k}")));
            }
            acc = acc / fden;
        }
    }
    let k = p.max_terms();
    let t = num.magnitude(p, k) + den.map_or(T::zero(), |d| d.magnitude(p, k));
    let tail_bound = t / ((T::one() - p.q()) * (T::one() - t.min(T::lit(0.5))));
    if tail_bound > eps {
        return Err(Error::NonConvergence { terms: k, tail_bound: to_f64(tail_bound) });
    }
    Ok(acc)
}

/// q-number `[alpha]_q = (1 - q^alpha) / (1 - q)`.
pub fn q_number<T: Real>(p: &QParams<T>, alpha: T) -> T {
    p.one_minus_pow(alpha) / p.one_minus_pow(T::one())
}

/// q-factorial `[n]_q! = [1][2]...[n]`.
pub fn q_factorial<T: Real>(p: &QParams<T>, n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * q_number(p, T::from_u32(k).unwrap()))
}

/// `(a; q)_n = prod_{k<n} (1 - a q^k)`.
pub fn q_pochhammer_finite<T: Real>(p: &QParams<T>, a: T, n: u32) -> T {
    let mut acc = T::one();
    let mut t = a;
    for _ in 0..n {
        acc = acc * (T::one() - t);
        t = t * p.q();
    }
    acc
}

/// `(a; q)_inf`.
pub fn q_pochhammer_infinite<T: Real>(p: &QParams<T>, a: T) -> Result<T> {
    infinite_ratio(p, Base::Value(a), None)
}

/// `(a; q)_alpha = (a; q)_inf / (q^alpha a; q)_inf` for real `alpha`.
///
/// Nonnegative integer orders use the finite product, which the ratio
/// equals term by term.
pub fn q_pochhammer_fractional<T: Real>(p: &QParams<T>, a: T, alpha: T) -> Result<T> {
    if let Some(n) = alpha.as_integer().filter(|&n| n >= 0) {
        return Ok(q_pochhammer_finite(p, a, n as u32));
    }
    infinite_ratio(p, Base::Value(a), Some(Base::Value(a * p.pow(alpha)))).map_err(|e| match e {
        Error::Pole(msg) => Error::Pole(format!("(a; q)_alpha with a = {a}, alpha = {alpha}: {msg}")),
        other => other,
    })
}

/// `(q^e; q)_alpha` with the base given by its exponent.
///
/// Exact zeros are produced when a numerator factor is `1 - q^0`; integer
/// orders use finite products.
pub fn q_pochhammer_qpow<T: Real>(p: &QParams<T>, e: T, alpha: T) -> Result<T> {
    if let Some(n) = alpha.as_integer() {
        let factor = |t: T| {
            if t.as_integer() == Some(0) {
                T::zero()
            } else {
                p.one_minus_pow(t)
            }
        };
        if n >= 0 {
            let mut acc = T::one();
            for k in 0..n {
                acc = acc * factor(e + T::from_i64(k).unwrap());
            }
            return Ok(acc);
        }
        let mut den = T::one();
        for k in 1..=(-n) {
            den = den * factor(e - T::from_i64(k).unwrap());
        }
        if den == T::zero() {
            return Err(Error::Pole(format!("(q^{e}; q)_{n} has a vanishing denominator")));
        }
        return Ok(T::one() / den);
    }
    infinite_ratio(p, Base::QPow(e), Some(Base::QPow(e + alpha)))
}

/// True when `x` lies within the pole window of a nonpositive integer.
pub fn is_gamma_pole<T: Real>(x: T) -> bool {
    x < T::int_window() && x.as_integer().is_some()
}

/// q-Gamma function `(q; q)_inf / (q^x; q)_inf * (1 - q)^(1 - x)`.
pub fn q_gamma<T: Real>(p: &QParams<T>, x: T) -> Result<T> {
    if is_gamma_pole(x) {
        return Err(Error::Pole(format!("q-Gamma at nonpositive integer {x}")));
    }
    let ratio = infinite_ratio(p, Base::QPow(T::one()), Some(Base::QPow(x)))?;
    Ok(ratio * ((T::one() - x) * (-p.q()).ln_1p()).exp())
}

/// Reciprocal q-Gamma, zero at the poles.
pub fn q_gamma_recip<T: Real>(p: &QParams<T>, x: T) -> Result<T> {
    if is_gamma_pole(x) {
        return Ok(T::zero());
    }
    q_gamma(p, x).map(|g| T::one() / g)
}

/// q-analogue of the power `(x - a)^(alpha) = x^alpha (a/x; q)_alpha`.
pub fn q_power_basis<T: Real>(p: &QParams<T>, x: T, a: T, alpha: T) -> Result<T> {
    if let Some(n) = alpha.as_integer() {
        if n >= 0 {
            let mut acc = T::one();
            let mut s = a;
            for _ in 0..n {
                acc = acc * (x - s);
                s = s * p.q();
            }
            return Ok(acc);
        }
        let mut den = T::one();
        for k in 1..=(-n) {
            den = den * (x - a * p.pow(-T::from_i64(k).unwrap()));
        }
        if den == T::zero() {
            return Err(Error::Pole(format!("(x - a)^({n}) at x = {x}, a = {a}")));
        }
        return Ok(T::one() / den);
    }
    if x <= T::zero() {
        return Err(Error::Domain(format!("non-integer q-power needs x > 0, got x = {x}")));
    }
    if a == T::zero() {
        return Ok(x.powf(alpha));
    }
    Ok(x.powf(alpha) * q_pochhammer_fractional(p, a / x, alpha)?)
}

/// `x^alpha (q^s; q)_alpha`: the q-power with `a / x = q^s` given exactly.
pub fn q_power_basis_qpow<T: Real>(p: &QParams<T>, x: T, s: T, alpha: T) -> Result<T> {
    if x <= T::zero() {
        return Err(Error::Domain(format!("q-power needs x > 0, got x = {x}")));
    }
    Ok(x.powf(alpha) * q_pochhammer_qpow(p, s, alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(q: f64) -> QParams<f64> {
        QParams::new(q).unwrap()
    }

    #[test]
    fn rejects_bad_q() {
        assert!(QParams::new(1.0).is_err());
        assert!(QParams::new(0.0).is_err());
        assert!(QParams::new(f64::NAN).is_err());
    }

    #[test]
    fn q_number_values() {
        assert!((q_number(&p(0.5), 2.0) - 1.5).abs() < 1e-15);
        assert!((q_number(&p(0.5), 0.5) - (1.0 - 0.5f64.sqrt()) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_products() {
        let pp = p(0.5);
        assert_eq!(q_pochhammer_finite(&pp, 0.3, 0), 1.0);
        assert!((q_pochhammer_finite(&pp, 0.3, 2) - 0.7 * 0.85).abs() < 1e-15);
        assert!((q_factorial(&pp, 3) - 1.0 * 1.5 * 1.75).abs() < 1e-15);
    }

    #[test]
    fn gamma_small_integers() {
        let pp = p(0.5);
        assert!((q_gamma(&pp, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((q_gamma(&pp, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((q_gamma(&pp, 3.0).unwrap() - 1.5).abs() < 1e-14);
        assert!(matches!(q_gamma(&pp, 0.0), Err(Error::Pole(_))));
        assert!(matches!(q_gamma(&pp, -2.0), Err(Error::Pole(_))));
        assert!(q_gamma(&pp, -0.5).unwrap().is_finite());
    }

    #[test]
    fn qpow_exact_zero_and_pole() {
        let pp = p(0.5);
        assert_eq!(q_pochhammer_qpow(&pp, -2.0, 3.0).unwrap(), 0.0);
        assert_eq!(q_pochhammer_qpow(&pp, -1.0, 1.7).unwrap(), 0.0);
        assert!(matches!(q_pochhammer_qpow(&pp, 1.0, -1.0), Err(Error::Pole(_))));
        assert!(matches!(q_pochhammer_qpow(&pp, 0.3, -0.3), Err(Error::Pole(_))));
    }

    #[test]
    fn nonconvergence_reported() {
        let pp = QParams::with_tolerances(0.9999, 1e-15, 1e-15, 100).unwrap();
        assert!(matches!(q_gamma(&pp, 1.5), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn single_precision_smoke() {
        let pp = QParams::<f32>::new(0.5).unwrap();
        assert!((q_gamma(&pp, 3.0f32).unwrap() - 1.5).abs() < 1e-5);
    }
}
