//! Two-parameter q-Mittag-Leffler series
//! `E_{alpha,beta}[lambda x^alpha (a/x; q)_alpha] = sum_k lambda^k x^(k alpha) (a/x; q)_(k alpha) / Gamma_q(alpha k + beta)`.

use crate::error::{invalid, Error, Result};
use crate::qcore::{q_gamma, q_gamma_recip, q_pochhammer_fractional, q_pochhammer_qpow, to_f64, QParams};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLSpec<T: Real = f64> {
    alpha: T,
    beta: T,
    lambda: T,
    params: QParams<T>,
}

impl<T: Real> MLSpec<T> {
    pub fn new(alpha: T, beta: T, lambda: T, params: QParams<T>) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(invalid(format!("series order alpha must be positive, got {alpha}")));
        }
        if !beta.is_finite() || !lambda.is_finite() {
            return Err(invalid("beta and lambda must be finite"));
        }
        Ok(Self { alpha, beta, lambda, params })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn params(&self) -> &QParams<T> {
        &self.params
    }

    /// Limit ratio of consecutive terms, `|lambda| x^alpha (1 - q)^alpha`.
    pub fn ratio(&self, x: T) -> T {
        self.lambda.abs() * (x * (T::one() - self.params.q())).powf(self.alpha)
    }
}

/// Convergence certificate for a whole interval `(0, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlBound<T> {
    /// `|lambda| b^alpha (1 - q)^alpha`; the series converges on `(0, b]` iff this is below one.
    pub ratio: T,
    /// `1 / (|lambda| b^alpha (1 - q)^(alpha + 1))`, infinite for `lambda = 0`.
    pub tail_bound: T,
}

pub fn ml_bound_check<T: Real>(spec: &MLSpec<T>, b: T) -> MlBound<T> {
    let ratio = spec.ratio(b);
    let tail_bound = T::one() / (ratio * (T::one() - spec.params.q()));
    MlBound { ratio, tail_bound }
}

/// A certified partial sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlValue<T> {
    pub value: T,
    pub terms: usize,
    pub ratio: T,
    pub tail_bound: T,
}

/// `(a/x; q)` base, kept in exponent form when `a/x` is an exact power of `q`.
#[derive(Debug, Clone, Copy)]
enum Shift<T> {
    None,
    QPow(T),
    Value(T),
}

fn shift_for<T: Real>(p: &QParams<T>, x: T, a: T) -> Shift<T> {
    if a == T::zero() {
        return Shift::None;
    }
    let s = a / x;
    let e = s.ln() / p.ln_q();
    match e.as_integer() {
        Some(k) if (p.pow(T::from_i64(k).unwrap()) - s).abs() <= T::lit(1e-12) * s => {
            Shift::QPow(T::from_i64(k).unwrap())
        }
        _ => Shift::Value(s),
    }
}

pub fn ml_eval<T: Real>(spec: &MLSpec<T>, x: T, a: T) -> Result<T> {
    ml_eval_detailed(spec, x, a).map(|v| v.value)
}

/// Sums until three consecutive terms fall below `eps_series |S|` and the
/// geometric bound on the remainder does too.
pub fn ml_eval_detailed<T: Real>(spec: &MLSpec<T>, x: T, a: T) -> Result<MlValue<T>> {
    let p = &spec.params;
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("argument x must be positive, got {x}")));
    }
    if !(a >= T::zero() && a <= x * (T::one() + T::lit(1e-12))) {
        return Err(Error::Domain(format!("shift a = {a} must lie in [0, x = {x}]")));
    }
    let ratio = spec.ratio(x);
    if !(ratio < T::one()) {
        return Err(Error::Divergence { ratio: to_f64(ratio) });
    }
    let shift = shift_for(p, x, a.min(x));
    let z = spec.lambda * x.powf(spec.alpha);
    let eps = p.eps_series();

    let mut sum = q_gamma(p, spec.beta).map(|g| T::one() / g)?;
    let mut term = sum;
    let mut zk = T::one();
    let mut poch = T::one();
    let mut small = 0usize;
    let z_scaled = z * (T::one() - p.q()).powf(spec.alpha);
    for k in 1..p.max_terms() {
        let kf = T::from_usize(k).unwrap();
        let prev = kf - T::one();
        let step = match shift {
            Shift::None => T::one(),
            Shift::QPow(e) => q_pochhammer_qpow(p, e + prev * spec.alpha, spec.alpha)?,
            Shift::Value(s) => q_pochhammer_fractional(p, s * p.pow(prev * spec.alpha), spec.alpha)?,
        };
        poch = poch * step;
        zk = zk * z;
        let arg = spec.alpha * kf + spec.beta;
        let prev_arg = arg - spec.alpha;
        // Past the poles, Gamma_q(s) / Gamma_q(s + alpha) = (1-q)^alpha / (q^s; q)_alpha
        // keeps every factor in range where z^k and 1/Gamma_q would not be.
        term = if prev_arg > T::zero() {
            term * z_scaled * step / q_pochhammer_qpow(p, prev_arg, spec.alpha)?
        } else {
            zk * poch * q_gamma_recip(p, arg)?
        };
        sum = sum + term;
        if term.abs() <= eps * sum.abs() {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 3 {
            if term == T::zero() && poch == T::zero() {
                return Ok(MlValue { value: sum, terms: k + 1, ratio, tail_bound: T::zero() });
            }
            if arg > T::zero() {
                let rho = ratio / q_pochhammer_qpow(p, arg, spec.alpha)?;
                if rho < T::one() {
                    let tail = term.abs() * rho / (T::one() - rho);
                    if tail <= eps * sum.abs() {
                        return Ok(MlValue { value: sum, terms: k + 1, ratio, tail_bound: tail });
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence { terms: p.max_terms(), tail_bound: f64::NAN })
}
