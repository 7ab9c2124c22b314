//! Built-in right-hand sides with known solutions.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::qcore::{q_gamma, q_power_basis, QParams};
use crate::real::Real;
use crate::solver::{Forcing, Rhs};

/// `sum c x^p` over `(c, p)` pairs.
pub fn power_forcing<T: Real>(terms: Vec<(T, T)>) -> Forcing<T> {
    Arc::new(move |x| terms.iter().map(|&(c, p)| if p == T::zero() { c } else { c * x.powf(p) }).sum())
}

/// `lambda y + forcing(x)`.
pub fn linear_rhs<T: Real>(lambda: T, forcing: Forcing<T>) -> Rhs<T> {
    Arc::new(move |x, y| lambda * y + forcing(x))
}

/// One monomial `c x^i y^j` of a polynomial right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial<T> {
    pub coef: T,
    pub x_power: T,
    pub y_power: u32,
}

pub fn polynomial_rhs<T: Real>(terms: Vec<Monomial<T>>) -> Result<Rhs<T>> {
    if terms.iter().any(|t| !t.coef.is_finite() || !(t.x_power >= T::zero())) {
        return Err(invalid("polynomial terms need finite coefficients and nonnegative x powers"));
    }
    Ok(Arc::new(move |x, y| {
        terms
            .iter()
            .map(|t| {
                let xp = if t.x_power == T::zero() { T::one() } else { x.powf(t.x_power) };
                t.coef * xp * y.powi(t.y_power as i32)
            })
            .sum()
    }))
}

/// Singular problem `D y = lambda A/B y^2` whose solution blows up like
/// `(x - a)^(-nu - delta)` at the lower limit `a`.
///
/// `A = (x - q^(-nu-delta) a)^(nu+delta)`, `B = (x - q^(-2nu-delta) a)^(nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSquare<T: Real = f64> {
    pub nu: T,
    pub delta: T,
    pub lambda: T,
    pub a: T,
    pub params: QParams<T>,
}

impl<T: Real> SingularSquare<T> {
    /// Requires `2 nu + delta < 1`, `delta > 0` and `lambda != 0`.
    pub fn new(nu: T, delta: T, lambda: T, a: T, params: QParams<T>) -> Result<Self> {
        if !(delta > T::zero() && nu > T::zero() && T::lit(2.0) * nu + delta < T::one()) {
            return Err(invalid(format!("need delta > 0 and 2 nu + delta < 1, got nu = {nu}, delta = {delta}")));
        }
        if lambda == T::zero() || !lambda.is_finite() {
            return Err(invalid("lambda must be finite and nonzero"));
        }
        Ok(Self { nu, delta, lambda, a, params })
    }

    fn gamma_ratio(&self) -> Result<T> {
        let one = T::one();
        Ok(q_gamma(&self.params, one - self.nu - self.delta)?
            / q_gamma(&self.params, one - T::lit(2.0) * self.nu - self.delta)?)
    }

    pub fn rhs(&self) -> Result<Rhs<T>> {
        let s = *self;
        s.gamma_ratio()?;
        let c1 = s.params.pow(-s.nu - s.delta) * s.a;
        let c2 = s.params.pow(-T::lit(2.0) * s.nu - s.delta) * s.a;
        Ok(Arc::new(move |x, y| {
            let num = q_power_basis(&s.params, x, c1, s.nu + s.delta).unwrap_or(T::nan());
            let den = q_power_basis(&s.params, x, c2, s.nu).unwrap_or(T::nan());
            s.lambda * num / den * y * y
        }))
    }

    /// `(1/lambda) G (x - a)^(-nu-delta)` with `G = Gamma_q(1-nu-delta)/Gamma_q(1-2nu-delta)`.
    pub fn exact(&self, x: T) -> Result<T> {
        let g = self.gamma_ratio()?;
        Ok(g / self.lambda * q_power_basis(&self.params, x, self.a, -self.nu - self.delta)?)
    }

    /// The derivative of the exact solution, `(1/lambda) G^2 (x - a)^(-2nu-delta)`.
    pub fn exact_derivative(&self, x: T) -> Result<T> {
        let g = self.gamma_ratio()?;
        Ok(g * g / self.lambda * q_power_basis(&self.params, x, self.a, -T::lit(2.0) * self.nu - self.delta)?)
    }
}

/// Problem `D y = lambda P^(1/2)/Q sqrt(y)` with solution `c^2 (x - a)^(2nu+2delta)`.
///
/// `P = (x - a)^(2nu+2delta)`, `Q = (x - q^(nu+2delta) a)^(nu)`,
/// `c = lambda Gamma_q(nu+2delta+1)/Gamma_q(2nu+2delta+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtPower<T: Real = f64> {
    pub nu: T,
    pub delta: T,
    pub lambda: T,
    pub a: T,
    pub params: QParams<T>,
}

impl<T: Real> SqrtPower<T> {
    pub fn new(nu: T, delta: T, lambda: T, a: T, params: QParams<T>) -> Result<Self> {
        if !(nu > T::zero() && delta >= T::zero() && lambda.is_finite()) {
            return Err(invalid(format!("need nu > 0 and delta >= 0, got nu = {nu}, delta = {delta}")));
        }
        Ok(Self { nu, delta, lambda, a, params })
    }

    pub fn coefficient(&self) -> Result<T> {
        let two = T::lit(2.0);
        let one = T::one();
        Ok(self.lambda * q_gamma(&self.params, self.nu + two * self.delta + one)?
            / q_gamma(&self.params, two * self.nu + two * self.delta + one)?)
    }

    pub fn rhs(&self) -> Result<Rhs<T>> {
        let s = *self;
        s.coefficient()?;
        let two = T::lit(2.0);
        let shifted = s.params.pow(s.nu + two * s.delta) * s.a;
        Ok(Arc::new(move |x, y| {
            let p = q_power_basis(&s.params, x, s.a, two * (s.nu + s.delta)).unwrap_or(T::nan());
            let qv = q_power_basis(&s.params, x, shifted, s.nu).unwrap_or(T::nan());
            s.lambda * p.sqrt() / qv * y.sqrt()
        }))
    }

    pub fn exact(&self, x: T) -> Result<T> {
        let c = self.coefficient()?;
        Ok(c * c * q_power_basis(&self.params, x, self.a, T::lit(2.0) * (self.nu + self.delta))?)
    }
}
