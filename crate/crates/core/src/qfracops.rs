//! Fractional q-integrals and q-derivatives on a lattice.
//!
//! The fractional integral is the Jackson sum against the kernel
//! `(q^(j+1); q)_(alpha-1)`. Riemann-Liouville derivatives of non-integer
//! order are evaluated as a single lattice sum with the negative-order weights
//! `w_j = q^j (q^-alpha; q)_j / (q; q)_j`. On the lattice this equals
//! `D_q^n I^(n-alpha)`, but it avoids the `1 / x^n` amplification of rounding
//! errors that repeated differencing suffers near the origin.

use log::warn;

use crate::error::{invalid, Error, Result};
use crate::qcore::{q_gamma, q_pochhammer_qpow, QParams};
use crate::qgrid::{q_derivative, q_derivative_n, GridFunction, LatticeGrid, Lower, TailModel};
use crate::real::Real;
use crate::tail::{self, TailFit};

/// Orders of the bi-ordinal Hilfer derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrders<T: Real = f64> {
    alpha: T,
    beta: T,
    mu: T,
    n: u32,
}

impl<T: Real> FracOrders<T> {
    /// Requires `n - 1 < alpha, beta <= n` and `0 <= mu <= 1`.
    pub fn new(alpha: T, beta: T, mu: T, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let nf = T::from_u32(n).unwrap();
        let in_band = |v: T| v > nf - T::one() && v <= nf;
        if !in_band(alpha) {
            return Err(invalid(format!("alpha = {alpha} must lie in ({}, {n}]", n - 1)));
        }
        if !in_band(beta) {
            return Err(invalid(format!("beta = {beta} must lie in ({}, {n}]", n - 1)));
        }
        if !(mu >= T::zero() && mu <= T::one()) {
            return Err(invalid(format!("mu = {mu} must lie in [0, 1]")));
        }
        Ok(Self { alpha, beta, mu, n })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `gamma = beta + mu (n - beta)`.
    pub fn gamma(&self) -> T {
        self.beta + self.mu * (T::from_u32(self.n).unwrap() - self.beta)
    }

    /// `nu = beta + mu (alpha - beta)`.
    pub fn nu(&self) -> T {
        self.beta + self.mu * (self.alpha - self.beta)
    }
}

/// `K_j = (q^(j+1); q)_(alpha-1)` for `j < len`.
pub fn integral_kernel<T: Real>(p: &QParams<T>, alpha: T, len: usize) -> Result<Vec<T>> {
    let mut k = Vec::with_capacity(len);
    let mut cur = q_pochhammer_qpow(p, T::one(), alpha - T::one())?;
    for j in 0..len {
        k.push(cur);
        let jf = T::from_usize(j).unwrap();
        cur = cur * p.one_minus_pow(jf + alpha) / p.one_minus_pow(jf + T::one());
    }
    Ok(k)
}

/// `w_j = q^j (q^order; q)_j / (q; q)_j` for `j < len`.
pub fn lattice_weights<T: Real>(p: &QParams<T>, order: T, len: usize) -> Vec<T> {
    let mut qj = T::one();
    weight_factors(p, order, len)
        .into_iter()
        .map(|h| {
            let w = qj * h;
            qj = qj * p.q();
            w
        })
        .collect()
}

/// `(q^order; q)_j / (q; q)_j`, the weights without their `q^j` factor.
fn weight_factors<T: Real>(p: &QParams<T>, order: T, len: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(len);
    let mut cur = T::one();
    for j in 0..len {
        w.push(cur);
        let jf = T::from_usize(j).unwrap();
        let num = if (order + jf).as_integer() == Some(0) { T::zero() } else { p.one_minus_pow(order + jf) };
        cur = cur * num / p.one_minus_pow(jf + T::one());
    }
    w
}

/// Geometric continuation of `u` below the grid, when applicable.
fn closure<T: Real>(u: &GridFunction<T>, a: Lower) -> Option<T> {
    let g = u.grid();
    if !a.is_zero() || g.tail() != TailModel::Geometric {
        return None;
    }
    match tail::fit(u.values(), g.q()) {
        TailFit::Zero => None,
        TailFit::Ratio(r) => Some(r),
        TailFit::Unfit => {
            warn!("deepest samples do not follow a convergent power law; dropping the tail");
            None
        }
    }
}

fn check_grid<T: Real>(u: &GridFunction<T>, a: Lower) -> Result<()> {
    if let Lower::Point(p) = a {
        if p.index() > u.grid().depth() {
            return Err(invalid(format!("lower limit index {} beyond depth", p.index())));
        }
    }
    Ok(())
}

fn masked<T: Real>(grid: LatticeGrid<T>, mut values: Vec<T>, a: Lower, padded: usize) -> GridFunction<T> {
    let last = a.last_index(grid.depth());
    for v in values.iter_mut().skip(last + 1) {
        *v = T::zero();
    }
    GridFunction::from_parts(grid, values, last, padded)
}

/// Like [`masked`], for derivatives: the value at a lattice lower limit would
/// need the sample below it, so the trusted range stops one index above `a`.
fn masked_derivative<T: Real>(grid: LatticeGrid<T>, values: Vec<T>, a: Lower, padded: usize) -> GridFunction<T> {
    let out = masked(grid, values, a, padded);
    match a {
        Lower::Zero => out,
        Lower::Point(p) => out.with_domain_end(p.index().saturating_sub(1)),
    }
}

/// `sum_{i >= m} q^(i-m) h_(i-m) v_i` over the grid plus, when `ratio` is
/// set, the continuation `v_(M+i) = v_M ratio^i` below it.
///
/// The `q^(i-m)` factor stays outside `h` so that neither deep products nor
/// the tail coefficients underflow; the tail is summed with decay `q ratio`.
fn lattice_sums<T: Real>(
    g: &LatticeGrid<T>,
    v: &[T],
    a: Lower,
    factors: impl Fn(usize) -> Result<Vec<T>>,
    ratio: Option<T>,
) -> Result<Vec<T>> {
    let depth = g.depth();
    let q = g.q();
    let end = a.sum_end(depth);
    let ext = ratio.map_or(0, |r| tail::extension_len(q * r));
    let h = factors(end + ext + 2)?;
    let mut c = Vec::with_capacity(end);
    let mut qj = T::one();
    for &hj in h.iter().take(end) {
        c.push(qj * hj);
        qj = qj * q;
    }
    let tails = ratio.map(|r| tail::closure_sums(&h, q * r, T::one(), depth));
    let lead = v[depth];
    let mut out = vec![T::zero(); depth + 1];
    for (m, o) in out.iter_mut().enumerate().take(end) {
        let mut s: T = (m..end).map(|i| c[i - m] * v[i]).sum();
        if let Some(t) = &tails {
            let steps = depth - m;
            s = s + g.params().pow(T::from_usize(steps).unwrap()) * lead * t[steps];
        }
        *o = s;
    }
    Ok(out)
}

/// Riemann-Liouville fractional q-integral of order `alpha > 0` from `a`.
pub fn rl_integral<T: Real>(u: &GridFunction<T>, a: Lower, alpha: T) -> Result<GridFunction<T>> {
    check_grid(u, a)?;
    if !(alpha > T::zero()) {
        return Err(invalid(format!("integral order must be positive, got {alpha}")));
    }
    let g = *u.grid();
    let p = *g.params();
    let one_minus_q = T::one() - g.q();
    let sums = lattice_sums(&g, u.values(), a, |len| integral_kernel(&p, alpha, len), closure(u, a))?;
    let scale = one_minus_q / q_gamma(&p, alpha)?;
    let values = sums.iter().enumerate().map(|(m, &s)| scale * g.x(m).powf(alpha) * s).collect();
    Ok(masked(g, values, a, u.padded()))
}

/// Integer-order q-derivative. From the origin with geometric tails the
/// deepest difference uses the continued sample instead of padding.
fn integer_derivative<T: Real>(u: &GridFunction<T>, n: usize, a: Lower) -> Result<GridFunction<T>> {
    let g = *u.grid();
    if n >= g.depth() {
        return Err(Error::Depth { depth: g.depth(), reason: format!("derivative of order {n}") });
    }
    let mut cur = u.clone();
    for _ in 0..n {
        let ghost = match closure(&cur, a) {
            Some(r) => Some(cur.value(g.depth()) * r),
            None if a.is_zero() && g.tail() == TailModel::Geometric => {
                matches!(tail::fit(cur.values(), g.q()), TailFit::Zero).then_some(T::zero())
            }
            None => None,
        };
        let d = q_derivative(&cur);
        cur = match ghost {
            Some(next) => {
                let mut vals = d.into_values();
                let m = g.depth();
                vals[m] = (cur.value(m) - next) / ((T::one() - g.q()) * g.x(m));
                GridFunction::from_parts(g, vals, cur.domain_end(), cur.padded())
            }
            None => d,
        };
    }
    let padded = cur.padded();
    Ok(masked_derivative(g, cur.into_values(), a, padded))
}

/// Riemann-Liouville fractional q-derivative of order `alpha > 0` from `a`.
pub fn rl_derivative<T: Real>(u: &GridFunction<T>, a: Lower, alpha: T) -> Result<GridFunction<T>> {
    check_grid(u, a)?;
    if !(alpha > T::zero()) {
        return Err(invalid(format!("derivative order must be positive, got {alpha}")));
    }
    if let Some(n) = alpha.as_integer() {
        return integer_derivative(u, n as usize, a);
    }
    let g = *u.grid();
    let p = *g.params();
    let sums = lattice_sums(&g, u.values(), a, |len| Ok(weight_factors(&p, -alpha, len)), closure(u, a))?;
    let one_minus_q = T::one() - g.q();
    let values = sums.iter().enumerate().map(|(m, &s)| (one_minus_q * g.x(m)).powf(-alpha) * s).collect();
    Ok(masked_derivative(g, values, a, u.padded()))
}

/// `D_q^n I^(n - alpha)` evaluated literally, with end padding.
pub fn rl_derivative_composed<T: Real>(u: &GridFunction<T>, a: Lower, alpha: T) -> Result<GridFunction<T>> {
    check_grid(u, a)?;
    if !(alpha > T::zero()) {
        return Err(invalid(format!("derivative order must be positive, got {alpha}")));
    }
    let n = alpha.ceil().max(T::one());
    let n = match alpha.as_integer() {
        Some(k) => k as usize,
        None => n.to_usize().unwrap(),
    };
    let inner =
        if alpha.as_integer().is_some() { u.clone() } else { rl_integral(u, a, T::from_usize(n).unwrap() - alpha)? };
    let d = q_derivative_n(&inner, n)?;
    let padded = d.padded();
    Ok(masked_derivative(*u.grid(), d.into_values(), a, padded))
}

/// Caputo fractional q-derivative of order `0 < alpha <= 1`.
pub fn caputo_derivative<T: Real>(u: &GridFunction<T>, a: Lower, alpha: T) -> Result<GridFunction<T>> {
    check_grid(u, a)?;
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(invalid(format!("Caputo order must lie in (0, 1], got {alpha}")));
    }
    let d = integer_derivative(u, 1, a)?;
    if alpha.as_integer() == Some(1) {
        return Ok(d);
    }
    rl_integral(&d, a, T::one() - alpha)
}

/// Bi-ordinal Hilfer q-derivative `I^(gamma - nu) D^gamma`.
pub fn hilfer_derivative<T: Real>(u: &GridFunction<T>, a: Lower, ord: &FracOrders<T>) -> Result<GridFunction<T>> {
    let (gamma, nu) = (ord.gamma(), ord.nu());
    let d = rl_derivative(u, a, gamma)?;
    if gamma - nu > T::int_window() {
        rl_integral(&d, a, gamma - nu)
    } else {
        Ok(d)
    }
}

/// `I^(mu (n - alpha)) D_q^n I^((1 - mu)(n - beta))`, the defining composition.
pub fn hilfer_derivative_composed<T: Real>(
    u: &GridFunction<T>,
    a: Lower,
    ord: &FracOrders<T>,
) -> Result<GridFunction<T>> {
    let nf = T::from_u32(ord.n()).unwrap();
    let inner_order = (T::one() - ord.mu()) * (nf - ord.beta());
    let outer_order = ord.mu() * (nf - ord.alpha());
    let inner = if inner_order > T::int_window() { rl_integral(u, a, inner_order)? } else { u.clone() };
    let d = integer_derivative(&inner, ord.n() as usize, a)?;
    if outer_order > T::int_window() {
        rl_integral(&d, a, outer_order)
    } else {
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::sample;

    fn grid(q: f64, depth: usize) -> LatticeGrid<f64> {
        LatticeGrid::new(1.0, depth, QParams::new(q).unwrap()).unwrap()
    }

    #[test]
    fn orders_validated() {
        assert!(FracOrders::new(0.5, 0.5, 0.5, 1).is_ok());
        assert!(FracOrders::new(1.5, 0.5, 0.5, 1).is_err());
        assert!(FracOrders::new(0.5, 0.5, 1.5, 1).is_err());
        assert!(FracOrders::new(1.5, 1.2, 0.5, 2).is_ok());
        let o = FracOrders::<f64>::new(0.7, 0.4, 0.5, 1).unwrap();
        assert!((o.gamma() - 0.7).abs() < 1e-15);
        assert!((o.nu() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn first_order_integral_is_jackson_sum() {
        let g = grid(0.5, 40);
        let u = sample(&g, |x| x * x).unwrap();
        let i = rl_integral(&u, Lower::at(10), 1.0).unwrap();
        for m in 0..10 {
            let direct: f64 = (m..10).map(|k| 0.5 * g.x(k) * g.x(k) * g.x(k)).sum();
            assert!((i.value(m) - direct).abs() < 1e-15);
        }
        assert_eq!(i.value(11), 0.0);
        assert_eq!(i.domain_end(), 10);
    }

    #[test]
    fn weights_reproduce_first_difference() {
        let p = QParams::new(0.5).unwrap();
        let w: Vec<f64> = lattice_weights(&p, -1.0, 5);
        assert_eq!(w[0], 1.0);
        assert!((w[1] + 1.0).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn weight_and_composed_derivatives_agree_away_from_origin() {
        let g = grid(0.6, 60);
        let u = sample(&g, |x| x.powf(1.3) + 2.0).unwrap();
        let a = Lower::at(12);
        let d1 = rl_derivative(&u, a, 0.4).unwrap();
        let d2 = rl_derivative_composed(&u, a, 0.4).unwrap();
        for m in 0..=12 {
            assert!((d1.value(m) - d2.value(m)).abs() < 1e-12 * (1.0 + d1.value(m).abs()));
        }
    }
}
