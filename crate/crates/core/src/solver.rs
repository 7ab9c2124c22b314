//! Cauchy problems for the bi-ordinal Hilfer q-derivative.
//!
//! `D y = f(x, y)` with initial data `xi_k`, `k = 1..n`, is solved through the
//! equivalent Volterra equation `y = y0 + I^nu f(., y)`. Picard iteration runs
//! on consecutive lattice subintervals, each short enough for the iteration
//! map to be a contraction. Linear problems from the origin also have a
//! closed form in terms of q-Mittag-Leffler series.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::qcore::{q_gamma, q_pochhammer_qpow, q_power_basis, q_power_basis_qpow, to_f64, QParams};
use crate::qfracops::{hilfer_derivative, integral_kernel, rl_integral, FracOrders};
use crate::qgrid::{jackson_integral, lattice_locate, GridFunction, LatticeGrid, Lower, TailModel};
use crate::qml::{ml_eval_detailed, MLSpec};
use crate::real::Real;
use crate::tail::{self, TailFit};

pub type Rhs<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
pub type Forcing<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Safety margin used when growing a subinterval.
pub const SPLIT_MARGIN: f64 = 0.9;

#[derive(Clone)]
pub struct CauchyProblem<T: Real = f64> {
    orders: FracOrders<T>,
    a: T,
    b: T,
    rhs: Rhs<T>,
    xi: Vec<T>,
    lipschitz: T,
}

impl<T: Real> fmt::Debug for CauchyProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("orders", &self.orders)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("xi", &self.xi)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl<T: Real> CauchyProblem<T> {
    pub fn new(orders: FracOrders<T>, a: T, b: T, rhs: Rhs<T>, xi: Vec<T>, lipschitz: T) -> Result<Self> {
        if !(a >= T::zero() && b > a && b.is_finite()) {
            return Err(invalid(format!("need 0 <= a < b, got a = {a}, b = {b}")));
        }
        if xi.len() != orders.n() as usize {
            return Err(invalid(format!("expected {} initial values, got {}", orders.n(), xi.len())));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial values must be finite"));
        }
        if !(lipschitz > T::zero() && lipschitz.is_finite()) {
            return Err(invalid(format!("Lipschitz constant must be positive, got {lipschitz}")));
        }
        Ok(Self { orders, a, b, rhs, xi, lipschitz })
    }

    pub fn orders(&self) -> &FracOrders<T> {
        &self.orders
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn rhs(&self) -> &Rhs<T> {
        &self.rhs
    }
}

/// `D y - lambda y = f(x)`.
#[derive(Clone)]
pub struct LinearProblem<T: Real = f64> {
    orders: FracOrders<T>,
    a: T,
    b: T,
    lambda: T,
    forcing: Forcing<T>,
    xi: Vec<T>,
}

impl<T: Real> fmt::Debug for LinearProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearProblem")
            .field("orders", &self.orders)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("lambda", &self.lambda)
            .field("xi", &self.xi)
            .finish_non_exhaustive()
    }
}

impl<T: Real> LinearProblem<T> {
    /// Rejects `|lambda| b^nu (1 - q)^nu >= 1`, where the series solution diverges.
    pub fn new(
        orders: FracOrders<T>,
        a: T,
        b: T,
        lambda: T,
        forcing: Forcing<T>,
        xi: Vec<T>,
        params: &QParams<T>,
    ) -> Result<Self> {
        if !(a >= T::zero() && b > a && b.is_finite()) {
            return Err(invalid(format!("need 0 <= a < b, got a = {a}, b = {b}")));
        }
        if xi.len() != orders.n() as usize {
            return Err(invalid(format!("expected {} initial values, got {}", orders.n(), xi.len())));
        }
        let ratio = linear_ratio(lambda, b, orders.nu(), params.q());
        if !(ratio < T::one()) {
            return Err(Error::Divergence { ratio: to_f64(ratio) });
        }
        Ok(Self { orders, a, b, lambda, forcing, xi })
    }

    pub fn orders(&self) -> &FracOrders<T> {
        &self.orders
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn forcing(&self) -> &Forcing<T> {
        &self.forcing
    }

    /// The same equation as a Cauchy problem with `f(x, y) = lambda y + forcing(x)`.
    pub fn to_cauchy(&self) -> Result<CauchyProblem<T>> {
        let (lambda, forcing) = (self.lambda, self.forcing.clone());
        let rhs: Rhs<T> = Arc::new(move |x, y| lambda * y + forcing(x));
        let lip = self.lambda.abs().max(T::epsilon());
        CauchyProblem::new(self.orders, self.a, self.b, rhs, self.xi.clone(), lip)
    }
}

fn linear_ratio<T: Real>(lambda: T, b: T, nu: T, q: T) -> T {
    lambda.abs() * (b * (T::one() - q)).powf(nu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T: Real = f64> {
    pub y: GridFunction<T>,
    pub iterations_per_interval: Vec<usize>,
    pub omega_per_interval: Vec<T>,
    /// `L1_q` norm of `D(y - y0) - f(., y)` over `(a, b]`.
    pub residual_l1: T,
    pub residual_max: T,
    /// Lattice index of the lower end of the first subinterval followed by
    /// the upper end of every subinterval. From the origin the first entry
    /// is the grid depth.
    pub subinterval_boundaries: Vec<usize>,
    /// `L1_q` norms of successive Picard steps, per subinterval.
    pub step_norms: Vec<Vec<T>>,
}

/// First iterate on each subinterval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialIterate<T> {
    InitialTerm,
    Constant(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub start: InitialIterate<T>,
}

fn check_grid<T: Real>(b: T, g: &LatticeGrid<T>) -> Result<()> {
    if (g.b() - b).abs() > T::lit(1e-12) * b {
        return Err(Error::GridMismatch(format!("grid anchor {} differs from b = {b}", g.b())));
    }
    Ok(())
}

/// `sum_k xi_k / Gamma_q(gamma - k + 1) (x - a)^(gamma - k)`, zero below `a`.
pub fn initial_term<T: Real>(p: &CauchyProblem<T>, g: &LatticeGrid<T>) -> Result<GridFunction<T>> {
    check_grid(p.b, g)?;
    let lower = lattice_locate(g, p.a)?;
    let last = lower.last_index(g.depth());
    let gamma = p.orders.gamma();
    let params = g.params();
    let mut values = vec![T::zero(); g.len()];
    for (k, &xi) in p.xi.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        let e = gamma - T::from_usize(k + 1).unwrap();
        let coef = q_gamma(params, e + T::one())
            .map_err(|err| Error::Pole(format!("initial term k = {}: {err}", k + 1)))
            .map(|gm| xi / gm)?;
        for (m, v) in values.iter_mut().enumerate().take(last + 1) {
            let x = g.x(m);
            let basis = match lower {
                Lower::Zero => x.powf(e),
                Lower::Point(pt) => q_power_basis_qpow(params, x, T::from_usize(pt.index() - m).unwrap(), e)?,
            };
            *v = *v + coef * basis;
        }
    }
    Ok(GridFunction::new(*g, values)?.with_domain_end(last))
}

/// `omega = A (hi - q lo)^(nu) / Gamma_q(nu + 1)`, the `L1_q` norm of `A I^nu`
/// acting on functions carried by the lattice points of `[lo, hi]`.
pub fn contraction_constant<T: Real>(p: &CauchyProblem<T>, params: &QParams<T>, lo: T, hi: T) -> Result<T> {
    if !(lo >= T::zero() && hi >= lo && hi > T::zero()) {
        return Err(invalid(format!("need 0 <= lo <= hi with hi > 0, got [{lo}, {hi}]")));
    }
    let nu = p.orders.nu();
    let width = q_power_basis(params, hi, params.q() * lo, nu)?;
    Ok(p.lipschitz * width / q_gamma(params, nu + T::one())?)
}

struct Interval<T> {
    /// Deepest unknown index.
    deep: usize,
    /// Shallowest unknown index.
    top: usize,
    omega: T,
}

fn split<T: Real>(p: &CauchyProblem<T>, g: &LatticeGrid<T>, lower: Lower) -> Result<Vec<Interval<T>>> {
    let params = g.params();
    let margin = T::lit(SPLIT_MARGIN);
    let mut out = Vec::new();
    // The unknowns of an interval are the lattice points `lo..=hi`, so the
    // operator restricted to them is `I^nu` from `q lo` and `omega` is its
    // exact induced norm. From the origin the first interval reaches 0.
    let mut deep = match lower {
        Lower::Zero => g.depth(),
        Lower::Point(pt) => pt.index() - 1,
    };
    let mut lo_val = if lower.is_zero() { T::zero() } else { g.x(deep) };
    loop {
        let omega1 = contraction_constant(p, params, lo_val, g.x(deep))?;
        if omega1 >= T::one() {
            return Err(Error::NoContraction { lo: to_f64(lo_val), hi: to_f64(g.x(deep)), omega: to_f64(omega1) });
        }
        let mut top = deep;
        let mut omega = omega1;
        while top > 0 {
            let next = contraction_constant(p, params, lo_val, g.x(top - 1))?;
            if next >= margin {
                break;
            }
            top -= 1;
            omega = next;
        }
        out.push(Interval { deep, top, omega });
        if top == 0 {
            return Ok(out);
        }
        deep = top - 1;
        lo_val = g.x(deep);
    }
}

pub fn picard_solve<T: Real>(p: &CauchyProblem<T>, g: &LatticeGrid<T>, tol: T, max_iter: usize) -> Result<Solution<T>> {
    picard_solve_with(p, g, &PicardOptions { tol, max_iter, start: InitialIterate::InitialTerm })
}

fn eval_rhs<T: Real>(p: &CauchyProblem<T>, x: T, y: T) -> Result<T> {
    let v = (p.rhs)(x, y);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("right-hand side is not finite at x = {x}, y = {y}")))
    }
}

/// Tail of `sum_i x_i K_(i-m) F_i` below the grid, for every `m`.
fn kernel_tail<T: Real>(
    g: &LatticeGrid<T>,
    params: &QParams<T>,
    nu: T,
    f_prev: T,
    f_last: T,
) -> Result<Option<Vec<T>>> {
    if g.tail() != TailModel::Geometric {
        return Ok(None);
    }
    let r = match tail::fit(&[f_prev, f_last], g.q()) {
        TailFit::Ratio(r) => r,
        _ => return Ok(None),
    };
    let rho = g.q() * r;
    let len = g.depth() + tail::extension_len(rho) + 2;
    let k = integral_kernel(params, nu, len)?;
    let lead = g.x(g.depth()) * f_last;
    Ok(Some(tail::closure_sums(&k, rho, T::one(), g.depth()).into_iter().map(|s| lead * s).collect()))
}

pub fn picard_solve_with<T: Real>(
    p: &CauchyProblem<T>,
    g: &LatticeGrid<T>,
    opts: &PicardOptions<T>,
) -> Result<Solution<T>> {
    if !(opts.tol > T::zero()) || opts.max_iter == 0 {
        return Err(invalid("tolerance must be positive and max_iter at least 1"));
    }
    let lower = lattice_locate(g, p.a)?;
    let y0 = initial_term(p, g)?;
    let intervals = split(p, g, lower)?;
    let params = *g.params();
    let depth = g.depth();
    let nu = p.orders.nu();
    let one_minus_q = T::one() - g.q();
    let end = match lower {
        Lower::Zero => depth + 1,
        Lower::Point(pt) => pt.index(),
    };
    let kernel = integral_kernel(&params, nu, end + 1)?;
    let scale = one_minus_q / q_gamma(&params, nu)?;
    let coef: Vec<T> = (0..=depth).map(|m| scale * g.x(m).powf(nu - T::one())).collect();
    let xs = g.points();

    let mut y: Vec<T> = y0.values().to_vec();
    let mut f = vec![T::zero(); depth + 1];
    let mut fixed_tail: Option<Vec<T>> = None;
    let mut iterations = Vec::new();
    let mut omegas = Vec::new();
    let mut steps_all = Vec::new();
    let mut boundaries = vec![match lower {
        Lower::Zero => depth,
        Lower::Point(pt) => pt.index(),
    }];

    for (n_int, iv) in intervals.iter().enumerate() {
        let first_from_origin = n_int == 0 && lower.is_zero();
        let unknown = iv.top..=iv.deep;
        let known: Vec<T> = unknown
            .clone()
            .map(|m| {
                let s: T = (iv.deep + 1..end).map(|i| xs[i] * kernel[i - m] * f[i]).sum();
                s + fixed_tail.as_ref().map_or(T::zero(), |t| t[depth - m])
            })
            .collect();
        for m in unknown.clone() {
            y[m] = match opts.start {
                InitialIterate::InitialTerm => y0.value(m),
                InitialIterate::Constant(c) => c,
            };
        }
        let mut steps = Vec::new();
        let mut iter = 0;
        loop {
            for m in unknown.clone() {
                f[m] = eval_rhs(p, xs[m], y[m])?;
            }
            let tail_now = if first_from_origin && iv.top < depth {
                kernel_tail(g, &params, nu, f[depth - 1], f[depth])?
            } else {
                None
            };
            let mut step = T::zero();
            let mut next = Vec::with_capacity(iv.deep - iv.top + 1);
            for (slot, m) in unknown.clone().enumerate() {
                let mut s: T = (m..=iv.deep).map(|i| xs[i] * kernel[i - m] * f[i]).sum();
                s = s + known[slot] + tail_now.as_ref().map_or(T::zero(), |t| t[depth - m]);
                let v = y0.value(m) + coef[m] * s;
                step = step + xs[m] * (v - y[m]).abs();
                next.push(v);
            }
            for (slot, m) in unknown.clone().enumerate() {
                y[m] = next[slot];
            }
            let step = one_minus_q * step;
            steps.push(step);
            iter += 1;
            if step < opts.tol {
                break;
            }
            if iter >= opts.max_iter {
                return Err(Error::MaxIter { iterations: iter, last_step: to_f64(step) });
            }
        }
        for m in unknown {
            f[m] = eval_rhs(p, xs[m], y[m])?;
        }
        if first_from_origin {
            fixed_tail = kernel_tail(g, &params, nu, f[depth - 1], f[depth])?;
        }
        iterations.push(iter);
        omegas.push(iv.omega);
        steps_all.push(steps);
        boundaries.push(iv.top);
    }

    let last = lower.last_index(depth);
    for v in y.iter_mut().skip(last + 1) {
        *v = T::zero();
    }
    let y = GridFunction::new(*g, y)?.with_domain_end(last);
    let (residual_l1, residual_max) = ode_residual(p, &y, &y0, lower)?;
    Ok(Solution {
        y,
        iterations_per_interval: iterations,
        omega_per_interval: omegas,
        residual_l1,
        residual_max,
        subinterval_boundaries: boundaries,
        step_norms: steps_all,
    })
}

/// Values of `f(x, y(x))` on `(a, b]`, zero elsewhere.
fn rhs_values<T: Real>(p: &CauchyProblem<T>, y: &GridFunction<T>, lower: Lower) -> Result<GridFunction<T>> {
    let g = y.grid();
    let end = lower.sum_end(g.depth());
    let mut values = vec![T::zero(); g.len()];
    for (m, v) in values.iter_mut().enumerate().take(end) {
        *v = eval_rhs(p, g.x(m), y.value(m))?;
    }
    Ok(GridFunction::new(*g, values)?.with_domain_end(lower.last_index(g.depth())))
}

/// `D(y - y0) - f(., y)` in `L1_q` and max norm over `(a, b]`.
///
/// The initial term is removed before differentiating: it lies in the kernel
/// of the derivative, and on a lattice from `a > 0` its discrete image is a
/// boundary layer rather than zero.
fn ode_residual<T: Real>(
    p: &CauchyProblem<T>,
    y: &GridFunction<T>,
    y0: &GridFunction<T>,
    lower: Lower,
) -> Result<(T, T)> {
    let g = y.grid();
    let d = hilfer_derivative(&y.sub(y0)?, lower, &p.orders)?;
    let f = rhs_values(p, y, lower)?;
    let r = d.sub(&f)?;
    let end = lower.sum_end(g.depth());
    let r_abs = r.map(|_, v| v.abs());
    let l1 = jackson_integral(&r_abs, lower, 0)?;
    let max = if end == 0 { T::zero() } else { r.max_abs(0..=end - 1) };
    Ok((l1, max))
}

/// Closed-form solution of a linear problem from the origin.
pub fn linear_solve<T: Real>(p: &LinearProblem<T>, g: &LatticeGrid<T>) -> Result<Solution<T>> {
    check_grid(p.b, g)?;
    if p.a != T::zero() {
        return Err(invalid("the closed-form linear solution requires a = 0"));
    }
    let params = *g.params();
    let (nu, gamma) = (p.orders.nu(), p.orders.gamma());
    let ratio = linear_ratio(p.lambda, p.b, nu, g.q());
    if !(ratio < T::one()) {
        return Err(Error::Divergence { ratio: to_f64(ratio) });
    }
    let depth = g.depth();
    let one_minus_q = T::one() - g.q();
    let mut xs = g.points();
    let mut fs = Vec::with_capacity(depth + 1);
    for &x in &xs {
        let v = (p.forcing)(x);
        if !v.is_finite() {
            return Err(Error::Domain(format!("forcing is not finite at x = {x}")));
        }
        fs.push(v);
    }
    if g.tail() == TailModel::Geometric {
        if let TailFit::Ratio(r) = tail::fit(&fs, g.q()) {
            let ext = tail::extension_len(g.q() * r);
            for _ in 0..ext {
                let (xl, fl) = (*xs.last().unwrap(), *fs.last().unwrap());
                xs.push(xl * g.q());
                fs.push(fl * r);
            }
        }
    }
    let len = xs.len();

    // Number of series terms, fixed by the largest argument.
    let spec_nn = MLSpec::new(nu, nu, p.lambda, params)?;
    let terms = if p.lambda == T::zero() { 1 } else { ml_eval_detailed(&spec_nn, p.b, T::zero())?.terms + 8 };
    // z^k / Gamma_q(nu k + nu) = z^k / Gamma_q(nu) prod_(i<=k) ratio[i], where
    // ratio[i] = (1-q)^nu / (q^(nu i); q)_nu keeps the factors in range.
    let recip0 = T::one() / q_gamma(&params, nu)?;
    let scaled = (T::one() - g.q()).powf(nu);
    let mut ratio_k = vec![T::zero(); terms];
    for (k, r) in ratio_k.iter_mut().enumerate().skip(1) {
        *r = scaled / q_pochhammer_qpow(&params, nu * T::from_usize(k).unwrap(), nu)?;
    }

    // shift[l][j] = (q^((l+1) nu + j); q)_nu.
    let mut shift = vec![vec![T::zero(); len]; terms];
    for (l, row) in shift.iter_mut().enumerate() {
        let e0 = nu * T::from_usize(l + 1).unwrap();
        let mut cur = q_pochhammer_qpow(&params, e0, nu)?;
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = cur;
            let e = e0 + T::from_usize(j).unwrap();
            cur = cur * params.one_minus_pow(e + nu) / params.one_minus_pow(e);
        }
    }
    let kernel = integral_kernel(&params, nu, len)?;

    let mut values = vec![T::zero(); depth + 1];
    let mut coef = vec![T::zero(); terms];
    for (m, out) in values.iter_mut().enumerate() {
        let x = xs[m];
        let z = p.lambda * x.powf(nu);
        coef[0] = recip0;
        for k in 1..terms {
            coef[k] = coef[k - 1] * z * ratio_k[k];
        }
        let mut s = T::zero();
        for j in 0..len - m {
            let mut pk = T::one();
            let mut e = coef[0];
            for k in 1..terms {
                pk = pk * shift[k - 1][j];
                e = e + coef[k] * pk;
            }
            s = s + xs[m + j] * kernel[j] * e * fs[m + j];
        }
        let mut v = one_minus_q * x.powf(nu - T::one()) * s;
        for (k, &xi) in p.xi.iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            let shift_b = gamma - T::from_usize(k).unwrap();
            let spec = MLSpec::new(nu, shift_b, p.lambda, params)?;
            let e = ml_eval_detailed(&spec, x, T::zero())?.value;
            v = v + xi * x.powf(gamma - T::from_usize(k + 1).unwrap()) * e;
        }
        *out = v;
    }
    let y = GridFunction::new(*g, values)?;
    let cauchy = p.to_cauchy()?;
    let y0 = initial_term(&cauchy, g)?;
    let (residual_l1, residual_max) = ode_residual(&cauchy, &y, &y0, Lower::Zero)?;
    Ok(Solution {
        y,
        iterations_per_interval: Vec::new(),
        omega_per_interval: Vec::new(),
        residual_l1,
        residual_max,
        subinterval_boundaries: vec![depth, 0],
        step_norms: Vec::new(),
    })
}

/// Residuals of both formulations for a candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport<T> {
    /// `L1_q` norm of `y - y0 - I^nu f(., y)`.
    pub integral_residual: T,
    /// `L1_q` norm of `D(y - y0) - f(., y)`.
    pub differential_residual: T,
    /// `|D_q^(n-k) I^(n-gamma) y - xi_k|` at the lattice point nearest `a`, `k = 1..n`.
    pub initial_residuals: Vec<T>,
    pub tol: T,
    pub pass: bool,
}

pub fn verify_equivalence<T: Real>(p: &CauchyProblem<T>, y: &GridFunction<T>, tol: T) -> Result<EquivalenceReport<T>> {
    let g = y.grid();
    check_grid(p.b, g)?;
    let lower = lattice_locate(g, p.a)?;
    let y0 = initial_term(p, g)?;
    let f = rhs_values(p, y, lower)?;
    let iv = rl_integral(&f, lower, p.orders.nu())?;
    let r1 = y.sub(&y0)?.sub(&iv)?.map(|_, v| v.abs());
    let integral_residual = jackson_integral(&r1, lower, 0)?;
    let (differential_residual, _) = ode_residual(p, y, &y0, lower)?;

    let n = p.orders.n() as usize;
    let inner_order = T::from_usize(n).unwrap() - p.orders.gamma();
    let inner = if inner_order > T::int_window() { rl_integral(y, lower, inner_order)? } else { y.clone() };
    let base = match lower {
        Lower::Zero => g.depth(),
        Lower::Point(pt) => pt.index().saturating_sub(1),
    };
    let mut initial_residuals = Vec::with_capacity(n);
    for k in 1..=n {
        let order = n - k;
        let m = base.saturating_sub(order);
        let v = forward_difference(&inner, m, order);
        initial_residuals.push((v - p.xi[k - 1]).abs());
    }
    let pass = integral_residual < tol && differential_residual < tol && initial_residuals.iter().all(|r| *r < tol);
    Ok(EquivalenceReport { integral_residual, differential_residual, initial_residuals, tol, pass })
}

/// `D_q^order u` at index `m`, using samples `m..=m + order`.
fn forward_difference<T: Real>(u: &GridFunction<T>, m: usize, order: usize) -> T {
    let g = u.grid();
    let one_minus_q = T::one() - g.q();
    let mut vals: Vec<T> = (m..=m + order).map(|i| u.value(i.min(g.depth()))).collect();
    for level in 0..order {
        for i in 0..vals.len() - 1 - level {
            vals[i] = (vals[i] - vals[i + 1]) / (one_minus_q * g.x(m + i));
        }
    }
    vals[0]
}

/// Largest `|f(x, y1) - f(x, y2)| / |y1 - y2|` over a sampled box; a
/// diagnostic only.
pub fn estimate_lipschitz<T: Real>(p: &CauchyProblem<T>, g: &LatticeGrid<T>, y_lo: T, y_hi: T, samples: usize) -> T {
    let samples = samples.max(2);
    let step = (y_hi - y_lo) / T::from_usize(samples - 1).unwrap();
    let lower = lattice_locate(g, p.a).map(|l| l.sum_end(g.depth())).unwrap_or(g.len());
    let mut best = T::zero();
    for m in 0..lower.min(g.len()) {
        let x = g.x(m);
        let mut prev: Option<(T, T)> = None;
        for i in 0..samples {
            let yv = y_lo + step * T::from_usize(i).unwrap();
            let fv = (p.rhs)(x, yv);
            if let Some((py, pf)) = prev {
                let ratio = ((fv - pf) / (yv - py)).abs();
                if ratio.is_finite() {
                    best = best.max(ratio);
                }
            }
            prev = Some((yv, fv));
        }
    }
    best
}
