//! Geometric lattices, grid functions, the Jackson integral and q-differences.
//!
//! A grid anchored at `b` with ratio `q` and depth `M` holds the points
//! `x_m = b q^m` for `m = 0..=M`. Index 0 is the right end point; larger
//! indices move toward the origin.

use std::ops::RangeInclusive;

use log::warn;

use crate::error::{invalid, Error, Result};
use crate::qcore::{to_f64, QParams};
use crate::real::Real;

pub const MIN_DEPTH: usize = 8;
pub const DEFAULT_DEPTH: usize = 200;

/// How lattice sums from the origin treat the points below `x_M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// Continue the samples geometrically from the two deepest points.
    #[default]
    Geometric,
    /// Drop everything below `x_M`.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGrid<T: Real = f64> {
    b: T,
    depth: usize,
    params: QParams<T>,
    tail: TailModel,
}

impl<T: Real> LatticeGrid<T> {
    pub fn new(b: T, depth: usize, params: QParams<T>) -> Result<Self> {
        if !(b > T::zero() && b.is_finite()) {
            return Err(invalid(format!("anchor b must be positive, got {b}")));
        }
        if depth < MIN_DEPTH {
            return Err(Error::Depth { depth, reason: format!("minimum depth is {MIN_DEPTH}") });
        }
        Ok(Self { b, depth, params, tail: TailModel::default() })
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.depth + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn params(&self) -> &QParams<T> {
        &self.params
    }

    pub fn q(&self) -> T {
        self.params.q()
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    /// `x_m = b q^m`.
    pub fn x(&self, m: usize) -> T {
        self.b * self.params.q().powi(m as i32)
    }

    pub fn points(&self) -> Vec<T> {
        (0..=self.depth).map(|m| self.x(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(usize);

impl LatticePoint {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Lower limit of an operator: the origin or a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lower {
    Zero,
    Point(LatticePoint),
}

impl Lower {
    pub fn at(index: usize) -> Self {
        Lower::Point(LatticePoint(index))
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Lower::Zero)
    }

    pub fn value<T: Real>(self, g: &LatticeGrid<T>) -> T {
        match self {
            Lower::Zero => T::zero(),
            Lower::Point(p) => g.x(p.0),
        }
    }

    /// Deepest index that belongs to `[a, b]`.
    pub fn last_index(self, depth: usize) -> usize {
        match self {
            Lower::Zero => depth,
            Lower::Point(p) => p.0,
        }
    }

    /// Exclusive end of the summation range of an integral from this limit.
    pub(crate) fn sum_end(self, depth: usize) -> usize {
        match self {
            Lower::Zero => depth + 1,
            Lower::Point(p) => p.0,
        }
    }
}

/// Resolves `a` to the origin or to the lattice point within 1e-9 relative.
pub fn lattice_locate<T: Real>(g: &LatticeGrid<T>, a: T) -> Result<Lower> {
    if a == T::zero() {
        return Ok(Lower::Zero);
    }
    let off = || Error::OffLattice { value: to_f64(a) };
    if !(a > T::zero() && a <= g.b * (T::one() + T::lit(1e-12))) {
        return Err(off());
    }
    let m = ((a / g.b).ln() / g.params.ln_q()).round();
    let m = m.to_usize().ok_or_else(off)?;
    if m > g.depth || (g.x(m) - a).abs() > T::lit(1e-9) * a {
        return Err(off());
    }
    Ok(Lower::at(m))
}

/// Values on a lattice, indexed like the grid.
///
/// Operators with a lower limit `a > 0` return zero below `a`; `domain_end`
/// records the deepest in-domain index. `padded` counts deep indices whose
/// values were produced by end padding rather than by the operator itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Real = f64> {
    grid: LatticeGrid<T>,
    values: Vec<T>,
    domain_end: usize,
    padded: usize,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: LatticeGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Sample { index });
        }
        let domain_end = grid.depth;
        Ok(Self { grid, values, domain_end, padded: 0 })
    }

    pub fn zeros(grid: LatticeGrid<T>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values, domain_end: grid.depth, padded: 0 }
    }

    pub(crate) fn from_parts(grid: LatticeGrid<T>, values: Vec<T>, domain_end: usize, padded: usize) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, domain_end, padded }
    }

    /// Marks indices deeper than `end` as outside the domain and zeroes them.
    pub fn with_domain_end(mut self, end: usize) -> Self {
        let end = end.min(self.grid.depth);
        for v in self.values.iter_mut().skip(end + 1) {
            *v = T::zero();
        }
        self.domain_end = end;
        self
    }

    pub fn grid(&self) -> &LatticeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn value(&self, m: usize) -> T {
        self.values[m]
    }

    pub fn x(&self, m: usize) -> T {
        self.grid.x(m)
    }

    pub fn domain_end(&self) -> usize {
        self.domain_end
    }

    pub fn padded(&self) -> usize {
        self.padded
    }

    /// Deepest index that is both in the domain and not padding.
    pub fn trusted_end(&self) -> usize {
        self.domain_end.min(self.grid.depth.saturating_sub(self.padded))
    }

    pub fn trusted_range(&self) -> RangeInclusive<usize> {
        0..=self.trusted_end()
    }

    pub fn map(&self, f: impl Fn(T, T) -> T) -> Self {
        let values = self.values.iter().enumerate().map(|(m, &v)| f(self.grid.x(m), v)).collect();
        Self { values, ..self.clone() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            grid: self.grid,
            values,
            domain_end: self.domain_end.min(other.domain_end),
            padded: self.padded.max(other.padded),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|_, v| c * v)
    }

    /// Largest absolute value over `range`.
    pub fn max_abs(&self, range: RangeInclusive<usize>) -> T {
        self.values[range].iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// CSV with header `m,x,value`; floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "x", "value"]).expect("in-memory write");
        for (m, v) in self.values.iter().enumerate() {
            w.write_record([m.to_string(), format!("{:.16e}", self.grid.x(m)), format!("{:.16e}", v)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Parses the output of [`GridFunction::to_csv`] back onto `grid`.
    pub fn from_csv(grid: LatticeGrid<T>, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers != vec!["m", "x", "value"] {
            return Err(Error::Parse(format!("unexpected header {headers:?}")));
        }
        let mut values = Vec::with_capacity(grid.len());
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("row {row}: missing field {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {row}: {e}")))
            };
            let m: usize = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("row {row}: bad index")))?;
            if m != row {
                return Err(Error::Parse(format!("row {row} carries index {m}")));
            }
            let x = T::from_f64(field(1)?).unwrap();
            let expect = grid.x(m);
            if (x - expect).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) * expect {
                return Err(Error::GridMismatch(format!("row {row}: x = {x}, grid has {expect}")));
            }
            values.push(T::from_f64(field(2)?).unwrap());
        }
        Self::new(grid, values)
    }
}

/// Samples `f` at every lattice point.
pub fn sample<T: Real>(g: &LatticeGrid<T>, f: impl Fn(T) -> T) -> Result<GridFunction<T>> {
    let mut values = Vec::with_capacity(g.len());
    for m in 0..=g.depth {
        let v = f(g.x(m));
        if !v.is_finite() {
            return Err(Error::Sample { index: m });
        }
        values.push(v);
    }
    GridFunction::new(*g, values)
}

/// Jackson q-derivative `(u(x) - u(qx)) / ((1 - q) x)`; the deepest value is
/// copied from its neighbour.
pub fn q_derivative<T: Real>(u: &GridFunction<T>) -> GridFunction<T> {
    let g = u.grid;
    let one_minus_q = T::one() - g.q();
    let mut values: Vec<T> = (0..g.depth).map(|m| (u.values[m] - u.values[m + 1]) / (one_minus_q * g.x(m))).collect();
    values.push(values[g.depth - 1]);
    GridFunction::from_parts(g, values, u.domain_end, u.padded + 1)
}

pub fn q_derivative_n<T: Real>(u: &GridFunction<T>, n: usize) -> Result<GridFunction<T>> {
    if n >= u.grid.depth {
        return Err(Error::Depth { depth: u.grid.depth, reason: format!("derivative of order {n}") });
    }
    let mut out = u.clone();
    for _ in 0..n {
        out = q_derivative(&out);
    }
    Ok(out)
}

/// A Jackson sum with the magnitude of the first omitted term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonSum<T> {
    pub value: T,
    pub tail_bound: T,
    pub tail_warning: bool,
}

/// `int_lower^(x_upper) u d_q t`. For a lattice lower limit the sum is finite
/// and exact; from the origin the points below `x_M` are dropped and a
/// warning is logged when the dropped part may exceed `eps_series |value|`.
pub fn jackson_integral_detailed<T: Real>(u: &GridFunction<T>, lower: Lower, upper: usize) -> Result<JacksonSum<T>> {
    let g = &u.grid;
    if upper > g.depth {
        return Err(invalid(format!("upper index {upper} beyond depth {}", g.depth)));
    }
    let end = lower.sum_end(g.depth);
    if end < upper {
        return Err(invalid(format!("lower limit index {} is above upper index {upper}", end)));
    }
    let one_minus_q = T::one() - g.q();
    let value = one_minus_q * (upper..end).map(|i| g.x(i) * u.values[i]).sum::<T>();
    let (tail_bound, tail_warning) = match lower {
        Lower::Point(_) => (T::zero(), false),
        Lower::Zero => {
            let bound = one_minus_q * g.x(g.depth) * u.values[g.depth].abs();
            let warn_now = bound > g.params().eps_series() * value.abs();
            if warn_now {
                warn!("Jackson integral tail bound {bound:e} exceeds eps_series relative to {value:e}");
            }
            (bound, warn_now)
        }
    };
    Ok(JacksonSum { value, tail_bound, tail_warning })
}

pub fn jackson_integral<T: Real>(u: &GridFunction<T>, lower: Lower, upper: usize) -> Result<T> {
    jackson_integral_detailed(u, lower, upper).map(|s| s.value)
}

/// `L1_q` norm over `[lower, x_upper]`.
pub fn l1q_norm<T: Real>(u: &GridFunction<T>, lower: Lower, upper: usize) -> Result<T> {
    jackson_integral(&u.map(|_, v| v.abs()), lower, upper)
}
