//! TOML problem definitions for `qfrac solve`.
//!
//! ```toml
//! [grid]
//! b = 1.0
//! depth = 200
//! q = 0.5
//!
//! [orders]
//! alpha = 0.6
//! beta = 0.4
//! mu = 0.5
//! n = 1
//!
//! [problem]
//! a = 0.0
//! xi = [0.0]
//! lipschitz = 1.0
//!
//! [rhs]
//! kind = "example42"
//! lambda = 1.0
//! delta = 0.25
//!
//! [solver]
//! tol = 1e-12
//! max_iter = 500
//! residual_tol = 1e-5
//! start = 1.0
//! ```
//!
//! Unknown keys are rejected. `grid.eps_product`, `grid.eps_series`,
//! `grid.max_terms` and every `[solver]` key are optional; `solver.start`
//! replaces the initial term as first Picard iterate by a constant.

use serde::{Deserialize, Serialize};

use qfrac::problems::{linear_rhs, polynomial_rhs, power_forcing, Monomial, SingularSquare, SqrtPower};
use qfrac::qcore::QParams;
use qfrac::qfracops::FracOrders;
use qfrac::qgrid::LatticeGrid;
use qfrac::solver::{CauchyProblem, InitialIterate, LinearProblem, PicardOptions, Rhs};
use qfrac::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    pub orders: OrdersConfig,
    pub problem: ProblemData,
    pub rhs: RhsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub b: f64,
    pub depth: usize,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_product: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_series: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemData {
    pub a: f64,
    pub xi: Vec<f64>,
    pub lipschitz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coef: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub coef: f64,
    #[serde(default)]
    pub x_power: f64,
    #[serde(default)]
    pub y_power: u32,
}

/// `f(x, y)` selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RhsConfig {
    /// `lambda y + sum coef x^power`.
    Linear {
        lambda: f64,
        #[serde(default)]
        forcing: Vec<PowerTerm>,
    },
    /// Singular square problem, solution `~ (x - a)^(-nu-delta)`.
    Example41 { lambda: f64, delta: f64 },
    /// Square-root problem, solution `~ (x - a)^(2nu+2delta)`.
    Example42 { lambda: f64, delta: f64 },
    /// `sum coef x^x_power y^y_power`.
    Polynomial { terms: Vec<MonomialConfig> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    500
}

fn default_residual_tol() -> f64 {
    1e-5
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: default_tol(), max_iter: default_max_iter(), residual_tol: default_residual_tol(), start: None }
    }
}

impl ProblemConfig {
    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(one_line(&e.to_string())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all representable in TOML")
    }

    /// Builds every core object once so their checks run at load time.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.cauchy()?;
        let s = &self.solver;
        if !(s.tol > 0.0 && s.residual_tol > 0.0 && s.max_iter > 0) {
            return Err(Error::InvalidParameter("solver tol, residual_tol and max_iter must be positive".into()));
        }
        if s.start.is_some_and(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("solver start must be finite".into()));
        }
        Ok(())
    }

    /// With defaults filled in, so two configs meaning the same thing compare equal.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        let d = QParams::<f64>::new(c.grid.q).ok();
        c.grid.eps_product = c.grid.eps_product.or(d.map(|p| p.eps_product()));
        c.grid.eps_series = c.grid.eps_series.or(d.map(|p| p.eps_series()));
        c.grid.max_terms = c.grid.max_terms.or(d.map(|p| p.max_terms()));
        c
    }

    pub fn params(&self) -> Result<QParams> {
        let d = QParams::new(self.grid.q)?;
        QParams::with_tolerances(
            self.grid.q,
            self.grid.eps_product.unwrap_or(d.eps_product()),
            self.grid.eps_series.unwrap_or(d.eps_series()),
            self.grid.max_terms.unwrap_or(d.max_terms()),
        )
    }

    pub fn grid(&self) -> Result<LatticeGrid> {
        LatticeGrid::new(self.grid.b, self.grid.depth, self.params()?)
    }

    pub fn orders(&self) -> Result<FracOrders> {
        let o = self.orders;
        FracOrders::new(o.alpha, o.beta, o.mu, o.n)
    }

    pub fn rhs_fn(&self) -> Result<Rhs<f64>> {
        let params = self.params()?;
        let nu = self.orders()?.nu();
        let a = self.problem.a;
        match &self.rhs {
            RhsConfig::Linear { lambda, forcing } => Ok(linear_rhs(*lambda, forcing_fn(forcing))),
            RhsConfig::Example41 { lambda, delta } => SingularSquare::new(nu, *delta, *lambda, a, params)?.rhs(),
            RhsConfig::Example42 { lambda, delta } => SqrtPower::new(nu, *delta, *lambda, a, params)?.rhs(),
            RhsConfig::Polynomial { terms } => polynomial_rhs(
                terms.iter().map(|t| Monomial { coef: t.coef, x_power: t.x_power, y_power: t.y_power }).collect(),
            ),
        }
    }

    pub fn cauchy(&self) -> Result<CauchyProblem> {
        let p = &self.problem;
        CauchyProblem::new(self.orders()?, p.a, self.grid.b, self.rhs_fn()?, p.xi.clone(), p.lipschitz)
    }

    /// The linear problem behind a `linear` right-hand side, with the
    /// series convergence condition checked.
    pub fn linear(&self) -> Result<LinearProblem> {
        let RhsConfig::Linear { lambda, forcing } = &self.rhs else {
            return Err(Error::InvalidParameter(format!("closed form needs a linear rhs, got {}", self.rhs.kind())));
        };
        let p = &self.problem;
        LinearProblem::new(
            self.orders()?,
            p.a,
            self.grid.b,
            *lambda,
            forcing_fn(forcing),
            p.xi.clone(),
            &self.params()?,
        )
    }

    pub fn picard_options(&self) -> PicardOptions<f64> {
        let s = &self.solver;
        let start = s.start.map_or(InitialIterate::InitialTerm, InitialIterate::Constant);
        PicardOptions { tol: s.tol, max_iter: s.max_iter, start }
    }
}

impl RhsConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Example41 { .. } => "example41",
            Self::Example42 { .. } => "example42",
            Self::Polynomial { .. } => "polynomial",
        }
    }
}

fn forcing_fn(terms: &[PowerTerm]) -> qfrac::solver::Forcing<f64> {
    power_forcing(terms.iter().map(|t| (t.coef, t.power)).collect())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
