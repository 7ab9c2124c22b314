use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use qfrac::qcore::{q_gamma, QParams};
use qfrac::qgrid::{l1q_norm, GridFunction, LatticeGrid, Lower};
use qfrac::solver::picard_solve_with;
use qfrac_cli::config::*;
use qfrac_cli::{diag_path, run, ProblemConfig};

/// `E_{0.5,0.5}(0.2)` at q = 0.5 from a 500-term, 50-digit summation.
const ML_HALF_HALF_AT_02: f64 = 0.889_151_563_837_371_403_280_564_092_309_399_434;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn qfrac(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("qfrac").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

/// `(x, value)` rows of `m,x,value` CSV.
fn rows(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect()
}

fn diag_value<'a>(diag: &'a str, key: &str) -> &'a str {
    diag.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap()
}

fn load(name: &str) -> ProblemConfig {
    ProblemConfig::from_toml(&std::fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, cfg: &ProblemConfig) -> String {
    let p = dir.join(name);
    std::fs::write(&p, cfg.to_toml()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn integral_of_one_is_x() {
    let o =
        qfrac(&["eval-op", "--op", "rl-int", "--alpha", "1", "--fn", "const:1", "--a", "0", "--b", "1", "--q", "0.5"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.starts_with("m,x,value\n"));
    let r = rows(&o.out);
    assert_eq!(r.len(), 201);
    assert!(r.iter().all(|(x, v)| (x - v).abs() < 1e-9));
}

#[test]
fn hilfer_with_mu_zero_matches_rl_derivative() {
    let common = ["--q", "0.7", "--a", "0", "--b", "1", "--fn", "powbasis:1.5"];
    let h =
        qfrac(&[&["eval-op", "--op", "hilfer", "--alpha", "0.9", "--beta", "0.6", "--mu", "0"][..], &common].concat());
    let r = qfrac(&[&["eval-op", "--op", "rl-der", "--alpha", "0.6"][..], &common].concat());
    assert_eq!((h.code, r.code), (0, 0));
    for ((_, u), (_, v)) in rows(&h.out).iter().zip(rows(&r.out)) {
        assert!((u - v).abs() <= 1e-7 * v.abs().max(1.0));
    }
}

#[test]
fn eval_op_from_a_lattice_point() {
    let o =
        qfrac(&["eval-op", "--op", "caputo", "--alpha", "0.5", "--fn", "powbasis:2", "--a", "0.0625", "--q", "0.5"]);
    assert_eq!(o.code, 0, "{}", o.err);
    let r = rows(&o.out);
    assert!(r[4..].iter().all(|&(_, v)| v == 0.0));
}

#[test]
fn eval_op_errors() {
    let o = qfrac(&["eval-op", "--op", "rl-int", "--alpha", "1", "--fn", "const:1"]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: usage: ") && o.err.contains("--q"), "{}", o.err);
    assert_eq!(o.err.lines().count(), 1);

    let o = qfrac(&["eval-op", "--op", "rl-int", "--alpha", "1", "--fn", "const:1", "--q", "0.5", "--a", "0.3"]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: off-lattice: "), "{}", o.err);

    let o = qfrac(&["eval-op", "--op", "rl-int", "--alpha", "1", "--fn", "sin:1", "--q", "0.5"]);
    assert_eq!(o.code, 2);
    let o = qfrac(&["eval-op", "--op", "rl-int", "--alpha", "1", "--fn", "const:1", "--q", "1.5"]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: config: "), "{}", o.err);
}

#[test]
fn solve_sqrt_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let cfg = configs().join("example42.toml");
    let o = qfrac(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.err);
    let diag = std::fs::read_to_string(diag_path(&out)).unwrap();
    assert_eq!(diag, o.out);
    assert!(diag_value(&diag, "residual_l1").parse::<f64>().unwrap() < 1e-5);
    assert_eq!(diag_value(&diag, "pass"), "true");
    for key in ["iterations", "omega", "subinterval_boundaries", "residual_max"] {
        diag_value(&diag, key);
    }

    // The CSV reproduces the in-memory solution bit for bit.
    let c = load("example42.toml");
    let g = c.grid().unwrap();
    let s = picard_solve_with(&c.cauchy().unwrap(), &g, &c.picard_options()).unwrap();
    let back = GridFunction::from_csv(g, &std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(back.values().iter().zip(s.y.values()).all(|(u, v)| u.to_bits() == v.to_bits()));
}

#[test]
fn solve_linear_by_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("linear.toml");
    let mut ys = Vec::new();
    for method in ["picard", "closed-form"] {
        let out = dir.path().join(format!("{method}.csv"));
        let o =
            qfrac(&["solve", "--config", cfg.to_str().unwrap(), "--method", method, "--out", out.to_str().unwrap()]);
        assert_eq!(o.code, 0, "{}", o.err);
        assert_eq!(diag_value(&o.out, "method"), method);
        let g = load("linear.toml").grid().unwrap();
        ys.push(GridFunction::from_csv(g, &std::fs::read_to_string(&out).unwrap()).unwrap());
    }
    let e = l1q_norm(&ys[0].sub(&ys[1]).unwrap(), Lower::Zero, 0).unwrap();
    assert!(e < 1e-7, "{e}");
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let out = out.to_str().unwrap();
    let solve = |cfg: &ProblemConfig, method: &str| {
        let path = write_config(dir.path(), "c.toml", cfg);
        qfrac(&["solve", "--config", &path, "--method", method, "--out", out])
    };
    let base = load("linear.toml");

    let mut c = base.clone();
    c.rhs = RhsConfig::Linear { lambda: 5.0, forcing: vec![] };
    let o = solve(&c, "closed-form");
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: divergence: ") && o.err.contains("|lambda| b^nu (1-q)^nu < 1"), "{}", o.err);

    let mut c = base.clone();
    c.rhs = RhsConfig::Example42 { lambda: 1.0, delta: 0.25 };
    assert_eq!(solve(&c, "closed-form").code, 2);

    let mut c = base.clone();
    c.solver.residual_tol = 1e-30;
    let o = solve(&c, "picard");
    assert_eq!(o.code, 1);
    assert_eq!(diag_value(&o.out, "pass"), "false");

    let mut c = base.clone();
    c.solver.max_iter = 2;
    let o = solve(&c, "picard");
    assert_eq!(o.code, 4);
    assert!(o.err.starts_with("error: max-iter: "), "{}", o.err);

    let mut c = base.clone();
    c.grid.depth = 20;
    c.problem.a = 0.5f64.powi(5);
    c.problem.lipschitz = 1e6;
    c.rhs = RhsConfig::Linear { lambda: 1e6, forcing: vec![] };
    let o = solve(&c, "picard");
    assert_eq!(o.code, 3);
    assert!(o.err.starts_with("error: no-contraction: "), "{}", o.err);

    let o = qfrac(&["solve", "--config", "/nonexistent/c.toml", "--out", out]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: io: "));
}

#[test]
fn config_rejects_bad_input() {
    let text = std::fs::read_to_string(configs().join("linear.toml")).unwrap();
    let unknown = text.replace("[problem]", "[problem]\ncolour = 1");
    assert!(matches!(ProblemConfig::from_toml(&unknown), Err(qfrac::Error::Parse(_))));
    let unknown_rhs = text.replace("kind = \"linear\"", "kind = \"linear\"\ndelta = 0.1");
    assert!(ProblemConfig::from_toml(&unknown_rhs).is_err());
    let bad_kind = text.replace("kind = \"linear\"", "kind = \"cubic\"");
    assert!(ProblemConfig::from_toml(&bad_kind).is_err());
    let bad_orders = text.replace("beta = 0.6", "beta = 1.6");
    assert!(matches!(ProblemConfig::from_toml(&bad_orders), Err(qfrac::Error::InvalidParameter(_))));
    let bad_xi = text.replace("xi = [1.0]", "xi = [1.0, 2.0]");
    assert!(ProblemConfig::from_toml(&bad_xi).is_err());
    let bad_q = text.replace("q = 0.5", "q = 1.0");
    assert!(ProblemConfig::from_toml(&bad_q).is_err());

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    std::fs::write(&p, unknown).unwrap();
    let o = qfrac(&["solve", "--config", p.to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: config: ") && o.err.lines().count() == 1, "{}", o.err);
}

#[test]
fn shipped_configs_load() {
    for name in ["example42.toml", "linear.toml"] {
        let c = load(name);
        assert_eq!(ProblemConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}

#[test]
fn verify_filter_and_determinism() {
    let o = qfrac(&["verify", "--filter", "semigroup"]);
    assert_eq!(o.code, 0);
    let checks: Vec<_> = o.out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(checks.len(), 1);
    assert!(checks[0].starts_with("PASS semigroup "));

    let a = qfrac(&["verify", "--seed", "5", "--filter", "power"]);
    let b = qfrac(&["verify", "--seed", "5", "--filter", "power"]);
    assert_eq!(a.out, b.out);
    assert_eq!(a.code, 0);
}

#[test]
fn binary_verify_run() {
    let o = Command::new(env!("CARGO_BIN_EXE_qfrac")).args(["verify", "--filter", "mittag"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("2 checks, 0 failed"));
}

#[test]
fn ml_eval_outputs() {
    let o = qfrac(&["ml-eval", "--q", "0.5", "--alpha", "0.7", "--beta", "1.3", "--lambda", "0", "--x", "2"]);
    assert_eq!(o.code, 0);
    let want = 1.0 / q_gamma(&QParams::new(0.5).unwrap(), 1.3).unwrap();
    assert!((diag_value(&o.out, "value").parse::<f64>().unwrap() - want).abs() < 1e-15);
    assert_eq!(diag_value(&o.out, "ratio").parse::<f64>().unwrap(), 0.0);

    let o = qfrac(&["ml-eval", "--q", "0.5", "--alpha", "0.5", "--beta", "0.5", "--lambda", "0.2", "--x", "1"]);
    assert!((diag_value(&o.out, "value").parse::<f64>().unwrap() - ML_HALF_HALF_AT_02).abs() < 1e-10);

    let o = qfrac(&["ml-eval", "--q", "0.5", "--alpha", "1", "--beta", "1", "--lambda", "-2", "--x", "1"]);
    assert_eq!(o.code, 2);
    assert!(
        o.err.starts_with("error: divergence: ") && o.err.contains("|lambda| x^alpha (1-q)^alpha < 1"),
        "{}",
        o.err
    );

    let o = qfrac(&["ml-eval", "--q", "0.5", "--alpha", "1", "--beta", "1", "--lambda", "1", "--x", "1", "--a", "2"]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error: domain: "));
}

fn rhs_strategy() -> impl Strategy<Value = RhsConfig> {
    prop_oneof![
        (-1.0f64..1.0, prop::collection::vec((-2.0f64..2.0, 0.0f64..3.0), 0..3)).prop_map(|(lambda, f)| {
            RhsConfig::Linear {
                lambda,
                forcing: f.into_iter().map(|(coef, power)| PowerTerm { coef, power }).collect(),
            }
        }),
        (0.5f64..2.0, 0.01f64..0.05).prop_map(|(lambda, delta)| RhsConfig::Example41 { lambda, delta }),
        (0.5f64..2.0, 0.0f64..1.0).prop_map(|(lambda, delta)| RhsConfig::Example42 { lambda, delta }),
        prop::collection::vec((-2.0f64..2.0, 0.0f64..3.0, 0u32..4), 1..4).prop_map(|t| RhsConfig::Polynomial {
            terms: t.into_iter().map(|(coef, x_power, y_power)| MonomialConfig { coef, x_power, y_power }).collect()
        }),
    ]
}

fn config_strategy() -> impl Strategy<Value = ProblemConfig> {
    (
        prop::sample::select(vec![0.3, 0.5, 0.7, 0.9]),
        8usize..300,
        0.5f64..4.0,
        (0.05f64..0.45, 0.05f64..0.45, 0.0f64..=1.0),
        prop::option::of(1e-14f64..1e-10),
        (rhs_strategy(), -3.0f64..3.0, 0.1f64..5.0),
        (1e-14f64..1e-6, 1usize..2000, prop::option::of(0.1f64..2.0)),
    )
        .prop_map(|(q, depth, b, (alpha, beta, mu), eps, (rhs, xi, lip), (tol, max_iter, start))| ProblemConfig {
            grid: GridConfig { b, depth, q, eps_product: eps, eps_series: None, max_terms: None },
            orders: OrdersConfig { alpha, beta, mu, n: 1 },
            problem: ProblemData { a: 0.0, xi: vec![xi], lipschitz: lip },
            rhs,
            solver: SolverConfig { tol, max_iter, residual_tol: 1e-5, start },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(cfg in config_strategy()) {
        cfg.validate().unwrap();
        let back = ProblemConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back.normalized(), cfg.normalized());
        prop_assert_eq!(back.grid().unwrap(), cfg.grid().unwrap());
    }

    #[test]
    fn csv_round_trip_is_bit_exact(q in prop::sample::select(vec![0.3, 0.5, 0.7, 0.9]), vals in prop::collection::vec(-1e300f64..1e300, 21)) {
        let g = LatticeGrid::new(1.0, 20, QParams::new(q).unwrap()).unwrap();
        let u = GridFunction::new(g, vals).unwrap();
        let back = GridFunction::from_csv(g, &u.to_csv()).unwrap();
        prop_assert!(back.values().iter().zip(u.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
