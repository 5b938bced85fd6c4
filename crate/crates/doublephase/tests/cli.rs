use std::path::Path;
use std::process::{Command, Output};

use doublephase::config::{Config, ConfigError, Family, Shape};
use doublephase::report;
use proptest::prelude::*;

const WORKED: &str = "[domain]\nshape = rect\nnx = 12\nny = 12\n[exponents]\np = 2.5\nq = 2.8\n[coefficients]\nmu = 1\n";

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doublephase"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn with_config(dir: &Path, cmd: &str, text: &str) -> Output {
    std::fs::write(dir.join("run.ini"), text).unwrap();
    cli(dir, &[cmd, "--config", "run.ini"])
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn example41_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["example41"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report::parse(&stdout(&o));
    assert!(r["example41.r_lambda_bound.computed"].starts_with("0.2830"));
    assert!(r["example41.f_inf_coeff.computed"].starts_with("0.007155"));
    assert_eq!(r["example41.constants.lambda1"], "4");
    assert_eq!(r["example41.constants.lambda"], "10");
    assert_eq!(r["example41.pass"], "true");
}

#[test]
fn ordering_violation_exits_one_with_margin() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "check", &WORKED.replace("p = 2.5", "p = 2.9"));
    assert_eq!(o.status.code(), Some(1));
    let r = report::parse(&stdout(&o));
    let margin: f64 = r["check.p_below_q.margin"].parse().unwrap();
    assert!((margin + 0.1).abs() < 1e-12);
    assert_eq!(r["check.p_below_q.pass"], "false");
    assert_eq!(r["check.pass"], "false");
}

#[test]
fn worked_example_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "check", WORKED);
    assert_eq!(o.status.code(), Some(0));
    let r = report::parse(&stdout(&o));
    assert_eq!(r["check.f2.verdict"], "pass");
    assert_eq!(r["check.f2.lambda0"], "2.5");
}

#[test]
fn malformed_expression_exits_three_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "check", &WORKED.replace("q = 2.8", "q = 2.8 + (x"));
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("offset 8"), "{err}");
    assert!(err.contains("`q`") && err.contains("[exponents]"), "{err}");
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "check", &WORKED.replace("mu = 1\n", ""));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing required key `mu` in section [coefficients]"));

    let o = with_config(dir.path(), "check", &format!("{WORKED}tolerance = 3\n"));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown key `tolerance` in section [coefficients]"));

    let o = cli(dir.path(), &["check", "--config", "missing.ini"]);
    assert_eq!(o.status.code(), Some(3));

    let o = cli(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solver_budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "solve-p", &format!("{WORKED}[solver]\nmax_iters = 3\n"));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report::parse(&stdout(&o))["solve.converged"], "false");
    assert!(!stderr(&o).is_empty());

    let o = with_config(dir.path(), "solve-plambda", &format!("{WORKED}[solver]\nmax_iters = 3\n"));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report::parse(&stdout(&o))["var.converged"], "false");
}

#[test]
fn reports_and_dumps_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{WORKED}[output]\ndump_trace = true\ndump_mesh = true\n");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let o = with_config(dir.path(), "solve-plambda", &text);
        assert_eq!(o.status.code(), Some(0));
        let files: Vec<Vec<u8>> = ["var_field.csv", "var_trace.csv", "var_mesh.csv"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        outputs.push((o.stdout, files));
    }
    assert_eq!(outputs[0], outputs[1]);

    let props = format!("{WORKED}[solver]\nsamples = 20\nseed = 7\n");
    let a = with_config(dir.path(), "props", &props);
    let csv_a = std::fs::read(dir.path().join("props.csv")).unwrap();
    let b = with_config(dir.path(), "props", &props);
    let csv_b = std::fs::read(dir.path().join("props.csv")).unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!((a.stdout, csv_a), (b.stdout, csv_b));
}

#[test]
fn csv_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(
        dir.path(),
        "solve-p",
        &format!("{WORKED}[output]\ndump_trace = true\ndump_mesh = true\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let field = std::fs::read_to_string(dir.path().join("solve_field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits.
    assert_eq!(first[0].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    assert_eq!(field.lines().count(), 1 + 13 * 13);

    let trace = std::fs::read_to_string(dir.path().join("solve_trace.csv")).unwrap();
    assert!(trace.starts_with("iter,J,residual_inf,delta_norm\n1,"));

    let mesh = std::fs::read_to_string(dir.path().join("solve_mesh.csv")).unwrap();
    let lines: Vec<&str> = mesh.lines().collect();
    assert_eq!(lines[0], "VERTICES");
    assert_eq!(lines[1], "id,x,y,boundary");
    let t = lines.iter().position(|l| *l == "TRIANGLES").unwrap();
    assert_eq!(t, 2 + 13 * 13);
    assert_eq!(lines[t + 1], "id,v0,v1,v2");
    assert_eq!(lines.len(), t + 2 + 2 * 12 * 12);
}

#[test]
fn echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{WORKED}[rhs]\nnu_x = 0.2\nmode = convective\n[output]\necho_config = true\n");
    let first = with_config(dir.path(), "solve-p", &text);
    assert_eq!(first.status.code(), Some(0));
    let echo = std::fs::read_to_string(dir.path().join("config.echo")).unwrap();
    assert_eq!(Config::parse(&echo).unwrap(), Config::parse(&text).unwrap());
    let second = with_config(dir.path(), "solve-p", &echo);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn gl_requires_positive_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "gl", WORKED);
    assert_eq!(o.status.code(), Some(1));
    let o = with_config(dir.path(), "gl", &WORKED.replace("mu = 1", "mu = 0\nalpha = x"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn inadmissible_exponents_are_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "solve-p", &WORKED.replace("p = 2.5", "p = 1 - x*x"));
    assert_eq!(o.status.code(), Some(1));
    let r = report::parse(&stdout(&o));
    assert_eq!(r["solve.admissible"], "false");
    assert_eq!(r["hypotheses.p_cplus.pass"], "false");
}

#[test]
fn constants_report_the_window() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(dir.path(), "constants", &format!("{WORKED}[solver]\ntrials = 3\n"));
    assert_eq!(o.status.code(), Some(0));
    let r = report::parse(&stdout(&o));
    let c1: f64 = r["constants.c1_estimate"].parse().unwrap();
    let c2: f64 = r["constants.c2_estimate"].parse().unwrap();
    let ch: f64 = r["constants.c_h"].parse().unwrap();
    assert_eq!(ch, c1.max(c2));
    assert_eq!(r["constants.lambda"], "10");
    assert!(["empty", "nonempty"].contains(&r["constants.window"].as_str()));
}

#[test]
fn disc_domains_and_expression_nonlinearities() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[domain]\nshape = disc\nradius = 1\nlevels = 4\n[exponents]\np = 2.5\nq = 2.8\n\
                [coefficients]\nmu = 0.5\n[nonlinearity]\nfamily = expression\nf = 1 + abs(t)^0.5 * t\n\
                [solver]\nlambda = 5\nr_lambda = 0.3\n";
    let o = with_config(dir.path(), "solve-plambda", text);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report::parse(&stdout(&o));
    assert_eq!(r["var.lambda_source"], "config");
    assert_eq!(r["var.nontrivial"], "true");

    let o = with_config(dir.path(), "check", text);
    assert_eq!(report::parse(&stdout(&o))["check.f2.verdict"], "pass");
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, 1e-12f64..1e-3, Just(0.0)]
}

fn expression() -> impl Strategy<Value = String> {
    prop_oneof![
        (1.01f64..5.0).prop_map(|v| format!("{v:?}")),
        Just("2 + 0.3*sin(x)".to_string()),
        Just("max(1.5, 2 - y^2)".to_string()),
        Just("exp(-(x*x + y*y))".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn echo_round_trips(
        disc in any::<bool>(),
        bounds in proptest::array::uniform4(number()),
        sizes in (1usize..200, 1usize..200, 0usize..9, 2u32..6),
        exprs in proptest::array::uniform4(expression()),
        lambda in proptest::option::of(number()),
        seed in any::<u64>(),
        theta in 0.01f64..1.0,
        expr_family in any::<bool>(),
        flags in proptest::array::uniform4(any::<bool>()),
    ) {
        let mut c = Config::worked_example();
        c.domain.shape = if disc { Shape::Disc } else { Shape::Rect };
        [c.domain.x0, c.domain.y0, c.domain.x1, c.domain.y1] = bounds;
        (c.domain.nx, c.domain.ny, c.domain.levels, c.domain.n) = sizes;
        let [p, q, mu, g] = exprs;
        (c.exponents.p, c.exponents.q, c.coefficients.mu, c.rhs.g) = (p, q, mu, g);
        c.solver.lambda = lambda;
        c.solver.seed = seed;
        c.solver.theta = theta;
        if expr_family {
            c.nonlinearity.family = Family::Expression;
            c.nonlinearity.f = Some("t * abs(t)".into());
        }
        [c.output.dump_field, c.output.dump_trace, c.output.dump_mesh, c.output.echo_config] = flags;
        prop_assert_eq!(Config::parse(&c.echo()).unwrap(), c);
    }
}

#[test]
fn duplicate_sections_and_keys_are_rejected() {
    let e = Config::parse(&format!("{WORKED}[domain]\nnx = 3\n")).unwrap_err();
    assert!(matches!(e, ConfigError::DuplicateSection(_)), "{e}");
    let e = Config::parse(&WORKED.replace("q = 2.8", "q = 2.8\nq = 2.7")).unwrap_err();
    assert!(matches!(e, ConfigError::DuplicateKey { .. }), "{e}");
    let e = Config::parse(&format!("{WORKED}[nonlinearity]\nfamily = expression\n")).unwrap_err();
    assert!(matches!(e, ConfigError::Missing { section: "nonlinearity", key: "f" }), "{e}");
}
