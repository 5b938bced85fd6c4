use std::f64::consts::PI;
use std::path::PathBuf;

use doublephase_core::analysis::{
    check_hypotheses, constants, estimate_embedding_constant, example_4_1_constants, f2_paper_f1, ConstantsInput,
    ConstantsReport, ExponentConvention, HypothesisReport, NonlinearityData, Window,
};
use doublephase_core::descent::DescentParams;
use doublephase_core::expr::field_extrema;
use doublephase_core::field::FieldError;
use doublephase_core::mesh::{build_disc_mesh, build_rect_mesh};
use doublephase_core::modular::{check_section2_props, norm_w1h0, PROPERTY_IDS};
use doublephase_core::nonvar::{gl_solve, solve_convection, RhsSpec, SolveError, SolveParams, SolveReport};
use doublephase_core::operator::{energy_phi, energy_psi, Nonlinearity};
use doublephase_core::var::{certify_nontrivial, cutoff_u_bar, minimize_i, CutoffSpec, VarError, VarSolveReport};
use doublephase_core::{DiscreteFunction, DomainSpec, DoublePhase, Mesh, Reaction, SampledField, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, Family, Shape};
use crate::dump;
use crate::report::Report;

/// Non-error outcome of a command; maps to exit codes 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
    NonConvergence,
}

/// Setup failures; exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Setup(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn setup(e: impl std::fmt::Display) -> CommandError {
    CommandError::Setup(e.to_string())
}

type Outcome = Result<Status, CommandError>;

struct Fields {
    p: ScalarField,
    q: ScalarField,
    mu: ScalarField,
    r: ScalarField,
    s: ScalarField,
    alpha: ScalarField,
    gamma: ScalarField,
    g: ScalarField,
}

fn fields(cfg: &Config) -> Fields {
    let e = &cfg.exponents;
    let c = &cfg.coefficients;
    Fields {
        p: cfg.field("p", &e.p),
        q: cfg.field("q", &e.q),
        mu: cfg.field("mu", &c.mu),
        r: cfg.field("r", &e.r),
        s: cfg.field("s", &e.s),
        alpha: cfg.field("alpha", &c.alpha),
        gamma: cfg.field("gamma", &c.gamma),
        g: cfg.field("g", &cfg.rhs.g),
    }
}

fn domain_spec(cfg: &Config) -> DomainSpec {
    let d = &cfg.domain;
    match d.shape {
        Shape::Rect => DomainSpec::Rect {
            x0: d.x0,
            y0: d.y0,
            x1: d.x1,
            y1: d.y1,
        },
        Shape::Disc => DomainSpec::Disc {
            center: [d.center_x, d.center_y],
            radius: d.radius,
        },
    }
}

fn build_mesh(cfg: &Config) -> Result<Mesh, CommandError> {
    let d = &cfg.domain;
    match d.shape {
        Shape::Rect => build_rect_mesh(d.x0, d.y0, d.x1, d.y1, d.nx, d.ny),
        Shape::Disc => build_disc_mesh([d.center_x, d.center_y], d.radius, d.levels),
    }
    .map_err(setup)
}

fn sample(f: &ScalarField, mesh: &Mesh) -> Result<SampledField, CommandError> {
    SampledField::sample(f, mesh).map_err(|e| setup(format!("field `{}`: {e}", f.label)))
}

/// Eval failures are setup errors; range failures are returned as the
/// inner `Err` and count as hypothesis violations.
type Admissible<T> = Result<Result<T, String>, CommandError>;

fn classify<T>(e: FieldError) -> Admissible<T> {
    match e {
        FieldError::Eval(e) => Err(setup(e)),
        other => Ok(Err(other.to_string())),
    }
}

fn double_phase(f: &Fields, mesh: &Mesh) -> Admissible<DoublePhase> {
    let (p, q, mu) = (sample(&f.p, mesh)?, sample(&f.q, mesh)?, sample(&f.mu, mesh)?);
    match DoublePhase::new(p, q, mu) {
        Ok(dp) => Ok(Ok(dp)),
        Err(e) => classify(e),
    }
}

fn reaction(f: &Fields, mesh: &Mesh) -> Admissible<Reaction> {
    let (a, g, r) = (sample(&f.alpha, mesh)?, sample(&f.gamma, mesh)?, sample(&f.r, mesh)?);
    match Reaction::new(a, g, r) {
        Ok(re) => Ok(Ok(re)),
        Err(e) => classify(e),
    }
}

fn alpha_is_zero(f: &Fields) -> bool {
    f.alpha.expr.constant_value() == Some(0.0)
}

fn hypotheses(cfg: &Config, f: &Fields, with_reaction: bool, with_nl: bool) -> Result<HypothesisReport, CommandError> {
    let expr = cfg.nonlinearity_expr();
    let nl = &cfg.nonlinearity;
    let nonlinearity = with_nl.then_some(match (nl.family, &expr) {
        (Family::Expression, Some(e)) => NonlinearityData::Expression {
            f: e,
            c1: nl.c1,
            c2: nl.c2,
            s: &f.s,
        },
        _ => NonlinearityData::PaperF1 {
            c1: nl.c1,
            c2: nl.c2,
            s: &f.s,
        },
    });
    let input = doublephase_core::analysis::HypothesisInput {
        domain: domain_spec(cfg),
        n: cfg.domain.n,
        p: &f.p,
        q: &f.q,
        mu: &f.mu,
        reaction: with_reaction.then_some((&f.alpha, &f.gamma, &f.r)),
        nonlinearity,
        resolution: cfg.domain.resolution,
    };
    check_hypotheses(&input).map_err(setup)
}

fn write_hypotheses(out: &mut Report, prefix: &str, h: &HypothesisReport) {
    for c in &h.checks {
        out.num(format!("{prefix}.{}.margin", c.id), c.margin);
        out.flag(format!("{prefix}.{}.strict", c.id), c.strict);
        out.flag(format!("{prefix}.{}.pass", c.id), c.pass);
    }
    if let Some(f2) = &h.f2 {
        out.text(format!("{prefix}.f2.verdict"), f2.verdict.as_str());
        out.opt_num(format!("{prefix}.f2.lambda0"), f2.lambda0);
    }
    out.flag(format!("{prefix}.pass"), h.pass);
}

fn out_path(cfg: &Config, name: &str) -> Result<PathBuf, CommandError> {
    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir).map_err(|source| CommandError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir.join(name))
}

fn io_result(path: &std::path::Path, r: std::io::Result<()>) -> Result<(), CommandError> {
    r.map_err(|source| CommandError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Field, mesh and config dumps shared by the solve commands.
fn write_common_dumps(cfg: &Config, out: &mut Report, prefix: &str, u: &DiscreteFunction<'_>) -> Result<(), CommandError> {
    if cfg.output.dump_field {
        let path = out_path(cfg, &format!("{prefix}_field.csv"))?;
        io_result(&path, dump::write_field(&path, u))?;
        out.text("output.field", path.display().to_string());
    }
    if cfg.output.dump_mesh {
        let path = out_path(cfg, &format!("{prefix}_mesh.csv"))?;
        io_result(&path, dump::write_mesh(&path, u.mesh()))?;
        out.text("output.mesh", path.display().to_string());
    }
    Ok(())
}

fn write_echo(cfg: &Config, out: &mut Report) -> Result<(), CommandError> {
    if cfg.output.echo_config {
        let path = out_path(cfg, "config.echo")?;
        io_result(&path, std::fs::write(&path, cfg.echo()))?;
        out.text("output.config_echo", path.display().to_string());
    }
    Ok(())
}

pub fn check(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let h = hypotheses(cfg, &f, !alpha_is_zero(&f), true)?;
    write_hypotheses(out, "check", &h);
    write_echo(cfg, out)?;
    Ok(if h.pass { Status::Ok } else { Status::Violation })
}

struct Extremes {
    p: (f64, f64),
    q: (f64, f64),
    s: (f64, f64),
    mu_sup: f64,
}

fn extremes(cfg: &Config, f: &Fields) -> Result<Extremes, CommandError> {
    let dom = domain_spec(cfg);
    let res = cfg.domain.resolution;
    let ext = |x: &ScalarField| field_extrema(x, &dom, res).map_err(|e| setup(format!("field `{}`: {e}", x.label)));
    let mu = ext(&f.mu)?;
    Ok(Extremes {
        p: ext(&f.p)?,
        q: ext(&f.q)?,
        s: ext(&f.s)?,
        mu_sup: mu.0.abs().max(mu.1.abs()),
    })
}

/// `lambda0` from the config, otherwise the superlinearity witness.
fn lambda0(cfg: &Config, ex: &Extremes) -> Result<Option<f64>, CommandError> {
    if let Some(l) = cfg.solver.lambda0 {
        return Ok(Some(l));
    }
    let nl = &cfg.nonlinearity;
    match nl.family {
        Family::PaperF1 => Ok(f2_paper_f1(nl.c1, nl.c2, ex.s.1, ex.p.0).lambda0),
        Family::Expression => Err(setup(
            "no growth witness is available for expression nonlinearities; set `lambda0` in [solver]",
        )),
    }
}

fn cutoff(cfg: &Config) -> CutoffSpec {
    let d = &cfg.domain;
    let s = &cfg.solver;
    let (cx, cy, radius) = match d.shape {
        Shape::Rect => (
            0.5 * (d.x0 + d.x1),
            0.5 * (d.y0 + d.y1),
            0.5 * (d.x1 - d.x0).abs().min((d.y1 - d.y0).abs()),
        ),
        Shape::Disc => (d.center_x, d.center_y, d.radius),
    };
    CutoffSpec {
        center: [s.cutoff_x.unwrap_or(cx), s.cutoff_y.unwrap_or(cy)],
        radius: s.cutoff_radius.unwrap_or(radius),
        r_lambda: s.r_lambda,
    }
}

fn constants_input(cfg: &Config, ex: &Extremes, lambda0: f64, c_h: Option<f64>) -> ConstantsInput {
    ConstantsInput {
        n: cfg.domain.n,
        p_minus: ex.p.0,
        p_plus: ex.p.1,
        q_minus: ex.q.0,
        q_plus: ex.q.1,
        s_plus: ex.s.1,
        mu_sup: ex.mu_sup,
        radius: cutoff(cfg).radius,
        r_lambda: cfg.solver.r_lambda,
        lambda0,
        c1_hat: cfg.nonlinearity.c1,
        c2_hat: cfg.nonlinearity.c2,
        c_h,
    }
}

fn write_constants(out: &mut Report, prefix: &str, c: &ConstantsReport) {
    let i = &c.input;
    out.count(format!("{prefix}.n"), i.n as usize);
    out.num(format!("{prefix}.p_minus"), i.p_minus);
    out.num(format!("{prefix}.p_plus"), i.p_plus);
    out.num(format!("{prefix}.q_minus"), i.q_minus);
    out.num(format!("{prefix}.q_plus"), i.q_plus);
    out.num(format!("{prefix}.s_plus"), i.s_plus);
    out.num(format!("{prefix}.mu_sup"), i.mu_sup);
    out.num(format!("{prefix}.radius"), i.radius);
    out.num(format!("{prefix}.r_lambda"), i.r_lambda);
    out.num(format!("{prefix}.omega_n"), c.omega_n);
    out.num(format!("{prefix}.r_lambda_bound"), c.r_lambda_bound);
    out.flag(format!("{prefix}.r_lambda_admissible"), c.r_lambda_admissible);
    out.num(format!("{prefix}.lambda0"), i.lambda0);
    out.num(format!("{prefix}.f_inf"), c.f_inf);
    out.num(format!("{prefix}.f_inf_coeff"), c.f_inf_coeff);
    out.text(format!("{prefix}.convention"), c.convention.as_str());
    out.num(format!("{prefix}.ratio"), c.ratio);
    out.num(format!("{prefix}.ratio_coeff"), c.ratio_coeff);
    out.num(format!("{prefix}.ratio_alt"), c.ratio_alt);
    out.num(format!("{prefix}.lambda_lower"), c.lambda_lower);
    out.int(format!("{prefix}.lambda1"), c.lambda1);
    out.num(format!("{prefix}.lambda"), c.lambda);
    out.opt_num(format!("{prefix}.c_h"), c.c_h);
    out.opt_num(format!("{prefix}.lambda_star"), c.lambda_star);
    let window = match c.window {
        Window::Unknown => "unknown",
        Window::Nonempty { .. } => "nonempty",
        Window::Empty { .. } => "empty",
    };
    out.text(format!("{prefix}.window"), window);
}

pub fn constants_cmd(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let mesh = build_mesh(cfg)?;
    let dp = match double_phase(&f, &mesh)? {
        Ok(dp) => dp,
        Err(msg) => return rejected(out, "constants", msg),
    };
    let ex = extremes(cfg, &f)?;
    let Some(l0) = lambda0(cfg, &ex)? else {
        out.text("constants.lambda0", "none");
        out.text("constants.reason", "superlinearity at zero fails for the configured nonlinearity");
        return Ok(Status::Violation);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let trials = cfg.solver.trials;
    let one = SampledField::constant("one", &mesh, 1.0);
    let c1 = estimate_embedding_constant(&mesh, &one, &dp, trials, &[], &mut rng);
    let s = sample(&f.s, &mesh)?;
    let c2 = estimate_embedding_constant(&mesh, &s, &dp, trials, &[], &mut rng);
    let c_h = c1.value.max(c2.value);
    let report = constants(&constants_input(cfg, &ex, l0, Some(c_h)), cfg.solver.convention);
    out.num("constants.c1_estimate", c1.value);
    out.num("constants.c2_estimate", c2.value);
    out.text("constants.c_h_kind", "lower_bound");
    write_constants(out, "constants", &report);
    write_echo(cfg, out)?;
    Ok(Status::Ok)
}

fn rejected(out: &mut Report, prefix: &str, msg: String) -> Outcome {
    out.flag(format!("{prefix}.admissible"), false);
    out.text(format!("{prefix}.reason"), msg);
    Ok(Status::Violation)
}

fn random_field<'m>(mesh: &'m Mesh, rng: &mut impl Rng) -> DiscreteFunction<'m> {
    let amp = 10f64.powf(rng.gen_range(-2.0..2.0));
    let vals = (0..mesh.num_vertices()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    let mut u = DiscreteFunction::from_values(mesh, vals).expect("nodal length");
    u.apply_dirichlet();
    u
}

pub fn props(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let mesh = build_mesh(cfg)?;
    let dp = match double_phase(&f, &mesh)? {
        Ok(dp) => dp,
        Err(msg) => return rejected(out, "props", msg),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let samples: Vec<_> = (0..cfg.solver.samples).map(|_| random_field(&mesh, &mut rng)).collect();
    let reports = check_section2_props(&samples, &dp);
    out.count("props.samples", reports.len());
    let mut failures = 0;
    for id in PROPERTY_IDS {
        let checks = reports.iter().flat_map(|r| r.checks.iter().filter(move |c| c.id == id));
        let (mut applicable, mut failed, mut min_slack) = (0, 0, f64::INFINITY);
        for c in checks.filter(|c| c.applicable) {
            applicable += 1;
            failed += usize::from(!c.holds);
            min_slack = min_slack.min(c.slack);
        }
        failures += failed;
        out.count(format!("props.{id}.applicable"), applicable);
        out.count(format!("props.{id}.failures"), failed);
        out.opt_num(format!("props.{id}.min_slack"), (applicable > 0).then_some(min_slack));
    }
    out.count("props.failures", failures);
    let path = out_path(cfg, "props.csv")?;
    io_result(&path, dump::write_props(&path, &reports))?;
    out.text("output.props", path.display().to_string());
    write_echo(cfg, out)?;
    Ok(if failures == 0 { Status::Ok } else { Status::Violation })
}

fn solve_params(cfg: &Config) -> SolveParams {
    SolveParams {
        inner: descent_params(cfg),
        tol_fix: cfg.solver.tol_fix,
        max_outer: cfg.solver.max_outer,
        theta: cfg.solver.theta,
    }
}

fn descent_params(cfg: &Config) -> DescentParams {
    DescentParams {
        tol_res: cfg.solver.tol_res,
        max_iters: cfg.solver.max_iters,
        ..DescentParams::default()
    }
}

fn write_solve(cfg: &Config, out: &mut Report, prefix: &str, rep: &SolveReport<'_>, dp: &DoublePhase) -> Result<(), CommandError> {
    out.flag(format!("{prefix}.converged"), rep.converged);
    out.count(format!("{prefix}.outer_iters"), rep.outer_iters);
    out.count(format!("{prefix}.inner_iters"), rep.inner_iters);
    out.num(format!("{prefix}.residual_inf"), rep.residual_inf);
    out.num(format!("{prefix}.delta_norm"), rep.delta_norm);
    out.flag(format!("{prefix}.contractive"), rep.contractive);
    out.opt_num(format!("{prefix}.energy"), rep.outer_trace.last().map(|r| r.energy));
    out.num(format!("{prefix}.solution_norm"), norm_w1h0(&rep.u, dp).map_err(setup)?);
    write_common_dumps(cfg, out, prefix, &rep.u)?;
    if cfg.output.dump_trace {
        let rows: Vec<_> = rep
            .outer_trace
            .iter()
            .map(|r| (r.iter, vec![r.energy, r.residual_inf, r.delta_norm]))
            .collect();
        let path = out_path(cfg, &format!("{prefix}_trace.csv"))?;
        io_result(&path, dump::write_trace(&path, &["iter", "J", "residual_inf", "delta_norm"], &rows))?;
        out.text("output.trace", path.display().to_string());
    }
    Ok(())
}

fn solve_outcome<'m>(
    result: Result<SolveReport<'m>, SolveError<'m>>,
    out: &mut Report,
    prefix: &str,
) -> Result<Result<SolveReport<'m>, Status>, CommandError> {
    match result {
        Ok(rep) => Ok(Ok(rep)),
        Err(SolveError::Outer(rep)) => {
            eprintln!("warning: {}", SolveError::Outer(rep.clone()));
            Ok(Ok(*rep))
        }
        Err(e @ SolveError::Inner { .. }) => {
            eprintln!("error: {e}");
            if let SolveError::Inner { residual_inf, iters, reason, .. } = e {
                out.flag(format!("{prefix}.converged"), false);
                out.text(format!("{prefix}.failure"), reason);
                out.num(format!("{prefix}.residual_inf"), residual_inf);
                out.count(format!("{prefix}.inner_iters"), iters);
            }
            Ok(Err(Status::NonConvergence))
        }
        Err(SolveError::Norm(e)) => Err(setup(e)),
    }
}

pub fn solve_p(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let mesh = build_mesh(cfg)?;
    let with_reaction = !alpha_is_zero(&f);
    let h = hypotheses(cfg, &f, with_reaction, false)?;
    write_hypotheses(out, "hypotheses", &h);
    let dp = match double_phase(&f, &mesh)? {
        Ok(dp) => dp,
        Err(msg) => return rejected(out, "solve", msg),
    };
    let re = match reaction(&f, &mesh)? {
        Ok(re) => re,
        Err(msg) => return rejected(out, "solve", msg),
    };
    out.flag("solve.admissible", true);
    let rhs = RhsSpec {
        g: sample(&f.g, &mesh)?,
        nu: [cfg.rhs.nu_x, cfg.rhs.nu_y],
        mode: cfg.rhs.mode,
    };
    let result = solve_convection(&mesh, &rhs, &dp, &re, &solve_params(cfg));
    let rep = match solve_outcome(result, out, "solve")? {
        Ok(rep) => rep,
        Err(status) => return Ok(status),
    };
    write_solve(cfg, out, "solve", &rep, &dp)?;
    write_echo(cfg, out)?;
    Ok(if rep.converged { Status::Ok } else { Status::NonConvergence })
}

pub fn gl(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let Some(alpha) = f.alpha.expr.constant_value() else {
        return Err(setup("gl needs a constant `alpha` in [coefficients]"));
    };
    if alpha <= 0.0 {
        return rejected(out, "gl", format!("alpha must be positive, got {alpha}"));
    }
    let mesh = build_mesh(cfg)?;
    let g = sample(&f.g, &mesh)?;
    let nu = [cfg.rhs.nu_x, cfg.rhs.nu_y];
    out.num("gl.alpha", alpha);
    out.num("gl.nu_x", nu[0]);
    out.num("gl.nu_y", nu[1]);
    let result = gl_solve(&mesh, nu, alpha, g, &solve_params(cfg));
    let dp = doublephase_core::nonvar::gl_double_phase(&mesh);
    let (rep, extra) = match result {
        Ok(r) => (r.report, Some((r.nontrivial, r.convection_bound_ratio))),
        Err(e) => match solve_outcome(Err(e), out, "gl")? {
            Ok(rep) => (rep, None),
            Err(status) => return Ok(status),
        },
    };
    write_solve(cfg, out, "gl", &rep, &dp)?;
    if let Some((nontrivial, ratio)) = extra {
        out.flag("gl.nontrivial", nontrivial);
        out.num("gl.convection_bound_ratio", ratio);
    }
    write_echo(cfg, out)?;
    Ok(if rep.converged { Status::Ok } else { Status::NonConvergence })
}

fn nonlinearity(cfg: &Config, f: &Fields, mesh: &Mesh) -> Result<Nonlinearity, CommandError> {
    let s = sample(&f.s, mesh)?;
    let nl = &cfg.nonlinearity;
    match nl.family {
        Family::PaperF1 => Nonlinearity::paper_f1(nl.c1, nl.c2, s).map_err(setup),
        Family::Expression => {
            let e = cfg.nonlinearity_expr().expect("expression family has `f`");
            Ok(Nonlinearity::expression(e, (nl.c1, nl.c2), s))
        }
    }
}

fn write_var(cfg: &Config, out: &mut Report, rep: &VarSolveReport<'_>) -> Result<(), CommandError> {
    out.flag("var.converged", rep.converged);
    out.count("var.iters", rep.iters);
    out.num("var.i_value", rep.i_value);
    out.num("var.phi", rep.phi_value);
    out.num("var.psi", rep.psi_value);
    out.num("var.residual_inf", rep.residual_inf);
    out.flag("var.nontrivial", rep.nontrivial);
    out.flag("var.certified", certify_nontrivial(rep));
    out.flag("var.phi_below_one", rep.phi_below_one);
    write_common_dumps(cfg, out, "var", &rep.u)?;
    if cfg.output.dump_trace {
        let rows: Vec<_> = rep
            .ps_trace
            .iter()
            .map(|r| (r.iter, vec![r.i_value, r.phi, r.grad_inf]))
            .collect();
        let path = out_path(cfg, "var_trace.csv")?;
        io_result(&path, dump::write_trace(&path, &["iter", "I", "Phi", "residual_inf"], &rows))?;
        out.text("output.trace", path.display().to_string());
    }
    Ok(())
}

pub fn solve_plambda(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let mesh = build_mesh(cfg)?;
    let dp = match double_phase(&f, &mesh)? {
        Ok(dp) => dp,
        Err(msg) => return rejected(out, "var", msg),
    };
    let nl = nonlinearity(cfg, &f, &mesh)?;
    let ex = extremes(cfg, &f)?;
    let computed = match (cfg.solver.lambda0, cfg.nonlinearity.family) {
        (None, Family::Expression) => None,
        _ => lambda0(cfg, &ex)?.map(|l0| constants(&constants_input(cfg, &ex, l0, None), cfg.solver.convention)),
    };
    if let Some(c) = &computed {
        out.num("var.lambda0", c.input.lambda0);
        out.num("var.lambda_lower", c.lambda_lower);
        out.int("var.lambda1", c.lambda1);
    }
    let lambda = match (cfg.solver.lambda, &computed) {
        (Some(l), _) => {
            out.text("var.lambda_source", "config");
            l
        }
        (None, Some(c)) => {
            out.text("var.lambda_source", "lambda0_times_lambda1");
            c.lambda
        }
        (None, None) => {
            return rejected(out, "var", "no lambda given and no growth witness lambda0 is available".into());
        }
    };
    out.num("var.lambda", lambda);
    let spec = cutoff(cfg);
    let start = cutoff_u_bar(&spec, &mesh).map_err(setup)?;
    out.num("var.start.phi", energy_phi(&start, &dp));
    out.num("var.start.psi", energy_psi(&start, &nl).map_err(setup)?);
    let rep = match minimize_i(lambda, &nl, &dp, &start, &descent_params(cfg)) {
        Ok(rep) => rep,
        Err(VarError::NonConvergence { reason, best }) => {
            eprintln!("error: descent on the energy did not converge ({reason})");
            out.text("var.failure", reason);
            *best
        }
        Err(e) => return Err(setup(e)),
    };
    write_var(cfg, out, &rep)?;
    write_echo(cfg, out)?;
    Ok(if rep.converged { Status::Ok } else { Status::NonConvergence })
}

/// One published figure with the tolerance it is held to.
struct Figure {
    name: &'static str,
    computed: f64,
    published: f64,
    tolerance: f64,
}

pub fn example41(cfg: &Config, out: &mut Report) -> Outcome {
    let f = fields(cfg);
    let ex = extremes(cfg, &f)?;
    let Some(l0) = lambda0(cfg, &ex)? else {
        return rejected(out, "example41", "superlinearity at zero fails; set `lambda0` in [solver]".into());
    };
    let c = example_4_1_constants(l0);
    let notation = constants(&c.input, ExponentConvention::Notation);
    let figures = [
        Figure {
            name: "r_lambda_bound",
            computed: c.r_lambda_bound,
            published: 0.29,
            tolerance: 0.01,
        },
        Figure {
            name: "f_inf_coeff",
            computed: c.f_inf_coeff,
            published: 0.007,
            tolerance: 0.0005,
        },
        Figure {
            name: "ratio_coeff",
            computed: c.ratio_coeff,
            published: 0.11,
            tolerance: 0.01,
        },
        Figure {
            name: "omega_3",
            computed: c.omega_n,
            published: 4.0 * PI / 3.0,
            tolerance: 1e-10,
        },
    ];
    let mut all = true;
    for fig in &figures {
        let pass = (fig.computed - fig.published).abs() <= fig.tolerance;
        all &= pass;
        out.num(format!("example41.{}.computed", fig.name), fig.computed);
        out.num(format!("example41.{}.published", fig.name), fig.published);
        out.num(format!("example41.{}.tolerance", fig.name), fig.tolerance);
        out.flag(format!("example41.{}.pass", fig.name), pass);
    }
    out.num("example41.ratio_coeff_notation", notation.ratio_coeff);
    write_constants(out, "example41.constants", &c);
    out.flag("example41.pass", all);
    Ok(if all { Status::Ok } else { Status::Violation })
}
