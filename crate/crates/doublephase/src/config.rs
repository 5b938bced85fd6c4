//! Run configuration: `[section]` headers followed by `key = value` lines.
//!
//! Expression-valued keys hold source text in the field language and are
//! parsed eagerly so that syntax errors surface with the key that holds them.
//! [`Config::echo`] renders a configuration that parses back to an equal value.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use doublephase_core::analysis::ExponentConvention;
use doublephase_core::nonvar::RhsMode;
use doublephase_core::{parse_expr, Expr, ScalarField};
use ini::{Ini, ParseOption, Properties};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("key `{0}` appears before any [section] header")]
    Orphan(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("section [{0}] appears more than once")]
    DuplicateSection(String),
    #[error("unknown key `{key}` in section [{section}]")]
    UnknownKey { section: &'static str, key: String },
    #[error("key `{key}` appears more than once in section [{section}]")]
    DuplicateKey { section: &'static str, key: String },
    #[error("missing required key `{key}` in section [{section}]")]
    Missing { section: &'static str, key: &'static str },
    #[error("invalid value for `{key}` in section [{section}]: `{value}`: {reason}")]
    Invalid {
        section: &'static str,
        key: &'static str,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `f(x, t) = c1 + c2 |t|^{s(x)-2} t`.
    PaperF1,
    /// `f(x, t)` given by the `f` expression.
    Expression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub shape: Shape,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub levels: usize,
    /// Space dimension used by the analytic formulas.
    pub n: u32,
    /// Grid points per axis when sampling field extrema.
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentsConfig {
    pub p: String,
    pub q: String,
    pub r: String,
    pub s: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientsConfig {
    pub mu: String,
    pub alpha: String,
    pub gamma: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhsConfig {
    pub g: String,
    pub nu_x: f64,
    pub nu_y: f64,
    pub mode: RhsMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityConfig {
    pub family: Family,
    pub c1: f64,
    pub c2: f64,
    pub f: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol_res: f64,
    pub max_iters: usize,
    pub tol_fix: f64,
    pub max_outer: usize,
    pub theta: f64,
    pub lambda: Option<f64>,
    pub lambda0: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
    pub cutoff_x: Option<f64>,
    pub cutoff_y: Option<f64>,
    pub cutoff_radius: Option<f64>,
    pub r_lambda: f64,
    pub convention: ExponentConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub dump_field: bool,
    pub dump_trace: bool,
    pub dump_mesh: bool,
    pub echo_config: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub domain: DomainConfig,
    pub exponents: ExponentsConfig,
    pub coefficients: CoefficientsConfig,
    pub rhs: RhsConfig,
    pub nonlinearity: NonlinearityConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

const SCHEMA: &[(&str, &[&str])] = &[
    (
        "domain",
        &["shape", "x0", "y0", "x1", "y1", "nx", "ny", "center_x", "center_y", "radius", "levels", "n", "resolution"],
    ),
    ("exponents", &["p", "q", "r", "s"]),
    ("coefficients", &["mu", "alpha", "gamma"]),
    ("rhs", &["g", "nu_x", "nu_y", "mode"]),
    ("nonlinearity", &["family", "c1", "c2", "f", "s"]),
    (
        "solver",
        &[
            "tol_res",
            "max_iters",
            "tol_fix",
            "max_outer",
            "theta",
            "lambda",
            "lambda0",
            "seed",
            "trials",
            "samples",
            "cutoff_x",
            "cutoff_y",
            "cutoff_radius",
            "r_lambda",
            "convention",
        ],
    ),
    ("output", &["dir", "dump_field", "dump_trace", "dump_mesh", "echo_config"]),
];

/// The worked example of the existence theorem: `p = 2.5`, `q = 2.8`,
/// `mu = 1`, `s = 1.5`, `c1 = c2 = 1` on `[-2, 2]^2`.
pub const WORKED_EXAMPLE: &str = "\
[domain]
shape = rect
[exponents]
p = 2.5
q = 2.8
[coefficients]
mu = 1
";

struct Section<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &'static str) -> Option<&'a str> {
        self.props.and_then(|p| p.get(key))
    }

    fn invalid(&self, key: &'static str, value: &str, reason: impl ToString) -> ConfigError {
        ConfigError::Invalid {
            section: self.name,
            key,
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }

    fn required(&self, key: &'static str) -> Result<&'a str, ConfigError> {
        self.raw(key).ok_or(ConfigError::Missing {
            section: self.name,
            key,
        })
    }

    fn opt_f64(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.raw(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                Ok(_) => Err(self.invalid(key, v, "number must be finite")),
                Err(e) => Err(self.invalid(key, v, e)),
            })
            .transpose()
    }

    fn f64_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn positive_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.invalid(key, &v.to_string(), "must be positive"))
        }
    }

    fn int_or<T: std::str::FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse::<T>().map_err(|e| self.invalid(key, v, e)),
        }
    }

    fn bool_or(&self, key: &'static str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(self.invalid(key, v, "expected `true` or `false`")),
        }
    }

    fn expr(&self, key: &'static str, value: &str) -> Result<String, ConfigError> {
        parse_expr(value).map_err(|e| self.invalid(key, value, e))?;
        Ok(value.to_string())
    }

    fn expr_or(&self, key: &'static str, default: &str) -> Result<String, ConfigError> {
        self.expr(key, self.raw(key).unwrap_or(default))
    }

    fn choice<T: Copy>(&self, key: &'static str, options: &[(&str, T)], default: T) -> Result<T, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(default) };
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.invalid(key, v, format!("expected one of {}", names.join(", ")))
        })
    }
}

const SHAPES: &[(&str, Shape)] = &[("rect", Shape::Rect), ("disc", Shape::Disc)];
const MODES: &[(&str, RhsMode)] = &[("fixed", RhsMode::Fixed), ("convective", RhsMode::Convective)];
const FAMILIES: &[(&str, Family)] = &[("paper_f1", Family::PaperF1), ("expression", Family::Expression)];
const CONVENTIONS: &[(&str, ExponentConvention)] = &[
    ("worked_example", ExponentConvention::WorkedExample),
    ("notation", ExponentConvention::Notation),
];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], value: T) -> &'static str {
    options.iter().find(|(_, t)| *t == value).map(|(n, _)| *n).expect("listed option")
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::parse(&src)
    }

    pub fn worked_example() -> Config {
        Config::parse(WORKED_EXAMPLE).expect("built-in config parses")
    }

    pub fn parse(src: &str) -> Result<Config, ConfigError> {
        let opt = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(src, opt).map_err(|e| ConfigError::Syntax {
            line: e.line,
            col: e.col,
            msg: e.msg.to_string(),
        })?;
        let mut seen = BTreeSet::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::Orphan(k.to_string()));
                }
                continue;
            };
            let Some(&(section, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                return Err(ConfigError::UnknownSection(name.to_string()));
            };
            if !seen.insert(section) {
                return Err(ConfigError::DuplicateSection(name.to_string()));
            }
            for (k, _) in props.iter() {
                if !keys.contains(&k) {
                    return Err(ConfigError::UnknownKey {
                        section,
                        key: k.to_string(),
                    });
                }
                if props.get_all(k).count() > 1 {
                    return Err(ConfigError::DuplicateKey {
                        section,
                        key: k.to_string(),
                    });
                }
            }
        }
        let sec = |name: &'static str| Section {
            name,
            props: ini.section(Some(name)),
        };

        let d = sec("domain");
        d.required("shape")?;
        let shape = d.choice("shape", SHAPES, Shape::Rect)?;
        let domain = DomainConfig {
            shape,
            x0: d.f64_or("x0", -2.0)?,
            y0: d.f64_or("y0", -2.0)?,
            x1: d.f64_or("x1", 2.0)?,
            y1: d.f64_or("y1", 2.0)?,
            nx: d.int_or("nx", 32)?,
            ny: d.int_or("ny", 32)?,
            center_x: d.f64_or("center_x", 0.0)?,
            center_y: d.f64_or("center_y", 0.0)?,
            radius: d.positive_or("radius", 2.0)?,
            levels: d.int_or("levels", 6)?,
            n: d.int_or("n", 3)?,
            resolution: d.int_or("resolution", 101)?,
        };
        if domain.resolution < 2 {
            return Err(d.invalid("resolution", &domain.resolution.to_string(), "must be at least 2"));
        }

        let e = sec("exponents");
        let nl = sec("nonlinearity");
        let s = match (e.raw("s"), nl.raw("s")) {
            (Some(_), Some(_)) => {
                return Err(nl.invalid("s", nl.raw("s").unwrap_or_default(), "already given in [exponents]"))
            }
            (None, Some(v)) => nl.expr("s", v)?,
            _ => e.expr_or("s", "1.5")?,
        };
        let exponents = ExponentsConfig {
            p: e.expr("p", e.required("p")?)?,
            q: e.expr("q", e.required("q")?)?,
            r: e.expr_or("r", "2")?,
            s,
        };

        let c = sec("coefficients");
        let coefficients = CoefficientsConfig {
            mu: c.expr("mu", c.required("mu")?)?,
            alpha: c.expr_or("alpha", "0")?,
            gamma: c.expr_or("gamma", "1")?,
        };

        let r = sec("rhs");
        let rhs = RhsConfig {
            g: r.expr_or("g", "1")?,
            nu_x: r.f64_or("nu_x", 0.0)?,
            nu_y: r.f64_or("nu_y", 0.0)?,
            mode: r.choice("mode", MODES, RhsMode::Fixed)?,
        };

        let family = nl.choice("family", FAMILIES, Family::PaperF1)?;
        let f = nl.raw("f").map(|v| nl.expr("f", v)).transpose()?;
        if family == Family::Expression && f.is_none() {
            return Err(ConfigError::Missing {
                section: "nonlinearity",
                key: "f",
            });
        }
        let nonlinearity = NonlinearityConfig {
            family,
            c1: nl.f64_or("c1", 1.0)?,
            c2: nl.f64_or("c2", 1.0)?,
            f,
        };

        let so = sec("solver");
        let theta = so.f64_or("theta", 1.0)?;
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(so.invalid("theta", &theta.to_string(), "damping must lie in (0, 1]"));
        }
        let solver = SolverConfig {
            tol_res: so.positive_or("tol_res", 1e-8)?,
            max_iters: so.int_or("max_iters", 20_000)?,
            tol_fix: so.positive_or("tol_fix", 1e-7)?,
            max_outer: so.int_or("max_outer", 200)?,
            theta,
            lambda: so.opt_f64("lambda")?,
            lambda0: so.opt_f64("lambda0")?,
            seed: so.int_or("seed", 42)?,
            trials: so.int_or("trials", 20)?,
            samples: so.int_or("samples", 1000)?,
            cutoff_x: so.opt_f64("cutoff_x")?,
            cutoff_y: so.opt_f64("cutoff_y")?,
            cutoff_radius: so.opt_f64("cutoff_radius")?,
            r_lambda: so.f64_or("r_lambda", 0.2)?,
            convention: so.choice("convention", CONVENTIONS, ExponentConvention::WorkedExample)?,
        };

        let o = sec("output");
        let output = OutputConfig {
            dir: o.raw("dir").unwrap_or(".").to_string(),
            dump_field: o.bool_or("dump_field", true)?,
            dump_trace: o.bool_or("dump_trace", false)?,
            dump_mesh: o.bool_or("dump_mesh", false)?,
            echo_config: o.bool_or("echo_config", false)?,
        };

        Ok(Config {
            domain,
            exponents,
            coefficients,
            rhs,
            nonlinearity,
            solver,
            output,
        })
    }

    /// Every key with its effective value.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        };
        let f = |x: f64| format!("{x:?}");
        let d = &self.domain;
        section(
            "domain",
            vec![
                ("shape", name_of(SHAPES, d.shape).into()),
                ("x0", f(d.x0)),
                ("y0", f(d.y0)),
                ("x1", f(d.x1)),
                ("y1", f(d.y1)),
                ("nx", d.nx.to_string()),
                ("ny", d.ny.to_string()),
                ("center_x", f(d.center_x)),
                ("center_y", f(d.center_y)),
                ("radius", f(d.radius)),
                ("levels", d.levels.to_string()),
                ("n", d.n.to_string()),
                ("resolution", d.resolution.to_string()),
            ],
        );
        let e = &self.exponents;
        section(
            "exponents",
            vec![("p", e.p.clone()), ("q", e.q.clone()), ("r", e.r.clone()), ("s", e.s.clone())],
        );
        let c = &self.coefficients;
        section(
            "coefficients",
            vec![("mu", c.mu.clone()), ("alpha", c.alpha.clone()), ("gamma", c.gamma.clone())],
        );
        let r = &self.rhs;
        section(
            "rhs",
            vec![
                ("g", r.g.clone()),
                ("nu_x", f(r.nu_x)),
                ("nu_y", f(r.nu_y)),
                ("mode", name_of(MODES, r.mode).into()),
            ],
        );
        let n = &self.nonlinearity;
        let mut nl = vec![
            ("family", name_of(FAMILIES, n.family).to_string()),
            ("c1", f(n.c1)),
            ("c2", f(n.c2)),
        ];
        if let Some(expr) = &n.f {
            nl.push(("f", expr.clone()));
        }
        section("nonlinearity", nl);
        let s = &self.solver;
        let mut so = vec![
            ("tol_res", f(s.tol_res)),
            ("max_iters", s.max_iters.to_string()),
            ("tol_fix", f(s.tol_fix)),
            ("max_outer", s.max_outer.to_string()),
            ("theta", f(s.theta)),
        ];
        let optional = [
            ("lambda", s.lambda),
            ("lambda0", s.lambda0),
            ("cutoff_x", s.cutoff_x),
            ("cutoff_y", s.cutoff_y),
            ("cutoff_radius", s.cutoff_radius),
        ];
        so.extend(optional.iter().filter_map(|(k, v)| v.map(|x| (*k, f(x)))));
        so.extend([
            ("seed", s.seed.to_string()),
            ("trials", s.trials.to_string()),
            ("samples", s.samples.to_string()),
            ("r_lambda", f(s.r_lambda)),
            ("convention", name_of(CONVENTIONS, s.convention).into()),
        ]);
        section("solver", so);
        let o = &self.output;
        section(
            "output",
            vec![
                ("dir", o.dir.clone()),
                ("dump_field", o.dump_field.to_string()),
                ("dump_trace", o.dump_trace.to_string()),
                ("dump_mesh", o.dump_mesh.to_string()),
                ("echo_config", o.echo_config.to_string()),
            ],
        );
        out
    }

    /// The named expression key as a field; keys were validated on parse.
    pub fn field(&self, label: &str, src: &str) -> ScalarField {
        ScalarField::new(label, parse_expr(src).expect("validated on parse"))
    }

    pub fn nonlinearity_expr(&self) -> Option<Expr> {
        self.nonlinearity.f.as_deref().map(|src| parse_expr(src).expect("validated on parse"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_defaults() {
        let c = Config::worked_example();
        assert_eq!(c.domain.shape, Shape::Rect);
        assert_eq!((c.domain.x0, c.domain.x1), (-2.0, 2.0));
        assert_eq!(c.exponents.s, "1.5");
        assert_eq!(c.solver.seed, 42);
        assert_eq!(c.nonlinearity.family, Family::PaperF1);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = Config::worked_example();
        c.solver.lambda = Some(10.0);
        c.solver.tol_res = 1e-9;
        c.nonlinearity.f = Some("sin(x) * t".into());
        assert_eq!(Config::parse(&c.echo()).unwrap(), c);
    }

    #[test]
    fn schema_errors() {
        let err = Config::parse("[domain]\nshape = rect\n[exponents]\np = 2\n[coefficients]\nmu = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Missing { section: "exponents", key: "q" }));
        let err = Config::parse("[domain]\nshape = rect\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { section: "domain", .. }));
        let err = Config::parse("[nowhere]\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownSection(_)));
        let err = Config::parse("shape = rect\n").unwrap_err();
        assert!(matches!(err, ConfigError::Orphan(_)));
    }

    #[test]
    fn expression_errors_carry_the_offset() {
        let src = WORKED_EXAMPLE.replace("p = 2.5", "p = 2.5 + * x");
        let msg = Config::parse(&src).unwrap_err().to_string();
        assert!(msg.contains("offset 6"), "{msg}");
        assert!(msg.contains("[exponents]"), "{msg}");
    }
}
