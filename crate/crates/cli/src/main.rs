use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hjq_core::action::{GaugeMeasureReport, MeasureError};
use hjq_core::engine::{ConstraintClass, EngineError, DEFAULT_MAX_GENERATIONS};
use hjq_core::frontend::{builtin_model, builtin_names, expand_indices, parse_model, FlatModel, ModelError, ModelSpec};
use hjq_core::pipeline::{analyze, report_json, verify, Analysis, VerifyError, VerifyOptions, VerifyReport};
use hjq_core::symcore::Symbol;
use hjq_core::verify::{ParameterPath, Verdict, DRIFT_TOLERANCE, PROBE_TOLERANCE};
use hjq_core::{Expr, Rational};

const EXIT_PARSE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_BREACH: u8 = 4;
const EXIT_GAUGE: u8 = 5;
const EXIT_REFUSED: u8 = 6;

#[derive(Parser)]
#[command(name = "hjq", version, about = "Hamilton-Jacobi analysis of singular Lagrangian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the symbolic pipeline and print the constraint chain.
    Analyze(Common),
    /// Integrate the flow, probe integrability and compare with the Dirac-Bergmann oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Faddeev measure for the given gauge conditions, next to the canonical report.
    Measure {
        #[command(flatten)]
        common: Common,
        /// Gauge condition; repeat once per first-class constraint.
        #[arg(long = "gauge", value_name = "EXPR")]
        gauges: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Model file (.hjm).
    #[arg(value_name = "PATH", conflicts_with = "builtin", required_unless_present = "builtin")]
    path: Option<PathBuf>,
    /// Builtin model name.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Write the JSON report here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_GENERATIONS)]
    max_generations: usize,
    /// Print the JSON report to stdout instead of the text summary.
    #[arg(long)]
    json_only: bool,
    /// Coupling value, e.g. `g=1` or `m=1/2`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct NumericArgs {
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Path for the parameters as a function of `t`: `EXPR` for all of
    /// them or `NAME=EXPR` for one.
    #[arg(long = "a0-path", value_name = "EXPR")]
    a0_paths: Vec<String>,
    #[arg(long, default_value_t = DRIFT_TOLERANCE)]
    drift_tol: f64,
    #[arg(long, default_value_t = PROBE_TOLERANCE)]
    probe_tol: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = if e.is_unsupported() { EXIT_UNSUPPORTED } else { EXIT_PARSE };
        Failure::new(code, e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::new(EXIT_UNSUPPORTED, e.to_string())
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Self {
        Style { color: std::env::var("HJQ_COLOR").map(|v| v == "1").unwrap_or(false) }
    }

    fn status(&self, word: &str, good: bool) -> String {
        if !self.color {
            return word.to_string();
        }
        let code = if good { "32" } else { "31" };
        format!("\x1b[1;{code}m{word}\x1b[0m")
    }

    fn head(&self, text: &str) -> String {
        if self.color {
            format!("\x1b[1m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, Rational>, Failure> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (name, value) =
            p.split_once('=').ok_or_else(|| Failure::new(EXIT_PARSE, format!("--param `{p}`: expected NAME=VALUE")))?;
        let value: Rational = value
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_PARSE, format!("--param `{p}`: `{value}` is not a rational number")))?;
        out.insert(name.trim().to_string(), value);
    }
    Ok(out)
}

fn load(common: &Common) -> Result<Analysis, Failure> {
    let params = parse_params(&common.params)?;
    let spec: ModelSpec = match (&common.builtin, &common.path) {
        (Some(name), _) => builtin_model(name, &params).map_err(|e| match e {
            ModelError::UnknownModel(_) => {
                Failure::new(EXIT_PARSE, format!("{e}; available: {}", builtin_names().join(", ")))
            }
            e => e.into(),
        })?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
            let mut spec = parse_model(&text)?;
            for (k, v) in &params {
                let c =
                    spec.couplings.iter_mut().find(|c| &c.name == k).ok_or_else(|| {
                        Failure::new(EXIT_PARSE, format!("model `{}` has no coupling `{k}`", spec.name))
                    })?;
                c.value = Some(v.clone());
            }
            spec
        }
        (None, None) => return Err(Failure::new(EXIT_PARSE, "no model given")),
    };
    let flat = expand_indices(&spec)?;
    let mut analysis = analyze(flat, common.max_generations.max(1))?;
    analysis.source = Some(spec.to_string());
    Ok(analysis)
}

fn parse_in(model: &FlatModel, text: &str, what: &str) -> Result<Expr, Failure> {
    model.parse_expr(text).map_err(|e| Failure::new(EXIT_PARSE, format!("{what} `{text}`: {e}")))
}

fn parameter_paths(analysis: &Analysis, raw: &[String]) -> Result<Vec<ParameterPath>, Failure> {
    let params: Vec<Symbol> = analysis.legendre.unsolved.clone();
    let mut out: Vec<ParameterPath> = Vec::new();
    for r in raw {
        let (targets, text) = match r.split_once('=') {
            Some((name, e)) => {
                let name = name.trim();
                let p = params.iter().find(|p| p.to_string() == name).ok_or_else(|| {
                    Failure::new(EXIT_PARSE, format!("--a0-path: `{name}` is not a parameter of this model"))
                })?;
                (vec![p.clone()], e)
            }
            None => (params.clone(), r.as_str()),
        };
        let path = parse_in(&analysis.model, text, "--a0-path")?;
        for p in targets {
            out.retain(|x| x.parameter != p);
            out.push(ParameterPath { parameter: p, path: path.clone() });
        }
    }
    Ok(out)
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn emit(
    common: &Common,
    analysis: &Analysis,
    measure: Option<&Result<GaugeMeasureReport, MeasureError>>,
    verify: Option<&VerifyReport>,
    text: String,
) -> Result<(), Failure> {
    let json = report_json(analysis, measure, verify, timestamp());
    let rendered = serde_json::to_string_pretty(&json).expect("json");
    if let Some(out) = &common.out {
        std::fs::write(out, format!("{rendered}\n"))
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", out.display())))?;
    }
    if common.json_only {
        println!("{rendered}");
    } else {
        print!("{text}");
    }
    Ok(())
}

fn render_analysis(a: &Analysis, style: &Style) -> String {
    let mut s = String::new();
    let m = &a.model;
    s += &format!("{} {}\n", style.head("model"), m.name);
    s += &format!("  coordinates ({}): {}\n", m.coordinates.len(), join(&m.coordinates));
    for (c, v) in &m.couplings {
        match v {
            Some(v) => s += &format!("  coupling {c} = {v}\n"),
            None => s += &format!("  coupling {c} (symbolic)\n"),
        }
    }
    let leg = &a.legendre;
    s += &format!("{}\n", style.head("legendre"));
    s += &format!("  rank {} of {}\n", leg.rank, m.coordinates.len());
    for (p, e) in &leg.momenta {
        s += &format!("  {p} = {e}\n");
    }
    for (q, h) in &leg.primary {
        s += &format!("  primary ({q}): {h} = 0\n");
    }
    for w in &leg.warnings {
        s += &format!("  warning: {} solved at generic rank (pivot {})\n", w.unknown, w.pivot);
    }
    let h = &a.hamiltonians;
    s += &format!("{}\n", style.head("hamiltonians"));
    s += &format!("  H0 = {}\n", h.h0);
    let pt = Expr::symbol(Symbol::time().momentum());
    for g in &h.generators {
        if g.expr == &pt + &h.h0 {
            s += &format!("  H'[{}] = {pt} + H0\n", g.parameter);
        } else {
            s += &format!("  H'[{}] = {}\n", g.parameter, g.expr);
        }
    }
    let c = &a.chain;
    let closed = c.is_closed();
    s += &format!(
        "{} {}, {} generation(s), {} first-class, {} second-class\n",
        style.head("chain"),
        style.status(if closed { "CLOSED" } else { "OPEN" }, closed),
        c.generations,
        c.first_class_count(),
        c.second_class().len()
    );
    for (i, k) in c.constraints.iter().enumerate() {
        let class = match k.class {
            ConstraintClass::First => "first",
            ConstraintClass::Second => "second",
            ConstraintClass::Unresolved => "unresolved",
        };
        s += &format!("  C{i:<3} gen {} {:<10} {}\n", k.generation, class, k.expression);
    }
    for r in &c.parameter_relations {
        s += &format!("  rate d{}/dt = {}\n", r.parameter, r.rate);
    }
    for cert in &c.certificates {
        let terms: Vec<String> = cert.coefficients.iter().map(|(i, e)| format!("({e})*C{i}")).collect();
        s += &format!("  dependent: {} = {}\n", cert.expression, terms.join(" + "));
    }
    for w in &c.warnings {
        s += &format!("  warning: {w}\n");
    }
    s += &format!("{}\n", style.head("action"));
    for (t, e) in &a.action.integrand {
        s += &format!("  d{t}: {e}\n");
    }
    let pi = &a.path_integral;
    s += &format!("{}\n", style.head("path integral"));
    let vars: Vec<String> = pi.variables.iter().map(|(q, p)| format!("({q}, {p})")).collect();
    s += &format!("  variables ({}): {}\n", vars.len(), vars.join(" "));
    s += &format!("  external: {}\n", join(&pi.externals));
    let ok = closed;
    s += &format!(
        "  status {}; {} gauge conditions, {} delta factors, {} determinants\n",
        style.status(if ok { "INTEGRABLE" } else { "NOT-INTEGRABLE" }, ok),
        pi.gauge_conditions,
        pi.delta_factors.len(),
        pi.determinants.len()
    );
    s
}

fn join(syms: &[Symbol]) -> String {
    syms.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn render_verify(r: &VerifyReport, style: &Style) -> String {
    let mut s = format!("{}\n", style.head("verify"));
    let d = &r.drift;
    s += &format!("  RK4 dt {:e}, t_end {}, {} samples\n", d.dt, d.t_end, d.samples);
    for c in &d.constraints {
        s += &format!("  max |{}| = {:.3e}\n", c.constraint, c.max_abs);
    }
    let kind = if d.energy_relative { "relative" } else { "absolute" };
    s += &format!("  {kind} H0 drift {:.3e}\n", d.energy_drift);
    if let Some(h) = &d.halving {
        s += &format!("  step halving ({}): ratio {:.2}, order {:.2}\n", h.metric, h.ratio, h.order);
    }
    let p = &r.probe;
    s += &format!(
        "  probe: {}/{} samples{}, max residual {:.3e}\n",
        p.accepted,
        p.requested,
        if p.degraded { " (degraded projection)" } else { "" },
        p.max_residual
    );
    let eq = r.oracle.verdict == Verdict::Equivalent;
    s += &format!("  oracle: {}\n", style.status(if eq { "EQUIVALENT" } else { "NOT-EQUIVALENT" }, eq));
    for x in &r.oracle.unmatched_left {
        s += &format!("    engine only: {x}\n");
    }
    for x in &r.oracle.unmatched_right {
        s += &format!("    oracle only: {x}\n");
    }
    if r.passed() {
        s += &format!("  {}\n", style.status("PASS", true));
    } else {
        for b in &r.breaches {
            s += &format!("  {}: {b}\n", style.status("BREACH", false));
        }
    }
    s
}

fn render_measure(m: &Result<GaugeMeasureReport, MeasureError>, style: &Style) -> String {
    let mut s = format!("{}\n", style.head("faddeev measure"));
    match m {
        Ok(r) => {
            for (k, row) in r.matrix.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                s += &format!("  {{{}, chi}} = [{}]\n", r.constraints[k], cells.join(", "));
            }
            s += &format!("  det = {}\n", r.determinant);
            s += &format!("  factors: {}\n", r.delta_factors.join(" "));
            s += &format!("  measure: {}\n", r.liouville);
        }
        Err(e) => s += &format!("  {}: {e}\n", style.status("REFUSED", false)),
    }
    s
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let style = Style::from_env();
    match cli.command {
        Command::Analyze(common) => {
            let a = load(&common)?;
            emit(&common, &a, None, None, render_analysis(&a, &style))?;
            Ok(0)
        }
        Command::Verify { common, numeric } => {
            let a = load(&common)?;
            let params = parse_params(&common.params)?;
            let couplings: BTreeMap<Symbol, Rational> = a
                .model
                .free_couplings()
                .into_iter()
                .filter_map(|c| params.get(&c.to_string()).map(|v| (c, v.clone())))
                .collect();
            if !(numeric.dt > 0.0 && numeric.t_end > 0.0) {
                return Err(Failure::new(EXIT_PARSE, "--dt and --t-end must be positive"));
            }
            let opts = VerifyOptions {
                dt: numeric.dt,
                t_end: numeric.t_end,
                seed: numeric.seed,
                samples: numeric.samples,
                paths: parameter_paths(&a, &numeric.a0_paths)?,
                couplings,
                drift_tolerance: numeric.drift_tol,
                probe_tolerance: numeric.probe_tol,
                ..VerifyOptions::default()
            };
            let report = verify(&a, &opts).map_err(|e| match e {
                VerifyError::Path(_) => Failure::new(EXIT_PARSE, e.to_string()),
                VerifyError::NoInitialState => Failure::new(EXIT_BREACH, e.to_string()),
                VerifyError::Oracle(_) => Failure::new(EXIT_UNSUPPORTED, e.to_string()),
            })?;
            let text = render_analysis(&a, &style) + &render_verify(&report, &style);
            emit(&common, &a, None, Some(&report), text)?;
            Ok(if report.passed() { 0 } else { EXIT_BREACH })
        }
        Command::Measure { common, gauges } => {
            let a = load(&common)?;
            let gauges: Vec<Expr> =
                gauges.iter().map(|g| parse_in(&a.model, g, "--gauge")).collect::<Result<_, _>>()?;
            let m = a.measure(&gauges);
            let text = render_analysis(&a, &style) + &render_measure(&m, &style);
            emit(&common, &a, Some(&m), None, text)?;
            Ok(match &m {
                Ok(_) => 0,
                Err(e) if e.is_gauge_problem() => EXIT_GAUGE,
                Err(_) => EXIT_REFUSED,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("hjq: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
