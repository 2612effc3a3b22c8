#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod expr;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twisted_hessian::algebra::{OperatorSpec, SymMatrix};
use twisted_hessian::concavity::{
    build_chain, certify_subsolution, check_transform_concavity, sandwich_sweep, Certificate,
    ScalarTransform,
};
use twisted_hessian::oracle::{
    counterexample_roots, existence_transition, identity_sweep, radial_coefficient,
    radial_polynomial,
};
use twisted_hessian::probe::{
    holder_seminorm, refinement_study, HessianField, PairRequest, Region, MAX_EXHAUSTIVE_PAIRS,
};
use twisted_hessian::solver::{hessian_field, solve_dirichlet, ConvexDomain, GridField};

use crate::config::{load_operator, one_line, parse_number, Preset, RunConfig};

/// Elementary-symmetric Hessian operators: solver, certificates, oracles and probes.
#[derive(Debug, Parser)]
#[command(name = "twisted", version)]
struct Cli {
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Validate inputs and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Directory for output files; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock fields in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Dirichlet problem described by a config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Grid spacing, overriding the config (`0.03125` or `1/32`).
        #[arg(long, value_parser = parse_number)]
        h: Option<f64>,
    },
    /// Sampled concavity certificates.
    Certify {
        #[command(subcommand)]
        check: CertifyCommand,
    },
    /// Radial solutions and the polynomial non-existence criterion.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Hölder seminorms of Hessian fields.
    Probe {
        #[command(subcommand)]
        which: ProbeCommand,
    },
    /// Random sweep of the shifted-variable identity.
    Identity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        bound: f64,
    },
}

#[derive(Debug, Args)]
struct OperatorArgs {
    #[arg(long, value_enum, conflicts_with = "operator")]
    preset: Option<Preset>,
    #[arg(long, requires = "preset")]
    n: Option<usize>,
    /// Operator document (TOML).
    #[arg(long)]
    operator: Option<PathBuf>,
}

impl OperatorArgs {
    fn build(&self, seed: u64) -> Result<OperatorSpec<f64>, CliError> {
        match (&self.preset, &self.operator) {
            (Some(p), None) => {
                let n = self.n.ok_or_else(|| CliError::usage("--preset needs --n"))?;
                p.build(n, seed)
            }
            (None, Some(path)) => load_operator(path),
            _ => Err(CliError::usage("give --preset with --n, or --operator")),
        }
    }
}

#[derive(Debug, Subcommand)]
enum CertifyCommand {
    /// Concavity of `G o sigma_k` along random SPD segments, per term.
    Transform {
        #[command(flatten)]
        op: OperatorArgs,
        /// Only this term (0-based); all terms by default.
        #[arg(long)]
        term: Option<usize>,
        /// Replace the operator's transform by `x^(1/p)`.
        #[arg(long)]
        exponent: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// `sum G(y) >= G(sum y) >= 2^-m sum G(y)` for `G = x^(1/p)`.
    Sandwich {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Premises and concavity of a transform chain from a config file.
    Chain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sign of the pointwise subsolution form.
    Subsolution {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Coefficient `A` of the radial solution `A (|x|^2 - 1) / 2`.
    Radial {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        f: f64,
    },
    /// Positive roots of `A^n - n A + c`.
    Counterexample {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Also locate the value of `c` where existence switches off.
        #[arg(long)]
        transition: bool,
    },
}

#[derive(Debug, Subcommand)]
enum ProbeCommand {
    /// Seminorm of a Hessian field written by `solve --out`.
    Holder {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Random pairs instead of the automatic choice.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shrink factor of the region about the origin.
        #[arg(long, default_value_t = 0.5, conflicts_with = "all")]
        region_ratio: f64,
        /// Use every node.
        #[arg(long)]
        all: bool,
    },
    /// Seminorms across a sequence of grids.
    Refine {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated descending spacings, e.g. `1/16,1/32,1/64`.
        #[arg(long)]
        h: Option<String>,
        /// Comma-separated exponents.
        #[arg(long)]
        alpha: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Usage,
    Numerical,
    Failed,
}

#[derive(Debug)]
pub struct CliError {
    kind: Kind,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    fn code(&self) -> u8 {
        match self.kind {
            Kind::Failed => 1,
            Kind::Usage => 2,
            Kind::Numerical => 3,
        }
    }

    fn label(&self) -> &'static str {
        match self.kind {
            Kind::Failed => "check_failed",
            Kind::Usage => "usage",
            Kind::Numerical => "numerical",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<twisted_hessian::Error> for CliError {
    fn from(e: twisted_hessian::Error) -> Self {
        use twisted_hessian::Error as E;
        let kind = match e {
            E::Domain(_) | E::Precondition(_) | E::Discretization(_) | E::Config(_) => Kind::Usage,
            E::ChainPremise { .. } => Kind::Failed,
            E::NonConvergence { .. } | E::Numerical { .. } | E::Internal(_) => Kind::Numerical,
        };
        Self {
            kind,
            message: one_line(&e.to_string()),
        }
    }
}

/// What a command produced: the JSON document, a human summary and its status.
struct Output {
    name: &'static str,
    doc: Value,
    human: String,
    status: Status,
    files: Vec<(String, String)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    CheckFailed,
    NumericalFailure,
}

impl Output {
    fn new(name: &'static str, doc: Value, human: String) -> Self {
        Self {
            name,
            doc,
            human,
            status: Status::Ok,
            files: Vec::new(),
        }
    }

    fn check(mut self, pass: bool) -> Self {
        if !pass {
            self.status = Status::CheckFailed;
        }
        self
    }
}

/// On-disk Hessian field: one packed `[h11, h12, h22]` per point.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    h: f64,
    domain: ConvexDomain,
    points: Vec<[f64; 2]>,
    hessians: Vec<[f64; 3]>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return fail(&CliError::usage(first));
        }
    };
    if cli.threads == 0 {
        return fail(&CliError::usage("--threads must be at least 1"));
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        return fail(&CliError::usage(format!("thread pool: {e}")));
    }
    match run(&cli) {
        Ok(out) => finish(&cli, out),
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let doc = json!({ "status": "error", "kind": e.label(), "exit_code": e.code(), "reason": e.message });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    eprintln!("twisted: {} error: {}", e.label(), e.message);
    ExitCode::from(e.code())
}

fn finish(cli: &Cli, out: Output) -> ExitCode {
    let text = serde_json::to_string_pretty(&out.doc).expect("json");
    println!("{text}");
    eprintln!("{}", out.human.trim_end());
    if let Some(dir) = out_dir(cli, &out).filter(|_| !cli.dry_run) {
        let mut files = vec![(format!("{}.json", out.name), text + "\n")];
        files.extend(out.files);
        if let Err(e) = write_files(&dir, &files) {
            return fail(&e);
        }
    }
    ExitCode::from(match out.status {
        Status::Ok => 0,
        Status::CheckFailed => 1,
        Status::NumericalFailure => 3,
    })
}

fn out_dir(cli: &Cli, out: &Output) -> Option<PathBuf> {
    cli.out.clone().or_else(|| out.doc.get("out").and_then(Value::as_str).map(PathBuf::from))
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn dry_run(name: &'static str, what: Value) -> Output {
    Output::new(
        name,
        json!({ "status": "dry_run", "command": name, "valid": true, "inputs": what }),
        format!("{name}: inputs valid (dry run)"),
    )
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Solve { config, h } => solve(cli, config, *h),
        Command::Certify { check } => certify(cli, check),
        Command::Oracle { which } => oracle(cli, which),
        Command::Probe { which } => probe(cli, which),
        Command::Identity {
            n,
            samples,
            seed,
            bound,
        } => {
            if cli.dry_run {
                identity_sweep(*n, 0, *seed, *bound)?;
                return Ok(dry_run("identity", json!({ "n": n, "samples": samples, "seed": seed })));
            }
            let r = identity_sweep(*n, *samples, *seed, *bound)?;
            let human = format!(
                "identity n={n}: max defect {:.3e} over {samples} samples (bound {bound:e}): {}",
                r.max_defect,
                if r.pass { "pass" } else { "FAIL" }
            );
            Ok(Output::new("identity", json!(r), human).check(r.pass))
        }
    }
}

fn solve(cli: &Cli, config: &Path, h: Option<f64>) -> Result<Output, CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(h) = h {
        twisted_hessian::solver::Grid::new(cfg.domain, h)?;
        cfg.options.h = h;
    }
    let (f, phi) = match (&cfg.f, &cfg.phi) {
        (Some(f), Some(phi)) => (f.clone(), phi.clone()),
        _ => return Err(CliError::usage("solve needs a [problem] section with f")),
    };
    let out = out_field(&cfg.out);
    if cli.dry_run {
        let mut o = dry_run(
            "solve",
            json!({ "f": f.source(), "phi": phi.source(), "h": cfg.options.h, "domain": cfg.domain }),
        );
        o.doc["out"] = out;
        return Ok(o);
    }
    let (u, report) = solve_dirichlet(
        &cfg.spec,
        cfg.domain,
        &|x, y| f.eval(x, y),
        &|x, y| phi.eval(x, y),
        cfg.options,
    )?;
    let report_doc: Value = serde_json::from_str(&report.to_json(cli.timing)).expect("json");
    let (lo, hi) = u.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let doc = json!({
        "status": if report.converged { "converged" } else { "not_converged" },
        "f": f.source(),
        "phi": phi.source(),
        "domain": cfg.domain,
        "report": report_doc,
        "solution": { "nodes": u.values.len(), "min": lo, "max": hi, "sup_norm": u.sup_norm() },
        "out": out,
    });
    let human = format!(
        "solve h={}: {} after {} Newton iterations, residual {:.3e} (tolerance {:.3e}), u in [{lo:.6}, {hi:.6}]",
        report.h,
        if report.converged { "converged" } else { "NOT converged" },
        report.iterations_per_step.iter().sum::<usize>(),
        report.final_residual,
        report.residual_tolerance,
    );
    let mut o = Output::new("solve", doc, human);
    o.files = vec![
        ("solution.csv".into(), solution_csv(&u)),
        ("field.json".into(), field_json(&u)),
    ];
    if !report.converged {
        o.status = Status::NumericalFailure;
    }
    Ok(o)
}

fn out_field(out: &Option<PathBuf>) -> Value {
    out.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))
}

fn solution_csv(u: &GridField) -> String {
    let g = u.grid();
    let mut s = String::from("kind,x,y,u\n");
    for k in 0..g.len() {
        let [x, y] = g.position(k);
        s.push_str(&format!("node,{x},{y},{}\n", u.values[k]));
    }
    for (&[x, y], v) in g.cuts().iter().zip(&u.boundary) {
        s.push_str(&format!("boundary,{x},{y},{v}\n"));
    }
    s
}

fn field_json(u: &GridField) -> String {
    let g = u.grid();
    let file = FieldFile {
        h: g.h(),
        domain: *g.domain(),
        points: (0..g.len()).map(|k| g.position(k)).collect(),
        hessians: hessian_field(u).iter().map(|m| [m.get(0, 0), m.get(0, 1), m.get(1, 1)]).collect(),
    };
    serde_json::to_string(&file).expect("json") + "\n"
}

fn read_field(path: &Path) -> Result<HessianField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: FieldFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    file.domain.validate()?;
    let values = file
        .hessians
        .iter()
        .map(|&[a, b, c]| SymMatrix::from_row_major(2, &[a, b, b, c]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HessianField::new(file.h, Some(file.domain), file.points, values)?)
}

fn certificates_output(name: &'static str, certs: Vec<Certificate>) -> Output {
    let pass = certs.iter().all(|c| c.pass);
    let human = certs
        .iter()
        .map(|c| {
            format!(
                "{}: {} ({} samples, {} skipped, {} witnesses, max defect {})",
                c.check,
                if c.pass { "pass" } else { "FAIL" },
                c.samples,
                c.skipped,
                c.witnesses.len(),
                c.max_violation.map_or("-".into(), |v| format!("{v:.3e}"))
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Output::new(name, json!({ "pass": pass, "certificates": certs }), human).check(pass)
}

fn certify(cli: &Cli, check: &CertifyCommand) -> Result<Output, CliError> {
    match check {
        CertifyCommand::Transform {
            op,
            term,
            exponent,
            samples,
            seed,
        } => {
            let mut spec = op.build(*seed)?;
            if let Some(p) = exponent {
                spec = spec.with_transform(ScalarTransform::power_root(*p)?);
            }
            let terms: Vec<usize> = match term {
                Some(t) if *t < spec.terms().len() => vec![*t],
                Some(t) => return Err(CliError::usage(format!("--term {t} out of range ({} terms)", spec.terms().len()))),
                None => (0..spec.terms().len()).collect(),
            };
            if terms.is_empty() {
                return Err(CliError::usage("operator has no concave terms"));
            }
            if cli.dry_run {
                return Ok(dry_run("certify_transform", json!({ "terms": terms, "samples": samples, "seed": seed })));
            }
            let certs = terms
                .iter()
                .map(|&t| check_transform_concavity(&spec, t, *samples, *seed))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(certificates_output("certify_transform", certs))
        }
        CertifyCommand::Sandwich { samples, seed } => {
            if cli.dry_run {
                return Ok(dry_run("certify_sandwich", json!({ "samples": samples, "seed": seed })));
            }
            Ok(certificates_output("certify_sandwich", vec![sandwich_sweep(*samples, *seed)]))
        }
        CertifyCommand::Chain { config, samples, seed } => {
            let cfg = RunConfig::load(config)?;
            let (links, chain_cfg) = cfg
                .chain
                .clone()
                .ok_or_else(|| CliError::usage("certify chain needs a [chain] section"))?;
            let samples = samples.unwrap_or(chain_cfg.samples);
            let seed = seed.unwrap_or(cfg.seed);
            if cli.dry_run {
                return Ok(dry_run(
                    "certify_chain",
                    json!({ "links": chain_cfg.links, "lo": chain_cfg.lo, "hi": chain_cfg.hi, "samples": samples, "seed": seed }),
                ));
            }
            match build_chain(links, chain_cfg.lo, chain_cfg.hi) {
                Ok(chain) => {
                    let cert = chain.certify(&cfg.spec, samples, seed)?;
                    let mut o = certificates_output("certify_chain", vec![cert]);
                    o.doc["premises"] = json!("ok");
                    Ok(o)
                }
                Err(e @ twisted_hessian::Error::ChainPremise { .. }) => {
                    let reason = one_line(&e.to_string());
                    Ok(Output::new(
                        "certify_chain",
                        json!({ "pass": false, "premises": reason, "certificates": [] }),
                        format!("chain premise violated: {reason}"),
                    )
                    .check(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        CertifyCommand::Subsolution { op, samples, seed } => {
            let spec = op.build(*seed)?;
            if cli.dry_run {
                return Ok(dry_run("certify_subsolution", json!({ "n": spec.dim(), "samples": samples, "seed": seed })));
            }
            Ok(certificates_output("certify_subsolution", vec![certify_subsolution(&spec, *samples, *seed)]))
        }
    }
}

fn oracle(cli: &Cli, which: &OracleCommand) -> Result<Output, CliError> {
    match which {
        OracleCommand::Radial { n, f } => {
            if *n < 2 {
                return Err(CliError::usage(format!("--n must be at least 2, got {n}")));
            }
            if !(*f > 0.0) {
                return Err(CliError::usage(format!("radial coefficient needs f > 0, got {f}")));
            }
            if cli.dry_run {
                return Ok(dry_run("oracle_radial", json!({ "n": n, "f": f })));
            }
            let a = radial_coefficient(*n, *f)?;
            let doc = json!({
                "n": n,
                "f": f,
                "A": a,
                "defect": radial_polynomial(*n, a) - f,
                "threshold": *n as f64 - 1.0,
                "above_threshold": *f > *n as f64 - 1.0,
            });
            let human = format!("radial n={n} f={f}: A = {a:.15}, u = A (|x|^2 - 1) / 2");
            Ok(Output::new("oracle_radial", doc, human))
        }
        OracleCommand::Counterexample { n, c, transition } => {
            if cli.dry_run {
                if *n < 2 || !(*c > 0.0) {
                    return Err(CliError::usage("counterexample needs n >= 2 and c > 0"));
                }
                return Ok(dry_run("oracle_counterexample", json!({ "n": n, "c": c })));
            }
            let r = counterexample_roots(*n, *c)?;
            let mut doc = json!(r);
            let mut human = format!(
                "A^{n} - {n} A + {c}: positive roots {:?}, cone-admissible {:?}, existence {}",
                r.positive_roots.iter().map(|t| t.value).collect::<Vec<_>>(),
                r.cone_admissible,
                r.existence
            );
            if *transition {
                let m = *n as f64 - 1.0;
                let t = existence_transition(*n, m / 2.0, 2.0 * m)?;
                doc["transition"] = json!(t);
                human.push_str(&format!("\nexistence switches off at c = {t:.12}"));
            }
            Ok(Output::new("oracle_counterexample", doc, human))
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| parse_number(t).map_err(CliError::usage)).collect()
}

fn probe(cli: &Cli, which: &ProbeCommand) -> Result<Output, CliError> {
    match which {
        ProbeCommand::Holder {
            field,
            alpha,
            pairs,
            seed,
            region_ratio,
            all,
        } => {
            let field = read_field(field)?;
            let region = if *all {
                Region::All
            } else {
                Region::Scaled { ratio: *region_ratio }
            };
            let request = match pairs {
                Some(p) => PairRequest::Random { pairs: *p, seed: *seed },
                None => PairRequest::Auto {
                    pairs: MAX_EXHAUSTIVE_PAIRS,
                    seed: *seed,
                },
            };
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(CliError::usage(format!("--alpha must lie in (0, 1), got {alpha}")));
            }
            if cli.dry_run {
                return Ok(dry_run("probe_holder", json!({ "points": field.points.len(), "alpha": alpha, "region": region })));
            }
            let r = holder_seminorm(&field, *alpha, region, request)?;
            let human = format!(
                "Hölder seminorm alpha={alpha}: {:.6e} over {} nodes",
                r.seminorm, r.region_nodes
            );
            Ok(Output::new("probe_holder", json!(r), human))
        }
        ProbeCommand::Refine { config, h, alpha } => {
            let cfg = RunConfig::load(config)?;
            let (f, phi) = match (&cfg.f, &cfg.phi) {
                (Some(f), Some(phi)) => (f.clone(), phi.clone()),
                _ => return Err(CliError::usage("probe refine needs a [problem] section with f")),
            };
            let hs = match h {
                Some(s) => parse_list(s)?,
                None => cfg.probe.h.clone().unwrap_or_else(|| vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]),
            };
            let alphas = match alpha {
                Some(s) => parse_list(s)?,
                None => cfg.probe.alpha.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]),
            };
            if hs.len() < 3 || hs.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(CliError::usage("--h needs at least 3 strictly descending spacings"));
            }
            if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
                return Err(CliError::usage(format!("exponents must lie in (0, 1), got {a}")));
            }
            for &h in &hs {
                twisted_hessian::solver::Grid::new(cfg.domain, h)?;
            }
            let region = Region::Scaled {
                ratio: cfg.probe.region_ratio.unwrap_or(0.5),
            };
            let request = PairRequest::Auto {
                pairs: cfg.probe.pairs.unwrap_or(MAX_EXHAUSTIVE_PAIRS),
                seed: cfg.seed,
            };
            let out = out_field(&cfg.out);
            if cli.dry_run {
                let mut o = dry_run("probe_refine", json!({ "h": hs, "alpha": alphas, "region": region }));
                o.doc["out"] = out;
                return Ok(o);
            }
            let table = refinement_study(
                &cfg.spec,
                cfg.domain,
                &|x, y| f.eval(x, y),
                &|x, y| phi.eval(x, y),
                &alphas,
                &hs,
                region,
                request,
                cfg.options,
            )?;
            let failed = table.rows.iter().any(|r| r.failure.is_some());
            let text = table.to_text();
            let mut o = Output::new("probe_refine", json!({ "table": table, "out": out }), text.clone());
            o.files = vec![("probe_refine.txt".into(), text)];
            if failed {
                o.status = Status::NumericalFailure;
            }
            Ok(o)
        }
    }
}
