//! `curvevar` command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure in a
//! verify mode.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use curvevar::acceptance::{run_all, run_criterion, CRITERIA};
use curvevar::config::{FieldSpec, OutputFormat, RunConfig};
use curvevar::oracle::{evolution_check_multi, fd_variation_oracle, OracleOptions, VariationOrder, VariationReport};
use curvevar::pwillmore::{poincare_check, sphere_sample, spectrum_check, stability_report, PWillmoreSetting};
use curvevar::variations::{el_residual, first_variation, functional_value, second_variation, SecondVariationOptions};
use curvevar::{Constraint, Error};

const SCHEMA: &str = "curvevar/1";

/// Default relative tolerance and order for the verify modes.
const VERIFY_TOLERANCE: f64 = 1e-4;
const VERIFY_ORDER: f64 = 1.9;

#[derive(Parser)]
#[command(name = "curvevar", version, about = "Curvature functionals, their variations and finite-difference checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-node H, K, K_E and principal curvatures.
    Curvature(Opts),
    /// Value of ∫E(H,K) dS.
    Energy(Opts),
    /// First variation along u; `--verify` adds the difference oracle.
    FirstVariation(Opts),
    /// Second variation at a critical surface; `--verify` adds the oracle.
    SecondVariation(Opts),
    /// Euler-Lagrange residual.
    ElResidual(Opts),
    /// Evolution of geometric quantities along u against differences.
    VerifyEvolution(Opts),
    /// Index form of p-Willmore on a round sphere, by eigenspace.
    SphereStability(Opts),
    /// Laplace-Beltrami eigenvalue check on a round sphere.
    Spectrum(Opts),
    /// Poincaré quantities of u on a round sphere.
    Poincare(Opts),
    /// Runs the acceptance criteria.
    VerifyAll(AllOpts),
}

#[derive(Args, Default)]
struct Opts {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface as name:key=value,..., e.g. torus:R=2,a=1.
    #[arg(long)]
    surface: Option<String>,
    /// willmore, bending, helfrich, pwillmore, ksquared or area.
    #[arg(long)]
    density: Option<String>,
    /// Ambient curvature, also used by the willmore and bending densities.
    #[arg(long, allow_negative_numbers = true)]
    k0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long)]
    kc: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kbar: Option<f64>,
    /// const, const:c, harmonic:l,m, random:seed=N or a CSV file.
    #[arg(long)]
    u: Option<String>,
    /// Test function for laplacian_f and h_hess_f, same forms as --u.
    #[arg(long)]
    f: Option<String>,
    /// g, ginv, dS, 2H, K, laplacian_f, h_hess_f or all.
    #[arg(long)]
    quantity: Option<String>,
    /// Longitude nodes; the other direction uses half.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Allow integration over open patches.
    #[arg(long)]
    allow_open: bool,
    /// none or volume.
    #[arg(long)]
    constraint: Option<String>,
    /// Evaluate the second variation outside its validity.
    #[arg(long)]
    force: bool,
    /// Compare with the finite-difference oracle.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AllOpts {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    Numerical,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

impl Opts {
    fn config(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        let field = |s: &Option<String>| s.as_deref().map(str::parse::<FieldSpec>).transpose();
        let constraint = match self.constraint.as_deref() {
            None => None,
            Some("none") => Some(Constraint::None),
            Some("volume") => Some(Constraint::Volume),
            Some(other) => {
                return Err(Error::Parse(format!("--constraint '{other}': expected none or volume")))
            }
        };
        let flags = RunConfig {
            surface: self.surface.clone(),
            k0: self.k0,
            density: self.density.clone(),
            p: self.p,
            c0: self.c0,
            kc: self.kc,
            kbar: self.kbar,
            u: field(&self.u)?,
            f: field(&self.f)?,
            quantity: self.quantity.clone(),
            grid: self.grid,
            step: self.step,
            tolerance: self.tolerance,
            min_order: None,
            allow_open: self.allow_open.then_some(true),
            constraint,
            force: self.force.then_some(true),
            lmax: self.lmax,
            k: self.k,
            r: self.r,
            format: self.format.as_deref().map(str::parse).transpose()?,
            output: self.output.clone(),
        };
        let c = base.merged(flags);
        c.validate()?;
        Ok(c)
    }
}

/// Table output: a header and rows, or key/value pairs.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn pairs(pairs: &[(&str, String)]) -> Self {
        Table {
            header: vec!["key".into(), "value".into()],
            rows: pairs.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect(),
        }
    }

    fn reports(reports: &[VariationReport]) -> Self {
        Table {
            header: [
                "quantity",
                "formula",
                "oracle",
                "abs_error",
                "rel_error",
                "fd_step",
                "order",
                "at_noise_floor",
            ]
            .map(String::from)
            .to_vec(),
            rows: reports
                .iter()
                .map(|r| {
                    vec![
                        r.quantity.clone(),
                        r.formula_value.to_string(),
                        r.oracle_value.to_string(),
                        r.abs_error.to_string(),
                        r.rel_error.to_string(),
                        r.fd_step.to_string(),
                        r.convergence_order.to_string(),
                        r.at_noise_floor.to_string(),
                    ]
                })
                .collect(),
        }
    }

    fn render(&self) -> String {
        let mut out = self.header.join(",") + "\n";
        for r in &self.rows {
            out += &r.join(",");
            out.push('\n');
        }
        out
    }
}

fn emit(format: OutputFormat, output: Option<&PathBuf>, command: &str, body: Value, table: Table) -> Outcome {
    let text = match format {
        OutputFormat::Json => {
            let mut doc = json!({ "schema": SCHEMA, "command": command });
            if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
                d.extend(b);
            }
            serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n"
        }
        OutputFormat::Csv => table.render(),
    };
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Invalid(format!("--output '{}': {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Invalid(e.to_string()))
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn emit_with(c: &RunConfig, command: &str, body: Value, table: Table) -> Outcome {
    emit(c.format.unwrap_or_default(), c.output.as_ref(), command, body, table)
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical)
    }
}

fn curvature(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = c.sample()?;
    let mut nodes = Vec::with_capacity(s.len());
    let mut rows = Vec::with_capacity(s.len());
    for (k, n) in s.nodes().iter().enumerate() {
        let (u, v) = s.domain().point(k);
        let x = n.scalars;
        nodes.push(json!({
            "u": u, "v": v, "H": x.mean, "K": x.gauss, "K_E": x.extrinsic_gauss,
            "kappa1": x.kappa1, "kappa2": x.kappa2,
        }));
        rows.push(
            [u, v, x.mean, x.gauss, x.extrinsic_gauss, x.kappa1, x.kappa2]
                .iter()
                .map(f64::to_string)
                .collect(),
        );
    }
    let header = ["u", "v", "H", "K", "K_E", "kappa1", "kappa2"].map(String::from).to_vec();
    emit_with(
        &c,
        "curvature",
        json!({ "surface": s.name(), "k0": s.space_form().k0(), "nodes": nodes }),
        Table { header, rows },
    )
}

fn energy(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = c.sample()?;
    let d = c.density_spec()?;
    let value = functional_value(&s, d.build()?.as_ref())?;
    emit_with(
        &c,
        "energy",
        json!({ "surface": s.name(), "density": to_value(&d), "value": value }),
        Table::pairs(&[("value", value.to_string())]),
    )
}

fn variation(o: &Opts, order: VariationOrder) -> Outcome {
    let c = o.config()?;
    let s = c.sample()?;
    let d = c.density_spec()?;
    let e = d.build()?;
    let u = c.field().build(&s)?;
    let command = match order {
        VariationOrder::First => "first-variation",
        VariationOrder::Second => "second-variation",
    };
    let mut body = json!({ "surface": s.name(), "density": to_value(&d), "u": c.field().to_string() });
    let mut pairs = Vec::new();
    let mut multiplier = None;
    match order {
        VariationOrder::First => {
            let value = first_variation(&s, e.as_ref(), &u)?;
            body["value"] = json!(value);
            pairs.push(("value", value.to_string()));
        }
        VariationOrder::Second => {
            let opts = SecondVariationOptions {
                constraint: c.constraint.unwrap_or_default(),
                force: c.force.unwrap_or(false),
            };
            let sv = second_variation(&s, e.as_ref(), &u, opts)?;
            if opts.constraint == Constraint::Volume {
                multiplier = Some(sv.multiplier);
            }
            pairs.push(("value", sv.value.to_string()));
            pairs.push(("lagrangian_shifted", sv.lagrangian_shifted.to_string()));
            pairs.push(("validity", to_value(&sv.validity).as_str().unwrap_or("").to_string()));
            body["value"] = json!(sv.value);
            body["second_variation"] = to_value(&sv);
        }
    }
    let mut ok = true;
    if o.verify {
        let opts = OracleOptions {
            multiplier,
            step: c.step,
        };
        let r = fd_variation_oracle(&s, e.as_ref(), &u, order, opts)?;
        ok = r.passes(c.tolerance.unwrap_or(VERIFY_TOLERANCE), c.min_order.unwrap_or(VERIFY_ORDER));
        pairs.push(("oracle", r.oracle_value.to_string()));
        pairs.push(("rel_error", r.rel_error.to_string()));
        pairs.push(("convergence_order", r.convergence_order.to_string()));
        pairs.push(("passed", ok.to_string()));
        body["oracle"] = to_value(&r);
        body["passed"] = json!(ok);
    }
    emit_with(&c, command, body, Table::pairs(&pairs))?;
    verdict(ok)
}

fn residual(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = c.sample()?;
    let d = c.density_spec()?;
    let r = el_residual(&s, d.build()?.as_ref())?;
    let sup = r.max_abs();
    let rows = r
        .values()
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let (u, v) = s.domain().point(k);
            vec![u.to_string(), v.to_string(), x.to_string()]
        })
        .collect();
    emit_with(
        &c,
        "el-residual",
        json!({ "surface": s.name(), "density": to_value(&d), "sup_norm": sup, "values": r.values() }),
        Table {
            header: ["u", "v", "residual"].map(String::from).to_vec(),
            rows,
        },
    )
}

fn evolution(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = c.sample()?;
    let u = c.field().build(&s)?;
    let quantities = c.quantities()?;
    let f = match &c.f {
        Some(spec) => Some(spec.build(&s)?),
        None if quantities.iter().any(|q| q.needs_f()) => Some(FieldSpec::Random { seed: 1 }.build(&s)?),
        None => None,
    };
    let reports = evolution_check_multi(&s, &u, f.as_ref(), &quantities, c.step)?;
    let (tol, order) = (c.tolerance.unwrap_or(VERIFY_TOLERANCE), c.min_order.unwrap_or(VERIFY_ORDER));
    let ok = reports.iter().all(|r| r.passes(tol, order));
    let mut body = json!({
        "surface": s.name(),
        "k0": s.space_form().k0(),
        "u": c.field().to_string(),
        "reports": to_value(&reports),
        "passed": ok,
    });
    if let [r] = reports.as_slice() {
        body["convergence_order"] = json!(r.convergence_order);
        body["rel_error"] = json!(r.rel_error);
    }
    emit_with(&c, "verify-evolution", body, Table::reports(&reports))?;
    verdict(ok)
}

fn setting(c: &RunConfig) -> Result<PWillmoreSetting, Error> {
    PWillmoreSetting::new(c.p.unwrap_or(2.0), c.r.unwrap_or(1.0))
}

fn sphere_stability(o: &Opts) -> Outcome {
    let c = o.config()?;
    let rep = stability_report(&setting(&c)?, c.lmax.unwrap_or(6))?;
    let mut pairs = vec![
        ("p", rep.p.to_string()),
        ("r", rep.r.to_string()),
        ("l1_index", rep.l1_index.to_string()),
        ("verdict", rep.verdict.to_string()),
    ];
    let per_l: Vec<String> = rep.eigenspaces.iter().map(|e| e.predicted.to_string()).collect();
    pairs.push(("eigenspace_indices", per_l.join(" ")));
    emit_with(&c, "sphere-stability", to_value(&rep), Table::pairs(&pairs))
}

fn spectrum(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = sphere_sample(c.r.unwrap_or(1.0), c.grid.unwrap_or(curvevar::acceptance::SPECTRUM_GRID))?;
    let rep = spectrum_check(&s, c.k.unwrap_or(2))?;
    let pairs = [
        ("k", rep.k.to_string()),
        ("eigenvalue", rep.eigenvalue.to_string()),
        ("eigenvalue_error", rep.eigenvalue_error.to_string()),
        ("stated_multiplicity", rep.stated_multiplicity.to_string()),
        ("measured_multiplicity", rep.measured_multiplicity.to_string()),
    ];
    emit_with(&c, "spectrum", to_value(&rep), Table::pairs(&pairs))
}

fn poincare(o: &Opts) -> Outcome {
    let c = o.config()?;
    let s = sphere_sample(c.r.unwrap_or(1.0), c.grid())?;
    let u = c.field().build(&s)?;
    let rep = poincare_check(&s, &u)?;
    let value = to_value(&rep);
    let pairs: Vec<(&str, String)> = match &value {
        Value::Object(m) => m.iter().map(|(k, v)| (k.as_str(), v.to_string())).collect(),
        _ => Vec::new(),
    };
    emit_with(&c, "poincare", json!({ "u": c.field().to_string(), "report": value.clone() }), Table::pairs(&pairs))
}

fn verify_all(o: &AllOpts) -> Outcome {
    let format: OutputFormat = o.format.as_deref().map(str::parse).transpose()?.unwrap_or_default();
    if let Some(bad) = o.only.iter().find(|id| **id == 0 || **id > CRITERIA) {
        return Err(Failure::Invalid(format!("--only: no criterion {bad}; expected 1..={CRITERIA}")));
    }
    let results = if o.only.is_empty() {
        run_all()
    } else {
        o.only.iter().map(|id| run_criterion(*id)).collect()
    };
    for r in &results {
        eprintln!("{r}");
    }
    let ok = results.iter().all(|r| r.passed);
    let table = Table {
        header: ["id", "passed", "title"].map(String::from).to_vec(),
        rows: results
            .iter()
            .map(|r| vec![r.id.to_string(), r.passed.to_string(), format!("\"{}\"", r.title)])
            .collect(),
    };
    emit(
        format,
        o.output.as_ref(),
        "verify-all",
        json!({ "criteria": to_value(&results), "passed": ok }),
        table,
    )?;
    verdict(ok)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("CURVEVAR_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Invalid(format!("CURVEVAR_THREADS='{v}': expected a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Curvature(o) => curvature(o),
        Command::Energy(o) => energy(o),
        Command::FirstVariation(o) => variation(o, VariationOrder::First),
        Command::SecondVariation(o) => variation(o, VariationOrder::Second),
        Command::ElResidual(o) => residual(o),
        Command::VerifyEvolution(o) => evolution(o),
        Command::SphereStability(o) => sphere_stability(o),
        Command::Spectrum(o) => spectrum(o),
        Command::Poincare(o) => poincare(o),
        Command::VerifyAll(o) => verify_all(o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical) => ExitCode::from(2),
    }
}
