use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use metriclie::catalog::{catalog_entries, catalog_entry};
use metriclie::curvature::{ricci, ricci_matrix, CompactQuotient};
use metriclie::format::{emit_entry, format_scalar, load_document, parse_scalar, LoadOptions, ModelDocument};
use metriclie::geodesic::{go_certificate, go_survey, GoCertificate, ProbePlan};
use metriclie::killing::{length_profile, verify_abelian_ideal_theorem, OrbitPlan, TheoremStatus};
use metriclie::report::{m1_samples, render_text, run_analysis, AnalysisOptions};

/// Curvature and geodesic-orbit analysis of homogeneous Riemannian models.
#[derive(Parser)]
#[command(name = "metriclie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Model file.
    file: PathBuf,
    #[arg(long)]
    eps_struct: Option<f64>,
    #[arg(long)]
    eps_rank: Option<f64>,
    #[arg(long)]
    eps_len: Option<f64>,
    /// Accept models with soft invariant violations (reported as warnings).
    #[arg(long)]
    force: bool,
    /// Seed for sampled probes and orbits (default: METRICLIE_SEED or 42).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model file.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Run every analysis and print a summary.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Write the full JSON report here ("-" for standard output).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Number of random probe directions.
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Geodesic-vector certificate for one direction, or the full survey.
    GoCheck {
        #[command(flatten)]
        common: Common,
        /// Direction in m-coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_coord)]
        direction: Option<Vec<f64>>,
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Ricci form at a direction, or the full matrix.
    Ricci {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_coord)]
        direction: Option<Vec<f64>>,
    },
    /// Length profile of a Killing field along sampled orbits.
    ConstLength {
        #[command(flatten)]
        common: Common,
        /// Field in algebra coordinates, comma separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_coord)]
        field: Vec<f64>,
    },
    /// Constant-length test for a named abelian ideal.
    Theorem1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ideal: String,
    },
    /// Compare Ricci curvature of K/H with that of G/H for a named subalgebra.
    Ricstar {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Built-in models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Emit { name: String },
}

fn parse_coord(s: &str) -> Result<f64, String> {
    parse_scalar(s.trim()).ok_or_else(|| format!("'{s}' is not a number"))
}

/// Failure with its exit status.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

impl Common {
    fn seed(&self) -> Result<u64, Fail> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("METRICLIE_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| usage(format!("METRICLIE_SEED is not an integer: '{v}'"))),
            Err(_) => Ok(42),
        }
    }

    fn load(&self) -> Result<ModelDocument, Fail> {
        let opts = LoadOptions { eps_struct: self.eps_struct, eps_rank: self.eps_rank, eps_len: self.eps_len, force: self.force };
        load_document(&self.file, &opts).map_err(|e| Fail(1, format!("{}: {e}", self.file.display())))
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format_scalar(*x)).collect::<Vec<_>>().join(",")
}

fn print_certificate(c: &GoCertificate) {
    println!("direction      {}", fmt_vec(&c.direction));
    println!("feasible       {}", if c.feasible { "yes" } else { "no (infeasible)" });
    println!("residual       {:e} (threshold {:e})", c.residual, c.threshold);
    if let Some(h) = &c.h_solution {
        println!("H_X            {}", fmt_vec(h));
        println!("re-substituted {:e}", c.substitution_residual);
    }
    if let Some(w) = &c.witness {
        println!("witness Y      {}", fmt_vec(&w.y));
        println!("witness value  {}", w.value);
    }
}

fn check_len(v: &[f64], n: usize, what: &str) -> Result<DVector<f64>, Fail> {
    if v.len() != n {
        return Err(usage(format!("{what} needs {n} coordinates, got {}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

fn write_out(path: &Path, text: &str) -> Result<(), Fail> {
    if path == Path::new("-") {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).map_err(|e| Fail(1, format!("cannot write {}: {e}", path.display())))
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Validate { common } => {
            let doc = common.load()?;
            let v = doc.model.validation();
            println!("{}: valid", doc.model.name());
            println!("antisymmetry residual  {:e}", v.structure.antisymmetry_residual);
            println!("jacobi residual        {:e}", v.structure.jacobi_residual);
            println!("[h,h] ⊂ h residual     {:e}", v.isotropy_subalgebra.residual);
            println!("[h,m] ⊂ m residual     {:e}", v.reductive.residual);
            println!("metric invariance      {:e}", v.metric_invariance.residual);
            println!("metric min eigenvalue  {}", v.metric_min_eigenvalue);
            for w in &v.warnings {
                println!("warning: {w}");
            }
        }
        Command::Analyze { common, json, probes } => {
            let doc = common.load()?;
            let mut opts = AnalysisOptions::with_seed(common.seed()?);
            if let Some(p) = probes {
                opts.probe_plan.random_count = p;
            }
            let rep = run_analysis(&doc, &opts);
            if json.as_deref() != Some(Path::new("-")) {
                print!("{}", render_text(&rep));
            }
            if let Some(path) = json {
                write_out(&path, &rep.to_json())?;
            }
            if rep.has_breach() {
                return Err(Fail(3, rep.internal_checks.breaches.join("; ")));
            }
        }
        Command::GoCheck { common, direction, probes } => {
            let doc = common.load()?;
            let m = &doc.model;
            match direction {
                Some(d) => {
                    let x = check_len(&d, m.complement_dim(), "direction")?;
                    let c = go_certificate(m, &x).map_err(|e| Fail(1, e.to_string()))?;
                    print_certificate(&c);
                    if c.feasible && c.substitution_residual > c.threshold {
                        return Err(Fail(3, "feasible certificate fails re-substitution".into()));
                    }
                }
                None => {
                    let plan = ProbePlan { random_count: probes.unwrap_or(200), seed: common.seed()? };
                    let s = go_survey(m, &plan);
                    println!("survey         {}", if s.passed() { "pass" } else { "fail" });
                    println!("probes         {}", s.certificates.len());
                    if let Some(w) = s.witness() {
                        println!("first failure  {}", w.probe);
                        print_certificate(&w.certificate);
                    }
                }
            }
        }
        Command::Ricci { common, direction } => {
            let doc = common.load()?;
            let m = &doc.model;
            match direction {
                Some(d) => {
                    let x = check_len(&d, m.complement_dim(), "direction")?;
                    let r = ricci(m, &x).map_err(|e| Fail(1, e.to_string()))?;
                    println!("Ric(X,X)        {}", r.value);
                    println!("  -B/2          {}", r.killing_term);
                    println!("  bracket term  {}", r.bracket_term);
                    println!("  double sum    {}", r.double_sum_term);
                    println!("  Z term        {}", r.z_term);
                }
                None => {
                    let ric = ricci_matrix(m);
                    for i in 0..ric.nrows() {
                        let row: Vec<String> = ric.row(i).iter().map(|x| format!("{:>14.9}", x + 0.0)).collect();
                        println!("{}", row.join(" "));
                    }
                }
            }
        }
        Command::ConstLength { common, field } => {
            let doc = common.load()?;
            let m = &doc.model;
            let x = check_len(&field, m.dim(), "field")?;
            let plan = OrbitPlan { seed: common.seed()?, ..OrbitPlan::default() };
            let p = length_profile(m, &x, &plan).map_err(|e| Fail(1, e.to_string()))?;
            println!("field          {}", fmt_vec(&p.field));
            println!("samples        {}", p.samples.len());
            println!("length at o    {}", p.samples[0].length);
            println!("spread (|X|^2) {:e}", p.spread);
            println!("max residual   {:e}", p.max_critical_residual);
            println!("verdict        {:?} ({})", p.verdict, p.scope);
        }
        Command::Theorem1 { common, ideal } => {
            let doc = common.load()?;
            let a = doc.ideal(&ideal).ok_or_else(|| Fail(1, format!("no ideal named '{ideal}' in the model file")))?;
            let s = a.subspace.clone().with_label(&a.name);
            let seed = common.seed()?;
            let go = go_survey(&doc.model, &ProbePlan { seed, ..ProbePlan::default() }).passed();
            let plan = OrbitPlan { seed, ..OrbitPlan::default() };
            let t = verify_abelian_ideal_theorem(&doc.model, &s, &plan, go).map_err(|e| Fail(1, e.to_string()))?;
            println!("ideal          {} (dim {})", t.ideal_label, t.ideal_dim);
            println!("is ideal       {} (residual {:e})", t.preconditions.ideal.holds, t.preconditions.ideal.residual);
            println!("abelian        {} (residual {:e})", t.preconditions.abelian.holds, t.preconditions.abelian.residual);
            println!("GO survey      {}", if go { "pass" } else { "fail" });
            println!("max spread     {:e}", t.max_spread);
            let status = match t.status {
                TheoremStatus::Pass => "PASS",
                TheoremStatus::Contradiction => "CONTRADICTION",
                TheoremStatus::Indeterminate => "INDETERMINATE",
                TheoremStatus::PreconditionFailed => "PRECONDITION FAILED",
            };
            println!("status         {status}");
        }
        Command::Ricstar { common, k, samples } => {
            let doc = common.load()?;
            let sub = doc.subalgebra(&k).ok_or_else(|| Fail(1, format!("no subalgebra named '{k}' in the model file")))?;
            let s = sub.subspace.clone().with_label(&sub.name);
            let q = CompactQuotient::new(&doc.model, &s).map_err(|e| Fail(1, e.to_string()))?;
            println!("k              {} (dim m1 = {}, dim m2 = {})", k, q.m1.dim(), q.m2_basis.len());
            println!("{:>16} {:>16} {:>16} {:>12}", "Ric*(X,X)", "Ric(X,X)", "correction", "|diff|");
            for x in m1_samples(&q, samples, common.seed()?) {
                let r = q.evaluate(&doc.model, &x).map_err(|e| Fail(1, e.to_string()))?;
                println!("{:>16.10} {:>16.10} {:>16.10} {:>12.3e}", r.left, r.ricci, r.correction, r.difference);
            }
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for e in catalog_entries() {
                    println!("{:<28} dim {}  dim h {}", e.name, e.model.dim(), e.model.isotropy_dim());
                }
            }
            CatalogAction::Emit { name } => {
                let e = catalog_entry(&name).ok_or_else(|| usage(format!("unknown catalog entry '{name}'")))?;
                print!("{}", emit_entry(&e));
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
