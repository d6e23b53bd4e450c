use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geomint::harness::{
    self, builtin_problems, parse_config, ExperimentConfig, COTANGENT_METHODS, METHODS,
};
use geomint::integrators::{ButcherTableau, CfScheme};
use geomint::order_theory::{check_order, dim_free_lie, trees_up_to, MAX_TREE_ORDER};
use geomint::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "geomint", version, about = "Lie group integrators and structure-preserving experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List problems and methods.
    List,
    /// Print ordered trees up to a grade.
    Trees {
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
    /// Check the order conditions of a scheme in exact arithmetic.
    Orderconds {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        order: usize,
    },
    /// Integrate one trajectory and write it as CSV.
    Integrate(RunArgs),
    /// Errors against a CF4 reference for a list of step sizes.
    Converge(RunArgs),
    /// Invariant drift along one run.
    Drift(RunArgs),
    /// Finite-difference symplecticity defect on the cotangent bundle.
    SymplecticCheck(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated step sizes.
    #[arg(long)]
    h: Option<String>,
    /// Largest step of a halving schedule (with --halvings).
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    halvings: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Extra `key=value` settings, as in the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Subcommand defaults, then the config file, then flags.
fn experiment(args: &RunArgs, defaults: &[(&str, &str)]) -> Result<ExperimentConfig> {
    let mut settings: BTreeMap<String, String> = defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let mut layer = |extra: BTreeMap<String, String>| {
        if extra.contains_key("h") {
            settings.remove("h0");
            settings.remove("halvings");
        }
        if extra.contains_key("h0") || extra.contains_key("halvings") {
            settings.remove("h");
        }
        settings.extend(extra);
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        layer(parse_config(&text)?);
    }
    let mut flags = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.insert(k.to_string(), v);
        }
    };
    put("problem", args.problem.clone());
    put("method", args.method.clone());
    put("h", args.h.clone());
    put("h0", args.h0.map(|v| v.to_string()));
    put("halvings", args.halvings.map(|v| v.to_string()));
    put("t_end", args.t_end.map(|v| v.to_string()));
    put("output", args.output.as_ref().map(|p| p.display().to_string()));
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        flags.insert(k.trim().to_string(), v.trim().to_string());
    }
    layer(flags);
    let mut cfg = ExperimentConfig::default();
    cfg.apply(&settings)?;
    cfg.validate()?;
    Ok(cfg)
}

fn with_output(cfg: &ExperimentConfig, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| Error::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush().map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => write(&mut io::stdout().lock()),
    }
}

fn scheme(name: &str) -> Result<CfScheme> {
    match name {
        "cf4" => Ok(CfScheme::cf4()),
        "cg3" => Ok(CfScheme::cg3()),
        "lie-euler" => Ok(CfScheme::lie_euler()),
        "rk4-classical" => CfScheme::single_exponential("rk4-classical", &ButcherTableau::rk4()),
        _ => Err(Error::Lookup { kind: "scheme", name: name.to_string() }),
    }
}

fn list() -> Result<()> {
    println!("problems:");
    for p in builtin_problems() {
        let inv: Vec<String> = p.invariants.iter().map(|o| o.name.clone()).collect();
        println!("  {:<24} {} [invariants: {}]", p.name, p.description, if inv.is_empty() { "none".into() } else { inv.join(", ") });
    }
    println!("methods:");
    for m in METHODS {
        println!("  {:<24} order {} ({})", m.name, m.order.map_or("?".into(), |o| o.to_string()), m.label);
    }
    println!("cotangent methods (symplectic-check): {}", COTANGENT_METHODS.join(", "));
    Ok(())
}

fn trees(max_order: usize) -> Result<()> {
    if max_order > MAX_TREE_ORDER {
        return Err(Error::Usage(format!("--max-order is capped at {MAX_TREE_ORDER}")));
    }
    for (grade, group) in trees_up_to(max_order)?.iter().enumerate() {
        println!("grade {grade} ({} nodes): {} trees", grade + 1, group.len());
        for t in group {
            println!("  {t}  alpha={}", t.alpha());
        }
    }
    Ok(())
}

fn orderconds(name: &str, order: usize) -> Result<()> {
    let s = scheme(name)?;
    let report = check_order(&s, order)?;
    println!("{report}");
    // Independent conditions per grade are the free Lie algebra dimensions.
    let counts = (1..=order).map(dim_free_lie).collect::<Result<Vec<_>>>()?;
    let terms: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    println!("independent conditions through grade {order}: {} = {}", terms.join("+"), counts.iter().sum::<u64>());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => list(),
        Command::Trees { max_order } => trees(max_order),
        Command::Orderconds { scheme, order } => orderconds(&scheme, order),
        Command::Integrate(args) => {
            let cfg = experiment(&args, &[])?;
            let (_, rec) = harness::run(&cfg)?;
            with_output(&cfg, |w| harness::write_trajectory_csv(&rec, w))
        }
        Command::Converge(args) => {
            let cfg = experiment(&args, &[("h0", "0.2"), ("halvings", "4")])?;
            let table = harness::converge(&cfg)?;
            if let Some(p) = table.final_order() {
                eprintln!("{} on {}: final order estimate {p:.3}", table.method, table.problem);
            }
            with_output(&cfg, |w| harness::write_convergence_csv(&table, w))
        }
        Command::Drift(args) => {
            let cfg = experiment(&args, &[])?;
            let table = harness::drift(&cfg)?;
            for (n, d) in table.invariant_names.iter().zip(&table.max_drift) {
                eprintln!("max drift {n}: {d:.3e}");
            }
            with_output(&cfg, |w| harness::write_drift_csv(&table, w))
        }
        Command::SymplecticCheck(args) => {
            let cfg = experiment(
                &args,
                &[("problem", "rigid_body_liepoisson"), ("method", "variational"), ("h", "0.05,0.1,0.2")],
            )?;
            let rows = harness::symplectic(&cfg)?;
            with_output(&cfg, |w| harness::write_symplectic_csv(&rows, w))
        }
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                eprintln!("run `geomint --help` for usage");
                ExitCode::from(1)
            }
        }
    }
}
