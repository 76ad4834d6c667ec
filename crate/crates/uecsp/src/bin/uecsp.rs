use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use uecsp::cluster::{cluster_partition, find_flippable_cycles, frozen_columns};
use uecsp::constraint::{f2_asymmetry_witness, ConstraintFunction, ConstraintSet};
use uecsp::experiments::{
    cluster_census, core_size_experiment, estimate_crossover, sweep_csv, sweep_satisfiability,
    SweepConfig,
};
use uecsp::group::reconstruct_group;
use uecsp::instance::{incidence, sample_instance, ConstraintDistribution, Instance};
use uecsp::peel::{enumerate_all_solutions, peel_2core, solve, DEFAULT_BUDGET};
use uecsp::product::{nongroup_family, product_theta, ThetaMap};
use uecsp::reducibility::reducibility_witness;
use uecsp::thresholds::{d_k, d_star, profile};
use uecsp::{Error, Result};

#[derive(Parser)]
#[command(name = "uecsp", about = "uniquely-extendable CSP toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report UE, commutativity, reducibility, composition symmetry, and
    /// group structure of a constraint set
    Analyze {
        /// JSON file: one constraint function or an array of them
        file: PathBuf,
    },
    /// Rebuild the abelian group behind a constraint set
    ReconstructGroup {
        file: PathBuf,
        /// base spin used as the group identity
        #[arg(long, default_value_t = 0)]
        alpha: u8,
    },
    /// Twisted product of two constraint functions
    Product {
        f1: PathBuf,
        f2: PathBuf,
        #[arg(long)]
        theta: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Member of the non-group commutative UE family
    Nongroup {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q1: u32,
        #[arg(long)]
        q2: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// distribution JSON: {"functions": [...], "weights": ["p/q", ...]}
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// write the plain-text form next to the JSON
        #[arg(long)]
        text: bool,
    },
    /// Solve an instance (peeling plus core solving)
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// List every solution of an enumerable instance
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        cap: u64,
    },
    /// 2-core peeling summary
    Peel { file: PathBuf },
    /// Flippable cycles, frozen columns, and (when enumerable) the cluster
    /// partition
    Clusters { file: PathBuf },
    /// Threshold numerics
    Thresholds {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: u8,
        #[arg(long, conflicts_with = "critical")]
        d: Option<f64>,
        /// print d_star, d_k, and d_k/k instead of a full profile
        #[arg(long)]
        critical: bool,
    },
    /// Satisfiability sweep over a density grid
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Core size measurements against the predicted fractions
    CoreSize(CoreSizeArgs),
    /// Exhaustive cluster census on enumerable random instances
    Census(CensusArgs),
}

#[derive(Args)]
struct CoreSizeArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d_over_k: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

/// On-disk sweep configuration; the distribution lives in its own file.
#[derive(Deserialize)]
struct SweepConfigFile {
    n: usize,
    grid: Vec<f64>,
    trials: u64,
    seed: Option<u64>,
    budget: Option<u64>,
    dist: PathBuf,
}

fn load_set(path: &PathBuf) -> Result<ConstraintSet> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let members: Vec<ConstraintFunction> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    ConstraintSet::new(members)
}

fn load_function(path: &PathBuf) -> Result<ConstraintFunction> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn load_distribution(path: &PathBuf) -> Result<ConstraintDistribution> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn analyze(file: &PathBuf) -> Result<()> {
    let set = load_set(file)?;
    let ue: Vec<_> = set
        .members()
        .iter()
        .map(|f| json!({ "function": f.name(), "violation": f.ue_violation() }))
        .collect();
    let all_ue = set.members().iter().all(|f| f.is_uniquely_extendable());
    let commutative: Vec<_> = set
        .members()
        .iter()
        .map(|f| json!({ "function": f.name(), "witness": f.commutativity_witness() }))
        .collect();
    let mut report = json!({
        "k": set.k(),
        "r": set.r(),
        "functions": set.members().iter().map(|f| f.name()).collect::<Vec<_>>(),
        "uniquely_extendable": all_ue,
        "ue_violations": ue,
        "commutative": set.members().iter().all(|f| f.is_commutative()),
        "commutativity_witnesses": commutative,
        "constant_solutions": set.constant_solutions(),
    });
    if all_ue {
        let red = reducibility_witness(&set)?;
        let f2 = f2_asymmetry_witness(&set)?;
        let group = match reconstruct_group(&set, 0) {
            Ok(eq) => json!({
                "equivalent": true,
                "invariant_factors": eq.group.invariant_factors(),
                "targets": eq.targets,
            }),
            Err(w) => json!({ "equivalent": false, "witness": w }),
        };
        report["reducible"] = json!(red.is_none());
        report["reducibility_witness"] = json!(red);
        report["f2_symmetric"] = json!(f2.is_none());
        report["f2_witness"] = json!(f2);
        report["group"] = group;
    }
    print_json(&report);
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Analyze { file } => analyze(&file)?,
        Command::ReconstructGroup { file, alpha } => {
            let set = load_set(&file)?;
            match reconstruct_group(&set, alpha) {
                Ok(eq) => print_json(&json!({
                    "equivalent": true,
                    "invariant_factors": eq.group.invariant_factors(),
                    "base_spin": eq.base_spin,
                    "targets": eq.targets,
                })),
                Err(w) => print_json(&json!({ "equivalent": false, "witness": w })),
            }
        }
        Command::Product { f1, f2, theta, output } => {
            let psi1 = load_function(&f1)?;
            let psi2 = load_function(&f2)?;
            let theta: ThetaMap = serde_json::from_str(&fs::read_to_string(&theta)?)?;
            let name = format!("{}_x_{}", psi1.name(), psi2.name());
            let prod = product_theta(&psi1, &psi2, &theta, name)?;
            emit_function(&prod, output.as_ref())?;
        }
        Command::Nongroup { k, q1, q2, output } => {
            let psi = nongroup_family(k, q1, q2)?;
            emit_function(&psi, output.as_ref())?;
        }
        Command::Gen { n, m, dist, seed, output, text } => {
            let pi = load_distribution(&dist)?;
            let inst = sample_instance(n, m, &pi, seed)?;
            fs::write(&output, inst.to_json())?;
            if text {
                fs::write(output.with_extension("txt"), inst.to_text())?;
            }
            eprintln!("wrote {} ({} constraints)", output.display(), inst.m());
        }
        Command::Solve { file, budget } => {
            let inst = load_instance(&file)?;
            print_json(&solve(&inst, budget)?);
        }
        Command::Enumerate { file, cap } => {
            let inst = load_instance(&file)?;
            print_json(&enumerate_all_solutions(&inst, cap)?);
        }
        Command::Peel { file } => {
            let inst = load_instance(&file)?;
            let peel = peel_2core(&incidence(&inst));
            print_json(&json!({
                "n": inst.n(),
                "m": inst.m(),
                "n_star": peel.n_star(),
                "m_star": peel.m_star(),
                "free_columns": peel.free_count(),
                "peel_order": peel.peel_order,
            }));
        }
        Command::Clusters { file } => {
            let inst = load_instance(&file)?;
            let b = incidence(&inst);
            let peel = peel_2core(&b);
            let cycles = find_flippable_cycles(&peel, &b);
            let frozen = frozen_columns(&peel, &cycles);
            let enumerable = uecsp::spins::table_size(inst.r(), inst.n()) <= 1_000_000;
            let partition = if enumerable {
                let solutions = enumerate_all_solutions(&inst, 1_000_000)?;
                Some(cluster_partition(&solutions, &frozen))
            } else {
                None
            };
            print_json(&json!({
                "n_star": peel.n_star(),
                "m_star": peel.m_star(),
                "flippable_cycles": cycles,
                "frozen_columns": frozen,
                "partition": partition,
            }));
        }
        Command::Thresholds { k, r, d, critical } => {
            if critical {
                let ds = d_star(k, 1e-6)?;
                let dk = d_k(k, 1e-6)?;
                print_json(&json!({
                    "k": k,
                    "d_star": ds,
                    "d_k": dk,
                    "d_k_over_k": dk / k as f64,
                }));
            } else {
                let d = d.ok_or_else(|| Error::Invalid("pass --d D or --critical".into()))?;
                print_json(&profile(k, r, d)?);
            }
        }
        Command::Sweep { config, output, workers } => {
            let file: SweepConfigFile = serde_json::from_str(&fs::read_to_string(&config)?)?;
            let seed = file
                .seed
                .ok_or_else(|| Error::Invalid("sweep config must set a seed".into()))?;
            let dist_path = if file.dist.is_relative() {
                config.parent().map(|p| p.join(&file.dist)).unwrap_or(file.dist.clone())
            } else {
                file.dist.clone()
            };
            let cfg = SweepConfig {
                n: file.n,
                grid: file.grid,
                trials: file.trials,
                seed,
                budget: file.budget.unwrap_or(DEFAULT_BUDGET),
                dist: load_distribution(&dist_path)?,
            };
            let outcome = sweep_satisfiability(&cfg, workers)?;
            if outcome.constant_support_warning {
                eprintln!("warning: support has a constant solution; every instance is satisfiable");
            }
            fs::write(&output, sweep_csv(&cfg, &outcome))?;
            match estimate_crossover(&outcome.rows) {
                Ok(x) => eprintln!("crossover at d/k = {x:.4}"),
                Err(_) => eprintln!("sat fractions do not bracket 1/2"),
            }
        }
        Command::CoreSize(a) => {
            print_json(&core_size_experiment(a.k, a.d, a.n, a.trials, a.seed)?);
        }
        Command::Census(a) => {
            let pi = load_distribution(&a.dist)?;
            print_json(&cluster_census(&pi, a.n, a.d_over_k, a.trials, a.seed)?);
        }
    }
    Ok(())
}

fn emit_function(psi: &ConstraintFunction, output: Option<&PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(psi)?;
    match output {
        Some(path) => {
            fs::write(path, json)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
