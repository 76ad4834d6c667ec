//! Monte Carlo harness: satisfiability sweeps over a density grid, core-size
//! measurements, and exhaustive cluster censuses, all reproducible from a
//! single master seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_partition, find_flippable_cycles, frozen_columns, ClusterReport};
use crate::instance::{incidence, sample_instance, ConstraintDistribution};
use crate::linalg::{group_constraint, AbelianGroup};
use crate::peel::{
    enumerate_all_solutions, extensions_per_core_solution, peel_2core, solve, SolveStatus,
    DEFAULT_BUDGET,
};
use crate::rng::derive_sub_seed;
use crate::thresholds::profile;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    /// density grid, values of d/k = m/n, ascending
    pub grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    pub dist: ConstraintDistribution,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be >= 1".into()));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("grid must be nonempty and strictly ascending".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub d_over_k: f64,
    pub m: usize,
    pub trials: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
    /// mean n★/n over the trials
    pub mean_core_cols: f64,
    /// mean m★/n over the trials
    pub mean_core_rows: f64,
    pub wall_time_s: f64,
}

impl SweepRow {
    pub fn sat_fraction(&self) -> f64 {
        self.sat as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// the support admits a constant solution, so P[sat] = 1 identically
    pub constant_support_warning: bool,
}

/// Solve `trials` fresh instances at every grid density. Trial (g, t) uses
/// the RNG stream (seed, g, t), so the outcome is a pure function of the
/// config, independent of the worker count.
pub fn sweep_satisfiability(cfg: &SweepConfig, workers: usize) -> Result<SweepOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let n = cfg.n;
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (g, &d_over_k) in cfg.grid.iter().enumerate() {
        let m = (d_over_k * n as f64).round() as usize;
        let start = std::time::Instant::now();
        let trial_results: Vec<(SolveStatus, usize, usize)> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let inst_seed = derive_sub_seed(cfg.seed, &[g as u64, t]);
                    let inst = sample_instance(n, m, &cfg.dist, inst_seed)?;
                    let report = solve(&inst, cfg.budget)?;
                    Ok((report.status, report.n_star, report.m_star))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut row = SweepRow {
            d_over_k,
            m,
            trials: cfg.trials,
            sat: 0,
            unsat: 0,
            unknown: 0,
            mean_core_cols: 0.0,
            mean_core_rows: 0.0,
            wall_time_s: 0.0,
        };
        for (status, n_star, m_star) in trial_results {
            match status {
                SolveStatus::Sat => row.sat += 1,
                SolveStatus::Unsat => row.unsat += 1,
                SolveStatus::Unknown => row.unknown += 1,
            }
            row.mean_core_cols += n_star as f64;
            row.mean_core_rows += m_star as f64;
        }
        row.mean_core_cols /= (cfg.trials as usize * n) as f64;
        row.mean_core_rows /= (cfg.trials as usize * n) as f64;
        row.wall_time_s = start.elapsed().as_secs_f64();
        rows.push(row);
    }
    // sat fraction must be nonincreasing in density up to Monte Carlo noise
    for pair in rows.windows(2) {
        let (f1, f2) = (pair[0].sat_fraction(), pair[1].sat_fraction());
        let sigma = ((f1 * (1.0 - f1) + f2 * (1.0 - f2)) / cfg.trials as f64).sqrt();
        if f2 - f1 > 5.0 * sigma.max(1e-12) {
            return Err(Error::Invalid(format!(
                "sat fraction rose from {f1} to {f2} between d/k {} and {}: beyond 5 sigma",
                pair[0].d_over_k, pair[1].d_over_k
            )));
        }
    }
    Ok(SweepOutcome {
        rows,
        constant_support_warning: !cfg.dist.support().constant_solutions().is_empty(),
    })
}

/// Density where the interpolated sat fraction crosses 1/2.
pub fn estimate_crossover(rows: &[SweepRow]) -> Result<f64> {
    for pair in rows.windows(2) {
        let (f1, f2) = (pair[0].sat_fraction(), pair[1].sat_fraction());
        if f1 >= 0.5 && f2 < 0.5 {
            let t = (f1 - 0.5) / (f1 - f2);
            return Ok(pair[0].d_over_k + t * (pair[1].d_over_k - pair[0].d_over_k));
        }
    }
    Err(Error::Invalid("sat fractions do not bracket 1/2".into()))
}

/// Deterministic CSV with the fixed column set; floats at 6 decimals.
pub fn sweep_csv(cfg: &SweepConfig, outcome: &SweepOutcome) -> String {
    let mut out = String::from("k,r,n,m,d_over_k,trials,sat,unsat,unknown,mean_core_cols,mean_core_rows,seed\n");
    let k = cfg.dist.support().k();
    let r = cfg.dist.support().r();
    for row in &outcome.rows {
        out.push_str(&format!(
            "{k},{r},{},{},{:.6},{},{},{},{},{:.6},{:.6},{}\n",
            cfg.n,
            row.m,
            row.d_over_k,
            row.trials,
            row.sat,
            row.unsat,
            row.unknown,
            row.mean_core_cols,
            row.mean_core_rows,
            cfg.seed,
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreSizeTrial {
    pub trial: u64,
    pub n_star_fraction: f64,
    pub m_star_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreSizeReport {
    pub k: usize,
    pub d: f64,
    pub n: usize,
    pub predicted_col_fraction: f64,
    pub predicted_row_fraction: f64,
    pub mean_col_fraction: f64,
    pub mean_row_fraction: f64,
    pub stdev_col_fraction: f64,
    pub stdev_row_fraction: f64,
    pub trials: Vec<CoreSizeTrial>,
}

/// Peel random k-uniform incidences and compare the core dimensions against
/// π_k(d) and (d/k)ρ^k. The core depends only on the hypergraph, so the
/// constraint content is irrelevant; a fixed binary constraint is used.
pub fn core_size_experiment(k: usize, d: f64, n: usize, trials: u64, seed: u64) -> Result<CoreSizeReport> {
    if d <= 0.0 {
        return Err(Error::Invalid("need d > 0".into()));
    }
    let group = AbelianGroup::cyclic(2);
    let psi = group_constraint(&group, &group.zero(), k, "z2b0")?;
    let pi = ConstraintDistribution::atomic(psi)?;
    let m = (d * n as f64 / k as f64).round() as usize;
    let prof = profile(k, 2, d)?;
    let mut rows = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let inst = sample_instance(n, m, &pi, derive_sub_seed(seed, &[trial]))?;
        let peel = peel_2core(&incidence(&inst));
        rows.push(CoreSizeTrial {
            trial,
            n_star_fraction: peel.n_star() as f64 / n as f64,
            m_star_fraction: peel.m_star() as f64 / n as f64,
        });
    }
    let mean = |f: fn(&CoreSizeTrial) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let mean_col = mean(|t| t.n_star_fraction);
    let mean_row = mean(|t| t.m_star_fraction);
    let stdev = |vals: Vec<f64>, mu: f64| {
        if vals.len() < 2 {
            0.0
        } else {
            (vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
        }
    };
    Ok(CoreSizeReport {
        k,
        d,
        n,
        predicted_col_fraction: prof.pi_k,
        predicted_row_fraction: prof.core_row_fraction,
        mean_col_fraction: mean_col,
        mean_row_fraction: mean_row,
        stdev_col_fraction: stdev(rows.iter().map(|t| t.n_star_fraction).collect(), mean_col),
        stdev_row_fraction: stdev(rows.iter().map(|t| t.m_star_fraction).collect(), mean_row),
        trials: rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusTrial {
    pub trial: u64,
    pub m: usize,
    pub satisfiable: bool,
    pub solution_count: usize,
    pub report: ClusterReport,
    /// all clusters have the same size
    pub sizes_equal: bool,
    /// each cluster's size is (distinct core restrictions in it) × r^#free
    pub size_law_ok: bool,
    /// V*-restriction partition equals core-solutions-modulo-cycle-columns
    pub partition_consistent: bool,
}

/// Exhaustive per-trial cluster analysis on enumerable instances
/// (r^n ≤ 10⁶ required).
pub fn cluster_census(
    pi: &ConstraintDistribution,
    n: usize,
    d_over_k: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<CensusTrial>> {
    const CAP: u64 = 1_000_000;
    let m = (d_over_k * n as f64).round() as usize;
    let mut out = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let inst = sample_instance(n, m, pi, derive_sub_seed(seed, &[trial]))?;
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        let cycles = find_flippable_cycles(&peel, &b);
        let frozen = frozen_columns(&peel, &cycles);
        let solutions = enumerate_all_solutions(&inst, CAP)?;
        let report = cluster_partition(&solutions, &frozen);
        let per_core = extensions_per_core_solution(&inst, &peel) as usize;
        let mut size_law_ok = true;
        let mut partition_consistent = true;
        // recompute the partition from core restrictions with cycle columns
        // masked out, and check the size law cluster by cluster
        let mut by_key: std::collections::BTreeMap<Vec<u8>, Vec<usize>> = Default::default();
        let cycle_cols: std::collections::BTreeSet<u32> =
            cycles.iter().flat_map(|c| c.columns.iter().copied()).collect();
        for (i, sol) in solutions.iter().enumerate() {
            let key: Vec<u8> = peel
                .core_cols
                .iter()
                .filter(|c| !cycle_cols.contains(c))
                .map(|&c| sol[c as usize])
                .collect();
            by_key.entry(key).or_default().push(i);
        }
        let mut masked_sizes: Vec<usize> = by_key.values().map(Vec::len).collect();
        masked_sizes.sort_unstable();
        let mut reported_sizes = report.cluster_sizes.clone();
        reported_sizes.sort_unstable();
        if masked_sizes != reported_sizes || by_key.len() != report.cluster_count {
            partition_consistent = false;
        }
        for members in by_key.values() {
            let cores: std::collections::BTreeSet<Vec<u8>> = members
                .iter()
                .map(|&i| peel.core_cols.iter().map(|&c| solutions[i][c as usize]).collect())
                .collect();
            if members.len() != cores.len() * per_core {
                size_law_ok = false;
            }
        }
        let sizes_equal = report.cluster_sizes.windows(2).all(|w| w[0] == w[1]);
        out.push(CensusTrial {
            trial,
            m,
            satisfiable: !solutions.is_empty(),
            solution_count: solutions.len(),
            report,
            sizes_equal,
            size_law_ok,
            partition_consistent,
        });
    }
    Ok(out)
}
