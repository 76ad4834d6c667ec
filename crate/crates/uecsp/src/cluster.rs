//! Flippable cycles in the 2-core, the frozen column set V*, the cycle
//! equivalence cluster partition, and the cluster exponent measurements.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::instance::{incidence, sample_instance, ConstraintDistribution, Instance};
use crate::linalg::{group_constraint, solve_mod_prime_power, AbelianGroup, SparseMatrix};
use crate::peel::{peel_2core, PeelResult};
use crate::thresholds::profile;
use crate::Result;

/// Columns v₀…v_{ℓ−1} and rows a₀…a_{ℓ−1} of the core with ℓ ≥ 3: row aᵢ
/// meets columns vᵢ and vᵢ₊₁ (mod ℓ), and each vᵢ meets no core row besides
/// aᵢ₋₁ and aᵢ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlippableCycle {
    pub columns: Vec<u32>,
    pub rows: Vec<u32>,
}

impl FlippableCycle {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Literal check of the defining invariants against B and the core.
pub fn replay_flippable_cycle(cycle: &FlippableCycle, peel: &PeelResult, b: &SparseMatrix) -> bool {
    let l = cycle.columns.len();
    if l < 3 || cycle.rows.len() != l {
        return false;
    }
    let core_rows: BTreeSet<u32> = peel.core_rows.iter().copied().collect();
    let core_cols: BTreeSet<u32> = peel.core_cols.iter().copied().collect();
    if !cycle.rows.iter().all(|r| core_rows.contains(r))
        || !cycle.columns.iter().all(|c| core_cols.contains(c))
    {
        return false;
    }
    if cycle.rows.iter().collect::<BTreeSet<_>>().len() != l
        || cycle.columns.iter().collect::<BTreeSet<_>>().len() != l
    {
        return false;
    }
    for i in 0..l {
        let row = cycle.rows[i] as usize;
        let (v, v_next) = (cycle.columns[i], cycle.columns[(i + 1) % l]);
        if !b.row(row).contains(&v) || !b.row(row).contains(&v_next) {
            return false;
        }
    }
    for i in 0..l {
        let col = cycle.columns[i];
        let allowed = [cycle.rows[(i + l - 1) % l], cycle.rows[i]];
        let touching: Vec<u32> = peel
            .core_rows
            .iter()
            .copied()
            .filter(|&r| b.row(r as usize).contains(&col))
            .collect();
        if touching.len() != 2 || touching.iter().any(|r| !allowed.contains(r)) {
            return false;
        }
    }
    true
}

/// All flippable cycles: restrict to core columns of core-degree exactly 2,
/// view them as edges of a multigraph on the core rows, and enumerate simple
/// cycles of length ≥ 3. Each cycle is produced once, anchored at its
/// smallest column.
pub fn find_flippable_cycles(peel: &PeelResult, b: &SparseMatrix) -> Vec<FlippableCycle> {
    let core_rows: BTreeSet<u32> = peel.core_rows.iter().copied().collect();
    // (row, row) endpoints of every core-degree-2 column, by column id
    let mut edges: Vec<(u32, u32, u32)> = Vec::new();
    for &col in &peel.core_cols {
        let touching: Vec<u32> = peel
            .core_rows
            .iter()
            .copied()
            .filter(|&r| b.row(r as usize).contains(&col))
            .collect();
        if let [u, v] = touching[..] {
            debug_assert!(core_rows.contains(&u) && core_rows.contains(&v));
            edges.push((col, u.min(v), u.max(v)));
        }
    }
    let mut adjacency: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for &(col, u, v) in &edges {
        adjacency.entry(u).or_default().push((v, col));
        adjacency.entry(v).or_default().push((u, col));
    }
    let mut cycles = Vec::new();
    // anchor each cycle at its minimum column: walk from the anchor's larger
    // endpoint back to the smaller one using strictly larger columns only
    for &(anchor, u, v) in &edges {
        let mut path_rows = vec![v];
        let mut path_cols = vec![anchor];
        dfs_cycles(&adjacency, anchor, u, v, &mut path_rows, &mut path_cols, &mut cycles);
    }
    cycles
}

fn dfs_cycles(
    adjacency: &BTreeMap<u32, Vec<(u32, u32)>>,
    anchor: u32,
    target: u32,
    at: u32,
    path_rows: &mut Vec<u32>,
    path_cols: &mut Vec<u32>,
    cycles: &mut Vec<FlippableCycle>,
) {
    let Some(neighbors) = adjacency.get(&at) else { return };
    for &(next, col) in neighbors {
        if col <= anchor {
            continue;
        }
        if next == target {
            if path_cols.len() >= 2 {
                let mut rows = path_rows.clone();
                rows.push(target);
                let mut columns = path_cols.clone();
                columns.push(col);
                // rows[i] links columns[i] and columns[i+1 mod l]
                cycles.push(FlippableCycle { columns, rows });
            }
            continue;
        }
        if path_rows.contains(&next) {
            continue;
        }
        path_rows.push(next);
        path_cols.push(col);
        dfs_cycles(adjacency, anchor, target, next, path_rows, path_cols, cycles);
        path_rows.pop();
        path_cols.pop();
    }
}

/// V*: core columns not on any flippable cycle.
pub fn frozen_columns(peel: &PeelResult, cycles: &[FlippableCycle]) -> Vec<u32> {
    let on_cycle: BTreeSet<u32> = cycles.iter().flat_map(|c| c.columns.iter().copied()).collect();
    peel.core_cols
        .iter()
        .copied()
        .filter(|c| !on_cycle.contains(c))
        .collect()
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_count: usize,
    pub cluster_sizes: Vec<usize>,
    pub frozen: Vec<u32>,
    /// one representative solution per cluster, in cluster order
    pub representatives: Vec<Vec<u8>>,
    /// minimum Hamming distance between solutions of distinct clusters
    pub min_separation: Option<usize>,
    /// smallest step bound under which every cluster is one connected
    /// component (max bottleneck-tree edge over clusters)
    pub max_connectivity_step: Option<usize>,
}

/// Partition solutions by their restriction to V* and measure the geometry.
pub fn cluster_partition(solutions: &[Vec<u8>], frozen: &[u32]) -> ClusterReport {
    let mut clusters: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for (i, sol) in solutions.iter().enumerate() {
        let key: Vec<u8> = frozen.iter().map(|&v| sol[v as usize]).collect();
        clusters.entry(key).or_default().push(i);
    }
    let members: Vec<Vec<usize>> = clusters.into_values().collect();
    let mut min_separation = None;
    for (ci, a) in members.iter().enumerate() {
        for b in members.iter().skip(ci + 1) {
            for &i in a {
                for &j in b {
                    let d = hamming(&solutions[i], &solutions[j]);
                    min_separation = Some(min_separation.map_or(d, |m: usize| m.min(d)));
                }
            }
        }
    }
    let mut max_step = None;
    for cluster in &members {
        if let Some(step) = bottleneck_step(solutions, cluster) {
            max_step = Some(max_step.map_or(step, |m: usize| m.max(step)));
        }
    }
    ClusterReport {
        cluster_count: members.len(),
        cluster_sizes: members.iter().map(Vec::len).collect(),
        frozen: frozen.to_vec(),
        representatives: members.iter().map(|c| solutions[c[0]].clone()).collect(),
        min_separation,
        max_connectivity_step: max_step,
    }
}

/// Minimax edge of a minimum-bottleneck spanning tree over the cluster's
/// solutions under Hamming distance (Prim).
fn bottleneck_step(solutions: &[Vec<u8>], cluster: &[usize]) -> Option<usize> {
    if cluster.len() < 2 {
        return None;
    }
    let mut in_tree = vec![false; cluster.len()];
    let mut best = vec![usize::MAX; cluster.len()];
    in_tree[0] = true;
    for (i, slot) in best.iter_mut().enumerate().skip(1) {
        *slot = hamming(&solutions[cluster[0]], &solutions[cluster[i]]);
    }
    let mut bottleneck = 0;
    for _ in 1..cluster.len() {
        let next = (0..cluster.len())
            .filter(|&i| !in_tree[i])
            .min_by_key(|&i| best[i])
            .expect("a vertex remains");
        bottleneck = bottleneck.max(best[next]);
        in_tree[next] = true;
        for i in 0..cluster.len() {
            if !in_tree[i] {
                best[i] = best[i].min(hamming(&solutions[cluster[next]], &solutions[cluster[i]]));
            }
        }
    }
    Some(bottleneck)
}

/// True iff every solution agrees with some constant assignment σ^n (σ in the
/// library's shared constant-solution set) on all of V*.
pub fn constant_cluster_check(inst: &Instance, solutions: &[Vec<u8>]) -> bool {
    let b = incidence(inst);
    let peel = peel_2core(&b);
    let cycles = find_flippable_cycles(&peel, &b);
    let frozen = frozen_columns(&peel, &cycles);
    let constants = inst.functions().constant_solutions();
    solutions.iter().all(|sol| {
        constants
            .iter()
            .any(|&sigma| frozen.iter().all(|&v| sol[v as usize] == sigma))
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterExponentRow {
    pub trial: u64,
    pub n_star: usize,
    pub m_star: usize,
    /// (log N)/n via per-component core ranks
    pub measured_count_exponent: f64,
    /// (log |C|)/n via the extension count r^{n−m−n★+m★}
    pub measured_size_exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterExponentTable {
    pub k: usize,
    pub r: u8,
    pub d: f64,
    pub n: usize,
    pub formula_count_exponent: f64,
    pub formula_size_exponent: f64,
    pub rows: Vec<ClusterExponentRow>,
}

/// Measure the cluster count and size growth rates on random instances of
/// the cyclic-group constraint with target 0 and compare against the
/// closed-form exponents.
pub fn cluster_exponent_experiment(
    k: usize,
    r: u8,
    d: f64,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<ClusterExponentTable> {
    let group = AbelianGroup::cyclic(r as u32);
    let psi = group_constraint(&group, &group.zero(), k, format!("z{r}b0"))?;
    let pi = ConstraintDistribution::atomic(psi)?;
    let prof = profile(k, r, d)?;
    let m = (d * n as f64 / k as f64).round() as usize;
    let mut rows = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let inst = sample_instance(n, m, &pi, crate::rng::derive_sub_seed(seed, &[trial]))?;
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        let core = b.submatrix(&peel.core_rows, &peel.core_cols)?;
        // b = 0 is always solvable; log N = Σ over prime-power components of
        // the exact solution-count exponent
        let mut log_count = 0.0;
        for (&q, &p) in group.component_orders().iter().zip(group.component_primes()) {
            let solve = solve_mod_prime_power(&core, &vec![0u32; core.rows()], q)?;
            debug_assert!(solve.solvable);
            log_count += solve.count_prime_exponent as f64 * (p as f64).ln();
        }
        let free = peel.free_count();
        rows.push(ClusterExponentRow {
            trial,
            n_star: peel.n_star(),
            m_star: peel.m_star(),
            measured_count_exponent: log_count / n as f64,
            measured_size_exponent: free as f64 * (r as f64).ln() / n as f64,
        });
    }
    Ok(ClusterExponentTable {
        k,
        r,
        d,
        n,
        formula_count_exponent: prof.cluster_count_exponent,
        formula_size_exponent: prof.cluster_size_exponent,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintSet;
    use crate::instance::ConstraintRef;
    use crate::peel::enumerate_all_solutions;

    fn zq(k: usize, q: u32, b: u32) -> crate::constraint::ConstraintFunction {
        let g = AbelianGroup::cyclic(q);
        group_constraint(&g, &g.element_of_index(b as u64), k, format!("z{q}b{b}")).unwrap()
    }

    fn pair_instance(n: usize, pairs: &[(u32, u32)]) -> Instance {
        let set = ConstraintSet::new(vec![zq(2, 2, 0)]).unwrap();
        let constraints = pairs
            .iter()
            .map(|&(a, b)| ConstraintRef { function: "z2b0".into(), vars: vec![a, b] })
            .collect();
        Instance::new(n, 0, set, constraints).unwrap()
    }

    #[test]
    fn triangle_core_is_one_cycle() {
        let inst = pair_instance(3, &[(0, 1), (1, 2), (2, 0)]);
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        let cycles = find_flippable_cycles(&peel, &b);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 3);
        assert!(replay_flippable_cycle(&cycles[0], &peel, &b));
        assert!(frozen_columns(&peel, &cycles).is_empty());
    }

    #[test]
    fn high_degree_column_breaks_the_cycle() {
        // two triangles sharing column 0: its core degree is 4, so the traced
        // degree-2 paths never close
        let inst = pair_instance(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]);
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        assert_eq!(peel.n_star(), 5);
        let cycles = find_flippable_cycles(&peel, &b);
        assert!(cycles.is_empty());
        assert_eq!(frozen_columns(&peel, &cycles), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn cycle_flip_maps_solutions_to_solutions() {
        let inst = pair_instance(3, &[(0, 1), (1, 2), (2, 0)]);
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        let cycles = find_flippable_cycles(&peel, &b);
        let all = enumerate_all_solutions(&inst, 1 << 10).unwrap();
        let cols: BTreeSet<usize> = cycles[0].columns.iter().map(|&c| c as usize).collect();
        let pair_exists = all.iter().enumerate().any(|(i, x)| {
            all.iter().skip(i + 1).any(|y| {
                let diff: BTreeSet<usize> =
                    (0..x.len()).filter(|&v| x[v] != y[v]).collect();
                diff == cols
            })
        });
        assert!(pair_exists);
    }

    #[test]
    fn replayed_cycles_on_random_instances() {
        let pi = ConstraintDistribution::atomic(zq(3, 2, 0)).unwrap();
        for seed in 0..10 {
            let inst = sample_instance(40, 44, &pi, seed).unwrap();
            let b = incidence(&inst);
            let peel = peel_2core(&b);
            for cycle in find_flippable_cycles(&peel, &b) {
                assert!(replay_flippable_cycle(&cycle, &peel, &b), "seed {seed}");
            }
        }
    }

    #[test]
    fn single_constraint_is_one_cluster() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap();
        let inst = Instance::new(
            3,
            0,
            set,
            vec![ConstraintRef { function: "z2b0".into(), vars: vec![0, 1, 2] }],
        )
        .unwrap();
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        assert_eq!(peel.n_star(), 0);
        let cycles = find_flippable_cycles(&peel, &b);
        let frozen = frozen_columns(&peel, &cycles);
        assert!(frozen.is_empty());
        let all = enumerate_all_solutions(&inst, 1 << 10).unwrap();
        let report = cluster_partition(&all, &frozen);
        assert_eq!(report.cluster_count, 1);
        assert_eq!(report.cluster_sizes, vec![4]);
        assert!(report.min_separation.is_none());
    }

    #[test]
    fn cycle_free_core_clusters_are_core_fibers() {
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap(),
        )
        .unwrap();
        let mut nontrivial = 0;
        for seed in 0..20 {
            let inst = sample_instance(12, 13, &pi, seed).unwrap();
            let b = incidence(&inst);
            let peel = peel_2core(&b);
            let cycles = find_flippable_cycles(&peel, &b);
            if !cycles.is_empty() {
                continue;
            }
            let frozen = frozen_columns(&peel, &cycles);
            assert_eq!(frozen, peel.core_cols);
            let all = enumerate_all_solutions(&inst, 1 << 20).unwrap();
            if all.is_empty() {
                continue;
            }
            let report = cluster_partition(&all, &frozen);
            let per = crate::peel::extensions_per_core_solution(&inst, &peel) as usize;
            assert!(report.cluster_sizes.iter().all(|&s| s == per), "seed {seed}");
            let distinct_cores: BTreeSet<Vec<u8>> = all
                .iter()
                .map(|sol| peel.core_cols.iter().map(|&c| sol[c as usize]).collect())
                .collect();
            assert_eq!(report.cluster_count, distinct_cores.len());
            if report.cluster_count > 1 {
                assert!(report.min_separation.unwrap() >= 1);
                nontrivial += 1;
            }
        }
        let _ = nontrivial;
        // planted multi-cluster case: two parallel edges form only an l = 2
        // multigraph cycle, which is not flippable, so the core is cycle-free
        // yet has two solutions
        let inst = pair_instance(2, &[(0, 1), (0, 1)]);
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        assert_eq!(peel.core_cols, vec![0, 1]);
        let cycles = find_flippable_cycles(&peel, &b);
        assert!(cycles.is_empty());
        let frozen = frozen_columns(&peel, &cycles);
        assert_eq!(frozen, peel.core_cols);
        let all = enumerate_all_solutions(&inst, 16).unwrap();
        assert_eq!(all.len(), 2);
        let report = cluster_partition(&all, &frozen);
        assert_eq!(report.cluster_count, 2);
        assert_eq!(report.cluster_sizes, vec![1, 1]);
        assert_eq!(report.min_separation, Some(2));
    }

    #[test]
    fn constant_clusters_for_zero_target() {
        // dense Z2 b=0 instance: all-zero is always a solution and every
        // solution is 0 on V*
        let pi = ConstraintDistribution::atomic(zq(3, 2, 0)).unwrap();
        let inst = sample_instance(12, 14, &pi, 3).unwrap();
        let all = enumerate_all_solutions(&inst, 1 << 20).unwrap();
        assert!(!all.is_empty());
        assert!(constant_cluster_check(&inst, &all));
        // m = 0: vacuously true
        let empty = Instance::new(4, 0, ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap(), vec![]).unwrap();
        let sols = enumerate_all_solutions(&empty, 1 << 10).unwrap();
        assert!(constant_cluster_check(&empty, &sols));
    }

    #[test]
    fn ternary_zero_target_has_all_spins_constant() {
        // 3σ ≡ 0 mod 3 for every σ, so all three constants survive
        let set = ConstraintSet::new(vec![zq(3, 3, 0)]).unwrap();
        assert_eq!(set.constant_solutions(), vec![0, 1, 2]);
        let pi = ConstraintDistribution::atomic(zq(3, 3, 0)).unwrap();
        let inst = sample_instance(9, 11, &pi, 8).unwrap();
        let all = enumerate_all_solutions(&inst, 1 << 20).unwrap();
        assert!(!all.is_empty());
        assert!(constant_cluster_check(&inst, &all));
    }

    #[test]
    fn exponent_experiment_matches_formula_at_moderate_n() {
        let table = cluster_exponent_experiment(3, 2, 2.6, 20_000, 3, 7).unwrap();
        let ln2 = 2f64.ln();
        for row in &table.rows {
            assert!(
                (row.measured_count_exponent - table.formula_count_exponent).abs() < 0.02 * ln2,
                "count {} vs {}",
                row.measured_count_exponent,
                table.formula_count_exponent
            );
            assert!(
                (row.measured_size_exponent - table.formula_size_exponent).abs() < 0.02 * ln2,
                "size {} vs {}",
                row.measured_size_exponent,
                table.formula_size_exponent
            );
        }
    }

    #[test]
    fn subcritical_core_is_empty() {
        let table = cluster_exponent_experiment(3, 2, 1.5, 5_000, 2, 1).unwrap();
        assert_eq!(table.formula_count_exponent, 0.0);
        for row in &table.rows {
            assert_eq!(row.n_star, 0);
            assert_eq!(row.measured_count_exponent, 0.0);
        }
    }

    #[test]
    fn composite_spin_count_adds_component_exponents() {
        let table = cluster_exponent_experiment(3, 6, 2.6, 4_000, 2, 2).unwrap();
        // formula scales by ln 6 = ln 2 + ln 3
        let base = profile(3, 2, 2.6).unwrap();
        let expected = base.cluster_count_exponent / 2f64.ln() * 6f64.ln();
        assert!((table.formula_count_exponent - expected).abs() < 1e-12);
        for row in &table.rows {
            assert!((row.measured_count_exponent - expected).abs() < 0.05 * 6f64.ln());
        }
    }
}
