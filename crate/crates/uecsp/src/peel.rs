//! 2-core peeling, back-substitution through the peel order, core search
//! with unit propagation, and the combined desk-scale solver.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::group::build_group_model;
use crate::instance::{incidence, to_linear_system, Instance};
use crate::linalg::{solve_abelian, SparseMatrix};
use crate::rng::derive_rng;
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PeelEvent {
    /// column dropped to degree 0 before removal: unconstrained
    Free { col: u32 },
    /// column had exactly one incident row left; removing it removes the row
    Forced { col: u32, row: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelResult {
    pub core_rows: Vec<u32>,
    pub core_cols: Vec<u32>,
    /// removal events in the order they happened
    pub peel_order: Vec<PeelEvent>,
}

impl PeelResult {
    pub fn n_star(&self) -> usize {
        self.core_cols.len()
    }

    pub fn m_star(&self) -> usize {
        self.core_rows.len()
    }

    pub fn free_count(&self) -> usize {
        self.peel_order
            .iter()
            .filter(|e| matches!(e, PeelEvent::Free { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Discipline {
    Fifo,
    Lifo,
    Random(u64),
}

pub fn peel_2core(b: &SparseMatrix) -> PeelResult {
    peel_2core_with(b, Discipline::Fifo)
}

/// Repeatedly remove a column with fewer than 2 live incident rows, together
/// with its single live row if it has one. The surviving submatrix (every
/// column degree >= 2) is the same for any removal discipline.
pub fn peel_2core_with(b: &SparseMatrix, discipline: Discipline) -> PeelResult {
    let n = b.cols();
    let m = b.rows();
    let cols_to_rows = b.cols_to_rows();
    let mut deg: Vec<u32> = cols_to_rows.iter().map(|rs| rs.len() as u32).collect();
    let mut col_alive = vec![true; n];
    let mut row_alive = vec![true; m];
    let mut fifo = VecDeque::new();
    let mut stack = Vec::new();
    let mut pool = Vec::new();
    let mut rng = match discipline {
        Discipline::Random(seed) => Some(derive_rng(seed, &[])),
        _ => None,
    };
    let push = |c: u32, fifo: &mut VecDeque<u32>, stack: &mut Vec<u32>, pool: &mut Vec<u32>| match discipline {
        Discipline::Fifo => fifo.push_back(c),
        Discipline::Lifo => stack.push(c),
        Discipline::Random(_) => pool.push(c),
    };
    for c in 0..n as u32 {
        if deg[c as usize] <= 1 {
            push(c, &mut fifo, &mut stack, &mut pool);
        }
    }
    let mut peel_order = Vec::new();
    loop {
        let c = match discipline {
            Discipline::Fifo => fifo.pop_front(),
            Discipline::Lifo => stack.pop(),
            Discipline::Random(_) => {
                let rng = rng.as_mut().expect("random discipline has an rng");
                if pool.is_empty() {
                    None
                } else {
                    let i = rng.gen_range(0..pool.len());
                    Some(pool.swap_remove(i))
                }
            }
        };
        let Some(c) = c else { break };
        if !col_alive[c as usize] || deg[c as usize] > 1 {
            continue;
        }
        col_alive[c as usize] = false;
        let live_row = cols_to_rows[c as usize]
            .iter()
            .copied()
            .find(|&r| row_alive[r as usize]);
        match live_row {
            None => peel_order.push(PeelEvent::Free { col: c }),
            Some(row) => {
                peel_order.push(PeelEvent::Forced { col: c, row });
                row_alive[row as usize] = false;
                for &other in b.row(row as usize) {
                    if other == c || !col_alive[other as usize] {
                        continue;
                    }
                    deg[other as usize] -= 1;
                    if deg[other as usize] <= 1 {
                        push(other, &mut fifo, &mut stack, &mut pool);
                    }
                }
            }
        }
    }
    PeelResult {
        core_rows: (0..m as u32).filter(|&r| row_alive[r as usize]).collect(),
        core_cols: (0..n as u32).filter(|&c| col_alive[c as usize]).collect(),
        peel_order,
    }
}

/// Extend a core solution to a full assignment by replaying the peel order in
/// reverse: free columns take the given values, forced columns take the
/// unique spin satisfying their row.
pub fn back_substitute(
    inst: &Instance,
    peel: &PeelResult,
    core_assignment: &[u8],
    free_assignment: &[u8],
) -> Result<Vec<u8>> {
    if core_assignment.len() != peel.n_star() {
        return Err(Error::Malformed("core assignment length != n*".into()));
    }
    if free_assignment.len() != peel.free_count() {
        return Err(Error::Malformed("free assignment length != number of free columns".into()));
    }
    let r = inst.r();
    if core_assignment.iter().chain(free_assignment).any(|&s| s >= r) {
        return Err(Error::Malformed("spin out of range".into()));
    }
    let mut assignment: Vec<Option<u8>> = vec![None; inst.n()];
    for (&c, &v) in peel.core_cols.iter().zip(core_assignment) {
        assignment[c as usize] = Some(v);
    }
    // core rows touch only core columns; verify them up front
    let mut tuple = vec![0u8; inst.k()];
    for &row in &peel.core_rows {
        let c = &inst.constraints()[row as usize];
        for (t, &v) in tuple.iter_mut().zip(&c.vars) {
            *t = assignment[v as usize].expect("core rows touch only core columns");
        }
        if !inst.function_of(row as usize).satisfied(&tuple) {
            return Err(Error::Invalid(format!("core assignment violates row {row}")));
        }
    }
    let mut free_left = free_assignment.len();
    let mut others = vec![0u8; inst.k() - 1];
    for event in peel.peel_order.iter().rev() {
        match *event {
            PeelEvent::Free { col } => {
                free_left -= 1;
                assignment[col as usize] = Some(free_assignment[free_left]);
            }
            PeelEvent::Forced { col, row } => {
                let c = &inst.constraints()[row as usize];
                let pos = c
                    .vars
                    .iter()
                    .position(|&v| v == col)
                    .expect("forcing row contains its column");
                let mut oi = 0;
                for (i, &v) in c.vars.iter().enumerate() {
                    if i == pos {
                        continue;
                    }
                    others[oi] = assignment[v as usize]
                        .expect("all other variables of a forcing row are assigned later in peel order");
                    oi += 1;
                }
                let spin = inst
                    .function_of(row as usize)
                    .extension_at(pos, &others)
                    .expect("UE gives exactly one completion");
                assignment[col as usize] = Some(spin);
            }
        }
    }
    let full: Vec<u8> = assignment
        .into_iter()
        .map(|v| v.expect("every column is core, free, or forced"))
        .collect();
    if !inst.satisfied_by(&full) {
        return Err(Error::Invalid("back-substitution produced a violating assignment".into()));
    }
    Ok(full)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreEnumeration {
    /// assignments aligned with PeelResult::core_cols
    pub solutions: Vec<Vec<u8>>,
    pub truncated: bool,
    pub nodes: u64,
}

/// Depth-first search over the core columns (descending core degree) with
/// unit propagation: a row with one unassigned variable forces it.
pub fn enumerate_core_solutions(inst: &Instance, peel: &PeelResult, budget: u64) -> CoreEnumeration {
    search_core(inst, peel, budget, usize::MAX)
}

fn search_core(inst: &Instance, peel: &PeelResult, budget: u64, max_solutions: usize) -> CoreEnumeration {
    let n_star = peel.n_star();
    let mut local = vec![usize::MAX; inst.n()];
    for (i, &c) in peel.core_cols.iter().enumerate() {
        local[c as usize] = i;
    }
    // per core row: function index into the instance, local column ids in
    // the constraint's variable order
    let row_cols: Vec<Vec<usize>> = peel
        .core_rows
        .iter()
        .map(|&row| {
            inst.constraints()[row as usize]
                .vars
                .iter()
                .map(|&v| local[v as usize])
                .collect()
        })
        .collect();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n_star];
    for (ri, cols) in row_cols.iter().enumerate() {
        for &c in cols {
            col_rows[c].push(ri);
        }
    }
    let mut order: Vec<usize> = (0..n_star).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(col_rows[c].len()), c));

    let mut values: Vec<Option<u8>> = vec![None; n_star];
    let mut unassigned: Vec<usize> = row_cols.iter().map(|c| c.len()).collect();
    let mut solutions = Vec::new();
    let mut nodes = 0u64;
    let mut truncated = false;

    // trail of columns set since the last decision, for undo
    fn assign(
        col: usize,
        val: u8,
        inst: &Instance,
        peel: &PeelResult,
        row_cols: &[Vec<usize>],
        col_rows: &[Vec<usize>],
        values: &mut [Option<u8>],
        unassigned: &mut [usize],
        trail: &mut Vec<usize>,
    ) -> bool {
        let mut queue = VecDeque::new();
        queue.push_back((col, val));
        while let Some((c, v)) = queue.pop_front() {
            match values[c] {
                Some(existing) => {
                    if existing != v {
                        return false;
                    }
                    continue;
                }
                None => {
                    values[c] = Some(v);
                    trail.push(c);
                }
            }
            // decrement every incident row before any failure exit, so that
            // undo (which increments them all) stays symmetric
            let mut conflict = false;
            for &ri in &col_rows[c] {
                unassigned[ri] -= 1;
                if conflict {
                    continue;
                }
                let row = peel.core_rows[ri] as usize;
                let psi = inst.function_of(row);
                match unassigned[ri] {
                    0 => {
                        let tuple: Vec<u8> = row_cols[ri]
                            .iter()
                            .map(|&cc| values[cc].expect("row fully assigned"))
                            .collect();
                        if !psi.satisfied(&tuple) {
                            conflict = true;
                        }
                    }
                    1 => {
                        let pos = row_cols[ri]
                            .iter()
                            .position(|&cc| values[cc].is_none())
                            .expect("one unassigned column");
                        let others: Vec<u8> = row_cols[ri]
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != pos)
                            .map(|(_, &cc)| values[cc].expect("all but one assigned"))
                            .collect();
                        match psi.extension_at(pos, &others) {
                            Some(forced) => queue.push_back((row_cols[ri][pos], forced)),
                            None => conflict = true,
                        }
                    }
                    _ => {}
                }
            }
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo(trail: &[usize], values: &mut [Option<u8>], col_rows: &[Vec<usize>], unassigned: &mut [usize]) {
        for &c in trail {
            values[c] = None;
            for &ri in &col_rows[c] {
                unassigned[ri] += 1;
            }
        }
    }

    fn dfs(
        depth: usize,
        inst: &Instance,
        peel: &PeelResult,
        order: &[usize],
        row_cols: &[Vec<usize>],
        col_rows: &[Vec<usize>],
        values: &mut Vec<Option<u8>>,
        unassigned: &mut Vec<usize>,
        solutions: &mut Vec<Vec<u8>>,
        nodes: &mut u64,
        budget: u64,
        max_solutions: usize,
        truncated: &mut bool,
    ) {
        if *truncated || solutions.len() >= max_solutions {
            return;
        }
        let next = order[depth..].iter().copied().find(|&c| values[c].is_none());
        let Some(col) = next else {
            solutions.push(values.iter().map(|v| v.expect("complete")).collect());
            return;
        };
        let r = inst.r();
        for spin in 0..r {
            *nodes += 1;
            if *nodes > budget {
                *truncated = true;
                return;
            }
            let mut trail = Vec::new();
            let ok = assign(col, spin, inst, peel, row_cols, col_rows, values, unassigned, &mut trail);
            if ok {
                dfs(
                    depth, inst, peel, order, row_cols, col_rows, values, unassigned, solutions,
                    nodes, budget, max_solutions, truncated,
                );
            }
            undo(&trail, values, col_rows, unassigned);
            if *truncated || solutions.len() >= max_solutions {
                return;
            }
        }
    }

    if n_star == 0 {
        return CoreEnumeration { solutions: vec![Vec::new()], truncated: false, nodes: 0 };
    }
    dfs(
        0, inst, peel, &order, &row_cols, &col_rows, &mut values, &mut unassigned, &mut solutions,
        &mut nodes, budget, max_solutions, &mut truncated,
    );
    CoreEnumeration { solutions, truncated, nodes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub witness: Option<Vec<u8>>,
    pub n_star: usize,
    pub m_star: usize,
    pub nodes: u64,
}

/// Peel, then solve the core: linear-algebraically when the function library
/// is group-equivalent, by propagation search otherwise. SAT witnesses are
/// re-validated against the raw tables inside back_substitute.
pub fn solve(inst: &Instance, budget: u64) -> Result<SolveReport> {
    let peel = peel_2core(&incidence(inst));
    let free = vec![0u8; peel.free_count()];
    let report = |status, witness, nodes| SolveReport {
        status,
        witness,
        n_star: peel.n_star(),
        m_star: peel.m_star(),
        nodes,
    };
    if let Ok(model) = build_group_model(inst.functions(), 0) {
        let system = to_linear_system(inst, &model)?;
        let core_matrix = system.matrix.submatrix(&peel.core_rows, &peel.core_cols)?;
        let core_rhs: Vec<Vec<u32>> = peel
            .core_rows
            .iter()
            .map(|&row| system.rhs[row as usize].clone())
            .collect();
        let core_system = crate::linalg::LinearSystem {
            matrix: core_matrix,
            rhs: core_rhs,
            group: system.group.clone(),
        };
        let solved = solve_abelian(&core_system)?;
        return match solved.sample {
            Some(sample) => {
                let dec = &model.decomposition;
                let core: Vec<u8> = sample
                    .iter()
                    .map(|e| dec.element_to_spin[dec.abelian.index_of(e) as usize])
                    .collect();
                let witness = back_substitute(inst, &peel, &core, &free)?;
                Ok(report(SolveStatus::Sat, Some(witness), 0))
            }
            None => Ok(report(SolveStatus::Unsat, None, 0)),
        };
    }
    let search = search_core(inst, &peel, budget, 1);
    match search.solutions.first() {
        Some(core) => {
            let witness = back_substitute(inst, &peel, core, &free)?;
            Ok(report(SolveStatus::Sat, Some(witness), search.nodes))
        }
        None if search.truncated => Ok(report(SolveStatus::Unknown, None, search.nodes)),
        None => Ok(report(SolveStatus::Unsat, None, search.nodes)),
    }
}

/// Exhaustive oracle, ascending by canonical index; requires r^n <= cap.
pub fn enumerate_all_solutions(inst: &Instance, cap: u64) -> Result<Vec<Vec<u8>>> {
    let total = crate::spins::table_size(inst.r(), inst.n());
    if total > cap {
        return Err(Error::CapExceeded(format!("r^n = {total} exceeds cap {cap}")));
    }
    let mut out = Vec::new();
    let mut assignment = vec![0u8; inst.n()];
    for idx in 0..total as usize {
        crate::spins::decode_into(idx, inst.r(), &mut assignment);
        if inst.satisfied_by(&assignment) {
            out.push(assignment.clone());
        }
    }
    Ok(out)
}

/// The count r^{n−m−n★+m★} from the peeling structure (equals r^#free).
pub fn extensions_per_core_solution(inst: &Instance, peel: &PeelResult) -> u64 {
    crate::spins::table_size(inst.r(), peel.free_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintSet;
    use crate::instance::{sample_instance, ConstraintDistribution, ConstraintRef};
    use crate::linalg::{group_constraint, AbelianGroup};
    use crate::product::nongroup_family;

    fn zq(k: usize, q: u32, b: u32) -> crate::constraint::ConstraintFunction {
        let g = AbelianGroup::cyclic(q);
        group_constraint(&g, &g.element_of_index(b as u64), k, format!("z{q}b{b}")).unwrap()
    }

    fn xor3_instance(n: usize, rows: Vec<(u32, u32, u32)>, b: Vec<u32>) -> Instance {
        let set = ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap();
        let constraints = rows
            .into_iter()
            .zip(b)
            .map(|((x, y, z), b)| ConstraintRef { function: format!("z2b{b}"), vars: vec![x, y, z] })
            .collect();
        Instance::new(n, 0, set, constraints).unwrap()
    }

    #[test]
    fn single_row_peels_to_empty_core() {
        let inst = xor3_instance(3, vec![(0, 1, 2)], vec![0]);
        let peel = peel_2core(&incidence(&inst));
        assert_eq!((peel.n_star(), peel.m_star()), (0, 0));
        assert_eq!(peel.free_count(), 2);
    }

    #[test]
    fn cyclic_pairs_are_their_own_core() {
        let set = ConstraintSet::new(vec![zq(2, 2, 0)]).unwrap();
        let constraints = vec![
            ConstraintRef { function: "z2b0".into(), vars: vec![0, 1] },
            ConstraintRef { function: "z2b0".into(), vars: vec![1, 2] },
            ConstraintRef { function: "z2b0".into(), vars: vec![2, 0] },
        ];
        let inst = Instance::new(3, 0, set, constraints).unwrap();
        let peel = peel_2core(&incidence(&inst));
        assert_eq!(peel.core_rows, vec![0, 1, 2]);
        assert_eq!(peel.core_cols, vec![0, 1, 2]);
        assert!(peel.peel_order.is_empty());
        // x0=x1=x2: two core solutions
        let core = enumerate_core_solutions(&inst, &peel, 1000);
        assert!(!core.truncated);
        assert_eq!(core.solutions, vec![vec![0, 0, 0], vec![1, 1, 1]]);
    }

    #[test]
    fn peeling_is_confluent() {
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap(),
        )
        .unwrap();
        for seed in 0..10 {
            let inst = sample_instance(30, 35, &pi, seed).unwrap();
            let b = incidence(&inst);
            let fifo = peel_2core_with(&b, Discipline::Fifo);
            let lifo = peel_2core_with(&b, Discipline::Lifo);
            let random = peel_2core_with(&b, Discipline::Random(seed ^ 0xabcd));
            assert_eq!(fifo.core_rows, lifo.core_rows);
            assert_eq!(fifo.core_cols, lifo.core_cols);
            assert_eq!(fifo.core_rows, random.core_rows);
            assert_eq!(fifo.core_cols, random.core_cols);
        }
    }

    #[test]
    fn back_substitute_forces_parity() {
        let inst = xor3_instance(3, vec![(0, 1, 2)], vec![0]);
        let peel = peel_2core(&incidence(&inst));
        let full = back_substitute(&inst, &peel, &[], &[0, 1]).unwrap();
        assert_eq!(full.iter().map(|&s| s as u32).sum::<u32>() % 2, 0);
        // the two free columns carry the given values
        let frees: Vec<u32> = peel
            .peel_order
            .iter()
            .filter_map(|e| match e {
                PeelEvent::Free { col } => Some(*col),
                _ => None,
            })
            .collect();
        assert_eq!(full[frees[0] as usize], 0);
        assert_eq!(full[frees[1] as usize], 1);
    }

    #[test]
    fn no_constraints_means_all_free() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap();
        let inst = Instance::new(4, 0, set, vec![]).unwrap();
        let peel = peel_2core(&incidence(&inst));
        assert_eq!(peel.free_count(), 4);
        let full = back_substitute(&inst, &peel, &[], &[1, 0, 1, 0]).unwrap();
        assert_eq!(full.len(), 4);
        let report = solve(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.status, SolveStatus::Sat);
    }

    #[test]
    fn contradictory_rows_are_unsat() {
        let inst = xor3_instance(3, vec![(0, 1, 2), (0, 1, 2)], vec![0, 1]);
        let report = solve(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.status, SolveStatus::Unsat);
        assert!(enumerate_all_solutions(&inst, 1 << 20).unwrap().is_empty());
    }

    #[test]
    fn extension_count_law_on_random_instances() {
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap(),
        )
        .unwrap();
        for seed in 0..8 {
            let n = 12;
            let inst = sample_instance(n, 12, &pi, seed).unwrap();
            let peel = peel_2core(&incidence(&inst));
            let all = enumerate_all_solutions(&inst, 1 << 20).unwrap();
            let per_core = extensions_per_core_solution(&inst, &peel);
            let mut by_core: std::collections::HashMap<Vec<u8>, u64> = Default::default();
            for sol in &all {
                let core: Vec<u8> = peel.core_cols.iter().map(|&c| sol[c as usize]).collect();
                *by_core.entry(core).or_insert(0) += 1;
            }
            for (_, count) in by_core {
                assert_eq!(count, per_core, "seed {seed}");
            }
        }
    }

    #[test]
    fn core_enumeration_matches_abelian_count() {
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 3, 0), zq(3, 3, 1)]).unwrap(),
        )
        .unwrap();
        for seed in 0..5 {
            let inst = sample_instance(10, 11, &pi, seed).unwrap();
            let peel = peel_2core(&incidence(&inst));
            let model = build_group_model(inst.functions(), 0).unwrap();
            let system = to_linear_system(&inst, &model).unwrap();
            let core_system = crate::linalg::LinearSystem {
                matrix: system.matrix.submatrix(&peel.core_rows, &peel.core_cols).unwrap(),
                rhs: peel.core_rows.iter().map(|&r| system.rhs[r as usize].clone()).collect(),
                group: system.group.clone(),
            };
            let algebraic = crate::linalg::solve_abelian(&core_system).unwrap();
            let search = enumerate_core_solutions(&inst, &peel, DEFAULT_BUDGET);
            assert!(!search.truncated);
            assert_eq!(
                search.solutions.len() as u128,
                algebraic.count.to_u128().unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn solve_matches_exhaustive_oracle() {
        // group path
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap(),
        )
        .unwrap();
        for seed in 0..15 {
            let inst = sample_instance(12, 36, &pi, seed).unwrap();
            let report = solve(&inst, DEFAULT_BUDGET).unwrap();
            let any = !enumerate_all_solutions(&inst, 1 << 20).unwrap().is_empty();
            assert_eq!(report.status == SolveStatus::Sat, any, "seed {seed}");
            if let Some(w) = report.witness {
                assert!(inst.satisfied_by(&w));
            }
        }
        // search path: the non-group family blocks the linear route
        let pi = ConstraintDistribution::atomic(nongroup_family(3, 3, 2).unwrap()).unwrap();
        for seed in 0..6 {
            let inst = sample_instance(7, 9, &pi, seed).unwrap();
            let report = solve(&inst, DEFAULT_BUDGET).unwrap();
            let any = !enumerate_all_solutions(&inst, 6u64.pow(7)).unwrap().is_empty();
            assert_eq!(report.status == SolveStatus::Sat, any, "seed {seed}");
            if let Some(w) = report.witness {
                assert!(inst.satisfied_by(&w));
            }
        }
    }

    #[test]
    fn replaying_peel_order_reproduces_the_core() {
        let pi = ConstraintDistribution::uniform(
            ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap(),
        )
        .unwrap();
        let inst = sample_instance(25, 28, &pi, 3).unwrap();
        let b = incidence(&inst);
        let peel = peel_2core(&b);
        let mut col_alive = vec![true; b.cols()];
        let mut row_alive = vec![true; b.rows()];
        for event in &peel.peel_order {
            match *event {
                PeelEvent::Free { col } => {
                    // no live row may touch the column at this point
                    assert!((0..b.rows()).all(|r| !row_alive[r] || !b.row(r).contains(&col)));
                    col_alive[col as usize] = false;
                }
                PeelEvent::Forced { col, row } => {
                    assert!(row_alive[row as usize]);
                    assert!(b.row(row as usize).contains(&col));
                    col_alive[col as usize] = false;
                    row_alive[row as usize] = false;
                }
            }
        }
        let cols: Vec<u32> = (0..b.cols() as u32).filter(|&c| col_alive[c as usize]).collect();
        let rows: Vec<u32> = (0..b.rows() as u32).filter(|&r| row_alive[r as usize]).collect();
        assert_eq!(cols, peel.core_cols);
        assert_eq!(rows, peel.core_rows);
    }
}
