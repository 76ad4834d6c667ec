//! Finite abelian group arithmetic and linear systems Bx = b with 0/1
//! coefficient matrices, solved independently over each prime-power component.

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintFunction;
use crate::spins::{self, decode_into};
use crate::{Error, Result};

fn prime_power_factorization(mut n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Z_{d₁} × … × Z_{d_t} split into prime-power components. Elements are
/// residue tuples, one residue per component, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroup {
    factor_orders: Vec<u32>,
    component_orders: Vec<u32>,
    component_primes: Vec<u32>,
    component_exps: Vec<u32>,
    /// component indices making up each factor, in CRT order
    factor_components: Vec<Vec<usize>>,
    order: u64,
}

impl AbelianGroup {
    pub fn from_orders(orders: &[u32]) -> Result<Self> {
        if orders.is_empty() || orders.iter().any(|&d| d < 2) {
            return Err(Error::Malformed("factor orders must all be >= 2".into()));
        }
        let mut component_orders = Vec::new();
        let mut component_primes = Vec::new();
        let mut component_exps = Vec::new();
        let mut factor_components = Vec::new();
        let mut order = 1u64;
        for &d in orders {
            order = order
                .checked_mul(d as u64)
                .ok_or_else(|| Error::Malformed("group order overflow".into()))?;
            let mut ids = Vec::new();
            for (p, e) in prime_power_factorization(d) {
                ids.push(component_orders.len());
                component_orders.push(p.pow(e));
                component_primes.push(p);
                component_exps.push(e);
            }
            factor_components.push(ids);
        }
        Ok(Self {
            factor_orders: orders.to_vec(),
            component_orders,
            component_primes,
            component_exps,
            factor_components,
            order,
        })
    }

    pub fn cyclic(q: u32) -> Self {
        Self::from_orders(&[q]).expect("q >= 2")
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn factor_orders(&self) -> &[u32] {
        &self.factor_orders
    }

    pub fn component_orders(&self) -> &[u32] {
        &self.component_orders
    }

    pub fn component_primes(&self) -> &[u32] {
        &self.component_primes
    }

    pub fn component_exps(&self) -> &[u32] {
        &self.component_exps
    }

    pub fn num_components(&self) -> usize {
        self.component_orders.len()
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.num_components()]
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.component_orders
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&q, (&x, &y))| (x + y) % q)
            .collect()
    }

    pub fn add_assign(&self, a: &mut [u32], b: &[u32]) {
        for ((x, &y), &q) in a.iter_mut().zip(b).zip(&self.component_orders) {
            *x = (*x + y) % q;
        }
    }

    pub fn neg(&self, a: &[u32]) -> Vec<u32> {
        self.component_orders
            .iter()
            .zip(a)
            .map(|(&q, &x)| (q - x) % q)
            .collect()
    }

    /// Mixed-radix index (first component most significant).
    pub fn index_of(&self, elem: &[u32]) -> u64 {
        self.component_orders
            .iter()
            .zip(elem)
            .fold(0u64, |acc, (&q, &x)| acc * q as u64 + x as u64)
    }

    pub fn element_of_index(&self, mut idx: u64) -> Vec<u32> {
        let mut out = vec![0u32; self.num_components()];
        for (slot, &q) in out.iter_mut().zip(&self.component_orders).rev() {
            *slot = (idx % q as u64) as u32;
            idx /= q as u64;
        }
        debug_assert_eq!(idx, 0);
        out
    }

    /// Element from one residue per factor order.
    pub fn element_from_factor_residues(&self, residues: &[u32]) -> Result<Vec<u32>> {
        if residues.len() != self.factor_orders.len() {
            return Err(Error::Malformed("one residue per factor order required".into()));
        }
        let mut elem = self.zero();
        for ((res, &d), ids) in residues.iter().zip(&self.factor_orders).zip(&self.factor_components) {
            if *res >= d {
                return Err(Error::Malformed(format!("residue {res} out of range mod {d}")));
            }
            for &c in ids {
                elem[c] = res % self.component_orders[c];
            }
        }
        Ok(elem)
    }
}

/// 0/1 matrix as per-row sorted column lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_support: Vec<Vec<u32>>,
}

impl SparseMatrix {
    pub fn from_rows(cols: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut row_support = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed("duplicate column in row".into()));
            }
            if row.last().is_some_and(|&c| c as usize >= cols) {
                return Err(Error::Malformed("column index out of range".into()));
            }
            row_support.push(row);
        }
        Ok(Self { rows: row_support.len(), cols, row_support })
    }

    pub fn empty(cols: usize) -> Self {
        Self { rows: 0, cols, row_support: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.row_support[i]
    }

    pub fn row_support(&self) -> &[Vec<u32>] {
        &self.row_support
    }

    pub fn col_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.cols];
        for row in &self.row_support {
            for &c in row {
                deg[c as usize] += 1;
            }
        }
        deg
    }

    pub fn cols_to_rows(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.cols];
        for (i, row) in self.row_support.iter().enumerate() {
            for &c in row {
                out[c as usize].push(i as u32);
            }
        }
        out
    }

    /// Restriction to `row_ids` × `col_ids` (both sorted ascending); columns
    /// are reindexed by their position in `col_ids`. Every selected row must
    /// be supported inside `col_ids`.
    pub fn submatrix(&self, row_ids: &[u32], col_ids: &[u32]) -> Result<SparseMatrix> {
        debug_assert!(col_ids.windows(2).all(|w| w[0] < w[1]));
        let mut col_pos = vec![u32::MAX; self.cols];
        for (i, &c) in col_ids.iter().enumerate() {
            col_pos[c as usize] = i as u32;
        }
        let mut rows = Vec::with_capacity(row_ids.len());
        for &ri in row_ids {
            let row: Vec<u32> = self.row_support[ri as usize]
                .iter()
                .map(|&c| col_pos[c as usize])
                .collect();
            if row.iter().any(|&c| c == u32::MAX) {
                return Err(Error::Invalid(format!("row {ri} leaves the selected columns")));
            }
            rows.push(row);
        }
        SparseMatrix::from_rows(col_ids.len(), rows)
    }
}

/// Rank over F_p by elimination (dense; bitset rows for p = 2).
pub fn rank_mod_p(b: &SparseMatrix, p: u32) -> usize {
    if p == 2 {
        return rank_gf2(b);
    }
    let n = b.cols();
    let mut dense: Vec<Vec<u32>> = b
        .row_support()
        .iter()
        .map(|row| {
            let mut v = vec![0u32; n];
            for &c in row {
                v[c as usize] = 1 % p;
            }
            v
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..dense.len()).find(|&i| dense[i][col] % p != 0) else { continue };
        dense.swap(rank, pivot);
        let inv = mod_inverse(dense[rank][col] % p, p).expect("nonzero mod prime");
        for i in 0..dense.len() {
            if i != rank && dense[i][col] % p != 0 {
                let f = dense[i][col] % p * inv % p;
                for j in col..n {
                    let sub = f as u64 * dense[rank][j] as u64 % p as u64;
                    dense[i][j] = ((dense[i][j] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        rank += 1;
        if rank == dense.len() {
            break;
        }
    }
    rank
}

fn rank_gf2(b: &SparseMatrix) -> usize {
    let n = b.cols();
    let words = (n + 63) / 64;
    let mut rows: Vec<Vec<u64>> = b
        .row_support()
        .iter()
        .map(|row| {
            let mut v = vec![0u64; words];
            for &c in row {
                v[c as usize / 64] |= 1u64 << (c % 64);
            }
            v
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][w] & bit != 0) else { continue };
        rows.swap(rank, pivot);
        let pivot_row = std::mem::take(&mut rows[rank]);
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row.is_empty() && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn mod_inverse(a: u32, m: u32) -> Option<u32> {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (m as i64, a as i64 % m as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i64) as u32)
}

fn valuation(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Result of solving Bx = rhs over Z_q, q = p^e. The solution count is
/// p^count_prime_exponent when solvable (a power of p, but not always a power
/// of q: elimination can leave pivots divisible by p).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimePowerSolve {
    pub q: u32,
    pub prime: u32,
    pub exp: u32,
    pub solvable: bool,
    pub count_prime_exponent: u64,
    pub sample: Option<Vec<u32>>,
    pub free_cols: Vec<u32>,
    pub pivots: usize,
}

/// Elimination over Z_{p^e}. Each step pivots on an entry of globally minimal
/// p-adic valuation in the remaining submatrix, so every entry it must clear
/// (and every coefficient left in a pivot row) is a multiple of p^v. That
/// makes per-pivot solvability independent of the values chosen for free and
/// later columns, so the count p^{Σv + e·#free} is exact.
pub fn solve_mod_prime_power(b: &SparseMatrix, rhs: &[u32], q: u32) -> Result<PrimePowerSolve> {
    let factors = prime_power_factorization(q);
    let [(p, e)] = factors[..] else {
        return Err(Error::Malformed(format!("{q} is not a prime power")));
    };
    if rhs.len() != b.rows() {
        return Err(Error::Malformed("rhs length != row count".into()));
    }
    let n = b.cols();
    let qq = q as u64;
    let pp = p as u64;
    let mut aug: Vec<Vec<u64>> = b
        .row_support()
        .iter()
        .zip(rhs)
        .map(|(row, &c)| {
            let mut v = vec![0u64; n + 1];
            for &col in row {
                v[col as usize] = 1 % qq;
            }
            v[n] = c as u64 % qq;
            v
        })
        .collect();
    let m = aug.len();
    let mut pivots: Vec<(usize, usize, u32)> = Vec::new();
    let mut is_pivot_col_mask = vec![false; n];
    let mut pr = 0usize;
    while pr < m {
        // globally minimal valuation among remaining rows and non-pivot cols
        let mut best: Option<(usize, usize, u32)> = None;
        'scan: for i in pr..m {
            for col in 0..n {
                if is_pivot_col_mask[col] || aug[i][col] == 0 {
                    continue;
                }
                let v = valuation(aug[i][col], pp);
                if best.map_or(true, |(_, _, bv)| v < bv) {
                    best = Some((i, col, v));
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((pivot_row, col, v)) = best else { break };
        aug.swap(pr, pivot_row);
        is_pivot_col_mask[col] = true;
        let unit = aug[pr][col] / pp.pow(v);
        let unit_inv = mod_inverse((unit % qq) as u32, q).expect("unit mod p^e") as u64;
        let pivot_row_vals = std::mem::take(&mut aug[pr]);
        for row in aug.iter_mut().skip(pr + 1) {
            if row[col] == 0 {
                continue;
            }
            // row[col] has valuation >= v by global pivot minimality
            let factor = (row[col] / pp.pow(v)) % qq * unit_inv % qq;
            for (x, &pv) in row.iter_mut().zip(&pivot_row_vals) {
                *x = (*x + (qq - factor * pv % qq)) % qq;
            }
            debug_assert_eq!(row[col], 0);
        }
        aug[pr] = pivot_row_vals;
        pivots.push((pr, col, v));
        pr += 1;
    }
    // residual rows have no remaining nonzero coefficients; must read 0 = 0
    for row in aug.iter().skip(pr) {
        debug_assert!(row[..n].iter().all(|&x| x == 0));
        if row[n] != 0 {
            return Ok(PrimePowerSolve {
                q,
                prime: p,
                exp: e,
                solvable: false,
                count_prime_exponent: 0,
                sample: None,
                free_cols: Vec::new(),
                pivots: pivots.len(),
            });
        }
    }
    let mut is_pivot_col = vec![false; n];
    for &(_, col, _) in &pivots {
        is_pivot_col[col] = true;
    }
    let free_cols: Vec<u32> = (0..n as u32).filter(|&c| !is_pivot_col[c as usize]).collect();
    // back-substitute with free columns set to 0, in reverse pivot order;
    // a pivot row is zero at all earlier pivot columns, so every other
    // nonzero coefficient multiplies an already assigned value
    let mut x = vec![0u64; n];
    for &(row, col, v) in pivots.iter().rev() {
        let mut s = aug[row][n];
        for j in 0..n {
            if j != col && aug[row][j] != 0 {
                s = (s + qq - aug[row][j] * x[j] % qq) % qq;
            }
        }
        if s == 0 {
            x[col] = 0;
            continue;
        }
        if valuation(s, pp) < v {
            return Ok(PrimePowerSolve {
                q,
                prime: p,
                exp: e,
                solvable: false,
                count_prime_exponent: 0,
                sample: None,
                free_cols,
                pivots: pivots.len(),
            });
        }
        let unit = aug[row][col] / pp.pow(v);
        let unit_inv = mod_inverse((unit % qq) as u32, q).expect("unit mod p^e") as u64;
        x[col] = (s / pp.pow(v)) * unit_inv % pp.pow(e - v);
    }
    let count_prime_exponent =
        free_cols.len() as u64 * e as u64 + pivots.iter().map(|&(_, _, v)| v as u64).sum::<u64>();
    let sample: Vec<u32> = x.iter().map(|&v| v as u32).collect();
    debug_assert!(b
        .row_support()
        .iter()
        .zip(rhs)
        .all(|(row, &c)| row.iter().map(|&j| sample[j as usize] as u64).sum::<u64>() % qq == c as u64));
    Ok(PrimePowerSolve {
        q,
        prime: p,
        exp: e,
        solvable: true,
        count_prime_exponent,
        sample: Some(sample),
        free_cols,
        pivots: pivots.len(),
    })
}

/// Exact solution count as a product of prime powers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCount {
    /// empty and zero=false means 1
    pub zero: bool,
    pub factors: Vec<(u32, u64)>,
}

impl ExactCount {
    pub fn zero() -> Self {
        Self { zero: true, factors: Vec::new() }
    }

    pub fn one() -> Self {
        Self { zero: false, factors: Vec::new() }
    }

    pub fn prime_power(p: u32, e: u64) -> Self {
        Self { zero: false, factors: if e == 0 { Vec::new() } else { vec![(p, e)] } }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.zero || other.zero {
            return Self::zero();
        }
        let mut factors = self.factors.clone();
        for &(p, e) in &other.factors {
            match factors.iter_mut().find(|(q, _)| *q == p) {
                Some((_, acc)) => *acc += e,
                None => factors.push((p, e)),
            }
        }
        factors.sort_unstable();
        Self { zero: false, factors }
    }

    pub fn to_u128(&self) -> Option<u128> {
        if self.zero {
            return Some(0);
        }
        let mut acc: u128 = 1;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc = acc.checked_mul(p as u128)?;
            }
        }
        Some(acc)
    }

    pub fn log(&self) -> f64 {
        if self.zero {
            return f64::NEG_INFINITY;
        }
        self.factors.iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum()
    }
}

impl std::fmt::Display for ExactCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Bx = b over an abelian group: one projected system per component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    /// one group element per row
    pub rhs: Vec<Vec<u32>>,
    pub group: AbelianGroup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbelianSolve {
    pub solvable: bool,
    pub count: ExactCount,
    /// one group element per column
    pub sample: Option<Vec<Vec<u32>>>,
    pub components: Vec<PrimePowerSolve>,
}

pub fn solve_abelian(system: &LinearSystem) -> Result<AbelianSolve> {
    if system.rhs.len() != system.matrix.rows() {
        return Err(Error::Malformed("rhs length != row count".into()));
    }
    let group = &system.group;
    let mut components = Vec::with_capacity(group.num_components());
    for (ci, &q) in group.component_orders().iter().enumerate() {
        let rhs: Vec<u32> = system.rhs.iter().map(|b| b[ci]).collect();
        components.push(solve_mod_prime_power(&system.matrix, &rhs, q)?);
    }
    let solvable = components.iter().all(|c| c.solvable);
    let count = if solvable {
        components
            .iter()
            .fold(ExactCount::one(), |acc, c| acc.mul(&ExactCount::prime_power(c.prime, c.count_prime_exponent)))
    } else {
        ExactCount::zero()
    };
    let sample = solvable.then(|| {
        (0..system.matrix.cols())
            .map(|v| components.iter().map(|c| c.sample.as_ref().unwrap()[v]).collect())
            .collect()
    });
    Ok(AbelianSolve { solvable, count, sample, components })
}

/// ψ_{G,b}: tuples summing to b.
pub fn group_constraint(group: &AbelianGroup, b: &[u32], k: usize, name: impl Into<String>) -> Result<ConstraintFunction> {
    let r64 = group.order();
    if r64 > 255 {
        return Err(Error::Malformed(format!("group order {r64} exceeds the one-byte spin range")));
    }
    let r = r64 as u8;
    let size = spins::table_size(r, k);
    if size > crate::constraint::MAX_TABLE_ENTRIES {
        return Err(Error::TableTooLarge(size));
    }
    let elements: Vec<Vec<u32>> = (0..r64).map(|i| group.element_of_index(i)).collect();
    let mut sat = Vec::with_capacity((size / r64) as usize);
    let mut tuple = vec![0u8; k];
    for idx in 0..size as usize {
        decode_into(idx, r, &mut tuple);
        let mut sum = group.zero();
        for &s in &tuple {
            group.add_assign(&mut sum, &elements[s as usize]);
        }
        if sum == b {
            sat.push(idx as u32);
        }
    }
    ConstraintFunction::new(name, k, r, sat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn group_constraint_examples() {
        let z2 = AbelianGroup::cyclic(2);
        let xor3 = group_constraint(&z2, &[0], 3, "xor3").unwrap();
        assert_eq!(xor3.satisfying(), &[0, 3, 5, 6]);

        let z6 = AbelianGroup::from_orders(&[2, 3]).unwrap();
        let b = vec![1, 2];
        let c = group_constraint(&z6, &b, 3, "z2z3").unwrap();
        assert_eq!(c.satisfying().len(), 36);
        assert!(c.is_uniquely_extendable());
        assert!(c.is_commutative());

        let z4 = AbelianGroup::cyclic(4);
        let c = group_constraint(&z4, &[1], 4, "z4b1").unwrap();
        assert_eq!(c.satisfying().len(), 64);
    }

    #[test]
    fn rank_examples() {
        let id3 = SparseMatrix::from_rows(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(rank_mod_p(&id3, 2), 3);
        let dup = SparseMatrix::from_rows(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(rank_mod_p(&dup, 2), 1);
    }

    fn dense_rank_oracle(b: &SparseMatrix, p: u32) -> usize {
        // plain fraction-free elimination on a dense i64 copy reduced mod p
        let n = b.cols();
        let mut rows: Vec<Vec<i64>> = b
            .row_support()
            .iter()
            .map(|r| {
                let mut v = vec![0i64; n];
                for &c in r {
                    v[c as usize] = 1;
                }
                v
            })
            .collect();
        let p = p as i64;
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col].rem_euclid(p) != 0) else {
                continue;
            };
            rows.swap(rank, piv);
            for i in rank + 1..rows.len() {
                if rows[i][col].rem_euclid(p) != 0 {
                    let a = rows[rank][col].rem_euclid(p);
                    let bb = rows[i][col].rem_euclid(p);
                    for j in 0..n {
                        rows[i][j] = (rows[i][j] * a - rows[rank][j] * bb).rem_euclid(p);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn rank_matches_dense_oracle() {
        let mut rng = crate::rng::derive_rng(11, &[0]);
        for p in [2u32, 3, 5] {
            for _ in 0..20 {
                let rows: Vec<Vec<u32>> = (0..10)
                    .map(|_| {
                        let mut cols = std::collections::BTreeSet::new();
                        while cols.len() < 3 {
                            cols.insert(rng.gen_range(0..12u32));
                        }
                        cols.into_iter().collect()
                    })
                    .collect();
                let b = SparseMatrix::from_rows(12, rows).unwrap();
                assert_eq!(rank_mod_p(&b, p), dense_rank_oracle(&b, p));
            }
        }
    }

    #[test]
    fn solve_mod_prime_power_examples() {
        let b = SparseMatrix::from_rows(3, vec![vec![0, 1, 2]]).unwrap();
        let s = solve_mod_prime_power(&b, &[1], 2).unwrap();
        assert!(s.solvable);
        assert_eq!(s.count_prime_exponent, 2); // 2^2 = 4 solutions

        let b = SparseMatrix::from_rows(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let s = solve_mod_prime_power(&b, &[0, 1], 3).unwrap();
        assert!(!s.solvable);
    }

    fn brute_count_mod_q(b: &SparseMatrix, rhs: &[u32], q: u32) -> (u64, Option<Vec<u32>>) {
        let n = b.cols();
        let total = (q as u64).pow(n as u32);
        let mut count = 0;
        let mut sample = None;
        for idx in 0..total {
            let mut x = vec![0u32; n];
            let mut t = idx;
            for slot in x.iter_mut().rev() {
                *slot = (t % q as u64) as u32;
                t /= q as u64;
            }
            let ok = b
                .row_support()
                .iter()
                .zip(rhs)
                .all(|(row, &c)| row.iter().map(|&j| x[j as usize]).sum::<u32>() % q == c);
            if ok {
                count += 1;
                sample.get_or_insert(x);
            }
        }
        (count, sample)
    }

    #[test]
    fn solve_mod_prime_power_matches_bruteforce() {
        let mut rng = crate::rng::derive_rng(13, &[0]);
        for q in [2u32, 3, 4, 8, 9] {
            for trial in 0..25 {
                let n = 6 + (trial % 3);
                let m = rng.gen_range(1..=7);
                let rows: Vec<Vec<u32>> = (0..m)
                    .map(|_| {
                        let mut cols = std::collections::BTreeSet::new();
                        let w = rng.gen_range(2..=3usize);
                        while cols.len() < w {
                            cols.insert(rng.gen_range(0..n as u32));
                        }
                        cols.into_iter().collect()
                    })
                    .collect();
                let b = SparseMatrix::from_rows(n, rows).unwrap();
                let rhs: Vec<u32> = (0..m).map(|_| rng.gen_range(0..q)).collect();
                let s = solve_mod_prime_power(&b, &rhs, q).unwrap();
                let (brute, _) = brute_count_mod_q(&b, &rhs, q);
                if s.solvable {
                    let p = s.prime as u64;
                    assert_eq!(p.pow(s.count_prime_exponent as u32), brute);
                } else {
                    assert_eq!(brute, 0);
                }
            }
        }
    }

    #[test]
    fn stuck_pivot_case_is_counted_exactly() {
        // odd cycle over Z_4: count is 2, not a power of 4
        let b =
            SparseMatrix::from_rows(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        let s = solve_mod_prime_power(&b, &[0, 0, 2], 4).unwrap();
        let (brute, _) = brute_count_mod_q(&b, &[0, 0, 2], 4);
        assert!(s.solvable);
        assert_eq!(2u64.pow(s.count_prime_exponent as u32), brute);
        assert_eq!(brute, 2);
    }

    #[test]
    fn solve_abelian_z6_single_row() {
        let z6 = AbelianGroup::from_orders(&[6]).unwrap();
        let b = SparseMatrix::from_rows(3, vec![vec![0, 1, 2]]).unwrap();
        let rhs = vec![z6.element_of_index(5)];
        assert_eq!(rhs[0], vec![1, 2]);
        let sys = LinearSystem { matrix: b, rhs, group: z6 };
        let sol = solve_abelian(&sys).unwrap();
        assert!(sol.solvable);
        assert_eq!(sol.count.to_u128(), Some(36));
    }

    #[test]
    fn solve_abelian_matches_bruteforce() {
        let mut rng = crate::rng::derive_rng(17, &[0]);
        for orders in [vec![6u32], vec![2, 3], vec![4], vec![12]] {
            let g = AbelianGroup::from_orders(&orders).unwrap();
            for _ in 0..10 {
                let n = 5usize;
                let m = rng.gen_range(1..=5);
                let rows: Vec<Vec<u32>> = (0..m)
                    .map(|_| {
                        let mut cols = std::collections::BTreeSet::new();
                        while cols.len() < 3 {
                            cols.insert(rng.gen_range(0..n as u32));
                        }
                        cols.into_iter().collect()
                    })
                    .collect();
                let matrix = SparseMatrix::from_rows(n, rows).unwrap();
                let rhs: Vec<Vec<u32>> =
                    (0..m).map(|_| g.element_of_index(rng.gen_range(0..g.order()))).collect();
                let sys = LinearSystem { matrix: matrix.clone(), rhs: rhs.clone(), group: g.clone() };
                let sol = solve_abelian(&sys).unwrap();
                // brute force over group elements
                let mut brute = 0u128;
                let total = g.order().pow(n as u32);
                for idx in 0..total {
                    let mut x = Vec::with_capacity(n);
                    let mut t = idx;
                    for _ in 0..n {
                        x.push(g.element_of_index(t % g.order()));
                        t /= g.order();
                    }
                    let ok = matrix.row_support().iter().zip(&rhs).all(|(row, c)| {
                        let mut sum = g.zero();
                        for &j in row {
                            g.add_assign(&mut sum, &x[j as usize]);
                        }
                        sum == *c
                    });
                    if ok {
                        brute += 1;
                    }
                }
                assert_eq!(sol.count.to_u128(), Some(brute));
                if let Some(sample) = &sol.sample {
                    let ok = matrix.row_support().iter().zip(&rhs).all(|(row, c)| {
                        let mut sum = g.zero();
                        for &j in row {
                            g.add_assign(&mut sum, &sample[j as usize]);
                        }
                        sum == *c
                    });
                    assert!(ok);
                }
            }
        }
    }

    #[test]
    fn element_index_roundtrip() {
        let g = AbelianGroup::from_orders(&[2, 4, 3]).unwrap();
        for i in 0..g.order() {
            assert_eq!(g.index_of(&g.element_of_index(i)), i);
        }
    }
}
