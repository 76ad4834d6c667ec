//! Polyadic quasigroup view of extension functions: Latin property, neutral
//! elements, associativity across nesting positions, total symmetry, and
//! exchangeability, each with a replayable witness on failure.

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintFunction;
use crate::spins::{self, decode, decode_into};
use crate::{Error, Result};

/// Total operation Ω^arity → Ω, table indexed big-endian base r.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationTable {
    arity: usize,
    r: u8,
    table: Vec<u8>,
}

impl OperationTable {
    pub fn new(arity: usize, r: u8, table: Vec<u8>) -> Result<Self> {
        if arity == 0 || r < 2 {
            return Err(Error::Malformed("need arity >= 1 and r >= 2".into()));
        }
        let size = spins::table_size(r, arity);
        if size > crate::constraint::MAX_TABLE_ENTRIES {
            return Err(Error::TableTooLarge(size));
        }
        if table.len() as u64 != size {
            return Err(Error::Malformed("operation table length is not r^arity".into()));
        }
        if table.iter().any(|&v| v >= r) {
            return Err(Error::Malformed("operation table value out of range".into()));
        }
        Ok(Self { arity, r, table })
    }

    /// f_ψ of a UE constraint as a (k−1)-ary operation.
    pub fn from_extension(psi: &ConstraintFunction) -> Result<Self> {
        let table = psi.extension_table()?;
        Self::new(psi.k() - 1, psi.r(), table)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn eval_index(&self, idx: usize) -> u8 {
        self.table[idx]
    }

    pub fn eval(&self, args: &[u8]) -> u8 {
        assert_eq!(args.len(), self.arity);
        let mut idx = 0usize;
        for &a in args {
            debug_assert!(a < self.r);
            idx = idx * self.r as usize + a as usize;
        }
        self.table[idx]
    }
}

/// The derived k-ary operation of a UE constraint with distinguished spin α:
/// with β the completion of α^{k−1},
/// f′(τ₁…τ_k) = f(f(τ₁…τ_{k−1}), f(τ_k α^{k−3} β), f(α^{k−2} β), …, f(α^{k−2} β)).
pub fn quasigroup_f_prime(psi: &ConstraintFunction, alpha: u8) -> Result<OperationTable> {
    let k = psi.k();
    let r = psi.r();
    if k < 3 {
        return Err(Error::Invalid("need k >= 3".into()));
    }
    if alpha >= r {
        return Err(Error::Malformed("alpha out of range".into()));
    }
    let f = psi.extension_table()?;
    let eval = |args: &[u8]| -> u8 {
        let mut idx = 0usize;
        for &a in args {
            idx = idx * r as usize + a as usize;
        }
        f[idx]
    };
    let beta = eval(&vec![alpha; k - 1]);
    let mut pad = vec![alpha; k - 1];
    pad[k - 2] = beta;
    let filler = eval(&pad); // f(α^{k−2} β)
    let size = spins::table_size(r, k) as usize;
    let mut table = vec![0u8; size];
    let mut tau = vec![0u8; k];
    let mut outer = vec![filler; k - 1];
    let mut second = vec![alpha; k - 1];
    second[k - 2] = beta;
    for (idx, out) in table.iter_mut().enumerate() {
        decode_into(idx, r, &mut tau);
        outer[0] = eval(&tau[..k - 1]);
        second[0] = tau[k - 1];
        outer[1] = eval(&second);
        *out = eval(&outer);
    }
    OperationTable::new(k, r, table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinWitness {
    /// coordinate that is not bijective (0-based)
    pub position: usize,
    /// the other arity−1 arguments, in order
    pub context: Vec<u8>,
    pub spin: u8,
    pub spin_alt: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociativityWitness {
    /// nesting position whose value differs from nesting at position 0
    pub position: usize,
    /// 2·arity−1 arguments
    pub args: Vec<u8>,
    pub value: u8,
    pub baseline: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymmetryWitness {
    /// op(args) changes when args[swap_at] and args[swap_at+1] are swapped
    ArgSwap { args: Vec<u8>, swap_at: usize },
    /// op(args[..arity−1], op(args)) != args[arity−1]
    Completion { args: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeabilityWitness {
    /// middle block spans positions start..start+middle.len()
    pub start: usize,
    pub prefix: Vec<u8>,
    pub prefix_alt: Vec<u8>,
    pub suffix: Vec<u8>,
    pub suffix_alt: Vec<u8>,
    pub middle: Vec<u8>,
    pub middle_alt: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasigroupReport {
    pub is_quasigroup: bool,
    pub latin_witness: Option<LatinWitness>,
    pub neutral_elements: Vec<u8>,
    pub is_associative: bool,
    pub associativity_witness: Option<AssociativityWitness>,
    pub is_totally_symmetric: bool,
    pub symmetry_witness: Option<SymmetryWitness>,
    pub is_exchangeable: bool,
    pub exchangeability_witness: Option<ExchangeabilityWitness>,
}

pub fn quasigroup_checks(op: &OperationTable) -> QuasigroupReport {
    let latin = latin_witness(op);
    let assoc = associativity_witness(op);
    let sym = symmetry_witness(op);
    let exch = exchangeability_witness(op);
    QuasigroupReport {
        is_quasigroup: latin.is_none(),
        latin_witness: latin,
        neutral_elements: neutral_elements(op),
        is_associative: assoc.is_none(),
        associativity_witness: assoc,
        is_totally_symmetric: sym.is_none(),
        symmetry_witness: sym,
        is_exchangeable: exch.is_none(),
        exchangeability_witness: exch,
    }
}

/// Latin property: every coordinate, with the others fixed, is a bijection.
pub fn latin_witness(op: &OperationTable) -> Option<LatinWitness> {
    let a = op.arity();
    let r = op.r() as usize;
    let size = op.table().len();
    for pos in 0..a {
        let p = r.pow((a - 1 - pos) as u32);
        let outer = size / (p * r);
        for hi in 0..outer {
            for lo in 0..p {
                let base = hi * p * r + lo;
                let mut seen: Vec<Option<u8>> = vec![None; r];
                for s in 0..r {
                    let v = op.eval_index(base + s * p) as usize;
                    if let Some(prev) = seen[v] {
                        return Some(LatinWitness {
                            position: pos,
                            context: decode(hi * p + lo, a - 1, op.r()),
                            spin: prev,
                            spin_alt: s as u8,
                        });
                    }
                    seen[v] = Some(s as u8);
                }
            }
        }
    }
    None
}

/// Spins e with op(e^{i} τ e^{arity−1−i}) = τ for every position i and spin τ.
pub fn neutral_elements(op: &OperationTable) -> Vec<u8> {
    let a = op.arity();
    let r = op.r();
    (0..r)
        .filter(|&e| {
            (0..a).all(|i| {
                (0..r).all(|tau| {
                    let mut args = vec![e; a];
                    args[i] = tau;
                    op.eval(&args) == tau
                })
            })
        })
        .collect()
}

/// op(y₀…y_{i−1}, op(y_i…y_{i+a−1}), y_{i+a}…) must agree across all nesting
/// positions i; compares each i > 0 to i = 0 over all tuples in Ω^{2a−1}.
pub fn associativity_witness(op: &OperationTable) -> Option<AssociativityWitness> {
    let a = op.arity();
    if a < 2 {
        return None;
    }
    let r = op.r();
    let total = 2 * a - 1;
    let size = spins::table_size(r, total);
    let mut args = vec![0u8; total];
    let mut nested = vec![0u8; a];
    for idx in 0..size {
        decode_into(idx as usize, r, &mut args);
        let nest_at = |i: usize, nested: &mut Vec<u8>| {
            let inner = op.eval(&args[i..i + a]);
            nested[..i].copy_from_slice(&args[..i]);
            nested[i] = inner;
            nested[i + 1..].copy_from_slice(&args[i + a..]);
            op.eval(nested)
        };
        let baseline = nest_at(0, &mut nested);
        for i in 1..a {
            let v = nest_at(i, &mut nested);
            if v != baseline {
                return Some(AssociativityWitness { position: i, args, value: v, baseline });
            }
        }
    }
    None
}

/// Total symmetry of the graph relation op(x₁…x_a) = x_{a+1}: the operation is
/// symmetric in its arguments and op(x₁…x_{a−1}, op(x)) = x_a.
pub fn symmetry_witness(op: &OperationTable) -> Option<SymmetryWitness> {
    let a = op.arity();
    let r = op.r() as usize;
    let size = op.table().len();
    // adjacent argument swaps
    for pos in 0..a.saturating_sub(1) {
        let p_hi = r.pow((a - 1 - pos) as u32);
        let p_lo = p_hi / r;
        for idx in 0..size {
            let x = (idx / p_hi) % r;
            let y = (idx / p_lo) % r;
            if x == y {
                continue;
            }
            let swapped = (idx as i64 + (y as i64 - x as i64) * p_hi as i64
                + (x as i64 - y as i64) * p_lo as i64) as usize;
            if op.eval_index(idx) != op.eval_index(swapped) {
                return Some(SymmetryWitness::ArgSwap { args: decode(idx, a, op.r()), swap_at: pos });
            }
        }
    }
    // completion: replacing the last argument by op(x) must return the old one
    for idx in 0..size {
        let last = idx % r;
        let v = op.eval_index(idx) as usize;
        if op.eval_index(idx - last + v) as usize != last {
            return Some(SymmetryWitness::Completion { args: decode(idx, a, op.r()) });
        }
    }
    None
}

/// Exchangeability: for every contiguous middle block, whether two middles
/// give equal values must not depend on the surrounding context. Checked by
/// comparing each context's value partition of the middles (as canonical
/// labels) against the first context's.
pub fn exchangeability_witness(op: &OperationTable) -> Option<ExchangeabilityWitness> {
    let a = op.arity();
    let r = op.r() as usize;
    for start in 0..a {
        for end in start..a {
            let mid_len = end - start + 1;
            let nm = r.pow(mid_len as u32);
            let np = r.pow(start as u32);
            let ns = r.pow((a - 1 - end) as u32);
            if np * ns == 1 {
                continue; // single context, nothing to compare
            }
            let values = |pi: usize, si: usize| -> Vec<u8> {
                (0..nm)
                    .map(|mi| op.eval_index((pi * nm + mi) * ns + si))
                    .collect()
            };
            let canon = |vals: &[u8]| -> Vec<u8> {
                let mut label = vec![u8::MAX; r];
                let mut next = 0u8;
                vals.iter()
                    .map(|&v| {
                        if label[v as usize] == u8::MAX {
                            label[v as usize] = next;
                            next += 1;
                        }
                        label[v as usize]
                    })
                    .collect()
            };
            let first_vals = values(0, 0);
            let first_sig = canon(&first_vals);
            for pi in 0..np {
                for si in 0..ns {
                    if pi == 0 && si == 0 {
                        continue;
                    }
                    let vals = values(pi, si);
                    if canon(&vals) != first_sig {
                        // some middle pair is fused in one context, split in the other
                        for m0 in 0..nm {
                            for m1 in m0 + 1..nm {
                                let fused_first = first_vals[m0] == first_vals[m1];
                                let fused_here = vals[m0] == vals[m1];
                                if fused_first == fused_here {
                                    continue;
                                }
                                let (cp, cs, ap, as_) = if fused_first {
                                    (0, 0, pi, si)
                                } else {
                                    (pi, si, 0, 0)
                                };
                                return Some(ExchangeabilityWitness {
                                    start,
                                    prefix: decode(cp, start, op.r()),
                                    prefix_alt: decode(ap, start, op.r()),
                                    suffix: decode(cs, a - 1 - end, op.r()),
                                    suffix_alt: decode(as_, a - 1 - end, op.r()),
                                    middle: decode(m0, mid_len, op.r()),
                                    middle_alt: decode(m1, mid_len, op.r()),
                                });
                            }
                        }
                        unreachable!("differing signatures yield a distinguishing pair");
                    }
                }
            }
        }
    }
    None
}

/// op(prefix·middle·suffix) = op(prefix·middle_alt·suffix) but the alternate
/// context disagrees.
pub fn replay_exchangeability_witness(op: &OperationTable, w: &ExchangeabilityWitness) -> bool {
    let a = op.arity();
    if w.prefix.len() != w.start
        || w.prefix_alt.len() != w.start
        || w.suffix.len() != a - w.start - w.middle.len()
        || w.suffix_alt.len() != w.suffix.len()
        || w.middle.len() != w.middle_alt.len()
    {
        return false;
    }
    let cat = |p: &[u8], m: &[u8], s: &[u8]| {
        let mut t = p.to_vec();
        t.extend_from_slice(m);
        t.extend_from_slice(s);
        t
    };
    op.eval(&cat(&w.prefix, &w.middle, &w.suffix))
        == op.eval(&cat(&w.prefix, &w.middle_alt, &w.suffix))
        && op.eval(&cat(&w.prefix_alt, &w.middle, &w.suffix_alt))
            != op.eval(&cat(&w.prefix_alt, &w.middle_alt, &w.suffix_alt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{group_constraint, AbelianGroup};
    use crate::product::nongroup_family;

    fn zq(k: usize, q: u32, b: u32) -> ConstraintFunction {
        let g = AbelianGroup::cyclic(q);
        group_constraint(&g, &g.element_of_index(b as u64), k, format!("z{q}b{b}")).unwrap()
    }

    #[test]
    fn xor3_f_prime_by_hand() {
        let psi = zq(3, 2, 0);
        let op = quasigroup_f_prime(&psi, 0).unwrap();
        // β = f(0,0) = 0; f′(1,1,0) = f(f(1,1), f(0,β)) = f(0,0) = 0
        assert_eq!(op.eval(&[1, 1, 0]), 0);
        let report = quasigroup_checks(&op);
        assert!(report.is_quasigroup);
        assert!(report.neutral_elements.contains(&0));
        assert!(report.is_associative);
    }

    #[test]
    fn f_prime_level_set_is_the_constraint() {
        for psi in [zq(3, 3, 1), zq(4, 4, 2), nongroup_family(3, 3, 2).unwrap()] {
            for alpha in 0..psi.r() {
                let f = psi.extension_table().unwrap();
                let beta = f[crate::spins::encode(&vec![alpha; psi.k() - 1], psi.r())];
                let op = quasigroup_f_prime(&psi, alpha).unwrap();
                for idx in 0..op.table().len() {
                    assert_eq!(op.eval_index(idx) == beta, psi.satisfied_index(idx));
                }
            }
        }
    }

    #[test]
    fn group_f_prime_is_associative_with_neutral_alpha() {
        for psi in [zq(3, 3, 0), zq(4, 2, 1), zq(3, 4, 3)] {
            for alpha in 0..psi.r() {
                let op = quasigroup_f_prime(&psi, alpha).unwrap();
                let report = quasigroup_checks(&op);
                assert!(report.is_quasigroup);
                assert!(report.neutral_elements.contains(&alpha));
                assert!(report.is_associative, "{} alpha {alpha}", psi.name());
            }
        }
    }

    #[test]
    fn nongroup_f_prime_is_not_associative() {
        let psi = nongroup_family(3, 3, 2).unwrap();
        let op = quasigroup_f_prime(&psi, 0).unwrap();
        let report = quasigroup_checks(&op);
        assert!(report.is_quasigroup);
        assert!(!report.is_associative);
        let w = report.associativity_witness.unwrap();
        // replay: nesting at w.position disagrees with nesting at 0
        let a = op.arity();
        let nest = |i: usize| {
            let inner = op.eval(&w.args[i..i + a]);
            let mut outer = Vec::new();
            outer.extend_from_slice(&w.args[..i]);
            outer.push(inner);
            outer.extend_from_slice(&w.args[i + a..]);
            op.eval(&outer)
        };
        assert_eq!(nest(0), w.baseline);
        assert_eq!(nest(w.position), w.value);
        assert_ne!(w.value, w.baseline);
    }

    #[test]
    fn extension_of_commutative_ue_is_totally_symmetric() {
        for psi in [zq(4, 4, 1), nongroup_family(3, 3, 2).unwrap()] {
            let op = OperationTable::from_extension(&psi).unwrap();
            let report = quasigroup_checks(&op);
            assert!(report.is_quasigroup);
            assert!(report.is_totally_symmetric, "{}", psi.name());
        }
    }

    #[test]
    fn exchangeability_matches_reducibility_of_singleton() {
        use crate::constraint::ConstraintSet;
        use crate::reducibility::is_reducible;
        for psi in [zq(3, 3, 1), zq(4, 4, 0), nongroup_family(4, 3, 3).unwrap()] {
            let set = ConstraintSet::new(vec![psi.clone()]).unwrap();
            let reducible = is_reducible(&set).unwrap();
            let op = OperationTable::from_extension(&psi).unwrap();
            let w = exchangeability_witness(&op);
            assert_eq!(w.is_none(), reducible, "{}", psi.name());
            if let Some(w) = w {
                assert!(replay_exchangeability_witness(&op, &w));
            }
        }
    }

    #[test]
    fn broken_symmetry_is_caught() {
        // a non-symmetric quasigroup: subtraction mod 3
        let r = 3u8;
        let table: Vec<u8> = (0..9).map(|i| ((i / 3 + 3 - i % 3) % 3) as u8).collect();
        let op = OperationTable::new(2, r, table).unwrap();
        let report = quasigroup_checks(&op);
        assert!(report.is_quasigroup);
        assert!(!report.is_totally_symmetric);
    }
}
