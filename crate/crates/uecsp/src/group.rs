//! Reconstruction of an abelian group from a commutative UE constraint set:
//! candidate addition from two extension lookups, exhaustive axiom
//! verification, invariant factors, and an explicit decomposition into
//! prime-power cyclic components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraint::{
    CommutativityWitness, ConstraintSet, F2Witness, UeViolation,
};
use crate::linalg::AbelianGroup;
use crate::reducibility::ReducibilityWitness;
use crate::spins::encode;
use crate::{Error, Result};

/// Verified abelian group structure on the spin set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    order: usize,
    /// row-major r×r addition table
    add: Vec<u8>,
    identity: u8,
    inverse: Vec<u8>,
    invariant_factors: Vec<u32>,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.order + b as usize]
    }

    pub fn identity(&self) -> u8 {
        self.identity
    }

    pub fn inverse(&self, a: u8) -> u8 {
        self.inverse[a as usize]
    }

    pub fn invariant_factors(&self) -> &[u32] {
        &self.invariant_factors
    }

    pub fn element_order(&self, a: u8) -> u32 {
        let mut acc = a;
        let mut ord = 1;
        while acc != self.identity {
            acc = self.add(acc, a);
            ord += 1;
        }
        ord
    }
}

/// Reason a constraint set admits no (verified) group structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AsymmetryWitness {
    #[serde(rename = "not-UE")]
    NotUe { function: String, violation: UeViolation },
    #[serde(rename = "not-commutative")]
    NotCommutative { function: String, witness: CommutativityWitness },
    #[serde(rename = "F2-asymmetric")]
    F2Asymmetric { witness: F2Witness },
    #[serde(rename = "irreducible")]
    Irreducible { witness: ReducibilityWitness },
    /// candidate addition fails a group axiom or the constraint is not the
    /// level set of the group sum
    #[serde(rename = "no-bijection")]
    NoBijection {
        detail: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        function: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tuple: Option<Vec<u8>>,
    },
}

/// Group structure plus the per-function target elements b_ψ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupEquivalence {
    pub group: GroupTable,
    /// b_ψ per function name: σ ⊨ ψ ⇔ Σσᵢ = b_ψ
    pub targets: BTreeMap<String, u8>,
    pub base_spin: u8,
    pub verified: bool,
}

/// Invariant factors (ascending divisibility chain, 1s dropped) of an abelian
/// group given by its table, via the element-order census.
fn invariant_factors_from_orders(order: usize, element_orders: &[u32]) -> Vec<u32> {
    fn exact_log(mut n: usize, p: u32) -> u32 {
        let mut e = 0;
        while n > 1 {
            debug_assert_eq!(n % p as usize, 0);
            n /= p as usize;
            e += 1;
        }
        e
    }
    let mut partitions: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut rem = order as u32;
    let mut p = 2;
    while rem > 1 {
        if rem % p == 0 {
            while rem % p == 0 {
                rem /= p;
            }
            // #{g : ord(g) | p^i} = p^{Σ_j min(λ_j, i)} determines the Sylow
            // partition λ; the per-i increments are its conjugate partition
            let mut conj = Vec::new();
            let mut s_prev = 0u32;
            let mut i = 1u32;
            loop {
                let pe = (p as u64).pow(i);
                let n_i = element_orders.iter().filter(|&&o| pe % o as u64 == 0).count();
                let s_i = exact_log(n_i, p);
                let parts_ge_i = s_i - s_prev;
                if parts_ge_i == 0 {
                    break;
                }
                conj.push(parts_ge_i);
                s_prev = s_i;
                i += 1;
            }
            let max_mult = conj.iter().copied().max().unwrap_or(0);
            let lambda: Vec<u32> = (1..=max_mult)
                .map(|j| conj.iter().filter(|&&c| c >= j).count() as u32)
                .collect();
            partitions.push((p, lambda));
        }
        p += 1;
    }
    let depth = partitions.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut factors: Vec<u32> = (0..depth)
        .map(|j| {
            partitions
                .iter()
                .map(|(p, l)| l.get(j).map_or(1, |&e| p.pow(e)))
                .product()
        })
        .collect();
    factors.retain(|&f| f > 1);
    factors.reverse(); // ascending divisibility chain
    factors
}

/// Builds ⊕ from ψ⋆ ∈ Ψ and verifies everything exhaustively.
pub fn reconstruct_group(
    set: &ConstraintSet,
    alpha: u8,
) -> std::result::Result<GroupEquivalence, AsymmetryWitness> {
    let k = set.k();
    let r = set.r() as usize;
    assert!((alpha as usize) < r, "base spin out of range");
    if k < 3 {
        return Err(AsymmetryWitness::NoBijection {
            detail: "group reconstruction needs arity k >= 3".into(),
            function: None,
            tuple: None,
        });
    }
    for m in set.members() {
        if let Some(v) = m.ue_violation() {
            return Err(AsymmetryWitness::NotUe { function: m.name().into(), violation: v });
        }
        if let Some(w) = m.commutativity_witness() {
            return Err(AsymmetryWitness::NotCommutative { function: m.name().into(), witness: w });
        }
    }
    let star = &set.members()[0];

    // a ⊕ b: complete (a, b, ·, α^{k−3}) under ψ⋆, then (·, τ, α^{k−2})
    let mut add = vec![0u8; r * r];
    for a in 0..r as u8 {
        for b in 0..r as u8 {
            let mut others = vec![alpha; k - 1];
            others[0] = a;
            others[1] = b;
            let tau = star.extension_at(2, &others).expect("UE");
            let mut others2 = vec![alpha; k - 1];
            others2[0] = tau;
            let tau_prime = star.extension_at(0, &others2).expect("UE");
            add[a as usize * r + b as usize] = tau_prime;
        }
    }
    let table_add = |a: u8, b: u8| add[a as usize * r + b as usize];

    for a in 0..r as u8 {
        if table_add(a, alpha) != a || table_add(alpha, a) != a {
            return Err(AsymmetryWitness::NoBijection {
                detail: format!("base spin {alpha} is not an identity for the candidate addition"),
                function: Some(star.name().into()),
                tuple: Some(vec![a, alpha]),
            });
        }
    }
    for a in 0..r as u8 {
        for b in 0..r as u8 {
            if table_add(a, b) != table_add(b, a) {
                return Err(AsymmetryWitness::NoBijection {
                    detail: "candidate addition is not commutative".into(),
                    function: Some(star.name().into()),
                    tuple: Some(vec![a, b]),
                });
            }
        }
    }
    for a in 0..r as u8 {
        for b in 0..r as u8 {
            for c in 0..r as u8 {
                if table_add(table_add(a, b), c) != table_add(a, table_add(b, c)) {
                    return Err(AsymmetryWitness::NoBijection {
                        detail: "candidate addition is not associative".into(),
                        function: Some(star.name().into()),
                        tuple: Some(vec![a, b, c]),
                    });
                }
            }
        }
    }
    let mut inverse = vec![None; r];
    for a in 0..r as u8 {
        for b in 0..r as u8 {
            if table_add(a, b) == alpha {
                inverse[a as usize] = Some(b);
            }
        }
    }
    let inverse: Vec<u8> = match inverse.into_iter().collect::<Option<_>>() {
        Some(v) => v,
        None => {
            return Err(AsymmetryWitness::NoBijection {
                detail: "candidate addition lacks inverses".into(),
                function: Some(star.name().into()),
                tuple: None,
            })
        }
    };

    let mut group = GroupTable {
        order: r,
        add,
        identity: alpha,
        inverse,
        invariant_factors: Vec::new(),
    };
    let element_orders: Vec<u32> = (0..r as u8).map(|a| group.element_order(a)).collect();
    group.invariant_factors = invariant_factors_from_orders(r, &element_orders);

    // targets and full equivalence check
    let mut targets = BTreeMap::new();
    for psi in set.members() {
        let table = psi.extension_table().expect("UE verified above");
        let alpha_prefix = vec![alpha; k - 1];
        let b_psi = table[encode(&alpha_prefix, set.r())];
        let size = psi.table_entries();
        let mut tuple = vec![0u8; k];
        for idx in 0..size {
            crate::spins::decode_into(idx, set.r(), &mut tuple);
            let sum = tuple.iter().fold(alpha, |acc, &s| group.add(acc, s));
            if (sum == b_psi) != psi.satisfied_index(idx) {
                return Err(AsymmetryWitness::NoBijection {
                    detail: "constraint is not the level set of the reconstructed group sum".into(),
                    function: Some(psi.name().into()),
                    tuple: Some(tuple),
                });
            }
        }
        targets.insert(psi.name().to_string(), b_psi);
    }

    Ok(GroupEquivalence { group, targets, base_spin: alpha, verified: true })
}

/// Explicit isomorphism from a GroupTable to Z_{d₁}×…×Z_{d_t} split into
/// prime-power components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupDecomposition {
    pub abelian: AbelianGroup,
    /// spin → element (component residues)
    pub spin_to_element: Vec<Vec<u32>>,
    /// element index (AbelianGroup::index_of) → spin
    pub element_to_spin: Vec<u8>,
}

pub fn decompose(table: &GroupTable) -> Result<GroupDecomposition> {
    let factors = table.invariant_factors().to_vec();
    if factors.is_empty() {
        return Err(Error::Invalid("trivial group has no spin set".into()));
    }
    let r = table.order();
    debug_assert_eq!(factors.iter().map(|&d| d as u64).product::<u64>(), r as u64);
    // generators g_i of order d_i with Σ a_i g_i injective, by backtracking
    let candidates: Vec<Vec<u8>> = factors
        .iter()
        .map(|&d| (0..r as u8).filter(|&g| table.element_order(g) == d).collect())
        .collect();
    let mut chosen: Vec<u8> = Vec::new();
    // sums[combo index in mixed radix over factors chosen so far]
    fn extend(
        table: &GroupTable,
        factors: &[u32],
        candidates: &[Vec<u8>],
        chosen: &mut Vec<u8>,
        sums: &[u8],
    ) -> Option<Vec<u8>> {
        let slot = chosen.len();
        if slot == factors.len() {
            return Some(sums.to_vec());
        }
        let d = factors[slot];
        for &g in &candidates[slot] {
            let mut new_sums = Vec::with_capacity(sums.len() * d as usize);
            let mut seen = vec![false; table.order()];
            let mut acc = table.identity();
            let mut distinct = true;
            'outer: for _a in 0..d {
                for &s in sums {
                    let v = table.add(s, acc);
                    if std::mem::replace(&mut seen[v as usize], true) {
                        distinct = false;
                        break 'outer;
                    }
                    new_sums.push(v);
                }
                acc = table.add(acc, g);
            }
            if distinct {
                chosen.push(g);
                if let Some(full) = extend(table, factors, candidates, chosen, &new_sums) {
                    return Some(full);
                }
                chosen.pop();
            }
        }
        None
    }
    let sums = extend(table, &factors, &candidates, &mut chosen, &[table.identity()])
        .ok_or_else(|| Error::Invalid("no generating tuple found (table not a group?)".into()))?;
    // sums[combo]: combo is mixed-radix over the factors, slot 0 least
    // significant (new_sums appends the new coefficient as the outer loop)
    let abelian = AbelianGroup::from_orders(&factors)?;
    let mut spin_to_element = vec![Vec::new(); r];
    let mut element_to_spin = vec![0u8; r];
    for (combo, &spin) in sums.iter().enumerate() {
        let mut rem = combo;
        let mut residues = vec![0u32; factors.len()];
        for (i, &d) in factors.iter().enumerate() {
            residues[i] = (rem % d as usize) as u32;
            rem /= d as usize;
        }
        let elem = abelian.element_from_factor_residues(&residues)?;
        element_to_spin[abelian.index_of(&elem) as usize] = spin;
        spin_to_element[spin as usize] = elem;
    }
    Ok(GroupDecomposition { abelian, spin_to_element, element_to_spin })
}

/// Equivalence plus decomposition: everything needed to turn instances into
/// linear systems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupModel {
    pub equivalence: GroupEquivalence,
    pub decomposition: GroupDecomposition,
}

impl GroupModel {
    pub fn target_element(&self, function: &str) -> Result<Vec<u32>> {
        let spin = self
            .equivalence
            .targets
            .get(function)
            .ok_or_else(|| Error::UnknownFunction(function.into()))?;
        Ok(self.decomposition.spin_to_element[*spin as usize].clone())
    }
}

pub fn build_group_model(
    set: &ConstraintSet,
    alpha: u8,
) -> std::result::Result<GroupModel, Box<AsymmetryWitness>> {
    let equivalence = reconstruct_group(set, alpha).map_err(Box::new)?;
    let decomposition = decompose(&equivalence.group).expect("verified group always decomposes");
    Ok(GroupModel { equivalence, decomposition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{group_constraint, AbelianGroup};

    fn set_of(cfs: Vec<crate::constraint::ConstraintFunction>) -> ConstraintSet {
        ConstraintSet::new(cfs).unwrap()
    }

    #[test]
    fn z5_reconstruction() {
        let z5 = AbelianGroup::cyclic(5);
        let psi = group_constraint(&z5, &[2], 3, "z5b2").unwrap();
        let eq = reconstruct_group(&set_of(vec![psi]), 0).unwrap();
        assert!(eq.verified);
        assert_eq!(eq.group.invariant_factors(), &[5]);
        assert_eq!(eq.targets["z5b2"], 2);
    }

    #[test]
    fn relabeled_z4_reconstruction() {
        let z4 = AbelianGroup::cyclic(4);
        let psi = group_constraint(&z4, &[1], 3, "z4b1").unwrap();
        let relabeled = psi.relabeled(&[2, 0, 3, 1], "z4relab").unwrap();
        let eq = reconstruct_group(&set_of(vec![relabeled]), 0).unwrap();
        assert!(eq.verified);
        assert_eq!(eq.group.invariant_factors(), &[4]);
    }

    #[test]
    fn klein_group_invariant_factors() {
        let v4 = AbelianGroup::from_orders(&[2, 2]).unwrap();
        let psi = group_constraint(&v4, &[1, 1], 3, "v4").unwrap();
        let eq = reconstruct_group(&set_of(vec![psi]), 0).unwrap();
        assert_eq!(eq.group.invariant_factors(), &[2, 2]);
        let z4xz2 = AbelianGroup::from_orders(&[4, 2]).unwrap();
        let psi = group_constraint(&z4xz2, &[3, 0], 3, "z4z2").unwrap();
        let eq = reconstruct_group(&set_of(vec![psi]), 0).unwrap();
        assert_eq!(eq.group.invariant_factors(), &[2, 4]);
    }

    #[test]
    fn mixed_targets_share_one_group() {
        let z2 = AbelianGroup::cyclic(2);
        let a = group_constraint(&z2, &[0], 3, "b0").unwrap();
        let b = group_constraint(&z2, &[1], 3, "b1").unwrap();
        let eq = reconstruct_group(&set_of(vec![a, b]), 0).unwrap();
        assert_eq!(eq.targets["b0"], 0);
        assert_eq!(eq.targets["b1"], 1);
    }

    #[test]
    fn decomposition_is_an_isomorphism() {
        for orders in [vec![8u32], vec![2, 4], vec![2, 2, 2], vec![6], vec![12]] {
            let g = AbelianGroup::from_orders(&orders).unwrap();
            let psi = group_constraint(&g, &g.zero(), 3, "g").unwrap();
            let eq = reconstruct_group(&set_of(vec![psi]), 0).unwrap();
            let dec = decompose(&eq.group).unwrap();
            let r = eq.group.order();
            for a in 0..r as u8 {
                for b in 0..r as u8 {
                    let via_group = eq.group.add(a, b);
                    let via_elems = dec.abelian.add(
                        &dec.spin_to_element[a as usize],
                        &dec.spin_to_element[b as usize],
                    );
                    assert_eq!(
                        dec.element_to_spin[dec.abelian.index_of(&via_elems) as usize],
                        via_group
                    );
                }
            }
        }
    }

    #[test]
    fn alpha_independence_of_verdict() {
        let z3 = AbelianGroup::cyclic(3);
        let psi = group_constraint(&z3, &[1], 4, "z3b1k4").unwrap();
        for alpha in 0..3 {
            let eq = reconstruct_group(&set_of(vec![psi.clone()]), alpha).unwrap();
            assert!(eq.verified);
            assert_eq!(eq.group.invariant_factors(), &[3]);
        }
    }
}
