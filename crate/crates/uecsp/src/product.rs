//! Twisted products ψ₁ ×_θ ψ₂ and the non-group family they generate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintFunction;
use crate::linalg::{group_constraint, AbelianGroup};
use crate::spins::{self, decode_into};
use crate::{Error, Result};

/// Symmetric map from k-tuples over Ω₁ to permutations of Ω₂, keyed on the
/// sorted multiset of spins; missing keys mean the identity permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaMap {
    k: usize,
    r1: u8,
    r2: u8,
    entries: BTreeMap<Vec<u8>, Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct ThetaEntry {
    multiset: Vec<u8>,
    perm: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct ThetaRepr {
    k: usize,
    r1: u8,
    r2: u8,
    entries: Vec<ThetaEntry>,
}

impl Serialize for ThetaMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ThetaRepr {
            k: self.k,
            r1: self.r1,
            r2: self.r2,
            entries: self
                .entries
                .iter()
                .map(|(m, p)| ThetaEntry { multiset: m.clone(), perm: p.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ThetaRepr::deserialize(d)?;
        let entries = repr
            .entries
            .into_iter()
            .map(|e| (e.multiset, e.perm))
            .collect();
        ThetaMap::new(repr.k, repr.r1, repr.r2, entries).map_err(D::Error::custom)
    }
}

impl ThetaMap {
    pub fn new(k: usize, r1: u8, r2: u8, entries: BTreeMap<Vec<u8>, Vec<u8>>) -> Result<Self> {
        if k < 2 || r1 < 2 || r2 < 2 {
            return Err(Error::Malformed("need k >= 2 and spin sets of size >= 2".into()));
        }
        let mut canonical = BTreeMap::new();
        for (mut key, perm) in entries {
            if key.len() != k {
                return Err(Error::Malformed("theta key is not a k-multiset".into()));
            }
            if key.iter().any(|&s| s >= r1) {
                return Err(Error::Malformed("theta key spin out of range".into()));
            }
            key.sort_unstable();
            if perm.len() != r2 as usize {
                return Err(Error::Malformed("theta value is not a permutation of the second spin set".into()));
            }
            let mut seen = vec![false; r2 as usize];
            for &p in &perm {
                if p >= r2 || std::mem::replace(&mut seen[p as usize], true) {
                    return Err(Error::Malformed("theta value is not a permutation".into()));
                }
            }
            if canonical.insert(key, perm).is_some() {
                return Err(Error::Malformed("duplicate theta multiset key".into()));
            }
        }
        Ok(Self { k, r1, r2, entries: canonical })
    }

    pub fn identity(k: usize, r1: u8, r2: u8) -> Self {
        Self { k, r1, r2, entries: BTreeMap::new() }
    }

    /// θ with the 0↔1 transposition at the all-zero key, identity elsewhere.
    pub fn transposition_at_zero(k: usize, r1: u8, r2: u8) -> Result<Self> {
        let mut perm: Vec<u8> = (0..r2).collect();
        perm.swap(0, 1);
        let mut entries = BTreeMap::new();
        entries.insert(vec![0u8; k], perm);
        Self::new(k, r1, r2, entries)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r1(&self) -> u8 {
        self.r1
    }

    pub fn r2(&self) -> u8 {
        self.r2
    }

    /// Permutation for a tuple (unsorted); None means identity.
    pub fn perm_for(&self, alpha: &[u8]) -> Option<&[u8]> {
        let mut key = alpha.to_vec();
        key.sort_unstable();
        self.entries.get(&key).map(|v| v.as_slice())
    }
}

/// ψ₁ ×_θ ψ₂ over Ω₁×Ω₂ with spins paired as a·r₂+b:
/// ((α₁,β₁),…,(α_k,β_k)) satisfies iff α ⊨ ψ₁ and (θ_α(β₁),…,θ_α(β_k)) ⊨ ψ₂.
pub fn product_theta(
    psi1: &ConstraintFunction,
    psi2: &ConstraintFunction,
    theta: &ThetaMap,
    name: impl Into<String>,
) -> Result<ConstraintFunction> {
    let k = psi1.k();
    if psi2.k() != k || theta.k() != k {
        return Err(Error::ArityMismatch("factors and theta must share k".into()));
    }
    if theta.r1() != psi1.r() || theta.r2() != psi2.r() {
        return Err(Error::SpinSetMismatch("theta spin sets must match the factors".into()));
    }
    for psi in [psi1, psi2] {
        if !psi.is_uniquely_extendable() {
            return Err(Error::Invalid(format!("{} is not UE", psi.name())));
        }
        if !psi.is_commutative() {
            return Err(Error::Invalid(format!("{} is not commutative", psi.name())));
        }
    }
    let (r1, r2) = (psi1.r(), psi2.r());
    let r = r1 as u64 * r2 as u64;
    if r > 255 {
        return Err(Error::Malformed(format!("paired spin set size {r} exceeds the one-byte range")));
    }
    let r = r as usize;
    let size = spins::table_size(r as u8, k);
    if size > crate::constraint::MAX_TABLE_ENTRIES {
        return Err(Error::TableTooLarge(size));
    }
    let n1 = spins::table_size(r1, k) as usize;
    let n2 = spins::table_size(r2, k) as usize;
    let mut sat = Vec::new();
    let mut alpha = vec![0u8; k];
    let mut beta = vec![0u8; k];
    let mut gamma = vec![0u8; k];
    let identity: Vec<u8> = (0..r2).collect();
    for a_idx in 0..n1 {
        if !psi1.satisfied_index(a_idx) {
            continue;
        }
        decode_into(a_idx, r1, &mut alpha);
        let perm = theta.perm_for(&alpha).unwrap_or(&identity);
        for b_idx in 0..n2 {
            decode_into(b_idx, r2, &mut beta);
            for (g, &b) in gamma.iter_mut().zip(&beta) {
                *g = perm[b as usize];
            }
            if !psi2.satisfied(&gamma) {
                continue;
            }
            let mut combined = 0usize;
            for (&a, &b) in alpha.iter().zip(&beta) {
                combined = combined * r + (a as usize * r2 as usize + b as usize);
            }
            sat.push(combined as u32);
        }
    }
    ConstraintFunction::new(name, k, r as u8, sat)
}

/// The commutative UE constraints with no group structure: a twisted product
/// of two cyclic-group constraints, with the twist a single transposition at
/// the all-zero first component.
pub fn nongroup_family(k: usize, q1: u32, q2: u32) -> Result<ConstraintFunction> {
    if k < 3 {
        return Err(Error::Invalid("need k >= 3".into()));
    }
    if q1 < 3 {
        return Err(Error::Invalid("need q1 >= 3".into()));
    }
    if q2 < 2 || (q2 == 2 && k % 2 == 0) {
        return Err(Error::Invalid("need q2 >= 3, or q2 = 2 with k odd".into()));
    }
    let b = if k as u32 % q2 != 2 % q2 { 1u32 } else { 0u32 };
    let g1 = AbelianGroup::cyclic(q1);
    let g2 = AbelianGroup::cyclic(q2);
    let psi1 = group_constraint(&g1, &g1.zero(), k, format!("z{q1}_b0"))?;
    let psi2 = group_constraint(&g2, &g2.element_of_index(b as u64), k, format!("z{q2}_b{b}"))?;
    let theta = ThetaMap::transposition_at_zero(k, psi1.r(), psi2.r())?;
    product_theta(&psi1, &psi2, &theta, format!("nongroup_k{k}_q{q1}x{q2}"))
}
