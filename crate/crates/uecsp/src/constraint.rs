//! k-ary constraint functions over a finite spin set and their structural
//! predicates: unique extendability, commutativity, the extension function,
//! and symmetry of the two-level composed family F2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spins::{self, decode, decode_into, encode};
use crate::{Error, Result};

/// Hard cap on explicit table sizes (r^k entries).
pub const MAX_TABLE_ENTRIES: u64 = 1 << 24;

/// A k-ary constraint over spins {0, …, r−1}, stored as the sorted set of
/// canonical indices of its satisfying tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintFunction {
    name: String,
    k: usize,
    r: u8,
    satisfying: Vec<u32>,
    mask: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintFunctionRepr {
    name: String,
    k: usize,
    r: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    satisfying: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extension_table: Option<Vec<u8>>,
}

impl Serialize for ConstraintFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ConstraintFunctionRepr {
            name: self.name.clone(),
            k: self.k,
            r: self.r,
            satisfying: Some(self.satisfying.clone()),
            extension_table: None,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConstraintFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ConstraintFunctionRepr::deserialize(deserializer)?;
        match (repr.satisfying, repr.extension_table) {
            (Some(sat), None) => {
                ConstraintFunction::new(repr.name, repr.k, repr.r, sat).map_err(D::Error::custom)
            }
            (None, Some(table)) => {
                let cf = ConstraintFunction::from_extension_table(repr.name, repr.k, repr.r, table)
                    .map_err(D::Error::custom)?;
                // the extension-table form promises a UE function; verify all positions
                if let Some(v) = cf.ue_violation() {
                    return Err(D::Error::custom(Error::NotUniquelyExtendable {
                        position: v.position,
                        partial: v.partial,
                        count: v.count,
                    }));
                }
                Ok(cf)
            }
            _ => Err(D::Error::custom(
                "constraint function needs exactly one of `satisfying` / `extension_table`",
            )),
        }
    }
}

/// A position/partial-assignment pair where the extension count is not 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UeViolation {
    /// 1-based coordinate left open.
    pub position: usize,
    /// the other k−1 spins, in original coordinate order
    pub partial: Vec<u8>,
    pub count: usize,
}

/// A satisfying tuple that leaves the satisfying set under an adjacent swap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutativityWitness {
    pub tuple: Vec<u8>,
    /// 0-based: swaps coordinates swap_at and swap_at+1
    pub swap_at: usize,
}

impl ConstraintFunction {
    pub fn new(name: impl Into<String>, k: usize, r: u8, mut satisfying: Vec<u32>) -> Result<Self> {
        let name = name.into();
        if k < 2 {
            return Err(Error::Malformed(format!("arity {k} < 2")));
        }
        if r < 2 {
            return Err(Error::Malformed(format!("spin set size {r} < 2")));
        }
        let size = spins::table_size(r, k);
        if size > MAX_TABLE_ENTRIES {
            return Err(Error::TableTooLarge(size));
        }
        satisfying.sort_unstable();
        satisfying.dedup();
        if let Some(&idx) = satisfying.iter().find(|&&i| i as u64 >= size) {
            return Err(Error::Malformed(format!(
                "satisfying index {idx} out of range for r^k = {size}"
            )));
        }
        let mut mask = vec![0u64; (size as usize + 63) / 64];
        for &idx in &satisfying {
            mask[idx as usize / 64] |= 1u64 << (idx % 64);
        }
        Ok(Self { name, k, r, satisfying, mask })
    }

    /// Build from the forced-last-spin table of length r^{k−1}.
    pub fn from_extension_table(name: impl Into<String>, k: usize, r: u8, table: Vec<u8>) -> Result<Self> {
        if k < 2 || r < 2 {
            return Err(Error::Malformed("need k >= 2 and r >= 2".into()));
        }
        let prefixes = spins::table_size(r, k - 1);
        if spins::table_size(r, k) > MAX_TABLE_ENTRIES {
            return Err(Error::TableTooLarge(spins::table_size(r, k)));
        }
        if table.len() as u64 != prefixes {
            return Err(Error::Malformed(format!(
                "extension table has {} entries, expected r^(k-1) = {prefixes}",
                table.len()
            )));
        }
        if let Some(&t) = table.iter().find(|&&t| t >= r) {
            return Err(Error::Malformed(format!("extension value {t} out of range 0..{r}")));
        }
        let satisfying = table
            .iter()
            .enumerate()
            .map(|(prefix, &tau)| (prefix * r as usize + tau as usize) as u32)
            .collect();
        Self::new(name, k, r, satisfying)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn satisfying(&self) -> &[u32] {
        &self.satisfying
    }

    pub fn table_entries(&self) -> usize {
        spins::table_size(self.r, self.k) as usize
    }

    #[inline]
    pub fn satisfied_index(&self, idx: usize) -> bool {
        (self.mask[idx / 64] >> (idx % 64)) & 1 == 1
    }

    #[inline]
    pub fn satisfied(&self, tuple: &[u8]) -> bool {
        debug_assert_eq!(tuple.len(), self.k);
        self.satisfied_index(encode(tuple, self.r))
    }

    /// Apply a spin permutation to the satisfying set (relabels the domain).
    pub fn relabeled(&self, perm: &[u8], name: impl Into<String>) -> Result<Self> {
        if perm.len() != self.r as usize {
            return Err(Error::Malformed("permutation length != r".into()));
        }
        let mut seen = vec![false; self.r as usize];
        for &p in perm {
            if p >= self.r || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::Malformed("not a permutation of the spin set".into()));
            }
        }
        let mut sat = Vec::with_capacity(self.satisfying.len());
        let mut buf = vec![0u8; self.k];
        for &idx in &self.satisfying {
            decode_into(idx as usize, self.r, &mut buf);
            for s in buf.iter_mut() {
                *s = perm[*s as usize];
            }
            sat.push(encode(&buf, self.r) as u32);
        }
        Self::new(name, self.k, self.r, sat)
    }

    /// First (position, partial) whose extension count differs from 1, if any.
    pub fn ue_violation(&self) -> Option<UeViolation> {
        let r = self.r as usize;
        let sub = spins::table_size(self.r, self.k - 1) as usize;
        for pos in 0..self.k {
            // stride of the digit at `pos` in the full index
            let p = r.pow((self.k - 1 - pos) as u32);
            let mut counts = vec![0u32; sub];
            for &idx in &self.satisfying {
                let idx = idx as usize;
                let lo = idx % p;
                let hi = idx / (p * r);
                counts[hi * p + lo] += 1;
            }
            if let Some((reduced, &c)) = counts.iter().enumerate().find(|(_, &c)| c != 1) {
                return Some(UeViolation {
                    position: pos + 1,
                    partial: decode(reduced, self.k - 1, self.r),
                    count: c as usize,
                });
            }
        }
        None
    }

    pub fn is_uniquely_extendable(&self) -> bool {
        self.ue_violation().is_none()
    }

    /// Forced-last-spin table of length r^{k−1}. Errors on non-UE input.
    pub fn extension_table(&self) -> Result<Vec<u8>> {
        if let Some(v) = self.ue_violation() {
            return Err(Error::NotUniquelyExtendable {
                position: v.position,
                partial: v.partial,
                count: v.count,
            });
        }
        let r = self.r as usize;
        let mut table = vec![0u8; spins::table_size(self.r, self.k - 1) as usize];
        for &idx in &self.satisfying {
            table[idx as usize / r] = (idx as usize % r) as u8;
        }
        Ok(table)
    }

    /// The unique spin completing `others` at coordinate `pos` (0-based), or
    /// None when the extension count differs from 1.
    pub fn extension_at(&self, pos: usize, others: &[u8]) -> Option<u8> {
        debug_assert_eq!(others.len(), self.k - 1);
        let r = self.r as usize;
        let p = r.pow((self.k - 1 - pos) as u32);
        let hi = encode(&others[..pos], self.r);
        let lo = encode(&others[pos..], self.r);
        let base = hi * p * r + lo;
        let mut found = None;
        for tau in 0..r {
            if self.satisfied_index(base + tau * p) {
                if found.is_some() {
                    return None;
                }
                found = Some(tau as u8);
            }
        }
        found
    }

    /// A satisfying tuple not closed under some adjacent transposition, if any.
    pub fn commutativity_witness(&self) -> Option<CommutativityWitness> {
        let mut buf = vec![0u8; self.k];
        for &idx in &self.satisfying {
            decode_into(idx as usize, self.r, &mut buf);
            for j in 0..self.k - 1 {
                if buf[j] == buf[j + 1] {
                    continue;
                }
                buf.swap(j, j + 1);
                let ok = self.satisfied(&buf);
                buf.swap(j, j + 1);
                if !ok {
                    return Some(CommutativityWitness { tuple: buf.clone(), swap_at: j });
                }
            }
        }
        None
    }

    pub fn is_commutative(&self) -> bool {
        self.commutativity_witness().is_none()
    }
}

/// A nonempty set of constraint functions sharing (k, r), with unique names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<ConstraintFunction>", into = "Vec<ConstraintFunction>")]
pub struct ConstraintSet {
    members: Vec<ConstraintFunction>,
}

impl TryFrom<Vec<ConstraintFunction>> for ConstraintSet {
    type Error = Error;
    fn try_from(members: Vec<ConstraintFunction>) -> Result<Self> {
        ConstraintSet::new(members)
    }
}

impl From<ConstraintSet> for Vec<ConstraintFunction> {
    fn from(set: ConstraintSet) -> Self {
        set.members
    }
}

impl ConstraintSet {
    pub fn new(members: Vec<ConstraintFunction>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::Malformed("empty constraint set".into()))?;
        let (k, r) = (first.k(), first.r());
        let mut names = BTreeMap::new();
        for m in &members {
            if m.k() != k {
                return Err(Error::ArityMismatch(format!("{} has k={}, expected {k}", m.name(), m.k())));
            }
            if m.r() != r {
                return Err(Error::SpinSetMismatch(format!("{} has r={}, expected {r}", m.name(), m.r())));
            }
            if names.insert(m.name().to_string(), ()).is_some() {
                return Err(Error::Malformed(format!("duplicate function name {}", m.name())));
            }
        }
        Ok(Self { members })
    }

    pub fn k(&self) -> usize {
        self.members[0].k()
    }

    pub fn r(&self) -> u8 {
        self.members[0].r()
    }

    pub fn members(&self) -> &[ConstraintFunction] {
        &self.members
    }

    pub fn get(&self, name: &str) -> Option<&ConstraintFunction> {
        self.members.iter().find(|m| m.name() == name)
    }

    /// Spins σ whose constant tuple σ^k satisfies every member.
    pub fn constant_solutions(&self) -> Vec<u8> {
        (0..self.r())
            .filter(|&s| {
                let tuple = vec![s; self.k()];
                self.members.iter().all(|m| m.satisfied(&tuple))
            })
            .collect()
    }

    /// Error unless every member is UE.
    pub fn require_ue(&self) -> Result<()> {
        for m in &self.members {
            if let Some(v) = m.ue_violation() {
                return Err(Error::NotUniquelyExtendable {
                    position: v.position,
                    partial: v.partial,
                    count: v.count,
                });
            }
        }
        Ok(())
    }
}

/// Flattened-argument witness against F2 symmetry: the (k−1)²-ary function
/// built from `functions` takes different values on `args` and on `args` with
/// coordinates `swap_at`, `swap_at+1` exchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2Witness {
    /// outer function name followed by the k−1 inner function names
    pub functions: Vec<String>,
    /// (k−1)² spins, blocks of k−1 per inner function
    pub args: Vec<u8>,
    pub swap_at: usize,
}

/// f_{ψ₀}(f_{ψ₁}(σ₁), …, f_{ψ_{k−1}}(σ_{k−1})) — the generic two-level
/// composition. `args` are k−1 tuples of length k−1 each.
pub fn evaluate_f2(
    outer: &ConstraintFunction,
    inners: &[&ConstraintFunction],
    args: &[&[u8]],
) -> Result<u8> {
    let k = outer.k();
    if inners.len() != k - 1 || args.len() != k - 1 {
        return Err(Error::ArityMismatch(format!(
            "need k-1 = {} inner functions and argument tuples",
            k - 1
        )));
    }
    let mut outer_args = Vec::with_capacity(k - 1);
    for (inner, arg) in inners.iter().zip(args) {
        if inner.k() != k || inner.r() != outer.r() {
            return Err(Error::ArityMismatch(format!("inner function {} has mismatched (k, r)", inner.name())));
        }
        if arg.len() != k - 1 {
            return Err(Error::ArityMismatch(format!("argument tuple length {} != k-1", arg.len())));
        }
        let table = inner.extension_table()?;
        outer_args.push(table[encode(arg, inner.r())]);
    }
    let table = outer.extension_table()?;
    Ok(table[encode(&outer_args, outer.r())])
}

fn eval_f2_flat(funcs: &[&ConstraintFunction], args: &[u8]) -> Result<u8> {
    let k = funcs[0].k();
    let blocks: Vec<&[u8]> = args.chunks_exact(k - 1).collect();
    evaluate_f2(funcs[0], &funcs[1..], &blocks)
}

/// True when the witness reproduces a genuine asymmetry of the composition.
pub fn replay_f2_witness(set: &ConstraintSet, w: &F2Witness) -> Result<bool> {
    let funcs: Vec<&ConstraintFunction> = w
        .functions
        .iter()
        .map(|n| set.get(n).ok_or_else(|| Error::UnknownFunction(n.clone())))
        .collect::<Result<_>>()?;
    let k = set.k();
    if w.args.len() != (k - 1) * (k - 1) || w.swap_at + 1 >= w.args.len() {
        return Err(Error::Malformed("witness arity mismatch".into()));
    }
    let v1 = eval_f2_flat(&funcs, &w.args)?;
    let mut swapped = w.args.clone();
    swapped.swap(w.swap_at, w.swap_at + 1);
    let v2 = eval_f2_flat(&funcs, &swapped)?;
    Ok(v1 != v2)
}

/// Searches all (ψ₀,…,ψ_{k−1}) ∈ Ψ^k for an adjacent transposition of the
/// flattened (k−1)² arguments that changes the composed value.
///
/// The search is factored through the coordinate bijectivity of extension
/// functions: a swap inside one inner block changes the composition iff it
/// changes that inner value, so within-block symmetry reduces to symmetry of
/// each f_ψ, and only block-boundary swaps need the outer table. Each factored
/// check quantifies over everything the flat definition quantifies over; the
/// unit tests compare against a literal flattened scan on small cases.
pub fn f2_asymmetry_witness(set: &ConstraintSet) -> Result<Option<F2Witness>> {
    set.require_ue()?;
    let k = set.k();
    let r = set.r() as usize;
    if k == 2 {
        return Ok(None); // one flattened argument, nothing to permute
    }
    let kk = k - 1;
    let tables: Vec<Vec<u8>> = set
        .members()
        .iter()
        .map(|m| m.extension_table())
        .collect::<Result<_>>()?;
    let pw = |e: usize| r.pow(e as u32);

    // per-member preimage under f: some prefix tuple index with table value v
    let preimage: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| {
            let mut pre = vec![usize::MAX; r];
            for (idx, &v) in t.iter().enumerate() {
                if pre[v as usize] == usize::MAX {
                    pre[v as usize] = idx;
                }
            }
            pre
        })
        .collect();

    // swaps inside a block: f_ψ itself must be symmetric under adjacent swaps
    for (m, table) in tables.iter().enumerate() {
        let mut buf = vec![0u8; kk];
        for idx in 0..table.len() {
            decode_into(idx, set.r(), &mut buf);
            for j in 0..kk.saturating_sub(1) {
                if buf[j] == buf[j + 1] {
                    continue;
                }
                let mut sw = buf.clone();
                sw.swap(j, j + 1);
                if table[encode(&sw, set.r())] != table[idx] {
                    // place the asymmetric block first; other blocks are inert
                    let name = set.members()[m].name().to_string();
                    let mut functions = vec![name.clone(); k];
                    functions[0] = set.members()[0].name().to_string();
                    let mut args = vec![0u8; kk * kk];
                    args[..kk].copy_from_slice(&buf);
                    return Ok(Some(F2Witness { functions, args, swap_at: j }));
                }
            }
        }
    }

    // swaps across a block boundary: last spin of block jb with first of jb+1
    let strides: Vec<usize> = (0..kk).map(|i| pw(kk - 1 - i)).collect();
    for (o, outer) in tables.iter().enumerate() {
        for jb in 0..kk.saturating_sub(1) {
            let others: Vec<usize> = (0..kk).filter(|&i| i != jb && i != jb + 1).collect();
            let mut partial = vec![0usize; pw(others.len())];
            let mut wdigits = vec![0u8; others.len()];
            for (w, slot) in partial.iter_mut().enumerate() {
                decode_into(w, set.r(), &mut wdigits);
                *slot = wdigits
                    .iter()
                    .zip(&others)
                    .map(|(&d, &pos)| d as usize * strides[pos])
                    .sum();
            }
            let (sj, sj1) = (strides[jb], strides[jb + 1]);
            for af in 0..tables.len() {
                for bf in 0..tables.len() {
                    let (ta, tb) = (&tables[af], &tables[bf]);
                    let top = pw(kk - 1);
                    for ai in 0..ta.len() {
                        let a_last = ai % r;
                        for bi in 0..tb.len() {
                            let b_first = bi / top;
                            if a_last == b_first {
                                continue;
                            }
                            let ai2 = ai - a_last + b_first;
                            let bi2 = (bi + a_last * top) - b_first * top;
                            let (va, vb) = (ta[ai] as usize, tb[bi] as usize);
                            let (va2, vb2) = (ta[ai2] as usize, tb[bi2] as usize);
                            if va == va2 && vb == vb2 {
                                continue;
                            }
                            for &p in &partial {
                                if outer[p + va * sj + vb * sj1] != outer[p + va2 * sj + vb2 * sj1] {
                                    return Ok(Some(boundary_witness(
                                        set, &preimage, o, af, bf, jb, ai, bi, p, &others, &strides,
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn boundary_witness(
    set: &ConstraintSet,
    preimage: &[Vec<usize>],
    outer: usize,
    af: usize,
    bf: usize,
    jb: usize,
    ai: usize,
    bi: usize,
    partial: usize,
    others: &[usize],
    strides: &[usize],
) -> F2Witness {
    let k = set.k();
    let kk = k - 1;
    let r = set.r();
    let filler = 0usize; // member used for the inert blocks
    let mut functions = vec![String::new(); k];
    functions[0] = set.members()[outer].name().to_string();
    let mut args = vec![0u8; kk * kk];
    args[jb * kk..(jb + 1) * kk].copy_from_slice(&decode(ai, kk, r));
    args[(jb + 1) * kk..(jb + 2) * kk].copy_from_slice(&decode(bi, kk, r));
    for (slot, &pos) in others.iter().enumerate() {
        // recover the outer coordinate value at `pos` from the partial sum
        let digit = (partial / strides[pos]) % r as usize;
        let block = decode(preimage[filler][digit], kk, r);
        args[pos * kk..(pos + 1) * kk].copy_from_slice(&block);
        let _ = slot;
    }
    for (i, f) in functions.iter_mut().enumerate().skip(1) {
        let block = i - 1;
        *f = if block == jb {
            set.members()[af].name().to_string()
        } else if block == jb + 1 {
            set.members()[bf].name().to_string()
        } else {
            set.members()[filler].name().to_string()
        };
    }
    F2Witness { functions, args, swap_at: jb * kk + (kk - 1) }
}

pub fn is_f2_symmetric(set: &ConstraintSet) -> Result<bool> {
    Ok(f2_asymmetry_witness(set)?.is_none())
}

/// Literal check over every flattened tuple and adjacent transposition.
/// Exponential in (k−1)²; only for small cases and validating the fast path.
pub fn f2_asymmetry_witness_bruteforce(set: &ConstraintSet) -> Result<Option<F2Witness>> {
    set.require_ue()?;
    let k = set.k();
    let kk = k - 1;
    let nargs = kk * kk;
    let r = set.r();
    let members = set.members();
    let m = members.len();
    let mut choice = vec![0usize; k];
    loop {
        let funcs: Vec<&ConstraintFunction> = choice.iter().map(|&i| &members[i]).collect();
        let total = spins::table_size(r, nargs);
        let mut args = vec![0u8; nargs];
        for idx in 0..total {
            decode_into(idx as usize, r, &mut args);
            let base = eval_f2_flat(&funcs, &args)?;
            for j in 0..nargs - 1 {
                if args[j] == args[j + 1] {
                    continue;
                }
                let mut sw = args.clone();
                sw.swap(j, j + 1);
                if eval_f2_flat(&funcs, &sw)? != base {
                    return Ok(Some(F2Witness {
                        functions: funcs.iter().map(|f| f.name().to_string()).collect(),
                        args,
                        swap_at: j,
                    }));
                }
            }
        }
        // next function choice
        let mut i = 0;
        while i < k {
            choice[i] += 1;
            if choice[i] < m {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == k {
            return Ok(None);
        }
    }
}

/// Replay a commutativity witness.
pub fn replay_commutativity_witness(cf: &ConstraintFunction, w: &CommutativityWitness) -> bool {
    if w.tuple.len() != cf.k() || w.swap_at + 1 >= cf.k() {
        return false;
    }
    let mut swapped = w.tuple.clone();
    swapped.swap(w.swap_at, w.swap_at + 1);
    cf.satisfied(&w.tuple) != cf.satisfied(&swapped)
}
