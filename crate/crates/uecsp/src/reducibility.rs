//! Reducibility of a constraint set: for every split depth d, whenever two
//! prefixes share a completing suffix under one member, they must admit
//! exactly the same completions under every member.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintSet;
use crate::spins::decode;
use crate::{Error, Result};

/// A concrete violation: prefix·suffix, prefix_alt·suffix satisfy `function`,
/// prefix·suffix_alt satisfies `function_alt`, but prefix_alt·suffix_alt does
/// not satisfy `function_alt`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducibilityWitness {
    pub depth: usize,
    pub prefix: Vec<u8>,
    pub prefix_alt: Vec<u8>,
    pub suffix: Vec<u8>,
    pub suffix_alt: Vec<u8>,
    pub function: String,
    pub function_alt: String,
}

pub fn replay_reducibility_witness(set: &ConstraintSet, w: &ReducibilityWitness) -> Result<bool> {
    let psi = set.get(&w.function).ok_or_else(|| Error::UnknownFunction(w.function.clone()))?;
    let psi_alt = set.get(&w.function_alt).ok_or_else(|| Error::UnknownFunction(w.function_alt.clone()))?;
    let k = set.k();
    if w.prefix.len() != w.depth
        || w.prefix_alt.len() != w.depth
        || w.suffix.len() != k - w.depth
        || w.suffix_alt.len() != k - w.depth
    {
        return Err(Error::Malformed("witness split lengths inconsistent".into()));
    }
    let cat = |a: &[u8], b: &[u8]| {
        let mut t = a.to_vec();
        t.extend_from_slice(b);
        t
    };
    Ok(psi.satisfied(&cat(&w.prefix, &w.suffix))
        && psi.satisfied(&cat(&w.prefix_alt, &w.suffix))
        && psi_alt.satisfied(&cat(&w.prefix, &w.suffix_alt))
        && !psi_alt.satisfied(&cat(&w.prefix_alt, &w.suffix_alt)))
}

/// Fast check: per depth, intern each prefix's completion profile (its suffix
/// sets under every member); any two prefixes sharing a single completion
/// under some member must have identical profiles. Single-step sharing is
/// exactly the definition's hypothesis pattern; the brute-force variant below
/// is the oracle the tests compare against.
pub fn reducibility_witness(set: &ConstraintSet) -> Result<Option<ReducibilityWitness>> {
    set.require_ue()?;
    let k = set.k();
    let r = set.r() as usize;
    let members = set.members();
    for d in 0..=k {
        let np = r.pow(d as u32);
        let ns = r.pow((k - d) as u32);
        // suffix lists per member, indexed by prefix
        let mut ext: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); np]; members.len()];
        for (m, psi) in members.iter().enumerate() {
            for &idx in psi.satisfying() {
                let idx = idx as usize;
                ext[m][idx / ns].push((idx % ns) as u32);
            }
        }
        // intern profiles
        let mut classes: HashMap<Vec<Vec<u32>>, u32> = HashMap::new();
        let mut class_of = vec![0u32; np];
        for p in 0..np {
            let profile: Vec<Vec<u32>> = ext.iter().map(|e| e[p].clone()).collect();
            let next = classes.len() as u32;
            class_of[p] = *classes.entry(profile).or_insert(next);
        }
        // prefixes sharing a completion under one member
        for (m, e) in ext.iter().enumerate() {
            let mut by_suffix: Vec<Vec<u32>> = vec![Vec::new(); ns];
            for (p, suffixes) in e.iter().enumerate() {
                for &s in suffixes {
                    by_suffix[s as usize].push(p as u32);
                }
            }
            for (s, prefixes) in by_suffix.iter().enumerate() {
                let Some((&first, rest)) = prefixes.split_first() else { continue };
                for &p in rest {
                    if class_of[p as usize] != class_of[first as usize] {
                        return Ok(Some(locate_violation(
                            set, &ext, d, first as usize, p as usize, s, m,
                        )));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn locate_violation(
    set: &ConstraintSet,
    ext: &[Vec<Vec<u32>>],
    d: usize,
    p0: usize,
    p1: usize,
    shared: usize,
    m: usize,
) -> ReducibilityWitness {
    let k = set.k();
    let r = set.r();
    for (m2, e) in ext.iter().enumerate() {
        for (a, b) in [(p0, p1), (p1, p0)] {
            // suffix completing `a` under m2 but not `b`
            if let Some(&s2) = ext[m2][a].iter().find(|s| !e[b].contains(s)) {
                return ReducibilityWitness {
                    depth: d,
                    prefix: decode(a, d, r),
                    prefix_alt: decode(b, d, r),
                    suffix: decode(shared, k - d, r),
                    suffix_alt: decode(s2 as usize, k - d, r),
                    function: set.members()[m].name().to_string(),
                    function_alt: set.members()[m2].name().to_string(),
                };
            }
        }
    }
    unreachable!("profiles differ, so some member distinguishes the prefixes");
}

pub fn is_reducible(set: &ConstraintSet) -> Result<bool> {
    Ok(reducibility_witness(set)?.is_none())
}

/// Literal quantification over (d, σ, σ′, η, ψ, ψ′, η′); O(k·r^{2k}·|Ψ|²).
pub fn reducibility_witness_bruteforce(set: &ConstraintSet) -> Result<Option<ReducibilityWitness>> {
    set.require_ue()?;
    let k = set.k();
    let r = set.r() as usize;
    let members = set.members();
    for d in 0..=k {
        let np = r.pow(d as u32);
        let ns = r.pow((k - d) as u32);
        for (m, psi) in members.iter().enumerate() {
            for p0 in 0..np {
                for p1 in 0..np {
                    let shared = (0..ns).find(|&s| {
                        psi.satisfied_index(p0 * ns + s) && psi.satisfied_index(p1 * ns + s)
                    });
                    let Some(shared) = shared else { continue };
                    for (m2, psi2) in members.iter().enumerate() {
                        for s2 in 0..ns {
                            if psi2.satisfied_index(p0 * ns + s2) && !psi2.satisfied_index(p1 * ns + s2) {
                                return Ok(Some(ReducibilityWitness {
                                    depth: d,
                                    prefix: decode(p0, d, set.r()),
                                    prefix_alt: decode(p1, d, set.r()),
                                    suffix: decode(shared, k - d, set.r()),
                                    suffix_alt: decode(s2, k - d, set.r()),
                                    function: members[m].name().to_string(),
                                    function_alt: members[m2].name().to_string(),
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintFunction;
    use crate::spins;

    fn mod_constraint(name: &str, k: usize, q: u8, b: u8) -> ConstraintFunction {
        let size = spins::table_size(q, k) as usize;
        let sat = (0..size)
            .filter(|&idx| {
                let t = decode(idx, k, q);
                t.iter().map(|&s| s as u32).sum::<u32>() % q as u32 == b as u32
            })
            .map(|i| i as u32)
            .collect();
        ConstraintFunction::new(name, k, q, sat).unwrap()
    }

    #[test]
    fn group_constraints_are_reducible() {
        let set = ConstraintSet::new(vec![mod_constraint("z4b1", 4, 4, 1)]).unwrap();
        assert!(is_reducible(&set).unwrap());
        let set = ConstraintSet::new(vec![
            mod_constraint("z2b0", 3, 2, 0),
            mod_constraint("z2b1", 3, 2, 1),
        ])
        .unwrap();
        assert!(is_reducible(&set).unwrap());
    }

    #[test]
    fn fast_path_matches_bruteforce() {
        let cases: Vec<ConstraintSet> = vec![
            ConstraintSet::new(vec![mod_constraint("z3b1", 3, 3, 1)]).unwrap(),
            ConstraintSet::new(vec![
                mod_constraint("z2b0", 3, 2, 0),
                mod_constraint("z2b1", 3, 2, 1),
            ])
            .unwrap(),
            ConstraintSet::new(vec![
                mod_constraint("z3b0", 3, 3, 0),
                mod_constraint("z3b0", 3, 3, 0).relabeled(&[1, 0, 2], "z3swap").unwrap(),
            ])
            .unwrap(),
            ConstraintSet::new(vec![mod_constraint("z4b1", 4, 4, 1)]).unwrap(),
        ];
        for set in &cases {
            let fast = reducibility_witness(set).unwrap();
            let brute = reducibility_witness_bruteforce(set).unwrap();
            assert_eq!(fast.is_none(), brute.is_none());
            if let Some(w) = fast {
                assert!(replay_reducibility_witness(set, &w).unwrap());
            }
            if let Some(w) = brute {
                assert!(replay_reducibility_witness(set, &w).unwrap());
            }
        }
    }
}
