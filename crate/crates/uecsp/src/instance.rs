//! The random instance model: weighted constraint distributions, seeded
//! sampling, incidence extraction, and the group-linear-system view.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::{ConstraintFunction, ConstraintSet};
use crate::group::GroupModel;
use crate::linalg::{LinearSystem, SparseMatrix};
use crate::rng::derive_rng;
use crate::{Error, Result};

/// Positive rational weight, serialized as "p/q".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weight {
    pub num: u64,
    pub den: u64,
}

impl Weight {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Malformed("weights must be positive rationals".into()));
        }
        Ok(Self { num, den })
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = num.parse().map_err(|_| Error::Malformed(format!("bad weight {s:?}")))?;
        let den = den.parse().map_err(|_| Error::Malformed(format!("bad weight {s:?}")))?;
        Weight::new(num, den)
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Distribution over a UE constraint set; weights must sum to exactly 1.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintDistribution {
    #[serde(rename = "functions")]
    support: ConstraintSet,
    weights: Vec<Weight>,
    /// cumulative numerators over the common denominator, for exact sampling
    #[serde(skip)]
    cumulative: Vec<u128>,
    #[serde(skip)]
    denominator: u128,
}

#[derive(Deserialize)]
struct DistributionRepr {
    #[serde(rename = "functions")]
    support: ConstraintSet,
    weights: Vec<Weight>,
}

impl<'de> Deserialize<'de> for ConstraintDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DistributionRepr::deserialize(d)?;
        ConstraintDistribution::new(repr.support, repr.weights).map_err(D::Error::custom)
    }
}

impl ConstraintDistribution {
    pub fn new(support: ConstraintSet, weights: Vec<Weight>) -> Result<Self> {
        if weights.len() != support.members().len() {
            return Err(Error::Malformed("one weight per support member required".into()));
        }
        support.require_ue()?;
        // common denominator, kept reduced to avoid overflow
        let mut den: u128 = 1;
        for w in &weights {
            let d = w.den as u128;
            let g = gcd(den, d);
            den = den
                .checked_mul(d / g)
                .ok_or_else(|| Error::Malformed("weight denominators overflow".into()))?;
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc: u128 = 0;
        for w in &weights {
            let scaled = (w.num as u128)
                .checked_mul(den / w.den as u128)
                .ok_or_else(|| Error::Malformed("weight numerators overflow".into()))?;
            acc = acc
                .checked_add(scaled)
                .ok_or_else(|| Error::Malformed("weight sum overflows".into()))?;
            cumulative.push(acc);
        }
        if acc != den {
            return Err(Error::Malformed(format!("weights sum to {acc}/{den}, not 1")));
        }
        Ok(Self { support, weights, cumulative, denominator: den })
    }

    /// Equal weights over the whole set.
    pub fn uniform(support: ConstraintSet) -> Result<Self> {
        let n = support.members().len() as u64;
        let weights = vec![Weight::new(1, n)?; n as usize];
        Self::new(support, weights)
    }

    /// Point mass on a single constraint.
    pub fn atomic(psi: ConstraintFunction) -> Result<Self> {
        Self::new(ConstraintSet::new(vec![psi])?, vec![Weight::new(1, 1)?])
    }

    pub fn support(&self) -> &ConstraintSet {
        &self.support
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    fn sample_member(&self, rng: &mut impl Rng) -> usize {
        let u = rng.gen_range(0..self.denominator);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// One constraint occurrence: a function name and an ordered tuple of
/// distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRef {
    #[serde(rename = "fn")]
    pub function: String,
    pub vars: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    n: usize,
    k: usize,
    r: u8,
    seed: u64,
    functions: ConstraintSet,
    constraints: Vec<ConstraintRef>,
}

#[derive(Deserialize)]
struct InstanceRepr {
    n: usize,
    k: usize,
    r: u8,
    seed: u64,
    functions: ConstraintSet,
    constraints: Vec<ConstraintRef>,
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = InstanceRepr::deserialize(d)?;
        if repr.k != repr.functions.k() || repr.r != repr.functions.r() {
            return Err(D::Error::custom("instance k/r disagree with function library"));
        }
        Instance::new(repr.n, repr.seed, repr.functions, repr.constraints).map_err(D::Error::custom)
    }
}

impl Instance {
    pub fn new(
        n: usize,
        seed: u64,
        functions: ConstraintSet,
        constraints: Vec<ConstraintRef>,
    ) -> Result<Self> {
        functions.require_ue()?;
        let k = functions.k();
        for (j, c) in constraints.iter().enumerate() {
            if functions.get(&c.function).is_none() {
                return Err(Error::UnknownFunction(c.function.clone()));
            }
            if c.vars.len() != k {
                return Err(Error::ArityMismatch(format!("constraint {j} has {} variables, expected {k}", c.vars.len())));
            }
            if c.vars.iter().any(|&v| v as usize >= n) {
                return Err(Error::Malformed(format!("constraint {j} references a variable >= n")));
            }
            let mut sorted = c.vars.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed(format!("constraint {j} repeats a variable")));
            }
        }
        Ok(Self { n, k, r: functions.r(), seed, functions, constraints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn functions(&self) -> &ConstraintSet {
        &self.functions
    }

    pub fn constraints(&self) -> &[ConstraintRef] {
        &self.constraints
    }

    pub fn function_of(&self, j: usize) -> &ConstraintFunction {
        self.functions
            .get(&self.constraints[j].function)
            .expect("validated at construction")
    }

    pub fn satisfied_by(&self, assignment: &[u8]) -> bool {
        assert_eq!(assignment.len(), self.n);
        let mut tuple = vec![0u8; self.k];
        self.constraints.iter().enumerate().all(|(j, c)| {
            for (t, &v) in tuple.iter_mut().zip(&c.vars) {
                *t = assignment[v as usize];
            }
            self.function_of(j).satisfied(&tuple)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Plain-text export: "p uecsp n m k r" header, then one line per
    /// constraint (function name followed by its variables).
    pub fn to_text(&self) -> String {
        let mut out = format!("p uecsp {} {} {} {}\n", self.n, self.m(), self.k, self.r);
        for c in &self.constraints {
            let _ = write!(out, "{}", c.function);
            for &v in &c.vars {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Draw m independent constraints: the function by exact weighted choice, the
/// variables as a uniform ordered distinct k-tuple (rejection sampling), each
/// constraint from its own RNG stream derived from (seed, index).
pub fn sample_instance(
    n: usize,
    m: usize,
    pi: &ConstraintDistribution,
    seed: u64,
) -> Result<Instance> {
    let k = pi.support().k();
    if n < k {
        return Err(Error::Invalid(format!("need n >= k, got n={n}, k={k}")));
    }
    let members = pi.support().members();
    let constraints = (0..m)
        .map(|j| {
            let mut rng = derive_rng(seed, &[j as u64]);
            let function = members[pi.sample_member(&mut rng)].name().to_string();
            let mut vars = Vec::with_capacity(k);
            while vars.len() < k {
                let v = rng.gen_range(0..n as u32);
                if !vars.contains(&v) {
                    vars.push(v);
                } else {
                    vars.clear(); // rejection keeps the ordered tuple exactly uniform
                }
            }
            ConstraintRef { function, vars }
        })
        .collect();
    Instance::new(n, seed, pi.support().clone(), constraints)
}

/// m×n 0/1 incidence matrix: row j has ones at constraint j's variables.
pub fn incidence(inst: &Instance) -> SparseMatrix {
    let rows = inst
        .constraints()
        .iter()
        .map(|c| {
            let mut support = c.vars.clone();
            support.sort_unstable();
            support
        })
        .collect();
    SparseMatrix::from_rows(inst.n(), rows).expect("validated constraints form valid rows")
}

/// Bx = b over the reconstructed group: spins map to group elements, row j's
/// rhs is the target element of constraint j's function.
pub fn to_linear_system(inst: &Instance, model: &GroupModel) -> Result<LinearSystem> {
    let rhs = inst
        .constraints()
        .iter()
        .map(|c| model.target_element(&c.function))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearSystem {
        matrix: incidence(inst),
        rhs,
        group: model.decomposition.abelian.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::build_group_model;
    use crate::linalg::{group_constraint, solve_abelian, AbelianGroup};
    use crate::spins::decode_into;

    fn zq(k: usize, q: u32, b: u32) -> ConstraintFunction {
        let g = AbelianGroup::cyclic(q);
        group_constraint(&g, &g.element_of_index(b as u64), k, format!("z{q}b{b}")).unwrap()
    }

    #[test]
    fn weight_parse_and_display() {
        let w: Weight = "2/3".parse().unwrap();
        assert_eq!((w.num, w.den), (2, 3));
        assert_eq!("1".parse::<Weight>().unwrap(), Weight::new(1, 1).unwrap());
        assert!("0/3".parse::<Weight>().is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"2/3\"");
    }

    #[test]
    fn weights_must_sum_to_one() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap();
        let bad = ConstraintDistribution::new(
            set.clone(),
            vec![Weight::new(1, 2).unwrap(), Weight::new(1, 3).unwrap()],
        );
        assert!(bad.is_err());
        let good = ConstraintDistribution::new(
            set,
            vec![Weight::new(1, 3).unwrap(), Weight::new(2, 3).unwrap()],
        );
        assert!(good.is_ok());
    }

    #[test]
    fn empty_and_deterministic_sampling() {
        let pi = ConstraintDistribution::atomic(zq(3, 2, 0)).unwrap();
        let empty = sample_instance(5, 0, &pi, 7).unwrap();
        assert_eq!(empty.m(), 0);
        let a = sample_instance(20, 50, &pi, 42).unwrap();
        let b = sample_instance(20, 50, &pi, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = sample_instance(20, 50, &pi, 43).unwrap();
        assert_ne!(a.constraints(), c.constraints());
        assert!(sample_instance(2, 1, &pi, 0).is_err());
    }

    #[test]
    fn tuple_frequencies_are_uniform() {
        // n=4, k=3: 24 ordered distinct tuples, each with probability 1/24
        let pi = ConstraintDistribution::atomic(zq(3, 2, 0)).unwrap();
        let m = 10_000;
        let inst = sample_instance(4, m, &pi, 1234).unwrap();
        let mut counts = std::collections::HashMap::new();
        for c in inst.constraints() {
            *counts.entry(c.vars.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let sigma = (p * (1.0 - p) / m as f64).sqrt();
        for &count in counts.values() {
            let freq = count as f64 / m as f64;
            assert!((freq - p).abs() < 5.0 * sigma, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn mixed_distribution_frequencies() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0), zq(3, 2, 1)]).unwrap();
        let pi = ConstraintDistribution::new(
            set,
            vec![Weight::new(1, 4).unwrap(), Weight::new(3, 4).unwrap()],
        )
        .unwrap();
        let m = 10_000;
        let inst = sample_instance(10, m, &pi, 99).unwrap();
        let ones = inst.constraints().iter().filter(|c| c.function == "z2b1").count();
        let p = 0.75;
        let sigma = (p * (1.0 - p) / m as f64).sqrt();
        assert!((ones as f64 / m as f64 - p).abs() < 5.0 * sigma);
    }

    #[test]
    fn incidence_rows() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap();
        let inst = Instance::new(
            5,
            0,
            set,
            vec![ConstraintRef { function: "z2b0".into(), vars: vec![0, 2, 3] }],
        )
        .unwrap();
        let b = incidence(&inst);
        assert_eq!((b.rows(), b.cols()), (1, 5));
        assert_eq!(b.row(0), &[0, 2, 3]);
        let empty = Instance::new(4, 0, ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap(), vec![]).unwrap();
        assert_eq!(incidence(&empty).rows(), 0);
    }

    #[test]
    fn validation_rejects_bad_constraints() {
        let set = ConstraintSet::new(vec![zq(3, 2, 0)]).unwrap();
        let dup = ConstraintRef { function: "z2b0".into(), vars: vec![0, 1, 1] };
        assert!(Instance::new(5, 0, set.clone(), vec![dup]).is_err());
        let oob = ConstraintRef { function: "z2b0".into(), vars: vec![0, 1, 9] };
        assert!(Instance::new(5, 0, set.clone(), vec![oob]).is_err());
        let missing = ConstraintRef { function: "nope".into(), vars: vec![0, 1, 2] };
        assert!(Instance::new(5, 0, set, vec![missing]).is_err());
    }

    #[test]
    fn linear_system_solutions_match_instance() {
        // relabeled Z3 target: pull system solutions back through the spin map
        let psi = zq(3, 3, 1).relabeled(&[2, 0, 1], "z3rel").unwrap();
        let set = ConstraintSet::new(vec![psi]).unwrap();
        let model = build_group_model(&set, 0).unwrap();
        let pi = ConstraintDistribution::uniform(set).unwrap();
        let inst = sample_instance(6, 4, &pi, 5).unwrap();
        let system = to_linear_system(&inst, &model).unwrap();
        let solve = solve_abelian(&system).unwrap();
        // brute-force count over all 3^6 assignments
        let mut brute = 0u64;
        let mut assignment = vec![0u8; 6];
        for idx in 0..3usize.pow(6) {
            decode_into(idx, 3, &mut assignment);
            if inst.satisfied_by(&assignment) {
                brute += 1;
            }
        }
        assert_eq!(solve.count.to_u128().unwrap(), brute as u128);
        if let Some(sample) = &solve.sample {
            let spins: Vec<u8> = sample
                .iter()
                .map(|e| model.decomposition.element_to_spin[model.decomposition.abelian.index_of(e) as usize])
                .collect();
            assert!(inst.satisfied_by(&spins));
        }
    }

    #[test]
    fn serde_and_text_roundtrip() {
        let pi = ConstraintDistribution::atomic(zq(3, 2, 1)).unwrap();
        let inst = sample_instance(8, 5, &pi, 11).unwrap();
        let back: Instance = serde_json::from_str(&inst.to_json()).unwrap();
        assert_eq!(back.constraints(), inst.constraints());
        let text = inst.to_text();
        assert!(text.starts_with("p uecsp 8 5 3 2\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
