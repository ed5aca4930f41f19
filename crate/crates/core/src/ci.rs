//! Conditional independence testing for discrete data: plug-in conditional
//! mutual information with a permutation test that shuffles within strata of
//! the conditioning variables.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;
use crate::scm::Dataset;
use crate::seed::rng_indexed;

/// Smallest stratum the test accepts.
pub const MIN_STRATUM: usize = 5;
pub const MIN_PERMUTATIONS: usize = 200;
/// Statistics below this are rounding noise around an exact zero; no
/// replicas are drawn and `p = 1`.
pub const ZERO_CMI: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CiError {
    #[error("no column `{0}` in the data")]
    UnknownColumn(NodeId),
    #[error("a conditioning configuration has only {0} rows")]
    EmptyStratum(usize),
    #[error("at least {MIN_PERMUTATIONS} permutations are required, got {0}")]
    TooFewPermutations(usize),
    #[error("the data has no rows")]
    NoData,
    #[error("test sets must be non-empty")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    pub alpha: f64,
    /// Upper bound on replicas.
    pub permutations: usize,
    pub seed: u64,
    /// Stop once this many replicas reach the observed statistic
    /// (sequential Monte Carlo p-value). `None` always draws every replica.
    pub stop_after_exceedances: Option<usize>,
}

impl Default for CiOptions {
    fn default() -> Self {
        CiOptions {
            alpha: 0.01,
            permutations: 1000,
            seed: 0,
            stop_after_exceedances: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    /// Conditional mutual information in bits.
    pub statistic: f64,
    pub p: f64,
    pub alpha: f64,
    pub dependent: bool,
    /// Replicas actually drawn (zero when the statistic is exactly zero).
    pub permutations: usize,
}

/// Data reduced to dense codes, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CiPlan {
    a: Vec<u32>,
    b: Vec<u32>,
    /// Row indices grouped by conditioning configuration.
    strata: Vec<Vec<u32>>,
    na: usize,
    nb: usize,
    n: usize,
}

fn encode(data: &Dataset, set: &[NodeId]) -> Result<(Vec<u32>, usize), CiError> {
    let cols: Vec<&[u32]> = set
        .iter()
        .map(|id| data.column(id).ok_or_else(|| CiError::UnknownColumn(id.clone())))
        .collect::<Result<_, _>>()?;
    let mut dict: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut codes = Vec::with_capacity(data.len());
    let mut key = Vec::with_capacity(cols.len());
    for row in 0..data.len() {
        key.clear();
        key.extend(cols.iter().map(|c| c[row]));
        let next = dict.len() as u32;
        codes.push(*dict.entry(key.clone()).or_insert(next));
    }
    Ok((codes, dict.len().max(1)))
}

impl CiPlan {
    pub fn new(data: &Dataset, a: &[NodeId], b: &[NodeId], given: &[NodeId]) -> Result<Self, CiError> {
        if data.is_empty() {
            return Err(CiError::NoData);
        }
        if a.is_empty() || b.is_empty() {
            return Err(CiError::EmptySet);
        }
        let (a, na) = encode(data, a)?;
        let (b, nb) = encode(data, b)?;
        let (z, nz) = encode(data, given)?;
        let mut strata = vec![Vec::new(); nz];
        for (row, &s) in z.iter().enumerate() {
            strata[s as usize].push(row as u32);
        }
        if let Some(small) = strata.iter().map(Vec::len).find(|&len| len < MIN_STRATUM) {
            return Err(CiError::EmptyStratum(small));
        }
        Ok(CiPlan {
            n: a.len(),
            a,
            b,
            strata,
            na,
            nb,
        })
    }

    /// Statistic with `b` read through `b_of(row)`.
    fn cmi_with(&self, b_of: impl Fn(usize, usize) -> u32) -> f64 {
        let mut joint = vec![0u32; self.na * self.nb];
        let mut ca = vec![0u32; self.na];
        let mut cb = vec![0u32; self.nb];
        let mut total = 0.0;
        for (s, rows) in self.strata.iter().enumerate() {
            joint.iter_mut().for_each(|c| *c = 0);
            ca.iter_mut().for_each(|c| *c = 0);
            cb.iter_mut().for_each(|c| *c = 0);
            for (k, &r) in rows.iter().enumerate() {
                let (x, y) = (self.a[r as usize] as usize, b_of(s, k) as usize);
                joint[x * self.nb + y] += 1;
                ca[x] += 1;
                cb[y] += 1;
            }
            let m = rows.len() as f64;
            let mut info = 0.0;
            for x in 0..self.na {
                if ca[x] == 0 {
                    continue;
                }
                for y in 0..self.nb {
                    let c = joint[x * self.nb + y];
                    if c > 0 {
                        let c = f64::from(c);
                        info += c * libm::log2(c * m / (f64::from(ca[x]) * f64::from(cb[y])));
                    }
                }
            }
            total += info;
        }
        (total / self.n as f64).max(0.0)
    }

    pub fn observed(&self) -> f64 {
        self.cmi_with(|s, k| self.b[self.strata[s][k] as usize])
    }

    /// Statistic after shuffling `b` within every stratum, using the stream
    /// for replica `index`.
    pub fn replica(&self, seed: u64, index: u64) -> f64 {
        let mut rng = rng_indexed(seed, "permutation", index);
        let shuffled: Vec<Vec<u32>> = self
            .strata
            .iter()
            .map(|rows| {
                let mut v: Vec<u32> = rows.iter().map(|&r| self.b[r as usize]).collect();
                v.shuffle(&mut rng);
                v
            })
            .collect();
        self.cmi_with(|s, k| shuffled[s][k])
    }
}

fn exceeds(replica: f64, observed: f64) -> bool {
    replica >= observed - 1e-12 * observed.abs().max(1.0)
}

/// Combines replica statistics into a result. Ties count as exceedances.
pub fn finish(observed: f64, replicas: &[f64], alpha: f64) -> CiResult {
    let exceed = replicas.iter().filter(|&&r| exceeds(r, observed)).count();
    let p = if replicas.is_empty() {
        1.0
    } else {
        (1 + exceed) as f64 / (1 + replicas.len()) as f64
    };
    CiResult {
        statistic: observed,
        p,
        alpha,
        dependent: p < alpha,
        permutations: replicas.len(),
    }
}

/// Conditional mutual information `I(a; b | given)` in bits.
pub fn cmi(data: &Dataset, a: &[NodeId], b: &[NodeId], given: &[NodeId]) -> Result<f64, CiError> {
    Ok(CiPlan::new(data, a, b, given)?.observed())
}

/// Tests `a ⟂ b | given`; dependent iff `p < alpha`.
pub fn ci_test(
    data: &Dataset,
    a: &[NodeId],
    b: &[NodeId],
    given: &[NodeId],
    opts: CiOptions,
) -> Result<CiResult, CiError> {
    if opts.permutations < MIN_PERMUTATIONS {
        return Err(CiError::TooFewPermutations(opts.permutations));
    }
    let plan = CiPlan::new(data, a, b, given)?;
    let observed = plan.observed();
    if observed < ZERO_CMI {
        return Ok(finish(observed, &[], opts.alpha));
    }
    match opts.stop_after_exceedances {
        None => {
            let replicas: Vec<f64> = (0..opts.permutations as u64)
                .map(|k| plan.replica(opts.seed, k))
                .collect();
            Ok(finish(observed, &replicas, opts.alpha))
        }
        Some(limit) => Ok(sequential(&plan, observed, opts, limit.max(1))),
    }
}

/// Draws replicas in order until `limit` of them reach the observed value;
/// the p-value is then `limit / drawn`, otherwise the usual full-sample value.
fn sequential(plan: &CiPlan, observed: f64, opts: CiOptions, limit: usize) -> CiResult {
    let mut hits = 0;
    for k in 0..opts.permutations {
        if exceeds(plan.replica(opts.seed, k as u64), observed) {
            hits += 1;
            if hits == limit {
                let p = limit as f64 / (k + 1) as f64;
                return CiResult {
                    statistic: observed,
                    p,
                    alpha: opts.alpha,
                    dependent: p < opts.alpha,
                    permutations: k + 1,
                };
            }
        }
    }
    let p = (1 + hits) as f64 / (1 + opts.permutations) as f64;
    CiResult {
        statistic: observed,
        p,
        alpha: opts.alpha,
        dependent: p < opts.alpha,
        permutations: opts.permutations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn data(cols: &[(&str, Vec<u32>)]) -> Dataset {
        Dataset::new(
            cols.iter().map(|(n, _)| NodeId::from(*n)).collect(),
            cols.iter().map(|(_, v)| v.clone()).collect(),
        )
    }

    fn ids(names: &[&str]) -> Vec<NodeId> {
        names.iter().map(|n| NodeId::from(*n)).collect()
    }

    #[test]
    fn coin_flips_are_independent_and_copies_are_not() {
        let mut rng = rng_indexed(1, "coins", 0);
        let a: Vec<u32> = (0..5000).map(|_| rng.gen_range(0..2)).collect();
        let b: Vec<u32> = (0..5000).map(|_| rng.gen_range(0..2)).collect();
        let d = data(&[("A", a.clone()), ("B", b), ("C", a)]);
        let opts = CiOptions {
            permutations: 200,
            ..CiOptions::default()
        };
        assert!(
            !ci_test(&d, &ids(&["A"]), &ids(&["B"]), &[], opts)
                .unwrap()
                .dependent
        );
        let copy = ci_test(&d, &ids(&["A"]), &ids(&["C"]), &[], opts).unwrap();
        assert!(copy.dependent);
        assert!((copy.statistic - 1.0).abs() < 0.01);
    }

    #[test]
    fn self_information_is_entropy() {
        // Three values with probabilities 1/2, 1/4, 1/4: 1.5 bits.
        let v = [0, 0, 1, 2].repeat(25);
        let d = data(&[("A", v)]);
        let h = cmi(&d, &ids(&["A"]), &ids(&["A"]), &[]).unwrap();
        assert!((h - 1.5).abs() < 1e-12);
    }

    #[test]
    fn conditioning_removes_common_cause() {
        let mut rng = rng_indexed(2, "cause", 0);
        let (mut c, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..20_000 {
            let z: u32 = rng.gen_range(0..2);
            c.push(z);
            a.push(z ^ u32::from(rng.gen::<f64>() < 0.2));
            b.push(z ^ u32::from(rng.gen::<f64>() < 0.2));
        }
        let d = data(&[("A", a), ("B", b), ("C", c)]);
        let opts = CiOptions {
            permutations: 200,
            ..CiOptions::default()
        };
        assert!(
            ci_test(&d, &ids(&["A"]), &ids(&["B"]), &[], opts)
                .unwrap()
                .dependent
        );
        assert!(
            !ci_test(&d, &ids(&["A"]), &ids(&["B"]), &ids(&["C"]), opts)
                .unwrap()
                .dependent
        );
    }

    #[test]
    fn errors_and_zero_statistic() {
        let d = data(&[
            ("A", vec![0, 1, 0, 1, 0, 1]),
            ("B", vec![0; 6]),
            ("C", vec![0, 0, 0, 0, 0, 1]),
        ]);
        let opts = CiOptions::default();
        let r = ci_test(&d, &ids(&["A"]), &ids(&["B"]), &[], opts).unwrap();
        assert_eq!((r.statistic, r.p, r.permutations), (0.0, 1.0, 0));
        assert_eq!(
            ci_test(&d, &ids(&["A"]), &ids(&["B"]), &ids(&["C"]), opts),
            Err(CiError::EmptyStratum(1))
        );
        assert_eq!(
            ci_test(
                &d,
                &ids(&["A"]),
                &ids(&["B"]),
                &[],
                CiOptions {
                    permutations: 10,
                    ..opts
                }
            ),
            Err(CiError::TooFewPermutations(10))
        );
        assert_eq!(
            ci_test(&d, &ids(&["Q"]), &ids(&["B"]), &[], opts),
            Err(CiError::UnknownColumn("Q".into()))
        );
    }

    #[test]
    fn sequential_stopping_agrees_on_clear_cases() {
        let mut rng = rng_indexed(3, "seq", 0);
        let a: Vec<u32> = (0..4000).map(|_| rng.gen_range(0..2)).collect();
        let b: Vec<u32> = (0..4000).map(|_| rng.gen_range(0..2)).collect();
        let noisy: Vec<u32> = a.iter().map(|&v| v ^ u32::from(rng.gen::<f64>() < 0.3)).collect();
        let d = data(&[("A", a), ("B", b), ("N", noisy)]);
        let opts = CiOptions {
            alpha: 1e-4,
            permutations: 20_000,
            stop_after_exceedances: Some(10),
            ..CiOptions::default()
        };
        let indep = ci_test(&d, &ids(&["A"]), &ids(&["B"]), &[], opts).unwrap();
        assert!(!indep.dependent && indep.permutations < 1000, "{indep:?}");
        let dep = ci_test(&d, &ids(&["A"]), &ids(&["N"]), &[], opts).unwrap();
        assert!(dep.dependent && dep.permutations == 20_000);
    }

    #[test]
    fn p_value_counts_ties() {
        let r = finish(0.5, &[0.5, 0.1, 0.7, 0.2], 0.05);
        assert_eq!(r.p, 3.0 / 5.0);
    }
}
