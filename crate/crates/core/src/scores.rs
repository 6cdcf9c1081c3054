//! Score functions on (0,1) and residual ranks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Rank score φ: sign, Wilcoxon or van der Waerden (normal quantile).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreFunction {
    Sign,
    Wilcoxon,
    Vdw,
}

impl ScoreFunction {
    pub const ALL: [ScoreFunction; 3] = [Self::Sign, Self::Wilcoxon, Self::Vdw];

    /// Evaluates φ(u). Rejects `u` outside the open unit interval.
    pub fn eval(self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::DomainError(u));
        }
        Ok(self.eval_unchecked(u))
    }

    pub(crate) fn eval_unchecked(self, u: f64) -> f64 {
        match self {
            // Midpoint convention at exactly 1/2.
            ScoreFunction::Sign => {
                if u < 0.5 {
                    -1.0
                } else if u > 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            ScoreFunction::Wilcoxon => u - 0.5,
            ScoreFunction::Vdw => normal_quantile(u),
        }
    }

    /// Derivative φ'(u) of the absolutely continuous part (zero for the sign score).
    pub(crate) fn density(self, u: f64) -> f64 {
        match self {
            ScoreFunction::Sign => 0.0,
            ScoreFunction::Wilcoxon => 1.0,
            ScoreFunction::Vdw => {
                let z = normal_quantile(u);
                (2.0 * std::f64::consts::PI).sqrt() * (0.5 * z * z).exp()
            }
        }
    }

    /// Point masses of the Stieltjes measure dφ as `(location, mass)`.
    pub(crate) fn atoms(self) -> &'static [(f64, f64)] {
        match self {
            ScoreFunction::Sign => &[(0.5, 2.0)],
            _ => &[],
        }
    }

    /// Scores `φ(r/(n+1))` for ranks `r = 1..n`, indexed by `r - 1`.
    ///
    /// Arguments never reach 0 or 1, so the normal-quantile score is evaluated
    /// directly; this coincides with its bounded truncation at level `n + 1`.
    pub fn table(self, n: usize) -> Vec<f64> {
        let denom = (n + 1) as f64;
        (1..=n)
            .map(|r| self.eval_unchecked(r as f64 / denom))
            .collect()
    }
}

impl fmt::Display for ScoreFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreFunction::Sign => "sign",
            ScoreFunction::Wilcoxon => "wilcoxon",
            ScoreFunction::Vdw => "vdw",
        })
    }
}

impl FromStr for ScoreFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sign" => Ok(Self::Sign),
            "wilcoxon" => Ok(Self::Wilcoxon),
            "vdw" | "normal" | "van-der-waerden" => Ok(Self::Vdw),
            other => Err(Error::InvalidConfig(format!("unknown score '{other}'"))),
        }
    }
}

/// Standard normal quantile Φ⁻¹(u) (inverse complementary error function, ~1e-15 accuracy).
pub fn normal_quantile(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

/// Ranks of a residual vector: a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ranks `r_t = #{j : ε_j < ε_t} + #{j ≤ t : ε_j = ε_t}`; ties are broken by index.
pub fn compute_ranks(eps: &[f64]) -> Result<RankVector> {
    if let Some(i) = eps.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(i));
    }
    let mut order: Vec<usize> = (0..eps.len()).collect();
    let mut ranks = vec![0; eps.len()];
    rank_into(eps, &mut order, &mut ranks);
    Ok(RankVector(ranks))
}

/// Allocation-free ranking used on hot paths; inputs must be finite.
pub(crate) fn rank_into(eps: &[f64], order: &mut [usize], ranks: &mut [usize]) {
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    // Stable sort keeps ties in index order.
    order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn score_values() {
        assert_eq!(ScoreFunction::Sign.eval(0.25).unwrap(), -1.0);
        assert_eq!(ScoreFunction::Sign.eval(0.5).unwrap(), 0.0);
        assert_eq!(ScoreFunction::Wilcoxon.eval(0.75).unwrap(), 0.25);
        assert_eq!(ScoreFunction::Vdw.eval(0.5).unwrap(), 0.0);
        // Φ⁻¹(0.975) to 16 digits.
        assert!((ScoreFunction::Vdw.eval(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn score_domain_errors() {
        for s in ScoreFunction::ALL {
            assert_eq!(s.eval(0.0), Err(Error::DomainError(0.0)));
            assert_eq!(s.eval(1.0), Err(Error::DomainError(1.0)));
            assert!(s.eval(f64::NAN).is_err());
        }
    }

    #[test]
    fn vdw_table_is_bounded_by_extreme_rank() {
        let n = 500;
        let t = ScoreFunction::Vdw.table(n);
        let bound = normal_quantile(n as f64 / (n + 1) as f64);
        assert!(t.iter().all(|v| v.is_finite() && v.abs() <= bound + 1e-12));
    }

    #[test]
    fn ranks_examples() {
        assert_eq!(compute_ranks(&[1.5, -0.3, 0.7]).unwrap().into_inner(), vec![3, 1, 2]);
        assert_eq!(compute_ranks(&[1.0, 2.0, 3.0, 4.0]).unwrap().into_inner(), vec![1, 2, 3, 4]);
        assert_eq!(compute_ranks(&[1.0, 1.0, 0.5]).unwrap().into_inner(), vec![2, 3, 1]);
        assert_eq!(compute_ranks(&[0.0, f64::INFINITY]), Err(Error::NonFiniteInput(1)));
    }

    #[test]
    fn score_parsing() {
        assert_eq!("VdW".parse::<ScoreFunction>().unwrap(), ScoreFunction::Vdw);
        assert!("median".parse::<ScoreFunction>().is_err());
    }

    proptest! {
        #[test]
        fn wilcoxon_is_odd(u in 1e-9..1.0f64) {
            prop_assume!(u < 1.0);
            let w = ScoreFunction::Wilcoxon;
            prop_assert!((w.eval(u).unwrap() + w.eval(1.0 - u).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn sign_is_odd(u in 1e-9..0.5f64) {
            let s = ScoreFunction::Sign;
            prop_assert_eq!(s.eval(u).unwrap(), -s.eval(1.0 - u).unwrap());
        }

        #[test]
        fn scores_are_nondecreasing(a in 1e-6..0.999999f64, b in 1e-6..0.999999f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for s in ScoreFunction::ALL {
                prop_assert!(s.eval(lo).unwrap() <= s.eval(hi).unwrap());
            }
        }

        #[test]
        fn ranks_are_a_permutation(x in prop::collection::vec(-1e3..1e3f64, 1..300)) {
            let mut r = compute_ranks(&x).unwrap().into_inner();
            r.sort_unstable();
            prop_assert_eq!(r, (1..=x.len()).collect::<Vec<_>>());
        }

        #[test]
        fn ranks_invariant_under_monotone_maps(x in prop::collection::vec(-10.0..10.0f64, 1..300)) {
            let r = compute_ranks(&x).unwrap();
            let affine: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
            let cubic: Vec<f64> = x.iter().map(|v| v * v * v).collect();
            prop_assert_eq!(&compute_ranks(&affine).unwrap(), &r);
            prop_assert_eq!(&compute_ranks(&cubic).unwrap(), &r);
        }
    }
}
