//! Q-Q data of residuals against a standardized Student-t reference.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// One `(theoretical, sample)` pair per residual, in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqPoint {
    pub theoretical: f64,
    pub sample: f64,
}

/// Pairs t(`df`) quantiles at `(i - 0.5)/n` with the sorted residuals.
/// With `standardize` and `df > 2` the reference quantiles are scaled to unit variance.
pub fn qq_data(eps: &[f64], df: f64, standardize: bool) -> Result<Vec<QqPoint>> {
    if eps.is_empty() {
        return Err(Error::InsufficientData { n: 0, m: 1 });
    }
    if let Some(i) = eps.iter().position(|e| !e.is_finite()) {
        return Err(Error::NonFiniteInput(i));
    }
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::InvalidDf(df));
    }
    let t = StudentsT::new(0.0, 1.0, df).map_err(|_| Error::InvalidDf(df))?;
    let scale = if standardize && df > 2.0 {
        ((df - 2.0) / df).sqrt()
    } else {
        1.0
    };
    let mut sorted = eps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| QqPoint {
            theoretical: scale * t.inverse_cdf((i as f64 + 0.5) / n),
            sample: s,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_sorted() {
        let eps = [0.3, -1.0, 2.0, 0.0, -0.7];
        let q = qq_data(&eps, 5.0, true).unwrap();
        assert_eq!(q.len(), 5);
        assert!(q.windows(2).all(|w| w[0].sample <= w[1].sample && w[0].theoretical < w[1].theoretical));
        assert!(q[2].theoretical.abs() < 1e-12);
        assert!((q[0].theoretical + q[4].theoretical).abs() < 1e-10);
    }

    #[test]
    fn standardization_scales_quantiles() {
        let eps = [1.0, 2.0, 3.0, 4.0];
        let raw = qq_data(&eps, 5.0, false).unwrap();
        let std = qq_data(&eps, 5.0, true).unwrap();
        let k = (3.0f64 / 5.0).sqrt();
        for (a, b) in raw.iter().zip(&std) {
            assert!((a.theoretical * k - b.theoretical).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(qq_data(&[], 5.0, true).is_err());
        assert!(qq_data(&[1.0], 0.0, true).is_err());
        assert!(qq_data(&[f64::NAN], 5.0, true).is_err());
    }
}
