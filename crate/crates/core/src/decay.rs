//! Exponential decay fit of a Calabi energy series.

use crate::error::{Error, Result};
use serde::Serialize;

pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// `lambda` in `Ca(t) ~ exp(-lambda t)`.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Least-squares fit of `ln Ca = a - lambda t` over the final half of the series.
pub fn fit_decay(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least {MIN_SAMPLES} samples, got {}",
            series.len()
        )));
    }
    if let Some(&(t, e)) = series.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "non-positive energy {e} at t = {t}"
        )));
    }
    let tail = &series[series.len() / 2..];
    let m = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument(
            "decay fit needs distinct times".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_tot: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(DecayFit {
        rate: -slope + 0.0,
        intercept,
        r_squared,
        samples_used: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<(f64, f64)> = (0..40)
            .map(|k| (k as f64 * 0.1, (-3.0 * k as f64 * 0.1).exp()))
            .collect();
        let fit = fit_decay(&s).unwrap();
        assert!((fit.rate - 3.0).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert_eq!(fit.samples_used, 20);
    }

    #[test]
    fn constant_series() {
        let s: Vec<(f64, f64)> = (0..12).map(|k| (k as f64, 2.5)).collect();
        let fit = fit_decay(&s).unwrap();
        assert_eq!(fit.rate, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let short: Vec<(f64, f64)> = (0..9).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_decay(&short).is_err());
        let mut s: Vec<(f64, f64)> = (0..12).map(|k| (k as f64, 1.0)).collect();
        s[4].1 = 0.0;
        assert!(fit_decay(&s)
            .unwrap_err()
            .to_string()
            .contains("non-positive"));
    }

    proptest! {
        #[test]
        fn recovers_rate_and_scale(rate in 0.0f64..50.0, scale in 1e-8f64..1e3) {
            let s: Vec<(f64, f64)> = (0..30).map(|k| {
                let t = k as f64 * 0.01;
                (t, scale * (-rate * t).exp())
            }).collect();
            let fit = fit_decay(&s).unwrap();
            prop_assert!((fit.rate - rate).abs() < 1e-8 * (1.0 + rate));
        }
    }
}
