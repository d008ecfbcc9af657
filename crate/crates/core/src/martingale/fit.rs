use serde::{Deserialize, Serialize};

use super::{mean_se, MartingaleError};
use crate::sde::{Density, PathEnsemble};

/// A one-dimensional law with a CDF and raw moments.
pub trait Law {
    fn cdf(&self, x: f64) -> f64;
    fn raw_moment(&self, k: u32) -> f64;
}

impl Law for Density {
    fn cdf(&self, x: f64) -> f64 {
        Density::cdf(self, x)
    }
    fn raw_moment(&self, k: u32) -> f64 {
        Density::raw_moment(self, k)
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentCheck {
    pub k: u32,
    pub empirical: f64,
    pub analytic: f64,
    pub se: f64,
    pub rel_error: f64,
    /// `(empirical − analytic)/se`.
    pub z: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityFit {
    pub t: f64,
    pub n: usize,
    pub ks: f64,
    /// `1.358/√n`, the asymptotic 95% critical value.
    pub ks_band_95: f64,
    /// `1.628/√n`, the asymptotic 99% critical value.
    pub ks_band_99: f64,
    pub moments: Vec<MomentCheck>,
}

impl DensityFit {
    pub fn ks_within_95(&self) -> bool {
        self.ks <= self.ks_band_95
    }

    /// All moment errors within `k` standard errors.
    pub fn moments_within(&self, k: f64) -> bool {
        self.moments.iter().all(|m| m.z.abs() < k)
    }
}

/// KS distance and first-four-moment errors of the surviving paths at grid
/// time `t` against `law`.
pub fn density_fit(ensemble: &PathEnsemble, t: f64, law: &dyn Law) -> Result<DensityFit, MartingaleError> {
    let k = ensemble
        .time_index(t)
        .ok_or(MartingaleError::CheckpointOffGrid(t))?;
    let xs: Vec<f64> = (0..ensemble.n_paths())
        .filter(|&i| ensemble.alive(i, k))
        .map(|i| ensemble.value(i, k))
        .collect();
    if xs.len() < 100 {
        return Err(MartingaleError::TooFewPaths {
            t,
            found: xs.len(),
            needed: 100,
        });
    }
    let n = xs.len();
    let moments = (1..=4)
        .map(|k| {
            let pk: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
            let (m, se) = mean_se(&pk);
            let a = law.raw_moment(k);
            MomentCheck {
                k,
                empirical: m,
                analytic: a,
                se,
                rel_error: (m - a).abs() / a.abs().max(f64::MIN_POSITIVE),
                z: (m - a) / se,
            }
        })
        .collect();
    let root_n = (n as f64).sqrt();
    Ok(DensityFit {
        t,
        n,
        ks: ks_statistic(&xs, |x| law.cdf(x)),
        ks_band_95: 1.358 / root_n,
        ks_band_99: 1.628 / root_n,
        moments,
    })
}
