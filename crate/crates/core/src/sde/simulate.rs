use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{AffineModel, PathEnsemble, Scheme, SdeError, SimConfig};
use crate::solutions::Solution;

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Runs `path` for every path index on its own stream, in parallel.
fn ensemble<F>(times: Vec<f64>, n_paths: usize, seed: u64, path: F) -> PathEnsemble
where
    F: Fn(&mut ChaCha8Rng) -> (Vec<f64>, Option<f64>) + Sync,
{
    let rows: Vec<_> = (0..n_paths)
        .into_par_iter()
        .map(|i| path(&mut path_rng(seed, i)))
        .collect();
    PathEnsemble::from_rows(times, rows, seed)
}

/// Euler–Maruyama for `dz = √γ dw + γ (η_q/η) dt`. Paths that leave the
/// domain of η are frozen and flagged with the grid time of the exit.
pub fn simulate_bernstein(eta: &Solution, z0: f64, cfg: &SimConfig) -> Result<PathEnsemble, SdeError> {
    cfg.validate()?;
    if !matches!(cfg.scheme, Scheme::Auto | Scheme::EulerMaruyama) {
        return Err(SdeError::UnsupportedScheme(cfg.scheme));
    }
    if eta.is_dual() {
        return Err(SdeError::InvalidModel(
            "Bernstein drift needs a solution of the primal equation".into(),
        ));
    }
    if eta.log_grad(cfg.t0, z0).is_err() {
        return Err(SdeError::Z0OutOfDomain { z0, t0: cfg.t0 });
    }
    let g = eta.gamma();
    let h = cfg.dt();
    let noise = (g * h).sqrt();
    Ok(ensemble(cfg.recorded_times(), cfg.n_paths, cfg.seed, |rng| {
        let mut row = Vec::with_capacity(cfg.steps / cfg.record_stride + 2);
        let mut z = z0;
        let mut hit = None;
        row.push(z);
        for k in 1..=cfg.steps {
            if hit.is_none() {
                let t_prev = cfg.time(k - 1);
                let t = cfg.time(k);
                match eta.log_grad(t_prev, z) {
                    Ok((_, lq)) => {
                        let next = z + g * lq * h + noise * normal(rng);
                        if next.is_finite() && eta.contains(t, next) {
                            z = next;
                        } else {
                            hit = Some(t);
                        }
                    }
                    Err(_) => hit = Some(t_prev),
                }
            }
            if cfg.is_recorded(k) {
                row.push(z);
            }
        }
        (row, hit)
    }))
}

/// Affine paths in both coordinates.
#[derive(Clone, Debug)]
pub struct AffinePaths {
    pub model: AffineModel,
    pub scheme: Scheme,
    /// `X = αr + β`, reported as `max(X, 0)`.
    pub x: PathEnsemble,
    pub r: PathEnsemble,
}

impl AffinePaths {
    /// `z = √X`, frozen at the first zero hit.
    pub fn z(&self) -> PathEnsemble {
        self.x.map(|_, v| v.sqrt()).frozen_at_hits()
    }
}

fn is_one(delta: f64) -> bool {
    (delta - 1.0).abs() <= 1e-12
}

/// Resolves [`Scheme::Auto`] for the affine model.
fn affine_scheme(scheme: Scheme, delta: f64) -> Result<Scheme, SdeError> {
    match scheme {
        Scheme::Auto if is_one(delta) || delta >= 2.0 => Ok(Scheme::ImplicitSqrt),
        Scheme::Auto | Scheme::EulerMaruyama => Ok(Scheme::EulerMaruyama),
        Scheme::ImplicitSqrt if delta >= 1.0 - 1e-12 => Ok(Scheme::ImplicitSqrt),
        other => Err(SdeError::UnsupportedScheme(other)),
    }
}

/// Simulates `dX = α√|X| dw + (αφ̃ − λX) dt` from `X0 = αr0 + β`.
///
/// Full-truncation Euler uses `X⁺` in the drift and the square root; the
/// hit time is the first grid time with `X ≤ 0`. The implicit scheme works
/// on `y = √X`: for δ > 1 it solves
/// `(1 + λh/2) y² − (y_n + (α/2)ΔW) y − α²(δ−1)h/8 = 0` for the positive
/// root, and for δ = 1 it is the implicit Euler step of the signed OU
/// process `dy = (α/2)dw − (λ/2)y dt`, with hits at sign changes.
pub fn simulate_affine(m: &AffineModel, r0: f64, cfg: &SimConfig) -> Result<AffinePaths, SdeError> {
    cfg.validate()?;
    let x0 = m.x_from_r(r0);
    if !(x0 >= 0.0) {
        return Err(SdeError::InvalidModel(format!("X0 = alpha*r0 + beta = {x0} is negative")));
    }
    let delta = m.delta();
    let scheme = affine_scheme(cfg.scheme, delta)?;
    let (alpha, lambda) = (m.alpha, m.lambda);
    let h = cfg.dt();
    let sh = h.sqrt();
    let damp = 1.0 + 0.5 * lambda * h;
    if scheme == Scheme::ImplicitSqrt && damp <= 0.0 {
        return Err(SdeError::InvalidConfig(format!(
            "implicit scheme needs 1 + lambda*h/2 > 0, got {damp}"
        )));
    }
    let drift0 = alpha * m.phi_tilde();
    let a_coef = alpha * alpha * (delta - 1.0) / 8.0;
    let unit_delta = is_one(delta);
    let x = ensemble(cfg.recorded_times(), cfg.n_paths, cfg.seed, |rng| {
        let mut row = Vec::with_capacity(cfg.steps / cfg.record_stride + 2);
        let mut hit = None;
        row.push(x0);
        match scheme {
            Scheme::ImplicitSqrt => {
                let mut y = x0.sqrt();
                for k in 1..=cfg.steps {
                    let b = y + 0.5 * alpha * sh * normal(rng);
                    let next = if unit_delta {
                        b / damp
                    } else {
                        (b + (b * b + 4.0 * damp * a_coef * h).sqrt()) / (2.0 * damp)
                    };
                    if hit.is_none() && (next == 0.0 || (unit_delta && next * y < 0.0)) {
                        hit = Some(cfg.time(k));
                    }
                    y = next;
                    if cfg.is_recorded(k) {
                        row.push(y * y);
                    }
                }
            }
            _ => {
                let mut x = x0;
                for k in 1..=cfg.steps {
                    let xp = x.max(0.0);
                    x += (drift0 - lambda * xp) * h + alpha * xp.sqrt() * sh * normal(rng);
                    if hit.is_none() && x <= 0.0 {
                        hit = Some(cfg.time(k));
                    }
                    if cfg.is_recorded(k) {
                        row.push(x.max(0.0));
                    }
                }
            }
        }
        (row, hit)
    });
    let r = x.map(|_, v| m.r_from_x(v));
    Ok(AffinePaths {
        model: *m,
        scheme,
        x,
        r,
    })
}

/// BESQ^δ `dY = δ ds + 2√|Y| dB` on a uniform grid.
pub fn simulate_besq(delta: f64, y0: f64, cfg: &SimConfig) -> Result<PathEnsemble, SdeError> {
    cfg.validate()?;
    let grid: Vec<f64> = (0..=cfg.steps).map(|k| cfg.time(k)).collect();
    let record: Vec<bool> = (0..=cfg.steps).map(|k| cfg.is_recorded(k)).collect();
    besq_paths(delta, y0, &grid, &record, cfg.n_paths, cfg.seed, cfg.scheme)
}

/// BESQ^δ on an arbitrary increasing grid, every grid time recorded.
pub fn simulate_besq_on_grid(
    delta: f64,
    y0: f64,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<PathEnsemble, SdeError> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || n_paths == 0 {
        return Err(SdeError::InvalidConfig(
            "grid must be strictly increasing with at least two points".into(),
        ));
    }
    besq_paths(delta, y0, grid, &vec![true; grid.len()], n_paths, seed, scheme)
}

fn besq_paths(
    delta: f64,
    y0: f64,
    grid: &[f64],
    record: &[bool],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<PathEnsemble, SdeError> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(SdeError::UnsupportedDelta(delta));
    }
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(SdeError::InvalidModel(format!("y0 must be >= 0, got {y0}")));
    }
    let integer = delta.fract() == 0.0;
    let scheme = match scheme {
        Scheme::Auto if integer && (delta >= 1.0 || y0 == 0.0) => Scheme::BesqSumOfSquares,
        Scheme::Auto | Scheme::EulerMaruyama => Scheme::EulerMaruyama,
        Scheme::BesqSumOfSquares if integer && (delta >= 1.0 || y0 == 0.0) => scheme,
        other => return Err(SdeError::UnsupportedScheme(other)),
    };
    let times: Vec<f64> = grid
        .iter()
        .zip(record)
        .filter(|(_, r)| **r)
        .map(|(t, _)| *t)
        .collect();
    let dim = delta as usize;
    Ok(ensemble(times, n_paths, seed, |rng| {
        let mut row = Vec::with_capacity(grid.len());
        let mut hit = None;
        row.push(y0);
        if scheme == Scheme::BesqSumOfSquares {
            let mut w = vec![0.0; dim];
            if dim > 0 {
                w[0] = y0.sqrt();
            }
            for k in 1..grid.len() {
                let sh = (grid[k] - grid[k - 1]).sqrt();
                let first = w.first().copied().unwrap_or(0.0);
                for c in w.iter_mut() {
                    *c += sh * normal(rng);
                }
                if dim == 1 && hit.is_none() && w[0] * first <= 0.0 {
                    hit = Some(grid[k]);
                }
                if record[k] {
                    row.push(w.iter().map(|c| c * c).sum());
                }
            }
        } else {
            let mut y = y0;
            for k in 1..grid.len() {
                let h = grid[k] - grid[k - 1];
                let yp = y.max(0.0);
                y += delta * h + 2.0 * yp.sqrt() * h.sqrt() * normal(rng);
                if hit.is_none() && y <= 0.0 {
                    hit = Some(grid[k]);
                }
                if record[k] {
                    row.push(y.max(0.0));
                }
            }
        }
        (row, hit)
    }))
}

/// BESQ clock `α²(e^{λt} − 1)/(4λ)` (`α²t/4` when λ = 0).
pub fn clock(m: &AffineModel, t: f64) -> f64 {
    let a2 = m.alpha * m.alpha;
    if m.lambda == 0.0 {
        a2 * t / 4.0
    } else {
        a2 * (m.lambda * t).exp_m1() / (4.0 * m.lambda)
    }
}

fn inverse_clock(m: &AffineModel, s: f64) -> f64 {
    let a2 = m.alpha * m.alpha;
    if m.lambda == 0.0 {
        4.0 * s / a2
    } else {
        (4.0 * m.lambda * s / a2).ln_1p() / m.lambda
    }
}

/// `X_t = e^{−λt} Y(clock(t))` evaluated at `times` (measured from the
/// BESQ start), which must map onto BESQ grid times.
pub fn besq_time_change(
    m: &AffineModel,
    besq: &PathEnsemble,
    times: &[f64],
) -> Result<PathEnsemble, SdeError> {
    let start = besq.times()[0];
    let horizon = *besq.times().last().expect("nonempty grid");
    let mut idx = Vec::with_capacity(times.len());
    for &t in times {
        let needed = start + clock(m, t - times[0]);
        if needed > horizon * (1.0 + 1e-12) || !needed.is_finite() {
            return Err(SdeError::TimeChangeBeyondHorizon { t, needed, horizon });
        }
        idx.push(
            besq.time_index(needed)
                .ok_or(SdeError::TimeChangeOffGrid { t, needed })?,
        );
    }
    let n = besq.n_paths();
    let mut values = Vec::with_capacity(n * times.len());
    let mut hits = Vec::with_capacity(n);
    for i in 0..n {
        for (&t, &k) in times.iter().zip(&idx) {
            values.push((-m.lambda * (t - times[0])).exp() * besq.value(i, k));
        }
        hits.push(
            besq.hit_zero_at(i)
                .map(|s| times[0] + inverse_clock(m, s - start)),
        );
    }
    PathEnsemble::new(times.to_vec(), values, hits, besq.seed())
}

/// Affine `X` paths in law, obtained by simulating BESQ^δ from `x0` on the
/// clock image of the config grid and applying [`besq_time_change`].
pub fn simulate_affine_via_besq(
    m: &AffineModel,
    x0: f64,
    cfg: &SimConfig,
) -> Result<PathEnsemble, SdeError> {
    cfg.validate()?;
    let times: Vec<f64> = (0..=cfg.steps).map(|k| cfg.time(k)).collect();
    let grid: Vec<f64> = times.iter().map(|t| clock(m, t - cfg.t0)).collect();
    let besq = simulate_besq_on_grid(m.delta(), x0, &grid, cfg.n_paths, cfg.seed, cfg.scheme)?;
    let full = besq_time_change(m, &besq, &times)?;
    if cfg.record_stride == 1 {
        return Ok(full);
    }
    let keep: Vec<usize> = (0..=cfg.steps).filter(|&k| cfg.is_recorded(k)).collect();
    let mut values = Vec::with_capacity(full.n_paths() * keep.len());
    for i in 0..full.n_paths() {
        values.extend(keep.iter().map(|&k| full.value(i, k)));
    }
    PathEnsemble::new(
        keep.iter().map(|&k| times[k]).collect(),
        values,
        full.hits().to_vec(),
        cfg.seed,
    )
}

/// Exact transitions of `dy = (α/2) dw − (λ/2) y dt` (the δ = 1 model).
pub fn ou_exact(m: &AffineModel, z0: f64, cfg: &SimConfig) -> Result<PathEnsemble, SdeError> {
    cfg.validate()?;
    if !is_one(m.delta()) {
        return Err(SdeError::UnsupportedDelta(m.delta()));
    }
    if !(m.lambda > 0.0) {
        return Err(SdeError::InvalidModel("exact OU sampling needs lambda > 0".into()));
    }
    if !matches!(cfg.scheme, Scheme::Auto | Scheme::ExactOu) {
        return Err(SdeError::UnsupportedScheme(cfg.scheme));
    }
    let h = cfg.dt();
    let decay = (-0.5 * m.lambda * h).exp();
    let sd = (m.alpha * m.alpha * -(-m.lambda * h).exp_m1() / (4.0 * m.lambda)).sqrt();
    Ok(ensemble(cfg.recorded_times(), cfg.n_paths, cfg.seed, |rng| {
        let mut row = Vec::with_capacity(cfg.steps / cfg.record_stride + 2);
        let mut y = z0;
        let mut hit = None;
        row.push(y);
        for k in 1..=cfg.steps {
            let next = decay * y + sd * normal(rng);
            if hit.is_none() && next * y <= 0.0 {
                hit = Some(cfg.time(k));
            }
            y = next;
            if cfg.is_recorded(k) {
                row.push(y);
            }
        }
        (row, hit)
    }))
}

/// `s(t) = e^{−λt/2} / z(t)` along strictly positive paths.
pub fn s_martingale(z: &PathEnsemble, lambda: f64) -> Result<PathEnsemble, SdeError> {
    for i in 0..z.n_paths() {
        for (k, &t) in z.times().iter().enumerate() {
            let v = z.value(i, k);
            if !(v > 0.0) {
                return Err(SdeError::NonPositive { path: i, t, value: v });
            }
        }
    }
    Ok(z.map(|t, v| (-0.5 * lambda * t).exp() / v))
}

/// `E[s(t)]` for δ = 3 started at `z0 > 0`. Since `s(t) = 1/|B(clock(t))|`
/// for a three-dimensional Brownian motion at distance `z0` from the
/// origin, `E[s(t)] = erf(z0/√(2·clock(t)))/z0`, which decreases from
/// `1/z0`: s is a strict local martingale.
pub fn s_expectation(m: &AffineModel, z0: f64, t: f64) -> f64 {
    let tau = clock(m, t);
    if tau <= 0.0 {
        return 1.0 / z0;
    }
    statrs::function::erf::erf(z0 / (2.0 * tau).sqrt()) / z0
}
