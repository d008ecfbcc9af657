//! Positive solutions η of `γ η_t = −(γ²/2) η_qq + V η` and the objects
//! built on them.
//!
//! A [`Solution`] is an immutable expression tree: a library solution, a
//! group action applied to a solution, a tilde field applied to a solution,
//! or a user-supplied closure. Partial derivatives come from Taylor jets
//! propagated through the tree, so they are exact up to rounding; only
//! user-supplied closures fall back to finite differences.

mod omega;
pub mod omega_tables;

pub use omega::{
    contact_hamiltonian, omega_eta, section, ContactHamiltonian, OmegaEta, SectionValues,
};

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isovectors::{Potential, TildeField};
use crate::jet::{field_jet, Jet, MAX_ORDER};

#[derive(Debug, Error, PartialEq)]
pub enum SolutionError {
    #[error("point (t={t}, q={q}) is outside the solution domain")]
    OutOfDomain { t: f64, q: f64 },
    #[error("group action {gen} with mu={mu} leaves the domain: 1 + mu*t <= 0 at t={t}")]
    DomainShrunk { gen: usize, mu: f64, t: f64 },
    #[error("group actions are tabulated only for C = 0, D = 0")]
    UnsupportedPotential,
    #[error("generator index must be in 1..=6, got {0}")]
    BadGenerator(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("derivative order {0} exceeds the supported maximum")]
    OrderTooHigh(usize),
    #[error("eta is not positive at (t={t}, q={q})")]
    NonPositive { t: f64, q: f64 },
}

/// Closed rectangle `[t_min, t_max] × [q_min, q_max]` used as the default
/// evaluation window of a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub t_min: f64,
    pub t_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl Rect {
    pub fn new(t_min: f64, t_max: f64, q_min: f64, q_max: f64) -> Self {
        Rect {
            t_min,
            t_max,
            q_min,
            q_max,
        }
    }

    fn contains_open(&self, t: f64, q: f64) -> bool {
        t > self.t_min && t < self.t_max && q > self.q_min && q < self.q_max
    }
}

pub type UserFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Node {
    Constant(f64),
    Exponential {
        kappa: f64,
        gamma: f64,
    },
    Gaussian {
        gamma: f64,
        t_end: f64,
        center: f64,
    },
    Affine {
        alpha: f64,
        lambda: f64,
        delta: f64,
    },
    Oscillator {
        gamma: f64,
        d: f64,
        phase: f64,
    },
    DensityRatio {
        delta: u8,
        alpha: f64,
        lambda: f64,
        z0: f64,
    },
    Group {
        gen: usize,
        mu: f64,
        gamma: f64,
        inner: Solution,
    },
    Tilde {
        field: TildeField,
        inner: Solution,
    },
    User {
        f: UserFn,
        domain: Rect,
        scale: f64,
    },
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::User { domain, scale, .. } => f
                .debug_struct("User")
                .field("domain", domain)
                .field("scale", scale)
                .finish(),
            Node::Group { gen, mu, inner, .. } => f
                .debug_struct("Group")
                .field("gen", gen)
                .field("mu", mu)
                .field("inner", inner)
                .finish(),
            Node::Tilde { field, inner } => f
                .debug_struct("Tilde")
                .field("field", &field.to_string())
                .field("inner", inner)
                .finish(),
            other => write!(f, "{}", node_name(other)),
        }
    }
}

fn node_name(n: &Node) -> String {
    match n {
        Node::Constant(v) => format!("constant({v})"),
        Node::Exponential { kappa, .. } => format!("exponential(kappa={kappa})"),
        Node::Gaussian { t_end, center, .. } => {
            format!("gaussian(t_end={t_end}, center={center})")
        }
        Node::Affine {
            alpha,
            lambda,
            delta,
        } => format!("affine(alpha={alpha}, lambda={lambda}, delta={delta})"),
        Node::Oscillator { d, phase, .. } => format!("oscillator(D={d}, phase={phase})"),
        Node::DensityRatio {
            delta,
            alpha,
            lambda,
            z0,
        } => format!("density_ratio(delta={delta}, alpha={alpha}, lambda={lambda}, z0={z0})"),
        Node::Group { gen, mu, .. } => format!("group(M{gen}, mu={mu})"),
        Node::Tilde { .. } => "tilde".into(),
        Node::User { .. } => "user".into(),
    }
}

/// Partial derivatives up to second order at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    pub v: f64,
    pub t: f64,
    pub q: f64,
    pub tt: f64,
    pub tq: f64,
    pub qq: f64,
}

/// A solution of the (primal or dual) equation with its potential.
#[derive(Clone, Debug)]
pub struct Solution {
    node: Arc<Node>,
    potential: Potential,
    dual: bool,
    window: Rect,
    provenance: Vec<String>,
}

fn positive(name: &str, v: f64) -> Result<(), SolutionError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SolutionError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Solution {
    fn library(node: Node, potential: Potential, window: Rect) -> Self {
        let name = node_name(&node);
        Solution {
            node: Arc::new(node),
            potential,
            dual: false,
            window,
            provenance: vec![format!("library:{name}")],
        }
    }

    /// `η ≡ value` for `V = 0`.
    pub fn constant(value: f64, gamma: f64) -> Result<Self, SolutionError> {
        positive("value", value)?;
        let p = free_potential(gamma)?;
        Ok(Self::library(
            Node::Constant(value),
            p,
            Rect::new(0.0, 1.0, -2.0, 2.0),
        ))
    }

    /// `η = exp(κq − γκ²t/2)` for `V = 0`.
    pub fn exponential(kappa: f64, gamma: f64) -> Result<Self, SolutionError> {
        let p = free_potential(gamma)?;
        Ok(Self::library(
            Node::Exponential { kappa, gamma },
            p,
            Rect::new(0.0, 1.0, -2.0, 2.0),
        ))
    }

    /// Backward heat kernel `η = (t_end − t)^{−1/2} exp(−(q−c)²/(2γ(t_end − t)))`
    /// for `V = 0`, defined for `t < t_end`.
    pub fn gaussian(gamma: f64, t_end: f64, center: f64) -> Result<Self, SolutionError> {
        let p = free_potential(gamma)?;
        Ok(Self::library(
            Node::Gaussian {
                gamma,
                t_end,
                center,
            },
            p,
            Rect::new(t_end - 2.0, t_end - 0.5, center - 2.0, center + 2.0),
        ))
    }

    /// `η = exp(λδt/4 − λq²/α²) q^{(δ−1)/2}`, solving the equation with
    /// `γ = α²/4`, `C = α⁴(δ−1)(δ−3)/128`, `D = λ²/8`. The domain is `q > 0`
    /// except for δ = 1, where η is positive on the whole line.
    pub fn affine(alpha: f64, lambda: f64, delta: f64) -> Result<Self, SolutionError> {
        positive("alpha", alpha)?;
        if !(delta >= 0.0 && delta.is_finite()) || !lambda.is_finite() {
            return Err(SolutionError::InvalidParameter(format!(
                "need delta >= 0 and finite lambda, got delta={delta}, lambda={lambda}"
            )));
        }
        let p = Potential {
            c: alpha.powi(4) * (delta - 1.0) * (delta - 3.0) / 128.0,
            d: lambda * lambda / 8.0,
            gamma: alpha * alpha / 4.0,
        };
        let window = if delta == 1.0 {
            Rect::new(0.0, 1.0, -2.0, 2.0)
        } else {
            Rect::new(0.0, 1.0, 0.1, 3.0)
        };
        Ok(Self::library(
            Node::Affine {
                alpha,
                lambda,
                delta,
            },
            p,
            window,
        ))
    }

    /// `η = exp(m(t) − k(t) q²)` for `V = D q²`, `D ≠ 0`, with
    /// `ω = √(2|D|)` and `u = ωt + phase`:
    /// `k = (ω/2γ) tan u`, `m = −½ ln cos u` when D < 0, and
    /// `k = −(ω/2γ) tanh u`, `m = −½ ln cosh u` when D > 0.
    /// For D < 0 the solution lives on `|u| < π/2`.
    pub fn oscillator(d: f64, gamma: f64, phase: f64) -> Result<Self, SolutionError> {
        let p = Potential::new(0.0, d, gamma)
            .map_err(|e| SolutionError::InvalidParameter(e.to_string()))?;
        if d == 0.0 {
            return Err(SolutionError::InvalidParameter("oscillator needs D != 0".into()));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        let omega = (2.0 * d.abs()).sqrt();
        let t_max = if d < 0.0 {
            if phase.abs() >= half_pi {
                return Err(SolutionError::InvalidParameter(format!(
                    "phase must lie in (-pi/2, pi/2), got {phase}"
                )));
            }
            (0.9 * (half_pi - phase) / omega).min(1.0)
        } else {
            1.0
        };
        Ok(Self::library(
            Node::Oscillator { gamma, d, phase },
            p,
            Rect::new(0.0, t_max, -2.0, 2.0),
        ))
    }

    /// `η_* = ρ_t / η` for the δ ∈ {1, 3} affine model, where `ρ_t` is the
    /// marginal density of the diffusion started at `z0` (δ = 3 requires
    /// `z0 = 0`). Solves the dual equation `−γ η_t = −(γ²/2) η_qq + V η`.
    pub fn density_ratio(
        delta: u8,
        alpha: f64,
        lambda: f64,
        z0: f64,
    ) -> Result<Self, SolutionError> {
        positive("alpha", alpha)?;
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(SolutionError::InvalidParameter(
                "density requires a finite nonzero lambda".into(),
            ));
        }
        match delta {
            1 => {}
            3 if z0 == 0.0 => {}
            3 => {
                return Err(SolutionError::InvalidParameter(
                    "the delta = 3 density assumes z0 = 0".into(),
                ))
            }
            _ => {
                return Err(SolutionError::InvalidParameter(format!(
                    "density is available for delta 1 and 3, got {delta}"
                )))
            }
        }
        let base = Self::affine(alpha, lambda, delta as f64)?;
        let window = if delta == 1 {
            Rect::new(0.2, 1.0, -2.0, 2.0)
        } else {
            Rect::new(0.2, 1.0, 0.1, 3.0)
        };
        let mut s = Self::library(
            Node::DensityRatio {
                delta,
                alpha,
                lambda,
                z0,
            },
            base.potential,
            window,
        );
        s.dual = true;
        Ok(s)
    }

    /// Wraps a closure. Derivatives use Richardson-extrapolated central
    /// differences with step `scale·1e-5` (first order) and `scale·1e-3`
    /// (second order).
    pub fn user(
        f: UserFn,
        potential: Potential,
        domain: Rect,
        scale: f64,
    ) -> Result<Self, SolutionError> {
        positive("scale", scale)?;
        let window = Rect::new(
            domain.t_min.max(-1e6),
            domain.t_max.min(1e6),
            domain.q_min.max(-1e6),
            domain.q_max.min(1e6),
        );
        Ok(Solution {
            node: Arc::new(Node::User { f, domain, scale }),
            potential,
            dual: false,
            window,
            provenance: vec!["user-supplied".into()],
        })
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    pub fn gamma(&self) -> f64 {
        self.potential.gamma
    }

    /// True for solutions of the dual (forward) equation.
    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn with_window(mut self, window: Rect) -> Self {
        self.window = window;
        self
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    /// JSON descriptor with the provenance chain.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "provenance": self.provenance,
            "potential": self.potential,
            "dual": self.dual,
            "window": self.window,
        })
    }

    /// Membership in the natural domain, mapped through every group action.
    pub fn contains(&self, t: f64, q: f64) -> bool {
        if !(t.is_finite() && q.is_finite()) {
            return false;
        }
        match &*self.node {
            Node::Constant(_) | Node::Exponential { .. } => true,
            Node::Gaussian { t_end, .. } => t < *t_end,
            Node::Affine { delta, .. } => *delta == 1.0 || q > 0.0,
            Node::Oscillator { d, phase, .. } => {
                *d > 0.0
                    || ((2.0 * d.abs()).sqrt() * t + phase).abs() < std::f64::consts::FRAC_PI_2
            }
            Node::DensityRatio { delta, .. } => t > 0.0 && (*delta == 1 || q > 0.0),
            Node::Group {
                gen, mu, gamma: _, inner,
            } => match group_point(*gen, *mu, t, q) {
                Some((tm, qm)) => inner.contains(tm, qm),
                None => false,
            },
            Node::Tilde { inner, .. } => inner.contains(t, q),
            Node::User { domain, .. } => domain.contains_open(t, q),
        }
    }

    /// Uniform grid over the window, restricted to domain points.
    pub fn grid(&self, nt: usize, nq: usize) -> Vec<(f64, f64)> {
        let w = self.window;
        let mut out = Vec::with_capacity(nt * nq);
        for i in 0..nt {
            let t = if nt == 1 {
                w.t_min
            } else {
                w.t_min + (w.t_max - w.t_min) * i as f64 / (nt - 1) as f64
            };
            for j in 0..nq {
                let q = if nq == 1 {
                    w.q_min
                } else {
                    w.q_min + (w.q_max - w.q_min) * j as f64 / (nq - 1) as f64
                };
                if self.contains(t, q) {
                    out.push((t, q));
                }
            }
        }
        out
    }

    /// Taylor jet of η at `(t, q)` up to `order`.
    pub fn jet(&self, t: f64, q: f64, order: usize) -> Result<Jet, SolutionError> {
        if order > MAX_ORDER {
            return Err(SolutionError::OrderTooHigh(order));
        }
        if !self.contains(t, q) {
            return Err(SolutionError::OutOfDomain { t, q });
        }
        let tj = Jet::var_t(t, order);
        let qj = Jet::var_q(q, order);
        Ok(match &*self.node {
            Node::Constant(v) => Jet::constant(*v, order),
            Node::Exponential { kappa, gamma } => {
                (tj * (-0.5 * gamma * kappa * kappa) + qj * *kappa).exp()
            }
            Node::Gaussian {
                gamma,
                t_end,
                center,
            } => {
                let s = -tj + *t_end;
                let dq = qj - *center;
                s.powf(-0.5) * (-(dq * dq) / (s * (2.0 * gamma))).exp()
            }
            Node::Affine {
                alpha,
                lambda,
                delta,
            } => affine_jet(*alpha, *lambda, *delta, tj, qj),
            Node::Oscillator { gamma, d, phase } => {
                let omega = (2.0 * d.abs()).sqrt();
                let u = tj * omega + *phase;
                let (k, m) = if *d < 0.0 {
                    (u.sin() / u.cos() * (omega / (2.0 * gamma)), u.cos().ln() * -0.5)
                } else {
                    let (ep, em) = (u.exp(), (-u).exp());
                    let tanh = (ep - em) / (ep + em);
                    (tanh * (-omega / (2.0 * gamma)), ((ep + em) * 0.5).ln() * -0.5)
                };
                (m - k * qj * qj).exp()
            }
            Node::DensityRatio {
                delta,
                alpha,
                lambda,
                z0,
            } => {
                let rho = density_jet(*delta, *alpha, *lambda, *z0, tj, qj);
                rho / affine_jet(*alpha, *lambda, *delta as f64, tj, qj)
            }
            Node::Group {
                gen,
                mu,
                gamma,
                inner,
            } => group_jet(*gen, *mu, *gamma, inner, tj, qj)?,
            Node::Tilde { field, inner } => {
                if order + 1 > MAX_ORDER {
                    return Err(SolutionError::OrderTooHigh(order + 1));
                }
                let eta = inner.jet(t, q, order + 1)?;
                let a = field_jet(&field.a, t, q, order);
                let b = field_jet(&field.b, t, q, order);
                let c = field_jet(&field.c, t, q, order);
                a * eta.d_t() + b * eta.d_q() + c * eta.truncate(order)
            }
            Node::User { f, scale, .. } => {
                if order > 2 {
                    return Err(SolutionError::OrderTooHigh(order));
                }
                user_jet(f.as_ref(), *scale, t, q, order)
            }
        })
    }

    pub fn value(&self, t: f64, q: f64) -> Result<f64, SolutionError> {
        Ok(self.jet(t, q, 0)?.value())
    }

    pub fn partials(&self, t: f64, q: f64) -> Result<Partials, SolutionError> {
        let j = self.jet(t, q, 2)?;
        Ok(Partials {
            v: j.value(),
            t: j.partial(1, 0),
            q: j.partial(0, 1),
            tt: j.partial(2, 0),
            tq: j.partial(1, 1),
            qq: j.partial(0, 2),
        })
    }

    /// `(η_t/η, η_q/η)`, with closed forms for library solutions.
    pub fn log_grad(&self, t: f64, q: f64) -> Result<(f64, f64), SolutionError> {
        match &*self.node {
            Node::Constant(_) => {
                self.check(t, q)?;
                Ok((0.0, 0.0))
            }
            Node::Exponential { kappa, gamma } => {
                self.check(t, q)?;
                Ok((-0.5 * gamma * kappa * kappa, *kappa))
            }
            Node::Gaussian {
                gamma,
                t_end,
                center,
            } => {
                self.check(t, q)?;
                let s = t_end - t;
                let d = q - center;
                Ok((0.5 / s - d * d / (2.0 * gamma * s * s), -d / (gamma * s)))
            }
            Node::Affine {
                alpha,
                lambda,
                delta,
            } => {
                self.check(t, q)?;
                let p = 0.5 * (delta - 1.0);
                let mut lq = -2.0 * lambda * q / (alpha * alpha);
                if p != 0.0 {
                    lq += p / q;
                }
                Ok((lambda * delta / 4.0, lq))
            }
            Node::Oscillator { gamma, d, phase } => {
                self.check(t, q)?;
                let omega = (2.0 * d.abs()).sqrt();
                let u = omega * t + phase;
                let (k, dm) = if *d < 0.0 {
                    let k = omega / (2.0 * gamma) * u.tan();
                    (k, gamma * k)
                } else {
                    let k = -omega / (2.0 * gamma) * u.tanh();
                    (k, gamma * k)
                };
                let dk = 2.0 * gamma * k * k - d / gamma;
                Ok((dm - dk * q * q, -2.0 * k * q))
            }
            _ => {
                let j = self.jet(t, q, 1)?;
                let v = j.value();
                if v == 0.0 {
                    return Err(SolutionError::NonPositive { t, q });
                }
                Ok((j.dt() / v, j.dq() / v))
            }
        }
    }

    fn check(&self, t: f64, q: f64) -> Result<(), SolutionError> {
        if self.contains(t, q) {
            Ok(())
        } else {
            Err(SolutionError::OutOfDomain { t, q })
        }
    }

    /// Writes `t,q,value` rows for the given grid.
    pub fn write_grid_csv<W: Write>(&self, mut w: W, grid: &[(f64, f64)]) -> std::io::Result<()> {
        writeln!(w, "t,q,value")?;
        for &(t, q) in grid {
            let v = self
                .value(t, q)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
            writeln!(w, "{t},{q},{v}")?;
        }
        Ok(())
    }
}

fn free_potential(gamma: f64) -> Result<Potential, SolutionError> {
    Potential::free(gamma).map_err(|e| SolutionError::InvalidParameter(e.to_string()))
}

fn affine_jet(alpha: f64, lambda: f64, delta: f64, tj: Jet, qj: Jet) -> Jet {
    let e = (tj * (lambda * delta / 4.0) - qj * qj * (lambda / (alpha * alpha))).exp();
    let p = 0.5 * (delta - 1.0);
    if p == 0.0 {
        e
    } else if p.fract() == 0.0 && p > 0.0 {
        e * qj.powi(p as u32)
    } else {
        e * qj.powf(p)
    }
}

/// `κ(t) = λ / (1 − e^{−λt})`; the marginal variance of the δ = 1 process is
/// `α²/(4κ)`.
fn kappa_jet(lambda: f64, tj: Jet) -> Jet {
    let one_minus = -(tj * (-lambda)).exp() + 1.0;
    one_minus.recip() * lambda
}

fn density_jet(delta: u8, alpha: f64, lambda: f64, z0: f64, tj: Jet, qj: Jet) -> Jet {
    let kappa = kappa_jet(lambda, tj);
    let a2 = alpha * alpha;
    if delta == 1 {
        let mean = (tj * (-0.5 * lambda)).exp() * z0;
        let d = qj - mean;
        (kappa * (1.0 / (2.0 * std::f64::consts::PI))).sqrt()
            * (2.0 / alpha)
            * (-(kappa * d * d) * (2.0 / a2)).exp()
    } else {
        let pref = 16.0 / (alpha.powi(3) * (2.0 * std::f64::consts::PI).sqrt());
        kappa.powf(1.5) * pref * qj * qj * (-(kappa * qj * qj) * (2.0 / a2)).exp()
    }
}

/// Point at which the inner solution is evaluated under `e^{μ M_gen}`.
fn group_point(gen: usize, mu: f64, t: f64, q: f64) -> Option<(f64, f64)> {
    Some(match gen {
        1 => {
            let s = 1.0 + mu * t;
            if s <= 0.0 {
                return None;
            }
            (t / s, q / s)
        }
        2 => ((-mu).exp() * t, (-mu / 2.0).exp() * q),
        3 => (t - mu, q),
        4 => (t, q),
        5 => (t, q - mu * t),
        6 => (t, q - mu),
        _ => return None,
    })
}

fn group_jet(
    gen: usize,
    mu: f64,
    gamma: f64,
    inner: &Solution,
    tj: Jet,
    qj: Jet,
) -> Result<Jet, SolutionError> {
    let order = tj.order();
    let (tm, qm, pref) = match gen {
        1 => {
            let s = tj * mu + 1.0;
            let pref = s.powf(-0.5) * (qj * qj / s * (mu / (2.0 * gamma))).exp();
            (tj / s, qj / s, Some(pref))
        }
        2 => (tj * (-mu).exp(), qj * (-mu / 2.0).exp(), None),
        3 => (tj - mu, qj, None),
        4 => (tj, qj, Some(Jet::constant((-mu / gamma).exp(), order))),
        5 => {
            let pref = (qj * (mu / gamma) - tj * (mu * mu / (2.0 * gamma))).exp();
            (tj, qj - tj * mu, Some(pref))
        }
        6 => (tj, qj - mu, None),
        other => return Err(SolutionError::BadGenerator(other)),
    };
    let outer = inner.jet(tm.value(), qm.value(), order)?;
    let composed = outer.compose(&tm, &qm);
    Ok(match pref {
        Some(p) => p * composed,
        None => composed,
    })
}

fn user_jet(f: &(dyn Fn(f64, f64) -> f64 + Send + Sync), scale: f64, t: f64, q: f64, order: usize) -> Jet {
    let rich1 = |g: &dyn Fn(f64) -> f64, h: f64| {
        let d = |h: f64| (g(h) - g(-h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    };
    let rich2 = |g: &dyn Fn(f64) -> f64, h: f64| {
        let d = |h: f64| (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    };
    let h1 = scale * 1e-5;
    let h2 = scale * 1e-3;
    let v = f(t, q);
    let ft = || rich1(&|h| f(t + h, q), h1);
    let fq = || rich1(&|h| f(t, q + h), h1);
    Jet::from_partials(order, |i, j| match (i, j) {
        (0, 0) => v,
        (1, 0) => ft(),
        (0, 1) => fq(),
        (2, 0) => rich2(&|h| f(t + h, q), h2),
        (0, 2) => rich2(&|h| f(t, q + h), h2),
        (1, 1) => rich1(&|h| rich1(&|k| f(t + h, q + k), h2), h2),
        _ => 0.0,
    })
}

/// Maximum residual of the equation over a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// Max over the grid of `max(|γη_t|, |Vη|, (γ²/2)|η_qq|)`.
    pub scale: f64,
    pub relative: f64,
    pub worst: (f64, f64),
}

/// Residual `γη_t + (γ²/2)η_qq − Vη` (primal) or `−γη_t + (γ²/2)η_qq − Vη`
/// (dual) over a grid, relative to the size of the individual terms.
pub fn residual(
    eta: &Solution,
    p: Potential,
    grid: &[(f64, f64)],
    dual: bool,
) -> Result<ResidualReport, SolutionError> {
    let g = p.gamma;
    let sign = if dual { -1.0 } else { 1.0 };
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    let mut worst = (f64::NAN, f64::NAN);
    for &(t, q) in grid {
        let d = eta.partials(t, q)?;
        let vt = sign * g * d.t;
        let vqq = 0.5 * g * g * d.qq;
        let vv = p.v(q) * d.v;
        let r = (vt + vqq - vv).abs();
        scale = scale.max(vt.abs()).max(vqq.abs()).max(vv.abs());
        if r > max_abs || worst.0.is_nan() {
            max_abs = max_abs.max(r);
            worst = (t, q);
        }
    }
    let relative = if scale > 0.0 { max_abs / scale } else { max_abs };
    Ok(ResidualReport {
        max_abs,
        scale,
        relative,
        worst,
    })
}

/// `X(η) = a η_t + b η_q + c η`, a new solution when X is a symmetry.
pub fn apply_tilde(x: &TildeField, eta: &Solution) -> Solution {
    apply_tilde_named(x, eta, "tilde")
}

/// [`apply_tilde`] with a label recorded in the provenance chain.
pub fn apply_tilde_named(x: &TildeField, eta: &Solution, label: &str) -> Solution {
    let mut provenance = eta.provenance.clone();
    provenance.push(format!("tilde:{label}"));
    Solution {
        node: Arc::new(Node::Tilde {
            field: x.clone(),
            inner: eta.clone(),
        }),
        potential: eta.potential,
        dual: eta.dual,
        window: eta.window,
        provenance,
    }
}

/// `e^{μ M_i} η` for the free case (C = 0, D = 0).
pub fn group_action(i: usize, mu: f64, eta: &Solution) -> Result<Solution, SolutionError> {
    let p = eta.potential;
    if p.c != 0.0 || p.d != 0.0 || eta.dual {
        return Err(SolutionError::UnsupportedPotential);
    }
    if !(1..=6).contains(&i) {
        return Err(SolutionError::BadGenerator(i));
    }
    if i == 1 {
        for t in [eta.window.t_min, eta.window.t_max] {
            if 1.0 + mu * t <= 0.0 {
                return Err(SolutionError::DomainShrunk { gen: i, mu, t });
            }
        }
    }
    let mut provenance = eta.provenance.clone();
    provenance.push(format!("group:M{i}:mu={mu}"));
    Ok(Solution {
        node: Arc::new(Node::Group {
            gen: i,
            mu,
            gamma: p.gamma,
            inner: eta.clone(),
        }),
        potential: p,
        dual: false,
        window: eta.window,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isovectors::basis;

    #[test]
    fn affine_examples() {
        let one = Solution::affine(2.0, 0.0, 1.0).unwrap();
        assert_eq!(one.potential(), Potential { c: 0.0, d: 0.0, gamma: 1.0 });
        assert_eq!(one.value(0.3, -1.2).unwrap(), 1.0);
        let e3 = Solution::affine(2.0, 2.0, 3.0).unwrap();
        assert_eq!(e3.potential(), Potential { c: 0.0, d: 0.5, gamma: 1.0 });
        let (t, q): (f64, f64) = (0.4, 0.9);
        let expect = q * (1.5 * t - q * q / 2.0).exp();
        assert!((e3.value(t, q).unwrap() - expect).abs() < 1e-15 * expect);
        assert!(!e3.contains(0.1, -0.5));
        let e2 = Solution::affine(2.0, 2.0, 2.0).unwrap();
        assert_eq!(e2.potential().c, -1.0 / 8.0);
        assert!(Solution::affine(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_residual_is_exactly_zero() {
        let eta = Solution::constant(1.0, 1.0).unwrap();
        let r = residual(&eta, eta.potential(), &eta.grid(5, 5), false).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn tilde_examples() {
        let eta = Solution::constant(1.0, 1.5).unwrap();
        let m = basis(eta.potential());
        let m4 = apply_tilde(m.gen(4), &eta);
        assert!((m4.value(0.2, 0.3).unwrap() + 1.0 / 1.5).abs() < 1e-15);
        let m3 = apply_tilde(m.gen(3), &eta);
        assert_eq!(m3.value(0.2, 0.3).unwrap(), 0.0);
        let m1 = apply_tilde(m.gen(1), &eta);
        let (t, q) = (0.7, -1.1);
        let expect = -(1.5 * t - q * q) / 3.0;
        assert!((m1.value(t, q).unwrap() - expect).abs() < 1e-14);
        let r = residual(&m1, eta.potential(), &eta.grid(6, 6), false).unwrap();
        assert!(r.relative < 1e-12);
    }

    #[test]
    fn group_examples() {
        let eta = Solution::gaussian(1.0, 2.0, 0.3).unwrap();
        let g3 = group_action(3, 0.25, &eta).unwrap();
        let (t, q) = (0.5, 0.7);
        assert_eq!(g3.value(t, q).unwrap(), eta.value(t - 0.25, q).unwrap());
        for i in 1..=6 {
            let g = group_action(i, 0.0, &eta).unwrap();
            assert!((g.value(t, q).unwrap() - eta.value(t, q).unwrap()).abs() < 1e-15);
        }
        assert!(matches!(
            group_action(1, -1.0, &eta),
            Err(SolutionError::DomainShrunk { .. })
        ));
        let affine = Solution::affine(2.0, 2.0, 3.0).unwrap();
        assert_eq!(
            group_action(3, 0.1, &affine).err(),
            Some(SolutionError::UnsupportedPotential)
        );
        assert_eq!(group_action(7, 0.1, &eta).err(), Some(SolutionError::BadGenerator(7)));
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let eta = Solution::affine(2.0, 2.0, 3.0).unwrap();
        assert_eq!(
            eta.value(0.1, -1.0),
            Err(SolutionError::OutOfDomain { t: 0.1, q: -1.0 })
        );
        let r = residual(&eta, eta.potential(), &[(0.1, -1.0)], false);
        assert!(r.is_err());
    }

    #[test]
    fn user_solution_matches_closed_form() {
        let gamma = 1.0;
        let f: UserFn = Arc::new(move |t, q| (0.5 * q - gamma * 0.125 * t).exp());
        let p = Potential::free(gamma).unwrap();
        let user = Solution::user(f, p, Rect::new(-5.0, 5.0, -5.0, 5.0), 1.0).unwrap();
        let exact = Solution::exponential(0.5, gamma).unwrap();
        let a = user.partials(0.3, 0.2).unwrap();
        let b = exact.partials(0.3, 0.2).unwrap();
        assert!((a.t - b.t).abs() < 1e-9);
        assert!((a.q - b.q).abs() < 1e-9);
        assert!((a.qq - b.qq).abs() < 1e-8);
        assert!((a.tq - b.tq).abs() < 1e-8);
        assert!(user.jet(0.3, 0.2, 3).is_err());
    }

    #[test]
    fn descriptor_records_chain() {
        let eta = Solution::constant(1.0, 1.0).unwrap();
        let g = group_action(6, 0.5, &eta).unwrap();
        let t = apply_tilde_named(basis(eta.potential()).gen(1), &g, "M1");
        let d = t.descriptor();
        let chain: Vec<String> = serde_json::from_value(d["provenance"].clone()).unwrap();
        assert_eq!(chain, vec!["library:constant(1)", "group:M6:mu=0.5", "tilde:M1"]);
    }
}
