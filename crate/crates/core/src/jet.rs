//! Truncated bivariate Taylor jets in `(t, q)`.
//!
//! A [`Jet`] stores the Taylor coefficients `c_ij` of a function around a
//! base point, for `i + j ≤ order ≤ MAX_ORDER`. Arithmetic and elementary
//! functions propagate them exactly (up to rounding), so evaluating an
//! expression on the seed jets `t + dt`, `q + dq` yields all partial
//! derivatives of the expression at once. Jets are `Copy` and never
//! allocate.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::field::{Osc, ScalarField, Term};

pub const MAX_ORDER: usize = 6;
const N: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
const fn base(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Storage index of `c_ij`; coefficients of equal total degree are contiguous.
#[inline]
pub const fn idx(i: usize, j: usize) -> usize {
    base(i + j) + j
}

const FACT: [f64; MAX_ORDER + 2] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: [f64; N],
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; N];
        c[0] = v;
        Jet { order, c }
    }

    /// The seed jet of the time variable at `t`.
    pub fn var_t(t: f64, order: usize) -> Self {
        let mut j = Self::constant(t, order);
        if order >= 1 {
            j.c[idx(1, 0)] = 1.0;
        }
        j
    }

    /// The seed jet of the space variable at `q`.
    pub fn var_q(q: f64, order: usize) -> Self {
        let mut j = Self::constant(q, order);
        if order >= 1 {
            j.c[idx(0, 1)] = 1.0;
        }
        j
    }

    /// Builds a jet from partial derivatives `∂_t^i ∂_q^j f`, given as a
    /// closure over `(i, j)`.
    pub fn from_partials(order: usize, partial: impl Fn(usize, usize) -> f64) -> Self {
        let mut j = Self::constant(0.0, order);
        for d in 0..=order {
            for jq in 0..=d {
                let it = d - jq;
                j.c[idx(it, jq)] = partial(it, jq) / (FACT[it] * FACT[jq]);
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient `c_ij`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= self.order);
        self.c[idx(i, j)]
    }

    /// Partial derivative `∂_t^i ∂_q^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * FACT[i] * FACT[j]
    }

    pub fn dt(&self) -> f64 {
        self.partial(1, 0)
    }

    pub fn dq(&self) -> f64 {
        self.partial(0, 1)
    }

    pub fn dqq(&self) -> f64 {
        self.partial(0, 2)
    }

    /// Same jet truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = *self;
        out.order = order;
        for v in out.c.iter_mut().skip(base(order + 1)) {
            *v = 0.0;
        }
        out
    }

    /// Jet of `∂_t f`, one order lower.
    pub fn d_t(&self) -> Self {
        assert!(self.order >= 1);
        let order = self.order - 1;
        let mut out = Self::constant(0.0, order);
        for d in 0..=order {
            for jq in 0..=d {
                let it = d - jq;
                out.c[idx(it, jq)] = (it + 1) as f64 * self.c[idx(it + 1, jq)];
            }
        }
        out
    }

    /// Jet of `∂_q f`, one order lower.
    pub fn d_q(&self) -> Self {
        assert!(self.order >= 1);
        let order = self.order - 1;
        let mut out = Self::constant(0.0, order);
        for d in 0..=order {
            for jq in 0..=d {
                let it = d - jq;
                out.c[idx(it, jq)] = (jq + 1) as f64 * self.c[idx(it, jq + 1)];
            }
        }
        out
    }

    fn zip(self, other: Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Self::constant(0.0, order);
        for k in 0..base(order + 1) {
            out.c[k] = f(self.c[k], other.c[k]);
        }
        out
    }

    pub fn scale(mut self, k: f64) -> Jet {
        for v in self.c.iter_mut().take(base(self.order + 1)) {
            *v *= k;
        }
        self
    }

    fn mul_jet(&self, b: &Jet) -> Jet {
        let order = self.order.min(b.order);
        let mut out = Self::constant(0.0, order);
        for da in 0..=order {
            for ja in 0..=da {
                let av = self.c[base(da) + ja];
                if av == 0.0 {
                    continue;
                }
                let ia = da - ja;
                for db in 0..=(order - da) {
                    for jb in 0..=db {
                        let ib = db - jb;
                        out.c[idx(ia + ib, ja + jb)] += av * b.c[base(db) + jb];
                    }
                }
            }
        }
        out
    }

    /// Evaluates `Σ f[k] (self − self₀)^k`, i.e. composes a univariate
    /// Taylor series `f` (taken at `self₀`) with this jet.
    pub fn compose_series(&self, f: &[f64]) -> Jet {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Self::constant(f[0], self.order);
        let mut p = h;
        for (k, fk) in f.iter().enumerate().take(self.order + 1).skip(1) {
            if *fk != 0.0 {
                for i in 0..base(self.order + 1) {
                    out.c[i] += fk * p.c[i];
                }
            }
            if k < self.order {
                p = p.mul_jet(&h);
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        let f: Vec<f64> = (0..=self.order).map(|k| e / FACT[k]).collect();
        self.compose_series(&f)
    }

    pub fn ln(&self) -> Jet {
        let v = self.c[0];
        let mut f = vec![v.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            f.push(sign / (k as f64 * v.powi(k as i32)));
        }
        self.compose_series(&f)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let v = self.c[0];
        let mut f = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            f.push(binom * v.powf(p - k as f64));
            binom *= (p - k as f64) / (k + 1) as f64;
        }
        self.compose_series(&f)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(1.0, self.order);
        for _ in 0..n {
            out = out.mul_jet(self);
        }
        out
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let v = self.c[0];
        let f: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / v.powi(k as i32 + 1)
            })
            .collect();
        self.compose_series(&f)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        let f: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4] / FACT[k]).collect();
        self.compose_series(&f)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [c, -s, -c, s];
        let f: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4] / FACT[k]).collect();
        self.compose_series(&f)
    }

    /// Treats `self` as the Taylor jet of an outer function `g` at
    /// `(tj₀, qj₀)` and returns the jet of `g(tj, qj)`.
    pub fn compose(&self, tj: &Jet, qj: &Jet) -> Jet {
        let order = tj.order.min(qj.order).min(self.order);
        let mut ht = tj.truncate(order);
        ht.c[0] = 0.0;
        let mut hq = qj.truncate(order);
        hq.c[0] = 0.0;
        let mut pow_t = [Jet::constant(1.0, order); MAX_ORDER + 1];
        let mut pow_q = [Jet::constant(1.0, order); MAX_ORDER + 1];
        for k in 1..=order {
            pow_t[k] = pow_t[k - 1].mul_jet(&ht);
            pow_q[k] = pow_q[k - 1].mul_jet(&hq);
        }
        let mut out = Jet::constant(0.0, order);
        for d in 0..=order {
            for jq in 0..=d {
                let it = d - jq;
                let a = self.c[idx(it, jq)];
                if a == 0.0 {
                    continue;
                }
                let term = if it == 0 {
                    pow_q[jq]
                } else if jq == 0 {
                    pow_t[it]
                } else {
                    pow_t[it].mul_jet(&pow_q[jq])
                };
                for k in 0..base(order + 1) {
                    out.c[k] += a * term.c[k];
                }
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

fn term_jet(term: &Term, tj: &Jet, qj: &Jet) -> Jet {
    let mut out = Jet::constant(term.coeff, tj.order);
    if term.tpow > 0 {
        out = out * tj.powi(term.tpow);
    }
    if term.qpow > 0 {
        out = out * qj.powi(term.qpow);
    }
    if term.exprate != 0.0 {
        out = out * (*tj * term.exprate).exp();
    }
    match term.osc {
        Osc::None => out,
        Osc::Cos(w) => out * (*tj * w).cos(),
        Osc::Sin(w) => out * (*tj * w).sin(),
    }
}

/// Jet of a [`ScalarField`] at `(t, q)`.
pub fn field_jet(f: &ScalarField, t: f64, q: f64, order: usize) -> Jet {
    let tj = Jet::var_t(t, order);
    let qj = Jet::var_q(q, order);
    f.terms()
        .iter()
        .fold(Jet::constant(0.0, order), |acc, term| acc + term_jet(term, &tj, &qj))
}
