//! Exact term algebra for isovector coefficients.
//!
//! A [`ScalarField`] is a finite sum of terms
//! `coeff · t^p · q^m · e^{a t} · osc(ω t)` with `osc ∈ {1, cos, sin}`.
//! The set is closed under addition, multiplication and both partial
//! derivatives, and every value is kept in a canonical normal form so that
//! two fields describing the same function compare equal term by term.
//!
//! Coefficients are `f64`. Like terms are merged, and a merged coefficient
//! is dropped when it is below [`MERGE_TOL`] times the largest contribution
//! that went into it. Rates (`a`, `ω`) that agree to the same relative
//! tolerance are identified.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Relative tolerance used for like-term cancellation and rate matching.
pub const MERGE_TOL: f64 = 1e-12;

/// Oscillatory factor of a term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "omega", rename_all = "lowercase")]
pub enum Osc {
    None,
    Cos(f64),
    Sin(f64),
}

impl Osc {
    fn omega(&self) -> f64 {
        match *self {
            Osc::None => 0.0,
            Osc::Cos(w) | Osc::Sin(w) => w,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Osc::None => 0,
            Osc::Cos(_) => 1,
            Osc::Sin(_) => 2,
        }
    }

    fn with_omega(&self, w: f64) -> Osc {
        match self {
            Osc::None => Osc::None,
            Osc::Cos(_) => Osc::Cos(w),
            Osc::Sin(_) => Osc::Sin(w),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Osc::None => 1.0,
            Osc::Cos(w) => (w * t).cos(),
            Osc::Sin(w) => (w * t).sin(),
        }
    }
}

/// One monomial-exponential-oscillation term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub tpow: u32,
    pub qpow: u32,
    pub exprate: f64,
    pub osc: Osc,
}

impl Term {
    pub fn constant(coeff: f64) -> Self {
        Term {
            coeff,
            tpow: 0,
            qpow: 0,
            exprate: 0.0,
            osc: Osc::None,
        }
    }

    pub fn t(mut self, p: u32) -> Self {
        self.tpow = p;
        self
    }

    pub fn q(mut self, m: u32) -> Self {
        self.qpow = m;
        self
    }

    pub fn exp(mut self, a: f64) -> Self {
        self.exprate = a;
        self
    }

    pub fn cos(mut self, w: f64) -> Self {
        self.osc = Osc::Cos(w);
        self
    }

    pub fn sin(mut self, w: f64) -> Self {
        self.osc = Osc::Sin(w);
        self
    }

    pub fn eval(&self, t: f64, q: f64) -> f64 {
        let mut v = self.coeff * t.powi(self.tpow as i32) * q.powi(self.qpow as i32);
        if self.exprate != 0.0 {
            v *= (self.exprate * t).exp();
        }
        v * self.osc.eval(t)
    }

    /// Folds negative and zero frequencies. Returns `None` when the term
    /// vanishes identically (sin 0).
    fn canonical(mut self) -> Option<Term> {
        match self.osc {
            Osc::Cos(w) if w == 0.0 => self.osc = Osc::None,
            Osc::Sin(w) if w == 0.0 => return None,
            Osc::Cos(w) if w < 0.0 => self.osc = Osc::Cos(-w),
            Osc::Sin(w) if w < 0.0 => {
                self.osc = Osc::Sin(-w);
                self.coeff = -self.coeff;
            }
            _ => {}
        }
        if self.coeff == 0.0 {
            None
        } else {
            Some(self)
        }
    }

    fn key_cmp(&self, other: &Term) -> Ordering {
        self.exprate
            .total_cmp(&other.exprate)
            .then(self.osc.omega().total_cmp(&other.osc.omega()))
            .then(self.osc.kind_rank().cmp(&other.osc.kind_rank()))
            .then(self.tpow.cmp(&other.tpow))
            .then(self.qpow.cmp(&other.qpow))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs())
}

/// Replaces every rate by the first representative it is close to, so that
/// nearly equal rates sort and merge as one.
fn snap_rates(values: &mut [f64]) -> Vec<f64> {
    let mut reps: Vec<f64> = Vec::new();
    for v in values.iter_mut() {
        if let Some(r) = reps.iter().find(|r| close(**r, *v)) {
            *v = *r;
        } else {
            reps.push(*v);
        }
    }
    reps
}

/// A finite sum of [`Term`]s in canonical normal form.
///
/// JSON schema: `{"terms": [{"coeff": f64, "tpow": u32, "qpow": u32,
/// "exprate": f64, "osc": {"kind": "none"|"cos"|"sin", "omega": f64}}]}`.
/// Deserialized term lists are normalized.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "FieldRepr")]
pub struct ScalarField {
    terms: Vec<Term>,
}

#[derive(Deserialize)]
struct FieldRepr {
    terms: Vec<Term>,
}

impl From<FieldRepr> for ScalarField {
    fn from(r: FieldRepr) -> Self {
        ScalarField::from_terms(r.terms)
    }
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term::constant(c)])
    }

    /// The field `t`.
    pub fn t() -> Self {
        Self::from_terms(vec![Term::constant(1.0).t(1)])
    }

    /// The field `q`.
    pub fn q() -> Self {
        Self::from_terms(vec![Term::constant(1.0).q(1)])
    }

    /// `e^{a t}`.
    pub fn exp(a: f64) -> Self {
        Self::from_terms(vec![Term::constant(1.0).exp(a)])
    }

    /// `cos(ω t)`.
    pub fn cos(w: f64) -> Self {
        Self::from_terms(vec![Term::constant(1.0).cos(w)])
    }

    /// `sin(ω t)`.
    pub fn sin(w: f64) -> Self {
        Self::from_terms(vec![Term::constant(1.0).sin(w)])
    }

    pub fn term(t: Term) -> Self {
        Self::from_terms(vec![t])
    }

    /// Builds a field from arbitrary terms, bringing them to normal form.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        ScalarField {
            terms: normalize(terms),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the field is the constant `c` (including 0).
    pub fn constant_value(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.tpow == 0 && t.qpow == 0 && t.exprate == 0.0 && t.osc == Osc::None => {
                Some(t.coeff)
            }
            _ => None,
        }
    }

    /// True when no term carries a power of `q`.
    pub fn is_t_only(&self) -> bool {
        self.terms.iter().all(|t| t.qpow == 0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coeff.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        ScalarField {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * k,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len() * other.terms.len());
        for x in &self.terms {
            for y in &other.terms {
                mul_terms(x, y, &mut out);
            }
        }
        Self::from_terms(out)
    }

    pub fn d_dt(&self) -> Self {
        let mut out = Vec::with_capacity(3 * self.terms.len());
        for x in &self.terms {
            if x.tpow > 0 {
                out.push(Term {
                    coeff: x.coeff * x.tpow as f64,
                    tpow: x.tpow - 1,
                    ..*x
                });
            }
            if x.exprate != 0.0 {
                out.push(Term {
                    coeff: x.coeff * x.exprate,
                    ..*x
                });
            }
            match x.osc {
                Osc::None => {}
                Osc::Cos(w) => out.push(Term {
                    coeff: -x.coeff * w,
                    osc: Osc::Sin(w),
                    ..*x
                }),
                Osc::Sin(w) => out.push(Term {
                    coeff: x.coeff * w,
                    osc: Osc::Cos(w),
                    ..*x
                }),
            }
        }
        Self::from_terms(out)
    }

    pub fn d_dq(&self) -> Self {
        let out = self
            .terms
            .iter()
            .filter(|x| x.qpow > 0)
            .map(|x| Term {
                coeff: x.coeff * x.qpow as f64,
                qpow: x.qpow - 1,
                ..*x
            })
            .collect();
        Self::from_terms(out)
    }

    pub fn eval(&self, t: f64, q: f64) -> f64 {
        self.terms.iter().map(|x| x.eval(t, q)).sum()
    }

    /// Equality of normal forms: `self − other` normalizes to the empty sum.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("term lists always serialize")
    }
}

fn mul_terms(x: &Term, y: &Term, out: &mut Vec<Term>) {
    let mut exprate = x.exprate + y.exprate;
    if exprate != 0.0 && exprate.abs() <= MERGE_TOL * x.exprate.abs().max(y.exprate.abs()) {
        exprate = 0.0;
    }
    let base = Term {
        coeff: x.coeff * y.coeff,
        tpow: x.tpow + y.tpow,
        qpow: x.qpow + y.qpow,
        exprate,
        osc: Osc::None,
    };
    let (w1, w2) = (x.osc.omega(), y.osc.omega());
    let diff = {
        let d = w1 - w2;
        if d != 0.0 && d.abs() <= MERGE_TOL * w1.abs().max(w2.abs()) {
            0.0
        } else {
            d
        }
    };
    let sum = w1 + w2;
    let half = |c: f64, osc: Osc| Term {
        coeff: 0.5 * c * base.coeff,
        osc,
        ..base
    };
    match (x.osc, y.osc) {
        (Osc::None, o) | (o, Osc::None) => out.push(Term { osc: o, ..base }),
        // cos a cos b = ½cos(a−b) + ½cos(a+b)
        (Osc::Cos(_), Osc::Cos(_)) => {
            out.push(half(1.0, Osc::Cos(diff)));
            out.push(half(1.0, Osc::Cos(sum)));
        }
        // sin a sin b = ½cos(a−b) − ½cos(a+b)
        (Osc::Sin(_), Osc::Sin(_)) => {
            out.push(half(1.0, Osc::Cos(diff)));
            out.push(half(-1.0, Osc::Cos(sum)));
        }
        // sin a cos b = ½sin(a+b) + ½sin(a−b)
        (Osc::Sin(_), Osc::Cos(_)) => {
            out.push(half(1.0, Osc::Sin(sum)));
            out.push(half(1.0, Osc::Sin(diff)));
        }
        // cos a sin b = ½sin(a+b) − ½sin(a−b)
        (Osc::Cos(_), Osc::Sin(_)) => {
            out.push(half(1.0, Osc::Sin(sum)));
            out.push(half(-1.0, Osc::Sin(diff)));
        }
    }
}

fn normalize(terms: Vec<Term>) -> Vec<Term> {
    let mut terms: Vec<Term> = terms.into_iter().filter_map(Term::canonical).collect();
    if terms.len() > 1 {
        let mut rates: Vec<f64> = terms.iter().map(|t| t.exprate).collect();
        snap_rates(&mut rates);
        let mut omegas: Vec<f64> = terms.iter().map(|t| t.osc.omega()).collect();
        snap_rates(&mut omegas);
        for ((t, a), w) in terms.iter_mut().zip(rates).zip(omegas) {
            t.exprate = a;
            t.osc = t.osc.with_omega(w);
        }
        terms.sort_by(|a, b| a.key_cmp(b));
    }
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    let mut i = 0;
    while i < terms.len() {
        let mut j = i + 1;
        while j < terms.len() && terms[j].key_cmp(&terms[i]) == Ordering::Equal {
            j += 1;
        }
        let group = &terms[i..j];
        let largest = group.iter().fold(0.0f64, |m, t| m.max(t.coeff.abs()));
        let sum = neumaier(group.iter().map(|t| t.coeff));
        if sum != 0.0 && sum.abs() > MERGE_TOL * largest {
            out.push(Term {
                coeff: sum,
                ..terms[i]
            });
        }
        i = j;
    }
    out
}

/// Compensated (Neumaier) summation.
pub fn neumaier<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$imp(self, rhs)
            }
        }
        impl $tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$imp(&self, &rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$imp(&self, rhs)
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$imp(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, k: f64) -> ScalarField {
        self.scale(k)
    }
}

impl Mul<f64> for ScalarField {
    type Output = ScalarField;
    fn mul(self, k: f64) -> ScalarField {
        self.scale(k)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.tpow {
            0 => {}
            1 => parts.push("t".into()),
            p => parts.push(format!("t^{p}")),
        }
        match self.qpow {
            0 => {}
            1 => parts.push("q".into()),
            m => parts.push(format!("q^{m}")),
        }
        if self.exprate != 0.0 {
            parts.push(format!("exp({}t)", self.exprate));
        }
        match self.osc {
            Osc::None => {}
            Osc::Cos(w) => parts.push(format!("cos({w}t)")),
            Osc::Sin(w) => parts.push(format!("sin({w}t)")),
        }
        if parts.is_empty() {
            write!(f, "{}", self.coeff)
        } else if self.coeff == 1.0 {
            write!(f, "{}", parts.join("·"))
        } else if self.coeff == -1.0 {
            write!(f, "-{}", parts.join("·"))
        } else {
            write!(f, "{}·{}", self.coeff, parts.join("·"))
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            if k == 0 {
                write!(f, "{s}")?;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {s}")?;
            }
        }
        Ok(())
    }
}
