//! Stabilized functionals `‖f‖(C) = lim f(Cⁿ)/n`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{AxiomFlags, CurveFunctional, Value, DEFAULT_MAX_LETTERS};
use crate::words::{ConjClass, MultiCurve, SurfacePresentation, Weight};

pub const DEFAULT_N: usize = 64;
pub const MIN_N: usize = 8;
const TAIL: usize = 8;
const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StableEstimate {
    pub value: Value,
    pub exact: Option<BigRational>,
    pub upper_bounds: Vec<Value>,
    pub tail_detected: bool,
    pub period: Option<usize>,
}

#[derive(Serialize)]
struct EstimateJson {
    value: String,
    exact: Option<String>,
    tail_detected: bool,
    period: Option<usize>,
    upper_bounds: Vec<String>,
}

impl StableEstimate {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(EstimateJson {
            value: self.value.to_string(),
            exact: self.exact.as_ref().map(crate::words::fmt_rational),
            tail_detected: self.tail_detected,
            period: self.period,
            upper_bounds: self.upper_bounds.iter().map(|v| v.to_string()).collect(),
        })
        .expect("serializable")
    }
}

/// `[f(C), …, f(Cⁿ)]`, refusing words longer than `max_letters`.
pub fn power_sequence(f: &dyn CurveFunctional, c: &ConjClass, n: usize, max_letters: usize) -> Result<Vec<Value>> {
    if n < MIN_N {
        return Err(Error::OutOfDomain(n as f64, "number of powers (at least 8)"));
    }
    let length = n * c.len();
    if length > max_letters {
        return Err(Error::BudgetExceeded {
            length,
            budget: max_letters,
        });
    }
    f.power_sequence(c, n)
}

/// Smallest period `π ≤ 4` with `a_{n+π} − a_n = π·s` over the last eight
/// samples, and the slope `s`.
pub fn detect_tail(seq: &[Value]) -> Option<(usize, Value)> {
    let n = seq.len();
    for period in 1..=4usize {
        if n < TAIL + period {
            continue;
        }
        let diffs: Vec<Value> = (n - TAIL..n).map(|i| seq[i].sub(&seq[i - period])).collect();
        let first = &diffs[0];
        if diffs.iter().all(|d| d.approx_eq(first, FLOAT_TOL)) {
            let p = BigInt::from(period as u64);
            return Some((period, first.div_int(&p)));
        }
    }
    None
}

/// Fekete estimate of `lim f(Cⁿ)/n` from the first `n` powers.
pub fn stable_value(f: &dyn CurveFunctional, c: &ConjClass, n: usize) -> Result<StableEstimate> {
    stable_value_with_budget(f, c, n, DEFAULT_MAX_LETTERS)
}

pub fn stable_value_with_budget(f: &dyn CurveFunctional, c: &ConjClass, n: usize, max_letters: usize) -> Result<StableEstimate> {
    let claims = f.claims();
    if !claims.quasi_smoothing {
        return Err(Error::MissingAxiom(f.id(), "quasi_smoothing"));
    }
    if !claims.convex_union {
        return Err(Error::MissingAxiom(f.id(), "convex_union"));
    }
    let seq = power_sequence(f, c, n, max_letters)?;
    let upper_bounds: Vec<Value> = seq
        .iter()
        .enumerate()
        .map(|(i, v)| v.div_int(&BigInt::from(i as u64 + 1)))
        .collect();
    let mut inf = upper_bounds[0].clone();
    for u in &upper_bounds[1..] {
        if !inf.le(u, 0.0) {
            inf = u.clone();
        }
    }
    let tail = detect_tail(&seq);
    let (value, exact) = match &tail {
        Some((_, Value::Exact(s))) if Value::Exact(s.clone()).le(&inf, 0.0) => (Value::Exact(s.clone()), Some(s.clone())),
        _ => (inf, None),
    };
    Ok(StableEstimate {
        value,
        exact,
        upper_bounds,
        tail_detected: tail.is_some(),
        period: tail.map(|t| t.0),
    })
}

/// `‖f‖`, evaluated componentwise and combined by weighted union.
pub struct StableFunctional {
    inner: Arc<dyn CurveFunctional>,
    n: usize,
    max_letters: usize,
    cache: Mutex<HashMap<ConjClass, StableEstimate>>,
}

pub fn stable_functional(f: Arc<dyn CurveFunctional>) -> Result<StableFunctional> {
    StableFunctional::new(f, DEFAULT_N)
}

impl StableFunctional {
    pub fn new(inner: Arc<dyn CurveFunctional>, n: usize) -> Result<Self> {
        let claims = inner.claims();
        if !claims.quasi_smoothing {
            return Err(Error::MissingAxiom(inner.id(), "quasi_smoothing"));
        }
        if !claims.convex_union {
            return Err(Error::MissingAxiom(inner.id(), "convex_union"));
        }
        if n < MIN_N {
            return Err(Error::OutOfDomain(n as f64, "number of powers (at least 8)"));
        }
        Ok(StableFunctional {
            inner,
            n,
            max_letters: DEFAULT_MAX_LETTERS,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_max_letters(mut self, max_letters: usize) -> Self {
        self.max_letters = max_letters;
        self
    }

    pub fn inner(&self) -> &Arc<dyn CurveFunctional> {
        &self.inner
    }

    pub fn estimate(&self, c: &ConjClass) -> Result<StableEstimate> {
        if let Some(e) = self.cache.lock().expect("cache").get(c) {
            return Ok(e.clone());
        }
        let e = stable_value_with_budget(self.inner.as_ref(), c, self.n, self.max_letters)?;
        self.cache.lock().expect("cache").insert(c.clone(), e.clone());
        Ok(e)
    }
}

impl CurveFunctional for StableFunctional {
    fn id(&self) -> String {
        format!("stable-{}", self.inner.id())
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags {
            quasi_smoothing: true,
            convex_union: true,
            homogeneous: true,
            stable: true,
            strongly_stable: true,
            ..AxiomFlags::default()
        }
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        self.inner.surface()
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        let mut total = Value::Exact(Weight::zero());
        for (k, w) in c.components() {
            total = total.add(&self.estimate(k)?.value.scale(w));
        }
        Ok(total)
    }
}

/// Weighted stable value of the train-track curve `C(p/q)`: the Christoffel
/// word with `p` letters `b` and `q − p` letters `a`, with weight `1/q`.
pub fn sawtooth_point(f: &dyn CurveFunctional, p: u64, q: u64, n: usize) -> Result<StableEstimate> {
    let word = crate::counting::christoffel(p, q)?;
    let c = f.surface().canonical_form(&word)?;
    let est = stable_value(f, &c, n)?;
    let w = Weight::new(BigInt::from(1), BigInt::from(q));
    Ok(StableEstimate {
        value: est.value.scale(&w),
        exact: est.exact.map(|s| s * &w),
        upper_bounds: est.upper_bounds.iter().map(|u| u.scale(&w)).collect(),
        tail_detected: est.tail_detected,
        period: est.period,
    })
}
