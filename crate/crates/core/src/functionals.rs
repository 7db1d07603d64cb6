//! Curve functionals and their extension to rational weights.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::axis_walk::{element_length, power_costs, StepSet};
use crate::crossings::intersection_number;
use crate::elastic::{el_embedded, min_lift_lengths, GraphEmbedding};
use crate::error::{Error, Result};
use crate::hyperbolic::HolonomyRep;
use crate::words::{fmt_rational, ConjClass, MultiCurve, SurfacePresentation, Weight, Word};

/// Generators must produce every basis letter within this many factors.
pub const GENERATION_RADIUS: usize = 4;
/// Longest power word (in letters) a power sequence may visit.
pub const DEFAULT_MAX_LETTERS: usize = 8192;

/// An exact rational or a floating-point value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Real(f64),
}

impl Value {
    pub fn zero() -> Value {
        Value::Exact(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Value {
        Value::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Real(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Real(_) => None,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Real(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Real(self.to_f64() - other.to_f64()),
        }
    }

    pub fn scale(&self, w: &Weight) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a * w),
            Value::Real(x) => Value::Real(x * w.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn div_int(&self, d: &BigInt) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a / BigRational::from_integer(d.clone())),
            Value::Real(x) => Value::Real(x / d.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// `self ≤ other`, exactly when both are exact, else within `tol`.
    pub fn le(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a <= b,
            _ => self.to_f64() <= other.to_f64() + tol,
        }
    }

    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&fmt_rational(r)),
            Value::Real(x) => write!(f, "{}", format_real(*x)),
        }
    }
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 12 - 1 - x.abs().log10().floor() as i32;
    let s = if digits > 0 {
        format!("{:.*}", digits as usize, x)
    } else {
        format!("{:.0}", x)
    };
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Axioms a functional claims to satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomFlags {
    pub quasi_smoothing: bool,
    pub smoothing: bool,
    pub convex_union: bool,
    pub additive_union: bool,
    pub homogeneous: bool,
    pub stable: bool,
    pub strongly_stable: bool,
}

impl AxiomFlags {
    pub fn length_like() -> AxiomFlags {
        AxiomFlags {
            quasi_smoothing: true,
            smoothing: true,
            convex_union: true,
            additive_union: true,
            homogeneous: true,
            stable: true,
            strongly_stable: false,
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let pairs = [
            (self.quasi_smoothing, "quasi_smoothing"),
            (self.smoothing, "smoothing"),
            (self.convex_union, "convex_union"),
            (self.additive_union, "additive_union"),
            (self.homogeneous, "homogeneous"),
            (self.stable, "stable"),
            (self.strongly_stable, "strongly_stable"),
        ];
        for (on, name) in pairs {
            if on {
                v.push(name);
            }
        }
        v
    }
}

/// A real-valued function on multi-curves.
pub trait CurveFunctional: Send + Sync {
    fn id(&self) -> String;

    fn claims(&self) -> AxiomFlags;

    fn surface(&self) -> &Arc<SurfacePresentation>;

    /// Value on a multi-curve with integer weights.
    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value>;

    /// Value on any multi-curve; rational weights go through clearing
    /// denominators.
    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        if c.is_integral() {
            self.evaluate_integral(c)
        } else {
            weighted_eval(self, c)
        }
    }

    /// `[f(C), f(C²), …, f(Cⁿ)]` on honest powers.
    fn power_sequence(&self, c: &ConjClass, n: usize) -> Result<Vec<Value>> {
        (1..=n)
            .map(|k| self.evaluate_integral(&MultiCurve::single(self.surface().clone(), c.pow(k), Weight::from_integer(1.into()))))
            .collect()
    }
}

/// `f(Σ aᵢCᵢ) = f(Σ d·aᵢCᵢ)/d` for the least common denominator `d`.
pub fn weighted_eval<F: CurveFunctional + ?Sized>(f: &F, c: &MultiCurve) -> Result<Value> {
    if !f.claims().homogeneous {
        return Err(Error::NotHomogeneous(f.id()));
    }
    let d = c.common_denominator();
    let scaled = c.scale(&BigRational::from_integer(d.clone()));
    Ok(f.evaluate_integral(&scaled)?.div_int(&d))
}

fn check_surface(f: &dyn CurveFunctional, c: &MultiCurve) -> Result<()> {
    if c.surface().name != f.surface().name {
        return Err(Error::PresentationMismatch(c.surface().name.clone(), f.surface().name.clone()));
    }
    Ok(())
}

/// Conjugacy length with respect to an arbitrary finite generating set of a
/// free group.
pub struct WordLength {
    surface: Arc<SurfacePresentation>,
    gens: Vec<Word>,
    steps: StepSet,
    window: usize,
    max_letters: usize,
}

impl WordLength {
    pub fn new(surface: Arc<SurfacePresentation>, gens: Vec<Word>) -> Result<Self> {
        if !surface.is_free() {
            return Err(Error::Unsupported(format!("word length on the relator surface '{}'", surface.name)));
        }
        for g in &gens {
            surface.check_word(g)?;
        }
        let gens: Vec<Word> = gens.iter().map(|g| g.free_reduce()).filter(|g| !g.is_empty()).collect();
        let steps = StepSet::rose(&gens, &surface.generators);
        for c in &surface.generators {
            if element_length(&steps, &Word::from_letters(vec![*c as u8]), GENERATION_RADIUS).is_none() {
                return Err(Error::NotGenerating(GENERATION_RADIUS));
            }
        }
        let window = gens.iter().map(|g| g.len()).max().unwrap_or(1);
        Ok(WordLength {
            surface,
            gens,
            steps,
            window,
            max_letters: DEFAULT_MAX_LETTERS,
        })
    }

    /// Parses a comma-separated list such as `"a,aa,b"`.
    pub fn from_list(surface: Arc<SurfacePresentation>, list: &str) -> Result<Self> {
        let gens = list
            .split(',')
            .map(|s| surface.parse_word(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        WordLength::new(surface, gens)
    }

    pub fn with_max_letters(mut self, max_letters: usize) -> Self {
        self.max_letters = max_letters;
        self
    }

    pub fn generators(&self) -> &[Word] {
        &self.gens
    }

    pub fn max_letters(&self) -> usize {
        self.max_letters
    }

    /// Shortest expression of an element (not a class).
    pub fn element_length(&self, w: &Word, radius: usize) -> Option<usize> {
        element_length(&self.steps, w, radius)
    }

    fn budget(&self, c: &ConjClass, n: usize) -> Result<()> {
        let length = c.len() * n;
        if length > self.max_letters {
            return Err(Error::BudgetExceeded {
                length,
                budget: self.max_letters,
            });
        }
        Ok(())
    }

    fn costs(&self, c: &ConjClass, n: usize) -> Result<Vec<usize>> {
        self.budget(c, n)?;
        let k = c.power();
        let root = c.primitive_root();
        let raw = power_costs(&self.steps, root, n * k, self.window);
        let mut out: Vec<usize> = (1..=n)
            .map(|i| {
                let v = raw[i * k - 1];
                if v.is_finite() {
                    Ok(v as usize)
                } else {
                    Err(Error::NotGenerating(GENERATION_RADIUS))
                }
            })
            .collect::<Result<_>>()?;
        let wider = power_costs(&self.steps, root, k, self.window + 1)[k - 1];
        if wider < out[0] as f64 {
            out[0] = wider as usize;
        }
        Ok(out)
    }

    /// Conjugacy length of a class.
    pub fn class_length(&self, c: &ConjClass) -> Result<usize> {
        Ok(self.costs(c, 1)?[0])
    }

    /// True when widening the search window changes the value at `c`,
    /// i.e. the reported value may not be the true conjugacy length.
    pub fn window_limited(&self, c: &ConjClass) -> bool {
        let k = c.power();
        let root = c.primitive_root();
        let a = power_costs(&self.steps, root, k, self.window)[k - 1];
        let b = power_costs(&self.steps, root, k, self.window + 1)[k - 1];
        a != b
    }
}

impl CurveFunctional for WordLength {
    fn id(&self) -> String {
        let g: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        format!("wordlen({})", g.join(","))
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags {
            quasi_smoothing: true,
            convex_union: true,
            additive_union: true,
            homogeneous: true,
            ..AxiomFlags::default()
        }
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        &self.surface
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        check_surface(self, c)?;
        let mut total = Value::zero();
        for (k, w) in c.components() {
            total = total.add(&Value::from_int(self.class_length(k)? as i64).scale(w));
        }
        Ok(total)
    }

    fn power_sequence(&self, c: &ConjClass, n: usize) -> Result<Vec<Value>> {
        Ok(self.costs(c, n)?.into_iter().map(|v| Value::from_int(v as i64)).collect())
    }
}

/// Hyperbolic length `Σ wᵢ·2·acosh(|tr ρ(cᵢ)|/2)`.
pub struct HyperbolicLength {
    rep: Arc<HolonomyRep>,
}

impl HyperbolicLength {
    pub fn new(rep: Arc<HolonomyRep>) -> Self {
        HyperbolicLength { rep }
    }

    pub fn rep(&self) -> &Arc<HolonomyRep> {
        &self.rep
    }
}

impl CurveFunctional for HyperbolicLength {
    fn id(&self) -> String {
        "hyplen".into()
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags {
            strongly_stable: true,
            ..AxiomFlags::length_like()
        }
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        self.rep.presentation()
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        check_surface(self, c)?;
        let mut total = 0.0;
        for (k, w) in c.components() {
            total += w.to_f64().unwrap_or(f64::NAN) * self.rep.length(k.canonical())?;
        }
        Ok(Value::Real(total))
    }
}

type PairCache = Mutex<HashMap<(ConjClass, ConjClass), usize>>;

fn cached_intersection(rep: &HolonomyRep, cache: &PairCache, radius: usize, c: &ConjClass, d: &ConjClass) -> Result<usize> {
    let key = if c <= d { (c.clone(), d.clone()) } else { (d.clone(), c.clone()) };
    if let Some(v) = cache.lock().expect("cache").get(&key) {
        return Ok(*v);
    }
    let v = intersection_number(&key.0, &key.1, rep, radius)?;
    cache.lock().expect("cache").insert(key, v);
    Ok(v)
}

/// `f(C) = i(C, D)` for a fixed multi-curve `D`.
pub struct IntersectionWith {
    rep: Arc<HolonomyRep>,
    d: MultiCurve,
    radius: usize,
    cache: PairCache,
}

impl IntersectionWith {
    pub fn new(rep: Arc<HolonomyRep>, d: MultiCurve) -> Result<Self> {
        if d.surface().name != rep.presentation().name {
            return Err(Error::NoRepresentation(d.surface().name.clone()));
        }
        Ok(IntersectionWith {
            rep,
            d,
            radius: 4,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }
}

impl CurveFunctional for IntersectionWith {
    fn id(&self) -> String {
        format!("intersection({})", self.d)
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags::length_like()
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        self.rep.presentation()
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        check_surface(self, c)?;
        let mut total = Value::zero();
        for (k, w) in c.components() {
            for (m, v) in self.d.components() {
                let i = cached_intersection(&self.rep, &self.cache, self.radius, k, m)?;
                total = total.add(&Value::from_int(i as i64).scale(w).scale(v));
            }
        }
        Ok(total)
    }
}

/// `√i(C, C)` with the bilinear extension of the intersection form.
pub struct SqrtSelfIntersection {
    rep: Arc<HolonomyRep>,
    radius: usize,
    cache: PairCache,
}

impl SqrtSelfIntersection {
    pub fn new(rep: Arc<HolonomyRep>) -> Self {
        SqrtSelfIntersection {
            rep,
            radius: 4,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }

    /// `Σ_{i,j} wᵢwⱼ·i(Cᵢ, Cⱼ)`.
    pub fn form(&self, c: &MultiCurve) -> Result<Weight> {
        check_surface(self, c)?;
        let comps: Vec<(&ConjClass, &Weight)> = c.components().collect();
        let mut total = Weight::zero();
        for (k, wk) in &comps {
            for (m, wm) in &comps {
                let i = cached_intersection(&self.rep, &self.cache, self.radius, k, m)?;
                total += Weight::from_integer(i.into()) * *wk * *wm;
            }
        }
        Ok(total)
    }
}

impl CurveFunctional for SqrtSelfIntersection {
    fn id(&self) -> String {
        "sqrtself".into()
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags {
            quasi_smoothing: true,
            smoothing: true,
            homogeneous: true,
            stable: true,
            ..AxiomFlags::default()
        }
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        self.rep.presentation()
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        let q = self.form(c)?;
        Ok(Value::Real(q.to_f64().unwrap_or(f64::NAN).sqrt()))
    }
}

/// Length of the shortest multi-curve on an embedded graph mapping to `C`.
pub struct GraphLength {
    emb: Arc<GraphEmbedding>,
    window: usize,
}

impl GraphLength {
    pub fn new(emb: Arc<GraphEmbedding>) -> Result<Self> {
        if !emb.filling {
            return Err(Error::NotFilling(crate::elastic::FILLING_RADIUS));
        }
        let window = emb.edge_images.iter().map(|w| w.len()).max().unwrap_or(1).max(1);
        Ok(GraphLength { emb, window })
    }

    fn class_length(&self, k: &ConjClass) -> Result<f64> {
        let a = min_lift_lengths(k, &self.emb, 1, self.window)?[0];
        let b = min_lift_lengths(k, &self.emb, 1, self.window + 2)?[0];
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::Unstable {
                radius: self.window,
                at_radius: a as usize,
                next: self.window + 2,
                at_next: b as usize,
            });
        }
        if !a.is_finite() {
            return Err(Error::NoLiftFound(self.window));
        }
        Ok(a)
    }
}

impl CurveFunctional for GraphLength {
    fn id(&self) -> String {
        "graphlen".into()
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags::length_like()
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        &self.emb.presentation
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        check_surface(self, c)?;
        let mut total = 0.0;
        for (k, w) in c.components() {
            total += w.to_f64().unwrap_or(f64::NAN) * self.class_length(k)?;
        }
        Ok(Value::Real(total))
    }

    fn power_sequence(&self, c: &ConjClass, n: usize) -> Result<Vec<Value>> {
        Ok(min_lift_lengths(c, &self.emb, n, self.window)?
            .into_iter()
            .map(Value::Real)
            .collect())
    }
}

/// `√EL` through an elastic-graph embedding.
pub struct ElasticLength {
    emb: Arc<GraphEmbedding>,
    cutoff: usize,
}

impl ElasticLength {
    pub fn new(emb: Arc<GraphEmbedding>, cutoff: usize) -> Result<Self> {
        if !emb.filling {
            return Err(Error::NotFilling(crate::elastic::FILLING_RADIUS));
        }
        Ok(ElasticLength { emb, cutoff })
    }
}

impl CurveFunctional for ElasticLength {
    fn id(&self) -> String {
        "el".into()
    }

    fn claims(&self) -> AxiomFlags {
        AxiomFlags {
            quasi_smoothing: true,
            smoothing: true,
            convex_union: true,
            homogeneous: true,
            stable: true,
            ..AxiomFlags::default()
        }
    }

    fn surface(&self) -> &Arc<SurfacePresentation> {
        &self.emb.presentation
    }

    fn evaluate_integral(&self, c: &MultiCurve) -> Result<Value> {
        self.evaluate(c)
    }

    fn evaluate(&self, c: &MultiCurve) -> Result<Value> {
        check_surface(self, c)?;
        if c.is_empty() {
            return Ok(Value::Real(0.0));
        }
        let cutoff = self.cutoff.max(c.classes().map(|k| k.len()).max().unwrap_or(0));
        Ok(Value::Real(el_embedded(c, &self.emb, cutoff)?.sqrt_el))
    }
}
