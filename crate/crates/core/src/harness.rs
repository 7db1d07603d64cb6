//! Randomized checks of the curve-functional axioms on seeded corpora.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::counting::christoffel;
use crate::crossings::{enumerate_essential_crossings, unoriented_smoothings, DEFAULT_RADIUS};
use crate::error::{Error, Result};
use crate::functionals::{CurveFunctional, Value};
use crate::hyperbolic::HolonomyRep;
use crate::words::{inverse_letter, MultiCurve, SurfacePresentation, Weight, Word};

pub const FLOAT_TOL: f64 = 1e-9;
pub const MAX_MULTIPLE: usize = 4;

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub curves: Vec<MultiCurve>,
    pub max_word_length: usize,
    pub surface: Arc<SurfacePresentation>,
}

fn interesting(max_len: usize) -> Vec<String> {
    let mut v: Vec<String> = ["a", "b", "aa", "ab", "aB", "aab", "aaa", "abAB", "abab", "aabb", "aabAb"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for (p, q) in [(2, 5), (1, 4), (3, 7), (2, 7)] {
        v.push(christoffel(p, q).expect("coprime").to_string());
    }
    v.retain(|w| w.len() <= max_len);
    v
}

fn random_reduced(rng: &mut ChaCha8Rng, alphabet: &[u8], max_len: usize) -> Word {
    let len = rng.random_range(1..=max_len);
    let mut letters: Vec<u8> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = alphabet[rng.random_range(0..alphabet.len())];
        if letters.last() != Some(&inverse_letter(l)) {
            letters.push(l);
        }
    }
    Word::from_letters(letters)
}

impl Corpus {
    /// `samples` distinct multi-curves: the fixed list first, then random
    /// reduced words, one in four with a second component. The first `k`
    /// curves do not depend on `samples`.
    pub fn generate(surface: Arc<SurfacePresentation>, seed: u64, samples: usize, max_word_length: usize) -> Result<Corpus> {
        if max_word_length == 0 {
            return Err(Error::OutOfDomain(0.0, "maximal word length"));
        }
        let mut alphabet: Vec<u8> = surface.generators.iter().map(|&c| c as u8).collect();
        alphabet.extend(surface.generators.iter().map(|&c| (c as u8).to_ascii_uppercase()));
        let rep = HolonomyRep::builtin(&surface.name).ok();
        // classes with parabolic holonomy go around the cusp and have no length
        let peripheral = |c: &MultiCurve| {
            rep.as_ref()
                .is_some_and(|r| c.classes().any(|k| r.length(k.canonical()).is_err()))
        };
        let mut seen = std::collections::HashSet::new();
        let mut curves = Vec::new();
        let mut push = |c: MultiCurve, curves: &mut Vec<MultiCurve>| {
            if !c.is_empty() && curves.len() < samples && !peripheral(&c) && seen.insert(c.to_string()) {
                curves.push(c);
            }
        };
        for w in interesting(max_word_length) {
            if let Ok(c) = MultiCurve::from_word(surface.clone(), &w) {
                push(c, &mut curves);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attempts = 0usize;
        while curves.len() < samples {
            attempts += 1;
            if attempts > 100 * samples + 1000 {
                break;
            }
            let mut c = MultiCurve::empty(surface.clone());
            let parts = if rng.random_range(0..4) == 0 { 2 } else { 1 };
            for _ in 0..parts {
                let w = random_reduced(&mut rng, &alphabet, max_word_length);
                if let Ok(k) = surface.canonical_form(&w) {
                    c.insert(k, Weight::one());
                }
            }
            push(c, &mut curves);
        }
        Ok(Corpus {
            seed,
            curves,
            max_word_length,
            surface,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Smoothing,
    QuasiSmoothing,
    ConvexUnion,
    AdditiveUnion,
    Homogeneity,
    Stability,
    StrongStability,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Smoothing,
        Property::QuasiSmoothing,
        Property::ConvexUnion,
        Property::AdditiveUnion,
        Property::Homogeneity,
        Property::Stability,
        Property::StrongStability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Smoothing => "smoothing",
            Property::QuasiSmoothing => "quasi_smoothing",
            Property::ConvexUnion => "convex_union",
            Property::AdditiveUnion => "additive_union",
            Property::Homogeneity => "homogeneity",
            Property::Stability => "stability",
            Property::StrongStability => "strong_stability",
        }
    }

    pub fn claimed_by(self, f: &dyn CurveFunctional) -> bool {
        let c = f.claims();
        match self {
            Property::Smoothing => c.smoothing,
            Property::QuasiSmoothing => c.quasi_smoothing,
            Property::ConvexUnion => c.convex_union,
            Property::AdditiveUnion => c.additive_union,
            Property::Homogeneity => c.homogeneous,
            Property::Stability => c.stable,
            Property::StrongStability => c.strongly_stable,
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Property> {
        let p = match s {
            "smoothing" => Property::Smoothing,
            "quasi_smoothing" | "quasi-smoothing" => Property::QuasiSmoothing,
            "convex_union" | "convex-union" => Property::ConvexUnion,
            "additive_union" | "additive-union" => Property::AdditiveUnion,
            "homogeneity" | "homogeneous" => Property::Homogeneity,
            "stability" | "stable" => Property::Stability,
            "strong_stability" | "strongly_stable" | "strong-stability" => Property::StrongStability,
            _ => return Err(Error::Parse(format!("unknown property {s:?}"))),
        };
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    PassWithR,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub functional: String,
    pub property: Property,
    pub claimed: bool,
    pub verdict: Verdict,
    pub samples: usize,
    pub seed: u64,
    pub max_word_length: usize,
    pub tolerance: String,
    pub checks: usize,
    /// Smoothings whose result contains a cusp class.
    #[serde(skip_serializing_if = "is_zero")]
    pub skipped: usize,
    /// Estimated quasi-smoothing constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_hat: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl FunctionalReport {
    fn new(f: &dyn CurveFunctional, property: Property, corpus: &Corpus) -> Self {
        FunctionalReport {
            functional: f.id(),
            property,
            claimed: property.claimed_by(f),
            verdict: Verdict::Pass,
            samples: corpus.curves.len(),
            seed: corpus.seed,
            max_word_length: corpus.max_word_length,
            tolerance: "exact".into(),
            checks: 0,
            skipped: 0,
            r_hat: None,
            witness: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

#[derive(Default)]
struct Deficits {
    checks: usize,
    skipped: usize,
    real: bool,
    best: Option<(Value, serde_json::Value)>,
}

/// Largest smoothing deficit `(f(C′) − f(C))/w` over every crossing of every
/// corpus curve and both smoothings, with its witness.
fn deficits(f: &dyn CurveFunctional, corpus: &Corpus, rep: &HolonomyRep, radius: usize) -> Result<Deficits> {
    let per_curve: Vec<Result<Deficits>> = corpus
        .curves
        .par_iter()
        .map(|c| {
            let base = f.evaluate(c)?;
            let mut real = matches!(base, Value::Real(_));
            let mut best: Option<(Value, serde_json::Value)> = None;
            let mut checks = 0;
            let mut skipped = 0;
            for x in enumerate_essential_crossings(c, rep, radius)? {
                let (oriented, flipped) = unoriented_smoothings(c, &x)?;
                for (kind, s) in [("oriented", oriented), ("flipped", flipped)] {
                    let v = match f.evaluate(&s.result) {
                        Err(Error::NotHyperbolic(_)) => {
                            skipped += 1;
                            continue;
                        }
                        v => v?,
                    };
                    real |= matches!(v, Value::Real(_));
                    let d = v.sub(&base).scale(&(Weight::one() / &s.weight_used));
                    checks += 1;
                    if best.as_ref().is_none_or(|(b, _)| !d.le(b, 0.0)) {
                        let w = json!({
                            "curve": c.to_string(),
                            "crossing": x.to_string(),
                            "smoothing": kind,
                            "result": s.result.to_string(),
                            "before": base.to_string(),
                            "after": v.to_string(),
                            "deficit": d.to_string(),
                        });
                        best = Some((d, w));
                    }
                }
            }
            Ok(Deficits { checks, skipped, real, best })
        })
        .collect();
    let mut total = Deficits::default();
    for r in per_curve {
        let d = r?;
        total.checks += d.checks;
        total.skipped += d.skipped;
        total.real |= d.real;
        if let Some((v, w)) = d.best {
            if total.best.as_ref().is_none_or(|(bv, _)| !v.le(bv, 0.0)) {
                total.best = Some((v, w));
            }
        }
    }
    Ok(total)
}

/// Smoothing (`R = 0`) or the estimate `R̂` for quasi-smoothing.
pub fn check_quasi_smoothing(f: &dyn CurveFunctional, corpus: &Corpus, rep: &HolonomyRep, radius: usize, strict: bool) -> Result<FunctionalReport> {
    let property = if strict { Property::Smoothing } else { Property::QuasiSmoothing };
    let mut report = FunctionalReport::new(f, property, corpus);
    let Deficits { checks, skipped, real, best } = deficits(f, corpus, rep, radius)?;
    report.checks = checks;
    report.skipped = skipped;
    if real {
        report.tolerance = format!("{FLOAT_TOL:e}");
    }
    let max = best.as_ref().map(|(d, _)| d.clone()).unwrap_or_else(Value::zero);
    let r_hat = if max.le(&Value::zero(), 0.0) { Value::zero() } else { max.clone() };
    report.r_hat = Some(r_hat.to_string());
    if strict {
        if max.le(&Value::zero(), FLOAT_TOL) {
            report.verdict = Verdict::Pass;
        } else {
            report.verdict = Verdict::Fail;
            report.witness = best.map(|(_, w)| w);
        }
    } else {
        report.verdict = Verdict::PassWithR;
        report.witness = best.map(|(_, w)| w);
    }
    Ok(report)
}

pub fn check_smoothing(f: &dyn CurveFunctional, corpus: &Corpus, rep: &HolonomyRep, radius: usize) -> Result<FunctionalReport> {
    check_quasi_smoothing(f, corpus, rep, radius, true)
}

/// Corpus index pairs: all pairs among the first few curves, then seeded
/// random pairs, `corpus.len()` in total.
fn pairs(corpus: &Corpus) -> Vec<(usize, usize)> {
    let n = corpus.curves.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let head = n.min(6);
    for i in 0..head {
        for j in i + 1..head {
            out.push((i, j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(corpus.seed ^ 0x9e37_79b9_7f4a_7c15);
    while out.len() < n {
        out.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    out
}

/// First item in order whose check returns a witness.
fn first_failure<T, F>(items: &[T], check: F) -> Result<(usize, bool, Option<serde_json::Value>)>
where
    T: Sync,
    F: Fn(&T) -> Result<(usize, bool, Option<serde_json::Value>)> + Sync + Send,
{
    let results: Vec<_> = items.par_iter().map(check).collect();
    let mut checks = 0;
    let mut real = false;
    for r in results {
        let (n, re, w) = r?;
        checks += n;
        real |= re;
        if w.is_some() {
            return Ok((checks, real, w));
        }
    }
    Ok((checks, real, None))
}

fn is_real(vs: &[&Value]) -> bool {
    vs.iter().any(|v| matches!(v, Value::Real(_)))
}

fn finish(mut report: FunctionalReport, (checks, real, witness): (usize, bool, Option<serde_json::Value>)) -> FunctionalReport {
    report.checks = checks;
    if real {
        report.tolerance = format!("{FLOAT_TOL:e}");
    }
    report.verdict = if witness.is_some() { Verdict::Fail } else { Verdict::Pass };
    report.witness = witness;
    report
}

/// `f(C₁ ∪ C₂) ≤ f(C₁) + f(C₂)`, or with equality for additive union.
pub fn check_union(f: &dyn CurveFunctional, corpus: &Corpus, additive: bool) -> Result<FunctionalReport> {
    let property = if additive { Property::AdditiveUnion } else { Property::ConvexUnion };
    let report = FunctionalReport::new(f, property, corpus);
    let ps = pairs(corpus);
    let out = first_failure(&ps, |&(i, j)| {
        let (c1, c2) = (&corpus.curves[i], &corpus.curves[j]);
        let u = c1.union(c2)?;
        let (a, b, fu) = (f.evaluate(c1)?, f.evaluate(c2)?, f.evaluate(&u)?);
        let sum = a.add(&b);
        let ok = if additive { fu.approx_eq(&sum, FLOAT_TOL) } else { fu.le(&sum, FLOAT_TOL) };
        let w = (!ok).then(|| {
            json!({
                "c1": c1.to_string(),
                "c2": c2.to_string(),
                "f_union": fu.to_string(),
                "f_c1": a.to_string(),
                "f_c2": b.to_string(),
                "sum": sum.to_string(),
            })
        });
        Ok((1, is_real(&[&a, &b, &fu]), w))
    })?;
    Ok(finish(report, out))
}

pub fn check_convex_union(f: &dyn CurveFunctional, corpus: &Corpus) -> Result<FunctionalReport> {
    check_union(f, corpus, false)
}

fn multiple(c: &MultiCurve, n: usize) -> MultiCurve {
    c.scale(&Weight::from_integer(BigInt::from(n)))
}

/// `f(nC) = n·f(C)` for `n = 2..=max_n`.
pub fn check_homogeneity(f: &dyn CurveFunctional, corpus: &Corpus, max_n: usize) -> Result<FunctionalReport> {
    let report = FunctionalReport::new(f, Property::Homogeneity, corpus);
    let out = first_failure(&corpus.curves, |c| {
        let base = f.evaluate(c)?;
        let mut real = is_real(&[&base]);
        for n in 2..=max_n {
            let v = f.evaluate(&multiple(c, n))?;
            real |= is_real(&[&v]);
            let want = base.scale(&Weight::from_integer(BigInt::from(n)));
            if !v.approx_eq(&want, FLOAT_TOL) {
                let w = json!({"curve": c.to_string(), "n": n, "f_nc": v.to_string(), "n_f_c": want.to_string()});
                return Ok((n - 1, real, Some(w)));
            }
        }
        Ok((max_n.saturating_sub(1), real, None))
    })?;
    Ok(finish(report, out))
}

/// `f(Cⁿ) = f(nC)` for `n = 2..=max_n`.
pub fn check_stability(f: &dyn CurveFunctional, corpus: &Corpus, max_n: usize) -> Result<FunctionalReport> {
    let report = FunctionalReport::new(f, Property::Stability, corpus);
    let out = first_failure(&corpus.curves, |c| {
        let mut real = false;
        for n in 2..=max_n {
            let (pw, mu) = (f.evaluate(&c.power(n))?, f.evaluate(&multiple(c, n))?);
            real |= is_real(&[&pw, &mu]);
            if !pw.approx_eq(&mu, FLOAT_TOL) {
                let w = json!({"curve": c.to_string(), "n": n, "f_power": pw.to_string(), "f_multiple": mu.to_string()});
                return Ok((n - 1, real, Some(w)));
            }
        }
        Ok((max_n.saturating_sub(1), real, None))
    })?;
    Ok(finish(report, out))
}

/// `f(D ∪ Cⁿ) = f(D ∪ nC)` over corpus pairs and `n = 2..=max_n`.
pub fn check_strong_stability(f: &dyn CurveFunctional, corpus: &Corpus, max_n: usize) -> Result<FunctionalReport> {
    let report = FunctionalReport::new(f, Property::StrongStability, corpus);
    let ps = pairs(corpus);
    let out = first_failure(&ps, |&(i, j)| {
        let (c, d) = (&corpus.curves[i], &corpus.curves[j]);
        let mut real = false;
        for n in 2..=max_n {
            let pw = f.evaluate(&d.union(&c.power(n))?)?;
            let mu = f.evaluate(&d.union(&multiple(c, n))?)?;
            real |= is_real(&[&pw, &mu]);
            if !pw.approx_eq(&mu, FLOAT_TOL) {
                let w = json!({
                    "curve": c.to_string(),
                    "d": d.to_string(),
                    "n": n,
                    "f_power": pw.to_string(),
                    "f_multiple": mu.to_string(),
                });
                return Ok((n - 1, real, Some(w)));
            }
        }
        Ok((max_n.saturating_sub(1), real, None))
    })?;
    Ok(finish(report, out))
}

/// Runs one property check; crossings use `rep` when given, else the
/// built-in representation of the functional's surface.
pub fn check(f: &dyn CurveFunctional, property: Property, corpus: &Corpus, rep: Option<&HolonomyRep>) -> Result<FunctionalReport> {
    match property {
        Property::Smoothing | Property::QuasiSmoothing => {
            let owned;
            let rep = match rep {
                Some(r) => r,
                None => {
                    owned = HolonomyRep::builtin(&f.surface().name)?;
                    &owned
                }
            };
            check_quasi_smoothing(f, corpus, rep, DEFAULT_RADIUS, property == Property::Smoothing)
        }
        Property::ConvexUnion => check_union(f, corpus, false),
        Property::AdditiveUnion => check_union(f, corpus, true),
        Property::Homogeneity => check_homogeneity(f, corpus, MAX_MULTIPLE),
        Property::Stability => check_stability(f, corpus, MAX_MULTIPLE),
        Property::StrongStability => check_strong_stability(f, corpus, MAX_MULTIPLE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{HyperbolicLength, IntersectionWith, SqrtSelfIntersection, WordLength};
    use crate::stabilize::stable_functional;

    fn pt() -> Arc<SurfacePresentation> {
        SurfacePresentation::builtin("pt").unwrap()
    }

    fn rep() -> Arc<HolonomyRep> {
        Arc::new(HolonomyRep::builtin_pt())
    }

    #[test]
    fn corpus_is_reproducible_and_prefix_stable() {
        let a = Corpus::generate(pt(), 7, 40, 8).unwrap();
        let b = Corpus::generate(pt(), 7, 40, 8).unwrap();
        let c = Corpus::generate(pt(), 7, 60, 8).unwrap();
        let s = |k: &Corpus| k.curves.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(s(&a), s(&b));
        assert_eq!(s(&a)[..], s(&c)[..40]);
        assert_eq!(a.curves.len(), 40);
        assert_eq!(a.curves[0].to_string(), "a");
    }

    #[test]
    fn raw_word_length_is_unstable_at_a_squared() {
        let f = WordLength::from_list(pt(), "a,aa,b").unwrap();
        let corpus = Corpus::generate(pt(), 1, 20, 6).unwrap();
        let r = check_stability(&f, &corpus, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert_eq!(w["curve"], "a");
        assert_eq!(w["n"], 2);
        assert_eq!(w["f_power"], "1");
        assert_eq!(w["f_multiple"], "2");
        assert_eq!(check_homogeneity(&f, &corpus, 4).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn stabilized_word_length_is_stable() {
        let f = stable_functional(Arc::new(WordLength::from_list(pt(), "a,aa,b").unwrap())).unwrap();
        let corpus = Corpus::generate(pt(), 2, 15, 5).unwrap();
        assert_eq!(check_stability(&f, &corpus, 3).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_homogeneity(&f, &corpus, 3).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sqrt_self_intersection_fails_convex_union() {
        let f = SqrtSelfIntersection::new(rep());
        let corpus = Corpus::generate(pt(), 42, 12, 6).unwrap();
        let r = check_convex_union(&f, &corpus).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert_eq!((w["c1"].as_str(), w["c2"].as_str()), (Some("a"), Some("b")));
        assert_eq!(w["sum"], "0");
        let v: f64 = w["f_union"].as_str().unwrap().parse().unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn hyperbolic_length_smooths_and_adds() {
        let f = HyperbolicLength::new(rep());
        let corpus = Corpus::generate(pt(), 3, 25, 6).unwrap();
        let r = check_smoothing(&f, &corpus, &rep(), 4).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witness);
        assert!(r.checks > 0);
        assert_eq!(check_union(&f, &corpus, true).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_stability(&f, &corpus, 4).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn intersection_with_b_smooths() {
        let d = MultiCurve::parse(pt(), "b").unwrap();
        let f = IntersectionWith::new(rep(), d).unwrap();
        let corpus = Corpus::generate(pt(), 4, 15, 5).unwrap();
        let r = check_smoothing(&f, &corpus, &rep(), 4).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witness);
    }

    #[test]
    fn word_length_needs_positive_constant() {
        let f = WordLength::from_list(pt(), "a,aa,b").unwrap();
        let corpus = Corpus::generate(pt(), 5, 30, 6).unwrap();
        let q = check_quasi_smoothing(&f, &corpus, &rep(), 4, false).unwrap();
        assert_eq!(q.verdict, Verdict::PassWithR);
        let s = check_smoothing(&f, &corpus, &rep(), 4).unwrap();
        assert_eq!(s.verdict, Verdict::Fail);
        assert_eq!(q.r_hat, s.r_hat);
        assert!(s.witness.is_some());
    }
}
