//! Essential crossings between closed curves, their smoothings, and
//! geometric intersection numbers.
//!
//! Two lifts cross essentially when their axes link on the circle at
//! infinity. Candidate conjugators come from overlaps of the tree axes of
//! the two words (`u[..i]·v[..j]⁻¹`), which covers every double coset with
//! linked axes for a free basis carried by a ribbon graph; a ball of
//! conjugators of bounded length is added on top so that the count at
//! radius `r` can be compared with the count at `r + 2`. Double cosets are
//! told apart by where the crossing sits on each closed geodesic, so two
//! conjugators give the same crossing iff their positions agree modulo the
//! two translation lengths.

use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::{linked, trace_length, Axis, HolonomyRep, IdealPoint, MobiusTransform};
use crate::words::{ball, canonical_form, fmt_rational, ConjClass, MultiCurve, Weight, Word};

pub const DEFAULT_RADIUS: usize = 6;
const KEY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CrossingKind {
    LinkedAxes,
    PowerType,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub kind: CrossingKind,
    pub comp_a: ConjClass,
    pub comp_b: ConjClass,
    /// Double-coset representative `g`; for power crossings the root power `δᵐ`.
    pub conjugator: Word,
    /// `(m, n)` for a power crossing on `δⁿ`.
    pub split: Option<(usize, usize)>,
    /// Cut points in `comp_a`'s canonical word for a self-crossing.
    pub positions: Option<(usize, usize)>,
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CrossingKind::LinkedAxes => write!(f, "linked({}, {}; g={})", self.comp_a, self.comp_b, self.conjugator),
            CrossingKind::PowerType => {
                let (m, n) = self.split.unwrap_or((0, 0));
                write!(f, "power({}; m={m}, n={n})", self.comp_a)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingResult {
    pub result: MultiCurve,
    pub weight_used: Weight,
    pub delta_components: String,
}

/// Geometric data attached to one closed geodesic.
struct Geodesic {
    word: Word,
    root: Word,
    axis: Axis,
    straighten: MobiusTransform,
    length: f64,
}

fn geodesic(rep: &HolonomyRep, c: &ConjClass) -> Result<Option<Geodesic>> {
    let m = rep.holonomy(c.canonical())?;
    let length = match trace_length(&m) {
        Ok(l) => l,
        // peripheral classes have no axis and cross nothing
        Err(Error::NotHyperbolic(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let axis = crate::hyperbolic::axis_endpoints(&m)?;
    Ok(Some(Geodesic {
        word: c.canonical().clone(),
        root: c.primitive_root().clone(),
        axis,
        straighten: axis.straightening_map(),
        length,
    }))
}

/// Position (log-height after straightening) where `other` crosses `g`'s axis.
fn crossing_height(g: &Geodesic, other: &Axis) -> Result<f64> {
    let y1 = g.straighten.apply(other.attracting);
    let y2 = g.straighten.apply(other.repelling);
    match (y1, y2) {
        (IdealPoint::Real(y1), IdealPoint::Real(y2)) if y1 * y2 < 0.0 => Ok(0.5 * (-y1 * y2).ln()),
        _ => Err(Error::DegenerateConfiguration(0.0)),
    }
}

fn wrap(x: f64, period: f64) -> f64 {
    let v = x.rem_euclid(period);
    if period - v < KEY_TOL / 2.0 {
        0.0
    } else {
        v
    }
}

fn circ_close(x: f64, y: f64, period: f64) -> bool {
    let d = (x - y).abs();
    d.min(period - d) < KEY_TOL
}

#[derive(Clone, Debug)]
struct Coset {
    g: Word,
    s: f64,
    t: f64,
    positions: Option<(usize, usize)>,
}

/// Ball of conjugators with holonomy, shared across pairs.
struct Candidates {
    ball: Vec<(Word, MobiusTransform)>,
}

impl Candidates {
    fn new(rep: &HolonomyRep, radius: usize) -> Result<Self> {
        let gens = &rep.presentation().generators;
        let ball = ball(gens, radius)
            .into_iter()
            .map(|w| {
                let m = rep.holonomy(&w)?;
                Ok((w, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Candidates { ball })
    }
}

fn free_eq(a: &Word, b: &Word) -> bool {
    a.free_reduce() == b.free_reduce()
}

// The representatives uᵏ·g·vˡ with |k|, |l| ≤ 1, shortest first.
fn coset_reps(g: &Word, u: &Word, v: &Word) -> Vec<Word> {
    let lefts = [Word::new(), u.inverse(), u.clone()];
    let rights = [Word::new(), v.clone(), v.inverse()];
    let mut reps: Vec<Word> = Vec::new();
    for l in &lefts {
        for r in &rights {
            let w = l.concat(g).concat(r).free_reduce();
            if !reps.contains(&w) {
                reps.push(w);
            }
        }
    }
    reps.sort_by_key(|w| w.len());
    reps
}

/// Ordered double cosets `⟨u⟩ g ⟨v⟩` whose axes link, deduplicated by the
/// crossing position on both geodesics.
fn linked_cosets(rep: &HolonomyRep, a: &Geodesic, b: &Geodesic, cands: &Candidates) -> Result<Vec<Coset>> {
    let mut found: Vec<Coset> = Vec::new();
    let root_a_inv = a.root.inverse();
    // Ok(false) when the endpoints are numerically too close to decide
    let mut consider = |g: &Word, h: &MobiusTransform, positions: Option<(usize, usize)>| -> Result<bool> {
        let conj = b.root.conjugate_by(g);
        if free_eq(&conj, &a.root) || free_eq(&conj, &root_a_inv) {
            return Ok(true);
        }
        let image = b.axis.image(h);
        let is_linked = match linked(&a.axis, &image) {
            Ok(x) => x,
            Err(Error::DegenerateConfiguration(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        if !is_linked {
            return Ok(true);
        }
        let s = wrap(crossing_height(a, &image)?, a.length);
        let back = a.axis.image(&h.inverse());
        let t = wrap(crossing_height(b, &back)?, b.length);
        if found
            .iter()
            .any(|c| circ_close(c.s, s, a.length) && circ_close(c.t, t, b.length))
        {
            return Ok(true);
        }
        found.push(Coset {
            g: g.clone(),
            s,
            t,
            positions,
        });
        Ok(true)
    };
    let (u, v) = (&a.word, &b.word);
    for i in 0..u.len() {
        for j in 0..v.len() {
            // every uᵏ·u[..i]·v[..j]⁻¹·vˡ names the same crossing; short ones
            // keep the holonomy well conditioned
            let mut decided = false;
            for g in coset_reps(&u.prefix(i).concat(&v.prefix(j).inverse()), u, v) {
                let h = rep.holonomy(&g)?;
                if consider(&g, &h, Some((i, j)))? {
                    decided = true;
                    break;
                }
            }
            if !decided {
                return Err(Error::DegenerateConfiguration(0.0));
            }
        }
    }
    for (g, h) in &cands.ball {
        consider(g, h, None)?;
    }
    Ok(found)
}

fn require_rep(c: &MultiCurve, rep: &HolonomyRep) -> Result<()> {
    if c.surface().name != rep.presentation().name {
        return Err(Error::NoRepresentation(c.surface().name.clone()));
    }
    Ok(())
}

/// Lists the essential crossings of `c`: one per crossing point between
/// distinct components, one per unordered self-crossing, and the power
/// crossings `m = 1..n-1` of each component `δⁿ`.
pub fn enumerate_essential_crossings(c: &MultiCurve, rep: &HolonomyRep, radius: usize) -> Result<Vec<Crossing>> {
    require_rep(c, rep)?;
    let cands = Candidates::new(rep, radius)?;
    let comps: Vec<ConjClass> = c.classes().cloned().collect();
    let geos = comps
        .iter()
        .map(|k| geodesic(rep, k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (ia, ca) in comps.iter().enumerate() {
        if let Some(ga) = &geos[ia] {
            let cosets = linked_cosets(rep, ga, ga, &cands)?;
            let mut kept: Vec<&Coset> = Vec::new();
            for k in &cosets {
                let mirrored = kept
                    .iter()
                    .any(|o| circ_close(o.s, k.t, ga.length) && circ_close(o.t, k.s, ga.length));
                if !mirrored {
                    kept.push(k);
                }
            }
            for k in kept {
                out.push(Crossing {
                    kind: CrossingKind::LinkedAxes,
                    comp_a: ca.clone(),
                    comp_b: ca.clone(),
                    conjugator: k.g.clone(),
                    split: None,
                    positions: k.positions,
                });
            }
        }
        let n = ca.power();
        for m in 1..n {
            out.push(Crossing {
                kind: CrossingKind::PowerType,
                comp_a: ca.clone(),
                comp_b: ca.clone(),
                conjugator: ca.primitive_root().repeat(m),
                split: Some((m, n)),
                positions: None,
            });
        }
        for (ib, cb) in comps.iter().enumerate().skip(ia + 1) {
            if *cb == ca.reverse() {
                continue;
            }
            if let (Some(ga), Some(gb)) = (&geos[ia], &geos[ib]) {
                for k in linked_cosets(rep, ga, gb, &cands)? {
                    out.push(Crossing {
                        kind: CrossingKind::LinkedAxes,
                        comp_a: ca.clone(),
                        comp_b: cb.clone(),
                        conjugator: k.g,
                        split: None,
                        positions: None,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn count_linked(c: &ConjClass, d: &ConjClass, rep: &HolonomyRep, radius: usize) -> Result<usize> {
    let cands = Candidates::new(rep, radius)?;
    match (geodesic(rep, c)?, geodesic(rep, d)?) {
        (Some(a), Some(b)) => Ok(linked_cosets(rep, &a, &b, &cands)?.len()),
        _ => Ok(0),
    }
}

fn check_class(rep: &HolonomyRep, c: &ConjClass) -> Result<()> {
    rep.presentation().check_word(c.canonical())
}

/// Number of linked double cosets `⟨c⟩\π₁/⟨d⟩`, certified by equal counts
/// at `radius` and `radius + 2`. For `c = d` this counts every self-crossing
/// twice.
pub fn intersection_number(c: &ConjClass, d: &ConjClass, rep: &HolonomyRep, radius: usize) -> Result<usize> {
    check_class(rep, c)?;
    check_class(rep, d)?;
    let at_radius = count_linked(c, d, rep, radius)?;
    let at_next = count_linked(c, d, rep, radius + 2)?;
    if at_radius != at_next {
        return Err(Error::Unstable {
            radius,
            at_radius,
            next: radius + 2,
            at_next,
        });
    }
    Ok(at_radius)
}

/// Unordered essential self-crossings: linked self-cosets counted once per
/// point, plus `n - 1` power crossings for `c = δⁿ`.
pub fn self_intersection(c: &ConjClass, rep: &HolonomyRep, radius: usize) -> Result<usize> {
    let linked = intersection_number(c, c, rep, radius)?;
    Ok(linked / 2 + c.power() - 1)
}

fn class_of(w: &Word) -> Option<ConjClass> {
    canonical_form(w).ok()
}

/// Splits the cyclic word at `i` and `j` into arcs `[i, j)` and `[j, i)`.
fn cut(word: &Word, i: usize, j: usize) -> (Word, Word) {
    let n = word.len();
    let r = word.rotate(i);
    let k = (j + n - i) % n;
    let x = Word::from_letters(r.letters()[..k].to_vec());
    let y = Word::from_letters(r.letters()[k..].to_vec());
    (x, y)
}

fn validate(c: &MultiCurve, x: &Crossing) -> Result<Weight> {
    let wa = c
        .weight_of(&x.comp_a)
        .ok_or_else(|| Error::InvalidCrossing(format!("no component {}", x.comp_a)))?;
    let wb = c
        .weight_of(&x.comp_b)
        .ok_or_else(|| Error::InvalidCrossing(format!("no component {}", x.comp_b)))?;
    if wa != wb {
        return Err(Error::WeightMismatch(fmt_rational(wa), fmt_rational(wb)));
    }
    match x.kind {
        CrossingKind::PowerType => {
            let (m, n) = x.split.ok_or_else(|| Error::InvalidCrossing("power crossing without split".into()))?;
            if x.comp_a != x.comp_b || n != x.comp_a.power() || m == 0 || m >= n {
                return Err(Error::InvalidCrossing(x.to_string()));
            }
        }
        CrossingKind::LinkedAxes if x.comp_a == x.comp_b => {
            let (i, j) = x
                .positions
                .ok_or_else(|| Error::InvalidCrossing("self-crossing without cut positions".into()))?;
            let n = x.comp_a.len();
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidCrossing(x.to_string()));
            }
        }
        CrossingKind::LinkedAxes => {}
    }
    Ok(wa.clone())
}

/// Both regluings: the oriented one first, then the one that reverses the
/// second strand. Null-homotopic pieces are dropped.
fn regluings(x: &Crossing) -> (Vec<Word>, Vec<Word>) {
    let u = x.comp_a.canonical();
    match x.kind {
        CrossingKind::PowerType => {
            let (m, n) = x.split.unwrap_or((0, 0));
            let root = x.comp_a.primitive_root();
            let other = if 2 * m >= n {
                root.repeat(2 * m - n)
            } else {
                root.inverse().repeat(n - 2 * m)
            };
            (vec![root.repeat(m), root.repeat(n - m)], vec![other])
        }
        CrossingKind::LinkedAxes if x.comp_a == x.comp_b => {
            let (i, j) = x.positions.unwrap_or((0, 0));
            let (p, q) = cut(u, i, j);
            let flipped = p.concat(&q.inverse());
            (vec![p, q], vec![flipped])
        }
        CrossingKind::LinkedAxes => {
            let v = x.comp_b.canonical();
            let g = &x.conjugator;
            let merged = u.concat(&v.conjugate_by(g));
            let flipped = u.concat(&v.inverse().conjugate_by(g));
            (vec![merged], vec![flipped])
        }
    }
}

fn apply(c: &MultiCurve, x: &Crossing, w: &Weight, pieces: Vec<Word>) -> Result<SmoothingResult> {
    let mut out = c.clone();
    out.remove_weight(&x.comp_a, w)?;
    if x.comp_a != x.comp_b {
        out.remove_weight(&x.comp_b, w)?;
    }
    let mut names = Vec::new();
    for p in pieces {
        if let Some(k) = class_of(&p) {
            names.push(k.to_string());
            out.insert(k, w.clone());
        }
    }
    let before = if x.comp_a == x.comp_b {
        x.comp_a.to_string()
    } else {
        format!("{} + {}", x.comp_a, x.comp_b)
    };
    let after = if names.is_empty() { "1".to_string() } else { names.join(" + ") };
    Ok(SmoothingResult {
        result: out,
        weight_used: w.clone(),
        delta_components: format!("{before} -> {after}"),
    })
}

/// The orientation-respecting smoothing of `c` at `x`, with weight equal to
/// the common weight of the strands.
pub fn oriented_smoothing(c: &MultiCurve, x: &Crossing) -> Result<SmoothingResult> {
    let w = validate(c, x)?;
    let (oriented, _) = regluings(x);
    apply(c, x, &w, oriented)
}

/// `(oriented smoothing, smoothing after reversing one strand)`.
pub fn unoriented_smoothings(c: &MultiCurve, x: &Crossing) -> Result<(SmoothingResult, SmoothingResult)> {
    let w = validate(c, x)?;
    let (oriented, flipped) = regluings(x);
    Ok((apply(c, x, &w, oriented)?, apply(c, x, &w, flipped)?))
}

/// Smooths the first power crossing repeatedly until `c` has none; returns
/// the number of steps.
pub fn resolve_powers(c: &MultiCurve) -> Result<(MultiCurve, usize)> {
    let mut cur = c.clone();
    let mut steps = 0;
    loop {
        let next = cur.classes().find(|k| k.power() > 1).cloned();
        let Some(k) = next else { return Ok((cur, steps)) };
        let x = Crossing {
            kind: CrossingKind::PowerType,
            comp_a: k.clone(),
            comp_b: k.clone(),
            conjugator: k.primitive_root().clone(),
            split: Some((1, k.power())),
            positions: None,
        };
        let w = cur.weight_of(&k).cloned().unwrap_or_else(Weight::one);
        let (oriented, _) = regluings(&x);
        cur = apply(&cur, &x, &w, oriented)?.result;
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{weight_int, SurfacePresentation};

    fn rep() -> HolonomyRep {
        HolonomyRep::builtin_pt()
    }

    fn mc(s: &str) -> MultiCurve {
        MultiCurve::parse(SurfacePresentation::builtin("pt").unwrap(), s).unwrap()
    }

    fn cls(s: &str) -> ConjClass {
        canonical_form(&Word::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn simple_and_power_examples() {
        assert!(enumerate_essential_crossings(&mc("a"), &rep(), 3).unwrap().is_empty());
        let x = enumerate_essential_crossings(&mc("aa"), &rep(), 3).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x[0].kind, CrossingKind::PowerType);
        assert_eq!(x[0].split, Some((1, 2)));
    }

    #[test]
    fn a_b_cross_once() {
        for r in [3, 5] {
            let x = enumerate_essential_crossings(&mc("a; b"), &rep(), r).unwrap();
            assert_eq!(x.len(), 1, "radius {r}");
            assert_eq!(x[0].kind, CrossingKind::LinkedAxes);
        }
        let x = &enumerate_essential_crossings(&mc("a; b"), &rep(), 3).unwrap()[0];
        assert_eq!(x.conjugator, Word::new());
        let (o, u) = unoriented_smoothings(&mc("a; b"), x).unwrap();
        assert_eq!(o.result, mc("ab"));
        assert_eq!(u.result, mc("aB"));
        assert_eq!(o.result.total_weight(), weight_int(1));
        assert_eq!(u.result.total_weight(), weight_int(1));
        assert_eq!(oriented_smoothing(&mc("a; b"), x).unwrap().result, mc("ab"));
        assert!(matches!(oriented_smoothing(&mc("a; 2*b"), x), Err(Error::WeightMismatch(..))));
        assert!(matches!(oriented_smoothing(&mc("a"), x), Err(Error::InvalidCrossing(_))));
    }

    #[test]
    fn power_smoothings() {
        let x = enumerate_essential_crossings(&mc("aa"), &rep(), 2).unwrap().remove(0);
        assert_eq!(oriented_smoothing(&mc("aa"), &x).unwrap().result, mc("2*a"));
        let (_, u) = unoriented_smoothings(&mc("aa"), &x).unwrap();
        assert!(u.result.is_empty());

        let a3 = mc("aaa");
        let x = enumerate_essential_crossings(&a3, &rep(), 2).unwrap();
        assert_eq!(x.len(), 2);
        let step = oriented_smoothing(&a3, &x[0]).unwrap().result;
        assert_eq!(step, mc("a; aa"));
        let y = enumerate_essential_crossings(&step, &rep(), 2).unwrap();
        let z: Vec<_> = y.iter().filter(|c| c.kind == CrossingKind::PowerType).collect();
        assert_eq!(z.len(), 1);
        assert_eq!(oriented_smoothing(&step, z[0]).unwrap().result, mc("3*a"));

        for n in 2..=5 {
            let (res, steps) = resolve_powers(&mc(&"a".repeat(n))).unwrap();
            assert_eq!(steps, n - 1);
            assert_eq!(res.to_string(), format!("{n}*a"));
        }
    }

    #[test]
    fn intersection_examples() {
        let r = rep();
        assert_eq!(intersection_number(&cls("a"), &cls("a"), &r, 6).unwrap(), 0);
        assert_eq!(intersection_number(&cls("a"), &cls("b"), &r, 6).unwrap(), 1);
        assert_eq!(self_intersection(&cls("a"), &r, 6).unwrap(), 0);
        assert_eq!(self_intersection(&cls("abAB"), &r, 6).unwrap(), 0);
        assert_eq!(self_intersection(&cls("aa"), &r, 4).unwrap(), 1);
        // homology classes (p, q) and (r, s) of simple curves meet |ps - qr| times
        assert_eq!(intersection_number(&cls("ab"), &cls("b"), &r, 4).unwrap(), 1);
        assert_eq!(intersection_number(&cls("aab"), &cls("ab"), &r, 4).unwrap(), 1);
        assert_eq!(intersection_number(&cls("aab"), &cls("b"), &r, 4).unwrap(), 2);
        assert_eq!(intersection_number(&cls("aabab"), &cls("b"), &r, 4).unwrap(), 3);
        assert_eq!(intersection_number(&cls("aabab"), &cls("aB"), &r, 4).unwrap(), 5);
    }

    #[test]
    fn figure_eight_self_crossing() {
        let r = rep();
        let k6 = self_intersection(&cls("abaB"), &r, 6).unwrap();
        let k8 = self_intersection(&cls("abaB"), &r, 8).unwrap();
        assert_eq!(k6, k8);
        assert_eq!(k6, 1);
        let c = mc("abaB");
        let x = enumerate_essential_crossings(&c, &r, 4).unwrap();
        assert_eq!(x.len(), 1);
        let l0 = r.length(&Word::parse("abaB").unwrap()).unwrap();
        let res = oriented_smoothing(&c, &x[0]).unwrap().result;
        let l1: f64 = res
            .classes()
            .map(|k| r.length(k.canonical()).unwrap_or(0.0))
            .sum();
        assert!(l1 <= l0 + 1e-9, "{l1} > {l0}");
    }

    #[test]
    fn powers_scale_intersections() {
        let r = rep();
        let base = intersection_number(&cls("ab"), &cls("b"), &r, 4).unwrap();
        for n in 2..=3 {
            let c = cls(&"ab".repeat(n));
            assert_eq!(intersection_number(&c, &cls("b"), &r, 4).unwrap(), n * base);
        }
    }
}
