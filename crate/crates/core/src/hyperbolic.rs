//! Fuchsian holonomy, axes and linking on the circle at infinity, trace
//! length, and broken-path geometry in the upper half-plane.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{SurfacePresentation, Word};

pub const DET_TOL: f64 = 1e-9;
pub const HYPERBOLIC_TOL: f64 = 1e-9;
pub const SEPARATION_TOL: f64 = 1e-9;
const RENORMALIZE_EVERY: usize = 16;

/// A real 2×2 matrix `[[p, q], [r, s]]` acting by `z ↦ (pz + q)/(rz + s)`.
#[derive(Clone, Copy, PartialEq)]
pub struct MobiusTransform {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl fmt::Debug for MobiusTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.p, self.q, self.r, self.s)
    }
}

impl MobiusTransform {
    pub const IDENTITY: MobiusTransform = MobiusTransform {
        p: 1.0,
        q: 0.0,
        r: 0.0,
        s: 1.0,
    };

    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Self {
        MobiusTransform { p, q, r, s }
    }

    pub fn det(&self) -> f64 {
        self.p * self.s - self.q * self.r
    }

    pub fn trace(&self) -> f64 {
        self.p + self.s
    }

    /// Scales to determinant one. Fails for non-positive determinants.
    pub fn normalized(&self) -> Result<Self> {
        let d = self.det();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidRepresentation(format!("determinant {d} is not positive")));
        }
        let k = 1.0 / d.sqrt();
        Ok(MobiusTransform::new(self.p * k, self.q * k, self.r * k, self.s * k))
    }

    /// Rescales to determinant one while the determinant can still be
    /// computed accurately; for large entries it cancels catastrophically.
    fn renormalize(&self) -> Self {
        if self.max_abs_entry() > 1e4 {
            return *self;
        }
        self.normalized().unwrap_or(*self)
    }

    pub fn mul(&self, o: &MobiusTransform) -> MobiusTransform {
        MobiusTransform {
            p: self.p * o.p + self.q * o.r,
            q: self.p * o.q + self.q * o.s,
            r: self.r * o.p + self.s * o.r,
            s: self.r * o.q + self.s * o.s,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> MobiusTransform {
        MobiusTransform::new(self.s, -self.q, -self.r, self.p)
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + HYPERBOLIC_TOL
    }

    pub fn apply(&self, x: IdealPoint) -> IdealPoint {
        match x {
            IdealPoint::Infinity => {
                if self.r == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Real(self.p / self.r)
                }
            }
            IdealPoint::Real(x) => {
                let den = self.r * x + self.s;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Real((self.p * x + self.q) / den)
                }
            }
        }
    }

    /// Action on a point `(x, y)` of the upper half-plane.
    pub fn apply_h2(&self, z: (f64, f64)) -> (f64, f64) {
        let num = cmul((self.p, 0.0), z);
        let num = (num.0 + self.q, num.1);
        let den = (self.r * z.0 + self.s, self.r * z.1);
        cdiv(num, den)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.p.abs().max(self.q.abs()).max(self.r.abs()).max(self.s.abs())
    }
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let n = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
}

/// A point of the boundary circle `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IdealPoint {
    Real(f64),
    Infinity,
}

impl IdealPoint {
    /// Position on the circle in `(-π, π]`, with `∞ ↦ π`.
    pub fn angle(&self) -> f64 {
        match self {
            IdealPoint::Infinity => PI,
            IdealPoint::Real(x) => 2.0 * x.atan(),
        }
    }

    pub fn from_angle(theta: f64) -> IdealPoint {
        let t = (theta / 2.0).tan();
        if !t.is_finite() || t.abs() > 1e300 || (theta.abs() - PI).abs() < 1e-300 {
            IdealPoint::Infinity
        } else {
            IdealPoint::Real(t)
        }
    }

    pub fn circle_distance(&self, other: &IdealPoint) -> f64 {
        let d = (self.angle() - other.angle()).abs() % (2.0 * PI);
        d.min(2.0 * PI - d)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            IdealPoint::Real(x) => Some(*x),
            IdealPoint::Infinity => None,
        }
    }
}

impl fmt::Display for IdealPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealPoint::Real(x) => write!(f, "{x}"),
            IdealPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// The oriented axis of a hyperbolic element: from `repelling` to `attracting`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub attracting: IdealPoint,
    pub repelling: IdealPoint,
}

impl Axis {
    pub fn new(attracting: IdealPoint, repelling: IdealPoint) -> Result<Axis> {
        let d = attracting.circle_distance(&repelling);
        if d < SEPARATION_TOL {
            return Err(Error::DegenerateConfiguration(d));
        }
        Ok(Axis {
            attracting,
            repelling,
        })
    }

    pub fn image(&self, g: &MobiusTransform) -> Axis {
        Axis {
            attracting: g.apply(self.attracting),
            repelling: g.apply(self.repelling),
        }
    }

    pub fn reversed(&self) -> Axis {
        Axis {
            attracting: self.repelling,
            repelling: self.attracting,
        }
    }

    pub fn shares_endpoints_with(&self, other: &Axis) -> bool {
        let close = |a: &IdealPoint, b: &IdealPoint| a.circle_distance(b) < SEPARATION_TOL;
        (close(&self.attracting, &other.attracting) && close(&self.repelling, &other.repelling))
            || (close(&self.attracting, &other.repelling) && close(&self.repelling, &other.attracting))
    }

    /// A Möbius map sending this axis to the imaginary axis, repelling end to
    /// 0 and attracting end to ∞.
    pub fn straightening_map(&self) -> MobiusTransform {
        match (self.repelling, self.attracting) {
            (IdealPoint::Real(r), IdealPoint::Real(t)) => MobiusTransform::new(1.0, -r, 1.0, -t),
            (IdealPoint::Real(r), IdealPoint::Infinity) => MobiusTransform::new(1.0, -r, 0.0, 1.0),
            (IdealPoint::Infinity, IdealPoint::Real(t)) => MobiusTransform::new(0.0, -1.0, 1.0, -t),
            (IdealPoint::Infinity, IdealPoint::Infinity) => MobiusTransform::IDENTITY,
        }
    }
}

/// `2·acosh(|tr|/2)`, the translation length of a hyperbolic element.
pub fn trace_length(m: &MobiusTransform) -> Result<f64> {
    let t = m.trace().abs();
    if t <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic(t));
    }
    Ok(2.0 * (t / 2.0).acosh())
}

/// Ordered fixed points of a hyperbolic element (determinant one).
pub fn axis_endpoints(m: &MobiusTransform) -> Result<Axis> {
    let tr = m.trace();
    if tr.abs() <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic(tr.abs()));
    }
    let MobiusTransform { p, q, r, s } = *m;
    let scale = m.max_abs_entry();
    if r.abs() <= 1e-15 * scale {
        // z ↦ (p/s) z + q/s fixes ∞ and q/(s - p)
        let finite = IdealPoint::Real(q / (s - p));
        return if (p / s).abs() > 1.0 {
            Axis::new(IdealPoint::Infinity, finite)
        } else {
            Axis::new(finite, IdealPoint::Infinity)
        };
    }
    // r z² + (s - p) z - q = 0, discriminant tr² - 4
    let disc = (tr * tr - 4.0).max(0.0).sqrt();
    let b = p - s;
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let z1 = (b + sign * disc) / (2.0 * r);
    let z2 = if z1 != 0.0 { -q / (r * z1) } else { (b - sign * disc) / (2.0 * r) };
    // derivative at a fixed point is 1/(r z + s)²
    let attracting_first = (r * z1 + s).abs() > (r * z2 + s).abs();
    let (att, rep) = if attracting_first { (z1, z2) } else { (z2, z1) };
    Axis::new(IdealPoint::Real(att), IdealPoint::Real(rep))
}

/// True iff the endpoint pairs interleave on the circle.
pub fn linked(p: &Axis, q: &Axis) -> Result<bool> {
    // a far-away axis has nearly coincident ends of its own; only shared
    // ends make the question ill posed
    let mut min_sep = f64::INFINITY;
    for x in [p.attracting, p.repelling] {
        for y in [q.attracting, q.repelling] {
            min_sep = min_sep.min(x.circle_distance(&y));
        }
    }
    if min_sep < SEPARATION_TOL {
        return Err(Error::DegenerateConfiguration(min_sep));
    }
    let a = p.attracting.angle();
    let b = p.repelling.angle();
    let inside = |x: f64| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        x > lo && x < hi
    };
    Ok(inside(q.attracting.angle()) != inside(q.repelling.angle()))
}

/// Geometric data for the holonomy of a surface group.
#[derive(Clone, Debug)]
pub struct HolonomyRep {
    presentation: Arc<SurfacePresentation>,
    images: BTreeMap<u8, MobiusTransform>,
}

#[derive(Serialize, Deserialize)]
struct RepFile {
    generators: Vec<String>,
    matrices: BTreeMap<String, [[f64; 2]; 2]>,
    #[serde(default)]
    surface: Option<String>,
}

impl HolonomyRep {
    pub fn new(presentation: Arc<SurfacePresentation>, matrices: BTreeMap<char, MobiusTransform>) -> Result<Self> {
        let mut images = BTreeMap::new();
        for g in &presentation.generators {
            let m = matrices
                .get(g)
                .ok_or_else(|| Error::InvalidRepresentation(format!("no matrix for generator {g}")))?
                .normalized()?;
            if (m.det() - 1.0).abs() > DET_TOL {
                return Err(Error::InvalidRepresentation(format!("determinant of {g} not 1")));
            }
            images.insert(*g as u8, m);
            images.insert((*g as u8).to_ascii_uppercase(), m.inverse());
        }
        if matrices.len() != presentation.generators.len() {
            return Err(Error::InvalidRepresentation("matrices for unknown generators".into()));
        }
        let rep = HolonomyRep {
            presentation,
            images,
        };
        if rep.presentation.name == "pt" {
            let t = rep.holonomy(&Word::parse("abAB")?)?.trace();
            if (t + 2.0).abs() > 1e-6 {
                return Err(Error::InvalidRepresentation(format!(
                    "trace of [a,b] is {t}, expected -2 for a complete cusp"
                )));
            }
        }
        for r in &rep.presentation.relators {
            let m = rep.holonomy(r)?;
            let id_err = (m.p.abs() - 1.0).abs() + m.q.abs() + m.r.abs() + (m.s.abs() - 1.0).abs();
            if id_err > 1e-6 {
                return Err(Error::InvalidRepresentation(format!("relator {r} not sent to identity")));
            }
        }
        Ok(rep)
    }

    /// The integer representation of the once-punctured torus:
    /// `a ↦ [[1,1],[1,2]]`, `b ↦ [[1,-1],[-1,2]]`.
    pub fn builtin_pt() -> HolonomyRep {
        let mut m = BTreeMap::new();
        m.insert('a', MobiusTransform::new(1.0, 1.0, 1.0, 2.0));
        m.insert('b', MobiusTransform::new(1.0, -1.0, -1.0, 2.0));
        HolonomyRep::new(SurfacePresentation::builtin("pt").expect("builtin"), m).expect("valid builtin")
    }

    /// The built-in representation for a surface, if one exists.
    pub fn builtin(surface: &str) -> Result<HolonomyRep> {
        match surface {
            "pt" => Ok(HolonomyRep::builtin_pt()),
            other => Err(Error::NoRepresentation(other.to_string())),
        }
    }

    /// Parses `{"generators": [...], "matrices": {"a": [[..],[..]], ...}}`.
    pub fn from_json(s: &str) -> Result<HolonomyRep> {
        let f: RepFile = serde_json::from_str(s)?;
        let mut gens = Vec::new();
        for g in &f.generators {
            let mut it = g.chars();
            match (it.next(), it.next()) {
                (Some(c @ 'a'..='d'), None) => gens.push(c),
                _ => return Err(Error::InvalidRepresentation(format!("bad generator name '{g}'"))),
            }
        }
        let presentation = match f.surface.as_deref() {
            Some(name) => {
                let p = SurfacePresentation::builtin(name)?;
                if p.generators != gens {
                    return Err(Error::InvalidRepresentation("generators do not match surface".into()));
                }
                p
            }
            None if gens == ['a', 'b'] => SurfacePresentation::builtin("pt")?,
            None => Arc::new(SurfacePresentation::new(&format!("free{}", gens.len()), gens.clone(), vec![], 1 - gens.len() as i32)?),
        };
        let mut mats = BTreeMap::new();
        for (k, v) in &f.matrices {
            let mut it = k.chars();
            let c = match (it.next(), it.next()) {
                (Some(c), None) => c,
                _ => return Err(Error::InvalidRepresentation(format!("bad matrix key '{k}'"))),
            };
            mats.insert(c, MobiusTransform::new(v[0][0], v[0][1], v[1][0], v[1][1]));
        }
        HolonomyRep::new(presentation, mats)
    }

    pub fn to_json(&self) -> String {
        let f = RepFile {
            generators: self.presentation.generators.iter().map(|c| c.to_string()).collect(),
            matrices: self
                .presentation
                .generators
                .iter()
                .map(|g| {
                    let m = self.images[&(*g as u8)];
                    (g.to_string(), [[m.p, m.q], [m.r, m.s]])
                })
                .collect(),
            surface: Some(self.presentation.name.clone()),
        };
        serde_json::to_string(&f).expect("serializable")
    }

    pub fn presentation(&self) -> &Arc<SurfacePresentation> {
        &self.presentation
    }

    pub fn generator_image(&self, letter: u8) -> Result<&MobiusTransform> {
        self.images.get(&letter).ok_or(Error::UnknownGenerator(letter as char))
    }

    /// Product of generator images, renormalized to determinant one every
    /// 16 factors.
    pub fn holonomy(&self, w: &Word) -> Result<MobiusTransform> {
        let mut m = MobiusTransform::IDENTITY;
        for (i, &l) in w.letters().iter().enumerate() {
            m = m.mul(self.generator_image(l)?);
            if (i + 1) % RENORMALIZE_EVERY == 0 {
                m = m.renormalize();
            }
        }
        Ok(m.renormalize())
    }

    pub fn length(&self, w: &Word) -> Result<f64> {
        trace_length(&self.holonomy(w)?)
    }

    pub fn axis(&self, w: &Word) -> Result<Axis> {
        axis_endpoints(&self.holonomy(w)?)
    }
}

pub fn holonomy(rep: &HolonomyRep, w: &Word) -> Result<MobiusTransform> {
    rep.holonomy(w)
}

/// Gudermannian `atan(sinh x)`.
pub fn gd(x: f64) -> f64 {
    x.sinh().atan()
}

/// Inverse Gudermannian `asinh(tan y)` on `|y| < π/2`.
pub fn gd_inv(y: f64) -> Result<f64> {
    if !(y.abs() < FRAC_PI_2) {
        return Err(Error::OutOfDomain(y, "gd_inv"));
    }
    Ok(y.tan().asinh())
}

/// Threshold `2·gd⁻¹(ε)` for long segments of broken paths.
pub fn l0(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < FRAC_PI_2) {
        return Err(Error::OutOfDomain(eps, "L0"));
    }
    Ok(2.0 * gd_inv(eps)?)
}

/// One period of a broken path: a long segment, a turn, a short segment,
/// and a turn back. Turns are signed (positive = counterclockwise).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub long: f64,
    pub turn_in: f64,
    pub short: f64,
    pub turn_out: f64,
}

/// A bi-infinite broken path repeating `legs` periodically. An empty list is
/// a single geodesic, the imaginary axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrokenPathSpec {
    pub epsilon: f64,
    pub legs: Vec<Leg>,
}

/// Frame motion along the current heading by hyperbolic distance `t`.
fn advance(t: f64) -> MobiusTransform {
    MobiusTransform::new((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp())
}

/// Frame rotation by angle `theta` (counterclockwise).
fn turn(theta: f64) -> MobiusTransform {
    let (s, c) = (theta / 2.0).sin_cos();
    MobiusTransform::new(c, s, -s, c)
}

fn to_disk(z: (f64, f64)) -> (f64, f64) {
    cdiv((z.0, z.1 - 1.0), (z.0, z.1 + 1.0))
}

fn disk_angle_to_ideal(phi: f64) -> IdealPoint {
    let s = (phi / 2.0).sin();
    if s.abs() < 1e-300 {
        return IdealPoint::Infinity;
    }
    IdealPoint::Real(-(phi / 2.0).cos() / s)
}

impl BrokenPathSpec {
    pub fn validate(&self) -> Result<()> {
        let threshold = l0(self.epsilon)?;
        let eps = self.epsilon;
        for (i, leg) in self.legs.iter().enumerate() {
            if !(leg.long > threshold) {
                return Err(Error::BelowThreshold {
                    length: leg.long,
                    threshold,
                });
            }
            if !(leg.short >= 0.0) {
                return Err(Error::OutOfDomain(leg.short, "short segment length"));
            }
            for t in [leg.turn_in, leg.turn_out] {
                if (t.abs() - FRAC_PI_2).abs() > eps {
                    return Err(Error::OutOfDomain(t, "turn angle"));
                }
            }
            if leg.turn_in.signum() == leg.turn_out.signum() {
                return Err(Error::OutOfDomain(leg.turn_out, "alternating turn"));
            }
            let next = &self.legs[(i + 1) % self.legs.len()];
            if leg.turn_out.signum() == next.turn_in.signum() {
                return Err(Error::OutOfDomain(next.turn_in, "alternating turn"));
            }
        }
        Ok(())
    }

    fn period_map(&self) -> MobiusTransform {
        self.legs.iter().fold(MobiusTransform::IDENTITY, |m, leg| {
            m.mul(&advance(leg.long))
                .mul(&turn(leg.turn_in))
                .mul(&advance(leg.short))
                .mul(&turn(leg.turn_out))
                .renormalize()
        })
    }

    /// Oriented lines containing the short segments of the first period.
    pub fn short_segment_lines(&self) -> Vec<Axis> {
        let mut frame = MobiusTransform::IDENTITY;
        let mut out = Vec::with_capacity(self.legs.len());
        for leg in &self.legs {
            frame = frame.mul(&advance(leg.long)).mul(&turn(leg.turn_in));
            out.push(Axis {
                attracting: frame.apply(IdealPoint::Infinity),
                repelling: frame.apply(IdealPoint::Real(0.0)),
            });
            frame = frame.mul(&advance(leg.short)).mul(&turn(leg.turn_out)).renormalize();
        }
        out
    }
}

fn iterate_limit(step: &MobiusTransform) -> Result<IdealPoint> {
    const MAX: usize = 10_000;
    let mut frame = MobiusTransform::IDENTITY;
    let mut prev = to_disk((0.0, 1.0));
    for _ in 0..MAX {
        frame = frame.mul(step).renormalize();
        let w = to_disk(frame.apply_h2((0.0, 1.0)));
        let moved = ((w.0 - prev.0).powi(2) + (w.1 - prev.1).powi(2)).sqrt();
        prev = w;
        if moved < 1e-10 {
            return Ok(disk_angle_to_ideal(w.1.atan2(w.0)));
        }
    }
    Err(Error::NoConvergence(MAX))
}

/// Forward (attracting) and backward (repelling) ideal limits of a periodic
/// broken path starting at `i` heading along the imaginary axis.
pub fn broken_path_endpoints(spec: &BrokenPathSpec) -> Result<Axis> {
    if spec.legs.is_empty() {
        return Axis::new(IdealPoint::Infinity, IdealPoint::Real(0.0));
    }
    spec.validate()?;
    let p = spec.period_map();
    let forward = iterate_limit(&p)?;
    let backward = iterate_limit(&p.inverse())?;
    Axis::new(forward, backward)
}

/// Empirical proxy for the overhang constant of two broken paths sharing a
/// short-segment line: the least `κ` (bisection to 1e-3) at which the window
/// of possible endpoints and its translate by `κ` along the line are disjoint.
/// Returns infinity when the window wraps through the line's endpoints.
pub fn estimate_kappa(eps: f64, long: f64) -> Result<f64> {
    let threshold = l0(eps)?;
    if !(long > threshold) {
        return Err(Error::BelowThreshold {
            length: long,
            threshold,
        });
    }
    let angles = [FRAC_PI_2 - eps, FRAC_PI_2, FRAC_PI_2 + eps];
    let lengths = [long, 1e4];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t1 in &angles {
        let start = turn(-t1);
        for &l in &lengths {
            if l > 60.0 {
                // the window degenerates to the endpoint of the ray
                match start.apply(IdealPoint::Infinity).finite() {
                    Some(x) if x > 0.0 => {
                        lo = lo.min(x);
                        hi = hi.max(x);
                    }
                    _ => return Ok(f64::INFINITY),
                }
                continue;
            }
            for &t2 in &angles {
                let frame = start.mul(&advance(l)).mul(&turn(t2));
                for end in [IdealPoint::Real(0.0), IdealPoint::Infinity] {
                    match frame.apply(end).finite() {
                        Some(x) if x > 0.0 => {
                            lo = lo.min(x);
                            hi = hi.max(x);
                        }
                        _ => return Ok(f64::INFINITY),
                    }
                }
            }
        }
    }
    let disjoint = |k: f64| k.exp() * lo > hi;
    let (mut a, mut b) = (0.0f64, 64.0f64);
    if disjoint(a) {
        return Ok(0.0);
    }
    if !disjoint(b) {
        return Ok(f64::INFINITY);
    }
    while b - a > 1e-3 {
        let m = 0.5 * (a + b);
        if disjoint(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(p: f64, q: f64, r: f64, s: f64) -> MobiusTransform {
        MobiusTransform::new(p, q, r, s)
    }

    #[test]
    fn holonomy_examples() {
        let rep = HolonomyRep::builtin_pt();
        assert_eq!(rep.holonomy(&Word::parse("a").unwrap()).unwrap(), m(1.0, 1.0, 1.0, 2.0));
        assert_eq!(rep.holonomy(&Word::parse("").unwrap()).unwrap(), MobiusTransform::IDENTITY);
        assert_eq!(rep.holonomy(&Word::parse("aA").unwrap()).unwrap(), MobiusTransform::IDENTITY);
        assert!(matches!(rep.holonomy(&Word::parse("c").unwrap()), Err(Error::UnknownGenerator('c'))));
    }

    #[test]
    fn commutator_is_parabolic() {
        // direct 2x2 multiplication: [[1,1],[1,2]][[1,-1],[-1,2]] = [[0,1],[-1,3]],
        // [[2,-1],[-1,1]][[2,1],[1,1]] = [[3,1],[-1,0]], product trace -2
        let ab = m(1.0, 1.0, 1.0, 2.0).mul(&m(1.0, -1.0, -1.0, 2.0));
        assert_eq!(ab, m(0.0, 1.0, -1.0, 3.0));
        let inv = m(2.0, -1.0, -1.0, 1.0).mul(&m(2.0, 1.0, 1.0, 1.0));
        assert_eq!(ab.mul(&inv).trace(), -2.0);
        let rep = HolonomyRep::builtin_pt();
        assert_eq!(rep.holonomy(&Word::parse("abAB").unwrap()).unwrap().trace(), -2.0);
    }

    #[test]
    fn trace_length_examples() {
        let expected = 2.0 * 1.5f64.acosh();
        assert_abs_diff_eq!(expected, 1.924847, epsilon = 1e-6);
        assert_abs_diff_eq!(trace_length(&m(1.0, 1.0, 1.0, 2.0)).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_length(&m(-1.0, -1.0, -1.0, -2.0)).unwrap(), expected, epsilon = 1e-15);
        assert!(matches!(trace_length(&m(1.0, 1.0, 0.0, 1.0)), Err(Error::NotHyperbolic(_))));
    }

    #[test]
    fn axis_examples() {
        let ax = axis_endpoints(&m(1.0, 1.0, 1.0, 2.0)).unwrap();
        // quadratic oracle: z² + z - 1 = 0
        let plus = (-1.0 + 5f64.sqrt()) / 2.0;
        let minus = (-1.0 - 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(ax.attracting.finite().unwrap(), plus, epsilon = 1e-12);
        assert_abs_diff_eq!(ax.repelling.finite().unwrap(), minus, epsilon = 1e-12);
        assert_abs_diff_eq!(plus, 0.61803, epsilon = 1e-5);
        // derivative test for attraction: |1/(r z + s)²| < 1
        assert!(1.0 / (plus + 2.0f64).powi(2) < 1.0);

        let lam = 3.0;
        let d = axis_endpoints(&m(lam, 0.0, 0.0, 1.0 / lam)).unwrap();
        assert_eq!(d.attracting, IdealPoint::Infinity);
        assert_abs_diff_eq!(d.repelling.finite().unwrap(), 0.0, epsilon = 1e-15);
        let d = axis_endpoints(&m(1.0 / lam, 0.0, 0.0, lam)).unwrap();
        assert_eq!(d.repelling, IdealPoint::Infinity);
    }

    #[test]
    fn linked_examples() {
        let ax = |a: f64, b: IdealPoint| Axis::new(IdealPoint::Real(a), b).unwrap();
        let r = IdealPoint::Real;
        assert!(linked(&ax(0.0, r(1.0)), &ax(0.5, r(2.0))).unwrap());
        assert!(!linked(&ax(0.0, r(1.0)), &ax(2.0, r(3.0))).unwrap());
        assert!(linked(&ax(0.0, r(2.0)), &ax(1.0, IdealPoint::Infinity)).unwrap());
        assert!(matches!(
            linked(&ax(0.0, r(1.0)), &ax(0.0, r(2.0))),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn gudermannian() {
        assert_eq!(gd(0.0), 0.0);
        assert_abs_diff_eq!(gd_inv(PI / 4.0).unwrap(), (1.0 + 2f64.sqrt()).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(l0(PI / 6.0).unwrap(), 3f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!((1.0 / 3f64.sqrt()).asinh(), 0.5 * 3f64.ln(), epsilon = 1e-15);
        assert!(gd_inv(FRAC_PI_2).is_err());
        assert!(l0(0.0).is_err());
        for i in -100..=100 {
            let x = i as f64 / 10.0;
            assert_abs_diff_eq!(gd_inv(gd(x)).unwrap(), x, epsilon = 1e-12);
        }
    }

    fn staircase(eps: f64, long: f64) -> BrokenPathSpec {
        BrokenPathSpec {
            epsilon: eps,
            legs: vec![
                Leg { long, turn_in: FRAC_PI_2, short: 0.3, turn_out: -FRAC_PI_2 },
                Leg { long, turn_in: FRAC_PI_2 - 0.5 * eps, short: 0.7, turn_out: -FRAC_PI_2 - 0.5 * eps },
            ],
        }
    }

    #[test]
    fn straight_path() {
        let spec = BrokenPathSpec { epsilon: 0.1, legs: vec![] };
        let ax = broken_path_endpoints(&spec).unwrap();
        assert_eq!(ax.attracting, IdealPoint::Infinity);
        assert_eq!(ax.repelling, IdealPoint::Real(0.0));
    }

    #[test]
    fn periodic_path_crosses_short_lines() {
        let eps = 0.1;
        let spec = staircase(eps, 2.0 * l0(eps).unwrap());
        let ends = broken_path_endpoints(&spec).unwrap();
        for line in spec.short_segment_lines() {
            assert!(linked(&ends, &line).unwrap());
        }
        let low = staircase(eps, 0.5 * l0(eps).unwrap());
        assert!(matches!(broken_path_endpoints(&low), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn kappa_trends() {
        let long = 2.0;
        let k: Vec<f64> = [0.3, 0.2, 0.1].iter().map(|&e| estimate_kappa(e, long).unwrap()).collect();
        assert!(k.iter().all(|&x| x >= 0.0));
        assert!(k[0] >= k[1] && k[1] >= k[2], "{k:?}");
        for eps in [0.1, 0.3, 0.6] {
            let base = estimate_kappa(eps, 3.0).unwrap();
            assert!(estimate_kappa(eps, 6.0).unwrap() <= base);
        }
        assert!(matches!(estimate_kappa(0.3, 0.1), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn rep_json_roundtrip_and_validation() {
        let rep = HolonomyRep::builtin_pt();
        let back = HolonomyRep::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.holonomy(&Word::parse("ab").unwrap()).unwrap(), rep.holonomy(&Word::parse("ab").unwrap()).unwrap());
        let bad = r#"{"generators": ["a","b"], "matrices": {"a": [[2,0],[0,0.5]], "b": [[1,1],[1,2]]}}"#;
        assert!(matches!(HolonomyRep::from_json(bad), Err(Error::InvalidRepresentation(_))));
        let scaled = r#"{"generators": ["a","b"], "matrices": {"a": [[2,2],[2,4]], "b": [[1,-1],[-1,2]]}}"#;
        assert!(HolonomyRep::from_json(scaled).is_ok());
    }
}
