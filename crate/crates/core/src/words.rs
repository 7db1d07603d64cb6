//! Words in surface groups, conjugacy classes and weighted multi-curves.
//!
//! Letters are ASCII: a lowercase letter is a generator, the matching
//! uppercase letter its inverse. Rotation-minimal forms use the fixed order
//! `a < b < c < d < A < B < C < D`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Weight = BigRational;

pub fn weight(n: i64, d: i64) -> Weight {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn weight_int(n: i64) -> Weight {
    BigRational::from_integer(BigInt::from(n))
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[inline]
pub fn inverse_letter(l: u8) -> u8 {
    l ^ 0x20
}

#[inline]
pub fn letter_rank(l: u8) -> u8 {
    if l.is_ascii_lowercase() {
        l - b'a'
    } else {
        4 + (l - b'A')
    }
}

/// A word over generators and their inverses. Not reduced unless stated.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new() -> Self {
        Word(Vec::new())
    }

    /// Parses `[a-dA-D]*`. `"1"` is accepted for the identity.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::new());
        }
        let mut v = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                'a'..='d' | 'A'..='D' => v.push(ch as u8),
                _ => return Err(Error::Parse(format!("bad letter '{ch}' in word '{s}'"))),
            }
        }
        Ok(Word(v))
    }

    pub fn from_letters(v: Vec<u8>) -> Word {
        debug_assert!(v.iter().all(|l| matches!(l, b'a'..=b'd' | b'A'..=b'D')));
        Word(v)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| inverse_letter(l)).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Product followed by free reduction.
    pub fn mul(&self, other: &Word) -> Word {
        self.concat(other).free_reduce()
    }

    pub fn conjugate_by(&self, h: &Word) -> Word {
        h.concat(self).concat(&h.inverse()).free_reduce()
    }

    pub fn repeat(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<u8> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != inverse_letter(w[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && (self.0.len() < 2 || self.0[0] != inverse_letter(*self.0.last().unwrap()))
    }

    /// Free and cyclic reduction; returns `(h, core)` with `self = h core h⁻¹` freely.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let r = self.free_reduce().0;
        let mut i = 0;
        let mut j = r.len();
        while j - i >= 2 && r[i] == inverse_letter(r[j - 1]) {
            i += 1;
            j -= 1;
        }
        (Word(r[..i].to_vec()), Word(r[i..j].to_vec()))
    }

    /// Index of the least rotation under the letter order (Booth).
    pub fn least_rotation(&self) -> usize {
        least_rotation_by(&self.0, |a, b| letter_rank(*a).cmp(&letter_rank(*b)))
    }

    pub fn min_rotation(&self) -> Word {
        self.rotate(self.least_rotation())
    }

    /// Shortest `r` with `self = r^k`.
    pub fn primitive_root(&self) -> (Word, usize) {
        let n = self.0.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return (Word(self.0[..p].to_vec()), n / p);
            }
        }
        (self.clone(), 1)
    }

    fn rank_cmp(&self, other: &Word) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match letter_rank(*a).cmp(&letter_rank(*b)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// Booth's least-rotation algorithm over an arbitrary total order.
pub fn least_rotation_by<T, F>(s: &[T], cmp: F) -> usize
where
    F: Fn(&T, &T) -> Ordering,
{
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let at = |i: usize| &s[i % n];
    let mut f = vec![-1isize; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = at(j);
        let mut i = f[j - k - 1];
        while i != -1 && cmp(sj, at(k + i as usize + 1)) != Ordering::Equal {
            if cmp(sj, at(k + i as usize + 1)) == Ordering::Less {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && cmp(sj, at(k)) != Ordering::Equal {
            if cmp(sj, at(k)) == Ordering::Less {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k % n
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        f.write_str(std::str::from_utf8(&self.0).expect("ascii letters"))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Free reduction of a word.
pub fn free_reduce(w: &Word) -> Word {
    w.free_reduce()
}

/// A free-homotopy class of oriented closed curves, stored as its
/// cyclically reduced rotation-minimal word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConjClass {
    canonical: Word,
    root: Word,
    power: usize,
}

impl ConjClass {
    pub fn canonical(&self) -> &Word {
        &self.canonical
    }

    pub fn primitive_root(&self) -> &Word {
        &self.root
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn is_primitive(&self) -> bool {
        self.power == 1
    }

    pub fn root_class(&self) -> ConjClass {
        ConjClass {
            canonical: self.root.clone(),
            root: self.root.clone(),
            power: 1,
        }
    }

    pub fn reverse(&self) -> ConjClass {
        canonical_form(&self.canonical.inverse()).expect("inverse of nontrivial class")
    }

    /// Representative of the unoriented curve: the smaller of `C` and its reverse.
    pub fn unoriented(&self) -> ConjClass {
        let r = self.reverse();
        if r.canonical < self.canonical {
            r
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, n: usize) -> ConjClass {
        power(self, n)
    }

    /// Builds a class from a word already in canonical form.
    fn from_canonical(canonical: Word) -> ConjClass {
        let (root, power) = canonical.primitive_root();
        ConjClass {
            canonical,
            root,
            power,
        }
    }
}

impl Ord for ConjClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl PartialOrd for ConjClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.canonical.fmt(f)
    }
}

impl fmt::Debug for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.canonical)
    }
}

/// Canonical form in the free group: cyclic reduction, then the least rotation.
pub fn canonical_form(w: &Word) -> Result<ConjClass> {
    let (_, core) = w.cyclic_reduce();
    if core.is_empty() {
        return Err(Error::TrivialCurve);
    }
    Ok(ConjClass::from_canonical(core.min_rotation()))
}

pub fn power(c: &ConjClass, n: usize) -> ConjClass {
    assert!(n >= 1, "power must be positive");
    ConjClass {
        canonical: c.root.repeat(c.power * n),
        root: c.root.clone(),
        power: c.power * n,
    }
}

/// A finitely presented surface group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfacePresentation {
    pub name: String,
    pub generators: Vec<char>,
    pub relators: Vec<Word>,
    pub euler_char: i32,
    dehn: Option<Vec<Word>>,
}

impl SurfacePresentation {
    pub fn new(name: &str, generators: Vec<char>, relators: Vec<Word>, euler_char: i32) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Parse("presentation needs generators".into()));
        }
        for g in &generators {
            if !matches!(g, 'a'..='d') {
                return Err(Error::Parse(format!("generator '{g}' must be one of a-d")));
            }
        }
        for r in &relators {
            if !r.is_reduced() {
                return Err(Error::Parse(format!("relator {r} is not freely reduced")));
            }
        }
        let dehn = if relators.is_empty() {
            None
        } else {
            let mut all = Vec::new();
            for r in &relators {
                for base in [r.clone(), r.inverse()] {
                    for k in 0..base.len() {
                        all.push(base.rotate(k));
                    }
                }
            }
            all.sort();
            all.dedup();
            Some(all)
        };
        Ok(SurfacePresentation {
            name: name.to_string(),
            generators,
            relators,
            euler_char,
            dehn,
        })
    }

    /// Built-in presentations: `pt` (once-punctured torus) and `genus2`.
    pub fn builtin(name: &str) -> Result<Arc<SurfacePresentation>> {
        let p = match name {
            "pt" => SurfacePresentation::new("pt", vec!['a', 'b'], vec![], -1)?,
            "genus2" => SurfacePresentation::new(
                "genus2",
                vec!['a', 'b', 'c', 'd'],
                vec![Word::parse("abABcdCD")?],
                -2,
            )?,
            other => return Err(Error::UnknownSurface(other.to_string())),
        };
        Ok(Arc::new(p))
    }

    pub fn is_free(&self) -> bool {
        self.relators.is_empty()
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        for &l in w.letters() {
            let g = l.to_ascii_lowercase() as char;
            if !self.generators.contains(&g) {
                return Err(Error::UnknownGenerator(l as char));
            }
        }
        Ok(())
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let w = Word::parse(s)?;
        self.check_word(&w)?;
        Ok(w)
    }

    /// Dehn reduction on a linear word (identity for free presentations).
    pub fn dehn_reduce(&self, w: &Word) -> Word {
        let Some(rels) = &self.dehn else {
            return w.free_reduce();
        };
        let mut cur = w.free_reduce().into_letters();
        'outer: loop {
            for i in 0..cur.len() {
                for r in rels {
                    let rl = r.letters();
                    let k = common_prefix(&cur[i..], rl);
                    if 2 * k > rl.len() {
                        let mut next = cur[..i].to_vec();
                        next.extend(rl[k..].iter().rev().map(|&l| inverse_letter(l)));
                        next.extend_from_slice(&cur[i + k..]);
                        cur = Word(next).free_reduce().into_letters();
                        continue 'outer;
                    }
                }
            }
            return Word(cur);
        }
    }

    /// Cyclic Dehn reduction: no cyclic subword is more than half a relator.
    pub fn dehn_cyclic_reduce(&self, w: &Word) -> Word {
        let mut cur = w.cyclic_reduce().1;
        let Some(rels) = &self.dehn else {
            return cur;
        };
        'outer: loop {
            let n = cur.len();
            for i in 0..n {
                let rot = cur.rotate(i);
                for r in rels {
                    let rl = r.letters();
                    let k = common_prefix(rot.letters(), rl);
                    if 2 * k > rl.len() {
                        let mut next: Vec<u8> = rl[k..].iter().rev().map(|&l| inverse_letter(l)).collect();
                        next.extend_from_slice(&rot.letters()[k..]);
                        cur = Word(next).cyclic_reduce().1;
                        continue 'outer;
                    }
                }
            }
            return cur;
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.dehn_reduce(w).is_empty()
    }

    /// Canonical representative. For one-relator presentations this is the
    /// least rotation of the cyclic Dehn reduction, which is deterministic but
    /// not a complete conjugacy invariant; use [`Self::same_class`] for equality.
    pub fn canonical_form(&self, w: &Word) -> Result<ConjClass> {
        self.check_word(w)?;
        if self.is_free() {
            return canonical_form(w);
        }
        let core = self.dehn_cyclic_reduce(w);
        if core.is_empty() {
            return Err(Error::TrivialCurve);
        }
        Ok(ConjClass::from_canonical(core.min_rotation()))
    }

    /// Conjugacy test. Exact for free presentations; for one-relator
    /// presentations a bounded search over rotations and conjugators of
    /// length at most 3, checked with Dehn's algorithm.
    pub fn same_class(&self, c: &ConjClass, d: &ConjClass) -> bool {
        if c == d {
            return true;
        }
        if self.is_free() {
            return false;
        }
        let u = c.canonical();
        let v = d.canonical();
        let ball = crate::words::ball(&self.generators, 3);
        for i in 0..u.len() {
            let ur = u.rotate(i);
            for j in 0..v.len() {
                let vr_inv = v.rotate(j).inverse();
                for h in &ball {
                    let t = h.concat(&ur).concat(&h.inverse()).concat(&vr_inv);
                    if self.is_trivial(&t) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

/// All freely reduced words of length at most `radius`, in shortlex order.
pub fn ball(generators: &[char], radius: usize) -> Vec<Word> {
    let mut letters: Vec<u8> = generators.iter().map(|&g| g as u8).collect();
    letters.extend(generators.iter().map(|&g| (g as u8).to_ascii_uppercase()));
    letters.sort_by_key(|&l| letter_rank(l));
    let mut out = vec![Word::new()];
    let mut frontier = vec![Word::new()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.0.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// A finite formal union of oriented classes with positive rational weights.
#[derive(Clone)]
pub struct MultiCurve {
    surface: Arc<SurfacePresentation>,
    components: BTreeMap<ConjClass, Weight>,
}

impl PartialEq for MultiCurve {
    fn eq(&self, other: &Self) -> bool {
        self.surface.name == other.surface.name && self.components == other.components
    }
}

impl Eq for MultiCurve {}

impl MultiCurve {
    pub fn empty(surface: Arc<SurfacePresentation>) -> Self {
        MultiCurve {
            surface,
            components: BTreeMap::new(),
        }
    }

    pub fn single(surface: Arc<SurfacePresentation>, c: ConjClass, w: Weight) -> Self {
        let mut m = MultiCurve::empty(surface);
        m.insert(c, w);
        m
    }

    /// Weight-one curve from a word literal.
    pub fn from_word(surface: Arc<SurfacePresentation>, w: &str) -> Result<Self> {
        let word = surface.parse_word(w)?;
        let c = surface.canonical_form(&word)?;
        Ok(MultiCurve::single(surface, c, Weight::one()))
    }

    /// Parses `"1/5*aabab; 2*b"`. Terms without `*` have weight 1; trivial
    /// words are dropped.
    pub fn parse(surface: Arc<SurfacePresentation>, s: &str) -> Result<Self> {
        let mut m = MultiCurve::empty(surface.clone());
        for term in s.split(';') {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let (w, word) = match term.split_once('*') {
                Some((w, word)) => (parse_rational(w)?, word.trim()),
                None => (Weight::one(), term),
            };
            if w.is_negative() {
                return Err(Error::Parse(format!("negative weight in '{term}'")));
            }
            let word = surface.parse_word(word)?;
            match surface.canonical_form(&word) {
                Ok(c) => m.insert(c, w),
                Err(Error::TrivialCurve) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(m)
    }

    pub fn surface(&self) -> &Arc<SurfacePresentation> {
        &self.surface
    }

    /// Adds `w` copies of `c`, merging with a parallel component if present.
    pub fn insert(&mut self, c: ConjClass, w: Weight) {
        if w.is_zero() {
            return;
        }
        let key = if self.surface.is_free() {
            c
        } else {
            self.components
                .keys()
                .find(|k| self.surface.same_class(k, &c))
                .cloned()
                .unwrap_or(c)
        };
        let e = self.components.entry(key.clone()).or_insert_with(Weight::zero);
        *e += w;
        if e.is_zero() {
            self.components.remove(&key);
        }
    }

    /// Removes weight `w` from component `c`; deletes it when it reaches zero.
    pub fn remove_weight(&mut self, c: &ConjClass, w: &Weight) -> Result<()> {
        let cur = self
            .components
            .get_mut(c)
            .ok_or_else(|| Error::InvalidCrossing(format!("no component {c}")))?;
        if &*cur < w {
            return Err(Error::WeightMismatch(fmt_rational(cur), fmt_rational(w)));
        }
        *cur -= w;
        if cur.is_zero() {
            self.components.remove(c);
        }
        Ok(())
    }

    pub fn components(&self) -> impl Iterator<Item = (&ConjClass, &Weight)> {
        self.components.iter()
    }

    pub fn classes(&self) -> impl Iterator<Item = &ConjClass> {
        self.components.keys()
    }

    pub fn weight_of(&self, c: &ConjClass) -> Option<&Weight> {
        self.components.get(c)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> Weight {
        self.components.values().fold(Weight::zero(), |a, b| a + b)
    }

    /// Least common denominator of the weights.
    pub fn common_denominator(&self) -> BigInt {
        self.components
            .values()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.components.values().all(|w| w.is_integer())
    }

    pub fn scale(&self, n: &Weight) -> MultiCurve {
        let mut m = MultiCurve::empty(self.surface.clone());
        for (c, w) in &self.components {
            m.insert(c.clone(), w * n);
        }
        m
    }

    pub fn union(&self, other: &MultiCurve) -> Result<MultiCurve> {
        if self.surface.name != other.surface.name {
            return Err(Error::PresentationMismatch(
                self.surface.name.clone(),
                other.surface.name.clone(),
            ));
        }
        let mut m = self.clone();
        for (c, w) in &other.components {
            m.insert(c.clone(), w.clone());
        }
        Ok(m)
    }

    pub fn reverse_orientation(&self) -> MultiCurve {
        let mut m = MultiCurve::empty(self.surface.clone());
        for (c, w) in &self.components {
            let r = if self.surface.is_free() {
                c.reverse()
            } else {
                self.surface
                    .canonical_form(&c.canonical().inverse())
                    .expect("nontrivial")
            };
            m.insert(r, w.clone());
        }
        m
    }

    /// Component-wise power `C^n`, weights unchanged.
    pub fn power(&self, n: usize) -> MultiCurve {
        let mut m = MultiCurve::empty(self.surface.clone());
        for (c, w) in &self.components {
            m.insert(power(c, n), w.clone());
        }
        m
    }

    /// Unoriented representative: each component replaced by the smaller of
    /// itself and its reverse.
    pub fn unoriented(&self) -> MultiCurve {
        let mut m = MultiCurve::empty(self.surface.clone());
        for (c, w) in &self.components {
            m.insert(c.unoriented(), w.clone());
        }
        m
    }
}

impl fmt::Display for MultiCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (c, w) in &self.components {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            if w.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{}*{c}", fmt_rational(w))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiCurve({}: {self})", self.surface.name)
    }
}

/// Free-group scale helper used by tests and the CLI.
pub fn scale(c: &MultiCurve, n: &Weight) -> MultiCurve {
    c.scale(n)
}

pub fn union(c: &MultiCurve, d: &MultiCurve) -> Result<MultiCurve> {
    c.union(d)
}

pub fn reverse_orientation(c: &MultiCurve) -> MultiCurve {
    c.reverse_orientation()
}
