//! Elastic graphs: graph length, extremal length and `E_p` energies, both
//! for curves drawn on the graph and for surface curves through a filling
//! embedding.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::axis_walk::{element_length, Step, StepSet};
use crate::error::{Error, Result};
use crate::words::{ConjClass, MultiCurve, SurfacePresentation, Word};

pub const FILLING_RADIUS: usize = 4;
pub const DEFAULT_CUTOFF: usize = 8;
const MAX_ITER: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElasticGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

impl ElasticGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        let mut ids = HashSet::new();
        for e in &edges {
            if !(e.alpha > 0.0 && e.alpha.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {} has alpha {}", e.id, e.alpha)));
            }
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(Error::InvalidGraph(format!("edge {} has a missing endpoint", e.id)));
            }
            if !ids.insert(e.id.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
        }
        let g = ElasticGraph { vertices, edges };
        if g.tree_parent().iter().any(|p| p.is_none()) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    /// One vertex with a loop per entry of `alphas`, named `a`, `b`, ...
    pub fn rose(alphas: &[f64]) -> Result<Self> {
        let edges = alphas
            .iter()
            .enumerate()
            .map(|(i, &alpha)| GraphEdge {
                id: ((b'a' + i as u8) as char).to_string(),
                from: 0,
                to: 0,
                alpha,
            })
            .collect();
        ElasticGraph::new(vec!["v".into()], edges)
    }

    /// Two vertices joined by three edges `x`, `y`, `z`.
    pub fn theta(alphas: [f64; 3]) -> Result<Self> {
        let edges = ["x", "y", "z"]
            .iter()
            .zip(alphas)
            .map(|(id, alpha)| GraphEdge {
                id: id.to_string(),
                from: 0,
                to: 1,
                alpha,
            })
            .collect();
        ElasticGraph::new(vec!["u".into(), "v".into()], edges)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.alpha).collect()
    }

    /// Breadth-first spanning tree from vertex 0: for each vertex the tree
    /// edge leading to it (`Some(None)` for the root).
    fn tree_parent(&self) -> Vec<Option<Option<DirEdge>>> {
        let mut parent = vec![None; self.vertices.len()];
        parent[0] = Some(None);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                for d in [DirEdge::new(i, true), DirEdge::new(i, false)] {
                    let (s, t) = if d.forward { (e.from, e.to) } else { (e.to, e.from) };
                    if s == v && parent[t].is_none() {
                        parent[t] = Some(Some(d));
                        queue.push_back(t);
                    }
                }
            }
        }
        parent
    }

    fn source(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.from
        } else {
            e.to
        }
    }

    fn target(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.to
        } else {
            e.from
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        DirEdge { edge, forward }
    }

    pub fn reverse(self) -> Self {
        DirEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }

    fn code(self) -> usize {
        2 * self.edge + usize::from(!self.forward)
    }
}

/// Weighted closed walks on a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphCurve {
    pub components: Vec<(Vec<DirEdge>, f64)>,
}

impl GraphCurve {
    pub fn new(g: &ElasticGraph, components: Vec<(Vec<DirEdge>, f64)>) -> Result<Self> {
        for (walk, w) in &components {
            if !(*w >= 0.0) {
                return Err(Error::InvalidGraph("negative weight".into()));
            }
            for (k, d) in walk.iter().enumerate() {
                if d.edge >= g.edges.len() {
                    return Err(Error::EdgeMismatch(format!("edge index {}", d.edge)));
                }
                let next = walk[(k + 1) % walk.len()];
                if g.target(*d) != g.source(next) {
                    return Err(Error::InvalidGraph("walk is not closed".into()));
                }
            }
        }
        Ok(GraphCurve { components })
    }

    /// Weighted number of traversals of each edge, in either direction.
    pub fn multiplicities(&self, edges: usize) -> Vec<f64> {
        let mut n = vec![0.0; edges];
        for (walk, w) in &self.components {
            for d in walk {
                if d.edge < edges {
                    n[d.edge] += w;
                }
            }
        }
        n
    }

    /// Removes backtracks `e ē`, cyclically; empty components are dropped.
    pub fn tighten(&self) -> GraphCurve {
        let mut out = Vec::new();
        for (walk, w) in &self.components {
            let t = tighten_walk(walk);
            if !t.is_empty() {
                out.push((t, *w));
            }
        }
        GraphCurve { components: out }
    }
}

fn tighten_walk(walk: &[DirEdge]) -> Vec<DirEdge> {
    let mut st: Vec<DirEdge> = Vec::with_capacity(walk.len());
    for &d in walk {
        if st.last() == Some(&d.reverse()) {
            st.pop();
        } else {
            st.push(d);
        }
    }
    let mut lo = 0;
    let mut hi = st.len();
    while hi - lo >= 2 && st[lo] == st[hi - 1].reverse() {
        lo += 1;
        hi -= 1;
    }
    st[lo..hi].to_vec()
}

/// A nonnegative value per edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingVector(pub Vec<f64>);

/// `Σ n(e)·ρ(e)·α(e)` for the tightened curve.
pub fn graph_length(c: &GraphCurve, rho: &ScalingVector, g: &ElasticGraph) -> Result<f64> {
    if rho.0.len() != g.edges.len() {
        return Err(Error::EdgeMismatch(format!(
            "{} scaling values for {} edges",
            rho.0.len(),
            g.edges.len()
        )));
    }
    let n = c.tighten().multiplicities(g.edges.len());
    Ok(n.iter().zip(&rho.0).zip(&g.edges).map(|((n, r), e)| n * r * e.alpha).sum())
}

/// `Area_ρ = Σ ρ(e)²·α(e)`.
pub fn area(rho: &ScalingVector, g: &ElasticGraph) -> f64 {
    rho.0.iter().zip(&g.edges).map(|(r, e)| r * r * e.alpha).sum()
}

/// `√(Σ n(e)²·α(e))` with the optimal scaling `ρ ∝ n` normalized to unit area.
pub fn el_graph(c: &GraphCurve, g: &ElasticGraph) -> (f64, ScalingVector) {
    let n = c.tighten().multiplicities(g.edges.len());
    let v: f64 = n.iter().zip(&g.edges).map(|(n, e)| n * n * e.alpha).sum::<f64>().sqrt();
    if v == 0.0 {
        return (0.0, ScalingVector(vec![0.0; n.len()]));
    }
    (v, ScalingVector(n.iter().map(|x| x / v).collect()))
}

/// The same supremum found by projected supergradient ascent.
pub fn el_graph_ascent(c: &GraphCurve, g: &ElasticGraph) -> (f64, ScalingVector) {
    let n = c.tighten().multiplicities(g.edges.len());
    let lifts = vec![vec![n]];
    let problem = Problem::new(&lifts, &[1.0], &g.alphas());
    let (val, sigma, _) = problem.ascent();
    (val, problem.to_rho(&sigma))
}

fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::BadExponent(p));
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

/// Hölder closed form `(Σ n^q·α)^{1/q}`, `1/p + 1/q = 1`, with the optimal σ.
pub fn e_p(c: &GraphCurve, g: &ElasticGraph, p: f64) -> Result<(f64, ScalingVector)> {
    let q = conjugate_exponent(p)?;
    let n = c.tighten().multiplicities(g.edges.len());
    let alpha = g.alphas();
    if q.is_infinite() {
        let (k, m) = n
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        let mut s = vec![0.0; n.len()];
        if m > 0.0 {
            s[k] = 1.0 / alpha[k];
        }
        return Ok((m, ScalingVector(s)));
    }
    if q == 1.0 {
        let len = n.iter().zip(&alpha).map(|(n, a)| n * a).sum();
        return Ok((len, ScalingVector(vec![1.0; n.len()])));
    }
    let v = q_norm(&n, &alpha, q);
    let s = n.iter().map(|x| if v > 0.0 { (x / v).powf(q - 1.0) } else { 0.0 }).collect();
    Ok((v, ScalingVector(s)))
}

fn q_norm(x: &[f64], g: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return x.iter().zip(g).filter(|(_, g)| **g > 0.0).map(|(x, _)| *x).fold(0.0, f64::max);
    }
    x.iter().zip(g).map(|(x, g)| g * x.powf(q)).sum::<f64>().powf(1.0 / q)
}

/// A filling map of an elastic graph into a surface, given by the word read
/// along each edge.
#[derive(Clone, Debug)]
pub struct GraphEmbedding {
    pub graph: ElasticGraph,
    pub presentation: Arc<SurfacePresentation>,
    pub edge_images: Vec<Word>,
    pub filling: bool,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    id: String,
    from: String,
    to: String,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<EdgeFile>,
    embedding: BTreeMap<String, String>,
    #[serde(default)]
    surface: Option<String>,
}

impl GraphEmbedding {
    pub fn new(graph: ElasticGraph, presentation: Arc<SurfacePresentation>, edge_images: Vec<Word>) -> Result<Self> {
        if edge_images.len() != graph.edges.len() {
            return Err(Error::EdgeMismatch(format!(
                "{} images for {} edges",
                edge_images.len(),
                graph.edges.len()
            )));
        }
        for w in &edge_images {
            presentation.check_word(w)?;
        }
        let edge_images: Vec<Word> = edge_images.iter().map(|w| w.free_reduce()).collect();
        let mut emb = GraphEmbedding {
            graph,
            presentation,
            edge_images,
            filling: false,
        };
        emb.filling = emb.check_filling();
        Ok(emb)
    }

    /// The rose whose petals map to the presentation's generators.
    pub fn standard_rose(presentation: Arc<SurfacePresentation>, alphas: &[f64]) -> Result<Self> {
        if alphas.len() != presentation.generators.len() {
            return Err(Error::EdgeMismatch("one alpha per generator".into()));
        }
        let graph = ElasticGraph::rose(alphas)?;
        let images = presentation.generators.iter().map(|c| Word::from_letters(vec![*c as u8])).collect();
        GraphEmbedding::new(graph, presentation, images)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s)?;
        let idx = |name: &str| {
            f.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {name}")))
        };
        let mut edges = Vec::new();
        let mut images = Vec::new();
        for e in &f.edges {
            edges.push(GraphEdge {
                id: e.id.clone(),
                from: idx(&e.from)?,
                to: idx(&e.to)?,
                alpha: e.alpha,
            });
            let w = f
                .embedding
                .get(&e.id)
                .ok_or_else(|| Error::EdgeMismatch(format!("no image for edge {}", e.id)))?;
            images.push(Word::parse(w)?);
        }
        if f.embedding.len() != f.edges.len() {
            return Err(Error::EdgeMismatch("images for unknown edges".into()));
        }
        let presentation = SurfacePresentation::builtin(f.surface.as_deref().unwrap_or("pt"))?;
        GraphEmbedding::new(ElasticGraph::new(f.vertices.clone(), edges)?, presentation, images)
    }

    pub fn to_json(&self) -> String {
        let g = &self.graph;
        let f = GraphFile {
            vertices: g.vertices.clone(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeFile {
                    id: e.id.clone(),
                    from: g.vertices[e.from].clone(),
                    to: g.vertices[e.to].clone(),
                    alpha: e.alpha,
                })
                .collect(),
            embedding: g
                .edges
                .iter()
                .zip(&self.edge_images)
                .map(|(e, w)| (e.id.clone(), w.to_string()))
                .collect(),
            surface: Some(self.presentation.name.clone()),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    pub fn image(&self, d: DirEdge) -> Word {
        let w = &self.edge_images[d.edge];
        if d.forward {
            w.clone()
        } else {
            w.inverse()
        }
    }

    pub fn walk_image(&self, walk: &[DirEdge]) -> Word {
        let mut letters = Vec::new();
        for d in walk {
            letters.extend_from_slice(self.image(*d).letters());
        }
        Word::from_letters(letters).free_reduce()
    }

    /// Images of the fundamental loops of a breadth-first spanning tree.
    pub fn loop_words(&self) -> Vec<Word> {
        let g = &self.graph;
        let parent = g.tree_parent();
        let mut path: Vec<Option<Word>> = vec![None; g.vertices.len()];
        path[0] = Some(Word::new());
        let mut order: Vec<usize> = (0..g.vertices.len()).collect();
        // settle paths in breadth-first order
        let mut settled = 1;
        while settled < order.len() {
            settled = 0;
            for &v in &order {
                if path[v].is_some() {
                    settled += 1;
                    continue;
                }
                if let Some(Some(d)) = parent[v] {
                    if let Some(p) = path[g.source(d)].clone() {
                        path[v] = Some(p.concat(&self.image(d)).free_reduce());
                    }
                }
            }
        }
        order.clear();
        let tree: HashSet<usize> = parent.iter().flatten().flatten().map(|d| d.edge).collect();
        g.edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !tree.contains(i))
            .map(|(i, e)| {
                let p = path[e.from].clone().unwrap_or_default();
                let q = path[e.to].clone().unwrap_or_default();
                p.concat(&self.edge_images[i]).concat(&q.inverse()).free_reduce()
            })
            .collect()
    }

    fn check_filling(&self) -> bool {
        let loops = self.loop_words();
        let set = StepSet::rose(&loops, &self.presentation.generators);
        self.presentation
            .generators
            .iter()
            .all(|c| element_length(&set, &Word::from_letters(vec![*c as u8]), FILLING_RADIUS).is_some())
    }

    pub(crate) fn step_set(&self) -> StepSet {
        let mut steps = Vec::new();
        for (i, e) in self.graph.edges.iter().enumerate() {
            for fwd in [true, false] {
                let d = DirEdge::new(i, fwd);
                steps.push(Step {
                    from: self.graph.source(d),
                    to: self.graph.target(d),
                    image: self.image(d).into_letters(),
                    cost: e.alpha,
                });
            }
        }
        StepSet {
            vertices: self.graph.vertices.len(),
            steps,
            alphabet: crate::axis_walk::full_alphabet(&self.presentation.generators),
        }
    }

    fn require_filling(&self) -> Result<()> {
        if self.filling {
            Ok(())
        } else {
            Err(Error::NotFilling(FILLING_RADIUS))
        }
    }
}

/// A tight closed walk whose image is conjugate to the target class.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub walk: Vec<DirEdge>,
    pub multiplicities: Vec<f64>,
}

fn min_rotation_codes(walk: &[DirEdge]) -> Vec<usize> {
    let codes: Vec<usize> = walk.iter().map(|d| d.code()).collect();
    let k = crate::words::least_rotation_by(&codes, |a, b| a.cmp(b));
    codes[k..].iter().chain(codes[..k].iter()).cloned().collect()
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Pareto-minimal lifts of `c` of combinatorial length at most `cutoff`.
/// Lifts whose multiplicity vector dominates another's are never needed
/// by a minimum over nonnegative scalings, so partial walks that already
/// dominate a found lift are pruned.
pub fn lifts(c: &ConjClass, emb: &GraphEmbedding, cutoff: usize) -> Result<Vec<Lift>> {
    let g = &emb.graph;
    let ne = g.edges.len();
    let target = c.clone();
    let pres = &emb.presentation;
    let mut found: Vec<Lift> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let dirs: Vec<DirEdge> = (0..ne).flat_map(|i| [DirEdge::new(i, true), DirEdge::new(i, false)]).collect();

    struct Frame {
        walk: Vec<DirEdge>,
        image: Vec<u8>,
        mult: Vec<f64>,
    }

    for &first in &dirs {
        let v0 = g.source(first);
        let mut stack = vec![Frame {
            walk: vec![first],
            image: emb.image(first).into_letters(),
            mult: {
                let mut m = vec![0.0; ne];
                m[first.edge] += 1.0;
                m
            },
        }];
        while let Some(fr) = stack.pop() {
            if found.iter().any(|l| dominates(&fr.mult, &l.multiplicities)) {
                continue;
            }
            let last = *fr.walk.last().expect("non-empty");
            if g.target(last) == v0 && last != first.reverse() {
                let img = Word::from_letters(fr.image.clone());
                if let Ok(k) = pres.canonical_form(&img) {
                    let hit = if pres.is_free() { k == target } else { pres.same_class(&k, &target) };
                    if hit && seen.insert(min_rotation_codes(&fr.walk)) {
                        found.retain(|l| !dominates(&l.multiplicities, &fr.mult));
                        found.push(Lift {
                            walk: fr.walk.clone(),
                            multiplicities: fr.mult.clone(),
                        });
                        continue;
                    }
                }
            }
            if fr.walk.len() >= cutoff {
                continue;
            }
            for &d in dirs.iter().rev() {
                if g.source(d) != g.target(last) || d == last.reverse() || d.code() < first.code() {
                    continue;
                }
                let mut image = fr.image.clone();
                for &l in emb.image(d).letters() {
                    if image.last() == Some(&crate::words::inverse_letter(l)) {
                        image.pop();
                    } else {
                        image.push(l);
                    }
                }
                let mut mult = fr.mult.clone();
                mult[d.edge] += 1.0;
                let mut walk = fr.walk.clone();
                walk.push(d);
                stack.push(Frame { walk, image, mult });
            }
        }
    }
    found.sort_by_key(|l| min_rotation_codes(&l.walk));
    Ok(found)
}

/// `max_{σ ≥ 0, |σ| ≤ 1} Σ_i w_i min_k ⟨v_ik, σ⟩` with `v = n·√α`.
struct Problem {
    vecs: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    sqrt_alpha: Vec<f64>,
    dim: usize,
}

impl Problem {
    fn new(lifts: &[Vec<Vec<f64>>], weights: &[f64], alpha: &[f64]) -> Problem {
        let sqrt_alpha: Vec<f64> = alpha.iter().map(|a| a.sqrt()).collect();
        let vecs = lifts
            .iter()
            .map(|ls| {
                ls.iter()
                    .map(|n| n.iter().zip(&sqrt_alpha).map(|(n, s)| n * s).collect())
                    .collect()
            })
            .collect();
        Problem {
            vecs,
            weights: weights.to_vec(),
            sqrt_alpha,
            dim: alpha.len(),
        }
    }

    fn objective(&self, sigma: &[f64]) -> f64 {
        self.vecs
            .iter()
            .zip(&self.weights)
            .map(|(vs, w)| w * vs.iter().map(|v| dot(v, sigma)).fold(f64::INFINITY, f64::min))
            .sum()
    }

    fn supergradient(&self, sigma: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (vs, w) in self.vecs.iter().zip(&self.weights) {
            let vals: Vec<f64> = vs.iter().map(|v| dot(v, sigma)).collect();
            let m = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let ties: Vec<&Vec<f64>> = vs.iter().zip(&vals).filter(|(_, x)| **x <= m + 1e-12).map(|(v, _)| v).collect();
            let k = ties.len() as f64;
            for v in ties {
                for (gi, vi) in g.iter_mut().zip(v) {
                    *gi += w * vi / k;
                }
            }
        }
        g
    }

    /// Linear minimization over the Minkowski sum of the lift hulls.
    fn lmo(&self, x: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.dim];
        for (vs, w) in self.vecs.iter().zip(&self.weights) {
            let best = vs
                .iter()
                .min_by(|a, b| dot(a, x).partial_cmp(&dot(b, x)).unwrap_or(std::cmp::Ordering::Equal))
                .expect("non-empty lift set");
            for (qi, bi) in q.iter_mut().zip(best) {
                *qi += w * bi;
            }
        }
        q
    }

    fn ascent(&self) -> (f64, Vec<f64>, usize) {
        let mut sigma = normalize(&vec![1.0; self.dim]);
        let mut best = self.objective(&sigma);
        let mut best_sigma = sigma.clone();
        let mut last_gain = 0;
        let mut iters = 0;
        for k in 1..=MAX_ITER {
            iters = k;
            let g = self.supergradient(&sigma);
            let gn = norm(&g);
            if gn == 0.0 {
                break;
            }
            let step = 1.0 / ((k as f64).sqrt() * gn);
            let next: Vec<f64> = sigma.iter().zip(&g).map(|(s, g)| (s + step * g).max(0.0)).collect();
            let nn = norm(&next);
            sigma = if nn > 1.0 { next.iter().map(|x| x / nn).collect() } else { next };
            let f = self.objective(&sigma);
            if f > best + 1e-8 * best.abs().max(1.0) {
                last_gain = k;
            }
            if f > best {
                best = f;
                best_sigma = sigma.clone();
            }
            if k - last_gain > 2000 {
                break;
            }
        }
        (best, best_sigma, iters)
    }

    /// Wolfe's minimum-norm point of the Minkowski sum; its norm bounds the
    /// supremum from above and its direction attains it.
    fn min_norm_point(&self) -> Vec<f64> {
        let mut pts: Vec<Vec<f64>> = vec![self.lmo(&vec![1.0; self.dim])];
        let mut lam = vec![1.0];
        let mut x = pts[0].clone();
        for _ in 0..1000 {
            let q = self.lmo(&x);
            let xx = dot(&x, &x);
            if xx - dot(&x, &q) <= 1e-13 * xx.max(1e-300) || pts.iter().any(|p| p == &q) {
                break;
            }
            pts.push(q);
            lam.push(0.0);
            while let Some(alpha) = affine_min_norm(&pts) {
                if alpha.iter().all(|&a| a > 1e-14) {
                    lam = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                for (l, a) in lam.iter().zip(&alpha) {
                    if *a <= 1e-14 && l - a > 0.0 {
                        theta = theta.min(l / (l - a));
                    }
                }
                for (l, a) in lam.iter_mut().zip(&alpha) {
                    *l = theta * a + (1.0 - theta) * *l;
                }
                let keep: Vec<bool> = lam.iter().map(|&l| l > 1e-14).collect();
                let mut i = 0;
                pts.retain(|_| {
                    i += 1;
                    keep[i - 1]
                });
                lam.retain(|&l| l > 1e-14);
                let s: f64 = lam.iter().sum();
                lam.iter_mut().for_each(|l| *l /= s);
                if pts.len() <= 1 {
                    break;
                }
            }
            x = vec![0.0; self.dim];
            for (p, l) in pts.iter().zip(&lam) {
                for (xi, pi) in x.iter_mut().zip(p) {
                    *xi += l * pi;
                }
            }
        }
        x
    }

    fn to_rho(&self, sigma: &[f64]) -> ScalingVector {
        ScalingVector(sigma.iter().zip(&self.sqrt_alpha).map(|(s, a)| s / a).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// Coefficients (summing to one) of the minimum-norm point of the affine
/// hull of `pts`.
fn affine_min_norm(pts: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = pts.len();
    let n = k + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&pts[i], &pts[j]);
        }
        a[i][k] = 1.0;
        a[k][i] = 1.0;
    }
    a[k][n] = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot = a[col].clone();
                    for (x, p) in a[r][col..=n].iter_mut().zip(&pivot[col..=n]) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][n] / a[i][i]).collect())
}

/// Result of the embedded extremal-length computation.
#[derive(Clone, Debug, Serialize)]
pub struct ElResult {
    /// `√EL`, the best primal value found.
    pub sqrt_el: f64,
    /// Norm of the minimum-norm point, an upper bound on `√EL`.
    pub dual_bound: f64,
    pub rho: ScalingVector,
    pub ascent_value: f64,
    pub iterations: usize,
    pub active_lifts: Vec<Vec<Vec<DirEdge>>>,
    pub stabilized: bool,
}

impl Serialize for DirEdge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}{}", self.edge, if self.forward { "+" } else { "-" }))
    }
}

fn component_lifts(c: &MultiCurve, emb: &GraphEmbedding, cutoff: usize) -> Result<(Vec<Vec<Lift>>, Vec<f64>)> {
    if c.surface().name != emb.presentation.name {
        return Err(Error::PresentationMismatch(c.surface().name.clone(), emb.presentation.name.clone()));
    }
    emb.require_filling()?;
    let mut all = Vec::new();
    let mut weights = Vec::new();
    for (k, w) in c.components() {
        let ls = lifts(k, emb, cutoff)?;
        if ls.is_empty() {
            return Err(Error::NoLiftFound(cutoff));
        }
        all.push(ls);
        weights.push(w.to_f64().unwrap_or(f64::NAN));
    }
    Ok((all, weights))
}

fn el_at(c: &MultiCurve, emb: &GraphEmbedding, cutoff: usize) -> Result<ElResult> {
    let (lifts, weights) = component_lifts(c, emb, cutoff)?;
    let dim = emb.graph.edges.len();
    if lifts.is_empty() {
        return Ok(ElResult {
            sqrt_el: 0.0,
            dual_bound: 0.0,
            rho: ScalingVector(vec![0.0; dim]),
            ascent_value: 0.0,
            iterations: 0,
            active_lifts: vec![],
            stabilized: true,
        });
    }
    let mults: Vec<Vec<Vec<f64>>> = lifts
        .iter()
        .map(|ls| ls.iter().map(|l| l.multiplicities.clone()).collect())
        .collect();
    let problem = Problem::new(&mults, &weights, &emb.graph.alphas());
    let (ascent_value, ascent_sigma, iterations) = problem.ascent();
    let x = problem.min_norm_point();
    let dual = norm(&x);
    let polished = if dual > 0.0 { normalize(&x) } else { ascent_sigma.clone() };
    let pv = problem.objective(&polished);
    let (value, sigma) = if pv >= ascent_value { (pv, polished) } else { (ascent_value, ascent_sigma) };
    let active = lifts
        .iter()
        .zip(&problem.vecs)
        .map(|(ls, vs)| {
            let vals: Vec<f64> = vs.iter().map(|v| dot(v, &sigma)).collect();
            let m = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            ls.iter()
                .zip(&vals)
                .filter(|(_, x)| **x <= m + 1e-9 * m.abs().max(1.0))
                .map(|(l, _)| l.walk.clone())
                .collect()
        })
        .collect();
    Ok(ElResult {
        sqrt_el: value,
        dual_bound: dual,
        rho: problem.to_rho(&sigma),
        ascent_value,
        iterations,
        active_lifts: active,
        stabilized: true,
    })
}

/// `√EL(C; Γ, α, ι)`: the supremum over scalings of the shortest lift length
/// divided by `√Area`, over lifts up to `cutoff` edges. `stabilized` records
/// whether the value is unchanged at `cutoff + 2`.
pub fn el_embedded(c: &MultiCurve, emb: &GraphEmbedding, cutoff: usize) -> Result<ElResult> {
    let mut r = el_at(c, emb, cutoff)?;
    r.stabilized = match el_at(c, emb, cutoff + 2) {
        Ok(next) => (next.sqrt_el - r.sqrt_el).abs() <= 1e-9 * r.sqrt_el.max(1.0),
        Err(_) => false,
    };
    Ok(r)
}

/// `E_p` through the embedding: `p = 2` is `√EL`, `p = ∞` the graph length;
/// other exponents minimize the dual `q`-norm over the lift hulls by
/// projected subgradient descent, returning `(upper, lower)` bounds.
pub fn e_p_embedded(c: &MultiCurve, emb: &GraphEmbedding, cutoff: usize, p: f64) -> Result<(f64, f64)> {
    let q = conjugate_exponent(p)?;
    if p == 2.0 {
        let r = el_at(c, emb, cutoff)?;
        return Ok((r.dual_bound.max(r.sqrt_el), r.sqrt_el));
    }
    let (lifts, weights) = component_lifts(c, emb, cutoff)?;
    let alpha = emb.graph.alphas();
    let dim = alpha.len();
    let len = |n: &[f64]| dot(n, &alpha);
    if q == 1.0 {
        let v: f64 = lifts
            .iter()
            .zip(&weights)
            .map(|(ls, w)| w * ls.iter().map(|l| len(&l.multiplicities)).fold(f64::INFINITY, f64::min))
            .sum();
        return Ok((v, v));
    }
    let mut lam: Vec<Vec<f64>> = lifts.iter().map(|ls| vec![1.0 / ls.len() as f64; ls.len()]).collect();
    let point = |lam: &[Vec<f64>]| {
        let mut x = vec![0.0; dim];
        for ((ls, l), w) in lifts.iter().zip(lam).zip(&weights) {
            for (lift, li) in ls.iter().zip(l) {
                for (xi, ni) in x.iter_mut().zip(&lift.multiplicities) {
                    *xi += w * li * ni;
                }
            }
        }
        x
    };
    let primal = |sigma: &[f64]| -> f64 {
        let p_norm = if p.is_infinite() {
            sigma.iter().cloned().fold(0.0, f64::max)
        } else {
            sigma.iter().zip(&alpha).map(|(s, g)| g * s.powf(p)).sum::<f64>().powf(1.0 / p)
        };
        if p_norm == 0.0 {
            return 0.0;
        }
        let l: f64 = lifts
            .iter()
            .zip(&weights)
            .map(|(ls, w)| {
                w * ls
                    .iter()
                    .map(|lf| lf.multiplicities.iter().zip(sigma).zip(&alpha).map(|((n, s), g)| n * s * g).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        l / p_norm
    };
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    for k in 1..=20_000usize {
        let x = point(&lam);
        let h = q_norm(&x, &alpha, q);
        upper = upper.min(h);
        // gradient of the q-norm; for q = ∞ the indicator of the largest entry
        let grad: Vec<f64> = if q.is_infinite() {
            let (i, _) = x
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            (0..dim).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
        } else if h > 0.0 {
            x.iter().zip(&alpha).map(|(x, g)| g * (x / h).powf(q - 1.0)).collect()
        } else {
            vec![0.0; dim]
        };
        // σ with ⟨x·α, σ⟩ = ‖x‖_q‖σ‖_p
        let sigma: Vec<f64> = if q.is_infinite() {
            grad.iter().zip(&alpha).map(|(g, a)| g / a).collect()
        } else {
            x.iter().map(|x| if h > 0.0 { (x / h).powf(q - 1.0) } else { 0.0 }).collect()
        };
        lower = lower.max(primal(&sigma));
        if upper - lower <= 1e-10 * upper.max(1.0) {
            break;
        }
        let step = 0.5 / (k as f64).sqrt();
        for ((ls, l), w) in lifts.iter().zip(lam.iter_mut()).zip(&weights) {
            let g: Vec<f64> = ls.iter().map(|lf| w * dot(&grad, &lf.multiplicities)).collect();
            let gn = norm(&g).max(1e-300);
            let y: Vec<f64> = l.iter().zip(&g).map(|(li, gi)| li - step * gi / gn).collect();
            *l = project_simplex(&y);
        }
    }
    Ok((upper, lower))
}

fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Shortest lift length `Σ n(e)·α(e)` over all lifts of `c`, searched with
/// a window around the axis of `c`.
pub fn min_lift_length(c: &ConjClass, emb: &GraphEmbedding, window: usize) -> Result<f64> {
    Ok(min_lift_lengths(c, emb, 1, window)?[0])
}

pub(crate) fn min_lift_lengths(c: &ConjClass, emb: &GraphEmbedding, n_max: usize, window: usize) -> Result<Vec<f64>> {
    if !emb.presentation.is_free() {
        return Err(Error::Unsupported(format!(
            "graph length on the relator surface '{}'",
            emb.presentation.name
        )));
    }
    emb.require_filling()?;
    let root = c.primitive_root();
    let k = c.power();
    let costs = crate::axis_walk::power_costs(&emb.step_set(), root, n_max * k, window);
    Ok((1..=n_max).map(|n| costs[n * k - 1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::canonical_form;
    use approx::assert_abs_diff_eq;

    fn pt() -> Arc<SurfacePresentation> {
        SurfacePresentation::builtin("pt").unwrap()
    }

    fn loop_curve(n: usize, w: f64) -> GraphCurve {
        GraphCurve {
            components: vec![(vec![DirEdge::new(0, true); n], w)],
        }
    }

    #[test]
    fn tighten_examples() {
        let g = ElasticGraph::rose(&[1.0, 1.0]).unwrap();
        let e = DirEdge::new(0, true);
        let f = DirEdge::new(1, true);
        let c = GraphCurve::new(&g, vec![(vec![e, e.reverse(), f], 1.0)]).unwrap();
        assert_eq!(c.tighten().components, vec![(vec![f], 1.0)]);
        let t = c.tighten();
        assert_eq!(t.tighten(), t);
        let before = c.multiplicities(2);
        let after = t.multiplicities(2);
        assert!(after.iter().zip(&before).all(|(a, b)| a <= b));
        let cyc = GraphCurve::new(&g, vec![(vec![f, e, f.reverse()], 1.0)]).unwrap();
        assert_eq!(cyc.tighten().components, vec![(vec![e], 1.0)]);
    }

    #[test]
    fn length_examples() {
        let g = ElasticGraph::rose(&[2.0]).unwrap();
        let c = loop_curve(3, 1.0);
        assert_eq!(graph_length(&c, &ScalingVector(vec![1.0]), &g).unwrap(), 6.0);
        assert_eq!(graph_length(&c, &ScalingVector(vec![0.0]), &g).unwrap(), 0.0);
        assert_eq!(graph_length(&c, &ScalingVector(vec![2.0]), &g).unwrap(), 12.0);
        assert!(matches!(graph_length(&c, &ScalingVector(vec![]), &g), Err(Error::EdgeMismatch(_))));
    }

    #[test]
    fn el_closed_form_and_ascent() {
        let g = ElasticGraph::rose(&[2.0]).unwrap();
        let (v, rho) = el_graph(&loop_curve(3, 1.0), &g);
        assert_abs_diff_eq!(v, 18f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(area(&rho, &g), 1.0, epsilon = 1e-12);
        let (a, _) = el_graph_ascent(&loop_curve(3, 1.0), &g);
        assert_abs_diff_eq!(a, 18f64.sqrt(), epsilon = 1e-6);
        assert_eq!(el_graph(&loop_curve(0, 1.0), &g).0, 0.0);
        // supremand unchanged when ρ doubles
        let c = loop_curve(3, 1.0);
        let r2 = ScalingVector(rho.0.iter().map(|x| 2.0 * x).collect());
        let s1 = graph_length(&c, &rho, &g).unwrap() / area(&rho, &g).sqrt();
        let s2 = graph_length(&c, &r2, &g).unwrap() / area(&r2, &g).sqrt();
        assert_abs_diff_eq!(s1, s2, epsilon = 1e-12);
    }

    #[test]
    fn e_p_examples() {
        let g = ElasticGraph::rose(&[1.0, 1.0]).unwrap();
        let e = DirEdge::new(0, true);
        let f = DirEdge::new(1, true);
        let c = GraphCurve::new(&g, vec![(vec![e, e, e, f], 1.0)]).unwrap();
        assert_eq!(e_p(&c, &g, 1.0).unwrap().0, 3.0);
        assert_eq!(e_p(&c, &g, f64::INFINITY).unwrap().0, 4.0);
        assert_abs_diff_eq!(e_p(&c, &g, 2.0).unwrap().0, el_graph(&c, &g).0, epsilon = 1e-12);
        assert_eq!(
            e_p(&c, &g, f64::INFINITY).unwrap().0,
            graph_length(&c, &ScalingVector(vec![1.0, 1.0]), &g).unwrap()
        );
        assert!(matches!(e_p(&c, &g, 0.5), Err(Error::BadExponent(_))));
        // grid-search oracle over the simplex for p = 1
        let best = (0..=1000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                3.0 * t + (1.0 - t)
            })
            .fold(0.0, f64::max);
        assert_eq!(best, 3.0);
    }

    #[test]
    fn embedded_el_examples() {
        let emb = GraphEmbedding::standard_rose(pt(), &[1.0, 1.0]).unwrap();
        assert!(emb.filling);
        let a = MultiCurve::parse(pt(), "a").unwrap();
        let r = el_embedded(&a, &emb, 6).unwrap();
        assert_abs_diff_eq!(r.sqrt_el, 1.0, epsilon = 1e-9);
        assert!(r.stabilized);
        let ab = MultiCurve::parse(pt(), "ab").unwrap();
        assert_abs_diff_eq!(el_embedded(&ab, &emb, 6).unwrap().sqrt_el, 2f64.sqrt(), epsilon = 1e-9);
        let b = MultiCurve::parse(pt(), "b").unwrap();
        let u = el_embedded(&a.union(&b).unwrap(), &emb, 6).unwrap().sqrt_el;
        let s = el_embedded(&a, &emb, 6).unwrap().sqrt_el + el_embedded(&b, &emb, 6).unwrap().sqrt_el;
        assert!(u <= s + 1e-9);
    }

    #[test]
    fn brute_force_lifts_on_rose() {
        let emb = GraphEmbedding::standard_rose(pt(), &[1.0, 1.0]).unwrap();
        let k = canonical_form(&Word::parse("a").unwrap()).unwrap();
        let ls = lifts(&k, &emb, 6).unwrap();
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].multiplicities, vec![1.0, 0.0]);
    }

    #[test]
    fn redundant_rose_has_several_lifts() {
        // petals a, b, ab: the class ab lifts to the third petal and to a·b
        let g = ElasticGraph::rose(&[1.0, 1.0, 1.0]).unwrap();
        let imgs = vec![Word::parse("a").unwrap(), Word::parse("b").unwrap(), Word::parse("ab").unwrap()];
        let emb = GraphEmbedding::new(g, pt(), imgs).unwrap();
        assert!(emb.filling);
        let k = canonical_form(&Word::parse("ab").unwrap()).unwrap();
        let ls = lifts(&k, &emb, 6).unwrap();
        let mut m: Vec<Vec<f64>> = ls.iter().map(|l| l.multiplicities.clone()).collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(m, vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let c = MultiCurve::parse(pt(), "ab").unwrap();
        let r = el_embedded(&c, &emb, 6).unwrap();
        // max over unit σ of min(σ₃, σ₁ + σ₂): σ = (1,1,2)/√6 gives 2/√6
        assert_abs_diff_eq!(r.sqrt_el, 2.0 / 6f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.dual_bound, r.sqrt_el, epsilon = 1e-9);
        let c2 = MultiCurve::parse(pt(), "2*ab").unwrap();
        assert_abs_diff_eq!(el_embedded(&c2, &emb, 6).unwrap().sqrt_el, 2.0 * r.sqrt_el, epsilon = 1e-6);
    }

    #[test]
    fn graph_length_through_embedding() {
        let emb = GraphEmbedding::standard_rose(pt(), &[1.0, 2.0]).unwrap();
        let k = canonical_form(&Word::parse("ab").unwrap()).unwrap();
        assert_eq!(min_lift_length(&k, &emb, 1).unwrap(), 3.0);
        let (up, lo) = e_p_embedded(&MultiCurve::parse(pt(), "ab").unwrap(), &emb, 6, f64::INFINITY).unwrap();
        assert_eq!(up, 3.0);
        assert_eq!(lo, 3.0);
    }

    #[test]
    fn theta_graph_embedding() {
        let g = ElasticGraph::theta([1.0, 2.0, 0.5]).unwrap();
        let imgs = vec![Word::new(), Word::parse("A").unwrap(), Word::parse("B").unwrap()];
        let emb = GraphEmbedding::new(g, pt(), imgs).unwrap();
        assert!(emb.filling);
        let a = canonical_form(&Word::parse("a").unwrap()).unwrap();
        let ab = canonical_form(&Word::parse("ab").unwrap()).unwrap();
        let a_b = canonical_form(&Word::parse("aB").unwrap()).unwrap();
        // x ȳ reads a; x ȳ x z̄ reads ab; z ȳ reads Ba
        assert_eq!(min_lift_length(&a, &emb, 2).unwrap(), 3.0);
        assert_eq!(min_lift_length(&ab, &emb, 2).unwrap(), 4.5);
        assert_eq!(min_lift_length(&a_b, &emb, 2).unwrap(), 2.5);
        let ls = lifts(&ab, &emb, 6).unwrap();
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].multiplicities, vec![2.0, 1.0, 1.0]);
        let ls = lifts(&a_b, &emb, 6).unwrap();
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].multiplicities, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn p_norm_monotonicity() {
        let g = ElasticGraph::rose(&[1.5, 2.0]).unwrap();
        let c = GraphCurve::new(&g, vec![(vec![DirEdge::new(0, true), DirEdge::new(0, true), DirEdge::new(1, true)], 1.0)]).unwrap();
        let ps = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
        let v: Vec<f64> = ps.iter().map(|&p| e_p(&c, &g, p).unwrap().0).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{v:?}");
        let g = ElasticGraph::rose(&[0.25, 0.5]).unwrap();
        let v: Vec<f64> = ps.iter().map(|&p| e_p(&c, &g, p).unwrap().0).collect();
        assert!(v.windows(2).all(|w| w[0] + 1e-12 >= w[1]), "{v:?}");
    }
}
