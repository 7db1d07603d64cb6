//! Shortest closed walks conjugate to a power of a given word.
//!
//! A closed walk whose image is conjugate to `δⁿ` corresponds to a path in
//! the Cayley tree from some vertex `p` to `δⁿ·p`. Vertices are tracked
//! relative to the axis of `δ` as `(j, e)`: projection index `j` on the axis
//! and excursion word `e` off it, with `|e|` bounded by a window. One
//! Dijkstra run per start state gives the costs for every power at once.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::words::{inverse_letter, Word};

/// A directed step: traverse from `from` to `to`, reading `image`.
#[derive(Clone, Debug)]
pub(crate) struct Step {
    pub from: usize,
    pub to: usize,
    pub image: Vec<u8>,
    pub cost: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct StepSet {
    pub vertices: usize,
    pub steps: Vec<Step>,
    pub alphabet: Vec<u8>,
}

impl StepSet {
    /// One vertex, a step for every generator and its inverse, unit costs.
    pub fn rose(gens: &[Word], alphabet: &[char]) -> StepSet {
        let mut steps = Vec::new();
        for g in gens {
            for img in [g.free_reduce(), g.inverse().free_reduce()] {
                steps.push(Step {
                    from: 0,
                    to: 0,
                    image: img.into_letters(),
                    cost: 1.0,
                });
            }
        }
        StepSet {
            vertices: 1,
            steps,
            alphabet: full_alphabet(alphabet),
        }
    }

    pub fn max_image(&self) -> usize {
        self.steps.iter().map(|s| s.image.len()).max().unwrap_or(0)
    }
}

pub(crate) fn full_alphabet(gens: &[char]) -> Vec<u8> {
    let mut v: Vec<u8> = gens.iter().map(|&c| c as u8).collect();
    v.extend(gens.iter().map(|&c| (c as u8).to_ascii_uppercase()));
    v
}

fn reduce_into(out: &mut Vec<u8>, letters: &[u8]) {
    for &l in letters {
        if out.last() == Some(&inverse_letter(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
}

/// All reduced words of length at most `window`.
fn excursions(alphabet: &[u8], window: usize) -> Vec<Vec<u8>> {
    let mut all = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..window {
        let mut next = Vec::new();
        for w in &layer {
            for &l in alphabet {
                if w.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut x = w.clone();
                x.push(l);
                next.push(x);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    state: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimal cost of a closed walk conjugate to `rootⁿ`, for `n = 1..=n_max`
/// (infinite when nothing is found inside the window). `root` must be
/// cyclically reduced and non-empty.
pub(crate) fn power_costs(set: &StepSet, root: &Word, n_max: usize, window: usize) -> Vec<f64> {
    let axis = root.letters();
    let m = axis.len();
    assert!(m > 0 && root.is_cyclically_reduced());
    let ex = excursions(&set.alphabet, window);
    let index: HashMap<&[u8], usize> = ex.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let ne = ex.len();
    let nv = set.vertices;
    let ns = set.steps.len();

    // trans[(phase * ne + e) * ns + s] = (dj, e')
    let mut trans: Vec<Option<(i32, u32)>> = vec![None; m * ne * ns];
    let mut buf = Vec::new();
    for phase in 0..m {
        for (ei, e) in ex.iter().enumerate() {
            for (si, st) in set.steps.iter().enumerate() {
                buf.clear();
                buf.extend_from_slice(e);
                reduce_into(&mut buf, &st.image);
                let mut j: i64 = phase as i64;
                let mut start = 0;
                loop {
                    if start >= buf.len() {
                        break;
                    }
                    let p = j.rem_euclid(m as i64) as usize;
                    let prev = (j - 1).rem_euclid(m as i64) as usize;
                    if buf[start] == axis[p] {
                        j += 1;
                        start += 1;
                    } else if buf[start] == inverse_letter(axis[prev]) {
                        j -= 1;
                        start += 1;
                    } else {
                        break;
                    }
                }
                let rest = &buf[start..];
                if rest.len() <= window {
                    let e2 = index[rest];
                    trans[(phase * ne + ei) * ns + si] = Some(((j - phase as i64) as i32, e2 as u32));
                }
            }
        }
    }

    let valid_at = |phase: usize, e: &[u8]| -> bool {
        match e.first() {
            None => true,
            Some(&l) => l != axis[phase] && l != inverse_letter(axis[(phase + m - 1) % m]),
        }
    };

    let slack = (2 * set.max_image().max(window) + 2) as i64;
    let span = (n_max * m) as i64 + 2 * slack + 1;
    let mut best = vec![f64::INFINITY; n_max];
    let total = span as usize * nv * ne;
    let mut dist = vec![f64::INFINITY; total];
    let mut touched: Vec<usize> = Vec::new();
    let mut heap = BinaryHeap::new();

    for phase in 0..m {
        for (e0, e) in ex.iter().enumerate() {
            if !valid_at(phase, e) {
                continue;
            }
            for v0 in 0..nv {
                // local coordinate: jl = j - phase + slack
                let id = |jl: i64, v: usize, e: usize| (jl as usize * nv + v) * ne + e;
                for &t in &touched {
                    dist[t] = f64::INFINITY;
                }
                touched.clear();
                heap.clear();
                let s = id(slack, v0, e0);
                dist[s] = 0.0;
                touched.push(s);
                heap.push(Entry { cost: 0.0, state: s });
                let mut remaining = n_max;
                while let Some(Entry { cost, state }) = heap.pop() {
                    if cost > dist[state] {
                        continue;
                    }
                    let e = state % ne;
                    let v = (state / ne) % nv;
                    let jl = (state / ne / nv) as i64;
                    if v == v0 && e == e0 && jl > slack && (jl - slack) % m as i64 == 0 {
                        let n = ((jl - slack) / m as i64) as usize;
                        if n <= n_max && cost < best[n - 1] {
                            best[n - 1] = cost;
                        }
                        remaining -= 1;
                        if remaining == 0 {
                            break;
                        }
                    }
                    let ph = (jl - slack + phase as i64).rem_euclid(m as i64) as usize;
                    for (si, st) in set.steps.iter().enumerate() {
                        if st.from != v {
                            continue;
                        }
                        if let Some((dj, e2)) = trans[(ph * ne + e) * ns + si] {
                            let j2 = jl + dj as i64;
                            if j2 < 0 || j2 >= span {
                                continue;
                            }
                            let t = id(j2, st.to, e2 as usize);
                            let c = cost + st.cost;
                            if c < dist[t] {
                                if dist[t].is_infinite() {
                                    touched.push(t);
                                }
                                dist[t] = c;
                                heap.push(Entry { cost: c, state: t });
                            }
                        }
                    }
                }
            }
        }
    }
    best
}

/// Shortest expression of an element as a product of steps starting and
/// ending at vertex 0, by breadth-first search up to `radius` steps.
pub(crate) fn element_length(set: &StepSet, target: &Word, radius: usize) -> Option<usize> {
    let target = target.free_reduce().into_letters();
    let mut seen: HashMap<(usize, Vec<u8>), ()> = HashMap::new();
    let mut layer = vec![(0usize, Vec::new())];
    seen.insert((0, Vec::new()), ());
    for depth in 0..=radius {
        if layer.iter().any(|(v, w)| *v == 0 && *w == target) {
            return Some(depth);
        }
        let mut next = Vec::new();
        for (v, w) in &layer {
            for st in set.steps.iter().filter(|s| s.from == *v) {
                let mut x = w.clone();
                reduce_into(&mut x, &st.image);
                let key = (st.to, x);
                if !seen.contains_key(&key) {
                    seen.insert(key.clone(), ());
                    next.push(key);
                }
            }
        }
        layer = next;
    }
    None
}
