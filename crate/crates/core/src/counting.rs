//! Counting simple closed curves on the once-punctured torus by slope.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::CurveFunctional;
use crate::words::{MultiCurve, Word};

pub const MIN_GRID: usize = 6;

/// A simple closed curve of slope `p/q`; `negative` replaces `b` by `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeCurve {
    pub p: u64,
    pub q: u64,
    pub negative: bool,
    pub word: Word,
}

/// Lower Christoffel word with `q − p` letters `a` and `p` letters `b`.
pub fn christoffel(p: u64, q: u64) -> Result<Word> {
    if q == 0 || p > q || p.gcd(&q) != 1 {
        return Err(Error::NotCoprime(p, q));
    }
    let letters = (1..=q)
        .map(|i| if (i * p) / q > ((i - 1) * p) / q { b'b' } else { b'a' })
        .collect();
    Ok(Word::from_letters(letters))
}

impl SlopeCurve {
    pub fn new(p: u64, q: u64, negative: bool) -> Result<SlopeCurve> {
        let mut word = christoffel(p, q)?;
        if negative {
            let letters = word.letters().iter().map(|&l| if l == b'b' { b'B' } else { l }).collect();
            word = Word::from_letters(letters);
        }
        Ok(SlopeCurve { p, q, negative, word })
    }
}

struct Walk<'a, F> {
    f: &'a F,
    limit: f64,
    budget: usize,
    visited: AtomicUsize,
}

impl<F> Walk<'_, F>
where
    F: Fn(&SlopeCurve) -> Result<f64> + Sync,
{
    fn visit(&self, c: &SlopeCurve) -> Result<Option<f64>> {
        let seen = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        if seen > self.budget {
            return Err(Error::BudgetExceeded {
                length: seen,
                budget: self.budget,
            });
        }
        let v = (self.f)(c)?;
        Ok((v <= self.limit).then_some(v))
    }

    // Farey interval (l, r); the mediant and everything below it.
    fn subtree(&self, l: (u64, u64), r: (u64, u64), negative: bool) -> Result<Vec<f64>> {
        let m = (l.0 + r.0, l.1 + r.1);
        let c = SlopeCurve::new(m.0, m.1, negative)?;
        let Some(v) = self.visit(&c)? else { return Ok(Vec::new()) };
        let (left, right) = rayon::join(|| self.subtree(l, m, negative), || self.subtree(m, r, negative));
        let mut out = vec![v];
        out.extend(left?);
        out.extend(right?);
        Ok(out)
    }
}

/// Values `f ≤ limit` over all unoriented simple closed curves, sorted.
///
/// Descends the Stern–Brocot tree and prunes a subtree as soon as its root
/// exceeds `limit`, so `f` must not decrease from a slope to its mediant
/// descendants.
pub fn slope_values_by<F>(f: F, limit: f64, budget: usize) -> Result<Vec<f64>>
where
    F: Fn(&SlopeCurve) -> Result<f64> + Sync,
{
    let walk = Walk {
        f: &f,
        limit,
        budget,
        visited: AtomicUsize::new(0),
    };
    let mut out = Vec::new();
    for (p, q) in [(0, 1), (1, 1)] {
        if let Some(v) = walk.visit(&SlopeCurve::new(p, q, false)?)? {
            out.push(v);
        }
    }
    let (pos, neg) = rayon::join(
        || walk.subtree((0, 1), (1, 1), false),
        || walk.subtree((0, 1), (1, 1), true),
    );
    out.extend(pos?);
    out.extend(neg?);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `f` on the simple closed curve `c`.
pub fn slope_value(f: &dyn CurveFunctional, c: &SlopeCurve) -> Result<f64> {
    let curve = MultiCurve::from_word(f.surface().clone(), &c.word.to_string())?;
    Ok(f.evaluate(&curve)?.to_f64())
}

pub fn slope_values(f: &dyn CurveFunctional, limit: f64, budget: usize) -> Result<Vec<f64>> {
    check_torus(f)?;
    slope_values_by(|c| slope_value(f, c), limit, budget)
}

fn check_torus(f: &dyn CurveFunctional) -> Result<()> {
    if f.surface().name != "pt" {
        return Err(Error::Unsupported(format!("slope counting on surface {}", f.surface().name)));
    }
    Ok(())
}

/// Number of unoriented simple closed curves with `f ≤ limit`.
pub fn count(f: &dyn CurveFunctional, limit: f64, budget: usize) -> Result<u64> {
    Ok(slope_values(f, limit, budget)?.len() as u64)
}

/// Number of sorted `values` at most `limit`.
pub fn count_at(values: &[f64], limit: f64) -> u64 {
    values.partition_point(|&v| v <= limit) as u64
}

/// Word length in `a, b` of the slope curve, which is `q`.
pub fn synthetic_value(c: &SlopeCurve) -> Result<f64> {
    Ok(c.q as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, u64)>,
}

/// Least-squares fit of `log count` against `log L`.
pub fn fit_power_law(points: &[(f64, u64)]) -> Result<PowerFit> {
    if points.len() < MIN_GRID {
        return Err(Error::DegenerateGrid(format!("{} grid points, need {MIN_GRID}", points.len())));
    }
    if let Some((l, _)) = points.iter().find(|(l, n)| *l <= 0.0 || *n == 0) {
        return Err(Error::DegenerateGrid(format!("no positive count at L = {l}")));
    }
    let xs: Vec<f64> = points.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateGrid("all grid values equal".into()));
    }
    let exponent = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(PowerFit {
        exponent,
        intercept: my - exponent * mx,
        r2,
        points: points.to_vec(),
    })
}

/// Counts on `grid` from one enumeration at the largest value.
pub fn grid_counts_by<F>(f: F, grid: &[f64], budget: usize) -> Result<Vec<(f64, u64)>>
where
    F: Fn(&SlopeCurve) -> Result<f64> + Sync,
{
    let max = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateGrid("empty grid".into()));
    }
    let values = slope_values_by(f, max, budget)?;
    Ok(grid.iter().map(|&l| (l, count_at(&values, l))).collect())
}

pub fn exponent_fit(f: &dyn CurveFunctional, grid: &[f64], budget: usize) -> Result<PowerFit> {
    check_torus(f)?;
    if grid.len() < MIN_GRID {
        return Err(Error::DegenerateGrid(format!("{} grid points, need {MIN_GRID}", grid.len())));
    }
    fit_power_law(&grid_counts_by(|c| slope_value(f, c), grid, budget)?)
}

/// `k` evenly spaced values from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![hi; k];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::HyperbolicLength;
    use crate::hyperbolic::HolonomyRep;
    use std::sync::Arc;

    // standard factorization: the Christoffel word of a mediant is the
    // product of the words of its Farey parents
    fn by_factorization(p: u64, q: u64) -> String {
        fn go(l: (u64, u64, String), r: (u64, u64, String), p: u64, q: u64) -> String {
            let m = (l.0 + r.0, l.1 + r.1);
            let w = format!("{}{}", l.2, r.2);
            if m == (p, q) {
                return w;
            }
            if p * m.1 < m.0 * q {
                go(l, (m.0, m.1, w), p, q)
            } else {
                go((m.0, m.1, w), r, p, q)
            }
        }
        match (p, q) {
            (0, 1) => "a".into(),
            (1, 1) => "b".into(),
            _ => go((0, 1, "a".into()), (1, 1, "b".into()), p, q),
        }
    }

    #[test]
    fn christoffel_words() {
        assert_eq!(christoffel(2, 5).unwrap().to_string(), "aabab");
        assert_eq!(christoffel(0, 1).unwrap().to_string(), "a");
        assert_eq!(christoffel(1, 2).unwrap().to_string(), "ab");
        assert_eq!(christoffel(1, 3).unwrap().to_string(), "aab");
        assert!(matches!(christoffel(2, 4), Err(Error::NotCoprime(2, 4))));
        for q in 1..=13u64 {
            for p in 0..=q {
                if p.gcd(&q) == 1 {
                    assert_eq!(christoffel(p, q).unwrap().to_string(), by_factorization(p, q), "{p}/{q}");
                }
            }
        }
    }

    fn totient_count(m: u64) -> u64 {
        // slopes with q ≤ m: 0/1, 1/1, and two sectors of interior fractions
        let interior: u64 = (2..=m).map(|q| (1..q).filter(|p| p.gcd(&q) == 1).count() as u64).sum();
        2 + 2 * interior
    }

    #[test]
    fn synthetic_counts_match_totients() {
        for m in [1u64, 2, 5, 17, 40] {
            let v = slope_values_by(synthetic_value, m as f64, 1 << 20).unwrap();
            assert_eq!(v.len() as u64, totient_count(m), "m = {m}");
        }
    }

    #[test]
    fn synthetic_exponent_near_two() {
        let grid = linear_grid(100.0, 400.0, 7);
        let fit = fit_power_law(&grid_counts_by(synthetic_value, &grid, 1 << 20).unwrap()).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn budget_and_degenerate_grids() {
        assert!(matches!(slope_values_by(synthetic_value, 100.0, 50), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(fit_power_law(&[(1.0, 1); 3]), Err(Error::DegenerateGrid(_))));
        assert!(matches!(fit_power_law(&[(2.0, 4); 6]), Err(Error::DegenerateGrid(_))));
        let zero: Vec<(f64, u64)> = (1..=6).map(|i| (i as f64, i - 1)).collect();
        assert!(matches!(fit_power_law(&zero), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn hyperbolic_counts_monotone() {
        let f = HyperbolicLength::new(Arc::new(HolonomyRep::builtin_pt()));
        assert_eq!(count(&f, 1.0, 1000).unwrap(), 0);
        let small = count(&f, 8.0, 10_000).unwrap();
        let large = count(&f, 12.0, 10_000).unwrap();
        assert!(small <= large && small > 0);
        // a, b, ab, aB all have traces 3, 3, 3, 6
        let l3 = 2.0 * (1.5f64).acosh();
        assert_eq!(count(&f, l3 + 1e-9, 1000).unwrap(), 3);
    }
}
