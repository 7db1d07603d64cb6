//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::sync::Arc;
use std::time::{Duration, Instant};

use curvecur::cli;
use curvecur::counting::{exponent_fit, fit_power_law, grid_counts_by, synthetic_value};
use curvecur::crossings::resolve_powers;
use curvecur::elastic::{
    e_p, e_p_embedded, el_embedded, el_graph, el_graph_ascent, graph_length, DirEdge, ElasticGraph, GraphCurve, GraphEmbedding,
    ScalingVector,
};
use curvecur::functionals::{CurveFunctional, ElasticLength, GraphLength, HyperbolicLength, IntersectionWith, SqrtSelfIntersection, Value, WordLength};
use curvecur::harness::{check, check_convex_union, check_stability, Corpus, Property, Verdict};
use curvecur::hyperbolic::{broken_path_endpoints, gd_inv, l0, linked, BrokenPathSpec, HolonomyRep, Leg};
use curvecur::stabilize::{sawtooth_point, stable_functional};
use curvecur::words::{weight, MultiCurve, SurfacePresentation, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: usize, title: &str, ok: bool, detail: &str) {
    println!("criterion {n}: {} - {title} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn pt() -> Arc<SurfacePresentation> {
    SurfacePresentation::builtin("pt").unwrap()
}

fn rep() -> Arc<HolonomyRep> {
    Arc::new(HolonomyRep::builtin_pt())
}

fn curve(s: &str) -> MultiCurve {
    MultiCurve::parse(pt(), s).unwrap()
}

#[test]
fn criterion_1_sawtooth_vertices() {
    let start = Instant::now();
    let f = WordLength::from_list(pt(), "a,aa,b").unwrap();
    let mut bad = Vec::new();
    let mut check_point = |p: u64, q: u64, want: (i64, i64)| {
        let e = sawtooth_point(&f, p, q, 64).unwrap();
        if !e.tail_detected || e.exact != Some(weight(want.0, want.1)) {
            bad.push(format!("{p}/{q}: {:?}", e.exact));
        }
    };
    for n in 1..=6u64 {
        let k = n as i64;
        check_point(1, 2 * n + 1, (k + 1, 2 * k + 1));
        check_point(1, 2 * n, (k + 1, 2 * k));
    }
    check_point(2, 5, (4, 5));
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(30);
    verdict(1, "sawtooth vertices exact", ok, &format!("mismatches {bad:?}, {:.2?}", elapsed));
}

#[test]
fn criterion_2_stability_counterexample() {
    let f = WordLength::from_list(pt(), "a,aa,b").unwrap();
    let a2 = f.evaluate(&curve("aa")).unwrap();
    let two_a = f.evaluate(&curve("2*a")).unwrap();
    let corpus = Corpus::generate(pt(), 11, 50, 6).unwrap();
    let raw = check_stability(&f, &corpus, 4).unwrap();
    let w = raw.witness.clone().unwrap_or_default();
    let witness_ok = raw.verdict == Verdict::Fail && w["curve"] == "a" && w["n"] == 2;
    let stable = stable_functional(Arc::new(f)).unwrap();
    let st = check_stability(&stable, &corpus, 4).unwrap();
    let ok = a2 == Value::from_int(1) && two_a == Value::from_int(2) && witness_ok && st.verdict == Verdict::Pass && corpus.curves.len() == 50;
    verdict(
        2,
        "word length (a, a², b) unstable, stabilization stable",
        ok,
        &format!("f(a²) = {a2}, f(2a) = {two_a}, witness {w}, stabilized {:?}", st.verdict),
    );
}

#[test]
fn criterion_3_convex_union_counterexample() {
    let f = SqrtSelfIntersection::new(rep());
    let both = f.evaluate(&curve("a; b")).unwrap().to_f64();
    let sum = f.evaluate(&curve("a")).unwrap().add(&f.evaluate(&curve("b")).unwrap());
    let corpus = Corpus::generate(pt(), 0, 20, 6).unwrap();
    let r = check_convex_union(&f, &corpus).unwrap();
    let w = r.witness.clone().unwrap_or_default();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        ["curvecur", "verify", "--functional", "sqrtself", "--property", "convex_union", "--samples", "20"],
        &mut out,
        &mut err,
    );
    let ok = (both - 2f64.sqrt()).abs() <= 1e-12
        && sum.to_f64() == 0.0
        && r.verdict == Verdict::Fail
        && w["c1"] == "a"
        && w["c2"] == "b"
        && code == 1;
    verdict(3, "sqrt self-intersection violates convex union", ok, &format!("f(a∪b) = {both}, f(a)+f(b) = {sum}, exit {code}"));
}

#[test]
fn criterion_4_smoothing_suite() {
    let start = Instant::now();
    let corpus = Corpus::generate(pt(), 2024, 300, 10).unwrap();
    let r = rep();
    let hyp = HyperbolicLength::new(r.clone());
    let h = check(&hyp, Property::Smoothing, &corpus, Some(&r)).unwrap();
    let int = IntersectionWith::new(r.clone(), curve("b")).unwrap();
    let i = check(&int, Property::Smoothing, &corpus, Some(&r)).unwrap();
    let elapsed = start.elapsed();
    let ok = h.verdict == Verdict::Pass
        && i.verdict == Verdict::Pass
        && corpus.curves.len() == 300
        && h.checks > 0
        && elapsed < Duration::from_secs(300);
    verdict(
        4,
        "hyperbolic length and i(·, b) satisfy smoothing",
        ok,
        &format!(
            "hyplen {:?} R = {:?} over {} smoothings ({} skipped), i(., b) {:?} R = {:?}, {:.2?}",
            h.verdict, h.r_hat, h.checks, h.skipped, i.verdict, i.r_hat, elapsed
        ),
    );
}

#[test]
fn criterion_5_power_smoothing_chain() {
    let r = rep();
    let hyp = HyperbolicLength::new(r.clone());
    let mut bad = Vec::new();
    for w in ["a", "ab", "aab"] {
        let base = hyp.evaluate(&curve(w)).unwrap().to_f64();
        for n in 2..=4usize {
            let cn = MultiCurve::from_word(pt(), &w.repeat(n)).unwrap();
            let (res, steps) = resolve_powers(&cn).unwrap();
            let want = MultiCurve::parse(pt(), &format!("{n}*{w}")).unwrap();
            let len = hyp.evaluate(&cn).unwrap().to_f64();
            if res != want || steps != n - 1 || (len - n as f64 * base).abs() > 1e-9 {
                bad.push(format!("{w}^{n}: {res} after {steps}, length {len}"));
            }
        }
    }
    verdict(5, "power smoothings resolve Cⁿ to nC", bad.is_empty(), &format!("mismatches {bad:?}"));
}

fn random_rose_curve(rng: &mut ChaCha8Rng, petals: usize) -> Vec<DirEdge> {
    let len = rng.random_range(1..=8);
    let mut walk: Vec<DirEdge> = Vec::new();
    while walk.len() < len {
        let d = DirEdge::new(rng.random_range(0..petals), rng.random_bool(0.5));
        if walk.last() != Some(&d.reverse()) {
            walk.push(d);
        }
    }
    walk
}

fn random_theta_curve(rng: &mut ChaCha8Rng) -> Vec<DirEdge> {
    let k = rng.random_range(1..=4);
    let mut walk = Vec::new();
    for _ in 0..k {
        let out = rng.random_range(0..3);
        let back = (out + rng.random_range(1..3)) % 3;
        walk.push(DirEdge::new(out, true));
        walk.push(DirEdge::new(back, false));
    }
    walk
}

fn random_word(rng: &mut ChaCha8Rng, max: usize) -> String {
    let letters = ['a', 'b', 'A', 'B'];
    loop {
        let len = rng.random_range(1..=max);
        let mut w: Vec<char> = Vec::new();
        while w.len() < len {
            let l = letters[rng.random_range(0..4)];
            let inv = if l.is_lowercase() { l.to_ascii_uppercase() } else { l.to_ascii_lowercase() };
            if w.last() != Some(&inv) {
                w.push(l);
            }
        }
        let s: String = w.into_iter().collect();
        if !Word::parse(&s).unwrap().cyclic_reduce().1.is_empty() {
            return s;
        }
    }
}

#[test]
fn criterion_6_elastic_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_opt = 0.0f64;
    let mut worst_p = 0.0f64;
    for i in 0..200 {
        let (g, walk) = if i % 2 == 0 {
            let petals = rng.random_range(2..=4);
            let alphas: Vec<f64> = (0..petals).map(|_| rng.random_range(0.2..3.0)).collect();
            (ElasticGraph::rose(&alphas).unwrap(), random_rose_curve(&mut rng, petals))
        } else {
            let alphas = [rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)];
            (ElasticGraph::theta(alphas).unwrap(), random_theta_curve(&mut rng))
        };
        let weight = rng.random_range(0.5..2.0);
        let c = GraphCurve::new(&g, vec![(walk, weight)]).unwrap();
        let (closed, _) = el_graph(&c, &g);
        let (opt, _) = el_graph_ascent(&c, &g);
        worst_opt = worst_opt.max((closed - opt).abs());
        let (e_inf, _) = e_p(&c, &g, f64::INFINITY).unwrap();
        let len = graph_length(&c, &ScalingVector(vec![1.0; g.edges.len()]), &g).unwrap();
        let (e2, _) = e_p(&c, &g, 2.0).unwrap();
        worst_p = worst_p.max((e_inf - len).abs()).max((e2 - closed).abs());
    }

    let theta_json = r#"{"vertices": ["u", "v"],
        "edges": [{"id": "x", "from": "u", "to": "v", "alpha": 1.0},
                  {"id": "y", "from": "u", "to": "v", "alpha": 1.0},
                  {"id": "z", "from": "u", "to": "v", "alpha": 1.0}],
        "embedding": {"x": "", "y": "A", "z": "B"}}"#;
    let mut union_bad = Vec::new();
    let mut worst_embedded = 0.0f64;
    for i in 0..100 {
        let emb = if i % 2 == 0 {
            GraphEmbedding::standard_rose(pt(), &[rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)]).unwrap()
        } else {
            let mut v: serde_json::Value = serde_json::from_str(theta_json).unwrap();
            for e in v["edges"].as_array_mut().unwrap() {
                e["alpha"] = serde_json::json!(rng.random_range(0.3..3.0));
            }
            GraphEmbedding::from_json(&v.to_string()).unwrap()
        };
        let emb = Arc::new(emb);
        let (w1, w2) = (random_word(&mut rng, 4), random_word(&mut rng, 4));
        let (c1, c2) = (curve(&w1), curve(&w2));
        let u = c1.union(&c2).unwrap();
        let el = ElasticLength::new(emb.clone(), 8).unwrap();
        let sq = |c: &MultiCurve| el.evaluate(c).unwrap().to_f64().powi(2);
        let (a, b, ab) = (sq(&c1), sq(&c2), sq(&u));
        let tol = 1e-6 * (a + b).max(1.0);
        if !(a + b <= ab + tol && ab <= 2.0 * (a + b) + tol) {
            union_bad.push(format!("{w1} | {w2}: {a} + {b} vs {ab}"));
        }
        if i < 20 {
            let gl = GraphLength::new(emb.clone()).unwrap().evaluate(&c1).unwrap().to_f64();
            let (inf_up, inf_lo) = e_p_embedded(&c1, &emb, 8, f64::INFINITY).unwrap();
            let (two_up, _) = e_p_embedded(&c1, &emb, 8, 2.0).unwrap();
            let s = el_embedded(&c1, &emb, 8).unwrap().sqrt_el;
            worst_embedded = worst_embedded.max((inf_up - gl).abs()).max((inf_lo - gl).abs()).max((two_up - s).abs());
        }
    }
    let ok = worst_opt <= 1e-6 && worst_p <= 1e-9 && worst_embedded <= 1e-9 && union_bad.is_empty();
    verdict(
        6,
        "elastic-graph extremal length",
        ok,
        &format!(
            "optimizer gap {worst_opt:.2e}, E_p gaps {worst_p:.2e} / embedded {worst_embedded:.2e}, union violations {union_bad:?}"
        ),
    );
}

#[test]
fn criterion_7_counting_power_law() {
    let start = Instant::now();
    let grid: Vec<f64> = (0..7).map(|i| 10.0 + 5.0 * i as f64).collect();
    let f = HyperbolicLength::new(rep());
    let fit = exponent_fit(&f, &grid, 1_000_000).unwrap();
    let synth = fit_power_law(&grid_counts_by(synthetic_value, &grid, 1_000_000).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let ok = (1.8..=2.2).contains(&fit.exponent)
        && fit.r2 >= 0.99
        && (synth.exponent - 2.0).abs() <= 0.05
        && elapsed < Duration::from_secs(120);
    verdict(
        7,
        "simple closed curve counts grow quadratically",
        ok,
        &format!(
            "hyplen exponent {:.4} r2 {:.5}, synthetic exponent {:.4}, counts {:?}, {:.2?}",
            fit.exponent, fit.r2, synth.exponent, fit.points, elapsed
        ),
    );
}

fn random_spec(rng: &mut ChaCha8Rng) -> BrokenPathSpec {
    let eps = rng.random_range(0.05..0.6);
    let threshold = l0(eps).unwrap();
    let k = rng.random_range(1..=4);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut angle = |s: f64| s * (FRAC_PI_2 + rng.random_range(-0.99..0.99) * eps);
    let legs = (0..k)
        .map(|_| Leg {
            long: 0.0,
            turn_in: angle(sign),
            short: 0.0,
            turn_out: angle(-sign),
        })
        .collect::<Vec<_>>();
    let legs = legs
        .into_iter()
        .map(|l| Leg {
            long: threshold + rng.random_range(0.01..4.0),
            short: rng.random_range(0.0..2.0),
            ..l
        })
        .collect();
    BrokenPathSpec { epsilon: eps, legs }
}

#[test]
fn criterion_8_geometry_kernel() {
    let r = rep();
    let comm = r.holonomy(&Word::parse("abAB").unwrap()).unwrap().trace();
    let gd = gd_inv(FRAC_PI_4).unwrap();
    let l = l0(FRAC_PI_6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut unlinked = Vec::new();
    for i in 0..50 {
        let spec = random_spec(&mut rng);
        spec.validate().unwrap();
        let ends = broken_path_endpoints(&spec).unwrap();
        for line in spec.short_segment_lines() {
            if !linked(&ends, &line).unwrap() {
                unlinked.push(i);
            }
        }
    }
    let ok = (comm + 2.0).abs() <= 1e-6
        && (gd - (1.0 + 2f64.sqrt()).ln()).abs() <= 1e-12
        && (l - 3f64.ln()).abs() <= 1e-10
        && unlinked.is_empty();
    verdict(
        8,
        "geometry kernel",
        ok,
        &format!("tr[a,b] = {comm}, gd_inv(π/4) = {gd}, L0(π/6) = {l}, unlinked specs {unlinked:?}"),
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("curvecur").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let graph = GraphEmbedding::standard_rose(pt(), &[1.0, 2.0]).unwrap();
    std::fs::write(p("g.json"), graph.to_json()).unwrap();
    let g = p("g.json");
    let commands: Vec<(Vec<String>, Vec<String>)> = vec![
        (vec!["eval", "--functional", "hyplen", "--curve", "a; 1/2*aab"], vec![]),
        (vec!["eval", "--functional", "stable-wordlen", "--gens", "a,aa,b", "--curve", "aabab"], vec![]),
        (vec!["intersect", "--c", "aabab", "--d", "aB"], vec![]),
        (vec!["stable", "--functional", "wordlen", "--gens", "a,aa,b", "--curve", "aab"], vec![]),
        (vec!["el", "--graph", &g, "--curve", "aab"], vec![]),
        (vec!["el", "--graph", &g, "--curve", "aab", "--p", "3"], vec![]),
        (vec!["verify", "--functional", "wordlen", "--gens", "a,aa,b", "--property", "quasi_smoothing", "--samples", "20", "--seed", "5", "--max-len", "6"], vec![]),
        (vec!["verify", "--functional", "sqrtself", "--property", "convex_union", "--samples", "20", "--seed", "3"], vec![]),
        (vec!["count", "--functional", "hyplen", "--Lmax", "20", "--grid", "6", "--out", &p("count.csv")], vec![p("count.csv")]),
        (vec!["sawtooth", "--max-denominator", "7", "--out", &p("saw.csv")], vec![p("saw.csv"), p("saw.svg")]),
    ]
    .into_iter()
    .map(|(a, f)| (a.into_iter().map(String::from).collect(), f))
    .collect();
    let mut bad = Vec::new();
    for (args, files) in &commands {
        let argv: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let (c1, o1) = run_cli(&argv);
        let f1: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        for f in files {
            std::fs::remove_file(f).unwrap();
        }
        let (c2, o2) = run_cli(&argv);
        let f2: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        if c1 != c2 || o1 != o2 || f1 != f2 || c1 == 2 {
            bad.push(format!("{} (exit {c1}/{c2})", args.join(" ")));
        }
    }
    verdict(9, "CLI output is reproducible", bad.is_empty(), &format!("{} commands, differing {bad:?}", commands.len()));
}
