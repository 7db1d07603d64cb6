//! Command-line front end. Results go to stdout as JSON, summaries to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_integer::Integer;
use serde_json::{json, Value as Json};

use crate::counting::{self, linear_grid, synthetic_value};
use crate::crossings::{intersection_number, DEFAULT_RADIUS};
use crate::elastic::{e_p_embedded, el_embedded, GraphEmbedding, DEFAULT_CUTOFF};
use crate::error::{Error, Result};
use crate::functionals::{
    format_real, CurveFunctional, ElasticLength, GraphLength, HyperbolicLength, IntersectionWith, SqrtSelfIntersection, Value,
    WordLength,
};
use crate::harness::{check, Corpus, Property};
use crate::hyperbolic::HolonomyRep;
use crate::stabilize::{sawtooth_point, stable_value, StableFunctional, DEFAULT_N};
use crate::words::{fmt_rational, weight, MultiCurve, SurfacePresentation};

pub const SEED_VAR: &str = "CURVECUR_SEED";

#[derive(Parser, Debug)]
#[command(name = "curvecur", version, about = "Curve functionals on hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a functional on a multi-curve.
    Eval {
        #[command(flatten)]
        f: FunctionalArgs,
        #[arg(long)]
        curve: String,
    },
    /// Geometric intersection number of two curves.
    Intersect {
        #[arg(long, default_value = "pt")]
        surface: String,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: String,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
    },
    /// Stable value lim f(Cⁿ)/n.
    Stable {
        #[command(flatten)]
        f: FunctionalArgs,
        #[arg(long)]
        curve: String,
        #[arg(long = "N", default_value_t = DEFAULT_N)]
        n: usize,
    },
    /// Extremal length and E_p energies through an embedded elastic graph.
    El {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        curve: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Randomized check of one axiom.
    Verify {
        #[command(flatten)]
        f: FunctionalArgs,
        #[arg(long)]
        property: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-len", default_value_t = 10)]
        max_len: usize,
    },
    /// Count simple closed curves by value and fit a power law.
    Count {
        #[command(flatten)]
        f: FunctionalArgs,
        #[arg(long = "Lmax")]
        l_max: f64,
        #[arg(long = "Lmin")]
        l_min: Option<f64>,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        /// CSV output with columns L,count.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted stable word length along the train-track family.
    Sawtooth {
        #[arg(long = "max-denominator", default_value_t = 13)]
        max_denominator: u64,
        #[arg(long, default_value = "sawtooth.csv")]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value = "a,aa,b")]
        gens: String,
        #[arg(long = "N", default_value_t = DEFAULT_N)]
        n: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FunctionalArgs {
    /// hyplen, wordlen, intersection, sqrtself, graphlen, el, synthetic, or stable-<id>.
    #[arg(long)]
    pub functional: String,
    #[arg(long, default_value = "pt")]
    pub surface: String,
    /// Representation file; defaults to the built-in one.
    #[arg(long)]
    pub rep: Option<PathBuf>,
    #[arg(long)]
    pub gens: Option<String>,
    /// Second curve for the intersection functional.
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Number of powers for stabilized functionals.
    #[arg(long = "stable-N", default_value_t = DEFAULT_N)]
    pub stable_n: usize,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &str) -> Result<()> {
    std::fs::write(path, data).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_rep(surface: &str, rep: &Option<PathBuf>) -> Result<HolonomyRep> {
    match rep {
        Some(p) => {
            let r = HolonomyRep::from_json(&read(p)?)?;
            if r.presentation().name != surface {
                return Err(Error::PresentationMismatch(r.presentation().name.clone(), surface.to_string()));
            }
            Ok(r)
        }
        None => HolonomyRep::builtin(surface),
    }
}

fn load_graph(graph: &Option<PathBuf>) -> Result<Arc<GraphEmbedding>> {
    let p = graph.as_ref().ok_or_else(|| Error::Parse("--graph is required".into()))?;
    Ok(Arc::new(GraphEmbedding::from_json(&read(p)?)?))
}

/// Builds the functional named by `args.functional`.
pub fn build_functional(args: &FunctionalArgs) -> Result<Arc<dyn CurveFunctional>> {
    build_named(&args.functional, args)
}

fn build_named(id: &str, args: &FunctionalArgs) -> Result<Arc<dyn CurveFunctional>> {
    if let Some(inner) = id.strip_prefix("stable-") {
        let f = build_named(inner, args)?;
        return Ok(Arc::new(StableFunctional::new(f, args.stable_n)?));
    }
    let surface = SurfacePresentation::builtin(&args.surface)?;
    let f: Arc<dyn CurveFunctional> = match id {
        "hyplen" => Arc::new(HyperbolicLength::new(Arc::new(load_rep(&args.surface, &args.rep)?))),
        "wordlen" => {
            let default = surface.generators.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            Arc::new(WordLength::from_list(surface, args.gens.as_deref().unwrap_or(&default))?)
        }
        "intersection" => {
            let d = args.d.as_ref().ok_or_else(|| Error::Parse("--d is required for intersection".into()))?;
            let rep = Arc::new(load_rep(&args.surface, &args.rep)?);
            let d = MultiCurve::parse(surface, d)?;
            let f = IntersectionWith::new(rep, d)?;
            Arc::new(match args.radius {
                Some(r) => f.with_radius(r),
                None => f,
            })
        }
        "sqrtself" => {
            let f = SqrtSelfIntersection::new(Arc::new(load_rep(&args.surface, &args.rep)?));
            Arc::new(match args.radius {
                Some(r) => f.with_radius(r),
                None => f,
            })
        }
        "graphlen" => Arc::new(GraphLength::new(load_graph(&args.graph)?)?),
        "el" => Arc::new(ElasticLength::new(load_graph(&args.graph)?, args.cutoff)?),
        _ => return Err(Error::Parse(format!("unknown functional {id:?}"))),
    };
    Ok(f)
}

fn value_json(v: &Value) -> (Json, Json) {
    match v {
        Value::Exact(r) => (json!(fmt_rational(r)), json!(fmt_rational(r))),
        Value::Real(x) => (json!(format_real(*x)), Json::Null),
    }
}

/// Human-readable error kind, the variant name.
fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

struct Outcome {
    json: Json,
    summary: String,
    code: i32,
}

impl Outcome {
    fn ok(json: Json, summary: String) -> Self {
        Outcome { json, summary, code: 0 }
    }
}

fn cmd_eval(f: &FunctionalArgs, curve: &str) -> Result<Outcome> {
    let func = build_functional(f)?;
    let c = MultiCurve::parse(func.surface().clone(), curve)?;
    let v = func.evaluate(&c)?;
    let (value, exact) = value_json(&v);
    let summary = format!("{}({}) = {}", func.id(), c, v);
    Ok(Outcome::ok(
        json!({"functional": func.id(), "surface": func.surface().name, "curve": c.to_string(), "value": value, "exact": exact}),
        summary,
    ))
}

fn cmd_intersect(surface: &str, rep: &Option<PathBuf>, c: &str, d: &str, radius: usize) -> Result<Outcome> {
    let rep = load_rep(surface, rep)?;
    let pres = rep.presentation().clone();
    let cc = pres.canonical_form(&pres.parse_word(c)?)?;
    let dd = pres.canonical_form(&pres.parse_word(d)?)?;
    let n = intersection_number(&cc, &dd, &rep, radius)?;
    Ok(Outcome::ok(
        json!({"c": cc.to_string(), "d": dd.to_string(), "count": n, "radius": radius, "stable": true}),
        format!("i({cc}, {dd}) = {n}"),
    ))
}

fn cmd_stable(f: &FunctionalArgs, curve: &str, n: usize) -> Result<Outcome> {
    let func = build_functional(f)?;
    let c = MultiCurve::parse(func.surface().clone(), curve)?;
    let mut comps = c.components();
    let (Some((k, w)), None) = (comps.next(), comps.next()) else {
        return Err(Error::Unsupported("stable values of multi-curves with several components".into()));
    };
    let est = stable_value(func.as_ref(), k, n)?;
    let mut out = est.to_json_value();
    let scaled = est.value.scale(w);
    out["value"] = json!(scaled.to_string());
    out["exact"] = est.exact.as_ref().map(|s| json!(fmt_rational(&(s * w)))).unwrap_or(Json::Null);
    out["functional"] = json!(func.id());
    out["curve"] = json!(c.to_string());
    out["N"] = json!(n);
    let summary = format!("stable {}({}) = {}{}", func.id(), c, scaled, if est.tail_detected { "" } else { " (no tail detected)" });
    Ok(Outcome::ok(out, summary))
}

fn cmd_el(graph: &Path, curve: &str, p: &str, cutoff: usize) -> Result<Outcome> {
    let emb = GraphEmbedding::from_json(&read(graph)?)?;
    let c = MultiCurve::parse(emb.presentation.clone(), curve)?;
    let p_val = match p {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        s => s.parse::<f64>().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?,
    };
    if p_val == 2.0 {
        let r = el_embedded(&c, &emb, cutoff)?;
        let el = r.sqrt_el * r.sqrt_el;
        let summary = format!("sqrt EL({c}) = {}", format_real(r.sqrt_el));
        return Ok(Outcome::ok(
            json!({
                "curve": c.to_string(),
                "p": 2,
                "sqrt_el": format_real(r.sqrt_el),
                "el": format_real(el),
                "dual_bound": format_real(r.dual_bound),
                "rho": r.rho.0.iter().map(|x| format_real(*x)).collect::<Vec<_>>(),
                "iterations": r.iterations,
                "stabilized": r.stabilized,
                "cutoff": cutoff,
            }),
            summary,
        ));
    }
    let (upper, lower) = e_p_embedded(&c, &emb, cutoff, p_val)?;
    Ok(Outcome::ok(
        json!({"curve": c.to_string(), "p": p, "upper": format_real(upper), "lower": format_real(lower), "cutoff": cutoff}),
        format!("E_{p}({c}) in [{}, {}]", format_real(lower), format_real(upper)),
    ))
}

fn effective_seed(seed: u64) -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{SEED_VAR}={s:?} is not an integer"))),
        Err(_) => Ok(seed),
    }
}

fn cmd_verify(f: &FunctionalArgs, property: &str, samples: usize, seed: u64, max_len: usize) -> Result<Outcome> {
    let func = build_functional(f)?;
    let property: Property = property.parse()?;
    let seed = effective_seed(seed)?;
    let corpus = Corpus::generate(func.surface().clone(), seed, samples, max_len)?;
    let rep = match (&f.rep, property) {
        (Some(_), Property::Smoothing | Property::QuasiSmoothing) => Some(load_rep(&f.surface, &f.rep)?),
        _ => None,
    };
    let report = check(func.as_ref(), property, &corpus, rep.as_ref())?;
    let code = if report.failed() { 1 } else { 0 };
    let summary = format!(
        "{} {}: {:?} over {} curves{}",
        report.functional,
        property.name(),
        report.verdict,
        report.samples,
        report.witness.as_ref().map(|w| format!(", witness {w}")).unwrap_or_default()
    );
    let json = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Outcome { json, summary, code })
}

fn cmd_count(f: &FunctionalArgs, l_max: f64, l_min: Option<f64>, grid: usize, budget: usize, out: &Option<PathBuf>) -> Result<Outcome> {
    if !(l_max > 0.0) {
        return Err(Error::OutOfDomain(l_max, "Lmax"));
    }
    let lo = l_min.unwrap_or(l_max / 4.0);
    let ls = linear_grid(lo, l_max, grid);
    let (id, fit) = if f.functional == "synthetic" {
        let pts = counting::grid_counts_by(synthetic_value, &ls, budget)?;
        ("synthetic".to_string(), counting::fit_power_law(&pts)?)
    } else {
        let func = build_functional(f)?;
        (func.id(), counting::exponent_fit(func.as_ref(), &ls, budget)?)
    };
    let mut csv = String::from("L,count\n");
    for (l, n) in &fit.points {
        writeln!(csv, "{},{n}", format_real(*l)).expect("string write");
    }
    if let Some(path) = out {
        write(path, &csv)?;
    }
    let points: Vec<Json> = fit.points.iter().map(|(l, n)| json!({"L": format_real(*l), "count": n})).collect();
    Ok(Outcome::ok(
        json!({
            "functional": id,
            "exponent": format_real(fit.exponent),
            "r2": format_real(fit.r2),
            "points": points,
            "csv": out.as_ref().map(|p| p.display().to_string()),
        }),
        format!("{id}: exponent {} (r2 = {})", format_real(fit.exponent), format_real(fit.r2)),
    ))
}

/// One sawtooth sample: `x = p/q` and the weighted stable value.
#[derive(Clone, Debug, PartialEq)]
pub struct SawtoothRow {
    pub p: u64,
    pub q: u64,
    pub value: Value,
    pub tail_detected: bool,
}

pub fn sawtooth_rows(f: &dyn CurveFunctional, max_denominator: u64, n: usize) -> Result<Vec<SawtoothRow>> {
    let mut fracs: Vec<(u64, u64)> = (1..=max_denominator)
        .flat_map(|q| (0..=q).filter(move |p| p.gcd(&q) == 1).map(move |p| (p, q)))
        .collect();
    fracs.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    use rayon::prelude::*;
    fracs
        .par_iter()
        .map(|&(p, q)| {
            let e = sawtooth_point(f, p, q, n)?;
            let value = match e.exact {
                Some(s) => Value::Exact(s),
                None => e.value,
            };
            Ok(SawtoothRow {
                p,
                q,
                value,
                tail_detected: e.tail_detected,
            })
        })
        .collect()
}

pub fn sawtooth_csv(rows: &[SawtoothRow]) -> String {
    let mut s = String::from("x,value\n");
    for r in rows {
        writeln!(s, "{},{}", fmt_rational(&weight(r.p as i64, r.q as i64)), r.value).expect("string write");
    }
    s
}

pub fn sawtooth_svg(rows: &[SawtoothRow]) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let ymax = rows.iter().map(|r| r.value.to_f64()).fold(1.0, f64::max);
    let px = |x: f64| pad + x * (w - 2.0 * pad);
    let py = |y: f64| h - pad - y / ymax * (h - 2.0 * pad);
    let pts: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.3},{:.3}", px(r.p as f64 / r.q as f64), py(r.value.to_f64())))
        .collect();
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{:.3},{:.3} H{:.3} M{:.3},{:.3} V{:.3}" stroke="black" fill="none"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        px(0.0),
        py(0.0),
        py(ymax)
    )
    .unwrap();
    writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#, pts.join(" ")).unwrap();
    for r in rows {
        writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2" fill="steelblue"><title>{}/{}: {}</title></circle>"#,
            px(r.p as f64 / r.q as f64),
            py(r.value.to_f64()),
            r.p,
            r.q,
            r.value
        )
        .unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">x</text>"#, w / 2.0, h - 10.0).unwrap();
    s.push_str("</svg>\n");
    s
}

fn cmd_sawtooth(max_denominator: u64, out: &Path, svg: &Option<PathBuf>, gens: &str, n: usize) -> Result<Outcome> {
    if max_denominator < 5 {
        return Err(Error::OutOfDomain(max_denominator as f64, "max denominator (at least 5)"));
    }
    let f = WordLength::from_list(SurfacePresentation::builtin("pt")?, gens)?;
    let rows = sawtooth_rows(&f, max_denominator, n)?;
    write(out, &sawtooth_csv(&rows))?;
    let svg_path = svg.clone().unwrap_or_else(|| out.with_extension("svg"));
    write(&svg_path, &sawtooth_svg(&rows))?;
    let points: Vec<Json> = rows
        .iter()
        .map(|r| json!({"x": fmt_rational(&weight(r.p as i64, r.q as i64)), "value": r.value.to_string(), "tail_detected": r.tail_detected}))
        .collect();
    Ok(Outcome::ok(
        json!({"csv": out.display().to_string(), "svg": svg_path.display().to_string(), "points": points}),
        format!("{} sawtooth points written to {}", rows.len(), out.display()),
    ))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Eval { f, curve } => cmd_eval(f, curve),
        Command::Intersect { surface, rep, c, d, radius } => cmd_intersect(surface, rep, c, d, *radius),
        Command::Stable { f, curve, n } => cmd_stable(f, curve, *n),
        Command::El { graph, curve, p, cutoff } => cmd_el(graph, curve, p, *cutoff),
        Command::Verify {
            f,
            property,
            samples,
            seed,
            max_len,
        } => cmd_verify(f, property, *samples, *seed, *max_len),
        Command::Count {
            f,
            l_max,
            l_min,
            grid,
            budget,
            out,
        } => cmd_count(f, *l_max, *l_min, *grid, *budget, out),
        Command::Sawtooth {
            max_denominator,
            out,
            svg,
            gens,
            n,
        } => cmd_sawtooth(*max_denominator, out, svg, gens, *n),
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// exit code: 0 on success, 1 when a checked property fails, 2 on errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&o.json).expect("json"));
            let _ = writeln!(stderr, "{}", o.summary);
            o.code
        }
        Err(e) => {
            let j = json!({"error": error_kind(&e), "message": e.to_string()});
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&j).expect("json"));
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
