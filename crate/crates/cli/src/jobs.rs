use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use zipstrat::finitezip::{
    dimension_estimate, find_frames, match_representatives, psi_consistency, tower_counts, weyl_permutation,
    zip_orbits_with, build_instance_with_cap, FiniteField, FiniteZipError, Frame, ZipShape, DEFAULT_POINT_CAP, MAX_N,
};
use zipstrat::parabolic::{min_coset_reps, min_double_coset_reps_with};
use zipstrat::rootdata::{build, RootDataError};
use zipstrat::zipcomb::{
    bruhat_order_leq, bruhat_strata, closure_poset_with, monotonicity_check, purity_check, recursion_identity,
    zip_datum_from_cocharacter, CombZipDatum, PsiNormalization, ZipError,
};
use zipstrat::{CartanSpec, Execution, NodeSet, WeylGroup};

use crate::args::{CartanArgs, CosetArgs, DatumArgs, Format, NormArg, OracleArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("rootdata: {0}")]
    Root(#[from] RootDataError),
    #[error("zipcomb: {0}")]
    Zip(#[from] ZipError),
    #[error("finitezip: {0}")]
    Finite(#[from] FiniteZipError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// A rendered report and whether every check in it passed.
pub struct Document {
    pub body: String,
    pub pass: bool,
}

impl Document {
    fn new(mut body: String, pass: bool) -> Self {
        if !body.ends_with('\n') {
            body.push('\n');
        }
        Document { body, pass }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn load_group(args: &CartanArgs) -> Result<Arc<WeylGroup>> {
    let path = Path::new(&args.cartan);
    let spec = if path.is_file() {
        CartanSpec::parse_matrix(&std::fs::read_to_string(path)?)?
    } else {
        CartanSpec::from_series(&args.cartan).map_err(|_| {
            usage(format!("--cartan `{}` is neither a series tag like A2 or C3 nor a readable matrix file", args.cartan))
        })?
    };
    let (_, handle) = build(spec)?;
    Ok(handle.enumerate()?)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() || text == "-" || text == "none" {
        return Ok(Vec::new());
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| usage(format!("{what}: `{t}` is not a node index"))))
        .collect()
}

fn parse_nodes(text: &str, rank: usize, what: &str) -> Result<NodeSet> {
    let nodes = parse_list(text, what)?;
    if let Some(bad) = nodes.iter().find(|&&i| i >= rank) {
        return Err(usage(format!("{what}: node {bad} is out of range for rank {rank} (nodes are 0..{})", rank - 1)));
    }
    Ok(nodes.into_iter().collect())
}

fn parse_sigma(text: &str, rank: usize) -> Result<Vec<usize>> {
    if text.trim() == "id" {
        return Ok((0..rank).collect());
    }
    let perm = parse_list(text, "--sigma")?;
    if perm.len() != rank {
        return Err(usage(format!("--sigma needs {rank} entries or `id`, got {}", perm.len())));
    }
    Ok(perm)
}

fn parse_psi(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("--psi: `{pair}` should look like `s:t`")))?;
            let a = a.trim().parse().map_err(|_| usage(format!("--psi: bad node `{a}`")))?;
            let b = b.trim().parse().map_err(|_| usage(format!("--psi: bad node `{b}`")))?;
            Ok((a, b))
        })
        .collect()
}

fn build_datum(args: &DatumArgs) -> Result<CombZipDatum> {
    let group = load_group(&args.cartan)?;
    let rank = group.rank();
    let j = parse_nodes(&args.j, rank, "--J")?;
    let sigma = parse_sigma(&args.sigma, rank)?;
    match (&args.k, &args.psi) {
        (Some(k), Some(psi)) => {
            let k = parse_nodes(k, rank, "--K")?;
            Ok(CombZipDatum::new(group, j, k, &parse_psi(psi)?, sigma, args.q)?)
        }
        (None, None) => {
            let norm = match args.normalization {
                NormArg::Opposition => PsiNormalization::Opposition,
                NormArg::TwistedOpposition => PsiNormalization::TwistedOpposition,
            };
            Ok(zip_datum_from_cocharacter(group, j, sigma, args.q, norm)?)
        }
        _ => Err(usage("--K and --psi go together; give both or neither")),
    }
}

fn set_string(s: NodeSet) -> String {
    format!("{{{}}}", s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
}

fn datum_json(cartan: &str, d: &CombZipDatum) -> Value {
    json!({
        "cartan": cartan,
        "rank": d.group().rank(),
        "order": d.group().len(),
        "J": d.j().iter().collect::<Vec<_>>(),
        "K": d.k().iter().collect::<Vec<_>>(),
        "psi": d.psi_pairs(),
        "sigma": d.sigma(),
        "q": d.q(),
        "normalization": d.normalization(),
    })
}

fn datum_text(cartan: &str, d: &CombZipDatum) -> String {
    let psi: Vec<String> = d.psi_pairs().iter().map(|(s, t)| format!("s{s}->s{t}")).collect();
    let sigma = if d.sigma().iter().enumerate().all(|(i, &x)| i == x) {
        "id".to_string()
    } else {
        format!("{:?}", d.sigma())
    };
    format!(
        "datum: {cartan}, J = {}, K = {}, psi = [{}], sigma = {sigma}, q = {}",
        set_string(d.j()),
        set_string(d.k()),
        psi.join(" "),
        d.q()
    )
}

/// Covers of a partial order on `0..n` given by `leq`.
fn hasse(n: usize, leq: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && leq(a, b) && !(0..n).any(|c| c != a && c != b && leq(a, c) && leq(c, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

fn dot(title: &str, labels: &[String], covers: &[(usize, usize)]) -> String {
    let mut s = String::new();
    writeln!(s, "// {title}").unwrap();
    writeln!(s, "// An edge a -> b means stratum a lies in the closure of stratum b.").unwrap();
    writeln!(s, "digraph strata {{").unwrap();
    writeln!(s, "  rankdir=BT;").unwrap();
    for (i, l) in labels.iter().enumerate() {
        writeln!(s, "  n{i} [label=\"{l}\"];").unwrap();
    }
    for (a, b) in covers {
        writeln!(s, "  n{a} -> n{b};").unwrap();
    }
    writeln!(s, "}}").unwrap();
    s
}

pub fn roots(args: &CartanArgs, format: Format) -> Result<Document> {
    let group = load_group(args)?;
    let sys = group.root_system();
    let body = match format {
        Format::Json => to_json(&json!({"order": group.len(), "positive_roots": sys.num_positive()})),
        Format::Text => format!("order: {}\npositive roots: {}", group.len(), sys.num_positive()),
        Format::Dot => return Err(usage("roots has no dot output; use --format json or text")),
    };
    Ok(Document::new(body, true))
}

pub fn cosets(args: &CosetArgs, format: Format, exec: Execution) -> Result<Document> {
    let group = load_group(&args.cartan)?;
    let rank = group.rank();
    let j = parse_nodes(&args.j, rank, "--J")?;
    let table = min_coset_reps(&group, j);
    let reps: Vec<Value> = table
        .reps()
        .iter()
        .map(|&w| json!({"word": group.word_string(w), "length": group.length(w)}))
        .collect();
    let double = match &args.k {
        Some(k) => {
            let k = parse_nodes(k, rank, "--K")?;
            let dt = min_double_coset_reps_with(&group, j, k, exec);
            let mut rows = Vec::new();
            for &x in dt.reps() {
                let fiber = dt.fiber(&group, x).map_err(ZipError::from)?;
                let top = zipstrat::parabolic::max_length_in_fiber(&group, x, j, k).map_err(ZipError::from)?;
                rows.push(json!({
                    "x": group.word_string(x),
                    "length": group.length(x),
                    "fiber": fiber.iter().map(|&w| group.word_string(w)).collect::<Vec<_>>(),
                    "top": group.word_string(top),
                    "dim": group.length(top),
                }));
            }
            Some((k, rows))
        }
        None => None,
    };
    let body = match format {
        Format::Json => {
            let mut doc = json!({
                "cartan": args.cartan.cartan,
                "J": j.iter().collect::<Vec<_>>(),
                "order": group.len(),
                "count": table.len(),
                "reps": reps,
            });
            if let Some((k, rows)) = &double {
                doc["K"] = json!(k.iter().collect::<Vec<_>>());
                doc["double_cosets"] = json!(rows);
            }
            to_json(&doc)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{}: |W| = {}, J = {}, |^J W| = {}", args.cartan.cartan, group.len(), set_string(j), table.len()).unwrap();
            for &w in table.reps() {
                writeln!(s, "  {} ({})", group.word_string(w), group.length(w)).unwrap();
            }
            if let Some((k, rows)) = &double {
                writeln!(s, "K = {}, |^J W^K| = {}", set_string(*k), rows.len()).unwrap();
                for r in rows {
                    writeln!(
                        s,
                        "  x = {} ({}), fiber size {}, top {} (dim {})",
                        r["x"].as_str().unwrap(),
                        r["length"],
                        r["fiber"].as_array().unwrap().len(),
                        r["top"].as_str().unwrap(),
                        r["dim"]
                    )
                    .unwrap();
                }
            }
            s
        }
        Format::Dot => return Err(usage("cosets has no dot output; use --format json or text")),
    };
    Ok(Document::new(body, true))
}

pub fn zip_poset(args: &DatumArgs, format: Format, exec: Execution) -> Result<Document> {
    let d = build_datum(args)?;
    let poset = closure_poset_with(&d, exec)?;
    let purity = purity_check(&poset);
    let mono = monotonicity_check(&d, &poset);
    let pass = purity.pass && mono.pass;
    let cartan = &args.cartan.cartan;
    let body = match format {
        Format::Json => to_json(&json!({
            "datum": datum_json(cartan, &d),
            "strata": poset.nodes(),
            "covers": poset.covers().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
            "checks": {"purity": verdict(purity.pass), "monotone": verdict(mono.pass)},
            "violations": {"purity": purity.violations, "monotone": mono.violations},
        })),
        Format::Dot => {
            let labels: Vec<String> = poset.nodes().iter().map(|n| format!("{} ({})", n.word, n.length)).collect();
            dot(&format!("Zip strata closure order, {}", datum_text(cartan, &d)), &labels, poset.covers())
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{}", datum_text(cartan, &d)).unwrap();
            let shape = if poset.is_chain() { "chain" } else { "poset" };
            writeln!(s, "strata: {}-node {shape}", poset.nodes().len()).unwrap();
            for n in poset.nodes() {
                writeln!(s, "  {:<12} length {:<3} dim {}", n.word, n.length, n.dim).unwrap();
            }
            writeln!(s, "covers:").unwrap();
            for &(a, b) in poset.covers() {
                writeln!(s, "  {} < {}", poset.nodes()[a].word, poset.nodes()[b].word).unwrap();
            }
            writeln!(s, "purity: {}", verdict(purity.pass)).unwrap();
            for v in &purity.violations {
                writeln!(s, "  cover {} < {} drops dimension by {}", v.lower, v.upper, v.drop).unwrap();
            }
            writeln!(s, "monotone: {} ({} pairs)", verdict(mono.pass), mono.pairs_checked).unwrap();
            for (a, b) in &mono.violations {
                writeln!(s, "  {a} ⪯ {b} but their Bruhat strata are not ordered").unwrap();
            }
            s
        }
    };
    Ok(Document::new(body, pass))
}

pub fn bruhat(args: &DatumArgs, format: Format) -> Result<Document> {
    let d = build_datum(args)?;
    let g = d.group();
    let strata = bruhat_strata(&d)?;
    let covers = hasse(strata.len(), |a, b| bruhat_order_leq(&d, strata[a].x, strata[b].x));
    let cartan = &args.cartan.cartan;
    let body = match format {
        Format::Json => to_json(&json!({
            "datum": datum_json(cartan, &d),
            "strata": strata.iter().map(|s| json!({
                "word": s.word,
                "length": g.length(s.x),
                "dim": s.dim,
                "top": s.top,
                "fiber_size": s.fiber_size,
            })).collect::<Vec<_>>(),
            "covers": covers.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        })),
        Format::Dot => {
            let labels: Vec<String> = strata.iter().map(|s| format!("{} ({})", s.word, g.length(s.x))).collect();
            dot(&format!("Bruhat strata, {}", datum_text(cartan, &d)), &labels, &covers)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{}", datum_text(cartan, &d)).unwrap();
            writeln!(s, "bruhat strata: {}", strata.len()).unwrap();
            for st in &strata {
                writeln!(s, "  x = {:<10} top {:<12} dim {:<3} zip strata {}", st.word, st.top, st.dim, st.fiber_size).unwrap();
            }
            s
        }
    };
    Ok(Document::new(body, true))
}

pub fn purity_report(args: &DatumArgs, format: Format, exec: Execution) -> Result<Document> {
    let d = build_datum(args)?;
    let poset = closure_poset_with(&d, exec)?;
    let purity = purity_check(&poset);
    let mono = monotonicity_check(&d, &poset);
    let rec = recursion_identity(&d)?;
    let pass = purity.pass && mono.pass && rec.pass;
    let cartan = &args.cartan.cartan;
    let body = match format {
        Format::Json => to_json(&json!({
            "datum": datum_json(cartan, &d),
            "checks": {"purity": verdict(purity.pass), "monotone": verdict(mono.pass), "recursion": verdict(rec.pass)},
            "purity": purity,
            "monotone": mono,
            "recursion": rec,
        })),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{}", datum_text(cartan, &d)).unwrap();
            writeln!(s, "purity: {} ({} covers)", verdict(purity.pass), purity.covers.len()).unwrap();
            for v in &purity.violations {
                writeln!(s, "  cover {} < {} drops dimension by {}", v.lower, v.upper, v.drop).unwrap();
            }
            writeln!(s, "monotone: {} ({} pairs)", verdict(mono.pass), mono.pairs_checked).unwrap();
            for (a, b) in &mono.violations {
                writeln!(s, "  {a} ⪯ {b} but their Bruhat strata are not ordered").unwrap();
            }
            writeln!(s, "recursion: {} (|^J W| = {}, sum over ^J W^K = {})", verdict(rec.pass), rec.strata, rec.total).unwrap();
            for t in &rec.terms {
                writeln!(s, "  x = {:<10} J_x = {:?} count {}", t.x, t.j_x, t.count).unwrap();
            }
            s
        }
        Format::Dot => return Err(usage("purity-report has no dot output; use --format json or text")),
    };
    Ok(Document::new(body, pass))
}

#[derive(Serialize)]
struct DimRow {
    w: String,
    class: Option<u32>,
    expected: usize,
    estimate: f64,
    naive_estimate: f64,
    stabilizer_orders: [u128; 2],
    pass: bool,
}

fn frame_text(f: &Frame) -> String {
    let rows: Vec<String> = (0..f.g.n()).map(|i| format!("{:?}", f.g.row(i))).collect();
    format!("g = [{}], J = {}, K = {}", rows.join(" "), set_string(f.j), set_string(f.k))
}

pub fn oracle(args: &OracleArgs, format: Format, exec: Execution) -> Result<Document> {
    let (n, d, p) = (args.n, args.d, args.p);
    if !(2..=MAX_N).contains(&n) {
        return Err(usage(format!("--n must be between 2 and {MAX_N}")));
    }
    if d > n {
        return Err(usage(format!("--d must be at most --n = {n}")));
    }
    let levels: Vec<u32> = match &args.levels {
        Some(text) => parse_list(text, "--levels")?.into_iter().map(|m| m as u32).collect(),
        None => (1..=args.m_max).filter(|m| args.m_max % m == 0).collect(),
    };
    if levels.first() != Some(&1) || levels.len() < 2 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(format!("the tower needs increasing levels starting at 1 with at least two entries, got {levels:?}")));
    }
    let dims = parse_list(&args.dims, "--dims")?;
    let [m_low, m_high] = dims[..] else {
        return Err(usage("--dims takes two field degrees, e.g. 1,2"));
    };
    let cap = args.cap.unwrap_or(DEFAULT_POINT_CAP);
    let shape = ZipShape::new(n, d)?;
    let group = WeylGroup::from_series(&format!("A{}", n - 1))?;

    let count = tower_counts(n, d, p, &levels, cap, exec)?;
    let stabilized = count.is_stabilized();
    let matched = match_representatives(&count, &group).ok();
    let frame = match &matched {
        Some(m) => m.frame.clone(),
        None => find_frames(shape, p)?.into_iter().next().ok_or(FiniteZipError::NoFrameFound { p, m: count.top_level() })?,
    };
    let coset_reps = min_coset_reps(&group, frame.j);
    let expected = coset_reps.len();
    let orbits_match = stabilized && count.count() == expected && matched.is_some();

    let psi_violations = psi_consistency(&count, &group, &frame, &frame.psi_pairs)?.len();
    let mut by_norm = Vec::new();
    for norm in [PsiNormalization::Opposition, PsiNormalization::TwistedOpposition] {
        let datum = zip_datum_from_cocharacter(group.clone(), frame.j, (0..n - 1).collect(), p, norm)?;
        let v = if datum.k() == frame.k { Some(psi_consistency(&count, &group, &frame, &datum.psi_pairs())?.len()) } else { None };
        by_norm.push((norm, v));
    }

    let base = FiniteField::new(p, 1)?;
    let mut dim_rows = Vec::new();
    for &w in coset_reps.reps() {
        let h = frame.g.mul(&weyl_permutation(&group, w), &base);
        let est = dimension_estimate(shape, p, &h, m_low as u32, m_high as u32, exec)?;
        let want = shape.dim_p() + group.length(w);
        dim_rows.push(DimRow {
            w: group.word_string(w),
            class: matched.as_ref().map(|_| count.label_of(&h).expect("F_p point")),
            expected: want,
            estimate: est.estimate,
            naive_estimate: est.naive_estimate,
            stabilizer_orders: [est.low.order, est.high.order],
            pass: (est.estimate - want as f64).abs() <= 0.25,
        });
    }
    let dims_pass = dim_rows.iter().all(|r| r.pass);

    let rational = match args.m {
        Some(m) => {
            let inst = build_instance_with_cap(n, d, p, m, cap)?;
            let table = zip_orbits_with(&inst, exec)?;
            Some((m, table.classes().iter().map(|c| c.size).collect::<Vec<_>>()))
        }
        None => None,
    };

    let counts: Vec<String> = count.levels.iter().map(|l| l.count.to_string()).collect();
    let ms: Vec<String> = count.levels.iter().map(|l| l.m.to_string()).collect();
    let headline = if !stabilized {
        format!(
            "geometric orbits: not stabilized (counts {} at m = {}; lower bound {}; |^J W| = {expected})",
            counts.join(", "),
            ms.join(", "),
            count.lower_bound
        )
    } else if orbits_match {
        format!("geometric orbits: {} (matches |^J W| = {expected})", count.count())
    } else {
        format!("geometric orbits: {} (differs from |^J W| = {expected})", count.count())
    };
    let pass = orbits_match && dims_pass && psi_violations == 0;

    let body = match format {
        Format::Json => to_json(&json!({
            "datum": {"group": format!("GL_{n}"), "n": n, "d": d, "p": p, "q": p},
            "frame": {"g": (0..n).map(|i| frame.g.row(i).to_vec()).collect::<Vec<_>>(), "J": frame.j, "K": frame.k, "psi": frame.psi_pairs},
            "levels": count.levels.iter().map(|l| json!({"m": l.m, "count": l.count})).collect::<Vec<_>>(),
            "lower_bound": count.lower_bound,
            "stabilized": stabilized,
            "geometric_orbits": if stabilized { Some(count.count()) } else { None },
            "expected": expected,
            "strata": dim_rows,
            "psi": {
                "frame_violations": psi_violations,
                "normalizations": by_norm.iter().map(|(nm, v)| json!({"normalization": nm, "violations": v})).collect::<Vec<_>>(),
            },
            "rational": rational.as_ref().map(|(m, sizes)| json!({"m": m, "orbits": sizes.len(), "sizes": sizes})),
            "checks": {"orbits": verdict(orbits_match), "dimensions": verdict(dims_pass), "psi": verdict(psi_violations == 0)},
        })),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "datum: GL_{n}, d = {d}, p = q = {p}").unwrap();
            writeln!(s, "frame: {}", frame_text(&frame)).unwrap();
            let tower: Vec<String> = count.levels.iter().map(|l| format!("m={}: {}", l.m, l.count)).collect();
            writeln!(s, "tower: {}", tower.join(", ")).unwrap();
            writeln!(s, "lower bound (P x Q double cosets): {}", count.lower_bound).unwrap();
            writeln!(s, "{headline}").unwrap();
            writeln!(s, "dimensions (stabilizers over F_{}^{m_low} and F_{}^{m_high}):", p, p).unwrap();
            for r in &dim_rows {
                writeln!(
                    s,
                    "  w = {:<10} dim P + l(w) = {:<3} estimate {:.3} naive {:.3}  {}",
                    r.w,
                    r.expected,
                    r.estimate,
                    r.naive_estimate,
                    verdict(r.pass)
                )
                .unwrap();
            }
            let norms: Vec<String> = by_norm
                .iter()
                .map(|(nm, v)| match v {
                    Some(v) => format!("{nm:?} {v}"),
                    None => format!("{nm:?} n/a"),
                })
                .collect();
            writeln!(s, "psi violations: frame {psi_violations}; {}", norms.join(", ")).unwrap();
            if let Some((m, sizes)) = &rational {
                writeln!(s, "rational orbits over F_{}^{m}: {} (sizes {:?})", p, sizes.len(), sizes).unwrap();
            }
            s
        }
        Format::Dot => return Err(usage("oracle has no dot output; use --format json or text")),
    };
    Ok(Document::new(body, pass))
}
