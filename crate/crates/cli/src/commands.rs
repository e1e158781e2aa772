use clap::{Args, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use qpi_core::exact::{format_rational, parse_rational};
use qpi_core::isometry_numeric::{
    default_tol, membership, monte_carlo_law, real_words, sample_with, stream_rng, IsometryClass,
};
use qpi_core::measures::{
    bessel_truncated, bp_check, mu_bruteforce, mu_formula, partition_moment_sequence, poisson_truncated, sign_mixing,
    tv_distance, RationalMeasure,
};
use qpi_core::models::{
    check_half_commutation, crossed_model, double_compose_check, doubling_equivalence, restricted_class_check,
    separating_witness, Relation, RelationInput, RestrictedTarget,
};
use qpi_core::partial_maps::{count, enumerate, rank_count, SignOrder};
use qpi_core::partitions::{Category, ColoredWord};
use qpi_core::suite::{self, SuiteConfig};
use qpi_core::weingarten::{
    build_table, classical_triple_moment, diagonal_deviation, limit_moment, single_group_moment, triple_moment,
    triple_moment_naive, MomentRow, MOMENT_CSV_HEADER,
};
use qpi_core::{Error, Result};
use rand::Rng;

use crate::output::{Report, Table};
use crate::{Cli, Command, Format};

/// Largest enumeration written in one run.
pub const ENUMERATION_GUARD: u64 = 2_000_000;
/// Largest number of matrices written by `sample --mode matrix`.
pub const SAMPLE_GUARD: usize = 10_000;

fn parse<T: std::str::FromStr<Err = Error>>(flag: &str, s: &str) -> Result<T> {
    s.parse().map_err(|e: Error| Error::Parameter(format!("--{flag}: {e}")))
}

fn rational(flag: &str, s: &str) -> Result<BigRational> {
    parse_rational(s).map_err(|e| Error::Parameter(format!("--{flag}: {e}")))
}

fn exact_value(r: &BigRational) -> Value {
    json!({ "exact": format_rational(r), "float": r.to_f64() })
}

/// `k` and `l` from `--k/--l`, or from `--s/--t` as `⌈sN⌉, ⌈tN⌉`.
fn resolve_kl(n: usize, k: Option<usize>, l: Option<usize>, s: Option<&str>, t: Option<&str>) -> Result<(usize, usize)> {
    let one = |name: &str, direct: Option<usize>, frac: Option<&str>, frac_name: &str| -> Result<usize> {
        let v = match (direct, frac) {
            (Some(v), _) => v,
            (None, Some(f)) => {
                let r = rational(frac_name, f)? * BigRational::from_integer(n.into());
                r.ceil().to_integer().to_usize().ok_or_else(|| Error::Parameter(format!("--{frac_name} must be in [0,1]")))?
            }
            (None, None) => n,
        };
        if v > n {
            return Err(Error::Parameter(format!("--{name}={v} exceeds N={n}")));
        }
        Ok(v)
    };
    Ok((one("k", k, s, "s")?, one("l", l, t, "t")?))
}

fn st(n: usize, k: usize, l: usize) -> BigRational {
    BigRational::new((k * l).into(), (n * n).max(1).into())
}

fn measure_table(m: &RationalMeasure) -> Table {
    let v = serde_json::to_value(m).expect("measure serializes");
    let rows = v["atoms"]
        .as_array()
        .map(|atoms| {
            atoms
                .iter()
                .map(|a| {
                    let point: Vec<&str> = a["point"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
                    vec![point.join(" "), a["weight"].as_str().unwrap_or_default().to_string()]
                })
                .collect()
        })
        .unwrap_or_default();
    Table { columns: vec!["point", "weight"], rows }
}

// ---------------------------------------------------------------- enumerate

#[derive(Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    /// Sign order: a positive integer or `inf`.
    #[arg(long, default_value = "1")]
    pub x: String,
    /// Keep only maps of this rank.
    #[arg(long)]
    pub k: Option<usize>,
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<Report> {
    let order: SignOrder = parse("x", &a.x)?;
    let it = enumerate(a.n, order, a.k)?;
    let x = u64::from(order.finite().expect("finite after enumerate"));
    let size = match a.k {
        Some(k) => rank_count(a.n as u64, k as u64, x),
        None => count(a.n as u64, x),
    };
    if size > ENUMERATION_GUARD.into() {
        return Err(Error::Guard(format!(
            "enumeration guard: {size} records exceed {ENUMERATION_GUARD}; restrict with --k or lower --N"
        )));
    }
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for s in it {
        let v = serde_json::to_value(&s).expect("map serializes");
        let cell = |key: &str| -> String {
            v[key]
                .as_array()
                .into_iter()
                .flatten()
                .map(|e| match e {
                    Value::Null => "-".to_string(),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        rows.push(vec![s.kappa().to_string(), cell("map"), cell("signs")]);
        records.push(v);
    }
    Ok(Report::json(json!({ "N": a.n, "x": a.x, "k": a.k, "count": records.len(), "records": records }))
        .with_table(Table { columns: vec!["rank", "map", "signs"], rows }))
}

// ---------------------------------------------------------------- law

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawMode {
    /// Closed form (x = 1).
    Formula,
    /// Exhaustive enumeration over the rank-k slice.
    Bruteforce,
    /// Closed form for x = 2 via sign mixing.
    SignMixing,
    /// Closed form against brute force (x = 1 or 2).
    Compare,
    /// Truncated Poisson(st) law.
    Poisson,
    /// Truncated Bessel law of order x.
    Bessel,
    /// Total variation between the closed form and Poisson(kl/N²).
    Tv,
}

#[derive(Args, Serialize)]
pub struct LawArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// Rank fraction, k = ⌈sN⌉.
    #[arg(long)]
    pub s: Option<String>,
    /// Truncation fraction, l = ⌈tN⌉.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub x: u32,
    #[arg(long, value_enum, default_value_t = LawMode::Formula)]
    pub mode: LawMode,
    /// Poisson/Bessel parameter; defaults to kl/N².
    #[arg(long)]
    pub st: Option<String>,
    #[arg(long, default_value_t = 40)]
    pub cutoff: usize,
}

fn cmd_law(a: &LawArgs) -> Result<Report> {
    let (k, l) = resolve_kl(a.n, a.k, a.l, a.s.as_deref(), a.t.as_deref())?;
    let st = match &a.st {
        Some(s) => rational("st", s)?,
        None => st(a.n, k, l),
    };
    let base = json!({ "N": a.n, "k": k, "l": l, "x": a.x });
    let measure_report = |m: RationalMeasure| {
        let table = measure_table(&m);
        let mut v = base.clone();
        v["law"] = serde_json::to_value(&m).expect("measure serializes");
        Report::json(v).with_table(table)
    };
    match a.mode {
        LawMode::Formula => {
            if a.x != 1 {
                return Err(Error::Parameter("--mode formula needs --x 1; use sign-mixing or bruteforce".into()));
            }
            Ok(measure_report(mu_formula(a.n, k, l)?))
        }
        LawMode::Bruteforce => Ok(measure_report(mu_bruteforce(a.n, k, l, a.x)?)),
        LawMode::SignMixing => Ok(measure_report(sign_mixing(a.n, k, l)?)),
        LawMode::Poisson => Ok(measure_report(poisson_truncated(&st, a.cutoff)?)),
        LawMode::Bessel => Ok(measure_report(bessel_truncated(a.x, &st, a.cutoff)?)),
        LawMode::Compare => {
            let closed = match a.x {
                1 => mu_formula(a.n, k, l)?,
                2 => sign_mixing(a.n, k, l)?,
                _ => return Err(Error::Parameter("--mode compare supports x = 1 and x = 2".into())),
            };
            let brute = mu_bruteforce(a.n, k, l, a.x)?;
            let equal = closed == brute;
            let mut v = base;
            v["equal"] = json!(equal);
            v["closed_form"] = serde_json::to_value(&closed).expect("measure serializes");
            v["bruteforce"] = serde_json::to_value(&brute).expect("measure serializes");
            Ok(Report::json(v).failing_unless(equal, "closed form differs from brute force"))
        }
        LawMode::Tv => {
            let tv = tv_distance(&mu_formula(a.n, k, l)?, &poisson_truncated(&st, a.cutoff)?)?;
            let mut v = base;
            v["st"] = json!(format_rational(&st));
            v["cutoff"] = json!(a.cutoff);
            v["tv"] = json!(tv);
            Ok(Report::json(v))
        }
    }
}

// ---------------------------------------------------------------- weingarten

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeingartenMode {
    /// Basis, Gram matrix and its exact inverse.
    Table,
    /// Three-factor moment, contracted form.
    Triple,
    /// Three-factor moment, six-fold sum.
    Naive,
    /// Three-factor moment over a classical category.
    Classical,
    /// Single-group moment of χ_l.
    Single,
    /// Partition-count limit Σ st^{|α|}.
    Limit,
    /// Three-factor moment at k = N against the single-group moment.
    HaarCheck,
    /// Moment table for orders 1..=n and each N in --Ns.
    Rows,
    /// Largest off-diagonal deviation of the normalized Weingarten matrix.
    Deviation,
}

#[derive(Args, Serialize)]
pub struct WeingartenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    /// P, P2, Px(x), NC, NC2 or NCx(x).
    #[arg(long, default_value = "NC")]
    pub cat: String,
    /// Colored word such as `11*1*`; defaults to all ones.
    #[arg(long)]
    pub word: Option<String>,
    #[arg(long, value_enum, default_value_t = WeingartenMode::Table)]
    pub mode: WeingartenMode,
    /// Limit parameter for --mode limit; defaults to kl/N².
    #[arg(long)]
    pub st: Option<String>,
    /// Comma-separated list of N for --mode rows.
    #[arg(long = "Ns", value_delimiter = ',')]
    #[serde(rename = "Ns")]
    pub dims: Vec<u64>,
}

fn cmd_weingarten(a: &WeingartenArgs) -> Result<Report> {
    let cat: Category = parse("cat", &a.cat)?;
    let word: Option<ColoredWord> = a.word.as_deref().map(|w| parse("word", w)).transpose()?;
    let word = word.as_ref();
    let dim = a.dim as usize;
    let (k, l) = resolve_kl(dim, a.k, a.l, a.s.as_deref(), a.t.as_deref())?;
    let (ku, lu) = (k as u64, l as u64);
    let base = json!({ "n": a.n, "N": a.dim, "k": k, "l": l, "category": cat.to_string() });
    let with = |key: &str, v: Value| {
        let mut b = base.clone();
        b[key] = v;
        b
    };
    match a.mode {
        WeingartenMode::Table => {
            let t = build_table(a.n, a.dim, cat, word)?;
            let strings = |m: &qpi_core::exact::RationalMatrix| -> Vec<Vec<String>> {
                (0..m.rows()).map(|i| (0..m.cols()).map(|j| format_rational(&m[(i, j)])).collect()).collect()
            };
            let basis: Vec<String> = t.basis.iter().map(ToString::to_string).collect();
            let mut rows = Vec::new();
            for (i, p) in basis.iter().enumerate() {
                for (j, q) in basis.iter().enumerate() {
                    rows.push(vec![p.clone(), q.clone(), format_rational(&t.gram[(i, j)]), format_rational(&t.wg[(i, j)])]);
                }
            }
            let exact = t.is_exact_inverse();
            let v = json!({
                "n": a.n, "N": a.dim, "category": cat.to_string(),
                "word": t.word.as_ref().map(ToString::to_string),
                "basis": basis, "gram": strings(&t.gram), "wg": strings(&t.wg),
                "exact_inverse": exact,
            });
            Ok(Report::json(v)
                .with_table(Table { columns: vec!["p", "q", "gram", "wg"], rows })
                .failing_unless(exact, "gram·wg is not the identity"))
        }
        WeingartenMode::Triple => Ok(Report::json(with("value", exact_value(&triple_moment(a.n, a.dim, ku, lu, cat, word)?)))),
        WeingartenMode::Naive => {
            Ok(Report::json(with("value", exact_value(&triple_moment_naive(a.n, a.dim, ku, lu, cat, word)?))))
        }
        WeingartenMode::Classical => {
            if word.is_some() {
                return Err(Error::Parameter("--mode classical takes no --word".into()));
            }
            Ok(Report::json(with("value", exact_value(&classical_triple_moment(a.n, a.dim, ku, lu, cat)?))))
        }
        WeingartenMode::Single => Ok(Report::json(with("value", exact_value(&single_group_moment(a.n, a.dim, lu, cat, word)?)))),
        WeingartenMode::Limit => {
            let st_val = match &a.st {
                Some(s) => rational("st", s)?,
                None => st(dim, k, l),
            };
            let mut v = with("value", exact_value(&limit_moment(a.n, cat, &st_val)?));
            v["st"] = json!(format_rational(&st_val));
            Ok(Report::json(v))
        }
        WeingartenMode::HaarCheck => {
            if k != dim {
                return Err(Error::Parameter(format!("--mode haar-check needs k = N, got k={k}")));
            }
            let triple = triple_moment(a.n, a.dim, ku, lu, cat, word)?;
            let single = single_group_moment(a.n, a.dim, lu, cat, word)?;
            let equal = triple == single;
            let mut v = with("equal", json!(equal));
            v["triple"] = exact_value(&triple);
            v["single"] = exact_value(&single);
            Ok(Report::json(v).failing_unless(equal, "triple and single-group moments differ"))
        }
        WeingartenMode::Rows => {
            if word.is_some() {
                return Err(Error::Parameter("--mode rows takes no --word".into()));
            }
            let dims = if a.dims.is_empty() { vec![a.dim] } else { a.dims.clone() };
            let mut out = Vec::new();
            for &d in &dims {
                let (k, l) = resolve_kl(d as usize, a.k, a.l, a.s.as_deref(), a.t.as_deref())?;
                for n in 1..=a.n {
                    out.push(MomentRow::compute(n, d, k as u64, l as u64, cat)?);
                }
            }
            let columns = MOMENT_CSV_HEADER.split(',').collect();
            let rows = out.iter().map(|r| r.to_csv().split(',').map(String::from).collect()).collect();
            Ok(Report::json(json!({ "category": cat.to_string(), "rows": out })).with_table(Table { columns, rows }))
        }
        WeingartenMode::Deviation => {
            let t = build_table(a.n, a.dim, cat, word)?;
            Ok(Report::json(with("deviation", exact_value(&diagonal_deviation(&t)))))
        }
    }
}

// ---------------------------------------------------------------- bp

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pair {
    /// P against NC.
    Poisson,
    /// P2 against NC2.
    Gaussian,
    /// Px(x) against NCx(x).
    Bessel,
}

#[derive(Args, Serialize)]
pub struct BpArgs {
    #[arg(long, value_enum)]
    pub pair: Pair,
    #[arg(long, default_value = "1")]
    pub st: String,
    /// Parameter of the free side; defaults to --st.
    #[arg(long)]
    pub free_st: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    #[arg(long, default_value_t = 2)]
    pub x: u32,
}

fn cmd_bp(a: &BpArgs) -> Result<Report> {
    let st = rational("st", &a.st)?;
    let free_st = match &a.free_st {
        Some(s) => rational("free-st", s)?,
        None => st.clone(),
    };
    let (c, f) = match a.pair {
        Pair::Poisson => (Category::P, Category::NC),
        Pair::Gaussian => (Category::P2, Category::NC2),
        Pair::Bessel => (Category::Px(a.x), Category::NCx(a.x)),
    };
    let classical = partition_moment_sequence(c, a.nmax, &st)?;
    let free = partition_moment_sequence(f, a.nmax, &free_st)?;
    let r = bp_check(&classical, &free, a.nmax)?;
    let rows = r
        .classical
        .iter()
        .zip(&r.free)
        .enumerate()
        .map(|(i, (x, y))| vec![(i + 1).to_string(), format_rational(x), format_rational(y)])
        .collect();
    let pass = r.pass;
    let v = json!({
        "classical_category": c.to_string(),
        "free_category": f.to_string(),
        "st": format_rational(&st),
        "free_st": format_rational(&free_st),
        "report": r,
    });
    Ok(Report::json(v)
        .with_table(Table { columns: vec!["order", "classical_cumulant", "free_cumulant"], rows })
        .failing_unless(pass, "cumulant lists differ"))
}

// ---------------------------------------------------------------- sample

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// The sampled matrices with residuals and membership.
    Matrix,
    /// Monte Carlo moments of the truncated character.
    Law,
}

#[derive(Args, Serialize)]
pub struct SampleArgs {
    /// O, U, B, H, K or S.
    #[arg(long)]
    pub class: String,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    /// Rank; defaults to N.
    #[arg(long)]
    pub k: Option<usize>,
    /// Truncation of the character in law mode; defaults to N.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, value_enum, default_value_t = SampleMode::Matrix)]
    pub mode: SampleMode,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Real moment orders 1..=nmax in law mode.
    #[arg(long, default_value_t = 4)]
    pub nmax: usize,
    /// Comma-separated colored words, replacing --nmax.
    #[arg(long, value_delimiter = ',')]
    pub words: Vec<String>,
}

fn cmd_sample(a: &SampleArgs, seed: u64, tol: Option<f64>) -> Result<Report> {
    let class: IsometryClass = parse("class", &a.class)?;
    let (k, l) = resolve_kl(a.n, a.k, a.l, None, None)?;
    match a.mode {
        SampleMode::Matrix => {
            if a.samples > SAMPLE_GUARD {
                return Err(Error::Guard(format!("sample guard: {} matrices exceed {SAMPLE_GUARD}", a.samples)));
            }
            let tol = tol.unwrap_or(default_tol(a.n));
            let mut all_members = true;
            let mut out = Vec::new();
            for i in 0..a.samples {
                let m = sample_with(class, a.n, k, &mut stream_rng(seed, i as u64))?;
                let mem = membership(&m, class, tol);
                all_members &= mem.member;
                out.push(json!({ "index": i, "matrix": m, "residual": m.residual(), "membership": mem }));
            }
            Ok(Report::json(json!({ "class": class, "N": a.n, "k": k, "samples": out }))
                .failing_unless(all_members, "a sample failed its class membership test"))
        }
        SampleMode::Law => {
            let words: Vec<ColoredWord> = if a.words.is_empty() {
                real_words(a.nmax)
            } else {
                a.words.iter().map(|w| parse("words", w)).collect::<Result<_>>()?
            };
            let law = monte_carlo_law(class, a.n, k, l, a.samples, seed, &words)?;
            let rows = law
                .moments
                .iter()
                .map(|m| vec![m.word.to_string(), m.re.to_string(), m.im.to_string(), m.se.to_string()])
                .collect();
            Ok(Report::json(serde_json::to_value(&law).expect("law serializes"))
                .with_table(Table { columns: vec!["word", "re", "im", "se"], rows }))
        }
    }
}

// ---------------------------------------------------------------- model-check

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelMode {
    /// Crossed-product model of Ũ_N samples: vvᵗv = v, self-adjointness and a relation.
    Crossed,
    /// Doubling commutes with composition on pairs of Ũ_N samples.
    DoubleCompose,
    /// Pattern check of the restricted doubling.
    Restricted,
    /// Membership of U and of its double agree.
    Equivalence,
    /// Fixed model satisfying ab*c = cb*a but not abc = cba.
    Witness,
}

#[derive(Args, Serialize)]
pub struct ModelCheckArgs {
    #[arg(long, value_enum, default_value_t = ModelMode::Crossed)]
    pub mode: ModelMode,
    #[arg(long = "N", default_value_t = 3)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Rank; drawn uniformly per sample when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// abc_cba or abstarc.
    #[arg(long, default_value = "abc_cba")]
    pub relation: String,
    /// H2N_from_K or O2N_from_U.
    #[arg(long, default_value = "H2N_from_K")]
    pub target: String,
    /// Witness entries.
    #[arg(long, default_value_t = 1.0)]
    pub wx: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wy: f64,
}

fn cmd_model_check(a: &ModelCheckArgs, seed: u64, tol: Option<f64>) -> Result<Report> {
    let relation: Relation = parse("relation", &a.relation)?;
    let target: RestrictedTarget = parse("target", &a.target)?;
    if let Some(k) = a.k {
        if k > a.n {
            return Err(Error::Parameter(format!("--k={k} exceeds N={}", a.n)));
        }
    }
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, class: IsometryClass| {
        let k = a.k.unwrap_or_else(|| rng.random_range(0..=a.n));
        sample_with(class, a.n, k, rng)
    };
    let base = json!({ "mode": a.mode, "N": a.n, "samples": a.samples });
    match a.mode {
        ModelMode::Crossed => {
            let tol = tol.unwrap_or(1e-9);
            let (mut vvtv, mut adj, mut rel) = (0f64, 0f64, 0f64);
            let mut pass = true;
            for i in 0..a.samples {
                let mut rng = stream_rng(seed, i as u64);
                let v = crossed_model(&draw(&mut rng, IsometryClass::U)?);
                let r = check_half_commutation(&RelationInput::model(&v, relation), relation, tol, seed.wrapping_add(i as u64));
                vvtv = vvtv.max(v.vvtv_residual());
                adj = adj.max(v.self_adjoint_residual());
                rel = rel.max(r.max_residual);
                pass &= r.pass;
            }
            pass &= vvtv <= tol && adj <= tol;
            let mut v = base;
            v["relation"] = json!(relation);
            v["max_vvtv_residual"] = json!(vvtv);
            v["max_self_adjoint_residual"] = json!(adj);
            v["max_relation_residual"] = json!(rel);
            v["pass"] = json!(pass);
            Ok(Report::json(v).failing_unless(pass, "crossed model check above tolerance"))
        }
        ModelMode::DoubleCompose => {
            let tol = tol.unwrap_or(1e-8);
            let mut worst = 0f64;
            for i in 0..a.samples {
                let mut rng = stream_rng(seed, i as u64);
                let (u, w) = (draw(&mut rng, IsometryClass::U)?, draw(&mut rng, IsometryClass::U)?);
                worst = worst.max(double_compose_check(&u, &w, tol)?.max_residual);
            }
            let mut v = base;
            v["max_residual"] = json!(worst);
            v["pass"] = json!(worst <= tol);
            Ok(Report::json(v).failing_unless(worst <= tol, "doubling does not commute with composition"))
        }
        ModelMode::Restricted => {
            let tol = tol.unwrap_or(1e-9);
            let class = match target {
                RestrictedTarget::H2NFromK => IsometryClass::K,
                RestrictedTarget::O2NFromU => IsometryClass::U,
            };
            let mut passed = 0;
            for i in 0..a.samples {
                let u = draw(&mut stream_rng(seed, i as u64), class)?;
                passed += usize::from(restricted_class_check(&u, target, tol)?);
            }
            let mut v = base;
            v["target"] = json!(target);
            v["passed"] = json!(passed);
            v["pass"] = json!(passed == a.samples);
            Ok(Report::json(v).failing_unless(passed == a.samples, "restricted doubling pattern not preserved"))
        }
        ModelMode::Equivalence => {
            let tol = tol.unwrap_or(1e-9);
            let mut results = Vec::new();
            let mut pass = true;
            for i in 0..a.samples {
                let u = draw(&mut stream_rng(seed, i as u64), IsometryClass::U)?;
                let eq = doubling_equivalence(u.entries(), tol);
                pass &= eq.source_member && eq.consistent();
                results.push(eq);
            }
            let mut v = base;
            v["results"] = json!(results);
            v["pass"] = json!(pass);
            Ok(Report::json(v).failing_unless(pass, "doubling equivalence failed"))
        }
        ModelMode::Witness => {
            let tol = tol.unwrap_or(1e-9);
            let w = separating_witness(a.wx, a.wy);
            let abc = check_half_commutation(&RelationInput::model(&w, Relation::AbcCba), Relation::AbcCba, tol, seed);
            let abstar = check_half_commutation(&RelationInput::model(&w, Relation::AbStarC), Relation::AbStarC, tol, seed);
            let separates = !abc.pass && abstar.pass;
            let v = json!({ "mode": a.mode, "model": w, "abc_cba": abc, "abstarc": abstar, "separates": separates });
            Ok(Report::json(v).failing_unless(separates, "model does not separate the relations"))
        }
    }
}

// ---------------------------------------------------------------- verify

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    /// Criterion number 1..=13; all when absent.
    #[arg(long)]
    pub criterion: Option<usize>,
    /// Monte Carlo samples for criterion 12.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<Report> {
    let mut cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    if let Some(s) = a.samples {
        cfg.mc_samples = s;
    }
    let reports = match a.criterion {
        Some(id) => vec![suite::run(id, &cfg)?],
        None => suite::run_all(&cfg)?,
    };
    let failed: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    for r in &reports {
        eprintln!("{r}");
    }
    let rows = reports
        .iter()
        .map(|r| vec![r.id.to_string(), r.name.to_string(), r.pass.to_string(), r.detail.clone()])
        .collect();
    let pass = failed.is_empty();
    Ok(Report::json(json!({ "suite": cfg, "reports": reports, "pass": pass }))
        .with_table(Table { columns: vec!["id", "name", "pass", "detail"], rows })
        .failing_unless(pass, format!("criteria failed: {failed:?}")))
}

// ---------------------------------------------------------------- dispatch

fn has_table(c: &Command) -> bool {
    match c {
        Command::Enumerate(_) | Command::Bp(_) | Command::Verify(_) => true,
        Command::Law(a) => !matches!(a.mode, LawMode::Compare | LawMode::Tv),
        Command::Weingarten(a) => matches!(a.mode, WeingartenMode::Table | WeingartenMode::Rows),
        Command::Sample(a) => a.mode == SampleMode::Law,
        Command::ModelCheck(_) => false,
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    if cli.global.format == Format::Csv && !has_table(&cli.command) {
        return Err(Error::Parameter("this mode has no CSV form; use --format json".into()));
    }
    if let Some(t) = cli.global.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Parameter("--tol must be positive".into()));
        }
    }
    let (seed, tol) = (cli.global.seed, cli.global.tol);
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Law(a) => cmd_law(a),
        Command::Weingarten(a) => cmd_weingarten(a),
        Command::Bp(a) => cmd_bp(a),
        Command::Sample(a) => cmd_sample(a, seed, tol),
        Command::ModelCheck(a) => cmd_model_check(a, seed, tol),
        Command::Verify(a) => cmd_verify(a, seed),
    }
}
