//! Command-line front end. Each subcommand renders its report to a string;
//! the binary decides where it goes.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{self, decimal_string, CensusEntry, ExactMoments, JointCountTable};
use crate::montecarlo::{self, DecayRow};
use crate::perm::{join, parse_index_set, Permutation};
use crate::spherical::{self, SearchMode};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "PERMPROP_THREADS";

const DECIMALS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "permprop", version, about = "Proper permutations: statistics, censuses, moments and sphericality")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: machine parallelism). Output does not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dp,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Verification,
    Fast,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Verification => SearchMode::Verification,
            Mode::Fast => SearchMode::Fast,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inversions, left descents, X and properness of one permutation.
    Stats {
        #[arg(long)]
        perm: String,
        /// Also report the set {i : exists j < i, w(j) = i+1} (diagnostic).
        #[arg(long)]
        literal_j: bool,
    },
    /// Number of proper permutations of S_n for each n given.
    Count {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Method::Dp)]
        method: Method,
        /// Raise the DP degree cap.
        #[arg(long)]
        cap_override: Option<usize>,
    },
    /// Exact moments of X next to the closed forms, and the Chebyshev bound.
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap_override: Option<usize>,
    },
    /// Monte Carlo estimate at one degree.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        cap_override: Option<usize>,
    },
    /// Monte Carlo estimates over ascending degrees.
    Decay {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        cap_override: Option<usize>,
    },
    /// Decide I-sphericality of a permutation and print a witness word.
    Spherical {
        #[arg(long)]
        perm: String,
        /// Comma-separated subset of J(w); empty for the empty set.
        #[arg(long = "I", allow_hyphen_values = true)]
        i: String,
        #[arg(long, value_enum, default_value_t = Mode::Verification)]
        mode: Mode,
    },
    /// Sphericality census of S_n.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap_override: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Verification)]
        mode: Mode,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Stats { .. } => "stats",
            Command::Count { .. } => "count",
            Command::Moments { .. } => "moments",
            Command::Sample { .. } => "sample",
            Command::Decay { .. } => "decay",
            Command::Spherical { .. } => "spherical",
            Command::Census { .. } => "census",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample { seed, .. } | Command::Decay { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Renders the report for `cli`. Diagnostics go to `diag`.
pub fn run(cli: &Cli, diag: &mut dyn std::io::Write) -> Result<String> {
    let body = match &cli.command {
        Command::Stats { perm, literal_j } => stats(perm, *literal_j, cli.format)?,
        Command::Count { n, method, cap_override } => count(n, *method, *cap_override, cli.format, diag)?,
        Command::Moments { n, cap_override } => moments(*n, *cap_override, cli.format, diag)?,
        Command::Sample { n, samples, seed, cap_override } => {
            decay(&[*n], *samples, *seed, *cap_override, cli.format)?
        }
        Command::Decay { n, samples, seed, cap_override } => {
            decay(n, *samples, *seed, *cap_override, cli.format)?
        }
        Command::Spherical { perm, i, mode } => spherical_report(perm, i, *mode, cli.format)?,
        Command::Census { n, cap_override, mode } => census(*n, *cap_override, *mode, cli.format)?,
    };
    Ok(stamp(cli, body))
}

enum Body {
    Json(Value),
    Csv(String),
    Plain(String),
}

fn stamp(cli: &Cli, body: Body) -> String {
    let seed = cli.command.seed();
    let seed_text = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    match body {
        Body::Json(result) => {
            let doc = json!({
                "tool": "permprop",
                "version": VERSION,
                "command": cli.command.name(),
                "seed": seed,
                "result": result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
        Body::Csv(rows) => format!("# permprop {VERSION} seed={seed_text}\n{rows}"),
        Body::Plain(text) => format!("permprop {VERSION} {} seed={seed_text}\n{text}", cli.command.name()),
    }
}

fn parse_perm(text: &str) -> Result<Permutation> {
    text.parse()
}

fn braces(items: &[usize]) -> String {
    format!("{{{}}}", join(items, ","))
}

fn stats(text: &str, literal_j: bool, format: Format) -> Result<Body> {
    let w = parse_perm(text)?;
    let profile = w.left_descent_set();
    let ell = w.inversion_number();
    let x = w.statistic_x();
    let proper = w.is_proper();
    let literal = literal_j.then(|| w.literal_j_set());
    Ok(match format {
        Format::Json => {
            let mut v = json!({
                "perm": w.to_string(),
                "n": w.n(),
                "ell": ell,
                "J": profile.left_descents(),
                "d": profile.d(),
                "X": x,
                "proper": proper,
            });
            if let Some(lit) = &literal {
                v["literal_J"] = json!(lit);
            }
            Body::Json(v)
        }
        Format::Csv => {
            let mut s = String::from("perm,n,ell,J,d,X,proper");
            if literal.is_some() {
                s.push_str(",literal_J");
            }
            write!(
                s,
                "\n{},{},{},{},{},{},{}",
                join(w.one_line(), " "),
                w.n(),
                ell,
                join(profile.left_descents(), ";"),
                profile.d(),
                x,
                proper
            )
            .unwrap();
            if let Some(lit) = &literal {
                write!(s, ",{}", join(lit, ";")).unwrap();
            }
            s.push('\n');
            Body::Csv(s)
        }
        Format::Plain => {
            let mut s = format!(
                "perm={}\nell={ell}\nJ={}\nd={}\nX={x}\nproper={proper}\n",
                w,
                braces(profile.left_descents()),
                profile.d()
            );
            if let Some(lit) = &literal {
                writeln!(s, "literal_J={}", braces(lit)).unwrap();
            }
            Body::Plain(s)
        }
    })
}

fn dp_table(n: usize, cap: Option<usize>, diag: &mut dyn std::io::Write) -> Result<JointCountTable> {
    let cap = cap.unwrap_or(exact::DEFAULT_DP_CAP);
    if n <= cap {
        let bytes = exact::dp_memory_estimate(n);
        let _ = writeln!(diag, "DP at n = {n}: about {:.1} MiB", bytes as f64 / (1 << 20) as f64);
    }
    exact::lehmer_dp_joint_table_capped(n, cap)
}

fn count(ns: &[usize], method: Method, cap: Option<usize>, format: Format, diag: &mut dyn std::io::Write) -> Result<Body> {
    let mut entries = Vec::with_capacity(ns.len());
    for &n in ns {
        let table = match method {
            Method::Dp => dp_table(n, cap, diag)?,
            Method::Brute => exact::brute_force_joint_table(n)?,
        };
        entries.push(CensusEntry::from_table(&table));
    }
    Ok(match format {
        Format::Json => Body::Json(serde_json::to_value(&entries).expect("serializable")),
        Format::Csv => {
            let mut s = String::from("n,proper_count,total,ratio_decimal_string\n");
            for e in &entries {
                writeln!(s, "{},{},{},{}", e.n, e.proper_count, e.total, e.ratio_decimal_string).unwrap();
            }
            Body::Csv(s)
        }
        Format::Plain => {
            let mut s = String::new();
            for e in &entries {
                writeln!(
                    s,
                    "n={} proper={} total={} ratio={}",
                    e.n, e.proper_count, e.total, e.ratio_decimal_string
                )
                .unwrap();
            }
            Body::Plain(s)
        }
    })
}

#[derive(Serialize)]
struct RationalField {
    exact: String,
    decimal: String,
}

fn rational_field(r: &BigRational) -> RationalField {
    RationalField {
        exact: r.to_string(),
        decimal: decimal_string(r, DECIMALS),
    }
}

fn moments(n: usize, cap: Option<usize>, format: Format, diag: &mut dyn std::io::Write) -> Result<Body> {
    if n < 2 {
        return Err(Error::domain("moments need n >= 2"));
    }
    let table = dp_table(n, cap, diag)?;
    let m = ExactMoments::from_table(&table);
    let f_ex = exact::formula_ex(n)?;
    let f_ed2 = exact::formula_ed2(n)?;
    let matches = m.e_x == f_ex && m.e_d2 == f_ed2;
    let fields: Vec<(&str, BigRational)> = vec![
        ("E_L", m.e_l.clone()),
        ("E_D", m.e_d.clone()),
        ("E_D2", m.e_d2.clone()),
        ("formula_ED2", f_ed2),
        ("E_X", m.e_x.clone()),
        ("formula_EX", f_ex),
        ("E_X2", m.e_x2.clone()),
        ("Var_X", m.var_x.clone()),
        ("ratio_EX2_to_n4_over_64", m.second_moment_ratio()),
        ("exact_proper_rate", exact::proper_probability(&table)),
        ("chebyshev_bound", exact::chebyshev_bound_from(&m)),
    ];
    Ok(match format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("n".into(), json!(n));
            for (k, v) in &fields {
                obj.insert((*k).into(), serde_json::to_value(rational_field(v)).unwrap());
            }
            obj.insert("match".into(), json!(matches));
            Body::Json(Value::Object(obj))
        }
        Format::Csv => {
            let mut s = String::from("quantity,exact,decimal\n");
            for (k, v) in &fields {
                writeln!(s, "{k},{v},{}", decimal_string(v, DECIMALS)).unwrap();
            }
            writeln!(s, "match,{matches},").unwrap();
            Body::Csv(s)
        }
        Format::Plain => {
            let mut s = format!("n={n}\n");
            for (k, v) in &fields {
                writeln!(s, "{k}={v} ({})", decimal_string(v, DECIMALS)).unwrap();
            }
            writeln!(s, "match={matches}").unwrap();
            Body::Plain(s)
        }
    })
}

fn decay(ns: &[usize], samples: u64, seed: u64, cap: Option<usize>, format: Format) -> Result<Body> {
    let rows = montecarlo::decay_experiment(ns, samples, seed, cap.unwrap_or(exact::DEFAULT_DP_CAP))?;
    Ok(match format {
        Format::Json => {
            let header: Vec<&str> = montecarlo::CSV_HEADER.split(',').collect();
            let arr: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(montecarlo::csv_line(r).split(','))
                        .map(|(k, v)| ((*k).to_string(), json_cell(v)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            Body::Json(Value::Array(arr))
        }
        Format::Csv => {
            let mut buf = Vec::new();
            montecarlo::write_csv(&rows, &mut buf).expect("writing to memory");
            Body::Csv(String::from_utf8(buf).expect("ascii"))
        }
        Format::Plain => Body::Plain(plain_decay(&rows)),
    })
}

// Decimal cells stay strings so no precision is lost; blank cells become null.
fn json_cell(v: &str) -> Value {
    if v.is_empty() {
        Value::Null
    } else if let Ok(i) = v.parse::<u64>() {
        json!(i)
    } else {
        json!(v)
    }
}

fn plain_decay(rows: &[DecayRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let m = &r.summary;
        writeln!(
            s,
            "n={} samples={} mean_X={:.4} (se {:.4}) formula_EX={} proper_rate={:.6} (se {:.6}){}",
            m.n,
            m.samples,
            m.mean_x(),
            m.se_mean(),
            decimal_string(&r.formula_ex, 4),
            m.proper_rate(),
            m.se_rate(),
            r.exact_rate
                .as_ref()
                .map(|e| format!(" exact_rate={}", decimal_string(e, 6)))
                .unwrap_or_default()
        )
        .unwrap();
    }
    s
}

fn spherical_report(perm: &str, i_text: &str, mode: Mode, format: Format) -> Result<Body> {
    let w = parse_perm(perm)?;
    let included = parse_index_set(i_text)?;
    let witness = spherical::witness_word(&w, &included, mode.into())?;
    let spherical = witness.is_some();
    let witness_text = witness.map(|r| r.to_semicolon_string()).unwrap_or_default();
    let j = w.left_descent_set();
    let mode_name = match mode {
        Mode::Verification => "verification",
        Mode::Fast => "fast",
    };
    Ok(match format {
        Format::Json => Body::Json(json!({
            "perm": w.to_string(),
            "I": included,
            "J": j.left_descents(),
            "mode": mode_name,
            "spherical": spherical,
            "witness": witness_text,
        })),
        Format::Csv => Body::Csv(format!(
            "perm,I,J,mode,spherical,witness\n{},{},{},{mode_name},{spherical},{witness_text}\n",
            join(w.one_line(), " "),
            join(&included, ";"),
            join(j.left_descents(), ";"),
        )),
        Format::Plain => Body::Plain(format!(
            "perm={w}\nI={}\nJ={}\nspherical={spherical}\nwitness={witness_text}\n",
            braces(&included),
            braces(j.left_descents())
        )),
    })
}

fn census(n: usize, cap: Option<usize>, mode: Mode, format: Format) -> Result<Body> {
    let rows = spherical::spherical_census_capped(n, cap.unwrap_or(spherical::DEFAULT_CENSUS_CAP), mode.into())?;
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            spherical::write_census_csv(&rows, &mut buf).expect("writing to memory");
            Body::Csv(String::from_utf8(buf).expect("ascii"))
        }
        Format::Json => Body::Json(Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "oneline": r.w.to_string(),
                        "J": r.left_descents,
                        "ell": r.ell,
                        "d": r.d(),
                        "X": r.x,
                        "proper": r.proper,
                        "maximally_spherical": r.maximally_spherical,
                        "some_I_spherical": r.some_i_spherical,
                        "witness": r.witness.as_ref().map(|w| w.to_semicolon_string()).unwrap_or_default(),
                    })
                })
                .collect(),
        )),
        Format::Plain => {
            let total = rows.len();
            let maximal = rows.iter().filter(|r| r.maximally_spherical).count();
            let some = rows.iter().filter(|r| r.some_i_spherical).count();
            let proper = rows.iter().filter(|r| r.proper).count();
            Body::Plain(format!(
                "n={n} permutations={total} proper={proper} maximally_spherical={maximal} some_I_spherical={some}\n"
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("permprop").chain(args.iter().copied())).unwrap();
        run(&cli, &mut std::io::sink())
    }

    #[test]
    fn stats_plain_reports() {
        let out = run_args(&["stats", "--perm", "3,2,1", "--format", "plain"]).unwrap();
        assert!(out.contains("ell=3\nJ={1,2}\nd=2\nX=0\nproper=true"), "{out}");
        let out = run_args(&["stats", "--perm", "4,5,6,1,2,3", "--format", "plain"]).unwrap();
        assert!(out.contains("ell=9\nJ={3}\nd=1\nX=8\nproper=false"), "{out}");
        let out = run_args(&["stats", "--perm", "1", "--format", "plain"]).unwrap();
        assert!(out.contains("ell=0\nJ={}\nd=0\nX=0\nproper=true"), "{out}");
    }

    #[test]
    fn stats_literal_flag() {
        let out = run_args(&["stats", "--perm", "2 3 1", "--literal-j"]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["J"], json!([1]));
        assert_eq!(v["result"]["literal_J"], json!([]));
        assert_eq!(v["version"], json!(VERSION));
        assert_eq!(v["seed"], Value::Null);
    }

    #[test]
    fn stats_bad_input_is_exit_two() {
        let err = run_args(&["stats", "--perm", "1,2,x"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("\"x\""), "{err}");
    }

    #[test]
    fn count_paper_values() {
        let out = run_args(&["count", "--n", "7,9"]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"][0]["proper_count"], json!("4348"));
        assert_eq!(v["result"][1]["proper_count"], json!("236394"));
        assert_eq!(v["result"][1]["total"], json!("362880"));
    }

    #[test]
    fn count_methods_agree_at_eight() {
        let dp = run_args(&["count", "--n", "8", "--method", "dp"]).unwrap();
        let brute = run_args(&["count", "--n", "8", "--method", "brute"]).unwrap();
        assert_eq!(dp, brute);
        assert!(dp.contains("\"30549\""));
    }

    #[test]
    fn count_cap_is_exit_three() {
        assert_eq!(run_args(&["count", "--n", "31"]).unwrap_err().exit_code(), 3);
        assert_eq!(run_args(&["count", "--n", "11", "--method", "brute"]).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn moments_match_flag() {
        let out = run_args(&["moments", "--n", "12", "--format", "plain"]).unwrap();
        assert!(out.contains("match=true"), "{out}");
        let v: Value = serde_json::from_str(&run_args(&["moments", "--n", "10"]).unwrap()).unwrap();
        assert_eq!(v["result"]["E_X"]["exact"], json!("29/3"));
        assert_eq!(v["result"]["formula_EX"]["exact"], json!("29/3"));
        assert_eq!(v["result"]["match"], json!(true));
    }

    #[test]
    fn spherical_witness() {
        let out = run_args(&["spherical", "--perm", "3,2,1", "--I", "1,2", "--format", "plain"]).unwrap();
        assert!(out.contains("spherical=true\nwitness=1;2;1"), "{out}");
        let err = run_args(&["spherical", "--perm", "2,3,1", "--I", "2"]).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let out = run_args(&["spherical", "--perm", "1,2,3", "--I", ""]).unwrap();
        assert!(out.contains("\"spherical\": true"));
    }

    #[test]
    fn sample_csv_row_shape() {
        let out = run_args(&["sample", "--n", "12", "--samples", "3000", "--seed", "42", "--format", "csv"]).unwrap();
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[0], format!("# permprop {VERSION} seed=42"));
        assert_eq!(lines[1], montecarlo::CSV_HEADER);
        assert!(lines[2].starts_with("12,3000,42,"));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn census_plain_summary() {
        let out = run_args(&["census", "--n", "4", "--format", "plain"]).unwrap();
        assert!(out.contains("permutations=24 proper=24"), "{out}");
        assert_eq!(run_args(&["census", "--n", "7"]).unwrap_err().exit_code(), 3);
    }
}
