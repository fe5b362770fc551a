//! `density-lab` command line: traces, decompositions, constructions and claim
//! checks, written as CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use density_lab::constructions::{
    complementary_codes, divergence_witnesses, eeu4_sets, eeu5_sets, eu_measure_ideal, exh_verdict,
    increasing_dominance_check, lo1_witness, p1_weight, ps1_family, ts1_weight, MeasureKind, Ts1Search,
};
use density_lab::decomposition::{build_decomposition_with, decomposition_verdict, DecompositionConfig};
use density_lab::density::{fmt_real, membership_verdict, ratio_trace, DEFAULT_DELTA, DEFAULT_EPSILON};
use density_lab::functions::{ModulusFunction, WeightFunction};
use density_lab::omega_sets::OmegaSet;
use density_lab::specs::{natural_value, parse_modulus, parse_natural, parse_set, parse_weight, spec_value, SpecError};
use density_lab::verify::{run_check, run_suite_seeded, Status, VerifyError};
use density_lab::{Natural, Schedule};

#[derive(Parser)]
#[command(name = "density-lab", version, about = "Weighted modular density ideals Z_g(f) at finite horizons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ratio trace f(|C ∩ [0,k-1]|)/f(g(k)) with its membership verdict.
    Trace(Common),
    /// Interval decomposition k_m and the submeasures φ_m(ω), φ_m(C).
    Decompose(Common),
    /// Witness constructions: lo1, p1, ts1, ps1, eeu4, eeu5.
    Construct {
        kind: String,
        #[command(flatten)]
        common: Common,
    },
    /// One named claim check.
    Check(Common),
    /// The `smoke` or `full` suite.
    Suite {
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Modulus function spec: a catalog name or JSON.
    #[arg(long)]
    f: Option<String>,
    /// Weight function spec: a catalog name or JSON.
    #[arg(long)]
    g: Option<String>,
    /// Set spec: a catalog name or JSON.
    #[arg(long)]
    set: Option<String>,
    /// Last index, e.g. 1000000, 10^6, 2^64.
    #[arg(long)]
    horizon: Option<String>,
    /// sampling, geometric[:ratio], dense, factorials, factorial_powers,
    /// powers_of_four, or an explicit list such as [1,10,100].
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    claim: Option<String>,
    #[arg(long)]
    suite: Option<String>,
    /// Claim parameters as JSON, merged over the defaults.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with any of: f, g, set, horizon, schedule, format, params, seed, m_max, anchors.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    anchors: Option<usize>,
    /// Include wall-clock runtimes (output is then not reproducible).
    #[arg(long)]
    timings: bool,
}

enum Failure {
    Usage(String),
    Computation(String),
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::UnknownClaim(_) | VerifyError::UnknownSuite(_) | VerifyError::InvalidParams(_) | VerifyError::Spec(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Computation(other.to_string()),
        }
    }
}

fn computation<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Computation(e.to_string())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Flags merged over an optional `--config` file.
struct Resolved {
    flags: Common,
    config: Map<String, Value>,
}

impl Resolved {
    fn new(flags: Common) -> Result<Self, Failure> {
        let config = match &flags.config {
            None => Map::new(),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(usage("config must be a JSON object")),
                    Err(e) => return Err(usage(format!("config is not valid JSON: {e}"))),
                }
            }
        };
        Ok(Resolved { flags, config })
    }

    fn spec(&self, flag: &Option<String>, key: &str) -> Option<Value> {
        flag.as_deref().map(spec_value).or_else(|| self.config.get(key).cloned())
    }

    fn modulus(&self, default: &str) -> Result<ModulusFunction, Failure> {
        Ok(parse_modulus(&self.spec(&self.flags.f, "f").unwrap_or_else(|| json!(default)))?)
    }

    fn weight(&self, default: &str) -> Result<WeightFunction, Failure> {
        Ok(parse_weight(&self.spec(&self.flags.g, "g").unwrap_or_else(|| json!(default)))?)
    }

    fn set(&self, default: Option<&str>) -> Result<OmegaSet, Failure> {
        match (self.spec(&self.flags.set, "set"), default) {
            (Some(v), _) => Ok(parse_set(&v)?),
            (None, Some(d)) => Ok(parse_set(&json!(d))?),
            (None, None) => Err(usage("--set is required")),
        }
    }

    fn horizon(&self) -> Result<Option<Natural>, Failure> {
        let n = match (&self.flags.horizon, self.config.get("horizon")) {
            (Some(h), _) => parse_natural(h)?,
            (None, Some(v)) => natural_value(v)?,
            (None, None) => return Ok(None),
        };
        if n.is_zero() {
            return Err(usage("--horizon must be at least 1"));
        }
        Ok(Some(n))
    }

    fn required_horizon(&self) -> Result<Natural, Failure> {
        self.horizon()?.ok_or_else(|| usage("--horizon is required"))
    }

    fn format(&self, default: Format) -> Result<Format, Failure> {
        if let Some(f) = self.flags.format {
            return Ok(f);
        }
        match self.config.get("format").and_then(Value::as_str) {
            None => Ok(default),
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(usage(format!("unknown format `{other}`"))),
        }
    }

    fn usize_opt(&self, flag: Option<usize>, key: &str) -> Result<Option<usize>, Failure> {
        match (flag, self.config.get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(v)) => v
                .as_u64()
                .map(|x| Some(x as usize))
                .ok_or_else(|| usage(format!("`{key}` must be a nonnegative integer"))),
            (None, None) => Ok(None),
        }
    }

    fn seed(&self) -> Result<Option<u64>, Failure> {
        Ok(self.usize_opt(self.flags.seed.map(|s| s as usize), "seed")?.map(|s| s as u64))
    }

    fn params(&self) -> Result<Value, Failure> {
        match (&self.flags.params, self.config.get("params")) {
            (Some(text), _) => serde_json::from_str(text).map_err(|e| usage(format!("--params is not valid JSON: {e}"))),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => Ok(Value::Null),
        }
    }

    fn schedule(&self, g: &WeightFunction, horizon: &Natural) -> Result<Schedule, Failure> {
        let name = match (&self.flags.schedule, self.config.get("schedule")) {
            (Some(s), _) => s.trim().to_string(),
            (None, Some(Value::String(s))) => s.trim().to_string(),
            (None, Some(v @ Value::Array(_))) => v.to_string(),
            (None, Some(_)) => return Err(usage("`schedule` must be a name or a list")),
            (None, None) => "sampling".to_string(),
        };
        let bits = horizon.bits().to_u64_digits().first().copied().unwrap_or(0);
        let s = match name.as_str() {
            "sampling" => g.sampling_schedule(horizon),
            "geometric" => Schedule::default_geometric(horizon),
            "dense" => {
                let top = horizon.to_u64().filter(|&n| n <= 10_000_000).ok_or_else(|| usage("dense schedules stop at 10^7"))?;
                Schedule::dense(1, top)
            }
            "factorials" => Schedule::factorials(1..=200),
            "factorial_powers" => Schedule::factorial_powers(1..=8),
            "powers_of_four" => Schedule::powers_of_four(0..=bits / 2 + 1),
            other => {
                if let Some(r) = other.strip_prefix("geometric:") {
                    let ratio: f64 = r.parse().map_err(|_| usage(format!("bad ratio `{r}`")))?;
                    if !(ratio > 1.0) {
                        return Err(usage("the geometric ratio must exceed 1"));
                    }
                    Schedule::geometric(ratio, horizon)
                } else {
                    let list = if other.starts_with('[') { other.to_string() } else { format!("[{other}]") };
                    let v: Value = serde_json::from_str(&list).map_err(|_| usage(format!("unknown schedule `{other}`")))?;
                    let pts = v
                        .as_array()
                        .ok_or_else(|| usage("explicit schedules are lists"))?
                        .iter()
                        .map(natural_value)
                        .collect::<Result<Vec<_>, _>>()?;
                    Schedule::new(pts)
                }
            }
        };
        let s = s.truncate(horizon);
        if s.is_empty() {
            return Err(usage("the schedule has no points up to the horizon"));
        }
        Ok(s)
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn trace(r: &Resolved) -> Result<String, Failure> {
    let f = r.modulus("log1p")?;
    let g = r.weight("identity")?;
    let c = r.set(None)?;
    let n = r.required_horizon()?;
    // the horizon itself is always sampled, even past the geometric cap
    let s = r.schedule(&g, &n)?.union(&Schedule::new(vec![n]));
    let t = ratio_trace(&f, &g, &c, &s).map_err(computation)?;
    Ok(match r.format(Format::Csv)? {
        Format::Csv => t.to_csv(),
        Format::Json => {
            let v = membership_verdict(&t, DEFAULT_EPSILON, DEFAULT_DELTA).map_err(computation)?;
            to_json(&json!({"trace": t, "verdict": v}))
        }
    })
}

fn decompose(r: &Resolved) -> Result<String, Failure> {
    let f = r.modulus("log1p")?;
    let g = r.weight("identity")?;
    let c = r.set(Some("omega"))?;
    let m_max = r.usize_opt(r.flags.m_max, "m_max")?.unwrap_or(20);
    let mut config = DecompositionConfig::default();
    if let Some(n) = r.horizon()? {
        config.index_ceiling = n;
    }
    let d = build_decomposition_with(&f, &g, m_max, &config).map_err(computation)?;
    Ok(match r.format(Format::Csv)? {
        Format::Csv => {
            let mut buf = Vec::new();
            d.write_csv(&c, &mut buf).map_err(computation)?;
            String::from_utf8(buf).expect("ascii csv")
        }
        Format::Json => {
            let mut rows = Vec::new();
            for m in d.stored_range() {
                rows.push(json!({
                    "m": m,
                    "k_m": d.k_seq[m],
                    "phi_omega": d.phi_omega(m).map_err(computation)?.value,
                    "phi_C": d.phi(m, &c).map_err(computation)?.value,
                }));
            }
            let v = decomposition_verdict(&d, &c, DEFAULT_EPSILON, DEFAULT_DELTA).map_err(computation)?;
            to_json(&json!({
                "f": f.name(), "g": g.name(), "set": c.name(),
                "m_max": d.m_max, "start_m": d.start_m, "k": d.k_seq,
                "rows": rows, "verdict": v, "truncation": d.truncation,
            }))
        }
    })
}

fn anchor_rows(label: &str, anchors: &[Natural], ratios: &[f64], first_m: usize) -> (String, Vec<Value>) {
    let mut csv = csv_line(&[label.into(), "k".into(), "ratio".into()]);
    let mut rows = Vec::new();
    for (i, (k, x)) in anchors.iter().zip(ratios).enumerate() {
        csv.push_str(&csv_line(&[(first_m + i).to_string(), k.to_string(), fmt_real(*x)]));
        rows.push(json!({label: first_m + i, "k": k, "ratio": x}));
    }
    (csv, rows)
}

fn construct(kind: &str, r: &Resolved) -> Result<String, Failure> {
    let format = r.format(Format::Json)?;
    let anchors = r.usize_opt(r.flags.anchors, "anchors")?;
    let (csv, value) = match kind {
        "lo1" | "p1" => {
            let f = r.modulus("log1p")?;
            let g = r.weight("es1")?;
            let w = lo1_witness(&f, &g, anchors.unwrap_or(30)).map_err(computation)?;
            let (csv, rows) = anchor_rows("j", &w.anchors, &w.anchor_ratios, 0);
            let sched = g.sampling_schedule(&w.horizon()).union(&w.anchor_schedule());
            let id = WeightFunction::identity();
            let verdict = |h: &WeightFunction| -> Result<Value, Failure> {
                let t = ratio_trace(&f, h, &w.set, &sched).map_err(computation)?;
                Ok(serde_json::to_value(membership_verdict(&t, DEFAULT_EPSILON, DEFAULT_DELTA).map_err(computation)?).expect("serializable"))
            };
            let mut v = json!({
                "kind": kind, "f": f.name(), "g": g.name(), "anchors": rows,
                "verdict_g": verdict(&g)?, "verdict_identity": verdict(&id)?,
            });
            if kind == "p1" {
                let gp = p1_weight(&w.anchors).map_err(computation)?;
                v["verdict_p1"] = verdict(&gp)?;
            }
            (csv, v)
        }
        "ts1" | "ps1" => {
            let f = r.modulus("log1p")?;
            let g = r.weight("es1")?;
            let t = ts1_weight(&f, &g, &Ts1Search::for_weight(&g, anchors.unwrap_or(12))).map_err(computation)?;
            let (csv, rows) = anchor_rows("m", &t.anchors, &t.anchor_ratios, t.first_m);
            let mut v = json!({
                "kind": kind, "f": f.name(), "g": g.name(), "first_m": t.first_m,
                "anchors": rows, "lengths": t.lengths,
            });
            if kind == "ps1" {
                let codes = complementary_codes(8, t.anchors.len());
                let fam = ps1_family(&g, &t.h, &t.anchors, &codes).map_err(computation)?;
                let mut weakest = f64::INFINITY;
                for (i, a) in fam.iter().enumerate() {
                    for (j, b) in fam.iter().enumerate() {
                        if i != j {
                            let best = divergence_witnesses(&f, a, b, &t.anchors, 0.0)
                                .iter()
                                .map(|w| w.ratio)
                                .fold(0.0, f64::max);
                            weakest = weakest.min(best);
                        }
                    }
                }
                let bits: Vec<String> = codes.iter().map(|c| c.iter().map(|b| if *b { '1' } else { '0' }).collect()).collect();
                v["members"] = json!(bits);
                v["weakest_pairwise_divergence"] = json!(weakest);
            }
            (csv, v)
        }
        "eeu4" | "eeu5" => {
            let (kind_m, (c, d), j_max) = if kind == "eeu4" {
                (MeasureKind::Eeu4, eeu4_sets(), 16)
            } else {
                (MeasureKind::Eeu5, eeu5_sets(), 16)
            };
            let spec = eu_measure_ideal(kind_m);
            let horizon = r.horizon()?.and_then(|n| n.to_u64()).unwrap_or(100_000);
            let dom = increasing_dominance_check(&c, &d, horizon).map_err(computation)?;
            let mut csv = csv_line(&["m".into(), "mu_C".into(), "mu_D".into()]);
            let mut rows = Vec::new();
            for m in spec.first_index()..=j_max {
                let mc = spec.mu(m, &c).map_err(computation)?.to_string();
                let md = spec.mu(m, &d).map_err(computation)?.to_string();
                csv.push_str(&csv_line(&[m.to_string(), mc.clone(), md.clone()]));
                rows.push(json!({"m": m, "mu_C": mc, "mu_D": md}));
            }
            let vc = exh_verdict(&spec, &c, j_max, DEFAULT_EPSILON, DEFAULT_DELTA).map_err(computation)?;
            let vd = exh_verdict(&spec, &d, j_max, DEFAULT_EPSILON, DEFAULT_DELTA).map_err(computation)?;
            (csv, json!({"kind": kind, "dominance": dom, "measures": rows, "verdict_C": vc, "verdict_D": vd}))
        }
        other => return Err(usage(format!("unknown construction `{other}` (lo1, p1, ts1, ps1, eeu4, eeu5)"))),
    };
    Ok(match format {
        Format::Csv => csv,
        Format::Json => to_json(&value),
    })
}

fn check(r: &Resolved) -> Result<(String, bool), Failure> {
    let id = r
        .flags
        .claim
        .clone()
        .or_else(|| r.config.get("claim").and_then(Value::as_str).map(String::from))
        .ok_or_else(|| usage("--claim is required"))?;
    let mut params = r.params()?;
    if let Some(seed) = r.seed()? {
        let defaults = density_lab::verify::default_params(&id)?;
        if defaults.get("seed").is_some() {
            if params.is_null() {
                params = json!({});
            }
            if let Some(m) = params.as_object_mut() {
                m.insert("seed".into(), seed.into());
            }
        }
    }
    let mut c = run_check(&id, &params)?;
    if !r.flags.timings {
        c.runtime = None;
    }
    let failed = c.status == Status::Fail;
    let out = match r.format(Format::Json)? {
        Format::Json => to_json(&c),
        Format::Csv => {
            let mut s = csv_line(&["claim_id".into(), "status".into(), "description".into(), "values".into()]);
            for e in &c.evidence {
                let vals: Vec<String> = e.values.iter().map(|x| fmt_real(*x)).collect();
                s.push_str(&csv_line(&[c.claim_id.clone(), status_name(c.status).into(), quote(&e.description), vals.join(";")]));
            }
            s
        }
    };
    Ok((out, failed))
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn suite(name: Option<String>, r: &Resolved) -> Result<(String, bool), Failure> {
    let name = name
        .or_else(|| r.flags.suite.clone())
        .or_else(|| r.config.get("suite").and_then(Value::as_str).map(String::from))
        .unwrap_or_else(|| "smoke".into());
    let mut report = run_suite_seeded(&name, r.seed()?)?;
    if !r.flags.timings {
        report.strip_runtimes();
    }
    let failed = !report.failed().is_empty();
    let out = match r.format(Format::Json)? {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = csv_line(&["claim_id".into(), "status".into()]);
            for c in &report.checks {
                s.push_str(&csv_line(&[c.claim_id.clone(), status_name(c.status).into()]));
            }
            s
        }
    };
    Ok((out, failed))
}

fn run(cli: Cli) -> Result<(String, bool, Option<PathBuf>), Failure> {
    let (out, failed, common) = match cli.command {
        Command::Trace(c) => (trace(&Resolved::new(c.clone())?)?, false, c),
        Command::Decompose(c) => (decompose(&Resolved::new(c.clone())?)?, false, c),
        Command::Construct { kind, common } => (construct(&kind, &Resolved::new(common.clone())?)?, false, common),
        Command::Check(c) => {
            let (o, f) = check(&Resolved::new(c.clone())?)?;
            (o, f, c)
        }
        Command::Suite { name, common } => {
            let (o, f) = suite(name, &Resolved::new(common.clone())?)?;
            (o, f, common)
        }
    };
    Ok((out, failed, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, failed, path)) => {
            let written = match &path {
                Some(p) => fs::write(p, out.as_bytes()).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            if failed {
                eprintln!("check failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("computation error: {msg}");
            ExitCode::from(3)
        }
    }
}
