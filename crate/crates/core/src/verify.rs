//! Named claim checks at desk-scale horizons, and the `smoke` / `full` suites.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::constructions::{
    complementary_codes, divergence_witnesses, eeu4_sets, eeu5_sets, eec_case1_set, eu_measure_ideal,
    example_e_set, exh_verdict, increasing_dominance_check, lo1_witness, p1_weight, ps1_family, scan_grid,
    ts1_weight, ConstructionError, MeasureKind, Ts1Search, VANISHING_THRESHOLD,
};
use crate::decomposition::{
    build_decomposition_with, decomposition_verdict, growth_criterion_pd3, preimage_count_criterion,
    ratio_bounded_criterion, sup_phi_omega, ts1_boundedness_test, Decomposition, DecompositionConfig,
    DecompositionError,
};
use crate::density::{
    classical_verdicts, lower_verdict, membership_on_enumeration, membership_verdict, ratio_trace,
    ClassicalIdeal, DensityError, MembershipVerdict, Verdict, DEFAULT_DELTA, DEFAULT_EPSILON,
};
use crate::functions::{index_ratio, pointwise_max, ModulusFunction, WeightFunction, WeightRule};
use crate::natural::Natural;
use crate::omega_sets::{catalog_set, OmegaSet, Run, SetError};
use crate::schedule::Schedule;
use crate::specs::{natural_value, parse_modulus, parse_set, parse_weight, SpecError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
    #[error("unknown suite `{0}` (expected smoke or full)")]
    UnknownSuite(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub description: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimCheck {
    pub claim_id: String,
    pub parameters: Value,
    pub status: Status,
    pub evidence: Vec<Evidence>,
    /// Wall-clock seconds; `None` once stripped for reproducible output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
}

impl ClaimCheck {
    pub fn violations(&self) -> impl Iterator<Item = &Evidence> {
        self.evidence.iter().filter(|e| e.description.starts_with(VIOLATION))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    /// Checks allowed to end INCONCLUSIVE.
    pub horizon_limited: Vec<String>,
    pub checks: Vec<ClaimCheck>,
}

impl SuiteReport {
    pub fn failed(&self) -> Vec<&ClaimCheck> {
        self.checks.iter().filter(|c| c.status == Status::Fail).collect()
    }

    pub fn strip_runtimes(&mut self) {
        for c in &mut self.checks {
            c.runtime = None;
        }
    }
}

const VIOLATION: &str = "VIOLATION: ";
const EPS: f64 = DEFAULT_EPSILON;
const DELTA: f64 = DEFAULT_DELTA;
const CATALOG: [&str; 5] = ["empty", "pow2", "sqrt", "evens", "omega"];

#[derive(Default)]
struct Rec {
    evidence: Vec<Evidence>,
    failed: bool,
    inconclusive: bool,
}

impl Rec {
    fn note(&mut self, description: impl Into<String>, values: Vec<f64>) {
        self.evidence.push(Evidence {
            description: description.into(),
            values,
        });
    }

    /// A failed requirement must carry the offending values.
    fn require(&mut self, ok: bool, description: impl Into<String>, values: Vec<f64>) {
        let d = description.into();
        if ok {
            self.note(d, values);
        } else {
            self.failed = true;
            self.note(format!("{VIOLATION}{d}"), values);
        }
    }
}

struct Params<'a>(&'a Map<String, Value>);

impl Params<'_> {
    fn get(&self, key: &str) -> Result<&Value, VerifyError> {
        self.0
            .get(key)
            .ok_or_else(|| VerifyError::InvalidParams(format!("missing `{key}`")))
    }

    fn modulus(&self, key: &str) -> Result<ModulusFunction, VerifyError> {
        Ok(parse_modulus(self.get(key)?)?)
    }

    fn weight(&self, key: &str) -> Result<WeightFunction, VerifyError> {
        Ok(parse_weight(self.get(key)?)?)
    }

    fn natural(&self, key: &str) -> Result<Natural, VerifyError> {
        Ok(natural_value(self.get(key)?)?)
    }

    fn u64(&self, key: &str) -> Result<u64, VerifyError> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| VerifyError::InvalidParams(format!("`{key}` must be a nonnegative integer")))
    }

    fn f64(&self, key: &str) -> Result<f64, VerifyError> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| VerifyError::InvalidParams(format!("`{key}` must be a number")))
    }

    fn list(&self, key: &str) -> Result<&Vec<Value>, VerifyError> {
        self.get(key)?
            .as_array()
            .ok_or_else(|| VerifyError::InvalidParams(format!("`{key}` must be a list")))
    }

    fn sets(&self, key: &str) -> Result<Vec<OmegaSet>, VerifyError> {
        self.list(key)?.iter().map(|v| Ok(parse_set(v)?)).collect()
    }
}

type Runner = fn(&Params, &mut Rec) -> Result<(), VerifyError>;

struct Claim {
    id: &'static str,
    defaults: fn() -> Value,
    smoke: fn() -> Value,
    run: Runner,
    horizon_limited: bool,
}

fn none() -> Value {
    json!({})
}

fn registry() -> Vec<Claim> {
    macro_rules! claim {
        ($id:expr, $run:expr, $defaults:expr) => {
            claim!($id, $run, $defaults, none)
        };
        ($id:expr, $run:expr, $defaults:expr, $smoke:expr) => {
            Claim {
                id: $id,
                defaults: $defaults,
                smoke: $smoke,
                run: $run,
                horizon_limited: false,
            }
        };
    }
    vec![
        claim!("CS1", check_cs1, || json!({"f": "log1p", "g": "es1", "l": 1, "tests": [[10, 1], [100, 0.1]]}),
            || json!({"tests": [[10, 1]]})),
        claim!("EEC", check_eec, || json!({"f": "log1p", "g": "eeu3", "alpha": 0.5, "N": "2^60"})),
        claim!("EEU3", check_eeu3, || json!({"N": "10^6", "m_max": 9})),
        claim!("EEU4", check_eeu4, || json!({"j_max": 16, "horizon": 100000})),
        claim!("EEU5", check_eeu5, || json!({"j_max": 16, "horizon": 100000})),
        claim!("ES1", check_es1, || json!({"m_min": 2, "m_max": 20}), || json!({"m_max": 12})),
        claim!("ExE", check_exe, || json!({"f": "log1p", "N": "10^6"})),
        claim!("LO1-equiv", check_lo1, || json!({"f": "log1p", "g": "es1", "anchors": 30, "N": "10^6"})),
        claim!("LS1", check_ls1, || json!({"f": "log1p", "g": "eeu3", "N": "10^6", "sets": CATALOG})),
        claim!("LS2", check_ls2, || json!({"f": "log1p", "g": "eeu3", "h": {"name": "scaled", "a": 2, "arg": "eeu3"}, "N": "10^6", "sets": CATALOG})),
        claim!("LZ", check_lz, || json!({"f": "log1p", "N": "10^6", "C": null, "sets": ["empty", "pow2", "sqrt", "evens", "omega", "eec1(0.5)", "eeu4_c"]})),
        Claim {
            horizon_limited: true,
            ..claim!("P1-cap", check_p1_cap, || json!({"f": "log1p", "N": "2^4096", "weights": ["identity", "eeu", "eeu3"]}))
        },
        claim!("P1-cup", check_p1_cup, || json!({"f": "log1p", "g": "es1", "anchors": 30, "N": "10^6", "weights": ["identity", "eeu", "eeu3"]})),
        claim!("PD1", check_pd1, || json!({"moduli": ["identity", "log1p", "power(0.5)"], "weights": ["identity", "eeu", "eeu3"], "sets": CATALOG, "N": "2^64"}),
            || json!({"N": "2^40"})),
        claim!("PD2", check_pd2, || json!({"pairs": [["identity", "identity"], ["log1p", "eeu3"], ["identity", "eeu3"]], "m_max": 60, "ceiling": "2^256"})),
        claim!("PD3", check_pd3, || json!({"N": "10^6"})),
        claim!("PD4-1", check_pd4_1, || json!({"f": "log1p", "g": "eeu3", "N": "10^6", "sets": ["empty", "pow2", "sqrt", "evens", "omega", "eec1(0.5)"]})),
        claim!("PD4-2", check_pd4_2, || json!({"moduli": ["identity", "log1p", "power(0.5)"], "weights": ["identity", "eeu", {"name": "scaled", "a": 0.5, "arg": "identity"}], "N": "10^6"})),
        claim!("PD4-forward", check_pd4_forward, pd4_defaults),
        claim!("PD4-reverse", check_pd4_reverse, pd4_defaults),
        claim!("PD6", check_pd6, || json!({"L": [0, 2, 4, 6, 8, 10, 12], "K": [1, 3, 5, 7, 9, 11], "j_max": 12})),
        claim!("PS1", check_ps1, || json!({"f": "log1p", "g": "es1", "members": 8, "blocks": 1100, "bound": 1000, "N": "2^40320", "sets": CATALOG}),
            || json!({"blocks": 120, "bound": 100})),
        claim!("TD1", check_td1, || json!({"moduli": ["identity", "log1p", "power(0.5)"], "weights": ["identity", "eeu", "eeu3"], "pairs": 100, "seed": 0, "N": "2^64"}),
            || json!({"pairs": 20})),
        claim!("TS1", check_ts1, || json!({"f": "log1p", "g": "es1", "anchors": 12, "N": "2^40320"})),
    ]
}

fn pd4_defaults() -> Value {
    json!({"f": null, "g": null, "pairs": [["log1p", "eeu"], ["identity", "identity"]], "m_max": 12, "N": "10^6", "ceiling": "2^8192"})
}

/// Every registered claim id, sorted.
pub fn claim_ids() -> Vec<&'static str> {
    let mut ids: Vec<_> = registry().iter().map(|c| c.id).collect();
    ids.sort();
    ids
}

/// Default parameters of a claim.
pub fn default_params(claim_id: &str) -> Result<Value, VerifyError> {
    let reg = registry();
    let c = reg
        .iter()
        .find(|c| c.id == claim_id)
        .ok_or_else(|| VerifyError::UnknownClaim(claim_id.to_string()))?;
    Ok((c.defaults)())
}

fn merge(base: Value, over: &Value) -> Result<Map<String, Value>, VerifyError> {
    let Value::Object(mut base) = base else { unreachable!("defaults are objects") };
    match over {
        Value::Null => {}
        Value::Object(o) => {
            for (k, v) in o {
                if !base.contains_key(k) {
                    return Err(VerifyError::InvalidParams(format!("unknown parameter `{k}`")));
                }
                base.insert(k.clone(), v.clone());
            }
        }
        _ => return Err(VerifyError::InvalidParams("parameters must be a JSON object".into())),
    }
    Ok(base)
}

fn execute(claim: &Claim, params: Map<String, Value>) -> Result<ClaimCheck, VerifyError> {
    let t0 = Instant::now();
    let mut rec = Rec::default();
    (claim.run)(&Params(&params), &mut rec)?;
    let status = if rec.failed {
        Status::Fail
    } else if rec.inconclusive {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(ClaimCheck {
        claim_id: claim.id.to_string(),
        parameters: Value::Object(params),
        status,
        evidence: rec.evidence,
        runtime: Some(t0.elapsed().as_secs_f64()),
    })
}

/// Runs one claim; `params` override the defaults key by key.
pub fn run_check(claim_id: &str, params: &Value) -> Result<ClaimCheck, VerifyError> {
    let reg = registry();
    let claim = reg
        .iter()
        .find(|c| c.id == claim_id)
        .ok_or_else(|| VerifyError::UnknownClaim(claim_id.to_string()))?;
    execute(claim, merge((claim.defaults)(), params)?)
}

/// `smoke` (reduced parameters) or `full` (defaults); checks run in parallel
/// and are reported sorted by id.
pub fn run_suite(name: &str) -> Result<SuiteReport, VerifyError> {
    run_suite_seeded(name, None)
}

/// As [`run_suite`], with `seed` replacing the default of every randomized claim.
pub fn run_suite_seeded(name: &str, seed: Option<u64>) -> Result<SuiteReport, VerifyError> {
    let smoke = match name {
        "smoke" => true,
        "full" => false,
        _ => return Err(VerifyError::UnknownSuite(name.to_string())),
    };
    let reg = registry();
    let mut checks = reg
        .par_iter()
        .map(|c| {
            let mut params = merge((c.defaults)(), &if smoke { (c.smoke)() } else { none() })?;
            if let (Some(seed), true) = (seed, params.contains_key("seed")) {
                params.insert("seed".into(), seed.into());
            }
            execute(c, params)
        })
        .collect::<Result<Vec<_>, _>>()?;
    checks.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    let mut horizon_limited: Vec<String> = reg.iter().filter(|c| c.horizon_limited).map(|c| c.id.to_string()).collect();
    horizon_limited.sort();
    Ok(SuiteReport {
        suite: name.to_string(),
        horizon_limited,
        checks,
    })
}

fn verdict_on(f: &ModulusFunction, g: &WeightFunction, c: &OmegaSet, s: &Schedule) -> Result<MembershipVerdict, VerifyError> {
    Ok(membership_verdict(&ratio_trace(f, g, c, s)?, EPS, DELTA)?)
}

fn code(v: Verdict) -> f64 {
    match v {
        Verdict::LikelyIn => 1.0,
        Verdict::LikelyOut => -1.0,
        Verdict::Undecided => 0.0,
    }
}

fn decided(v: Verdict) -> bool {
    v != Verdict::Undecided
}

fn bits(n: &Natural) -> f64 {
    n.bits().to_string().parse().unwrap_or(f64::INFINITY)
}

/// First `k` with `f(g(k)) > 0`.
fn first_positive(f: &ModulusFunction, g: &WeightFunction) -> Result<Natural, VerifyError> {
    (0..10_000u64)
        .map(Natural::from)
        .find(|k| f.eval_big(&g.eval(k)) > 0.0)
        .ok_or_else(|| VerifyError::InvalidParams(format!("f(g(k)) = 0 for every k < 10^4 with g = {}", g.name())))
}

// ---- claims -------------------------------------------------------------

fn check_exe(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let n = p.natural("N")?;
    let c = example_e_set();
    let top = n.to_u64().unwrap_or(u64::MAX).min(10_000);
    let grid = Schedule::default_geometric(&n).union(&Schedule::dense(1, top));
    let mut bad_a: Option<f64> = None;
    let mut min_b = f64::INFINITY;
    for k in grid.points() {
        let count = c.count(k)?;
        let (Some(cb), Some(kb)) = (count.to_biguint(), k.to_biguint()) else {
            return Err(SetError::RepresentationTooWeak("Example E grid beyond exact range".into()).into());
        };
        if &cb * &cb > kb && bad_a.is_none() {
            bad_a = Some(k.to_f64());
        }
        if k >= &Natural::from(100u64) {
            if let Some(v) = f.ratio(&count, k) {
                min_b = min_b.min(v);
            }
        }
    }
    r.require(
        bad_a.is_none(),
        "count(k)/k <= 1/sqrt(k), checked exactly as count(k)^2 <= k, at every grid k",
        vec![grid.len() as f64, bad_a.unwrap_or(0.0)],
    );
    r.require(min_b >= 0.49, "min of f(count(k))/f(k) over grid k in [100, N] is at least 0.49", vec![min_b]);
    let v = classical_verdicts(&c, &f, &n, EPS, DELTA)?;
    let z = &v[&ClassicalIdeal::Z];
    let zl = &v[&ClassicalIdeal::ZLower];
    let zlf = &v[&ClassicalIdeal::ZLowerF];
    r.require(z.verdict == Verdict::LikelyIn, "Example E set is in Z (tail sup)", vec![z.tail_sup]);
    r.require(zl.verdict == Verdict::LikelyIn, "Example E set is in Z_lower (tail inf)", vec![zl.tail_inf]);
    r.require(zlf.verdict == Verdict::LikelyOut, "Example E set is not in Z_lower(f) (tail inf)", vec![zlf.tail_inf]);
    Ok(())
}

fn check_lo1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let anchors = p.u64("anchors")? as usize;
    match lo1_witness(&f, &g, anchors) {
        Ok(w) => {
            r.note("liminf f(k)/f(g(k)) = 0 on the scan grid; witness anchors built", vec![w.anchors.len() as f64]);
            r.note("f(k_m)/f(g(k_m)) at the anchors", w.anchor_ratios.clone());
            let mut min_half = f64::INFINITY;
            let mut worst_excess = f64::NEG_INFINITY;
            for k in &w.anchors {
                let d = k.shl(1);
                let c2 = w.set.count(&d)?;
                min_half = min_half.min(f.ratio(&c2, &d).unwrap_or(0.0));
                let trace = f.ratio(&c2, &g.eval(&d)).unwrap_or(f64::INFINITY);
                let bound = 2.0 * f.ratio(k, &g.eval(k)).unwrap_or(0.0);
                worst_excess = worst_excess.max(trace - bound);
            }
            r.require(min_half >= 0.5 - 1e-9, "f(count(2k_m))/f(2k_m) >= 1/2 at every anchor", vec![min_half]);
            r.require(
                worst_excess <= 1e-12,
                "f(count(2k_m))/f(g(2k_m)) <= 2 f(k_m)/f(g(k_m)) at every anchor (max excess)",
                vec![worst_excess],
            );
            let sched = g.sampling_schedule(&w.horizon()).union(&w.anchor_schedule());
            let vg = verdict_on(&f, &g, &w.set, &sched)?;
            let vf = verdict_on(&f, &WeightFunction::identity(), &w.set, &sched)?;
            r.require(vg.verdict == Verdict::LikelyIn, "witness is in Z_g(f)", vec![vg.tail_sup]);
            r.require(vf.verdict == Verdict::LikelyOut, "witness is not in Z(f)", vec![vf.tail_sup]);
        }
        Err(ConstructionError::NoVanishingSubsequence { min_ratio }) => {
            r.require(
                min_ratio >= VANISHING_THRESHOLD,
                "witness builder refuses: min f(k)/f(g(k)) on the scan grid stays away from 0",
                vec![min_ratio],
            );
            let n = p.natural("N")?;
            let sched = g.sampling_schedule(&n);
            let id = WeightFunction::identity();
            let mut clash = Vec::new();
            for name in CATALOG {
                let c = catalog_set(name)?;
                let vg = verdict_on(&f, &g, &c, &sched)?;
                let vf = verdict_on(&f, &id, &c, &sched)?;
                if vg.verdict == Verdict::LikelyIn && vf.verdict == Verdict::LikelyOut {
                    clash.push(vf.tail_sup);
                }
            }
            r.require(clash.is_empty(), "catalog sets in Z_g(f) are not out of Z(f)", clash);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn check_ls1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let n = p.natural("N")?;
    let sched = g.sampling_schedule(&n);
    let mut clashes = Vec::new();
    for c in p.sets("sets")? {
        let dense = verdict_on(&f, &g, &c, &sched)?;
        let ranks = c.count(&n)?;
        let en = membership_on_enumeration(&f, &g, &c, &ranks, EPS, DELTA)?;
        r.note(format!("{}: grid verdict vs enumeration verdict", c.name()), vec![code(dense.verdict), code(en.verdict)]);
        if decided(dense.verdict) && decided(en.verdict) && dense.verdict != en.verdict {
            clashes.push(code(dense.verdict));
        }
    }
    r.require(clashes.is_empty(), "grid and enumeration verdicts agree whenever both decide", clashes);
    Ok(())
}

fn check_ls2(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let h = p.weight("h")?;
    let n = p.natural("N")?;
    let m = pointwise_max(&g, &h);
    let sched = g.sampling_schedule(&n).union(&h.sampling_schedule(&n));
    let mut mismatch = 0usize;
    for k in sched.points() {
        let lhs = f.eval_big(&m.eval(k));
        let rhs = f.eval_big(&g.eval(k)).max(f.eval_big(&h.eval(k)));
        if lhs != rhs {
            mismatch += 1;
        }
    }
    r.require(mismatch == 0, "f(max(g,h)(k)) = max(f(g(k)), f(h(k))) at every sample", vec![sched.len() as f64, mismatch as f64]);
    let mut clashes = Vec::new();
    for c in p.sets("sets")? {
        let vg = verdict_on(&f, &g, &c, &sched)?.verdict;
        let vh = verdict_on(&f, &h, &c, &sched)?.verdict;
        let vm = verdict_on(&f, &m, &c, &sched)?.verdict;
        r.note(format!("{}: verdicts under g, h, max(g,h)", c.name()), vec![code(vg), code(vh), code(vm)]);
        if decided(vg) && vg == vh && decided(vm) && vm != vg {
            clashes.push(code(vm));
        }
    }
    r.require(clashes.is_empty(), "where g and h agree, max(g,h) agrees", clashes);
    Ok(())
}

/// `k -> |C ∩ [0, k-1]| + 1`.
struct CountWeight(OmegaSet);

impl WeightRule for CountWeight {
    fn eval(&self, k: &Natural) -> Natural {
        &self.0.count(k).expect("countable witness set") + 1u64
    }
}

fn check_p1_cap(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let n = p.natural("N")?;
    let finite = [
        OmegaSet::finite_u64(&(0..10).collect::<Vec<_>>()).with_name("[0,10)"),
        OmegaSet::finite_u64(&[1, 10, 100, 1000, 10_000]).with_name("powers of ten"),
    ];
    let mut escaped = Vec::new();
    for w in p.list("weights")? {
        let g = parse_weight(w)?;
        let sched = g.sampling_schedule(&n);
        for c in &finite {
            let v = verdict_on(&f, &g, c, &sched)?;
            if v.verdict != Verdict::LikelyIn {
                escaped.push(v.tail_sup);
            }
        }
    }
    r.require(escaped.is_empty(), "finite sets are in every sampled Z_g(f)", escaped);
    let c = example_e_set();
    let g = WeightFunction::from_rule("count+1", std::sync::Arc::new(CountWeight(c.clone())), true);
    let v = verdict_on(&f, &g, &c, &Schedule::default_geometric(&n))?;
    r.require(
        v.verdict == Verdict::LikelyOut,
        "infinite set excluded by an adversarial weight g(k) = count(k) + 1",
        vec![v.tail_inf],
    );
    r.note(
        "undecided: the intersection over all of G is not reachable at finite horizon (log2 N, adversarial tail inf)",
        vec![bits(&n) - 1.0, v.tail_inf],
    );
    r.inconclusive = true;
    Ok(())
}

fn check_p1_cup(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let w = lo1_witness(&f, &g, p.u64("anchors")? as usize)?;
    let top = w.anchors.last().expect("nonempty").clone();
    let gp = p1_weight(&w.anchors)?;
    let sched = Schedule::default_geometric(&top).union(&w.anchor_schedule()).truncate(&top);
    let id = WeightFunction::identity();
    let low = lower_verdict(&ratio_trace(&f, &id, &w.set, &sched)?, EPS, DELTA)?;
    r.require(low.verdict == Verdict::LikelyIn, "LO1 witness set is in Z_lower(f)", vec![low.tail_inf]);
    let ratio_one = w.anchors.iter().all(|k| &gp.eval(k) == k);
    r.require(ratio_one, "step weight g(k) = min{k_m >= k} has k_m/g(k_m) = 1", vec![w.anchors.len() as f64]);
    let v = verdict_on(&f, &gp, &w.set, &sched)?;
    r.require(v.verdict == Verdict::LikelyIn, "the set is in Z_g(f) for the step weight", vec![v.tail_sup]);
    // the other inclusion on the catalog
    let n = p.natural("N")?;
    let mut clashes = Vec::new();
    for wv in p.list("weights")? {
        let gw = parse_weight(wv)?;
        let sched = gw.sampling_schedule(&n);
        for name in CATALOG {
            let c = catalog_set(name)?;
            let vg = verdict_on(&f, &gw, &c, &sched)?;
            let vl = lower_verdict(&ratio_trace(&f, &id, &c, &sched)?, EPS, DELTA)?;
            if vg.verdict == Verdict::LikelyIn && vl.verdict == Verdict::LikelyOut {
                clashes.push(vl.tail_inf);
            }
        }
    }
    r.require(clashes.is_empty(), "catalog sets in some sampled Z_g(f) are not out of Z_lower(f)", clashes);
    Ok(())
}

fn check_es1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = ModulusFunction::log1p();
    let g = WeightFunction::es1();
    let (lo, hi) = (p.u64("m_min")?, p.u64("m_max")?);
    let mut ratios = Vec::new();
    let mut worst = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for m in lo..=hi {
        let k = &Natural::pow2(Natural::factorial(m)) - 1u64;
        let v = f.ratio(&g.eval(&(&k + 1u64)), &g.eval(&k)).unwrap_or(0.0);
        worst = worst.min(v - (m as f64 + 1.0) / 2.0);
        // ln(1 + 2^a) = a ln 2 + ln(1 + 2^-a)
        let ln1p2 = |a: f64| a * std::f64::consts::LN_2 + (-a * std::f64::consts::LN_2).exp().ln_1p();
        let fm = factorial_f64(m);
        let closed = ln1p2(fm * (m as f64 + 1.0)) / ln1p2(fm);
        max_err = max_err.max(((v - closed) / closed).abs());
        ratios.push(v);
    }
    r.note("f(g(k_m+1))/f(g(k_m)) at k_m = 2^(m!) - 1", ratios);
    r.require(worst > 0.0, "f(g(k_m+1))/f(g(k_m)) > (m+1)/2 (least margin)", vec![worst]);
    r.require(max_err <= 1e-9, "relative error against the closed form", vec![max_err]);
    Ok(())
}

fn factorial_f64(m: u64) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

fn check_cs1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let l = Natural::from(p.u64("l")?);
    let jumps: Vec<Natural> = g
        .breakpoints(crate::functions::DEFAULT_BREAKPOINTS, None)
        .into_iter()
        .filter(|b| g.eval(&(b + 1u64)) > g.eval(b))
        .collect();
    if jumps.len() < 4 {
        r.require(false, "the weight has too few jumps for the hypothesis", vec![jumps.len() as f64]);
        return Ok(());
    }
    let growth: Vec<f64> = jumps.iter().map(|k| f.ratio(&g.eval(&(k + &l)), &g.eval(k)).unwrap_or(0.0)).collect();
    let last = *growth.last().expect("nonempty");
    r.require(
        last > growth[0] && last > 1e3,
        "f(g(k_m + l))/f(g(k_m)) grows along the jumps (first, last)",
        vec![growth[0], last],
    );
    let horizon = jumps.last().expect("nonempty").clone();
    for t in p.list("tests")? {
        let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(|| VerifyError::InvalidParams("tests are [M, ε] pairs".into()))?;
        let (big_m, eps) = (pair[0].as_f64().unwrap_or(0.0), pair[1].as_f64().unwrap_or(0.0));
        let hits = ts1_boundedness_test(&f, &g, big_m, eps, &horizon)?;
        r.require(
            !hits.is_empty(),
            format!("f(g(k + floor(ε f(g(k)))))/f(g(k)) > M somewhere for M = {big_m}, ε = {eps} (count, bits of first)"),
            vec![hits.len() as f64, hits.first().map(bits).unwrap_or(0.0)],
        );
    }
    Ok(())
}

fn check_pd1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let n = p.natural("N")?;
    let sets = p.sets("sets")?;
    let config = DecompositionConfig { index_ceiling: n };
    let (mut combos, mut undecided, mut clashes) = (0usize, 0usize, Vec::new());
    for fv in p.list("moduli")? {
        let f = parse_modulus(fv)?;
        for gv in p.list("weights")? {
            let g = parse_weight(gv)?;
            let d = build_decomposition_with(&f, &g, 4096, &config)?;
            minimality(&d, r);
            let sched = g.sampling_schedule(&d.k_seq[d.m_max]);
            for c in &sets {
                combos += 1;
                let dv = decomposition_verdict(&d, c, EPS, DELTA)?.verdict;
                let tv = verdict_on(&f, &g, c, &sched)?.verdict;
                if !decided(dv) || !decided(tv) {
                    undecided += 1;
                } else if dv != tv {
                    clashes.push(code(dv));
                    r.note(format!("{VIOLATION}({}, {}, {}): decomposition vs direct", f.name(), g.name(), c.name()), vec![code(dv), code(tv)]);
                }
            }
        }
    }
    r.note("combinations checked, with at least one UNDECIDED", vec![combos as f64, undecided as f64]);
    r.require(clashes.is_empty(), "decomposition and direct verdicts agree whenever both decide", vec![clashes.len() as f64]);
    Ok(())
}

/// `f(g(k_m)) >= 2^m` and `f(g(k_m - 1)) < 2^m` for every stored `m`.
fn minimality(d: &Decomposition, r: &mut Rec) {
    let mut bad = Vec::new();
    for m in 1..=d.m_max {
        let k = &d.k_seq[m];
        let ok_at = d.f.at_least_pow2(&d.g_at_k[m], m as u32);
        let ok_before = k.is_zero() || !d.f.at_least_pow2(&d.g.eval(&(k - 1u64)), m as u32);
        let nondecreasing = d.k_seq[m - 1] <= *k;
        if !(ok_at && ok_before && nondecreasing) {
            bad.push(m as f64);
        }
    }
    r.require(
        bad.is_empty(),
        format!("({}, {}): k_m is the least k with f(g(k)) >= 2^m, m <= {}", d.f.name(), d.g.name(), d.m_max),
        bad,
    );
}

fn random_runs(rng: &mut ChaCha8Rng, d: &Decomposition) -> Vec<Run> {
    let range = d.stored_range();
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let m = rng.gen_range(range.clone());
        let (Some(a), Some(b)) = (d.k_seq[m].to_u64(), d.k_seq[m + 1].to_u64()) else { continue };
        if b <= a {
            continue;
        }
        let s = rng.gen_range(a..b);
        let len = rng.gen_range(1..=(b - s));
        runs.push((s, s + len));
    }
    runs.sort();
    let mut merged: Vec<(u64, u64)> = Vec::new();
    for (s, e) in runs {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged.into_iter().map(|(s, e)| (Natural::from(s), Natural::from(e))).collect()
}

fn check_td1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let n = p.natural("N")?;
    let pairs = p.u64("pairs")?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.u64("seed")?);
    let config = DecompositionConfig { index_ceiling: n };
    for fv in p.list("moduli")? {
        let f = parse_modulus(fv)?;
        for gv in p.list("weights")? {
            let g = parse_weight(gv)?;
            let d = build_decomposition_with(&f, &g, 4096, &config)?;
            let (mut evals, mut mono, mut sub, mut empty) = (0usize, 0usize, 0usize, 0usize);
            let mut worst_sub = f64::NEG_INFINITY;
            for _ in 0..pairs {
                let a = OmegaSet::intervals("A", random_runs(&mut rng, &d))?;
                let b = OmegaSet::intervals("B", random_runs(&mut rng, &d))?;
                let (u, i) = (a.union(&b), a.intersection(&b));
                for m in d.stored_range() {
                    let [pa, pb, pu, pi, pe] = [&a, &b, &u, &i, &OmegaSet::empty()].map(|s| d.phi(m, s).map(|v| v.value));
                    let (pa, pb, pu, pi, pe) = (pa?, pb?, pu?, pi?, pe?);
                    evals += 1;
                    if pe != 0.0 {
                        empty += 1;
                    }
                    if !(pi <= pa && pa <= pu && pb <= pu) {
                        mono += 1;
                    }
                    worst_sub = worst_sub.max(pu - pa - pb);
                    if pu > pa + pb + 1e-9 {
                        sub += 1;
                    }
                }
            }
            r.require(
                mono + sub + empty == 0,
                format!(
                    "({}, {}): φ_m(∅) = 0, monotone, subadditive over {pairs} random pairs (evaluations, failures, worst excess)",
                    f.name(),
                    g.name()
                ),
                vec![evals as f64, (mono + sub + empty) as f64, worst_sub],
            );
        }
    }
    Ok(())
}

/// `pairs`, or the single pair `(f, g)` when both are given.
fn pair_list(p: &Params) -> Result<Vec<(ModulusFunction, WeightFunction)>, VerifyError> {
    if let (Some(f), Some(g)) = (p.0.get("f").filter(|v| !v.is_null()), p.0.get("g").filter(|v| !v.is_null())) {
        return Ok(vec![(parse_modulus(f)?, parse_weight(g)?)]);
    }
    p.list("pairs")?
        .iter()
        .map(|v| {
            let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| VerifyError::InvalidParams("pairs are [f, g]".into()))?;
            Ok((parse_modulus(&a[0])?, parse_weight(&a[1])?))
        })
        .collect()
}

fn check_pd2(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let config = DecompositionConfig { index_ceiling: p.natural("ceiling")? };
    let m_max = p.u64("m_max")? as usize;
    for (f, g) in pair_list(p)? {
        let d = build_decomposition_with(&f, &g, m_max, &config)?;
        let (mut sup_c, mut sup_p) = (0f64, 0f64);
        let (mut below, mut above) = (Vec::new(), Vec::new());
        // k_0 = 0 by convention, so the preimage identity starts at m = 1
        for m in d.stored_range().filter(|&m| m >= 1) {
            let crit = preimage_count_criterion(&d, m)?;
            let phi = d.phi_omega(m)?.value;
            sup_c = sup_c.max(crit);
            sup_p = sup_p.max(phi);
            if phi > crit * (1.0 + 1e-12) {
                below.push(m as f64);
            }
            let overshoot = f.at_least_pow2(&d.g_at_k[m], m as u32 + 1);
            if !overshoot && crit > 2.0 * phi * (1.0 + 1e-12) {
                above.push(m as f64);
            }
        }
        let tag = format!("({}, {}), 1 <= m < {}", f.name(), g.name(), d.m_max);
        r.require(below.is_empty(), format!("{tag}: φ_m(ω) <= f(|(f∘g)^-1[2^m, 2^(m+1))|)/2^m"), below);
        r.require(above.is_empty(), format!("{tag}: criterion <= 2 φ_m(ω) where f(g(k_m)) < 2^(m+1)"), above);
        r.note(format!("{tag}: sup of the criterion and of φ_m(ω)"), vec![sup_c, sup_p]);
    }
    Ok(())
}

fn check_pd3(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let n = p.natural("N")?;
    let (id, log) = (ModulusFunction::identity(), ModulusFunction::log1p());
    let (gi, eeu) = (WeightFunction::identity(), WeightFunction::eeu());
    let v = growth_criterion_pd3(&id, &gi, 2.0, 3.0, &n)?;
    let d = build_decomposition_with(&id, &gi, 40, &DecompositionConfig::default())?;
    let (sup, _) = sup_phi_omega(&d)?;
    r.require(v.is_empty(), "(identity, identity): growth hypothesis holds with M = 2, L = 3", vec![v.len() as f64]);
    r.require(sup <= 2.0, "(identity, identity): sup φ_m(ω) is bounded", vec![sup]);
    let v = growth_criterion_pd3(&log, &eeu, 2.0, 1.0, &n)?;
    let at_factorials = v.iter().filter(|k| k.to_biguint().is_some_and(|b| is_factorial(&b))).count();
    r.require(at_factorials >= 3, "(log1p, eeu): hypothesis fails at k = m! (converse direction)", vec![v.len() as f64, at_factorials as f64]);
    let (sup_ratio, _) = ratio_bounded_criterion(&log, &eeu, &n).expect("nonempty grid");
    r.require(sup_ratio < 1.0, "(log1p, eeu): f(k)/f(g(k)) < 1 on the grid, so sup φ_m(ω) < ∞", vec![sup_ratio]);
    Ok(())
}

fn is_factorial(b: &num_bigint::BigUint) -> bool {
    let m = Natural::factorial_floor_index(b);
    &Natural::factorial(m) == b
}

struct Pd4 {
    sup_phi: f64,
    sup_ratio: f64,
    k0: Natural,
    f1_over: f64,
    fk0_over: f64,
    reached: usize,
}

fn pd4_values(f: &ModulusFunction, g: &WeightFunction, p: &Params) -> Result<Pd4, VerifyError> {
    let config = DecompositionConfig { index_ceiling: p.natural("ceiling")? };
    let d = build_decomposition_with(f, g, p.u64("m_max")? as usize, &config)?;
    let (sup_phi, _) = sup_phi_omega(&d)?;
    let (sup_ratio, _) = ratio_bounded_criterion(f, g, &p.natural("N")?).expect("nonempty grid");
    let k0 = first_positive(f, g)?;
    let gk0 = g.eval(&k0);
    Ok(Pd4 {
        sup_phi,
        sup_ratio,
        f1_over: f.ratio(&Natural::one(), &gk0).expect("positive"),
        fk0_over: f.ratio(&k0, &gk0).expect("positive"),
        k0,
        reached: d.m_max,
    })
}

fn check_pd4_forward(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let m_max = p.u64("m_max")? as usize;
    for (f, g) in pair_list(p)? {
        let v = pd4_values(&f, &g, p)?;
        let tag = format!("({}, {})", f.name(), g.name());
        r.require(v.reached == m_max, format!("{tag}: decomposition reaches m_max"), vec![v.reached as f64]);
        let bound = 2.0 * v.sup_ratio + 2.0 * v.f1_over;
        r.require(
            v.sup_phi <= bound,
            format!("{tag}: sup φ_m(ω) <= 2 sup f(k)/f(g(k)) + 2 f(1)/f(g(k0)), k0 = {} (lhs, rhs, slack)", v.k0),
            vec![v.sup_phi, bound, bound - v.sup_phi],
        );
    }
    Ok(())
}

fn check_pd4_reverse(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let m_max = p.u64("m_max")? as usize;
    for (f, g) in pair_list(p)? {
        let v = pd4_values(&f, &g, p)?;
        let tag = format!("({}, {})", f.name(), g.name());
        r.require(v.reached == m_max, format!("{tag}: decomposition reaches m_max"), vec![v.reached as f64]);
        let bound = v.fk0_over + 2.0 * v.sup_phi;
        r.require(
            v.sup_ratio <= bound,
            format!("{tag}: sup f(k)/f(g(k)) <= f(k0)/f(g(k0)) + 2 sup φ_m(ω), k0 = {} (lhs, rhs, slack)", v.k0),
            vec![v.sup_ratio, bound, bound - v.sup_ratio],
        );
    }
    Ok(())
}

fn check_pd4_1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let n = p.natural("N")?;
    let (sup, _) = ratio_bounded_criterion(&f, &g, &n).expect("nonempty grid");
    r.note("sup f(k)/f(g(k)) on the grid", vec![sup]);
    let sched = g.sampling_schedule(&n);
    let id = WeightFunction::identity();
    let mut clashes = Vec::new();
    for c in p.sets("sets")? {
        let vf = verdict_on(&f, &id, &c, &sched)?;
        let vg = verdict_on(&f, &g, &c, &sched)?;
        r.note(format!("{}: verdicts in Z(f), Z_g(f)", c.name()), vec![code(vf.verdict), code(vg.verdict)]);
        if vf.verdict == Verdict::LikelyIn && vg.verdict != Verdict::LikelyIn {
            clashes.push(vg.tail_sup);
        }
    }
    r.require(clashes.is_empty(), "members of Z(f) are members of Z_g(f)", clashes);
    Ok(())
}

fn check_pd4_2(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let n = p.natural("N")?;
    for gv in p.list("weights")? {
        let g = parse_weight(gv)?;
        let grid = g.sampling_schedule(&n);
        let big_m = grid
            .points()
            .iter()
            .filter(|k| !g.eval(k).is_zero())
            .map(|k| index_ratio(k, &g.eval(k)))
            .fold(0.0, f64::max);
        for fv in p.list("moduli")? {
            let f = parse_modulus(fv)?;
            let sup = grid
                .points()
                .iter()
                .filter_map(|k| f.ratio(k, &g.eval(k)))
                .fold(0.0, f64::max);
            r.require(
                sup <= big_m.max(1.0).ceil() * (1.0 + 1e-9),
                format!("({}, {}): sup f(k)/f(g(k)) <= ceil(sup k/g(k))", f.name(), g.name()),
                vec![sup, big_m],
            );
        }
    }
    // converse fails: EEU3
    let eeu3 = WeightFunction::eeu3();
    let r9 = index_ratio(&Natural::pow2(20u32), &eeu3.eval(&Natural::pow2(20u32)));
    let (sup, _) = ratio_bounded_criterion(&ModulusFunction::log1p(), &eeu3, &n).expect("nonempty grid");
    r.require(sup <= 4.0 && r9 >= 2048.0, "converse fails for eeu3: k/g(k) = 2^11 at 4^10 while log1p ratio <= 4", vec![r9, sup]);
    Ok(())
}

fn check_eeu3(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let n = p.natural("N")?;
    let f = ModulusFunction::log1p();
    let g = WeightFunction::eeu3();
    let (sup, at) = ratio_bounded_criterion(&f, &g, &n).expect("nonempty grid");
    r.require(sup <= 4.0, format!("max ln(1+k)/ln(1+g(k)) on the grid up to N, attained at k = {at}"), vec![sup]);
    let mut bad = Vec::new();
    for m in 0..=p.u64("m_max")? {
        let k = Natural::pow2(2 * (m + 1));
        if g.eval(&k).shl(m + 2) != k {
            bad.push(m as f64);
        }
    }
    r.require(bad.is_empty(), "k/g(k) = 2^(m+2) exactly at k = 4^(m+1)", bad);
    Ok(())
}

fn check_eec(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let alpha = p.f64("alpha")?;
    let n = p.natural("N")?;
    let c = eec_case1_set(alpha)?;
    let sched = g.sampling_schedule(&n);
    let vh = verdict_on(&ModulusFunction::identity(), &WeightFunction::identity(), &c, &sched)?;
    r.require(vh.verdict == Verdict::LikelyIn, "C is in Z_h for h = identity", vec![vh.tail_sup]);
    let mut worst = f64::INFINITY;
    for k in sched.points().iter().filter(|k| **k > Natural::from(16u64)) {
        // 4^m < k <= 4^(m+1)
        let m = (k - 1u64).floor_log2().and_then(|b| b.to_string().parse::<f64>().ok()).unwrap_or(0.0);
        let m = (m / 2.0).floor();
        let v = f.ratio(&c.count(k)?, &g.eval(k)).unwrap_or(0.0);
        worst = worst.min(v - alpha * m / (m + 1.0));
    }
    r.require(worst > 0.0, "f(count(k))/f(g(k)) > α m/(m+1) for 4^m < k <= 4^(m+1) (least margin)", vec![worst]);
    let vg = verdict_on(&f, &g, &c, &sched)?;
    r.require(vg.verdict == Verdict::LikelyOut, "C is not in Z_g(f)", vec![vg.tail_inf]);
    Ok(())
}

fn check_lz(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let n = p.natural("N")?;
    let sets = match p.get("C")? {
        Value::Null => p.sets("sets")?,
        c => vec![parse_set(c)?],
    };
    let mut clashes = Vec::new();
    for c in sets {
        let v = classical_verdicts(&c, &f, &n, EPS, DELTA)?;
        let (z, zf) = (v[&ClassicalIdeal::Z].verdict, v[&ClassicalIdeal::ZF].verdict);
        r.note(format!("{}: verdicts in Z, Z(f)", c.name()), vec![code(z), code(zf)]);
        if zf == Verdict::LikelyIn && z != Verdict::LikelyIn {
            clashes.push(code(z));
        }
    }
    r.require(clashes.is_empty(), "members of Z(f) are members of Z", clashes);
    let v = classical_verdicts(&example_e_set(), &f, &n, EPS, DELTA)?;
    let (z, zf) = (&v[&ClassicalIdeal::Z], &v[&ClassicalIdeal::ZF]);
    r.require(
        z.verdict == Verdict::LikelyIn && zf.verdict == Verdict::LikelyOut,
        "Example E: in Z but not in Z(f), so the inclusion is strict",
        vec![z.tail_sup, zf.tail_sup],
    );
    Ok(())
}

fn mu_f64(spec: &crate::constructions::MeasureIdealSpec, j: u64, c: &OmegaSet) -> Result<f64, VerifyError> {
    use num_traits::ToPrimitive;
    Ok(spec.mu(j, c)?.to_f64().unwrap_or(f64::NAN))
}

fn eu_example(
    r: &mut Rec,
    kind: MeasureKind,
    (c, d): (OmegaSet, OmegaSet),
    ms: std::ops::RangeInclusive<u64>,
    mu_c: fn(u64) -> f64,
    j_max: u64,
    horizon: u64,
) -> Result<(), VerifyError> {
    let spec = eu_measure_ideal(kind);
    let dom = increasing_dominance_check(&c, &d, horizon)?;
    r.require(
        dom.holds,
        "|C ∩ [0,k-1]| <= |D ∩ [0,k-1]| for every k <= horizon",
        dom.first_violation.map(|(k, a, b)| vec![k as f64, a as f64, b as f64]).unwrap_or_default(),
    );
    let (mut bad_c, mut bad_d) = (Vec::new(), Vec::new());
    for m in ms.clone() {
        if mu_f64(&spec, m, &c)? != mu_c(m) {
            bad_c.push(m as f64);
        }
        if mu_f64(&spec, m, &d)? != 0.0 {
            bad_d.push(m as f64);
        }
    }
    r.require(bad_c.is_empty(), format!("μ_m(C) exact for m in [{}, {}]", ms.start(), ms.end()), bad_c);
    r.require(bad_d.is_empty(), format!("μ_m(D) = 0 for m in [{}, {}]", ms.start(), ms.end()), bad_d);
    let vc = exh_verdict(&spec, &c, j_max, EPS, DELTA)?;
    let vd = exh_verdict(&spec, &d, j_max, EPS, DELTA)?;
    r.require(vc.verdict == Verdict::LikelyOut, "C is not in Exh(sup μ_m)", vec![vc.tail_sup]);
    r.require(vd.verdict == Verdict::LikelyIn, "D is in Exh(sup μ_m), so the ideal is not increasing invariant", vec![vd.tail_sup]);
    Ok(())
}

fn check_eeu4(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let spec = eu_measure_ideal(MeasureKind::Eeu4);
    let (_, d) = eeu4_sets();
    // the D blocks for m = 1, 2 meet the supports [2,3) and [4,6)
    r.note("μ_1(D), μ_2(D)", vec![mu_f64(&spec, 1, &d)?, mu_f64(&spec, 2, &d)?]);
    eu_example(r, MeasureKind::Eeu4, eeu4_sets(), 3..=p.u64("j_max")?, |_| 1.0, p.u64("j_max")?, p.u64("horizon")?)?;
    let (c, _) = eeu4_sets();
    let not_one: Vec<f64> = (1..=p.u64("j_max")?)
        .filter(|&m| !spec.mu(m, &c).is_ok_and(|v| v == num_rational::BigRational::from_integer(1.into())))
        .map(|m| m as f64)
        .collect();
    r.require(not_one.is_empty(), "μ_m(C) = 1 for every m >= 1", not_one);
    Ok(())
}

fn check_eeu5(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let spec = eu_measure_ideal(MeasureKind::Eeu5);
    let masses: Vec<f64> = (1..=4).map(|j| spec.mass(j).map(|m| { use num_traits::ToPrimitive; m.to_f64().unwrap_or(f64::NAN) }).unwrap_or(f64::NAN)).collect();
    r.note("μ_m(ω) = m for the m^2-point supports (m = 1..4)", masses);
    eu_example(r, MeasureKind::Eeu5, eeu5_sets(), 7..=p.u64("j_max")?, |m| m as f64, p.u64("j_max")?, p.u64("horizon")?)
}

fn check_pd6(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let j_max = p.u64("j_max")?;
    let ints = |key: &str| -> Result<Vec<u64>, VerifyError> {
        p.list(key)?
            .iter()
            .map(|v| v.as_u64().ok_or_else(|| VerifyError::InvalidParams(format!("`{key}` must list integers"))))
            .collect()
    };
    let (l, k) = (ints("L")?, ints("K")?);
    let sl = eu_measure_ideal(MeasureKind::Pd6(l.clone()));
    let sk = eu_measure_ideal(MeasureKind::Pd6(k.clone()));
    let one = num_rational::BigRational::from_integer(1.into());
    let bad: Vec<f64> = (0..=j_max).filter(|&j| sl.mass(j) != Some(one.clone())).map(|j| j as f64).collect();
    r.require(bad.is_empty(), "every μ_j is a probability measure (exact)", bad);
    let runs: Vec<Run> = k.iter().filter(|j| !l.contains(j) && **j <= j_max).filter_map(|&j| sl.support(j)).collect();
    let c = OmegaSet::intervals("∪ D_j, j in K \\ L", runs)?;
    let vl = exh_verdict(&sl, &c, j_max, EPS, DELTA)?;
    let vk = exh_verdict(&sk, &c, j_max, EPS, DELTA)?;
    r.require(vl.verdict == Verdict::LikelyIn, "the supports indexed by K \\ L form a set in I_L", vec![vl.tail_sup]);
    r.require(vk.verdict == Verdict::LikelyOut, "the same set is not in I_K", vec![vk.tail_sup]);
    Ok(())
}

fn check_ts1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let n = p.natural("N")?;
    let t = ts1_weight(&f, &g, &Ts1Search::for_weight(&g, p.u64("anchors")? as usize))?;
    r.require(t.anchors.len() >= 5, "at least five anchors found", vec![t.anchors.len() as f64]);
    let weak: Vec<f64> = t
        .anchor_ratios
        .iter()
        .enumerate()
        .filter(|(i, v)| **v <= (t.first_m + i) as f64)
        .map(|(i, _)| (t.first_m + i) as f64)
        .collect();
    r.require(weak.is_empty(), "f(h(k_m))/f(g(k_m)) > m at every anchor", weak);
    r.note("f(h(k_m))/f(g(k_m))", t.anchor_ratios.clone());
    let crowded: Vec<f64> = t
        .anchors
        .windows(2)
        .zip(&t.lengths)
        .enumerate()
        .filter(|(_, (w, l))| w[1] <= &w[0] + *l)
        .map(|(i, _)| (t.first_m + i) as f64)
        .collect();
    r.require(crowded.is_empty(), "k_(m+1) > k_m + floor(f(g(k_m))/2^m)", crowded);
    let pts = scan_grid(&g).union(&t.interval_points());
    let mut prev = Natural::zero();
    let (mut below, mut drops) = (0usize, 0usize);
    for k in pts.points() {
        let h = t.h.eval(k);
        if h < g.eval(k) {
            below += 1;
        }
        if h < prev {
            drops += 1;
        }
        prev = h;
    }
    r.require(below + drops == 0, "h >= g and h nondecreasing on the sampled points", vec![pts.len() as f64, below as f64, drops as f64]);
    let union = OmegaSet::intervals("∪ I_m", t.intervals())?;
    let sched = g.sampling_schedule(&n).union(&t.interval_points()).truncate(&n);
    let v = verdict_on(&f, &g, &union, &sched)?;
    r.require(v.verdict == Verdict::LikelyIn, "∪ I_m is in Z_g(f)", vec![v.tail_sup]);
    // C \ ∪ I_m for C = pow2: h = g at its elements, and the ratio tends to 0
    let c = catalog_set("pow2")?.difference(&union);
    let els = c.elements_below(&n, 1 << 20)?;
    let differ = els.iter().filter(|x| t.h.eval(x) != g.eval(x)).count();
    r.require(differ == 0, "h(c) = g(c) at the elements of C \\ ∪ I_m", vec![els.len() as f64]);
    let ranks = Natural::from(els.len());
    let vh = membership_on_enumeration(&f, &t.h, &c, &ranks, EPS, DELTA)?;
    r.require(
        vh.verdict == Verdict::LikelyIn,
        "f(|(C \\ ∪ I_m) ∩ [0, c_m - 1]|)/f(h(c_m)) tends to 0",
        vec![vh.tail_sup],
    );
    Ok(())
}

fn check_ps1(p: &Params, r: &mut Rec) -> Result<(), VerifyError> {
    let f = p.modulus("f")?;
    let g = p.weight("g")?;
    let n = p.natural("N")?;
    let bound = p.f64("bound")?;
    let t = ts1_weight(&f, &g, &Ts1Search::for_weight(&g, p.u64("blocks")? as usize))?;
    let codes = complementary_codes(p.u64("members")? as usize, t.anchors.len());
    let fam = ps1_family(&g, &t.h, &t.anchors, &codes)?;
    r.note("members, blocks", vec![fam.len() as f64, t.anchors.len() as f64]);
    let sched = g.sampling_schedule(&n).union(&t.interval_points()).truncate(&n);
    let mut sandwich = 0usize;
    for k in sched.points() {
        let (gk, hk) = (g.eval(k), t.h.eval(k));
        let top = gk.clone().max(hk);
        for ga in &fam {
            let v = ga.eval(k);
            if v < gk || v > top {
                sandwich += 1;
            }
        }
    }
    r.require(sandwich == 0, "g <= g_α <= max(g, h) on the sampled points", vec![sandwich as f64]);
    let mut clashes = Vec::new();
    for c in p.sets("sets")? {
        let base = verdict_on(&f, &g, &c, &sched)?.verdict;
        let vs = fam
            .par_iter()
            .map(|ga| verdict_on(&f, ga, &c, &sched).map(|v| v.verdict))
            .collect::<Result<Vec<_>, _>>()?;
        let same = vs.iter().filter(|v| **v == base).count();
        r.note(format!("{}: verdict under g, members agreeing", c.name()), vec![code(base), same as f64]);
        if same != vs.len() {
            clashes.push(code(base));
        }
    }
    r.require(clashes.is_empty(), "every g_α gives g's verdict on every test set", clashes);
    let mut weakest = f64::INFINITY;
    let mut missing = 0usize;
    for (i, a) in fam.iter().enumerate() {
        for (j, b) in fam.iter().enumerate() {
            if i == j {
                continue;
            }
            let w = divergence_witnesses(&f, a, b, &t.anchors, bound);
            match w.iter().map(|x| x.ratio).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x)))) {
                Some(best) => weakest = weakest.min(best),
                None => missing += 1,
            }
        }
    }
    r.require(
        missing == 0,
        format!("every ordered pair has an anchor with f(g_α(k))/f(g_β(k)) > {bound} (least best ratio)"),
        vec![weakest, missing as f64],
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_consistent() {
        let ids = claim_ids();
        assert!(ids.len() >= 12);
        let mut dedup = ids.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), ids.len());
        for c in registry() {
            merge((c.defaults)(), &(c.smoke)()).unwrap();
        }
    }

    #[test]
    fn unknowns_are_errors() {
        assert!(matches!(run_check("nope", &Value::Null), Err(VerifyError::UnknownClaim(_))));
        assert!(matches!(run_suite("medium"), Err(VerifyError::UnknownSuite(_))));
        assert!(matches!(run_check("ExE", &json!({"bogus": 1})), Err(VerifyError::InvalidParams(_))));
    }

    #[test]
    fn lo1_identity_refuses_and_passes() {
        let c = run_check("LO1-equiv", &json!({"f": "identity", "g": "identity"})).unwrap();
        assert_eq!(c.status, Status::Pass, "{:?}", c.evidence);
    }

    #[test]
    fn pd4_forward_log_eeu() {
        let c = run_check("PD4-forward", &json!({"f": "log1p", "g": "eeu", "m_max": 8, "N": "10^6"})).unwrap();
        assert_eq!(c.status, Status::Pass, "{:?}", c.evidence);
        assert_eq!(c.evidence.len(), 2);
    }

    #[test]
    fn lz_single_set() {
        let c = run_check("LZ", &json!({"f": "log1p", "C": "example_e", "N": "10^6"})).unwrap();
        assert_eq!(c.status, Status::Pass, "{:?}", c.evidence);
    }
}
