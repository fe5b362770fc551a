//! Acceptance criteria at desk-scale horizons. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use density_lab::constructions::{eeu4_sets, eeu5_sets, eu_measure_ideal, example_e_set, MeasureKind};
use density_lab::decomposition::{build_decomposition, Decomposition};
use density_lab::functions::{ModulusFunction, WeightFunction};
use density_lab::omega_sets::OmegaSet;
use density_lab::verify::{run_check, run_suite, ClaimCheck, Status};
use density_lab::Natural;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn claim(id: &str, params: Value) -> Result<ClaimCheck, String> {
    let c = run_check(id, &params).map_err(|e| format!("{id}: {e}"))?;
    if c.status == Status::Pass {
        Ok(c)
    } else {
        let v: Vec<_> = c.violations().map(|e| format!("{} {:?}", e.description, e.values)).collect();
        Err(format!("{id} {:?}: {}", c.status, v.join("; ")))
    }
}

fn first_value(c: &ClaimCheck, needle: &str) -> f64 {
    c.evidence
        .iter()
        .find(|e| e.description.contains(needle))
        .and_then(|e| e.values.first().copied())
        .unwrap_or(f64::NAN)
}

fn isqrt(k: u64) -> u64 {
    let mut r = (k as f64).sqrt() as u64;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// Every k up to 10^4, then a 1% geometric grid, then 10^6.
fn grid_to_million() -> Vec<u64> {
    let mut ks: Vec<u64> = (1..=10_000).collect();
    let mut x = 10_000f64;
    while x < 1e6 {
        x *= 1.01;
        ks.push((x as u64).min(1_000_000));
    }
    ks.push(1_000_000);
    ks.dedup();
    ks
}

fn c1_example_e() -> Outcome {
    let c = example_e_set();
    let mut min_ratio = f64::INFINITY;
    for k in grid_to_million() {
        let count = c.count_u64(k).map_err(|e| e.to_string())?;
        let s = isqrt(k);
        ensure(count == s, format!("count({k}) = {count}, expected {s}"))?;
        ensure((s as u128) * (s as u128) <= k as u128, format!("count^2 > k at {k}"))?;
        if k >= 100 {
            min_ratio = min_ratio.min((s as f64).ln_1p() / (k as f64).ln_1p());
        }
    }
    ensure(min_ratio >= 0.49, format!("min ratio {min_ratio}"))?;
    let chk = claim("ExE", Value::Null)?;
    Ok(format!("min ln(1+⌊√k⌋)/ln(1+k) = {min_ratio:.4}; library check agrees ({} evidence lines)", chk.evidence.len()))
}

fn eeu3_oracle(k: u64) -> u64 {
    if k <= 4 {
        return 1;
    }
    // 4^m < k <= 4^(m+1)
    let mut m = 0;
    while 4u64.pow(m + 1) < k {
        m += 1;
    }
    1 << m
}

fn c2_eeu3() -> Outcome {
    let g = WeightFunction::eeu3();
    let mut ks = grid_to_million();
    for m in 1..10u32 {
        ks.extend([4u64.pow(m), 4u64.pow(m) + 1]);
    }
    let mut worst = 0f64;
    for &k in ks.iter().filter(|&&k| k <= 1_000_000) {
        let gk = eeu3_oracle(k);
        ensure(g.eval_u64(k) == gk, format!("g({k}) differs from the oracle {gk}"))?;
        worst = worst.max((k as f64).ln_1p() / (gk as f64).ln_1p());
    }
    ensure(worst <= 4.0, format!("max ratio {worst}"))?;
    for m in 0..=9u32 {
        let k = 4u64.pow(m + 1);
        let gk = g.eval_u64(k).to_u64().ok_or("g too large")?;
        ensure(k == gk << (m + 2), format!("k/g(k) at 4^{} is not 2^{}", m + 1, m + 2))?;
    }
    claim("EEU3", Value::Null)?;
    Ok(format!("max ln(1+k)/ln(1+g(k)) = {worst:.4} <= 4; k/g(k) = 2^(m+2) at 4^(m+1), m = 0..9"))
}

fn c3_es1() -> Outcome {
    let f = ModulusFunction::log1p();
    let g = WeightFunction::es1();
    let ln2 = std::f64::consts::LN_2;
    let mut least = f64::INFINITY;
    let mut max_err = 0f64;
    for m in 2..=20u64 {
        let fact = |n: u64| -> BigUint { (1..=n).map(BigUint::from).product() };
        let (a, b) = (fact(m), fact(m + 1));
        let k = &Natural::pow2(a.clone()) - 1u64;
        ensure(g.eval(&k) == Natural::pow2(a.clone()), format!("g(k_{m}) is not 2^({m}!)"))?;
        ensure(g.eval(&(&k + 1u64)) == Natural::pow2(b.clone()), format!("g(k_{m}+1) is not 2^({}!)", m + 1))?;
        let v = f.ratio(&g.eval(&(&k + 1u64)), &g.eval(&k)).ok_or("zero denominator")?;
        let (af, bf) = (a.to_string().parse::<f64>().unwrap(), b.to_string().parse::<f64>().unwrap());
        let closed = (bf * ln2 + (-bf * ln2).exp().ln_1p()) / (af * ln2 + (-af * ln2).exp().ln_1p());
        max_err = max_err.max(((v - closed) / closed).abs());
        least = least.min(v - (m as f64 + 1.0) / 2.0);
    }
    ensure(least > 0.0, format!("least margin over (m+1)/2 is {least}"))?;
    ensure(max_err <= 1e-9, format!("relative error {max_err:e}"))?;
    Ok(format!("least margin over (m+1)/2 = {least:.4}; max relative error {max_err:.1e}"))
}

fn c4_pd1() -> Outcome {
    // (identity, identity) gives k_m = 2^m and (power(0.5), identity) gives k_m = 4^m
    for (f, base) in [(ModulusFunction::identity(), 1u32), (ModulusFunction::power(0.5).unwrap(), 2)] {
        let d = build_decomposition(&f, &WeightFunction::identity(), 30).map_err(|e| e.to_string())?;
        for m in 1..=30u32 {
            ensure(d.k(m as usize) == &Natural::pow2(base * m), format!("{}: k_{m}", f.name()))?;
        }
    }
    let c = claim("PD1", Value::Null)?;
    let combos = c
        .evidence
        .iter()
        .find(|e| e.description.starts_with("combinations"))
        .map(|e| e.values.clone())
        .unwrap_or_default();
    ensure(combos.first().copied().unwrap_or(0.0) >= 45.0, "fewer than 45 combinations")?;
    Ok(format!("{} combinations, {} with an UNDECIDED side, 0 disagreements", combos[0], combos[1]))
}

/// `φ_m(C) = |C ∩ [2^m, 2^(m+1))| / 2^m` for identity/identity, brute force.
fn c5_td1() -> Outcome {
    let d: Decomposition = build_decomposition(&ModulusFunction::identity(), &WeightFunction::identity(), 12)
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let top = 1usize << 12;
    for _ in 0..100 {
        let pick = |rng: &mut ChaCha8Rng| -> Vec<bool> {
            let p: f64 = rng.gen();
            (0..top).map(|_| rng.gen_bool(p)).collect()
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let to_set = |bits: &[bool]| {
            OmegaSet::finite_u64(&bits.iter().enumerate().filter(|(_, x)| **x).map(|(i, _)| i as u64).collect::<Vec<_>>())
        };
        let u: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        let (sa, sb, su) = (to_set(&a), to_set(&b), to_set(&u));
        for m in 1..12 {
            let brute = |bits: &[bool]| bits[1 << m..2 << m].iter().filter(|x| **x).count() as f64 / (1u64 << m) as f64;
            let [pa, pb, pu] = [&sa, &sb, &su].map(|s| d.phi(m, s).map(|v| v.value).unwrap_or(f64::NAN));
            ensure(pa == brute(&a) && pb == brute(&b) && pu == brute(&u), format!("φ_{m} differs from brute force"))?;
            ensure(pa <= pu && pb <= pu && pu <= pa + pb + 1e-9, format!("axioms fail at m = {m}"))?;
        }
    }
    let c = claim("TD1", Value::Null)?;
    let evals: f64 = c.evidence.iter().filter_map(|e| e.values.first()).sum();
    Ok(format!("brute-force oracle matches on 100 pairs; library check: {evals} evaluations over 9 decompositions, 0 violations"))
}

fn c6_pd4() -> Outcome {
    let params = json!({"pairs": [["log1p", "eeu"], ["identity", "identity"]], "m_max": 12, "N": "10^6"});
    let fwd = claim("PD4-forward", params.clone())?;
    let rev = claim("PD4-reverse", params)?;
    let slack = |c: &ClaimCheck, tag: &str| {
        c.evidence
            .iter()
            .find(|e| e.description.starts_with(tag) && e.values.len() == 3)
            .map(|e| e.values[2])
            .unwrap_or(f64::NAN)
    };
    // identity/identity: every φ_m(ω) = 1 and the ratio is 1
    ensure((slack(&fwd, "(identity, identity)") - 3.0).abs() < 1e-12, "forward slack for identity is not 4 - 1")?;
    ensure((slack(&rev, "(identity, identity)") - 2.0).abs() < 1e-12, "reverse slack for identity is not 3 - 1")?;
    Ok(format!(
        "slack forward (log1p, eeu) {:.4}, (identity, identity) {:.4}; reverse {:.4}, {:.4}",
        slack(&fwd, "(log1p, eeu)"),
        slack(&fwd, "(identity, identity)"),
        slack(&rev, "(log1p, eeu)"),
        slack(&rev, "(identity, identity)")
    ))
}

fn c7_lo1() -> Outcome {
    let c = claim("LO1-equiv", json!({"f": "log1p", "g": "es1"}))?;
    let ratios = &c.evidence.iter().find(|e| e.description.contains("at the anchors")).ok_or("no anchor ratios")?.values;
    // es1 anchors are k_m = 2^(m!) for m = 2, 3, ..., so
    // f(k_m)/f(g(k_m)) = ln(1 + 2^(m!)) / ln(1 + 2^((m+1)!)), which tends to 1/(m+1)
    let ln1p2 = |a: f64| a * std::f64::consts::LN_2 + (-a * std::f64::consts::LN_2).exp().ln_1p();
    let mut fact = 1f64;
    for (i, r) in ratios.iter().enumerate() {
        let m = i as f64 + 2.0;
        if i == 0 {
            fact = 2.0;
        }
        let expected = ln1p2(fact) / ln1p2(fact * (m + 1.0));
        ensure(((r - expected) / expected).abs() < 1e-9, format!("anchor ratio at m = {m}: {r} vs {expected}"))?;
        fact *= m + 1.0;
    }
    let tail = ratios.iter().skip(4).enumerate().all(|(i, r)| (r * (i as f64 + 7.0) - 1.0).abs() < 1e-9);
    ensure(tail, "anchor ratios are not 1/(m+1) from m = 6 on")?;
    Ok(format!(
        "{} anchors; min f(count(2k))/f(2k) = {:.4}; Z_g(f) tail sup {:.4}, Z(f) tail sup {:.4}",
        ratios.len(),
        first_value(&c, ">= 1/2"),
        first_value(&c, "in Z_g(f)"),
        first_value(&c, "not in Z(f)")
    ))
}

fn block_oracle(n: u64, first: u64, len: fn(u64) -> u64, after: bool) -> bool {
    (first..64).any(|m| {
        let p = 1u64 << m;
        if after {
            (p..p + len(m)).contains(&n)
        } else {
            (p.saturating_sub(len(m))..p).contains(&n)
        }
    })
}

fn eeu_case(kind: MeasureKind, (c, d): (OmegaSet, OmegaSet), first: u64, len: fn(u64) -> u64, mu_c: fn(u64) -> u64) -> Result<(), String> {
    let horizon = 100_000u64;
    let (mut nc, mut nd) = (0u64, 0u64);
    for k in 0..=horizon {
        ensure(c.count_u64(k).map_err(|e| e.to_string())? == nc, format!("count_C({k})"))?;
        ensure(d.count_u64(k).map_err(|e| e.to_string())? == nd, format!("count_D({k})"))?;
        ensure(nc <= nd, format!("dominance fails at {k}: {nc} > {nd}"))?;
        nc += block_oracle(k, first, len, true) as u64;
        nd += block_oracle(k, first, len, false) as u64;
    }
    let spec = eu_measure_ideal(kind);
    let lo = if first == 1 { 3 } else { first };
    for m in first..=16 {
        let mc = spec.mu(m, &c).map_err(|e| e.to_string())?;
        ensure(mc == num_rational::BigRational::from_integer(mu_c(m).into()), format!("μ_{m}(C) = {mc}"))?;
        if m >= lo {
            let md = spec.mu(m, &d).map_err(|e| e.to_string())?;
            ensure(md == num_rational::BigRational::from_integer(0.into()), format!("μ_{m}(D) = {md}"))?;
        }
    }
    Ok(())
}

fn c8_eeu45() -> Outcome {
    eeu_case(MeasureKind::Eeu4, eeu4_sets(), 1, |m| m, |_| 1)?;
    eeu_case(MeasureKind::Eeu5, eeu5_sets(), 7, |m| m * m, |m| m)?;
    let c4 = claim("EEU4", Value::Null)?;
    claim("EEU5", Value::Null)?;
    let low = c4.evidence.iter().find(|e| e.description.starts_with("μ_1(D)")).map(|e| e.values.clone()).unwrap_or_default();
    Ok(format!(
        "dominance for all k <= 10^5; μ_m(C) = 1 on [1,16] and μ_m(D) = 0 on [3,16] (μ_1(D), μ_2(D) = {low:?}: D's first blocks reach back into the first supports); EEU5: μ_m(C) = m, μ_m(D) = 0 on [7,16]"
    ))
}

fn c9_ts1_ps1() -> Outcome {
    let t = claim("TS1", Value::Null)?;
    let ratios = &t.evidence.iter().find(|e| e.description == "f(h(k_m))/f(g(k_m))").ok_or("no anchor ratios")?.values;
    ensure(ratios.len() >= 5, "fewer than five anchors")?;
    let p = claim("PS1", Value::Null)?;
    let weakest = p.evidence.iter().find(|e| e.description.contains("ordered pair")).map(|e| e.values[0]).unwrap_or(f64::NAN);
    ensure(weakest > 1e3, format!("weakest divergence {weakest}"))?;
    Ok(format!(
        "{} anchors, ratios {:.3}..{:.3}; 8 members agree with g on 5 sets; weakest pairwise divergence {weakest:.1}",
        ratios.len(),
        ratios[0],
        ratios[ratios.len() - 1]
    ))
}

fn c10_lz() -> Outcome {
    // Example E at 10^6: count/k = 10^-3, f-ratio = ln(1001)/ln(10^6 + 1) ≈ 0.5
    let f_ratio = 1001f64.ln() / 1_000_001f64.ln();
    ensure(f_ratio > 0.25, "Example E f-ratio")?;
    let c = claim("LZ", Value::Null)?;
    ensure((first_value(&c, "Example E") - 1e-3).abs() < 1e-3, "Example E density")?;
    Ok(format!("no Z(f) member outside Z; Example E: density {:.4}, f-ratio {f_ratio:.4}", first_value(&c, "Example E")))
}

fn c11_full_suite() -> Outcome {
    let r = run_suite("full").map_err(|e| e.to_string())?;
    let failed: Vec<_> = r.failed().iter().map(|c| c.claim_id.clone()).collect();
    ensure(failed.is_empty(), format!("failed: {failed:?}"))?;
    let inconclusive: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Inconclusive).map(|c| c.claim_id.as_str()).collect();
    ensure(inconclusive.iter().all(|id| r.horizon_limited.iter().any(|h| h == id)), "unexpected INCONCLUSIVE")?;
    Ok(format!("{} checks, none failed, inconclusive by design: {inconclusive:?}", r.checks.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("1 Example E reproduction", c1_example_e, 5),
        ("2 EEU3 bound", c2_eeu3, 5),
        ("3 ES1 growth", c3_es1, 10),
        ("4 decomposition/direct verdict equivalence", c4_pd1, 60),
        ("5 submeasure axioms", c5_td1, 600),
        ("6 sup φ_m(ω) vs sup ratio, both bounds", c6_pd4, 600),
        ("7 LO1 witness", c7_lo1, 600),
        ("8 increasing-invariance violation", c8_eeu45, 600),
        ("9 TS1 weight and PS1 family", c9_ts1_ps1, 600),
        ("10 Z(f) inside Z", c10_lz, 600),
        ("full suite wall-clock", c11_full_suite, 600),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let t0 = Instant::now();
        let out = run();
        let dt = t0.elapsed();
        let out = out.and_then(|msg| {
            if dt <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {:.2}s, limit {limit}s", dt.as_secs_f64()))
            }
        });
        match out {
            Ok(msg) => println!("PASS criterion {name} ({:.2}s): {msg}", dt.as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {name} ({:.2}s): {msg}", dt.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
