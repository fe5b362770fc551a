//! Ratio traces `f(|C ∩ [0,k-1]|) / f(g(k))` and finite-horizon verdicts.
//!
//! A verdict looks at the tail of a trace: the samples whose index is at least
//! half the last sampled index. `LIKELY_IN` when every tail ratio is below `ε`,
//! `LIKELY_OUT` when at least a quarter of them reach `δ`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::functions::{ModulusFunction, WeightFunction};
use crate::natural::Natural;
use crate::omega_sets::{OmegaSet, SetError};
use crate::schedule::Schedule;

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_DELTA: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the trace has no samples with f(g(k)) > 0")]
    EmptyTrace,
    #[error("weight `{0}` is not nondecreasing")]
    NotNondecreasing(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Sampled values of `f(count(k)) / f(g(k))`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTrace {
    pub f: String,
    pub g: String,
    pub set: String,
    pub sample_indices: Vec<Natural>,
    pub counts: Vec<Natural>,
    pub f_counts: Vec<f64>,
    pub f_gs: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Schedule points dropped because `f(g(k)) = 0`.
    pub skipped: Vec<Natural>,
    /// First retained index, i.e. the first with `f(g(k)) > 0`.
    pub skipped_prefix: Option<Natural>,
}

impl RatioTrace {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn horizon(&self) -> Option<&Natural> {
        self.sample_indices.last()
    }

    /// Ratio at a sampled index.
    pub fn ratio_at(&self, k: &Natural) -> Option<f64> {
        self.sample_indices
            .binary_search(k)
            .ok()
            .map(|i| self.ratios[i])
    }

    /// CSV with columns `k,count,f_count,f_g,ratio`, reals to 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,count,f_count,f_g,ratio")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.sample_indices[i],
                self.counts[i],
                fmt_real(self.f_counts[i]),
                fmt_real(self.f_gs[i]),
                fmt_real(self.ratios[i])
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// 17 significant digits, or `inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Exact counts at each schedule point, `f` applied to counts and weights.
pub fn ratio_trace(
    f: &ModulusFunction,
    g: &WeightFunction,
    c: &OmegaSet,
    schedule: &Schedule,
) -> Result<RatioTrace, DensityError> {
    let rows: Vec<Option<(Natural, Natural, f64, f64, f64)>> = schedule
        .points()
        .par_iter()
        .map(|k| -> Result<_, DensityError> {
            let gk = g.eval(k);
            let f_g = f.eval_big(&gk);
            if f_g <= 0.0 || f_g.is_nan() {
                return Ok(None);
            }
            let count = c.count(k)?;
            let f_count = f.eval_big(&count);
            let ratio = f.ratio(&count, &gk).expect("f(g(k)) > 0");
            Ok(Some((k.clone(), count, f_count, f_g, ratio)))
        })
        .collect::<Result<_, _>>()?;

    let mut trace = RatioTrace {
        f: f.name().to_string(),
        g: g.name().to_string(),
        set: c.name().to_string(),
        sample_indices: Vec::new(),
        counts: Vec::new(),
        f_counts: Vec::new(),
        f_gs: Vec::new(),
        ratios: Vec::new(),
        skipped: Vec::new(),
        skipped_prefix: None,
    };
    for (k, row) in schedule.points().iter().zip(rows) {
        match row {
            None => trace.skipped.push(k.clone()),
            Some((k, count, f_count, f_g, ratio)) => {
                if trace.skipped_prefix.is_none() {
                    trace.skipped_prefix = Some(k.clone());
                }
                trace.sample_indices.push(k);
                trace.counts.push(count);
                trace.f_counts.push(f_count);
                trace.f_gs.push(f_g);
                trace.ratios.push(ratio);
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    LikelyIn,
    LikelyOut,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LikelyIn => "LIKELY_IN",
            Verdict::LikelyOut => "LIKELY_OUT",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

/// Whether a verdict reads the upper or lower limit of the ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitKind {
    Limsup,
    Liminf,
}

/// Tail samples at or above `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct OutWitness {
    pub indices: Vec<Natural>,
    pub ratios: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub kind: LimitKind,
    /// Last sampled index.
    pub horizon: Natural,
    pub tail_sup: f64,
    pub tail_inf: f64,
    pub tail_len: usize,
    pub out_witness: Option<OutWitness>,
    pub epsilon: f64,
    pub delta: f64,
}

fn check_thresholds(eps: f64, delta: f64) -> Result<(), DensityError> {
    if !(eps > 0.0) {
        return Err(DensityError::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    if !(delta > eps) {
        return Err(DensityError::InvalidParameter(format!(
            "delta must exceed epsilon, got delta = {delta}, epsilon = {eps}"
        )));
    }
    Ok(())
}

/// Positions of the tail: samples with index `>= last / 2`.
fn tail_start(indices: &[Natural]) -> usize {
    let last = indices.last().expect("nonempty");
    let half = last.shr_floor(1);
    // 2k >= last, i.e. k >= ceil(last/2)
    let half_up = if &(&half + &half) < last { &half + 1u64 } else { half };
    indices.partition_point(|k| k < &half_up)
}

/// Verdict on arbitrary `(index, value)` samples, indices increasing.
pub fn verdict_from_samples(
    indices: &[Natural],
    values: &[f64],
    eps: f64,
    delta: f64,
    kind: LimitKind,
) -> Result<MembershipVerdict, DensityError> {
    check_thresholds(eps, delta)?;
    assert_eq!(indices.len(), values.len(), "one value per index");
    if indices.is_empty() {
        return Err(DensityError::EmptyTrace);
    }
    let t0 = tail_start(indices);
    let tail = &values[t0..];
    let tail_sup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_inf = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hits: Vec<usize> = (t0..values.len()).filter(|&i| values[i] >= delta).collect();
    let witness = || OutWitness {
        indices: hits.iter().map(|&i| indices[i].clone()).collect(),
        ratios: hits.iter().map(|&i| values[i]).collect(),
        delta,
    };
    let (verdict, out_witness) = match kind {
        LimitKind::Limsup => {
            if tail_sup < eps {
                (Verdict::LikelyIn, None)
            } else if 4 * hits.len() >= tail.len() {
                (Verdict::LikelyOut, Some(witness()))
            } else {
                (Verdict::Undecided, None)
            }
        }
        LimitKind::Liminf => {
            if tail_inf < eps {
                (Verdict::LikelyIn, None)
            } else if hits.len() == tail.len() {
                (Verdict::LikelyOut, Some(witness()))
            } else {
                (Verdict::Undecided, None)
            }
        }
    };
    Ok(MembershipVerdict {
        verdict,
        kind,
        horizon: indices.last().expect("nonempty").clone(),
        tail_sup,
        tail_inf,
        tail_len: tail.len(),
        out_witness,
        epsilon: eps,
        delta,
    })
}

/// Verdict for `C ∈ Z_g(f)` from the limsup of a trace.
pub fn membership_verdict(trace: &RatioTrace, eps: f64, delta: f64) -> Result<MembershipVerdict, DensityError> {
    verdict_from_samples(&trace.sample_indices, &trace.ratios, eps, delta, LimitKind::Limsup)
}

/// Verdict from the liminf of a trace, for the lower ideals.
pub fn lower_verdict(trace: &RatioTrace, eps: f64, delta: f64) -> Result<MembershipVerdict, DensityError> {
    verdict_from_samples(&trace.sample_indices, &trace.ratios, eps, delta, LimitKind::Liminf)
}

/// Minimum of `f(k) / f(g(k))` over the tail of the schedule, with its index.
pub fn liminf_ratio(f: &ModulusFunction, g: &WeightFunction, schedule: &Schedule) -> Option<(f64, Natural)> {
    let rows: Vec<(Natural, f64)> = schedule
        .points()
        .par_iter()
        .filter_map(|k| f.ratio(k, &g.eval(k)).map(|r| (k.clone(), r)))
        .collect();
    if rows.is_empty() {
        return None;
    }
    let idx: Vec<Natural> = rows.iter().map(|(k, _)| k.clone()).collect();
    let t0 = tail_start(&idx);
    rows[t0..]
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, r)| (*r, k.clone()))
}

/// Ranks sampled by [`membership_on_enumeration`]: geometric up to `m_max`,
/// plus the counts of `C` at the weight's breakpoints, so that the proofs'
/// subsequences are visited.
fn enumeration_ranks(g: &WeightFunction, c: &OmegaSet, m_max: &Natural) -> Result<Schedule, DensityError> {
    let mut ranks: Vec<Natural> = Schedule::default_geometric(m_max).points().to_vec();
    ranks.push(Natural::zero());
    for b in g.breakpoints(crate::functions::DEFAULT_BREAKPOINTS, None) {
        match c.count(&b) {
            Ok(r) if &r < m_max => ranks.push(r),
            Ok(_) => break,
            Err(SetError::RepresentationTooWeak(_)) => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Schedule::new(ranks))
}

/// Verdict from ratios at the set's own elements: `f(m) / f(g(c_m))` where
/// `c_m` is the element of rank `m`. Valid for nondecreasing `g`. A set with no
/// more elements than the sampled ranks is finite and reported `LIKELY_IN`
/// with zero ratios.
pub fn membership_on_enumeration(
    f: &ModulusFunction,
    g: &WeightFunction,
    c: &OmegaSet,
    m_max: &Natural,
    eps: f64,
    delta: f64,
) -> Result<MembershipVerdict, DensityError> {
    check_thresholds(eps, delta)?;
    if !g.is_nondecreasing() {
        return Err(DensityError::NotNondecreasing(g.name().to_string()));
    }
    let ranks = enumeration_ranks(g, c, m_max)?;
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for m in ranks.points() {
        let Some(cm) = c.nth_element(m)? else {
            // finite set: f(|C|) / f(g(k)) -> 0
            return Ok(MembershipVerdict {
                verdict: Verdict::LikelyIn,
                kind: LimitKind::Limsup,
                horizon: indices.last().cloned().unwrap_or_else(Natural::zero),
                tail_sup: 0.0,
                tail_inf: 0.0,
                tail_len: 0,
                out_witness: None,
                epsilon: eps,
                delta,
            });
        };
        if let Some(r) = f.ratio(m, &g.eval(&cm)) {
            if indices.last() != Some(&cm) {
                indices.push(cm);
                values.push(r);
            }
        }
    }
    verdict_from_samples(&indices, &values, eps, delta, LimitKind::Limsup)
}

/// The four classical ideals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ClassicalIdeal {
    /// density zero
    Z,
    /// lower density zero
    ZLower,
    /// `f`-density zero
    ZF,
    /// lower `f`-density zero
    ZLowerF,
}

impl fmt::Display for ClassicalIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassicalIdeal::Z => "Z",
            ClassicalIdeal::ZLower => "Z_lower",
            ClassicalIdeal::ZF => "Z(f)",
            ClassicalIdeal::ZLowerF => "Z_lower(f)",
        })
    }
}

/// Verdicts for `Z`, `Z_lower`, `Z(f)` and `Z_lower(f)` from identity-weight
/// traces on the default geometric grid up to `horizon`.
pub fn classical_verdicts(
    c: &OmegaSet,
    f: &ModulusFunction,
    horizon: &Natural,
    eps: f64,
    delta: f64,
) -> Result<BTreeMap<ClassicalIdeal, MembershipVerdict>, DensityError> {
    if horizon < &Natural::from(100u64) {
        return Err(DensityError::InvalidParameter("horizon must be at least 100".into()));
    }
    let id = WeightFunction::identity();
    let schedule = Schedule::default_geometric(horizon);
    let plain = ratio_trace(&ModulusFunction::identity(), &id, c, &schedule)?;
    let with_f = ratio_trace(f, &id, c, &schedule)?;
    let mut out = BTreeMap::new();
    out.insert(ClassicalIdeal::Z, membership_verdict(&plain, eps, delta)?);
    out.insert(ClassicalIdeal::ZLower, lower_verdict(&plain, eps, delta)?);
    out.insert(ClassicalIdeal::ZF, membership_verdict(&with_f, eps, delta)?);
    out.insert(ClassicalIdeal::ZLowerF, lower_verdict(&with_f, eps, delta)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega_sets::catalog_set;

    fn n(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn example_e_ratio_at_100() {
        let c = catalog_set("sqrt").unwrap();
        let t = ratio_trace(
            &ModulusFunction::log1p(),
            &WeightFunction::identity(),
            &c,
            &Schedule::new(vec![n(100)]),
        )
        .unwrap();
        assert!((t.ratios[0] - 11f64.ln() / 101f64.ln()).abs() < 1e-15);
        assert!((t.ratios[0] - 0.5196).abs() < 1e-4);
    }

    #[test]
    fn trivial_sets() {
        let s = Schedule::default_geometric(&n(10_000));
        let id = ModulusFunction::identity();
        let g = WeightFunction::identity();
        let full = ratio_trace(&id, &g, &OmegaSet::full(), &s).unwrap();
        assert!(full.ratios.iter().all(|&r| r == 1.0));
        let empty = ratio_trace(&id, &g, &OmegaSet::empty(), &s).unwrap();
        assert!(empty.ratios.iter().all(|&r| r == 0.0));
        let v = membership_verdict(&empty, DEFAULT_EPSILON, DEFAULT_DELTA).unwrap();
        assert_eq!(v.verdict, Verdict::LikelyIn);
        assert_eq!(v.tail_sup, 0.0);
    }

    #[test]
    fn zero_weights_are_skipped() {
        let t = ratio_trace(
            &ModulusFunction::identity(),
            &WeightFunction::identity(),
            &OmegaSet::full(),
            &Schedule::dense(0, 3),
        )
        .unwrap();
        assert_eq!(t.skipped, vec![n(0)]);
        assert_eq!(t.skipped_prefix, Some(n(1)));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn example_e_verdicts() {
        let c = catalog_set("sqrt").unwrap();
        let s = Schedule::default_geometric(&n(1_000_000));
        let t = ratio_trace(&ModulusFunction::log1p(), &WeightFunction::identity(), &c, &s).unwrap();
        let v = membership_verdict(&t, 0.1, 0.3).unwrap();
        assert_eq!(v.verdict, Verdict::LikelyOut);
        let w = v.out_witness.unwrap();
        assert!(w.ratios.iter().all(|&r| r >= 0.3 && (r - 0.5).abs() < 0.03));
        let t = ratio_trace(&ModulusFunction::identity(), &WeightFunction::identity(), &c, &s).unwrap();
        assert_eq!(membership_verdict(&t, 0.01, 0.3).unwrap().verdict, Verdict::LikelyIn);
    }

    #[test]
    fn thresholds_are_validated() {
        let t = ratio_trace(
            &ModulusFunction::identity(),
            &WeightFunction::identity(),
            &OmegaSet::full(),
            &Schedule::dense(1, 5),
        )
        .unwrap();
        assert!(matches!(membership_verdict(&t, 0.0, 0.5), Err(DensityError::InvalidParameter(_))));
        assert!(matches!(membership_verdict(&t, 0.3, 0.2), Err(DensityError::InvalidParameter(_))));
    }

    #[test]
    fn classical_example_e() {
        let c = catalog_set("sqrt").unwrap();
        let v = classical_verdicts(&c, &ModulusFunction::log1p(), &n(1_000_000), DEFAULT_EPSILON, DEFAULT_DELTA).unwrap();
        assert_eq!(v[&ClassicalIdeal::Z].verdict, Verdict::LikelyIn);
        assert_eq!(v[&ClassicalIdeal::ZLower].verdict, Verdict::LikelyIn);
        assert_eq!(v[&ClassicalIdeal::ZLowerF].verdict, Verdict::LikelyOut);
        for (set, want) in [(OmegaSet::full(), Verdict::LikelyOut), (OmegaSet::empty(), Verdict::LikelyIn)] {
            let v = classical_verdicts(&set, &ModulusFunction::log1p(), &n(10_000), DEFAULT_EPSILON, DEFAULT_DELTA).unwrap();
            assert!(v.values().all(|x| x.verdict == want));
        }
    }

    #[test]
    fn liminf_for_es1_and_eeu3() {
        let f = ModulusFunction::log1p();
        let g = WeightFunction::es1();
        let s = Schedule::factorial_powers(2..=12);
        let (r, k) = liminf_ratio(&f, &g, &s).unwrap();
        assert_eq!(k, Natural::pow2(Natural::factorial(12)));
        assert!((r - 1.0 / 13.0).abs() < 1e-9);
        let (r, _) = liminf_ratio(&f, &WeightFunction::identity(), &Schedule::default_geometric(&n(1000))).unwrap();
        assert_eq!(r, 1.0);
        let g3 = WeightFunction::eeu3();
        let (r, _) = liminf_ratio(&f, &g3, &g3.sampling_schedule(&n(1_000_000))).unwrap();
        assert!(r >= 0.25);
    }

    #[test]
    fn enumeration_agrees_on_example_e() {
        let c = catalog_set("sqrt").unwrap();
        let v = membership_on_enumeration(
            &ModulusFunction::log1p(),
            &WeightFunction::identity(),
            &c,
            &n(1000),
            DEFAULT_EPSILON,
            DEFAULT_DELTA,
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::LikelyOut);
        let fin = OmegaSet::finite_u64(&[1, 5, 9]);
        let v = membership_on_enumeration(
            &ModulusFunction::log1p(),
            &WeightFunction::es1(),
            &fin,
            &n(1000),
            DEFAULT_EPSILON,
            DEFAULT_DELTA,
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::LikelyIn);
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let c = catalog_set("sqrt").unwrap();
        let t = ratio_trace(
            &ModulusFunction::log1p(),
            &WeightFunction::identity(),
            &c,
            &Schedule::new(vec![n(100)]),
        )
        .unwrap();
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("100,10,"));
        let ratio = line.rsplit(',').next().unwrap();
        assert_eq!(ratio.split('e').next().unwrap().replace('.', "").len(), 17);
        assert_eq!(ratio.parse::<f64>().unwrap(), t.ratios[0]);
    }
}
