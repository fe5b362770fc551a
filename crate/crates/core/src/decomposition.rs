//! The interval decomposition `k_m = min{k : f(g(k)) >= 2^m}`, the submeasures
//! `φ_m(C) = f(|C ∩ [k_m, k_{m+1})|) / f(g(k_m))`, and boundedness criteria.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::density::{fmt_real, verdict_from_samples, DensityError, LimitKind, MembershipVerdict};
use crate::functions::{ModulusFunction, WeightFunction};
use crate::natural::Natural;
use crate::omega_sets::{OmegaSet, SetError};
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error("modulus `{0}` is bounded")]
    BoundedModulus(String),
    #[error("weight is not monotone: {0}")]
    NotMonotone(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {m} outside the stored range [{start}, {end})")]
    IndexOutOfRange { m: usize, start: usize, end: usize },
    #[error("no submeasures in the stored range")]
    EmptyRange,
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Indices above this are not searched unless configured otherwise.
pub fn default_index_ceiling() -> Natural {
    Natural::pow2(256u32)
}

#[derive(Debug, Clone)]
pub struct DecompositionConfig {
    pub index_ceiling: Natural,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig {
            index_ceiling: default_index_ceiling(),
        }
    }
}

/// Why fewer than the requested `m` were built.
#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    pub requested_m_max: usize,
    pub reached_m_max: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub f: ModulusFunction,
    pub g: WeightFunction,
    /// `k_0 = 0, k_1, ..., k_{m_max}`, nondecreasing.
    pub k_seq: Vec<Natural>,
    /// `g(k_m)`.
    pub g_at_k: Vec<Natural>,
    /// Submeasures `φ_m` exist for `start_m <= m < m_max`.
    pub m_max: usize,
    pub start_m: usize,
    pub truncation: Option<Truncation>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubmeasureValue {
    pub m: usize,
    pub value: f64,
}

pub fn build_decomposition(
    f: &ModulusFunction,
    g: &WeightFunction,
    m_max: usize,
) -> Result<Decomposition, DecompositionError> {
    build_decomposition_with(f, g, m_max, &DecompositionConfig::default())
}

/// Exponential-then-binary search for each `k_m`, checking along the way that
/// `g` does not decrease between probes.
pub fn build_decomposition_with(
    f: &ModulusFunction,
    g: &WeightFunction,
    m_max: usize,
    config: &DecompositionConfig,
) -> Result<Decomposition, DecompositionError> {
    if !f.is_unbounded() {
        return Err(DecompositionError::BoundedModulus(f.name().to_string()));
    }
    if !g.is_nondecreasing() {
        return Err(DecompositionError::NotMonotone(format!(
            "`{}` is not flagged nondecreasing",
            g.name()
        )));
    }
    if m_max == 0 {
        return Err(DecompositionError::InvalidParameter("m_max must be at least 1".into()));
    }
    let mut k_seq = vec![Natural::zero()];
    let mut g_at_k = vec![g.eval(&Natural::zero())];
    let mut truncation = None;
    for m in 1..=m_max {
        let lo = k_seq.last().expect("k_0 present").clone();
        let g_lo = g_at_k.last().expect("g(k_0) present").clone();
        match search_k(f, g, m as u32, lo, g_lo, &config.index_ceiling)? {
            Some((k, gk)) => {
                k_seq.push(k);
                g_at_k.push(gk);
            }
            None => {
                truncation = Some(Truncation {
                    requested_m_max: m_max,
                    reached_m_max: m - 1,
                    reason: format!("k_{m} exceeds the index ceiling {}", config.index_ceiling),
                });
                break;
            }
        }
    }
    let reached = k_seq.len() - 1;
    let start_m = if f.eval_big(&g_at_k[0]) > 0.0 { 0 } else { 1 };
    Ok(Decomposition {
        f: f.clone(),
        g: g.clone(),
        k_seq,
        g_at_k,
        m_max: reached,
        start_m,
        truncation,
    })
}

fn search_k(
    f: &ModulusFunction,
    g: &WeightFunction,
    m: u32,
    lo: Natural,
    g_lo: Natural,
    ceiling: &Natural,
) -> Result<Option<(Natural, Natural)>, DecompositionError> {
    if f.at_least_pow2(&g_lo, m) {
        return Ok(Some((lo, g_lo)));
    }
    let monotone = |a: &Natural, ga: &Natural, b: &Natural, gb: &Natural| {
        if gb < ga {
            Err(DecompositionError::NotMonotone(format!(
                "g({b}) = {gb} < g({a}) = {ga}"
            )))
        } else {
            Ok(())
        }
    };
    // invariant: f(g(lo)) < 2^m
    let (mut lo, mut g_lo) = (lo, g_lo);
    let mut step = Natural::one();
    let (mut hi, mut g_hi);
    loop {
        hi = &lo + &step;
        if &hi > ceiling {
            return Ok(None);
        }
        g_hi = g.eval(&hi);
        monotone(&lo, &g_lo, &hi, &g_hi)?;
        if f.at_least_pow2(&g_hi, m) {
            break;
        }
        lo = hi;
        g_lo = g_hi;
        step = step.shl(1);
    }
    while (&hi - &lo) > Natural::one() {
        let mid = (&lo + &hi).shr_floor(1);
        let g_mid = g.eval(&mid);
        monotone(&lo, &g_lo, &mid, &g_mid)?;
        monotone(&mid, &g_mid, &hi, &g_hi)?;
        if f.at_least_pow2(&g_mid, m) {
            hi = mid;
            g_hi = g_mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    Ok(Some((hi, g_hi)))
}

impl Decomposition {
    fn check_m(&self, m: usize) -> Result<(), DecompositionError> {
        if m < self.start_m || m >= self.m_max {
            return Err(DecompositionError::IndexOutOfRange {
                m,
                start: self.start_m,
                end: self.m_max,
            });
        }
        Ok(())
    }

    pub fn k(&self, m: usize) -> &Natural {
        &self.k_seq[m]
    }

    /// `f(g(k_m))`.
    pub fn f_g(&self, m: usize) -> f64 {
        self.f.eval_big(&self.g_at_k[m])
    }

    /// `φ_m(C)` with an exact count on `[k_m, k_{m+1})`.
    pub fn phi(&self, m: usize, c: &OmegaSet) -> Result<SubmeasureValue, DecompositionError> {
        self.check_m(m)?;
        let count = &c.count(&self.k_seq[m + 1])? - &c.count(&self.k_seq[m])?;
        Ok(SubmeasureValue {
            m,
            value: self.ratio_over_fg(&count, m),
        })
    }

    /// `φ_m(ω) = f(k_{m+1} - k_m) / f(g(k_m))`.
    pub fn phi_omega(&self, m: usize) -> Result<SubmeasureValue, DecompositionError> {
        self.check_m(m)?;
        let len = &self.k_seq[m + 1] - &self.k_seq[m];
        Ok(SubmeasureValue {
            m,
            value: self.ratio_over_fg(&len, m),
        })
    }

    fn ratio_over_fg(&self, count: &Natural, m: usize) -> f64 {
        self.f
            .ratio(count, &self.g_at_k[m])
            .expect("f(g(k_m)) > 0 from start_m on")
    }

    pub fn stored_range(&self) -> std::ops::Range<usize> {
        self.start_m..self.m_max
    }

    /// All `k_m` and `k_m - 1` (for `k_m > 0`).
    pub fn anchor_points(&self) -> Vec<Natural> {
        let mut v = Vec::new();
        for k in &self.k_seq {
            if !k.is_zero() {
                v.push(k - 1u64);
            }
            v.push(k.clone());
        }
        v
    }

    /// CSV with columns `m,k_m,phi_omega,phi_C`.
    pub fn write_csv<W: Write>(&self, c: &OmegaSet, mut w: W) -> Result<(), DecompositionError> {
        let io = |e: std::io::Error| DecompositionError::InvalidParameter(format!("write failed: {e}"));
        writeln!(w, "m,k_m,phi_omega,phi_C").map_err(io)?;
        for m in self.stored_range() {
            let po = self.phi_omega(m)?.value;
            let pc = self.phi(m, c)?.value;
            writeln!(w, "{m},{},{},{}", self.k_seq[m], fmt_real(po), fmt_real(pc)).map_err(io)?;
        }
        Ok(())
    }
}

/// Membership in `Z_g(f)` read off the sequence `φ_m(C)`, indexed by `m`.
pub fn decomposition_verdict(
    d: &Decomposition,
    c: &OmegaSet,
    eps: f64,
    delta: f64,
) -> Result<MembershipVerdict, DecompositionError> {
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    for m in d.stored_range() {
        idx.push(Natural::from(m));
        vals.push(d.phi(m, c)?.value);
    }
    if idx.is_empty() {
        return Err(DecompositionError::EmptyRange);
    }
    Ok(verdict_from_samples(&idx, &vals, eps, delta, LimitKind::Limsup)?)
}

/// `max_m φ_m(ω)` over the stored range, with the maximizing `m`.
pub fn sup_phi_omega(d: &Decomposition) -> Result<(f64, usize), DecompositionError> {
    let mut best: Option<(f64, usize)> = None;
    for m in d.stored_range() {
        let v = d.phi_omega(m)?.value;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, m));
        }
    }
    best.ok_or(DecompositionError::EmptyRange)
}

/// `f(|(f∘g)^{-1}([2^m, 2^{m+1}))|) / 2^m`; for monotone `g` the preimage is
/// `[k_m, k_{m+1})`.
pub fn preimage_count_criterion(d: &Decomposition, m: usize) -> Result<f64, DecompositionError> {
    if m >= d.m_max {
        return Err(DecompositionError::IndexOutOfRange {
            m,
            start: 0,
            end: d.m_max,
        });
    }
    let len = &d.k_seq[m + 1] - &d.k_seq[m];
    let v = d.f.eval_big(&len);
    Ok(if v.is_finite() {
        v / 2f64.powi(m as i32)
    } else {
        (d.f.ln_eval_big(&len) - m as f64 * std::f64::consts::LN_2).exp()
    })
}

/// `sup f(k)/f(g(k))` over the schedule, skipping `f(g(k)) = 0`.
pub fn ratio_bounded_on(f: &ModulusFunction, g: &WeightFunction, schedule: &Schedule) -> Option<(f64, Natural)> {
    use rayon::prelude::*;
    schedule
        .points()
        .par_iter()
        .filter_map(|k| f.ratio(k, &g.eval(k)).map(|r| (r, k.clone())))
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

/// `sup f(k)/f(g(k))` over the geometric grid and the weight's breakpoints up
/// to `horizon`.
pub fn ratio_bounded_criterion(f: &ModulusFunction, g: &WeightFunction, horizon: &Natural) -> Option<(f64, Natural)> {
    ratio_bounded_on(f, g, &g.sampling_schedule(horizon))
}

/// `f(g(k + floor(L f(g(k))))) / f(g(k))`, `None` when `f(g(k)) = 0`.
pub fn shifted_ratio(f: &ModulusFunction, g: &WeightFunction, k: &Natural, l: f64) -> Option<f64> {
    let gk = g.eval(k);
    let fg = f.eval_big(&gk);
    if fg <= 0.0 {
        return None;
    }
    let scaled = l * fg;
    let shift = if scaled.is_finite() {
        Natural::from_f64_floor(scaled).expect("finite shift")
    } else {
        Natural::from_ln(l.ln() + f.ln_eval_big(&gk)).expect("finite log shift")
    };
    f.ratio(&g.eval(&(k + &shift)), &gk)
}

fn growth_points(g: &WeightFunction, horizon: &Natural) -> Schedule {
    g.sampling_schedule(horizon)
}

/// Grid points where `f(g(k + floor(L f(g(k))))) / f(g(k)) > M` FAILS.
pub fn growth_criterion_pd3(
    f: &ModulusFunction,
    g: &WeightFunction,
    big_m: f64,
    l: f64,
    horizon: &Natural,
) -> Result<Vec<Natural>, DecompositionError> {
    if !(big_m > 0.0 && l > 0.0) {
        return Err(DecompositionError::InvalidParameter(format!(
            "M and L must be positive, got M = {big_m}, L = {l}"
        )));
    }
    Ok(growth_points(g, horizon)
        .points()
        .iter()
        .filter(|k| shifted_ratio(f, g, k, l).is_some_and(|r| r <= big_m))
        .cloned()
        .collect())
}

/// Grid points where `f(g(k + floor(ε f(g(k))))) / f(g(k)) > M`.
pub fn ts1_boundedness_test(
    f: &ModulusFunction,
    g: &WeightFunction,
    big_m: f64,
    eps: f64,
    horizon: &Natural,
) -> Result<Vec<Natural>, DecompositionError> {
    if !(big_m > 0.0 && eps > 0.0) {
        return Err(DecompositionError::InvalidParameter(format!(
            "M and ε must be positive, got M = {big_m}, ε = {eps}"
        )));
    }
    Ok(growth_points(g, horizon)
        .points()
        .iter()
        .filter(|k| shifted_ratio(f, g, k, eps).is_some_and(|r| r > big_m))
        .cloned()
        .collect())
}

/// `2^(m!)` as an exponent helper for callers building ES1 indices.
pub fn factorial_power(m: u64) -> Natural {
    Natural::pow2(Natural::factorial(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Verdict;
    use crate::omega_sets::catalog_set;

    fn n(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn identity_identity_is_dyadic() {
        let d = build_decomposition(&ModulusFunction::identity(), &WeightFunction::identity(), 20).unwrap();
        assert_eq!(d.k_seq[0], n(0));
        for m in 1..=20 {
            assert_eq!(d.k_seq[m], n(1 << m));
        }
        assert_eq!(d.start_m, 1);
        for m in d.stored_range() {
            assert_eq!(d.phi_omega(m).unwrap().value, 1.0);
        }
        assert_eq!(sup_phi_omega(&d).unwrap().0, 1.0);
        assert_eq!(preimage_count_criterion(&d, 3).unwrap(), 1.0);
    }

    #[test]
    fn doubled_weight_and_log() {
        let g2 = WeightFunction::scaled(2.0, &WeightFunction::identity()).unwrap();
        let d = build_decomposition(&ModulusFunction::identity(), &g2, 10).unwrap();
        for m in 2..=10 {
            assert_eq!(d.k_seq[m], n(1 << (m - 1)));
        }
        let d = build_decomposition(&ModulusFunction::log1p(), &WeightFunction::identity(), 3).unwrap();
        assert_eq!(d.k_seq[1], n(7));
    }

    #[test]
    fn exact_beyond_f64() {
        let d = build_decomposition(&ModulusFunction::identity(), &WeightFunction::identity(), 200)
            .unwrap();
        assert_eq!(d.k_seq[200], Natural::pow2(200u32));
    }

    #[test]
    fn ceiling_truncates() {
        let d = build_decomposition(&ModulusFunction::log1p(), &WeightFunction::identity(), 12).unwrap();
        // k_m ~ e^(2^m) passes 2^256 at m = 8
        assert_eq!(d.m_max, 7);
        assert!(d.truncation.is_some());
    }

    #[test]
    fn bounded_and_out_of_range() {
        assert!(matches!(
            build_decomposition(&ModulusFunction::bounded_ratio(), &WeightFunction::identity(), 3),
            Err(DecompositionError::BoundedModulus(_))
        ));
        let d = build_decomposition(&ModulusFunction::identity(), &WeightFunction::identity(), 4).unwrap();
        assert!(matches!(d.phi(0, &OmegaSet::full()), Err(DecompositionError::IndexOutOfRange { .. })));
        assert!(matches!(d.phi(4, &OmegaSet::full()), Err(DecompositionError::IndexOutOfRange { .. })));
    }

    #[test]
    fn sandwich_bound_holds() {
        for (f, g) in [
            (ModulusFunction::log1p(), WeightFunction::eeu()),
            (ModulusFunction::identity(), WeightFunction::eeu3()),
            (ModulusFunction::power(0.5).unwrap(), WeightFunction::identity()),
        ] {
            let d = build_decomposition(&f, &g, 8).unwrap();
            for m in 1..d.m_max {
                let before = &d.k_seq[m + 1] - 1u64;
                assert!(!f.at_least_pow2(&g.eval(&before), (m + 1) as u32));
                assert!(f.ratio(&g.eval(&before), &d.g_at_k[m]).unwrap() < 2.0);
            }
        }
    }

    #[test]
    fn omega_is_out_under_log_eeu() {
        let d = build_decomposition(&ModulusFunction::log1p(), &WeightFunction::eeu(), 8).unwrap();
        let v = decomposition_verdict(&d, &OmegaSet::full(), 0.05, 0.25).unwrap();
        assert_eq!(v.verdict, Verdict::LikelyOut);
        let v = decomposition_verdict(&d, &OmegaSet::empty(), 0.05, 0.25).unwrap();
        assert_eq!(v.verdict, Verdict::LikelyIn);
    }

    #[test]
    fn growth_criteria() {
        let f = ModulusFunction::log1p();
        let eeu = WeightFunction::eeu();
        let bad = growth_criterion_pd3(&f, &eeu, 2.0, 1.0, &n(1_000_000)).unwrap();
        for m in 4..=9u64 {
            assert!(bad.contains(&Natural::from(Natural::factorial(m))), "m = {m}");
        }
        let id = ModulusFunction::identity();
        let gi = WeightFunction::identity();
        assert!(growth_criterion_pd3(&id, &gi, 2.0, 3.0, &n(1_000_000)).unwrap().is_empty());
        assert!(growth_criterion_pd3(&id, &gi, 0.0, 3.0, &n(10)).is_err());
        assert!(ts1_boundedness_test(&id, &gi, 3.0, 1.0, &n(1_000_000)).unwrap().is_empty());
    }

    #[test]
    fn es1_breaks_ts1_bound() {
        let f = ModulusFunction::log1p();
        let g = WeightFunction::es1();
        let horizon = factorial_power(22);
        let v = ts1_boundedness_test(&f, &g, 10.0, 1.0, &horizon).unwrap();
        let k21 = &factorial_power(21) - 1u64;
        assert!(v.contains(&k21));
        let r = shifted_ratio(&f, &g, &k21, 1.0).unwrap();
        assert!(r > 11.0);
    }

    #[test]
    fn csv_export() {
        let d = build_decomposition(&ModulusFunction::identity(), &WeightFunction::identity(), 3).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&catalog_set("evens").unwrap(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 3);
        assert!(s.lines().nth(1).unwrap().starts_with("1,2,"));
    }
}
