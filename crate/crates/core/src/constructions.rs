//! Explicit witnesses: the LO1 interval union, the P1 step weight, the TS1
//! weight `h` and the PS1 family `g_α`, and the Erdős–Ulam measure ideals.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::density::{verdict_from_samples, DensityError, LimitKind, MembershipVerdict};
use crate::functions::{ModulusFunction, WeightFunction, WeightRule, DEFAULT_BREAKPOINTS};
use crate::natural::Natural;
use crate::omega_sets::{
    BlockLength, BlockSide, OmegaSet, PowerBlocks, PowerProfile, Run, SetError, SqrtProfile,
};
use crate::schedule::{geometric_cap, Schedule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("no subsequence with f(k)/f(g(k)) -> 0 on the scan grid (minimum ratio {min_ratio})")]
    NoVanishingSubsequence { min_ratio: f64 },
    #[error("anchor sequence is empty")]
    EmptyAnchors,
    #[error("anchors not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("no anchors found: {0}")]
    AnchorsNotFound(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Ratio below which a scan grid is taken to show `liminf f(k)/f(g(k)) = 0`.
pub const VANISHING_THRESHOLD: f64 = 0.05;

/// `C` with `|C ∩ [0, k-1]| = floor(sqrt(k))`.
pub fn example_e_set() -> OmegaSet {
    OmegaSet::profile_set("example_e", Arc::new(SqrtProfile)).expect("sqrt profile is valid")
}

/// `|C ∩ [0, k-1]| = floor(k^(α/2))`.
pub fn eec_case1_set(alpha: f64) -> Result<OmegaSet, ConstructionError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ConstructionError::InvalidParameter(format!("α must lie in (0, 1), got {alpha}")));
    }
    let profile = PowerProfile::from_f64(alpha / 2.0)?;
    Ok(OmegaSet::profile_set(&format!("eec1({alpha})"), Arc::new(profile))?)
}

/// Geometric grid up to the cap together with all of `g`'s breakpoints.
pub fn scan_grid(g: &WeightFunction) -> Schedule {
    Schedule::default_geometric(&geometric_cap()).union(&Schedule::new(g.breakpoints(DEFAULT_BREAKPOINTS, None)))
}

#[derive(Debug, Clone)]
pub struct Lo1Witness {
    /// `∪ [k_m, 2k_m)`
    pub set: OmegaSet,
    pub anchors: Vec<Natural>,
    /// `f(k_m) / f(g(k_m))`
    pub anchor_ratios: Vec<f64>,
}

impl Lo1Witness {
    /// `k_m - 1, k_m, 2k_m - 1, 2k_m` for every anchor.
    pub fn anchor_schedule(&self) -> Schedule {
        let mut pts = Vec::new();
        for k in &self.anchors {
            let d = k.shl(1);
            pts.push(k - 1u64);
            pts.push(k.clone());
            pts.push(&d - 1u64);
            pts.push(d);
        }
        Schedule::new(pts)
    }

    /// End of the last interval.
    pub fn horizon(&self) -> Natural {
        self.anchors.last().expect("nonempty").shl(1)
    }
}

/// Records of `f(k)/f(g(k))` below 1/2 on the scan grid, chosen greedily with
/// `k_{m+1} > 2 k_m`, at most `max_anchors` of them.
pub fn lo1_witness(
    f: &ModulusFunction,
    g: &WeightFunction,
    max_anchors: usize,
) -> Result<Lo1Witness, ConstructionError> {
    if max_anchors == 0 {
        return Err(ConstructionError::InvalidParameter("need at least one anchor".into()));
    }
    let grid = scan_grid(g);
    let ratios: Vec<Option<f64>> = {
        use rayon::prelude::*;
        grid.points().par_iter().map(|k| f.ratio(k, &g.eval(k))).collect()
    };
    let min_ratio = ratios.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if !(min_ratio < VANISHING_THRESHOLD) {
        return Err(ConstructionError::NoVanishingSubsequence { min_ratio });
    }
    let mut anchors: Vec<Natural> = Vec::new();
    let mut anchor_ratios: Vec<f64> = Vec::new();
    for (k, r) in grid.points().iter().zip(&ratios) {
        let Some(r) = *r else { continue };
        if k.is_zero() || r >= 0.5 {
            continue;
        }
        if let (Some(last), Some(&lr)) = (anchors.last(), anchor_ratios.last()) {
            if r >= lr || k <= &last.shl(1) {
                continue;
            }
        }
        anchors.push(k.clone());
        anchor_ratios.push(r);
        if anchors.len() == max_anchors {
            break;
        }
    }
    let runs: Vec<Run> = anchors.iter().map(|k| (k.clone(), k.shl(1))).collect();
    let set = OmegaSet::intervals(&format!("lo1({},{})", f.name(), g.name()), runs)?;
    Ok(Lo1Witness {
        set,
        anchors,
        anchor_ratios,
    })
}

fn check_anchors(anchors: &[Natural]) -> Result<(), ConstructionError> {
    if anchors.is_empty() {
        return Err(ConstructionError::EmptyAnchors);
    }
    for (i, w) in anchors.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(ConstructionError::NotIncreasing(i + 1));
        }
    }
    Ok(())
}

fn sorted_points(mut v: Vec<Natural>, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
    if let Some(l) = limit {
        v.retain(|k| k <= l);
    }
    v.sort();
    v.dedup();
    v.truncate(max_points);
    v
}

/// Index of the last anchor `<= k`.
fn block_of(anchors: &[Natural], k: &Natural) -> Option<usize> {
    anchors.partition_point(|a| a <= k).checked_sub(1)
}

struct StepRule {
    anchors: Vec<Natural>,
}

impl WeightRule for StepRule {
    fn eval(&self, k: &Natural) -> Natural {
        let i = self.anchors.partition_point(|a| a < k);
        self.anchors.get(i).cloned().unwrap_or_else(|| k.clone())
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let pts = self.anchors.iter().flat_map(|a| [a.clone(), a + 1u64]).collect();
        sorted_points(pts, max_points, limit)
    }
}

/// `g(k) = min{k_m : k <= k_m}`, and `g(k) = k` past the last anchor.
pub fn p1_weight(anchors: &[Natural]) -> Result<WeightFunction, ConstructionError> {
    check_anchors(anchors)?;
    Ok(WeightFunction::from_rule(
        "p1",
        Arc::new(StepRule {
            anchors: anchors.to_vec(),
        }),
        true,
    ))
}

/// Candidate points for the TS1 anchor search.
#[derive(Debug, Clone)]
pub struct Ts1Search {
    pub candidates: Schedule,
    pub max_anchors: usize,
}

impl Ts1Search {
    pub fn for_weight(g: &WeightFunction, max_anchors: usize) -> Self {
        Ts1Search {
            candidates: scan_grid(g),
            max_anchors,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ts1Weight {
    pub h: WeightFunction,
    /// `k_m` for `m = first_m, first_m + 1, ...`
    pub anchors: Vec<Natural>,
    /// `floor(f(g(k_m)) / 2^m)`
    pub lengths: Vec<Natural>,
    pub first_m: usize,
    /// `f(h(k_m)) / f(g(k_m))`
    pub anchor_ratios: Vec<f64>,
}

impl Ts1Weight {
    /// The intervals `I_m = [k_m, k_m + L_m]`.
    pub fn intervals(&self) -> Vec<Run> {
        self.anchors
            .iter()
            .zip(&self.lengths)
            .map(|(k, l)| (k.clone(), &(k + l) + 1u64))
            .collect()
    }

    /// `k_m - 1, k_m, k_m + L_m, k_m + L_m + 1`: where `h` and `g` part ways.
    pub fn interval_points(&self) -> Schedule {
        let mut pts = Vec::new();
        for (a, e) in self.intervals() {
            if !a.is_zero() {
                pts.push(&a - 1u64);
            }
            pts.push(&e - 1u64);
            pts.push(a);
            pts.push(e);
        }
        Schedule::new(pts)
    }
}

/// `floor(f(x) / 2^m)`; through logarithms once `f(x)` leaves f64 range, so
/// only approximate there.
fn scaled_length(f: &ModulusFunction, x: &Natural, m: usize) -> Natural {
    let v = f.eval_big(x);
    let scaled = v / 2f64.powi(m as i32);
    if v.is_finite() && scaled.is_finite() {
        Natural::from_f64_floor(scaled).expect("finite")
    } else {
        Natural::from_ln(f.ln_eval_big(x) - m as f64 * std::f64::consts::LN_2).expect("finite log")
    }
}

struct Ts1Rule {
    g: WeightFunction,
    anchors: Vec<Natural>,
    ends: Vec<Natural>,
    values: Vec<Natural>,
}

impl WeightRule for Ts1Rule {
    fn eval(&self, k: &Natural) -> Natural {
        match block_of(&self.anchors, k) {
            Some(i) if k <= &self.ends[i] => self.values[i].clone(),
            _ => self.g.eval(k),
        }
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut pts = self.g.breakpoints(max_points, limit);
        for (a, e) in self.anchors.iter().zip(&self.ends) {
            if !a.is_zero() {
                pts.push(a - 1u64);
            }
            pts.extend([a.clone(), e.clone(), e + 1u64]);
        }
        sorted_points(pts, max_points, limit)
    }
}

/// Anchors from `m = 2` with `f(g(k_m + L_m)) / f(g(k_m)) > m`, where
/// `L_m = floor(f(g(k_m)) / 2^m)`, and `k_{m+1} > k_m + L_m`; then
/// `h = g(k_m + L_m)` on `I_m` and `h = g` elsewhere.
pub fn ts1_weight(
    f: &ModulusFunction,
    g: &WeightFunction,
    search: &Ts1Search,
) -> Result<Ts1Weight, ConstructionError> {
    if !g.is_nondecreasing() {
        return Err(ConstructionError::InvalidParameter(format!("`{}` is not nondecreasing", g.name())));
    }
    let first_m = 2usize;
    let mut anchors: Vec<Natural> = Vec::new();
    let mut lengths: Vec<Natural> = Vec::new();
    let mut ratios = Vec::new();
    for k in search.candidates.points() {
        if anchors.len() >= search.max_anchors {
            break;
        }
        if let (Some(a), Some(l)) = (anchors.last(), lengths.last()) {
            if k <= &(a + l) {
                continue;
            }
        }
        let m = first_m + anchors.len();
        let gk = g.eval(k);
        if f.eval_big(&gk) <= 0.0 {
            continue;
        }
        let l = scaled_length(f, &gk, m);
        let Some(r) = f.ratio(&g.eval(&(k + &l)), &gk) else { continue };
        if r > m as f64 {
            anchors.push(k.clone());
            lengths.push(l);
            ratios.push(r);
        }
    }
    if anchors.is_empty() {
        return Err(ConstructionError::AnchorsNotFound(format!(
            "f(g(k + floor(f(g(k))/4))) / f(g(k)) <= 2 at every candidate for ({}, {})",
            f.name(),
            g.name()
        )));
    }
    let ends: Vec<Natural> = anchors.iter().zip(&lengths).map(|(a, l)| a + l).collect();
    let values: Vec<Natural> = ends.iter().map(|e| g.eval(e)).collect();
    let h = WeightFunction::from_rule(
        &format!("ts1({},{})", f.name(), g.name()),
        Arc::new(Ts1Rule {
            g: g.clone(),
            anchors: anchors.clone(),
            ends,
            values,
        }),
        true,
    );
    let anchor_ratios = anchors
        .iter()
        .zip(&ratios)
        .map(|(k, &r)| f.ratio(&h.eval(k), &g.eval(k)).unwrap_or(r))
        .collect();
    Ok(Ts1Weight {
        h,
        anchors,
        lengths,
        first_m,
        anchor_ratios,
    })
}

struct Ps1Rule {
    g: WeightFunction,
    h: WeightFunction,
    anchors: Vec<Natural>,
    bits: Vec<bool>,
}

impl WeightRule for Ps1Rule {
    fn eval(&self, k: &Natural) -> Natural {
        let gk = self.g.eval(k);
        match block_of(&self.anchors, k) {
            Some(i) if self.bits.get(i).copied().unwrap_or(false) => gk.max(self.h.eval(k)),
            _ => gk,
        }
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut pts = self.g.breakpoints(max_points, limit);
        pts.extend(self.h.breakpoints(max_points, limit));
        for a in &self.anchors {
            if !a.is_zero() {
                pts.push(a - 1u64);
            }
            pts.push(a.clone());
        }
        sorted_points(pts, max_points, limit)
    }
}

/// One `g_α` per bit vector: `max(g, h)` on `[k_j, k_{j+1})` when `α_j = 1`,
/// `g` elsewhere (including past the supplied bits).
pub fn ps1_family(
    g: &WeightFunction,
    h: &WeightFunction,
    anchors: &[Natural],
    bit_vectors: &[Vec<bool>],
) -> Result<Vec<WeightFunction>, ConstructionError> {
    check_anchors(anchors)?;
    Ok(bit_vectors
        .iter()
        .map(|bits| {
            let code: String = bits.iter().take(16).map(|&b| if b { '1' } else { '0' }).collect();
            WeightFunction::from_rule(
                &format!("ps1[{code}{}]", if bits.len() > 16 { ".." } else { "" }),
                Arc::new(Ps1Rule {
                    g: g.clone(),
                    h: h.clone(),
                    anchors: anchors.to_vec(),
                    bits: bits.clone(),
                }),
                g.is_nondecreasing() && h.is_nondecreasing(),
            )
        })
        .collect())
}

/// `members` bit vectors of length `blocks` such that any two differ in both
/// directions on every period of `2 * ceil(log2(members))` blocks: slot `2b`
/// carries bit `b` of the member index and slot `2b + 1` its complement.
pub fn complementary_codes(members: usize, blocks: usize) -> Vec<Vec<bool>> {
    let width = (usize::BITS - members.saturating_sub(1).leading_zeros()).max(1) as usize;
    (0..members)
        .map(|i| {
            (0..blocks)
                .map(|j| {
                    let slot = j % (2 * width);
                    let bit = (i >> (slot / 2)) & 1 == 1;
                    if slot.is_multiple_of(2) {
                        bit
                    } else {
                        !bit
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceWitness {
    pub block: usize,
    pub k: Natural,
    pub ratio: f64,
}

/// Anchors where `f(a(k)) / f(b(k)) > bound`.
pub fn divergence_witnesses(
    f: &ModulusFunction,
    a: &WeightFunction,
    b: &WeightFunction,
    anchors: &[Natural],
    bound: f64,
) -> Vec<DivergenceWitness> {
    anchors
        .iter()
        .enumerate()
        .filter_map(|(block, k)| {
            let r = f.ratio(&a.eval(k), &b.eval(k))?;
            (r > bound).then(|| DivergenceWitness {
                block,
                k: k.clone(),
                ratio: r,
            })
        })
        .collect()
}

/// Which Erdős–Ulam measure family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MeasureKind {
    /// `D_j = [k_j, k_j + j!)`, `k_0 = 1`, `k_{j+1} = k_j + j! + (j+1)!`, atom `1/j!`, restricted to `L`.
    Pd6(Vec<u64>),
    /// `D_m = [2^m, 2^m + m)`, atom `1/m`.
    Eeu4,
    /// `D_m = [2^m, 2^m + m^2)`, atom `1/m`.
    Eeu5,
}

#[derive(Debug, Clone)]
pub struct MeasureIdealSpec {
    pub kind: MeasureKind,
}

pub fn eu_measure_ideal(kind: MeasureKind) -> MeasureIdealSpec {
    MeasureIdealSpec { kind }
}

impl MeasureIdealSpec {
    /// Smallest index with a nonempty support.
    pub fn first_index(&self) -> u64 {
        match self.kind {
            MeasureKind::Pd6(_) => 0,
            MeasureKind::Eeu4 | MeasureKind::Eeu5 => 1,
        }
    }

    pub fn selected(&self, j: u64) -> bool {
        match &self.kind {
            MeasureKind::Pd6(l) => l.contains(&j),
            _ => j >= self.first_index(),
        }
    }

    /// `D_j` as a half-open run.
    pub fn support(&self, j: u64) -> Option<Run> {
        if j < self.first_index() {
            return None;
        }
        match self.kind {
            MeasureKind::Pd6(_) => {
                let mut k = BigUint::one();
                for i in 0..j {
                    k += Natural::factorial(i) + Natural::factorial(i + 1);
                }
                let end = &k + Natural::factorial(j);
                Some((Natural::from(k), Natural::from(end)))
            }
            MeasureKind::Eeu4 | MeasureKind::Eeu5 => {
                let p = Natural::pow2(BigUint::from(j));
                let len = if self.kind == MeasureKind::Eeu4 { j } else { j * j };
                let e = &p + len;
                Some((p, e))
            }
        }
    }

    pub fn atom(&self, j: u64) -> BigRational {
        let den = match self.kind {
            MeasureKind::Pd6(_) => Natural::factorial(j),
            MeasureKind::Eeu4 | MeasureKind::Eeu5 => BigUint::from(j),
        };
        BigRational::new(1.into(), den.into())
    }

    /// `μ_j(ω) = atom_j · |D_j|`.
    pub fn mass(&self, j: u64) -> Option<BigRational> {
        let (s, e) = self.support(j)?;
        let len = (&e - &s).to_biguint()?;
        Some(self.atom(j) * BigRational::from_integer(len.into()))
    }

    /// `μ_j(C) = atom_j · |C ∩ D_j|`, exact.
    pub fn mu(&self, j: u64, c: &OmegaSet) -> Result<BigRational, SetError> {
        let Some((s, e)) = self.support(j) else {
            return Ok(BigRational::zero());
        };
        let n = &c.count(&e)? - &c.count(&s)?;
        let n = n
            .to_biguint()
            .ok_or_else(|| SetError::RepresentationTooWeak("support count beyond exact range".into()))?;
        Ok(self.atom(j) * BigRational::from_integer(n.into()))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::INFINITY)
}

/// Verdict for `Exh(sup_{l ∈ L} μ_l)`: the samples are the tail suprema
/// `s_j = max{μ_l(C) : l ∈ L, j <= l <= j_max}`.
pub fn exh_verdict(
    spec: &MeasureIdealSpec,
    c: &OmegaSet,
    j_max: u64,
    eps: f64,
    delta: f64,
) -> Result<MembershipVerdict, ConstructionError> {
    if j_max < 2 {
        return Err(ConstructionError::InvalidParameter(format!("j_max must be at least 2, got {j_max}")));
    }
    let first = spec.first_index();
    let mut mus = Vec::new();
    for j in first..=j_max {
        mus.push(if spec.selected(j) {
            rational_to_f64(&spec.mu(j, c)?)
        } else {
            0.0
        });
    }
    let mut sups = vec![0.0; mus.len()];
    let mut run = 0.0f64;
    for i in (0..mus.len()).rev() {
        run = run.max(mus[i]);
        sups[i] = run;
    }
    let idx: Vec<Natural> = (first..=j_max).map(Natural::from).collect();
    Ok(verdict_from_samples(&idx, &sups, eps, delta, LimitKind::Limsup)?)
}

/// The EEU4 sets `C = ∪_{m>=1} [2^m, 2^m + m)` and `D = ∪_{m>=1} [2^m - m, 2^m)`.
pub fn eeu4_sets() -> (OmegaSet, OmegaSet) {
    power_block_pair("eeu4", 1, BlockLength::Linear)
}

/// `C = ∪ [2^m, 2^m + m^2)` and `D = ∪ [2^m - m^2, 2^m)` from `m = 7`, where
/// the blocks stop overlapping.
pub fn eeu5_sets() -> (OmegaSet, OmegaSet) {
    power_block_pair("eeu5", 7, BlockLength::Square)
}

fn power_block_pair(name: &str, first_m: u64, length: BlockLength) -> (OmegaSet, OmegaSet) {
    let mk = |side, tag: &str| {
        OmegaSet::interval_union(
            &format!("{name}_{tag}"),
            Arc::new(PowerBlocks {
                first_m,
                length,
                side,
            }),
        )
        .expect("power blocks are disjoint")
    };
    (mk(BlockSide::After, "c"), mk(BlockSide::Before, "d"))
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub holds: bool,
    /// `(k, |B ∩ [0,k-1]|, |C ∩ [0,k-1]|)` at the first failure.
    pub first_violation: Option<(u64, u64, u64)>,
    pub horizon: u64,
}

/// Whether `|B ∩ [0,k-1]| <= |C ∩ [0,k-1]|` for every `k <= horizon`.
pub fn increasing_dominance_check(
    b: &OmegaSet,
    c: &OmegaSet,
    horizon: u64,
) -> Result<DominanceReport, ConstructionError> {
    let limit = Natural::from(horizon);
    let bm = membership_bits(b, &limit)?;
    let cm = membership_bits(c, &limit)?;
    let (mut nb, mut nc) = (0u64, 0u64);
    for k in 1..=horizon {
        let i = (k - 1) as usize;
        nb += u64::from(bm[i]);
        nc += u64::from(cm[i]);
        if nb > nc {
            return Ok(DominanceReport {
                holds: false,
                first_violation: Some((k, nb, nc)),
                horizon,
            });
        }
    }
    Ok(DominanceReport {
        holds: true,
        first_violation: None,
        horizon,
    })
}

fn membership_bits(s: &OmegaSet, limit: &Natural) -> Result<Vec<bool>, SetError> {
    let n = limit.to_u64().expect("u64 horizon") as usize;
    let mut bits = vec![false; n];
    let mut from = Natural::zero();
    while let Some((a, e)) = s.next_run(&from, limit)? {
        let a = a.to_u64().expect("below horizon") as usize;
        let e = (e.to_u64().unwrap_or(u64::MAX) as usize).min(n);
        bits[a..e].iter_mut().for_each(|x| *x = true);
        from = Natural::from(e as u64);
        if e >= n {
            break;
        }
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{membership_verdict, ratio_trace, Verdict};
    use crate::decomposition::factorial_power;

    fn n(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn example_e_counts() {
        let c = example_e_set();
        assert_eq!(c.count_u64(100).unwrap(), n(10));
        assert_eq!(c.count_u64(0).unwrap(), n(0));
        assert_eq!(c.count_u64(1_000_000).unwrap(), n(1000));
    }

    #[test]
    fn eec_case1_counts() {
        let c = eec_case1_set(0.5).unwrap();
        assert_eq!(c.count_u64(1 << 20).unwrap(), n(32));
        assert_eq!(c.count_u64(1).unwrap(), n(1));
        assert_eq!(c.count_u64(0).unwrap(), n(0));
        assert!(eec_case1_set(1.0).is_err());
    }

    #[test]
    fn lo1_on_es1() {
        let f = ModulusFunction::log1p();
        let w = lo1_witness(&f, &WeightFunction::es1(), 6).unwrap();
        let expect: Vec<Natural> = (2..8).map(factorial_power).collect();
        assert_eq!(w.anchors, expect);
        for (i, r) in w.anchor_ratios.iter().enumerate() {
            let m = (i + 2) as f64;
            // ln(1+2^(m!)) / ln(1+2^((m+1)!)) approaches 1/(m+1) from above
            assert!(*r >= (1.0 - 1e-12) / (m + 1.0) && *r < 1.2 / (m + 1.0), "{r}");
        }
        for k in &w.anchors {
            let c2 = w.set.count(&k.shl(1)).unwrap();
            assert!(f.ratio(&c2, &k.shl(1)).unwrap() >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn lo1_refuses_identity() {
        let id = ModulusFunction::identity();
        let e = lo1_witness(&id, &WeightFunction::identity(), 5).unwrap_err();
        assert!(matches!(e, ConstructionError::NoVanishingSubsequence { min_ratio } if min_ratio == 1.0));
    }

    #[test]
    fn p1_step_weight() {
        let anchors: Vec<Natural> = (0..20).map(|m| n(1 << m)).collect();
        let g = p1_weight(&anchors).unwrap();
        assert_eq!(g.eval_u64(5), n(8));
        for a in &anchors {
            assert_eq!(&g.eval(a), a);
        }
        assert_eq!(g.eval_u64(1 << 25), n(1 << 25));
        let c = example_e_set();
        let sched = Schedule::new(anchors.clone());
        let t = ratio_trace(&ModulusFunction::identity(), &g, &c, &sched).unwrap();
        assert_eq!(membership_verdict(&t, 0.05, 0.25).unwrap().verdict, Verdict::LikelyIn);
        assert!(matches!(p1_weight(&[]), Err(ConstructionError::EmptyAnchors)));
        assert!(matches!(p1_weight(&[n(3), n(3)]), Err(ConstructionError::NotIncreasing(1))));
    }

    #[test]
    fn ts1_on_es1() {
        let f = ModulusFunction::log1p();
        let g = WeightFunction::es1();
        let t = ts1_weight(&f, &g, &Ts1Search::for_weight(&g, 8)).unwrap();
        assert_eq!(t.anchors.len(), 8);
        for (i, k) in t.anchors.iter().enumerate() {
            let m = t.first_m + i;
            assert_eq!(k, &(&factorial_power(m as u64 + 1) - 1u64));
            assert!(t.anchor_ratios[i] > m as f64);
            assert!(t.h.eval(k) >= g.eval(k));
        }
        for k in scan_grid(&g).points().iter().take(3000) {
            assert!(t.h.eval(k) >= g.eval(k));
        }
    }

    #[test]
    fn ts1_refuses_identity() {
        let g = WeightFunction::identity();
        let e = ts1_weight(&ModulusFunction::identity(), &g, &Ts1Search::for_weight(&g, 5));
        assert!(matches!(e, Err(ConstructionError::AnchorsNotFound(_))));
    }

    #[test]
    fn ps1_extremes_and_divergence() {
        let f = ModulusFunction::log1p();
        let g = WeightFunction::es1();
        let t = ts1_weight(&f, &g, &Ts1Search::for_weight(&g, 6)).unwrap();
        let nb = t.anchors.len();
        let fam = ps1_family(&g, &t.h, &t.anchors, &[vec![false; nb], vec![true; nb]]).unwrap();
        for k in scan_grid(&g).truncate(&factorial_power(9)).points() {
            assert_eq!(fam[0].eval(k), g.eval(k));
            assert_eq!(fam[1].eval(k), g.eval(k).max(t.h.eval(k)));
        }
        let w = divergence_witnesses(&f, &fam[1], &fam[0], &t.anchors, 4.0);
        assert!(!w.is_empty());
    }

    #[test]
    fn codes_differ_both_ways() {
        let codes = complementary_codes(8, 60);
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    let ij = (0..60).filter(|&b| codes[i][b] && !codes[j][b]).count();
                    assert!(ij >= 10, "{i} {j} {ij}");
                }
            }
        }
    }

    #[test]
    fn eeu4_measures() {
        let spec = eu_measure_ideal(MeasureKind::Eeu4);
        let (c, d) = eeu4_sets();
        assert_eq!(spec.mu(5, &c).unwrap(), BigRational::one());
        assert_eq!(spec.mu(5, &d).unwrap(), BigRational::zero());
        assert_eq!(spec.mu(5, &OmegaSet::empty()).unwrap(), BigRational::zero());
        assert_eq!(spec.mu(1, &d).unwrap(), BigRational::one());
        assert_eq!(spec.mu(2, &d).unwrap(), BigRational::new(1.into(), 2.into()));
        let vc = exh_verdict(&spec, &c, 16, 0.05, 0.25).unwrap();
        assert_eq!(vc.verdict, Verdict::LikelyOut);
        assert_eq!(vc.tail_sup, 1.0);
        let vd = exh_verdict(&spec, &d, 16, 0.05, 0.25).unwrap();
        assert_eq!(vd.verdict, Verdict::LikelyIn);
        assert_eq!(vd.tail_sup, 0.0);
        let r = increasing_dominance_check(&c, &d, 100_000).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn masses_are_exact() {
        let pd6 = eu_measure_ideal(MeasureKind::Pd6(vec![1, 3, 5]));
        for j in 0..8 {
            assert_eq!(pd6.mass(j).unwrap(), BigRational::one());
        }
        assert_eq!(pd6.support(0).unwrap(), (n(1), n(2)));
        assert_eq!(pd6.support(1).unwrap(), (n(3), n(4)));
        assert_eq!(pd6.support(2).unwrap(), (n(6), n(8)));
        let e5 = eu_measure_ideal(MeasureKind::Eeu5);
        assert_eq!(e5.mass(6).unwrap(), BigRational::from_integer(6.into()));
        assert!(!pd6.selected(2));
    }

    #[test]
    fn dominance_failures() {
        let r = increasing_dominance_check(&OmegaSet::full(), &OmegaSet::empty(), 10).unwrap();
        assert_eq!(r.first_violation, Some((1, 1, 0)));
        let s = example_e_set();
        assert!(increasing_dominance_check(&s, &s, 1000).unwrap().holds);
    }
}
