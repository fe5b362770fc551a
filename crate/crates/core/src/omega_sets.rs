//! Subsets of ω behind an exact prefix-count oracle `k -> |C ∩ [0, k-1]|`.
//!
//! Sets are finite lists, lazily generated interval unions, counting profiles,
//! or boolean combinations of these. Everything answers through runs: maximal
//! or partial blocks `[s, e)` of consecutive elements, found in increasing order.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::natural::Natural;
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("representation too weak: {0}")]
    RepresentationTooWeak(String),
    #[error("overlapping intervals: {0}")]
    OverlapDetected(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid set: {0}")]
    InvalidSpec(String),
}

/// Runs a single query may enumerate before giving up.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

static BUDGET_OVERRIDE: AtomicU64 = AtomicU64::new(0);

/// The enumeration budget: `DENSITY_LAB_BUDGET` if set, else [`DEFAULT_BUDGET`];
/// [`set_enumeration_budget`] takes precedence over both.
pub fn enumeration_budget() -> u64 {
    let o = BUDGET_OVERRIDE.load(AtomicOrdering::Relaxed);
    if o > 0 {
        return o;
    }
    static FROM_ENV: OnceLock<u64> = OnceLock::new();
    *FROM_ENV.get_or_init(|| {
        std::env::var("DENSITY_LAB_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_BUDGET)
    })
}

/// Process-wide budget override; `None` restores the default.
pub fn set_enumeration_budget(budget: Option<u64>) {
    BUDGET_OVERRIDE.store(budget.unwrap_or(0), AtomicOrdering::Relaxed);
}

struct Budget {
    left: u64,
}

impl Budget {
    fn new() -> Self {
        Budget {
            left: enumeration_budget(),
        }
    }

    fn spend(&mut self, what: &str) -> Result<(), SetError> {
        if self.left == 0 {
            return Err(SetError::RepresentationTooWeak(format!(
                "enumeration budget of {} exhausted while {what}",
                enumeration_budget()
            )));
        }
        self.left -= 1;
        Ok(())
    }
}

/// `[start, end)`.
pub type Run = (Natural, Natural);

/// A rule generating disjoint, increasing intervals `[s_i, e_i)`.
///
/// Rules may supply closed forms for the number of intervals starting below
/// `k` and for the total length of the first `n` intervals; counting then costs
/// O(1) interval evaluations instead of a scan.
pub trait IntervalRule: Send + Sync {
    /// The `i`-th interval, `None` past the end of a finite union.
    fn interval(&self, i: u64) -> Option<Run>;

    /// Number of intervals with `s_i < k`.
    fn intervals_before(&self, _k: &Natural) -> Option<u64> {
        None
    }

    /// `Σ_{i<n} (e_i - s_i)`.
    fn prefix_length(&self, _n: u64) -> Option<Natural> {
        None
    }
}

/// Counting profile `p(k) = |C ∩ [0, k-1]|`: `p(0) = 0`, increments in `{0, 1}`.
pub trait Profile: Send + Sync {
    fn eval(&self, k: &Natural) -> Result<Natural, SetError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComboOp {
    Union,
    Intersection,
    Difference,
}

impl ComboOp {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "union" | "cup" => Some(ComboOp::Union),
            "intersection" | "cap" => Some(ComboOp::Intersection),
            "difference" | "minus" => Some(ComboOp::Difference),
            _ => None,
        }
    }
}

enum Repr {
    Empty,
    Full,
    Finite(Vec<Natural>),
    Intervals(IntervalStream),
    Profile(Arc<dyn Profile>),
    Combo(ComboOp, OmegaSet, OmegaSet),
}

/// A subset of ω with an exact prefix-count oracle.
#[derive(Clone)]
pub struct OmegaSet {
    name: String,
    repr: Arc<Repr>,
}

impl fmt::Debug for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OmegaSet({})", self.name)
    }
}

/// Intervals of a lazily generated union checked eagerly at construction.
const VALIDATE_PREFIX: u64 = 64;

impl OmegaSet {
    pub fn empty() -> Self {
        OmegaSet {
            name: "empty".into(),
            repr: Arc::new(Repr::Empty),
        }
    }

    pub fn full() -> Self {
        OmegaSet {
            name: "omega".into(),
            repr: Arc::new(Repr::Full),
        }
    }

    pub fn finite<I: IntoIterator<Item = Natural>>(elements: I) -> Self {
        let mut v: Vec<Natural> = elements.into_iter().collect();
        v.sort();
        v.dedup();
        OmegaSet {
            name: format!("finite[{}]", v.len()),
            repr: Arc::new(Repr::Finite(v)),
        }
    }

    pub fn finite_u64(elements: &[u64]) -> Self {
        Self::finite(elements.iter().map(|&x| Natural::from(x)))
    }

    /// A union of intervals produced by `rule`; the first intervals are checked
    /// for order and disjointness now, later ones as they are generated.
    pub fn interval_union(name: &str, rule: Arc<dyn IntervalRule>) -> Result<Self, SetError> {
        let stream = IntervalStream::new(rule);
        stream.validate_prefix(VALIDATE_PREFIX)?;
        Ok(OmegaSet {
            name: name.into(),
            repr: Arc::new(Repr::Intervals(stream)),
        })
    }

    /// A finite union of explicit intervals.
    pub fn intervals(name: &str, runs: Vec<Run>) -> Result<Self, SetError> {
        let n = runs.len() as u64;
        let stream = IntervalStream::new(Arc::new(ExplicitIntervals::new(runs)));
        stream.validate_prefix(n)?;
        Ok(OmegaSet {
            name: name.into(),
            repr: Arc::new(Repr::Intervals(stream)),
        })
    }

    /// The set `{k : p(k+1) = p(k) + 1}` of a counting profile. The profile is
    /// checked on a sample grid for `p(0) = 0` and increments in `{0, 1}`.
    pub fn profile_set(name: &str, profile: Arc<dyn Profile>) -> Result<Self, SetError> {
        validate_profile(profile.as_ref())?;
        Ok(OmegaSet {
            name: name.into(),
            repr: Arc::new(Repr::Profile(profile)),
        })
    }

    pub fn boolean_combo(op: ComboOp, a: &OmegaSet, b: &OmegaSet) -> Self {
        let sym = match op {
            ComboOp::Union => "∪",
            ComboOp::Intersection => "∩",
            ComboOp::Difference => "∖",
        };
        OmegaSet {
            name: format!("({} {sym} {})", a.name, b.name),
            repr: Arc::new(Repr::Combo(op, a.clone(), b.clone())),
        }
    }

    pub fn union(&self, other: &OmegaSet) -> Self {
        Self::boolean_combo(ComboOp::Union, self, other)
    }

    pub fn intersection(&self, other: &OmegaSet) -> Self {
        Self::boolean_combo(ComboOp::Intersection, self, other)
    }

    pub fn difference(&self, other: &OmegaSet) -> Self {
        Self::boolean_combo(ComboOp::Difference, self, other)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_empty_repr(&self) -> bool {
        matches!(*self.repr, Repr::Empty)
    }

    pub fn is_full_repr(&self) -> bool {
        matches!(*self.repr, Repr::Full)
    }

    /// `Some(true)` when the set is known to be finite, `Some(false)` when known
    /// infinite, `None` when the representation cannot tell.
    pub fn is_finite(&self) -> Option<bool> {
        match &*self.repr {
            Repr::Empty | Repr::Finite(_) => Some(true),
            Repr::Full => Some(false),
            Repr::Intervals(s) => s.known_finite(),
            Repr::Profile(_) => None,
            Repr::Combo(op, a, b) => match (op, a.is_finite(), b.is_finite()) {
                (ComboOp::Union, Some(x), Some(y)) => Some(x && y),
                (ComboOp::Intersection, Some(true), _) | (ComboOp::Intersection, _, Some(true)) => Some(true),
                (ComboOp::Difference, Some(true), _) => Some(true),
                (ComboOp::Difference, Some(false), Some(true)) => Some(false),
                _ => None,
            },
        }
    }

    /// `|C ∩ [0, k-1]|`, exact.
    pub fn count(&self, k: &Natural) -> Result<Natural, SetError> {
        self.count_in(k, &mut Budget::new())
    }

    pub fn count_u64(&self, k: u64) -> Result<Natural, SetError> {
        self.count(&Natural::from(k))
    }

    pub fn contains(&self, n: &Natural) -> Result<bool, SetError> {
        Ok(self.next_run(n, &(n + 1u64))?.is_some())
    }

    /// The first run meeting `[from, limit)`, clipped to it.
    pub fn next_run(&self, from: &Natural, limit: &Natural) -> Result<Option<Run>, SetError> {
        self.run_in(from, limit, &mut Budget::new())
    }

    /// Elements below `limit`, at most `max_count` of them, in increasing order.
    pub fn elements_below(&self, limit: &Natural, max_count: usize) -> Result<Vec<Natural>, SetError> {
        let mut budget = Budget::new();
        let mut out = Vec::new();
        let mut from = Natural::zero();
        while out.len() < max_count {
            let Some((s, e)) = self.run_in(&from, limit, &mut budget)? else {
                break;
            };
            let mut x = s;
            while x < e && out.len() < max_count {
                out.push(x.clone());
                x = &x + 1u64;
            }
            from = e;
            budget.spend("listing elements")?;
        }
        Ok(out)
    }

    /// The element of rank `m` (0-based), `None` if the set has at most `m` elements.
    pub fn nth_element(&self, m: &Natural) -> Result<Option<Natural>, SetError> {
        let mut budget = Budget::new();
        match &*self.repr {
            Repr::Empty => Ok(None),
            Repr::Full => Ok(Some(m.clone())),
            Repr::Finite(v) => Ok(m.to_u64().and_then(|i| v.get(i as usize)).cloned()),
            Repr::Intervals(s) => s.nth(m, &mut budget),
            Repr::Profile(p) => {
                // c_m = t - 1 for the least t with p(t) >= m + 1; p(k) <= k bounds t below by m + 1
                let target = m + 1u64;
                let mut lo = m.clone();
                let mut hi = target.shl(1);
                while p.eval(&hi)? < target {
                    budget.spend("searching a profile")?;
                    lo = hi.clone();
                    hi = hi.shl(1);
                }
                let t = first_true(&lo, &hi, |t| Ok(p.eval(t)? >= target))?;
                Ok(Some(&t - 1u64))
            }
            Repr::Combo(..) => {
                let mut seen = Natural::zero();
                let mut from = Natural::zero();
                let mut limit = Natural::from(1024u64);
                loop {
                    match self.run_in(&from, &limit, &mut budget)? {
                        Some((s, e)) => {
                            let len = &e - &s;
                            let next = &seen + &len;
                            if &next > m {
                                return Ok(Some(&s + &(m - &seen)));
                            }
                            seen = next;
                            from = e;
                        }
                        None => {
                            if self.is_finite() == Some(true) && limit > Natural::pow2(4096u32) {
                                return Ok(None);
                            }
                            from = limit.clone();
                            limit = limit.shl(1);
                        }
                    }
                    budget.spend("ranking combination elements")?;
                }
            }
        }
    }

    fn count_in(&self, k: &Natural, budget: &mut Budget) -> Result<Natural, SetError> {
        match &*self.repr {
            Repr::Empty => Ok(Natural::zero()),
            Repr::Full => Ok(k.clone()),
            Repr::Finite(v) => Ok(Natural::from(v.partition_point(|x| x < k))),
            Repr::Intervals(s) => s.count(k, budget),
            Repr::Profile(p) => p.eval(k),
            Repr::Combo(op, a, b) => {
                match op {
                    ComboOp::Union => {
                        if a.is_full_repr() || b.is_full_repr() {
                            return Ok(k.clone());
                        }
                        if a.is_empty_repr() {
                            return b.count_in(k, budget);
                        }
                        if b.is_empty_repr() {
                            return a.count_in(k, budget);
                        }
                    }
                    ComboOp::Intersection => {
                        if a.is_empty_repr() || b.is_empty_repr() {
                            return Ok(Natural::zero());
                        }
                        if a.is_full_repr() {
                            return b.count_in(k, budget);
                        }
                        if b.is_full_repr() {
                            return a.count_in(k, budget);
                        }
                    }
                    ComboOp::Difference => {
                        if a.is_empty_repr() || b.is_full_repr() {
                            return Ok(Natural::zero());
                        }
                        if b.is_empty_repr() {
                            return a.count_in(k, budget);
                        }
                        if a.is_full_repr() {
                            return Ok(k - &b.count_in(k, budget)?);
                        }
                    }
                }
                self.sweep_count(k, budget)
            }
        }
    }

    fn sweep_count(&self, k: &Natural, budget: &mut Budget) -> Result<Natural, SetError> {
        let mut total = Natural::zero();
        let mut from = Natural::zero();
        while let Some((s, e)) = self.run_in(&from, k, budget)? {
            total = &total + &(&e - &s);
            from = e;
            budget.spend("sweeping runs")?;
        }
        Ok(total)
    }

    fn run_in(&self, from: &Natural, limit: &Natural, budget: &mut Budget) -> Result<Option<Run>, SetError> {
        if from >= limit {
            return Ok(None);
        }
        match &*self.repr {
            Repr::Empty => Ok(None),
            Repr::Full => Ok(Some((from.clone(), limit.clone()))),
            Repr::Finite(v) => {
                let i = v.partition_point(|x| x < from);
                if i == v.len() || &v[i] >= limit {
                    return Ok(None);
                }
                let start = v[i].clone();
                let mut end = &start + 1u64;
                let mut j = i + 1;
                while j < v.len() && v[j] == end && &end < limit {
                    end = &end + 1u64;
                    j += 1;
                }
                Ok(Some((start, end)))
            }
            Repr::Intervals(s) => s.run(from, limit, budget),
            Repr::Profile(p) => profile_run(p.as_ref(), from, limit),
            Repr::Combo(op, a, b) => match op {
                ComboOp::Union => {
                    let ra = a.run_in(from, limit, budget)?;
                    let rb = b.run_in(from, limit, budget)?;
                    let (s, mut e) = match (ra, rb) {
                        (None, None) => return Ok(None),
                        (Some(r), None) | (None, Some(r)) => r,
                        (Some(x), Some(y)) => {
                            if x.0 < y.0 || (x.0 == y.0 && x.1 >= y.1) {
                                x
                            } else {
                                y
                            }
                        }
                    };
                    // extend through runs of either side that continue at e
                    loop {
                        budget.spend("merging a union")?;
                        let mut grown = false;
                        for side in [a, b] {
                            if let Some((s2, e2)) = side.run_in(&e, limit, budget)? {
                                if s2 == e {
                                    e = e2;
                                    grown = true;
                                }
                            }
                        }
                        if !grown {
                            break;
                        }
                    }
                    Ok(Some((s, e)))
                }
                ComboOp::Intersection => {
                    let mut from = from.clone();
                    loop {
                        budget.spend("intersecting runs")?;
                        let Some((sa, ea)) = a.run_in(&from, limit, budget)? else {
                            return Ok(None);
                        };
                        let Some((sb, eb)) = b.run_in(&sa, limit, budget)? else {
                            return Ok(None);
                        };
                        if sb < ea {
                            let e = if ea < eb { ea } else { eb };
                            return Ok(Some((sb, e)));
                        }
                        from = sb;
                    }
                }
                ComboOp::Difference => {
                    let mut from = from.clone();
                    loop {
                        budget.spend("subtracting runs")?;
                        let Some((sa, ea)) = a.run_in(&from, limit, budget)? else {
                            return Ok(None);
                        };
                        match b.run_in(&sa, &ea, budget)? {
                            None => return Ok(Some((sa, ea))),
                            Some((sb, _)) if sb > sa => return Ok(Some((sa, sb))),
                            Some((_, eb)) => from = eb,
                        }
                    }
                }
            },
        }
    }
}

/// Smallest `t` in `(lo, hi]` with `pred(t)`, given `pred(hi)` and not `pred(lo)`.
fn first_true<F>(lo: &Natural, hi: &Natural, mut pred: F) -> Result<Natural, SetError>
where
    F: FnMut(&Natural) -> Result<bool, SetError>,
{
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    while (&hi - &lo) > Natural::one() {
        let mid = (&lo + &hi).shr_floor(1);
        if pred(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn profile_run(p: &dyn Profile, from: &Natural, limit: &Natural) -> Result<Option<Run>, SetError> {
    // the first element >= from is t - 1 for the least t > from with p(t) > p(from)
    let base = p.eval(from)?;
    if p.eval(limit)? <= base {
        return Ok(None);
    }
    let t = first_true(from, limit, |t| Ok(p.eval(t)? > base))?;
    let s = &t - 1u64;
    // p(j) - j is nonincreasing; the run continues while it stays at its value at s
    let ps = p.eval(&s)?;
    let stays = |e: &Natural| -> Result<bool, SetError> { Ok(&p.eval(e)? + &s == &ps + e) };
    let e = if stays(limit)? {
        limit.clone()
    } else {
        &first_true(&s, limit, |e| Ok(!stays(e)?))? - 1u64
    };
    Ok(Some((s, e)))
}

fn validate_profile(p: &dyn Profile) -> Result<(), SetError> {
    if !p.eval(&Natural::zero())?.is_zero() {
        return Err(SetError::InvalidProfile("p(0) must be 0".into()));
    }
    let mut points: Vec<Natural> = (0..=2000u64).map(Natural::from).collect();
    points.extend(
        Schedule::geometric(1.5, &Natural::from(1_000_000_000_000u64))
            .points()
            .iter()
            .cloned(),
    );
    for k in points {
        let a = p.eval(&k)?;
        let b = p.eval(&(&k + 1u64))?;
        if b < a || b > (&a + 1u64) {
            return Err(SetError::InvalidProfile(format!(
                "p({}) = {a}, p({}) = {b}: increments must be 0 or 1",
                k,
                &k + 1u64
            )));
        }
    }
    Ok(())
}

struct CachedInterval {
    start: Natural,
    end: Natural,
    /// Total length of all earlier intervals.
    before: Natural,
}

#[derive(Default)]
struct StreamCache {
    items: Vec<CachedInterval>,
    exhausted: bool,
}

struct IntervalStream {
    rule: Arc<dyn IntervalRule>,
    cache: RwLock<StreamCache>,
}

impl IntervalStream {
    fn new(rule: Arc<dyn IntervalRule>) -> Self {
        IntervalStream {
            rule,
            cache: RwLock::new(StreamCache::default()),
        }
    }

    fn validate_prefix(&self, n: u64) -> Result<(), SetError> {
        let mut cache = self.cache.write().expect("interval cache poisoned");
        while (cache.items.len() as u64) < n && !cache.exhausted {
            Self::extend(&self.rule, &mut cache)?;
        }
        // closed forms must agree with the generated intervals
        let items = &cache.items;
        for (i, it) in items.iter().enumerate() {
            if let Some(c) = self.rule.intervals_before(&it.start) {
                if c != i as u64 {
                    return Err(SetError::InvalidSpec(format!(
                        "rule reports {c} intervals before {}, expected {i}",
                        it.start
                    )));
                }
            }
            if let Some(len) = self.rule.prefix_length(i as u64) {
                if len != it.before {
                    return Err(SetError::InvalidSpec(format!(
                        "rule reports prefix length {len} for {i} intervals, expected {}",
                        it.before
                    )));
                }
            }
        }
        Ok(())
    }

    fn extend(rule: &Arc<dyn IntervalRule>, cache: &mut StreamCache) -> Result<(), SetError> {
        let i = cache.items.len() as u64;
        match rule.interval(i) {
            None => cache.exhausted = true,
            Some((start, end)) => {
                if start >= end {
                    return Err(SetError::InvalidSpec(format!("interval {i} = [{start}, {end}) is empty")));
                }
                let before = match cache.items.last() {
                    Some(prev) => {
                        if start < prev.end {
                            return Err(SetError::OverlapDetected(format!(
                                "interval {i} = [{start}, {end}) starts before the previous one ends at {}",
                                prev.end
                            )));
                        }
                        &prev.before + &(&prev.end - &prev.start)
                    }
                    None => Natural::zero(),
                };
                cache.items.push(CachedInterval { start, end, before });
            }
        }
        Ok(())
    }

    fn known_finite(&self) -> Option<bool> {
        let cache = self.cache.read().expect("interval cache poisoned");
        if cache.exhausted {
            Some(true)
        } else {
            None
        }
    }

    /// Generates intervals until one starts at or after `k` (or the stream ends).
    fn ensure_until(&self, k: &Natural, budget: &mut Budget) -> Result<(), SetError> {
        {
            let cache = self.cache.read().expect("interval cache poisoned");
            if cache.exhausted || cache.items.last().is_some_and(|it| &it.start >= k) {
                return Ok(());
            }
        }
        let mut cache = self.cache.write().expect("interval cache poisoned");
        while !cache.exhausted && !cache.items.last().is_some_and(|it| &it.start >= k) {
            budget.spend("generating intervals")?;
            Self::extend(&self.rule, &mut cache)?;
        }
        Ok(())
    }

    fn closed_count(&self, k: &Natural) -> Option<Natural> {
        let n = self.rule.intervals_before(k)?;
        if n == 0 {
            return Some(Natural::zero());
        }
        let total = self.rule.prefix_length(n)?;
        let (_, end) = self.rule.interval(n - 1)?;
        Some(if &end > k { &total - &(&end - k) } else { total })
    }

    fn count(&self, k: &Natural, budget: &mut Budget) -> Result<Natural, SetError> {
        if let Some(c) = self.closed_count(k) {
            return Ok(c);
        }
        self.ensure_until(k, budget)?;
        let cache = self.cache.read().expect("interval cache poisoned");
        let n = cache.items.partition_point(|it| &it.start < k);
        if n == 0 {
            return Ok(Natural::zero());
        }
        let last = &cache.items[n - 1];
        let full = &last.before + &(&last.end - &last.start);
        Ok(if &last.end > k { &full - &(&last.end - k) } else { full })
    }

    fn nth(&self, m: &Natural, budget: &mut Budget) -> Result<Option<Natural>, SetError> {
        let covers = |it: &CachedInterval| &(&it.before + &(&it.end - &it.start)) > m;
        {
            let mut cache = self.cache.write().expect("interval cache poisoned");
            while !cache.exhausted && !cache.items.last().is_some_and(covers) {
                budget.spend("generating intervals")?;
                Self::extend(&self.rule, &mut cache)?;
            }
        }
        let cache = self.cache.read().expect("interval cache poisoned");
        let i = cache.items.partition_point(|it| !covers(it));
        Ok(cache.items.get(i).map(|it| &it.start + &(m - &it.before)))
    }

    fn run(&self, from: &Natural, limit: &Natural, budget: &mut Budget) -> Result<Option<Run>, SetError> {
        let clip = |s: Natural, e: Natural| -> Option<Run> {
            let s = if &s < from { from.clone() } else { s };
            if &s >= limit || s >= e {
                return None;
            }
            let e = if &e > limit { limit.clone() } else { e };
            Some((s, e))
        };
        if let Some(n) = self.rule.intervals_before(from) {
            if n > 0 {
                if let Some((s, e)) = self.rule.interval(n - 1) {
                    if &e > from {
                        return Ok(clip(s, e));
                    }
                }
            }
            return Ok(self.rule.interval(n).and_then(|(s, e)| clip(s, e)));
        }
        self.ensure_until(&(from + 1u64), budget)?;
        let cache = self.cache.read().expect("interval cache poisoned");
        let n = cache.items.partition_point(|it| &it.start <= from);
        if n > 0 && &cache.items[n - 1].end > from {
            let it = &cache.items[n - 1];
            return Ok(clip(it.start.clone(), it.end.clone()));
        }
        Ok(cache
            .items
            .get(n)
            .and_then(|it| clip(it.start.clone(), it.end.clone())))
    }
}

/// A finite, explicit list of intervals.
pub struct ExplicitIntervals {
    runs: Vec<Run>,
}

impl ExplicitIntervals {
    pub fn new(runs: Vec<Run>) -> Self {
        ExplicitIntervals { runs }
    }
}

impl IntervalRule for ExplicitIntervals {
    fn interval(&self, i: u64) -> Option<Run> {
        self.runs.get(i as usize).cloned()
    }
}

/// Block length as a function of the block index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLength {
    Constant(u64),
    /// `m`
    Linear,
    /// `m^2`
    Square,
}

impl BlockLength {
    fn at(self, m: u64) -> u64 {
        match self {
            BlockLength::Constant(c) => c,
            BlockLength::Linear => m,
            BlockLength::Square => m * m,
        }
    }

    /// `Σ_{m=0}^{n-1} len(m)`.
    fn sum_below(self, n: u64) -> BigUint {
        let n = BigUint::from(n);
        match self {
            BlockLength::Constant(c) => n * c,
            BlockLength::Linear => {
                if n == BigUint::from(0u32) {
                    n
                } else {
                    &n * (&n - 1u32) / 2u32
                }
            }
            BlockLength::Square => {
                if n == BigUint::from(0u32) {
                    n
                } else {
                    // Σ_{m<n} m^2 = (n-1) n (2n-1) / 6
                    (&n - 1u32) * &n * (2u32 * &n - 1u32) / 6u32
                }
            }
        }
    }
}

/// Which side of `2^m` a block sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSide {
    /// `[2^m, 2^m + len(m))`
    After,
    /// `[2^m - len(m), 2^m)`
    Before,
}

/// Blocks next to the powers of two, `m >= first_m`, with closed-form counting.
#[derive(Debug, Clone, Copy)]
pub struct PowerBlocks {
    pub first_m: u64,
    pub length: BlockLength,
    pub side: BlockSide,
}

impl PowerBlocks {
    fn block(&self, m: u64) -> Run {
        let p = Natural::pow2(BigUint::from(m));
        let len = Natural::from(self.length.at(m));
        match self.side {
            BlockSide::After => {
                let e = &p + &len;
                (p, e)
            }
            BlockSide::Before => (&p - &len, p),
        }
    }
}

impl IntervalRule for PowerBlocks {
    fn interval(&self, i: u64) -> Option<Run> {
        let m = self.first_m.checked_add(i)?;
        if m >= 64 * 1024 {
            return None;
        }
        Some(self.block(m))
    }

    fn intervals_before(&self, k: &Natural) -> Option<u64> {
        if k.is_zero() {
            return Some(0);
        }
        // block starts lie in [2^(m-1), 2^m], so only m near log2(k) can qualify
        let lg = k.floor_log2()?;
        let lg: u64 = lg.to_u64()?;
        let mut m = lg + 2;
        while m >= self.first_m {
            if &self.block(m).0 < k {
                return Some(m - self.first_m + 1);
            }
            if m == 0 {
                break;
            }
            m -= 1;
        }
        Some(0)
    }

    fn prefix_length(&self, n: u64) -> Option<Natural> {
        let hi = self.first_m.checked_add(n)?;
        let s = self.length.sum_below(hi) - self.length.sum_below(self.first_m);
        Some(Natural::from(s))
    }
}

/// `floor(sqrt(k))`.
pub struct SqrtProfile;

impl Profile for SqrtProfile {
    fn eval(&self, k: &Natural) -> Result<Natural, SetError> {
        let b = k.as_biguint().ok_or_else(|| {
            SetError::RepresentationTooWeak(format!("square-root profile at an index of {} bits", k.bits()))
        })?;
        Ok(Natural::from(b.sqrt()))
    }
}

/// `floor(k^(p/q))` for `0 < p/q <= 1`, exact.
pub struct PowerProfile {
    p: u32,
    q: u32,
}

impl PowerProfile {
    pub fn new(p: u32, q: u32) -> Result<Self, SetError> {
        if p == 0 || q == 0 || p > q {
            return Err(SetError::InvalidProfile(format!("exponent {p}/{q} must lie in (0, 1]")));
        }
        Ok(PowerProfile { p, q })
    }

    /// The best rational approximation with denominator at most 1000.
    pub fn from_f64(a: f64) -> Result<Self, SetError> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(SetError::InvalidProfile(format!("exponent {a} must lie in (0, 1]")));
        }
        let (mut best, mut err) = ((1u32, 1u32), f64::INFINITY);
        for q in 1..=1000u32 {
            let p = (a * f64::from(q)).round() as u32;
            if p == 0 || p > q {
                continue;
            }
            let e = (f64::from(p) / f64::from(q) - a).abs();
            if e < err - 1e-15 {
                best = (p, q);
                err = e;
            }
        }
        Self::new(best.0, best.1)
    }
}

impl Profile for PowerProfile {
    fn eval(&self, k: &Natural) -> Result<Natural, SetError> {
        let b = k.as_biguint().ok_or_else(|| {
            SetError::RepresentationTooWeak(format!("power profile at an index of {} bits", k.bits()))
        })?;
        Ok(Natural::from(num_traits::pow::pow(b.clone(), self.p as usize).nth_root(self.q)))
    }
}

/// `ceil(k / 2)`: the even numbers.
pub struct EvensProfile;

impl Profile for EvensProfile {
    fn eval(&self, k: &Natural) -> Result<Natural, SetError> {
        Ok((k + 1u64).shr_floor(1))
    }
}

/// A profile given by a closure on dense integers.
pub struct FnProfile<F>(pub F);

impl<F> Profile for FnProfile<F>
where
    F: Fn(&BigUint) -> BigUint + Send + Sync,
{
    fn eval(&self, k: &Natural) -> Result<Natural, SetError> {
        let b = k
            .as_biguint()
            .ok_or_else(|| SetError::RepresentationTooWeak("closure profile at a sparse index".into()))?;
        Ok(Natural::from((self.0)(b)))
    }
}

/// Catalog sets by name: `empty`, `omega`, `sqrt` (also `example_e`), `evens`,
/// `power(a)`, `pow2` (the powers of two).
pub fn catalog_set(name: &str) -> Result<OmegaSet, SetError> {
    let n = name.trim();
    match n {
        "empty" => return Ok(OmegaSet::empty()),
        "omega" | "full" => return Ok(OmegaSet::full()),
        "sqrt" | "example_e" => return OmegaSet::profile_set("sqrt", Arc::new(SqrtProfile)),
        "evens" => return OmegaSet::profile_set("evens", Arc::new(EvensProfile)),
        "pow2" => {
            return OmegaSet::interval_union(
                "pow2",
                Arc::new(PowerBlocks {
                    first_m: 0,
                    length: BlockLength::Constant(1),
                    side: BlockSide::After,
                }),
            )
        }
        _ => {}
    }
    if let Some(a) = n.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| SetError::InvalidSpec(format!("bad exponent `{a}`")))?;
        return OmegaSet::profile_set(n, Arc::new(PowerProfile::from_f64(a)?));
    }
    Err(SetError::InvalidSpec(format!("`{n}` is not a catalog set")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Natural {
        Natural::from(v)
    }

    fn brute_count(members: &dyn Fn(u64) -> bool, k: u64) -> u64 {
        (0..k).filter(|&x| members(x)).count() as u64
    }

    fn eeu4_c() -> OmegaSet {
        OmegaSet::interval_union(
            "c",
            Arc::new(PowerBlocks {
                first_m: 1,
                length: BlockLength::Linear,
                side: BlockSide::After,
            }),
        )
        .unwrap()
    }

    fn in_eeu4_c(x: u64) -> bool {
        (1..40u64).any(|m| x >= 1 << m && x < (1 << m) + m)
    }

    #[test]
    fn eeu4_blocks_count() {
        let c = eeu4_c();
        assert_eq!(c.count_u64(32).unwrap(), n(10));
        for k in 0..300 {
            assert_eq!(c.count_u64(k).unwrap(), n(brute_count(&in_eeu4_c, k)), "k={k}");
        }
    }

    #[test]
    fn sqrt_profile_elements() {
        let s = catalog_set("sqrt").unwrap();
        // p(k) = floor(sqrt k) increments at k+1 = j^2, so elements are j^2 - 1
        let el = s.elements_below(&n(50), 100).unwrap();
        let want: Vec<Natural> = [0u64, 3, 8, 15, 24, 35, 48].into_iter().map(n).collect();
        assert_eq!(el, want);
        assert_eq!(s.count_u64(1_000_000).unwrap(), n(1000));
    }

    #[test]
    fn combos_match_brute_force() {
        let c = eeu4_c();
        let s = catalog_set("sqrt").unwrap();
        let in_s = |x: u64| {
            let r = (x + 1).isqrt();
            r * r == x + 1
        };
        let inter = c.intersection(&s);
        assert_eq!(inter.count_u64(40).unwrap(), n(brute_count(&|x| in_eeu4_c(x) && in_s(x), 40)));
        let uni = c.union(&s);
        let diff = c.difference(&s);
        let ev = catalog_set("evens").unwrap();
        let sym = ev.difference(&c).union(&s.intersection(&ev));
        for k in [0u64, 1, 7, 40, 333, 1000] {
            assert_eq!(uni.count_u64(k).unwrap(), n(brute_count(&|x| in_eeu4_c(x) || in_s(x), k)));
            assert_eq!(diff.count_u64(k).unwrap(), n(brute_count(&|x| in_eeu4_c(x) && !in_s(x), k)));
            let want = brute_count(&|x| (x % 2 == 0 && !in_eeu4_c(x)) || (in_s(x) && x % 2 == 0), k);
            assert_eq!(sym.count_u64(k).unwrap(), n(want));
        }
    }

    #[test]
    fn ranks_match_enumeration() {
        let ev = catalog_set("evens").unwrap();
        let sets = [
            eeu4_c(),
            catalog_set("sqrt").unwrap(),
            OmegaSet::finite_u64(&[2, 3, 10]),
            eeu4_c().union(&catalog_set("sqrt").unwrap()),
            ev.difference(&eeu4_c()),
        ];
        for s in &sets {
            let el = s.elements_below(&n(5000), 200).unwrap();
            for (i, e) in el.iter().enumerate() {
                assert_eq!(s.nth_element(&n(i as u64)).unwrap().as_ref(), Some(e), "{} rank {i}", s.name());
                assert_eq!(s.count(e).unwrap(), n(i as u64));
            }
        }
        assert_eq!(sets[2].nth_element(&n(3)).unwrap(), None);
    }

    #[test]
    fn overlap_is_rejected() {
        let runs = vec![(n(0), n(5)), (n(3), n(8))];
        assert!(matches!(OmegaSet::intervals("bad", runs), Err(SetError::OverlapDetected(_))));
    }

    #[test]
    fn bad_profile_is_rejected() {
        let jumpy = FnProfile(|k: &BigUint| k * 2u32);
        assert!(matches!(
            OmegaSet::profile_set("jumpy", Arc::new(jumpy)),
            Err(SetError::InvalidProfile(_))
        ));
    }

    #[test]
    fn sparse_index_on_profile_is_too_weak() {
        let s = catalog_set("sqrt").unwrap();
        let huge = Natural::pow2(Natural::factorial(30));
        assert!(matches!(s.count(&huge), Err(SetError::RepresentationTooWeak(_))));
    }

    #[test]
    fn membership_and_finite_sets() {
        let f = OmegaSet::finite_u64(&[3, 4, 5, 9]);
        assert!(f.contains(&n(4)).unwrap());
        assert!(!f.contains(&n(6)).unwrap());
        assert_eq!(f.count_u64(6).unwrap(), n(3));
        assert_eq!(f.next_run(&n(0), &n(100)).unwrap(), Some((n(3), n(6))));
        assert_eq!(f.is_finite(), Some(true));
        assert_eq!(OmegaSet::full().count_u64(17).unwrap(), n(17));
    }

    #[test]
    fn power_profile_is_exact() {
        let p = PowerProfile::from_f64(0.25).unwrap();
        assert_eq!(p.eval(&n(10_000)).unwrap(), n(10));
        assert_eq!(p.eval(&n(9_999)).unwrap(), n(9));
    }
}
