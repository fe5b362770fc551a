//! Modulus functions `f` and weight functions `g`, with the built-in catalog.
//!
//! A modulus function is evaluated on reals and on [`Natural`]s; for arguments
//! far beyond `f64` it is evaluated in the log domain. Weight functions are
//! integer valued and map `Natural -> Natural` exactly.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::natural::Natural;
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("`{0}` is not in the function catalog")]
    NotInCatalog(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum ModulusKind {
    Identity,
    Log1p,
    Power(f64),
    BoundedRatio,
    Custom(RealFn),
}

/// A function `f: [0, ∞) -> [0, ∞)`, normally a modulus function.
#[derive(Clone)]
pub struct ModulusFunction {
    name: String,
    kind: ModulusKind,
    unbounded: bool,
}

impl fmt::Debug for ModulusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModulusFunction({})", self.name)
    }
}

impl ModulusFunction {
    pub fn identity() -> Self {
        ModulusFunction {
            name: "identity".into(),
            kind: ModulusKind::Identity,
            unbounded: true,
        }
    }

    pub fn log1p() -> Self {
        ModulusFunction {
            name: "log1p".into(),
            kind: ModulusKind::Log1p,
            unbounded: true,
        }
    }

    /// `x^beta` for `0 < beta <= 1`.
    pub fn power(beta: f64) -> Result<Self, FunctionError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(FunctionError::InvalidParameter(format!(
                "power exponent must lie in (0, 1], got {beta}"
            )));
        }
        if beta == 1.0 {
            return Ok(ModulusFunction::identity());
        }
        Ok(ModulusFunction {
            name: format!("power({beta})"),
            kind: ModulusKind::Power(beta),
            unbounded: true,
        })
    }

    /// `x / (1 + x)`: a bounded modulus, rejected wherever unboundedness is required.
    pub fn bounded_ratio() -> Self {
        ModulusFunction {
            name: "bounded_ratio".into(),
            kind: ModulusKind::BoundedRatio,
            unbounded: false,
        }
    }

    /// An arbitrary real function, e.g. to exercise [`validate_modulus`].
    pub fn custom<F>(name: &str, f: F, unbounded: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ModulusFunction {
            name: name.into(),
            kind: ModulusKind::Custom(Arc::new(f)),
            unbounded,
        }
    }

    /// Catalog lookup: `identity`, `log1p`, `power(b)` / `power:b` / `sqrt`,
    /// `bounded_ratio`.
    pub fn from_name(name: &str) -> Result<Self, FunctionError> {
        let n = name.trim();
        match n {
            "identity" | "id" => return Ok(Self::identity()),
            "log1p" | "log" => return Ok(Self::log1p()),
            "sqrt" => return Self::power(0.5),
            "bounded_ratio" | "bounded" => return Ok(Self::bounded_ratio()),
            _ => {}
        }
        let arg = n
            .strip_prefix("power(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| n.strip_prefix("power:"));
        if let Some(arg) = arg {
            let beta: f64 = arg
                .trim()
                .parse()
                .map_err(|_| FunctionError::InvalidParameter(format!("bad exponent `{arg}`")))?;
            return Self::power(beta);
        }
        Err(FunctionError::NotInCatalog(n.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, ModulusKind::Identity)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        match &self.kind {
            ModulusKind::Identity => x,
            ModulusKind::Log1p => x.ln_1p(),
            ModulusKind::Power(b) => x.powf(*b),
            ModulusKind::BoundedRatio => x / (1.0 + x),
            ModulusKind::Custom(c) => c(x),
        }
    }

    /// `f(n)` as `f64`; `+inf` when the value itself overflows.
    pub fn eval_big(&self, n: &Natural) -> f64 {
        match &self.kind {
            ModulusKind::Identity => n.to_f64(),
            ModulusKind::Log1p => n.ln_1p(),
            ModulusKind::Power(b) => {
                let x = n.to_f64();
                if x.is_finite() {
                    x.powf(*b)
                } else {
                    (b * n.ln()).exp()
                }
            }
            ModulusKind::BoundedRatio => {
                let x = n.to_f64();
                if x.is_finite() {
                    x / (1.0 + x)
                } else {
                    1.0
                }
            }
            ModulusKind::Custom(c) => c(n.to_f64()),
        }
    }

    /// `ln f(n)`, finite for every positive `n` even when `f(n)` overflows.
    pub fn ln_eval_big(&self, n: &Natural) -> f64 {
        if n.is_zero() {
            return self.eval_real(0.0).ln();
        }
        match &self.kind {
            ModulusKind::Identity => n.ln(),
            ModulusKind::Log1p => n.ln_ln_1p(),
            ModulusKind::Power(b) => b * n.ln(),
            ModulusKind::BoundedRatio => -(-n.ln()).exp().ln_1p(),
            ModulusKind::Custom(_) => self.eval_big(n).ln(),
        }
    }

    /// `f(num) / f(den)`, `None` when `f(den) = 0`.
    pub fn ratio(&self, num: &Natural, den: &Natural) -> Option<f64> {
        let b = self.eval_big(den);
        if b == 0.0 || b.is_nan() {
            return None;
        }
        let a = self.eval_big(num);
        if a == 0.0 {
            return Some(0.0);
        }
        if a.is_finite() && b.is_finite() {
            return Some(a / b);
        }
        let ln_ratio = match &self.kind {
            ModulusKind::Identity => Natural::ln_ratio(num, den),
            ModulusKind::Power(b) => b * Natural::ln_ratio(num, den),
            _ => self.ln_eval_big(num) - self.ln_eval_big(den),
        };
        Some(ln_ratio.exp())
    }

    /// Whether `f(x) >= 2^m`. Exact for the identity and for powers whose
    /// threshold `2^(m/β)` is a power of two; floating point otherwise.
    pub fn at_least_pow2(&self, x: &Natural, m: u32) -> bool {
        match &self.kind {
            ModulusKind::Identity => *x >= Natural::pow2(m),
            ModulusKind::Power(b) => {
                let e = f64::from(m) / b;
                if (e - e.round()).abs() < 1e-9 {
                    *x >= Natural::pow2(e.round() as u64)
                } else {
                    self.ln_eval_big(x) >= f64::from(m) * std::f64::consts::LN_2
                }
            }
            _ => {
                let v = self.eval_big(x);
                if v.is_finite() {
                    v >= 2f64.powi(m as i32)
                } else {
                    self.ln_eval_big(x) >= f64::from(m) * std::f64::consts::LN_2
                }
            }
        }
    }

    pub fn to_spec(&self) -> Value {
        match &self.kind {
            ModulusKind::Power(b) => json!({"kind": "modulus", "name": "power", "beta": b}),
            _ => json!({"kind": "modulus", "name": self.name}),
        }
    }
}

/// Exact integer rule behind a [`WeightFunction`].
pub trait WeightRule: Send + Sync {
    fn eval(&self, k: &Natural) -> Natural;

    /// Points where the weight jumps, as pairs `b - 1, b`, in increasing order:
    /// at most `max_points` of them, none above `limit`.
    fn breakpoints(&self, _max_points: usize, _limit: Option<&Natural>) -> Vec<Natural> {
        Vec::new()
    }
}

/// An integer-valued weight `g: ω -> ω`.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    rule: Arc<dyn WeightRule>,
    nondecreasing: bool,
    spec: Option<Value>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightFunction({})", self.name)
    }
}

/// Breakpoints are capped at this many points unless asked otherwise.
pub const DEFAULT_BREAKPOINTS: usize = 4096;

impl WeightFunction {
    pub fn from_rule(name: &str, rule: Arc<dyn WeightRule>, nondecreasing: bool) -> Self {
        WeightFunction {
            name: name.into(),
            rule,
            nondecreasing,
            spec: None,
        }
    }

    fn catalog(name: &str, rule: Arc<dyn WeightRule>, spec: Value) -> Self {
        WeightFunction {
            name: name.into(),
            rule,
            nondecreasing: true,
            spec: Some(spec),
        }
    }

    pub fn identity() -> Self {
        Self::catalog("identity", Arc::new(IdentityRule), json!({"kind": "weight", "name": "identity"}))
    }

    /// `g(0)=0, g(1)=1`, `g(k) = 2^((m+1)!)` for `2^(m!) <= k < 2^((m+1)!)`.
    pub fn es1() -> Self {
        Self::catalog("es1", Arc::new(Es1Rule), json!({"kind": "weight", "name": "es1"}))
    }

    /// `g(0)=0`, `g(k) = (m+1)!` for `m! <= k < (m+1)!`.
    pub fn eeu() -> Self {
        Self::catalog("eeu", Arc::new(EeuRule), json!({"kind": "weight", "name": "eeu"}))
    }

    /// `g(k)=1` for `k <= 4`, `g(k) = 2^m` for `4^m < k <= 4^(m+1)`, `m >= 1`.
    pub fn eeu3() -> Self {
        Self::catalog("eeu3", Arc::new(Eeu3Rule), json!({"kind": "weight", "name": "eeu3"}))
    }

    /// `floor(a * g(k))`.
    pub fn scaled(a: f64, inner: &WeightFunction) -> Result<Self, FunctionError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(FunctionError::InvalidParameter(format!("scale must be positive, got {a}")));
        }
        Ok(WeightFunction {
            name: format!("scaled({a},{})", inner.name),
            rule: Arc::new(ScaledRule { a, inner: inner.clone() }),
            nondecreasing: inner.nondecreasing,
            spec: inner
                .spec
                .as_ref()
                .map(|s| json!({"kind": "weight", "name": "scaled", "a": a, "arg": s})),
        })
    }

    /// `floor(f(a * g(k)))`, the weights used to compare `Z_g(f)` with `Z_{f∘ag}`.
    pub fn floor_composed(
        f: &ModulusFunction,
        a: f64,
        inner: &WeightFunction,
    ) -> Result<Self, FunctionError> {
        if f.is_identity() {
            return Self::scaled(a, inner);
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(FunctionError::InvalidParameter(format!("scale must be positive, got {a}")));
        }
        Ok(WeightFunction {
            name: format!("floor({}({a}*{}))", f.name(), inner.name),
            rule: Arc::new(FloorComposedRule {
                f: f.clone(),
                a,
                inner: inner.clone(),
            }),
            nondecreasing: inner.nondecreasing,
            spec: inner.spec.as_ref().map(|s| {
                json!({"kind": "weight", "name": "floor_composed", "modulus": f.to_spec(), "a": a, "arg": s})
            }),
        })
    }

    /// Catalog lookup by name: `identity`, `es1`, `eeu`, `eeu3`, `max(a,b)`,
    /// `scaled(a,g)`.
    pub fn from_name(name: &str) -> Result<Self, FunctionError> {
        let n = name.trim();
        match n {
            "identity" | "id" => return Ok(Self::identity()),
            "es1" => return Ok(Self::es1()),
            "eeu" => return Ok(Self::eeu()),
            "eeu3" => return Ok(Self::eeu3()),
            _ => {}
        }
        if let Some(inner) = n.strip_prefix("max(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = split_top_level(inner)
                .ok_or_else(|| FunctionError::InvalidSpec(format!("expected two arguments in `{n}`")))?;
            return Ok(pointwise_max(&Self::from_name(a)?, &Self::from_name(b)?));
        }
        if let Some(inner) = n.strip_prefix("scaled(").and_then(|r| r.strip_suffix(')')) {
            let (a, g) = split_top_level(inner)
                .ok_or_else(|| FunctionError::InvalidSpec(format!("expected two arguments in `{n}`")))?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| FunctionError::InvalidParameter(format!("bad scale `{a}`")))?;
            return Self::scaled(a, &Self::from_name(g)?);
        }
        Err(FunctionError::NotInCatalog(n.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn eval(&self, k: &Natural) -> Natural {
        self.rule.eval(k)
    }

    pub fn eval_u64(&self, k: u64) -> Natural {
        self.rule.eval(&Natural::from(k))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.nondecreasing
    }

    /// Every weight here maps integers to integers.
    pub fn is_integer_valued(&self) -> bool {
        true
    }

    pub fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        self.rule.breakpoints(max_points, limit)
    }

    /// Breakpoints up to `horizon` as a schedule.
    pub fn breakpoint_schedule(&self, horizon: &Natural) -> Schedule {
        Schedule::new(self.breakpoints(DEFAULT_BREAKPOINTS, Some(horizon)))
    }

    /// The default sampling grid for this weight: geometric up to the horizon
    /// (capped) together with every breakpoint up to the horizon.
    pub fn sampling_schedule(&self, horizon: &Natural) -> Schedule {
        Schedule::default_geometric(horizon).union(&self.breakpoint_schedule(horizon))
    }

    pub fn to_spec(&self) -> Option<Value> {
        self.spec.clone()
    }
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((s[..i].trim(), s[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

/// `k -> max(g(k), h(k))`.
pub fn pointwise_max(g: &WeightFunction, h: &WeightFunction) -> WeightFunction {
    let spec = match (&g.spec, &h.spec) {
        (Some(a), Some(b)) => Some(json!({"kind": "weight", "op": "max", "args": [a, b]})),
        _ => None,
    };
    WeightFunction {
        name: format!("max({},{})", g.name, h.name),
        rule: Arc::new(MaxRule {
            g: g.clone(),
            h: h.clone(),
        }),
        nondecreasing: g.nondecreasing && h.nondecreasing,
        spec,
    }
}

/// Pushes `b - 1, b` while within the cap and limit; returns false once done.
fn push_jump(out: &mut Vec<Natural>, b: Natural, max_points: usize, limit: Option<&Natural>) -> bool {
    if out.len() >= max_points {
        return false;
    }
    if let Some(l) = limit {
        if !b.is_zero() && &(&b - 1u64) > l {
            return false;
        }
    }
    if !b.is_zero() {
        out.push(&b - 1u64);
    }
    if limit.is_none_or(|l| &b <= l) && out.len() < max_points {
        out.push(b);
    }
    true
}

fn finish(mut v: Vec<Natural>, max_points: usize) -> Vec<Natural> {
    v.sort();
    v.dedup();
    v.truncate(max_points);
    v
}

struct IdentityRule;

impl WeightRule for IdentityRule {
    fn eval(&self, k: &Natural) -> Natural {
        k.clone()
    }
}

struct Es1Rule;

impl WeightRule for Es1Rule {
    fn eval(&self, k: &Natural) -> Natural {
        if k <= &Natural::one() {
            return k.clone();
        }
        let lg = k.floor_log2().expect("k >= 2");
        let m = Natural::factorial_floor_index(&lg);
        Natural::pow2(Natural::factorial(m + 1))
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut out = Vec::new();
        let mut m = 1u64;
        while push_jump(&mut out, Natural::pow2(Natural::factorial(m)), max_points, limit) {
            m += 1;
        }
        finish(out, max_points)
    }
}

struct EeuRule;

impl WeightRule for EeuRule {
    fn eval(&self, k: &Natural) -> Natural {
        if k.is_zero() {
            return Natural::zero();
        }
        let kb = k
            .to_biguint()
            .expect("the eeu weight is evaluated on densely held indices");
        let m = Natural::factorial_floor_index(&kb);
        Natural::from(Natural::factorial(m + 1))
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut out = Vec::new();
        let mut m = 1u64;
        while push_jump(&mut out, Natural::from(Natural::factorial(m)), max_points, limit) {
            m += 1;
        }
        finish(out, max_points)
    }
}

struct Eeu3Rule;

impl WeightRule for Eeu3Rule {
    fn eval(&self, k: &Natural) -> Natural {
        if k <= &Natural::from(4u64) {
            return Natural::one();
        }
        // 4^m < k <= 4^(m+1)  <=>  m = floor(floor_log2(k-1) / 2)
        let lg = (k - 1u64).floor_log2().expect("k >= 5");
        Natural::pow2(lg >> 1u32)
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut out = Vec::new();
        let mut m = 1u64;
        while push_jump(&mut out, &Natural::pow2(BigUint::from(2 * m)) + 1u64, max_points, limit) {
            m += 1;
        }
        finish(out, max_points)
    }
}

struct ScaledRule {
    a: f64,
    inner: WeightFunction,
}

impl WeightRule for ScaledRule {
    fn eval(&self, k: &Natural) -> Natural {
        self.inner.eval(k).mul_f64_floor(self.a)
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        self.inner.breakpoints(max_points, limit)
    }
}

struct FloorComposedRule {
    f: ModulusFunction,
    a: f64,
    inner: WeightFunction,
}

impl WeightRule for FloorComposedRule {
    fn eval(&self, k: &Natural) -> Natural {
        let v = self.inner.eval(k);
        let x = v.to_f64() * self.a;
        if x.is_finite() {
            let y = self.f.eval_real(x);
            if let Some(n) = Natural::from_f64_floor(y) {
                return n;
            }
        }
        // far beyond f64 the fractional part of a*g(k) is immaterial
        let scaled = v.mul_f64_floor(self.a);
        let y = self.f.eval_big(&scaled);
        match Natural::from_f64_floor(y) {
            Some(n) => n,
            None => Natural::from_ln(self.f.ln_eval_big(&scaled)).expect("finite log"),
        }
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        self.inner.breakpoints(max_points, limit)
    }
}

struct MaxRule {
    g: WeightFunction,
    h: WeightFunction,
}

impl WeightRule for MaxRule {
    fn eval(&self, k: &Natural) -> Natural {
        let a = self.g.eval(k);
        let b = self.h.eval(k);
        if a >= b {
            a
        } else {
            b
        }
    }

    fn breakpoints(&self, max_points: usize, limit: Option<&Natural>) -> Vec<Natural> {
        let mut v = self.g.breakpoints(max_points, limit);
        v.extend(self.h.breakpoints(max_points, limit));
        finish(v, max_points)
    }
}

/// The defining properties of a modulus function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// `f(0) = 0`.
    ZeroAtZero,
    /// `f(x) > 0` for `x > 0`.
    PositiveOffZero,
    /// `f(x + y) <= f(x) + f(y)`.
    Subadditive,
    /// `x <= y => f(x) <= f(y)`.
    Increasing,
    /// `f(x) -> 0` as `x -> 0+`.
    RightContinuousAtZero,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// The violating sample (one or two arguments), empty when passed.
    pub witness: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn is_modulus(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }
}

/// Integers `0..=20` and a few larger values.
pub fn default_validation_samples() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=20).map(f64::from).collect();
    v.extend([50.0, 100.0, 1e3, 1e4, 1e6]);
    v
}

const VALIDATION_TOL: f64 = 1e-12;

/// Checks the modulus axioms on a finite sample grid. Subadditivity and
/// monotonicity are checked on all ordered pairs `x <= y` of the samples, in
/// lexicographic order, and the first violating pair is reported. Right
/// continuity at zero is judged along `10^-j`, `j = 1..=12`: the values must
/// not increase and must shrink at least tenfold over the run.
pub fn validate_modulus(f: &ModulusFunction, samples: Option<&[f64]>) -> ValidationReport {
    let default = default_validation_samples();
    let mut xs: Vec<f64> = samples.unwrap_or(&default).to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let tol = |v: f64| VALIDATION_TOL * (1.0 + v.abs());
    let mut checks = Vec::new();

    let f0 = f.eval_real(0.0);
    checks.push(AxiomCheck {
        axiom: Axiom::ZeroAtZero,
        passed: f0 == 0.0,
        witness: if f0 == 0.0 { vec![] } else { vec![0.0] },
        detail: format!("f(0) = {f0}"),
    });

    let bad = xs.iter().copied().find(|&x| x > 0.0 && f.eval_real(x).partial_cmp(&0.0) != Some(Ordering::Greater));
    checks.push(AxiomCheck {
        axiom: Axiom::PositiveOffZero,
        passed: bad.is_none(),
        witness: bad.into_iter().collect(),
        detail: match bad {
            Some(x) => format!("f({x}) = {}", f.eval_real(x)),
            None => "f(x) > 0 on all positive samples".into(),
        },
    });

    let mut sub_bad = None;
    let mut inc_bad = None;
    'outer: for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i..] {
            let (fx, fy, fxy) = (f.eval_real(x), f.eval_real(y), f.eval_real(x + y));
            if sub_bad.is_none() && fxy > fx + fy + tol(fx + fy) {
                sub_bad = Some((x, y, fxy, fx + fy));
            }
            if inc_bad.is_none() && fx > fy + tol(fy) {
                inc_bad = Some((x, y, fx, fy));
            }
            if sub_bad.is_some() && inc_bad.is_some() {
                break 'outer;
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: Axiom::Subadditive,
        passed: sub_bad.is_none(),
        witness: sub_bad.map(|(x, y, _, _)| vec![x, y]).unwrap_or_default(),
        detail: match sub_bad {
            Some((x, y, l, r)) => format!("f({x}+{y}) = {l} > f({x})+f({y}) = {r}"),
            None => "f(x+y) <= f(x)+f(y) on all sample pairs".into(),
        },
    });
    checks.push(AxiomCheck {
        axiom: Axiom::Increasing,
        passed: inc_bad.is_none(),
        witness: inc_bad.map(|(x, y, _, _)| vec![x, y]).unwrap_or_default(),
        detail: match inc_bad {
            Some((x, y, l, r)) => format!("f({x}) = {l} > f({y}) = {r}"),
            None => "nondecreasing on all sample pairs".into(),
        },
    });

    let near: Vec<(f64, f64)> = (1..=12)
        .map(|j| {
            let e = 10f64.powi(-j);
            (e, f.eval_real(e))
        })
        .collect();
    let rising = near.windows(2).find(|w| w[1].1 > w[0].1 + tol(w[0].1));
    let (first, last) = (near[0].1, near[near.len() - 1].1);
    let shrinks = last.is_finite() && last >= 0.0 && last <= 0.1 * first;
    checks.push(AxiomCheck {
        axiom: Axiom::RightContinuousAtZero,
        passed: rising.is_none() && shrinks,
        witness: match (rising, shrinks) {
            (Some(w), _) => vec![w[1].0],
            (None, false) => vec![near[near.len() - 1].0],
            _ => vec![],
        },
        detail: format!("f(1e-1) = {first}, f(1e-12) = {last}"),
    });

    ValidationReport {
        name: f.name().to_string(),
        checks,
    }
}

/// Finite evidence that `g` lies in the class `G`: `g` exceeds growing bounds,
/// and `k / g(k)` stays at least `delta` at infinitely many sampled `k`.
#[derive(Debug, Clone, Serialize)]
pub struct GMembershipEvidence {
    pub weight: String,
    pub delta: f64,
    /// `(B, k)` with `g(k) > B`, the first sampled such `k`.
    pub divergence_witnesses: Vec<(Natural, Natural)>,
    /// `(k, k / g(k))` with `k >= delta * g(k)` exactly.
    pub ratio_witnesses: Vec<(Natural, f64)>,
}

/// Bounds `10^j` tried for divergence witnesses.
const DIVERGENCE_BOUNDS: u32 = 40;

pub fn g_membership_evidence(g: &WeightFunction, horizon: &Natural, delta: f64) -> GMembershipEvidence {
    let schedule = g.sampling_schedule(horizon);
    let values: Vec<(Natural, Natural)> = schedule
        .points()
        .iter()
        .map(|k| (k.clone(), g.eval(k)))
        .collect();

    let mut divergence_witnesses = Vec::new();
    let mut bound = Natural::one();
    for _ in 0..=DIVERGENCE_BOUNDS {
        match values.iter().find(|(_, gk)| gk > &bound) {
            Some((k, _)) => divergence_witnesses.push((bound.clone(), k.clone())),
            None => break,
        }
        bound = bound.mul_u64(10);
    }

    let ratio_witnesses = values
        .iter()
        .filter(|(k, gk)| !gk.is_zero() && k.cmp_scaled(delta, gk) != Ordering::Less)
        .map(|(k, gk)| (k.clone(), index_ratio(k, gk)))
        .collect();

    GMembershipEvidence {
        weight: g.name().to_string(),
        delta,
        divergence_witnesses,
        ratio_witnesses,
    }
}

/// `a / b` as `f64`, through logarithms when the operands overflow.
pub fn index_ratio(a: &Natural, b: &Natural) -> f64 {
    let (x, y) = (a.to_f64(), b.to_f64());
    if x.is_finite() && y.is_finite() {
        x / y
    } else {
        Natural::ln_ratio(a, b).exp()
    }
}

/// `2^exp` for a small exponent, as a [`Natural`].
pub fn pow2_u64(exp: u64) -> Natural {
    Natural::pow2(BigUint::from(exp))
}
