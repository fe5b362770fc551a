//! JSON and short-name specs for moduli, weights, sets and indices.

use std::sync::Arc;

use num_bigint::BigUint;
use serde_json::Value;
use thiserror::Error;

use crate::constructions::{eeu4_sets, eeu5_sets, eec_case1_set, lo1_witness, p1_weight, ConstructionError};
use crate::functions::{pointwise_max, FunctionError, ModulusFunction, WeightFunction};
use crate::natural::Natural;
use crate::omega_sets::{
    catalog_set, BlockLength, BlockSide, ComboOp, OmegaSet, PowerBlocks, PowerProfile, Run, SetError, SqrtProfile,
    EvensProfile,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn invalid(msg: impl Into<String>) -> SpecError {
    SpecError::Invalid(msg.into())
}

/// A JSON value if the text parses as one, else the text as a JSON string.
pub fn spec_value(text: &str) -> Value {
    let t = text.trim();
    if t.starts_with('{') || t.starts_with('[') {
        if let Ok(v) = serde_json::from_str(t) {
            return v;
        }
    }
    Value::String(t.to_string())
}

/// Decimal digits, `a^b`, or `Me+E` style (`1e6`) with an integral value.
pub fn parse_natural(text: &str) -> Result<Natural, SpecError> {
    let t = text.trim().replace('_', "");
    if let Some((a, b)) = t.split_once('^') {
        let base: u64 = a.trim().parse().map_err(|_| invalid(format!("bad base in `{text}`")))?;
        let exp: u64 = b.trim().parse().map_err(|_| invalid(format!("bad exponent in `{text}`")))?;
        if base == 2 {
            return Ok(Natural::pow2(BigUint::from(exp)));
        }
        let e = u32::try_from(exp).map_err(|_| invalid(format!("exponent too large in `{text}`")))?;
        return Ok(Natural::from(num_traits::pow::pow(BigUint::from(base), e as usize)));
    }
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: u64 = m.trim().parse().map_err(|_| invalid(format!("bad mantissa in `{text}`")))?;
        let e: usize = e.trim().trim_start_matches('+').parse().map_err(|_| invalid(format!("bad exponent in `{text}`")))?;
        return Ok(Natural::from(BigUint::from(m) * num_traits::pow::pow(BigUint::from(10u32), e)));
    }
    BigUint::parse_bytes(t.as_bytes(), 10)
        .map(Natural::from)
        .ok_or_else(|| invalid(format!("`{text}` is not a nonnegative integer")))
}

/// A natural from a JSON number or string.
pub fn natural_value(v: &Value) -> Result<Natural, SpecError> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(Natural::from)
            .or_else(|| n.as_f64().filter(|x| x.fract() == 0.0 && *x >= 0.0).and_then(Natural::from_f64_floor))
            .ok_or_else(|| invalid(format!("`{n}` is not a nonnegative integer"))),
        Value::String(s) => parse_natural(s),
        _ => Err(invalid(format!("expected an integer, got {v}"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, SpecError> {
    v.get(key).ok_or_else(|| invalid(format!("missing `{key}` in {v}")))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str, SpecError> {
    field(v, key)?.as_str().ok_or_else(|| invalid(format!("`{key}` must be a string in {v}")))
}

fn f64_field(v: &Value, key: &str) -> Result<f64, SpecError> {
    field(v, key)?.as_f64().ok_or_else(|| invalid(format!("`{key}` must be a number in {v}")))
}

fn check_kind(v: &Value, kind: &str) -> Result<(), SpecError> {
    match v.get("kind").and_then(Value::as_str) {
        None => Ok(()),
        Some(k) if k == kind => Ok(()),
        Some(k) => Err(invalid(format!("expected kind `{kind}`, got `{k}`"))),
    }
}

/// `"log1p"` or `{"kind":"modulus","name":"power","beta":0.5}`.
pub fn parse_modulus(v: &Value) -> Result<ModulusFunction, SpecError> {
    if let Some(s) = v.as_str() {
        return Ok(ModulusFunction::from_name(s)?);
    }
    check_kind(v, "modulus")?;
    let name = str_field(v, "name")?;
    if name == "power" {
        return Ok(ModulusFunction::power(f64_field(v, "beta")?)?);
    }
    Ok(ModulusFunction::from_name(name)?)
}

/// `"eeu3"`, `{"kind":"weight","name":"es1"}`, `{"kind":"weight","op":"max","args":[...]}`,
/// `{"name":"scaled","a":2,"arg":...}`, `{"name":"floor_composed","modulus":...,"a":1,"arg":...}`,
/// `{"name":"p1","anchors":[...]}`.
pub fn parse_weight(v: &Value) -> Result<WeightFunction, SpecError> {
    if let Some(s) = v.as_str() {
        return Ok(WeightFunction::from_name(s)?);
    }
    check_kind(v, "weight")?;
    if let Some(op) = v.get("op") {
        if op.as_str() != Some("max") {
            return Err(invalid(format!("unknown weight op {op}")));
        }
        let args = field(v, "args")?.as_array().ok_or_else(|| invalid("`args` must be a list"))?;
        let mut it = args.iter().map(parse_weight);
        let first = it.next().ok_or_else(|| invalid("`max` needs at least one argument"))??;
        return it.try_fold(first, |acc, w| Ok(pointwise_max(&acc, &w?)));
    }
    let name = str_field(v, "name")?;
    match name {
        "scaled" => Ok(WeightFunction::scaled(f64_field(v, "a")?, &parse_weight(field(v, "arg")?)?)?),
        "floor_composed" => Ok(WeightFunction::floor_composed(
            &parse_modulus(field(v, "modulus")?)?,
            f64_field(v, "a")?,
            &parse_weight(field(v, "arg")?)?,
        )?),
        "p1" => {
            let anchors = field(v, "anchors")?
                .as_array()
                .ok_or_else(|| invalid("`anchors` must be a list"))?
                .iter()
                .map(natural_value)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(p1_weight(&anchors)?)
        }
        _ => Ok(WeightFunction::from_name(name)?),
    }
}

/// Named sets beyond the catalog: `eeu4_c`, `eeu4_d`, `eeu5_c`, `eeu5_d`, `eec1(α)`.
fn named_set(name: &str) -> Result<OmegaSet, SpecError> {
    let n = name.trim();
    match n {
        "eeu4_c" => return Ok(eeu4_sets().0),
        "eeu4_d" => return Ok(eeu4_sets().1),
        "eeu5_c" => return Ok(eeu5_sets().0),
        "eeu5_d" => return Ok(eeu5_sets().1),
        _ => {}
    }
    if let Some(a) = n.strip_prefix("eec1(").and_then(|r| r.strip_suffix(')')) {
        let a: f64 = a.trim().parse().map_err(|_| invalid(format!("bad α in `{n}`")))?;
        return Ok(eec_case1_set(a)?);
    }
    Ok(catalog_set(n)?)
}

fn parse_length(v: &Value) -> Result<BlockLength, SpecError> {
    match v {
        Value::String(s) if s == "linear" => Ok(BlockLength::Linear),
        Value::String(s) if s == "square" => Ok(BlockLength::Square),
        Value::Number(n) => n
            .as_u64()
            .map(BlockLength::Constant)
            .ok_or_else(|| invalid(format!("bad block length {n}"))),
        _ => Err(invalid(format!("bad block length {v}"))),
    }
}

/// `"sqrt"`, `{"kind":"profile","name":"sqrt"}`, `{"kind":"profile","name":"power","a":0.5}`,
/// `{"kind":"intervals","rule":"lo1","params":{"f":..,"g":..,"m_max":6}}`,
/// `{"kind":"intervals","rule":"explicit","params":{"runs":[[a,b],...]}}`,
/// `{"kind":"intervals","rule":"power_blocks","params":{"first_m":1,"length":"linear","side":"after"}}`,
/// `{"kind":"finite","elements":[...]}`, `{"kind":"combo","op":"union","args":[...]}`.
pub fn parse_set(v: &Value) -> Result<OmegaSet, SpecError> {
    if let Some(s) = v.as_str() {
        return named_set(s);
    }
    let kind = str_field(v, "kind")?;
    match kind {
        "profile" => {
            let name = str_field(v, "name")?;
            match name {
                "sqrt" => Ok(OmegaSet::profile_set("sqrt", Arc::new(SqrtProfile))?),
                "evens" => Ok(OmegaSet::profile_set("evens", Arc::new(EvensProfile))?),
                "power" => {
                    let a = f64_field(v, "a")?;
                    Ok(OmegaSet::profile_set(&format!("power({a})"), Arc::new(PowerProfile::from_f64(a)?))?)
                }
                _ => named_set(name),
            }
        }
        "catalog" => named_set(str_field(v, "name")?),
        "finite" => {
            let els = field(v, "elements")?
                .as_array()
                .ok_or_else(|| invalid("`elements` must be a list"))?
                .iter()
                .map(natural_value)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(OmegaSet::finite(els))
        }
        "intervals" => {
            let rule = str_field(v, "rule")?;
            let empty = Value::Object(Default::default());
            let p = v.get("params").unwrap_or(&empty);
            match rule {
                "lo1" => {
                    let f = parse_modulus(p.get("f").unwrap_or(&Value::String("log1p".into())))?;
                    let g = parse_weight(p.get("g").unwrap_or(&Value::String("es1".into())))?;
                    let m = p.get("m_max").and_then(Value::as_u64).unwrap_or(6) as usize;
                    Ok(lo1_witness(&f, &g, m)?.set)
                }
                "explicit" => {
                    let runs = field(p, "runs")?
                        .as_array()
                        .ok_or_else(|| invalid("`runs` must be a list"))?
                        .iter()
                        .map(|r| -> Result<Run, SpecError> {
                            let pair = r.as_array().filter(|a| a.len() == 2).ok_or_else(|| invalid("runs are [start, end] pairs"))?;
                            Ok((natural_value(&pair[0])?, natural_value(&pair[1])?))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(OmegaSet::intervals("explicit", runs)?)
                }
                "power_blocks" => {
                    let first_m = p.get("first_m").and_then(Value::as_u64).unwrap_or(1);
                    let length = parse_length(p.get("length").unwrap_or(&Value::String("linear".into())))?;
                    let side = match p.get("side").and_then(Value::as_str).unwrap_or("after") {
                        "after" => BlockSide::After,
                        "before" => BlockSide::Before,
                        s => return Err(invalid(format!("unknown side `{s}`"))),
                    };
                    Ok(OmegaSet::interval_union(
                        "power_blocks",
                        Arc::new(PowerBlocks { first_m, length, side }),
                    )?)
                }
                _ => Err(invalid(format!("unknown interval rule `{rule}`"))),
            }
        }
        "combo" => {
            let op = str_field(v, "op")?;
            let op = ComboOp::from_name(op).ok_or_else(|| invalid(format!("unknown combo op `{op}`")))?;
            let args = field(v, "args")?.as_array().ok_or_else(|| invalid("`args` must be a list"))?;
            if args.len() < 2 {
                return Err(invalid("combo needs at least two arguments"));
            }
            let mut acc = parse_set(&args[0])?;
            for a in &args[1..] {
                acc = OmegaSet::boolean_combo(op, &acc, &parse_set(a)?);
            }
            Ok(acc)
        }
        _ => Err(invalid(format!("unknown set kind `{kind}`"))),
    }
}
