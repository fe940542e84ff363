//! Text descriptors for groups, sets and chains.
//!
//! Compact forms are colon-separated (`cyclic:41`, `interval:-10:10`); JSON
//! forms start with `{` or `[`. Errors carry the 1-based column of the
//! offending field.

use crate::catalogue;
use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::{Elem, Group, Ring};
use crate::set::ElementSet;
use crate::nilprog::{enumerate_progression, ProgressionSpec};
use num_rational::Ratio;
use serde_json::Value;

fn err(msg: impl Into<String>, col: usize) -> Error {
    Error::Descriptor { msg: msg.into(), col }
}

/// Colon-separated fields with their 1-based starting columns.
fn fields(text: &str, base: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ':' {
            out.push((&text[start..i], base + text[..start].chars().count()));
            start = i + 1;
        }
    }
    out.push((&text[start..], base + text[..start].chars().count()));
    out
}

fn int(f: (&str, usize)) -> Result<i64> {
    f.0.trim().parse::<i64>().map_err(|_| err(format!("expected an integer, found {:?}", f.0), f.1))
}

fn uint(f: (&str, usize)) -> Result<u64> {
    f.0.trim().parse::<u64>().map_err(|_| err(format!("expected a positive integer, found {:?}", f.0), f.1))
}

fn arity(fs: &[(&str, usize)], n: usize, what: &str) -> Result<()> {
    if fs.len() == n + 1 {
        return Ok(());
    }
    let col = fs.get(n + 1).or(fs.last()).map_or(1, |f| f.1);
    Err(err(format!("{what} takes {n} field(s), found {}", fs.len() - 1), col))
}

fn json_error(e: serde_json::Error, base: usize) -> Error {
    err(e.to_string(), base + e.column().saturating_sub(1))
}

fn invalid_at(col: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidGroup(m) => err(m, col),
        other => other,
    }
}

/// Parse a group descriptor.
pub fn parse_group(text: &str) -> Result<Group> {
    parse_group_at(text, 1)
}

fn parse_group_at(text: &str, base: usize) -> Result<Group> {
    let trimmed = text.trim_start();
    let base = base + (text.len() - trimmed.len());
    let t = trimmed.trim_end();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| json_error(e, base))?;
        return group_from_json(&v).map_err(|e| match e {
            Error::InvalidGroup(m) => err(m, base),
            other => other,
        });
    }
    if let Some(split) = top_level_star(t) {
        let left = parse_group_at(&t[..split], base)?;
        let right = parse_group_at(&t[split + 1..], base + t[..split + 1].chars().count())?;
        return Ok(Group::product(left, right));
    }
    if t.starts_with('(') && t.ends_with(')') {
        return parse_group_at(&t[1..t.len() - 1], base + 1);
    }
    let fs = fields(t, base);
    let (kind, kcol) = fs[0];
    match kind {
        "cyclic" => {
            arity(&fs, 1, kind)?;
            Group::cyclic(uint(fs[1])?).map_err(invalid_at(fs[1].1))
        }
        "lattice" => {
            arity(&fs, 1, kind)?;
            Group::lattice(uint(fs[1])? as usize).map_err(invalid_at(fs[1].1))
        }
        "heisenberg" => {
            arity(&fs, 0, kind)?;
            Ok(Group::heisenberg())
        }
        "unitriangular" => {
            arity(&fs, 2, kind)?;
            let dim = uint(fs[1])? as usize;
            let ring = if fs[2].0 == "int" { Ring::Int } else { Ring::Mod(uint(fs[2])?) };
            Group::unitriangular(dim, ring).map_err(invalid_at(fs[1].1))
        }
        "matmod" => {
            arity(&fs, 2, kind)?;
            Group::matmod(uint(fs[1])? as usize, uint(fs[2])?).map_err(invalid_at(fs[1].1))
        }
        "" => Err(err("empty group descriptor", kcol)),
        _ => Err(err(format!("unknown group kind {kind:?}"), kcol)),
    }
}

fn top_level_star(t: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in t.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn field_u64(v: &Value, key: &str) -> Result<u64> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| Error::InvalidGroup(format!("missing or invalid {key:?}")))
}

/// Inverse of [`Group::to_json`], also accepting `{"kind": "heisenberg"}`.
pub fn group_from_json(v: &Value) -> Result<Group> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::InvalidGroup("missing \"kind\"".into()))?;
    match kind {
        "cyclic" => Group::cyclic(field_u64(v, "modulus")?),
        "lattice" => Group::lattice(field_u64(v, "rank")? as usize),
        "heisenberg" => Ok(Group::heisenberg()),
        "unitriangular" => {
            let dim = field_u64(v, "dim")? as usize;
            let ring = match v.get("ring") {
                Some(Value::String(s)) if s == "int" => Ring::Int,
                Some(Value::Number(n)) => Ring::Mod(n.as_u64().ok_or_else(|| Error::InvalidGroup("bad ring".into()))?),
                Some(Value::Object(_)) => Ring::Mod(field_u64(&v["ring"], "mod")?),
                _ => return Err(Error::InvalidGroup("ring must be \"int\" or a prime".into())),
            };
            Group::unitriangular(dim, ring)
        }
        "matmod" => Group::matmod(field_u64(v, "dim")? as usize, field_u64(v, "p")?),
        "product" => {
            let l = v.get("left").ok_or_else(|| Error::InvalidGroup("missing \"left\"".into()))?;
            let r = v.get("right").ok_or_else(|| Error::InvalidGroup("missing \"right\"".into()))?;
            Ok(Group::product(group_from_json(l)?, group_from_json(r)?))
        }
        _ => Err(Error::InvalidGroup(format!("unknown kind {kind:?}"))),
    }
}

/// A set to be built in some group.
#[derive(Clone, Debug, PartialEq)]
pub enum SetDesc {
    Interval(i64, i64),
    Box(Vec<(i64, i64)>),
    HeisenbergBox(i64),
    HeisenbergExpBox(i64, i64),
    /// `(S ∪ S^-1 ∪ {id})^radius`.
    Ball { radius: usize, generators: Vec<Value> },
    /// Multiples of a step in a cyclic group.
    Multiples(u64),
    Whole,
    Explicit(Vec<Value>),
    Progression(Box<ProgressionDesc>),
}

/// `{"generators": [...], "lengths": [...], "H": set?, "C": rational?}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressionDesc {
    pub generators: Vec<Value>,
    pub lengths: Vec<Ratio<i64>>,
    pub h: Option<SetDesc>,
    pub c: Option<Ratio<i64>>,
}

fn json_ratio(v: &Value) -> std::result::Result<Ratio<i64>, String> {
    match v {
        Value::Number(n) => n.as_i64().map(Ratio::from_integer).ok_or_else(|| format!("{n} is not an integer")),
        Value::String(s) => {
            let (n, d) = s.split_once('/').unwrap_or((s, "1"));
            match (n.trim().parse::<i64>(), d.trim().parse::<i64>()) {
                (Ok(n), Ok(d)) if d != 0 => Ok(Ratio::new(n, d)),
                _ => Err(format!("{s:?} is not a rational")),
            }
        }
        _ => Err(format!("{v} is not a rational")),
    }
}

fn progression_from_json(v: &Value) -> std::result::Result<ProgressionDesc, String> {
    let generators = v.get("generators").and_then(Value::as_array).cloned().ok_or("missing \"generators\"")?;
    let lengths = v
        .get("lengths")
        .and_then(Value::as_array)
        .ok_or("missing \"lengths\"")?
        .iter()
        .map(json_ratio)
        .collect::<std::result::Result<_, _>>()?;
    let h = match v.get("H") {
        Some(h) if !h.is_null() => Some(set_from_json(h)?),
        _ => None,
    };
    let c = match v.get("C") {
        Some(c) if !c.is_null() => Some(json_ratio(c)?),
        _ => None,
    };
    Ok(ProgressionDesc { generators, lengths, h, c })
}

/// Parse a JSON progression descriptor.
pub fn parse_progression(text: &str) -> Result<ProgressionDesc> {
    let v: Value = serde_json::from_str(text.trim()).map_err(|e| json_error(e, 1))?;
    progression_from_json(&v).map_err(|m| err(m, 1))
}

impl ProgressionDesc {
    pub fn build(&self, ctx: &Ctx) -> Result<ProgressionSpec> {
        let g = &ctx.group;
        let gens = self.generators.iter().map(|v| g.elem_from_json(v)).collect::<Result<_>>()?;
        let mut spec = ProgressionSpec::new(gens, self.lengths.clone())?;
        if let Some(h) = &self.h {
            spec.h = Some(h.build(ctx)?);
        }
        spec.c = self.c;
        Ok(spec)
    }
}

/// Parse a set descriptor.
pub fn parse_set(text: &str) -> Result<SetDesc> {
    parse_set_at(text, 1)
}

fn parse_set_at(text: &str, base: usize) -> Result<SetDesc> {
    let trimmed = text.trim_start();
    let base = base + (text.len() - trimmed.len());
    let t = trimmed.trim_end();
    if t.starts_with('[') || t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| json_error(e, base))?;
        return set_from_json(&v).map_err(|m| err(m, base));
    }
    let fs = fields(t, base);
    let (kind, kcol) = fs[0];
    match kind {
        "interval" => {
            arity(&fs, 2, kind)?;
            let (lo, hi) = (int(fs[1])?, int(fs[2])?);
            if lo > hi {
                return Err(err("empty interval", fs[1].1));
            }
            Ok(SetDesc::Interval(lo, hi))
        }
        "box" => {
            if fs.len() < 3 || fs.len() % 2 == 0 {
                return Err(err("box takes pairs lo:hi per coordinate", fs.last().map_or(kcol, |f| f.1)));
            }
            let mut bounds = Vec::new();
            for pair in fs[1..].chunks(2) {
                let (lo, hi) = (int(pair[0])?, int(pair[1])?);
                if lo > hi {
                    return Err(err("empty coordinate range", pair[0].1));
                }
                bounds.push((lo, hi));
            }
            Ok(SetDesc::Box(bounds))
        }
        "heisenberg_box" => {
            arity(&fs, 1, kind)?;
            Ok(SetDesc::HeisenbergBox(uint(fs[1])? as i64))
        }
        "heisenberg_exp_box" => {
            arity(&fs, 2, kind)?;
            Ok(SetDesc::HeisenbergExpBox(uint(fs[1])? as i64, uint(fs[2])? as i64))
        }
        "ball" => {
            // ball:R:<JSON list of generators>
            if fs.len() < 3 {
                return Err(err("ball takes a radius and a JSON generator list", kcol));
            }
            let radius = uint(fs[1])? as usize;
            let rest_col = fs[2].1;
            let rest = &t[t.char_indices().nth(rest_col - base).map_or(t.len(), |(i, _)| i)..];
            let v: Value = serde_json::from_str(rest).map_err(|e| json_error(e, rest_col))?;
            let generators = v.as_array().cloned().ok_or_else(|| err("generators must be a JSON list", rest_col))?;
            Ok(SetDesc::Ball { radius, generators })
        }
        "multiples" => {
            arity(&fs, 1, kind)?;
            Ok(SetDesc::Multiples(uint(fs[1])?))
        }
        "group" => {
            arity(&fs, 0, kind)?;
            Ok(SetDesc::Whole)
        }
        "" => Err(err("empty set descriptor", kcol)),
        _ => Err(err(format!("unknown set kind {kind:?}"), kcol)),
    }
}

fn set_from_json(v: &Value) -> std::result::Result<SetDesc, String> {
    if let Value::Array(xs) = v {
        return Ok(SetDesc::Explicit(xs.clone()));
    }
    if let Some(inner) = v.get("set") {
        return set_from_json(inner);
    }
    let get_i = |k: &str| v.get(k).and_then(Value::as_i64).ok_or_else(|| format!("missing integer {k:?}"));
    if let Some(Value::Array(xs)) = v.get("elements") {
        return Ok(SetDesc::Explicit(xs.clone()));
    }
    match v.get("kind").and_then(Value::as_str).ok_or("missing \"kind\" or \"elements\"")? {
        "interval" => Ok(SetDesc::Interval(get_i("lo")?, get_i("hi")?)),
        "heisenberg_box" => Ok(SetDesc::HeisenbergBox(get_i("n")?)),
        "heisenberg_exp_box" => Ok(SetDesc::HeisenbergExpBox(get_i("a")?, get_i("c")?)),
        "multiples" => Ok(SetDesc::Multiples(get_i("step")? as u64)),
        "group" => Ok(SetDesc::Whole),
        "box" => {
            let b = v.get("bounds").and_then(Value::as_array).ok_or("missing \"bounds\"")?;
            let bounds = b
                .iter()
                .map(|p| match p.as_array().map(|p| (p.first().and_then(Value::as_i64), p.get(1).and_then(Value::as_i64))) {
                    Some((Some(lo), Some(hi))) => Ok((lo, hi)),
                    _ => Err("bounds are [lo, hi] pairs".to_string()),
                })
                .collect::<std::result::Result<_, _>>()?;
            Ok(SetDesc::Box(bounds))
        }
        "progression" => Ok(SetDesc::Progression(Box::new(progression_from_json(v)?))),
        "ball" | "word_ball" => Ok(SetDesc::Ball {
            radius: get_i("radius")? as usize,
            generators: v.get("generators").and_then(Value::as_array).cloned().ok_or("missing \"generators\"")?,
        }),
        k => Err(format!("unknown set kind {k:?}")),
    }
}

impl SetDesc {
    pub fn build(&self, ctx: &Ctx) -> Result<ElementSet> {
        let g = &ctx.group;
        let set = match self {
            SetDesc::Interval(lo, hi) => catalogue::interval(g, *lo, *hi)?,
            SetDesc::Box(bounds) => catalogue::coordinate_box(g, bounds)?,
            SetDesc::HeisenbergBox(n) => {
                require_heisenberg(g)?;
                catalogue::heisenberg_box(*n)
            }
            SetDesc::HeisenbergExpBox(a, c) => {
                require_heisenberg(g)?;
                catalogue::heisenberg_exp_box(*a, *c)
            }
            SetDesc::Ball { radius, generators } => {
                let gens: Vec<Elem> = generators.iter().map(|v| g.elem_from_json(v)).collect::<Result<_>>()?;
                catalogue::word_ball(ctx, &gens, *radius)?
            }
            SetDesc::Multiples(step) => {
                let Group::Cyclic { modulus } = g else {
                    return Err(Error::ContextMismatch("multiples need a cyclic group".into()));
                };
                let d = num_integer::gcd(*step, *modulus).max(1);
                (0..modulus / d).map(|i| Elem::from_elem((i * d) as i64, 1)).collect()
            }
            SetDesc::Whole => catalogue::whole_group(g, ctx.max_set)?,
            SetDesc::Progression(p) => enumerate_progression(ctx, &p.build(ctx)?)?,
            SetDesc::Explicit(xs) => xs.iter().map(|v| g.elem_from_json(v)).collect::<Result<_>>()?,
        };
        ctx.check_size(set.len(), "set")?;
        Ok(set)
    }
}

fn require_heisenberg(g: &Group) -> Result<()> {
    if *g == Group::heisenberg() {
        Ok(())
    } else {
        Err(Error::ContextMismatch(format!("Heisenberg boxes need the Heisenberg group, not {g}")))
    }
}

/// Parse a single element given as JSON (`5`, `[1, 0, 2]`).
pub fn parse_elem(g: &Group, text: &str) -> Result<Elem> {
    let v: Value = serde_json::from_str(text.trim()).map_err(|e| json_error(e, 1))?;
    g.elem_from_json(&v)
}

/// Chain descriptors: `;`-separated set descriptors, or one of
/// `dyadic:N:K`, `heisenberg_chain:A:C:K`, `heisenberg_central:A:C:K`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainDesc {
    Sets(Vec<SetDesc>),
    Dyadic { n: i64, depth: usize },
    HeisenbergBoxes { a: i64, c: i64, depth: usize },
    HeisenbergCentral { a: i64, c: i64, depth: usize },
}

pub fn parse_chain(text: &str) -> Result<ChainDesc> {
    let t = text.trim();
    let fs = fields(t, 1);
    match fs[0].0 {
        "dyadic" => {
            arity(&fs, 2, "dyadic")?;
            Ok(ChainDesc::Dyadic { n: uint(fs[1])? as i64, depth: uint(fs[2])? as usize })
        }
        "heisenberg_chain" | "heisenberg_central" => {
            arity(&fs, 3, fs[0].0)?;
            let (a, c, depth) = (uint(fs[1])? as i64, uint(fs[2])? as i64, uint(fs[3])? as usize);
            Ok(if fs[0].0 == "heisenberg_chain" {
                ChainDesc::HeisenbergBoxes { a, c, depth }
            } else {
                ChainDesc::HeisenbergCentral { a, c, depth }
            })
        }
        _ => {
            let mut sets = Vec::new();
            let mut col = 1;
            for part in t.split(';') {
                sets.push(parse_set_at(part, col)?);
                col += part.chars().count() + 1;
            }
            Ok(ChainDesc::Sets(sets))
        }
    }
}

impl ChainDesc {
    pub fn build(&self, ctx: &Ctx) -> Result<Vec<ElementSet>> {
        match self {
            ChainDesc::Sets(s) => s.iter().map(|d| d.build(ctx)).collect(),
            ChainDesc::Dyadic { n, depth } => crate::metric::dyadic_interval_chain(&ctx.group, *n, *depth),
            ChainDesc::HeisenbergBoxes { a, c, depth } => {
                require_heisenberg(&ctx.group)?;
                Ok(crate::metric::heisenberg_box_chain(*a, *c, *depth))
            }
            ChainDesc::HeisenbergCentral { a, c, depth } => {
                require_heisenberg(&ctx.group)?;
                Ok(crate::metric::heisenberg_central_chain(*a, *c, *depth))
            }
        }
    }
}

/// Parse `p/q` or an integer as a nonnegative rational.
pub fn parse_ratio(text: &str) -> Result<num_rational::Ratio<u64>> {
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t, None),
    };
    let num = uint((n, 1))?;
    let den = match d {
        Some(d) => uint((d, n.chars().count() + 2))?,
        None => 1,
    };
    if den == 0 {
        return Err(err("zero denominator", n.chars().count() + 2));
    }
    Ok(num_rational::Ratio::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_interval_column() {
        match parse_set("interval:a:b") {
            Err(Error::Descriptor { col, .. }) => assert_eq!(col, 10),
            other => panic!("{other:?}"),
        }
        match parse_set("interval:3:x") {
            Err(Error::Descriptor { col, .. }) => assert_eq!(col, 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn groups_round_trip() {
        for text in ["cyclic:20", "lattice:2", "unitriangular:3:int", "unitriangular:3:7", "matmod:3:7", "(cyclic:4)*(cyclic:6)"] {
            let g = parse_group(text).unwrap();
            assert_eq!(parse_group(&g.to_string()).unwrap(), g);
            assert_eq!(group_from_json(&g.to_json()).unwrap(), g);
        }
        assert_eq!(parse_group("heisenberg").unwrap(), Group::heisenberg());
        assert_eq!(parse_group(r#"{"kind":"cyclic","modulus":20}"#).unwrap(), Group::cyclic(20).unwrap());
        assert!(matches!(parse_group("matmod:3:8"), Err(Error::Descriptor { col: 8, .. })));
        assert!(matches!(parse_group("cyclic:12:3"), Err(Error::Descriptor { col: 11, .. })));
    }

    #[test]
    fn sets() {
        let ctx = Ctx::global(Group::cyclic(41).unwrap());
        assert_eq!(parse_set("interval:-10:10").unwrap().build(&ctx).unwrap().len(), 21);
        assert_eq!(parse_set("[0, 1, 40]").unwrap().build(&ctx).unwrap().len(), 3);
        assert_eq!(parse_set(r#"{"elements": [0, 5]}"#).unwrap(), SetDesc::Explicit(vec![0.into(), 5.into()]));
        let z2 = Ctx::global(Group::lattice(2).unwrap());
        assert_eq!(parse_set("ball:2:[[1,0],[0,1]]").unwrap().build(&z2).unwrap().len(), 13);
        assert_eq!(parse_set("box:-1:1:-2:2").unwrap().build(&z2).unwrap().len(), 15);
        let p = r#"{"set": {"kind": "progression", "generators": [[1,0],[0,1]], "lengths": [2, "3/2"]}}"#;
        assert_eq!(parse_set(p).unwrap().build(&z2).unwrap().len(), 15);
        let wb = r#"{"kind": "word_ball", "generators": [[1,0],[0,1]], "radius": 1}"#;
        assert_eq!(parse_set(wb).unwrap().build(&z2).unwrap().len(), 5);
        assert!(matches!(parse_set("ball:2:[[1,0"), Err(Error::Descriptor { .. })));
    }

    #[test]
    fn chains_and_ratios() {
        assert_eq!(parse_chain("dyadic:64:6").unwrap(), ChainDesc::Dyadic { n: 64, depth: 6 });
        let c = parse_chain("interval:-4:4;interval:-2:2").unwrap();
        assert!(matches!(c, ChainDesc::Sets(ref v) if v.len() == 2));
        assert!(matches!(parse_chain("interval:-4:4;interval:x:2"), Err(Error::Descriptor { col: 24, .. })));
        assert_eq!(parse_ratio("3/4").unwrap(), num_rational::Ratio::new(3, 4));
        assert!(parse_ratio("1/0").is_err());
    }
}
