//! Escape norms, strong approximate groups and Gleason-type inequalities.
//!
//! Test functions carry exact values as `i128` numerators over one common
//! denominator. Derivatives use `∂_g F(x) = F(g^-1 x) - F(x)`, with the shift
//! `T_g F(x) = F(g^-1 x)` read as zero where `g^-1 x` is undefined.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::nilprog::Clause;
use crate::set::ElementSet;
use crate::setops::{power_set, product_set, require_symmetric_with_identity, PowerTower};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

type Q = Ratio<i128>;

fn q_str(r: &Q) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn u_str(r: &Ratio<u64>) -> String {
    crate::setops::ratio_str(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EscapeNorm {
    /// `1/(n+1)`, or `0` once a full cycle `g^n = id` stays inside `A`.
    #[serde(serialize_with = "crate::setops::ser_ratio")]
    pub value: Ratio<u64>,
    /// Largest `n` with `g^i ∈ A` for `0 <= i <= n` (the order of `g` for cycles).
    pub witness_n: usize,
    pub cycle: bool,
    /// The cap was reached without escape or cycle; `value` is then an upper bound.
    pub capped: bool,
}

/// `‖g‖_{e,A}`, exact whenever `cap >= |A|`.
pub fn escape_norm(ctx: &Ctx, a: &ElementSet, g: &[i64], cap: usize) -> Result<EscapeNorm> {
    let id = ctx.identity();
    let mut cur = id.clone();
    for i in 1..=cap {
        let next = match ctx.try_mul(&cur, g)? {
            Some(n) if a.contains(&n) => n,
            _ => {
                return Ok(EscapeNorm { value: Ratio::new(1, i as u64), witness_n: i - 1, cycle: false, capped: false });
            }
        };
        if next == id {
            return Ok(EscapeNorm { value: Ratio::zero(), witness_n: i, cycle: true, capped: false });
        }
        cur = next;
    }
    Ok(EscapeNorm { value: Ratio::new(1, cap as u64 + 1), witness_n: cap, cycle: false, capped: true })
}

fn default_cap(a: &ElementSet) -> usize {
    a.len() + 1
}

/// Escape norms of every element of `elems`, computed in parallel.
pub fn norm_table(ctx: &Ctx, a: &ElementSet, elems: &ElementSet) -> Result<Vec<EscapeNorm>> {
    let cap = default_cap(a);
    elems.to_vec().par_iter().map(|g| escape_norm(ctx, a, g, cap)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StrongApproxParams {
    /// `(S^{A^4})^{m1} ⊆ A`.
    pub m1: u64,
    /// First trapping range: `g, ..., g^{m2} ∈ A^{power_env}` forces `g ∈ A`.
    pub m2: u64,
    /// Second trapping range: `g, ..., g^{m3} ∈ A` forces `g ∈ S`.
    pub m3: u64,
    pub power_env: usize,
    pub regime: Regime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Paper,
    Desk,
}

impl StrongApproxParams {
    /// The constants of the definition: `1000K³`, `1000`, `10⁶K³`, `A^100`.
    pub fn paper(k: u64) -> Self {
        let k3 = k.saturating_pow(3);
        StrongApproxParams {
            m1: 1000u64.saturating_mul(k3),
            m2: 1000,
            m3: 1_000_000u64.saturating_mul(k3),
            power_env: 100,
            regime: Regime::Paper,
        }
    }

    pub fn desk(m1: u64, m2: u64, m3: u64, power_env: usize) -> Self {
        StrongApproxParams { m1, m2, m3, power_env, regime: Regime::Desk }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongReport {
    pub params: StrongApproxParams,
    pub global_stability: Clause,
    pub first_trapping: Clause,
    pub second_trapping: Clause,
    pub pass: bool,
}

/// `{b^-1 s b : s ∈ S, b ∈ B}`.
pub fn conjugate_set(ctx: &Ctx, s: &ElementSet, b: &ElementSet) -> Result<ElementSet> {
    if ctx.group.is_abelian() {
        return Ok(s.clone());
    }
    let parts: Vec<Vec<Elem>> = b
        .to_vec()
        .par_iter()
        .map(|y| {
            let yi = ctx.inv(y)?;
            s.iter().map(|x| ctx.mul(&ctx.mul(&yi, x)?, y)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// `P^k ⊆ target` for `k <= n`, stopping early once the powers stabilise.
fn powers_within(ctx: &Ctx, p: &ElementSet, n: u64, target: &ElementSet) -> Result<std::result::Result<(), (u64, Elem)>> {
    let mut tower = PowerTower::new(ctx, p)?;
    let mut prev_len = 0;
    for k in 1..=n {
        let pk = match tower.power(k as usize) {
            Ok(s) => s,
            Err(Error::Undefined(_)) => return Ok(Err((k, Elem::new()))),
            Err(e) => return Err(e),
        };
        if let Some(x) = pk.first_missing(target) {
            return Ok(Err((k, x.clone())));
        }
        if pk.len() == prev_len {
            break;
        }
        prev_len = pk.len();
    }
    Ok(Ok(()))
}

/// Check the three clauses of a strong approximate group for the core `S`.
pub fn strong_approx_check(ctx: &Ctx, a: &ElementSet, s: &ElementSet, params: StrongApproxParams) -> Result<StrongReport> {
    require_symmetric_with_identity(ctx, a)?;
    require_symmetric_with_identity(ctx, s)?;
    let mut tower = PowerTower::new(ctx, a)?;
    let a4 = tower.power(4)?.clone();
    let q = conjugate_set(ctx, s, &a4)?;
    let global_stability = match powers_within(ctx, &q, params.m1, a)? {
        Ok(()) => Clause::ok(),
        Err((k, x)) => Clause::fail(format!("(S^(A^4))^{k} contains {x:?} outside A")),
    };

    let env = tower.power(params.power_env)?.clone();
    let first_trapping = {
        let bad: Vec<Elem> = env
            .to_vec()
            .into_par_iter()
            .filter(|g| !a.contains(g))
            .map(|g| escape_norm(ctx, &env, &g, params.m2 as usize).map(|e| (g, e)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, e)| e.cycle || e.witness_n as u64 >= params.m2)
            .map(|(g, _)| g)
            .collect();
        match bad.first() {
            None => Clause::ok(),
            Some(g) => Clause::fail(format!("{g:?} has {} powers in A^{} but lies outside A", params.m2, params.power_env)),
        }
    };

    let second_trapping = {
        let bad: Vec<Elem> = a
            .to_vec()
            .into_par_iter()
            .filter(|g| !s.contains(g))
            .map(|g| escape_norm(ctx, a, &g, params.m3 as usize).map(|e| (g, e)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, e)| e.cycle || e.witness_n as u64 >= params.m3)
            .map(|(g, _)| g)
            .collect();
        match bad.first() {
            None => Clause::ok(),
            Some(g) => Clause::fail(format!("{g:?} has {} powers in A but lies outside S", params.m3)),
        }
    };
    let pass = global_stability.pass && first_trapping.pass && second_trapping.pass;
    Ok(StrongReport { params, global_stability, first_trapping, second_trapping, pass })
}

/// A nonnegative function with finite support and exact values `num / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    pub support: ElementSet,
    pub num: Vec<i128>,
    pub den: i128,
}

impl TestFunction {
    pub(crate) fn from_values(values: Vec<(Elem, Q)>) -> Self {
        let values: Vec<(Elem, Q)> = values.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let den = values.iter().fold(1i128, |d, (_, v)| d.lcm(v.denom()));
        let mut pairs: Vec<(Elem, i128)> = values.into_iter().map(|(x, v)| (x, v.numer() * (den / v.denom()))).collect();
        pairs.sort_unstable_by(|p, q| p.0.cmp(&q.0));
        let (elems, num): (Vec<Elem>, Vec<i128>) = pairs.into_iter().unzip();
        TestFunction { support: ElementSet::from_sorted(elems), num, den }
    }

    pub fn num_at(&self, x: &[i64]) -> i128 {
        self.support.index_of(x).map_or(0, |i| self.num[i])
    }

    pub fn value(&self, x: &[i64]) -> Q {
        Ratio::new(self.num_at(x), self.den)
    }

    pub fn sup(&self) -> Q {
        Ratio::new(self.num.iter().copied().max().unwrap_or(0), self.den)
    }

    pub fn to_json(&self, ctx: &Ctx) -> Value {
        let g = &ctx.group;
        Value::Array(
            self.support
                .iter()
                .zip(&self.num)
                .map(|(x, n)| json!({"x": g.elem_to_json(x), "value": q_str(&Ratio::new(*n, self.den))}))
                .collect(),
        )
    }
}

/// `T_g F(x)` as a numerator.
fn shifted(ctx: &Ctx, f: &TestFunction, g_inv: &[i64], x: &[i64]) -> Result<i128> {
    Ok(match ctx.try_mul(g_inv, x)? {
        Some(y) => f.num_at(&y),
        None => 0,
    })
}

/// `∂_g F(x)` as a numerator over `f.den`.
pub fn derivative_at(ctx: &Ctx, f: &TestFunction, g: &[i64], x: &[i64]) -> Result<i128> {
    Ok(shifted(ctx, f, &ctx.inv(g)?, x)? - f.num_at(x))
}

/// `∂_h ∂_g F(x) = ∂_g F(h^-1 x) - ∂_g F(x)`.
pub fn second_derivative_at(ctx: &Ctx, f: &TestFunction, h: &[i64], g: &[i64], x: &[i64]) -> Result<i128> {
    let shifted_part = match ctx.try_mul(&ctx.inv(h)?, x)? {
        Some(y) => derivative_at(ctx, f, g, &y)?,
        None => 0,
    };
    Ok(shifted_part - derivative_at(ctx, f, g, x)?)
}

/// Points where some shift of `F` by one of `shifts` is nonzero.
fn shifted_support(ctx: &Ctx, f: &TestFunction, shifts: &[Elem]) -> Result<ElementSet> {
    let mut pts: Vec<Elem> = f.support.to_vec();
    for g in shifts {
        for x in f.support.iter() {
            if let Some(y) = ctx.try_mul(g, x)? {
                pts.push(y);
            }
        }
    }
    Ok(pts.into_iter().collect())
}

/// `max_x |∂_g F(x)|` as a numerator over `f.den`.
pub fn derivative_sup(ctx: &Ctx, f: &TestFunction, g: &[i64]) -> Result<i128> {
    let dom = shifted_support(ctx, f, &[g.into()])?;
    let mut best = 0;
    for x in dom.iter() {
        best = best.max(derivative_at(ctx, f, g, x)?.abs());
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub points: usize,
    pub holds: bool,
    pub counterexample: Option<String>,
}

/// `∂_{gh} F = ∂_g F + T_g ∂_h F` at every point where any term can be nonzero.
pub fn cocycle_check(ctx: &Ctx, f: &TestFunction, g: &[i64], h: &[i64]) -> Result<IdentityCheck> {
    let gh = ctx.mul(g, h)?;
    let gi = ctx.inv(g)?;
    let dom = shifted_support(ctx, f, &[g.into(), gh.clone()])?;
    for x in dom.iter() {
        let lhs = derivative_at(ctx, f, &gh, x)?;
        let tg = match ctx.try_mul(&gi, x)? {
            Some(y) => derivative_at(ctx, f, h, &y)?,
            None => 0,
        };
        let rhs = derivative_at(ctx, f, g, x)? + tg;
        if lhs != rhs {
            return Ok(IdentityCheck { points: dom.len(), holds: false, counterexample: Some(format!("{x:?}: {lhs} != {rhs}")) });
        }
    }
    Ok(IdentityCheck { points: dom.len(), holds: true, counterexample: None })
}

/// `∂_{g^n} F = n ∂_g F + Σ_{i<n} ∂_{g^i} ∂_g F`, pointwise and exactly.
pub fn taylor_identity_check(ctx: &Ctx, f: &TestFunction, g: &[i64], n: usize) -> Result<IdentityCheck> {
    let mut powers = vec![ctx.identity()];
    for i in 1..=n {
        let next = ctx.mul(&powers[i - 1], g)?;
        powers.push(next);
    }
    let dom = shifted_support(ctx, f, &powers)?;
    for x in dom.iter() {
        let lhs = derivative_at(ctx, f, &powers[n], x)?;
        let mut rhs = n as i128 * derivative_at(ctx, f, g, x)?;
        for p in &powers[..n] {
            rhs += second_derivative_at(ctx, f, p, g, x)?;
        }
        if lhs != rhs {
            return Ok(IdentityCheck { points: dom.len(), holds: false, counterexample: Some(format!("{x:?}: {lhs} != {rhs}")) });
        }
    }
    Ok(IdentityCheck { points: dom.len(), holds: true, counterexample: None })
}

/// Smoothed indicator `φ^(ε)` of `A`, with the distances it was built from.
#[derive(Clone, Debug)]
pub struct Phi {
    pub f: TestFunction,
    pub eps: Q,
    /// `d^(ε)(id, A^c)`.
    pub escape_distance: Q,
    /// `d^(ε)` on `A`, capped at `escape_distance`.
    pub dist: FxHashMap<Elem, Q>,
}

impl Phi {
    /// Lower bound `min(d^(ε)(g), d(id, A^c))` for `d^(ε)(g)`, exact below the cap.
    pub fn distance_floor(&self, g: &[i64]) -> Q {
        self.dist.get(g).copied().unwrap_or(self.escape_distance).min(self.escape_distance)
    }
}

/// Shortest weighted paths from the identity inside `A`, letters `a ∈ A` of weight `‖a‖ + ε`.
///
/// Any factorisation leaving `A` costs at least `d(id, A^c)`, so capping at
/// that value makes the restricted search exact for everything `φ` uses.
pub fn build_phi(ctx: &Ctx, a: &ElementSet, eps: Q) -> Result<Phi> {
    require_symmetric_with_identity(ctx, a)?;
    if eps <= Q::zero() {
        return Err(Error::Hypothesis("eps must be positive".into()));
    }
    let norms = norm_table(ctx, a, a)?;
    let weight: Vec<Q> = norms
        .iter()
        .map(|n| Ratio::new(*n.value.numer() as i128, *n.value.denom() as i128) + eps)
        .collect();
    let n = a.len();
    let id = ctx.identity();
    let mut dist: Vec<Option<Q>> = vec![None; n];
    let start = a.index_of(&id).expect("identity checked");
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Q::zero(), start)));
    let mut escape = Q::one() + eps;
    while let Some(Reverse((d, i))) = heap.pop() {
        if dist[i].is_some() {
            continue;
        }
        dist[i] = Some(d);
        let y = a.get(i);
        for (j, b) in a.iter().enumerate() {
            let nd = d + weight[j];
            match ctx.try_mul(y, b)?.and_then(|z| a.index_of(&z)) {
                Some(k) if dist[k].is_none() => heap.push(Reverse((nd, k))),
                Some(_) => {}
                None => escape = escape.min(nd),
            }
        }
    }
    let dist: FxHashMap<Elem, Q> = a
        .iter()
        .zip(dist)
        .filter_map(|(x, d)| d.map(|d| (x.clone(), d.min(escape))))
        .collect();
    let a_inv: Vec<Elem> = a.iter().map(|x| ctx.inv(x)).collect::<Result<_>>()?;
    let a2 = product_set(ctx, a, a)?;
    let values: Vec<(Elem, Q)> = a2
        .to_vec()
        .into_par_iter()
        .map(|x| {
            let mut m = escape;
            for ai in &a_inv {
                if let Some(y) = ctx.try_mul(&x, ai)? {
                    if let Some(d) = dist.get(&y) {
                        m = m.min(*d);
                    }
                }
            }
            Ok((x, (Q::one() - m / escape).max(Q::zero())))
        })
        .collect::<Result<_>>()?;
    Ok(Phi { f: TestFunction::from_values(values), eps, escape_distance: escape, dist })
}

/// Layered function of the set `Q = S^{A²}`: `1` on `QA`, `1 - i/N` on `Q^{i+1}A \ Q^iA`.
#[derive(Clone, Debug)]
pub struct Psi {
    pub f: TestFunction,
    pub q: ElementSet,
    pub n: usize,
}

pub fn build_psi(ctx: &Ctx, a: &ElementSet, s: &ElementSet, n: usize) -> Result<Psi> {
    require_symmetric_with_identity(ctx, a)?;
    if n == 0 {
        return Err(Error::Hypothesis("N must be positive".into()));
    }
    let a2 = product_set(ctx, a, a)?;
    let q = conjugate_set(ctx, s, &a2)?;
    if let Err((k, x)) = powers_within(ctx, &q, n as u64, a)? {
        return Err(Error::Hypothesis(format!("Q^{k} is not inside A: {x:?}")));
    }
    let mut values: FxHashMap<Elem, Q> = a.iter().map(|x| (x.clone(), Q::one())).collect();
    let mut layer = a.clone();
    for i in 0..n {
        let next = product_set(ctx, &q, &layer)?.union(&layer);
        let v = Ratio::new((n - i) as i128, n as i128);
        for x in next.iter() {
            values.entry(x.clone()).or_insert(v);
        }
        layer = next;
    }
    Ok(Psi { f: TestFunction::from_values(values.into_iter().collect()), q, n })
}

/// `Ψ(x) = (1/|A|) Σ_y φ(y) ψ(y^-1 x)`.
pub fn convolve(ctx: &Ctx, phi: &TestFunction, psi: &TestFunction, a_len: usize) -> Result<TestFunction> {
    let pairs: Vec<(Elem, i128)> = phi
        .support
        .to_vec()
        .par_iter()
        .zip(phi.num.par_iter())
        .map(|(y, &fy)| {
            let mut out = Vec::with_capacity(psi.support.len());
            for (z, &gz) in psi.support.iter().zip(&psi.num) {
                if let Some(x) = ctx.try_mul(y, z)? {
                    out.push((x, fy * gz));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut acc: FxHashMap<Elem, i128> = FxHashMap::default();
    for (x, v) in pairs {
        *acc.entry(x).or_insert(0) += v;
    }
    let den = a_len as i128 * phi.den * psi.den;
    let values: Vec<(Elem, Q)> = acc.into_iter().map(|(x, v)| (x, Ratio::new(v, den))).collect();
    Ok(TestFunction::from_values(values))
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzCheck {
    pub tested: usize,
    pub holds: bool,
    pub worst_slack: Option<String>,
    pub counterexample: Option<String>,
}

/// `‖∂_g φ‖_∞ <= d^(ε)(g) / d^(ε)(id, A^c)` for each `g` in `gs`.
pub fn phi_lipschitz_check(ctx: &Ctx, phi: &Phi, gs: &ElementSet) -> Result<LipschitzCheck> {
    let f = &phi.f;
    let mut worst: Option<Q> = None;
    for g in gs.iter() {
        let lhs = Ratio::new(derivative_sup(ctx, f, g)?, f.den);
        let rhs = phi.distance_floor(g) / phi.escape_distance;
        if lhs > rhs {
            return Ok(LipschitzCheck {
                tested: gs.len(),
                holds: false,
                worst_slack: None,
                counterexample: Some(format!("g = {g:?}: {} > {}", q_str(&lhs), q_str(&rhs))),
            });
        }
        let slack = rhs - lhs;
        worst = Some(worst.map_or(slack, |w| w.min(slack)));
    }
    Ok(LipschitzCheck { tested: gs.len(), holds: true, worst_slack: worst.map(|w| q_str(&w)), counterexample: None })
}

/// `‖∂_q ψ‖_∞ <= 1/N` for every `q = h^y`, `h ∈ S`, `y ∈ A²`.
pub fn psi_lipschitz_check(ctx: &Ctx, psi: &Psi) -> Result<LipschitzCheck> {
    let f = &psi.f;
    let bound = Ratio::new(1, psi.n as i128);
    let mut worst: Option<Q> = None;
    for g in psi.q.iter() {
        let lhs = Ratio::new(derivative_sup(ctx, f, g)?, f.den);
        if lhs > bound {
            return Ok(LipschitzCheck {
                tested: psi.q.len(),
                holds: false,
                worst_slack: None,
                counterexample: Some(format!("q = {g:?}: {} > 1/{}", q_str(&lhs), psi.n)),
            });
        }
        let slack = bound - lhs;
        worst = Some(worst.map_or(slack, |w| w.min(slack)));
    }
    Ok(LipschitzCheck { tested: psi.q.len(), holds: true, worst_slack: worst.map(|w| q_str(&w)), counterexample: None })
}

/// With `Ψ(id) >= 1` and `δ = ‖∂_g Ψ‖_∞ > 0`, every `g^i` with `iδ < 1` lies in `supp Ψ`.
pub fn telescoping_check(ctx: &Ctx, psi: &TestFunction, g: &[i64]) -> Result<Clause> {
    let id = ctx.identity();
    if psi.value(&id) < Q::one() {
        return Ok(Clause::fail("Ψ(id) < 1".into()));
    }
    let delta = derivative_sup(ctx, psi, g)?;
    if delta == 0 {
        return Ok(Clause::ok());
    }
    // i·delta/den < 1  <=>  i·delta < den
    let mut cur = id;
    let mut i: i128 = 0;
    while i * delta < psi.den {
        if psi.num_at(&cur) == 0 {
            return Ok(Clause::fail(format!("g^{i} = {cur:?} is outside supp Ψ")));
        }
        cur = ctx.mul(&cur, g)?;
        i += 1;
    }
    Ok(Clause::ok())
}

/// Ratio `num/den` of escape norms, `None` for `x/0` with `x > 0`.
fn norm_ratio(num: Ratio<u64>, den: Ratio<u64>) -> Option<Ratio<u64>> {
    if den.is_zero() {
        num.is_zero().then(Ratio::zero)
    } else {
        Some(num / den)
    }
}

fn max_ratio(acc: &mut Option<Option<Ratio<u64>>>, r: Option<Ratio<u64>>) {
    *acc = Some(match (acc.take(), r) {
        (None, r) => r,
        (Some(None), _) | (_, None) => None,
        (Some(Some(a)), Some(b)) => Some(a.max(b)),
    });
}

fn ratio_json(r: &Option<Option<Ratio<u64>>>) -> Value {
    match r {
        None => Value::Null,
        Some(None) => json!("inf"),
        Some(Some(x)) => json!(u_str(x)),
    }
}

#[derive(Clone, Debug)]
pub struct GleasonReport {
    pub envelope_power: usize,
    pub envelope_size: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub pairs: usize,
    pub words: usize,
    /// `None` inside means an infinite ratio was observed.
    pub c_conj: Option<Option<Ratio<u64>>>,
    pub c_prod: Option<Option<Ratio<u64>>>,
    pub c_comm: Option<Option<Ratio<u64>>>,
    pub conj_violations: usize,
    pub conj_counterexample: Option<String>,
    pub comm_numerators_zero: bool,
    pub kernel_closed: Clause,
}

impl GleasonReport {
    pub fn conj_bound_holds(&self) -> bool {
        self.conj_violations == 0
    }

    pub fn finite(&self) -> bool {
        !matches!(self.c_prod, Some(None)) && !matches!(self.c_comm, Some(None))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "envelope_power": self.envelope_power,
            "envelope_size": self.envelope_size,
            "exhaustive": self.exhaustive,
            "seed": self.seed,
            "pairs": self.pairs,
            "words": self.words,
            "c_conj": ratio_json(&self.c_conj),
            "c_prod": ratio_json(&self.c_prod),
            "c_comm": ratio_json(&self.c_comm),
            "conj_bound_1000": self.conj_bound_holds(),
            "conj_violations": self.conj_violations,
            "conj_counterexample": self.conj_counterexample,
            "comm_numerators_zero": self.comm_numerators_zero,
            "kernel_closed": self.kernel_closed,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GleasonOptions {
    /// Pairs `g, h` range over `A^envelope_power`.
    pub envelope_power: usize,
    /// Exhaustive when the number of pairs is at most this, sampled otherwise.
    pub sample_budget: usize,
    pub word_len: usize,
    pub words: usize,
    pub seed: u64,
}

impl Default for GleasonOptions {
    fn default() -> Self {
        GleasonOptions { envelope_power: 1, sample_budget: 1 << 20, word_len: 3, words: 2000, seed: 0x61ea }
    }
}

/// Empirical conjugation, product and commutator constants of `‖·‖_{e,A}`.
pub fn gleason_verify(ctx: &Ctx, a: &ElementSet, opts: GleasonOptions) -> Result<GleasonReport> {
    require_symmetric_with_identity(ctx, a)?;
    let env = power_set(ctx, a, opts.envelope_power.max(1))?;
    let cap = default_cap(a);
    let norm = |g: &[i64]| -> Result<Ratio<u64>> { Ok(escape_norm(ctx, a, g, cap)?.value) };
    let env_vec = env.to_vec();
    let env_norms: Vec<Ratio<u64>> = env_vec.par_iter().map(|g| norm(g)).collect::<Result<_>>()?;
    let total = env.len() * env.len();
    let exhaustive = total <= opts.sample_budget;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..env.len()).flat_map(|i| (0..env.len()).map(move |j| (i, j))).collect()
    } else {
        (0..opts.sample_budget).map(|_| (rng.gen_range(0..env.len()), rng.gen_range(0..env.len()))).collect()
    };
    struct PairOut {
        conj: Option<Ratio<u64>>,
        conj_bad: Option<String>,
        comm: Option<Ratio<u64>>,
        comm_zero: bool,
    }
    let outs: Vec<PairOut> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (g, h) = (&env_vec[i], &env_vec[j]);
            let (ng, nh) = (env_norms[i], env_norms[j]);
            let conj = norm(&ctx.group.conj(g, h)?)?;
            let conj_bad = (conj > ng * 1000).then(|| format!("g = {g:?}, h = {h:?}: ‖g^h‖ = {} > 1000·{}", u_str(&conj), u_str(&ng)));
            let comm = norm(&ctx.group.commutator(g, h)?)?;
            Ok(PairOut { conj: norm_ratio(conj, ng), conj_bad, comm: norm_ratio(comm, ng * nh), comm_zero: comm.is_zero() })
        })
        .collect::<Result<_>>()?;
    let mut c_conj = None;
    let mut c_comm = None;
    let mut conj_violations = 0;
    let mut conj_counterexample = None;
    let mut comm_numerators_zero = true;
    for o in outs {
        max_ratio(&mut c_conj, o.conj);
        max_ratio(&mut c_comm, o.comm);
        comm_numerators_zero &= o.comm_zero;
        if let Some(w) = o.conj_bad {
            conj_violations += 1;
            conj_counterexample.get_or_insert(w);
        }
    }
    let mut c_prod = None;
    for _ in 0..opts.words {
        let idx: Vec<usize> = (0..opts.word_len.max(1)).map(|_| rng.gen_range(0..env.len())).collect();
        let mut prod = ctx.identity();
        let mut sum = Ratio::zero();
        for &i in &idx {
            prod = ctx.mul(&prod, &env_vec[i])?;
            sum += env_norms[i];
        }
        max_ratio(&mut c_prod, norm_ratio(norm(&prod)?, sum));
    }
    let kernel: Vec<&Elem> = a.iter().filter(|g| env.index_of(g).is_some_and(|i| env_norms[i].is_zero())).collect();
    let mut kernel_closed = Clause::ok();
    let kernel_set: ElementSet = kernel.iter().map(|g| (*g).clone()).collect();
    'outer: for g in &kernel {
        if !kernel_set.contains(&ctx.inv(g)?) {
            kernel_closed = Clause::fail(format!("inverse of {g:?}"));
            break;
        }
        for h in &kernel {
            let p = ctx.mul(g, h)?;
            if !kernel_set.contains(&p) {
                kernel_closed = Clause::fail(format!("{g:?}·{h:?}"));
                break 'outer;
            }
        }
    }
    Ok(GleasonReport {
        envelope_power: opts.envelope_power,
        envelope_size: env.len(),
        exhaustive,
        seed: opts.seed,
        pairs: pairs.len(),
        words: opts.words,
        c_conj,
        c_prod,
        c_comm,
        conj_violations,
        conj_counterexample,
        comm_numerators_zero,
        kernel_closed,
    })
}

/// All the constructions of the Gleason argument on one strong approximate group.
#[derive(Clone, Debug)]
pub struct GleasonSuite {
    pub strong: StrongReport,
    pub phi: Phi,
    pub psi: Psi,
    pub big_psi: TestFunction,
    pub psi_at_id: Q,
    /// `|A²| / |A|`, which bounds `‖Ψ‖_∞` and is at most `K <= K³`.
    pub sup_bound: Q,
    pub phi_lipschitz: LipschitzCheck,
    pub psi_lipschitz: LipschitzCheck,
    pub cocycle: IdentityCheck,
    pub taylor: IdentityCheck,
    pub telescoping: Clause,
}

impl GleasonSuite {
    pub fn pass(&self) -> bool {
        self.strong.pass
            && self.psi_at_id >= Q::one()
            && self.big_psi.sup() <= self.sup_bound
            && self.phi_lipschitz.holds
            && self.psi_lipschitz.holds
            && self.cocycle.holds
            && self.taylor.holds
            && self.telescoping.pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "strong": self.strong,
            "eps": q_str(&self.phi.eps),
            "escape_distance": q_str(&self.phi.escape_distance),
            "N": self.psi.n,
            "phi_support": self.phi.f.support.len(),
            "psi_support": self.psi.f.support.len(),
            "Psi_support": self.big_psi.support.len(),
            "Psi_id": q_str(&self.psi_at_id),
            "Psi_sup": q_str(&self.big_psi.sup()),
            "Psi_sup_bound": q_str(&self.sup_bound),
            "phi_lipschitz": self.phi_lipschitz,
            "psi_lipschitz": self.psi_lipschitz,
            "cocycle": self.cocycle,
            "taylor": self.taylor,
            "telescoping": self.telescoping,
            "pass": self.pass(),
        })
    }
}

/// Build `φ`, `ψ`, `Ψ` and run the exact identity checks with shifts `g, h` and Taylor order `n`.
#[allow(clippy::too_many_arguments)]
pub fn gleason_suite(
    ctx: &Ctx,
    a: &ElementSet,
    s: &ElementSet,
    params: StrongApproxParams,
    eps: Q,
    n_psi: usize,
    shifts: (&[i64], &[i64]),
    taylor_n: usize,
) -> Result<GleasonSuite> {
    let strong = strong_approx_check(ctx, a, s, params)?;
    let phi = build_phi(ctx, a, eps)?;
    let psi = build_psi(ctx, a, s, n_psi)?;
    let big_psi = convolve(ctx, &phi.f, &psi.f, a.len())?;
    let a2 = product_set(ctx, a, a)?;
    let sup_bound = Ratio::new(a2.len() as i128, a.len() as i128);
    let phi_lipschitz = phi_lipschitz_check(ctx, &phi, a)?;
    let psi_lipschitz = psi_lipschitz_check(ctx, &psi)?;
    let (g, h) = shifts;
    let cocycle = cocycle_check(ctx, &big_psi, g, h)?;
    let taylor = taylor_identity_check(ctx, &big_psi, g, taylor_n)?;
    let telescoping = telescoping_check(ctx, &big_psi, g)?;
    let psi_at_id = big_psi.value(&ctx.identity());
    Ok(GleasonSuite {
        strong,
        phi,
        psi,
        big_psi,
        psi_at_id,
        sup_bound,
        phi_lipschitz,
        psi_lipschitz,
        cocycle,
        taylor,
        telescoping,
    })
}

/// `(|A|, S)` for the interval `{-n..n}` with core `{-⌊n/m1⌋..⌊n/m1⌋}`.
pub fn interval_strong(g: &crate::group::Group, n: i64, m1: i64) -> Result<(ElementSet, ElementSet)> {
    let a = crate::catalogue::interval(g, -n, n)?;
    let r = n / m1.max(1);
    let s = crate::catalogue::interval(g, -r, r)?;
    Ok((a, s))
}

/// Exponential-coordinate Heisenberg box `|x|, |y| <= a`, `|z - xy/2| <= c` with central core `|z| <= core`.
pub fn heisenberg_strong(a: i64, c: i64, core: i64) -> (ElementSet, ElementSet) {
    let big = crate::catalogue::heisenberg_exp_box(a, c);
    let s = (-core..=core).map(|z| crate::group::heis(0, 0, z)).collect();
    (big, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::interval;
    use crate::group::Group;

    fn z() -> Ctx {
        Ctx::global(Group::lattice(1).unwrap())
    }

    #[test]
    fn escape_norm_examples() {
        let ctx = z();
        let a = interval(&ctx.group, -10, 10).unwrap();
        assert_eq!(escape_norm(&ctx, &a, &[3], 100).unwrap().value, Ratio::new(1, 4));
        assert_eq!(escape_norm(&ctx, &a, &[0], 100).unwrap().value, Ratio::zero());
        assert_eq!(escape_norm(&ctx, &a, &[11], 100).unwrap().value, Ratio::one());
        let c = Ctx::global(Group::cyclic(12).unwrap());
        let h: ElementSet = [0, 3, 6, 9].iter().map(|&x| smallvec::smallvec![x]).collect();
        let e = escape_norm(&c, &h, &[3], 100).unwrap();
        assert!(e.cycle && e.value.is_zero() && e.witness_n == 4);
    }

    #[test]
    fn interval_phi_psi_shape() {
        let ctx = z();
        let (a, s) = interval_strong(&ctx.group, 12, 4).unwrap();
        let phi = build_phi(&ctx, &a, Ratio::new(1, 10)).unwrap();
        for x in a.iter() {
            assert_eq!(phi.f.value(x), Q::one());
        }
        assert!(phi.f.support.iter().all(|x| x[0].abs() <= 24));
        let psi = build_psi(&ctx, &a, &s, 4).unwrap();
        // Q = {-3..3}; layer boundaries at 12 + 3i
        assert_eq!(psi.f.value(&[15]), Q::one());
        assert_eq!(psi.f.value(&[18]), Ratio::new(3, 4));
        assert_eq!(psi.f.value(&[24]), Ratio::new(1, 4));
        assert_eq!(psi.f.value(&[25]), Q::zero());
    }

    #[test]
    fn convolution_of_subgroup_indicators() {
        let ctx = Ctx::global(Group::cyclic(12).unwrap());
        let h: ElementSet = [0, 4, 8].iter().map(|&x| smallvec::smallvec![x]).collect();
        let ind = TestFunction::from_values(h.iter().map(|x| (x.clone(), Q::one())).collect());
        let psi = convolve(&ctx, &ind, &ind, h.len()).unwrap();
        assert_eq!(psi, ind);
    }

    #[test]
    fn interval_suite_identities() {
        let ctx = z();
        let (a, s) = interval_strong(&ctx.group, 12, 4).unwrap();
        let suite = gleason_suite(&ctx, &a, &s, StrongApproxParams::desk(4, 4, 4, 2), Ratio::new(1, 10), 4, (&[2], &[-3]), 3).unwrap();
        assert!(suite.cocycle.holds && suite.taylor.holds);
        assert!(suite.psi_at_id >= Q::one());
        assert!(suite.pass(), "{}", suite.to_json());
    }

    #[test]
    fn strong_check_examples() {
        let ctx = z();
        let (a, s) = interval_strong(&ctx.group, 200, 10).unwrap();
        assert!(strong_approx_check(&ctx, &a, &s, StrongApproxParams::desk(10, 4, 12, 2)).unwrap().pass);
        let holes: ElementSet = a.iter().filter(|x| x[0].abs() != 37).cloned().collect();
        let r = strong_approx_check(&ctx, &holes, &s, StrongApproxParams::desk(10, 4, 12, 2)).unwrap();
        assert!(!r.first_trapping.pass && r.first_trapping.witness.is_some());
        let c = Ctx::global(Group::cyclic(9).unwrap());
        let whole = crate::catalogue::whole_group(&c.group, 100).unwrap();
        assert!(strong_approx_check(&c, &whole, &whole, StrongApproxParams::paper(1)).unwrap().pass);
    }

    #[test]
    fn abelian_commutators_vanish() {
        let ctx = z();
        let a = interval(&ctx.group, -6, 6).unwrap();
        let r = gleason_verify(&ctx, &a, GleasonOptions::default()).unwrap();
        assert!(r.exhaustive && r.comm_numerators_zero && r.conj_bound_holds() && r.finite());
    }
}
