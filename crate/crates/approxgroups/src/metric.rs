//! Birkhoff–Kakutani pseudometrics built from nested chains of symmetric sets.
//!
//! For a chain `A_0 ⊇ A_1 ⊇ … ⊇ A_K` and a dyadic `q = Σ 2^-i_j` with
//! denominator `2^K`, `B_q = A_{i_m} ⋯ A_{i_1}` (finest index leftmost) and
//! `B_0 = {id}`. Then `ψ(x) = 1 - min{q : x ∈ B_q}` and
//! `d(g, h) = ‖∂_{h^-1 g} ψ‖_∞`.
//!
//! `ψ` is supported in `A_0`, so `d(g, id) = 1` for `g ∉ A_0²` and every
//! inclusion check over `A_0²` is a check over the whole group.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::gleason::TestFunction;
use crate::group::{heis, Elem, Group};
use crate::nilprog::Clause;
use crate::set::ElementSet;
use crate::setops::{power_set, product_set, require_symmetric_with_identity};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};

/// Largest supported chain depth; `B_q` is materialised for all `2^K` values of `q`.
pub const MAX_DEPTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Nesting {
    /// `A_{i+1}² ⊆ A_i`.
    Plain,
    /// `(A_{i+1}²)^{A_0^p} ⊆ A_i`.
    Normal,
}

#[derive(Clone, Debug)]
pub struct NestedChain {
    pub sets: Vec<ElementSet>,
    pub mode: Nesting,
    /// Conjugation range `p` used in normal mode.
    pub normal_power: usize,
}

impl NestedChain {
    /// Validate symmetry and the declared nesting relation.
    pub fn new(ctx: &Ctx, sets: Vec<ElementSet>, mode: Nesting, normal_power: usize) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Hypothesis("empty chain".into()));
        }
        if sets.len() > MAX_DEPTH + 1 {
            return Err(Error::Budget(format!("chain depth {} exceeds {MAX_DEPTH}", sets.len() - 1)));
        }
        for s in &sets {
            require_symmetric_with_identity(ctx, s)?;
        }
        let chain = NestedChain { sets, mode, normal_power };
        for (i, c) in chain.nesting_clauses(ctx)?.into_iter().enumerate() {
            if let Some(w) = c.witness {
                return Err(Error::Hypothesis(format!("nesting fails at level {}: {w}", i + 1)));
            }
        }
        Ok(chain)
    }

    pub fn depth(&self) -> usize {
        self.sets.len() - 1
    }

    /// One clause per `i >= 1` for the relation between `A_i` and `A_{i-1}`.
    pub fn nesting_clauses(&self, ctx: &Ctx) -> Result<Vec<Clause>> {
        let mut out = Vec::new();
        for i in 1..self.sets.len() {
            let sq = product_set(ctx, &self.sets[i], &self.sets[i])?;
            let target = &self.sets[i - 1];
            let clause = match self.mode {
                Nesting::Plain => match sq.first_missing(target) {
                    None => Clause::ok(),
                    Some(x) => Clause::fail(format!("{x:?} ∈ A_{i}² \\ A_{}", i - 1)),
                },
                Nesting::Normal => conjugation_closure(ctx, &sq, &self.sets[0], self.normal_power, target)?,
            };
            out.push(clause);
        }
        Ok(out)
    }

    pub fn to_json(&self, ctx: &Ctx) -> Value {
        json!({
            "mode": self.mode,
            "normal_power": self.normal_power,
            "sizes": self.sets.iter().map(ElementSet::len).collect::<Vec<_>>(),
            "sets": self.sets.iter().map(|s| s.to_json(&ctx.group)).collect::<Vec<_>>(),
        })
    }
}

/// `X^{A_0^p} ⊆ target`, by closing `X` under conjugation by `A_0` for `p` rounds.
fn conjugation_closure(ctx: &Ctx, x: &ElementSet, a0: &ElementSet, p: usize, target: &ElementSet) -> Result<Clause> {
    if let Some(e) = x.first_missing(target) {
        return Ok(Clause::fail(format!("{e:?} outside the previous set")));
    }
    if ctx.group.is_abelian() {
        return Ok(Clause::ok());
    }
    let conj: Vec<(Elem, Elem)> = a0.iter().map(|h| Ok((ctx.inv(h)?, h.clone()))).collect::<Result<_>>()?;
    let mut seen = x.clone();
    let mut frontier = x.to_vec();
    for round in 1..=p {
        let fresh: Vec<Elem> = frontier
            .par_iter()
            .map(|e| {
                let mut v = Vec::new();
                for (hi, h) in &conj {
                    let Some(l) = ctx.try_mul(hi, e)? else { continue };
                    let Some(c) = ctx.try_mul(&l, h)? else { continue };
                    v.push(c);
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .filter(|c| !seen.contains(c))
            .collect();
        let fresh: ElementSet = fresh.into_iter().collect();
        if let Some(e) = fresh.first_missing(target) {
            return Ok(Clause::fail(format!("{e:?} reached after {round} conjugations")));
        }
        if fresh.is_empty() {
            break;
        }
        seen = seen.union(&fresh);
        frontier = fresh.to_vec();
    }
    Ok(Clause::ok())
}

/// `ψ` together with the sets `B_q`, indexed by `j = q·2^K`.
#[derive(Clone, Debug)]
pub struct PseudoMetric {
    pub depth: usize,
    pub b: Vec<ElementSet>,
    pub psi: TestFunction,
}

fn dyadic(num: i128, depth: usize) -> Ratio<i128> {
    Ratio::new(num, 1i128 << depth)
}

pub fn bk_build(ctx: &Ctx, chain: &NestedChain) -> Result<PseudoMetric> {
    let k = chain.depth();
    let n = 1usize << k;
    let mut b: Vec<ElementSet> = Vec::with_capacity(n);
    b.push(ElementSet::singleton(ctx.identity()));
    for j in 1..n {
        // lowest set bit of j is the finest digit 2^-i with i = k - tz
        let tz = j.trailing_zeros() as usize;
        let rest = j & (j - 1);
        let finest = &chain.sets[k - tz];
        let set = if rest == 0 { finest.clone() } else { product_set(ctx, finest, &b[rest])? };
        b.push(set);
    }
    let mut first: FxHashMap<Elem, usize> = FxHashMap::default();
    for (j, s) in b.iter().enumerate() {
        for x in s.iter() {
            first.entry(x.clone()).or_insert(j);
        }
    }
    let values = first.into_iter().map(|(x, j)| (x, dyadic((n - j) as i128, k))).collect();
    Ok(PseudoMetric { depth: k, b, psi: TestFunction::from_values(values) })
}

impl PseudoMetric {
    /// `d(g, id) = ‖∂_g ψ‖_∞`.
    pub fn norm(&self, ctx: &Ctx, g: &[i64]) -> Result<Ratio<i128>> {
        let psi = &self.psi;
        let gi = ctx.inv(g)?;
        let mut best = 0i128;
        for (y, &v) in psi.support.iter().zip(&psi.num) {
            let back = ctx.try_mul(&gi, y)?.map_or(0, |z| psi.num_at(&z));
            best = best.max((back - v).abs());
            if let Some(z) = ctx.try_mul(g, y)? {
                best = best.max((v - psi.num_at(&z)).abs());
            }
        }
        Ok(Ratio::new(best, psi.den))
    }

    /// `d(g, h) = ‖∂_{h^-1 g} ψ‖_∞`.
    pub fn dist(&self, ctx: &Ctx, g: &[i64], h: &[i64]) -> Result<Ratio<i128>> {
        self.norm(ctx, &ctx.mul(&ctx.inv(h)?, g)?)
    }

    /// `B_q ⊆ B_{q'}` for consecutive dyadics.
    pub fn monotone(&self) -> Clause {
        for j in 1..self.b.len() {
            if let Some(x) = self.b[j - 1].first_missing(&self.b[j]) {
                return Clause::fail(format!("{x:?} ∈ B_{{{j}-1}} \\ B_{{{j}}}"));
            }
        }
        Clause::ok()
    }

    pub fn psi_value(&self, x: &[i64]) -> Ratio<i128> {
        self.psi.value(x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub level: usize,
    /// `{d(g, id) < 2^-k} ⊆ A_k`.
    pub ball_inside: Clause,
    /// `A_k ⊆ {d(g, id) <= 2·2^-k}`.
    pub set_inside: Clause,
    pub ball_size: usize,
    pub set_size: usize,
    pub max_norm_on_set: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub envelope_power: usize,
    pub domain_size: usize,
    pub monotone: Clause,
    pub levels: Vec<LevelReport>,
    pub pass: bool,
}

/// Norms `d(g, id)` over the envelope `A_0^e`, in the envelope's order.
pub fn norm_table(ctx: &Ctx, pm: &PseudoMetric, domain: &ElementSet) -> Result<Vec<Ratio<i128>>> {
    domain.to_vec().par_iter().map(|g| pm.norm(ctx, g)).collect()
}

/// Check both inclusions at every level over `A_0^envelope_power` (`>= 2` makes the check exhaustive).
pub fn bk_verify_inclusions(ctx: &Ctx, chain: &NestedChain, pm: &PseudoMetric, envelope_power: usize) -> Result<InclusionReport> {
    let domain = power_set(ctx, &chain.sets[0], envelope_power.max(1))?;
    let norms = norm_table(ctx, pm, &domain)?;
    let mut levels = Vec::new();
    for (k, ak) in chain.sets.iter().enumerate() {
        let thr = dyadic(1, k);
        let mut ball_size = 0;
        let mut ball_inside = Clause::ok();
        let mut set_inside = Clause::ok();
        let mut max_norm = Ratio::from_integer(0);
        for (g, d) in domain.iter().zip(&norms) {
            if *d < thr {
                ball_size += 1;
                if ball_inside.pass && !ak.contains(g) {
                    ball_inside = Clause::fail(format!("d({g:?}, id) = {d} < 2^-{k} but {g:?} ∉ A_{k}"));
                }
            }
        }
        for g in ak.iter() {
            let d = match domain.index_of(g) {
                Some(i) => norms[i],
                None => pm.norm(ctx, g)?,
            };
            max_norm = max_norm.max(d);
            if set_inside.pass && d > thr * 2 {
                set_inside = Clause::fail(format!("{g:?} ∈ A_{k} with d = {d}"));
            }
        }
        levels.push(LevelReport {
            level: k,
            ball_inside,
            set_inside,
            ball_size,
            set_size: ak.len(),
            max_norm_on_set: max_norm.to_string(),
        });
    }
    let monotone = pm.monotone();
    let pass = monotone.pass && levels.iter().all(|l| l.ball_inside.pass && l.set_inside.pass);
    Ok(InclusionReport { envelope_power, domain_size: domain.len(), monotone, levels, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub probes: usize,
    pub seed: u64,
    pub product_checks: usize,
    pub inverse_checks: usize,
    pub product: Clause,
    pub inverse: Clause,
    pub pass: bool,
}

/// Discrete continuity of product and inverse on a seeded probe set `P ⊆ A_0`.
///
/// At each level `k <= K - 2`: `d(g, g') < 2^-(k+2)` and `d(h, h') < 2^-(k+1)`
/// give `d(gh, g'h') <= 2·2^-k`, and `d(g, g') < 2^-(k+1)` gives
/// `d(g^-1, g'^-1) <= 2·2^-k`. Writing `g' = gx`, `h' = hy`, the product
/// displacement `(gh)^-1 g'h' = x^h y` does not depend on `g`.
pub fn bk_continuity_probe(ctx: &Ctx, chain: &NestedChain, pm: &PseudoMetric, probes: usize, seed: u64) -> Result<ContinuityReport> {
    let a0 = &chain.sets[0];
    let domain = power_set(ctx, a0, 2)?;
    let norms = norm_table(ctx, pm, &domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = a0.to_vec();
    p.shuffle(&mut rng);
    p.truncate(probes.max(1));
    p.sort_unstable();
    let ball = |j: usize| -> Vec<Elem> {
        let thr = dyadic(1, j);
        domain.iter().zip(&norms).filter(|(_, d)| **d < thr).map(|(g, _)| g.clone()).collect()
    };
    let lookup = |g: &Elem| -> Result<Ratio<i128>> {
        match domain.index_of(g) {
            Some(i) => Ok(norms[i]),
            None => pm.norm(ctx, g),
        }
    };
    let mut product_checks = 0;
    let mut inverse_checks = 0;
    let mut product = Clause::ok();
    let mut inverse = Clause::ok();
    for k in 0..=chain.depth().saturating_sub(2) {
        if chain.depth() < 2 {
            break;
        }
        let bound = dyadic(2, k);
        let (bx, by) = (ball(k + 2), ball(k + 1));
        for h in &p {
            let hi = ctx.inv(h)?;
            for x in &bx {
                let xh = ctx.mul(&ctx.mul(&hi, x)?, h)?;
                for y in &by {
                    let disp = ctx.mul(&xh, y)?;
                    product_checks += 1;
                    let d = lookup(&disp)?;
                    if product.pass && d > bound {
                        product = Clause::fail(format!("level {k}: h = {h:?}, x = {x:?}, y = {y:?}: d = {d}"));
                    }
                }
            }
        }
        for g in &p {
            let gi = ctx.inv(g)?;
            for x in &by {
                // g' = g x, d(g^-1, g'^-1) = d(g x g^-1, id)
                let disp = ctx.mul(&ctx.mul(g, x)?, &gi)?;
                inverse_checks += 1;
                let d = lookup(&disp)?;
                if inverse.pass && d > bound {
                    inverse = Clause::fail(format!("level {k}: g = {g:?}, x = {x:?}: d = {d}"));
                }
            }
        }
    }
    let pass = product.pass && inverse.pass;
    Ok(ContinuityReport { probes: p.len(), seed, product_checks, inverse_checks, product, inverse, pass })
}

/// `A_j = {-⌊n/2^j⌋..⌊n/2^j⌋}` for `j <= depth`.
pub fn dyadic_interval_chain(g: &Group, n: i64, depth: usize) -> Result<Vec<ElementSet>> {
    (0..=depth).map(|j| crate::catalogue::interval(g, -(n >> j), n >> j)).collect()
}

/// Exponential-coordinate boxes with `a_j = a_0/2^j`, `c_j = c_0/4^j`.
pub fn heisenberg_box_chain(a0: i64, c0: i64, depth: usize) -> Vec<ElementSet> {
    (0..=depth).map(|j| crate::catalogue::heisenberg_exp_box(a0 >> j, c0 >> (2 * j))).collect()
}

/// `A_0` an exponential box, `A_j = {(0, 0, z) : |z| <= c_0/2^j}` central for `j >= 1`.
pub fn heisenberg_central_chain(a0: i64, c0: i64, depth: usize) -> Vec<ElementSet> {
    let mut v = vec![crate::catalogue::heisenberg_exp_box(a0, c0)];
    for j in 1..=depth {
        let c = c0 >> j;
        v.push((-c..=c).map(|z| heis(0, 0, z)).collect());
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Ctx {
        Ctx::global(Group::lattice(1).unwrap())
    }

    /// Staircase value of `ψ` on the dyadic interval chain, by direct enumeration of the `B_q`.
    fn staircase_oracle(n: i64, depth: usize, x: i64) -> Ratio<i128> {
        let radius = |q: usize| -> i64 {
            (0..depth).filter(|i| q >> i & 1 == 1).map(|i| n >> (depth - i)).sum()
        };
        let m = (0..1usize << depth).find(|&q| x.abs() <= if q == 0 { 0 } else { radius(q) });
        m.map_or(Ratio::from_integer(0), |q| dyadic(((1usize << depth) - q) as i128, depth))
    }

    #[test]
    fn interval_chain_staircase_and_inclusions() {
        let ctx = z();
        let sets = dyadic_interval_chain(&ctx.group, 64, 4).unwrap();
        let chain = NestedChain::new(&ctx, sets, Nesting::Plain, 0).unwrap();
        let pm = bk_build(&ctx, &chain).unwrap();
        for x in -70..=70 {
            assert_eq!(pm.psi_value(&[x]), staircase_oracle(64, 4, x), "x = {x}");
        }
        let rep = bk_verify_inclusions(&ctx, &chain, &pm, 2).unwrap();
        assert!(rep.pass, "{}", serde_json::to_string(&rep).unwrap());
    }

    #[test]
    fn single_set_chain_is_indicator_metric() {
        let ctx = z();
        let chain = NestedChain::new(&ctx, dyadic_interval_chain(&ctx.group, 5, 0).unwrap(), Nesting::Plain, 0).unwrap();
        let pm = bk_build(&ctx, &chain).unwrap();
        for g in -12..=12 {
            let d = pm.norm(&ctx, &[g]).unwrap();
            assert_eq!(d, Ratio::from_integer(if g == 0 { 0 } else { 1 }));
        }
    }

    #[test]
    fn subgroup_chain_levels_are_dyadic() {
        let ctx = Ctx::global(Group::cyclic(16).unwrap());
        let sub = |step: i64| -> ElementSet { (0..16).step_by(step as usize).map(|x| smallvec::smallvec![x]).collect() };
        let chain = NestedChain::new(&ctx, vec![sub(2), sub(4), sub(8)], Nesting::Plain, 0).unwrap();
        let pm = bk_build(&ctx, &chain).unwrap();
        for g in 0..16 {
            let d = pm.norm(&ctx, &[g]).unwrap();
            assert_eq!(d.denom() & (d.denom() - 1), 0);
        }
    }

    #[test]
    fn nesting_violation_is_rejected() {
        let ctx = z();
        let sets = vec![crate::catalogue::interval(&ctx.group, -5, 5).unwrap(), crate::catalogue::interval(&ctx.group, -3, 3).unwrap()];
        assert!(matches!(NestedChain::new(&ctx, sets, Nesting::Plain, 0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn heisenberg_chains() {
        let ctx = Ctx::global(Group::heisenberg());
        let chain = NestedChain::new(&ctx, heisenberg_central_chain(2, 8, 3), Nesting::Normal, 100).unwrap();
        let pm = bk_build(&ctx, &chain).unwrap();
        assert!(bk_verify_inclusions(&ctx, &chain, &pm, 2).unwrap().pass);
        assert!(bk_continuity_probe(&ctx, &chain, &pm, 24, 7).unwrap().pass);
        let boxes = heisenberg_box_chain(4, 16, 2);
        assert!(NestedChain::new(&ctx, boxes.clone(), Nesting::Normal, 100).is_err());
        let plain = NestedChain::new(&ctx, boxes, Nesting::Plain, 0).unwrap();
        let pm = bk_build(&ctx, &plain).unwrap();
        assert!(bk_verify_inclusions(&ctx, &plain, &pm, 2).unwrap().pass);
    }
}
