//! Exact product sets, covering witnesses and the elementary covering lemmas.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::{heis, heis_coords, Elem, Group};
use crate::set::ElementSet;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use serde::Serialize;

/// Products above this many pairs are computed in parallel chunks.
const PAR_THRESHOLD: usize = 1 << 16;

pub fn ratio_str(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn inverse_set(ctx: &Ctx, a: &ElementSet) -> Result<ElementSet> {
    a.iter().map(|x| ctx.inv(x)).collect::<Result<Vec<_>>>().map(|v| v.into_iter().collect())
}

pub fn is_symmetric(ctx: &Ctx, a: &ElementSet) -> Result<bool> {
    for x in a.iter() {
        if !a.contains(&ctx.inv(x)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn require_symmetric_with_identity(ctx: &Ctx, a: &ElementSet) -> Result<()> {
    if !a.contains(&ctx.identity()) {
        return Err(Error::MissingIdentity);
    }
    if !is_symmetric(ctx, a)? {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

/// `A ∪ {id} ∪ A^-1`.
pub fn symmetrize(ctx: &Ctx, a: &ElementSet) -> Result<ElementSet> {
    let mut v = a.to_vec();
    v.push(ctx.identity());
    for x in a.iter() {
        v.push(ctx.inv(x)?);
    }
    Ok(v.into_iter().collect())
}

fn products_of(ctx: &Ctx, left: &[&Elem], right: &ElementSet) -> Result<Vec<Elem>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for x in left {
        for y in right.iter() {
            out.push(ctx.mul(x, y)?);
        }
    }
    Ok(out)
}

/// Collect `{xy : x in left, y in right}` into a hash set, in parallel for large inputs.
fn product_hash(ctx: &Ctx, left: Vec<&Elem>, right: &ElementSet) -> Result<FxHashSet<Elem>> {
    if ctx.group == Group::heisenberg() && left.len().saturating_mul(right.len()) >= PAR_THRESHOLD {
        let s = heisenberg_product(left, right.iter())?;
        if let Some(d) = &ctx.domain {
            if let Some(x) = s.iter().find(|x| !d.contains(x)) {
                return Err(Error::Undefined(format!("product leaves the domain at {x:?}")));
            }
        }
        return Ok(s);
    }
    let work = left.len().saturating_mul(right.len());
    if work < PAR_THRESHOLD {
        let mut s = FxHashSet::default();
        s.extend(products_of(ctx, &left, right)?);
        return Ok(s);
    }
    let chunk = (PAR_THRESHOLD / right.len().max(1)).max(1);
    left.par_chunks(chunk)
        .try_fold(FxHashSet::default, |mut acc, c| {
            acc.extend(products_of(ctx, c, right)?);
            ctx.check_size(acc.len(), "product set")?;
            Ok(acc)
        })
        .try_reduce(FxHashSet::default, |a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            big.extend(small);
            ctx.check_size(big.len(), "product set")?;
            Ok(big)
        })
}

/// Maximal runs of consecutive integers in a sorted list.
fn runs(sorted: &[i64]) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &z in sorted {
        match out.last_mut() {
            Some((_, hi)) if *hi + 1 == z => *hi = z,
            _ => out.push((z, z)),
        }
    }
    out
}

fn heisenberg_fibres<'e>(it: impl Iterator<Item = &'e Elem>) -> Vec<((i64, i64), Vec<(i64, i64)>)> {
    let mut m: FxHashMap<(i64, i64), Vec<i64>> = FxHashMap::default();
    for e in it {
        let (x, y, z) = heis_coords(e);
        m.entry((x, y)).or_default().push(z);
    }
    let mut out: Vec<_> = m
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_unstable();
            v.dedup();
            (k, runs(&v))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Product set in the integer Heisenberg group, fibre by fibre over `(x, y)`.
///
/// `(x1,y1,z1)(x2,y2,z2) = (x1+x2, y1+y2, z1+z2+x1*y2)` and `z` is central,
/// so the product of two fibres is a sum of runs shifted by `x1*y2`.
fn heisenberg_product<'e>(
    left: Vec<&'e Elem>,
    right: impl Iterator<Item = &'e Elem>,
) -> Result<FxHashSet<Elem>> {
    let lf = heisenberg_fibres(left.into_iter());
    let rf = heisenberg_fibres(right);
    let ovf = || Error::Overflow("heisenberg product");
    let mut acc: FxHashMap<(i64, i64), Vec<(i64, i64)>> = FxHashMap::default();
    for ((x1, y1), r1) in &lf {
        for ((x2, y2), r2) in &rf {
            let key = (x1.checked_add(*x2).ok_or_else(ovf)?, y1.checked_add(*y2).ok_or_else(ovf)?);
            let shift = x1.checked_mul(*y2).ok_or_else(ovf)?;
            let dst = acc.entry(key).or_default();
            for (a, b) in r1 {
                for (c, d) in r2 {
                    let lo = a.checked_add(*c).and_then(|v| v.checked_add(shift)).ok_or_else(ovf)?;
                    let hi = b.checked_add(*d).and_then(|v| v.checked_add(shift)).ok_or_else(ovf)?;
                    dst.push((lo, hi));
                }
            }
        }
    }
    let mut out = FxHashSet::default();
    for ((x, y), mut iv) in acc {
        iv.sort_unstable();
        let mut cur: Option<(i64, i64)> = None;
        for (lo, hi) in iv.into_iter().chain(std::iter::once((i64::MAX, i64::MAX))) {
            match cur {
                Some((clo, chi)) if lo <= chi.saturating_add(1) => cur = Some((clo, chi.max(hi))),
                _ => {
                    if let Some((clo, chi)) = cur {
                        out.extend((clo..=chi).map(|z| heis(x, y, z)));
                    }
                    cur = Some((lo, hi));
                }
            }
        }
    }
    Ok(out)
}

/// Exact product set `AB`. In a restricted context every product must be defined.
pub fn product_set(ctx: &Ctx, a: &ElementSet, b: &ElementSet) -> Result<ElementSet> {
    let s = product_hash(ctx, a.iter().collect(), b)?;
    ctx.check_size(s.len(), "product set")?;
    Ok(ElementSet::from_hashset(s))
}

/// Cached powers `A^0, A^1, ...` of one set.
///
/// When `id ∈ A`, `A^(k+1) = A^k ∪ (A^k \ A^(k-1))·A`, so only the newest
/// layer is multiplied. In a restricted context every power must stay inside
/// the domain, which is exactly well-definedness of the k-fold products.
pub struct PowerTower<'c> {
    ctx: &'c Ctx,
    powers: Vec<ElementSet>,
    has_identity: bool,
}

impl<'c> PowerTower<'c> {
    pub fn new(ctx: &'c Ctx, a: &ElementSet) -> Result<Self> {
        let id = ctx.identity();
        let mut t = PowerTower {
            ctx,
            powers: vec![ElementSet::singleton(id.clone())],
            has_identity: a.contains(&id),
        };
        t.check_domain(a)?;
        t.powers.push(a.clone());
        Ok(t)
    }

    fn check_domain(&self, s: &ElementSet) -> Result<()> {
        if let Some(d) = &self.ctx.domain {
            if let Some(x) = s.first_missing(d) {
                return Err(Error::Undefined(format!("power leaves the domain at {x:?}")));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &ElementSet {
        &self.powers[1]
    }

    pub fn computed(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn power(&mut self, k: usize) -> Result<&ElementSet> {
        while self.powers.len() <= k {
            let n = self.powers.len();
            let prev = &self.powers[n - 1];
            let base = &self.powers[1];
            let next = if self.has_identity && n >= 2 {
                let older = &self.powers[n - 2];
                let layer: Vec<&Elem> = prev.iter().filter(|x| !older.contains(x)).collect();
                let mut s = product_hash(self.ctx, layer, base)?;
                s.extend(prev.iter().cloned());
                s
            } else {
                product_hash(self.ctx, prev.iter().collect(), base)?
            };
            self.ctx.check_size(next.len(), "power set")?;
            let next = ElementSet::from_hashset(next);
            self.check_domain(&next)?;
            self.powers.push(next);
        }
        Ok(&self.powers[k])
    }

    /// Membership `x ∈ A^k` by meet-in-the-middle against cached powers.
    pub fn contains(&mut self, x: &[i64], k: usize) -> Result<bool> {
        if k < self.powers.len() {
            return Ok(self.powers[k].contains(x));
        }
        let j = self.computed();
        let rest = k - j;
        if rest > j {
            self.power(k.div_ceil(2))?;
            return self.contains(x, k);
        }
        let (big, small) = (&self.powers[j], &self.powers[rest]);
        for u in small.iter() {
            if big.contains(&self.ctx.mul(&self.ctx.inv(u)?, x)?) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

pub fn power_set(ctx: &Ctx, a: &ElementSet, n: usize) -> Result<ElementSet> {
    let mut t = PowerTower::new(ctx, a)?;
    Ok(t.power(n)?.clone())
}

/// Largest `k <= cap` with `A^k` well-defined in the context (always `cap` globally).
pub fn largest_defined_power(ctx: &Ctx, a: &ElementSet, cap: usize) -> Result<usize> {
    let Ok(mut t) = PowerTower::new(ctx, a) else { return Ok(0) };
    for k in 2..=cap {
        match t.power(k) {
            Ok(_) => {}
            Err(Error::Undefined(_)) => return Ok(k - 1),
            Err(e) => return Err(e),
        }
    }
    Ok(cap)
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingStats {
    pub size: usize,
    pub square: usize,
    pub cube: usize,
    pub quotient: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub doubling: Ratio<u64>,
    #[serde(serialize_with = "ser_ratio")]
    pub tripling: Ratio<u64>,
    #[serde(serialize_with = "ser_ratio")]
    pub quotient_ratio: Ratio<u64>,
}

pub fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_str(r))
}

/// `|A|`, `|A²|/|A|`, `|A³|/|A|`, `|AA^-1|/|A|` as exact ratios.
pub fn doubling_stats(ctx: &Ctx, a: &ElementSet) -> Result<DoublingStats> {
    if a.is_empty() {
        return Err(Error::Hypothesis("empty set".into()));
    }
    let a2 = product_set(ctx, a, a)?;
    let a3 = product_set(ctx, &a2, a)?;
    let ainv = inverse_set(ctx, a)?;
    let q = product_set(ctx, a, &ainv)?;
    let n = a.len() as u64;
    Ok(DoublingStats {
        size: a.len(),
        square: a2.len(),
        cube: a3.len(),
        quotient: q.len(),
        doubling: Ratio::new(a2.len() as u64, n),
        tripling: Ratio::new(a3.len() as u64, n),
        quotient_ratio: Ratio::new(q.len() as u64, n),
    })
}

#[derive(Clone, Debug)]
pub struct ApproxWitness {
    pub k: usize,
    pub x: ElementSet,
    pub verified: bool,
    pub method: &'static str,
}

/// Check all clauses of the approximate-group definition for a proposed `X`.
pub fn verify_witness(ctx: &Ctx, a: &ElementSet, a2: &ElementSet, x: &ElementSet, k: usize) -> Result<()> {
    require_symmetric_with_identity(ctx, a)?;
    if x.len() > k {
        return Err(Error::Verification(format!("|X| = {} exceeds K = {k}", x.len())));
    }
    if !is_symmetric(ctx, x)? {
        return Err(Error::Verification("X is not symmetric".into()));
    }
    for g in x.iter() {
        let mut inside = false;
        for b in a.iter() {
            if a2.contains(&ctx.mul(g, &ctx.inv(b)?)?) {
                inside = true;
                break;
            }
        }
        if !inside {
            return Err(Error::Verification(format!("{g:?} is not in A^3")));
        }
    }
    let xinv: Vec<Elem> = x.iter().map(|g| ctx.inv(g)).collect::<Result<_>>()?;
    for y in a2.iter() {
        let mut covered = false;
        for gi in &xinv {
            if a.contains(&ctx.mul(gi, y)?) {
                covered = true;
                break;
            }
        }
        if !covered {
            return Err(Error::Verification(format!("{y:?} in A^2 is not covered by XA")));
        }
    }
    Ok(())
}

/// Above this many `(y, a)` pairs the greedy cover switches to sampled candidates.
pub const EXACT_COVER_WORK: usize = 60_000_000;

/// Greedy symmetric cover of `A²` by left translates `xA`, `x ∈ A³`.
///
/// Each step adds a pair `{x, x^-1}` covering the most uncovered points; ties
/// prefer self-inverse `x`, then canonical order. `None` means the greedy
/// cover needed more than `k_max` translates, which does not rule out a
/// smaller witness.
pub fn approx_group_witness(ctx: &Ctx, a: &ElementSet, k_max: usize) -> Result<Option<ApproxWitness>> {
    require_symmetric_with_identity(ctx, a)?;
    let a2 = product_set(ctx, a, a)?;
    approx_group_witness_with(ctx, a, &a2, k_max)
}

pub fn approx_group_witness_with(
    ctx: &Ctx,
    a: &ElementSet,
    a2: &ElementSet,
    k_max: usize,
) -> Result<Option<ApproxWitness>> {
    let (x, method) = if a2.len().saturating_mul(a.len()) <= EXACT_COVER_WORK {
        (greedy_cover_exact(ctx, a, a2, k_max)?, "exact-greedy")
    } else {
        (greedy_cover_sampled(ctx, a, a2, k_max)?, "sampled-greedy")
    };
    let Some(x) = x else { return Ok(None) };
    let k = x.len();
    verify_witness(ctx, a, a2, &x, k)?;
    Ok(Some(ApproxWitness { k, x, verified: true, method }))
}

fn greedy_cover_exact(ctx: &Ctx, a: &ElementSet, a2: &ElementSet, k_max: usize) -> Result<Option<ElementSet>> {
    // candidate x covers y iff y = x·b for some b, i.e. x = y·b^-1 = y·b'
    let mut cand: indexmap::IndexMap<Elem, u32, rustc_hash::FxBuildHasher> = Default::default();
    for y in a2.iter() {
        for b in a.iter() {
            *cand.entry(ctx.mul(y, b)?).or_insert(0) += 1;
        }
    }
    let n = cand.len();
    let mut count: Vec<u32> = cand.values().copied().collect();
    let mut inv_idx = vec![0usize; n];
    for (i, (x, _)) in cand.iter().enumerate() {
        inv_idx[i] = cand.get_index_of(&ctx.inv(x)?[..]).unwrap_or(i);
    }
    let mut uncovered = vec![true; a2.len()];
    let mut left = a2.len();
    let mut chosen: Vec<Elem> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    while left > 0 {
        if chosen.len() >= k_max {
            return Ok(None);
        }
        // upper bound count[x] + count[x^-1], refined by exact union size
        order.sort_by_key(|&i| {
            let j = inv_idx[i];
            let ub = count[i] + if j == i { 0 } else { count[j] };
            (std::cmp::Reverse(ub), i)
        });
        let mut best: Option<(u32, bool, &Elem, usize)> = None;
        for &i in &order {
            let j = inv_idx[i];
            let ub = count[i] + if j == i { 0 } else { count[j] };
            if let Some((g, _, _, _)) = best {
                if ub < g {
                    break;
                }
            }
            let gain = if j == i {
                count[i]
            } else {
                let xi = cand.get_index(i).unwrap().0;
                let xj_inv = ctx.inv(cand.get_index(j).unwrap().0)?;
                let mut overlap = 0;
                for b in a.iter() {
                    let y = ctx.mul(xi, b)?;
                    if let Some(p) = a2.index_of(&y) {
                        if uncovered[p] && a.contains(&ctx.mul(&xj_inv, &y)?) {
                            overlap += 1;
                        }
                    }
                }
                count[i] + count[j] - overlap
            };
            if gain == 0 {
                continue;
            }
            let key_elem = {
                let xi = cand.get_index(i).unwrap().0;
                let xj = cand.get_index(j).unwrap().0;
                if xi <= xj { xi } else { xj }
            };
            let better = match best {
                None => true,
                Some((g, selfinv, e, _)) => {
                    (gain, j == i, std::cmp::Reverse(key_elem)) > (g, selfinv, std::cmp::Reverse(e))
                }
            };
            if better {
                best = Some((gain, j == i, key_elem, i));
            }
        }
        let Some((_, _, _, i)) = best else {
            return Err(Error::Verification("greedy cover stalled".into()));
        };
        let pair: Vec<usize> = if inv_idx[i] == i { vec![i] } else { vec![i, inv_idx[i]] };
        for &c in &pair {
            let x = cand.get_index(c).unwrap().0.clone();
            for b in a.iter() {
                let y = ctx.mul(&x, b)?;
                if let Some(p) = a2.index_of(&y) {
                    if uncovered[p] {
                        uncovered[p] = false;
                        left -= 1;
                        for b2 in a.iter() {
                            let z = ctx.mul(&y, b2)?;
                            if let Some(zi) = cand.get_index_of(&z) {
                                count[zi] -= 1;
                            }
                        }
                    }
                }
            }
            chosen.push(x);
        }
    }
    if chosen.len() > k_max {
        return Ok(None);
    }
    Ok(Some(chosen.into_iter().collect()))
}

/// Translates covered by `{x, x^-1}` among the still uncovered points of `A²`.
fn cover_pair(ctx: &Ctx, a: &ElementSet, a2: &ElementSet, x: &Elem, uncovered: &mut [bool]) -> Result<usize> {
    let mut hit = 0;
    for g in [x.clone(), ctx.inv(x)?] {
        for b in a.iter() {
            if let Some(p) = a2.index_of(&ctx.mul(&g, b)?) {
                if uncovered[p] {
                    uncovered[p] = false;
                    hit += 1;
                }
            }
        }
    }
    Ok(hit)
}

const SAMPLED_POOL: usize = 4096;
const SAMPLED_PROBES: usize = 512;
const TAIL_CANDIDATES: usize = 64;

/// Lazy greedy over a seeded random pool of candidates drawn from `A²`.
///
/// Gains are estimated on a fixed random sample of `A`; since true gains only
/// decrease, a candidate whose re-estimated gain still tops the heap is taken.
/// Points the estimates no longer see are covered exactly from translates
/// through the first uncovered point.
fn greedy_cover_sampled(ctx: &Ctx, a: &ElementSet, a2: &ElementSet, k_max: usize) -> Result<Option<ElementSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let all: Vec<usize> = (0..a2.len()).collect();
    let pool: Vec<Elem> = all.choose_multiple(&mut rng, SAMPLED_POOL).map(|&i| a2.get(i).clone()).collect();
    let a_vec = a.to_vec();
    let probes: Vec<Elem> = a_vec.choose_multiple(&mut rng, SAMPLED_PROBES).cloned().collect();
    let estimate = |x: &Elem, uncovered: &[bool]| -> Result<u32> {
        let xi = ctx.inv(x)?;
        let mut g = 0;
        for b in &probes {
            let p1 = a2.index_of(&ctx.mul(x, b)?);
            if p1.is_some_and(|p| uncovered[p]) {
                g += 1;
            }
            if xi != *x {
                let p2 = a2.index_of(&ctx.mul(&xi, b)?);
                if p2 != p1 && p2.is_some_and(|p| uncovered[p]) {
                    g += 1;
                }
            }
        }
        Ok(g)
    };
    let mut uncovered = vec![true; a2.len()];
    let mut left = a2.len();
    let mut chosen: Vec<Elem> = Vec::new();
    let mut take = |x: &Elem, uncovered: &mut Vec<bool>, left: &mut usize| -> Result<()> {
        *left -= cover_pair(ctx, a, a2, x, uncovered)?;
        let xi = ctx.inv(x)?;
        if xi != *x {
            chosen.push(xi);
        }
        chosen.push(x.clone());
        Ok(())
    };
    let mut heap: BinaryHeap<(u32, Reverse<usize>)> = BinaryHeap::with_capacity(pool.len());
    for (i, x) in pool.iter().enumerate() {
        heap.push((estimate(x, &uncovered)?, Reverse(i)));
    }
    let mut used = 0;
    while left > 0 && used < k_max {
        let Some((g, Reverse(i))) = heap.pop() else { break };
        if g == 0 {
            break;
        }
        let fresh = estimate(&pool[i], &uncovered)?;
        if fresh < g {
            heap.push((fresh, Reverse(i)));
            continue;
        }
        take(&pool[i], &mut uncovered, &mut left)?;
        used += 1;
    }
    while left > 0 && used < k_max {
        let first = uncovered.iter().position(|&u| u).expect("left > 0");
        let y = a2.get(first).clone();
        let mut best: Option<(usize, Elem)> = None;
        for b in a_vec.choose_multiple(&mut rng, TAIL_CANDIDATES) {
            let x = ctx.mul(&y, &ctx.inv(b)?)?;
            let mut trial = uncovered.clone();
            let g = cover_pair(ctx, a, a2, &x, &mut trial)?;
            if best.as_ref().is_none_or(|(bg, _)| g > *bg) {
                best = Some((g, x));
            }
        }
        let (_, x) = best.expect("A is nonempty");
        take(&x, &mut uncovered, &mut left)?;
        used += 1;
    }
    drop(take);
    if left > 0 {
        return Ok(None);
    }
    let chosen = prune_redundant_pairs(ctx, a, a2, chosen)?;
    if chosen.len() > k_max {
        return Ok(None);
    }
    Ok(Some(chosen.into_iter().collect()))
}

/// Drop pairs `{x, x^-1}`, latest first, whose translates are covered twice.
fn prune_redundant_pairs(ctx: &Ctx, a: &ElementSet, a2: &ElementSet, chosen: Vec<Elem>) -> Result<Vec<Elem>> {
    let hits = |x: &Elem| -> Result<Vec<usize>> {
        let mut v = Vec::with_capacity(2 * a.len());
        for g in [x.clone(), ctx.inv(x)?] {
            for b in a.iter() {
                if let Some(p) = a2.index_of(&ctx.mul(&g, b)?) {
                    v.push(p);
                }
            }
        }
        v.sort_unstable();
        v.dedup();
        Ok(v)
    };
    let mut pairs: Vec<Elem> = Vec::new();
    for x in &chosen {
        let xi = ctx.inv(x)?;
        if !pairs.contains(&xi) && !pairs.contains(x) {
            pairs.push(x.clone());
        }
    }
    let footprints: Vec<Vec<usize>> = pairs.iter().map(hits).collect::<Result<_>>()?;
    let mut mult = vec![0u32; a2.len()];
    for f in &footprints {
        for &p in f {
            mult[p] += 1;
        }
    }
    let mut keep = vec![true; pairs.len()];
    for i in (0..pairs.len()).rev() {
        if footprints[i].iter().all(|&p| mult[p] >= 2) {
            keep[i] = false;
            for &p in &footprints[i] {
                mult[p] -= 1;
            }
        }
    }
    let mut out = Vec::new();
    for (x, k) in pairs.into_iter().zip(keep) {
        if k {
            let xi = ctx.inv(&x)?;
            if xi != x {
                out.push(xi);
            }
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Translates `A·x`; covers `B ⊆ A^-1 A X`.
    Left,
    /// Translates `x·A`; covers `B ⊆ X A A^-1`.
    Right,
}

#[derive(Clone, Debug)]
pub struct RuzsaCover {
    pub x: ElementSet,
    pub side: Side,
    /// `|AB|` (left) or `|BA|` (right).
    pub product_size: usize,
    pub a_size: usize,
}

/// Maximal family of disjoint translates of `A` indexed by `X ⊆ B`, scanning `B` in canonical order.
pub fn ruzsa_cover(ctx: &Ctx, a: &ElementSet, b: &ElementSet, side: Side) -> Result<RuzsaCover> {
    if a.is_empty() {
        return Err(Error::Hypothesis("A is empty".into()));
    }
    let mut used: FxHashSet<Elem> = FxHashSet::default();
    let mut x = Vec::new();
    for g in b.iter() {
        let translate: Vec<Elem> = a
            .iter()
            .map(|h| match side {
                Side::Left => ctx.mul(h, g),
                Side::Right => ctx.mul(g, h),
            })
            .collect::<Result<_>>()?;
        if translate.iter().all(|t| !used.contains(t)) {
            used.extend(translate);
            x.push(g.clone());
        }
    }
    let x: ElementSet = x.into_iter().collect();
    let prod = match side {
        Side::Left => product_set(ctx, a, b)?,
        Side::Right => product_set(ctx, b, a)?,
    };
    let cover = RuzsaCover { x, side, product_size: prod.len(), a_size: a.len() };
    verify_ruzsa(ctx, a, b, &cover)?;
    Ok(cover)
}

pub fn verify_ruzsa(ctx: &Ctx, a: &ElementSet, b: &ElementSet, cover: &RuzsaCover) -> Result<()> {
    if cover.x.len() * a.len() > cover.product_size {
        return Err(Error::Verification(format!(
            "|X| = {} exceeds |AB|/|A| = {}/{}",
            cover.x.len(),
            cover.product_size,
            a.len()
        )));
    }
    if !cover.x.is_subset(b) {
        return Err(Error::Verification("X is not a subset of B".into()));
    }
    let ainv = inverse_set(ctx, a)?;
    let core = match cover.side {
        Side::Left => product_set(ctx, &ainv, a)?,
        Side::Right => product_set(ctx, a, &ainv)?,
    };
    let xinv: Vec<Elem> = cover.x.iter().map(|g| ctx.inv(g)).collect::<Result<_>>()?;
    for g in b.iter() {
        let mut ok = false;
        for xi in &xinv {
            let probe = match cover.side {
                Side::Left => ctx.mul(g, xi)?,
                Side::Right => ctx.mul(xi, g)?,
            };
            if core.contains(&probe) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Verification(format!("{g:?} escapes the Ruzsa cover")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TriplingResult {
    pub h: ElementSet,
    pub witness: ApproxWitness,
    #[allow(dead_code)]
    pub tripling: Ratio<u64>,
}

/// `H = (A ∪ {id} ∪ A^-1)²` with a verified covering witness, given `|A³| ≤ K|A|`.
pub fn tripling_to_approx(ctx: &Ctx, a: &ElementSet, k: u64, k_max: usize) -> Result<TriplingResult> {
    let a3 = power_set(ctx, a, 3)?;
    if a3.len() as u64 > k * a.len() as u64 {
        return Err(Error::Hypothesis(format!("|A^3| = {} > {k}|A| = {}", a3.len(), k * a.len() as u64)));
    }
    let h = power_set(ctx, &symmetrize(ctx, a)?, 2)?;
    let witness = approx_group_witness(ctx, &h, k_max)?
        .ok_or_else(|| Error::Budget(format!("greedy witness for H exceeds {k_max}")))?;
    Ok(TriplingResult { h, witness, tripling: Ratio::new(a3.len() as u64, a.len() as u64) })
}

/// `T = ∩ x S0² x^-1` over the anchors.
pub fn intersect_conjugates(ctx: &Ctx, anchors: &[Elem], s0: &ElementSet) -> Result<ElementSet> {
    let s2 = product_set(ctx, s0, s0)?;
    let mut t: Option<ElementSet> = None;
    for x in anchors {
        let xi = ctx.inv(x)?;
        let conj: ElementSet = s2
            .iter()
            .map(|s| ctx.mul(&ctx.mul(x, s)?, &xi))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        t = Some(match t {
            None => conj,
            Some(prev) => prev.intersection(&conj),
        });
    }
    Ok(t.unwrap_or(s2))
}

#[derive(Clone, Debug)]
pub struct PopularProduct {
    pub x: Elem,
    pub b: ElementSet,
}

/// The set `B = A1·x ∩ A2` for the `x = a1^-1 a2` with the most representations.
pub fn popular_product(ctx: &Ctx, a1: &ElementSet, a2: &ElementSet) -> Result<PopularProduct> {
    let mut reps: FxHashMap<Elem, u32> = FxHashMap::default();
    for p in a1.iter() {
        let pi = ctx.inv(p)?;
        for q in a2.iter() {
            *reps.entry(ctx.mul(&pi, q)?).or_insert(0) += 1;
        }
    }
    let (x, _) = reps
        .into_iter()
        .max_by(|p, q| p.1.cmp(&q.1).then_with(|| q.0.cmp(&p.0)))
        .ok_or_else(|| Error::Hypothesis("empty input".into()))?;
    let mut b = Vec::new();
    for p in a1.iter() {
        let q = ctx.mul(p, &x)?;
        if a2.contains(&q) {
            b.push(q);
        }
    }
    Ok(PopularProduct { x, b: b.into_iter().collect() })
}
