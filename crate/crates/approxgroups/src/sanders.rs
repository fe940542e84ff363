//! Small neighbourhoods inside approximate groups and their normal variant.
//!
//! The construction is the pigeonhole argument on
//! `f(t) = min { |AB| / |A| : B ⊆ A, |B| >= t|A| }`. Exact `f` is only
//! feasible for tiny `A`, so the heuristic strategy replaces the minimiser by
//! structured candidates; in both cases the output is gated on a direct
//! check of `S^m ⊆ A^4`.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::set::ElementSet;
use crate::setops::{inverse_set, is_symmetric, product_set, require_symmetric_with_identity, ruzsa_cover, PowerTower, Side};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::VecDeque;

/// Largest `|A|` for which every subset is enumerated.
pub const EXACT_CAP: usize = 24;

const LOCAL_MOVE_ROUNDS: usize = 64;
const DYADIC_CANDIDATES: usize = 2;
const TABLE_LIMIT: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exact,
    Heuristic,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "heuristic" => Ok(Strategy::Heuristic),
            _ => Err(Error::Hypothesis(format!("unknown strategy {s:?}"))),
        }
    }
}

fn ratio_string(r: &Ratio<BigUint>) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Products `a·b` as indices into `A²`, one column per `b`.
struct ProductTable {
    n: usize,
    a2_len: usize,
    cols: Vec<u32>,
}

impl ProductTable {
    fn new(ctx: &Ctx, a: &ElementSet, a2: &ElementSet) -> Result<Self> {
        let n = a.len();
        let elems = a.to_vec();
        let cols: Vec<u32> = elems
            .par_iter()
            .map(|b| {
                elems
                    .iter()
                    .map(|x| {
                        let p = ctx.mul(x, b)?;
                        a2.index_of(&p)
                            .map(|i| i as u32)
                            .ok_or_else(|| Error::Verification(format!("{p:?} missing from A²")))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?
            .concat();
        Ok(ProductTable { n, a2_len: a2.len(), cols })
    }

    fn col(&self, b: usize) -> &[u32] {
        &self.cols[b * self.n..(b + 1) * self.n]
    }
}

/// Multiplicity counts of `AB` inside `A²`, updated one column at a time.
struct Cover<'t> {
    table: &'t ProductTable,
    cnt: Vec<u32>,
    distinct: usize,
}

impl<'t> Cover<'t> {
    fn new(table: &'t ProductTable) -> Self {
        Cover { table, cnt: vec![0; table.a2_len], distinct: 0 }
    }

    fn add(&mut self, b: usize) {
        for &p in self.table.col(b) {
            let c = &mut self.cnt[p as usize];
            if *c == 0 {
                self.distinct += 1;
            }
            *c += 1;
        }
    }

    fn remove(&mut self, b: usize) {
        for &p in self.table.col(b) {
            let c = &mut self.cnt[p as usize];
            *c -= 1;
            if *c == 0 {
                self.distinct -= 1;
            }
        }
    }

    fn private(&self, b: usize) -> usize {
        self.table.col(b).iter().filter(|&&p| self.cnt[p as usize] == 1).count()
    }

    fn fresh(&self, b: usize) -> usize {
        self.table.col(b).iter().filter(|&&p| self.cnt[p as usize] == 0).count()
    }
}

/// `min |AB|` and its minimiser for every `|B| = 0..=|A|`, by Gray-code enumeration.
///
/// Among minimisers of one size the smallest bitmask (bit `i` for the `i`-th
/// element in canonical order) is kept.
fn exact_table(table: &ProductTable) -> Vec<(usize, u32)> {
    let n = table.n;
    let mut best: Vec<(usize, u32)> = vec![(usize::MAX, 0); n + 1];
    best[0] = (0, 0);
    let mut cover = Cover::new(table);
    let mut mask: u32 = 0;
    for i in 1u64..(1u64 << n) {
        let bit = i.trailing_zeros() as usize;
        if mask & (1 << bit) == 0 {
            cover.add(bit);
        } else {
            cover.remove(bit);
        }
        mask ^= 1 << bit;
        let size = mask.count_ones() as usize;
        let e = &mut best[size];
        if cover.distinct < e.0 || (cover.distinct == e.0 && mask < e.1) {
            *e = (cover.distinct, mask);
        }
    }
    best
}

fn mask_set(a: &ElementSet, mask: u32) -> Vec<usize> {
    (0..a.len()).filter(|i| mask & (1 << i) != 0).collect()
}

/// Elements `g ≠ id` by decreasing `|A ∩ A g|`, ties in canonical order.
fn overlap_ranking(ctx: &Ctx, a: &ElementSet) -> Result<Vec<Elem>> {
    let id = ctx.identity();
    let elems = a.to_vec();
    let stride = (elems.len() * elems.len() / TABLE_LIMIT).max(1);
    let probes: Vec<&Elem> = elems.iter().step_by(stride).collect();
    let mut scored: Vec<(usize, &Elem)> = elems
        .par_iter()
        .filter(|g| **g != id)
        .map(|g| {
            let mut c = 0;
            for x in &probes {
                if a.contains(&ctx.mul(x, g)?) {
                    c += 1;
                }
            }
            Ok((c, g))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|p, q| q.0.cmp(&p.0).then_with(|| p.1.cmp(q.1)));
    Ok(scored.into_iter().map(|(_, g)| g.clone()).collect())
}

/// The first `k` ranked generators, closed under inverses.
fn top_generators(ctx: &Ctx, a: &ElementSet, ranking: &[Elem], k: usize) -> Result<Vec<Elem>> {
    let mut gens: Vec<Elem> = Vec::new();
    for g in ranking {
        if gens.len() >= k {
            break;
        }
        if !gens.contains(g) {
            gens.push(g.clone());
            let gi = ctx.inv(g)?;
            if a.contains(&gi) && !gens.contains(&gi) {
                gens.push(gi);
            }
        }
    }
    Ok(gens)
}

/// Breadth-first order of `A` from the identity under right multiplication by `gens`.
fn bfs_order(ctx: &Ctx, a: &ElementSet, gens: &[Elem]) -> Result<Vec<usize>> {
    let mut seen = vec![false; a.len()];
    let mut order = Vec::with_capacity(a.len());
    let mut queue = VecDeque::new();
    let mut roots = std::iter::once(a.index_of(&ctx.identity())).flatten().chain(0..a.len());
    while order.len() < a.len() {
        let Some(r) = roots.find(|&r| !seen[r]) else { break };
        seen[r] = true;
        queue.push_back(r);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for g in gens {
                if let Some(j) = a.index_of(&ctx.mul(a.get(i), g)?) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Ok(order)
}

/// Swap the member with most private products for the outsider adding fewest, while it helps.
fn local_moves(table: &ProductTable, b: &mut Vec<usize>) {
    let n = table.n;
    let mut cover = Cover::new(table);
    let mut inside = vec![false; n];
    for &i in b.iter() {
        cover.add(i);
        inside[i] = true;
    }
    for _ in 0..LOCAL_MOVE_ROUNDS {
        if b.is_empty() || b.len() == n {
            return;
        }
        let before = cover.distinct;
        let (pos, &out) = b
            .iter()
            .enumerate()
            .max_by(|p, q| cover.private(*p.1).cmp(&cover.private(*q.1)).then_with(|| q.1.cmp(p.1)))
            .expect("nonempty");
        cover.remove(out);
        inside[out] = false;
        let add = (0..n)
            .filter(|&j| !inside[j] && j != out)
            .min_by_key(|&j| (cover.fresh(j), j));
        let Some(add) = add else {
            cover.add(out);
            inside[out] = true;
            return;
        };
        cover.add(add);
        if cover.distinct < before {
            inside[add] = true;
            b[pos] = add;
        } else {
            cover.remove(add);
            cover.add(out);
            inside[out] = true;
            return;
        }
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    b: Vec<usize>,
    product: usize,
}

/// Candidate minimisers of `|AB|` with `|B| = size`, best first.
fn heuristic_candidates(table: &ProductTable, orders: &[Vec<usize>], size: usize) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::new();
    for order in orders {
        let mut b: Vec<usize> = order[..size].to_vec();
        let mut c = Cover::new(table);
        b.iter().for_each(|&i| c.add(i));
        let plain = Candidate { b: b.clone(), product: c.distinct };
        local_moves(table, &mut b);
        let mut c = Cover::new(table);
        b.iter().for_each(|&i| c.add(i));
        for cand in [plain, Candidate { b, product: c.distinct }] {
            let mut key = cand.b.clone();
            key.sort_unstable();
            if !out.iter().any(|o| {
                let mut k = o.b.clone();
                k.sort_unstable();
                k == key
            }) {
                out.push(cand);
            }
        }
    }
    out.sort_by_key(|c| c.product);
    out
}

fn family_orders(ctx: &Ctx, a: &ElementSet) -> Result<Vec<Vec<usize>>> {
    let mut orders = Vec::new();
    let ranking = overlap_ranking(ctx, a)?;
    for k in [2, 4, 6, 8] {
        let gens = top_generators(ctx, a, &ranking, k)?;
        let o = bfs_order(ctx, a, &gens)?;
        if !orders.contains(&o) {
            orders.push(o);
        }
    }
    let canonical: Vec<usize> = (0..a.len()).collect();
    if !orders.contains(&canonical) {
        orders.push(canonical);
    }
    Ok(orders)
}

/// One point of the `f` profile: `f(t) = product / |A|`.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub t: Ratio<BigUint>,
    pub size: usize,
    pub product: usize,
    pub exact: bool,
}

impl ProfileRow {
    pub fn f(&self, a_len: usize) -> Ratio<u64> {
        Ratio::new(self.product as u64, a_len as u64)
    }
}

fn ceil_size(t: &Ratio<BigUint>, n: usize) -> usize {
    let v = t * Ratio::from_integer(BigUint::from(n));
    let c = v.ceil().to_integer().to_usize().unwrap_or(usize::MAX);
    c.clamp(1, n)
}

struct Engine {
    a: ElementSet,
    a2: ElementSet,
    table: ProductTable,
    strategy: Strategy,
    exact: Option<Vec<(usize, u32)>>,
    orders: Vec<Vec<usize>>,
}

impl Engine {
    fn new(ctx: &Ctx, a: &ElementSet, strategy: Strategy) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Hypothesis("A is empty".into()));
        }
        if strategy == Strategy::Exact && a.len() > EXACT_CAP {
            return Err(Error::Budget(format!("exact strategy needs |A| <= {EXACT_CAP}, got {}", a.len())));
        }
        let a2 = product_set(ctx, a, a)?;
        if a.len().saturating_mul(a.len()) > TABLE_LIMIT * 4 {
            return Err(Error::Budget(format!("|A| = {} is too large for the product table", a.len())));
        }
        let table = ProductTable::new(ctx, a, &a2)?;
        let (exact, orders) = match strategy {
            Strategy::Exact => (Some(exact_table(&table)), Vec::new()),
            Strategy::Heuristic => (None, family_orders(ctx, a)?),
        };
        Ok(Engine { a: a.clone(), a2, table, strategy, exact, orders })
    }

    fn candidates(&self, size: usize) -> Vec<Candidate> {
        match &self.exact {
            Some(best) => vec![Candidate { b: mask_set(&self.a, best[size].1), product: best[size].0 }],
            None => heuristic_candidates(&self.table, &self.orders, size),
        }
    }

    fn row(&self, t: Ratio<BigUint>) -> (ProfileRow, Vec<Candidate>) {
        let size = ceil_size(&t, self.a.len());
        let cands = self.candidates(size);
        let product = cands[0].product;
        (ProfileRow { t, size, product, exact: self.strategy == Strategy::Exact }, cands)
    }
}

/// `f(k / resolution)` for `k = 1..=resolution`; heuristic rows are upper bounds.
pub fn f_profile(ctx: &Ctx, a: &ElementSet, resolution: usize, strategy: Strategy) -> Result<Vec<ProfileRow>> {
    let engine = Engine::new(ctx, a, strategy)?;
    let res = BigUint::from(resolution.max(1));
    Ok((1..=resolution.max(1))
        .map(|k| engine.row(Ratio::new(BigUint::from(k), res.clone())).0)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SandersChecks {
    pub symmetric: bool,
    pub identity: bool,
    pub containment: bool,
    pub square_of_s0: bool,
    #[serde(serialize_with = "crate::setops::ser_ratio")]
    pub ratio: Ratio<u64>,
}

#[derive(Clone, Debug)]
pub struct SandersCertificate {
    pub s: ElementSet,
    pub m: usize,
    /// Grid point whose minimiser produced `S`.
    pub t: Ratio<BigUint>,
    /// First grid point where `f(t²/2K²) >= (1 - 1/100m) f(t)` held.
    pub pigeonhole_t: Ratio<BigUint>,
    pub pigeonhole_satisfied: bool,
    pub b: ElementSet,
    pub a0: Elem,
    pub c: ElementSet,
    pub s0: ElementSet,
    /// `K = |A²| / |A|`.
    pub k: Ratio<u64>,
    pub strategy: Strategy,
    pub grid: Vec<ProfileRow>,
    pub checks: SandersChecks,
}

impl SandersCertificate {
    pub fn to_json(&self, ctx: &Ctx, a_len: usize) -> Value {
        let g = &ctx.group;
        json!({
            "m": self.m,
            "strategy": self.strategy,
            "K": crate::setops::ratio_str(&self.k),
            "t": ratio_string(&self.t),
            "pigeonhole_t": ratio_string(&self.pigeonhole_t),
            "pigeonhole_satisfied": self.pigeonhole_satisfied,
            "grid": self.grid.iter().map(|r| json!({
                "t": ratio_string(&r.t),
                "size": r.size,
                "f": crate::setops::ratio_str(&r.f(a_len)),
                "exact": r.exact,
            })).collect::<Vec<_>>(),
            "a0": g.elem_to_json(&self.a0),
            "B": self.b.to_json(g),
            "C": self.c.to_json(g),
            "S0": self.s0.to_json(g),
            "S": self.s.to_json(g),
            "checks": self.checks,
        })
    }
}

/// `Σ_{a ∈ A} |Ba ∩ Ba0|` is `Σ_a r(a0 a^-1)` with `r(g) = #{(b, b') : b'^-1 b = g}`.
fn representation_counts(ctx: &Ctx, b: &ElementSet) -> Result<FxHashMap<Elem, u32>> {
    let inv = inverse_set(ctx, b)?;
    let mut r: FxHashMap<Elem, u32> = FxHashMap::default();
    for bp in inv.iter() {
        for x in b.iter() {
            *r.entry(ctx.mul(bp, x)?).or_insert(0) += 1;
        }
    }
    Ok(r)
}

struct Built {
    a0: Elem,
    c: ElementSet,
    s0: ElementSet,
    s: ElementSet,
}

fn build_from(ctx: &Ctx, a: &ElementSet, a2_len: usize, b: &ElementSet, t: &Ratio<BigUint>) -> Result<Built> {
    let r = representation_counts(ctx, b)?;
    let a_inv: Vec<Elem> = a.iter().map(|x| ctx.inv(x)).collect::<Result<_>>()?;
    let overlap = |a0: &Elem, ai: &Elem| -> Result<u32> { Ok(r.get(&ctx.mul(a0, ai)?).copied().unwrap_or(0)) };
    let scores: Vec<u64> = a
        .to_vec()
        .par_iter()
        .map(|a0| a_inv.iter().try_fold(0u64, |s, ai| Ok(s + overlap(a0, ai)? as u64)))
        .collect::<Result<_>>()?;
    let best = scores.iter().copied().max().unwrap_or(0);
    let i0 = scores.iter().position(|&s| s == best).expect("A nonempty");
    let a0 = a.get(i0).clone();
    // τ = t²|A|/2K² = t²|A|³ / (2|A²|²)
    let n = BigUint::from(a.len());
    let tau = t * t * Ratio::new(&n * &n * &n, BigUint::from(2u32) * BigUint::from(a2_len) * BigUint::from(a2_len));
    let mut c = Vec::new();
    for (x, xi) in a.iter().zip(&a_inv) {
        if Ratio::from_integer(BigUint::from(overlap(&a0, xi)?)) >= tau {
            c.push(x.clone());
        }
    }
    let c: ElementSet = c.into_iter().collect();
    let a0i = ctx.inv(&a0)?;
    let mut s0 = vec![ctx.identity()];
    for x in c.iter() {
        s0.push(ctx.mul(x, &a0i)?);
        s0.push(ctx.mul(&a0, &ctx.inv(x)?)?);
    }
    let s0: ElementSet = s0.into_iter().collect();
    let s = product_set(ctx, &s0, &s0)?;
    Ok(Built { a0, c, s0, s })
}

/// `S^m ⊆ target`, computing powers of `S` and stopping at the first escape.
fn powers_inside(ctx: &Ctx, s: &ElementSet, m: usize, target: &ElementSet) -> Result<bool> {
    let mut tower = PowerTower::new(ctx, s)?;
    for j in 1..=m {
        match tower.power(j) {
            Ok(p) => {
                if !p.is_subset(target) {
                    return Ok(false);
                }
            }
            Err(Error::Undefined(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Sufficient test `S^⌈m/2⌉ ⊆ A²` first, then the full powers against `A^4`.
fn contained(ctx: &Ctx, s: &ElementSet, m: usize, a2: &ElementSet, a4: &ElementSet) -> Result<bool> {
    if powers_inside(ctx, s, m.div_ceil(2), a2)? {
        return Ok(true);
    }
    powers_inside(ctx, s, m, a4)
}

/// Recompute every recorded check of a certificate from `A` alone.
pub fn verify_certificate(ctx: &Ctx, a: &ElementSet, cert: &SandersCertificate) -> Result<SandersChecks> {
    let a4 = crate::setops::power_set(ctx, a, 4)?;
    let checks = SandersChecks {
        symmetric: is_symmetric(ctx, &cert.s)?,
        identity: cert.s.contains(&ctx.identity()),
        containment: powers_inside(ctx, &cert.s, cert.m, &a4)?,
        square_of_s0: product_set(ctx, &cert.s0, &cert.s0)? == cert.s,
        ratio: Ratio::new(cert.s.len() as u64, a.len() as u64),
    };
    if !(checks.symmetric && checks.identity && checks.containment && checks.square_of_s0) {
        return Err(Error::Verification(format!("certificate checks failed: {checks:?}")));
    }
    Ok(checks)
}

/// A symmetric `S = S0²` with `S^m ⊆ A^4`, following the pigeonhole argument.
///
/// The grid is `t_0 = 1`, `t_{j+1} = t_j² / 2K²` with `K = |A²|/|A|`, run until
/// `t|A| <= 1` where `f = 1`. Every grid point up to the first one satisfying
/// the pigeonhole inequality is tried, then the dyadic points `t = 2^-i`, and
/// the verified `S` of largest size is returned; an unverifiable run is an
/// error, never a certificate.
pub fn sanders_small_neighbourhood(ctx: &Ctx, a: &ElementSet, m: usize, strategy: Strategy) -> Result<SandersCertificate> {
    if m == 0 {
        return Err(Error::Hypothesis("m must be at least 1".into()));
    }
    require_symmetric_with_identity(ctx, a)?;
    let mut tower = PowerTower::new(ctx, a)?;
    if ctx.is_local() {
        tower.power(8)?;
    }
    let a4 = tower.power(4)?.clone();
    let engine = Engine::new(ctx, a, strategy)?;
    let n = a.len();
    let a2_len = engine.a2.len();
    let shrink = Ratio::new(BigUint::from(n) * BigUint::from(n), BigUint::from(2u32) * BigUint::from(a2_len) * BigUint::from(a2_len));

    let mut grid: Vec<(ProfileRow, Vec<Candidate>)> = Vec::new();
    let mut t = Ratio::one();
    loop {
        let done = &t * Ratio::from_integer(BigUint::from(n)) <= Ratio::one();
        let next = &t * &t * &shrink;
        grid.push(engine.row(t));
        if done {
            break;
        }
        t = next;
    }
    let mm = 100 * m;
    let star = (0..grid.len())
        .find(|&j| {
            let f_next = grid.get(j + 1).map_or(n, |r| r.0.product);
            f_next * mm >= (mm - 1) * grid[j].0.product
        })
        .unwrap_or(grid.len() - 1);

    // the grid is coarse for large m, so dyadic points t = 2^-i are tried as well
    let mut trials: Vec<(Ratio<BigUint>, Vec<Candidate>)> =
        grid.iter().take(star + 1).map(|(r, c)| (r.t.clone(), c.clone())).collect();
    let mut half = Ratio::new(BigUint::one(), BigUint::from(2u32));
    while &half * Ratio::from_integer(BigUint::from(n)) >= Ratio::one() {
        let size = ceil_size(&half, n);
        if !grid.iter().any(|(r, _)| r.size == size) {
            let (_, mut cands) = engine.row(half.clone());
            cands.truncate(DYADIC_CANDIDATES);
            trials.push((half.clone(), cands));
        }
        half = half / BigUint::from(2u32);
    }
    let pigeonhole_t = grid[star].0.t.clone();

    let mut best: Option<SandersCertificate> = None;
    for (t, cands) in &trials {
        for cand in cands {
            let b: ElementSet = cand.b.iter().map(|&i| a.get(i).clone()).collect();
            let built = build_from(ctx, a, a2_len, &b, t)?;
            if best.as_ref().is_some_and(|c| c.s.len() >= built.s.len()) {
                continue;
            }
            if !is_symmetric(ctx, &built.s)? || !contained(ctx, &built.s, m, &engine.a2, &a4)? {
                continue;
            }
            let checks = SandersChecks {
                symmetric: true,
                identity: true,
                containment: true,
                square_of_s0: true,
                ratio: Ratio::new(built.s.len() as u64, n as u64),
            };
            let cert = SandersCertificate {
                s: built.s,
                m,
                t: t.clone(),
                pigeonhole_t: pigeonhole_t.clone(),
                pigeonhole_satisfied: *t == pigeonhole_t,
                b,
                a0: built.a0,
                c: built.c,
                s0: built.s0,
                k: Ratio::new(a2_len as u64, n as u64),
                strategy,
                grid: Vec::new(),
                checks,
            };
            best = Some(cert);
        }
    }
    let Some(mut cert) = best else {
        return Err(Error::Verification(format!("no candidate at {} values of t gave S^{m} ⊆ A^4", trials.len())));
    };
    cert.grid = grid.into_iter().map(|(r, _)| r).collect();
    Ok(cert)
}

#[derive(Clone, Debug)]
pub struct NormalReport {
    /// Inner neighbourhood with `S0^(4m+4) ⊆ S^4`.
    pub inner: SandersCertificate,
    /// Anchors `x_i`, with the identity, such that `A^4 ⊆ ∪ S0² x_i`.
    pub anchors: Vec<Elem>,
    pub t_set: ElementSet,
    pub tilde_s: ElementSet,
    pub conjugations_checked: usize,
    pub verified: bool,
}

impl NormalReport {
    pub fn to_json(&self, ctx: &Ctx, s_len: usize) -> Value {
        let g = &ctx.group;
        json!({
            "inner": self.inner.to_json(ctx, s_len),
            "anchors": self.anchors.iter().map(|x| g.elem_to_json(x)).collect::<Vec<_>>(),
            "T": self.t_set.to_json(g),
            "tilde_S": self.tilde_s.to_json(g),
            "conjugations_checked": self.conjugations_checked,
            "verified": self.verified,
        })
    }
}

/// `(P)^{A^4} ⊆ S^4` for `P = tildeS^m`, by brute force over conjugates.
pub fn verify_normal(ctx: &Ctx, a: &ElementSet, s: &ElementSet, tilde_s: &ElementSet, m: usize) -> Result<usize> {
    let a4 = crate::setops::power_set(ctx, a, 4)?;
    let s4 = crate::setops::power_set(ctx, s, 4)?;
    let p = crate::setops::power_set(ctx, tilde_s, m)?;
    let abelian = ctx.group.is_abelian();
    let conj: Vec<&Elem> = if abelian { vec![a4.get(0)] } else { a4.iter().collect() };
    let mut checked = 0;
    for x in conj {
        for y in p.iter() {
            let c = if abelian { y.clone() } else { ctx.group.conj(y, x)? };
            if !s4.contains(&c) {
                return Err(Error::Verification(format!("{y:?} conjugated by {x:?} leaves S^4")));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// A large `tildeS` whose `m`-th power is normalised into `S^4` by `A^4`.
pub fn sanders_normal(ctx: &Ctx, a: &ElementSet, s: &ElementSet, m: usize, strategy: Strategy) -> Result<NormalReport> {
    require_symmetric_with_identity(ctx, a)?;
    let a4 = crate::setops::power_set(ctx, a, 4)?;
    if !s.is_subset(&a4) {
        return Err(Error::Hypothesis("S is not inside A^4".into()));
    }
    let inner = sanders_small_neighbourhood(ctx, s, 4 * m + 4, strategy)?;
    let s0 = &inner.s;
    let cover = ruzsa_cover(ctx, s0, &a4, Side::Left)?;
    let id = ctx.identity();
    let mut anchors = vec![id.clone()];
    anchors.extend(cover.x.iter().filter(|x| **x != id).cloned());
    let t_set = crate::setops::intersect_conjugates(ctx, &anchors, s0)?;
    let tilde_s = product_set(ctx, &t_set, &t_set)?;
    let conjugations_checked = verify_normal(ctx, a, s, &tilde_s, m)?;
    Ok(NormalReport { inner, anchors, t_set, tilde_s, conjugations_checked, verified: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::interval;
    use crate::group::Group;

    fn subsets_oracle(ctx: &Ctx, a: &ElementSet, size: usize) -> usize {
        let v = a.to_vec();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << v.len()) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let b: ElementSet = (0..v.len()).filter(|i| mask & (1 << i) != 0).map(|i| v[i].clone()).collect();
            best = best.min(product_set(ctx, a, &b).unwrap().len());
        }
        best
    }

    #[test]
    fn exact_profile_matches_subset_oracle() {
        let ctx = Ctx::global(Group::lattice(1).unwrap());
        let a = interval(&ctx.group, -3, 3).unwrap();
        let rows = f_profile(&ctx, &a, 7, Strategy::Exact).unwrap();
        for r in &rows {
            assert_eq!(r.product, subsets_oracle(&ctx, &a, r.size));
        }
        assert!(rows.windows(2).all(|w| w[0].product <= w[1].product));
    }

    #[test]
    fn interval_profile_endpoints() {
        let ctx = Ctx::global(Group::lattice(1).unwrap());
        let a = interval(&ctx.group, -5, 5).unwrap();
        let rows = f_profile(&ctx, &a, 11, Strategy::Exact).unwrap();
        assert_eq!(rows[0].f(11), Ratio::new(1, 1));
        assert_eq!(rows[10].f(11), Ratio::new(21, 11));
    }

    #[test]
    fn finite_group_profile_is_one() {
        let ctx = Ctx::global(Group::cyclic(6).unwrap());
        let a = crate::catalogue::whole_group(&ctx.group, 100).unwrap();
        for r in f_profile(&ctx, &a, 6, Strategy::Exact).unwrap() {
            assert_eq!(r.product, 6);
        }
    }

    #[test]
    fn interval_certificate_verifies() {
        let ctx = Ctx::global(Group::lattice(1).unwrap());
        let a = interval(&ctx.group, -10, 10).unwrap();
        let cert = sanders_small_neighbourhood(&ctx, &a, 4, Strategy::Exact).unwrap();
        verify_certificate(&ctx, &a, &cert).unwrap();
        // S0 = [-5,5] gives S = [-10,10] with S^4 = [-40,40] = A^4
        assert_eq!(cert.s0, interval(&ctx.group, -5, 5).unwrap());
        assert_eq!(cert.s, interval(&ctx.group, -10, 10).unwrap());
        let cert = sanders_small_neighbourhood(&ctx, &a, 4, Strategy::Heuristic).unwrap();
        verify_certificate(&ctx, &a, &cert).unwrap();
        assert!(cert.s.len() > 1);
        let wide = interval(&ctx.group, -15, 15).unwrap();
        let err = sanders_small_neighbourhood(&ctx, &wide, 4, Strategy::Exact).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
    }
}
