//! Word-ball growth, coset meeting, isoperimetry and packing on finite metric spaces.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::set::ElementSet;
use crate::setops::{approx_group_witness, require_symmetric_with_identity};
use num_rational::Ratio;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthProfile {
    /// `sizes[r] = |S^r|`, starting at `r = 0`.
    pub sizes: Vec<usize>,
    pub slope: Option<f64>,
    /// `|S^{2r}| / |S^r|` for every `r` with `2r` in range.
    pub doubling: Vec<String>,
}

/// Exact `|S^r|` for `r <= radius` by breadth-first search on the Cayley graph.
pub fn ball_sizes(ctx: &Ctx, s: &ElementSet, radius: usize) -> Result<GrowthProfile> {
    require_symmetric_with_identity(ctx, s)?;
    let mut seen: FxHashSet<Elem> = FxHashSet::default();
    let id = ctx.identity();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    let mut sizes = vec![1];
    for _ in 0..radius {
        let mut next = Vec::new();
        for f in &frontier {
            for g in s.iter() {
                let x = ctx.mul(f, g)?;
                if !seen.contains(&x) {
                    seen.insert(x.clone());
                    next.push(x);
                }
            }
        }
        ctx.check_size(seen.len(), "ball")?;
        sizes.push(seen.len());
        frontier = next;
    }
    let tail: Vec<(f64, f64)> =
        sizes.iter().enumerate().skip((radius / 2).max(1)).map(|(r, &n)| (r as f64, n as f64)).collect();
    let doubling = (1..=radius / 2).map(|r| Ratio::new(sizes[2 * r], sizes[r]).to_string()).collect();
    Ok(GrowthProfile { slope: loglog_slope(&tail), sizes, doubling })
}

/// All balls `S^0..=S^radius` as sets.
pub fn balls(ctx: &Ctx, s: &ElementSet, radius: usize) -> Result<Vec<ElementSet>> {
    require_symmetric_with_identity(ctx, s)?;
    let mut out = vec![ElementSet::singleton(ctx.identity())];
    let mut seen: FxHashSet<Elem> = out[0].iter().cloned().collect();
    let mut frontier: Vec<Elem> = out[0].to_vec();
    for _ in 0..radius {
        let mut next = Vec::new();
        for f in &frontier {
            for g in s.iter() {
                let x = ctx.mul(f, g)?;
                if seen.insert(x.clone()) {
                    next.push(x);
                }
            }
        }
        ctx.check_size(seen.len(), "ball")?;
        out.push(seen.iter().cloned().collect());
        frontier = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingScale {
    pub n_prime: usize,
    pub big: usize,
    pub small: usize,
    /// Greedy covering constant of `S^{2n'}`, when one was found under the cap.
    pub witness_k: Option<usize>,
}

/// Least `n' ∈ [n_floor, n/100]` with `|S^{100n'}| <= 200^d |S^{n'}|`, after checking `|S^n| <= n^d |S|`.
pub fn find_doubling_scale(
    ctx: &Ctx,
    s: &ElementSet,
    d: u32,
    n: usize,
    n_floor: usize,
    k_max: usize,
) -> Result<Option<DoublingScale>> {
    let n_floor = n_floor.max(1);
    let prof = ball_sizes(ctx, s, n)?;
    let bound = (n as u128).checked_pow(d).and_then(|v| v.checked_mul(s.len() as u128));
    if bound.is_some_and(|b| (prof.sizes[n] as u128) > b) {
        return Err(Error::Hypothesis(format!("|S^{n}| = {} exceeds n^d|S|", prof.sizes[n])));
    }
    let factor = 200u128.checked_pow(d).unwrap_or(u128::MAX);
    for np in n_floor..=n / 100 {
        let (big, small) = (prof.sizes[100 * np], prof.sizes[np]);
        if (big as u128) <= factor.saturating_mul(small as u128) {
            let ball = balls(ctx, s, 2 * np)?.pop().expect("radius >= 2");
            let witness_k = approx_group_witness(ctx, &ball, k_max)?.map(|w| w.k);
            return Ok(Some(DoublingScale { n_prime: np, big, small, witness_k }));
        }
    }
    Ok(None)
}

/// Membership oracle for a subgroup `G0` together with its index.
pub trait SubgroupOracle {
    fn contains(&self, g: &[i64]) -> bool;
    fn index(&self) -> Option<u128>;
}

/// An explicit finite subgroup of a finite group of the given order.
pub struct ExplicitSubgroup {
    pub elements: ElementSet,
    pub group_order: u128,
}

impl SubgroupOracle for ExplicitSubgroup {
    fn contains(&self, g: &[i64]) -> bool {
        self.elements.contains(g)
    }

    fn index(&self) -> Option<u128> {
        Some(self.group_order / self.elements.len() as u128)
    }
}

/// `m_1 Z × … × m_d Z` inside `Z^d` (or inside a product of cyclic groups whose moduli the `m_i` divide).
pub struct Congruence {
    pub moduli: Vec<i64>,
}

impl SubgroupOracle for Congruence {
    fn contains(&self, g: &[i64]) -> bool {
        g.iter().zip(&self.moduli).all(|(x, m)| x.rem_euclid(*m) == 0)
    }

    fn index(&self) -> Option<u128> {
        Some(self.moduli.iter().map(|&m| m as u128).product())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetCount {
    pub k: usize,
    pub count: usize,
    pub index: Option<u128>,
    pub bound: u128,
    pub pass: bool,
}

/// Number of left cosets `gG0` met by `S^k`, checked against `min(k+1, [G:G0])`.
pub fn coset_meeting_count(ctx: &Ctx, s: &ElementSet, g0: &dyn SubgroupOracle, k: usize) -> Result<CosetCount> {
    let ball = balls(ctx, s, k)?.pop().expect("radius k present");
    let mut reps: Vec<Elem> = Vec::new();
    for g in ball.iter() {
        let mut found = false;
        for r in &reps {
            if g0.contains(&ctx.mul(&ctx.inv(r)?, g)?) {
                found = true;
                break;
            }
        }
        if !found {
            reps.push(g.clone());
        }
    }
    let index = g0.index();
    let bound = index.map_or(k as u128 + 1, |i| i.min(k as u128 + 1));
    Ok(CosetCount { k, count: reps.len(), index, bound, pass: reps.len() as u128 >= bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoperimetryReport {
    pub size: usize,
    pub boundary: usize,
    pub r: usize,
    pub pass: bool,
    /// `‖f_r - f‖_1` as an exact ratio.
    pub averaging_l1: String,
    /// `2r|∂E|`.
    pub averaging_bound: usize,
    pub averaging_pass: bool,
}

/// `|E| <= 4 r(E) |∂E|` with `∂E = SE \ E`, and the averaging bound `‖f_r - f‖_1 <= 2r|∂E|`.
pub fn isoperimetry_check(ctx: &Ctx, s: &ElementSet, e: &ElementSet) -> Result<IsoperimetryReport> {
    require_symmetric_with_identity(ctx, s)?;
    if e.is_empty() {
        return Err(Error::Hypothesis("E is empty".into()));
    }
    if let Some(order) = ctx.group.order() {
        if 2 * e.len() as u128 >= order {
            return Err(Error::Hypothesis(format!("|E| = {} is not below |G|/2", e.len())));
        }
    }
    let mut boundary: FxHashSet<Elem> = FxHashSet::default();
    for g in s.iter() {
        for x in e.iter() {
            let y = ctx.mul(g, x)?;
            if !e.contains(&y) {
                boundary.insert(y);
            }
        }
    }
    let mut seen: FxHashSet<Elem> = FxHashSet::default();
    seen.insert(ctx.identity());
    let mut frontier = vec![ctx.identity()];
    let mut r = 0;
    while seen.len() < 2 * e.len() {
        if frontier.is_empty() {
            return Err(Error::Hypothesis("balls stop growing before reaching 2|E|".into()));
        }
        let mut next = Vec::new();
        for f in &frontier {
            for g in s.iter() {
                let x = ctx.mul(f, g)?;
                if seen.insert(x.clone()) {
                    next.push(x);
                }
            }
        }
        ctx.check_size(seen.len(), "ball")?;
        frontier = next;
        r += 1;
    }
    // |B| f_r(x) = #{g in B : g^-1 x in E} = #{(g, y) : y in E, gy = x}.
    let mut hits: FxHashMap<Elem, u64> = FxHashMap::default();
    for g in &seen {
        for y in e.iter() {
            *hits.entry(ctx.mul(g, y)?).or_insert(0) += 1;
        }
    }
    let b = seen.len() as u64;
    let mut total: u64 = 0;
    for (x, &h) in &hits {
        let f = if e.contains(x) { b } else { 0 };
        total += h.abs_diff(f);
    }
    for x in e.iter() {
        if !hits.contains_key(x) {
            total += b;
        }
    }
    let l1 = Ratio::new(total, b);
    let bound = 2 * r * boundary.len();
    Ok(IsoperimetryReport {
        size: e.len(),
        boundary: boundary.len(),
        r,
        pass: e.len() <= 4 * r * boundary.len(),
        averaging_l1: l1.to_string(),
        averaging_bound: bound,
        averaging_pass: l1 <= Ratio::from_integer(bound as u64),
    })
}

/// Finite metric space with exact rational distances and a list of isometries.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    pub dist: Vec<Vec<Ratio<i64>>>,
    /// Each isometry is a permutation of the points; index 0 must be the identity.
    pub isometries: Vec<Vec<usize>>,
}

impl FiniteMetricSpace {
    /// Validate the metric axioms and every listed isometry.
    pub fn new(dist: Vec<Vec<Ratio<i64>>>, isometries: Vec<Vec<usize>>) -> Result<Self> {
        let n = dist.len();
        let zero = Ratio::from_integer(0);
        for i in 0..n {
            if dist[i].len() != n || dist[i][i] != zero {
                return Err(Error::Hypothesis(format!("row {i} is not a metric row")));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] || (i != j && dist[i][j] <= zero) {
                    return Err(Error::Hypothesis(format!("d({i},{j}) breaks symmetry or positivity")));
                }
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return Err(Error::Hypothesis(format!("triangle inequality fails at {i},{j},{k}")));
                    }
                }
            }
        }
        for (t, p) in isometries.iter().enumerate() {
            let mut hit = vec![false; n];
            for &x in p {
                if x >= n || hit[x] {
                    return Err(Error::Hypothesis(format!("isometry {t} is not a permutation")));
                }
                hit[x] = true;
            }
            if p.len() != n {
                return Err(Error::Hypothesis(format!("isometry {t} has the wrong length")));
            }
            for i in 0..n {
                for j in 0..n {
                    if dist[p[i]][p[j]] != dist[i][j] {
                        return Err(Error::Hypothesis(format!("map {t} does not preserve d({i},{j})")));
                    }
                }
            }
        }
        if isometries.first().is_some_and(|p| p.iter().enumerate().any(|(i, &x)| i != x)) {
            return Err(Error::Hypothesis("isometry 0 must be the identity".into()));
        }
        Ok(FiniteMetricSpace { dist, isometries })
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Path metric `d(i,j) = |i - j|` on `n` points, no isometries besides the identity and the flip.
    pub fn path(n: usize) -> Self {
        let dist = (0..n).map(|i| (0..n).map(|j| Ratio::from_integer((i as i64 - j as i64).abs())).collect()).collect();
        let id = (0..n).collect();
        let flip = (0..n).rev().collect();
        FiniteMetricSpace::new(dist, vec![id, flip]).expect("path metric")
    }

    /// The `n`-cycle with edge length `edge` and all rotations.
    pub fn cycle(n: usize, edge: Ratio<i64>) -> Self {
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let k = (i as i64 - j as i64).rem_euclid(n as i64);
                        edge * k.min(n as i64 - k)
                    })
                    .collect()
            })
            .collect();
        let rots = (0..n).map(|t| (0..n).map(|i| (i + t) % n).collect()).collect();
        FiniteMetricSpace::new(dist, rots).expect("cycle metric")
    }

    /// Greedy number of open radius-1 balls covering the open radius-4 ball around `x`.
    fn greedy_cover(&self, x: usize) -> Vec<usize> {
        let four = Ratio::from_integer(4);
        let one = Ratio::from_integer(1);
        let mut todo: Vec<usize> = (0..self.len()).filter(|&y| self.dist[x][y] < four).collect();
        let mut centres = Vec::new();
        while !todo.is_empty() {
            let best = (0..self.len())
                .max_by_key(|&c| (todo.iter().filter(|&&y| self.dist[c][y] < one).count(), std::cmp::Reverse(c)))
                .expect("nonempty space");
            centres.push(best);
            todo.retain(|&y| self.dist[best][y] >= one);
        }
        centres
    }
}

/// Greedy upper bound on the packing constant: the largest greedy cover over all centres.
pub fn packing_constant(x: &FiniteMetricSpace) -> usize {
    (0..x.len()).map(|c| x.greedy_cover(c).len()).max().unwrap_or(1).max(1)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabiliserReport {
    pub eps: String,
    /// Indices into the isometry list.
    pub members: Vec<usize>,
    pub s2: usize,
    pub s2_squared: usize,
    pub packing: usize,
    pub doubling_pass: bool,
}

/// `S_ε(x) = {γ : d(γx, x) < ε}` and the packing-to-doubling estimate `|S_2(x)²| <= K|S_2(x)|`.
pub fn almost_stabilizer(x: &FiniteMetricSpace, point: usize, eps: Ratio<i64>) -> Result<StabiliserReport> {
    if point >= x.len() {
        return Err(Error::Hypothesis(format!("point {point} out of range")));
    }
    let index: FxHashMap<&[usize], usize> = x.isometries.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let within = |r: Ratio<i64>| -> Vec<usize> {
        (0..x.isometries.len()).filter(|&t| x.dist[x.isometries[t][point]][point] < r).collect()
    };
    let members = within(eps);
    let s2 = within(Ratio::from_integer(2));
    let mut sq: FxHashSet<usize> = FxHashSet::default();
    for &a in &s2 {
        for &b in &s2 {
            let comp: Vec<usize> = (0..x.len()).map(|i| x.isometries[a][x.isometries[b][i]]).collect();
            let t = *index
                .get(comp.as_slice())
                .ok_or_else(|| Error::Verification(format!("composition of isometries {a} and {b} is not listed")))?;
            sq.insert(t);
        }
    }
    let packing = x.greedy_cover(point).len();
    Ok(StabiliserReport {
        eps: eps.to_string(),
        members,
        s2: s2.len(),
        s2_squared: sq.len(),
        packing,
        doubling_pass: sq.len() <= packing * s2.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::interval;
    use crate::group::Group;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|x| (x as f64, (x * x * x) as f64)).collect();
        assert!((loglog_slope(&pts).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn isoperimetry_on_cycle_interval() {
        let g = Group::cyclic(100).unwrap();
        let ctx = Ctx::global(g.clone());
        let s = interval(&g, -1, 1).unwrap();
        let e = interval(&g, 0, 9).unwrap();
        let rep = isoperimetry_check(&ctx, &s, &e).unwrap();
        assert_eq!((rep.boundary, rep.r), (2, 10));
        assert!(rep.pass && rep.averaging_pass);
    }

    #[test]
    fn path_packing() {
        assert!(packing_constant(&FiniteMetricSpace::path(20)) <= 9);
    }
}
