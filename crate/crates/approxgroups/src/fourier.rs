//! Discrete analogues of the spectral lemmas on `ℤ/N_1 × … × ℤ/N_d` with
//! normalised counting measure.
//!
//! `1̂_A(ξ) = E_x 1_A(x) e(-ξ·x)` with `ξ·x = Σ ξ_i x_i / N_i`, and
//! `Spec_δ(A) = {ξ : |1̂_A(ξ)| >= δ μ(A)}`. Threshold comparisons are done in
//! floating point with an error bound, and ties inside the bound are settled
//! exactly in `ℤ[x]/Φ_L` where `L = lcm(N_i)`.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::nilprog::Clause;
use crate::set::ElementSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// Largest group order handled.
pub const MAX_ORDER: usize = 1 << 18;
/// Largest `L` for which ties are settled in `ℤ[x]/Φ_L`.
pub const EXACT_MAX_L: u64 = 1 << 12;

/// The finite abelian group `ℤ/N_1 × … × ℤ/N_d`, elements indexed in canonical order.
#[derive(Clone, Debug)]
pub struct Dual {
    pub moduli: Vec<u64>,
    /// `lcm(N_i)`.
    pub l: u64,
    weights: Vec<u64>,
    strides: Vec<usize>,
    pub order: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Dual {
    pub fn new(ctx: &Ctx) -> Result<Self> {
        if ctx.is_local() {
            return Err(Error::NonAbelian);
        }
        let moduli = ctx.group.cyclic_moduli().ok_or(Error::NonAbelian)?;
        let order = moduli.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n as usize)).filter(|&o| o <= MAX_ORDER);
        let order = order.ok_or_else(|| Error::Budget(format!("group order exceeds {MAX_ORDER}")))?;
        let l = moduli.iter().fold(1u64, |acc, &n| acc.lcm(&n));
        if l as usize > MAX_ORDER {
            return Err(Error::Budget(format!("exponent {l} exceeds {MAX_ORDER}")));
        }
        let weights = moduli.iter().map(|&n| l / n).collect();
        let mut strides = vec![1usize; moduli.len()];
        for i in (0..moduli.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * moduli[i + 1] as usize;
        }
        let tau = std::f64::consts::TAU;
        let cos = (0..l).map(|k| (tau * k as f64 / l as f64).cos()).collect();
        let sin = (0..l).map(|k| (tau * k as f64 / l as f64).sin()).collect();
        Ok(Dual { moduli, l, weights, strides, order, cos, sin })
    }

    pub fn index(&self, x: &[i64]) -> usize {
        x.iter().zip(&self.strides).map(|(&c, &s)| c as usize * s).sum()
    }

    pub fn elem(&self, mut i: usize) -> Elem {
        let mut e = Elem::from_elem(0, self.moduli.len());
        for (j, &s) in self.strides.iter().enumerate() {
            e[j] = (i / s) as i64;
            i %= s;
        }
        e
    }

    fn add_idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.elem(i), self.elem(j));
        let s: Elem = a.iter().zip(&b).zip(&self.moduli).map(|((x, y), &n)| (x + y) % n as i64).collect();
        self.index(&s)
    }

    fn neg_idx(&self, i: usize) -> usize {
        let a = self.elem(i);
        let s: Elem = a.iter().zip(&self.moduli).map(|(x, &n)| (n as i64 - x) % n as i64).collect();
        self.index(&s)
    }

    /// `ξ·x` as an exponent modulo `L`.
    pub fn pairing(&self, xi: &[i64], x: &[i64]) -> u64 {
        let mut acc: u128 = 0;
        for ((&a, &b), &w) in xi.iter().zip(x).zip(&self.weights) {
            acc += (a as u128 * b as u128 % self.l as u128) * w as u128;
        }
        (acc % self.l as u128) as u64
    }

    fn all(&self) -> Vec<Elem> {
        (0..self.order).map(|i| self.elem(i)).collect()
    }

    /// `Σ_{x∈A} e(-ξ·x)` in floating point.
    fn transform(&self, xi: &[i64], a: &[Elem]) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for x in a {
            let k = self.pairing(xi, x) as usize;
            re += self.cos[k];
            im -= self.sin[k];
        }
        (re, im)
    }
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// `Φ_n = Π_{d|n} (x^d - 1)^{μ(n/d)}` with integer coefficients, lowest degree first.
pub fn cyclotomic(n: u64) -> Vec<i64> {
    let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    let mut p = vec![1i64];
    for &d in &divisors {
        if mobius(n / d) == 1 {
            let mut next = vec![0i64; p.len() + d as usize];
            for (i, &c) in p.iter().enumerate() {
                next[i + d as usize] += c;
                next[i] -= c;
            }
            p = next;
        }
    }
    for &d in &divisors {
        if mobius(n / d) == -1 {
            // divide by x^d - 1: q_i = q_{i-d} - p_i read from the top down
            let d = d as usize;
            let deg = p.len() - 1 - d;
            let mut q = vec![0i64; deg + 1];
            for i in (0..=deg).rev() {
                q[i] = p[i + d] + if i + d <= deg { q[i + d] } else { 0 };
            }
            p = q;
        }
    }
    p
}

/// Remainder of `p` modulo the monic `q`.
pub fn rem_monic(p: &[i128], q: &[i64]) -> Vec<i128> {
    let dq = q.len() - 1;
    let mut r = p.to_vec();
    for i in (dq..r.len()).rev() {
        let c = r[i];
        if c != 0 {
            for j in 0..=dq {
                r[i - dq + j] -= c * q[j] as i128;
            }
        }
    }
    r.truncate(dq);
    r
}

/// Autocorrelation `r(t) = #{(x, y) ∈ A² : y - x = t}` indexed by element.
fn autocorrelation(dual: &Dual, a: &[Elem]) -> Vec<i64> {
    let idx: Vec<usize> = a.iter().map(|x| dual.index(x)).collect();
    let neg: Vec<usize> = idx.iter().map(|&i| dual.neg_idx(i)).collect();
    let mut r = vec![0i64; dual.order];
    for &y in &idx {
        for &nx in &neg {
            r[dual.add_idx(y, nx)] += 1;
        }
    }
    r
}

/// Coefficients of `|Σ_{x∈A} ζ^{ξ·x}|² = Σ_t r(t) ζ^{ξ·t}` as a polynomial of degree `< L`.
fn squared_modulus_poly(dual: &Dual, r: &[i64], xi: &[i64]) -> Vec<i128> {
    let mut c = vec![0i128; dual.l as usize];
    for (i, &v) in r.iter().enumerate() {
        if v != 0 {
            c[dual.pairing(xi, &dual.elem(i)) as usize] += v as i128;
        }
    }
    c
}

struct Comparator<'d> {
    dual: &'d Dual,
    a: Vec<Elem>,
    /// `δ = p/q`.
    p: i128,
    q: i128,
    r: std::sync::OnceLock<Vec<i64>>,
    phi: std::sync::OnceLock<Vec<i64>>,
}

impl<'d> Comparator<'d> {
    fn new(dual: &'d Dual, a: &ElementSet, delta: Ratio<u64>) -> Self {
        Comparator {
            dual,
            a: a.to_vec(),
            p: *delta.numer() as i128,
            q: *delta.denom() as i128,
            r: Default::default(),
            phi: Default::default(),
        }
    }

    /// Whether `|1̂_A(ξ)| >= δ μ(A)`, together with `|1̂_A(ξ)|/μ(A)` and whether the exact test ran.
    fn in_spec(&self, xi: &[i64]) -> Result<(bool, f64, bool)> {
        let n = self.a.len() as f64;
        let (re, im) = self.dual.transform(xi, &self.a);
        let s = re * re + im * im;
        let ratio = s.sqrt() / n;
        let (p, q) = (self.p as f64, self.q as f64);
        let lhs = q * q * s;
        let rhs = p * p * n * n;
        let err = 8.0 * q * q * n.powi(3) * f64::EPSILON + 1e-9;
        if (lhs - rhs).abs() > err {
            return Ok((lhs > rhs, ratio, false));
        }
        if self.dual.l > EXACT_MAX_L {
            return Err(Error::Budget(format!("threshold tie at {xi:?} needs exact arithmetic beyond L = {EXACT_MAX_L}")));
        }
        let r = self.r.get_or_init(|| autocorrelation(self.dual, &self.a));
        let phi = self.phi.get_or_init(|| cyclotomic(self.dual.l));
        let mut c = squared_modulus_poly(self.dual, r, xi);
        for v in c.iter_mut() {
            *v *= self.q * self.q;
        }
        c[0] -= self.p * self.p * (self.a.len() as i128).pow(2);
        if rem_monic(&c, phi).iter().all(|&v| v == 0) {
            return Ok((true, ratio, true));
        }
        Err(Error::Budget(format!("threshold comparison at {xi:?} unresolved in double precision")))
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub delta: Ratio<u64>,
    pub mu: Ratio<u64>,
    pub spectrum: Vec<Elem>,
    /// `|1̂_A(ξ)| / μ(A)` for each character of the spectrum.
    pub magnitudes: Vec<f64>,
    pub perp: ElementSet,
    pub perp_is_subgroup: bool,
    pub subgroup_rank: usize,
    pub exact_ties: usize,
}

impl SpectrumReport {
    pub fn to_json(&self) -> Value {
        json!({
            "analogue": "discrete",
            "delta": self.delta.to_string(),
            "mu": self.mu.to_string(),
            "spectrum": self.spectrum.iter().map(|x| x.to_vec()).collect::<Vec<_>>(),
            "magnitudes": self.magnitudes,
            "perp": self.perp.iter().map(|x| x.to_vec()).collect::<Vec<_>>(),
            "perp_is_subgroup": self.perp_is_subgroup,
            "subgroup_rank": self.subgroup_rank,
            "exact_ties": self.exact_ties,
        })
    }
}

fn check_set(dual: &Dual, a: &ElementSet) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Hypothesis("empty set".into()));
    }
    for x in a.iter() {
        if x.len() != dual.moduli.len() || x.iter().zip(&dual.moduli).any(|(&c, &n)| c < 0 || c as u64 >= n) {
            return Err(Error::ContextMismatch(format!("{x:?}")));
        }
    }
    Ok(())
}

/// `Spec_δ(A)` in canonical order, with its annihilator.
pub fn spectrum(ctx: &Ctx, a: &ElementSet, delta: Ratio<u64>) -> Result<SpectrumReport> {
    let dual = Dual::new(ctx)?;
    check_set(&dual, a)?;
    let cmp = Comparator::new(&dual, a, delta);
    let rows: Vec<(Elem, bool, f64, bool)> = dual
        .all()
        .into_par_iter()
        .map(|xi| cmp.in_spec(&xi).map(|(inside, m, exact)| (xi, inside, m, exact)))
        .collect::<Result<_>>()?;
    let exact_ties = rows.iter().filter(|r| r.3).count();
    let (spectrum, magnitudes): (Vec<Elem>, Vec<f64>) = rows.into_iter().filter(|r| r.1).map(|r| (r.0, r.2)).unzip();
    let perp = annihilator(&dual, &spectrum);
    let perp_is_subgroup = is_subgroup(&dual, &perp);
    let subgroup_rank = generated_rank(&dual, &spectrum);
    Ok(SpectrumReport {
        delta,
        mu: Ratio::new(a.len() as u64, dual.order as u64),
        spectrum,
        magnitudes,
        perp,
        perp_is_subgroup,
        subgroup_rank,
        exact_ties,
    })
}

/// `S^⊥ = ⋂_{ξ∈S} ker ξ`.
pub fn annihilator(dual: &Dual, chars: &[Elem]) -> ElementSet {
    dual.all().into_iter().filter(|x| chars.iter().all(|xi| dual.pairing(xi, x) == 0)).collect()
}

/// Exhaustive closure check: identity, negation and sums.
pub fn is_subgroup(dual: &Dual, h: &ElementSet) -> bool {
    let idx: Vec<usize> = h.iter().map(|x| dual.index(x)).collect();
    let mut mask = vec![false; dual.order];
    for &i in &idx {
        mask[i] = true;
    }
    mask[0]
        && idx.iter().all(|&i| mask[dual.neg_idx(i)])
        && idx.par_iter().all(|&i| idx.iter().all(|&j| mask[dual.add_idx(i, j)]))
}

/// The subgroup generated by `gens`, as a membership mask.
fn generated(dual: &Dual, gens: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; dual.order];
    mask[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = dual.add_idx(x, g);
            if !mask[y] {
                mask[y] = true;
                stack.push(y);
            }
        }
    }
    mask
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Minimal number of generators of `<chars>`: `max_p dim_{F_p} H/pH`.
pub fn generated_rank(dual: &Dual, chars: &[Elem]) -> usize {
    let gens: Vec<usize> = chars.iter().map(|x| dual.index(x)).filter(|&i| i != 0).collect();
    if gens.is_empty() {
        return 0;
    }
    let h = generated(dual, &gens);
    let size = h.iter().filter(|&&b| b).count() as u64;
    let members: Vec<usize> = (0..dual.order).filter(|&i| h[i]).collect();
    let mut rank = 0;
    for p in prime_factors(size) {
        let mut ph = vec![false; dual.order];
        for &x in &members {
            let mut y = 0;
            for _ in 0..p {
                y = dual.add_idx(y, x);
            }
            ph[y] = true;
        }
        let quotient = size / ph.iter().filter(|&&b| b).count() as u64;
        let mut dim = 0;
        let mut q = quotient;
        while q > 1 {
            q /= p;
            dim += 1;
        }
        rank = rank.max(dim);
    }
    rank
}

/// Σ_ξ |1̂_A(ξ)|² = μ(A), checked exactly in `ℤ[x]/Φ_L` and numerically.
#[derive(Clone, Debug, Serialize)]
pub struct ParsevalReport {
    pub order: usize,
    pub exact: Option<bool>,
    pub float_sum: f64,
    pub mu: f64,
    pub float_ok: bool,
}

pub fn parseval_check(ctx: &Ctx, a: &ElementSet) -> Result<ParsevalReport> {
    let dual = Dual::new(ctx)?;
    check_set(&dual, a)?;
    let av = a.to_vec();
    let n = dual.order as f64;
    let float_sum: f64 = dual
        .all()
        .par_iter()
        .map(|xi| {
            let (re, im) = dual.transform(xi, &av);
            (re * re + im * im) / (n * n)
        })
        .sum();
    let mu = a.len() as f64 / n;
    let exact = (dual.l <= EXACT_MAX_L).then(|| {
        let r = autocorrelation(&dual, &av);
        let phi = cyclotomic(dual.l);
        let mut total = vec![0i128; dual.l as usize];
        for xi in dual.all() {
            for (t, v) in squared_modulus_poly(&dual, &r, &xi).into_iter().enumerate() {
                total[t] += v;
            }
        }
        let rem = rem_monic(&total, &phi);
        let target = (dual.order * a.len()) as i128;
        rem.first() == Some(&target) && rem[1..].iter().all(|&v| v == 0)
    });
    let float_ok = (float_sum - mu).abs() <= 1e-9 * mu.max(1.0);
    Ok(ParsevalReport { order: dual.order, exact, float_sum, mu, float_ok })
}

/// Counts `c(x)` of `x = a_1 + … + a_k - b_1 - … - b_k`.
fn difference_counts(dual: &Dual, a: &ElementSet, k: usize) -> Result<(Vec<u128>, usize)> {
    let idx: Vec<usize> = a.iter().map(|x| dual.index(x)).collect();
    let neg: Vec<usize> = idx.iter().map(|&i| dual.neg_idx(i)).collect();
    let step = |f: &[u128], by: &[usize]| -> Result<Vec<u128>> {
        let mut out = vec![0u128; dual.order];
        for (x, &v) in f.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for &b in by {
                let y = dual.add_idx(x, b);
                out[y] = out[y].checked_add(v).ok_or(Error::Overflow("convolution"))?;
            }
        }
        Ok(out)
    };
    let mut f = vec![0u128; dual.order];
    f[0] = 1;
    for _ in 0..k {
        f = step(&f, &idx)?;
    }
    let ka = f.iter().filter(|&&v| v > 0).count();
    for _ in 0..k {
        f = step(&f, &neg)?;
    }
    Ok((f, ka))
}

fn big(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow_ratio(r: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * r)
}

/// Whether `δ^{2k-2} <= μ(A) / (2 μ(kA))`.
pub fn bogolyubov_hypothesis(delta: Ratio<u64>, a_len: usize, ka_len: usize, k: usize) -> bool {
    let d = BigRational::new((*delta.numer()).into(), (*delta.denom()).into());
    pow_ratio(&d, 2 * k - 2) <= BigRational::new(a_len.into(), (2 * ka_len).into())
}

/// Largest `δ = j/den` satisfying the hypothesis.
pub fn bogolyubov_delta(a_len: usize, ka_len: usize, k: usize, den: u64) -> Ratio<u64> {
    let (mut lo, mut hi) = (0u64, den);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if bogolyubov_hypothesis(Ratio::new(mid, den), a_len, ka_len, k) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ratio::new(lo, den)
}

#[derive(Clone, Debug, Serialize)]
pub struct BogolyubovReport {
    pub k: usize,
    pub delta: String,
    pub hypothesis_holds: bool,
    /// `(μ(A)/2μ(kA))^{1/(2k-2)} - δ`.
    pub hypothesis_slack: f64,
    pub ka_size: usize,
    pub sumset_size: usize,
    pub spectrum_size: usize,
    pub perp_size: usize,
    pub contained: Clause,
    /// `f(x) >= μ(A)^{2k-1}(μ(A) - 2δ^{2k-2}μ(kA))/μ(kA)` and `f(x) > 0` on the perp.
    pub positivity: Clause,
    pub pass: bool,
}

/// `kA - kA ⊇ Spec_δ(A)^⊥`, by exact enumeration of the sumset.
pub fn bogolyubov_check(ctx: &Ctx, a: &ElementSet, k: usize, delta: Ratio<u64>, allow_override: bool) -> Result<BogolyubovReport> {
    if k < 2 {
        return Err(Error::Hypothesis("k must be at least 2".into()));
    }
    let dual = Dual::new(ctx)?;
    check_set(&dual, a)?;
    let (counts, ka) = difference_counts(&dual, a, k)?;
    let hypothesis_holds = bogolyubov_hypothesis(delta, a.len(), ka, k);
    if !hypothesis_holds && !allow_override {
        return Err(Error::Hypothesis(format!("δ = {delta} exceeds (μ(A)/2μ(kA))^(1/(2k-2))")));
    }
    let bound = (a.len() as f64 / (2 * ka) as f64).powf(1.0 / (2 * k - 2) as f64);
    let spec = spectrum(ctx, a, delta)?;
    let sumset_size = counts.iter().filter(|&&v| v > 0).count();
    let mut contained = Clause::ok();
    let mut positivity = Clause::ok();
    // c(x)·|kA| >= |A|^{2k-1}(|A| - 2δ^{2k-2}|kA|), with |G| cancelled
    let d = BigRational::new((*delta.numer()).into(), (*delta.denom()).into());
    let a_len = big(a.len());
    let rhs = pow_ratio(&a_len, 2 * k - 1) * (a_len.clone() - pow_ratio(&d, 2 * k - 2) * big(2 * ka));
    for x in spec.perp.iter() {
        let c = counts[dual.index(x)];
        if c == 0 && contained.pass {
            contained = Clause::fail(format!("{x:?} ∈ perp \\ (kA - kA)"));
        }
        let lhs = big(c) * big(ka);
        if positivity.pass && (c == 0 || (hypothesis_holds && lhs < rhs)) {
            positivity = Clause::fail(format!("f({x:?}) below the lower bound"));
        }
    }
    let pass = contained.pass && positivity.pass;
    Ok(BogolyubovReport {
        k,
        delta: delta.to_string(),
        hypothesis_holds,
        hypothesis_slack: bound - delta.to_f64().unwrap_or(0.0),
        ka_size: ka,
        sumset_size,
        spectrum_size: spec.spectrum.len(),
        perp_size: spec.perp.len(),
        contained,
        positivity,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChangReport {
    pub delta: String,
    pub alpha: f64,
    pub spectrum_size: usize,
    pub rank: usize,
    /// `δ^-2 log(1/α)`.
    pub reference: f64,
    pub ratio: f64,
}

pub fn chang_rank_check(ctx: &Ctx, a: &ElementSet, delta: Ratio<u64>) -> Result<ChangReport> {
    let spec = spectrum(ctx, a, delta)?;
    let alpha = spec.mu.to_f64().unwrap_or(0.0);
    let d = delta.to_f64().unwrap_or(0.0);
    let reference = (1.0 / alpha).ln() / (d * d);
    let ratio = if reference > 0.0 { spec.subgroup_rank as f64 / reference } else if spec.subgroup_rank == 0 { 0.0 } else { f64::INFINITY };
    Ok(ChangReport { delta: delta.to_string(), alpha, spectrum_size: spec.spectrum.len(), rank: spec.subgroup_rank, reference, ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupSearch {
    pub four_a_size: usize,
    pub subgroup: Vec<Elem>,
    pub generators: Vec<Elem>,
    pub contained: bool,
    /// Every cyclic subgroup was tested, so in a cyclic group the result is the largest.
    pub cyclic_exhaustive: bool,
    pub largest_certified: bool,
    pub candidates_tested: usize,
}

/// Largest subgroup found inside `4A = A + A + A + A`.
pub fn find_subgroup_in_4a(ctx: &Ctx, a: &ElementSet) -> Result<SubgroupSearch> {
    let dual = Dual::new(ctx)?;
    check_set(&dual, a)?;
    let idx: Vec<usize> = a.iter().map(|x| dual.index(x)).collect();
    let mut cur = vec![false; dual.order];
    cur[0] = true;
    for _ in 0..4 {
        let mut next = vec![false; dual.order];
        for x in (0..dual.order).filter(|&x| cur[x]) {
            for &b in &idx {
                next[dual.add_idx(x, b)] = true;
            }
        }
        cur = next;
    }
    let four = cur;
    let inside = |m: &[bool]| m.iter().zip(&four).all(|(&h, &f)| !h || f);
    let size = |m: &[bool]| m.iter().filter(|&&b| b).count();
    let mut tested = 0;
    let mut best: Vec<bool> = {
        let mut m = vec![false; dual.order];
        m[0] = true;
        m
    };
    let mut best_gens: Vec<usize> = Vec::new();
    // cyclic subgroups <g>, g ∈ 4A
    let mut cyclic: Vec<(usize, usize)> = Vec::new();
    for g in (1..dual.order).filter(|&g| four[g]) {
        let m = generated(&dual, &[g]);
        tested += 1;
        if inside(&m) {
            cyclic.push((size(&m), g));
        }
    }
    cyclic.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    if let Some(&(_, g)) = cyclic.first() {
        best_gens = vec![g];
        best = generated(&dual, &best_gens);
    }
    for &(_, g) in cyclic.iter().skip(1) {
        if best[g] {
            continue;
        }
        let mut gens = best_gens.clone();
        gens.push(g);
        let m = generated(&dual, &gens);
        tested += 1;
        if inside(&m) {
            best = m;
            best_gens = gens;
        }
    }
    // annihilators of spectra on a δ-grid
    for j in 1..=16u64 {
        let spec = spectrum(ctx, a, Ratio::new(j, 16))?;
        let perp = annihilator(&dual, &spec.spectrum);
        tested += 1;
        let mut m = vec![false; dual.order];
        for x in perp.iter() {
            m[dual.index(x)] = true;
        }
        if inside(&m) && size(&m) > size(&best) {
            best_gens = perp.iter().map(|x| dual.index(x)).filter(|&i| i != 0).collect();
            best = m;
        }
    }
    let subgroup: Vec<Elem> = (0..dual.order).filter(|&i| best[i]).map(|i| dual.elem(i)).collect();
    let cyclic_exhaustive = dual.moduli.len() == 1;
    Ok(SubgroupSearch {
        four_a_size: size(&four),
        contained: inside(&best),
        largest_certified: cyclic_exhaustive,
        subgroup,
        generators: best_gens.into_iter().map(|i| dual.elem(i)).collect(),
        cyclic_exhaustive,
        candidates_tested: tested,
    })
}

/// `{-n..n}` reduced into `ℤ/m`.
pub fn centered_interval(m: u64, n: i64) -> ElementSet {
    (-n..=n).map(|x| Elem::from_elem(x.rem_euclid(m as i64), 1)).collect()
}

/// Subgroup of `ℤ/m` generated by `step`.
pub fn cyclic_subgroup(m: u64, step: u64) -> ElementSet {
    let g = m.gcd(&step);
    (0..m / g).map(|i| Elem::from_elem((i * g) as i64, 1)).collect()
}

/// Float value of `1̂_A(ξ)`, for oracles and reports.
pub fn transform_value(ctx: &Ctx, a: &ElementSet, xi: &[i64]) -> Result<(f64, f64)> {
    let dual = Dual::new(ctx)?;
    let (re, im) = dual.transform(xi, &a.to_vec());
    let n = dual.order as f64;
    Ok((re / n, im / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn zm(m: u64) -> Ctx {
        Ctx::global(Group::cyclic(m).unwrap())
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic(105).iter().map(|c| c.abs()).max(), Some(2));
        assert_eq!(cyclotomic(4096).len(), 2049);
        for n in 1..60u64 {
            // Φ_n(x) divides x^n - 1
            let mut xn = vec![0i128; n as usize + 1];
            xn[0] = -1;
            xn[n as usize] = 1;
            assert!(rem_monic(&xn, &cyclotomic(n)).iter().all(|&c| c == 0), "n = {n}");
        }
    }

    #[test]
    fn subgroup_spectrum_is_annihilator() {
        let ctx = zm(20);
        let a = cyclic_subgroup(20, 5);
        let r = spectrum(&ctx, &a, Ratio::new(1, 2)).unwrap();
        let xs: Vec<i64> = r.spectrum.iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0, 4, 8, 12, 16]);
        assert_eq!(r.perp, a);
        assert!(r.perp_is_subgroup);
        assert_eq!(r.subgroup_rank, 1);
        // |1̂| equals δμ exactly at nothing here, but the delta = 1 boundary ties
        let r1 = spectrum(&ctx, &a, Ratio::new(1, 1)).unwrap();
        assert_eq!(r1.spectrum.len(), 5);
        assert!(r1.exact_ties >= 5);
    }

    #[test]
    fn whole_group() {
        let ctx = zm(12);
        let a = cyclic_subgroup(12, 1);
        let r = spectrum(&ctx, &a, Ratio::new(1, 3)).unwrap();
        assert_eq!(r.spectrum.len(), 1);
        assert_eq!(r.perp.len(), 12);
        assert_eq!(chang_rank_check(&ctx, &a, Ratio::new(1, 3)).unwrap().rank, 0);
    }

    #[test]
    fn parseval_exact_small() {
        let ctx = zm(30);
        let a = centered_interval(30, 4);
        let p = parseval_check(&ctx, &a).unwrap();
        assert_eq!(p.exact, Some(true));
        assert!(p.float_ok);
    }

    #[test]
    fn subgroup_in_4a() {
        let ctx = zm(101);
        let r = find_subgroup_in_4a(&ctx, &centered_interval(101, 10)).unwrap();
        assert_eq!(r.subgroup.len(), 1);
        let ctx = zm(60);
        let h = cyclic_subgroup(60, 12);
        let r = find_subgroup_in_4a(&ctx, &h).unwrap();
        assert_eq!(r.subgroup.len(), h.len());
    }
}
