//! Noncommutative progressions, nilprogressions and coset nilprogressions.
//!
//! A progression `P(u_1..u_r; N_1..N_r)` is the set of values of words in
//! the formal letters `u_i^{±1}` using each `u_i` at most `⌊N_i⌋` times.
//! Letters are formal: `P(u, u; 1, 1)` contains `u·u` even though both
//! generators coincide.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::{heis, Elem, Group};
use crate::growth::loglog_slope;
use crate::set::ElementSet;
use crate::setops::{approx_group_witness, is_symmetric, product_set, PowerTower};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive};
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};
use smallvec::{smallvec, SmallVec};

type Counts = SmallVec<[u32; 4]>;

#[derive(Clone, Debug, PartialEq)]
pub struct ProgressionSpec {
    pub generators: Vec<Elem>,
    pub lengths: Vec<Ratio<i64>>,
    pub step: Option<usize>,
    /// Finite normal subgroup for coset progressions.
    pub h: Option<ElementSet>,
    /// Normal-form constant.
    pub c: Option<Ratio<i64>>,
}

impl ProgressionSpec {
    pub fn new(generators: Vec<Elem>, lengths: Vec<Ratio<i64>>) -> Result<Self> {
        if generators.len() != lengths.len() {
            return Err(Error::Hypothesis(format!(
                "{} generators but {} lengths",
                generators.len(),
                lengths.len()
            )));
        }
        if let Some(n) = lengths.iter().find(|n| !n.is_positive()) {
            return Err(Error::Hypothesis(format!("length {n} is not positive")));
        }
        Ok(ProgressionSpec { generators, lengths, step: None, h: None, c: None })
    }

    pub fn integral(generators: Vec<Elem>, lengths: &[i64]) -> Result<Self> {
        Self::new(generators, lengths.iter().map(|&n| Ratio::from_integer(n)).collect())
    }

    pub fn with_h(mut self, h: ElementSet) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_c(mut self, c: Ratio<i64>) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_step(mut self, s: usize) -> Self {
        self.step = Some(s);
        self
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Occurrence budgets `⌊N_i⌋`.
    pub fn budgets(&self) -> Vec<u32> {
        self.lengths.iter().map(|n| floor_u32(n)).collect()
    }

    /// The same progression with every length multiplied by `f`.
    pub fn scaled(&self, f: Ratio<i64>) -> Self {
        let mut s = self.clone();
        s.lengths = self.lengths.iter().map(|n| n * f).collect();
        s
    }

    pub fn to_json(&self, g: &Group) -> Value {
        json!({
            "generators": self.generators.iter().map(|e| g.elem_to_json(e)).collect::<Vec<_>>(),
            "lengths": self.lengths.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            "step": self.step,
            "H": self.h.as_ref().map(|h| h.len()),
            "C": self.c.map(|c| c.to_string()),
        })
    }
}

fn floor_u32(n: &Ratio<i64>) -> u32 {
    n.floor().to_integer().clamp(0, u32::MAX as i64) as u32
}

/// The set `P(u; N)`, multiplied by `H` for coset progressions.
pub fn enumerate_progression(ctx: &Ctx, spec: &ProgressionSpec) -> Result<ElementSet> {
    let base = enumerate_words(ctx, &spec.generators, &spec.budgets())?;
    match &spec.h {
        Some(h) => product_set(ctx, &base, h),
        None => Ok(base),
    }
}

/// Values of all words with at most `budgets[i]` occurrences of `u_i^{±1}`.
///
/// In a global group, generators commuting with every generator are pulled
/// out of the words and contribute a plain box of powers; the rest is a
/// breadth-first search over `(value, counts)` states in which a state is
/// dropped when an existing state with the same value uses no more of any
/// letter.
pub fn enumerate_words(ctx: &Ctx, generators: &[Elem], budgets: &[u32]) -> Result<ElementSet> {
    let central: Vec<bool> = if ctx.is_local() {
        vec![false; generators.len()]
    } else {
        generators
            .iter()
            .map(|u| {
                generators
                    .iter()
                    .map(|v| Ok(ctx.group.commutator(u, v)? == ctx.identity()))
                    .collect::<Result<Vec<bool>>>()
                    .map(|c| c.into_iter().all(|b| b))
            })
            .collect::<Result<_>>()?
    };
    let (mut gens, mut buds) = (Vec::new(), Vec::new());
    let mut tail = Vec::new();
    for (i, u) in generators.iter().enumerate() {
        if central[i] {
            tail.push((u.clone(), budgets[i]));
        } else {
            gens.push(u.clone());
            buds.push(budgets[i]);
        }
    }
    let mut out = pareto_bfs(ctx, &gens, &buds)?;
    for (u, b) in tail {
        let powers: ElementSet = (-(b as i64)..=b as i64)
            .map(|n| ctx.group.pow(&u, n))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        out = product_set(ctx, &out, &powers)?;
    }
    Ok(out)
}

fn pareto_bfs(ctx: &Ctx, gens: &[Elem], budgets: &[u32]) -> Result<ElementSet> {
    let mut letters = Vec::with_capacity(2 * gens.len());
    for (i, u) in gens.iter().enumerate() {
        letters.push((i, u.clone()));
        letters.push((i, ctx.inv(u)?));
    }
    let id = ctx.identity();
    let zero: Counts = smallvec![0; gens.len()];
    let mut seen: FxHashMap<Elem, Vec<Counts>> = FxHashMap::default();
    seen.insert(id.clone(), vec![zero.clone()]);
    let mut frontier = vec![(id, zero)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (v, c) in &frontier {
            for (i, l) in &letters {
                if c[*i] >= budgets[*i] {
                    continue;
                }
                let w = ctx.mul(v, l)?;
                let mut c2 = c.clone();
                c2[*i] += 1;
                let states = seen.entry(w.clone()).or_default();
                if states.iter().any(|d| d.iter().zip(&c2).all(|(a, b)| a <= b)) {
                    continue;
                }
                states.push(c2.clone());
                next.push((w, c2));
            }
        }
        ctx.check_size(seen.len(), "progression")?;
        frontier = next;
    }
    Ok(seen.into_keys().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub pass: bool,
    pub witness: Option<String>,
}

impl Clause {
    pub(crate) fn ok() -> Self {
        Clause { pass: true, witness: None }
    }

    pub(crate) fn fail(w: String) -> Self {
        Clause { pass: false, witness: Some(w) }
    }
}

fn letter_name(i: usize, e: i64) -> String {
    if e > 0 {
        format!("u{}", i + 1)
    } else {
        format!("u{}^-1", i + 1)
    }
}

fn ctx_commutator(ctx: &Ctx, a: &[i64], b: &[i64]) -> Result<Elem> {
    let x = ctx.mul(&ctx.inv(a)?, &ctx.inv(b)?)?;
    let x = ctx.mul(&x, a)?;
    ctx.mul(&x, b)
}

#[derive(Clone, Debug, Serialize)]
pub struct NilprogressionReport {
    pub step: usize,
    pub commutators_checked: usize,
    pub clause: Clause,
}

/// Every iterated commutator of degree `s + 1` in the letters `u_i^{±1}` is trivial.
///
/// Commutators are generated level by level and deduplicated by value, which
/// is exact because a commutator's value only depends on the values of its
/// arguments.
pub fn check_nilprogression(ctx: &Ctx, spec: &ProgressionSpec, s: usize) -> Result<NilprogressionReport> {
    let mut levels: Vec<Vec<(Elem, String)>> = vec![Vec::new()];
    let mut first = Vec::new();
    for (i, u) in spec.generators.iter().enumerate() {
        first.push((u.clone(), letter_name(i, 1)));
        first.push((ctx.inv(u)?, letter_name(i, -1)));
    }
    levels.push(dedup(first));
    for k in 2..=s + 1 {
        let mut lvl = Vec::new();
        for j in 1..k {
            for (a, an) in &levels[j] {
                for (b, bn) in &levels[k - j] {
                    lvl.push((ctx_commutator(ctx, a, b)?, format!("[{an},{bn}]")));
                }
            }
        }
        levels.push(dedup(lvl));
    }
    let top = &levels[s + 1];
    let id = ctx.identity();
    let clause = match top.iter().find(|(v, _)| *v != id) {
        Some((_, name)) => Clause::fail(name.clone()),
        None => Clause::ok(),
    };
    Ok(NilprogressionReport { step: s, commutators_checked: top.len(), clause })
}

fn dedup(v: Vec<(Elem, String)>) -> Vec<(Elem, String)> {
    let mut seen = FxHashMap::default();
    let mut out = Vec::new();
    for (e, n) in v {
        if seen.insert(e.clone(), ()).is_none() {
            out.push((e, n));
        }
    }
    out
}

/// Equality modulo an optional finite normal subgroup `H`.
struct Cosets<'a> {
    ctx: &'a Ctx,
    h: Option<&'a ElementSet>,
}

impl Cosets<'_> {
    /// Canonical representative of `gH`.
    fn key(&self, g: &[i64]) -> Result<Elem> {
        match self.h {
            None => Ok(SmallVec::from_slice(g)),
            Some(h) => {
                let mut best: Option<Elem> = None;
                for x in h.iter() {
                    let y = self.ctx.mul(g, x)?;
                    if best.as_ref().is_none_or(|b| y < *b) {
                        best = Some(y);
                    }
                }
                best.ok_or_else(|| Error::Hypothesis("H is empty".into()))
            }
        }
    }

    /// `g ∈ S·H`.
    fn member(&self, g: &[i64], s: &ElementSet) -> Result<bool> {
        match self.h {
            None => Ok(s.contains(g)),
            Some(h) => {
                for x in h.iter() {
                    if s.contains(&self.ctx.mul(g, &self.ctx.inv(x)?)?) {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// `H` is a subgroup normalised by every generator.
pub fn check_coset_subgroup(ctx: &Ctx, spec: &ProgressionSpec) -> Result<Clause> {
    let Some(h) = &spec.h else { return Ok(Clause::ok()) };
    if !h.contains(&ctx.identity()) {
        return Ok(Clause::fail("H misses the identity".into()));
    }
    for a in h.iter() {
        if !h.contains(&ctx.inv(a)?) {
            return Ok(Clause::fail(format!("H not closed under inverse at {a:?}")));
        }
        for b in h.iter() {
            if !h.contains(&ctx.mul(a, b)?) {
                return Ok(Clause::fail(format!("H not closed: {a:?}*{b:?}")));
            }
        }
    }
    for (i, u) in spec.generators.iter().enumerate() {
        for a in h.iter() {
            if !h.contains(&ctx.group.conj(a, u)?) {
                return Ok(Clause::fail(format!("u{} does not normalise H at {a:?}", i + 1)));
            }
        }
    }
    Ok(Clause::ok())
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormReport {
    pub c: String,
    pub subgroup: Clause,
    pub upper_triangular: Clause,
    pub local_properness: Clause,
    pub volume: Clause,
    /// `|P|`, or `|PH|/|H|` for coset progressions.
    pub size: usize,
    /// `Π (2⌊N_i⌋ + 1)`.
    pub box_volume: u128,
    pub pass: bool,
}

/// The three axioms of `C`-normal form, evaluated modulo `H` when present.
pub fn check_normal_form(ctx: &Ctx, spec: &ProgressionSpec) -> Result<NormalFormReport> {
    let c = spec.c.ok_or_else(|| Error::Hypothesis("normal form needs a constant C".into()))?;
    if c < Ratio::one() {
        return Err(Error::Hypothesis(format!("C = {c} is below 1")));
    }
    let cos = Cosets { ctx, h: spec.h.as_ref() };
    let r = spec.rank();
    let subgroup = check_coset_subgroup(ctx, spec)?;

    let mut upper = Clause::ok();
    'outer: for i in 0..r {
        for j in i + 1..r {
            let scale = c / (spec.lengths[i] * spec.lengths[j]);
            let budgets: Vec<u32> = spec.lengths[j + 1..].iter().map(|n| floor_u32(&(n * scale))).collect();
            let sub = enumerate_words(ctx, &spec.generators[j + 1..], &budgets)?;
            for ei in [1i64, -1] {
                for ej in [1i64, -1] {
                    let a = ctx.group.pow(&spec.generators[i], ei)?;
                    let b = ctx.group.pow(&spec.generators[j], ej)?;
                    let com = ctx_commutator(ctx, &a, &b)?;
                    if !cos.member(&com, &sub)? {
                        upper = Clause::fail(format!("[{},{}]", letter_name(i, ei), letter_name(j, ej)));
                        break 'outer;
                    }
                }
            }
        }
    }

    let bounds: Vec<i64> = spec.lengths.iter().map(|n| (n / c).floor().to_integer()).collect();
    let mut proper = Clause::ok();
    let mut seen: FxHashMap<Elem, Vec<i64>> = FxHashMap::default();
    let mut exps: Vec<i64> = bounds.iter().map(|b| -b).collect();
    if r > 0 {
        loop {
            let mut v = ctx.identity();
            for (u, &n) in spec.generators.iter().zip(&exps) {
                v = ctx.mul(&v, &ctx.group.pow(u, n)?)?;
            }
            if let Some(prev) = seen.insert(cos.key(&v)?, exps.clone()) {
                proper = Clause::fail(format!("exponents {prev:?} and {exps:?} collide"));
                break;
            }
            if !odometer(&mut exps, &bounds) {
                break;
            }
        }
    }

    let p = enumerate_progression(ctx, spec)?;
    let size = match &spec.h {
        None => p.len(),
        Some(_) => {
            let keys: rustc_hash::FxHashSet<Elem> = p.iter().map(|g| cos.key(g)).collect::<Result<_>>()?;
            keys.len()
        }
    };
    let box_volume: u128 = spec.budgets().iter().map(|&b| 2 * b as u128 + 1).product();
    let size_r = Ratio::from_integer(size as i128);
    let vol_r = Ratio::from_integer(box_volume as i128);
    let c_r = Ratio::new(*c.numer() as i128, *c.denom() as i128);
    let volume = if vol_r / c_r > size_r {
        Clause::fail(format!("|P| = {size} < {box_volume}/C"))
    } else if size_r > c_r * vol_r {
        Clause::fail(format!("|P| = {size} > C*{box_volume}"))
    } else {
        Clause::ok()
    };
    let pass = subgroup.pass && upper.pass && proper.pass && volume.pass;
    Ok(NormalFormReport {
        c: c.to_string(),
        subgroup,
        upper_triangular: upper,
        local_properness: proper,
        volume,
        size,
        box_volume,
        pass,
    })
}

/// Advance `exps` through the box `|e_i| <= bounds[i]`; false after the last vector.
fn odometer(exps: &mut [i64], bounds: &[i64]) -> bool {
    for k in (0..exps.len()).rev() {
        if exps[k] < bounds[k] {
            exps[k] += 1;
            return true;
        }
        exps[k] = -bounds[k];
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Letter {
    /// `u_i^{±1}`; the sign is `+1` or `-1`.
    Gen(usize, i8),
    /// An element of `H`.
    Sub(Elem),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectedWord {
    pub exponents: Vec<i64>,
    pub h: Elem,
    pub steps: usize,
}

/// Word collection against a progression in normal form.
///
/// The commutation data `[u_j^{e'}, u_i^{e}] = u_{j+1}^{n_{j+1}}…u_r^{n_r} h`
/// for `i < j` is found by searching growing exponent boxes when the
/// collector is built.
pub struct Collector<'a> {
    ctx: &'a Ctx,
    spec: &'a ProgressionSpec,
    swaps: FxHashMap<(usize, i8, usize, i8), Vec<Letter>>,
    envelope: Vec<u64>,
    pub max_steps: usize,
}

const SEARCH_BOX_LIMIT: usize = 1 << 20;

impl<'a> Collector<'a> {
    /// `envelope_factor` bounds each generator's letter count during
    /// collection by `envelope_factor * max(⌊N_i⌋, 1)`.
    pub fn new(ctx: &'a Ctx, spec: &'a ProgressionSpec, envelope_factor: u64) -> Result<Self> {
        let r = spec.rank();
        let mut swaps = FxHashMap::default();
        let hvals: Vec<Elem> = match &spec.h {
            Some(h) => h.to_vec(),
            None => vec![ctx.identity()],
        };
        for i in 0..r {
            for j in i + 1..r {
                let tail = &spec.generators[j + 1..];
                for ei in [1i8, -1] {
                    for ej in [1i8, -1] {
                        let a = ctx.group.pow(&spec.generators[j], ej as i64)?;
                        let b = ctx.group.pow(&spec.generators[i], ei as i64)?;
                        let target = ctx_commutator(ctx, &a, &b)?;
                        let (exps, h) = solve_collected(ctx, tail, &hvals, &target)?.ok_or_else(|| {
                            Error::Verification(format!(
                                "[{},{}] is not a collected word in the later generators",
                                letter_name(j, ej as i64),
                                letter_name(i, ei as i64)
                            ))
                        })?;
                        let mut rhs = vec![Letter::Gen(i, ei), Letter::Gen(j, ej)];
                        for (k, n) in exps.iter().enumerate() {
                            let sign = if *n > 0 { 1 } else { -1 };
                            rhs.extend((0..n.abs()).map(|_| Letter::Gen(j + 1 + k, sign)));
                        }
                        if h != ctx.identity() {
                            rhs.push(Letter::Sub(h));
                        }
                        swaps.insert((j, ej, i, ei), rhs);
                    }
                }
            }
        }
        let envelope = spec.budgets().iter().map(|&b| envelope_factor * (b as u64).max(1)).collect();
        Ok(Collector { ctx, spec, swaps, envelope, max_steps: 1_000_000 })
    }

    fn letter_value(&self, l: &Letter) -> Result<Elem> {
        match l {
            Letter::Gen(i, e) => self.ctx.group.pow(&self.spec.generators[*i], *e as i64),
            Letter::Sub(h) => Ok(h.clone()),
        }
    }

    pub fn evaluate(&self, word: &[Letter]) -> Result<Elem> {
        let mut v = self.ctx.identity();
        for l in word {
            v = self.ctx.mul(&v, &self.letter_value(l)?)?;
        }
        Ok(v)
    }

    fn validate(&self, word: &[Letter]) -> Result<()> {
        for l in word {
            match l {
                Letter::Gen(i, e) if *i >= self.spec.rank() || e.abs() != 1 => {
                    return Err(Error::Hypothesis(format!("bad letter {l:?}")));
                }
                Letter::Sub(h) if !self.spec.h.as_ref().is_some_and(|s| s.contains(h)) && *h != self.ctx.identity() => {
                    return Err(Error::Hypothesis(format!("{h:?} is not in H")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Rewrite `word` as `u_1^{a_1}…u_r^{a_r} h`, checking every rewrite step.
    pub fn collect(&self, word: &[Letter]) -> Result<CollectedWord> {
        self.validate(word)?;
        let value = self.evaluate(word)?;
        let id = self.ctx.identity();
        let mut w: Vec<Letter> = word.iter().filter(|l| **l != Letter::Sub(id.clone())).cloned().collect();
        let mut steps = 0;
        while let Some(p) = self.first_disorder(&w) {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Budget(format!("collection exceeded {} steps", self.max_steps)));
            }
            let replacement = self.rewrite(&w[p], &w[p + 1])?;
            let before = self.evaluate(&w[p..p + 2])?;
            let after = self.evaluate(&replacement)?;
            if before != after {
                return Err(Error::Verification(format!("rewrite of {:?} changed the value", &w[p..p + 2])));
            }
            w.splice(p..p + 2, replacement);
            self.check_envelope(&w)?;
        }
        let mut exponents = vec![0i64; self.spec.rank()];
        let mut h = self.ctx.identity();
        for l in &w {
            match l {
                Letter::Gen(i, e) => exponents[*i] += *e as i64,
                Letter::Sub(x) => h = self.ctx.mul(&h, x)?,
            }
        }
        let mut check = self.ctx.identity();
        for (u, &n) in self.spec.generators.iter().zip(&exponents) {
            check = self.ctx.mul(&check, &self.ctx.group.pow(u, n)?)?;
        }
        check = self.ctx.mul(&check, &h)?;
        if check != value {
            return Err(Error::Verification("collected word has a different value".into()));
        }
        Ok(CollectedWord { exponents, h, steps })
    }

    fn first_disorder(&self, w: &[Letter]) -> Option<usize> {
        (0..w.len()).find(|&p| match (&w[p], w.get(p + 1)) {
            (_, None) => false,
            (Letter::Gen(j, _), Some(Letter::Gen(i, _))) if j > i => true,
            (Letter::Gen(j, e), Some(Letter::Gen(i, f))) => j == i && e != f,
            (Letter::Sub(_), Some(_)) => true,
            (Letter::Gen(..), Some(Letter::Sub(_))) => false,
        })
    }

    fn rewrite(&self, x: &Letter, y: &Letter) -> Result<Vec<Letter>> {
        Ok(match (x, y) {
            (Letter::Gen(j, e), Letter::Gen(i, f)) if j > i => self.swaps[&(*j, *e, *i, *f)].clone(),
            (Letter::Gen(..), Letter::Gen(..)) => vec![],
            (Letter::Sub(a), Letter::Sub(b)) => {
                let ab = self.ctx.mul(a, b)?;
                if ab == self.ctx.identity() {
                    vec![]
                } else {
                    vec![Letter::Sub(ab)]
                }
            }
            (Letter::Sub(h), Letter::Gen(i, e)) => {
                let u = self.letter_value(y)?;
                let moved = self.ctx.mul(&self.ctx.mul(&self.ctx.inv(&u)?, h)?, &u)?;
                vec![Letter::Gen(*i, *e), Letter::Sub(moved)]
            }
            _ => unreachable!("only disordered pairs are rewritten"),
        })
    }

    fn check_envelope(&self, w: &[Letter]) -> Result<()> {
        let mut counts = vec![0u64; self.spec.rank()];
        for l in w {
            if let Letter::Gen(i, _) = l {
                counts[*i] += 1;
                if counts[*i] > self.envelope[*i] {
                    return Err(Error::Budget(format!(
                        "collection left the envelope: u{} used {} times, limit {}",
                        i + 1,
                        counts[*i],
                        self.envelope[*i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Find `u_1^{n_1}…u_k^{n_k} h = target` over growing exponent boxes.
fn solve_collected(ctx: &Ctx, tail: &[Elem], hvals: &[Elem], target: &[i64]) -> Result<Option<(Vec<i64>, Elem)>> {
    let mut bound = 1i64;
    loop {
        let bounds = vec![bound; tail.len()];
        let cells = (2 * bound as usize + 1).saturating_pow(tail.len() as u32);
        if tail.is_empty() || cells <= SEARCH_BOX_LIMIT {
            let mut table: FxHashMap<Elem, Vec<i64>> = FxHashMap::default();
            let mut exps: Vec<i64> = bounds.iter().map(|b| -b).collect();
            loop {
                let mut v = ctx.identity();
                for (u, &n) in tail.iter().zip(&exps) {
                    v = ctx.mul(&v, &ctx.group.pow(u, n)?)?;
                }
                let l1 = |e: &[i64]| e.iter().map(|x| x.abs()).sum::<i64>();
                match table.get(&v) {
                    Some(prev) if l1(prev) <= l1(&exps) => {}
                    _ => {
                        table.insert(v, exps.clone());
                    }
                }
                if !odometer(&mut exps, &bounds) {
                    break;
                }
            }
            for h in hvals {
                let probe = ctx.mul(target, &ctx.inv(h)?)?;
                if let Some(e) = table.get(&probe) {
                    return Ok(Some((e.clone(), h.clone())));
                }
            }
        }
        if tail.is_empty() || cells > SEARCH_BOX_LIMIT {
            return Ok(None);
        }
        bound *= 2;
    }
}

/// Collect with the default envelope.
pub fn collect_word(ctx: &Ctx, spec: &ProgressionSpec, word: &[Letter]) -> Result<CollectedWord> {
    Collector::new(ctx, spec, 8)?.collect(word)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShrinkReport {
    pub eps: String,
    pub size: usize,
    /// `|P_ε| / (Π (1 + ⌊εN_i⌋) · |H|)`.
    pub sandwich_ratio: String,
    pub witness_k: Option<usize>,
}

/// Enumerate the shrunk progression and search for a covering witness.
pub fn shrink_and_verify(ctx: &Ctx, spec: &ProgressionSpec, eps: Ratio<i64>, k_max: usize) -> Result<ShrinkReport> {
    if !eps.is_positive() {
        return Err(Error::Hypothesis(format!("eps = {eps} is not positive")));
    }
    let small = spec.scaled(eps);
    let p = enumerate_progression(ctx, &small)?;
    let hsize = spec.h.as_ref().map_or(1, |h| h.len()) as u128;
    let vol: u128 = small.budgets().iter().map(|&b| 1 + b as u128).product::<u128>() * hsize;
    if !is_symmetric(ctx, &p)? {
        return Err(Error::NotSymmetric);
    }
    let witness = approx_group_witness(ctx, &p, k_max)?;
    Ok(ShrinkReport {
        eps: eps.to_string(),
        size: p.len(),
        sandwich_ratio: Ratio::new(p.len() as u128, vol).to_string(),
        witness_k: witness.map(|w| w.k),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthTable {
    pub sizes: Vec<(usize, usize)>,
    pub fit_from: usize,
    pub slope: f64,
}

/// `|P^m|` for `m = 1..=m_max` and the least-squares slope of `log|P^m|` against `log m` over `m >= fit_from`.
pub fn nilprog_growth(ctx: &Ctx, spec: &ProgressionSpec, m_max: usize, fit_from: usize) -> Result<GrowthTable> {
    let p = enumerate_progression(ctx, spec)?;
    let mut tower = PowerTower::new(ctx, &p)?;
    let mut sizes = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        sizes.push((m, tower.power(m)?.len()));
    }
    let fit: Vec<(f64, f64)> =
        sizes.iter().filter(|(m, _)| *m >= fit_from).map(|&(m, s)| (m as f64, s as f64)).collect();
    let slope = loglog_slope(&fit).ok_or_else(|| Error::Hypothesis("need two points to fit a slope".into()))?;
    Ok(GrowthTable { sizes, fit_from, slope })
}

/// A named progression together with its ambient group.
#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub ctx: Ctx,
    pub spec: ProgressionSpec,
    pub warnings: Vec<String>,
}

/// `P(1; N)` in `Z`.
pub fn interval_example(n: i64) -> Result<Example> {
    let spec = ProgressionSpec::integral(vec![smallvec![1]], &[n])?.with_c(Ratio::one()).with_step(1);
    Ok(Example { name: "interval".into(), ctx: Ctx::global(Group::lattice(1)?), spec, warnings: vec![] })
}

/// A generalised arithmetic progression in `Z^d` with the given generators.
pub fn gap_example(generators: Vec<Elem>, lengths: &[i64]) -> Result<Example> {
    let d = generators.first().map_or(1, |g| g.len());
    if generators.iter().any(|g| g.len() != d) {
        return Err(Error::Hypothesis("generators have different widths".into()));
    }
    let spec = ProgressionSpec::integral(generators, lengths)?.with_c(Ratio::one()).with_step(1);
    Ok(Example { name: "gap".into(), ctx: Ctx::global(Group::lattice(d)?), spec, warnings: vec![] })
}

/// `P(u_1, u_2; N_1, N_2)` in the integer Heisenberg group.
pub fn heisenberg_example(n1: i64, n2: i64) -> Result<Example> {
    let spec = ProgressionSpec::integral(vec![heis(1, 0, 0), heis(0, 1, 0)], &[n1, n2])?.with_step(2);
    Ok(Example { name: "heisenberg_box".into(), ctx: Ctx::global(Group::heisenberg()), spec, warnings: vec![] })
}

/// `P(u_1, u_2, [u_1,u_2]; N_1, N_2, N_1 N_2)`.
pub fn heisenberg_normal_example(n1: i64, n2: i64) -> Result<Example> {
    let gens = vec![heis(1, 0, 0), heis(0, 1, 0), heis(0, 0, 1)];
    let spec = ProgressionSpec::integral(gens, &[n1, n2, n1 * n2])?.with_c(Ratio::one()).with_step(2);
    Ok(Example { name: "heisenberg_normal".into(), ctx: Ctx::global(Group::heisenberg()), spec, warnings: vec![] })
}

/// Helfgott's set: `diag(r^n, s^n, (rs)^-n)` times the unipotent group over `F_p`.
pub fn helfgott_example(p: u64, r: u64, s: u64, n: i64) -> Result<Example> {
    let g = Group::matmod(3, p)?;
    if r % p == 0 || s % p == 0 {
        return Err(Error::Hypothesis("r and s must be units mod p".into()));
    }
    let rs_inv = mod_inverse((r * s) % p, p);
    let u = g.reduce(&[r as i64, 0, 0, 0, s as i64, 0, 0, 0, rs_inv as i64])?;
    let pi = p as i64;
    let mut h = Vec::with_capacity((p * p * p) as usize);
    for x in 0..pi {
        for y in 0..pi {
            for z in 0..pi {
                h.push(g.reduce(&[1, x, z, 0, 1, y, 0, 0, 1])?);
            }
        }
    }
    let spec = ProgressionSpec::integral(vec![u], &[n])?
        .with_h(h.into_iter().collect())
        .with_c(Ratio::one())
        .with_step(1);
    let mut warnings = vec![];
    if 2 * n as u64 >= p - 1 {
        warnings.push(format!("N = {n} is not below (p-1)/2; normal form is not expected"));
    }
    Ok(Example { name: "helfgott".into(), ctx: Ctx::global(g), spec, warnings })
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut e, mut base, mut acc) = (p - 2, a % p, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Look up an example by name; `params` are the integer parameters in order.
pub fn standard_example(name: &str, params: &[i64]) -> Result<Example> {
    let need = |k: usize| {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{name} takes {k} parameters, got {}", params.len())))
        }
    };
    match name {
        "interval" => {
            need(1)?;
            interval_example(params[0])
        }
        "heisenberg_box" => {
            need(2)?;
            heisenberg_example(params[0], params[1])
        }
        "heisenberg_normal" => {
            need(2)?;
            heisenberg_normal_example(params[0], params[1])
        }
        "helfgott" => {
            need(4)?;
            if params[..3].iter().any(|&x| x <= 0) {
                return Err(Error::Hypothesis("p, r, s must be positive".into()));
            }
            helfgott_example(params[0] as u64, params[1] as u64, params[2] as u64, params[3])
        }
        "gap" => {
            if params.is_empty() || params.len() % 2 != 0 {
                return Err(Error::Hypothesis("gap takes pairs (u_i, N_i) in Z".into()));
            }
            let gens = params.chunks(2).map(|c| smallvec![c[0]]).collect();
            let lens: Vec<i64> = params.chunks(2).map(|c| c[1]).collect();
            gap_example(gens, &lens)
        }
        _ => Err(Error::Hypothesis(format!("unknown example {name}"))),
    }
}

/// Exponent in a ratio as `f64`, for reports.
pub fn ratio_f64(r: &Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
