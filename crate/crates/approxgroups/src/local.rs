//! Discrete symmetric local groups: multi-products, cancellativity and quotients.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::set::ElementSet;
use crate::setops::PowerTower;
use rustc_hash::FxHashMap;
use serde::Serialize;
use std::fmt::Debug;
use std::hash::Hash;

/// A finite local group with partial multiplication.
pub trait PartialGroup {
    type E: Clone + Eq + Hash + Ord + Debug;
    fn identity(&self) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Option<Self::E>;
    fn domain(&self) -> Vec<Self::E>;
}

/// Restricted contexts; a global context is treated as its own domain only if finite.
impl PartialGroup for Ctx {
    type E = Elem;

    fn identity(&self) -> Elem {
        Ctx::identity(self)
    }

    fn inv(&self, a: &Elem) -> Elem {
        Ctx::inv(self, a).expect("inverse of a domain element")
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Option<Elem> {
        self.try_mul(a, b).ok().flatten()
    }

    fn domain(&self) -> Vec<Elem> {
        match &self.domain {
            Some(d) => d.to_vec(),
            None => self.group.elements(self.max_set).expect("finite global group"),
        }
    }
}

/// Local group given by an explicit partial multiplication table. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableLocalGroup {
    pub names: Vec<String>,
    inverse: Vec<usize>,
    table: Vec<Option<usize>>,
}

impl TableLocalGroup {
    /// Products with the identity are filled in automatically.
    pub fn new(names: Vec<String>, inverse: Vec<usize>, products: &[(usize, usize, usize)]) -> Result<Self> {
        let n = names.len();
        if n == 0 || inverse.len() != n || inverse[0] != 0 {
            return Err(Error::Hypothesis("bad table shape".into()));
        }
        let mut table = vec![None; n * n];
        for a in 0..n {
            table[a] = Some(a);
            table[a * n] = Some(a);
        }
        for &(a, b, c) in products {
            if a >= n || b >= n || c >= n {
                return Err(Error::Hypothesis("table index out of range".into()));
            }
            if let Some(old) = table[a * n + b] {
                if old != c {
                    return Err(Error::Hypothesis(format!("conflicting product {a}*{b}")));
                }
            }
            table[a * n + b] = Some(c);
        }
        Ok(TableLocalGroup { names, inverse, table })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Restriction to `u` (must contain 0 and be closed under inverse), reindexed in order.
    pub fn restrict(&self, u: &[usize]) -> Result<TableLocalGroup> {
        let mut u: Vec<usize> = u.to_vec();
        u.sort_unstable();
        u.dedup();
        if u.first() != Some(&0) {
            return Err(Error::MissingIdentity);
        }
        let pos: FxHashMap<usize, usize> = u.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut inverse = Vec::with_capacity(u.len());
        for &x in &u {
            inverse.push(*pos.get(&self.inverse[x]).ok_or(Error::NotSymmetric)?);
        }
        let m = u.len();
        let mut table = vec![None; m * m];
        for (i, &a) in u.iter().enumerate() {
            for (j, &b) in u.iter().enumerate() {
                table[i * m + j] = self.table[a * self.len() + b].and_then(|c| pos.get(&c).copied());
            }
        }
        Ok(TableLocalGroup { names: u.iter().map(|&x| self.names[x].clone()).collect(), inverse, table })
    }

    /// Identity, inverse and local associativity axioms.
    pub fn check_axioms(&self) -> std::result::Result<(), String> {
        let n = self.len();
        for a in 0..n {
            let ai = self.inverse[a];
            if self.inverse[ai] != a {
                return Err(format!("inverse of {} is not an involution", self.names[a]));
            }
            if self.mul(&a, &ai) != Some(0) || self.mul(&ai, &a) != Some(0) {
                return Err(format!("{} times its inverse is not the identity", self.names[a]));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (Some(ab), Some(bc)) = (self.mul(&a, &b), self.mul(&b, &c)) else { continue };
                    if let (Some(l), Some(r)) = (self.mul(&ab, &c), self.mul(&a, &bc)) {
                        if l != r {
                            return Err(format!(
                                "local associativity fails at ({}, {}, {})",
                                self.names[a], self.names[b], self.names[c]
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl PartialGroup for TableLocalGroup {
    type E = usize;

    fn identity(&self) -> usize {
        0
    }

    fn inv(&self, a: &usize) -> usize {
        self.inverse[*a]
    }

    fn mul(&self, a: &usize, b: &usize) -> Option<usize> {
        self.table[a * self.len() + b]
    }

    fn domain(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }
}

/// Value of `g_1 ... g_m` if every sub-interval product exists and all splits agree.
pub fn well_defined_product<G: PartialGroup>(g: &G, word: &[G::E]) -> Option<G::E> {
    let m = word.len();
    if m == 0 {
        return Some(g.identity());
    }
    // val[i][len-1] holds g_[i, i+len-1]
    let mut val: Vec<Vec<Option<G::E>>> = (0..m).map(|i| vec![None; m - i]).collect();
    for i in 0..m {
        val[i][0] = Some(word[i].clone());
    }
    for len in 2..=m {
        for i in 0..=m - len {
            let mut agreed: Option<G::E> = None;
            for k in 1..len {
                let left = val[i][k - 1].as_ref()?;
                let right = val[i + k][len - k - 1].as_ref()?;
                let p = g.mul(left, right)?;
                match &agreed {
                    None => agreed = Some(p),
                    Some(q) if *q == p => {}
                    Some(_) => return None,
                }
            }
            val[i][len - 1] = agreed;
        }
    }
    val[0][m - 1].clone()
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClauseReport {
    pub pass: bool,
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CancellativeReport {
    pub left_cancellation: ClauseReport,
    pub right_cancellation: ClauseReport,
    pub inverse_of_product: ClauseReport,
    pub cancellative: bool,
}

fn clause(witness: Option<Vec<String>>) -> ClauseReport {
    ClauseReport { pass: witness.is_none(), witness }
}

/// Exhaustive check of the three cancellation clauses over the whole domain.
pub fn check_cancellative<G: PartialGroup>(g: &G) -> CancellativeReport {
    let dom = g.domain();
    let show = |xs: &[&G::E]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>();
    let mut w1 = None;
    let mut w2 = None;
    'outer: for a in &dom {
        let mut seen_left: FxHashMap<G::E, &G::E> = FxHashMap::default();
        let mut seen_right: FxHashMap<G::E, &G::E> = FxHashMap::default();
        for h in &dom {
            if w1.is_none() {
                if let Some(p) = g.mul(a, h) {
                    if let Some(k) = seen_left.insert(p, h) {
                        w1 = Some(show(&[a, k, h]));
                    }
                }
            }
            if w2.is_none() {
                if let Some(p) = g.mul(h, a) {
                    if let Some(k) = seen_right.insert(p, h) {
                        w2 = Some(show(&[a, k, h]));
                    }
                }
            }
            if w1.is_some() && w2.is_some() {
                break 'outer;
            }
        }
    }
    let mut w3 = None;
    'outer3: for a in &dom {
        for b in &dom {
            let (Some(ab), Some(rev)) = (g.mul(a, b), g.mul(&g.inv(b), &g.inv(a))) else { continue };
            if g.inv(&ab) != rev {
                w3 = Some(show(&[a, b]));
                break 'outer3;
            }
        }
    }
    let (c1, c2, c3) = (clause(w1), clause(w2), clause(w3));
    let cancellative = c1.pass && c2.pass && c3.pass;
    CancellativeReport { left_cancellation: c1, right_cancellation: c2, inverse_of_product: c3, cancellative }
}

/// Local quotient `W/H` with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub table: TableLocalGroup,
    /// Canonical (least) representative of each class; index 0 is the identity class.
    pub representatives: Vec<Elem>,
    pub projection: FxHashMap<Elem, usize>,
}

impl Quotient {
    pub fn project(&self, g: &[i64]) -> Option<usize> {
        self.projection.get(g).copied()
    }
}

/// Quotient of `W` by a finite subgroup `H` normalised inside `V` (the context domain unless given).
pub fn quotient(ctx: &Ctx, h: &ElementSet, w: &ElementSet, v: Option<&ElementSet>) -> Result<Quotient> {
    let id = ctx.identity();
    if !h.contains(&id) {
        return Err(Error::Hypothesis("H does not contain the identity".into()));
    }
    for x in h.iter() {
        if !h.contains(&ctx.inv(x)?) {
            return Err(Error::Hypothesis("H is not closed under inverses".into()));
        }
        for y in h.iter() {
            match ctx.try_mul(x, y)? {
                Some(p) if h.contains(&p) => {}
                _ => return Err(Error::Hypothesis("H is not closed under products".into())),
            }
        }
    }
    let owned;
    let v: &ElementSet = match v {
        Some(v) => v,
        None => match &ctx.domain {
            Some(d) => d,
            None => {
                owned = ElementSet::from_iter(ctx.group.elements(ctx.max_set)?);
                &owned
            }
        },
    };
    let mut tower = PowerTower::new(ctx, w)?;
    let w6 = tower.power(6)?;
    if let Some(x) = w6.first_missing(v) {
        return Err(Error::Hypothesis(format!("W^6 escapes the normalising set at {x:?}")));
    }
    for g in v.iter() {
        let gi = ctx.inv(g)?;
        for x in h.iter() {
            let Some(gx) = ctx.try_mul(g, x)? else { continue };
            let Some(c) = ctx.try_mul(&gx, &gi)? else { continue };
            if v.contains(&c) && !h.contains(&c) {
                return Err(Error::Hypothesis(format!("conjugate {c:?} of H leaves H")));
            }
        }
    }
    // class of g is W ∩ Hg; its least element is the canonical representative
    let mut rep_of: FxHashMap<Elem, Elem> = FxHashMap::default();
    for g in w.iter() {
        if rep_of.contains_key(g) {
            continue;
        }
        let mut class: Vec<Elem> = Vec::new();
        for x in h.iter() {
            if let Some(y) = ctx.try_mul(x, g)? {
                if w.contains(&y) {
                    class.push(y);
                }
            }
        }
        let rep = class.iter().min().cloned().unwrap_or_else(|| g.clone());
        for y in class {
            rep_of.insert(y, rep.clone());
        }
        rep_of.entry(g.clone()).or_insert(rep);
    }
    for (g, r) in &rep_of {
        for k in rep_of.keys() {
            let same = ctx.try_mul(g, &ctx.inv(k)?)?.is_some_and(|q| h.contains(&q));
            if same != (rep_of[k] == *r) {
                return Err(Error::Verification(format!("class relation inconsistent at {g:?}, {k:?}")));
            }
        }
    }
    let mut reps: Vec<Elem> = rep_of.values().cloned().collect();
    reps.sort_unstable();
    reps.dedup();
    let id_rep = rep_of[&id].clone();
    reps.retain(|r| *r != id_rep);
    reps.insert(0, id_rep);
    let index: FxHashMap<Elem, usize> = reps.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
    let projection: FxHashMap<Elem, usize> = rep_of.iter().map(|(g, r)| (g.clone(), index[r])).collect();
    let n = reps.len();
    let mut inverse = vec![0; n];
    for (i, r) in reps.iter().enumerate() {
        inverse[i] = *projection
            .get(&ctx.inv(r)?)
            .ok_or_else(|| Error::Hypothesis("W is not symmetric".into()))?;
    }
    let mut products: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    for g in w.iter() {
        for k in w.iter() {
            let Some(p) = ctx.try_mul(g, k)? else { continue };
            let Some(&c) = projection.get(&p) else { continue };
            let key = (projection[g], projection[k]);
            if let Some(&old) = products.get(&key) {
                if old != c {
                    return Err(Error::Verification(format!("quotient product not well defined at {g:?}*{k:?}")));
                }
            }
            products.insert(key, c);
        }
    }
    let triples: Vec<(usize, usize, usize)> = products.into_iter().map(|((a, b), c)| (a, b, c)).collect();
    let names = reps.iter().map(|r| format!("{r:?}")).collect();
    let table = TableLocalGroup::new(names, inverse, &triples)?;
    let q = Quotient { table, representatives: reps, projection };
    check_projection(ctx, w, &q)?;
    Ok(q)
}

/// Homomorphism clauses for the projection `W -> W/H`.
pub fn check_projection(ctx: &Ctx, w: &ElementSet, q: &Quotient) -> Result<()> {
    if q.project(&ctx.identity()) != Some(0) {
        return Err(Error::Verification("identity does not map to identity".into()));
    }
    for g in w.iter() {
        let pg = q.project(g).ok_or_else(|| Error::Verification("projection not total".into()))?;
        if q.project(&ctx.inv(g)?) != Some(q.table.inv(&pg)) {
            return Err(Error::Verification(format!("projection does not commute with inverse at {g:?}")));
        }
        for k in w.iter() {
            let Some(p) = ctx.try_mul(g, k)? else { continue };
            let Some(pp) = q.project(&p) else { continue };
            if q.table.mul(&pg, &q.project(k).unwrap()) != Some(pp) {
                return Err(Error::Verification(format!("projection is not multiplicative at {g:?}*{k:?}")));
            }
        }
    }
    Ok(())
}

/// The five-element table `{e, a, b, c, d}` of involutions with `ab = c`, `ba = d`
/// and no other non-trivial products. It satisfies the local-group axioms and both
/// cancellation laws, but `(ab)^-1 = c` while `b^-1 a^-1 = d`.
pub fn inverse_law_counterexample() -> TableLocalGroup {
    let names = ["e", "a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let mut prods = vec![(1, 2, 3), (2, 1, 4)];
    for x in 1..5 {
        prods.push((x, x, 0));
    }
    TableLocalGroup::new(names, vec![0, 1, 2, 3, 4], &prods).expect("static table")
}

/// A four-element table violating right cancellation: `b·b = a = c·b`.
pub fn cancellation_counterexample() -> TableLocalGroup {
    let names = ["e", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let prods = [(1, 2, 0), (2, 1, 0), (3, 3, 0), (2, 2, 1), (3, 2, 1)];
    TableLocalGroup::new(names, vec![0, 2, 1, 3], &prods).expect("static table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use smallvec::smallvec;

    fn interval_ctx(n: i64) -> Ctx {
        let dom: ElementSet = (-n..=n).map(|x| smallvec![x]).collect();
        Ctx::restrict(Group::lattice(1).unwrap(), dom).unwrap()
    }

    #[test]
    fn three_element_word_is_undefined() {
        let ctx = interval_ctx(1);
        let w: Vec<Elem> = [1, -1, -1, 1].iter().map(|&x| smallvec![x]).collect();
        assert_eq!(well_defined_product(&ctx, &w), None);
        assert_eq!(well_defined_product(&ctx, &[]), Some(smallvec![0]));
    }

    #[test]
    fn counterexample_tables_are_local_groups() {
        let t = inverse_law_counterexample();
        t.check_axioms().unwrap();
        let r = check_cancellative(&t);
        assert!(r.left_cancellation.pass && r.right_cancellation.pass);
        assert!(!r.inverse_of_product.pass);
        let c = cancellation_counterexample();
        c.check_axioms().unwrap();
        assert!(!check_cancellative(&c).cancellative);
    }
}
