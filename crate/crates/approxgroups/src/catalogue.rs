//! Standard sets: intervals, coordinate boxes, Heisenberg boxes, word balls.

use crate::context::Ctx;
use crate::error::{Error, Result};
use crate::group::{heis, Elem, Group};
use crate::set::ElementSet;
use crate::setops::{power_set, symmetrize};
use smallvec::smallvec;

/// `{lo..hi}` in a rank-one lattice or a cyclic group.
pub fn interval(g: &Group, lo: i64, hi: i64) -> Result<ElementSet> {
    match g {
        Group::Lattice { rank: 1 } | Group::Cyclic { .. } => {}
        _ => return Err(Error::InvalidGroup(format!("intervals need lattice:1 or a cyclic group, got {g}"))),
    }
    if lo > hi {
        return Ok(ElementSet::empty());
    }
    (lo..=hi).map(|x| g.reduce(&[x])).collect::<Result<Vec<_>>>().map(|v| v.into_iter().collect())
}

/// All raw coordinate vectors inside the given per-coordinate bounds, reduced into `g`.
pub fn coordinate_box(g: &Group, bounds: &[(i64, i64)]) -> Result<ElementSet> {
    if bounds.len() != g.width() {
        return Err(Error::ContextMismatch(format!("{} bounds for width {}", bounds.len(), g.width())));
    }
    let mut raw: Vec<Elem> = vec![smallvec![]];
    for &(lo, hi) in bounds {
        let mut next = Vec::with_capacity(raw.len() * (hi - lo + 1).max(0) as usize);
        for e in &raw {
            for v in lo..=hi {
                let mut f = e.clone();
                f.push(v);
                next.push(f);
            }
        }
        raw = next;
    }
    raw.iter().map(|e| g.reduce(e)).collect::<Result<Vec<_>>>().map(|v| v.into_iter().collect())
}

/// `{|x|, |y| <= n, |z| <= n²}` together with its inverses.
pub fn heisenberg_box(n: i64) -> ElementSet {
    let g = Group::heisenberg();
    let mut v = Vec::new();
    for x in -n..=n {
        for y in -n..=n {
            for z in -n * n..=n * n {
                let e = heis(x, y, z);
                v.push(g.inv(&e).expect("small entries"));
                v.push(e);
            }
        }
    }
    v.into_iter().collect()
}

/// `{|x|, |y| <= a, |2z - xy| <= 2c}`, a box in exponential coordinates; symmetric.
pub fn heisenberg_exp_box(a: i64, c: i64) -> ElementSet {
    let mut v = Vec::new();
    for x in -a..=a {
        for y in -a..=a {
            let lo = (x * y - 2 * c).div_euclid(2) - 1;
            let hi = (x * y + 2 * c).div_euclid(2) + 1;
            for z in lo..=hi {
                if (2 * z - x * y).abs() <= 2 * c {
                    v.push(heis(x, y, z));
                }
            }
        }
    }
    v.into_iter().collect()
}

/// `(S ∪ {id} ∪ S^-1)^radius`.
pub fn word_ball(ctx: &Ctx, generators: &[Elem], radius: usize) -> Result<ElementSet> {
    let s = symmetrize(ctx, &generators.iter().cloned().collect())?;
    power_set(ctx, &s, radius)
}

/// Every element of a finite group.
pub fn whole_group(g: &Group, limit: usize) -> Result<ElementSet> {
    Ok(g.elements(limit)?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setops::is_symmetric;

    #[test]
    fn boxes_are_symmetric() {
        let ctx = Ctx::global(Group::heisenberg());
        assert!(is_symmetric(&ctx, &heisenberg_box(2)).unwrap());
        assert!(is_symmetric(&ctx, &heisenberg_exp_box(3, 4)).unwrap());
    }

    #[test]
    fn cyclic_interval_wraps() {
        let g = Group::cyclic(7).unwrap();
        let s = interval(&g, -2, 2).unwrap();
        let got: Vec<i64> = s.iter().map(|e| e[0]).collect();
        assert_eq!(got, vec![0, 1, 2, 5, 6]);
    }
}
