use approxgroups::catalogue::whole_group;
use approxgroups::descriptor::{group_from_json, parse_group, parse_set};
use approxgroups::fourier::spectrum;
use approxgroups::gleason::{build_phi, cocycle_check, escape_norm, taylor_identity_check};
use approxgroups::metric::{bk_build, dyadic_interval_chain, Nesting, NestedChain};
use approxgroups::setops::{product_set, ruzsa_cover, symmetrize, verify_ruzsa, Side};
use approxgroups::{Ctx, Elem, ElementSet, Group, Ring};
use num_rational::Ratio;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn groups() -> Vec<Group> {
    vec![
        Group::cyclic(12).unwrap(),
        Group::lattice(2).unwrap(),
        Group::heisenberg(),
        Group::unitriangular(3, Ring::Mod(5)).unwrap(),
        Group::matmod(2, 5).unwrap(),
        Group::product(Group::cyclic(4).unwrap(), Group::heisenberg()),
    ]
}

/// Elements of `g` picked from `raw`: indices into the group for finite
/// groups, reduced coordinates otherwise.
fn pick(g: &Group, raw: &[i64]) -> Elem {
    match whole_group(g, 1000) {
        Ok(all) => all.get(raw[0].unsigned_abs() as usize % all.len()).clone(),
        Err(_) => g.reduce(&raw[..g.width()]).unwrap(),
    }
}

fn cyclic_set(n: u64, bits: &[bool]) -> ElementSet {
    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Elem::from_slice(&[i as i64 % n as i64])).collect()
}

fn brute(g: &Group, a: &ElementSet, b: &ElementSet) -> ElementSet {
    let mut out = BTreeSet::new();
    for x in a.iter() {
        for y in b.iter() {
            out.insert(g.mul(x, y).unwrap());
        }
    }
    out.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(gi in 0usize..6, a in prop::collection::vec(-9i64..9, 5), b in prop::collection::vec(-9i64..9, 5), c in prop::collection::vec(-9i64..9, 5)) {
        let g = &groups()[gi];
        let (x, y, z) = (pick(g, &a), pick(g, &b), pick(g, &c));
        let id = g.identity();
        prop_assert_eq!(g.mul(&g.mul(&x, &y).unwrap(), &z).unwrap(), g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(g.mul(&x, &id).unwrap(), x.clone());
        prop_assert_eq!(g.mul(&id, &x).unwrap(), x.clone());
        prop_assert_eq!(g.mul(&x, &g.inv(&x).unwrap()).unwrap(), id);
        prop_assert_eq!(g.pow(&x, 3).unwrap(), g.mul(&x, &g.mul(&x, &x).unwrap()).unwrap());
    }

    #[test]
    fn product_set_matches_brute_force(gi in 0usize..6, a in prop::collection::vec(prop::collection::vec(-3i64..3, 5), 1..12), b in prop::collection::vec(prop::collection::vec(-3i64..3, 5), 1..12)) {
        let g = &groups()[gi];
        let ctx = Ctx::global(g.clone());
        let a: ElementSet = a.iter().map(|r| pick(g, r)).collect();
        let b: ElementSet = b.iter().map(|r| pick(g, r)).collect();
        let ab = product_set(&ctx, &a, &b).unwrap();
        prop_assert_eq!(&ab, &brute(g, &a, &b));
        prop_assert!(product_set(&ctx, &a, &a).unwrap().len() >= a.len());
    }

    #[test]
    fn escape_norm_is_inverse_symmetric(n in 2u64..40, bits in prop::collection::vec(any::<bool>(), 40)) {
        let g = Group::cyclic(n).unwrap();
        let ctx = Ctx::global(g.clone());
        let mut a = cyclic_set(n, &bits).to_vec();
        a.push(g.identity());
        let a = symmetrize(&ctx, &a.into_iter().collect()).unwrap();
        for x in a.iter() {
            let e = escape_norm(&ctx, &a, x, a.len() + 1).unwrap();
            let f = escape_norm(&ctx, &a, &g.inv(x).unwrap(), a.len() + 1).unwrap();
            prop_assert_eq!(e.value, f.value);
        }
    }

    #[test]
    fn smoothed_indicator_satisfies_cocycle_and_taylor(n in 5u64..30, bits in prop::collection::vec(any::<bool>(), 30), gs in 0i64..30, hs in 0i64..30) {
        let g = Group::cyclic(n).unwrap();
        let ctx = Ctx::global(g.clone());
        let mut a = cyclic_set(n, &bits).to_vec();
        a.push(g.identity());
        let a = symmetrize(&ctx, &a.into_iter().collect()).unwrap();
        let phi = build_phi(&ctx, &a, Ratio::new(1, 10)).unwrap();
        let (x, y) = (g.reduce(&[gs]).unwrap(), g.reduce(&[hs]).unwrap());
        prop_assert!(cocycle_check(&ctx, &phi.f, &x, &y).unwrap().holds);
        prop_assert!(taylor_identity_check(&ctx, &phi.f, &x, 4).unwrap().holds);
    }

    #[test]
    fn bk_pseudometric_axioms(n in 8i64..64, depth in 1usize..4, pts in prop::collection::vec(-64i64..64, 3)) {
        let z = Group::lattice(1).unwrap();
        let ctx = Ctx::global(z.clone());
        prop_assume!(n >> depth >= 1);
        let chain = NestedChain::new(&ctx, dyadic_interval_chain(&z, n, depth).unwrap(), Nesting::Plain, 1).unwrap();
        let pm = bk_build(&ctx, &chain).unwrap();
        let p: Vec<Elem> = pts.iter().map(|&x| Elem::from_slice(&[x.clamp(-n, n)])).collect();
        let d = |a: &Elem, b: &Elem| pm.dist(&ctx, a, b).unwrap();
        prop_assert_eq!(d(&p[0], &p[0]), Ratio::from_integer(0));
        prop_assert_eq!(d(&p[0], &p[1]), d(&p[1], &p[0]));
        prop_assert!(d(&p[0], &p[2]) <= d(&p[0], &p[1]) + d(&p[1], &p[2]));
    }

    #[test]
    fn spectrum_shrinks_as_delta_grows(n in 2u64..80, bits in prop::collection::vec(any::<bool>(), 80), d1 in 1u64..20, d2 in 1u64..20) {
        let ctx = Ctx::global(Group::cyclic(n).unwrap());
        let a = cyclic_set(n, &bits);
        prop_assume!(!a.is_empty());
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let big = spectrum(&ctx, &a, Ratio::new(lo, 20)).unwrap().spectrum;
        let small = spectrum(&ctx, &a, Ratio::new(hi, 20)).unwrap().spectrum;
        prop_assert!(small.iter().all(|x| big.contains(x)));
    }

    #[test]
    fn ruzsa_cover_bound(gi in 0usize..6, a in prop::collection::vec(prop::collection::vec(-3i64..3, 5), 1..8), b in prop::collection::vec(prop::collection::vec(-6i64..6, 5), 1..20), left in any::<bool>()) {
        let g = &groups()[gi];
        let ctx = Ctx::global(g.clone());
        let mut a: Vec<Elem> = a.iter().map(|r| pick(g, r)).collect();
        a.push(g.identity());
        let a = symmetrize(&ctx, &a.into_iter().collect()).unwrap();
        let b: ElementSet = b.iter().map(|r| pick(g, r)).collect();
        let side = if left { Side::Left } else { Side::Right };
        let cover = ruzsa_cover(&ctx, &a, &b, side).unwrap();
        let ab = if left { brute(g, &a, &b) } else { brute(g, &b, &a) };
        prop_assert!(cover.x.len() * a.len() <= ab.len());
        prop_assert!(verify_ruzsa(&ctx, &a, &b, &cover).is_ok());
    }

    #[test]
    fn group_descriptors_round_trip(gi in 0usize..6) {
        let g = &groups()[gi];
        prop_assert_eq!(&parse_group(&g.to_string()).unwrap(), g);
        prop_assert_eq!(&group_from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn interval_descriptor_builds_the_interval(lo in -50i64..50, len in 0i64..50) {
        let hi = lo + len;
        let ctx = Ctx::global(Group::lattice(1).unwrap());
        let s = parse_set(&format!("interval:{lo}:{hi}")).unwrap().build(&ctx).unwrap();
        let want: ElementSet = (lo..=hi).map(|x| Elem::from_slice(&[x])).collect();
        prop_assert_eq!(s, want);
    }
}
