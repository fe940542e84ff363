//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Each criterion recomputes its claims in this file with plain group
//! arithmetic instead of trusting the flags the library reports.

use approxgroups::catalogue::{heisenberg_box, interval, whole_group};
use approxgroups::fourier::{bogolyubov_check, bogolyubov_delta, cyclic_subgroup, parseval_check, spectrum};
use approxgroups::gleason::{self, GleasonOptions, StrongApproxParams};
use approxgroups::growth::{self, Congruence, ExplicitSubgroup, SubgroupOracle};
use approxgroups::local::{check_cancellative, well_defined_product};
use approxgroups::metric::{self, Nesting, NestedChain};
use approxgroups::nilprog::{self, enumerate_progression, Collector, Letter};
use approxgroups::sanders::{self, Strategy};
use approxgroups::setops::{self, product_set, ruzsa_cover, Side};
use approxgroups::{Ctx, Elem, ElementSet, Group, Ring};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

type Q = Ratio<i128>;

struct Verdict {
    pass: bool,
    detail: String,
    /// Sub-checks that fail for reasons analysed outside the code; the
    /// criterion still prints FAIL, and every other sub-check must pass.
    known: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict { pass: true, detail: String::new(), known: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.note(format!("FAILED {}", what.into()));
        }
    }

    fn known_failure(&mut self, failed: bool, what: impl Into<String>) {
        let what = what.into();
        if failed {
            self.pass = false;
            self.known.push(what.clone());
            self.note(format!("known failure: {what}"));
        } else {
            self.note(format!("previously failing sub-check now passes: {what}"));
        }
    }

    fn note(&mut self, s: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(s.as_ref());
    }
}

fn e1(x: i64) -> Elem {
    Elem::from_slice(&[x])
}

fn set(v: impl IntoIterator<Item = Elem>) -> ElementSet {
    v.into_iter().collect()
}

/// `{ab : a ∈ A, b ∈ B}` by brute force.
fn brute_product(g: &Group, a: &ElementSet, b: &ElementSet) -> BTreeSet<Elem> {
    let mut out = BTreeSet::new();
    for x in a.iter() {
        for y in b.iter() {
            out.insert(g.mul(x, y).unwrap());
        }
    }
    out
}

fn brute_power(g: &Group, a: &ElementSet, n: usize) -> ElementSet {
    let mut p = a.clone();
    for _ in 1..n {
        p = set(brute_product(g, &p, a));
    }
    p
}

/// Independent check of the approximate-group clauses for `X`: `X ⊆ A³`, `X = X^-1`, `A² ⊆ XA`.
fn witness_holds(g: &Group, a: &ElementSet, a2: &ElementSet, x: &ElementSet) -> bool {
    let in_a3 = x.iter().all(|xi| a.iter().any(|b| a2.contains(&g.mul(xi, &g.inv(b).unwrap()).unwrap())));
    let symmetric = x.iter().all(|xi| x.contains(&g.inv(xi).unwrap()));
    let xinv: Vec<Elem> = x.iter().map(|xi| g.inv(xi).unwrap()).collect();
    let covered = a2.iter().all(|y| xinv.iter().any(|xi| a.contains(&g.mul(xi, y).unwrap())));
    in_a3 && symmetric && covered
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    let run = |v: &mut Verdict, name: &str, g: Group, a: ElementSet, k_max: usize, bound: usize, exact: Option<usize>| {
        let ctx = Ctx::global(g.clone());
        let w = setops::approx_group_witness(&ctx, &a, k_max).unwrap();
        let Some(w) = w else {
            v.check(false, format!("{name}: no witness under {k_max}"));
            return;
        };
        let a2 = if a.len() <= 2000 { set(brute_product(&g, &a, &a)) } else { product_set(&ctx, &a, &a).unwrap() };
        v.check(witness_holds(&g, &a, &a2, &w.x) && w.x.len() <= w.k, format!("{name}: witness re-verification"));
        v.check(w.k <= bound, format!("{name}: K = {} > {bound}", w.k));
        if let Some(k) = exact {
            v.check(w.k == k, format!("{name}: K = {} != {k}", w.k));
        }
        v.note(format!("{name} K={}", w.k));
    };
    let finite = [
        Group::cyclic(12).unwrap(),
        Group::product(Group::cyclic(4).unwrap(), Group::cyclic(6).unwrap()),
        Group::unitriangular(3, Ring::Mod(3)).unwrap(),
        Group::matmod(2, 3).unwrap(),
        Group::cyclic(7).unwrap(),
    ];
    for g in finite {
        let a = whole_group(&g, 1 << 16).unwrap();
        run(&mut v, &format!("{g}"), g, a, 8, 1, Some(1));
    }
    let z = Group::lattice(1).unwrap();
    for n in [10, 100, 1000] {
        run(&mut v, &format!("[-{n},{n}]"), z.clone(), interval(&z, -n, n).unwrap(), 16, 2, Some(2));
    }
    // proper progressions in Z: every n_1 u_1 + ... + n_r u_r distinct
    let gaps: [(&[i64], &[i64]); 3] = [(&[3], &[7]), (&[1, 100], &[10, 4]), (&[1, 50, 1000], &[5, 3, 2])];
    for (gens, lens) in gaps {
        let params: Vec<i64> = gens.iter().zip(lens).flat_map(|(&u, &n)| [u, n]).collect();
        let ex = nilprog::standard_example("gap", &params).unwrap();
        let p = enumerate_progression(&ex.ctx, &ex.spec).unwrap();
        let volume: i64 = lens.iter().map(|n| 2 * n + 1).product();
        v.check(p.len() as i64 == volume, format!("GAP {gens:?} is not proper"));
        let r = gens.len() as u32;
        run(&mut v, &format!("GAP r={r}"), z.clone(), p, 64, 1 << r, None);
    }
    let ex = nilprog::standard_example("heisenberg_box", &[10, 10]).unwrap();
    let p = enumerate_progression(&ex.ctx, &ex.spec).unwrap();
    run(&mut v, "Heisenberg P(u1,u2;10,10)", Group::heisenberg(), p, 100, 100, None);
    let secs = start.elapsed().as_secs_f64();
    v.check(secs < 60.0, format!("runtime {secs:.1}s"));
    v.note(format!("{secs:.1}s"));
    v
}

fn random_symmetric(g: &Group, rng: &mut ChaCha8Rng, pool: &[Elem], size: usize) -> ElementSet {
    let mut out: BTreeSet<Elem> = BTreeSet::new();
    out.insert(g.identity());
    while out.len() < size.min(pool.len()) {
        let x = &pool[rng.gen_range(0..pool.len())];
        out.insert(x.clone());
        out.insert(g.inv(x).unwrap());
    }
    set(out)
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let groups = [
        Group::cyclic(101).unwrap(),
        Group::lattice(2).unwrap(),
        Group::heisenberg(),
        Group::matmod(2, 5).unwrap(),
        Group::unitriangular(3, Ring::Mod(5)).unwrap(),
    ];
    let mut pairs = 0;
    for g in &groups {
        let pool: Vec<Elem> = match g {
            Group::Lattice { .. } => approxgroups::catalogue::coordinate_box(g, &[(-6, 6), (-6, 6)]).unwrap().to_vec(),
            Group::Unitriangular { ring: Ring::Int, .. } => heisenberg_box(3).to_vec(),
            _ => whole_group(g, 1 << 16).unwrap().to_vec(),
        };
        let ctx = Ctx::global(g.clone());
        for _ in 0..10 {
            let size = rng.gen_range(3..20);
            let a = random_symmetric(g, &mut rng, &pool, size);
            let b = set((0..rng.gen_range(1..40)).map(|_| pool[rng.gen_range(0..pool.len())].clone()));
            for side in [Side::Left, Side::Right] {
                let cover = ruzsa_cover(&ctx, &a, &b, side).unwrap();
                let ab = match side {
                    Side::Left => brute_product(g, &a, &b),
                    Side::Right => brute_product(g, &b, &a),
                };
                v.check(cover.x.len() * a.len() <= ab.len(), format!("{g}: |X||A| > |AB|"));
                v.check(cover.x.is_subset(&b), format!("{g}: X not in B"));
                let a2 = set(brute_product(g, &a, &a));
                let span = match side {
                    Side::Left => brute_product(g, &a2, &cover.x),
                    Side::Right => brute_product(g, &cover.x, &a2),
                };
                v.check(b.iter().all(|y| span.contains(y)), format!("{g}: B escapes the cover ({side:?})"));
            }
            pairs += 1;
        }
    }
    v.note(format!("{pairs} pairs, both sides"));
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let z = Group::lattice(1).unwrap();
    let z1009 = Group::cyclic(1009).unwrap();
    let helf = nilprog::helfgott_example(7, 3, 2, 2).unwrap();
    let helf_set = enumerate_progression(&helf.ctx, &helf.spec).unwrap();
    let cases = [
        ("interval N=100", z.clone(), interval(&z, -100, 100).unwrap()),
        ("Z/1009 interval", z1009.clone(), interval(&z1009, -100, 100).unwrap()),
        ("Heisenberg box n=4", Group::heisenberg(), heisenberg_box(4)),
        ("Helfgott p=7 N=2", helf.ctx.group.clone(), helf_set),
    ];
    for (name, g, a) in &cases {
        let ctx = Ctx::global(g.clone());
        let a4 = product_set(&ctx, &product_set(&ctx, a, a).unwrap(), &product_set(&ctx, a, a).unwrap()).unwrap();
        for m in [2, 4] {
            let cert = sanders::sanders_small_neighbourhood(&ctx, a, m, Strategy::Heuristic).unwrap();
            let s = &cert.s;
            let mut sm = s.clone();
            for _ in 1..m {
                sm = product_set(&ctx, &sm, s).unwrap();
            }
            let symmetric = s.iter().all(|x| s.contains(&g.inv(x).unwrap())) && s.contains(&g.identity());
            v.check(symmetric && sm.is_subset(&a4), format!("{name} m={m}: S^m ⊆ A^4"));
            let ratio = s.len() as f64 / a.len() as f64;
            v.check(ratio >= 1e-3, format!("{name} m={m}: |S|/|A| = {ratio}"));
            v.note(format!("{name} m={m} |S|/|A|={ratio:.3}"));
        }
    }
    let normal_cases = [("interval N=100", z.clone(), interval(&z, -100, 100).unwrap()), ("Heisenberg box n=2", Group::heisenberg(), heisenberg_box(2))];
    for (name, g, a) in normal_cases {
        let ctx = Ctx::global(g.clone());
        let m = 2;
        let cert = sanders::sanders_small_neighbourhood(&ctx, &a, m, Strategy::Heuristic).unwrap();
        let report = sanders::sanders_normal(&ctx, &a, &cert.s, m, Strategy::Heuristic).unwrap();
        let a2 = product_set(&ctx, &a, &a).unwrap();
        let a4 = product_set(&ctx, &a2, &a2).unwrap();
        let s2 = product_set(&ctx, &cert.s, &cert.s).unwrap();
        let s4 = product_set(&ctx, &s2, &s2).unwrap();
        let p = product_set(&ctx, &report.tilde_s, &report.tilde_s).unwrap();
        let conj: Vec<&Elem> = if g.is_abelian() { vec![a4.get(0)] } else { a4.iter().collect() };
        let ok = conj.iter().all(|x| {
            let xi = g.inv(x).unwrap();
            p.iter().all(|y| s4.contains(&g.mul(&g.mul(&xi, y).unwrap(), x).unwrap()))
        });
        v.check(ok && report.verified, format!("{name}: (tildeS^m)^(A^4) ⊆ S^4"));
        v.note(format!("normal {name} |tildeS|={}", report.tilde_s.len()));
    }
    v
}

/// `∂_g F(x) = F(g^-1 x) - F(x)`, recomputed from the function's values.
fn deriv(g: &Group, f: &gleason::TestFunction, s: &[i64], x: &[i64]) -> Q {
    f.value(&g.mul(&g.inv(s).unwrap(), x).unwrap()) - f.value(x)
}

fn identities_hold(g: &Group, f: &gleason::TestFunction, sg: &Elem, sh: &Elem, n: usize) -> bool {
    let mut shifts = vec![g.identity(), sg.clone(), sh.clone(), g.mul(sg, sh).unwrap()];
    for i in 2..=n {
        shifts.push(g.pow(sg, i as i64).unwrap());
    }
    let pts: BTreeSet<Elem> = f.support.iter().flat_map(|x| shifts.iter().map(|s| g.mul(s, x).unwrap())).collect();
    let gh = g.mul(sg, sh).unwrap();
    let gi = g.inv(sg).unwrap();
    pts.iter().all(|x| {
        let cocycle = deriv(g, f, &gh, x) == deriv(g, f, sg, x) + deriv(g, f, sh, &g.mul(&gi, x).unwrap());
        let gn = g.pow(sg, n as i64).unwrap();
        let mut rhs = Q::from_integer(n as i128) * deriv(g, f, sg, x);
        for i in 0..n {
            let y = g.mul(&g.pow(sg, -(i as i64)).unwrap(), x).unwrap();
            rhs += deriv(g, f, sg, &y) - deriv(g, f, sg, x);
        }
        cocycle && deriv(g, f, &gn, x) == rhs
    })
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new();
    let z = Group::lattice(1).unwrap();
    let (ia, is) = gleason::interval_strong(&z, 20, 3).unwrap();
    let heis = gleason::heisenberg_strong(2, 4, 1);
    let cases = [
        ("interval 20/6", z.clone(), ia, is, StrongApproxParams::desk(3, 4, 3, 2), e1(1), e1(2)),
        ("Heisenberg (2,4,1)", Group::heisenberg(), heis.0, heis.1, StrongApproxParams::desk(4, 4, 3, 2), approxgroups::group::heis(1, 0, 0), approxgroups::group::heis(0, 1, 0)),
    ];
    for (name, g, a, s, params, sg, sh) in cases {
        let ctx = Ctx::global(g.clone());
        let suite = gleason::gleason_suite(&ctx, &a, &s, params, Q::new(1, 10), 3, (&sg, &sh), 3).unwrap();
        v.check(suite.pass(), format!("{name}: suite"));
        v.check(
            suite.cocycle.holds && suite.taylor.holds && identities_hold(&g, &suite.big_psi, &sg, &sh, 3),
            format!("{name}: cocycle/Taylor identities"),
        );
        let opts = GleasonOptions { sample_budget: 1 << 20, ..GleasonOptions::default() };
        let r = gleason::gleason_verify(&ctx, &a, opts).unwrap();
        v.check(r.exhaustive, format!("{name}: exhaustive scan"));
        v.check(r.conj_bound_holds(), format!("{name}: {} conjugation violations", r.conj_violations));
        v.check(r.finite(), format!("{name}: infinite constant"));
        if g.is_abelian() {
            v.check(r.comm_numerators_zero, format!("{name}: abelian commutator numerators"));
        }
        let show = |c: &Option<Option<Ratio<u64>>>| match c {
            Some(Some(x)) => x.to_string(),
            Some(None) => "inf".into(),
            None => "-".into(),
        };
        v.note(format!(
            "{name} params {:?} pairs={} c_conj={} c_prod={} c_comm={}",
            params,
            r.pairs,
            show(&r.c_conj),
            show(&r.c_prod),
            show(&r.c_comm)
        ));
    }
    v
}

fn inclusions_hold(ctx: &Ctx, chain: &NestedChain, depth_note: &str, v: &mut Verdict) {
    let pm = metric::bk_build(ctx, chain).unwrap();
    let a0 = &chain.sets[0];
    let domain = product_set(ctx, a0, a0).unwrap();
    let mut bad = 0;
    for x in domain.iter() {
        let n = pm.norm(ctx, x).unwrap();
        for (k, ak) in chain.sets.iter().enumerate() {
            let r = Q::new(1, 1i128 << k);
            if n < r && !ak.contains(x) {
                bad += 1;
            }
            if ak.contains(x) && n > r * 2 {
                bad += 1;
            }
        }
    }
    v.check(bad == 0, format!("{depth_note}: {bad} inclusion violations"));
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new();
    let z = Group::lattice(1).unwrap();
    let ctx = Ctx::global(z.clone());
    for depth in 1..=6 {
        let sets = metric::dyadic_interval_chain(&z, 64, depth).unwrap();
        let chain = NestedChain::new(&ctx, sets, Nesting::Plain, 1).unwrap();
        inclusions_hold(&ctx, &chain, &format!("dyadic depth {depth}"), &mut v);
    }
    let hctx = Ctx::global(Group::heisenberg());
    let chain = NestedChain::new(&hctx, metric::heisenberg_central_chain(2, 8, 3), Nesting::Normal, 100).unwrap();
    inclusions_hold(&hctx, &chain, "Heisenberg central chain", &mut v);
    let chain = NestedChain::new(&hctx, metric::heisenberg_box_chain(4, 16, 2), Nesting::Plain, 1).unwrap();
    inclusions_hold(&hctx, &chain, "Heisenberg box chain", &mut v);
    v.note("dyadic depths 1..6, Heisenberg central (normal, p=100) and box (plain) chains");
    v
}

fn loglog(points: &[(usize, usize)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(m, s)| ((m as f64).ln(), (s as f64).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new();
    let proper = nilprog::standard_example("gap", &[1, 5, 50, 3, 1000, 2]).unwrap();
    let helf = nilprog::helfgott_example(7, 3, 2, 2).unwrap();
    for ex in [&proper, &helf] {
        let r = nilprog::check_normal_form(&ex.ctx, &ex.spec).unwrap();
        v.check(r.pass && ex.spec.c == Some(Ratio::from_integer(1)), format!("{}: 1-normal form", ex.name));
    }
    let heis = nilprog::heisenberg_normal_example(3, 3).unwrap();
    let r = nilprog::check_normal_form(&heis.ctx, &heis.spec).unwrap();
    v.check(r.subgroup.pass && r.upper_triangular.pass && r.local_properness.pass, "rank-3 Heisenberg: structural axioms");
    let mut two = heis.spec.clone();
    two.c = Some(Ratio::from_integer(2));
    let r2 = nilprog::check_normal_form(&heis.ctx, &two).unwrap();
    v.check(r2.pass, "rank-3 Heisenberg: 2-normal form");
    v.known_failure(
        !r.volume.pass,
        format!("rank-3 Heisenberg volume bound at C=1 (|P| = {} vs box {}; holds at C=2)", r.size, r.box_volume),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let collect_ex = [nilprog::heisenberg_normal_example(4, 4).unwrap(), helf.clone()];
    for ex in &collect_ex {
        let g = &ex.ctx.group;
        let collector = Collector::new(&ex.ctx, &ex.spec, 8).unwrap();
        let hs: Vec<Elem> = ex.spec.h.as_ref().map(|h| h.to_vec()).unwrap_or_default();
        for _ in 0..5000 {
            let word: Vec<Letter> = (0..rng.gen_range(0..16))
                .map(|_| {
                    if !hs.is_empty() && rng.gen_bool(0.25) {
                        Letter::Sub(hs[rng.gen_range(0..hs.len())].clone())
                    } else {
                        Letter::Gen(rng.gen_range(0..ex.spec.rank()), if rng.gen() { 1 } else { -1 })
                    }
                })
                .collect();
            let mut direct = g.identity();
            for l in &word {
                let x = match l {
                    Letter::Gen(i, e) => g.pow(&ex.spec.generators[*i], *e as i64).unwrap(),
                    Letter::Sub(h) => h.clone(),
                };
                direct = g.mul(&direct, &x).unwrap();
            }
            let c = collector.collect(&word).unwrap();
            let mut collected = g.identity();
            for (u, &e) in ex.spec.generators.iter().zip(&c.exponents) {
                collected = g.mul(&collected, &g.pow(u, e).unwrap()).unwrap();
            }
            collected = g.mul(&collected, &c.h).unwrap();
            if collected != direct {
                mismatches += 1;
            }
        }
    }
    v.check(mismatches == 0, format!("{mismatches} collection mismatches in 10^4 words"));

    let interval = nilprog::interval_example(5).unwrap();
    let rank2 = nilprog::gap_example(vec![Elem::from_slice(&[1, 0]), Elem::from_slice(&[0, 1])], &[3, 3]).unwrap();
    let heis_box = nilprog::heisenberg_example(2, 2).unwrap();
    for (ex, want, closed) in [
        (&interval, 1.0, Some(Box::new(|m: usize| 10 * m + 1) as Box<dyn Fn(usize) -> usize>)),
        (&rank2, 2.0, Some(Box::new(|m: usize| (6 * m + 1) * (6 * m + 1)) as Box<dyn Fn(usize) -> usize>)),
        (&heis_box, 4.0, None),
    ] {
        let t = nilprog::nilprog_growth(&ex.ctx, &ex.spec, 16, 8).unwrap();
        if let Some(f) = closed {
            v.check(t.sizes.iter().all(|&(m, s)| s == f(m)), format!("{}: sizes match closed form", ex.name));
        }
        let tail: Vec<(usize, usize)> = t.sizes.iter().copied().filter(|&(m, _)| m >= 8).collect();
        let slope = loglog(&tail);
        v.check((slope - t.slope).abs() < 1e-9, format!("{}: slope recomputation", ex.name));
        v.check((slope - want).abs() <= 0.3, format!("{}: slope {slope:.3} vs {want}", ex.name));
        v.note(format!("{} slope {slope:.3}", ex.name));
    }
    v
}

fn dft_sq_sum(m: u64, a: &ElementSet) -> f64 {
    let mut total = 0.0;
    for xi in 0..m {
        let (mut re, mut im) = (0.0, 0.0);
        for x in a.iter() {
            let t = -2.0 * std::f64::consts::PI * ((xi * x[0] as u64) % m) as f64 / m as f64;
            re += t.cos();
            im += t.sin();
        }
        let n = m as f64;
        total += (re / n).powi(2) + (im / n).powi(2);
    }
    total
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=256u64 {
        let ctx = Ctx::global(Group::cyclic(m).unwrap());
        let mut a: Vec<Elem> = (0..m as i64).filter(|_| rng.gen_bool(0.3)).map(e1).collect();
        if a.is_empty() {
            a.push(e1(0));
        }
        let a = set(a);
        let r = parseval_check(&ctx, &a).unwrap();
        let mu = a.len() as f64 / m as f64;
        v.check(r.exact == Some(true), format!("Z/{m}: exact Parseval"));
        v.check((dft_sq_sum(m, &a) - mu).abs() < 1e-9, format!("Z/{m}: float Parseval"));
    }
    let mut hyp = 0;
    for trial in 0..30 {
        let m: u64 = rng.gen_range(64..=512);
        let g = Group::cyclic(m).unwrap();
        let ctx = Ctx::global(g.clone());
        let dens = rng.gen_range(0.05..0.4);
        let mut pts: BTreeSet<i64> = BTreeSet::from([0]);
        for x in 1..m as i64 {
            if rng.gen_bool(dens / 2.0) {
                pts.insert(x);
                pts.insert(m as i64 - x);
            }
        }
        let a = set(pts.into_iter().map(e1));
        let two_a = set(brute_product(&g, &a, &a));
        let d = bogolyubov_delta(a.len(), two_a.len(), 2, 1000);
        let r = bogolyubov_check(&ctx, &a, 2, d, false).unwrap();
        hyp += r.hypothesis_holds as usize;
        let spec = spectrum(&ctx, &a, d).unwrap();
        let perp: Vec<i64> = (0..m as i64).filter(|x| spec.spectrum.iter().all(|xi| (xi[0] * x) % m as i64 == 0)).collect();
        let neg = set(two_a.iter().map(|x| g.inv(x).unwrap()));
        let diff = brute_product(&g, &two_a, &neg);
        let contained = perp.iter().all(|x| diff.contains(&e1(*x)));
        v.check(r.hypothesis_holds && r.pass && contained && perp.len() == r.perp_size, format!("Bogolyubov trial {trial} (Z/{m})"));
    }
    v.note(format!("Parseval M=1..256; Bogolyubov 30 trials ({hyp} meet the hypothesis)"));
    let subgroups: Vec<(Group, ElementSet)> = vec![
        (Group::cyclic(240).unwrap(), cyclic_subgroup(240, 8)),
        (Group::cyclic(256).unwrap(), cyclic_subgroup(256, 32)),
        (Group::cyclic(97).unwrap(), cyclic_subgroup(97, 97)),
        (Group::cyclic(60).unwrap(), cyclic_subgroup(60, 1)),
        {
            let g = Group::product(Group::cyclic(12).unwrap(), Group::cyclic(18).unwrap());
            let h = set((0..36).map(|i| g.reduce(&[3 * i, 6 * i]).unwrap()));
            (g, h)
        },
    ];
    for (g, h) in subgroups {
        let ctx = Ctx::global(g.clone());
        for delta in [Ratio::new(1, 2), Ratio::new(1, 1), Ratio::new(1, 100)] {
            let r = spectrum(&ctx, &h, delta).unwrap();
            v.check(r.perp == h, format!("{g}: perp != A at delta {delta}"));
        }
    }
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new();
    let z = Ctx::global(Group::lattice(1).unwrap());
    let s1 = set([e1(-1), e1(0), e1(1)]);
    let p1 = growth::ball_sizes(&z, &s1, 30).unwrap();
    v.check(p1.sizes.iter().enumerate().all(|(r, &n)| n == 2 * r + 1), "Z: 2r+1");
    let z2 = Ctx::global(Group::lattice(2).unwrap());
    let s2 = set([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]].map(|p| Elem::from_slice(&p)));
    let p2 = growth::ball_sizes(&z2, &s2, 30).unwrap();
    v.check(p2.sizes.iter().enumerate().all(|(r, &n)| n == 2 * r * r + 2 * r + 1), "Z^2: 2r^2+2r+1");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let torus = Group::product(Group::cyclic(20).unwrap(), Group::cyclic(20).unwrap());
    let cases = [
        (Group::cyclic(1000).unwrap(), set([e1(0), e1(1), e1(999)])),
        (torus.clone(), set([[0, 0], [1, 0], [19, 0], [0, 1], [0, 19]].map(|p| Elem::from_slice(&p)))),
    ];
    let mut trials = 0;
    for (g, s) in &cases {
        let ctx = Ctx::global(g.clone());
        let all = whole_group(g, 1 << 16).unwrap().to_vec();
        let order = all.len();
        let balls = growth::ball_sizes(&ctx, s, order).unwrap().sizes;
        for _ in 0..100 {
            let target = rng.gen_range(1..order / 2);
            let e: ElementSet = if rng.gen_bool(0.5) {
                // a random blob grown from one point
                let mut e: BTreeSet<Elem> = BTreeSet::from([all[rng.gen_range(0..order)].clone()]);
                while e.len() < target {
                    let x = e.iter().nth(rng.gen_range(0..e.len())).unwrap().clone();
                    let step = s.get(rng.gen_range(0..s.len()));
                    e.insert(g.mul(step, &x).unwrap());
                }
                set(e)
            } else {
                set((0..target).map(|_| all[rng.gen_range(0..order)].clone()))
            };
            let r = growth::isoperimetry_check(&ctx, s, &e).unwrap();
            let se = brute_product(g, s, &e);
            let boundary = se.iter().filter(|x| !e.contains(x)).count();
            let rr = balls.iter().position(|&b| b >= 2 * e.len()).unwrap();
            v.check(r.boundary == boundary && r.r == rr, format!("{g}: boundary/radius recomputation"));
            v.check(e.len() <= 4 * rr * boundary && r.pass && r.averaging_pass, format!("{g}: isoperimetry |E|={}", e.len()));
            trials += 1;
        }
    }
    let mut triples = 0;
    let mut coset_case = |v: &mut Verdict, g: &Group, s: &ElementSet, oracle: &dyn SubgroupOracle, k: usize| {
        let ctx = Ctx::global(g.clone());
        let r = growth::coset_meeting_count(&ctx, s, oracle, k).unwrap();
        let ball = brute_power(g, s, k);
        let mut reps: Vec<Elem> = Vec::new();
        for x in ball.iter() {
            if !reps.iter().any(|r| oracle.contains(&g.mul(&g.inv(r).unwrap(), x).unwrap())) {
                reps.push(x.clone());
            }
        }
        let bound = oracle.index().map_or(k as u128 + 1, |i| i.min(k as u128 + 1));
        v.check(reps.len() == r.count && reps.len() as u128 >= bound, format!("{g} k={k}: coset count"));
        triples += 1;
    };
    for k in 1..=6 {
        coset_case(&mut v, &Group::lattice(2).unwrap(), &s2, &Congruence { moduli: vec![3, 5] }, k);
        coset_case(&mut v, &Group::lattice(1).unwrap(), &s1, &Congruence { moduli: vec![4] }, k);
        let c12 = Group::cyclic(12).unwrap();
        let h = ExplicitSubgroup { elements: set([0, 4, 8].map(e1)), group_order: 12 };
        coset_case(&mut v, &c12, &set([e1(0), e1(1), e1(11)]), &h, k);
        let u = Group::unitriangular(3, Ring::Mod(5)).unwrap();
        let center = ExplicitSubgroup { elements: set((0..5).map(|z| u.reduce(&[0, z, 0]).unwrap())), group_order: 125 };
        let gens = set([[0, 0, 0], [1, 0, 0], [4, 0, 0], [0, 0, 1], [0, 0, 4]].map(|p| u.reduce(&p).unwrap()));
        coset_case(&mut v, &u, &gens, &center, k);
    }
    v.note(format!("r<=30 closed forms; {trials} isoperimetry sets; {triples} coset triples"));
    v
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new();
    let z = Group::lattice(1).unwrap();
    let restrict = |n: i64| Ctx::restrict(z.clone(), interval(&z, -n, n).unwrap()).unwrap();
    let small = restrict(1);
    v.check(well_defined_product(&small, &[e1(1), e1(-1), e1(-1), e1(1)]).is_none(), "{-1,0,1}: (+1,-1,-1,+1) undefined");
    v.check(well_defined_product(&small, &[]) == Some(e1(0)), "empty product is the identity");
    // interval DP oracle: every contiguous sub-sum must stay in the domain
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dom = restrict(3);
    for _ in 0..300 {
        let w: Vec<Elem> = (0..rng.gen_range(0..7)).map(|_| e1(rng.gen_range(-3..=3))).collect();
        let xs: Vec<i64> = w.iter().map(|x| x[0]).collect();
        let total_ok = (0..xs.len()).all(|i| (i + 1..=xs.len()).all(|j| xs[i..j].iter().sum::<i64>().abs() <= 3));
        let expect = total_ok.then(|| e1(xs.iter().sum()));
        v.check(well_defined_product(&dom, &w) == expect, format!("word {xs:?}"));
    }
    let cases: Vec<(Group, ElementSet)> = vec![
        (z.clone(), interval(&z, -4, 4).unwrap()),
        (Group::heisenberg(), heisenberg_box(1)),
        (Group::cyclic(30).unwrap(), interval(&Group::cyclic(30).unwrap(), -2, 2).unwrap()),
        (Group::matmod(2, 3).unwrap(), {
            let g = Group::matmod(2, 3).unwrap();
            let gens = [g.reduce(&[1, 1, 0, 1]).unwrap(), g.reduce(&[1, 0, 1, 1]).unwrap()];
            approxgroups::catalogue::word_ball(&Ctx::global(g.clone()), &gens, 1).unwrap()
        }),
    ];
    for (g, u) in cases {
        let u6 = brute_power(&g, &u, 6);
        let omega = Ctx::restrict(g.clone(), u6.clone()).unwrap();
        // U^6 is well-defined in the local group on Omega = U^6
        let defined = u6.len() == setops::power_set(&omega, &u, 6).unwrap().len();
        let local = Ctx::restrict(g.clone(), u.clone()).unwrap();
        let r = check_cancellative(&local);
        v.check(defined && r.cancellative, format!("{g}: restriction to U with U^6 verified"));
    }
    let flagged = !check_cancellative(&approxgroups::local::inverse_law_counterexample()).cancellative
        && !check_cancellative(&approxgroups::local::cancellation_counterexample()).cancellative;
    v.check(flagged, "hand-built counterexample tables are flagged");
    v.note("{-1,0,1} undefined word, empty word, 300 DP-oracle words, 4 restrictions");
    v
}

fn criterion_10() -> Verdict {
    let mut v = Verdict::new();
    let bin = env!("CARGO_BIN_EXE_approxgroups");
    let dir = std::env::temp_dir().join(format!("approxgroups-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let scenarios: &[&[&str]] = &[
        &["analyze", "--group", "cyclic:41", "--set", "interval:-10:10"],
        &["analyze", "--group", "heisenberg", "--set", "heisenberg_box:2"],
        &["sanders", "--group", "lattice:1", "--set", "interval:-30:30", "--m", "4", "--normal"],
        &["gleason", "--group", "heisenberg", "--set", "heisenberg_exp_box:2:4", "--core", "[[0,-1,0],[0,0,0],[0,1,0]]", "--sample-budget", "5000", "--seed", "11"],
        &["bk-metric", "--group", "heisenberg", "--chain", "heisenberg_central:2:8:2", "--mode", "normal", "--normal-power", "20", "--seed", "5"],
        &["nilprog", "check", "--example", "heisenberg_box", "--N1", "10", "--N2", "10"],
        &["nilprog", "collect", "--example", "helfgott", "--params", "7,3,2,2", "--words", "300", "--seed", "3"],
        &["nilprog", "growth", "--example", "interval", "--N1", "4"],
        &["fourier", "bogolyubov", "--group", "cyclic:101", "--set", "interval:-10:10"],
        &["fourier", "spec", "--group", "(cyclic:12)*(cyclic:18)", "--set", "box:0:2:0:3", "--delta", "1/3"],
        &["growth", "profile", "--group", "lattice:2", "--radius", "20"],
        &["growth", "isoperimetry", "--group", "cyclic:1000", "--e", "interval:0:99"],
        &["local", "cancellative", "--group", "heisenberg", "--domain", "heisenberg_box:1"],
    ];
    for (i, args) in scenarios.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{i}-{run}.json"));
            let csv = dir.join(format!("{i}-{run}.csv"));
            let mut cmd = Command::new(bin);
            cmd.args(*args).arg("--out").arg(&out).arg("--csv").arg(&csv);
            if run == 1 {
                cmd.args(["--threads", "1"]);
            }
            let status = cmd.output().unwrap().status;
            let json = std::fs::read(&out).unwrap_or_default();
            let table = std::fs::read(&csv).unwrap_or_default();
            outputs.push((status.code(), json, table));
        }
        let same = outputs[0] == outputs[1];
        v.check(same && outputs[0].0 == Some(0) && !outputs[0].1.is_empty(), format!("scenario {}", args.join(" ")));
    }
    let _ = std::fs::remove_dir_all(&dir);
    v.note(format!("{} scenarios, byte-identical JSON and CSV", scenarios.len()));
    v
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("approximate-group catalogue", criterion_1),
        ("Ruzsa covering", criterion_2),
        ("small neighbourhoods", criterion_3),
        ("escape norms and Gleason identities", criterion_4),
        ("pseudometric inclusions", criterion_5),
        ("nilprogressions", criterion_6),
        ("Fourier", criterion_7),
        ("growth", criterion_8),
        ("local groups", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({:.1}s): {}", i + 1, t.elapsed().as_secs_f64(), v.detail);
        // a criterion may only fail through its recorded known sub-checks
        let other = v.detail.split("; ").filter(|d| d.starts_with("FAILED")).count();
        if !v.pass && (other > 0 || v.known.is_empty()) {
            unexpected.push(i + 1);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
