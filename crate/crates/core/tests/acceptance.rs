//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Randomized inputs come from a fixed ChaCha seed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use coarse_core::category::{self, CoarseSpace, Cone, Construction};
use coarse_core::coarsemap::{self, CompMap, EAMap, PairImage, Tail};
use coarse_core::entourage::Relation;
use coarse_core::finite::{self, Diagram, FinMap, FinSpace, Universal};
use coarse_core::ground::{Point, PointSet, Space};
use coarse_core::structures::{self, Structure};
use coarse_core::upset::UpSet;
use coarse_core::verdict::{Side, Verdict, Witness};
use coarse_core::window::{self, PairSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

const BUDGET: usize = 8;

/// `ACCEPTANCE_SEED` shifts every criterion's seed.
fn rng(criterion: u64) -> ChaCha8Rng {
    let base = std::env::var("ACCEPTANCE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0xC0A5_0000u64);
    ChaCha8Rng::seed_from_u64(base.wrapping_add(criterion))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn ray() -> Space {
    Space::ray()
}

fn metric(s: &Space) -> Structure {
    Structure::metric(s)
}

fn terminal(s: &Space) -> Structure {
    Structure::terminal(s)
}

fn set(s: UpSet) -> PointSet {
    PointSet::on_ray("r0", s)
}

fn cs(d: Structure) -> CoarseSpace {
    CoarseSpace::new(d)
}

fn affine(a: u64, b: i64, table: Vec<u64>) -> EAMap {
    EAMap::ray_affine(a, b, table).unwrap()
}

fn clip_points(s: &BTreeSet<Point>, n: u64) -> BTreeSet<Point> {
    s.iter().filter(|p| p.index <= n).cloned().collect()
}

fn same_points(a: &PointSet, b: &PointSet) -> bool {
    a.is_subset(b) && b.is_subset(a)
}

/// Re-evaluates an In certificate or an Out witness.
fn audit(d: &Structure, rel: &Relation, v: &Verdict) -> Result<bool, String> {
    match v {
        Verdict::In { certificate } => ok(structures::check_certificate(d, rel, certificate)),
        Verdict::Out { witness } => ok(structures::confirm_witness(d, rel, witness)),
        Verdict::Unknown { .. } => Ok(true),
    }
}

/// Equality verdict plus a generator-level re-check: every sampled member
/// of either side is certified a member of the other.
fn audited_eq(a: &Structure, b: &Structure) -> Result<(), String> {
    let v = ok(a.structure_eq(b, BUDGET))?;
    ensure(v.is_in(), || format!("{} vs {}: {v:?}", a.name(), b.name()))?;
    for (x, y) in [(a, b), (b, a)] {
        for g in ok(x.generators(BUDGET))? {
            let m = ok(y.contains(&g))?;
            ensure(m.is_in() && audit(y, &g, &m)?, || format!("generator {g:?} of {} not certified in {}", x.name(), y.name()))?;
        }
    }
    Ok(())
}

/// Re-checks closeness on the generators of the source.
fn audited_close(f: &EAMap, g: &EAMap, y: &Structure, x: &Structure) -> Result<bool, String> {
    for r in ok(y.generators(BUDGET))? {
        let v = ok(x.contains_pair(f, g, &r))?;
        let Some(c) = v.certificate() else { return Ok(false) };
        let pieces = ok(PairImage::new(f, g, &r))?.pieces();
        if !ok(structures::check_pieces(x, &pieces, c))? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---- 1: entourage algebra ----

fn c1_algebra() -> Outcome {
    let mut rng = rng(1);
    let space = mixed_space();
    let unit = Relation::unit(&space);
    let all = space.all();
    let mut laws = 0;
    for t in 0..1000 {
        let (a, b, c) = (relation(&space, &mut rng, false), relation(&space, &mut rng, false), relation(&space, &mut rng, false));
        let inf = rng.gen_bool(0.5);
        let s = point_set(&space, &mut rng, inf);
        let n = window::window_for(&[&a, &b, &c]);
        let m = n + 64;
        let (pa, pb, pc, pu) = (window::pairs(&a, m), window::pairs(&b, m), window::pairs(&c, m), window::pairs(&unit, m));
        let ps = window::points(&s, m);
        let restrict_right = |p: &PairSet| -> PairSet { p.iter().filter(|(_, y)| ps.contains(y)).cloned().collect() };

        // (name, symbolic lhs, symbolic rhs, extensional lhs, extensional rhs)
        let cases: Vec<(&str, Relation, Relation, PairSet, PairSet)> = vec![
            ("associativity", a.compose(&b).compose(&c), a.compose(&b.compose(&c)), window::compose(&window::compose(&pa, &pb), &pc), window::compose(&pa, &window::compose(&pb, &pc))),
            ("left unit", unit.compose(&a), a.clone(), window::compose(&pu, &pa), pa.clone()),
            ("right unit", a.compose(&unit), a.clone(), window::compose(&pa, &pu), pa.clone()),
            (
                "left distributivity",
                a.compose(&b.union(&c)),
                a.compose(&b).union(&a.compose(&c)),
                window::compose(&pa, &window::union(&pb, &pc)),
                window::union(&window::compose(&pa, &pb), &window::compose(&pa, &pc)),
            ),
            (
                "right distributivity",
                a.union(&b).compose(&c),
                a.compose(&c).union(&b.compose(&c)),
                window::compose(&window::union(&pa, &pb), &pc),
                window::union(&window::compose(&pa, &pc), &window::compose(&pb, &pc)),
            ),
            ("idempotence", a.union(&a), a.clone(), window::union(&pa, &pa), pa.clone()),
            ("involution", a.transpose().transpose(), a.clone(), window::transpose(&window::transpose(&pa)), pa.clone()),
            (
                "transpose of composite",
                a.compose(&b).transpose(),
                b.transpose().compose(&a.transpose()),
                window::transpose(&window::compose(&pa, &pb)),
                window::compose(&window::transpose(&pb), &window::transpose(&pa)),
            ),
            ("transpose of union", a.union(&b).transpose(), a.transpose().union(&b.transpose()), window::transpose(&window::union(&pa, &pb)), window::union(&window::transpose(&pa), &window::transpose(&pb))),
            ("right unit on S", a.compose(&Relation::local_unit(&s)), a.restrict2(&all, &s), window::compose(&pa, &window::pairs(&Relation::local_unit(&s), m)), restrict_right(&pa)),
        ];
        for (name, l, r, el, er) in cases {
            ensure(l.set_eq(&r), || format!("triple {t}: {name} fails symbolically\n a={a:?}\n b={b:?}\n c={c:?}"))?;
            let (wl, wr) = (window::pairs(&l, n), window::pairs(&r, n));
            ensure(window::clip(&el, n) == wl, || format!("triple {t}: {name}: left side disagrees with the window oracle\n a={a:?}\n b={b:?}\n c={c:?}"))?;
            ensure(window::clip(&er, n) == wr, || format!("triple {t}: {name}: right side disagrees with the window oracle"))?;
            laws += 1;
        }

        let ab = window::compose(&pa, &pb);
        let nbhd: Vec<(&str, PointSet, PointSet, BTreeSet<Point>, BTreeSet<Point>)> = vec![
            ("(E∘E')·S", a.compose(&b).left_nbhd(&s), a.left_nbhd(&b.left_nbhd(&s)), window::left_nbhd(&ab, &ps), window::left_nbhd(&pa, &window::left_nbhd(&pb, &ps))),
            ("S·(E∘E')", a.compose(&b).right_nbhd(&s), b.right_nbhd(&a.right_nbhd(&s)), window::right_nbhd(&ps, &ab), window::right_nbhd(&window::right_nbhd(&ps, &pa), &pb)),
        ];
        for (name, l, r, el, er) in nbhd {
            ensure(same_points(&l, &r), || format!("triple {t}: {name} fails symbolically"))?;
            let wl = window::points(&l, n);
            ensure(clip_points(&el, n) == wl && clip_points(&er, n) == wl, || format!("triple {t}: {name} disagrees with the window oracle"))?;
            laws += 1;
        }
    }
    Ok(format!("1000 triples, {laws} law instances"))
}

// ---- 2: properness axiom ----

/// Pair sets at two windows; fibers of probe points `≤ n` are complete in
/// the first once it clears the largest offset.
fn pair_windows(r: &Relation, n: u64) -> (PairSet, PairSet) {
    let base = n + 16;
    (window::pairs(r, base), window::pairs(r, 2 * base + 16))
}

fn fiber_grows(w: &(PairSet, PairSet), p: &Point, side: Side) -> bool {
    let len = |s: &PairSet| match side {
        Side::Left => window::row_len(s, p),
        Side::Right => window::column_len(s, p),
    };
    len(&w.1) > len(&w.0)
}

fn c2_properness() -> Outcome {
    let mut rng = rng(2);
    let space = mixed_space();
    let mut outs = 0;
    for t in 0..600 {
        let r = relation(&space, &mut rng, false);
        let n = window::window_for(&[&r]);
        let probes = space.points_upto(n);
        let one = probes[0].clone();

        let by_axiom = r.is_proper();
        let by_units = probes.iter().all(|x| {
            let u = Relation::local_unit(&space.singleton(x).unwrap());
            r.compose(&u).is_finite() && u.compose(&r).is_finite()
        });
        let by_products = probes.iter().all(|x| {
            let (e1, e2) = (Relation::pair(&space, x, &one).unwrap(), Relation::pair(&space, &one, x).unwrap());
            r.compose(&e1).is_finite() && e2.compose(&r).is_finite()
        });
        ensure(by_axiom.is_in() == by_units && by_units == by_products, || format!("relation {t}: axiom {}, units {by_units}, products {by_products}: {r:?}", by_axiom.label()))?;

        let w = pair_windows(&r, n);
        match &by_axiom {
            Verdict::Out { witness: Witness::InfiniteFiber { point, side } } => {
                ensure(fiber_grows(&w, point, *side), || format!("relation {t}: witness {point:?} {side:?} not confirmed by the window"))?;
                outs += 1;
            }
            Verdict::Out { witness } => return Err(format!("relation {t}: unexpected witness {witness:?}")),
            _ => {
                let grows = space.points_upto(n).into_iter().find(|p| fiber_grows(&w, p, Side::Left) || fiber_grows(&w, p, Side::Right));
                ensure(grows.is_none(), || format!("relation {t}: proper but the window sees an infinite fiber at {grows:?}: {r:?} n={n}"))?;
            }
        }
    }
    Ok(format!("600 relations, {outs} improper with confirmed witnesses"))
}

// ---- 3: local properness ----

fn lp(f: &EAMap, r: &Relation) -> Result<bool, String> {
    Ok(ok(coarsemap::locally_proper_for(f, r))?.is_in())
}

fn c3_local_properness() -> Outcome {
    let mut rng = rng(3);
    let space = mixed_space();
    let mut yes = 0;
    let mut closure = 0;
    for t in 0..600 {
        let f = eamap(&space, &space, &mut rng, 0.35);
        let r = relation(&space, &mut rng, true);
        let w = window::window_for(&[&r]);
        let one = lp(&f, &r)?;
        let two = coarsemap::locally_proper_by_supports(&f, &r).is_in();
        let three = coarsemap::locally_proper_by_probes(&f, &r, w).is_in();
        ensure(one == two && two == three, || format!("pair {t}: I {one}, II {two}, III {three}\n f={f:?}\n F={r:?}"))?;
        if one {
            yes += 1;
        }

        // closure under the relation algebra
        let r2 = relation(&space, &mut rng, true);
        if one && lp(&f, &r2)? {
            let derived = [r.union(&r2), r.compose(&r2), r.transpose(), r.intersect(&r2), r.restrict(&point_set(&space, &mut rng, true))];
            for (i, d) in derived.iter().enumerate() {
                ensure(lp(&f, d)?, || format!("pair {t}: derived relation {i} loses local properness"))?;
                closure += 1;
            }
        }
        let p = space.points_upto(4);
        let single = Relation::pair(&space, &p[rng.gen_range(0..p.len())], &p[rng.gen_range(0..p.len())]).unwrap();
        ensure(lp(&f, &single)?, || format!("pair {t}: a single pair is not locally proper"))?;
    }
    Ok(format!("600 pairs ({yes} locally proper), {closure} closure checks"))
}

// ---- 4: worked examples ----

fn down_map() -> EAMap {
    let s = ray();
    let comps = [("r0".to_string(), CompMap::Ray { table: vec![Point::new("r0", 0)], tail: Tail::Affine { a: 1, b: -1, dst: "r0".into() } })].into();
    EAMap::new(s.clone(), s, comps).unwrap()
}

fn c4_examples() -> Outcome {
    let s = ray();
    let t = cs(terminal(&s));
    let m = cs(metric(&s));
    let id = EAMap::identity(&s);

    // (a)
    let (e, _) = ok(category::equalizer(&id, &affine(1, 1, vec![]), &t, &t, BUDGET))?;
    ensure(same_points(&ok(e.structure.carrier())?, &s.all()), || "(a) equalizer carrier is not the whole ray".into())?;
    audited_eq(&e.structure, &t.structure).map_err(|m| format!("(a) {m}"))?;

    // (b)
    let (q, qm) = ok(category::coequalizer(&id, &down_map(), &t, &t, BUDGET, 3))?;
    audited_eq(&q.structure, &t.structure).map_err(|m| format!("(b) {m}"))?;
    ensure(ok(category::check_close(&qm, &id, &t, &q, BUDGET))?.is_in(), || "(b) quotient map is not close to the identity".into())?;

    // (c)
    let mut rng = rng(4);
    let sources = [cs(metric(&s)), cs(metric(&Space::rays(2))), cs(terminal(&s)), cs(Structure::initial(&mixed_space()))];
    let targets = [t.clone(), cs(terminal(&Space::rays(2)))];
    let (mut pairs, mut tries) = (0, 0);
    while pairs < 100 {
        tries += 1;
        ensure(tries < 5000, || format!("(c) only {pairs} coarse pairs found"))?;
        let y = &sources[rng.gen_range(0..sources.len())];
        let x = &targets[rng.gen_range(0..targets.len())];
        let f = eamap(&y.space, &x.space, &mut rng, 0.1);
        let g = eamap(&y.space, &x.space, &mut rng, 0.1);
        if !ok(category::check_coarse(&f, y, x, BUDGET))?.is_coarse() || !ok(category::check_coarse(&g, y, x, BUDGET))?.is_coarse() {
            continue;
        }
        let v = ok(category::check_close(&f, &g, y, x, BUDGET))?;
        ensure(v.is_in() && audited_close(&f, &g, &y.structure, &x.structure)?, || format!("(c) coarse maps not close: {v:?}\n f={f:?}\n g={g:?}"))?;
        pairs += 1;
    }

    // (d)
    let pt = Space::points(1);
    let p0 = pt.points_upto(0)[0].clone();
    let ideal = cs(ok(Structure::ideal(metric(&s), set(UpSet::singleton(0))))?);
    let point = cs(terminal(&pt));
    let c0 = ok(EAMap::constant(&s, &pt, &p0))?;
    let incl = ok(EAMap::constant(&pt, &s, &Point::new("r0", 0)))?;
    ensure(ok(category::equivalence_witness(&ideal, &point, &c0, &incl, BUDGET))?.is_in(), || "(d) not an equivalence".into())?;
    ensure(
        ok(category::check_coarse(&c0, &ideal, &point, BUDGET))?.is_coarse()
            && ok(category::check_coarse(&incl, &point, &ideal, BUDGET))?.is_coarse()
            && audited_close(&ok(incl.compose(&c0))?, &id, &ideal.structure, &ideal.structure)?
            && audited_close(&ok(c0.compose(&incl))?, &EAMap::identity(&pt), &point.structure, &point.structure)?,
        || "(d) re-evaluation failed".into(),
    )?;

    // (e)
    audited_eq(&category::terminate(&m).structure, &t.structure).map_err(|m| format!("(e) {m}"))?;
    audited_eq(&category::terminate(&cs(metric(&Space::rays(2)))).structure, &terminal(&Space::rays(2))).map_err(|m| format!("(e) {m}"))?;

    // (f)
    ensure(ok(category::is_epi(&id, &m, &t, BUDGET))?.is_in(), || "(f) q is not epi".into())?;
    ensure(ok(category::check_coarse(&id, &m, &t, BUDGET))?.is_coarse(), || "(f) q is not coarse".into())?;
    Ok(format!("(a)-(f) In, {pairs} random pairs into terminal structures"))
}

// ---- 5: products with a terminated factor ----

fn c5_products() -> Outcome {
    let mut rng = rng(5);
    let s = ray();
    let two = Space::rays(2);
    let ts = [cs(terminal(&s)), cs(Structure::termination(metric(&s)))];
    let ys = [
        cs(metric(&s)),
        cs(metric(&two)),
        cs(ok(Structure::subspace(metric(&s), set(UpSet::evens())))?),
        cs(terminal(&s)),
        cs(ok(Structure::ideal(metric(&s), set(UpSet::singleton(0))))?),
    ];
    let apexes = [cs(metric(&s)), cs(metric(&two)), cs(ok(Structure::subspace(metric(&s), set(UpSet::from(3))))?), cs(Structure::initial(&s)), cs(terminal(&s))];
    let mut instances = 0;
    let mut total = 0;
    for t in &ts {
        for y in &ys {
            let p = ok(category::product_with_terminated(t, y, None, BUDGET))?;
            let mut cones = Vec::new();
            let mut tries = 0;
            while cones.len() < 20 {
                tries += 1;
                ensure(tries < 20_000, || format!("only {} cones found for {} × {}", cones.len(), t.structure.name(), y.structure.name()))?;
                let w = &apexes[rng.gen_range(0..apexes.len())];
                let a = eamap(&w.space, &y.space, &mut rng, 0.1);
                let b = eamap(&w.space, &t.space, &mut rng, 0.1);
                if ok(category::check_coarse(&a, w, y, BUDGET))?.is_coarse() && ok(category::check_coarse(&b, w, t, BUDGET))?.is_coarse() {
                    cones.push(Cone { apex: w.clone(), legs: vec![b, a] });
                }
            }
            let reports = ok(category::verify_cone(&Construction::TerminatedProduct { t, y, product: &p }, &cones, BUDGET))?;
            if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| !r.passed()) {
                return Err(format!("{} × {}: cone {i} fails: {r:?}\n legs={:?}", t.structure.name(), y.structure.name(), cones[i].legs));
            }
            instances += 1;
            total += cones.len();
        }
    }
    Ok(format!("{instances} instances, {total} cones"))
}

// ---- 6: quotient pair ----

fn c6_quotients() -> Outcome {
    let s = ray();
    let m = cs(metric(&s));
    let (q, _) = ok(category::quotient(&m, &set(UpSet::evens())))?;
    audited_eq(&q.structure, &terminal(&s))?;
    let (q, _) = ok(category::quotient(&m, &set(UpSet::singleton(0))))?;
    audited_eq(&q.structure, &metric(&s))?;
    Ok("both equalities In with re-evaluated certificates".into())
}

// ---- 7: finite backend ----

fn c7_finite() -> Outcome {
    let shapes = FinSpace::shapes_upto(4);
    let apex = 3;
    let check = |kind: Universal, d: &Diagram, what: &str| -> Result<(), String> {
        let cand = match kind {
            Universal::Limit => finite::fin_limit(d),
            Universal::Colimit => finite::fin_colimit(d),
        };
        match ok(finite::universal_counterexample(kind, d, &cand, apex))? {
            None => Ok(()),
            Some(f) => Err(format!("{what}: {f:?} for {d:?}")),
        }
    };
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &shapes {
        for b in &shapes {
            let d = Diagram::discrete(&[a.clone(), b.clone()]);
            check(Universal::Limit, &d, "product")?;
            check(Universal::Colimit, &d, "coproduct")?;
            *counts.entry("products").or_default() += 1;
            *counts.entry("coproducts").or_default() += 1;
            let maps = FinMap::classes(a, b);
            for f in &maps {
                for g in &maps {
                    let d = Diagram::pair(a, b, f, g);
                    check(Universal::Limit, &d, "equalizer")?;
                    check(Universal::Colimit, &d, "coequalizer")?;
                    *counts.entry("equalizers").or_default() += 1;
                    *counts.entry("coequalizers").or_default() += 1;
                }
            }
        }
    }
    let small = FinSpace::shapes_upto(3);
    for z in &small {
        for x in &shapes {
            for y in &shapes {
                for f in FinMap::classes(z, x) {
                    for g in FinMap::classes(z, y) {
                        check(Universal::Colimit, &Diagram::span(z, x, y, &f, &g), "pushout")?;
                        *counts.entry("pushouts").or_default() += 1;
                    }
                }
            }
        }
    }
    if let Some(c) = finite::unbalanced_counterexample(4) {
        return Err(format!("monic and epi but not invertible: {c:?}"));
    }
    if let Some(g) = ok(finite::normal_form_counterexample(3))? {
        return Err(format!("closure is not the partition normal form for generators {g:?}"));
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
    Ok(format!("{}, balanced, normal form on 3 points", summary.join(", ")))
}

// ---- 8: certificate audit ----

fn catalog() -> Result<Vec<Structure>, String> {
    let s = ray();
    let mx = mixed_space();
    let two = Space::rays(2);
    let m = metric(&s);
    let far = Relation::diag("r0", 0, UpSet::all()).union(&Relation::rect(set(UpSet::singleton(0)), set(UpSet::singleton(40))));
    Ok(vec![
        terminal(&s),
        terminal(&mx),
        m.clone(),
        metric(&mx),
        ok(Structure::metric_clusters(&two, vec![structures::Cluster::of(&["r0", "r1"])]))?,
        Structure::initial(&mx),
        Structure::initial_conn(&mx),
        Structure::initial_unital(&mx),
        Structure::initial_conn_uni(&mx),
        ok(Structure::subspace(m.clone(), set(UpSet::evens())))?,
        ok(Structure::pullback(affine(2, 0, vec![]), m.clone()))?,
        ok(Structure::eq_pullback(EAMap::identity(&s), affine(1, 1, vec![]), m.clone()))?,
        Structure::termination(metric(&mx)),
        ok(Structure::ideal(m.clone(), set(UpSet::singleton(0))))?,
        ok(Structure::quotient(m.clone(), set(UpSet::evens())))?,
        ok(Structure::quotient(metric(&two), PointSet::on_ray("r1", UpSet::all())))?,
        Structure::connect(Structure::initial(&mx)),
        ok(Structure::sum(vec![("a".into(), m.clone()), ("b".into(), terminal(&s))]))?,
        ok(Structure::meet(m.clone(), ok(Structure::subspace(terminal(&s), set(UpSet::from(2))))?))?,
        ok(Structure::join(m.clone(), vec![far], 2))?,
    ])
}

fn c8_audit() -> Outcome {
    let mut rng = rng(8);
    let mut tally: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    let catalog = catalog()?;
    for d in catalog.iter().cloned() {
        let space = d.space();
        for i in 0..60 {
            let rel = match i % 3 {
                0 => relation(&space, &mut rng, true),
                _ => relation(&space, &mut rng, false),
            };
            let v = ok(d.contains(&rel))?;
            ensure(audit(&d, &rel, &v)?, || format!("{}: {} verdict fails re-evaluation for {rel:?}: {v:?}", d.name(), v.label()))?;
            let slot = match v {
                Verdict::In { .. } => 0,
                Verdict::Out { .. } => 1,
                Verdict::Unknown { .. } => 2,
            };
            if slot == 2 {
                ensure(matches!(d, Structure::Join { .. }), || format!("{}: Unknown for a closed form on {rel:?}", d.name()))?;
            }
            tally.entry(d.name()).or_default()[slot] += 1;
        }
    }
    let (i, o, u) = tally.values().fold((0, 0, 0), |(i, o, u), c| (i + c[0], o + c[1], u + c[2]));
    Ok(format!("{} structures, {i} In and {o} Out re-evaluated, {u} Unknown (join only)", catalog.len()))
}

// ---- 9: σ-unitality ----

fn c9_sigma() -> Outcome {
    let mut rng = rng(9);
    let mx = mixed_space();
    let s = ray();
    let cases: Vec<(&str, Structure, bool)> =
        vec![("metric", metric(&mx), true), ("ideal", ok(Structure::ideal(metric(&s), set(UpSet::singleton(0))))?, false), ("initial", Structure::initial(&mx), false)];
    for (name, d, infinite) in cases {
        let space = d.space();
        let levels = ok(structures::sigma_filtration(&d, 40))?;
        for (k, l) in levels.iter().enumerate() {
            ensure(ok(d.unital_subspace(l))?.is_in(), || format!("{name}: level {k} is not unital"))?;
            if k > 0 {
                ensure(levels[k - 1].is_subset(l), || format!("{name}: levels {} and {k} are not nested", k - 1))?;
            }
        }
        if name == "metric" {
            ensure(levels.iter().all(|l| same_points(l, &space.all())), || "metric filtration is not constant".into())?;
        }
        let mut probes = 0;
        while probes < 50 {
            let inf = infinite && rng.gen_bool(0.7);
            let p = point_set(&space, &mut rng, inf);
            let unital = ok(d.unital_subspace(&p))?;
            if !infinite && !p.is_finite() {
                ensure(!unital.is_in(), || format!("{name}: infinite probe accepted as unital"))?;
                continue;
            }
            ensure(unital.is_in(), || format!("{name}: probe {p:?} should be unital: {unital:?}"))?;
            ensure(levels.iter().any(|l| p.is_subset(l)), || format!("{name}: probe {p:?} lies in no level"))?;
            probes += 1;
        }
    }
    Ok("3 filtrations, 50 unital probes each".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("1 entourage algebra", c1_algebra, 60),
        ("2 properness axiom", c2_properness, 30),
        ("3 local properness", c3_local_properness, 60),
        ("4 worked examples", c4_examples, 30),
        ("5 terminated products", c5_products, 60),
        ("6 quotient pair", c6_quotients, 10),
        ("7 finite exhaustiveness", c7_finite, 300),
        ("8 certificate audit", c8_audit, 60),
        ("9 sigma-unitality", c9_sigma, 10),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let out = match out {
            Ok(_) if took > Duration::from_secs(limit) => Err(format!("took {took:.1?}, limit {limit}s")),
            o => o,
        };
        match out {
            Ok(msg) => println!("PASS  criterion {name}: {msg} [{:.2}s / {limit}s]", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg} [{:.2}s / {limit}s]", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
