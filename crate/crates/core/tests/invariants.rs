mod common;

use coarse_core::category::{self, CoarseSpace};
use coarse_core::coarsemap::EAMap;
use coarse_core::entourage::Relation;
use coarse_core::finite::{self, FinMap, FinSpace};
use coarse_core::ground::{PointSet, Space};
use coarse_core::structures::Structure;
use coarse_core::upset::UpSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const BUDGET: usize = 8;

fn objects() -> Vec<CoarseSpace> {
    let s = Space::ray();
    let m = Structure::metric(&s);
    vec![
        CoarseSpace::new(m.clone()),
        CoarseSpace::new(Structure::terminal(&s)),
        CoarseSpace::new(Structure::initial(&s)),
        CoarseSpace::new(Structure::ideal(m.clone(), PointSet::on_ray("r0", UpSet::singleton(0))).unwrap()),
        CoarseSpace::new(Structure::metric(&Space::rays(2))),
        CoarseSpace::new(Structure::termination(Structure::metric(&Space::rays(2)))),
    ]
}

fn coarse(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace) -> bool {
    category::check_coarse(f, y, x, BUDGET).unwrap().is_coarse()
}

/// A coarse map between two random objects, when one turns up quickly.
fn coarse_map(rng: &mut ChaCha8Rng, y: &CoarseSpace, x: &CoarseSpace) -> Option<EAMap> {
    (0..40).map(|_| eamap(&y.space, &x.space, rng, 0.15)).find(|f| coarse(f, y, x))
}

fn pick<'a>(rng: &mut ChaCha8Rng, objs: &'a [CoarseSpace]) -> &'a CoarseSpace {
    &objs[rng.gen_range(0..objs.len())]
}

fn fin_space(rng: &mut ChaCha8Rng) -> FinSpace {
    let n = rng.gen_range(1..=4);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    FinSpace::from_labels(&labels)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn coarse_maps_compose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objs = objects();
        let (a, b, c) = (pick(&mut rng, &objs).clone(), pick(&mut rng, &objs).clone(), pick(&mut rng, &objs).clone());
        if let (Some(f), Some(g)) = (coarse_map(&mut rng, &a, &b), coarse_map(&mut rng, &b, &c)) {
            let gf = g.compose(&f).unwrap();
            prop_assert!(coarse(&gf, &a, &c), "{gf:?}");
        }
    }

    #[test]
    fn closeness_is_a_congruence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objs = objects();
        let (a, b, c) = (pick(&mut rng, &objs).clone(), pick(&mut rng, &objs).clone(), pick(&mut rng, &objs).clone());
        let (Some(f), Some(f2), Some(g)) = (coarse_map(&mut rng, &a, &b), coarse_map(&mut rng, &a, &b), coarse_map(&mut rng, &b, &c)) else {
            return Ok(());
        };
        let close = |p: &EAMap, q: &EAMap, y: &CoarseSpace, x: &CoarseSpace| category::check_close(p, q, y, x, BUDGET).unwrap();
        prop_assert!(close(&f, &f, &a, &b).is_in());
        let v = close(&f, &f2, &a, &b);
        prop_assert_eq!(v.label(), close(&f2, &f, &a, &b).label());
        if v.is_in() {
            prop_assert!(!close(&g.compose(&f).unwrap(), &g.compose(&f2).unwrap(), &a, &c).is_out());
            if let Some(h) = coarse_map(&mut rng, &c, &a) {
                prop_assert!(!close(&f.compose(&h).unwrap(), &f2.compose(&h).unwrap(), &c, &b).is_out());
            }
        }
    }

    #[test]
    fn termination_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objs = objects();
        let x = pick(&mut rng, &objs);
        let t = category::terminate(x);
        let tt = category::terminate(&t);
        prop_assert!(t.structure.structure_eq(&tt.structure, BUDGET).unwrap().is_in());
        prop_assert!(coarse(&category::tau(x), x, &t));
        if x.structure.is_unital().unwrap().is_in() {
            prop_assert!(t.structure.structure_eq(&Structure::terminal(&x.space), BUDGET).unwrap().is_in());
        }
    }

    #[test]
    fn quotient_by_a_finite_set_changes_nothing(items in proptest::collection::vec(0u64..30, 1..5)) {
        let s = Space::ray();
        let m = CoarseSpace::new(Structure::metric(&s));
        let (q, map) = category::quotient(&m, &PointSet::on_ray("r0", UpSet::finite(items))).unwrap();
        prop_assert!(q.structure.structure_eq(&m.structure, BUDGET).unwrap().is_in());
        prop_assert!(coarse(&map, &m, &q));
    }

    #[test]
    fn quotient_sits_between_parent_and_terminal(p in 1u64..6, r in 0u64..6) {
        let s = Space::ray();
        let m = CoarseSpace::new(Structure::metric(&s));
        let (q, _) = category::quotient(&m, &PointSet::on_ray("r0", UpSet::progression(p, r % p))).unwrap();
        prop_assert!(m.structure.leq(&q.structure, BUDGET).unwrap().is_in());
        prop_assert!(q.structure.leq(&Structure::terminal(&s), BUDGET).unwrap().is_in());
    }

    #[test]
    fn finite_and_banded_backends_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (y, x) = (fin_space(&mut rng), fin_space(&mut rng));
        let (cy, cx) = (y.to_coarse_space().unwrap(), x.to_coarse_space().unwrap());
        let maps = FinMap::all(y.n(), x.n());
        let f = &maps[rng.gen_range(0..maps.len())];
        let g = &maps[rng.gen_range(0..maps.len())];
        let (ef, eg) = (f.to_eamap(&y, &x).unwrap(), g.to_eamap(&y, &x).unwrap());
        prop_assert_eq!(finite::fin_coarse(f, &y, &x), coarse(&ef, &cy, &cx));
        if finite::fin_coarse(f, &y, &x) && finite::fin_coarse(g, &y, &x) {
            prop_assert_eq!(finite::fin_close(&x, f, g), category::check_close(&ef, &eg, &cy, &cx, BUDGET).unwrap().is_in());
        }
    }

    #[test]
    fn values_survive_json(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = mixed_space();
        let r = relation(&space, &mut rng, false);
        let back: Relation = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert!(back.set_eq(&r));
        let u = upset(&mut rng);
        prop_assert_eq!(&serde_json::from_str::<UpSet>(&serde_json::to_string(&u).unwrap()).unwrap(), &u);
        let f = eamap(&space, &space, &mut rng, 0.3);
        prop_assert_eq!(&serde_json::from_str::<EAMap>(&serde_json::to_string(&f).unwrap()).unwrap(), &f);
        let d = Structure::quotient(Structure::metric(&space), point_set(&space, &mut rng, true)).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Structure>(&serde_json::to_string(&d).unwrap()).unwrap(), &d);
    }
}
