use super::*;
use crate::verdict::Verdict;

fn ray() -> Space {
    Space::ray()
}

fn band(k: i64, a: UpSet) -> Relation {
    Relation::diag("r0", k, a)
}

fn aff(a: u64, b: i64) -> EAMap {
    EAMap::ray_affine(a, b, vec![]).unwrap()
}

fn on(u: UpSet) -> PointSet {
    PointSet::on_ray("r0", u)
}

fn p(i: u64) -> Point {
    Point::new("r0", i)
}

fn audit(d: &Structure, rel: &Relation) -> Verdict {
    let v = d.contains(rel).unwrap();
    match &v {
        Verdict::In { certificate } => assert!(check_certificate(d, rel, certificate).unwrap(), "certificate rejected for {rel:?} in {d:?}: {certificate:?}"),
        Verdict::Out { witness } => assert!(confirm_witness(d, rel, witness).unwrap(), "witness rejected for {rel:?} in {d:?}: {witness:?}"),
        Verdict::Unknown { .. } => {}
    }
    v
}

#[test]
fn terminal_and_metric_bands() {
    let t = Structure::terminal(&ray());
    let m = Structure::metric(&ray());
    assert!(audit(&t, &band(5, UpSet::all())).is_in());
    assert!(audit(&m, &band(5, UpSet::all())).is_in());
    let rect = Relation::rect(on(UpSet::singleton(0)), on(UpSet::all()));
    assert!(audit(&t, &rect).is_out());
    let shear = Relation::rect(on(UpSet::finite([0, 1])), on(UpSet::finite([7])));
    assert!(audit(&m, &shear).is_in());
}

#[test]
fn metric_pair_images() {
    let m = Structure::metric(&ray());
    let id = EAMap::identity(&ray());
    let unit = band(0, UpSet::all());
    assert!(m.contains_pair(&id, &aff(2, 0), &unit).unwrap().is_out());
    match m.contains_pair(&id, &aff(1, 3), &unit).unwrap() {
        Verdict::In { certificate } => {
            let text = serde_json::to_string(&certificate).unwrap();
            assert!(text.contains("\"bound\":3"), "{text}");
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn metric_clusters_separate() {
    let s = Space::rays(2);
    let split = Structure::metric_clusters(&s, vec![Cluster::of(&["r0"]), Cluster::of(&["r1"])]).unwrap();
    let joined = Structure::metric(&s);
    let cross = Relation::from_pairs(&s, &[(p(0), Point::new("r1", 0))]).unwrap();
    assert!(audit(&split, &cross).is_out());
    assert!(audit(&joined, &cross).is_in());
    let cross_band = Relation::band("r0", "r1", 0, UpSet::all());
    assert!(audit(&joined, &cross_band).is_out());
    assert!(audit(&Structure::terminal(&s), &cross_band).is_in());
}

#[test]
fn initial_variants() {
    let s = ray();
    let unit = Relation::unit(&s);
    let finite = Relation::from_pairs(&s, &[(p(0), p(3))]).unwrap();
    let fu = Relation::local_unit(&on(UpSet::finite([1, 2])));
    let cases = [
        (Structure::initial(&s), [false, false, true]),
        (Structure::initial_conn(&s), [false, true, true]),
        (Structure::initial_unital(&s), [true, false, true]),
        (Structure::initial_conn_uni(&s), [true, true, true]),
    ];
    for (d, want) in cases {
        for (rel, w) in [&unit, &finite, &fu].into_iter().zip(want) {
            assert_eq!(audit(&d, rel).is_in(), w, "{d:?} {rel:?}");
        }
    }
}

#[test]
fn termination_of_metric_is_terminal() {
    let term = Structure::termination(Structure::metric(&ray()));
    assert!(audit(&term, &band(7, UpSet::evens())).is_in());
    let eq = term.structure_eq(&Structure::terminal(&ray()), 8).unwrap();
    assert!(eq.is_in(), "{eq:?}");
}

#[test]
fn ideal_of_a_point() {
    let d = Structure::ideal(Structure::metric(&ray()), on(UpSet::singleton(0))).unwrap();
    assert!(d.is_unital().unwrap().is_out());
    assert!(audit(&d, &band(1, UpSet::range(0, 9))).is_in());
    assert!(audit(&d, &band(0, UpSet::all())).is_out());
    let f = sigma_filtration(&d, 3).unwrap();
    assert_eq!(f, vec![on(UpSet::range(0, 0)), on(UpSet::range(0, 1)), on(UpSet::range(0, 2))]);
}

#[test]
fn near_support_examples() {
    let m = Structure::metric(&ray());
    let v = m.near_support(&on(UpSet::evens()), &on(UpSet::odds())).unwrap();
    assert!(matches!(v, Verdict::In { certificate: crate::verdict::Certificate::NearSupport { radius: Some(1), .. } }), "{v:?}");
    assert!(m.near_support(&on(UpSet::all()), &on(UpSet::singleton(0))).unwrap().is_out());
    assert!(m.near_support(&PointSet::empty(), &on(UpSet::singleton(0))).unwrap().is_in());
}

#[test]
fn quotient_by_evens_is_terminal() {
    let q = Structure::quotient(Structure::metric(&ray()), on(UpSet::evens())).unwrap();
    let wide = Relation::rect(on(UpSet::finite([0])), on(UpSet::finite([40])));
    assert!(audit(&q, &wide).is_in());
    let sheared = q.contains_pair(&EAMap::identity(&ray()), &aff(2, 0), &band(0, UpSet::all())).unwrap();
    assert!(sheared.is_in());
    assert!(q.structure_eq(&Structure::terminal(&ray()), 8).unwrap().is_in());
    let q0 = Structure::quotient(Structure::metric(&ray()), on(UpSet::singleton(0))).unwrap();
    assert!(q0.structure_eq(&Structure::metric(&ray()), 8).unwrap().is_in());
}

#[test]
fn quotient_requires_unital_subspace() {
    let d = Structure::ideal(Structure::metric(&ray()), on(UpSet::singleton(0))).unwrap();
    assert!(matches!(Structure::quotient(d, on(UpSet::all())), Err(CoarseError::NotUnitalSubspace(_))));
}

#[test]
fn metric_vs_terminal() {
    let m = Structure::metric(&ray());
    let t = Structure::terminal(&ray());
    assert!(m.leq(&t, 8).unwrap().is_in());
    let back = t.leq(&m, 8).unwrap();
    match &back {
        Verdict::Out { witness } => assert!(confirm_separation(&t, &m, witness).unwrap()),
        v => panic!("{v:?}"),
    }
    assert!(m.structure_eq(&m, 8).unwrap().is_in());
}

#[test]
fn subspace_and_pullback() {
    let m = Structure::metric(&ray());
    let sub = Structure::subspace(m.clone(), on(UpSet::evens())).unwrap();
    assert!(audit(&sub, &band(2, UpSet::evens())).is_in());
    assert!(audit(&sub, &band(1, UpSet::evens())).is_out());
    let pb = Structure::pullback(aff(2, 0), m.clone()).unwrap();
    assert!(audit(&pb, &band(1, UpSet::all())).is_in());
    let zero = EAMap::constant(&ray(), &ray(), &p(0)).unwrap();
    let pz = Structure::pullback(zero, m).unwrap();
    assert!(audit(&pz, &band(0, UpSet::all())).is_out());
    assert!(audit(&pz, &band(0, UpSet::range(0, 4))).is_in());
}

#[test]
fn sums_rename_components() {
    let d = Structure::sum(vec![("a".into(), Structure::metric(&ray())), ("b".into(), Structure::terminal(&ray()))]).unwrap();
    let s = d.space();
    assert!(audit(&d, &Relation::diag("a.r0", 3, UpSet::all())).is_in());
    let cross = Relation::from_pairs(&s, &[(Point::new("a.r0", 0), Point::new("b.r0", 0))]).unwrap();
    assert!(audit(&d, &cross).is_out());
    assert!(d.is_connected().unwrap().is_out());
}

#[test]
fn join_searches_words() {
    let m = Structure::metric(&ray());
    let g = Relation::from_pairs(&ray(), &[(p(0), p(5))]).unwrap();
    let j = Structure::join(m.clone(), vec![g.clone()], 3).unwrap();
    assert!(audit(&j, &g).is_in());
    assert!(audit(&j, &band(0, UpSet::all())).is_in());
    let shear_rect = Relation::rect(on(UpSet::singleton(0)), on(UpSet::all()));
    assert!(audit(&j, &shear_rect).is_out());
}

#[test]
fn descriptor_json_roundtrip() {
    let q = Structure::quotient(Structure::metric(&ray()), on(UpSet::evens())).unwrap();
    let text = serde_json::to_string(&q).unwrap();
    assert!(text.contains("\"kind\":\"quotient\""));
    assert!(text.contains("\"Y\""));
    let back: Structure = serde_json::from_str(&text).unwrap();
    assert_eq!(back, q);
}

#[test]
fn generators_are_members() {
    let m = Structure::metric(&ray());
    let gens = m.generators(2).unwrap();
    assert_eq!(gens.len(), 5);
    let init = Structure::initial(&ray());
    assert_eq!(init.generators(3).unwrap().len(), 3);
}

#[test]
fn sparse_sets_split_into_singletons() {
    let b = Structure::initial(&ray()).blocks().unwrap().unwrap();
    let sparse = on(UpSet::new([], 2, 2, [0]));
    assert_eq!(b.split_pair(&sparse), Some((p(2), p(4))));
    assert_eq!(b.split_pair(&on(UpSet::singleton(7))), None);
}
