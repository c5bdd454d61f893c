//! The coarse category: coarse maps, closeness, limits and colimits in the
//! representable fragment, Terminate/Connect/AddPt, quotients, images,
//! and monic/epi classification.
//!
//! Every construction returns its object together with the maps that make
//! it one; objects over a banded space keep the ambient ground set and
//! encode subspaces through the structure's carrier.

use serde::{Deserialize, Serialize};

use crate::coarsemap::{EAMap, Route};
use crate::entourage::Relation;
use crate::error::{CoarseError, Result};
use crate::ground::{Kind, Point, PointSet, Space};
use crate::structures::{Gen, Structure};
use crate::verdict::{Certificate, Verdict, Witness};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseSpace {
    pub space: Space,
    pub structure: Structure,
}

impl CoarseSpace {
    pub fn new(structure: Structure) -> CoarseSpace {
        CoarseSpace { space: structure.space(), structure }
    }

    pub fn check(&self) -> Result<()> {
        if self.structure.space() != self.space {
            return Err(CoarseError::SpaceMismatch("structure lives on a different space".into()));
        }
        self.structure.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrowCheck {
    pub map: EAMap,
    pub locally_proper: Verdict,
    pub preserves: Verdict,
}

impl ArrowCheck {
    pub fn is_coarse(&self) -> bool {
        self.locally_proper.is_in() && self.preserves.is_in()
    }

    /// Both conditions as one verdict.
    pub fn verdict(&self) -> Verdict {
        match Verdict::all([self.locally_proper.clone().context("not locally proper"), self.preserves.clone().context("does not preserve entourages")]) {
            Ok(parts) => Verdict::In(Certificate::Both { parts }),
            Err(v) => v,
        }
    }
}

fn claim(rule: &str) -> Verdict {
    Verdict::In(Certificate::Claim { rule: rule.into() })
}

fn combine(vs: Vec<Verdict>) -> Verdict {
    match Verdict::all(vs) {
        Ok(parts) if parts.len() == 1 => Verdict::In(parts.into_iter().next().expect("one")),
        Ok(parts) => Verdict::In(Certificate::Both { parts }),
        Err(v) => v,
    }
}

fn is_identity(f: &EAMap) -> bool {
    f.source() == f.target() && *f == EAMap::identity(f.source())
}

/// Local properness for every member of `y`: members have supports inside
/// the unital core up to finitely many points.
fn locally_proper(f: &EAMap, y: &Structure, budget: usize) -> Result<Verdict> {
    match y.unital_core() {
        Ok(u) => Ok(f.proper_on(&u)),
        Err(CoarseError::Unsupported(_)) => {
            let mut vs = Vec::new();
            for g in y.generators(budget)? {
                vs.push(crate::coarsemap::locally_proper_for(f, &g)?);
            }
            Ok(combine(vs))
        }
        Err(e) => Err(e),
    }
}

/// `(f × g)` sends every member of `y` into `x`.
fn preserves_pair(f: &EAMap, g: &EAMap, y: &Structure, x: &Structure, budget: usize) -> Result<Verdict> {
    if let Some(gens) = y.presentation()? {
        let mut vs = Vec::new();
        for gen in &gens {
            let v = match gen {
                Gen::Rel(r) => x.contains_pair(f, g, r)?,
                Gen::FiniteUnits(b) => {
                    let mut out = claim("unit images are connected");
                    if let Some(pts) = b.elements() {
                        for p in pts {
                            let (a, c) = (f.apply(&p)?, g.apply(&p)?);
                            if !x.connected(&a, &c)? {
                                out = Verdict::Out(Witness::Pair { pair: (a, c), fault: "images are not connected".into() });
                                break;
                            }
                        }
                    } else {
                        let missing = b.difference(&x.close_set(f, g)?);
                        if let Some(p) = missing.some_point() {
                            out = Verdict::Out(Witness::Pair { pair: (f.apply(&p)?, g.apply(&p)?), fault: "images are not connected".into() });
                        }
                    }
                    out
                }
                Gen::AllFinite(b) | Gen::TerminalBlock(b) => {
                    let img = f.image_set(b)?.union(&g.image_set(b)?);
                    let pushed = match gen {
                        Gen::AllFinite(_) => Gen::AllFinite(img),
                        _ => Gen::TerminalBlock(img),
                    };
                    if let Gen::TerminalBlock(_) = gen {
                        let lp = f.proper_on(b);
                        if !lp.is_in() {
                            vs.push(lp);
                            continue;
                        }
                        let lg = g.proper_on(b);
                        if !lg.is_in() {
                            vs.push(lg);
                            continue;
                        }
                    }
                    x.gen_in(x, &pushed)?
                }
            };
            if v.is_out() {
                return Ok(v);
            }
            vs.push(v);
        }
        return Ok(combine(vs));
    }
    // Structural shortcuts for sources without a presentation.
    match y {
        Structure::Meet { a, b } => {
            for part in [a, b] {
                let v = preserves_pair(f, g, part, x, budget)?;
                if v.is_in() {
                    return Ok(v);
                }
            }
        }
        Structure::Subspace { parent, .. } | Structure::Ideal { parent, .. } => {
            let v = preserves_pair(f, g, parent, x, budget)?;
            if v.is_in() {
                return Ok(v);
            }
        }
        Structure::Pullback { map, parent } | Structure::EqPullback { f: map, parent, .. } if f == g && map == f && parent.as_ref() == x => {
            return Ok(claim("a map preserves the structure pulled back along it"));
        }
        _ => {}
    }
    for r in y.generators(budget)? {
        let v = x.contains_pair(f, g, &r)?;
        if !v.is_in() {
            return Ok(v);
        }
    }
    Ok(Verdict::Unknown { depth: budget })
}

pub fn check_coarse(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<ArrowCheck> {
    f.check_source(&y.space)?;
    f.check_target(&x.space)?;
    let locally_proper = locally_proper(f, &y.structure, budget)?;
    let preserves = if is_identity(f) {
        y.structure.leq(&x.structure, budget)?
    } else {
        preserves_pair(f, f, &y.structure, &x.structure, budget)?
    };
    Ok(ArrowCheck { map: f.clone(), locally_proper, preserves })
}

fn require_coarse(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<()> {
    let c = check_coarse(f, y, x, budget)?;
    if c.verdict().is_out() {
        return Err(CoarseError::NotCoarse(format!("{:?}", c.verdict())));
    }
    Ok(())
}

/// Closeness reduces to the unital core and the carrier: `(f × g)(1_U)` is
/// a member and `f(y)` is connected to `g(y)` for every carrier point.
pub fn check_close(f: &EAMap, g: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<Verdict> {
    require_coarse(f, y, x, budget)?;
    require_coarse(g, y, x, budget)?;
    let u = match y.structure.unital_core() {
        Ok(u) => u,
        Err(CoarseError::Unsupported(_)) => return preserves_pair(f, g, &y.structure, &x.structure, budget),
        Err(e) => return Err(e),
    };
    let on_core = x.structure.contains_pair(f, g, &Relation::local_unit(&u))?;
    if !on_core.is_in() {
        return Ok(on_core.context("images of the unital core are not close"));
    }
    let missing = y.structure.carrier()?.difference(&x.structure.close_set(f, g)?);
    if let Some(p) = missing.some_point() {
        return Ok(Verdict::Out(Witness::Pair { pair: (f.apply(&p)?, g.apply(&p)?), fault: "images of a carrier point are not connected".into() }));
    }
    Ok(combine(vec![on_core, claim("images of every carrier point are connected")]))
}

// ---- colimits ----

/// Disjoint union with summands tagged `s0, s1, …`; a single summand is
/// returned unchanged.
pub fn coproduct(parts: &[CoarseSpace]) -> Result<(CoarseSpace, Vec<EAMap>)> {
    if parts.len() == 1 {
        return Ok((parts[0].clone(), vec![EAMap::identity(&parts[0].space)]));
    }
    let tagged: Vec<(String, Structure)> = parts.iter().enumerate().map(|(i, p)| (format!("s{i}"), p.structure.clone())).collect();
    let sum = Structure::sum(tagged.clone())?;
    let space = sum.space();
    let mut inj = Vec::new();
    for (tag, d) in &tagged {
        let route = |c: &str| -> Route {
            let id = format!("{tag}.{c}");
            match space.kind(&id) {
                Some(Kind::Ray) => Route::Ray { dst: id, a: 1, b: 0 },
                _ => Route::Point(Point::new(&id, 0)),
            }
        };
        inj.push(EAMap::relabel(&d.space(), &space, route)?);
    }
    Ok((CoarseSpace::new(sum), inj))
}

/// Adds what `(f × g)` pushes forward from each generator of `y`.
pub fn coequalizer(f: &EAMap, g: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize, depth: usize) -> Result<(CoarseSpace, EAMap)> {
    require_coarse(f, y, x, budget)?;
    require_coarse(g, y, x, budget)?;
    let gens = y.structure.presentation()?.ok_or_else(|| CoarseError::Unsupported("coequalizer of a source without a presentation".into()))?;
    let mut base = x.structure.clone();
    let mut extra: Vec<Relation> = Vec::new();
    for (i, gen) in gens.iter().enumerate() {
        match gen {
            Gen::Rel(r) => {
                if base.contains_pair(f, g, r)?.is_in() {
                    continue;
                }
                let pi = crate::coarsemap::PairImage::new(f, g, r)?;
                match pi.to_relation() {
                    Ok(img) => extra.push(img),
                    Err(_) => return Err(CoarseError::UnsupportedShear(format!("{i} ({r:?})"))),
                }
            }
            Gen::TerminalBlock(t) => {
                let img = f.image_set(t)?.union(&g.image_set(t)?);
                if base.gen_in(&base, &Gen::TerminalBlock(img.clone()))?.is_in() {
                    continue;
                }
                if base.unital_subspace(&img)?.is_in() {
                    base = Structure::quotient(base, img)?;
                } else {
                    return Err(CoarseError::Unsupported(format!("generator {i}: pushed block is not unital")));
                }
            }
            Gen::AllFinite(b) | Gen::FiniteUnits(b) => {
                let img = f.image_set(b)?.union(&g.image_set(b)?);
                let ok = match gen {
                    Gen::AllFinite(_) => base.gen_in(&base, &Gen::AllFinite(img.clone()))?.is_in(),
                    _ => b.is_subset(&base.close_set(f, g)?),
                };
                if ok {
                    continue;
                }
                let pts = b.elements().ok_or_else(|| CoarseError::Unsupported(format!("generator {i}: infinitely many finite pairs to add")))?;
                let pairs: Vec<(Point, Point)> = match gen {
                    Gen::AllFinite(_) => pts.iter().flat_map(|p| pts.iter().map(move |q| (p.clone(), q.clone()))).map(|(p, q)| (f.apply(&p).expect("source"), g.apply(&q).expect("source"))).collect(),
                    _ => pts.iter().map(|p| (f.apply(p).expect("source"), g.apply(p).expect("source"))).collect(),
                };
                extra.push(Relation::from_pairs(&x.space, &pairs)?);
            }
        }
    }
    let d = if extra.is_empty() { base } else { Structure::join(base, extra, depth)? };
    Ok((CoarseSpace::new(d), EAMap::identity(&x.space)))
}

/// `X ⊔_Z Y` as the coequalizer of the two injected maps out of `Z`.
pub fn pushout(f: &EAMap, g: &EAMap, z: &CoarseSpace, x: &CoarseSpace, y: &CoarseSpace, budget: usize, depth: usize) -> Result<(CoarseSpace, EAMap, EAMap)> {
    let (sum, inj) = coproduct(&[x.clone(), y.clone()])?;
    let a = inj[0].compose(f)?;
    let b = inj[1].compose(g)?;
    let (q, qmap) = coequalizer(&a, &b, z, &sum, budget, depth)?;
    Ok((q, qmap.compose(&inj[0])?, qmap.compose(&inj[1])?))
}

// ---- limits ----

/// The equalizer lives on `Y`'s ground set: its carrier is the set where
/// `f` and `g` land in connected points.
pub fn equalizer(f: &EAMap, g: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<(CoarseSpace, EAMap)> {
    require_coarse(f, y, x, budget)?;
    require_coarse(g, y, x, budget)?;
    let c = y.structure.carrier()?.intersect(&x.structure.close_set(f, g)?);
    let d = Structure::meet(Structure::subspace(y.structure.clone(), c)?, Structure::eq_pullback(f.clone(), g.clone(), x.structure.clone())?)?;
    Ok((CoarseSpace::new(d), EAMap::identity(&y.space)))
}

/// A componentwise injection `X → R`: rays interleave on the first ray
/// of `R`, points take the residues after them.
pub fn interleaving(x: &Space, r: &Space) -> Result<EAMap> {
    let rays: Vec<&str> = x.ray_ids().collect();
    let pts: Vec<&str> = x.pt_ids().collect();
    match r.ray_ids().next() {
        Some(dst) => {
            let k = (rays.len() + pts.len()).max(1) as u64;
            EAMap::relabel(x, r, |c| {
                if let Some(j) = rays.iter().position(|id| *id == c) {
                    Route::Ray { dst: dst.to_string(), a: k, b: j as i64 }
                } else {
                    let q = pts.iter().position(|id| *id == c).expect("component");
                    Route::Point(Point::new(dst, (rays.len() + q) as u64))
                }
            })
        }
        None => {
            let targets: Vec<&str> = r.pt_ids().collect();
            if !rays.is_empty() || targets.len() < pts.len() {
                return Err(CoarseError::NoMapToTerminated("no injection into the terminated space".into()));
            }
            EAMap::relabel(x, r, |c| Route::Point(Point::new(targets[pts.iter().position(|id| *id == c).expect("component")], 0)))
        }
    }
}

/// Is there a coarse map `X → R` into the terminated space `R`? Built as
/// an interleaving injection.
pub fn terminates(x: &CoarseSpace, r: &CoarseSpace, budget: usize) -> Result<(Verdict, Option<EAMap>)> {
    if !matches!(r.structure, Structure::Termination { .. } | Structure::Terminal { .. }) {
        return Err(CoarseError::Invalid("target is not a terminated space".into()));
    }
    let f = match interleaving(&x.space, &r.space) {
        Ok(f) => f,
        Err(CoarseError::NoMapToTerminated(m)) => return Ok((Verdict::Out(Witness::Nested { context: m, inner: Box::new(Witness::InfiniteSet) }), None)),
        Err(e) => return Err(e),
    };
    let c = check_coarse(&f, x, r, budget)?;
    let v = c.verdict();
    Ok((v, Some(f)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Product {
    pub object: CoarseSpace,
    /// `π_Y = id`
    pub to_y: EAMap,
    /// `π_T = τ ∘ f`
    pub to_t: EAMap,
}

/// `T × Y ≅ Y` when `T` is terminated and `Y` maps to it.
pub fn product_with_terminated(t: &CoarseSpace, y: &CoarseSpace, f: Option<&EAMap>, budget: usize) -> Result<Product> {
    if !matches!(t.structure, Structure::Termination { .. } | Structure::Terminal { .. }) {
        return Err(CoarseError::Invalid("first factor is not terminated".into()));
    }
    let f = match f {
        Some(f) => f.clone(),
        None => match terminates(y, t, budget)? {
            (v, Some(f)) if !v.is_out() => f,
            _ => return Err(CoarseError::NoMapToTerminated("no coarse interleaving into the terminated factor".into())),
        },
    };
    require_coarse(&f, y, t, budget).map_err(|e| CoarseError::NoMapToTerminated(e.to_string()))?;
    Ok(Product { object: y.clone(), to_y: EAMap::identity(&y.space), to_t: f })
}

// ---- functors ----

pub fn terminate(x: &CoarseSpace) -> CoarseSpace {
    CoarseSpace::new(Structure::termination(x.structure.clone()))
}

/// `X → Terminate(X)`, the identity on points.
pub fn tau(x: &CoarseSpace) -> EAMap {
    EAMap::identity(&x.space)
}

pub fn terminate_map(f: &EAMap) -> EAMap {
    f.clone()
}

pub fn connect(x: &CoarseSpace) -> CoarseSpace {
    CoarseSpace::new(Structure::connect(x.structure.clone()))
}

/// `Connect(X ⊔ ∗)`.
pub fn add_pt(x: &CoarseSpace) -> Result<CoarseSpace> {
    let pt = CoarseSpace::new(Structure::terminal(&Space::points(1)));
    if x.space.components().is_empty() {
        return Ok(pt);
    }
    let (sum, _) = coproduct(&[x.clone(), pt])?;
    Ok(connect(&sum))
}

pub fn quotient(x: &CoarseSpace, y: &PointSet) -> Result<(CoarseSpace, EAMap)> {
    Ok((CoarseSpace::new(Structure::quotient(x.structure.clone(), y.clone())?), EAMap::identity(&x.space)))
}

// ---- images ----

/// Points of `X` connected to some image point.
pub fn connected_hull(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace) -> Result<PointSet> {
    let img = f.image_set(&y.structure.carrier()?)?;
    x.structure.hull(&img)
}

/// `|Y|` with `Terminate(ℰ_Y) ∩ f*ℰ_X`.
pub fn image(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<(CoarseSpace, EAMap)> {
    require_coarse(f, y, x, budget)?;
    let d = Structure::meet(Structure::termination(y.structure.clone()), Structure::pullback(f.clone(), x.structure.clone())?)?;
    Ok((CoarseSpace::new(d), EAMap::identity(&y.space)))
}

/// The ideal push-forward of `ℰ_Y` restricted to the connected hull.
fn ideal_push(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace) -> Result<Structure> {
    let u = y.structure.unital_core()?;
    let c = y.structure.carrier()?;
    let mut s = f.image_set(&u)?;
    let cf = f.image_set(&c)?;
    if cf.is_finite() {
        s = s.union(&cf);
    }
    let hull = connected_hull(f, y, x)?;
    Structure::subspace(Structure::ideal(x.structure.clone(), s)?, hull)
}

pub fn coimage(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<(CoarseSpace, EAMap)> {
    require_coarse(f, y, x, budget)?;
    Ok((CoarseSpace::new(ideal_push(f, y, x)?), EAMap::identity(&x.space)))
}

pub fn is_monic(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<Verdict> {
    let (im, _) = image(f, y, x, budget)?;
    y.structure.structure_eq(&im.structure, budget)
}

pub fn is_epi(f: &EAMap, y: &CoarseSpace, x: &CoarseSpace, budget: usize) -> Result<Verdict> {
    require_coarse(f, y, x, budget)?;
    let hull = connected_hull(f, y, x)?;
    if let Some(p) = x.structure.carrier()?.difference(&hull).some_point() {
        return Ok(Verdict::Out(Witness::Unreached { point: p }));
    }
    let push = ideal_push(f, y, x)?;
    push.structure_eq(&x.structure, budget)
}

/// `f: X → Y` and `g: Y → X` are coarse and mutually inverse up to closeness.
pub fn equivalence_witness(x: &CoarseSpace, y: &CoarseSpace, f: &EAMap, g: &EAMap, budget: usize) -> Result<Verdict> {
    let cf = check_coarse(f, x, y, budget)?.verdict();
    if !cf.is_in() {
        return Ok(cf.context("f is not coarse"));
    }
    let cg = check_coarse(g, y, x, budget)?.verdict();
    if !cg.is_in() {
        return Ok(cg.context("g is not coarse"));
    }
    let gf = check_close(&g.compose(f)?, &EAMap::identity(&x.space), x, x, budget)?;
    if !gf.is_in() {
        return Ok(gf.context("g∘f is not close to the identity"));
    }
    let fg = check_close(&f.compose(g)?, &EAMap::identity(&y.space), y, y, budget)?;
    if !fg.is_in() {
        return Ok(fg.context("f∘g is not close to the identity"));
    }
    Ok(combine(vec![cf, cg, gf, fg]))
}

// ---- universal properties ----

/// A competing cone over a two-object diagram: an object `W` with maps to
/// the diagram's objects (for an equalizer, only the first is used).
#[derive(Clone, Debug)]
pub struct Cone {
    pub apex: CoarseSpace,
    pub legs: Vec<EAMap>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    /// A mediating map was found and is coarse.
    pub exists: Verdict,
    /// The mediator composes to the cone's legs up to closeness.
    pub commutes: Verdict,
    /// Any two mediators found are close.
    pub unique: Verdict,
}

impl ConeReport {
    pub fn passed(&self) -> bool {
        self.exists.is_in() && self.commutes.is_in() && self.unique.is_in()
    }
}

pub enum Construction<'a> {
    /// `Y` with `π_Y = id`, `π_T`.
    TerminatedProduct { t: &'a CoarseSpace, y: &'a CoarseSpace, product: &'a Product },
    /// Equalizer object of `f, g: Y → X`.
    Equalizer { f: &'a EAMap, g: &'a EAMap, y: &'a CoarseSpace, x: &'a CoarseSpace, object: &'a CoarseSpace },
}

/// Tests the universal property against each competing cone. For the
/// constructions here the mediator is forced (it is the `Y`-leg), so
/// uniqueness follows once it commutes.
pub fn verify_cone(c: &Construction, cones: &[Cone], budget: usize) -> Result<Vec<ConeReport>> {
    let mut out = Vec::new();
    for cone in cones {
        let report = match c {
            Construction::TerminatedProduct { t, y, product } => {
                let (b, a) = (&cone.legs[0], &cone.legs[1]);
                let m = a.clone();
                let exists = check_coarse(&m, &cone.apex, &product.object, budget)?.verdict();
                let commutes = if exists.is_in() {
                    let to_y = check_close(&product.to_y.compose(&m)?, a, &cone.apex, y, budget)?;
                    let to_t = check_close(&product.to_t.compose(&m)?, b, &cone.apex, t, budget)?;
                    combine(vec![to_y, to_t])
                } else {
                    Verdict::Unknown { depth: budget }
                };
                let unique = if commutes.is_in() { claim("π_Y is the identity, so mediators agree with the Y-leg up to closeness") } else { Verdict::Unknown { depth: budget } };
                ConeReport { exists, commutes, unique }
            }
            Construction::Equalizer { f, g, y, x, object } => {
                let h = &cone.legs[0];
                let fh = check_close(&f.compose(h)?, &g.compose(h)?, &cone.apex, x, budget)?;
                if !fh.is_in() {
                    out.push(ConeReport { exists: fh.context("cone does not equalize"), commutes: Verdict::Unknown { depth: budget }, unique: Verdict::Unknown { depth: budget } });
                    continue;
                }
                let exists = check_coarse(h, &cone.apex, object, budget)?.verdict();
                let commutes = if exists.is_in() { check_close(h, h, &cone.apex, y, budget)? } else { Verdict::Unknown { depth: budget } };
                let unique = if commutes.is_in() { claim("the inclusion is the identity on points, so mediators are determined up to closeness") } else { Verdict::Unknown { depth: budget } };
                ConeReport { exists, commutes, unique }
            }
        };
        out.push(report);
    }
    Ok(out)
}
