//! Finite coarse spaces, extensionally.
//!
//! A finite coarse structure is the downset of an equivalence relation, so
//! a space is a partition of `0..n` and a relation is an entourage iff it
//! stays inside blocks. [`normal_form_counterexample`] re-derives this from
//! the closure axioms by brute force. Everything else here is exhaustive:
//! limits and colimits are built directly and [`universal_counterexample`]
//! checks them against every competing cone up to a size bound.

use serde::{Deserialize, Serialize};

use crate::category::CoarseSpace;
use crate::coarsemap::{EAMap, Route};
use crate::error::{CoarseError, Result};
use crate::ground::{Point, Space};
use crate::structures::{Cluster, Structure};

/// Largest object the oracle accepts.
pub const MAX_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FinRepr", into = "FinRepr")]
pub struct FinSpace {
    n: usize,
    /// Block index of each point; blocks are numbered by first occurrence.
    labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct FinRepr {
    n: usize,
    partition: Vec<Vec<usize>>,
}

impl TryFrom<FinRepr> for FinSpace {
    type Error = CoarseError;
    fn try_from(r: FinRepr) -> Result<FinSpace> {
        FinSpace::new(r.n, r.partition)
    }
}

impl From<FinSpace> for FinRepr {
    fn from(s: FinSpace) -> FinRepr {
        FinRepr { n: s.n, partition: s.blocks() }
    }
}

impl FinSpace {
    pub fn new(n: usize, partition: Vec<Vec<usize>>) -> Result<FinSpace> {
        let mut raw = vec![usize::MAX; n];
        for (b, block) in partition.iter().enumerate() {
            if block.is_empty() {
                return Err(CoarseError::Invalid(format!("block {b} is empty")));
            }
            for &x in block {
                if x >= n {
                    return Err(CoarseError::Invalid(format!("point {x} out of range 0..{n}")));
                }
                if raw[x] != usize::MAX {
                    return Err(CoarseError::Invalid(format!("point {x} lies in two blocks")));
                }
                raw[x] = b;
            }
        }
        if let Some(x) = raw.iter().position(|&b| b == usize::MAX) {
            return Err(CoarseError::Invalid(format!("point {x} lies in no block")));
        }
        Ok(FinSpace::from_labels(&raw))
    }

    /// Points with equal labels share a block.
    pub fn from_labels(raw: &[usize]) -> FinSpace {
        let mut seen: Vec<usize> = Vec::new();
        let labels = raw
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i,
                None => {
                    seen.push(*l);
                    seen.len() - 1
                }
            })
            .collect();
        FinSpace { n: raw.len(), labels }
    }

    pub fn discrete(n: usize) -> FinSpace {
        FinSpace::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn connected(n: usize) -> FinSpace {
        FinSpace::from_labels(&vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }

    pub fn same(&self, x: usize, y: usize) -> bool {
        self.labels[x] == self.labels[y]
    }

    pub fn block_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (x, &b) in self.labels.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    /// First point of each block.
    fn reps(&self) -> Vec<usize> {
        self.blocks().iter().map(|b| b[0]).collect()
    }

    fn is_rep(&self, x: usize) -> bool {
        self.labels[..x].iter().all(|&l| l != self.labels[x])
    }

    /// Every partition of `0..n`.
    pub fn all(n: usize) -> Vec<FinSpace> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; n];
        fn go(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<FinSpace>) {
            if i == rgs.len() {
                out.push(FinSpace::from_labels(rgs));
                return;
            }
            for b in 0..=max {
                rgs[i] = b;
                go(i + 1, max.max(b + 1), rgs, out);
            }
        }
        go(0, 0, &mut rgs, &mut out);
        out
    }

    /// One partition of `0..n` per isomorphism class, blocks contiguous.
    pub fn shapes(n: usize) -> Vec<FinSpace> {
        fn parts(n: usize, max: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for k in (1..=n.min(max)).rev() {
                for mut rest in parts(n - k, k) {
                    rest.insert(0, k);
                    out.push(rest);
                }
            }
            out
        }
        parts(n, n)
            .into_iter()
            .map(|sizes| FinSpace::from_labels(&sizes.iter().enumerate().flat_map(|(b, &k)| std::iter::repeat(b).take(k)).collect::<Vec<_>>()))
            .collect()
    }

    /// Shapes of every size up to `n`.
    pub fn shapes_upto(n: usize) -> Vec<FinSpace> {
        (0..=n).flat_map(FinSpace::shapes).collect()
    }

    /// The same space as point components clustered by block.
    pub fn to_coarse_space(&self) -> Result<CoarseSpace> {
        let space = Space::points(self.n);
        let clusters = self
            .blocks()
            .into_iter()
            .map(|b| Cluster { components: b.iter().map(|x| format!("p{x}")).collect(), glue: Default::default() })
            .collect();
        Ok(CoarseSpace::new(Structure::metric_clusters(&space, clusters)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinMap(pub Vec<usize>);

impl FinMap {
    pub fn identity(n: usize) -> FinMap {
        FinMap((0..n).collect())
    }

    pub fn constant(n: usize, x: usize) -> FinMap {
        FinMap(vec![x; n])
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &FinMap) -> FinMap {
        FinMap(g.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn check(&self, src: &FinSpace, tgt: &FinSpace) -> Result<()> {
        if self.0.len() != src.n {
            return Err(CoarseError::SpaceMismatch(format!("map has {} entries for {} points", self.0.len(), src.n)));
        }
        match self.0.iter().find(|&&y| y >= tgt.n) {
            Some(y) => Err(CoarseError::SpaceMismatch(format!("target {y} out of range 0..{}", tgt.n))),
            None => Ok(()),
        }
    }

    /// Every map `0..src → 0..tgt`.
    pub fn all(src: usize, tgt: usize) -> Vec<FinMap> {
        let mut out = Vec::new();
        let mut cur = vec![0; src];
        fn go(i: usize, tgt: usize, cur: &mut Vec<usize>, out: &mut Vec<FinMap>) {
            if i == cur.len() {
                out.push(FinMap(cur.clone()));
                return;
            }
            for y in 0..tgt {
                cur[i] = y;
                go(i + 1, tgt, cur, out);
            }
        }
        go(0, tgt, &mut cur, &mut out);
        out
    }

    /// Every coarse map `src → tgt`.
    pub fn all_coarse(src: &FinSpace, tgt: &FinSpace) -> Vec<FinMap> {
        FinMap::all(src.n, tgt.n).into_iter().filter(|f| fin_coarse(f, src, tgt)).collect()
    }

    /// One coarse map per closeness class, sending blocks to block representatives.
    pub fn classes(src: &FinSpace, tgt: &FinSpace) -> Vec<FinMap> {
        let reps = tgt.reps();
        FinMap::all(src.block_count(), reps.len()).into_iter().map(|b| FinMap(src.labels.iter().map(|&l| reps[b.0[l]]).collect())).collect()
    }

    pub fn to_eamap(&self, src: &FinSpace, tgt: &FinSpace) -> Result<EAMap> {
        self.check(src, tgt)?;
        let (s, t) = (Space::points(src.n), Space::points(tgt.n));
        EAMap::relabel(&s, &t, |c| {
            let x: usize = c[1..].parse().expect("point id");
            Route::Point(Point::new(&format!("p{}", self.0[x]), 0))
        })
    }
}

pub fn fin_contains(s: &FinSpace, pairs: &[(usize, usize)]) -> bool {
    pairs.iter().all(|&(x, y)| x < s.n && y < s.n && s.same(x, y))
}

pub fn fin_close(tgt: &FinSpace, f: &FinMap, g: &FinMap) -> bool {
    f.0.len() == g.0.len() && f.0.iter().zip(&g.0).all(|(&a, &b)| tgt.same(a, b))
}

/// Local properness is vacuous on finite sets; coarse means block-preserving.
pub fn fin_coarse(f: &FinMap, src: &FinSpace, tgt: &FinSpace) -> bool {
    if f.check(src, tgt).is_err() {
        return false;
    }
    (0..src.n).all(|x| (0..x).all(|y| !src.same(x, y) || tgt.same(f.0[x], f.0[y])))
}

// ---- constructions ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinArrow {
    pub src: usize,
    pub dst: usize,
    pub map: FinMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub objects: Vec<FinSpace>,
    #[serde(default)]
    pub arrows: Vec<FinArrow>,
}

impl Diagram {
    pub fn check(&self) -> Result<()> {
        for (i, a) in self.arrows.iter().enumerate() {
            let (Some(s), Some(t)) = (self.objects.get(a.src), self.objects.get(a.dst)) else {
                return Err(CoarseError::Invalid(format!("arrow {i} names a missing object")));
            };
            if !fin_coarse(&a.map, s, t) {
                return Err(CoarseError::NotCoarse(format!("arrow {i}")));
            }
        }
        Ok(())
    }

    pub fn pair(y: &FinSpace, x: &FinSpace, f: &FinMap, g: &FinMap) -> Diagram {
        Diagram { objects: vec![y.clone(), x.clone()], arrows: vec![FinArrow { src: 0, dst: 1, map: f.clone() }, FinArrow { src: 0, dst: 1, map: g.clone() }] }
    }

    pub fn span(z: &FinSpace, x: &FinSpace, y: &FinSpace, f: &FinMap, g: &FinMap) -> Diagram {
        Diagram { objects: vec![z.clone(), x.clone(), y.clone()], arrows: vec![FinArrow { src: 0, dst: 1, map: f.clone() }, FinArrow { src: 0, dst: 2, map: g.clone() }] }
    }

    pub fn discrete(objects: &[FinSpace]) -> Diagram {
        Diagram { objects: objects.to_vec(), arrows: vec![] }
    }
}

/// An apex with one leg per diagram object: `apex → X_i` for limits,
/// `X_i → apex` for colimits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinCone {
    pub apex: FinSpace,
    pub legs: Vec<FinMap>,
}

/// Tuples ordered lexicographically, blocks componentwise.
pub fn fin_product(objects: &[FinSpace]) -> FinCone {
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for o in objects {
        tuples = tuples.into_iter().flat_map(|t| (0..o.n).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    cone_on(objects, tuples)
}

fn cone_on(objects: &[FinSpace], tuples: Vec<Vec<usize>>) -> FinCone {
    let keys: Vec<Vec<usize>> = tuples.iter().map(|t| t.iter().enumerate().map(|(i, &x)| objects[i].label(x)).collect()).collect();
    let apex = FinSpace::from_labels(&keys.iter().map(|k| keys.iter().position(|j| j == k).expect("self")).collect::<Vec<_>>());
    let legs = (0..objects.len()).map(|i| FinMap(tuples.iter().map(|t| t[i]).collect())).collect();
    FinCone { apex, legs }
}

/// The subspace where `f` and `g` land in one block, with its inclusion.
pub fn fin_equalizer(f: &FinMap, g: &FinMap, y: &FinSpace, x: &FinSpace) -> FinCone {
    let keep: Vec<usize> = (0..y.n).filter(|&p| x.same(f.0[p], g.0[p])).collect();
    let apex = FinSpace::from_labels(&keep.iter().map(|&p| y.label(p)).collect::<Vec<_>>());
    FinCone { apex, legs: vec![FinMap(keep)] }
}

/// Product of the objects cut down to the tuples every arrow relates.
pub fn fin_limit(d: &Diagram) -> FinCone {
    let full = fin_product(&d.objects);
    let tuples: Vec<Vec<usize>> = (0..full.apex.n)
        .map(|p| full.legs.iter().map(|l| l.0[p]).collect::<Vec<usize>>())
        .filter(|t| d.arrows.iter().all(|a| d.objects[a.dst].same(a.map.0[t[a.src]], t[a.dst])))
        .collect();
    cone_on(&d.objects, tuples)
}

pub fn fin_coproduct(objects: &[FinSpace]) -> FinCone {
    let mut labels = Vec::new();
    let mut legs = Vec::new();
    let mut base = 0;
    let mut offset = 0;
    for o in objects {
        labels.extend(o.labels.iter().map(|l| l + base));
        legs.push(FinMap((offset..offset + o.n).collect()));
        base += o.block_count();
        offset += o.n;
    }
    FinCone { apex: FinSpace::from_labels(&labels), legs }
}

/// Coarsest partition above `s` joining each given pair.
pub fn join_partition(s: &FinSpace, pairs: &[(usize, usize)]) -> FinSpace {
    let mut parent: Vec<usize> = (0..s.n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let unite = |a: usize, b: usize, p: &mut Vec<usize>| {
        let (ra, rb) = (find(p, a), find(p, b));
        p[ra.max(rb)] = ra.min(rb);
    };
    for x in 0..s.n {
        for y in 0..x {
            if s.same(x, y) {
                unite(x, y, &mut parent);
            }
        }
    }
    for &(a, b) in pairs {
        unite(a, b, &mut parent);
    }
    FinSpace::from_labels(&(0..s.n).map(|x| find(&mut parent, x)).collect::<Vec<_>>())
}

pub fn fin_coequalizer(f: &FinMap, g: &FinMap, y: &FinSpace, x: &FinSpace) -> FinCone {
    let pairs: Vec<(usize, usize)> = (0..y.n).map(|p| (f.0[p], g.0[p])).collect();
    FinCone { apex: join_partition(x, &pairs), legs: vec![FinMap::identity(x.n)] }
}

/// Coproduct of the objects with each arrow's source and target glued.
pub fn fin_colimit(d: &Diagram) -> FinCone {
    let sum = fin_coproduct(&d.objects);
    let mut pairs = Vec::new();
    for a in &d.arrows {
        for x in 0..d.objects[a.src].n {
            pairs.push((sum.legs[a.src].0[x], sum.legs[a.dst].0[a.map.0[x]]));
        }
    }
    FinCone { apex: join_partition(&sum.apex, &pairs), legs: sum.legs }
}

/// `X ⊔_Z Y` for `f: Z → X`, `g: Z → Y`; legs for `Z`, `X`, `Y`.
pub fn fin_pushout(f: &FinMap, g: &FinMap, z: &FinSpace, x: &FinSpace, y: &FinSpace) -> FinCone {
    let sum = fin_coproduct(&[x.clone(), y.clone()]);
    let pairs: Vec<(usize, usize)> = (0..z.n).map(|p| (sum.legs[0].0[f.0[p]], sum.legs[1].0[g.0[p]])).collect();
    let apex = join_partition(&sum.apex, &pairs);
    let from_z = sum.legs[0].compose(f);
    FinCone { apex, legs: vec![from_z, sum.legs[0].clone(), sum.legs[1].clone()] }
}

/// Every relation is an entourage of the termination: all local units
/// of a finite space are entourages.
pub fn fin_terminate(s: &FinSpace) -> FinSpace {
    FinSpace::connected(s.n)
}

// ---- universal-property oracle ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universal {
    Limit,
    Colimit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum Failure {
    /// The candidate's own legs are not coarse or do not commute.
    NotACone,
    NoMediator { competitor: FinCone },
    NotUnique { competitor: FinCone, first: FinMap, second: FinMap },
}

fn legs_commute(kind: Universal, d: &Diagram, c: &FinCone) -> bool {
    d.arrows.iter().all(|a| match kind {
        Universal::Limit => fin_close(&d.objects[a.dst], &a.map.compose(&c.legs[a.src]), &c.legs[a.dst]),
        Universal::Colimit => fin_close(&c.apex, &c.legs[a.dst].compose(&a.map), &c.legs[a.src]),
    })
}

fn legs_coarse(kind: Universal, d: &Diagram, c: &FinCone) -> bool {
    c.legs.len() == d.objects.len()
        && c.legs.iter().zip(&d.objects).all(|(l, o)| match kind {
            Universal::Limit => fin_coarse(l, &c.apex, o),
            Universal::Colimit => fin_coarse(l, o, &c.apex),
        })
}

/// Every competing cone with apex `w`, one per closeness class of legs.
fn competitors(kind: Universal, d: &Diagram, w: &FinSpace) -> Vec<FinCone> {
    let options: Vec<Vec<FinMap>> = d
        .objects
        .iter()
        .map(|o| match kind {
            Universal::Limit => FinMap::classes(w, o),
            Universal::Colimit => FinMap::classes(o, w),
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<FinMap> = Vec::new();
    fn go(i: usize, kind: Universal, d: &Diagram, w: &FinSpace, options: &[Vec<FinMap>], cur: &mut Vec<FinMap>, out: &mut Vec<FinCone>) {
        if i == options.len() {
            out.push(FinCone { apex: w.clone(), legs: cur.clone() });
            return;
        }
        for leg in &options[i] {
            cur.push(leg.clone());
            let ok = d.arrows.iter().filter(|a| a.src.max(a.dst) == i).all(|a| match kind {
                Universal::Limit => fin_close(&d.objects[a.dst], &a.map.compose(&cur[a.src]), &cur[a.dst]),
                Universal::Colimit => fin_close(w, &cur[a.dst].compose(&a.map), &cur[a.src]),
            });
            if ok {
                go(i + 1, kind, d, w, options, cur, out);
            }
            cur.pop();
        }
    }
    go(0, kind, d, w, &options, &mut cur, &mut out);
    out
}

/// Mediators `competitor → candidate` (limits) or `candidate → competitor`
/// (colimits), one per closeness class.
fn mediators(kind: Universal, d: &Diagram, cand: &FinCone, comp: &FinCone) -> Vec<FinMap> {
    let (src, tgt) = match kind {
        Universal::Limit => (&comp.apex, &cand.apex),
        Universal::Colimit => (&cand.apex, &comp.apex),
    };
    // Pointwise admissible targets, block representatives only.
    let admissible: Vec<Vec<usize>> = (0..src.n)
        .map(|p| {
            (0..tgt.n)
                .filter(|&q| tgt.is_rep(q))
                .filter(|&q| match kind {
                    Universal::Limit => (0..d.objects.len()).all(|i| d.objects[i].same(cand.legs[i].0[q], comp.legs[i].0[p])),
                    Universal::Colimit => (0..d.objects.len()).all(|i| (0..d.objects[i].n).filter(|&x| cand.legs[i].0[x] == p).all(|x| comp.apex.same(q, comp.legs[i].0[x]))),
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(p: usize, src: &FinSpace, tgt: &FinSpace, adm: &[Vec<usize>], cur: &mut Vec<usize>, out: &mut Vec<FinMap>) {
        if p == adm.len() {
            out.push(FinMap(cur.clone()));
            return;
        }
        for &q in &adm[p] {
            if (0..p).all(|r| !src.same(p, r) || tgt.same(cur[r], q)) {
                cur.push(q);
                go(p + 1, src, tgt, adm, cur, out);
                cur.pop();
            }
        }
    }
    go(0, src, tgt, &admissible, &mut cur, &mut out);
    out
}

/// Checks `candidate` against every competing cone whose apex has at most
/// `apex_bound` points. `None` means the universal property holds.
pub fn universal_counterexample(kind: Universal, d: &Diagram, candidate: &FinCone, apex_bound: usize) -> Result<Option<Failure>> {
    if d.objects.iter().any(|o| o.n > MAX_POINTS) || apex_bound > MAX_POINTS {
        return Err(CoarseError::SizeBound(format!("objects and apexes are limited to {MAX_POINTS} points")));
    }
    d.check()?;
    if !legs_coarse(kind, d, candidate) || !legs_commute(kind, d, candidate) {
        return Ok(Some(Failure::NotACone));
    }
    for w in FinSpace::shapes_upto(apex_bound) {
        for comp in competitors(kind, d, &w) {
            let ms = mediators(kind, d, candidate, &comp);
            let Some(first) = ms.first() else {
                return Ok(Some(Failure::NoMediator { competitor: comp }));
            };
            let tgt = match kind {
                Universal::Limit => &candidate.apex,
                Universal::Colimit => &comp.apex,
            };
            if let Some(second) = ms.iter().find(|m| !fin_close(tgt, first, m)) {
                return Ok(Some(Failure::NotUnique { competitor: comp, first: first.clone(), second: second.clone() }));
            }
        }
    }
    Ok(None)
}

pub fn fin_universal_oracle(kind: Universal, d: &Diagram, candidate: &FinCone, apex_bound: usize) -> Result<bool> {
    Ok(universal_counterexample(kind, d, candidate, apex_bound)?.is_none())
}

// ---- monic, epi, balance ----

/// `f∘h ≃ f∘h′ ⇒ h ≃ h′` for every pair of maps out of a probe space.
pub fn fin_is_monic(f: &FinMap, y: &FinSpace, x: &FinSpace, apex_bound: usize) -> bool {
    FinSpace::shapes_upto(apex_bound).iter().all(|w| {
        let hs = FinMap::classes(w, y);
        hs.iter().all(|h| hs.iter().all(|h2| !fin_close(x, &f.compose(h), &f.compose(h2)) || fin_close(y, h, h2)))
    })
}

/// `k∘f ≃ k′∘f ⇒ k ≃ k′` for every pair of maps into a probe space.
pub fn fin_is_epi(f: &FinMap, y: &FinSpace, x: &FinSpace, apex_bound: usize) -> bool {
    debug_assert_eq!(f.0.len(), y.n);
    FinSpace::shapes_upto(apex_bound).iter().all(|w| {
        let ks = FinMap::classes(x, w);
        ks.iter().all(|k| ks.iter().all(|k2| !fin_close(w, &k.compose(f), &k2.compose(f)) || fin_close(w, k, k2)))
    })
}

/// A coarse `g: X → Y` inverse to `f` up to closeness.
pub fn fin_inverse(f: &FinMap, y: &FinSpace, x: &FinSpace) -> Option<FinMap> {
    FinMap::classes(x, y).into_iter().find(|g| fin_close(y, &g.compose(f), &FinMap::identity(y.n)) && fin_close(x, &f.compose(g), &FinMap::identity(x.n)))
}

/// A coarse map between spaces of at most `bound` points that is monic and
/// epi but has no inverse up to closeness.
pub fn unbalanced_counterexample(bound: usize) -> Option<(FinSpace, FinSpace, FinMap)> {
    let spaces = FinSpace::shapes_upto(bound);
    for y in &spaces {
        for x in &spaces {
            for f in FinMap::all_coarse(y, x) {
                if fin_is_monic(&f, y, x, 2) && fin_is_epi(&f, y, x, 2) && fin_inverse(&f, y, x).is_none() {
                    return Some((y.clone(), x.clone(), f));
                }
            }
        }
    }
    None
}

// ---- partition normal form ----

/// Relations on `0..n` as bitmasks, bit `x·n + y` for `(x, y)`.
pub struct RelationLattice {
    n: usize,
    compose: Vec<u32>,
    transpose: Vec<u32>,
}

impl RelationLattice {
    pub fn new(n: usize) -> Result<RelationLattice> {
        if n > 3 {
            return Err(CoarseError::SizeBound("closure tables are built for at most 3 points".into()));
        }
        let size = 1usize << (n * n);
        let bit = |x: usize, y: usize| 1u32 << (x * n + y);
        let has = |m: usize, x: usize, y: usize| m & (1 << (x * n + y)) != 0;
        let mut compose = vec![0u32; size * size];
        let mut transpose = vec![0u32; size];
        for a in 0..size {
            for x in 0..n {
                for y in 0..n {
                    if has(a, x, y) {
                        transpose[a] |= bit(y, x);
                    }
                }
            }
            for b in 0..size {
                let mut c = 0;
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            if has(a, x, y) && has(b, y, z) {
                                c |= bit(x, z);
                            }
                        }
                    }
                }
                compose[a * size + b] = c;
            }
        }
        Ok(RelationLattice { n, compose, transpose })
    }

    fn size(&self) -> usize {
        1 << (self.n * self.n)
    }

    /// Smallest family containing `gens` and the diagonal singletons,
    /// closed under union, composition, transpose and subsets.
    pub fn closure(&self, gens: &[u32]) -> Vec<bool> {
        let size = self.size();
        let mut member = vec![false; size];
        let mut list: Vec<u32> = Vec::new();
        let mut queue: Vec<u32> = gens.to_vec();
        queue.extend((0..self.n).map(|x| 1u32 << (x * self.n + x)));
        queue.push(0);
        while let Some(a) = queue.pop() {
            if member[a as usize] {
                continue;
            }
            member[a as usize] = true;
            list.push(a);
            queue.push(self.transpose[a as usize]);
            let mut sub = a;
            while sub != 0 {
                sub = (sub - 1) & a;
                queue.push(sub);
            }
            for &b in &list {
                queue.push(a | b);
                queue.push(self.compose[a as usize * size + b as usize]);
                queue.push(self.compose[b as usize * size + a as usize]);
            }
        }
        member
    }

    /// The equivalence relation generated by `gens`, as a bitmask.
    pub fn equivalence(&self, gens: &[u32]) -> u32 {
        let n = self.n;
        let mut pairs = Vec::new();
        for g in gens {
            for x in 0..n {
                for y in 0..n {
                    if g & (1 << (x * n + y)) != 0 {
                        pairs.push((x, y));
                    }
                }
            }
        }
        let s = join_partition(&FinSpace::discrete(n), &pairs);
        let mut m = 0;
        for x in 0..n {
            for y in 0..n {
                if s.same(x, y) {
                    m |= 1 << (x * n + y);
                }
            }
        }
        m
    }
}

/// Checks that the closure of every single generator on `n ≤ 3` points is
/// the downset of its generated equivalence relation, and that on two
/// points a family's closure is the closure of its union. Returns the first
/// offending generator family.
pub fn normal_form_counterexample(n: usize) -> Result<Option<Vec<u32>>> {
    let lat = RelationLattice::new(n)?;
    let size = lat.size() as u32;
    for g in 0..size {
        let m = lat.equivalence(&[g]);
        let c = lat.closure(&[g]);
        if (0..size).any(|e| c[e as usize] != (e & !m == 0)) {
            return Ok(Some(vec![g]));
        }
    }
    let pairs = RelationLattice::new(n.min(2))?;
    let psize = pairs.size() as u32;
    for a in 0..psize {
        for b in 0..a {
            if pairs.closure(&[a, b]) != pairs.closure(&[a | b]) {
                return Ok(Some(vec![a, b]));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, blocks: &[&[usize]]) -> FinSpace {
        FinSpace::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn membership_closeness_coarseness() {
        let d = FinSpace::discrete(3);
        assert!(!fin_contains(&d, &[(0, 1)]));
        assert!(fin_contains(&d, &[(2, 2)]));
        let one = FinSpace::connected(3);
        let f = FinMap(vec![0, 2, 1]);
        assert!(fin_close(&one, &f, &FinMap::constant(3, 1)));
        assert!(fin_coarse(&f, &FinSpace::connected(3), &one));
        assert!(!fin_coarse(&FinMap::identity(3), &one, &d));
    }

    #[test]
    fn partitions_and_shapes() {
        assert_eq!(FinSpace::all(4).len(), 15);
        assert_eq!(FinSpace::shapes(4).len(), 5);
        assert_eq!(FinSpace::shapes_upto(4).len(), 12);
        assert!(FinSpace::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(FinSpace::new(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn json_form() {
        let s: FinSpace = serde_json::from_str(r#"{"n":4,"partition":[[0,1],[2],[3]]}"#).unwrap();
        assert_eq!(s.blocks(), vec![vec![0, 1], vec![2], vec![3]]);
        let back: FinSpace = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn product_blocks() {
        // a b c = 0 1 2, d e = 0 1
        let p = fin_product(&[space(3, &[&[0, 1], &[2]]), space(2, &[&[0], &[1]])]);
        let tuples: Vec<(usize, usize)> = (0..p.apex.n()).map(|i| (p.legs[0].0[i], p.legs[1].0[i])).collect();
        let mut blocks: Vec<Vec<(usize, usize)>> = p.apex.blocks().iter().map(|b| b.iter().map(|&i| tuples[i]).collect()).collect();
        blocks.sort();
        assert_eq!(blocks, vec![vec![(0, 0), (1, 0)], vec![(0, 1), (1, 1)], vec![(2, 0)], vec![(2, 1)]]);
    }

    #[test]
    fn equalizer_and_coequalizer() {
        let y = FinSpace::discrete(3);
        let f = FinMap(vec![0, 1, 2]);
        assert_eq!(fin_equalizer(&f, &f, &y, &y).apex, y);
        let x = FinSpace::discrete(2);
        let c = fin_coequalizer(&FinMap::constant(1, 0), &FinMap::constant(1, 1), &FinSpace::discrete(1), &x);
        assert!(c.apex.same(0, 1));
    }

    #[test]
    fn wrong_product_is_caught() {
        let a = FinSpace::connected(2);
        let b = FinSpace::discrete(1);
        let d = Diagram::discrete(&[a.clone(), b.clone()]);
        let good = fin_product(&[a, b]);
        assert!(fin_universal_oracle(Universal::Limit, &d, &good, 3).unwrap());
        let bad = FinCone { apex: FinSpace::discrete(good.apex.n()), legs: good.legs.clone() };
        assert!(matches!(universal_counterexample(Universal::Limit, &d, &bad, 3).unwrap(), Some(Failure::NotUnique { .. })));
    }

    #[test]
    fn pushout_square() {
        let z = FinSpace::discrete(2);
        let x = FinSpace::discrete(2);
        let y = FinSpace::discrete(1);
        let (f, g) = (FinMap::identity(2), FinMap::constant(2, 0));
        let p = fin_pushout(&f, &g, &z, &x, &y);
        assert_eq!(p.apex.block_count(), 1);
        assert!(fin_universal_oracle(Universal::Colimit, &Diagram::span(&z, &x, &y, &f, &g), &p, 3).unwrap());
    }

    #[test]
    fn size_bound() {
        let d = Diagram::discrete(&[FinSpace::discrete(6)]);
        let c = fin_limit(&d);
        assert!(matches!(universal_counterexample(Universal::Limit, &d, &c, 2), Err(CoarseError::SizeBound(_))));
    }

    #[test]
    fn normal_form_on_two_points() {
        assert_eq!(normal_form_counterexample(2).unwrap(), None);
    }

    #[test]
    fn banded_embedding_agrees() {
        let y = space(3, &[&[0, 1], &[2]]);
        let x = space(2, &[&[0], &[1]]);
        let (by, bx) = (y.to_coarse_space().unwrap(), x.to_coarse_space().unwrap());
        for f in FinMap::all(3, 2) {
            let ea = f.to_eamap(&y, &x).unwrap();
            let banded = crate::category::check_coarse(&ea, &by, &bx, 8).unwrap().is_coarse();
            assert_eq!(banded, fin_coarse(&f, &y, &x), "{f:?}");
        }
    }
}
