//! Independent re-verification of certificates and witnesses.
//!
//! Checks combine the window oracle (explicit pairs up to a bound) with
//! the structural facts each certificate names. They never call the
//! membership decision for the structure under test; they only descend
//! into parents the certificate points at.

use crate::coarsemap::{normalize_piece, pieces_of, EAMap, Family, Piece, Track};
use crate::entourage::Relation;
use crate::error::Result;
use crate::ground::{Point, PointSet};
use crate::upset::UpSet;
use crate::verdict::{Certificate, Expr, Witness};
use crate::window;

use super::{metric, Structure};

const WINDOW: u64 = 96;

fn window_for_piece(p: &Piece) -> u64 {
    let extra = match p {
        Piece::Family(f) => f.support.threshold() + 2 * f.support.period(),
        Piece::Rect(r) => r.left.max_threshold().max(r.right.max_threshold()),
    };
    WINDOW + 2 * extra
}

fn canonical(d: &Structure, rel: &Relation) -> Vec<Piece> {
    let space = d.space();
    pieces_of(rel).into_iter().flat_map(|p| normalize_piece(p, &space)).collect()
}

/// Does `cert` show that `rel` is a member of `d`?
pub fn check_certificate(d: &Structure, rel: &Relation, cert: &Certificate) -> Result<bool> {
    if let Structure::Join { parent, gens, .. } = d {
        return check_join(d, parent, gens, rel, cert);
    }
    check_pieces(d, &canonical(d, rel), cert)
}

/// Does `cert` show that every piece is a member of `d`?
pub fn check_pieces(d: &Structure, pieces: &[Piece], cert: &Certificate) -> Result<bool> {
    let Certificate::Pieces { pieces: listed } = cert else {
        return Ok(false);
    };
    for p in pieces {
        if !listed.iter().any(|(q, _)| q == p) {
            return Ok(false);
        }
    }
    for (q, c) in listed {
        if !check_piece(d, q, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every pair of `p` in the window lies in one of `subs`.
fn covers(p: &Piece, subs: &[&Piece]) -> bool {
    let n = window_for_piece(p);
    p.enumerate(n).iter().all(|(x, y)| subs.iter().any(|q| q.member(x, y)))
}

fn pair_connected(d: &Structure, x: &Point, y: &Point) -> Result<bool> {
    match d {
        Structure::Metric { space, clusters } => Ok(metric::distance(space, clusters, x, y).is_some()),
        _ => d.connected(x, y),
    }
}

fn check_piece(d: &Structure, p: &Piece, cert: &Certificate) -> Result<bool> {
    match cert {
        Certificate::ConnectedPairs { pairs } => {
            let Some(ps) = p.pairs() else { return Ok(false) };
            for (x, y) in &ps {
                if !pairs.contains(&(x.clone(), y.clone())) || !pair_connected(d, x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Certificate::Pieces { pieces } => {
            let subs: Vec<&Piece> = pieces.iter().map(|(q, _)| q).collect();
            if !covers(p, &subs) {
                return Ok(false);
            }
            for (q, c) in pieces {
                if !check_piece(d, q, c)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => match p {
            Piece::Family(f) => check_family(d, f, cert),
            Piece::Rect(_) => Ok(false),
        },
    }
}

fn pushed(f: &EAMap, g: &EAMap, fam: &Family) -> Option<Family> {
    let (m1, s) = f.compose_track(&fam.src);
    let (m2, t) = g.compose_track(&fam.dst);
    let m = m1.max(m2);
    // Parameters below the tail threshold must not occur.
    if !fam.support.intersect(&UpSet::range(0, m.saturating_sub(1))).is_empty() && m > 0 {
        return None;
    }
    Some(Family::new(s, t, fam.support.clone()))
}

fn near_ok(parent: &Structure, set: &PointSet, target: &PointSet, radius: Option<u64>) -> Result<bool> {
    if let (Some(r), Structure::Metric { space, clusters }) = (radius, parent) {
        let n = WINDOW + set.max_threshold() + target.max_threshold();
        let ts = target.enumerate(n + r);
        return Ok(set.enumerate(n).iter().all(|x| ts.iter().any(|y| metric::distance(space, clusters, x, y).is_some_and(|dist| dist <= r))));
    }
    let rest = set.difference(&parent.near_core(target)?);
    Ok(rest.is_finite() && rest.is_subset(&parent.hull(target)?))
}

fn check_family(d: &Structure, f: &Family, cert: &Certificate) -> Result<bool> {
    let space = d.space();
    if f.support.is_empty() {
        return Ok(true);
    }
    let n = window_for_piece(&Piece::Family(f.clone()));
    Ok(match (d, cert) {
        (Structure::Terminal { .. }, Certificate::Proper) => !f.src.is_const() && !f.dst.is_const(),
        (Structure::Metric { space, clusters }, Certificate::Width { bound }) => {
            let same = matches!((&f.src, &f.dst), (Track::Affine { ray: r1, a: a1, .. }, Track::Affine { ray: r2, a: a2, .. }) if r1 == r2 && a1 == a2);
            same && f.pairs_upto(n).iter().all(|(x, y)| metric::distance(space, clusters, x, y).is_some_and(|dist| dist <= *bound))
        }
        (Structure::InitialUnital { .. } | Structure::InitialConnUni { .. }, Certificate::Diagonal) => {
            f.support.is_subset(&f.src.agree(&f.dst)) && f.pairs_upto(n).iter().all(|(x, y)| x == y)
        }
        (Structure::Subspace { parent, set }, Certificate::Confined { within, inner }) => {
            within == set && f.left_support(&space).is_subset(set) && f.right_support(&space).is_subset(set) && check_family(parent, f, inner)?
        }
        (Structure::Pullback { map, parent }, Certificate::Pulled { inner, .. }) => match pushed(map, map, f) {
            Some(g) => check_family(parent, &g, inner)?,
            None => false,
        },
        (Structure::EqPullback { f: a, g: b, parent }, Certificate::Both { parts }) if parts.len() == 3 => {
            let maps = [(a, a), (b, b), (a, b)];
            let mut ok = true;
            for ((m1, m2), c) in maps.iter().zip(parts) {
                let Certificate::Pulled { inner, .. } = c else { return Ok(false) };
                ok = ok && match pushed(m1, m2, f) {
                    Some(g) => check_family(parent, &g, inner)?,
                    None => false,
                };
            }
            ok
        }
        (Structure::Termination { parent }, Certificate::UnitalSupports { left, right }) => {
            let l = f.left_support(&space);
            let r = f.right_support(&space);
            check_certificate(parent, &Relation::local_unit(&l), left)? && check_certificate(parent, &Relation::local_unit(&r), right)?
        }
        (Structure::Ideal { parent, set }, Certificate::Both { parts }) if parts.len() == 2 => match (&parts[0], &parts[1]) {
            (Certificate::Parent { inner }, Certificate::NearSupport { set: s, target, radius }) => {
                target == set && f.left_support(&space).is_subset(s) && near_ok(parent, s, target, *radius)? && check_family(parent, f, inner)?
            }
            _ => false,
        },
        (Structure::Quotient { parent, .. }, Certificate::Parent { inner }) => check_family(parent, f, inner)?,
        (Structure::Quotient { parent, set }, Certificate::Both { parts }) if parts.len() == 2 => match (&parts[0], &parts[1]) {
            (Certificate::NearSupport { set: l, target: t1, radius: r1 }, Certificate::NearSupport { set: r, target: t2, radius: r2 }) => {
                t1 == set
                    && t2 == set
                    && f.left_support(&space).is_subset(l)
                    && f.right_support(&space).is_subset(r)
                    && near_ok(parent, l, set, *r1)?
                    && near_ok(parent, r, set, *r2)?
            }
            _ => false,
        },
        (Structure::Connect { parent } | Structure::Join { parent, .. }, Certificate::Parent { inner }) => check_family(parent, f, inner)?,
        (Structure::Sum { parts }, Certificate::Summand { index, inner }) => match Structure::family_to_part(parts, f) {
            Some((j, local)) => j == *index && check_family(&parts[j].structure, &local, inner)?,
            None => false,
        },
        (Structure::Meet { a, b }, Certificate::Both { parts }) if parts.len() == 2 => check_family(a, f, &parts[0])? && check_family(b, f, &parts[1])?,
        (_, Certificate::Pieces { .. }) => check_piece(d, &Piece::Family(f.clone()), cert)?,
        _ => false,
    })
}

fn check_join(d: &Structure, parent: &Structure, gens: &[Relation], rel: &Relation, cert: &Certificate) -> Result<bool> {
    if !d.join_is_trivial()? {
        return match cert {
            Certificate::Parent { inner } => check_certificate(parent, rel, inner),
            Certificate::Both { parts } => {
                let prims = rel.primitives();
                if prims.len() != parts.len() {
                    return Ok(false);
                }
                for (q, c) in prims.iter().zip(parts) {
                    let ok = match c {
                        Certificate::Parent { inner } => check_certificate(parent, q, inner)?,
                        Certificate::Expression { expr, .. } => q.subset_of(&expr.eval()) && leaves_ok(parent, gens, expr)?,
                        _ => false,
                    };
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        };
    }
    check_pieces(d, &canonical(d, rel), cert)
}

fn leaves_ok(parent: &Structure, gens: &[Relation], e: &Expr) -> Result<bool> {
    Ok(match e {
        Expr::Gen { relation, .. } => {
            gens.iter().any(|g| g.set_eq(relation) || g.transpose().set_eq(relation)) || parent.contains(relation)?.certificate().is_some_and(|c| check_certificate(parent, relation, c).unwrap_or(false))
        }
        Expr::Union { items } => {
            for i in items {
                if !leaves_ok(parent, gens, i)? {
                    return Ok(false);
                }
            }
            true
        }
        Expr::Compose { left, right } => leaves_ok(parent, gens, left)? && leaves_ok(parent, gens, right)?,
        Expr::Transpose { inner } | Expr::SubsetOf { target: inner } => leaves_ok(parent, gens, inner)?,
    })
}

// ---- witnesses ----

/// Does `w` show that `rel` is not a member of `d`?
pub fn confirm_witness(d: &Structure, rel: &Relation, w: &Witness) -> Result<bool> {
    confirm_pieces_witness(d, &canonical(d, rel), w)
}

fn in_pieces(pieces: &[Piece], x: &Point, y: &Point) -> bool {
    pieces.iter().any(|p| p.member(x, y))
}

/// Does `w` show that the union of `pieces` is not a member of `d`?
pub fn confirm_pieces_witness(d: &Structure, pieces: &[Piece], w: &Witness) -> Result<bool> {
    Ok(match w {
        Witness::InfiniteFiber { point, side } => {
            let count = |n: u64| -> usize {
                pieces
                    .iter()
                    .flat_map(|p| p.enumerate(n))
                    .filter(|(x, y)| match side {
                        crate::verdict::Side::Left => x == point,
                        crate::verdict::Side::Right => y == point,
                    })
                    .count()
            };
            window::grows(count, WINDOW)
        }
        Witness::Pair { pair: (x, y), .. } => in_pieces(pieces, x, y) && !pair_connected(d, x, y)?,
        Witness::InfiniteSet => {
            matches!(d, Structure::Initial { .. } | Structure::InitialConn { .. }) && pieces.iter().any(|p| !p.is_finite())
        }
        Witness::Nested { inner, .. } => match inner.as_ref() {
            Witness::Unbounded { family } => confirm_family(d, pieces, family)?,
            _ => {
                if confirm_pieces_witness(d, pieces, inner)? {
                    true
                } else if let Structure::Join { parent, .. } = d {
                    let mut ok = false;
                    for m in [Structure::connect((**parent).clone()), Structure::metric(&d.space())] {
                        ok = ok || confirm_pieces_witness(&m, pieces, inner)?;
                    }
                    ok
                } else {
                    false
                }
            }
        },
        Witness::Unbounded { family } => confirm_family(d, pieces, family)?,
        Witness::NotUnital { inner, .. } => confirm_pieces_witness(d, pieces, inner)?,
        _ => false,
    })
}

/// The family is infinite, lies in the tested pieces, and avoids the core.
fn confirm_family(d: &Structure, pieces: &[Piece], fam: &Family) -> Result<bool> {
    if fam.support.is_finite() {
        return Ok(false);
    }
    let n = WINDOW + fam.support.threshold();
    if !fam.pairs_upto(n).iter().all(|(x, y)| in_pieces(pieces, x, y)) {
        return Ok(false);
    }
    if let Structure::Metric { space, clusters } = d {
        // Widths along the family must grow without bound.
        let widths: Vec<Option<u64>> = fam.pairs_upto(n).iter().map(|(x, y)| metric::distance(space, clusters, x, y)).collect();
        let grows = widths.windows(2).any(|w| w[0] < w[1]) && widths.last().is_some_and(|w| w.is_none_or(|v| v > widths[0].unwrap_or(0)));
        return Ok(grows);
    }
    Ok(fam.support.is_disjoint(&d.core(&fam.src, &fam.dst)?))
}

/// Does `w` show that `d1 ⊄ d2`?
pub fn confirm_separation(d1: &Structure, d2: &Structure, w: &Witness) -> Result<bool> {
    let w = match w {
        Witness::Nested { inner, .. } => inner.as_ref(),
        w => w,
    };
    match w {
        Witness::Separating { probe, inner } => {
            let space = d1.space();
            let pieces = normalize_piece(probe.clone(), &space);
            Ok(d1.contains_pieces(&pieces)?.is_in() && confirm_pieces_witness(d2, &pieces, inner)?)
        }
        Witness::Nested { .. } => confirm_separation(d1, d2, w),
        _ => Ok(false),
    }
}
