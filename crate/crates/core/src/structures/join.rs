//! Membership in a structure generated by a parent and extra relations.
//!
//! Sound both ways but incomplete: In comes from an explicit expression
//! over the generators, Out from an upper bound that already rejects the
//! relation. Everything else is Unknown at the search depth.

use crate::entourage::Relation;
use crate::error::Result;
use crate::verdict::{Certificate, Expr, Verdict, Witness};

use super::Structure;

/// Upper bounds for `Join(parent, gens)`: structures containing the parent
/// and every generator.
fn upper_bounds(parent: &Structure, gens: &[Relation]) -> Result<Vec<Structure>> {
    let space = parent.space();
    let mut cands = vec![Structure::connect(parent.clone())];
    if !space.is_finite() {
        cands.push(Structure::metric(&space));
    }
    let mut out = Vec::new();
    for m in cands {
        let mut ok = parent.leq(&m, 4)?.is_in();
        for g in gens {
            ok = ok && m.contains(g)?.is_in();
        }
        if ok {
            out.push(m);
        }
    }
    Ok(out)
}

/// Alphabet for the word search: generators, transposes, and the parent's
/// relation generators.
fn alphabet(parent: &Structure, gens: &[Relation]) -> Result<Vec<(String, Relation)>> {
    let mut out = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        out.push((format!("g{i}"), g.clone()));
        let t = g.transpose();
        if !t.set_eq(g) {
            out.push((format!("g{i}ᵀ"), t));
        }
    }
    if let Some(pres) = parent.presentation()? {
        for (i, g) in pres.into_iter().enumerate() {
            if let super::Gen::Rel(r) = g {
                out.push((format!("p{i}"), r));
            }
        }
    }
    if let Ok(c) = parent.carrier() {
        out.push(("1".into(), Relation::local_unit(&c)));
    }
    Ok(out)
}

fn gen_expr(name: &str, r: &Relation) -> Expr {
    Expr::Gen { name: name.to_string(), relation: r.clone() }
}

pub(super) fn contains(d: &Structure, rel: &Relation) -> Result<Verdict> {
    let Structure::Join { parent, gens, depth } = d else {
        return d.contains(rel);
    };
    if let Some(w) = rel.improper_witness() {
        return Ok(Verdict::Out(w));
    }
    if parent.contains(rel)?.is_in() {
        return Ok(Verdict::In(Certificate::Parent { inner: Box::new(parent.contains(rel)?.certificate().cloned().expect("in")) }));
    }
    for m in upper_bounds(parent, gens)? {
        if let Verdict::Out { witness } = m.contains(rel)? {
            return Ok(Verdict::Out(Witness::Nested { context: format!("rejected by the {} upper bound", m.name()), inner: Box::new(witness) }));
        }
    }
    let letters = alphabet(parent, gens)?;
    let mut words: Vec<(Expr, Relation)> = letters.iter().map(|(n, r)| (gen_expr(n, r), r.clone())).collect();
    let mut frontier = words.clone();
    for _ in 1..*depth {
        let mut next = Vec::new();
        for (e, r) in &frontier {
            for (n, g) in &letters {
                let c = r.compose(g);
                if c.is_empty() || words.iter().any(|(_, w)| w.set_eq(&c)) || next.iter().any(|(_, w): &(Expr, Relation)| w.set_eq(&c)) {
                    continue;
                }
                next.push((Expr::Compose { left: Box::new(e.clone()), right: Box::new(gen_expr(n, g)) }, c));
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
        if words.len() > 4096 {
            break;
        }
    }
    // Each primitive must be covered by a single word or lie in the parent.
    let mut parts = Vec::new();
    for q in rel.primitives() {
        if let Some(c) = parent.contains(&q)?.certificate() {
            parts.push(Certificate::Parent { inner: Box::new(c.clone()) });
            continue;
        }
        match words.iter().find(|(_, w)| q.subset_of(w)) {
            Some((e, _)) => parts.push(Certificate::Expression { expr: Expr::SubsetOf { target: Box::new(e.clone()) }, leaves: leaf_certs(parent, gens, e)? }),
            None => return Ok(Verdict::Unknown { depth: *depth }),
        }
    }
    Ok(Verdict::In(Certificate::Both { parts }))
}

/// Membership evidence for each leaf of an expression.
fn leaf_certs(parent: &Structure, gens: &[Relation], e: &Expr) -> Result<Vec<Certificate>> {
    let mut out = Vec::new();
    collect(parent, gens, e, &mut out)?;
    Ok(out)
}

fn collect(parent: &Structure, gens: &[Relation], e: &Expr, out: &mut Vec<Certificate>) -> Result<()> {
    match e {
        Expr::Gen { relation, .. } => {
            if gens.iter().any(|g| g.set_eq(relation) || g.transpose().set_eq(relation)) {
                out.push(Certificate::Claim { rule: "generator".into() });
            } else if let Some(c) = parent.contains(relation)?.certificate() {
                out.push(Certificate::Parent { inner: Box::new(c.clone()) });
            }
            Ok(())
        }
        Expr::Union { items } => items.iter().try_for_each(|i| collect(parent, gens, i, out)),
        Expr::Compose { left, right } => {
            collect(parent, gens, left, out)?;
            collect(parent, gens, right, out)
        }
        Expr::Transpose { inner } | Expr::SubsetOf { target: inner } => collect(parent, gens, inner, out),
    }
}
