use clap::{Subcommand, ValueEnum};
use coarse_core::category::{self, CoarseSpace};
use coarse_core::coarsemap::EAMap;
use coarse_core::finite::{self, Universal};
use coarse_core::structures;
use coarse_core::verdict::Verdict;
use serde_json::{json, Value};

use crate::workspace::Workspace;
use crate::CliError;

pub struct Settings {
    pub depth: usize,
    pub window: u64,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Limit,
    Colimit,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Query {
    /// Is `f: Y → X` coarse?
    CheckCoarse { f: String, y: String, x: String },
    /// Are coarse maps `f, g: Y → X` close?
    CheckClose { f: String, g: String, y: String, x: String },
    /// Is relation `e` (a name or `Band(S,k)`, `Band(src,dst,S,k)`, `Pair(x,y)`, `Unit`) an entourage of `d`?
    Contains { d: String, e: String },
    /// Do structures `d` and `e` have the same entourages?
    StructureEq { d: String, e: String },
    /// Equalizer of `f, g: Y → X`; binds `result` and `result.map`.
    Equalizer { f: String, g: String, y: String, x: String },
    /// Coequalizer of `f, g: Y → X`; binds `result` and `result.map`.
    Coequalizer { f: String, g: String, y: String, x: String },
    /// `X/[S]` for a named set or `comp:upset` clauses; binds `result`.
    Quotient { x: String, set: String },
    /// Monic/epi verdicts, image and coimage of `f: Y → X`.
    Classify { f: String, y: String, x: String },
    /// Binds `result` to `Terminate(X)`.
    Terminate { x: String },
    /// Are `f: X → Y` and `g: Y → X` mutually inverse up to closeness?
    WitnessEquivalence { x: String, y: String, f: String, g: String },
    /// First `levels` sets of a filtration by unital subspaces absorbing every unital subspace.
    SigmaFiltration {
        d: String,
        #[arg(default_value_t = 4)]
        levels: usize,
    },
    /// Exhaustive universal-property check of a finite diagram's limit and colimit.
    FinOracle {
        diagram: String,
        #[arg(long, value_enum, default_value_t = OracleKind::Both)]
        kind: OracleKind,
        /// Largest competing apex.
        #[arg(long, default_value_t = 3)]
        apex: usize,
    },
    /// Runs queries in order; constructions bind `result` for later ones.
    Run { queries: Vec<String> },
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

fn built(result: Value) -> Value {
    json!({ "verdict": "In", "result": result })
}

fn bind(ws: &mut Workspace, space: &CoarseSpace, map: Option<&EAMap>) {
    ws.structures.insert("result".into(), space.structure.clone());
    if let Some(m) = map {
        ws.maps.insert("result.map".into(), m.clone());
    }
}

fn pair(ws: &Workspace, f: &str, g: &str, y: &str, x: &str) -> Result<(EAMap, EAMap, CoarseSpace, CoarseSpace), CliError> {
    Ok((ws.map(f)?.clone(), ws.map(g)?.clone(), ws.coarse_space(y)?, ws.coarse_space(x)?))
}

pub fn run(ws: &mut Workspace, s: &Settings, q: &Query) -> Result<Value, CliError> {
    let mut report = match q {
        Query::CheckCoarse { f, y, x } => {
            let c = category::check_coarse(ws.map(f)?, &ws.coarse_space(y)?, &ws.coarse_space(x)?, s.budget)?;
            let mut r = verdict_json(&c.verdict());
            r["locally_proper"] = verdict_json(&c.locally_proper);
            r["preserves"] = verdict_json(&c.preserves);
            r
        }
        Query::CheckClose { f, g, y, x } => {
            let (f, g, y, x) = pair(ws, f, g, y, x)?;
            verdict_json(&category::check_close(&f, &g, &y, &x, s.budget)?)
        }
        Query::Contains { d, e } => {
            let d = ws.structure(d)?;
            let rel = ws.relation(e, &d.space())?;
            let v = d.contains(&rel)?;
            let audited = match &v {
                Verdict::In { certificate } => Some(structures::check_certificate(d, &rel, certificate)?),
                Verdict::Out { witness } => Some(structures::confirm_witness(d, &rel, witness)?),
                Verdict::Unknown { .. } => None,
            };
            let mut r = verdict_json(&v);
            r["audited"] = json!(audited);
            r["pairs_in_window"] = json!(rel.enumerate(s.window).len());
            r
        }
        Query::StructureEq { d, e } => verdict_json(&ws.structure(d)?.structure_eq(ws.structure(e)?, s.budget)?),
        Query::Equalizer { f, g, y, x } => {
            let (f, g, y, x) = pair(ws, f, g, y, x)?;
            let (e, incl) = category::equalizer(&f, &g, &y, &x, s.budget)?;
            let carrier = e.structure.carrier()?;
            bind(ws, &e, Some(&incl));
            let mut r = built(json!({ "structure": e.structure, "map": incl }));
            r["carrier"] = json!(carrier);
            r
        }
        Query::Coequalizer { f, g, y, x } => {
            let (f, g, y, x) = pair(ws, f, g, y, x)?;
            let (c, q) = category::coequalizer(&f, &g, &y, &x, s.budget, s.depth)?;
            bind(ws, &c, Some(&q));
            built(json!({ "structure": c.structure, "map": q }))
        }
        Query::Quotient { x, set } => {
            let x = ws.coarse_space(x)?;
            let set = ws.set(set)?;
            let (c, q) = category::quotient(&x, &set)?;
            bind(ws, &c, Some(&q));
            built(json!({ "structure": c.structure, "map": q }))
        }
        Query::Classify { f, y, x } => {
            let (f, y, x) = (ws.map(f)?.clone(), ws.coarse_space(y)?, ws.coarse_space(x)?);
            let c = category::check_coarse(&f, &y, &x, s.budget)?.verdict();
            if !c.is_in() {
                let mut r = verdict_json(&c);
                r["reason"] = json!("classification needs a coarse map");
                r
            } else {
                let (im, _) = category::image(&f, &y, &x, s.budget)?;
                let coim = category::coimage(&f, &y, &x, s.budget);
                let mut r = json!({
                    "verdict": "In",
                    "monic": verdict_json(&category::is_monic(&f, &y, &x, s.budget)?),
                    "image": im.structure,
                    "connected_hull": category::connected_hull(&f, &y, &x)?,
                });
                match coim {
                    Ok((c, _)) => {
                        r["epi"] = verdict_json(&category::is_epi(&f, &y, &x, s.budget)?);
                        r["coimage"] = json!(c.structure);
                    }
                    Err(e) => {
                        r["epi"] = json!({ "verdict": "Unknown", "reason": e.to_string() });
                    }
                }
                r
            }
        }
        Query::Terminate { x } => {
            let t = category::terminate(&ws.coarse_space(x)?);
            bind(ws, &t, None);
            built(json!({ "structure": t.structure }))
        }
        Query::WitnessEquivalence { x, y, f, g } => {
            let (x, y) = (ws.coarse_space(x)?, ws.coarse_space(y)?);
            verdict_json(&category::equivalence_witness(&x, &y, ws.map(f)?, ws.map(g)?, s.budget)?)
        }
        Query::SigmaFiltration { d, levels } => {
            let levels = structures::sigma_filtration(ws.structure(d)?, *levels)?;
            let sample: Vec<usize> = levels.iter().map(|l| l.enumerate(s.window).len()).collect();
            json!({ "verdict": "In", "result": levels, "points_in_window": sample })
        }
        Query::FinOracle { diagram, kind, apex } => {
            let d = ws.diagram(diagram)?.clone();
            let mut checks = Vec::new();
            if matches!(kind, OracleKind::Limit | OracleKind::Both) {
                checks.push((Universal::Limit, finite::fin_limit(&d)));
            }
            if matches!(kind, OracleKind::Colimit | OracleKind::Both) {
                checks.push((Universal::Colimit, finite::fin_colimit(&d)));
            }
            let mut verdict = "In";
            let mut parts = Vec::new();
            for (k, cone) in checks {
                let failure = finite::universal_counterexample(k, &d, &cone, *apex)?;
                if failure.is_some() {
                    verdict = "Out";
                }
                parts.push(json!({ "kind": k, "cone": cone, "failure": failure }));
            }
            json!({ "verdict": verdict, "result": parts })
        }
        Query::Run { .. } => return Err(CliError::Parse("`run` cannot be nested".into())),
    };
    report["settings"] = json!({ "depth": s.depth, "window": s.window, "budget": s.budget, "seed": s.seed });
    Ok(report)
}
