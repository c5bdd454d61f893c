//! Named spaces, sets, relations, structures, maps and finite objects.
//!
//! Inside a descriptor, a string where an object is expected names an
//! entry of the matching table: `space`, `source`, `target` name spaces;
//! `parent`, `a`, `b`, `structure` name structures; `map`, `f`, `g` name
//! maps; `S` and `Y` name sets; `gens` entries name relations; diagram
//! `objects` name finite spaces.

use std::collections::BTreeMap;

use coarse_core::category::CoarseSpace;
use coarse_core::coarsemap::EAMap;
use coarse_core::entourage::Relation;
use coarse_core::finite::{Diagram, FinSpace};
use coarse_core::ground::{PointSet, Space};
use coarse_core::structures::Structure;
use coarse_core::upset::UpSet;
use serde_json::{Map, Value};

use crate::CliError;

const TABLES: [&str; 7] = ["spaces", "sets", "relations", "structures", "maps", "finite_spaces", "diagrams"];

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub spaces: BTreeMap<String, Space>,
    pub sets: BTreeMap<String, PointSet>,
    pub relations: BTreeMap<String, Relation>,
    pub structures: BTreeMap<String, Structure>,
    pub maps: BTreeMap<String, EAMap>,
    pub finite_spaces: BTreeMap<String, FinSpace>,
    pub diagrams: BTreeMap<String, Diagram>,
}

fn table_for(key: &str) -> Option<&'static str> {
    Some(match key {
        "space" | "source" | "target" => "spaces",
        "parent" | "a" | "b" | "structure" => "structures",
        "map" | "f" | "g" => "maps",
        "S" | "Y" => "sets",
        _ => return None,
    })
}

struct Resolver<'a> {
    raw: &'a Map<String, Value>,
    done: BTreeMap<(String, String), Value>,
    stack: Vec<(String, String)>,
}

impl Resolver<'_> {
    fn entry(&mut self, table: &str, name: &str) -> Result<Value, CliError> {
        let key = (table.to_string(), name.to_string());
        if let Some(v) = self.done.get(&key) {
            return Ok(v.clone());
        }
        if self.stack.contains(&key) {
            return Err(CliError::Resolve(format!("{table}.{name} refers to itself")));
        }
        let raw = self.raw.get(table).and_then(|t| t.get(name)).ok_or_else(|| CliError::Resolve(format!("no entry `{name}` in {table}")))?.clone();
        self.stack.push(key.clone());
        let v = self.expand(table, raw)?;
        self.stack.pop();
        self.done.insert(key, v.clone());
        Ok(v)
    }

    fn expand(&mut self, table: &str, v: Value) -> Result<Value, CliError> {
        match v {
            Value::Object(m) => {
                let mut out = Map::new();
                for (k, x) in m {
                    let x = match (table_for(&k), &x) {
                        (Some(t), Value::String(name)) if t != "sets" || self.has("sets", name) => self.entry(t, name)?,
                        _ if k == "gens" => self.names_in("relations", x)?,
                        _ if k == "objects" && table == "diagrams" => self.names_in("finite_spaces", x)?,
                        _ => self.expand(table, x)?,
                    };
                    out.insert(k, x);
                }
                Ok(Value::Object(out))
            }
            Value::Array(items) => Ok(Value::Array(items.into_iter().map(|x| self.expand(table, x)).collect::<Result<_, _>>()?)),
            other => Ok(other),
        }
    }

    fn names_in(&mut self, table: &str, v: Value) -> Result<Value, CliError> {
        match v {
            Value::Array(items) => Ok(Value::Array(
                items
                    .into_iter()
                    .map(|x| match x {
                        Value::String(name) => self.entry(table, &name),
                        other => self.expand(table, other),
                    })
                    .collect::<Result<_, _>>()?,
            )),
            other => self.expand(table, other),
        }
    }

    fn has(&self, table: &str, name: &str) -> bool {
        self.raw.get(table).and_then(|t| t.get(name)).is_some()
    }
}

fn typed<T: serde::de::DeserializeOwned>(table: &str, name: &str, v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Parse(format!("{table}.{name}: {e}")))
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Workspace, CliError> {
        let root: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let Value::Object(mut root) = root else {
            return Err(CliError::Parse("workspace must be a JSON object".into()));
        };
        if let Some(v) = root.remove("finiteSpaces") {
            root.entry("finite_spaces").or_insert(v);
        }
        if let Some(k) = root.keys().find(|k| !TABLES.contains(&k.as_str())) {
            return Err(CliError::Parse(format!("unknown workspace table `{k}`")));
        }
        let mut r = Resolver { raw: &root, done: BTreeMap::new(), stack: Vec::new() };
        let mut ws = Workspace::default();
        for table in TABLES {
            let names: Vec<String> = root.get(table).and_then(Value::as_object).map(|m| m.keys().cloned().collect()).unwrap_or_default();
            for name in names {
                let v = r.entry(table, &name)?;
                match table {
                    "spaces" => drop(ws.spaces.insert(name.clone(), typed(table, &name, v)?)),
                    "sets" => drop(ws.sets.insert(name.clone(), typed(table, &name, v)?)),
                    "relations" => drop(ws.relations.insert(name.clone(), typed(table, &name, v)?)),
                    "structures" => {
                        let d: Structure = typed(table, &name, v)?;
                        d.validate().map_err(|e| CliError::Parse(format!("structures.{name}: {e}")))?;
                        ws.structures.insert(name, d);
                    }
                    "maps" => drop(ws.maps.insert(name.clone(), typed(table, &name, v)?)),
                    "finite_spaces" => drop(ws.finite_spaces.insert(name.clone(), typed(table, &name, v)?)),
                    _ => {
                        let d: Diagram = typed(table, &name, v)?;
                        d.check().map_err(|e| CliError::Parse(format!("diagrams.{name}: {e}")))?;
                        ws.diagrams.insert(name, d);
                    }
                }
            }
        }
        Ok(ws)
    }

    pub fn load(path: &str) -> Result<Workspace, CliError> {
        let text = if path == "-" {
            std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Io(format!("stdin: {e}")))?
        } else {
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?
        };
        Workspace::parse(&text)
    }

    pub fn structure(&self, name: &str) -> Result<&Structure, CliError> {
        self.structures.get(name).ok_or_else(|| CliError::Resolve(format!("no structure `{name}`")))
    }

    pub fn coarse_space(&self, name: &str) -> Result<CoarseSpace, CliError> {
        Ok(CoarseSpace::new(self.structure(name)?.clone()))
    }

    pub fn map(&self, name: &str) -> Result<&EAMap, CliError> {
        self.maps.get(name).ok_or_else(|| CliError::Resolve(format!("no map `{name}`")))
    }

    pub fn diagram(&self, name: &str) -> Result<&Diagram, CliError> {
        self.diagrams.get(name).ok_or_else(|| CliError::Resolve(format!("no diagram `{name}`")))
    }

    /// A named set, or clauses joined by `+`: `ray:upset` or a point
    /// component id (`r0:even+p0`).
    pub fn set(&self, text: &str) -> Result<PointSet, CliError> {
        if let Some(s) = self.sets.get(text) {
            return Ok(s.clone());
        }
        let mut out = PointSet::empty();
        for clause in text.split('+') {
            out = out.union(&match clause.split_once(':') {
                Some((comp, set)) => PointSet::on_ray(comp, set.parse::<UpSet>().map_err(CliError::Parse)?),
                None if clause.starts_with('p') => PointSet::pt(clause),
                None => return Err(CliError::Resolve(format!("no set `{text}`"))),
            });
        }
        Ok(out)
    }

    /// A named relation or an expression over `space`: `Band(S,k)` on the
    /// first ray, `Band(src,dst,S,k)`, `Pair(x,y)`, `Unit`.
    pub fn relation(&self, text: &str, space: &Space) -> Result<Relation, CliError> {
        if let Some(r) = self.relations.get(text) {
            return Ok(r.clone());
        }
        let bad = || CliError::Parse(format!("cannot read relation `{text}`"));
        if text == "Unit" {
            return Ok(Relation::unit(space));
        }
        let (head, rest) = text.split_once('(').ok_or_else(|| CliError::Resolve(format!("no relation `{text}`")))?;
        let args = split_args(rest.strip_suffix(')').ok_or_else(bad)?);
        let upset = |s: &str| s.parse::<UpSet>().map_err(CliError::Parse);
        let offset = |s: &str| s.trim().parse::<i64>().map_err(|_| bad());
        let rel = match (head, args.as_slice()) {
            ("Band", [s, k]) => {
                let ray = space.ray_ids().next().ok_or_else(|| CliError::Parse("Band needs a ray".into()))?;
                Relation::diag(ray, offset(k)?, upset(s)?)
            }
            ("Band", [src, dst, s, k]) => Relation::band(src.trim(), dst.trim(), offset(k)?, upset(s)?),
            ("Pair", [x, y]) => {
                let p = |s: &str| s.trim().parse().map_err(CliError::Parse);
                Relation::from_pairs(space, &[(p(x)?, p(y)?)]).map_err(CliError::Domain)?
            }
            _ => return Err(bad()),
        };
        rel.check_in(space).map_err(CliError::Domain)?;
        Ok(rel)
    }
}

/// Splits on commas outside brackets.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}
