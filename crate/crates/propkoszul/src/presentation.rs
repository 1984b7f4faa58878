//! Presentations: generators with symmetry shortcuts plus quadratic
//! relations given as rational combinations of connected 2-vertex graph
//! literals. The on-disk format is TOML; graph literals use the wire
//! syntax `in[k] -> v.in[j]`, `u.out[i] -> v.in[j]`, `v.out[i] -> out[k]`
//! with 1-based indices.

use crate::graphs::{Decorated, Level, Shape, Src, VertexShape};
use crate::sbimodule::{BasedModule, ModuleTable, Symmetry};
use crate::{Error, Rat, Result};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorSpec {
    pub id: String,
    pub outputs: usize,
    pub inputs: usize,
    pub left_symmetry: Symmetry,
    pub right_symmetry: Symmetry,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RelationTerm {
    /// Rational coefficient, serialized as a string like `-1` or `1/2`.
    pub coef: String,
    pub graph: String,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RelationRecord {
    /// `[outputs, inputs]` of every term in this component.
    pub component: [usize; 2],
    pub terms: Vec<RelationTerm>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub relations: Vec<RelationRecord>,
}

impl Presentation {
    /// Distinct generator arities, sorted.
    pub fn arities(&self) -> Vec<(usize, usize)> {
        let mut set: Vec<(usize, usize)> = self
            .generators
            .iter()
            .map(|g| (g.outputs, g.inputs))
            .collect();
        set.sort();
        set.dedup();
        set
    }

    /// The generator component `V(m, n)` as a based module: one block per
    /// generator of that arity, ordered by declaration.
    pub fn generator_module(&self, m: usize, n: usize) -> Option<BasedModule> {
        let gens: Vec<&GeneratorSpec> = self
            .generators
            .iter()
            .filter(|g| g.outputs == m && g.inputs == n)
            .collect();
        if gens.is_empty() {
            return None;
        }
        let parts: Vec<BasedModule> = gens
            .iter()
            .map(|g| {
                BasedModule::from_symmetries(
                    m,
                    n,
                    1,
                    0,
                    g.id.clone(),
                    g.left_symmetry,
                    g.right_symmetry,
                    1,
                )
            })
            .collect();
        Some(direct_sum(m, n, 1, 0, format!("V({m},{n})"), &parts))
    }

    /// Basis index of a generator's identity element inside `V(m, n)`.
    pub fn generator_basis_index(&self, id: &str) -> Result<(usize, usize, usize)> {
        let gen = self
            .generators
            .iter()
            .find(|g| g.id == id)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{id}`")))?;
        let mut offset = 0usize;
        for g in &self.generators {
            if g.outputs == gen.outputs && g.inputs == gen.inputs {
                if g.id == id {
                    return Ok((gen.outputs, gen.inputs, offset));
                }
                offset += g.left_symmetry.basis_size(g.outputs)
                    * g.right_symmetry.basis_size(g.inputs);
            }
        }
        unreachable!()
    }

    /// Full structural validation: unique generator ids, every relation
    /// term a connected 2-vertex graph of the right arity.
    pub fn validate(&self) -> Result<()> {
        let mut ids = std::collections::BTreeSet::new();
        for g in &self.generators {
            if g.outputs < 1 || g.inputs < 1 {
                return Err(Error::InvalidPresentation(format!(
                    "generator `{}` must have at least one input and one output",
                    g.id
                )));
            }
            if !ids.insert(g.id.clone()) {
                return Err(Error::InvalidPresentation(format!(
                    "duplicate generator id `{}`",
                    g.id
                )));
            }
        }
        let mut table = ModuleTable::default();
        let mut mods = BTreeMap::new();
        for (m, n) in self.arities() {
            let id = table.add(self.generator_module(m, n).unwrap());
            mods.insert((m, n), id);
        }
        for rel in &self.relations {
            let [m, n] = rel.component;
            if rel.terms.is_empty() {
                return Err(Error::InvalidPresentation(format!(
                    "relation in component ({m}, {n}) has no terms"
                )));
            }
            for term in &rel.terms {
                parse_rat(&term.coef)?;
                let dec = self.parse_graph_literal(&term.graph, m, n, &table, &mods)?;
                if dec.shape.vertices.len() != 2 {
                    return Err(Error::InvalidPresentation(format!(
                        "relation term `{}` must have exactly 2 vertices (quadratic)",
                        term.graph
                    )));
                }
                if !dec.shape.is_connected() {
                    return Err(Error::InvalidPresentation(format!(
                        "relation term `{}` must be connected",
                        term.graph
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses a graph literal into a decorated shape over the generator
    /// modules `mods`.
    pub fn parse_graph_literal(
        &self,
        literal: &str,
        m: usize,
        n: usize,
        table: &ModuleTable,
        mods: &BTreeMap<(usize, usize), crate::sbimodule::ModuleId>,
    ) -> Result<Decorated> {
        let mut names: Vec<String> = Vec::new();
        let mut gens: Vec<String> = Vec::new();
        let mut wires: Vec<(String, String)> = Vec::new();
        for stmt in literal.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = stmt.split_once("->") {
                wires.push((lhs.trim().to_string(), rhs.trim().to_string()));
            } else if let Some((name, gen)) = stmt.split_once(':') {
                let name = name.trim().to_string();
                if names.contains(&name) {
                    return Err(Error::Parse(format!("duplicate vertex `{name}`")));
                }
                names.push(name);
                gens.push(gen.trim().to_string());
            } else {
                return Err(Error::Parse(format!("cannot parse statement `{stmt}`")));
            }
        }
        let mut vertices = Vec::new();
        let mut decoration = Vec::new();
        for gen in &gens {
            let (gm, gn, idx) = self.generator_basis_index(gen)?;
            let module = *mods.get(&(gm, gn)).ok_or_else(|| {
                Error::Parse(format!("no module for generator `{gen}` of arity ({gm},{gn})"))
            })?;
            vertices.push(VertexShape {
                module,
                level: Level::Free,
                in_src: vec![Src::In(usize::MAX); gn],
            });
            decoration.push(idx);
        }
        let vindex = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Parse(format!("unknown vertex `{name}`")))
        };
        let mut global_out: Vec<Option<Src>> = vec![None; m];
        let mut pending: Vec<(Src, String)> = Vec::new();
        for (lhs, rhs) in &wires {
            let src = if let Some(k) = parse_port(lhs, "in") {
                let k = k?;
                if k == 0 || k > n {
                    return Err(Error::Parse(format!("global input {k} out of range")));
                }
                Src::In(k - 1)
            } else if let Some((name, port)) = parse_vertex_port(lhs, "out")? {
                let v = vindex(&name)?;
                let gm = table.get(vertices[v].module).m;
                if port == 0 || port > gm {
                    return Err(Error::Parse(format!("out-port {port} out of range on `{name}`")));
                }
                Src::Out {
                    vertex: v,
                    port: port - 1,
                }
            } else {
                return Err(Error::Parse(format!("cannot parse wire source `{lhs}`")));
            };
            pending.push((src, rhs.clone()));
        }
        for (src, rhs) in pending {
            if let Some(k) = parse_port(&rhs, "out") {
                let k = k?;
                if k == 0 || k > m {
                    return Err(Error::Parse(format!("global output {k} out of range")));
                }
                if global_out[k - 1].replace(src).is_some() {
                    return Err(Error::Parse(format!("global output {k} wired twice")));
                }
            } else if let Some((name, port)) = parse_vertex_port(&rhs, "in")? {
                let v = vindex(&name)?;
                let gn = vertices[v].in_src.len();
                if port == 0 || port > gn {
                    return Err(Error::Parse(format!("in-port {port} out of range on `{name}`")));
                }
                if vertices[v].in_src[port - 1] != Src::In(usize::MAX) {
                    return Err(Error::Parse(format!("in-port {port} of `{name}` wired twice")));
                }
                vertices[v].in_src[port - 1] = src;
            } else {
                return Err(Error::Parse(format!("cannot parse wire target `{rhs}`")));
            }
        }
        let global_out: Vec<Src> = global_out
            .into_iter()
            .enumerate()
            .map(|(k, s)| s.ok_or_else(|| Error::Parse(format!("global output {} not wired", k + 1))))
            .collect::<Result<_>>()?;
        let shape = Shape {
            n_in: n,
            m_out: m,
            vertices,
            global_out,
        };
        shape
            .validate(table)
            .map_err(|e| Error::Parse(format!("invalid graph literal `{literal}`: {e}")))?;
        Ok(Decorated { shape, decoration })
    }

    /// The opposite presentation: inputs and outputs exchanged everywhere.
    pub fn reversed(&self) -> Presentation {
        Presentation {
            name: format!("{}-reversed", self.name),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorSpec {
                    id: g.id.clone(),
                    outputs: g.inputs,
                    inputs: g.outputs,
                    left_symmetry: g.right_symmetry,
                    right_symmetry: g.left_symmetry,
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| RelationRecord {
                    component: [r.component[1], r.component[0]],
                    terms: r
                        .terms
                        .iter()
                        .map(|t| RelationTerm {
                            coef: t.coef.clone(),
                            graph: reverse_literal(&t.graph),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Drops every relation component with the given arity; used to build
    /// deliberately broken variants in tests and reports.
    pub fn without_relation_component(&self, m: usize, n: usize) -> Presentation {
        let mut out = self.clone();
        out.name = format!("{}-without-{m}-{n}", self.name);
        out.relations.retain(|r| r.component != [m, n]);
        out
    }
}

fn parse_port(text: &str, keyword: &str) -> Option<Result<usize>> {
    let rest = text.strip_prefix(keyword)?;
    let rest = rest.trim();
    let inner = rest.strip_prefix('[')?.strip_suffix(']')?;
    Some(
        inner
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad port index `{text}`"))),
    )
}

fn parse_vertex_port(text: &str, keyword: &str) -> Result<Option<(String, usize)>> {
    let Some((name, port)) = text.split_once('.') else {
        return Ok(None);
    };
    let Some(idx) = parse_port(port.trim(), keyword) else {
        return Ok(None);
    };
    Ok(Some((name.trim().to_string(), idx?)))
}

/// Reverses a graph literal: the flow is turned around, so `in[k]` trades
/// places with `out[k]` and each vertex's in-ports with its out-ports.
pub fn reverse_literal(literal: &str) -> String {
    let mut vertex_stmts = Vec::new();
    let mut wire_stmts = Vec::new();
    for stmt in literal.split(';') {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        if let Some((lhs, rhs)) = stmt.split_once("->") {
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let flip = |s: &str| -> String {
                if let Some(rest) = s.strip_prefix("in[") {
                    format!("out[{rest}")
                } else if let Some(rest) = s.strip_prefix("out[") {
                    format!("in[{rest}")
                } else if let Some((name, port)) = s.split_once('.') {
                    let port = port.trim();
                    if let Some(rest) = port.strip_prefix("in[") {
                        format!("{name}.out[{rest}")
                    } else if let Some(rest) = port.strip_prefix("out[") {
                        format!("{name}.in[{rest}")
                    } else {
                        s.to_string()
                    }
                } else {
                    s.to_string()
                }
            };
            wire_stmts.push(format!("{} -> {}", flip(rhs), flip(lhs)));
        } else {
            vertex_stmts.push(stmt.to_string());
        }
    }
    vertex_stmts
        .into_iter()
        .chain(wire_stmts)
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn parse_rat(text: &str) -> Result<Rat> {
    Rat::from_str(text.trim()).map_err(|_| Error::Parse(format!("bad rational `{text}`")))
}

/// Parses and validates a presentation document.
pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let pres: Presentation =
        toml::from_str(text).map_err(|e| Error::Parse(format!("presentation: {e}")))?;
    pres.validate()?;
    Ok(pres)
}

/// Serializes a presentation; `parse_presentation` round-trips it.
pub fn serialize_presentation(pres: &Presentation) -> String {
    toml::to_string(pres).expect("presentation serialization")
}

/// Direct sum of based modules sharing an arity.
pub fn direct_sum(
    m: usize,
    n: usize,
    weight: usize,
    degree: i64,
    label: String,
    parts: &[BasedModule],
) -> BasedModule {
    use crate::linalg::RationalMatrix;
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let block = |pick: &dyn Fn(&BasedModule) -> RationalMatrix| -> RationalMatrix {
        let mut out = RationalMatrix::zero(dim, dim);
        let mut off = 0usize;
        for p in parts {
            let sub = pick(p);
            for r in 0..p.dim {
                for (c, v) in sub.row(r) {
                    out.set(off + r, off + c, v.clone());
                }
            }
            off += p.dim;
        }
        out
    };
    let left = (0..m.saturating_sub(1))
        .map(|i| {
            block(&|p: &BasedModule| p.left_matrix(&crate::perm::Permutation::adjacent(m, i)))
        })
        .collect();
    let right = (0..n.saturating_sub(1))
        .map(|i| {
            block(&|p: &BasedModule| p.right_matrix(&crate::perm::Permutation::adjacent(n, i)))
        })
        .collect();
    BasedModule::new(m, n, dim, weight, degree, label, left, right)
}
