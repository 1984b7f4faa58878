//! Checking a concrete structure against a presentation: operation maps on
//! a finite-dimensional space are assigned to the generators, every
//! relation term is evaluated as a tensor-network contraction, and the
//! relation's combination must vanish identically.

use crate::linalg::RationalMatrix;
use crate::perm::Permutation;
use crate::presentation::{parse_rat, Presentation};
use crate::sbimodule::Symmetry;
use crate::{Error, Rat, Result};
use num::Zero;
use std::collections::BTreeMap;

/// A candidate structure: operation matrices `A^{⊗n} -> A^{⊗m}` per
/// generator, with tensor indices flattened big-endian (the first factor
/// is the most significant digit).
#[derive(Clone, Debug)]
pub struct GebraStructure {
    pub dimension: usize,
    pub maps: BTreeMap<String, RationalMatrix>,
}

#[derive(Clone, Debug, serde::Deserialize)]
struct GebraFile {
    dimension: usize,
    maps: Vec<GebraMapFile>,
}

#[derive(Clone, Debug, serde::Deserialize)]
struct GebraMapFile {
    generator: String,
    entries: Vec<GebraEntry>,
}

#[derive(Clone, Debug, serde::Deserialize)]
struct GebraEntry {
    /// 1-based output multi-index of length m.
    out: Vec<usize>,
    /// 1-based input multi-index of length n.
    #[serde(rename = "in")]
    input: Vec<usize>,
    value: String,
}

impl GebraStructure {
    pub fn parse(text: &str, pres: &Presentation) -> Result<GebraStructure> {
        let file: GebraFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("structure: {e}")))?;
        let mut maps = BTreeMap::new();
        for map in file.maps {
            let gen = pres
                .generators
                .iter()
                .find(|g| g.id == map.generator)
                .ok_or_else(|| Error::Parse(format!("unknown generator `{}`", map.generator)))?;
            let rows = file.dimension.pow(gen.outputs as u32);
            let cols = file.dimension.pow(gen.inputs as u32);
            let mut mat = RationalMatrix::zero(rows, cols);
            for e in map.entries {
                if e.out.len() != gen.outputs || e.input.len() != gen.inputs {
                    return Err(Error::ShapeMismatch(format!(
                        "entry indices for `{}` must have lengths ({}, {})",
                        map.generator, gen.outputs, gen.inputs
                    )));
                }
                let r = flatten_index(&e.out, file.dimension)?;
                let c = flatten_index(&e.input, file.dimension)?;
                mat.add_to(r, c, &parse_rat(&e.value)?);
            }
            maps.insert(map.generator.clone(), mat);
        }
        let s = GebraStructure {
            dimension: file.dimension,
            maps,
        };
        s.validate(pres)?;
        Ok(s)
    }

    /// Shape and equivariance checks: a sign-symmetric generator's matrix
    /// must negate under the corresponding transposition, a trivially
    /// symmetric one must be invariant.
    pub fn validate(&self, pres: &Presentation) -> Result<()> {
        for gen in &pres.generators {
            let mat = self.maps.get(&gen.id).ok_or_else(|| {
                Error::ShapeMismatch(format!("no operation map for generator `{}`", gen.id))
            })?;
            let rows = self.dimension.pow(gen.outputs as u32);
            let cols = self.dimension.pow(gen.inputs as u32);
            if mat.rows() != rows || mat.cols() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "map for `{}` must be {}x{}",
                    gen.id, rows, cols
                )));
            }
            for i in 0..gen.inputs.saturating_sub(1) {
                let p = tensor_perm_matrix(
                    &Permutation::adjacent(gen.inputs, i),
                    self.dimension,
                );
                let swapped = mat.mul(&p);
                match gen.right_symmetry {
                    Symmetry::Trivial => {
                        if swapped != *mat {
                            return Err(Error::ShapeMismatch(format!(
                                "map for `{}` is not input-symmetric",
                                gen.id
                            )));
                        }
                    }
                    Symmetry::Sign => {
                        if swapped != negate(mat) {
                            return Err(Error::ShapeMismatch(format!(
                                "map for `{}` is not input-antisymmetric",
                                gen.id
                            )));
                        }
                    }
                    Symmetry::Regular => {}
                }
            }
            for i in 0..gen.outputs.saturating_sub(1) {
                let p = tensor_perm_matrix(
                    &Permutation::adjacent(gen.outputs, i),
                    self.dimension,
                );
                let swapped = p.mul(mat);
                match gen.left_symmetry {
                    Symmetry::Trivial => {
                        if swapped != *mat {
                            return Err(Error::ShapeMismatch(format!(
                                "map for `{}` is not output-symmetric",
                                gen.id
                            )));
                        }
                    }
                    Symmetry::Sign => {
                        if swapped != negate(mat) {
                            return Err(Error::ShapeMismatch(format!(
                                "map for `{}` is not output-antisymmetric",
                                gen.id
                            )));
                        }
                    }
                    Symmetry::Regular => {}
                }
            }
        }
        Ok(())
    }

    /// The matrix realizing a generator-component basis element: the
    /// generator's map pre- and post-composed with tensor permutations.
    fn basis_matrix(&self, pres: &Presentation, gen_id: &str, basis: usize) -> RationalMatrix {
        let gen = pres.generators.iter().find(|g| g.id == gen_id).unwrap();
        let ld = gen.left_symmetry.basis_size(gen.outputs);
        let rd = gen.right_symmetry.basis_size(gen.inputs);
        let (l, r) = (basis / rd, basis % rd);
        assert!(l < ld && r < rd);
        let base = &self.maps[gen_id];
        let with_right = match gen.right_symmetry {
            Symmetry::Regular => {
                let perm = &Permutation::all(gen.inputs)[r];
                base.mul(&tensor_perm_matrix(perm, self.dimension))
            }
            _ => base.clone(),
        };
        match gen.left_symmetry {
            Symmetry::Regular => {
                let perm = &Permutation::all(gen.outputs)[l];
                tensor_perm_matrix(perm, self.dimension).mul(&with_right)
            }
            _ => with_right,
        }
    }
}

fn negate(mat: &RationalMatrix) -> RationalMatrix {
    let mut out = RationalMatrix::zero(mat.rows(), mat.cols());
    for r in 0..mat.rows() {
        for (c, v) in mat.row(r) {
            out.set(r, *c, -v.clone());
        }
    }
    out
}

fn flatten_index(multi: &[usize], dim: usize) -> Result<usize> {
    let mut idx = 0usize;
    for &i in multi {
        if i == 0 || i > dim {
            return Err(Error::ShapeMismatch(format!(
                "tensor index {i} out of range 1..{dim}"
            )));
        }
        idx = idx * dim + (i - 1);
    }
    Ok(idx)
}

/// Matrix of a permutation acting on `A^{⊗n}`: the factor at position `k`
/// moves to position `perm(k)`.
pub fn tensor_perm_matrix(perm: &Permutation, dim: usize) -> RationalMatrix {
    let n = perm.size();
    let total = dim.pow(n as u32);
    let mut out = RationalMatrix::zero(total, total);
    for idx in 0..total {
        // Decode big-endian digits.
        let mut digits = vec![0usize; n];
        let mut x = idx;
        for k in (0..n).rev() {
            digits[k] = x % dim;
            x /= dim;
        }
        let mut target = vec![0usize; n];
        for k in 0..n {
            target[perm.apply(k)] = digits[k];
        }
        let mut tidx = 0usize;
        for &d in &target {
            tidx = tidx * dim + d;
        }
        out.set(tidx, idx, crate::rint(1));
    }
    out
}

/// Per-relation verdicts plus a failure witness entry when nonzero.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GebraReport {
    pub name: String,
    pub dimension: usize,
    pub relations: Vec<GebraRelationRow>,
    pub pass: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GebraRelationRow {
    pub component: [usize; 2],
    pub index: usize,
    pub pass: bool,
    /// `(out multi-index, in multi-index, value)` of one nonzero entry.
    pub witness: Option<(Vec<usize>, Vec<usize>, String)>,
}

/// Evaluates every relation of the presentation on the structure's
/// operation maps.
pub fn gebra_check(pres: &Presentation, structure: &GebraStructure) -> Result<GebraReport> {
    structure.validate(pres)?;
    let mut table = crate::sbimodule::ModuleTable::default();
    let mut mods = BTreeMap::new();
    let mut module_gen: BTreeMap<(usize, usize), Vec<(String, usize)>> = BTreeMap::new();
    for (m, n) in pres.arities() {
        let id = table.add(pres.generator_module(m, n).unwrap());
        mods.insert((m, n), id);
        // Basis layout per arity: generator blocks in declaration order.
        let mut layout = Vec::new();
        for g in pres.generators.iter().filter(|g| g.outputs == m && g.inputs == n) {
            let block = g.left_symmetry.basis_size(m) * g.right_symmetry.basis_size(n);
            for b in 0..block {
                layout.push((g.id.clone(), b));
            }
        }
        module_gen.insert((m, n), layout);
    }
    let mut rows = Vec::new();
    for (index, rel) in pres.relations.iter().enumerate() {
        let [m, n] = rel.component;
        let rows_dim = structure.dimension.pow(m as u32);
        let cols_dim = structure.dimension.pow(n as u32);
        let mut acc = RationalMatrix::zero(rows_dim, cols_dim);
        for term in &rel.terms {
            let coef = parse_rat(&term.coef)?;
            let dec = pres.parse_graph_literal(&term.graph, m, n, &table, &mods)?;
            let value = evaluate_network(structure, pres, &table, &module_gen, &dec)?;
            for r in 0..rows_dim {
                for (c, v) in value.row(r) {
                    acc.add_to(r, *c, &(v * &coef));
                }
            }
        }
        let mut witness = None;
        'scan: for r in 0..rows_dim {
            for (c, v) in acc.row(r) {
                if !v.is_zero() {
                    witness = Some((
                        unflatten_index(r, structure.dimension, m),
                        unflatten_index(*c, structure.dimension, n),
                        v.to_string(),
                    ));
                    break 'scan;
                }
            }
        }
        rows.push(GebraRelationRow {
            component: rel.component,
            index,
            pass: witness.is_none(),
            witness,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(GebraReport {
        name: pres.name.clone(),
        dimension: structure.dimension,
        relations: rows,
        pass,
    })
}

fn unflatten_index(mut idx: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for k in (0..len).rev() {
        out[k] = idx % dim + 1;
        idx /= dim;
    }
    out
}

/// Contracts the tensor network of a decorated graph: vertices carry
/// basis-element matrices, edges are summed, global legs stay free.
fn evaluate_network(
    structure: &GebraStructure,
    pres: &Presentation,
    table: &crate::sbimodule::ModuleTable,
    module_gen: &BTreeMap<(usize, usize), Vec<(String, usize)>>,
    dec: &crate::graphs::Decorated,
) -> Result<RationalMatrix> {
    let dim = structure.dimension;
    let shape = &dec.shape;
    let k = shape.vertices.len();
    let rows = dim.pow(shape.m_out as u32);
    let cols = dim.pow(shape.n_in as u32);
    let mut out = RationalMatrix::zero(rows, cols);
    // Vertex matrices.
    let mats: Vec<RationalMatrix> = (0..k)
        .map(|vi| {
            let module = table.get(shape.vertices[vi].module);
            let layout = &module_gen[&(module.m, module.n)];
            let (gen_id, basis) = &layout[dec.decoration[vi]];
            structure.basis_matrix(pres, gen_id, *basis)
        })
        .collect();
    let edges = shape.edges();
    let edge_count = edges.len();
    // Brute-force contraction: iterate all assignments of values to global
    // inputs, outputs and internal edges; dimensions stay tiny here.
    let total_in = dim.pow(shape.n_in as u32);
    let total_edge = dim.pow(edge_count as u32);
    for in_idx in 0..total_in {
        let in_digits = digits_of(in_idx, dim, shape.n_in);
        for edge_idx in 0..total_edge {
            let edge_digits = digits_of(edge_idx, dim, edge_count);
            // For each assignment of the output digits, multiply entries.
            let total_out = dim.pow(shape.m_out as u32);
            for out_idx in 0..total_out {
                let out_digits = digits_of(out_idx, dim, shape.m_out);
                let mut coeff = crate::rint(1);
                // Global outputs pin the values of their source wires; a
                // direct pass strand compares input and output digits.
                let mut consistent = true;
                for (j, src) in shape.global_out.iter().enumerate() {
                    if let crate::graphs::Src::In(i) = src {
                        if in_digits[*i] != out_digits[j] {
                            consistent = false;
                            break;
                        }
                    }
                }
                if !consistent {
                    continue;
                }
                for (vi, v) in shape.vertices.iter().enumerate() {
                    let module = table.get(v.module);
                    // Row index: values on this vertex's out-ports.
                    let mut r = 0usize;
                    for p in 0..module.m {
                        // Find destination of (vi, p).
                        let val = if let Some(e) = edges
                            .iter()
                            .position(|&(u, q, _, _)| u == vi && q == p)
                        {
                            edge_digits[e]
                        } else {
                            let j = shape
                                .global_out
                                .iter()
                                .position(|s| {
                                    *s == crate::graphs::Src::Out {
                                        vertex: vi,
                                        port: p,
                                    }
                                })
                                .expect("out-port feeds a global output");
                            out_digits[j]
                        };
                        r = r * dim + val;
                    }
                    let mut c = 0usize;
                    for src in &v.in_src {
                        let val = match src {
                            crate::graphs::Src::In(i) => in_digits[*i],
                            crate::graphs::Src::Out { vertex, port } => {
                                let e = edges
                                    .iter()
                                    .position(|&(u, p, _, _)| u == *vertex && p == *port)
                                    .expect("vertex-to-vertex wire is an edge");
                                edge_digits[e]
                            }
                        };
                        c = c * dim + val;
                    }
                    let entry = mats[vi].get(r, c);
                    if entry.is_zero() {
                        coeff = crate::rint(0);
                        break;
                    }
                    coeff *= entry;
                }
                if !coeff.is_zero() {
                    out.add_to(out_idx, in_idx, &coeff);
                }
            }
        }
    }
    Ok(out)
}

fn digits_of(mut idx: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for k in (0..len).rev() {
        out[k] = idx % dim;
        idx /= dim;
    }
    out
}
