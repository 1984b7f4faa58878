//! Graded components spanned by canonical decorated graphs. A component is
//! a direct sum of shape blocks; each block carries the coinvariant space
//! of the decoration tensor under the shape's automorphism group. In
//! characteristic zero the coinvariants are realized as the image of the
//! averaging projector, so every block stores a basis of that image plus
//! pivot positions for exact coordinate read-off.

use crate::graphs::{transport_decoration, Decorated, Iso, Shape};
use crate::linalg::{sv_add, RationalMatrix, SparseVec};
use crate::sbimodule::ModuleTable;
use crate::{rint, Rat};
use num::Zero;
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Basis of the invariant subspace, as sparse vectors over decoration
    /// tuples; in reduced row echelon form, so coordinates can be read off
    /// at the pivots.
    pub basis: Vec<SparseVec>,
    pub pivots: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ShapeBlock {
    pub shape: Shape,
    pub encoding: Vec<u64>,
    pub autos: Vec<Iso>,
    pub dims: Vec<usize>,
    pub dec_dim: usize,
    /// `None` when the automorphism group is trivial (the common case).
    pub reduction: Option<Reduction>,
    pub offset: usize,
    pub q_dim: usize,
}

impl ShapeBlock {
    fn tuple_index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0usize;
        for (i, &b) in tuple.iter().enumerate() {
            idx = idx * self.dims[i] + b;
        }
        idx
    }

    fn tuple_decode(&self, mut idx: usize) -> Vec<usize> {
        let mut tuple = vec![0usize; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            tuple[i] = idx % self.dims[i];
            idx /= self.dims[i];
        }
        tuple
    }

    /// Averages a decoration vector over the automorphism group.
    fn symmetrize(&self, table: &ModuleTable, vec: &SparseVec) -> SparseVec {
        let mut acc = SparseVec::new();
        for auto in &self.autos {
            for (idx, coeff) in vec {
                let tuple = self.tuple_decode(*idx);
                for (t, c) in transport_decoration(table, &self.shape, &tuple, coeff, auto) {
                    sv_add(&mut acc, self.tuple_index(&t), &c);
                }
            }
        }
        let scale = Rat::new(1.into(), (self.autos.len() as i64).into());
        acc.into_iter()
            .map(|(i, c)| (i, c * scale.clone()))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Coordinates of a decoration vector in the block's quotient basis.
    pub fn project(&self, table: &ModuleTable, vec: &SparseVec) -> SparseVec {
        match &self.reduction {
            None => vec.clone(),
            Some(red) => {
                let w = self.symmetrize(table, vec);
                let mut coords = SparseVec::new();
                for (i, &p) in red.pivots.iter().enumerate() {
                    if let Some(c) = w.get(&p) {
                        coords.insert(i, c.clone());
                    }
                }
                coords
            }
        }
    }

    /// Representative of a quotient basis vector, as decorated graphs.
    pub fn lift(&self, q: usize) -> Vec<(Decorated, Rat)> {
        match &self.reduction {
            None => vec![(
                Decorated {
                    shape: self.shape.clone(),
                    decoration: self.tuple_decode(q),
                },
                rint(1),
            )],
            Some(red) => red.basis[q]
                .iter()
                .map(|(idx, c)| {
                    (
                        Decorated {
                            shape: self.shape.clone(),
                            decoration: self.tuple_decode(*idx),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        }
    }
}

/// A graded component: ordered shape blocks with coinvariant bases.
#[derive(Clone, Debug)]
pub struct ComponentSpace {
    pub m: usize,
    pub n: usize,
    pub blocks: Vec<ShapeBlock>,
    pub dim: usize,
    index: HashMap<Vec<u64>, usize>,
}

impl ComponentSpace {
    /// Builds a component from canonical shapes (sorted, duplicate-free).
    pub fn build(table: &ModuleTable, m: usize, n: usize, shapes: Vec<Shape>) -> ComponentSpace {
        let mut blocks = Vec::with_capacity(shapes.len());
        let mut offset = 0usize;
        for shape in shapes {
            let encoding = shape.encode(table);
            let autos = shape.isomorphisms(&shape, table);
            debug_assert!(!autos.is_empty());
            let dims: Vec<usize> = shape
                .vertices
                .iter()
                .map(|v| table.get(v.module).dim)
                .collect();
            let dec_dim: usize = dims.iter().product::<usize>().max(1);
            let mut block = ShapeBlock {
                shape,
                encoding,
                autos,
                dims,
                dec_dim,
                reduction: None,
                offset,
                q_dim: dec_dim,
            };
            if block.autos.len() > 1 {
                // Column space of the averaging projector.
                let mut sym_t = RationalMatrix::zero(dec_dim, dec_dim);
                for t in 0..dec_dim {
                    let mut e = SparseVec::new();
                    e.insert(t, rint(1));
                    let col = block.symmetrize(table, &e);
                    for (r, c) in col {
                        // Transposed: store column t as row t.
                        sym_t.set(t, r, c);
                    }
                }
                let (rows, pivots) = sym_t.rref();
                block.q_dim = rows.len();
                block.reduction = Some(Reduction { basis: rows, pivots });
            }
            offset += block.q_dim;
            blocks.push(block);
        }
        let index = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.encoding.clone(), i))
            .collect();
        ComponentSpace {
            m,
            n,
            blocks,
            dim: offset,
            index,
        }
    }

    pub fn block_of(&self, encoding: &[u64]) -> Option<usize> {
        self.index.get(encoding).copied()
    }

    /// Component coordinates of a linear combination of decorated graphs.
    /// Panics when a term's shape is not part of this component; that
    /// indicates an assembly bug upstream.
    pub fn coords(&self, table: &ModuleTable, terms: &[(Decorated, Rat)]) -> SparseVec {
        let mut per_block: HashMap<usize, SparseVec> = HashMap::new();
        for (dec, coeff) in terms {
            if coeff.is_zero() {
                continue;
            }
            let (canon, iso) = dec.shape.canonicalize(table);
            let enc = canon.encode(table);
            let bi = *self
                .index
                .get(&enc)
                .unwrap_or_else(|| panic!("shape missing from component ({}, {})", self.m, self.n));
            let block = &self.blocks[bi];
            let acc = per_block.entry(bi).or_default();
            for (tuple, c) in transport_decoration(table, &dec.shape, &dec.decoration, coeff, &iso)
            {
                sv_add(acc, block.tuple_index(&tuple), &c);
            }
        }
        let mut out = SparseVec::new();
        let mut block_ids: Vec<usize> = per_block.keys().cloned().collect();
        block_ids.sort();
        for bi in block_ids {
            let block = &self.blocks[bi];
            for (q, c) in block.project(table, &per_block[&bi]) {
                sv_add(&mut out, block.offset + q, &c);
            }
        }
        out
    }

    /// Decorated-graph representative of a global basis index.
    pub fn lift(&self, idx: usize) -> Vec<(Decorated, Rat)> {
        let bi = self.block_containing(idx);
        self.blocks[bi].lift(idx - self.blocks[bi].offset)
    }

    pub fn block_containing(&self, idx: usize) -> usize {
        for (bi, b) in self.blocks.iter().enumerate() {
            if idx >= b.offset && idx < b.offset + b.q_dim {
                return bi;
            }
        }
        panic!("basis index {idx} out of range (dim {})", self.dim)
    }

    /// Matrix of the left action of the adjacent transposition `s_i` on the
    /// global output labels.
    pub fn left_gen_matrix(&self, table: &ModuleTable, i: usize) -> RationalMatrix {
        self.action_matrix(table, i, true)
    }

    /// Matrix of the right action of `s_i` on the global input labels.
    pub fn right_gen_matrix(&self, table: &ModuleTable, i: usize) -> RationalMatrix {
        self.action_matrix(table, i, false)
    }

    fn action_matrix(&self, table: &ModuleTable, i: usize, left: bool) -> RationalMatrix {
        let mut out = RationalMatrix::zero(self.dim, self.dim);
        for j in 0..self.dim {
            let terms: Vec<(Decorated, Rat)> = self
                .lift(j)
                .into_iter()
                .map(|(dec, c)| {
                    let shape = if left {
                        relabel_outputs_swap(&dec.shape, i)
                    } else {
                        relabel_inputs_swap(&dec.shape, i)
                    };
                    (
                        Decorated {
                            shape,
                            decoration: dec.decoration,
                        },
                        c,
                    )
                })
                .collect();
            for (r, c) in self.coords(table, &terms) {
                out.set(r, j, c);
            }
        }
        out
    }
}

/// Swaps global output labels `i` and `i + 1`.
pub fn relabel_outputs_swap(shape: &Shape, i: usize) -> Shape {
    let mut out = shape.clone();
    out.global_out.swap(i, i + 1);
    out
}

/// Swaps global input labels `i` and `i + 1`.
pub fn relabel_inputs_swap(shape: &Shape, i: usize) -> Shape {
    let swap = |src: &mut crate::graphs::Src| {
        if let crate::graphs::Src::In(l) = src {
            if *l == i {
                *l = i + 1;
            } else if *l == i + 1 {
                *l = i;
            }
        }
    };
    let mut out = shape.clone();
    for v in &mut out.vertices {
        for src in &mut v.in_src {
            swap(src);
        }
    }
    for src in &mut out.global_out {
        swap(src);
    }
    out
}
