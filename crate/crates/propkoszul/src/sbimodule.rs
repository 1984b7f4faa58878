//! Based modules over pairs of symmetric groups: each component carries a
//! left `S_m` action and a right `S_n` action stored on adjacent
//! transpositions and composed on demand. These decorate graph vertices
//! everywhere downstream, so the same type also records a weight and a
//! homological degree.

use crate::linalg::{RationalMatrix, SparseVec};
use crate::perm::Permutation;
use crate::{rint, Error, Rat, Result};
use std::collections::BTreeMap;

/// Identifier of a based module inside a [`ModuleTable`].
pub type ModuleId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Trivial,
    Sign,
    Regular,
}

impl Symmetry {
    pub fn basis_size(&self, n: usize) -> usize {
        match self {
            Symmetry::Trivial | Symmetry::Sign => 1,
            Symmetry::Regular => factorial(n),
        }
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

/// One `(m, n)` component of an S-bimodule with a chosen basis.
#[derive(Clone, Debug)]
pub struct BasedModule {
    pub m: usize,
    pub n: usize,
    pub dim: usize,
    /// Number of generators a decoration of this kind consumes.
    pub weight: usize,
    /// Homological degree of a single decoration (0 for plain elements,
    /// +1 per suspension).
    pub degree: i64,
    pub label: String,
    /// Action matrices of the adjacent transpositions `s_0 … s_{m-2}`.
    left_gens: Vec<RationalMatrix>,
    /// Action matrices of the adjacent transpositions `s_0 … s_{n-2}`.
    right_gens: Vec<RationalMatrix>,
}

impl BasedModule {
    pub fn new(
        m: usize,
        n: usize,
        dim: usize,
        weight: usize,
        degree: i64,
        label: String,
        left_gens: Vec<RationalMatrix>,
        right_gens: Vec<RationalMatrix>,
    ) -> Self {
        assert_eq!(left_gens.len(), m.saturating_sub(1));
        assert_eq!(right_gens.len(), n.saturating_sub(1));
        for g in left_gens.iter().chain(right_gens.iter()) {
            assert_eq!(g.rows(), dim);
            assert_eq!(g.cols(), dim);
        }
        BasedModule {
            m,
            n,
            dim,
            weight,
            degree,
            label,
            left_gens,
            right_gens,
        }
    }

    /// A generator component built from symmetry shortcuts: the basis is the
    /// product of a left part and a right part, each trivial, sign or
    /// regular.
    pub fn from_symmetries(
        m: usize,
        n: usize,
        weight: usize,
        degree: i64,
        label: String,
        left: Symmetry,
        right: Symmetry,
        copies: usize,
    ) -> Self {
        let ld = left.basis_size(m);
        let rd = right.basis_size(n);
        let dim = ld * rd * copies;
        // Basis order: (copy, left index, right index), lexicographic.
        let left_gens = (0..m.saturating_sub(1))
            .map(|i| {
                part_action_matrix(left, m, i, true, ld, rd, copies, /*acts_on_left=*/ true)
            })
            .collect();
        let right_gens = (0..n.saturating_sub(1))
            .map(|i| {
                part_action_matrix(right, n, i, false, ld, rd, copies, /*acts_on_left=*/ false)
            })
            .collect();
        BasedModule::new(m, n, dim, weight, degree, label, left_gens, right_gens)
    }

    /// The biregular component `k[S_n]` sitting in arity `(n, n)`.
    pub fn regular_bimodule(n: usize) -> Self {
        let perms = Permutation::all(n);
        let index: BTreeMap<Vec<usize>, usize> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.images().to_vec(), i))
            .collect();
        let dim = perms.len();
        let build = |i: usize, on_left: bool| {
            let s = Permutation::adjacent(n, i);
            let mut mat = RationalMatrix::zero(dim, dim);
            for (j, g) in perms.iter().enumerate() {
                let target = if on_left {
                    s.compose(g).unwrap()
                } else {
                    g.compose(&s).unwrap()
                };
                mat.set(index[target.images()], j, rint(1));
            }
            mat
        };
        let left_gens = (0..n.saturating_sub(1)).map(|i| build(i, true)).collect();
        let right_gens = (0..n.saturating_sub(1)).map(|i| build(i, false)).collect();
        BasedModule::new(
            n,
            n,
            dim,
            0,
            0,
            format!("I({n},{n})"),
            left_gens,
            right_gens,
        )
    }

    /// Same module with the homological degree shifted by `shift`.
    pub fn suspend(&self, shift: i64, label: String) -> Self {
        let mut out = self.clone();
        out.degree += shift;
        out.label = label;
        out
    }

    /// Matrix of the left action of `p`; the left action is a group
    /// homomorphism.
    pub fn left_matrix(&self, p: &Permutation) -> RationalMatrix {
        assert_eq!(p.size(), self.m, "left action arity mismatch");
        let mut out = RationalMatrix::identity(self.dim);
        for k in p.adjacent_decomposition() {
            out = out.mul(&self.left_gens[k]);
        }
        out
    }

    /// Matrix of the right action of `p`; acting first by `σ` and then by
    /// `τ` equals acting by `στ`, so this is an anti-homomorphism.
    pub fn right_matrix(&self, p: &Permutation) -> RationalMatrix {
        assert_eq!(p.size(), self.n, "right action arity mismatch");
        let mut out = RationalMatrix::identity(self.dim);
        for k in p.adjacent_decomposition() {
            // R(s_{k_1} ∘ rest) = R(rest) · R(s_{k_1})
            out = self.right_gens[k].mul(&out);
        }
        out
    }

    /// Applies `L(left) · R(right)` to a dense vector.
    pub fn act(&self, left: &Permutation, v: &[Rat], right: &Permutation) -> Result<Vec<Rat>> {
        if left.size() != self.m || right.size() != self.n || v.len() != self.dim {
            return Err(Error::ArityMismatch(format!(
                "act on component ({}, {}) with |left|={}, |right|={}, |v|={}",
                self.m,
                self.n,
                left.size(),
                right.size(),
                v.len()
            )));
        }
        let mut sv = SparseVec::new();
        for (i, x) in v.iter().enumerate() {
            if !x.is_zero() {
                sv.insert(i, x.clone());
            }
        }
        let out = self.left_matrix(left).apply(&self.right_matrix(right).apply(&sv));
        let mut dense = vec![Rat::from_integer(0.into()); self.dim];
        for (i, x) in out {
            dense[i] = x;
        }
        Ok(dense)
    }

    /// Applies `L(left) · R(right)` to a sparse vector.
    pub fn act_sparse(&self, left: &Permutation, v: &SparseVec, right: &Permutation) -> SparseVec {
        let rv = if right.is_identity() {
            v.clone()
        } else {
            self.right_matrix(right).apply(v)
        };
        if left.is_identity() {
            rv
        } else {
            self.left_matrix(left).apply(&rv)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn part_action_matrix(
    sym: Symmetry,
    arity: usize,
    gen_index: usize,
    _is_left_side: bool,
    ld: usize,
    rd: usize,
    copies: usize,
    acts_on_left: bool,
) -> RationalMatrix {
    let dim = ld * rd * copies;
    let mut mat = RationalMatrix::zero(dim, dim);
    let block = |copy: usize, l: usize, r: usize| copy * ld * rd + l * rd + r;
    match sym {
        Symmetry::Trivial => {
            for c in 0..copies {
                for l in 0..ld {
                    for r in 0..rd {
                        mat.set(block(c, l, r), block(c, l, r), rint(1));
                    }
                }
            }
        }
        Symmetry::Sign => {
            for c in 0..copies {
                for l in 0..ld {
                    for r in 0..rd {
                        mat.set(block(c, l, r), block(c, l, r), rint(-1));
                    }
                }
            }
        }
        Symmetry::Regular => {
            let perms = Permutation::all(arity);
            let index: BTreeMap<Vec<usize>, usize> = perms
                .iter()
                .enumerate()
                .map(|(i, p)| (p.images().to_vec(), i))
                .collect();
            let s = Permutation::adjacent(arity, gen_index);
            for c in 0..copies {
                for (j, g) in perms.iter().enumerate() {
                    let target = if acts_on_left {
                        // Left regular representation: e_g ↦ e_{σg}.
                        s.compose(g).unwrap()
                    } else {
                        // Right regular: e_g ↦ e_{gσ}.
                        g.compose(&s).unwrap()
                    };
                    let t = index[target.images()];
                    if acts_on_left {
                        for r in 0..rd {
                            mat.set(block(c, t, r), block(c, j, r), rint(1));
                        }
                    } else {
                        for l in 0..ld {
                            mat.set(block(c, l, t), block(c, l, j), rint(1));
                        }
                    }
                }
            }
        }
    }
    mat
}

/// A finitely supported collection of based components.
#[derive(Clone, Debug, Default)]
pub struct SBimodule {
    pub components: BTreeMap<(usize, usize), BasedModule>,
}

impl SBimodule {
    pub fn dim(&self, m: usize, n: usize) -> usize {
        self.components.get(&(m, n)).map_or(0, |c| c.dim)
    }
}

/// The identity S-bimodule up to `max_arity`: `k[S_n]` in arity `(n, n)`,
/// zero elsewhere.
pub fn identity_bimodule(max_arity: usize) -> SBimodule {
    assert!(max_arity >= 1);
    let mut components = BTreeMap::new();
    for n in 1..=max_arity {
        components.insert((n, n), BasedModule::regular_bimodule(n));
    }
    SBimodule { components }
}

/// Arena of module components referenced by graph decorations.
#[derive(Clone, Debug, Default)]
pub struct ModuleTable {
    modules: Vec<BasedModule>,
}

impl ModuleTable {
    pub fn add(&mut self, module: BasedModule) -> ModuleId {
        self.modules.push(module);
        self.modules.len() - 1
    }

    pub fn get(&self, id: ModuleId) -> &BasedModule {
        &self.modules[id]
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn dense(v: Vec<i64>) -> Vec<Rat> {
        v.into_iter().map(crate::rint).collect()
    }

    #[test]
    fn identity_bimodule_dims() {
        let i = identity_bimodule(3);
        assert_eq!(i.dim(1, 1), 1);
        assert_eq!(i.dim(3, 3), 6);
        assert_eq!(i.dim(2, 3), 0);
    }

    #[test]
    fn identity_permutations_act_trivially() {
        let m = BasedModule::regular_bimodule(3);
        let v = dense(vec![1, 2, 0, 0, -1, 3]);
        let out = m
            .act(&Permutation::identity(3), &v, &Permutation::identity(3))
            .unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn sign_component_negates_under_swap() {
        let m = BasedModule::from_symmetries(
            1,
            2,
            1,
            0,
            "b".into(),
            Symmetry::Trivial,
            Symmetry::Sign,
            1,
        );
        let v = dense(vec![1]);
        let out = m
            .act(&Permutation::identity(1), &v, &Permutation::adjacent(2, 0))
            .unwrap();
        assert_eq!(out, dense(vec![-1]));
    }

    #[test]
    fn regular_right_action_matches_explicit_matrices() {
        // k[S_2] with the right regular action: basis (id, (01)); acting by
        // (01) swaps the basis vectors. The explicit matrix is [[0,1],[1,0]].
        let m = BasedModule::from_symmetries(
            1,
            2,
            1,
            0,
            "mu".into(),
            Symmetry::Trivial,
            Symmetry::Regular,
            1,
        );
        assert_eq!(m.dim, 2);
        let s = Permutation::adjacent(2, 0);
        let mat = m.right_matrix(&s);
        let expected = RationalMatrix::from_rows(vec![
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(0, 1)],
        ]);
        assert_eq!(mat, expected);
    }

    #[test]
    fn braid_relations_hold_on_regular_bimodule() {
        let m = BasedModule::regular_bimodule(3);
        for gens in [&[0usize, 1][..]] {
            for &i in gens {
                let s = Permutation::adjacent(3, i);
                let mat = m.left_matrix(&s);
                assert_eq!(mat.mul(&mat), RationalMatrix::identity(6), "s_i^2 = id");
            }
        }
        let s0 = Permutation::adjacent(3, 0);
        let s1 = Permutation::adjacent(3, 1);
        let l0 = m.left_matrix(&s0);
        let l1 = m.left_matrix(&s1);
        assert_eq!(
            l0.mul(&l1).mul(&l0),
            l1.mul(&l0).mul(&l1),
            "braid relation"
        );
    }

    #[test]
    fn left_and_right_actions_commute() {
        let m = BasedModule::regular_bimodule(3);
        for l in Permutation::all(3).iter().take(4) {
            for r in Permutation::all(3).iter().take(4) {
                let lr = m.left_matrix(l).mul(&m.right_matrix(r));
                let rl = m.right_matrix(r).mul(&m.left_matrix(l));
                assert_eq!(lr, rl);
            }
        }
    }

    #[test]
    fn bimodule_axiom_on_composites() {
        // act(v, στ) on the right equals acting first by σ then τ, and the
        // left action is a homomorphism.
        let m = BasedModule::regular_bimodule(3);
        let perms = Permutation::all(3);
        for a in &perms {
            for b in &perms {
                let ab = a.compose(b).unwrap();
                assert_eq!(
                    m.left_matrix(&ab),
                    m.left_matrix(a).mul(&m.left_matrix(b)),
                    "left action homomorphism"
                );
                // Acting first by a then by b is acting by ab.
                assert_eq!(
                    m.right_matrix(&ab),
                    m.right_matrix(b).mul(&m.right_matrix(a)),
                    "right action anti-homomorphism"
                );
            }
        }
    }
}
