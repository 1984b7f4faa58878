//! Bar and cobar machinery. Bar pictures are connected graphs whose
//! vertices carry suspended quotient elements; the boundary contracts
//! adjacent pairs and composes their decorations. Augmented pictures add a
//! lower zone of plain quotient vertices fed only by global inputs; their
//! boundary also drops minimal suspended vertices into that zone. Cobar
//! pictures carry desuspended dual elements and their boundary splits one
//! vertex into a two-stage decomposition of its class.
//!
//! All Koszul-sign conventions live in the small helpers below; the d²=0
//! suites are the contract that pins them.

use crate::graphs::{
    enumerate_shapes, merge_group, Decorated, EnumConstraints, Level, MergedPosition, Shape, Src,
};
use crate::linalg::{sv_add, ChainComplex, RationalMatrix, SparseVec};
use crate::propcalc::Engine;
use crate::sbimodule::{ModuleId, ModuleTable};
use crate::space::ComponentSpace;
use crate::{rint, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Sign for moving the factor at position `i` to the front of a graded
/// tensor.
pub fn extract_sign(degrees: &[i64], i: usize) -> i64 {
    if degrees[i] % 2 == 0 {
        return 1;
    }
    let odd_before = degrees[..i].iter().filter(|d| **d % 2 != 0).count();
    if odd_before % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign for moving the factors at positions `i < j` to the front, in that
/// order.
pub fn extract_pair_sign(degrees: &[i64], i: usize, j: usize) -> i64 {
    let s1 = extract_sign(degrees, i);
    if degrees[j] % 2 == 0 {
        return s1;
    }
    let odd_before_j = degrees[..j]
        .iter()
        .enumerate()
        .filter(|(l, d)| *l != i && **d % 2 != 0)
        .count();
    if odd_before_j % 2 == 0 {
        s1
    } else {
        -s1
    }
}

/// The pair extracted in vertex order is composed with the flow-lower
/// factor first; when the extraction order disagrees, the two suspended
/// factors are swapped.
fn contraction_swap_sign(first_is_feeder: bool) -> i64 {
    if first_is_feeder {
        1
    } else {
        -1
    }
}

/// Extra sign attached to one two-stage splitting term of a dual element:
/// reordering the suspended generators of the bar graph so the upper part
/// comes first, then desuspension bookkeeping per stage weight.
fn split_term_sign(reorder_sign: i64, lower_weight: usize, _upper_weight: usize) -> i64 {
    // Moving the desuspension past the lower stage's suspensions.
    if lower_weight % 2 == 0 {
        reorder_sign
    } else {
        -reorder_sign
    }
}

/// Augmented picture component: the underlying space plus, per basis
/// index, whether every upper vertex carries weight one.
#[derive(Clone, Debug)]
pub struct AbComponent {
    pub space: ComponentSpace,
    pub pure: Vec<bool>,
}

/// Splitting table of one dual component: for each dual basis element, its
/// two-stage decompositions as decorated two-vertex pictures over dual
/// modules.
#[derive(Clone, Debug)]
pub struct SplitTable {
    pub terms: Vec<Vec<(Decorated, Rat)>>,
}

impl Engine {
    /// Bar component: connected graphs with `k` suspended quotient
    /// vertices of total weight `w`.
    pub fn bar_component(&mut self, m: usize, n: usize, w: usize, k: usize) -> Rc<ComponentSpace> {
        if let Some(c) = self.bar_comps.get(&(m, n, w, k)) {
            return Rc::clone(c);
        }
        let options = self.suspended_quotient_options(w);
        let mut shapes = Vec::new();
        for multiset in Engine::weight_multisets(&options, w, Some(k)) {
            let slots: Vec<(ModuleId, Level)> =
                multiset.into_iter().map(|id| (id, Level::Free)).collect();
            shapes.extend(enumerate_shapes(
                &self.table,
                n,
                m,
                &slots,
                EnumConstraints::free_graphs(true),
            ));
        }
        shapes.sort_by_key(|s| s.encode(&self.table));
        shapes.dedup_by_key(|s| s.encode(&self.table));
        let comp = Rc::new(ComponentSpace::build(&self.table, m, n, shapes));
        self.bar_comps.insert((m, n, w, k), Rc::clone(&comp));
        comp
    }

    /// All nonzero suspended quotient modules of weight up to `w`, within
    /// the arity bounds a connected graph permits.
    fn suspended_quotient_options(&mut self, w: usize) -> Vec<(ModuleId, usize)> {
        let mut options = Vec::new();
        for w1 in 1..=w {
            let (mb, nb) = self.arity_bounds_at_weight(w1);
            for m1 in 1..=mb {
                for n1 in 1..=nb {
                    if let Some(id) = self.squot_module(m1, n1, w1) {
                        options.push((id, w1));
                    }
                }
            }
        }
        options
    }

    /// Plain quotient modules of weight up to `w`.
    fn quotient_options(&mut self, w: usize) -> Vec<(ModuleId, usize)> {
        let mut options = Vec::new();
        for w1 in 1..=w {
            let (mb, nb) = self.arity_bounds_at_weight(w1);
            for m1 in 1..=mb {
                for n1 in 1..=nb {
                    if let Some(id) = self.quot_module(m1, n1, w1) {
                        options.push((id, w1));
                    }
                }
            }
        }
        options
    }

    /// Contraction terms of one decorated bar-type graph: every adjacent
    /// pair of suspended vertices is merged, the two decorations composed
    /// in the quotient.
    fn contraction_image(
        &mut self,
        dec: &Decorated,
        merged_level: Level,
    ) -> Vec<(Decorated, Rat)> {
        let shape = &dec.shape;
        let degrees: Vec<i64> = shape
            .vertices
            .iter()
            .map(|v| self.table.get(v.module).degree)
            .collect();
        // Adjacent suspended pairs, with the feeder identified.
        let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (u, _, v, _) in shape.edges() {
            if degrees[u] % 2 != 0 && degrees[v] % 2 != 0 {
                let (a, b) = (u.min(v), u.max(v));
                pairs.insert((a, b), u);
            }
        }
        let mut out = Vec::new();
        for ((a, b), feeder) in pairs {
            let fed = if feeder == a { b } else { a };
            let (wf, wd) = (
                self.table.get(shape.vertices[feeder].module).weight,
                self.table.get(shape.vertices[fed].module).weight,
            );
            let wsum = wf + wd;
            let (mp, np) = external_profile(&self.table, shape, &[feeder, fed]);
            let merged_module = match merged_level {
                Level::Upper | Level::Free => self.squot_module(mp, np, wsum),
                Level::Lower => self.quot_module(mp, np, wsum),
            };
            let Some(merged_module) = merged_module else { continue };
            let res = merge_group(
                &self.table,
                shape,
                &[feeder],
                fed,
                merged_module,
                merged_level,
                MergedPosition::Front,
            );
            let composite = self.compose_picture(
                &res.mini,
                &[dec.decoration[feeder], dec.decoration[fed]],
            );
            if composite.is_empty() {
                continue;
            }
            let sign = extract_pair_sign(&degrees, a, b)
                * contraction_swap_sign(a == feeder);
            let rest: Vec<usize> = (0..shape.vertices.len())
                .filter(|&v| v != a && v != b)
                .map(|v| dec.decoration[v])
                .collect();
            for (ci, cc) in &composite {
                let mut decoration = Vec::with_capacity(rest.len() + 1);
                decoration.push(*ci);
                decoration.extend_from_slice(&rest);
                out.push((
                    Decorated {
                        shape: res.merged.clone(),
                        decoration,
                    },
                    cc * rint(sign),
                ));
            }
        }
        out
    }

    /// Drop terms: each minimal upper vertex is desuspended and merged
    /// with the lower vertices feeding it.
    fn drop_image(&mut self, dec: &Decorated) -> Vec<(Decorated, Rat)> {
        let shape = &dec.shape;
        let degrees: Vec<i64> = shape
            .vertices
            .iter()
            .map(|v| self.table.get(v.module).degree)
            .collect();
        let uppers: Vec<usize> = (0..shape.vertices.len())
            .filter(|&v| shape.vertices[v].level == Level::Upper)
            .collect();
        let edges = shape.edges();
        let mut out = Vec::new();
        for &u in &uppers {
            // Only sources of the upper zone may drop.
            if edges
                .iter()
                .any(|&(a, _, b, _)| b == u && shape.vertices[a].level == Level::Upper)
            {
                continue;
            }
            let mut feeders: Vec<usize> = edges
                .iter()
                .filter(|&&(a, _, b, _)| b == u && shape.vertices[a].level == Level::Lower)
                .map(|&(a, _, _, _)| a)
                .collect();
            feeders.sort_unstable();
            feeders.dedup();
            let wsum: usize = feeders
                .iter()
                .chain(std::iter::once(&u))
                .map(|&v| self.table.get(shape.vertices[v].module).weight)
                .sum();
            let group: Vec<usize> = feeders.iter().cloned().chain(std::iter::once(u)).collect();
            let (mp, np) = external_profile(&self.table, shape, &group);
            let Some(merged_module) = self.quot_module(mp, np, wsum) else {
                continue;
            };
            let res = merge_group(
                &self.table,
                shape,
                &feeders,
                u,
                merged_module,
                Level::Lower,
                MergedPosition::Back,
            );
            let mini_dec: Vec<usize> = group.iter().map(|&v| dec.decoration[v]).collect();
            let composite = self.compose_picture(&res.mini, &mini_dec);
            if composite.is_empty() {
                continue;
            }
            let sign = extract_sign(&degrees, u);
            let rest: Vec<usize> = (0..shape.vertices.len())
                .filter(|v| !group.contains(v))
                .map(|v| dec.decoration[v])
                .collect();
            for (ci, cc) in &composite {
                let mut decoration = rest.clone();
                decoration.push(*ci);
                out.push((
                    Decorated {
                        shape: res.merged.clone(),
                        decoration,
                    },
                    cc * rint(sign),
                ));
            }
        }
        out
    }

    /// Matrix of the bar boundary from degree `k` to `k - 1` at `(m, n)`,
    /// total weight `w`.
    pub fn bar_boundary(&mut self, m: usize, n: usize, w: usize, k: usize) -> Rc<RationalMatrix> {
        if let Some(b) = self.bar_bounds.get(&(m, n, w, k)) {
            return Rc::clone(b);
        }
        let source = self.bar_component(m, n, w, k);
        let target = self.bar_component(m, n, w, k.saturating_sub(1));
        let mut mat = RationalMatrix::zero(target.dim, source.dim);
        if k >= 2 {
            for j in 0..source.dim {
                let mut image: Vec<(Decorated, Rat)> = Vec::new();
                for (dec, c) in source.lift(j) {
                    for (t, tc) in self.contraction_image(&dec, Level::Free) {
                        image.push((t, tc * &c));
                    }
                }
                for (r, v) in target.coords(&self.table, &image) {
                    mat.set(r, j, v);
                }
            }
        }
        let mat = Rc::new(mat);
        self.bar_bounds.insert((m, n, w, k), Rc::clone(&mat));
        mat
    }

    /// The bar complex of one component and weight: degrees 1..w.
    pub fn bar_complex(&mut self, m: usize, n: usize, w: usize) -> ChainComplex {
        let mut components = Vec::new();
        let mut boundaries = Vec::new();
        for k in 1..=w {
            components.push(self.bar_component(m, n, w, k).dim);
            if k == 1 {
                boundaries.push(RationalMatrix::zero(0, components[0]));
            } else {
                boundaries.push((*self.bar_boundary(m, n, w, k)).clone());
            }
        }
        ChainComplex::new(1, components, boundaries)
    }

    /// Augmented picture component: `k` suspended vertices in the upper
    /// zone over an antichain of plain quotient vertices, total weight `w`.
    pub fn ab_component(&mut self, m: usize, n: usize, w: usize, k: usize) -> Rc<AbComponent> {
        if let Some(c) = self.ab_comps.get(&(m, n, w, k)) {
            return Rc::clone(c);
        }
        let upper_options = self.suspended_quotient_options(w);
        let lower_options = self.quotient_options(w);
        let mut shapes = Vec::new();
        for wu in k..=w {
            for uppers in Engine::weight_multisets(&upper_options, wu, Some(k)) {
                let wl = w - wu;
                let lower_sets = if wl == 0 {
                    vec![Vec::new()]
                } else {
                    Engine::weight_multisets(&lower_options, wl, None)
                };
                for lowers in lower_sets {
                    let mut slots: Vec<(ModuleId, Level)> = Vec::new();
                    slots.extend(lowers.iter().map(|&id| (id, Level::Lower)));
                    slots.extend(uppers.iter().map(|&id| (id, Level::Upper)));
                    if slots.is_empty() {
                        continue;
                    }
                    shapes.extend(enumerate_shapes(
                        &self.table,
                        n,
                        m,
                        &slots,
                        EnumConstraints::zoned(),
                    ));
                }
            }
        }
        shapes.sort_by_key(|s| s.encode(&self.table));
        shapes.dedup_by_key(|s| s.encode(&self.table));
        let space = ComponentSpace::build(&self.table, m, n, shapes);
        let mut pure = vec![false; space.dim];
        for block in &space.blocks {
            let is_pure = block
                .shape
                .vertices
                .iter()
                .filter(|v| v.level == Level::Upper)
                .all(|v| self.table.get(v.module).weight == 1);
            if is_pure {
                for i in block.offset..block.offset + block.q_dim {
                    pure[i] = true;
                }
            }
        }
        let comp = Rc::new(AbComponent { space, pure });
        self.ab_comps.insert((m, n, w, k), Rc::clone(&comp));
        comp
    }

    /// Contract and drop matrices from upper-vertex count `k` to `k - 1`.
    pub fn ab_maps(
        &mut self,
        m: usize,
        n: usize,
        w: usize,
        k: usize,
    ) -> Rc<(RationalMatrix, RationalMatrix)> {
        if let Some(p) = self.ab_maps.get(&(m, n, w, k)) {
            return Rc::clone(p);
        }
        let source = self.ab_component(m, n, w, k);
        let target = self.ab_component(m, n, w, k.saturating_sub(1));
        let mut contract = RationalMatrix::zero(target.space.dim, source.space.dim);
        let mut drop = RationalMatrix::zero(target.space.dim, source.space.dim);
        if k >= 1 {
            for j in 0..source.space.dim {
                let lifted = source.space.lift(j);
                if k >= 2 {
                    let mut image: Vec<(Decorated, Rat)> = Vec::new();
                    for (dec, c) in &lifted {
                        for (t, tc) in self.contraction_image(dec, Level::Upper) {
                            image.push((t, tc * c));
                        }
                    }
                    for (r, v) in target.space.coords(&self.table, &image) {
                        contract.set(r, j, v);
                    }
                }
                let mut image: Vec<(Decorated, Rat)> = Vec::new();
                for (dec, c) in &lifted {
                    for (t, tc) in self.drop_image(dec) {
                        image.push((t, tc * c));
                    }
                }
                for (r, v) in target.space.coords(&self.table, &image) {
                    drop.set(r, j, v);
                }
            }
        }
        let pair = Rc::new((contract, drop));
        self.ab_maps.insert((m, n, w, k), Rc::clone(&pair));
        pair
    }

    /// The augmented complex (bar pictures over a stage of quotient
    /// vertices) of one component and weight: degrees 0..w.
    pub fn augmented_complex(&mut self, m: usize, n: usize, w: usize) -> ChainComplex {
        let mut components = Vec::new();
        let mut boundaries = Vec::new();
        for k in 0..=w {
            components.push(self.ab_component(m, n, w, k).space.dim);
            if k == 0 {
                boundaries.push(RationalMatrix::zero(0, components[0]));
            } else {
                let maps = self.ab_maps(m, n, w, k);
                let mut total = maps.0.clone();
                for r in 0..maps.1.rows() {
                    for (c, v) in maps.1.row(r).clone() {
                        total.add_to(r, c, &v);
                    }
                }
                boundaries.push(total);
            }
        }
        ChainComplex::new(0, components, boundaries)
    }

    /// Cobar component: connected graphs with `k` vertices carrying
    /// desuspended dual elements of total weight `w`.
    pub fn cobar_component(&mut self, m: usize, n: usize, w: usize, k: usize) -> Rc<ComponentSpace> {
        if let Some(c) = self.cobar_comps.get(&(m, n, w, k)) {
            return Rc::clone(c);
        }
        let mut options = Vec::new();
        for w1 in 1..=w {
            let (mb, nb) = self.arity_bounds_at_weight(w1);
            for m1 in 1..=mb {
                for n1 in 1..=nb {
                    if let Some(id) = self.dual_module(m1, n1, w1) {
                        options.push((id, w1));
                    }
                }
            }
        }
        let mut shapes = Vec::new();
        for multiset in Engine::weight_multisets(&options, w, Some(k)) {
            let slots: Vec<(ModuleId, Level)> =
                multiset.into_iter().map(|id| (id, Level::Free)).collect();
            shapes.extend(enumerate_shapes(
                &self.table,
                n,
                m,
                &slots,
                EnumConstraints::free_graphs(true),
            ));
        }
        shapes.sort_by_key(|s| s.encode(&self.table));
        shapes.dedup_by_key(|s| s.encode(&self.table));
        let comp = Rc::new(ComponentSpace::build(&self.table, m, n, shapes));
        self.cobar_comps.insert((m, n, w, k), Rc::clone(&comp));
        comp
    }

    /// Splitting table for the dual component `(m, n, w)`: every dual
    /// basis element decomposed into two-stage pictures with dual-decorated
    /// stages. The decomposition is computed in bar coordinates and then
    /// expressed in dual coordinates; solvability is asserted, which checks
    /// that the dual components are closed under two-stage decomposition.
    pub fn split_table(&mut self, m: usize, n: usize, w: usize) -> Rc<SplitTable> {
        if let Some(t) = self.splits.get(&(m, n, w)) {
            return Rc::clone(t);
        }
        let dual = self.koszul_dual_component(m, n, w);
        let bar_top = self.bar_component(m, n, w, w);
        // Meta components: two-vertex two-stage pictures decorated by
        // whole bar components (ambient) and by dual components (target).
        let mut meta_bar_shapes = Vec::new();
        let mut meta_dual_shapes = Vec::new();
        for w1 in 1..w {
            let w2 = w - w1;
            let (mb1, nb1) = self.arity_bounds_at_weight(w1);
            let (mb2, nb2) = self.arity_bounds_at_weight(w2);
            for m1 in 1..=mb1 {
                for n1 in 1..=nb1 {
                    for m2 in 1..=mb2 {
                        for n2 in 1..=nb2 {
                            let lower_bar = self.bar_top_module(m1, n1, w1);
                            let upper_bar = self.bar_top_module(m2, n2, w2);
                            let lower_dual = self.dual_module(m1, n1, w1);
                            let upper_dual = self.dual_module(m2, n2, w2);
                            if let (Some(lb), Some(ub)) = (lower_bar, upper_bar) {
                                meta_bar_shapes.extend(enumerate_shapes(
                                    &self.table,
                                    n,
                                    m,
                                    &[(lb, Level::Lower), (ub, Level::Upper)],
                                    EnumConstraints::two_level(true, true, true, false),
                                ));
                            }
                            if let (Some(ld), Some(ud)) = (lower_dual, upper_dual) {
                                meta_dual_shapes.extend(enumerate_shapes(
                                    &self.table,
                                    n,
                                    m,
                                    &[(ld, Level::Lower), (ud, Level::Upper)],
                                    EnumConstraints::two_level(true, true, true, false),
                                ));
                            }
                        }
                    }
                }
            }
        }
        meta_bar_shapes.sort_by_key(|s| s.encode(&self.table));
        meta_bar_shapes.dedup_by_key(|s| s.encode(&self.table));
        meta_dual_shapes.sort_by_key(|s| s.encode(&self.table));
        meta_dual_shapes.dedup_by_key(|s| s.encode(&self.table));
        let meta_bar = ComponentSpace::build(&self.table, m, n, meta_bar_shapes);
        let meta_dual = ComponentSpace::build(&self.table, m, n, meta_dual_shapes);
        // Inclusion of the dual-decorated pictures into the bar-decorated
        // ones, columnwise.
        let mut inclusion = RationalMatrix::zero(meta_bar.dim, meta_dual.dim);
        for j in 0..meta_dual.dim {
            let mut image: Vec<(Decorated, Rat)> = Vec::new();
            for (dec, c) in meta_dual.lift(j) {
                image.extend(self.expand_dual_decorations(&dec, &c));
            }
            for (r, v) in meta_bar.coords(&self.table, &image) {
                inclusion.set(r, j, v);
            }
        }
        // Split each dual basis element.
        let mut terms = Vec::with_capacity(dual.dim);
        for d in 0..dual.dim {
            let mut split_vec = SparseVec::new();
            let lift = dual.kernel.col(d);
            for (bar_idx, bc) in lift {
                for (g, gc) in bar_top.lift(bar_idx) {
                    let coeff = &bc * &gc;
                    for (meta_dec, sc) in self.cuts_of(&g) {
                        let total = &coeff * &sc;
                        for (r, v) in meta_bar.coords(&self.table, &[(meta_dec, total.clone())]) {
                            sv_add(&mut split_vec, r, &v);
                        }
                    }
                }
            }
            let rhs: RationalMatrix = {
                let mut r = RationalMatrix::zero(meta_bar.dim, 1);
                for (i, v) in &split_vec {
                    r.set(*i, 0, v.clone());
                }
                r
            };
            let sol = inclusion
                .solve_matrix(&rhs)
                .expect("dual components are closed under two-stage decomposition");
            let mut dterms: Vec<(Decorated, Rat)> = Vec::new();
            for (i, v) in sol.col(0) {
                for (dec, c) in meta_dual.lift(i) {
                    dterms.push((dec, c * &v));
                }
            }
            terms.push(dterms);
        }
        let table = Rc::new(SplitTable { terms });
        self.splits.insert((m, n, w), Rc::clone(&table));
        table
    }

    /// Rewrites a dual-decorated picture as bar-decorated terms through the
    /// kernel inclusions.
    fn expand_dual_decorations(&mut self, dec: &Decorated, coeff: &Rat) -> Vec<(Decorated, Rat)> {
        let mut terms: Vec<(Vec<usize>, Rat)> = vec![(Vec::new(), coeff.clone())];
        let mut new_modules = Vec::new();
        for (vi, v) in dec.shape.vertices.iter().enumerate() {
            let (vm, vn, vw) = self.module_weight_key(v.module);
            let dualdata = self.koszul_dual_component(vm, vn, vw);
            let bar_mod = self.bar_top_module(vm, vn, vw).expect("nonzero bar component");
            new_modules.push(bar_mod);
            let col = dualdata.kernel.col(dec.decoration[vi]);
            let mut next = Vec::with_capacity(terms.len() * col.len());
            for (tuple, c) in &terms {
                for (bi, bc) in &col {
                    let mut t = tuple.clone();
                    t.push(*bi);
                    next.push((t, c * bc));
                }
            }
            terms = next;
        }
        let mut shape = dec.shape.clone();
        for (vi, v) in shape.vertices.iter_mut().enumerate() {
            v.module = new_modules[vi];
        }
        terms
            .into_iter()
            .map(|(decoration, c)| {
                (
                    Decorated {
                        shape: shape.clone(),
                        decoration,
                    },
                    c,
                )
            })
            .collect()
    }

    /// All two-stage cuts of a pure bar graph, as two-vertex meta pictures
    /// decorated by whole-bar-component basis elements.
    fn cuts_of(&mut self, g: &Decorated) -> Vec<(Decorated, Rat)> {
        let k = g.shape.vertices.len();
        let edges = g.shape.edges();
        let mut out = Vec::new();
        for mask in 1u32..(1u32 << k).saturating_sub(1) {
            let lower: Vec<usize> = (0..k).filter(|v| mask & (1 << v) != 0).collect();
            let upper: Vec<usize> = (0..k).filter(|v| mask & (1 << v) == 0).collect();
            // The lower part receives no edges from the upper part.
            if edges
                .iter()
                .any(|&(a, _, b, _)| upper.contains(&a) && lower.contains(&b))
            {
                continue;
            }
            if !induced_connected(&edges, &lower) || !induced_connected(&edges, &upper) {
                continue;
            }
            // Reorder sign: sort the suspended factors to upper-then-lower.
            let mut vperm = vec![0usize; k];
            for (pos, &v) in upper.iter().chain(lower.iter()).enumerate() {
                vperm[v] = pos;
            }
            let degrees = vec![1i64; k];
            let reorder = crate::graphs::graded_perm_sign(&degrees, &vperm);
            let sign = split_term_sign(reorder, lower.len(), upper.len());
            for (meta, c) in self.cut_to_meta(g, &lower, &upper) {
                out.push((meta, c * rint(sign)));
            }
        }
        out
    }

    /// Builds the two-vertex meta picture of one cut, decorating the two
    /// stages by the standalone cluster classes in their bar components.
    fn cut_to_meta(
        &mut self,
        g: &Decorated,
        lower: &[usize],
        upper: &[usize],
    ) -> Vec<(Decorated, Rat)> {
        let shape = &g.shape;
        let consumers = shape.consumers(&self.table);
        let in_lower = |v: usize| lower.contains(&v);
        // Lower cluster out-ports in scan order: cut edges and global
        // outputs become the lower stage's meta out-ports.
        let mut lower_out: Vec<(usize, usize)> = Vec::new();
        for &v in lower {
            for (p, sink) in consumers[v].iter().enumerate() {
                match sink.unwrap() {
                    crate::graphs::Sink::InPort { vertex, .. } if !in_lower(vertex) => {
                        lower_out.push((v, p));
                    }
                    crate::graphs::Sink::GlobalOut(_) => lower_out.push((v, p)),
                    _ => {}
                }
            }
        }
        let mut upper_out: Vec<(usize, usize)> = Vec::new();
        for &v in upper {
            for (p, sink) in consumers[v].iter().enumerate() {
                if let crate::graphs::Sink::GlobalOut(_) = sink.unwrap() {
                    upper_out.push((v, p));
                }
            }
        }
        // Meta stage in-port sources, in the same scan order used by
        // `standalone_cluster` when numbering the cluster's global inputs.
        let mut lower_meta_src: Vec<Src> = Vec::new();
        for &v in lower {
            for src in &shape.vertices[v].in_src {
                match src {
                    Src::In(i) => lower_meta_src.push(Src::In(*i)),
                    Src::Out { vertex, .. } if in_lower(*vertex) => {}
                    Src::Out { .. } => {
                        unreachable!("cut lower part receives only globals and internals")
                    }
                }
            }
        }
        let mut upper_meta_src: Vec<Src> = Vec::new();
        for &v in upper {
            for src in &shape.vertices[v].in_src {
                match src {
                    Src::In(i) => upper_meta_src.push(Src::In(*i)),
                    Src::Out { vertex, port } if in_lower(*vertex) => {
                        let rank = lower_out
                            .iter()
                            .position(|&(lv, lp)| lv == *vertex && lp == *port)
                            .unwrap();
                        upper_meta_src.push(Src::Out {
                            vertex: 0,
                            port: rank,
                        });
                    }
                    Src::Out { .. } => {}
                }
            }
        }
        let lower_graph = standalone_cluster(shape, g, lower, &lower_out);
        let upper_graph = standalone_cluster(shape, g, upper, &upper_out);
        let (lm, ln) = (lower_graph.shape.m_out, lower_graph.shape.n_in);
        let (um, un) = (upper_graph.shape.m_out, upper_graph.shape.n_in);
        let (wl, wu) = (lower.len(), upper.len());
        let (Some(lower_mod), Some(upper_mod)) = (
            self.bar_top_module(lm, ln, wl),
            self.bar_top_module(um, un, wu),
        ) else {
            return Vec::new();
        };
        // Meta global outputs, in the big graph's output order.
        let meta_out: Vec<Src> = shape
            .global_out
            .iter()
            .map(|src| match src {
                Src::In(_) => unreachable!("connected bar graphs have no pass strands"),
                Src::Out { vertex, port } => {
                    if in_lower(*vertex) {
                        let rank = lower_out
                            .iter()
                            .position(|&(lv, lp)| lv == *vertex && lp == *port)
                            .unwrap();
                        Src::Out {
                            vertex: 0,
                            port: rank,
                        }
                    } else {
                        let rank = upper_out
                            .iter()
                            .position(|&(uv, up)| uv == *vertex && up == *port)
                            .unwrap();
                        Src::Out {
                            vertex: 1,
                            port: rank,
                        }
                    }
                }
            })
            .collect();
        let meta_shape = Shape {
            n_in: shape.n_in,
            m_out: shape.m_out,
            vertices: vec![
                crate::graphs::VertexShape {
                    module: lower_mod,
                    level: Level::Lower,
                    in_src: lower_meta_src,
                },
                crate::graphs::VertexShape {
                    module: upper_mod,
                    level: Level::Upper,
                    in_src: upper_meta_src,
                },
            ],
            global_out: meta_out,
        };
        debug_assert!(meta_shape.validate(&self.table).is_ok());
        // Decorations: classes of the standalone cluster graphs in their
        // whole bar components.
        let lower_comp = self.bar_component(lm, ln, wl, wl);
        let upper_comp = self.bar_component(um, un, wu, wu);
        let lc = lower_comp.coords(&self.table, &[(lower_graph, rint(1))]);
        let uc = upper_comp.coords(&self.table, &[(upper_graph, rint(1))]);
        let mut terms = Vec::new();
        for (li, lv) in &lc {
            for (ui, uv) in &uc {
                terms.push((
                    Decorated {
                        shape: meta_shape.clone(),
                        decoration: vec![*li, *ui],
                    },
                    lv * uv,
                ));
            }
        }
        terms
    }

    /// Matrix of the cobar boundary from `k` vertices to `k + 1` at
    /// `(m, n)`, total weight `w` (homological degree `w - k` down to
    /// `w - k - 1`).
    pub fn cobar_boundary(&mut self, m: usize, n: usize, w: usize, k: usize) -> Rc<RationalMatrix> {
        if let Some(b) = self.cobar_bounds.get(&(m, n, w, k)) {
            return Rc::clone(b);
        }
        let source = self.cobar_component(m, n, w, k);
        let target = self.cobar_component(m, n, w, k + 1);
        let mut mat = RationalMatrix::zero(target.dim, source.dim);
        for j in 0..source.dim {
            let mut image: Vec<(Decorated, Rat)> = Vec::new();
            for (dec, c) in source.lift(j) {
                let degrees: Vec<i64> = dec
                    .shape
                    .vertices
                    .iter()
                    .map(|v| self.table.get(v.module).degree)
                    .collect();
                for vi in 0..dec.shape.vertices.len() {
                    let (vm, vn, vw) = self.module_weight_key(dec.shape.vertices[vi].module);
                    if vw < 2 {
                        continue;
                    }
                    // Operator of odd degree applied at position vi.
                    let odd_before = degrees[..vi].iter().filter(|d| **d % 2 != 0).count();
                    let pos_sign = if odd_before % 2 == 0 { 1 } else { -1 };
                    let split = self.split_table(vm, vn, vw);
                    for (meta, sc) in &split.terms[dec.decoration[vi]] {
                        let spliced = splice_vertex(&dec, vi, meta);
                        image.push((spliced, &c * sc * rint(pos_sign)));
                    }
                }
            }
            for (r, v) in target.coords(&self.table, &image) {
                mat.set(r, j, v);
            }
        }
        let mat = Rc::new(mat);
        self.cobar_bounds.insert((m, n, w, k), Rc::clone(&mat));
        mat
    }

    /// The cobar complex of one component and weight: homological degree
    /// `d` holds the pictures with `w - d` vertices, so degrees run 0..w-1
    /// and the boundary lowers the degree by splitting a vertex.
    pub fn cobar_complex(&mut self, m: usize, n: usize, w: usize) -> ChainComplex {
        let mut components = Vec::new();
        let mut boundaries = Vec::new();
        for d in 0..w {
            let k = w - d;
            components.push(self.cobar_component(m, n, w, k).dim);
            if d == 0 {
                boundaries.push(RationalMatrix::zero(0, components[0]));
            } else {
                boundaries.push((*self.cobar_boundary(m, n, w, k)).clone());
            }
        }
        ChainComplex::new(0, components, boundaries)
    }

    /// Composition of a connected two-stage picture with one non-unit
    /// vertex per stage: the two quotient elements are grafted and reduced.
    /// This is the restriction of the composition to such pictures.
    pub fn partial_product(
        &mut self,
        picture: &Shape,
        lower_dec: &SparseVec,
        upper_dec: &SparseVec,
    ) -> crate::Result<SparseVec> {
        if picture.vertices.len() != 2 {
            return Err(crate::Error::MalformedGraph(
                "partial product needs exactly two decorated vertices".into(),
            ));
        }
        if !picture.is_connected() {
            return Err(crate::Error::MalformedGraph(
                "partial product needs a connected picture".into(),
            ));
        }
        Ok(self.compose_picture_multi(picture, &[lower_dec.clone(), upper_dec.clone()]))
    }
}

/// Replaces vertex `at` of `big` by a two-vertex picture whose global legs
/// are spliced onto the vertex's ports; the new vertices are inserted at
/// position `at` in the meta picture's order and all levels are cleared.
pub fn splice_vertex(big: &Decorated, at: usize, meta: &Decorated) -> Decorated {
    let sub_k = meta.shape.vertices.len();
    let map_big = |v: usize| if v < at { v } else { v + sub_k - 1 };
    // A source in the big graph, remapped; resolving through the replaced
    // vertex happens below.
    let resolve_big_src = |src: &Src| -> Src {
        match src {
            Src::In(i) => Src::In(*i),
            Src::Out { vertex, port } => {
                if *vertex == at {
                    match &meta.shape.global_out[*port] {
                        Src::Out { vertex: sv, port: sp } => Src::Out {
                            vertex: at + sv,
                            port: *sp,
                        },
                        // A pass strand in the meta picture: follow it to
                        // the replaced vertex's in-port source.
                        Src::In(l) => match &big.shape.vertices[at].in_src[*l] {
                            Src::In(i) => Src::In(*i),
                            Src::Out { vertex, port } => Src::Out {
                                vertex: map_big(*vertex),
                                port: *port,
                            },
                        },
                    }
                } else {
                    Src::Out {
                        vertex: map_big(*vertex),
                        port: *port,
                    }
                }
            }
        }
    };
    let resolve_meta_src = |src: &Src| -> Src {
        match src {
            // The meta picture's global input `l` is the replaced vertex's
            // in-port `l`.
            Src::In(l) => match &big.shape.vertices[at].in_src[*l] {
                Src::In(i) => Src::In(*i),
                Src::Out { vertex, port } => Src::Out {
                    vertex: map_big(*vertex),
                    port: *port,
                },
            },
            Src::Out { vertex, port } => Src::Out {
                vertex: at + vertex,
                port: *port,
            },
        }
    };
    let mut vertices = Vec::with_capacity(big.shape.vertices.len() + sub_k - 1);
    let mut decoration = Vec::with_capacity(vertices.capacity());
    for (vi, v) in big.shape.vertices.iter().enumerate() {
        if vi == at {
            for (si, sv) in meta.shape.vertices.iter().enumerate() {
                vertices.push(crate::graphs::VertexShape {
                    module: sv.module,
                    level: Level::Free,
                    in_src: sv.in_src.iter().map(&resolve_meta_src).collect(),
                });
                decoration.push(meta.decoration[si]);
            }
        } else {
            vertices.push(crate::graphs::VertexShape {
                module: v.module,
                level: Level::Free,
                in_src: v.in_src.iter().map(&resolve_big_src).collect(),
            });
            decoration.push(big.decoration[vi]);
        }
    }
    Decorated {
        shape: Shape {
            n_in: big.shape.n_in,
            m_out: big.shape.m_out,
            vertices,
            global_out: big.shape.global_out.iter().map(&resolve_big_src).collect(),
        },
        decoration,
    }
}

/// External arity `(m', n')` of a vertex group: the ports wired outside
/// the group.
fn external_profile(
    table: &ModuleTable,
    shape: &Shape,
    group: &[usize],
) -> (usize, usize) {
    let in_group = |v: usize| group.contains(&v);
    let mut n_ext = 0usize;
    for &g in group {
        for src in &shape.vertices[g].in_src {
            match src {
                Src::Out { vertex, .. } if in_group(*vertex) => {}
                _ => n_ext += 1,
            }
        }
    }
    let consumers = shape.consumers(table);
    let mut m_ext = 0usize;
    for &g in group {
        for sink in consumers[g].iter().flatten() {
            match sink {
                crate::graphs::Sink::InPort { vertex, .. } if in_group(*vertex) => {}
                _ => m_ext += 1,
            }
        }
    }
    (m_ext, n_ext)
}

/// Whether the subgraph induced on `part` is connected.
fn induced_connected(edges: &[(usize, usize, usize, usize)], part: &[usize]) -> bool {
    if part.len() <= 1 {
        return true;
    }
    let pos = |v: usize| part.iter().position(|&p| p == v);
    let mut dsu: Vec<usize> = (0..part.len()).collect();
    fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
        if dsu[x] != x {
            let r = find(dsu, dsu[x]);
            dsu[x] = r;
        }
        dsu[x]
    }
    for &(a, _, b, _) in edges {
        if let (Some(pa), Some(pb)) = (pos(a), pos(b)) {
            let (ra, rb) = (find(&mut dsu, pa), find(&mut dsu, pb));
            dsu[ra] = rb;
        }
    }
    let root = find(&mut dsu, 0);
    (1..part.len()).all(|i| find(&mut dsu, i) == root)
}

/// Builds the standalone decorated graph of a cluster: vertices in the
/// given order, global inputs numbered in in-port scan order (external
/// ports only), global outputs in the order of `ext_out`.
fn standalone_cluster(
    shape: &Shape,
    g: &Decorated,
    cluster: &[usize],
    ext_out: &[(usize, usize)],
) -> Decorated {
    let local: BTreeMap<usize, usize> = cluster.iter().enumerate().map(|(l, &v)| (v, l)).collect();
    let mut next_in = 0usize;
    let vertices: Vec<crate::graphs::VertexShape> = cluster
        .iter()
        .map(|&v| crate::graphs::VertexShape {
            module: shape.vertices[v].module,
            level: Level::Free,
            in_src: shape.vertices[v]
                .in_src
                .iter()
                .map(|src| match src {
                    Src::Out { vertex, port } if local.contains_key(vertex) => Src::Out {
                        vertex: local[vertex],
                        port: *port,
                    },
                    _ => {
                        let i = next_in;
                        next_in += 1;
                        Src::In(i)
                    }
                })
                .collect(),
        })
        .collect();
    let global_out: Vec<Src> = ext_out
        .iter()
        .map(|&(v, p)| Src::Out {
            vertex: local[&v],
            port: p,
        })
        .collect();
    Decorated {
        shape: Shape {
            n_in: next_in,
            m_out: ext_out.len(),
            vertices,
            global_out,
        },
        decoration: cluster.iter().map(|&v| g.decoration[v]).collect(),
    }
}
