//! The composition calculus: free components of the prop generated by a
//! presentation, weight-graded quotient components by the relation ideal,
//! composition of quotient elements by grafting representatives, and the
//! two-stage composition product with units realized as pass strands.

use crate::graphs::{
    enumerate_shapes, Decorated, EnumConstraints, Level, Shape, Src, VertexShape,
};
use crate::linalg::{sv_add, sv_add_scaled, RationalMatrix, SparseVec};
use crate::perm::Permutation;
use crate::presentation::{direct_sum, parse_rat, Presentation};
use crate::sbimodule::{BasedModule, ModuleId, ModuleTable};
use crate::space::ComponentSpace;
use crate::{rint, Rat, Result};
use num::Zero;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Finite computational window: all verdicts are certified only up to
/// these bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationParams {
    pub max_weight: usize,
    pub max_biarity: usize,
}

impl TruncationParams {
    pub fn new(max_weight: usize, max_biarity: usize) -> Self {
        assert!(max_weight >= 1 && max_biarity >= 1);
        TruncationParams {
            max_weight,
            max_biarity,
        }
    }

    /// Components `(m, n)` with `m + n` within the biarity bound, in
    /// graded-lexicographic order.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 2..=self.max_biarity {
            for m in 1..s {
                out.push((m, s - m));
            }
        }
        out
    }
}

/// What a module in the engine's table decorates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModuleKind {
    /// Generator component `V(m, n)`.
    Generator(usize, usize),
    /// Quotient component of the prop, weight `w`, degree 0.
    Quotient(usize, usize, usize),
    /// Suspended quotient component, degree 1 (bar vertices).
    SigmaQuotient(usize, usize, usize),
    /// Desuspended Koszul-dual component, degree `w - 1` (cobar vertices).
    Dual(usize, usize, usize),
    /// Promoted top-degree bar component (split bookkeeping).
    BarTop(usize, usize, usize),
    /// Placeholder of a given arity used when enumerating relation
    /// insertion contexts.
    Hole(usize, usize),
    /// Supplied from outside (identity bimodule parts and the like).
    External,
}

/// Saturated relation space of one component, as reduced row vectors in the
/// free weight-2 basis.
#[derive(Clone, Debug)]
pub struct RelationSpace {
    pub rows: Vec<SparseVec>,
    pub dim: usize,
}

/// Weight slice of the quotient prop at one component.
#[derive(Clone, Debug)]
pub struct QuotientData {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub free_dim: usize,
    pub dim: usize,
    /// Reduced row echelon basis of the ideal slice, in free coordinates.
    pub ideal_rows: Vec<SparseVec>,
    pub ideal_pivots: Vec<usize>,
    /// Free basis indices representing the quotient basis.
    pub rep_cols: Vec<usize>,
}

impl QuotientData {
    /// Quotient coordinates of a free-coordinate vector.
    pub fn project(&self, v: &SparseVec) -> SparseVec {
        let mut reduced = v.clone();
        for (row, &p) in self.ideal_rows.iter().zip(&self.ideal_pivots) {
            if let Some(c) = reduced.get(&p).cloned() {
                let neg = -c;
                sv_add_scaled(&mut reduced, row, &neg);
            }
        }
        let mut out = SparseVec::new();
        for (q, &col) in self.rep_cols.iter().enumerate() {
            if let Some(c) = reduced.get(&col) {
                out.insert(q, c.clone());
            }
        }
        out
    }

    /// Free basis index representing quotient basis vector `q`.
    pub fn lift(&self, q: usize) -> usize {
        self.rep_cols[q]
    }
}

pub struct Engine {
    pub pres: Presentation,
    pub table: ModuleTable,
    pub kinds: Vec<ModuleKind>,
    gen_mods: BTreeMap<(usize, usize), ModuleId>,
    hole_mods: BTreeMap<(usize, usize), ModuleId>,
    quot_mods: BTreeMap<(usize, usize, usize), Option<ModuleId>>,
    squot_mods: BTreeMap<(usize, usize, usize), Option<ModuleId>>,
    pub(crate) dual_mods: BTreeMap<(usize, usize, usize), Option<ModuleId>>,
    pub(crate) bar_top_mods: BTreeMap<(usize, usize, usize), Option<ModuleId>>,
    free_comps: BTreeMap<(usize, usize, usize, bool), Rc<ComponentSpace>>,
    quotients: BTreeMap<(usize, usize, usize), Rc<QuotientData>>,
    relspaces: BTreeMap<(usize, usize), Rc<RelationSpace>>,
    pub(crate) bar_comps: BTreeMap<(usize, usize, usize, usize), Rc<ComponentSpace>>,
    pub(crate) bar_bounds: BTreeMap<(usize, usize, usize, usize), Rc<RationalMatrix>>,
    pub(crate) ab_comps: BTreeMap<(usize, usize, usize, usize), Rc<crate::barcobar::AbComponent>>,
    pub(crate) ab_maps: BTreeMap<(usize, usize, usize, usize), Rc<(RationalMatrix, RationalMatrix)>>,
    pub(crate) duals: BTreeMap<(usize, usize, usize), Rc<crate::koszul::DualData>>,
    pub(crate) cobar_comps: BTreeMap<(usize, usize, usize, usize), Rc<ComponentSpace>>,
    pub(crate) cobar_bounds: BTreeMap<(usize, usize, usize, usize), Rc<RationalMatrix>>,
    pub(crate) splits: BTreeMap<(usize, usize, usize), Rc<crate::barcobar::SplitTable>>,
}

impl Engine {
    pub fn new(pres: Presentation) -> Result<Engine> {
        pres.validate()?;
        let mut engine = Engine {
            pres,
            table: ModuleTable::default(),
            kinds: Vec::new(),
            gen_mods: BTreeMap::new(),
            hole_mods: BTreeMap::new(),
            quot_mods: BTreeMap::new(),
            squot_mods: BTreeMap::new(),
            dual_mods: BTreeMap::new(),
            bar_top_mods: BTreeMap::new(),
            free_comps: BTreeMap::new(),
            quotients: BTreeMap::new(),
            relspaces: BTreeMap::new(),
            bar_comps: BTreeMap::new(),
            bar_bounds: BTreeMap::new(),
            ab_comps: BTreeMap::new(),
            ab_maps: BTreeMap::new(),
            duals: BTreeMap::new(),
            cobar_comps: BTreeMap::new(),
            cobar_bounds: BTreeMap::new(),
            splits: BTreeMap::new(),
        };
        for (m, n) in engine.pres.arities() {
            let module = engine.pres.generator_module(m, n).unwrap();
            let id = engine.add_module(module, ModuleKind::Generator(m, n));
            engine.gen_mods.insert((m, n), id);
        }
        Ok(engine)
    }

    pub fn add_module(&mut self, module: BasedModule, kind: ModuleKind) -> ModuleId {
        let id = self.table.add(module);
        self.kinds.push(kind);
        id
    }

    pub fn generator_arity_bound(&self) -> (usize, usize) {
        let m = self.pres.generators.iter().map(|g| g.outputs).max().unwrap_or(1);
        let n = self.pres.generators.iter().map(|g| g.inputs).max().unwrap_or(1);
        (m, n)
    }

    /// Largest possible arities of a connected weight-`w` element.
    pub fn arity_bounds_at_weight(&self, w: usize) -> (usize, usize) {
        if w == 0 {
            return (1, 1);
        }
        let (gm, gn) = self.generator_arity_bound();
        (w * gm - (w - 1), w * gn - (w - 1))
    }

    pub fn gen_module(&self, m: usize, n: usize) -> Option<ModuleId> {
        self.gen_mods.get(&(m, n)).copied()
    }

    fn hole_module(&mut self, m: usize, n: usize) -> ModuleId {
        if let Some(&id) = self.hole_mods.get(&(m, n)) {
            return id;
        }
        let module = BasedModule::from_symmetries(
            m,
            n,
            2,
            0,
            format!("hole({m},{n})"),
            crate::sbimodule::Symmetry::Trivial,
            crate::sbimodule::Symmetry::Trivial,
            1,
        );
        let id = self.add_module(module, ModuleKind::Hole(m, n));
        self.hole_mods.insert((m, n), id);
        id
    }

    /// Multisets (as sorted slices of option indices) whose weights sum to
    /// `total`, with an optional slot count.
    pub fn weight_multisets(
        options: &[(ModuleId, usize)],
        total: usize,
        count: Option<usize>,
    ) -> Vec<Vec<ModuleId>> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(
            options: &[(ModuleId, usize)],
            start: usize,
            remaining: usize,
            count: Option<usize>,
            current: &mut Vec<ModuleId>,
            out: &mut Vec<Vec<ModuleId>>,
        ) {
            if remaining == 0 {
                if count.map_or(true, |c| current.len() == c) {
                    out.push(current.clone());
                }
                return;
            }
            if let Some(c) = count {
                if current.len() >= c {
                    return;
                }
            }
            for i in start..options.len() {
                let (id, w) = options[i];
                if w == 0 || w > remaining {
                    continue;
                }
                current.push(id);
                rec(options, i, remaining - w, count, current, out);
                current.pop();
            }
        }
        rec(options, 0, total, count, &mut current, &mut out);
        out
    }

    /// Free prop component: canonical (connected if flagged) graphs with
    /// `weight` generator-decorated vertices.
    pub fn free_component(
        &mut self,
        m: usize,
        n: usize,
        weight: usize,
        connected: bool,
    ) -> Rc<ComponentSpace> {
        if let Some(c) = self.free_comps.get(&(m, n, weight, connected)) {
            return Rc::clone(c);
        }
        let shapes = if weight == 0 {
            // Crossing diagrams; only the bare strand is connected.
            if m != n || (connected && n != 1) {
                Vec::new()
            } else {
                Permutation::all(n)
                    .into_iter()
                    .map(|p| Shape {
                        n_in: n,
                        m_out: m,
                        vertices: Vec::new(),
                        global_out: (0..m).map(|j| Src::In(p.apply(j))).collect(),
                    })
                    .collect()
            }
        } else {
            let options: Vec<(ModuleId, usize)> = self
                .gen_mods
                .values()
                .map(|&id| (id, 1usize))
                .collect();
            let mut shapes = Vec::new();
            for multiset in Self::weight_multisets(&options, weight, Some(weight)) {
                let slots: Vec<(ModuleId, Level)> =
                    multiset.into_iter().map(|id| (id, Level::Free)).collect();
                shapes.extend(enumerate_shapes(
                    &self.table,
                    n,
                    m,
                    &slots,
                    EnumConstraints::free_graphs(connected),
                ));
            }
            shapes.sort_by_key(|s| s.encode(&self.table));
            shapes.dedup_by_key(|s| s.encode(&self.table));
            shapes
        };
        let comp = Rc::new(ComponentSpace::build(&self.table, m, n, shapes));
        self.free_comps.insert((m, n, weight, connected), Rc::clone(&comp));
        comp
    }

    /// Saturated relation space at `(m, n)`: the span of the declared
    /// relation vectors under the global symmetric group actions.
    pub fn relation_space(&mut self, m: usize, n: usize) -> Rc<RelationSpace> {
        if let Some(r) = self.relspaces.get(&(m, n)) {
            return Rc::clone(r);
        }
        let free = self.free_component(m, n, 2, true);
        let mut vectors: Vec<SparseVec> = Vec::new();
        let records: Vec<crate::presentation::RelationRecord> = self
            .pres
            .relations
            .iter()
            .filter(|r| r.component == [m, n])
            .cloned()
            .collect();
        let mods: BTreeMap<(usize, usize), ModuleId> = self.gen_mods.clone();
        for rel in records {
            let mut vec = SparseVec::new();
            for term in &rel.terms {
                let coef = parse_rat(&term.coef).expect("validated presentation");
                let dec = self
                    .pres
                    .parse_graph_literal(&term.graph, m, n, &self.table, &mods)
                    .expect("validated presentation");
                let coords = free.coords(&self.table, &[(dec, coef)]);
                sv_add_scaled(&mut vec, &coords, &rint(1));
            }
            if !vec.is_empty() {
                vectors.push(vec);
            }
        }
        // Saturate under the global actions.
        let mut action_mats: Vec<RationalMatrix> = Vec::new();
        for i in 0..m.saturating_sub(1) {
            action_mats.push(free.left_gen_matrix(&self.table, i));
        }
        for i in 0..n.saturating_sub(1) {
            action_mats.push(free.right_gen_matrix(&self.table, i));
        }
        let mut rows = rref_rows(&vectors, free.dim);
        loop {
            let mut new_vectors: Vec<SparseVec> = rows.clone();
            for mat in &action_mats {
                for row in &rows {
                    new_vectors.push(mat.apply(row));
                }
            }
            let next = rref_rows(&new_vectors, free.dim);
            if next.len() == rows.len() {
                rows = next;
                break;
            }
            rows = next;
        }
        let space = Rc::new(RelationSpace {
            dim: rows.len(),
            rows,
        });
        self.relspaces.insert((m, n), Rc::clone(&space));
        space
    }

    /// Weight slice of the quotient prop: the free component modulo the
    /// ideal slice spanned by all relation insertions.
    pub fn quotient(&mut self, m: usize, n: usize, weight: usize) -> Rc<QuotientData> {
        if let Some(q) = self.quotients.get(&(m, n, weight)) {
            return Rc::clone(q);
        }
        let free = self.free_component(m, n, weight, true);
        let free_dim = free.dim;
        let mut gens: Vec<SparseVec> = Vec::new();
        if weight >= 2 {
            let rel_arities: Vec<(usize, usize)> = {
                let mut set: Vec<(usize, usize)> = self
                    .pres
                    .relations
                    .iter()
                    .map(|r| (r.component[0], r.component[1]))
                    .collect();
                set.sort();
                set.dedup();
                set
            };
            for (rm, rn) in rel_arities {
                let relspace = self.relation_space(rm, rn);
                if relspace.dim == 0 {
                    continue;
                }
                let rel_free = self.free_component(rm, rn, 2, true);
                // Lift each saturated relation row to decorated graphs once.
                let rel_terms: Vec<Vec<(Decorated, Rat)>> = relspace
                    .rows
                    .iter()
                    .map(|row| {
                        let mut terms = Vec::new();
                        for (idx, c) in row {
                            for (dec, lc) in rel_free.lift(*idx) {
                                terms.push((dec, lc * c));
                            }
                        }
                        terms
                    })
                    .collect();
                let hole = self.hole_module(rm, rn);
                let gen_options: Vec<(ModuleId, usize)> =
                    self.gen_mods.values().map(|&id| (id, 1usize)).collect();
                for multiset in Self::weight_multisets(&gen_options, weight - 2, None)
                    .into_iter()
                    .filter(|ms| ms.len() == weight - 2)
                {
                    let mut slots: Vec<(ModuleId, Level)> = vec![(hole, Level::Free)];
                    slots.extend(multiset.into_iter().map(|id| (id, Level::Free)));
                    let contexts = enumerate_shapes(
                        &self.table,
                        n,
                        m,
                        &slots,
                        EnumConstraints::free_graphs(true),
                    );
                    for ctx in contexts {
                        let hole_pos = ctx
                            .vertices
                            .iter()
                            .position(|v| v.module == hole)
                            .expect("context has its hole");
                        // All decorations of the non-hole vertices.
                        let dims: Vec<usize> = ctx
                            .vertices
                            .iter()
                            .map(|v| self.table.get(v.module).dim)
                            .collect();
                        for tuple in tuples(&dims) {
                            for rel in &rel_terms {
                                let mut terms: Vec<(Decorated, Rat)> = Vec::new();
                                for (rdec, rc) in rel {
                                    let subs: Vec<Decorated> = ctx
                                        .vertices
                                        .iter()
                                        .enumerate()
                                        .map(|(vi, v)| {
                                            if vi == hole_pos {
                                                rdec.clone()
                                            } else {
                                                single_vertex(
                                                    &self.table,
                                                    v.module,
                                                    tuple[vi],
                                                )
                                            }
                                        })
                                        .collect();
                                    let sub_refs: Vec<&Decorated> = subs.iter().collect();
                                    let flat =
                                        crate::graphs::substitute_all(&self.table, &ctx, &sub_refs);
                                    terms.push((flat, rc.clone()));
                                }
                                let coords = free.coords(&self.table, &terms);
                                if !coords.is_empty() {
                                    gens.push(coords);
                                }
                            }
                        }
                    }
                }
            }
        }
        let rows = rref_rows(&gens, free_dim);
        let pivots: Vec<usize> = rows
            .iter()
            .map(|r| *r.keys().next().expect("nonzero row"))
            .collect();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().cloned().collect();
        let rep_cols: Vec<usize> = (0..free_dim).filter(|c| !pivot_set.contains(c)).collect();
        let data = Rc::new(QuotientData {
            m,
            n,
            weight,
            free_dim,
            dim: rep_cols.len(),
            ideal_rows: rows,
            ideal_pivots: pivots,
            rep_cols,
        });
        self.quotients.insert((m, n, weight), Rc::clone(&data));
        data
    }

    /// The quotient component as a based module (degree 0), `None` when it
    /// vanishes.
    pub fn quot_module(&mut self, m: usize, n: usize, weight: usize) -> Option<ModuleId> {
        if let Some(&id) = self.quot_mods.get(&(m, n, weight)) {
            return id;
        }
        let id = self.build_quotient_module(m, n, weight, 0);
        if let Some(id) = id {
            self.kinds[id] = ModuleKind::Quotient(m, n, weight);
        }
        self.quot_mods.insert((m, n, weight), id);
        id
    }

    /// The suspended quotient component (degree 1), `None` when zero.
    pub fn squot_module(&mut self, m: usize, n: usize, weight: usize) -> Option<ModuleId> {
        if let Some(&id) = self.squot_mods.get(&(m, n, weight)) {
            return id;
        }
        let id = self.build_quotient_module(m, n, weight, 1);
        if let Some(id) = id {
            self.kinds[id] = ModuleKind::SigmaQuotient(m, n, weight);
        }
        self.squot_mods.insert((m, n, weight), id);
        id
    }

    fn build_quotient_module(
        &mut self,
        m: usize,
        n: usize,
        weight: usize,
        degree: i64,
    ) -> Option<ModuleId> {
        let quot = self.quotient(m, n, weight);
        if quot.dim == 0 {
            return None;
        }
        let free = self.free_component(m, n, weight, true);
        let dim = quot.dim;
        let build = |engine: &Engine, left: bool, i: usize| -> RationalMatrix {
            let mat = if left {
                free.left_gen_matrix(&engine.table, i)
            } else {
                free.right_gen_matrix(&engine.table, i)
            };
            let mut out = RationalMatrix::zero(dim, dim);
            for q in 0..dim {
                let mut e = SparseVec::new();
                e.insert(quot.lift(q), rint(1));
                for (r, c) in quot.project(&mat.apply(&e)) {
                    out.set(r, q, c);
                }
            }
            out
        };
        let left_gens: Vec<RationalMatrix> =
            (0..m.saturating_sub(1)).map(|i| build(self, true, i)).collect();
        let right_gens: Vec<RationalMatrix> =
            (0..n.saturating_sub(1)).map(|i| build(self, false, i)).collect();
        let label = if degree == 0 {
            format!("P({m},{n})_{weight}")
        } else {
            format!("sP({m},{n})_{weight}")
        };
        let module = BasedModule::new(m, n, dim, weight, degree, label, left_gens, right_gens);
        Some(self.add_module(module, ModuleKind::External))
    }

    /// Composes a picture whose vertices are decorated by quotient (or
    /// suspended quotient) basis elements: representatives are grafted and
    /// the flattened graph is reduced by the ideal. Returns the quotient
    /// coordinates at the picture's profile and total weight.
    pub fn compose_picture(&mut self, shape: &Shape, decoration: &[usize]) -> SparseVec {
        let decs: Vec<SparseVec> = decoration
            .iter()
            .map(|&d| {
                let mut v = SparseVec::new();
                v.insert(d, rint(1));
                v
            })
            .collect();
        self.compose_picture_multi(shape, &decs)
    }

    /// Multilinear version of [`Engine::compose_picture`].
    pub fn compose_picture_multi(&mut self, shape: &Shape, decs: &[SparseVec]) -> SparseVec {
        assert!(!shape.vertices.is_empty(), "composition needs vertices");
        let keys: Vec<(usize, usize, usize)> = shape
            .vertices
            .iter()
            .map(|v| self.module_weight_key(v.module))
            .collect();
        let total_weight: usize = keys.iter().map(|(_, _, w)| w).sum();
        let m = shape.m_out;
        let n = shape.n_in;
        let free = self.free_component(m, n, total_weight, true);
        // Per-vertex lifts to free decorated graphs.
        let mut per_vertex: Vec<Vec<(Decorated, Rat)>> = Vec::with_capacity(shape.vertices.len());
        for (vi, &(vm, vn, vw)) in keys.iter().enumerate() {
            let quot = self.quotient(vm, vn, vw);
            let vfree = self.free_component(vm, vn, vw, true);
            let mut lifts: Vec<(Decorated, Rat)> = Vec::new();
            for (q, c) in &decs[vi] {
                let free_idx = quot.lift(*q);
                for (dec, lc) in vfree.lift(free_idx) {
                    lifts.push((dec, lc * c));
                }
            }
            if lifts.is_empty() {
                return SparseVec::new();
            }
            per_vertex.push(lifts);
        }
        // Cartesian product of lifts, substituted into the picture.
        let counts: Vec<usize> = per_vertex.iter().map(|l| l.len()).collect();
        let mut terms: Vec<(Decorated, Rat)> = Vec::new();
        for choice in tuples(&counts) {
            let mut coeff = rint(1);
            let mut subs: Vec<&Decorated> = Vec::with_capacity(choice.len());
            for (vi, &c) in choice.iter().enumerate() {
                let (dec, lc) = &per_vertex[vi][c];
                coeff *= lc.clone();
                subs.push(dec);
            }
            let flat = crate::graphs::substitute_all(&self.table, shape, &subs);
            terms.push((flat, coeff));
        }
        let coords = free.coords(&self.table, &terms);
        let quot = self.quotient(m, n, total_weight);
        quot.project(&coords)
    }

    /// `(m, n, weight)` of a decoration module.
    pub fn module_weight_key(&self, id: ModuleId) -> (usize, usize, usize) {
        let module = self.table.get(id);
        (module.m, module.n, module.weight)
    }

    /// The two-stage composition product of based module families: lower
    /// stage decorated from `q_mods`, upper from `p_mods`, units realized
    /// as strands passing a stage when the corresponding flag is set.
    #[allow(clippy::too_many_arguments)]
    pub fn composition_product(
        &mut self,
        p_mods: &[ModuleId],
        q_mods: &[ModuleId],
        m: usize,
        n: usize,
        connected: bool,
        p_unit: bool,
        q_unit: bool,
    ) -> ComponentSpace {
        let mut shapes = Vec::new();
        // Upper vertices emit only to global outputs, lower vertices consume
        // only global inputs, so the slot counts are bounded by m and n.
        let p_options: Vec<(ModuleId, usize)> = p_mods.iter().map(|&id| (id, 1)).collect();
        let q_options: Vec<(ModuleId, usize)> = q_mods.iter().map(|&id| (id, 1)).collect();
        for upper_count in 0..=m {
            for uppers in Self::weight_multisets(&p_options, upper_count, Some(upper_count)) {
                for lower_count in 0..=n {
                    for lowers in
                        Self::weight_multisets(&q_options, lower_count, Some(lower_count))
                    {
                        if uppers.is_empty() && lowers.is_empty() && !(p_unit && q_unit) {
                            continue;
                        }
                        let mut slots: Vec<(ModuleId, Level)> = Vec::new();
                        slots.extend(lowers.iter().map(|&id| (id, Level::Lower)));
                        slots.extend(uppers.iter().map(|&id| (id, Level::Upper)));
                        shapes.extend(enumerate_shapes(
                            &self.table,
                            n,
                            m,
                            &slots,
                            EnumConstraints::two_level(
                                connected,
                                q_unit,
                                p_unit,
                                p_unit && q_unit,
                            ),
                        ));
                    }
                }
            }
        }
        shapes.sort_by_key(|s| s.encode(&self.table));
        shapes.dedup_by_key(|s| s.encode(&self.table));
        ComponentSpace::build(&self.table, m, n, shapes)
    }
}

/// A single vertex wired straight through, carrying one basis decoration.
pub fn single_vertex(table: &ModuleTable, module: ModuleId, decoration: usize) -> Decorated {
    let bm = table.get(module);
    Decorated {
        shape: Shape {
            n_in: bm.n,
            m_out: bm.m,
            vertices: vec![VertexShape {
                module,
                level: Level::Free,
                in_src: (0..bm.n).map(Src::In).collect(),
            }],
            global_out: (0..bm.m).map(|p| Src::Out { vertex: 0, port: p }).collect(),
        },
        decoration: vec![decoration],
    }
}

/// All decoration tuples for the given per-vertex dimensions.
pub fn tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for t in &out {
            for b in 0..d {
                let mut t2 = t.clone();
                t2.push(b);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Reduced row echelon span of a set of sparse vectors.
pub fn rref_rows(vectors: &[SparseVec], dim: usize) -> Vec<SparseVec> {
    let mut mat = RationalMatrix::zero(vectors.len(), dim);
    for (i, v) in vectors.iter().enumerate() {
        for (j, c) in v {
            mat.set(i, *j, c.clone());
        }
    }
    let (rows, _) = mat.rref();
    rows
}

