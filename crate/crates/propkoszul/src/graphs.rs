//! Decorated directed flow graphs: wiring shapes with typed vertex slots,
//! canonical forms under port relabeling (the relabeling acts on vertex
//! decorations through the module actions), isomorphism and automorphism
//! search, exhaustive wiring enumeration, and edge contraction.
//!
//! A shape records, for every vertex in-port and every global output, the
//! source wire feeding it. Every vertex out-port and every global input is
//! used exactly once, the flow is acyclic, and pictures may carry strands
//! that pass a stage entirely (those represent unit factors).

use crate::perm::Permutation;
use crate::sbimodule::{ModuleId, ModuleTable};
use crate::{Error, Rat, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Where a wire comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Src {
    /// Global input with 0-based label.
    In(usize),
    /// Out-port `port` of vertex `vertex`.
    Out { vertex: usize, port: usize },
}

/// Stage of a vertex in two-stage pictures; `Free` for plain graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Free,
    Lower,
    Upper,
}

impl Level {
    fn code(self) -> u64 {
        match self {
            Level::Free => 0,
            Level::Lower => 1,
            Level::Upper => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexShape {
    pub module: ModuleId,
    pub level: Level,
    pub in_src: Vec<Src>,
}

/// An undecorated wiring diagram with typed vertex slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub n_in: usize,
    pub m_out: usize,
    pub vertices: Vec<VertexShape>,
    pub global_out: Vec<Src>,
}

/// A shape together with one basis decoration per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decorated {
    pub shape: Shape,
    pub decoration: Vec<usize>,
}

/// An isomorphism between two shapes: a vertex bijection plus per-vertex
/// port relabelings (old index to new index).
#[derive(Clone, Debug)]
pub struct Iso {
    pub vperm: Vec<usize>,
    pub in_perms: Vec<Permutation>,
    pub out_perms: Vec<Permutation>,
}

impl Iso {
    pub fn identity(shape: &Shape, table: &ModuleTable) -> Iso {
        Iso {
            vperm: (0..shape.vertices.len()).collect(),
            in_perms: shape
                .vertices
                .iter()
                .map(|v| Permutation::identity(table.get(v.module).n))
                .collect(),
            out_perms: shape
                .vertices
                .iter()
                .map(|v| Permutation::identity(table.get(v.module).m))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vperm.iter().enumerate().all(|(i, &j)| i == j)
            && self.in_perms.iter().all(|p| p.is_identity())
            && self.out_perms.iter().all(|p| p.is_identity())
    }
}

/// Destination of a vertex out-port.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sink {
    GlobalOut(usize),
    InPort { vertex: usize, port: usize },
}

impl Shape {
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    /// For each vertex, the destination of each out-port.
    pub fn consumers(&self, table: &ModuleTable) -> Vec<Vec<Option<Sink>>> {
        let mut out: Vec<Vec<Option<Sink>>> = self
            .vertices
            .iter()
            .map(|v| vec![None; table.get(v.module).m])
            .collect();
        for (vi, v) in self.vertices.iter().enumerate() {
            for (q, src) in v.in_src.iter().enumerate() {
                if let Src::Out { vertex, port } = src {
                    out[*vertex][*port] = Some(Sink::InPort { vertex: vi, port: q });
                }
            }
        }
        for (j, src) in self.global_out.iter().enumerate() {
            if let Src::Out { vertex, port } = src {
                out[*vertex][*port] = Some(Sink::GlobalOut(j));
            }
        }
        out
    }

    /// Internal edges as `(from_vertex, out_port, to_vertex, in_port)`.
    pub fn edges(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut edges = Vec::new();
        for (vi, v) in self.vertices.iter().enumerate() {
            for (q, src) in v.in_src.iter().enumerate() {
                if let Src::Out { vertex, port } = src {
                    edges.push((*vertex, *port, vi, q));
                }
            }
        }
        edges
    }

    pub fn validate(&self, table: &ModuleTable) -> Result<()> {
        let mut used_inputs = vec![false; self.n_in];
        let mut used_outports: Vec<Vec<bool>> = self
            .vertices
            .iter()
            .map(|v| vec![false; table.get(v.module).m])
            .collect();
        let mut take = |src: &Src| -> Result<()> {
            match src {
                Src::In(i) => {
                    if *i >= self.n_in || used_inputs[*i] {
                        return Err(Error::MalformedGraph(format!(
                            "global input {i} missing or used twice"
                        )));
                    }
                    used_inputs[*i] = true;
                }
                Src::Out { vertex, port } => {
                    if *vertex >= self.vertices.len()
                        || *port >= used_outports[*vertex].len()
                        || used_outports[*vertex][*port]
                    {
                        return Err(Error::MalformedGraph(format!(
                            "out-port ({vertex}, {port}) missing or used twice"
                        )));
                    }
                    used_outports[*vertex][*port] = true;
                }
            }
            Ok(())
        };
        for (vi, v) in self.vertices.iter().enumerate() {
            let module = table.get(v.module);
            if v.in_src.len() != module.n {
                return Err(Error::MalformedGraph(format!(
                    "vertex {vi} has {} in-ports, module wants {}",
                    v.in_src.len(),
                    module.n
                )));
            }
            for src in &v.in_src {
                take(src)?;
                if let Src::Out { vertex, .. } = src {
                    if *vertex == vi {
                        return Err(Error::MalformedGraph(format!("loop at vertex {vi}")));
                    }
                }
            }
        }
        if self.global_out.len() != self.m_out {
            return Err(Error::MalformedGraph("global output count mismatch".into()));
        }
        for src in &self.global_out {
            take(src)?;
        }
        if used_inputs.iter().any(|u| !u) {
            return Err(Error::MalformedGraph("dangling global input".into()));
        }
        if used_outports.iter().any(|v| v.iter().any(|u| !u)) {
            return Err(Error::MalformedGraph("dangling out-port".into()));
        }
        if !self.is_acyclic() {
            return Err(Error::MalformedGraph("flow has a directed cycle".into()));
        }
        Ok(())
    }

    pub fn is_acyclic(&self) -> bool {
        let k = self.vertices.len();
        let mut adj = vec![BTreeSet::new(); k];
        for (u, _, v, _) in self.edges() {
            adj[u].insert(v);
        }
        let mut indeg = vec![0usize; k];
        for u in 0..k {
            for &v in &adj[u] {
                indeg[v] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..k).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &adj[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        seen == k
    }

    /// Connectivity of the whole picture: each pass strand (a global input
    /// wired straight to a global output) counts as its own component.
    pub fn is_connected(&self) -> bool {
        let k = self.vertices.len();
        let passes = self
            .global_out
            .iter()
            .filter(|s| matches!(s, Src::In(_)))
            .count();
        if k == 0 {
            return passes == 1;
        }
        if passes > 0 {
            return false;
        }
        let mut dsu: Vec<usize> = (0..k).collect();
        fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
            if dsu[x] != x {
                let r = find(dsu, dsu[x]);
                dsu[x] = r;
            }
            dsu[x]
        }
        for (u, _, v, _) in self.edges() {
            let (ru, rv) = (find(&mut dsu, u), find(&mut dsu, v));
            dsu[ru] = rv;
        }
        let root = find(&mut dsu, 0);
        (1..k).all(|v| find(&mut dsu, v) == root)
    }

    /// Complete flat encoding of the shape as currently labeled.
    pub fn encode(&self, table: &ModuleTable) -> Vec<u64> {
        let mut out = vec![
            self.n_in as u64,
            self.m_out as u64,
            self.vertices.len() as u64,
        ];
        let enc_src = |out: &mut Vec<u64>, src: &Src| match src {
            Src::In(i) => {
                out.push(0);
                out.push(*i as u64);
                out.push(0);
            }
            Src::Out { vertex, port } => {
                out.push(1);
                out.push(*vertex as u64);
                out.push(*port as u64);
            }
        };
        for v in &self.vertices {
            out.push(v.module as u64);
            out.push(v.level.code());
            out.push(v.in_src.len() as u64);
            for src in &v.in_src {
                enc_src(&mut out, src);
            }
            out.push(table.get(v.module).m as u64);
        }
        for src in &self.global_out {
            enc_src(&mut out, src);
        }
        out
    }

    /// Canonical representative of the shape's relabeling class together
    /// with the isomorphism from `self` to it. Vertices are reordered so
    /// that `(level, module)` keys ascend; among those orders and the
    /// residual parallel-edge gauge, the minimal encoding wins. Transport
    /// differences between tie-breaking choices are automorphisms of the
    /// canonical shape, which the coinvariant projection absorbs.
    pub fn canonicalize(&self, table: &ModuleTable) -> (Shape, Iso) {
        let k = self.vertices.len();
        let mut best: Option<(Vec<u64>, Shape, Iso)> = None;
        for order in self.candidate_orders() {
            // order[new_pos] = old_index
            let mut vpos = vec![0usize; k];
            for (new, &old) in order.iter().enumerate() {
                vpos[old] = new;
            }
            let (shape, iso) = self.relabel_for_order(table, &vpos);
            let enc = shape.encode(table);
            if best.as_ref().map_or(true, |(be, _, _)| enc < *be) {
                best = Some((enc, shape, iso));
            }
        }
        match best {
            Some((_, shape, iso)) => (shape, iso),
            None => {
                // No vertices: the shape is already canonical.
                (self.clone(), Iso {
                    vperm: Vec::new(),
                    in_perms: Vec::new(),
                    out_perms: Vec::new(),
                })
            }
        }
    }

    /// All vertex orders (new position -> old index) whose (level, module)
    /// key sequence is sorted; only those can realize the minimal encoding.
    fn candidate_orders(&self) -> Vec<Vec<usize>> {
        let k = self.vertices.len();
        if k == 0 {
            return vec![Vec::new()];
        }
        let key = |i: usize| (self.vertices[i].level.code(), self.vertices[i].module);
        let mut sorted: Vec<usize> = (0..k).collect();
        sorted.sort_by_key(|&i| (key(i), i));
        // Group boundaries of equal keys.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &sorted {
            if let Some(last) = groups.last_mut() {
                if key(last[0]) == key(i) {
                    last.push(i);
                    continue;
                }
            }
            groups.push(vec![i]);
        }
        let mut orders = vec![Vec::new()];
        for group in groups {
            let perms = permutations_of(&group);
            let mut next = Vec::with_capacity(orders.len() * perms.len());
            for base in &orders {
                for p in &perms {
                    let mut o = base.clone();
                    o.extend_from_slice(p);
                    next.push(o);
                }
            }
            orders = next;
        }
        orders
    }

    fn relabel_for_order(&self, table: &ModuleTable, vpos: &[usize]) -> (Shape, Iso) {
        let k = self.vertices.len();
        // Rank parallel edges within each (u, v) class; the intra-class
        // order (by original ports) is gauge, fixed deterministically here.
        let mut class_edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (u, p, v, q) in self.edges() {
            class_edges.entry((u, v)).or_default().push((p, q));
        }
        for edges in class_edges.values_mut() {
            edges.sort();
        }
        let edge_rank: HashMap<(usize, usize, usize, usize), usize> = class_edges
            .iter()
            .flat_map(|((u, v), edges)| {
                edges
                    .iter()
                    .enumerate()
                    .map(move |(r, (p, q))| ((*u, *p, *v, *q), r))
            })
            .collect();
        let consumers = self.consumers(table);
        // Canonical in-port order per old vertex.
        let mut in_perms = Vec::with_capacity(k);
        for (vi, v) in self.vertices.iter().enumerate() {
            let mut keyed: Vec<((u64, u64, u64), usize)> = v
                .in_src
                .iter()
                .enumerate()
                .map(|(q, src)| {
                    let key = match src {
                        Src::In(i) => (0u64, *i as u64, 0u64),
                        Src::Out { vertex, port } => (
                            1u64,
                            vpos[*vertex] as u64,
                            edge_rank[&(*vertex, *port, vi, q)] as u64,
                        ),
                    };
                    (key, q)
                })
                .collect();
            keyed.sort();
            let mut images = vec![0usize; keyed.len()];
            for (new, (_, old)) in keyed.iter().enumerate() {
                images[*old] = new;
            }
            in_perms.push(Permutation::from_images(images).unwrap());
        }
        // Canonical out-port order per old vertex.
        let mut out_perms = Vec::with_capacity(k);
        for (vi, ports) in consumers.iter().enumerate() {
            let mut keyed: Vec<((u64, u64, u64), usize)> = ports
                .iter()
                .enumerate()
                .map(|(p, sink)| {
                    let key = match sink.expect("validated shape has no dangling out-port") {
                        Sink::GlobalOut(j) => (0u64, j as u64, 0u64),
                        Sink::InPort { vertex, port } => (
                            1u64,
                            vpos[vertex] as u64,
                            edge_rank[&(vi, p, vertex, port)] as u64,
                        ),
                    };
                    (key, p)
                })
                .collect();
            keyed.sort();
            let mut images = vec![0usize; keyed.len()];
            for (new, (_, old)) in keyed.iter().enumerate() {
                images[*old] = new;
            }
            out_perms.push(Permutation::from_images(images).unwrap());
        }
        // Assemble the relabeled shape.
        let relabel_src = |src: &Src| match src {
            Src::In(i) => Src::In(*i),
            Src::Out { vertex, port } => Src::Out {
                vertex: vpos[*vertex],
                port: out_perms[*vertex].apply(*port),
            },
        };
        let mut new_vertices = vec![None; k];
        for (old, v) in self.vertices.iter().enumerate() {
            let mut in_src = vec![Src::In(0); v.in_src.len()];
            for (q, src) in v.in_src.iter().enumerate() {
                in_src[in_perms[old].apply(q)] = relabel_src(src);
            }
            new_vertices[vpos[old]] = Some(VertexShape {
                module: v.module,
                level: v.level,
                in_src,
            });
        }
        let shape = Shape {
            n_in: self.n_in,
            m_out: self.m_out,
            vertices: new_vertices.into_iter().map(|v| v.unwrap()).collect(),
            global_out: self.global_out.iter().map(relabel_src).collect(),
        };
        (
            shape,
            Iso {
                vperm: vpos.to_vec(),
                in_perms,
                out_perms,
            },
        )
    }

    /// All isomorphisms from `self` onto `other` (empty when the shapes are
    /// not isomorphic). Global legs must be preserved exactly; the only
    /// freedom beyond the vertex bijection is the matching of parallel
    /// edges.
    pub fn isomorphisms(&self, other: &Shape, table: &ModuleTable) -> Vec<Iso> {
        let k = self.vertices.len();
        if self.n_in != other.n_in || self.m_out != other.m_out || k != other.vertices.len() {
            return Vec::new();
        }
        let mut result = Vec::new();
        let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(k);
        for v in &self.vertices {
            candidates.push(
                (0..k)
                    .filter(|&j| {
                        other.vertices[j].module == v.module && other.vertices[j].level == v.level
                    })
                    .collect(),
            );
        }
        let mut vperm = vec![usize::MAX; k];
        let mut used = vec![false; k];
        self.search_vertex_maps(other, table, 0, &mut vperm, &mut used, &candidates, &mut result);
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn search_vertex_maps(
        &self,
        other: &Shape,
        table: &ModuleTable,
        pos: usize,
        vperm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        candidates: &[Vec<usize>],
        result: &mut Vec<Iso>,
    ) {
        let k = self.vertices.len();
        if pos == k {
            self.complete_port_maps(other, table, vperm, result);
            return;
        }
        for &j in &candidates[pos] {
            if used[j] {
                continue;
            }
            vperm[pos] = j;
            used[j] = true;
            self.search_vertex_maps(other, table, pos + 1, vperm, used, candidates, result);
            used[j] = false;
            vperm[pos] = usize::MAX;
        }
    }

    /// Given a vertex bijection, enumerates all compatible port matchings.
    fn complete_port_maps(
        &self,
        other: &Shape,
        table: &ModuleTable,
        vperm: &[usize],
        result: &mut Vec<Iso>,
    ) {
        let k = self.vertices.len();
        // Classify edges by (u, v) on both sides.
        let mut my_classes: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (u, p, v, q) in self.edges() {
            my_classes.entry((u, v)).or_default().push((p, q));
        }
        let mut their_classes: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (u, p, v, q) in other.edges() {
            their_classes.entry((u, v)).or_default().push((p, q));
        }
        // Global legs must match exactly.
        for i in 0..self.n_in {
            let mine = self.find_global_in(i);
            let theirs = other.find_global_in(i);
            match (mine, theirs) {
                (GlobalInUse::Pass(j1), GlobalInUse::Pass(j2)) if j1 == j2 => {}
                (GlobalInUse::Vertex(v1, _), GlobalInUse::Vertex(v2, _)) if vperm[v1] == v2 => {}
                _ => return,
            }
        }
        for (j, src) in self.global_out.iter().enumerate() {
            match (src, &other.global_out[j]) {
                (Src::In(a), Src::In(b)) if a == b => {}
                (Src::Out { vertex: v1, .. }, Src::Out { vertex: v2, .. })
                    if vperm[*v1] == *v2 => {}
                _ => return,
            }
        }
        // Edge classes must correspond with equal multiplicity.
        for ((u, v), edges) in &my_classes {
            let theirs = their_classes.get(&(vperm[*u], vperm[*v]));
            if theirs.map_or(true, |t| t.len() != edges.len()) {
                return;
            }
        }
        if my_classes.len() != their_classes.len() {
            return;
        }
        // For every class choose a bijection of parallel edges; everything
        // else (global legs, derived out-ports) is forced.
        let classes: Vec<((usize, usize), Vec<(usize, usize)>, Vec<(usize, usize)>)> = my_classes
            .into_iter()
            .map(|((u, v), edges)| {
                let t = their_classes[&(vperm[u], vperm[v])].clone();
                ((u, v), edges, t)
            })
            .collect();
        let mut choice: Vec<usize> = Vec::new();
        self.assign_classes(other, table, vperm, &classes, 0, &mut choice, result, k);
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_classes(
        &self,
        other: &Shape,
        table: &ModuleTable,
        vperm: &[usize],
        classes: &[((usize, usize), Vec<(usize, usize)>, Vec<(usize, usize)>)],
        idx: usize,
        // For class idx, choice[idx] indexes a permutation of the target edges.
        choices: &mut Vec<usize>,
        result: &mut Vec<Iso>,
        k: usize,
    ) {
        if idx == classes.len() {
            if let Some(iso) = self.build_iso(other, table, vperm, classes, choices, k) {
                result.push(iso);
            }
            return;
        }
        let count = classes[idx].1.len();
        let total = crate::sbimodule::factorial(count);
        for c in 0..total {
            choices.push(c);
            self.assign_classes(other, table, vperm, classes, idx + 1, choices, result, k);
            choices.pop();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn build_iso(
        &self,
        other: &Shape,
        table: &ModuleTable,
        vperm: &[usize],
        classes: &[((usize, usize), Vec<(usize, usize)>, Vec<(usize, usize)>)],
        choices: &[usize],
        k: usize,
    ) -> Option<Iso> {
        let mut in_maps: Vec<Vec<Option<usize>>> = self
            .vertices
            .iter()
            .map(|v| vec![None; v.in_src.len()])
            .collect();
        let mut out_maps: Vec<Vec<Option<usize>>> = (0..k)
            .map(|v| vec![None; table.get(self.vertices[v].module).m])
            .collect();
        // Edge matchings.
        for (ci, ((_u, _v), mine, theirs)) in classes.iter().enumerate() {
            let perm = nth_permutation(theirs.len(), choices[ci]);
            for (ei, (p, q)) in mine.iter().enumerate() {
                let (tp, tq) = theirs[perm[ei]];
                let (u, v) = classes[ci].0;
                out_maps[u][*p] = Some(tp);
                in_maps[v][*q] = Some(tq);
            }
        }
        // Global-in legs force in-port images.
        for i in 0..self.n_in {
            if let (GlobalInUse::Vertex(v, q), GlobalInUse::Vertex(tv, tq)) =
                (self.find_global_in(i), other.find_global_in(i))
            {
                debug_assert_eq!(vperm[v], tv);
                in_maps[v][q] = Some(tq);
            }
        }
        // Global-out legs force out-port images.
        for (j, src) in self.global_out.iter().enumerate() {
            if let (Src::Out { vertex, port }, Src::Out { vertex: tv, port: tp }) =
                (src, &other.global_out[j])
            {
                debug_assert_eq!(vperm[*vertex], *tv);
                out_maps[*vertex][*port] = Some(*tp);
            }
        }
        let mut in_perms = Vec::with_capacity(k);
        let mut out_perms = Vec::with_capacity(k);
        for v in 0..k {
            let ins: Option<Vec<usize>> = in_maps[v].iter().cloned().collect();
            let outs: Option<Vec<usize>> = out_maps[v].iter().cloned().collect();
            let ins = Permutation::from_images(ins?).ok()?;
            let outs = Permutation::from_images(outs?).ok()?;
            in_perms.push(ins);
            out_perms.push(outs);
        }
        Some(Iso {
            vperm: vperm.to_vec(),
            in_perms,
            out_perms,
        })
    }

    fn find_global_in(&self, i: usize) -> GlobalInUse {
        for (vi, v) in self.vertices.iter().enumerate() {
            for (q, src) in v.in_src.iter().enumerate() {
                if *src == Src::In(i) {
                    return GlobalInUse::Vertex(vi, q);
                }
            }
        }
        for (j, src) in self.global_out.iter().enumerate() {
            if *src == Src::In(i) {
                return GlobalInUse::Pass(j);
            }
        }
        panic!("global input {i} unused; shape not validated");
    }

    /// Applies an isomorphism, producing the relabeled shape. Used in tests
    /// and debug assertions; decorations are transported separately.
    pub fn apply_iso(&self, iso: &Iso) -> Shape {
        let relabel = |src: &Src| match src {
            Src::In(i) => Src::In(*i),
            Src::Out { vertex, port } => Src::Out {
                vertex: iso.vperm[*vertex],
                port: iso.out_perms[*vertex].apply(*port),
            },
        };
        let k = self.vertices.len();
        let mut vertices = vec![None; k];
        for (old, v) in self.vertices.iter().enumerate() {
            let mut in_src = vec![Src::In(0); v.in_src.len()];
            for (q, src) in v.in_src.iter().enumerate() {
                in_src[iso.in_perms[old].apply(q)] = relabel(src);
            }
            vertices[iso.vperm[old]] = Some(VertexShape {
                module: v.module,
                level: v.level,
                in_src,
            });
        }
        Shape {
            n_in: self.n_in,
            m_out: self.m_out,
            vertices: vertices.into_iter().map(|v| v.unwrap()).collect(),
            global_out: self.global_out.iter().map(relabel).collect(),
        }
    }
}

enum GlobalInUse {
    Vertex(usize, usize),
    Pass(usize),
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

fn nth_permutation(n: usize, mut idx: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = crate::sbimodule::factorial(i);
        let pos = idx / f;
        idx %= f;
        out.push(pool.remove(pos));
    }
    out
}

/// Koszul sign of permuting graded tensor factors: `vperm[i]` is the new
/// position of the factor at old position `i`.
pub fn graded_perm_sign(degrees: &[i64], vperm: &[usize]) -> i64 {
    let mut sign = 1i64;
    for i in 0..degrees.len() {
        for j in i + 1..degrees.len() {
            if vperm[i] > vperm[j] && degrees[i] % 2 != 0 && degrees[j] % 2 != 0 {
                sign = -sign;
            }
        }
    }
    sign
}

/// Transports a decoration along an isomorphism: each vertex decoration is
/// acted on by the port relabelings (left action of the inverse out-port
/// permutation, right action of the in-port permutation), and the vertex
/// reordering contributes the graded sign. Returns terms in the target
/// shape's vertex order.
pub fn transport_decoration(
    table: &ModuleTable,
    shape: &Shape,
    decoration: &[usize],
    coeff: &Rat,
    iso: &Iso,
) -> Vec<(Vec<usize>, Rat)> {
    let k = shape.vertices.len();
    let degrees: Vec<i64> = shape
        .vertices
        .iter()
        .map(|v| table.get(v.module).degree)
        .collect();
    let sign = graded_perm_sign(&degrees, &iso.vperm);
    // Per old vertex, the transported sparse decoration vector.
    let mut per_vertex: Vec<Vec<(usize, Rat)>> = Vec::with_capacity(k);
    for (i, v) in shape.vertices.iter().enumerate() {
        let module = table.get(v.module);
        let mut e = crate::linalg::SparseVec::new();
        e.insert(decoration[i], crate::rint(1));
        let acted = module.act_sparse(&iso.out_perms[i].inverse(), &e, &iso.in_perms[i]);
        per_vertex.push(acted.into_iter().collect());
    }
    // Expand the tensor product, writing tuples in the NEW vertex order.
    let mut terms: Vec<(Vec<usize>, Rat)> = vec![(vec![0; k], coeff * crate::rint(sign))];
    for (old, options) in per_vertex.iter().enumerate() {
        let new_pos = iso.vperm[old];
        let mut next = Vec::with_capacity(terms.len() * options.len());
        for (tuple, c) in &terms {
            for (b, cb) in options {
                let mut t = tuple.clone();
                t[new_pos] = *b;
                next.push((t, c * cb));
            }
        }
        terms = next;
    }
    terms
}

/// Constraints for exhaustive wiring enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumConstraints {
    pub connected: bool,
    /// Allow edges between two `Upper` vertices (flattened cluster zones).
    pub upper_internal: bool,
    /// A strand may pass the lower stage (global input wired into an
    /// `Upper` vertex).
    pub pass_lower: bool,
    /// A strand may pass the upper stage (a `Lower` out-port wired to a
    /// global output).
    pub pass_upper: bool,
    /// A strand may pass both stages (global input wired to global output).
    pub pass_through: bool,
}

impl EnumConstraints {
    pub fn free_graphs(connected: bool) -> Self {
        EnumConstraints {
            connected,
            upper_internal: false,
            pass_lower: false,
            pass_upper: false,
            pass_through: false,
        }
    }

    pub fn two_level(connected: bool, pass_lower: bool, pass_upper: bool, pass_through: bool) -> Self {
        EnumConstraints {
            connected,
            upper_internal: false,
            pass_lower,
            pass_upper,
            pass_through,
        }
    }

    pub fn zoned() -> Self {
        // Flattened homological pictures: upper zone may have internal
        // edges, units pass freely, whole picture connected.
        EnumConstraints {
            connected: true,
            upper_internal: true,
            pass_lower: true,
            pass_upper: true,
            pass_through: false,
        }
    }
}

/// Enumerates all shapes with the given vertex slots, up to relabeling;
/// output is canonical, duplicate-free and sorted by encoding.
pub fn enumerate_shapes(
    table: &ModuleTable,
    n_in: usize,
    m_out: usize,
    slots: &[(ModuleId, Level)],
    cons: EnumConstraints,
) -> Vec<Shape> {
    let k = slots.len();
    let total_in: usize = slots.iter().map(|(id, _)| table.get(*id).n).sum();
    let total_out: usize = slots.iter().map(|(id, _)| table.get(*id).m).sum();
    if total_in + m_out != total_out + n_in {
        return Vec::new();
    }
    if k == 0 {
        if n_in != m_out || (n_in > 0 && !cons.pass_through) {
            return Vec::new();
        }
        if cons.connected && n_in != 1 {
            return Vec::new();
        }
        // Pure crossing diagrams: one shape per bijection of inputs to
        // outputs; each is its own relabeling class.
        return Permutation::all(n_in)
            .into_iter()
            .map(|p| Shape {
                n_in,
                m_out,
                vertices: Vec::new(),
                global_out: (0..m_out).map(|j| Src::In(p.apply(j))).collect(),
            })
            .collect();
    }
    // Sinks: all vertex in-ports in slot order, then global outputs.
    let mut sinks = Vec::new();
    for (vi, (id, _)) in slots.iter().enumerate() {
        for q in 0..table.get(*id).n {
            sinks.push(SinkRef::VertexIn(vi, q));
        }
    }
    for j in 0..m_out {
        sinks.push(SinkRef::GlobalOut(j));
    }
    // Sources: global ins, then all vertex out-ports.
    let mut sources = Vec::new();
    for i in 0..n_in {
        sources.push(Src::In(i));
    }
    for (vi, (id, _)) in slots.iter().enumerate() {
        for p in 0..table.get(*id).m {
            sources.push(Src::Out { vertex: vi, port: p });
        }
    }
    let allowed = |src: &Src, sink: &SinkRef| -> bool {
        match (src, sink) {
            (Src::In(_), SinkRef::VertexIn(v, _)) => {
                slots[*v].1 != Level::Upper || cons.pass_lower
            }
            (Src::In(_), SinkRef::GlobalOut(_)) => cons.pass_through,
            (Src::Out { vertex: u, .. }, SinkRef::VertexIn(v, _)) => {
                if u == v {
                    return false;
                }
                match (slots[*u].1, slots[*v].1) {
                    (Level::Free, Level::Free) => true,
                    (Level::Lower, Level::Upper) => true,
                    (Level::Upper, Level::Upper) => cons.upper_internal,
                    _ => false,
                }
            }
            (Src::Out { vertex: u, .. }, SinkRef::GlobalOut(_)) => {
                slots[*u].1 != Level::Lower || cons.pass_upper
            }
        }
    };
    let mut found: HashSet<Vec<u64>> = HashSet::new();
    let mut out: Vec<Shape> = Vec::new();
    let mut assignment: Vec<Option<Src>> = vec![None; sinks.len()];
    let mut used = vec![false; sources.len()];
    let src_index = |src: &Src| -> usize {
        match src {
            Src::In(i) => *i,
            Src::Out { vertex, port } => {
                n_in + slots[..*vertex]
                    .iter()
                    .map(|(id, _)| table.get(*id).m)
                    .sum::<usize>()
                    + port
            }
        }
    };
    // Plain iterative backtracking over sinks.
    let mut stack: Vec<usize> = vec![0]; // next source index to try per depth
    let mut depth = 0usize;
    loop {
        if depth == sinks.len() {
            // Complete assignment: build and check.
            let shape = build_shape(table, n_in, m_out, slots, &sinks, &assignment);
            if shape.is_acyclic() && (!cons.connected || shape.is_connected()) {
                debug_assert!(shape.validate(table).is_ok());
                let (canon, _) = shape.canonicalize(table);
                let enc = canon.encode(table);
                if found.insert(enc) {
                    out.push(canon);
                }
            }
            // Backtrack.
            depth -= 1;
            let src = assignment[depth].take().unwrap();
            used[src_index(&src)] = false;
            continue;
        }
        let start = stack[depth];
        let mut advanced = false;
        for s in start..sources.len() {
            if used[s] {
                continue;
            }
            if !allowed(&sources[s], &sinks[depth]) {
                continue;
            }
            assignment[depth] = Some(sources[s]);
            used[s] = true;
            stack[depth] = s + 1;
            depth += 1;
            if stack.len() == depth {
                stack.push(0);
            } else {
                stack[depth] = 0;
            }
            advanced = true;
            break;
        }
        if advanced {
            continue;
        }
        if depth == 0 {
            break;
        }
        depth -= 1;
        let src = assignment[depth].take().unwrap();
        used[src_index(&src)] = false;
    }
    out.sort_by_key(|s| s.encode(table));
    out
}

#[derive(Clone, Copy)]
enum SinkRef {
    VertexIn(usize, usize),
    GlobalOut(usize),
}

fn build_shape(
    table: &ModuleTable,
    n_in: usize,
    m_out: usize,
    slots: &[(ModuleId, Level)],
    sinks: &[SinkRef],
    assignment: &[Option<Src>],
) -> Shape {
    let mut vertices: Vec<VertexShape> = slots
        .iter()
        .map(|(id, level)| VertexShape {
            module: *id,
            level: *level,
            in_src: vec![Src::In(usize::MAX); table.get(*id).n],
        })
        .collect();
    let mut global_out = vec![Src::In(usize::MAX); m_out];
    for (i, sink) in sinks.iter().enumerate() {
        let src = assignment[i].unwrap();
        match sink {
            SinkRef::VertexIn(vertex, port) => vertices[*vertex].in_src[*port] = src,
            SinkRef::GlobalOut(j) => global_out[*j] = src,
        }
    }
    Shape {
        n_in,
        m_out,
        vertices,
        global_out,
    }
}

/// Merges a group of vertices (`feeders`, all feeding `fed`) into a single
/// vertex. Returns the merged shape (with the merged vertex's ports in a
/// deterministic order), the mini picture describing the group with its
/// external wires as global legs (feeders on the lower stage, `fed` on the
/// upper stage), and the position at which the merged vertex was inserted.
pub struct MergeResult {
    pub merged: Shape,
    pub mini: Shape,
    pub merged_position: usize,
    /// For each mini global input, the source in the original big shape.
    pub external_in: Vec<Src>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergedPosition {
    Front,
    Back,
}

pub fn merge_group(
    table: &ModuleTable,
    shape: &Shape,
    feeders: &[usize],
    fed: usize,
    merged_module: ModuleId,
    merged_level: Level,
    position: MergedPosition,
) -> MergeResult {
    let group: Vec<usize> = feeders.iter().cloned().chain(std::iter::once(fed)).collect();
    let in_group = |v: usize| group.contains(&v);
    let consumers = shape.consumers(table);
    // External in-ports of the group, in (group order, port order).
    let mut ext_in: Vec<(usize, usize)> = Vec::new();
    for &g in &group {
        for (q, src) in shape.vertices[g].in_src.iter().enumerate() {
            match src {
                Src::Out { vertex, .. } if in_group(*vertex) => {}
                _ => ext_in.push((g, q)),
            }
        }
    }
    // External out-ports of the group.
    let mut ext_out: Vec<(usize, usize)> = Vec::new();
    for &g in &group {
        for (p, sink) in consumers[g].iter().enumerate() {
            match sink.expect("validated shape") {
                Sink::InPort { vertex, .. } if in_group(vertex) => {}
                _ => ext_out.push((g, p)),
            }
        }
    }
    let merged_n = ext_in.len();
    let merged_m = ext_out.len();
    debug_assert_eq!(table.get(merged_module).n, merged_n);
    debug_assert_eq!(table.get(merged_module).m, merged_m);
    let ext_in_rank: HashMap<(usize, usize), usize> = ext_in
        .iter()
        .enumerate()
        .map(|(r, &(v, q))| ((v, q), r))
        .collect();
    let ext_out_rank: HashMap<(usize, usize), usize> = ext_out
        .iter()
        .enumerate()
        .map(|(r, &(v, p))| ((v, p), r))
        .collect();
    // Mini picture: group vertices with external wires as global legs.
    let local: HashMap<usize, usize> = group.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let mini_vertices: Vec<VertexShape> = group
        .iter()
        .map(|&g| VertexShape {
            module: shape.vertices[g].module,
            level: if g == fed { Level::Upper } else { Level::Lower },
            in_src: shape.vertices[g]
                .in_src
                .iter()
                .enumerate()
                .map(|(q, src)| match src {
                    Src::Out { vertex, port } if in_group(*vertex) => Src::Out {
                        vertex: local[vertex],
                        port: *port,
                    },
                    _ => Src::In(ext_in_rank[&(g, q)]),
                })
                .collect(),
        })
        .collect();
    let mini_global_out: Vec<Src> = ext_out
        .iter()
        .map(|&(v, p)| Src::Out {
            vertex: local[&v],
            port: p,
        })
        .collect();
    let mini = Shape {
        n_in: merged_n,
        m_out: merged_m,
        vertices: mini_vertices,
        global_out: mini_global_out,
    };
    // Merged big shape: remaining vertices keep relative order; the merged
    // vertex goes to the front or the back.
    let survivors: Vec<usize> = (0..shape.vertices.len()).filter(|v| !in_group(*v)).collect();
    let mut new_index: HashMap<usize, usize> = HashMap::new();
    let merged_position = match position {
        MergedPosition::Front => 0,
        MergedPosition::Back => survivors.len(),
    };
    for (r, &v) in survivors.iter().enumerate() {
        let idx = if position == MergedPosition::Front { r + 1 } else { r };
        new_index.insert(v, idx);
    }
    let relabel = |src: &Src| -> Src {
        match src {
            Src::In(i) => Src::In(*i),
            Src::Out { vertex, port } => {
                if in_group(*vertex) {
                    Src::Out {
                        vertex: merged_position,
                        port: ext_out_rank[&(*vertex, *port)],
                    }
                } else {
                    Src::Out {
                        vertex: new_index[vertex],
                        port: *port,
                    }
                }
            }
        }
    };
    let merged_vertex = VertexShape {
        module: merged_module,
        level: merged_level,
        in_src: ext_in
            .iter()
            .map(|&(v, q)| relabel(&shape.vertices[v].in_src[q]))
            .collect(),
    };
    let mut new_vertices: Vec<VertexShape> = Vec::with_capacity(survivors.len() + 1);
    if position == MergedPosition::Front {
        new_vertices.push(merged_vertex.clone());
    }
    for &v in &survivors {
        new_vertices.push(VertexShape {
            module: shape.vertices[v].module,
            level: shape.vertices[v].level,
            in_src: shape.vertices[v].in_src.iter().map(&relabel).collect(),
        });
    }
    if position == MergedPosition::Back {
        new_vertices.push(merged_vertex);
    }
    let merged = Shape {
        n_in: shape.n_in,
        m_out: shape.m_out,
        vertices: new_vertices,
        global_out: shape.global_out.iter().map(&relabel).collect(),
    };
    let external_in = ext_in
        .iter()
        .map(|&(v, q)| shape.vertices[v].in_src[q])
        .collect();
    MergeResult {
        merged,
        mini,
        merged_position,
        external_in,
    }
}

/// Contracts the pair `(u, v)` joined by at least one edge; all edges
/// between them must share a direction (guaranteed by acyclicity). Returns
/// the merged shape and the 2-vertex mini picture whose global legs are the
/// external ports of the pair in the deterministic merge order.
pub fn contract_edge_pair(
    table: &ModuleTable,
    shape: &Shape,
    u: usize,
    v: usize,
    merged_module: ModuleId,
    merged_level: Level,
    position: MergedPosition,
) -> Result<MergeResult> {
    let mut u_feeds_v = false;
    let mut v_feeds_u = false;
    for (a, _, b, _) in shape.edges() {
        if a == u && b == v {
            u_feeds_v = true;
        }
        if a == v && b == u {
            v_feeds_u = true;
        }
    }
    match (u_feeds_v, v_feeds_u) {
        (true, false) => Ok(merge_group(table, shape, &[u], v, merged_module, merged_level, position)),
        (false, true) => Ok(merge_group(table, shape, &[v], u, merged_module, merged_level, position)),
        (false, false) => Err(Error::MalformedGraph(format!(
            "vertices {u} and {v} are not adjacent"
        ))),
        (true, true) => unreachable!("two-sided edges would be a cycle"),
    }
}

/// Replaces every vertex of `big` by a decorated subgraph whose global legs
/// are spliced onto the vertex's ports. All vertices of the result are
/// `Free`; decorations concatenate in big-vertex order.
pub fn substitute_all(
    table: &ModuleTable,
    big: &Shape,
    subs: &[&Decorated],
) -> Decorated {
    assert_eq!(big.vertices.len(), subs.len());
    let mut offsets = Vec::with_capacity(subs.len());
    let mut total = 0usize;
    for sub in subs {
        offsets.push(total);
        total += sub.shape.vertices.len();
    }
    // Resolve a source in the big graph to a source in the flattened graph.
    let resolve_big = |src: &Src| -> Src {
        match src {
            Src::In(i) => Src::In(*i),
            Src::Out { vertex, port } => {
                // The sub graph's global output `port` comes from one of its
                // own vertices (sub graphs are connected with at least one
                // vertex, so no pass strands occur).
                match &subs[*vertex].shape.global_out[*port] {
                    Src::Out { vertex: sv, port: sp } => Src::Out {
                        vertex: offsets[*vertex] + sv,
                        port: *sp,
                    },
                    Src::In(_) => unreachable!("substituted graphs carry no pass strands"),
                }
            }
        }
    };
    let mut vertices: Vec<VertexShape> = Vec::with_capacity(total);
    let mut decoration: Vec<usize> = Vec::with_capacity(total);
    for (bi, sub) in subs.iter().enumerate() {
        for (si, sv) in sub.shape.vertices.iter().enumerate() {
            let in_src = sv
                .in_src
                .iter()
                .map(|src| match src {
                    // The sub graph's global input `g` is the big vertex's
                    // in-port `g`.
                    Src::In(g) => resolve_big(&big.vertices[bi].in_src[*g]),
                    Src::Out { vertex, port } => Src::Out {
                        vertex: offsets[bi] + vertex,
                        port: *port,
                    },
                })
                .collect();
            vertices.push(VertexShape {
                module: sv.module,
                level: Level::Free,
                in_src,
            });
            decoration.push(sub.decoration[si]);
        }
    }
    let global_out = big.global_out.iter().map(|s| resolve_big(s)).collect();
    let _ = table;
    Decorated {
        shape: Shape {
            n_in: big.n_in,
            m_out: big.m_out,
            vertices,
            global_out,
        },
        decoration,
    }
}
