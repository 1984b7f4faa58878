//! Koszul dual components, the Koszul complex, and the truncated criterion
//! checks.
//!
//! The dual component of weight `w` is realized concretely: it is the
//! kernel of the bar boundary on the top-degree (all vertices weight one)
//! part, stored as explicit kernel vectors with their inclusion. The
//! Koszul complex at each grade is the kernel of the within-stage
//! contraction restricted to the top-degree sector of the augmented
//! pictures, and its boundary is the drop map expressed in those kernel
//! bases; solvability of that change of basis is asserted on every entry.

use crate::linalg::{ChainComplex, RationalMatrix};
use crate::propcalc::{Engine, ModuleKind, TruncationParams};
use crate::sbimodule::{BasedModule, ModuleId};
use std::rc::Rc;

/// Koszul dual component: cycles of the top bar differential.
#[derive(Clone, Debug)]
pub struct DualData {
    pub dim: usize,
    /// Columns are kernel vectors in the coordinates of the weight-`w`
    /// degree-`w` bar component.
    pub kernel: RationalMatrix,
}

impl Engine {
    /// The dual component at `(m, n)` and weight `w`, as kernel vectors of
    /// the top bar boundary.
    pub fn koszul_dual_component(&mut self, m: usize, n: usize, w: usize) -> Rc<DualData> {
        if let Some(d) = self.duals.get(&(m, n, w)) {
            return Rc::clone(d);
        }
        let boundary = self.bar_boundary(m, n, w, w);
        let kernel = boundary.kernel_basis();
        let data = Rc::new(DualData {
            dim: kernel.cols(),
            kernel,
        });
        self.duals.insert((m, n, w), Rc::clone(&data));
        data
    }

    /// The dual component as a decoration module of degree `w - 1`
    /// (desuspended, as used by cobar pictures); `None` when zero.
    pub fn dual_module(&mut self, m: usize, n: usize, w: usize) -> Option<ModuleId> {
        if let Some(&id) = self.dual_mods.get(&(m, n, w)) {
            return id;
        }
        let dual = self.koszul_dual_component(m, n, w);
        let id = if dual.dim == 0 {
            None
        } else {
            let bar = self.bar_component(m, n, w, w);
            let dim = dual.dim;
            let restrict = |mat: &RationalMatrix, kernel: &RationalMatrix| -> RationalMatrix {
                kernel
                    .solve_matrix(&mat.mul(kernel))
                    .expect("bar actions preserve the cycle subspace")
            };
            let left: Vec<RationalMatrix> = (0..m.saturating_sub(1))
                .map(|i| restrict(&bar.left_gen_matrix(&self.table, i), &dual.kernel))
                .collect();
            let right: Vec<RationalMatrix> = (0..n.saturating_sub(1))
                .map(|i| restrict(&bar.right_gen_matrix(&self.table, i), &dual.kernel))
                .collect();
            let module = BasedModule::new(
                m,
                n,
                dim,
                w,
                (w as i64) - 1,
                format!("D({m},{n})_{w}"),
                left,
                right,
            );
            Some(self.add_module(module, ModuleKind::Dual(m, n, w)))
        };
        self.dual_mods.insert((m, n, w), id);
        id
    }

    /// The whole top-degree bar component promoted to a decoration module;
    /// used as the ambient space of splitting computations.
    pub fn bar_top_module(&mut self, m: usize, n: usize, w: usize) -> Option<ModuleId> {
        if let Some(&id) = self.bar_top_mods.get(&(m, n, w)) {
            return id;
        }
        let bar = self.bar_component(m, n, w, w);
        let id = if bar.dim == 0 {
            None
        } else {
            let left: Vec<RationalMatrix> = (0..m.saturating_sub(1))
                .map(|i| bar.left_gen_matrix(&self.table, i))
                .collect();
            let right: Vec<RationalMatrix> = (0..n.saturating_sub(1))
                .map(|i| bar.right_gen_matrix(&self.table, i))
                .collect();
            let module = BasedModule::new(
                m,
                n,
                bar.dim,
                w,
                (w as i64) - 1,
                format!("B({m},{n})_{w}"),
                left,
                right,
            );
            Some(self.add_module(module, ModuleKind::BarTop(m, n, w)))
        };
        self.bar_top_mods.insert((m, n, w), id);
        id
    }

    /// The Koszul complex of one component and total weight: grade `i`
    /// holds the two-stage pictures whose upper zone consists of `i`
    /// weight-one suspended vertices with each upper cluster a dual-class
    /// cycle; realized as the kernel of the within-zone contraction on the
    /// top-degree sector, with the drop map as boundary.
    pub fn koszul_complex(&mut self, m: usize, n: usize, w: usize) -> ChainComplex {
        // Kernel inclusion per grade, over the pure-index subspaces.
        let mut pure_indices: Vec<Vec<usize>> = Vec::with_capacity(w + 1);
        let mut kernels: Vec<RationalMatrix> = Vec::with_capacity(w + 1);
        for i in 0..=w {
            let ab = self.ab_component(m, n, w, i);
            let pure: Vec<usize> = (0..ab.space.dim).filter(|&x| ab.pure[x]).collect();
            let kernel = if i >= 2 {
                let maps = self.ab_maps(m, n, w, i);
                let contract_pure = restrict_cols(&maps.0, &pure);
                contract_pure.kernel_basis()
            } else {
                RationalMatrix::identity(pure.len())
            };
            pure_indices.push(pure);
            kernels.push(kernel);
        }
        let mut components = Vec::with_capacity(w + 1);
        let mut boundaries = Vec::with_capacity(w + 1);
        for i in 0..=w {
            components.push(kernels[i].cols());
            if i == 0 {
                boundaries.push(RationalMatrix::zero(0, components[0]));
                continue;
            }
            let maps = self.ab_maps(m, n, w, i);
            let drop_pure = restrict_to(&maps.1, &pure_indices[i - 1], &pure_indices[i]);
            // Purity is preserved by the drop map.
            debug_assert!(drops_stay_pure(&maps.1, &pure_indices[i - 1], &pure_indices[i]));
            let image = drop_pure.mul(&kernels[i]);
            let expressed = kernels[i - 1]
                .solve_matrix(&image)
                .expect("drop map preserves the cycle subspaces");
            boundaries.push(expressed);
        }
        ChainComplex::new(0, components, boundaries)
    }

    /// Dimension table helper: quotient dimensions for one component.
    pub fn quotient_dim(&mut self, m: usize, n: usize, w: usize) -> usize {
        self.quotient(m, n, w).dim
    }
}

/// Column restriction: keeps `cols` in order.
pub fn restrict_cols(mat: &RationalMatrix, cols: &[usize]) -> RationalMatrix {
    let mut out = RationalMatrix::zero(mat.rows(), cols.len());
    for (new_c, &c) in cols.iter().enumerate() {
        for (r, v) in mat.col(c) {
            out.set(r, new_c, v);
        }
    }
    out
}

/// Restriction to given rows and columns, in order.
pub fn restrict_to(mat: &RationalMatrix, rows: &[usize], cols: &[usize]) -> RationalMatrix {
    let row_pos: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut out = RationalMatrix::zero(rows.len(), cols.len());
    for (new_c, &c) in cols.iter().enumerate() {
        for (r, v) in mat.col(c) {
            if let Some(&nr) = row_pos.get(&r) {
                out.set(nr, new_c, v);
            }
        }
    }
    out
}

fn drops_stay_pure(drop: &RationalMatrix, target_pure: &[usize], source_pure: &[usize]) -> bool {
    let target_set: std::collections::HashSet<usize> = target_pure.iter().cloned().collect();
    for &c in source_pure {
        for (r, _) in drop.col(c) {
            if !target_set.contains(&r) {
                return false;
            }
        }
    }
    true
}

/// Homology dimensions of the Koszul complex, the mirrored complex
/// computed through the reversed presentation, and the bar complex, for
/// one component and weight.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ComponentReport {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub quotient_dim: usize,
    pub dual_dim: usize,
    /// Grades 0..weight.
    pub koszul_homology: Vec<usize>,
    /// Grades 0..weight, computed on the reversed presentation at (n, m).
    pub mirror_homology: Vec<usize>,
    /// Degrees 1..weight.
    pub bar_homology: Vec<usize>,
}

impl ComponentReport {
    pub fn koszul_clear(&self) -> bool {
        self.koszul_homology.iter().all(|&d| d == 0)
    }

    pub fn mirror_clear(&self) -> bool {
        self.mirror_homology.iter().all(|&d| d == 0)
    }

    /// Bar homology concentrated in the top degree, where it tautologically
    /// equals the dual component.
    pub fn bar_concentrated(&self) -> bool {
        self.bar_homology[..self.weight - 1].iter().all(|&d| d == 0)
            && self.bar_homology[self.weight - 1] == self.dual_dim
    }
}

/// A nonzero homology class exhibiting a failed criterion.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Witness {
    pub criterion: String,
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub degree: usize,
    pub homology_dim: usize,
    /// Coordinates of one representative cycle not a boundary, in the
    /// corresponding component basis.
    pub cycle: Vec<(usize, String)>,
}

/// Outcome of the full criterion run at a truncation.
#[derive(Clone, Debug, serde::Serialize)]
pub struct KoszulOutcome {
    pub name: String,
    pub max_weight: usize,
    pub max_biarity: usize,
    pub components: Vec<ComponentReport>,
    pub koszul_positive: bool,
    pub mirror_positive: bool,
    pub bar_positive: bool,
    pub verdicts_agree: bool,
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
}

/// Runs the three criterion checks for every component in the truncation.
/// The boundary assembly is sequential and memoized; the final homology
/// ranks of the per-component complexes run in parallel.
pub fn koszul_check(
    pres: &crate::presentation::Presentation,
    trunc: TruncationParams,
    jobs: usize,
) -> crate::Result<KoszulOutcome> {
    let mut engine = Engine::new(pres.clone())?;
    let mut mirror_engine = Engine::new(pres.reversed())?;
    struct Cell {
        m: usize,
        n: usize,
        w: usize,
        quotient_dim: usize,
        dual_dim: usize,
        koszul: ChainComplex,
        mirror: ChainComplex,
        bar: ChainComplex,
    }
    let mut cells = Vec::new();
    for (m, n) in trunc.components() {
        for w in 1..=trunc.max_weight {
            let koszul = engine.koszul_complex(m, n, w);
            let mirror = mirror_engine.koszul_complex(n, m, w);
            let bar = engine.bar_complex(m, n, w);
            koszul.validate()?;
            mirror.validate()?;
            bar.validate()?;
            cells.push(Cell {
                m,
                n,
                w,
                quotient_dim: engine.quotient_dim(m, n, w),
                dual_dim: engine.koszul_dual_component(m, n, w).dim,
                koszul,
                mirror,
                bar,
            });
        }
    }
    let homologies: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = crate::report::parallel_map(
        jobs,
        &cells,
        |cell| {
            (
                cell.koszul.homology_dims(),
                cell.mirror.homology_dims(),
                cell.bar.homology_dims(),
            )
        },
    );
    let mut components = Vec::new();
    let mut witnesses = Vec::new();
    for (cell, (hk, hm, hb)) in cells.iter().zip(homologies) {
        let report = ComponentReport {
            m: cell.m,
            n: cell.n,
            weight: cell.w,
            quotient_dim: cell.quotient_dim,
            dual_dim: cell.dual_dim,
            koszul_homology: hk,
            mirror_homology: hm,
            bar_homology: hb,
        };
        if !report.koszul_clear() {
            if let Some(w) = extract_witness("koszul-complex", &cell.koszul, &report) {
                witnesses.push(w);
            }
        }
        if !report.mirror_clear() {
            if let Some(w) = extract_witness("mirror-complex", &cell.mirror, &report) {
                witnesses.push(w);
            }
        }
        if !report.bar_concentrated() {
            if let Some(w) = extract_witness("bar-concentration", &cell.bar, &report) {
                witnesses.push(w);
            }
        }
        components.push(report);
    }
    let koszul_positive = components.iter().all(|c| c.koszul_clear());
    let mirror_positive = components.iter().all(|c| c.mirror_clear());
    let bar_positive = components.iter().all(|c| c.bar_concentrated());
    Ok(KoszulOutcome {
        name: pres.name.clone(),
        max_weight: trunc.max_weight,
        max_biarity: trunc.max_biarity,
        components,
        koszul_positive,
        mirror_positive,
        bar_positive,
        verdicts_agree: koszul_positive == mirror_positive && mirror_positive == bar_positive,
        verdict: koszul_positive && mirror_positive && bar_positive,
        witnesses,
    })
}

/// Finds a representative cycle that is not a boundary in the first degree
/// with nonzero homology.
fn extract_witness(
    criterion: &str,
    complex: &ChainComplex,
    report: &ComponentReport,
) -> Option<Witness> {
    let h = complex.homology_dims();
    for (i, &dim) in h.iter().enumerate() {
        let expected = if criterion == "bar-concentration" && i == h.len() - 1 {
            report.dual_dim
        } else {
            0
        };
        if dim == expected {
            continue;
        }
        // Cycles in degree i not hit by the boundary from degree i + 1.
        let cycles = complex.boundaries[i].kernel_basis();
        let image = if i + 1 < complex.components.len() {
            Some(&complex.boundaries[i + 1])
        } else {
            None
        };
        for c in 0..cycles.cols() {
            let candidate = cycles.col(c);
            let is_boundary = match image {
                None => candidate.is_empty(),
                Some(b) => b.solve(&candidate).is_some(),
            };
            if !is_boundary {
                return Some(Witness {
                    criterion: criterion.to_string(),
                    m: report.m,
                    n: report.n,
                    weight: report.weight,
                    degree: (complex.degree_offset as usize) + i,
                    homology_dim: dim,
                    cycle: candidate
                        .into_iter()
                        .map(|(idx, v)| (idx, v.to_string()))
                        .collect(),
                });
            }
        }
    }
    None
}
