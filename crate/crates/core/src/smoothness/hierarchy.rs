//! Hierarchical P1 surplus basis over a chain of red-refined meshes, with
//! best N-term approximation measured exactly in `L₂`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::pde::mass_matrix;
use crate::sparse::CsrMatrix;

/// Coordinates are matched on a dyadic lattice so that grid points
/// computed along different refinement paths compare equal.
const QUANTUM: f64 = 1.0 / (1u64 << 32) as f64;

fn key(p: [f64; 2]) -> (i64, i64) {
    ((p[0] / QUANTUM).round() as i64, (p[1] / QUANTUM).round() as i64)
}

/// Fine-mesh view of one red refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Fine index of every coarse node.
    pub coarse_to_fine: Vec<usize>,
    /// `(new node, parent edge end a, parent edge end b)` in fine indices.
    pub new_nodes: Vec<(usize, usize, usize)>,
}

impl Refinement {
    /// Matches the fine nodes against coarse nodes and coarse edge midpoints.
    pub fn new(coarse: &Mesh, fine: &Mesh) -> Result<Self> {
        let index: HashMap<(i64, i64), usize> = fine.nodes().iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
        let lookup = |p: [f64; 2]| {
            index
                .get(&key(p))
                .copied()
                .ok_or_else(|| Error::Capability("meshes are not related by red refinement".into()))
        };
        if coarse.triangles().iter().enumerate().any(|(t, _)| coarse.curved_edge(t).is_some()) {
            return Err(Error::Capability("curved elements do not form nested spaces".into()));
        }
        let coarse_to_fine = coarse.nodes().iter().map(|p| lookup(*p)).collect::<Result<Vec<_>>>()?;
        let mut seen = vec![false; fine.n_nodes()];
        for &f in &coarse_to_fine {
            seen[f] = true;
        }
        let mut new_nodes = Vec::new();
        let mut edges: Vec<(usize, usize)> = coarse
            .triangles()
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        for (a, b) in edges {
            let (pa, pb) = (coarse.nodes()[a], coarse.nodes()[b]);
            let v = lookup([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])])?;
            if !seen[v] {
                seen[v] = true;
                new_nodes.push((v, coarse_to_fine[a], coarse_to_fine[b]));
            }
        }
        if seen.iter().any(|s| !s) || fine.n_triangles() != 4 * coarse.n_triangles() {
            return Err(Error::Capability("meshes are not related by red refinement".into()));
        }
        new_nodes.sort_unstable();
        Ok(Self {
            coarse_to_fine,
            new_nodes,
        })
    }

    /// Coarse P1 function expressed on the fine mesh.
    pub fn prolongate(&self, coarse_values: &[f64], n_fine: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_fine];
        for (c, &f) in self.coarse_to_fine.iter().enumerate() {
            out[f] = coarse_values[c];
        }
        for &(v, a, b) in &self.new_nodes {
            out[v] = 0.5 * (out[a] + out[b]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalCoefficient {
    pub level: usize,
    /// Node index on the finest mesh.
    pub node: usize,
    pub value: f64,
    /// `‖φ‖_{L₂}` of the level hat function carrying the coefficient.
    pub scale: f64,
}

/// A P1 field on the finest mesh of a red-refined chain, split into
/// hierarchical surpluses.
#[derive(Debug, Clone)]
pub struct HierarchicalField {
    n_fine: usize,
    level0: Vec<usize>,
    /// Per level ≥ 1: `(node, a, b)` in finest indices.
    levels: Vec<Vec<(usize, usize, usize)>>,
    coefficients: Vec<HierarchicalCoefficient>,
    values: Vec<f64>,
    mass: CsrMatrix,
}

fn hat_norms(mesh: &Mesh) -> Vec<f64> {
    let mut acc = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.signed_area(t).abs() / 6.0;
        for &v in tri {
            acc[v] += a;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

impl HierarchicalField {
    /// `meshes` runs from coarsest to finest; `values` live on the finest.
    pub fn new(meshes: &[&Mesh], values: &[f64]) -> Result<Self> {
        let fine = *meshes.last().ok_or_else(|| Error::Parameter("need at least one mesh".into()))?;
        if values.len() != fine.n_nodes() {
            return Err(Error::Parameter("field does not live on the finest mesh".into()));
        }
        // local → finest index maps, built from the finest level downwards
        let mut to_fine: Vec<Vec<usize>> = vec![Vec::new(); meshes.len()];
        to_fine[meshes.len() - 1] = (0..fine.n_nodes()).collect();
        let mut levels = vec![Vec::new(); meshes.len()];
        for l in (1..meshes.len()).rev() {
            let r = Refinement::new(meshes[l - 1], meshes[l])?;
            let map = &to_fine[l];
            levels[l] = r.new_nodes.iter().map(|&(v, a, b)| (map[v], map[a], map[b])).collect();
            to_fine[l - 1] = r.coarse_to_fine.iter().map(|&c| map[c]).collect();
        }
        let norms: Vec<Vec<f64>> = meshes.iter().map(|m| hat_norms(m)).collect();
        let mut coefficients = Vec::with_capacity(fine.n_nodes());
        for (i, &f) in to_fine[0].iter().enumerate() {
            coefficients.push(HierarchicalCoefficient {
                level: 0,
                node: f,
                value: values[f],
                scale: norms[0][i],
            });
        }
        for l in 1..meshes.len() {
            let local: HashMap<usize, usize> = to_fine[l].iter().enumerate().map(|(i, &f)| (f, i)).collect();
            for &(v, a, b) in &levels[l] {
                coefficients.push(HierarchicalCoefficient {
                    level: l,
                    node: v,
                    value: values[v] - 0.5 * (values[a] + values[b]),
                    scale: norms[l][local[&v]],
                });
            }
        }
        Ok(Self {
            n_fine: fine.n_nodes(),
            level0: to_fine[0].clone(),
            levels,
            coefficients,
            values: values.to_vec(),
            mass: mass_matrix(fine)?,
        })
    }

    pub fn coefficients(&self) -> &[HierarchicalCoefficient] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Number of coefficients with non-zero value.
    pub fn active(&self) -> usize {
        self.coefficients.iter().filter(|c| c.value != 0.0).count()
    }

    /// Nodal values on the finest mesh of the expansion restricted to `keep`.
    fn synthesize(&self, keep: &[bool]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_fine];
        let mut k = 0;
        for &f in &self.level0 {
            if keep[k] {
                out[f] = self.coefficients[k].value;
            }
            k += 1;
        }
        for level in &self.levels[1..] {
            for &(v, a, b) in level {
                out[v] = 0.5 * (out[a] + out[b]) + if keep[k] { self.coefficients[k].value } else { 0.0 };
                k += 1;
            }
        }
        out
    }

    /// Coefficient indices by decreasing `|value|·scale`, ties by position.
    fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.coefficients.len()).collect();
        let size = |i: usize| self.coefficients[i].value.abs() * self.coefficients[i].scale;
        order.sort_by(|&i, &j| size(j).total_cmp(&size(i)).then(i.cmp(&j)));
        order
    }

    fn error_of(&self, approx: &[f64]) -> f64 {
        let e: Vec<f64> = self.values.iter().zip(approx).map(|(u, a)| u - a).collect();
        self.mass.quad_form(&e).max(0.0).sqrt()
    }

    /// Approximation from the `n` largest scaled coefficients and its `L₂` error.
    pub fn best_n_term(&self, n: usize) -> (Vec<f64>, f64) {
        let order = self.ranking();
        let mut keep = vec![false; self.coefficients.len()];
        for &i in order.iter().take(n) {
            keep[i] = true;
        }
        if n >= self.coefficients.len() {
            return (self.values.clone(), 0.0);
        }
        let approx = self.synthesize(&keep);
        let err = self.error_of(&approx);
        (approx, err)
    }

    /// `σ_N` for each requested `N`, enforced nonincreasing.
    pub fn nterm_curve(&self, ns: &[usize]) -> Vec<(usize, f64)> {
        let order = self.ranking();
        let mut sorted: Vec<usize> = ns.to_vec();
        sorted.sort_unstable();
        let mut keep = vec![false; self.coefficients.len()];
        let mut taken = 0;
        let mut out = Vec::with_capacity(sorted.len());
        let mut last = f64::INFINITY;
        for n in sorted {
            while taken < n.min(order.len()) {
                keep[order[taken]] = true;
                taken += 1;
            }
            let err = if n >= order.len() { 0.0 } else { self.error_of(&self.synthesize(&keep)) };
            last = last.min(err);
            out.push((n, last));
        }
        out
    }
}

/// Best N-term error for coefficients of an orthonormal system: `ℓ²` tail of
/// all but the `n` largest magnitudes.
pub fn best_n_term_l2(coeffs: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&i, &j| coeffs[j].abs().total_cmp(&coeffs[i].abs()).then(i.cmp(&j)));
    let mut approx = vec![0.0; coeffs.len()];
    for &i in order.iter().take(n) {
        approx[i] = coeffs[i];
    }
    let tail = order.iter().skip(n).map(|&i| coeffs[i] * coeffs[i]).sum::<f64>().sqrt();
    (approx, tail)
}

/// `N` values spread geometrically over `[lo, hi]`, deduplicated.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo.max(1)) as f64, (hi.max(lo.max(1))) as f64);
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let f = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            (a * (b / a).powf(f)).round() as usize
        })
        .collect();
    out.dedup();
    out
}
