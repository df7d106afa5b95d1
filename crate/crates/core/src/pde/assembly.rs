//! P1 stiffness and mass assembly for the bilinear form
//! `B(u, v) = ∫ Σ a_{αβ} D^β u D^α v`.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{element_points, geometric_subdivision, shape_gradients, shape_values, ElementMap, TriangleRule};
use crate::sparse::CsrMatrix;

use super::{Diffusion, ParabolicProblem};

/// Global operators on the full node set (no boundary elimination).
#[derive(Debug, Clone)]
pub struct Operators {
    /// Stiffness of the problem's diffusion tensor.
    pub stiffness: CsrMatrix,
    /// Stiffness of the plain Laplacian, i.e. the H¹ seminorm Gram matrix.
    pub laplace: CsrMatrix,
    pub mass: CsrMatrix,
    pub lumped_mass: Vec<f64>,
}

fn apply(a: &[[f64; 2]; 2], g: [f64; 2]) -> [f64; 2] {
    [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Smallest eigenvalue of the symmetric part of a 2×2 matrix.
pub(crate) fn min_eigenvalue(a: &[[f64; 2]; 2]) -> f64 {
    let (p, q, r) = (a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]);
    0.5 * (p + r) - (0.25 * (p - r) * (p - r) + q * q).sqrt()
}

fn check_tensor(a: &[[f64; 2]; 2], t: usize) -> Result<()> {
    if a[0][1] != a[1][0] {
        return Err(Error::Parameter(format!("diffusion tensor not symmetric on element {t}")));
    }
    let c = min_eigenvalue(a);
    if !(c > 0.0) {
        return Err(Error::Parameter(format!(
            "diffusion tensor not uniformly elliptic on element {t} (smallest eigenvalue {c})"
        )));
    }
    Ok(())
}

pub fn assemble(mesh: &Mesh, problem: &ParabolicProblem) -> Result<Operators> {
    assemble_with(mesh, &problem.diffusion)
}

/// Consistent P1 mass matrix of a mesh.
pub fn mass_matrix(mesh: &Mesh) -> Result<CsrMatrix> {
    Ok(assemble_with(mesh, &Diffusion::Constant(Diffusion::IDENTITY))?.mass)
}

fn assemble_with(mesh: &Mesh, diffusion: &Diffusion) -> Result<Operators> {
    if let Diffusion::TimeDependent(_) = diffusion {
        return Err(Error::Capability(
            "time-dependent diffusion coefficients are not supported by the solver".into(),
        ));
    }
    let n = mesh.n_nodes();
    let rule = TriangleRule::collapsed(4);
    let whole = geometric_subdivision(&[], 0);
    let mut ks = Vec::with_capacity(9 * mesh.n_triangles());
    let mut kl = Vec::with_capacity(9 * mesh.n_triangles());
    let mut ms = Vec::with_capacity(9 * mesh.n_triangles());
    let mut lumped = vec![0.0; n];

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(t);
        let diam = mesh.diameter(t);
        if !(area > 1e-14 * diam * diam) {
            return Err(Error::Assembly(format!("degenerate triangle {t} (area {area})")));
        }
        let map = ElementMap::new(mesh, t);
        let mut ke = [[0.0; 3]; 3];
        let mut le = [[0.0; 3]; 3];
        let mut me = [[0.0; 3]; 3];
        if map.is_affine() {
            let jac = map.jacobian([0.0, 0.0]);
            let grads = shape_gradients(&jac);
            let [a, b, c] = map.vertices();
            let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
            let tensor = diffusion.at(centroid);
            check_tensor(&tensor, t)?;
            for i in 0..3 {
                for j in 0..3 {
                    ke[i][j] = area * dot(grads[i], apply(&tensor, grads[j]));
                    le[i][j] = area * dot(grads[i], grads[j]);
                    me[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                }
            }
        } else {
            for (xi, x, w) in element_points(&map, &rule, &whole) {
                let tensor = diffusion.at(x);
                check_tensor(&tensor, t)?;
                let grads = shape_gradients(&map.jacobian(xi));
                let phi = shape_values(xi);
                for i in 0..3 {
                    for j in 0..3 {
                        ke[i][j] += w * dot(grads[i], apply(&tensor, grads[j]));
                        le[i][j] += w * dot(grads[i], grads[j]);
                        me[i][j] += w * phi[i] * phi[j];
                    }
                }
            }
        }
        for i in 0..3 {
            for j in 0..i {
                ke[i][j] = ke[j][i];
                le[i][j] = le[j][i];
                me[i][j] = me[j][i];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                ks.push((tri[i], tri[j], ke[i][j]));
                kl.push((tri[i], tri[j], le[i][j]));
                ms.push((tri[i], tri[j], me[i][j]));
                lumped[tri[i]] += me[i][j];
            }
        }
    }
    Ok(Operators {
        stiffness: CsrMatrix::from_triplets(n, ks),
        laplace: CsrMatrix::from_triplets(n, kl),
        mass: CsrMatrix::from_triplets(n, ms),
        lumped_mass: lumped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PolygonalDomain;
    use crate::mesh::mesh_uniform;
    use crate::pde::Source;
    use std::sync::Arc;

    fn heat(domain: PolygonalDomain) -> ParabolicProblem {
        ParabolicProblem::heat(domain, Source::Constant(1.0), 1.0)
    }

    #[test]
    fn single_interior_node_stencil() {
        let sq = PolygonalDomain::unit_square();
        let mesh = mesh_uniform(&sq, 0.5).unwrap();
        let ops = assemble(&mesh, &heat(sq)).unwrap();
        let c = (0..mesh.n_nodes()).find(|&i| !mesh.boundary_flags()[i]).unwrap();
        assert_eq!(mesh.nodes()[c], [0.5, 0.5]);
        assert!((ops.stiffness.get(c, c) - 4.0).abs() < 1e-14);
        assert!((ops.lumped_mass[c] - 0.25).abs() < 1e-15);
        assert!((ops.mass.get(c, c) - 0.125).abs() < 1e-15);
        // five-point stencil: axis neighbours -1, diagonal neighbours 0
        let row: Vec<_> = ops.stiffness.row(c).filter(|(j, _)| *j != c).collect();
        for (j, v) in row {
            let p = mesh.nodes()[j];
            let axis = (p[0] - 0.5).abs() < 1e-12 || (p[1] - 0.5).abs() < 1e-12;
            assert!((v - if axis { -1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }

    #[test]
    fn operators_are_symmetric() {
        for d in [PolygonalDomain::l_shape(), PolygonalDomain::sector(4.0, 1.0).unwrap()] {
            let mesh = mesh_uniform(&d, 0.25).unwrap();
            let mut p = heat(d);
            p.diffusion = Diffusion::Constant([[2.0, 0.5], [0.5, 1.0]]);
            let ops = assemble(&mesh, &p).unwrap();
            assert!(ops.stiffness.is_symmetric());
            assert!(ops.mass.is_symmetric());
            let total: f64 = ops.lumped_mass.iter().sum();
            assert!((total - p.domain.area()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let sq = PolygonalDomain::unit_square();
        let mesh = mesh_uniform(&sq, 0.5).unwrap();
        let mut p = heat(sq);
        p.diffusion = Diffusion::Constant([[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(assemble(&mesh, &p), Err(Error::Parameter(_))));
        p.diffusion = Diffusion::TimeDependent(Arc::new(|_, _| [[1.0, 0.0], [0.0, 1.0]]));
        assert!(matches!(assemble(&mesh, &p), Err(Error::Capability(_))));
    }

    #[test]
    fn rejects_degenerate_triangles() {
        let mesh = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let p = heat(PolygonalDomain::unit_square());
        assert!(matches!(assemble(&mesh, &p), Err(Error::Assembly(_))));
    }

    proptest::proptest! {
        #[test]
        fn stiffness_is_coercive(seed in 0u64..64) {
            let d = PolygonalDomain::l_shape();
            let mesh = mesh_uniform(&d, 0.5).unwrap();
            let ops = assemble(&mesh, &heat(d)).unwrap();
            let mut s = seed + 1;
            let v: Vec<f64> = (0..mesh.n_nodes()).map(|i| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if mesh.boundary_flags()[i] { 0.0 } else { ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5 }
            }).collect();
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            proptest::prop_assume!(norm2 > 1e-12);
            proptest::prop_assert!(ops.stiffness.quad_form(&v) > 0.0);
        }
    }
}
