use crate::mesh::Mesh;

/// A scalar P1 field given by its nodal coefficients on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot<'m> {
    pub mesh: &'m Mesh,
    pub values: Vec<f64>,
}

impl<'m> FieldSnapshot<'m> {
    pub fn new(mesh: &'m Mesh, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), mesh.n_nodes(), "one value per mesh node");
        Self { mesh, values }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &'m Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::new(mesh, mesh.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.mesh, self.values.iter().map(|v| s * v).collect())
    }
}
