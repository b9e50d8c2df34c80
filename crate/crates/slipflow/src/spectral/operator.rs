use nalgebra::DMatrix;

use super::grid::RadialGrid;

/// Dense modal operator: Delta_n (order 1) or Delta_n^2 (order 2), or a
/// linear combination of them (order is then the highest order present).
#[derive(Debug, Clone)]
pub struct ModalOperator {
    pub n: i32,
    pub order: u8,
    pub matrix: DMatrix<f64>,
}

impl ModalOperator {
    /// c1 * self + c2 * other.
    pub fn combine(&self, c1: f64, other: &ModalOperator, c2: f64) -> ModalOperator {
        assert_eq!(self.n, other.n, "combining operators of different modes");
        ModalOperator {
            n: self.n,
            order: self.order.max(other.order),
            matrix: &self.matrix * c1 + &other.matrix * c2,
        }
    }

    pub fn scaled(&self, c: f64) -> ModalOperator {
        ModalOperator { n: self.n, order: self.order, matrix: &self.matrix * c }
    }
}

/// Delta_n = d^2/dr^2 + (1/r) d/dr - n^2/r^2.
pub fn laplacian_n(grid: &RadialGrid, n: i32) -> ModalOperator {
    ModalOperator { n, order: 1, matrix: grid.precise.laplacian(n).to_f64() }
}

/// Delta_n^2 as the matrix square of Delta_n.
pub fn bilaplacian_n(grid: &RadialGrid, n: i32) -> ModalOperator {
    ModalOperator { n, order: 2, matrix: grid.precise.bilaplacian(n).to_f64() }
}
