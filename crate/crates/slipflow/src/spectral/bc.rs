use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grid::RadialGrid;

/// One boundary functional, substituted for collocation row `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct BcRow {
    pub index: usize,
    pub coeffs: Vec<f64>,
    pub value: f64,
}

/// Boundary functionals replacing the collocation rows nearest the walls.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditionSet {
    pub rows: Vec<BcRow>,
}

fn unit_row(len: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    v
}

fn matrix_row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

impl BoundaryConditionSet {
    /// Homogeneous wall conditions of the streamfunction problem:
    /// psi(b) = 0, psi'' + psi'/b = 0 at b, psi'' - (1/a - alpha/mu) psi' = 0 at a, psi(a) = 0.
    pub fn slip(grid: &RadialGrid, alpha: f64, mu: f64) -> Self {
        let n = grid.n;
        let len = grid.size();
        let outer: Vec<f64> = matrix_row(&grid.d2, 0)
            .iter()
            .zip(matrix_row(&grid.d1, 0))
            .map(|(d2, d1)| d2 + d1 / grid.b)
            .collect();
        let k = 1.0 / grid.a - alpha / mu;
        let inner: Vec<f64> = matrix_row(&grid.d2, n)
            .iter()
            .zip(matrix_row(&grid.d1, n))
            .map(|(d2, d1)| d2 - k * d1)
            .collect();
        Self {
            rows: vec![
                BcRow { index: 0, coeffs: unit_row(len, 0), value: 0.0 },
                BcRow { index: 1, coeffs: outer, value: 0.0 },
                BcRow { index: n - 1, coeffs: inner, value: 0.0 },
                BcRow { index: n, coeffs: unit_row(len, n), value: 0.0 },
            ],
        }
    }

    /// Values at both walls, for second-order problems.
    pub fn dirichlet(grid: &RadialGrid, at_a: f64, at_b: f64) -> Self {
        let n = grid.n;
        let len = grid.size();
        Self {
            rows: vec![
                BcRow { index: 0, coeffs: unit_row(len, 0), value: at_b },
                BcRow { index: n, coeffs: unit_row(len, n), value: at_a },
            ],
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.index).collect()
    }

    /// Copy of `op` with the boundary rows substituted.
    pub fn impose(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        let mut m = op.clone();
        for row in &self.rows {
            for (j, &c) in row.coeffs.iter().enumerate() {
                m[(row.index, j)] = c;
            }
        }
        m
    }

    /// Each functional applied to the profile, minus its prescribed value.
    pub fn residuals(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.coeffs.iter().zip(values).map(|(c, v)| v * c).sum::<Complex64>() - row.value)
            .collect()
    }

    /// Residuals scaled by the size of each functional row.
    pub fn relative_residual(&self, values: &[Complex64]) -> f64 {
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
        self.rows
            .iter()
            .zip(self.residuals(values))
            .map(|(row, r)| {
                let rs: f64 = row.coeffs.iter().map(|c| c.abs()).sum();
                r.norm() / (rs * scale)
            })
            .fold(0.0, f64::max)
    }
}
