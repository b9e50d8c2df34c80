use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use super::bc::BoundaryConditionSet;
use super::precise::residual_dd;
use super::operator::ModalOperator;
use crate::domain::{check_len, ModalField};
use crate::error::{Error, Result};

/// Systems whose row-equilibrated 1-norm condition number exceeds this are
/// reported as singular. Regular slip-wall operators sit below 1e10 for
/// N <= 128; a shift at an exact eigenvalue lands near 1e15.
pub const SINGULAR_CONDITION: f64 = 1e14;

/// LU factorization of an operator with boundary rows substituted.
#[derive(Debug, Clone)]
pub struct BvpSolver {
    lu: LU<f64, Dyn, Dyn>,
    /// Equilibrated system matrix, kept for refinement.
    matrix: DMatrix<f64>,
    row_scale: Vec<f64>,
    bcs: BoundaryConditionSet,
    /// Row-equilibrated 1-norm condition number.
    pub condition: f64,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl BvpSolver {
    pub fn new(op: &DMatrix<f64>, bcs: &BoundaryConditionSet) -> Result<Self> {
        let mut m = bcs.impose(op);
        let row_scale: Vec<f64> = m
            .row_iter()
            .map(|row| {
                let s = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if s > 0.0 { 1.0 / s } else { 1.0 }
            })
            .collect();
        for (i, s) in row_scale.iter().enumerate() {
            m.row_mut(i).scale_mut(*s);
        }
        let norm = one_norm(&m);
        let lu = m.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::SingularSystem(f64::INFINITY))?;
        let condition = norm * one_norm(&inv);
        if !condition.is_finite() || condition > SINGULAR_CONDITION {
            return Err(Error::SingularSystem(condition));
        }
        Ok(Self { lu, matrix: m, row_scale, bcs: bcs.clone(), condition })
    }

    fn load(&self, rhs: &[Complex64]) -> (DVector<f64>, DVector<f64>) {
        let mut re = DVector::from_iterator(rhs.len(), rhs.iter().map(|c| c.re));
        let mut im = DVector::from_iterator(rhs.len(), rhs.iter().map(|c| c.im));
        for row in &self.bcs.rows {
            re[row.index] = row.value;
            im[row.index] = 0.0;
        }
        for (i, s) in self.row_scale.iter().enumerate() {
            re[i] *= s;
            im[i] *= s;
        }
        (re, im)
    }

    /// Solves with `rhs` on the collocation rows and the prescribed values on
    /// the boundary rows.
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let (re, im) = self.load(rhs);
        let (re, im) = (self.refined(re), self.refined(im));
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// Plain LU solve without refinement, for repeated cheap solves.
    pub fn solve_unrefined(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let (mut re, mut im) = self.load(rhs);
        self.lu.solve_mut(&mut re);
        self.lu.solve_mut(&mut im);
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }
}

impl BvpSolver {
    /// LU solve followed by refinement steps with the residual taken in
    /// double-double; the operators are badly scaled (entries ~ N^8) so
    /// plain LU leaves a residual far above the rounding floor of x.
    fn refined(&self, b: DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.lu.solve_mut(&mut x);
        if b.iter().all(|v| *v == 0.0) {
            return x;
        }
        for _ in 0..REFINE_STEPS {
            let r = residual_dd(&self.matrix, x.as_slice(), b.as_slice());
            let mut dx = DVector::from_vec(r);
            self.lu.solve_mut(&mut dx);
            x += dx;
        }
        x
    }
}

const REFINE_STEPS: usize = 2;

/// Solves op x = rhs on the interior rows with the boundary rows of `bcs`.
pub fn solve_bvp(op: &ModalOperator, rhs: &ModalField, bcs: &BoundaryConditionSet) -> Result<ModalField> {
    check_len(op.matrix.nrows(), rhs.len())?;
    let solver = BvpSolver::new(&op.matrix, bcs)?;
    Ok(ModalField::new(rhs.n, solver.solve(&rhs.values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{bilaplacian_n, build_grid, laplacian_n, BcRow};

    #[test]
    fn homogeneous_slip_problem_has_only_zero_solution() {
        let g = build_grid(1.0, 3.0, 32).unwrap();
        let op = bilaplacian_n(&g, 1);
        let bcs = BoundaryConditionSet::slip(&g, 5.0, 1.2);
        let x = solve_bvp(&op, &ModalField::zeros(1, g.size()), &bcs).unwrap();
        assert!(x.max_abs() == 0.0);
    }

    #[test]
    fn dirichlet_harmonic_profile() {
        let (a, b) = (1.0, 3.0);
        let g = build_grid(a, b, 32).unwrap();
        let op = laplacian_n(&g, 1);
        let bcs = BoundaryConditionSet::dirichlet(&g, 1.0, 0.0);
        let x = solve_bvp(&op, &ModalField::zeros(1, g.size()), &bcs).unwrap();
        for (i, &r) in g.nodes.iter().enumerate() {
            let exact = (b / r - r / b) / (b / a - a / b);
            assert!((x.values[i].re - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_system_detected() {
        let g = build_grid(1.0, 3.0, 16).unwrap();
        let op = laplacian_n(&g, 1);
        // the same functional twice cannot determine a solution
        let e0 = BcRow { index: 0, coeffs: { let mut v = vec![0.0; 17]; v[0] = 1.0; v }, value: 0.0 };
        let bcs = BoundaryConditionSet { rows: vec![e0.clone(), BcRow { index: 16, ..e0 }] };
        assert!(matches!(solve_bvp(&op, &ModalField::zeros(1, 17), &bcs), Err(Error::SingularSystem(_))));
    }
}
