use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::bc::BoundaryConditionSet;
use super::operator::ModalOperator;
use crate::domain::ModalField;
use crate::error::{Error, Result};

/// Eigenvalue with its eigenfunction (only computed for the leading few).
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Option<ModalField>,
}

/// Maps interior unknowns to full profiles satisfying the homogeneous
/// boundary rows: x = P y.
fn boundary_elimination(size: usize, bcs: &BoundaryConditionSet) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let bidx = bcs.indices();
    let interior: Vec<usize> = (0..size).filter(|i| !bidx.contains(i)).collect();
    let k = bidx.len();
    let m = interior.len();
    let cb = DMatrix::from_fn(k, k, |i, j| bcs.rows[i].coeffs[bidx[j]]);
    let ci = DMatrix::from_fn(k, m, |i, j| bcs.rows[i].coeffs[interior[j]]);
    let xb = cb
        .lu()
        .solve(&(-ci))
        .ok_or_else(|| Error::EigSolverFailure("boundary rows are dependent".into()))?;
    let mut p = DMatrix::zeros(size, m);
    for (col, &i) in interior.iter().enumerate() {
        p[(i, col)] = 1.0;
    }
    for (r, &i) in bidx.iter().enumerate() {
        for col in 0..m {
            p[(i, col)] = xb[(r, col)];
        }
    }
    Ok((interior, p))
}

fn reduce(op: &DMatrix<f64>, interior: &[usize], p: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = DMatrix::from_fn(interior.len(), op.ncols(), |i, j| op[(interior[i], j)]);
    rows * p
}

/// Generalized problem A x = lambda B x with homogeneous boundary rows.
///
/// The boundary unknowns are eliminated through the boundary rows, which
/// removes the infinite eigenvalues row replacement would create. Finite
/// eigenvalues with |lambda| <= cap are returned by descending real part;
/// eigenfunctions are attached to the first `count` of them.
pub fn generalized_eig(
    a_op: &ModalOperator,
    b_op: &ModalOperator,
    bcs: &BoundaryConditionSet,
    cap: f64,
    count: usize,
) -> Result<Vec<EigenPair>> {
    let size = a_op.matrix.nrows();
    let (interior, p) = boundary_elimination(size, bcs)?;
    let ar = reduce(&a_op.matrix, &interior, &p);
    let br = reduce(&b_op.matrix, &interior, &p);
    let m = br
        .clone()
        .lu()
        .solve(&ar)
        .ok_or_else(|| Error::EigSolverFailure("right-hand operator is singular".into()))?;
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::EigSolverFailure("Schur iteration did not converge".into()))?;
    let mut values: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .copied()
        .filter(|l| l.re.is_finite() && l.im.is_finite() && l.norm() <= cap)
        .collect();
    if values.is_empty() {
        return Err(Error::EigSolverFailure("no finite eigenvalues below the cap".into()));
    }
    values.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));

    let arc = ar.map(|v| Complex64::new(v, 0.0));
    let brc = br.map(|v| Complex64::new(v, 0.0));
    let pc = p.map(|v| Complex64::new(v, 0.0));
    let mut out = Vec::with_capacity(values.len());
    for (k, &lambda) in values.iter().enumerate() {
        let vector = if k < count {
            let y = inverse_iteration(&arc, &brc, lambda)?;
            let full = &pc * y;
            Some(ModalField::new(a_op.n, full.iter().copied().collect()))
        } else {
            None
        };
        out.push(EigenPair { value: lambda, vector });
    }
    Ok(out)
}

fn inverse_iteration(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    let shift = lambda + Complex64::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let k = a - b * shift;
    let lu = k.lu();
    let n = a.nrows();
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.01 * i as f64, 0.0));
    for _ in 0..4 {
        let rhs = b * &x;
        let y = lu
            .solve(&rhs)
            .ok_or_else(|| Error::EigSolverFailure("inverse iteration breakdown".into()))?;
        let nrm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::EigSolverFailure("inverse iteration breakdown".into()));
        }
        x = y / Complex64::new(nrm, 0.0);
    }
    Ok(x)
}
