use num_complex::Complex64;

use crate::domain::{check_len, ModalField};
use crate::error::Result;
use crate::spectral::{apply_real, RadialGrid};

/// Modal advection term: for f = F e^{i p theta}, g = G e^{i q theta},
/// the field i (p F/r (Delta_q G)' - q F'/r Delta_q G) e^{i (p+q) theta},
/// i.e. -(u_f . grad) Delta g.
pub fn interaction(grid: &RadialGrid, f: &ModalField, g: &ModalField) -> Result<ModalField> {
    check_len(grid.size(), f.len())?;
    check_len(grid.size(), g.len())?;
    let lap_g = grid.apply_laplacian(g);
    let dlap_g = apply_real(&grid.d1, &lap_g.values);
    let df = apply_real(&grid.d1, &f.values);
    Ok(interaction_from_parts(grid, f.n, &f.values, &df, g.n, &lap_g.values, &dlap_g))
}

/// Same as [`interaction`] with F', Delta_q G and (Delta_q G)' precomputed.
pub fn interaction_from_parts(
    grid: &RadialGrid,
    p: i32,
    f: &[Complex64],
    df: &[Complex64],
    q: i32,
    lap_g: &[Complex64],
    dlap_g: &[Complex64],
) -> ModalField {
    let (pf, qf) = (p as f64, q as f64);
    let i = Complex64::new(0.0, 1.0);
    let values = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(k, &r)| i * (f[k] * dlap_g[k] * pf - df[k] * lap_g[k] * qf) / r)
        .collect();
    ModalField::new(p + q, values)
}
