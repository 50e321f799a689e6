use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff of the pseudo-inverse.
const RCOND: f64 = 1e-12;
/// Absolute cutoff, so an exactly flat system yields the particular solution.
const ATOL: f64 = 1e-14;

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = (smax * RCOND).max(ATOL);
    let u = svd.u.as_ref().expect("u computed");
    let vt = svd.v_t.as_ref().expect("v_t computed");
    let mut y = u.transpose() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        y[i] = if *s > cutoff { y[i] / s } else { 0.0 };
    }
    vt.transpose() * y
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::Shape(format!("{}x{} system with {} targets", a.nrows(), a.ncols(), b.len())));
    }
    Ok(pinv_solve(a, b))
}

/// Orthonormal basis of the complement of `c` (columns), via the
/// Householder reflection that maps `c/|c|` to `e_0`.
fn complement_basis(c: &DVector<f64>) -> DMatrix<f64> {
    let m = c.len();
    let mut v = c.normalize();
    v[0] -= 1.0;
    let vv = v.dot(&v);
    let h = if vv < 1e-30 {
        DMatrix::identity(m, m)
    } else {
        DMatrix::identity(m, m) - (&v * v.transpose()) * (2.0 / vv)
    };
    h.columns(1, m - 1).into_owned()
}

/// Minimum-norm minimiser of `‖A x − b‖²` over `{x : cᵀx = 1}`.
pub fn affine_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() || a.ncols() != c.len() {
        return Err(Error::Shape(format!(
            "{}x{} system with {} targets and a {}-term constraint",
            a.nrows(),
            a.ncols(),
            b.len(),
            c.len()
        )));
    }
    let cc = c.dot(c);
    if cc == 0.0 {
        return Err(Error::InvalidParams("constraint vector is zero".into()));
    }
    // x = c/|c|² + N z with N ⊥ c, so |x|² = 1/|c|² + |z|².
    let x0 = c / cc;
    let basis = complement_basis(c);
    let z = pinv_solve(&(a * &basis), &(b - a * &x0));
    Ok(x0 + basis * z)
}

/// Minimiser of `‖A x − b‖²` over `{x : ‖x‖₁ = 1}`, found by enumerating
/// sign patterns. Ties in the residual go to the smaller Euclidean norm.
pub fn unit_l1_min(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let m = a.ncols();
    if m == 0 || m > 8 {
        return Err(Error::InvalidParams(format!("unit 1-norm solver supports 1..=8 unknowns, got {m}")));
    }
    if a.nrows() != b.len() {
        return Err(Error::Shape(format!("{}x{} system with {} targets", a.nrows(), m, b.len())));
    }
    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    let patterns = 3usize.pow(m as u32);
    for code in 1..patterns {
        // digit 0 → excluded, 1 → positive, 2 → negative
        let signs: Vec<i8> = (0..m).map(|j| ((code / 3usize.pow(j as u32)) % 3) as i8).collect();
        let support: Vec<usize> = (0..m).filter(|&j| signs[j] != 0).collect();
        let sub = a.select_columns(&support);
        let c = DVector::from_iterator(support.len(), support.iter().map(|&j| if signs[j] == 1 { 1.0 } else { -1.0 }));
        let xs = affine_min_norm(&sub, b, &c)?;
        if xs.iter().zip(c.iter()).any(|(x, s)| x * s < -1e-12) {
            continue;
        }
        let mut x = DVector::zeros(m);
        for (k, &j) in support.iter().enumerate() {
            x[j] = xs[k];
        }
        let res = (a * &x - b).norm_squared();
        let norm = x.norm_squared();
        let better = match &best {
            None => true,
            Some((r, n, _)) => res < r - 1e-12 * r.max(1.0) || (res <= r + 1e-12 * r.max(1.0) && norm < *n),
        };
        if better {
            best = Some((res, norm, x));
        }
    }
    best.map(|(_, _, x)| x).ok_or_else(|| Error::InsufficientData("no feasible sign pattern".into()))
}
