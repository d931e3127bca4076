//! Tridiagonal (Thomas) solves, plain and cyclic.

/// Solve a tridiagonal system in place. `sub` and `sup` have length n-1,
/// `diag` and `rhs` length n; the solution overwrites `rhs`. `scratch`
/// is resized as needed. Requires diagonal dominance (guaranteed by the
/// elliptic assembly for h > 0).
pub fn solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    debug_assert!(sub.len() == n - 1 && sup.len() == n - 1 && rhs.len() == n);
    scratch.clear();
    scratch.resize(n, 0.0);
    // forward sweep: scratch holds the modified superdiagonal
    let mut beta = diag[0];
    debug_assert!(beta != 0.0);
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i - 1] * scratch[i];
        debug_assert!(beta != 0.0, "tridiagonal pivot vanished at row {i}");
        rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

/// Solve the cyclic tridiagonal system with corner entries `corner_bl`
/// (row n-1, column 0) and `corner_tr` (row 0, column n-1) by the
/// Sherman-Morrison correction.
pub fn solve_cyclic(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_bl: f64,
    corner_tr: f64,
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    let n = diag.len();
    debug_assert!(n >= 3);
    // perturbed diagonal: A = B + u v^T with u = (gamma, 0, .., c_bl),
    // v = (1, 0, .., c_tr/gamma)
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= corner_tr * corner_bl / gamma;

    solve(sub, &dmod, sup, rhs, scratch);

    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bl;
    solve(sub, &dmod, sup, &mut u, scratch);

    let num = rhs[0] + corner_tr * rhs[n - 1] / gamma;
    let den = 1.0 + u[0] + corner_tr * u[n - 1] / gamma;
    let factor = num / den;
    for i in 0..n {
        rhs[i] -= factor * u[i];
    }
}
