//! Bounded right inverse of the divergence on the annular band, and the
//! harmonic Neumann corrector, both assembled angular-mode by angular-mode.
//!
//! For every nonzero mode the tangential component is recovered algebraically
//! from the radial profile, so the canonical discrete divergence of the
//! output reproduces the data to rounding. The zero mode is a small banded
//! least-squares problem in the radial direction.

use super::grid::{nodes_from_modes, theta_modes, AnnulusField, AnnulusGrid};
use super::ConnectError;
use num_complex::Complex64;

/// Dirichlet boundary data for the divergence solve: polar components on the
/// inner (`z = z_min`) and outer (`z = z_max`) circles, per angular node.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub inner_s: Vec<f64>,
    pub inner_z: Vec<f64>,
    pub outer_s: Vec<f64>,
    pub outer_z: Vec<f64>,
}

impl BoundaryData {
    pub fn zero(grid: &AnnulusGrid) -> Self {
        Self {
            inner_s: vec![0.0; grid.n_s],
            inner_z: vec![0.0; grid.n_s],
            outer_s: vec![0.0; grid.n_s],
            outer_z: vec![0.0; grid.n_s],
        }
    }

    fn l1_scale(&self) -> f64 {
        let sum = |v: &Vec<f64>| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
        sum(&self.inner_s) + sum(&self.inner_z) + sum(&self.outer_s) + sum(&self.outer_z)
    }
}

/// Measured quantities of one divergence solve; the bound ratio documents the
/// operator norm of the chosen right inverse on this data.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceSolveReport {
    pub residual_l2: f64,
    pub relative_residual: f64,
    pub compat_defect: f64,
    pub bound_ratio: f64,
}

/// Solve `div u = f` on the band with `u = phi` on both circles.
///
/// Rejects data violating the compatibility identity `int f = bdry flux`
/// beyond `compat_tol` (relative to the data scale).
pub fn solve_divergence_correction(
    grid: &AnnulusGrid,
    f: &[f64],
    bc: &BoundaryData,
    compat_tol: f64,
) -> Result<(AnnulusField, DivergenceSolveReport), ConnectError> {
    assert_eq!(f.len(), grid.node_count());
    // compatibility: int_band f dA = int_outer phi.nu - int_inner phi.nu
    let mut f_int = 0.0;
    for i in 0..grid.n_s {
        for j in 0..=grid.n_z {
            f_int += f[grid.idx(i, j)] * grid.area_weight(i, j);
        }
    }
    let rin = grid.radius + grid.z_min;
    let rout = grid.radius + grid.z_max;
    let dth = grid.dtheta();
    let flux: f64 = (0..grid.n_s)
        .map(|i| (bc.outer_z[i] * rout - bc.inner_z[i] * rin) * dth)
        .sum();
    let defect = f_int - flux;
    let scale = f
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        .mul_add(grid.band_area() / grid.node_count() as f64, bc.l1_scale())
        + 1e-14;
    if defect.abs() > compat_tol * scale {
        return Err(ConnectError::IncompatibleData {
            defect,
            tolerance: compat_tol * scale,
        });
    }

    let f_modes = theta_modes(grid, f);
    let in_s = real_modes(grid, &bc.inner_s);
    let in_z = real_modes(grid, &bc.inner_z);
    let out_s = real_modes(grid, &bc.outer_s);
    let out_z = real_modes(grid, &bc.outer_z);

    let nz = grid.n_z;
    let mut us_modes = vec![vec![Complex64::new(0.0, 0.0); nz + 1]; grid.n_s];
    let mut uz_modes = vec![vec![Complex64::new(0.0, 0.0); nz + 1]; grid.n_s];

    for k in 0..grid.n_s {
        let kk = grid.wavenumber(k);
        if kk == 0.0 {
            let (us, uz) = solve_mode_zero(grid, &f_modes[k], in_s[k], in_z[k], out_s[k], out_z[k]);
            us_modes[k] = us;
            uz_modes[k] = uz;
        } else {
            let (us, uz) = solve_mode(
                grid,
                kk,
                &f_modes[k],
                in_s[k],
                in_z[k],
                out_s[k],
                out_z[k],
            );
            us_modes[k] = us;
            uz_modes[k] = uz;
        }
    }

    let field = AnnulusField {
        grid: *grid,
        f_s: nodes_from_modes(grid, &us_modes),
        f_z: nodes_from_modes(grid, &uz_modes),
    };

    let div = field.divergence();
    let resid: Vec<f64> = div.iter().zip(f).map(|(a, b)| a - b).collect();
    let residual_l2 = AnnulusField::scalar_l2(grid, &resid);
    let f_l2 = AnnulusField::scalar_l2(grid, f).max(1e-300);
    let data_norm = f_l2 + bc.l1_scale();
    let report = DivergenceSolveReport {
        residual_l2,
        relative_residual: residual_l2 / f_l2,
        compat_defect: defect,
        bound_ratio: (field.norm_l2() + field.h1_seminorm()) / data_norm,
    };
    Ok((field, report))
}

fn real_modes(grid: &AnnulusGrid, boundary: &[f64]) -> Vec<Complex64> {
    use rustfft::FftPlanner;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n_s);
    let mut buf: Vec<Complex64> = boundary
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft.process(&mut buf);
    buf.into_iter().map(|v| v / grid.n_s as f64).collect()
}

/// Hermite bump on `[0, L]` with zero endpoint values and prescribed slopes.
fn hermite_bump(t: f64, l: f64, slope0: f64, slope1: f64) -> f64 {
    let u = t / l;
    // cubic basis: h10 = u(1-u)^2 * L (slope 1 at 0), h11 = u^2(u-1) * L (slope 1 at L)
    slope0 * l * u * (1.0 - u) * (1.0 - u) + slope1 * l * u * u * (u - 1.0)
}

/// Nonzero mode: the radial profile is a linear blend of the normal boundary
/// data plus two Hermite bumps whose slopes are solved for so that the
/// algebraically recovered tangential component matches its boundary values.
fn solve_mode(
    grid: &AnnulusGrid,
    k: f64,
    f_hat: &[Complex64],
    bs_in: Complex64,
    bz_in: Complex64,
    bs_out: Complex64,
    bz_out: Complex64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let nz = grid.n_z;
    let l = grid.z_max - grid.z_min;
    let ik = Complex64::new(0.0, k);

    // tangential recovery: u_s = (rho / (i k)) (f - D_z u_z - u_z / rho)
    let tangential = |uz: &[Complex64], with_f: bool| -> Vec<Complex64> {
        (0..=nz)
            .map(|j| {
                let rho = grid.rho(j);
                let data = if with_f {
                    f_hat[j]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                rho / ik * (data - grid.ddz_complex(uz, j) - uz[j] / rho)
            })
            .collect()
    };

    // base profile: linear interpolation of the normal data
    let base: Vec<Complex64> = (0..=nz)
        .map(|j| {
            let t = j as f64 / nz as f64;
            bz_in * (1.0 - t) + bz_out * t
        })
        .collect();
    let us_base = tangential(&base, true);

    // bump responses (real profiles, complex coefficients)
    let bump1: Vec<Complex64> = (0..=nz)
        .map(|j| Complex64::new(hermite_bump(grid.z(j) - grid.z_min, l, 1.0, 0.0), 0.0))
        .collect();
    let bump2: Vec<Complex64> = (0..=nz)
        .map(|j| Complex64::new(hermite_bump(grid.z(j) - grid.z_min, l, 0.0, 1.0), 0.0))
        .collect();
    let us_b1 = tangential(&bump1, false);
    let us_b2 = tangential(&bump2, false);

    // match tangential boundary values: 2x2 complex solve for bump weights
    let a11 = us_b1[0];
    let a12 = us_b2[0];
    let a21 = us_b1[nz];
    let a22 = us_b2[nz];
    let r1 = bs_in - us_base[0];
    let r2 = bs_out - us_base[nz];
    let det = a11 * a22 - a12 * a21;
    let (c1, c2) = if det.norm() > 1e-300 {
        ((r1 * a22 - r2 * a12) / det, (a11 * r2 - a21 * r1) / det)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };

    let uz: Vec<Complex64> = (0..=nz)
        .map(|j| base[j] + c1 * bump1[j] + c2 * bump2[j])
        .collect();
    let us: Vec<Complex64> = (0..=nz)
        .map(|j| us_base[j] + c1 * us_b1[j] + c2 * us_b2[j])
        .collect();
    (us, uz)
}

/// Zero mode: `D_z u_z + u_z / rho = f_0` with both normal boundary values
/// pinned; solved in least squares over all collocation rows (banded normal
/// equations). The tangential zero mode is unconstrained by the divergence
/// and blends the tangential boundary data linearly.
fn solve_mode_zero(
    grid: &AnnulusGrid,
    f_hat: &[Complex64],
    bs_in: Complex64,
    bz_in: Complex64,
    bs_out: Complex64,
    bz_out: Complex64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let nz = grid.n_z;
    // operator rows: L[j][m] over nodes; bandwidth 2 at the one-sided ends
    let h = grid.dz();
    let row = |j: usize| -> Vec<(usize, f64)> {
        let mut r: Vec<(usize, f64)> = if j == 0 {
            vec![
                (0, -3.0 / (2.0 * h)),
                (1, 4.0 / (2.0 * h)),
                (2, -1.0 / (2.0 * h)),
            ]
        } else if j == nz {
            vec![
                (nz, 3.0 / (2.0 * h)),
                (nz - 1, -4.0 / (2.0 * h)),
                (nz - 2, 1.0 / (2.0 * h)),
            ]
        } else {
            vec![(j - 1, -1.0 / (2.0 * h)), (j + 1, 1.0 / (2.0 * h))]
        };
        for (m, c) in r.iter_mut() {
            if *m == j {
                *c += 1.0 / grid.rho(j);
            }
        }
        if !r.iter().any(|(m, _)| *m == j) {
            r.push((j, 1.0 / grid.rho(j)));
        }
        r
    };

    // eliminate the pinned endpoints: u = boundary-interp + w, w_0 = w_nz = 0
    let pinned: Vec<Complex64> = (0..=nz)
        .map(|j| {
            let t = j as f64 / nz as f64;
            bz_in * (1.0 - t) + bz_out * t
        })
        .collect();
    // rhs_j = f_j - L(pinned)_j
    let rhs: Vec<Complex64> = (0..=nz)
        .map(|j| {
            let mut v = f_hat[j];
            for (m, c) in row(j) {
                v -= c * pinned[m];
            }
            v
        })
        .collect();

    // normal equations over interior unknowns w_1..w_{nz-1}, pentadiagonal
    let unknowns = nz - 1;
    let bw = 2usize;
    let mut m = vec![vec![0.0; bw + 1]; unknowns]; // m[i][d] = M[i][i+d]
    let mut b = vec![Complex64::new(0.0, 0.0); unknowns];
    for j in 0..=nz {
        let r = row(j);
        for (mi, ci) in &r {
            if *mi == 0 || *mi == nz {
                continue;
            }
            let i = mi - 1;
            b[i] += *ci * rhs[j];
            for (mj, cj) in &r {
                if *mj == 0 || *mj == nz {
                    continue;
                }
                let jj = mj - 1;
                if jj >= i && jj - i <= bw {
                    m[i][jj - i] += ci * cj;
                }
            }
        }
    }
    let w = banded_cholesky_solve(&mut m, &mut b, bw);

    let mut uz = pinned;
    for (i, wi) in w.iter().enumerate() {
        uz[i + 1] += wi;
    }
    let us: Vec<Complex64> = (0..=nz)
        .map(|j| {
            let t = j as f64 / nz as f64;
            bs_in * (1.0 - t) + bs_out * t
        })
        .collect();
    (us, uz)
}

/// In-place banded Cholesky (lower) solve for a symmetric positive definite
/// band matrix stored as `m[i][d] = M[i][i+d]`, `0 <= d <= bw`.
fn banded_cholesky_solve(
    m: &mut [Vec<f64>],
    b: &mut [Complex64],
    bw: usize,
) -> Vec<Complex64> {
    let n = m.len();
    // factor: M = L L^T with L stored in the lower band (reuse m transposed view)
    let mut l = vec![vec![0.0; bw + 1]; n]; // l[i][d] = L[i][i-d]
    for i in 0..n {
        let start = i.saturating_sub(bw);
        for j in start..=i {
            let mut sum = if j >= i - bw.min(i) { m[j][i - j] } else { 0.0 };
            let kstart = start.max(j.saturating_sub(bw));
            for k in kstart..j {
                if i - k <= bw && j - k <= bw {
                    sum -= l[i][i - k] * l[j][j - k];
                }
            }
            if i == j {
                l[i][0] = sum.max(1e-300).sqrt();
            } else {
                l[i][i - j] = sum / l[j][0];
            }
        }
    }
    // forward substitution
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut sum = b[i];
        let start = i.saturating_sub(bw);
        for k in start..i {
            sum -= l[i][i - k] * y[k];
        }
        y[i] = sum / l[i][0];
    }
    // back substitution
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        let end = (i + bw).min(n - 1);
        for k in i + 1..=end {
            sum -= l[k][k - i] * x[k];
        }
        x[i] = sum / l[i][0];
    }
    x
}

/// Report of a harmonic Neumann solve.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicReport {
    pub laplacian_residual: f64,
    pub mean_potential: f64,
}

/// Solve the annulus Neumann problem: `Laplacian Y = 0` on the band,
/// `d_rho Y = g` on the inner circle, `d_rho Y = 0` on the outer circle,
/// zero-mean `Y`. Returns the potential (scalar nodes) and its gradient.
///
/// Requires the solvability condition `mean of g = 0`; rejected otherwise
/// with the measured defect.
pub fn harmonic_neumann(
    grid: &AnnulusGrid,
    g: &[f64],
    compat_tol: f64,
) -> Result<(Vec<f64>, AnnulusField, HarmonicReport), ConnectError> {
    assert_eq!(g.len(), grid.n_s);
    let g_modes = real_modes_vec(grid, g);
    let scale = g.iter().map(|v| v.abs()).sum::<f64>() / grid.n_s as f64 + 1e-14;
    if g_modes[0].norm() > compat_tol * scale {
        return Err(ConnectError::IncompatibleData {
            defect: g_modes[0].re * std::f64::consts::TAU * (grid.radius + grid.z_min),
            tolerance: compat_tol * scale,
        });
    }

    let nz = grid.n_z;
    let h = grid.dz();
    let mut y_modes = vec![vec![Complex64::new(0.0, 0.0); nz + 1]; grid.n_s];
    for k in 1..grid.n_s {
        let kk = grid.wavenumber(k);
        // tridiagonal rows of Y'' + Y'/rho - k^2 Y / rho^2 = 0 with ghost
        // elimination for the Neumann ends.
        let mut sub = vec![0.0; nz + 1];
        let mut diag = vec![0.0; nz + 1];
        let mut sup = vec![0.0; nz + 1];
        let mut rhs = vec![Complex64::new(0.0, 0.0); nz + 1];
        for j in 0..=nz {
            let rho = grid.rho(j);
            let a = 1.0 / (h * h) - 1.0 / (2.0 * h * rho); // sub coefficient
            let c = 1.0 / (h * h) + 1.0 / (2.0 * h * rho); // sup coefficient
            let d = -2.0 / (h * h) - kk * kk / (rho * rho);
            if j == 0 {
                // ghost: Y_{-1} = Y_1 - 2 h g_k  (centered Neumann at rho_in)
                diag[j] = d;
                sup[j] = a + c;
                rhs[j] = 2.0 * h * a * g_modes[k];
            } else if j == nz {
                // ghost: Y_{nz+1} = Y_{nz-1} (zero Neumann at rho_out)
                sub[j] = a + c;
                diag[j] = d;
                rhs[j] = Complex64::new(0.0, 0.0);
            } else {
                sub[j] = a;
                diag[j] = d;
                sup[j] = c;
            }
        }
        y_modes[k] = thomas_solve(&sub, &diag, &sup, &rhs);
    }

    let y = nodes_from_modes(grid, &y_modes);
    // gradient: W_s = (1/rho) d_theta Y (spectral), W_z = d_rho Y
    let mut field = AnnulusField::zeros(*grid);
    let mut ds_modes = y_modes.clone();
    for (k, col) in ds_modes.iter_mut().enumerate() {
        let ik = Complex64::new(0.0, grid.wavenumber(k));
        for v in col.iter_mut() {
            *v *= ik;
        }
    }
    let dy_theta = nodes_from_modes(grid, &ds_modes);
    let mut col = vec![0.0; nz + 1];
    for i in 0..grid.n_s {
        for j in 0..=nz {
            col[j] = y[grid.idx(i, j)];
        }
        for j in 0..=nz {
            let id = grid.idx(i, j);
            field.f_s[id] = dy_theta[id] / grid.rho(j);
            field.f_z[id] = grid.ddz(&col, j);
        }
    }

    // residual of the interior discrete Laplacian rows
    let mut resid2 = 0.0;
    let mut norm2 = 0.0;
    for k in 1..grid.n_s {
        let kk = grid.wavenumber(k);
        for j in 1..nz {
            let rho = grid.rho(j);
            let ym = y_modes[k][j - 1];
            let y0 = y_modes[k][j];
            let yp = y_modes[k][j + 1];
            let lap = (yp - 2.0 * y0 + ym) / (h * h) + (yp - ym) / (2.0 * h * rho)
                - kk * kk / (rho * rho) * y0;
            resid2 += lap.norm_sqr();
            norm2 += y0.norm_sqr() / (h * h);
        }
    }
    let mut mean = 0.0;
    let mut area = 0.0;
    for i in 0..grid.n_s {
        for j in 0..=nz {
            mean += y[grid.idx(i, j)] * grid.area_weight(i, j);
            area += grid.area_weight(i, j);
        }
    }
    let report = HarmonicReport {
        laplacian_residual: (resid2 / norm2.max(1e-300)).sqrt(),
        mean_potential: mean / area,
    };
    Ok((y, field, report))
}

fn real_modes_vec(grid: &AnnulusGrid, vals: &[f64]) -> Vec<Complex64> {
    use rustfft::FftPlanner;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n_s);
    let mut buf: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf.into_iter().map(|v| v / grid.n_s as f64).collect()
}

fn thomas_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
