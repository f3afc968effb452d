//! Tubular-coordinate grid around the solid boundary and sampled vector
//! fields on it.
//!
//! The grid covers an annular band `r + z_min <= rho <= r + z_max` around the
//! solid center with uniform angles and uniform radial offsets. Vector fields
//! are stored in the local polar frame `(e_theta, e_rho)`; `z = rho - r` is
//! the signed normal offset, positive outside the solid.

use nalgebra::Vector2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

/// Node layout: `n_s` uniform angles (periodic) times `n_z + 1` radial nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGrid {
    pub center: Vector2<f64>,
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_s: usize,
    pub n_z: usize,
}

impl AnnulusGrid {
    pub fn new(
        center: Vector2<f64>,
        radius: f64,
        z_min: f64,
        z_max: f64,
        n_s: usize,
        n_z: usize,
    ) -> Self {
        assert!(radius > 0.0);
        assert!(z_max > z_min, "band must have positive width");
        assert!(radius + z_min > 0.49 * radius, "band reaches the chart singularity");
        assert!(n_s >= 8 && n_s.is_multiple_of(2), "n_s must be even and >= 8");
        assert!(n_z >= 8 && n_z.is_multiple_of(2), "n_z must be even and >= 8");
        Self {
            center,
            radius,
            z_min,
            z_max,
            n_s,
            n_z,
        }
    }

    /// Exterior band `0 <= z <= delta` around a placed solid.
    pub fn exterior_band(center: Vector2<f64>, radius: f64, delta: f64, n_s: usize, n_z: usize) -> Self {
        Self::new(center, radius, 0.0, delta, n_s, n_z)
    }

    /// Interior collar `-depth <= z <= 0` (inside the solid, boundary at the
    /// outer edge).
    pub fn interior_collar(center: Vector2<f64>, radius: f64, depth: f64, n_s: usize, n_z: usize) -> Self {
        Self::new(center, radius, -depth, 0.0, n_s, n_z)
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_z as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_s as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        i as f64 * self.dtheta()
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z_min + j as f64 * self.dz()
    }

    pub fn rho(&self, j: usize) -> f64 {
        self.radius + self.z(j)
    }

    pub fn node(&self, i: usize, j: usize) -> Vector2<f64> {
        let t = self.theta(i);
        self.center + self.rho(j) * Vector2::new(t.cos(), t.sin())
    }

    pub fn e_theta(&self, i: usize) -> Vector2<f64> {
        let t = self.theta(i);
        Vector2::new(-t.sin(), t.cos())
    }

    pub fn e_rho(&self, i: usize) -> Vector2<f64> {
        let t = self.theta(i);
        Vector2::new(t.cos(), t.sin())
    }

    pub fn node_count(&self) -> usize {
        self.n_s * (self.n_z + 1)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n_z + 1) + j
    }

    /// Simpson weight for radial node `j` (n_z even), times `dz`.
    pub fn z_weight(&self, j: usize) -> f64 {
        let c = if j == 0 || j == self.n_z {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        c * self.dz() / 3.0
    }

    /// Area weight of node `(i, j)`: `rho dz dtheta` with Simpson in z and
    /// the (spectrally exact) periodic rule in theta.
    pub fn area_weight(&self, i: usize, j: usize) -> f64 {
        let _ = i;
        self.rho(j) * self.z_weight(j) * self.dtheta()
    }

    pub fn band_area(&self) -> f64 {
        let rin = self.radius + self.z_min;
        let rout = self.radius + self.z_max;
        std::f64::consts::PI * (rout * rout - rin * rin)
    }

    /// Resolution rule for a blend layer of width `layer`: at least 8 radial
    /// nodes must fall across the layer.
    pub fn resolves_layer(&self, layer: f64) -> bool {
        layer / self.dz() >= 8.0 - 1e-9
    }

    /// Centered second-order radial derivative, one-sided at the ends. This
    /// is the canonical `d/dz` every discrete residual in this module uses.
    pub fn ddz(&self, col: &[f64], j: usize) -> f64 {
        let h = self.dz();
        let n = self.n_z;
        if j == 0 {
            (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h)
        } else if j == n {
            (3.0 * col[n] - 4.0 * col[n - 1] + col[n - 2]) / (2.0 * h)
        } else {
            (col[j + 1] - col[j - 1]) / (2.0 * h)
        }
    }

    pub fn ddz_complex(&self, col: &[Complex64], j: usize) -> Complex64 {
        let h = self.dz();
        let n = self.n_z;
        if j == 0 {
            (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h)
        } else if j == n {
            (3.0 * col[n] - 4.0 * col[n - 1] + col[n - 2]) / (2.0 * h)
        } else {
            (col[j + 1] - col[j - 1]) / (2.0 * h)
        }
    }

    /// Signed wavenumber of FFT bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        if k <= self.n_s / 2 {
            k as f64
        } else {
            k as f64 - self.n_s as f64
        }
    }
}

/// Vector field sampled on an [`AnnulusGrid`], stored in polar components.
#[derive(Debug, Clone)]
pub struct AnnulusField {
    pub grid: AnnulusGrid,
    /// tangential component `u . e_theta`, theta-major layout
    pub f_s: Vec<f64>,
    /// radial component `u . e_rho`
    pub f_z: Vec<f64>,
}

impl AnnulusField {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        let n = grid.node_count();
        Self {
            grid,
            f_s: vec![0.0; n],
            f_z: vec![0.0; n],
        }
    }

    /// Sample a Cartesian vector field onto the grid.
    pub fn sample(grid: AnnulusGrid, u: &dyn Fn(Vector2<f64>) -> Vector2<f64>) -> Self {
        let mut f = Self::zeros(grid);
        for i in 0..grid.n_s {
            let et = grid.e_theta(i);
            let er = grid.e_rho(i);
            for j in 0..=grid.n_z {
                let v = u(grid.node(i, j));
                let id = grid.idx(i, j);
                f.f_s[id] = v.dot(&et);
                f.f_z[id] = v.dot(&er);
            }
        }
        f
    }

    /// Build from polar-component profiles `(theta, z) -> (f_s, f_z)`.
    pub fn from_polar(grid: AnnulusGrid, f: &dyn Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.n_s {
            let t = grid.theta(i);
            for j in 0..=grid.n_z {
                let (fs, fz) = f(t, grid.z(j));
                let id = grid.idx(i, j);
                out.f_s[id] = fs;
                out.f_z[id] = fz;
            }
        }
        out
    }

    pub fn cartesian_at_node(&self, i: usize, j: usize) -> Vector2<f64> {
        let id = self.grid.idx(i, j);
        self.f_s[id] * self.grid.e_theta(i) + self.f_z[id] * self.grid.e_rho(i)
    }

    /// Bilinear interpolation in `(theta, z)` of the polar components,
    /// returned as a Cartesian vector. Reproduces node values exactly.
    pub fn interpolate(&self, x: Vector2<f64>) -> Vector2<f64> {
        let g = &self.grid;
        let d = x - g.center;
        let rho = d.norm();
        let z = (rho - g.radius).clamp(g.z_min, g.z_max);
        let mut theta = d.y.atan2(d.x);
        if theta < 0.0 {
            theta += TAU;
        }
        let ft = theta / g.dtheta();
        let fi = ft.floor();
        let wt = ft - fi;
        let i0 = (fi as usize) % g.n_s;
        let i1 = (i0 + 1) % g.n_s;
        let fz = (z - g.z_min) / g.dz();
        let fj = fz.floor().clamp(0.0, (g.n_z - 1) as f64);
        let wz = fz - fj;
        let j0 = fj as usize;
        let j1 = j0 + 1;
        let lerp = |a: f64, b: f64, w: f64| a + w * (b - a);
        let comp = |v: &Vec<f64>| {
            lerp(
                lerp(v[g.idx(i0, j0)], v[g.idx(i0, j1)], wz),
                lerp(v[g.idx(i1, j0)], v[g.idx(i1, j1)], wz),
                wt,
            )
        };
        let fs = comp(&self.f_s);
        let fzv = comp(&self.f_z);
        let et = Vector2::new(-theta.sin(), theta.cos());
        let er = Vector2::new(theta.cos(), theta.sin());
        fs * et + fzv * er
    }

    pub fn scale(&mut self, a: f64) {
        self.f_s.iter_mut().for_each(|v| *v *= a);
        self.f_z.iter_mut().for_each(|v| *v *= a);
    }

    pub fn add_assign(&mut self, other: &AnnulusField) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.f_s.iter_mut().zip(&other.f_s) {
            *a += b;
        }
        for (a, b) in self.f_z.iter_mut().zip(&other.f_z) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &AnnulusField) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.f_s.iter_mut().zip(&other.f_s) {
            *a -= b;
        }
        for (a, b) in self.f_z.iter_mut().zip(&other.f_z) {
            *a -= b;
        }
    }

    /// `L^p` norm of the vector magnitude over the band.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 0..g.n_s {
            for j in 0..=g.n_z {
                let id = g.idx(i, j);
                let mag2 = self.f_s[id] * self.f_s[id] + self.f_z[id] * self.f_z[id];
                acc += mag2.powf(0.5 * p) * g.area_weight(i, j);
            }
        }
        acc.powf(1.0 / p)
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_lp(2.0)
    }

    pub fn l2_distance(&self, other: &AnnulusField) -> f64 {
        let mut diff = self.clone();
        diff.sub_assign(other);
        diff.norm_l2()
    }

    /// `H^1` seminorm of the Cartesian components (radial derivative by
    /// second-order differences, angular by the periodic spectral rule).
    pub fn h1_seminorm(&self) -> f64 {
        let g = &self.grid;
        // Cartesian components at nodes
        let n = g.node_count();
        let mut ux = vec![0.0; n];
        let mut uy = vec![0.0; n];
        for i in 0..g.n_s {
            let et = g.e_theta(i);
            let er = g.e_rho(i);
            for j in 0..=g.n_z {
                let id = g.idx(i, j);
                let v = self.f_s[id] * et + self.f_z[id] * er;
                ux[id] = v.x;
                uy[id] = v.y;
            }
        }
        let dtheta_rows = |vals: &[f64]| -> Vec<f64> {
            // spectral theta derivative row by row in z
            let mut out = vec![0.0; n];
            let mut planner = FftPlanner::new();
            let fft = planner.plan_fft_forward(g.n_s);
            let ifft = planner.plan_fft_inverse(g.n_s);
            let mut buf = vec![Complex64::new(0.0, 0.0); g.n_s];
            for j in 0..=g.n_z {
                for i in 0..g.n_s {
                    buf[i] = Complex64::new(vals[g.idx(i, j)], 0.0);
                }
                fft.process(&mut buf);
                for (k, v) in buf.iter_mut().enumerate() {
                    let kk = g.wavenumber(k);
                    *v *= Complex64::new(0.0, kk);
                }
                ifft.process(&mut buf);
                for i in 0..g.n_s {
                    out[g.idx(i, j)] = buf[i].re / g.n_s as f64;
                }
            }
            out
        };
        let dx_t = dtheta_rows(&ux);
        let dy_t = dtheta_rows(&uy);
        let mut acc = 0.0;
        let mut col = vec![0.0; g.n_z + 1];
        for comp in [&ux, &uy] {
            let dt = if std::ptr::eq(comp, &ux) { &dx_t } else { &dy_t };
            for i in 0..g.n_s {
                for j in 0..=g.n_z {
                    col[j] = comp[g.idx(i, j)];
                }
                for j in 0..=g.n_z {
                    let dr = g.ddz(&col, j);
                    let dth = dt[g.idx(i, j)] / g.rho(j);
                    acc += (dr * dr + dth * dth) * g.area_weight(i, j);
                }
            }
        }
        acc.sqrt()
    }

    /// Discrete divergence `d_rho f_z + f_z / rho + (1/rho) d_theta f_s` on
    /// every node (spectral in theta, canonical differences in z).
    pub fn divergence(&self) -> Vec<f64> {
        let g = &self.grid;
        let n = g.node_count();
        let mut out = vec![0.0; n];
        // theta derivative of f_s
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(g.n_s);
        let ifft = planner.plan_fft_inverse(g.n_s);
        let mut buf = vec![Complex64::new(0.0, 0.0); g.n_s];
        let mut ds = vec![0.0; n];
        for j in 0..=g.n_z {
            for i in 0..g.n_s {
                buf[i] = Complex64::new(self.f_s[g.idx(i, j)], 0.0);
            }
            fft.process(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                *v *= Complex64::new(0.0, g.wavenumber(k));
            }
            ifft.process(&mut buf);
            for i in 0..g.n_s {
                ds[g.idx(i, j)] = buf[i].re / g.n_s as f64;
            }
        }
        let mut col = vec![0.0; g.n_z + 1];
        for i in 0..g.n_s {
            for j in 0..=g.n_z {
                col[j] = self.f_z[g.idx(i, j)];
            }
            for j in 0..=g.n_z {
                let id = g.idx(i, j);
                let rho = g.rho(j);
                out[id] = g.ddz(&col, j) + col[j] / rho + ds[id] / rho;
            }
        }
        out
    }

    /// Weighted `L²` norm of a scalar sampled on the grid nodes.
    pub fn scalar_l2(grid: &AnnulusGrid, vals: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..grid.n_s {
            for j in 0..=grid.n_z {
                let v = vals[grid.idx(i, j)];
                acc += v * v * grid.area_weight(i, j);
            }
        }
        acc.sqrt()
    }

    /// Relative discrete divergence residual against target `f` (use zeros
    /// for a solenoidality check); the denominator is the field's own
    /// gradient scale so the ratio is meaningful for near-solenoidal fields.
    pub fn divergence_residual(&self, target: Option<&[f64]>) -> f64 {
        let g = self.grid;
        let div = self.divergence();
        let resid: Vec<f64> = match target {
            Some(t) => div.iter().zip(t).map(|(a, b)| a - b).collect(),
            None => div,
        };
        let num = Self::scalar_l2(&g, &resid);
        let scale = (self.h1_seminorm() + self.norm_l2() / g.radius).max(1e-300);
        num / scale
    }
}

/// Forward FFT of a scalar node array into per-mode radial profiles:
/// `spectra[k][j]` is the `k`-th angular mode at radial node `j`.
pub fn theta_modes(grid: &AnnulusGrid, vals: &[f64]) -> Vec<Vec<Complex64>> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n_s);
    let mut spectra = vec![vec![Complex64::new(0.0, 0.0); grid.n_z + 1]; grid.n_s];
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.n_s];
    for j in 0..=grid.n_z {
        for i in 0..grid.n_s {
            buf[i] = Complex64::new(vals[grid.idx(i, j)], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..grid.n_s {
            spectra[k][j] = buf[k] / grid.n_s as f64;
        }
    }
    spectra
}

/// Inverse of [`theta_modes`]: synthesize node values from mode profiles.
pub fn nodes_from_modes(grid: &AnnulusGrid, spectra: &[Vec<Complex64>]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(grid.n_s);
    let mut vals = vec![0.0; grid.node_count()];
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.n_s];
    for j in 0..=grid.n_z {
        for k in 0..grid.n_s {
            buf[k] = spectra[k][j];
        }
        ifft.process(&mut buf);
        for i in 0..grid.n_s {
            vals[grid.idx(i, j)] = buf[i].re;
        }
    }
    vals
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn test_grid() -> AnnulusGrid {
        AnnulusGrid::exterior_band(Vector2::new(0.3, -0.2), 1.0, 0.5, 32, 64)
    }

    #[test]
    fn area_weights_sum_to_band_area() {
        let g = test_grid();
        let mut total = 0.0;
        for i in 0..g.n_s {
            for j in 0..=g.n_z {
                total += g.area_weight(i, j);
            }
        }
        assert_abs_diff_eq!(total, g.band_area(), epsilon = 1e-12);
    }

    #[test]
    fn sample_and_interpolate_round_trip_at_nodes() {
        let g = test_grid();
        let u = |x: Vector2<f64>| Vector2::new(x.y.sin(), x.x * x.y);
        let f = AnnulusField::sample(g, &u);
        for i in (0..g.n_s).step_by(5) {
            for j in (0..=g.n_z).step_by(7) {
                let x = g.node(i, j);
                assert!((f.interpolate(x) - u(x)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn norm_matches_closed_form() {
        let g = test_grid();
        // |u| = rho on the band: L2 norm^2 = int rho^2 dA = 2 pi int rho^3 drho
        let f = AnnulusField::from_polar(g, &|_t, z| (g.radius + z, 0.0));
        let rin: f64 = 1.0;
        let rout: f64 = 1.5;
        let exact = (std::f64::consts::TAU * (rout.powi(4) - rin.powi(4)) / 4.0).sqrt();
        assert_abs_diff_eq!(f.norm_l2(), exact, epsilon = 1e-10);
    }

    #[test]
    fn divergence_of_rigid_field_vanishes() {
        let g = test_grid();
        let c = g.center;
        let u = move |x: Vector2<f64>| {
            Vector2::new(0.4 - 1.3 * (x.y - c.y), -0.2 + 1.3 * (x.x - c.x))
        };
        let f = AnnulusField::sample(g, &u);
        let resid = f.divergence_residual(None);
        assert!(resid <= 1e-10, "divergence residual {resid}");
    }

    #[test]
    fn divergence_matches_analytic_value() {
        let g = test_grid();
        // u = (x^2, x y) has div = 3x
        let c = g.center;
        let u = move |x: Vector2<f64>| {
            let d = x - c;
            Vector2::new(d.x * d.x, d.x * d.y)
        };
        let f = AnnulusField::sample(g, &u);
        let div = f.divergence();
        for i in (0..g.n_s).step_by(3) {
            for j in (1..g.n_z).step_by(5) {
                let d = g.node(i, j) - c;
                assert!((div[g.idx(i, j)] - 3.0 * d.x).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn mode_transform_round_trip() {
        let g = test_grid();
        let vals: Vec<f64> = (0..g.node_count())
            .map(|i| ((i as f64) * 0.7).sin())
            .collect();
        let modes = theta_modes(&g, &vals);
        let back = nodes_from_modes(&g, &modes);
        for (a, b) in vals.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn h1_seminorm_of_linear_field() {
        let g = test_grid();
        // u = (y, 0): gradient has a single unit entry; seminorm^2 = band area
        let f = AnnulusField::sample(g, &|x| Vector2::new(x.y, 0.0));
        assert_abs_diff_eq!(f.h1_seminorm(), g.band_area().sqrt(), epsilon = 1e-6);
    }
}
