//! Cavity and solid geometry, tubular coordinates near the solid boundary,
//! quadrature rules, and set-inclusion tests for solid neighborhoods.
//!
//! The cavity is an axis-aligned rectangle (2D) or box (3D); the solid is a
//! disk/ball. Both choices keep every geometric quantity analytic so that
//! scheme behavior is not polluted by geometric approximation error.

use nalgebra::{Rotation2, Vector2, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("solid (gap {gap:.6e}) is not contained in the cavity")]
    SolidOutsideCavity { gap: f64 },
    #[error("point at distance {dist:.6e} from the solid center is inside the tubular-coordinate reach {reach:.6e}")]
    CoordinateSingularity { dist: f64, reach: f64 },
    #[error("cavity extents must be strictly positive, got {0:?}")]
    BadExtents(Vec<f64>),
    #[error("solid shape requires radius > 0 and density > 0, got r={radius}, rho={density}")]
    BadShape { radius: f64, density: f64 },
}

/// Axis-aligned cavity `[0, L_1] x ... x [0, L_d]`, `d in {2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cavity {
    extents: Vec<f64>,
}

impl Cavity {
    pub fn rectangle(width: f64, height: f64) -> Result<Self, GeometryError> {
        Self::new(vec![width, height])
    }

    pub fn cuboid(lx: f64, ly: f64, lz: f64) -> Result<Self, GeometryError> {
        Self::new(vec![lx, ly, lz])
    }

    pub fn new(extents: Vec<f64>) -> Result<Self, GeometryError> {
        let ok = (extents.len() == 2 || extents.len() == 3)
            && extents.iter().all(|&e| e > 0.0 && e.is_finite());
        if !ok {
            return Err(GeometryError::BadExtents(extents));
        }
        Ok(Self { extents })
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn width(&self) -> f64 {
        self.extents[0]
    }

    pub fn height(&self) -> f64 {
        self.extents[1]
    }

    /// Distance from an interior point to the cavity boundary (min over walls).
    pub fn wall_distance(&self, center: &[f64]) -> f64 {
        center
            .iter()
            .zip(&self.extents)
            .map(|(&c, &e)| c.min(e - c))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(&self.extents)
            .all(|(&c, &e)| (0.0..=e).contains(&c))
    }
}

/// Disk (2D) / ball (3D): radius and constant density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidShape {
    pub radius: f64,
    pub density: f64,
}

impl SolidShape {
    pub fn new(radius: f64, density: f64) -> Result<Self, GeometryError> {
        if radius > 0.0 && density > 0.0 && radius.is_finite() && density.is_finite() {
            Ok(Self { radius, density })
        } else {
            Err(GeometryError::BadShape { radius, density })
        }
    }

    /// Area (2D interpretation).
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// Volume (3D interpretation).
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.radius
    }
}

/// Rigid placement of the solid in 2D: center plus orientation angle.
///
/// The orientation datum is an exact isometry by representation (an angle),
/// so the orthogonality defect of the induced rotation is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub center: Vector2<f64>,
    pub angle: f64,
}

impl Placement {
    pub fn new(center: Vector2<f64>, angle: f64) -> Self {
        Self { center, angle }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(Vector2::new(x, y), 0.0)
    }

    pub fn rotation(&self) -> Rotation2<f64> {
        Rotation2::new(self.angle)
    }

    /// Map a body-frame point (relative to the solid center) to world frame.
    pub fn to_world(&self, local: Vector2<f64>) -> Vector2<f64> {
        self.center + self.rotation() * local
    }

    /// Map a world point to the body frame (relative to the solid center).
    pub fn to_body(&self, world: Vector2<f64>) -> Vector2<f64> {
        self.rotation().inverse() * (world - self.center)
    }
}

/// Tubular coordinates around the solid boundary: arc-length coordinate `s`
/// along the reference boundary, signed normal offset `z` (`z > 0` outside
/// the solid), and the scale factors of the orthogonal chart.
///
/// For a disk `h_z = 1` identically and `h_s = (r + z)/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubularCoord {
    pub s: f64,
    pub z: f64,
    pub h_s: f64,
    pub h_z: f64,
}

/// Gap between the solid and the cavity boundary: `dist(S, wall) = min over
/// walls of (wall distance of the center) - r`. Nonnegative iff the closed
/// solid sits inside the closed cavity.
pub fn gap_distance(
    placement: &Placement,
    shape: &SolidShape,
    cavity: &Cavity,
) -> Result<f64, GeometryError> {
    let center = [placement.center.x, placement.center.y];
    gap_distance_nd(&center, shape.radius, cavity)
}

/// Dimension-generic gap; `center` length must match the cavity dimension.
pub fn gap_distance_nd(
    center: &[f64],
    radius: f64,
    cavity: &Cavity,
) -> Result<f64, GeometryError> {
    assert_eq!(center.len(), cavity.dimension(), "dimension mismatch");
    let gap = cavity.wall_distance(center) - radius;
    if gap < 0.0 {
        Err(GeometryError::SolidOutsideCavity { gap })
    } else {
        Ok(gap)
    }
}

/// Tubular coordinates of a world point relative to the current placement.
///
/// The chart is tied to the body: `s` is the arc length along the reference
/// boundary measured from the body `x`-axis. Points with `|x - x_S| <= r/2`
/// are rejected (coordinate reach towards the center singularity).
pub fn tubular_coordinates(
    x: Vector2<f64>,
    placement: &Placement,
    shape: &SolidShape,
) -> Result<TubularCoord, GeometryError> {
    let body = placement.to_body(x);
    let dist = body.norm();
    let r = shape.radius;
    if dist <= 0.5 * r {
        return Err(GeometryError::CoordinateSingularity {
            dist,
            reach: 0.5 * r,
        });
    }
    let theta = body.y.atan2(body.x);
    let theta = if theta < 0.0 {
        theta + 2.0 * std::f64::consts::PI
    } else {
        theta
    };
    let z = dist - r;
    Ok(TubularCoord {
        s: r * theta,
        z,
        h_s: (r + z) / r,
        h_z: 1.0,
    })
}

/// Inverse of [`tubular_coordinates`]: world point of the chart node `(s, z)`.
pub fn from_tubular(
    s: f64,
    z: f64,
    placement: &Placement,
    shape: &SolidShape,
) -> Vector2<f64> {
    let theta = s / shape.radius;
    let rho = shape.radius + z;
    placement.to_world(Vector2::new(rho * theta.cos(), rho * theta.sin()))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Boundary quadrature on the moving solid boundary: composite Gauss rule on
/// `order` panels with `order` points each. Returns `(node, weight, outward
/// unit normal)`; weights sum to the boundary measure `2 pi r`.
pub fn boundary_quadrature(
    placement: &Placement,
    shape: &SolidShape,
    order: usize,
) -> Vec<(Vector2<f64>, f64, Vector2<f64>)> {
    assert!(order >= 1);
    let r = shape.radius;
    let panels = order.max(4);
    let (gx, gw) = gauss_legendre(order);
    let panel_angle = 2.0 * std::f64::consts::PI / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = p as f64 * panel_angle;
        for (x, w) in gx.iter().zip(&gw) {
            let theta = a + 0.5 * panel_angle * (x + 1.0);
            let normal_body = Vector2::new(theta.cos(), theta.sin());
            let node = placement.to_world(r * normal_body);
            let normal = placement.rotation() * normal_body;
            out.push((node, 0.5 * panel_angle * w * r, normal));
        }
    }
    out
}

/// Area quadrature on the moving solid: Gauss–Legendre tensor rule in polar
/// coordinates (`order` radial Gauss nodes, `2*order` uniform angles).
/// Weights are positive and sum to `pi r^2`.
pub fn solid_quadrature(
    placement: &Placement,
    shape: &SolidShape,
    order: usize,
) -> Vec<(Vector2<f64>, f64)> {
    assert!(order >= 1);
    let r = shape.radius;
    let (gx, gw) = gauss_legendre(order);
    let m = (2 * order).max(4);
    let dtheta = 2.0 * std::f64::consts::PI / m as f64;
    let mut out = Vec::with_capacity(order * m);
    for (x, w) in gx.iter().zip(&gw) {
        let rho = 0.5 * r * (x + 1.0);
        let wr = 0.5 * r * w * rho;
        for k in 0..m {
            let theta = (k as f64 + 0.5) * dtheta;
            let node = placement.to_world(Vector2::new(rho * theta.cos(), rho * theta.sin()));
            out.push((node, wr * dtheta));
        }
    }
    out
}

/// `true` iff solid A is contained in the `h`-dilation of solid B. For
/// congruent disks this reduces to `|x_A - x_B| <= h`.
pub fn inclusion_test(a: &Placement, b: &Placement, h: f64) -> bool {
    assert!(h > 0.0);
    (a.center - b.center).norm() <= h
}

// --- 3D quadrature (ball / sphere) ------------------------------------------

/// Surface quadrature on a sphere of radius `r` centered at `center`:
/// Gauss–Legendre in the polar cosine, uniform azimuth. Returns
/// `(node, weight, outward unit normal)`; weights sum to `4 pi r^2`.
pub fn sphere_quadrature(
    center: Vector3<f64>,
    r: f64,
    order: usize,
) -> Vec<(Vector3<f64>, f64, Vector3<f64>)> {
    let (gx, gw) = gauss_legendre(order);
    let m = (2 * order).max(4);
    let dphi = 2.0 * std::f64::consts::PI / m as f64;
    let mut out = Vec::with_capacity(order * m);
    for (mu, w) in gx.iter().zip(&gw) {
        let sin_t = (1.0 - mu * mu).sqrt();
        for k in 0..m {
            let phi = (k as f64 + 0.5) * dphi;
            let n = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), *mu);
            out.push((center + r * n, r * r * w * dphi, n));
        }
    }
    out
}

/// Volume quadrature on a ball: radial Gauss with the `rho^2` Jacobian times
/// the sphere rule. Weights sum to `4/3 pi r^3`.
pub fn ball_quadrature(center: Vector3<f64>, r: f64, order: usize) -> Vec<(Vector3<f64>, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let shell = sphere_quadrature(Vector3::zeros(), 1.0, order);
    let mut out = Vec::with_capacity(order * shell.len());
    for (x, w) in gx.iter().zip(&gw) {
        let rho = 0.5 * r * (x + 1.0);
        let wr = 0.5 * r * w * rho * rho;
        for (n, ws, _) in &shell {
            out.push((center + rho * n, wr * ws));
        }
    }
    out
}
