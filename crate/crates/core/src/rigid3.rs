//! 3D counterparts of the rigid-motion kernels: rigid fields with an angular
//! velocity vector, ball inertia tensors, the rigid `L²` projection on a
//! ball, and the isometric propagator with per-step re-orthonormalization of
//! the rotation matrix.

use crate::geometry::{ball_quadrature, SolidShape};
use crate::rigid::RigidError;
use nalgebra::{Matrix3, Vector3};

/// Rigid placement in 3D: center plus rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement3 {
    pub center: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl Placement3 {
    pub fn at(center: Vector3<f64>) -> Self {
        Self {
            center,
            rotation: Matrix3::identity(),
        }
    }

    pub fn to_world(&self, local: Vector3<f64>) -> Vector3<f64> {
        self.center + self.rotation * local
    }

    pub fn to_body(&self, world: Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (world - self.center)
    }

    /// `||Q^T Q - I||` in the max norm; zero for an exact isometry.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.rotation.transpose() * self.rotation - Matrix3::identity();
        d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Rigid velocity field `x -> V + omega x (x - x_S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidField3 {
    pub translation: Vector3<f64>,
    pub angular: Vector3<f64>,
    pub center: Vector3<f64>,
}

impl RigidField3 {
    pub fn new(translation: Vector3<f64>, angular: Vector3<f64>, center: Vector3<f64>) -> Self {
        Self {
            translation,
            angular,
            center,
        }
    }

    pub fn evaluate(&self, x: Vector3<f64>) -> Vector3<f64> {
        self.translation + self.angular.cross(&(x - self.center))
    }
}

/// Mass, center, and inertia tensor of the placed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct InertialData3 {
    pub mass: f64,
    pub center: Vector3<f64>,
    pub inertia: Matrix3<f64>,
}

/// `M = rho_S |S|`, `J = rho_S \int_S (|d|^2 I - d (x) d)`; for a ball of
/// radius `r` the tensor is `(2/5) M r^2 I`.
pub fn inertial_data3(shape: &SolidShape, center: Vector3<f64>) -> InertialData3 {
    let mass = shape.density * shape.volume();
    let j = 0.4 * mass * shape.radius * shape.radius;
    InertialData3 {
        mass,
        center,
        inertia: Matrix3::identity() * j,
    }
}

/// Orthogonal `L²(S)` projection onto rigid fields on a ball.
pub fn project_rigid3(
    u: &dyn Fn(Vector3<f64>) -> Vector3<f64>,
    data: &InertialData3,
    shape: &SolidShape,
    order: usize,
) -> Result<RigidField3, RigidError> {
    let inv = data
        .inertia
        .try_inverse()
        .ok_or(RigidError::SingularInertia(0.0))?;
    let rule = ball_quadrature(data.center, shape.radius, order);
    let rho = shape.density;
    let mut momentum = Vector3::zeros();
    let mut angular = Vector3::zeros();
    for (x, w) in &rule {
        let v = u(*x);
        momentum += rho * w * v;
        angular += rho * w * (x - data.center).cross(&v);
    }
    Ok(RigidField3::new(
        momentum / data.mass,
        inv * angular,
        data.center,
    ))
}

fn skew(w: Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Nearest orthogonal matrix (polar factor) via SVD.
fn reorthonormalize(q: Matrix3<f64>) -> Matrix3<f64> {
    let svd = q.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    u * vt
}

/// Discrete 3D isometric propagator.
#[derive(Debug, Clone)]
pub struct Propagator3 {
    pub times: Vec<f64>,
    pub placements: Vec<Placement3>,
}

/// Integrate `dx_S/dt = V(t)`, `dQ/dt = [omega(t)]_x Q` with RK4 substeps and
/// polar re-orthonormalization after every step, so the orthogonality defect
/// stays at machine level.
pub fn propagate3(
    history: &dyn Fn(f64) -> (Vector3<f64>, Vector3<f64>),
    initial: Placement3,
    t_span: (f64, f64),
    steps: usize,
) -> Propagator3 {
    let (t0, t1) = t_span;
    assert!(steps >= 1);
    let dt = (t1 - t0) / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut placements = Vec::with_capacity(steps + 1);
    let mut p = initial;
    times.push(t0);
    placements.push(p);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        // RK4 on (center, Q)
        let f = |t: f64, c: Vector3<f64>, q: Matrix3<f64>| -> (Vector3<f64>, Matrix3<f64>) {
            let _ = c;
            let (v, w) = history(t);
            (v, skew(w) * q)
        };
        let (k1c, k1q) = f(t, p.center, p.rotation);
        let (k2c, k2q) = f(t + 0.5 * dt, p.center + 0.5 * dt * k1c, p.rotation + 0.5 * dt * k1q);
        let (k3c, k3q) = f(t + 0.5 * dt, p.center + 0.5 * dt * k2c, p.rotation + 0.5 * dt * k2q);
        let (k4c, k4q) = f(t + dt, p.center + dt * k3c, p.rotation + dt * k3q);
        let center = p.center + dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        let rotation = reorthonormalize(p.rotation + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q));
        p = Placement3 { center, rotation };
        times.push(t + dt);
        placements.push(p);
    }
    Propagator3 { times, placements }
}

impl Propagator3 {
    pub fn placement_at(&self, t: f64) -> Result<Placement3, RigidError> {
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return Err(RigidError::OutOfSpan { t, t0, t1 });
        }
        let t = t.clamp(t0, t1);
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.placements[i]),
            Err(i) => (i - 1).min(self.times.len() - 2),
        };
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let lam = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
        let (a, b) = (&self.placements[i], &self.placements[i + 1]);
        Ok(Placement3 {
            center: (1.0 - lam) * a.center + lam * b.center,
            rotation: reorthonormalize((1.0 - lam) * a.rotation + lam * b.rotation),
        })
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.placements
            .iter()
            .map(Placement3::orthogonality_defect)
            .fold(0.0, f64::max)
    }
}

/// Pullback `W(t, y) = Q(t)^T w(t, phi_{t,0}(y))` through the 3D propagator.
pub fn pullback_field3<'a>(
    w: &'a dyn Fn(f64, Vector3<f64>) -> Vector3<f64>,
    propagator: &'a Propagator3,
) -> impl Fn(f64, Vector3<f64>) -> Vector3<f64> + 'a {
    move |t: f64, y: Vector3<f64>| {
        let p0 = propagator.placements[0];
        let pt = propagator.placement_at(t).expect("time inside span");
        let x = pt.to_world(p0.to_body(y));
        let q_rel = pt.rotation * p0.rotation.transpose();
        q_rel.transpose() * w(t, x)
    }
}
