//! Rigid velocity fields, inertial data, the rigid `L²` projection, the
//! isometric propagator, indicator transport, and isometry pullbacks (2D).

use crate::geometry::{solid_quadrature, Placement, SolidShape};
use nalgebra::{Rotation2, Vector2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RigidError {
    #[error("inertia is numerically singular: J = {0:.3e}")]
    SingularInertia(f64),
    #[error("time {t} outside the propagator span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("rigid history must contain at least one sample")]
    EmptyHistory,
}

/// Rigid velocity field `x -> V + omega * (x - x_S)^perp`.
///
/// `perp` rotates by +90 degrees: `(a, b)^perp = (-b, a)`, so positive
/// `omega` is counterclockwise. Rigid fields are divergence-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidField {
    pub translation: Vector2<f64>,
    pub angular: f64,
    pub center: Vector2<f64>,
}

pub fn perp(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

/// 2D cross product `a x b = a_x b_y - a_y b_x`.
pub fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

impl RigidField {
    pub fn new(translation: Vector2<f64>, angular: f64, center: Vector2<f64>) -> Self {
        Self {
            translation,
            angular,
            center,
        }
    }

    pub fn zero(center: Vector2<f64>) -> Self {
        Self::new(Vector2::zeros(), 0.0, center)
    }

    pub fn evaluate(&self, x: Vector2<f64>) -> Vector2<f64> {
        self.translation + self.angular * perp(x - self.center)
    }

    /// Stream function of the rigid field (2D): the field equals the
    /// perpendicular gradient of this scalar.
    pub fn stream_function(&self, x: Vector2<f64>) -> f64 {
        // With grad^perp psi = (-d_y psi, d_x psi), the stream function of
        // V + omega d^perp is psi = V_y d_x - V_x d_y + omega/2 |d|^2.
        let d = x - self.center;
        self.translation.y * d.x - self.translation.x * d.y + 0.5 * self.angular * d.norm_squared()
    }

    pub fn speed_bound(&self, radius: f64) -> f64 {
        self.translation.norm() + self.angular.abs() * radius
    }
}

/// Mass, center, and scalar moment of inertia of the solid about its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialData {
    pub mass: f64,
    pub center: Vector2<f64>,
    pub moment: f64,
}

/// Inertial data of the placed solid: `M = rho_S |S|`, scalar inertia
/// `J = rho_S \int_S |x - x_S|^2`. Closed forms for a disk.
pub fn inertial_data(shape: &SolidShape, placement: &Placement) -> InertialData {
    let r = shape.radius;
    let mass = shape.density * shape.area();
    // rho * int_0^r s^2 * s ds dtheta = rho * 2 pi r^4 / 4
    let moment = shape.density * std::f64::consts::FRAC_PI_2 * r.powi(4);
    InertialData {
        mass,
        center: placement.center,
        moment,
    }
}

/// Orthogonal `L²(S)` projection of a velocity field onto rigid fields:
/// `V = (1/M) \int_S rho u`, `omega = J^{-1} \int_S rho (x - x_S) x u`.
///
/// The sampler is evaluated on the solid quadrature rule of the given order.
pub fn project_rigid(
    u: &dyn Fn(Vector2<f64>) -> Vector2<f64>,
    data: &InertialData,
    placement: &Placement,
    shape: &SolidShape,
    order: usize,
) -> Result<RigidField, RigidError> {
    if data.moment <= f64::EPSILON * data.mass {
        return Err(RigidError::SingularInertia(data.moment));
    }
    let rule = solid_quadrature(placement, shape, order);
    let rho = shape.density;
    let mut momentum = Vector2::zeros();
    let mut angular = 0.0;
    for (x, w) in &rule {
        let v = u(*x);
        momentum += rho * w * v;
        angular += rho * w * cross2(x - data.center, v);
    }
    Ok(RigidField::new(
        momentum / data.mass,
        angular / data.moment,
        data.center,
    ))
}

/// Time-sampled rigid velocity history with piecewise-linear interpolation.
#[derive(Debug, Clone)]
pub struct RigidHistory {
    pub times: Vec<f64>,
    pub fields: Vec<RigidField>,
}

impl RigidHistory {
    pub fn new(times: Vec<f64>, fields: Vec<RigidField>) -> Result<Self, RigidError> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(RigidError::EmptyHistory);
        }
        Ok(Self { times, fields })
    }

    pub fn constant(field: RigidField, t0: f64, t1: f64) -> Self {
        Self {
            times: vec![t0, t1],
            fields: vec![field, field],
        }
    }

    /// Piecewise-linear sample of `(V, omega)` at time `t` (clamped to span).
    pub fn sample(&self, t: f64) -> (Vector2<f64>, f64) {
        let n = self.times.len();
        if t <= self.times[0] {
            let f = &self.fields[0];
            return (f.translation, f.angular);
        }
        if t >= self.times[n - 1] {
            let f = &self.fields[n - 1];
            return (f.translation, f.angular);
        }
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return (self.fields[i].translation, self.fields[i].angular),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let lam = (t - t0) / (t1 - t0);
        let (a, b) = (&self.fields[i], &self.fields[i + 1]);
        (
            (1.0 - lam) * a.translation + lam * b.translation,
            (1.0 - lam) * a.angular + lam * b.angular,
        )
    }
}

/// Discrete isometric propagator: time-indexed placements with the group
/// property `phi_{t,s} o phi_{s,0} = phi_{t,0}` holding by construction.
///
/// Snapshots are immutable after construction. The orientation is stored as
/// an angle, so every snapshot is an exact isometry.
#[derive(Debug, Clone)]
pub struct Propagator {
    times: Vec<f64>,
    placements: Vec<Placement>,
}

/// Integrate the placement ODE `dx_S/dt = V(t)`, `dtheta/dt = omega(t)` for a
/// piecewise-linear rigid history. Trapezoid quadrature of the (piecewise
/// linear) velocity is exact for this interpolation, so `tolerance` only
/// controls the time substep used to emit snapshots.
pub fn propagate(
    history: &RigidHistory,
    initial: Placement,
    t_span: (f64, f64),
    tolerance: f64,
) -> Result<Propagator, RigidError> {
    let (t0, t1) = t_span;
    assert!(t1 >= t0);
    assert!(tolerance > 0.0);
    // Snapshot grid: union of history breakpoints and a uniform refinement.
    let mut times: Vec<f64> = history
        .times
        .iter()
        .copied()
        .filter(|&t| t > t0 && t < t1)
        .collect();
    let steps = (((t1 - t0) / tolerance.sqrt().max(1e-8)).ceil() as usize).clamp(1, 100_000);
    for k in 0..=steps {
        times.push(t0 + (t1 - t0) * k as f64 / steps as f64);
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut placements = Vec::with_capacity(times.len());
    let mut current = initial;
    let mut prev_t = times[0];
    let (mut prev_v, mut prev_w) = history.sample(prev_t);
    placements.push(current);
    for &t in &times[1..] {
        let (v, w) = history.sample(t);
        let dt = t - prev_t;
        // exact for piecewise-linear (V, omega)
        current = Placement::new(
            current.center + 0.5 * dt * (prev_v + v),
            current.angle + 0.5 * dt * (prev_w + w),
        );
        placements.push(current);
        prev_t = t;
        prev_v = v;
        prev_w = w;
    }
    Ok(Propagator { times, placements })
}

impl Propagator {
    pub fn from_snapshots(times: Vec<f64>, placements: Vec<Placement>) -> Self {
        assert_eq!(times.len(), placements.len());
        assert!(!times.is_empty());
        Self { times, placements }
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Placement at time `t` (linear interpolation of center and angle).
    pub fn placement_at(&self, t: f64) -> Result<Placement, RigidError> {
        let (t0, t1) = self.span();
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
        Ok(Placement::new(
            (1.0 - lam) * a.center + lam * b.center,
            (1.0 - lam) * a.angle + lam * b.angle,
        ))
    }

    /// Forward map `phi_{t,0}(y)` relative to the initial placement.
    pub fn map(&self, t: f64, y: Vector2<f64>) -> Result<Vector2<f64>, RigidError> {
        let p0 = self.placements[0];
        let pt = self.placement_at(t)?;
        Ok(pt.to_world(p0.to_body(y)))
    }

    /// Inverse map `phi_{t,0}^{-1}(x)`.
    pub fn unmap(&self, t: f64, x: Vector2<f64>) -> Result<Vector2<f64>, RigidError> {
        let p0 = self.placements[0];
        let pt = self.placement_at(t)?;
        Ok(p0.to_world(pt.to_body(x)))
    }

    /// Rotation of `phi_{t,0}` (relative to the initial orientation).
    pub fn rotation_from_start(&self, t: f64) -> Result<Rotation2<f64>, RigidError> {
        let p0 = self.placements[0];
        let pt = self.placement_at(t)?;
        Ok(Rotation2::new(pt.angle - p0.angle))
    }
}

/// Indicator of the transported solid: `1` iff `phi_{t,0}^{-1}(x)` lies in the
/// reference solid, i.e. for a disk `|x - x_S(t)| <= r`.
pub fn transport_indicator(
    propagator: &Propagator,
    shape: &SolidShape,
    x: Vector2<f64>,
    t: f64,
) -> Result<u8, RigidError> {
    let p = propagator.placement_at(t)?;
    Ok(u8::from((x - p.center).norm() <= shape.radius))
}

/// Pullback of a time-dependent field through the propagator:
/// `W(t, y) = Q(t)^T w(t, phi_{t,0}(y))`.
///
/// The pullback preserves `L²` norms over corresponding regions because the
/// propagator is an isometry.
pub fn pullback_field<'a>(
    w: &'a dyn Fn(f64, Vector2<f64>) -> Vector2<f64>,
    propagator: &'a Propagator,
) -> impl Fn(f64, Vector2<f64>) -> Vector2<f64> + 'a {
    move |t: f64, y: Vector2<f64>| {
        let q = propagator
            .rotation_from_start(t)
            .expect("time inside propagator span");
        let x = propagator.map(t, y).expect("time inside propagator span");
        q.inverse() * w(t, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::boundary_quadrature;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_disk() -> (SolidShape, Placement) {
        (SolidShape::new(1.0, 1.0).unwrap(), Placement::at(0.0, 0.0))
    }

    /// Random smooth velocity field from a small trig/polynomial dictionary.
    fn random_field(rng: &mut ChaCha8Rng) -> impl Fn(Vector2<f64>) -> Vector2<f64> {
        let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        move |x: Vector2<f64>| {
            Vector2::new(
                c[0] + c[1] * x.y + c[2] * (x.x).sin() * (2.0 * x.y).cos() + c[3] * x.x * x.y,
                c[4] + c[5] * x.x + c[6] * (1.5 * x.y).cos() + c[7] * x.x * x.x,
            )
        }
    }

    #[test]
    fn disk_inertia_closed_forms() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        assert_abs_diff_eq!(data.mass, PI, epsilon = 1e-14);
        assert_abs_diff_eq!(data.moment, PI / 2.0, epsilon = 1e-14);
        // against the polar quadrature oracle
        let rule = solid_quadrature(&p, &shape, 16);
        let m_quad: f64 = rule.iter().map(|(_, w)| w).sum();
        let j_quad: f64 = rule.iter().map(|(x, w)| w * x.norm_squared()).sum();
        assert_abs_diff_eq!(data.mass, m_quad, epsilon = 1e-12);
        assert_abs_diff_eq!(data.moment, j_quad, epsilon = 1e-12);
    }

    #[test]
    fn inertia_scaling_homogeneity() {
        let p = Placement::at(0.0, 0.0);
        let small = inertial_data(&SolidShape::new(0.7, 2.0).unwrap(), &p);
        let big = inertial_data(&SolidShape::new(1.4, 2.0).unwrap(), &p);
        assert_abs_diff_eq!(big.mass / small.mass, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(big.moment / small.moment, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_fixes_rigid_fields() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        let rig = RigidField::new(Vector2::new(0.3, -0.8), 1.7, p.center);
        let proj = project_rigid(&|x| rig.evaluate(x), &data, &p, &shape, 16).unwrap();
        assert!((proj.translation - rig.translation).norm() <= 1e-12);
        assert_abs_diff_eq!(proj.angular, rig.angular, epsilon = 1e-12);
    }

    #[test]
    fn pure_dilation_projects_to_zero() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        let proj = project_rigid(&|x| x - p.center, &data, &p, &shape, 16).unwrap();
        assert!(proj.translation.norm() <= 1e-13);
        assert_abs_diff_eq!(proj.angular, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn shear_projects_to_known_values() {
        // u = (y, 0) on a unit disk centered at (xc, yc): V = (yc, 0), omega = -1/2.
        let shape = SolidShape::new(1.0, 1.0).unwrap();
        let p = Placement::at(0.7, -0.4);
        let data = inertial_data(&shape, &p);
        let proj = project_rigid(&|x| Vector2::new(x.y, 0.0), &data, &p, &shape, 16).unwrap();
        assert_abs_diff_eq!(proj.translation.x, -0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(proj.translation.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(proj.angular, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let u = random_field(&mut rng);
            let pu = project_rigid(&u, &data, &p, &shape, 16).unwrap();
            let ppu = project_rigid(&|x| pu.evaluate(x), &data, &p, &shape, 16).unwrap();
            assert!((ppu.translation - pu.translation).norm() <= 1e-12);
            assert_abs_diff_eq!(ppu.angular, pu.angular, epsilon = 1e-12);

            // orthogonality: int_S rho (u - P_S u) . w = 0 for rigid basis w
            let rule = solid_quadrature(&p, &shape, 16);
            for basis in [
                RigidField::new(Vector2::new(1.0, 0.0), 0.0, p.center),
                RigidField::new(Vector2::new(0.0, 1.0), 0.0, p.center),
                RigidField::new(Vector2::zeros(), 1.0, p.center),
            ] {
                let defect: f64 = rule
                    .iter()
                    .map(|(x, w)| w * (u(*x) - pu.evaluate(*x)).dot(&basis.evaluate(*x)))
                    .sum();
                assert!(defect.abs() <= 1e-12, "orthogonality defect {defect}");
            }
        }
    }

    #[test]
    fn projection_is_best_rigid_approximation() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        let rule = solid_quadrature(&p, &shape, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_field(&mut rng);
        let pu = project_rigid(&u, &data, &p, &shape, 16).unwrap();
        let dist = |w: &RigidField| -> f64 {
            rule.iter()
                .map(|(x, q)| q * (u(*x) - w.evaluate(*x)).norm_squared())
                .sum()
        };
        let best = dist(&pu);
        for _ in 0..100 {
            let w = RigidField::new(
                Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                rng.random_range(-2.0..2.0),
                p.center,
            );
            assert!(best <= dist(&w) + 1e-12);
        }
    }

    #[test]
    fn projected_kinetic_energy_does_not_exceed_original() {
        let (shape, p) = unit_disk();
        let data = inertial_data(&shape, &p);
        let rule = solid_quadrature(&p, &shape, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = random_field(&mut rng);
            let pu = project_rigid(&u, &data, &p, &shape, 16).unwrap();
            let e: f64 = rule.iter().map(|(x, w)| w * u(*x).norm_squared()).sum();
            let ep: f64 = rule
                .iter()
                .map(|(x, w)| w * pu.evaluate(*x).norm_squared())
                .sum();
            assert!(ep <= e + 1e-12);
        }
    }

    #[test]
    fn propagate_pure_translation() {
        let p0 = Placement::at(0.0, 0.0);
        let f = RigidField::new(Vector2::new(1.0, 2.0), 0.0, p0.center);
        let hist = RigidHistory::constant(f, 0.0, 1.0);
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-10).unwrap();
        let p = prop.placement_at(1.0).unwrap();
        assert!((p.center - Vector2::new(1.0, 2.0)).norm() <= 1e-12);
        assert_abs_diff_eq!(p.angle, 0.0);
    }

    #[test]
    fn propagate_pure_rotation_recovers_period() {
        let p0 = Placement::at(1.0, 1.0);
        let omega = 3.0;
        let f = RigidField::new(Vector2::zeros(), omega, p0.center);
        let period = 2.0 * PI / omega;
        let hist = RigidHistory::constant(f, 0.0, period);
        let prop = propagate(&hist, p0, (0.0, period), 1e-10).unwrap();
        let p = prop.placement_at(period).unwrap();
        assert!((p.center - p0.center).norm() <= 1e-12);
        assert_abs_diff_eq!(p.angle, 2.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn propagate_piecewise_constant_matches_refined_reference() {
        let p0 = Placement::at(0.0, 0.0);
        let fields = vec![
            RigidField::new(Vector2::new(1.0, 0.0), 0.5, p0.center),
            RigidField::new(Vector2::new(1.0, 0.0), 0.5, p0.center),
            RigidField::new(Vector2::new(0.0, -1.0), -2.0, p0.center),
            RigidField::new(Vector2::new(0.0, -1.0), -2.0, p0.center),
        ];
        let hist = RigidHistory::new(vec![0.0, 0.5, 0.5 + 1e-9, 1.0], fields).unwrap();
        let coarse = propagate(&hist, p0, (0.0, 1.0), 1e-6).unwrap();
        let fine = propagate(&hist, p0, (0.0, 1.0), 1e-8).unwrap();
        let a = coarse.placement_at(1.0).unwrap();
        let b = fine.placement_at(1.0).unwrap();
        assert!((a.center - b.center).norm() <= 1e-8);
        assert!((a.angle - b.angle).abs() <= 1e-8);
    }

    #[test]
    fn propagator_group_property() {
        let p0 = Placement::at(0.2, 0.3);
        let hist = RigidHistory::new(
            vec![0.0, 0.4, 1.0],
            vec![
                RigidField::new(Vector2::new(0.3, -0.1), 1.0, p0.center),
                RigidField::new(Vector2::new(-0.2, 0.5), -0.7, p0.center),
                RigidField::new(Vector2::new(0.1, 0.1), 0.2, p0.center),
            ],
        )
        .unwrap();
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-9).unwrap();
        let y = Vector2::new(0.5, -0.3);
        // phi_{t,s} = phi_{t,0} o phi_{s,0}^{-1}; composing through s must
        // reproduce the direct map.
        let s = 0.37;
        let t = 0.81;
        let via = prop.map(t, prop.unmap(s, prop.map(s, y).unwrap()).unwrap()).unwrap();
        let direct = prop.map(t, y).unwrap();
        assert!((via - direct).norm() <= 1e-12);
    }

    #[test]
    fn indicator_matches_disk_membership_and_conserves_volume() {
        let shape = SolidShape::new(0.5, 1.0).unwrap();
        let p0 = Placement::at(0.0, 0.0);
        let hist = RigidHistory::constant(
            RigidField::new(Vector2::new(1.0, 0.5), 2.0, p0.center),
            0.0,
            1.0,
        );
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-9).unwrap();
        // t = 0 reduces to the initial indicator
        assert_eq!(
            transport_indicator(&prop, &shape, Vector2::new(0.4, 0.0), 0.0).unwrap(),
            1
        );
        assert_eq!(
            transport_indicator(&prop, &shape, Vector2::new(0.6, 0.0), 0.0).unwrap(),
            0
        );
        // membership matches |x - x_S(t)| <= r
        let t = 0.63;
        let c = prop.placement_at(t).unwrap().center;
        assert_eq!(
            transport_indicator(&prop, &shape, c + Vector2::new(0.49, 0.0), t).unwrap(),
            1
        );
        // |S(t)| constant: quadrature of the indicator over the moving disk
        for t in [0.0, 0.31, 0.77, 1.0] {
            let pt = prop.placement_at(t).unwrap();
            let rule = solid_quadrature(&pt, &shape, 16);
            let vol: f64 = rule
                .iter()
                .map(|(x, w)| {
                    w * f64::from(transport_indicator(&prop, &shape, *x, t).unwrap())
                })
                .sum();
            assert_abs_diff_eq!(vol, shape.area(), epsilon = 1e-10);
        }
    }

    #[test]
    fn pullback_identity_and_rotation_conventions() {
        let p0 = Placement::at(0.0, 0.0);
        // identity propagator
        let hist = RigidHistory::constant(RigidField::zero(p0.center), 0.0, 1.0);
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-9).unwrap();
        let w = |_t: f64, x: Vector2<f64>| Vector2::new(x.x + 1.0, x.y * 2.0);
        let pulled = pullback_field(&w, &prop);
        let y = Vector2::new(0.3, 0.4);
        assert!((pulled(0.7, y) - w(0.7, y)).norm() <= 1e-12);

        // rotation by pi/2 applied to the constant field (1, 0) gives (0, -1)
        let omega = PI / 2.0;
        let hist = RigidHistory::constant(RigidField::new(Vector2::zeros(), omega, p0.center), 0.0, 1.0);
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-10).unwrap();
        let w = |_t: f64, _x: Vector2<f64>| Vector2::new(1.0, 0.0);
        let pulled = pullback_field(&w, &prop);
        let val = pulled(1.0, Vector2::new(0.2, 0.1));
        assert!((val - Vector2::new(0.0, -1.0)).norm() <= 1e-10, "{val:?}");
    }

    #[test]
    fn pullback_preserves_l2_norm() {
        let shape = SolidShape::new(0.75, 1.0).unwrap();
        let p0 = Placement::at(0.1, -0.2);
        let hist = RigidHistory::constant(
            RigidField::new(Vector2::new(0.8, -0.3), 1.3, p0.center),
            0.0,
            1.0,
        );
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-9).unwrap();
        let t = 0.9;
        let w = |_t: f64, x: Vector2<f64>| {
            Vector2::new((x.x * 2.0).sin() + x.y, x.x - (x.y).cos())
        };
        let pulled = pullback_field(&w, &prop);
        // norm over S(t) of w
        let pt = prop.placement_at(t).unwrap();
        let rule_t = solid_quadrature(&pt, &shape, 16);
        let norm_moving: f64 = rule_t.iter().map(|(x, q)| q * w(t, *x).norm_squared()).sum();
        // norm over S_0 of W
        let rule_0 = solid_quadrature(&p0, &shape, 16);
        let norm_ref: f64 = rule_0.iter().map(|(y, q)| q * pulled(t, *y).norm_squared()).sum();
        assert_abs_diff_eq!(norm_moving, norm_ref, epsilon = 1e-10);
    }

    #[test]
    fn pullback_commutes_with_rigid_projection_up_to_rotation() {
        let shape = SolidShape::new(0.75, 1.0).unwrap();
        let p0 = Placement::at(0.0, 0.0);
        let hist = RigidHistory::constant(
            RigidField::new(Vector2::new(0.4, 0.2), 0.9, p0.center),
            0.0,
            1.0,
        );
        let prop = propagate(&hist, p0, (0.0, 1.0), 1e-9).unwrap();
        let t = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w_field = random_field(&mut rng);
        let w = move |_t: f64, x: Vector2<f64>| w_field(x);

        let pt = prop.placement_at(t).unwrap();
        let data_t = inertial_data(&shape, &pt);
        let proj_moving = project_rigid(&|x| w(t, x), &data_t, &pt, &shape, 16).unwrap();

        let pulled = pullback_field(&w, &prop);
        let data_0 = inertial_data(&shape, &p0);
        let proj_ref =
            project_rigid(&|y| pulled(t, y), &data_0, &p0, &shape, 16).unwrap();

        let q = prop.rotation_from_start(t).unwrap();
        assert!(
            (q.inverse() * proj_moving.translation - proj_ref.translation).norm() <= 1e-10
        );
        assert_abs_diff_eq!(proj_moving.angular, proj_ref.angular, epsilon = 1e-10);
    }

    #[test]
    fn stream_function_generates_the_field() {
        let f = RigidField::new(Vector2::new(0.3, -0.7), 1.1, Vector2::new(0.5, 0.2));
        let eps = 1e-6;
        let x = Vector2::new(1.3, -0.4);
        let gx = (f.stream_function(x + Vector2::new(eps, 0.0))
            - f.stream_function(x - Vector2::new(eps, 0.0)))
            / (2.0 * eps);
        let gy = (f.stream_function(x + Vector2::new(0.0, eps))
            - f.stream_function(x - Vector2::new(0.0, eps)))
            / (2.0 * eps);
        let v = f.evaluate(x);
        assert!((Vector2::new(-gy, gx) - v).norm() <= 1e-8);
    }

    #[test]
    fn rigid_boundary_flux_vanishes() {
        // rotation has zero normal trace on the disk boundary; translation flux
        // integrates to zero
        let shape = SolidShape::new(1.0, 1.0).unwrap();
        let p = Placement::at(0.0, 0.0);
        let f = RigidField::new(Vector2::new(0.7, -0.2), 1.4, p.center);
        let rule = boundary_quadrature(&p, &shape, 16);
        let flux: f64 = rule.iter().map(|(x, w, n)| w * f.evaluate(*x).dot(n)).sum();
        assert_abs_diff_eq!(flux, 0.0, epsilon = 1e-12);
    }
}
