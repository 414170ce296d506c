//! Points, geodesics, rotations and product quadrature on the unit sphere.

use std::f64::consts::{PI, TAU};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;

use crate::error::{argument, domain, Result};
use crate::quadrature::gauss_legendre;

/// A point on S² in colatitude θ ∈ [0, π] and longitude φ ∈ [0, 2π).
/// At the poles φ is canonicalized to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("colatitude theta={theta} outside [0,pi]"));
        }
        if !(0.0..TAU).contains(&phi) {
            return domain(format!("longitude phi={phi} outside [0,2pi)"));
        }
        Ok(Self::canonical(theta, phi))
    }

    /// Accepts any finite longitude and wraps it into [0, 2π).
    pub fn wrapped(theta: f64, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return domain("longitude must be finite");
        }
        let mut p = phi.rem_euclid(TAU);
        if p >= TAU {
            p = 0.0;
        }
        Self::new(theta, p)
    }

    fn canonical(theta: f64, phi: f64) -> Self {
        let phi = if theta == 0.0 || theta == PI { 0.0 } else { phi };
        Self { theta, phi }
    }

    pub fn north_pole() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Normalizes `v` and converts it to angles.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let u = v.normalize();
        let theta = u.z.clamp(-1.0, 1.0).acos();
        let rho = u.x.hypot(u.y);
        if rho == 0.0 {
            return Self::canonical(if u.z > 0.0 { 0.0 } else { PI }, 0.0);
        }
        let mut phi = u.y.atan2(u.x);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Self::canonical(theta, phi)
    }

    /// Orthonormal tangent frame (e_θ, e_φ); at the poles this is the frame
    /// of the φ = 0 meridian.
    pub fn tangent_frame(&self) -> (Vector3<f64>, Vector3<f64>) {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        (Vector3::new(ct * cp, ct * sp, -st), Vector3::new(-sp, cp, 0.0))
    }
}

/// Cosine of the great-circle distance.
pub fn inner_product(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let v = x.theta.cos() * y.theta.cos() + x.theta.sin() * y.theta.sin() * (x.phi - y.phi).cos();
    v.clamp(-1.0, 1.0)
}

pub fn distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    x.to_vector().dot(&y.to_vector()).clamp(-1.0, 1.0).acos()
}

/// Exponential map at the embedded point `x` applied to the 3D tangent
/// vector `v`.
pub(crate) fn exp_map(x: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let r = v.norm();
    if r == 0.0 {
        return *x;
    }
    let y = x * r.cos() + v * (r.sin() / r);
    y / y.norm()
}

/// Moves |v| along the great circle leaving `x` in direction v, where v is
/// given in the (e_θ, e_φ) frame at `x`.
pub fn geodesic_step(x: &SpherePoint, v: [f64; 2]) -> SpherePoint {
    if v[0] == 0.0 && v[1] == 0.0 {
        return *x;
    }
    let (e1, e2) = x.tangent_frame();
    SpherePoint::from_vector(&exp_map(&x.to_vector(), &(e1 * v[0] + e2 * v[1])))
}

/// A rotation of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub UnitQuaternion<f64>);

impl Rotation {
    /// Haar-uniform rotation (Shoemake's construction).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let (s2, c2) = (TAU * u2).sin_cos();
        let (s3, c3) = (TAU * u3).sin_cos();
        let q = Quaternion::new(b * c3, a * s2, a * c2, b * s3);
        Self(UnitQuaternion::from_quaternion(q))
    }

    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        Self(UnitQuaternion::from_scaled_axis(axis.normalize() * angle))
    }

    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        SpherePoint::from_vector(&(self.0 * x.to_vector()))
    }
}

/// Product rule: Gauss-Legendre in cos θ times the trapezoid rule in φ.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<(SpherePoint, f64)>,
    pub degree: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

pub fn build_quadrature(n_theta: usize, n_phi: usize) -> Result<QuadratureGrid> {
    if n_theta == 0 || n_phi == 0 {
        return argument(format!("quadrature sizes must be positive, got {n_theta}x{n_phi}"));
    }
    let (x, w) = gauss_legendre(n_theta);
    let dphi = TAU / n_phi as f64;
    let thetas: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
    let weights: Vec<f64> = w.iter().rev().copied().collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();
    let nodes = thetas
        .iter()
        .zip(&weights)
        .flat_map(|(&t, &wt)| phis.iter().map(move |&p| (SpherePoint { theta: t, phi: p }, wt * dphi)))
        .collect();
    Ok(QuadratureGrid {
        nodes,
        degree: (2 * n_theta - 1).min(n_phi - 1),
        thetas,
        phis,
    })
}

impl QuadratureGrid {
    pub fn integrate<F: Fn(&SpherePoint) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// Weights of the θ rings (including the 2π/n_φ factor).
    pub fn ring_weights(&self) -> Vec<f64> {
        let n_phi = self.phis.len();
        self.nodes.iter().step_by(n_phi).map(|(_, w)| *w).collect()
    }
}
