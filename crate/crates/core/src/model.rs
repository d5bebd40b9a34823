//! Unit system, parameter records and momentum arithmetic.
//!
//! Everything is dimensionless. Lengths are measured in the transverse
//! condensate width σ⊥, wavenumbers in 1/σ⊥ and frequencies in ħ/(mσ⊥²),
//! so the free-particle dispersion reads ω(q) = q²/2. Time is measured in
//! mσ⊥²/ħ.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Anisotropic Gaussian condensate: long axis along z, cylindrical symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensateGeometry<T> {
    sigma_z: T,
    sigma_perp: T,
    n0: u64,
}

impl<T: Real> CondensateGeometry<T> {
    pub fn new(sigma_z: T, sigma_perp: T, n0: u64) -> Result<Self> {
        if !(sigma_z.is_finite() && sigma_z > T::zero()) {
            return Err(Error::invalid(
                "sigma_z",
                format!("must be finite and > 0, got {sigma_z}"),
            ));
        }
        if !(sigma_perp.is_finite() && sigma_perp > T::zero()) {
            return Err(Error::invalid(
                "sigma_perp",
                format!("must be finite and > 0, got {sigma_perp}"),
            ));
        }
        if n0 < 2 {
            return Err(Error::invalid(
                "n0",
                format!("must be at least 2, got {n0}"),
            ));
        }
        let aspect = sigma_z / sigma_perp;
        if !(aspect.is_finite() && aspect > T::zero()) {
            return Err(Error::invalid("sigma_z", "aspect ratio is not finite"));
        }
        Ok(Self {
            sigma_z,
            sigma_perp,
            n0,
        })
    }

    /// Geometry in internal units (σ⊥ = 1).
    pub fn with_aspect_ratio(aspect_ratio: T, n0: u64) -> Result<Self> {
        Self::new(aspect_ratio, T::one(), n0)
    }

    pub fn sigma_z(&self) -> T {
        self.sigma_z
    }

    pub fn sigma_perp(&self) -> T {
        self.sigma_perp
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn aspect_ratio(&self) -> T {
        self.sigma_z / self.sigma_perp
    }

    /// Largest of the two widths; sets the narrowest momentum-space feature.
    pub fn max_width(&self) -> T {
        self.sigma_z.max(self.sigma_perp)
    }
}

/// Detuning of the spin-0 level and the reference amplification rate.
///
/// `rate_ref` is the amplification rate Γ = N₀²G of the reference mode
/// (θ = 0 on the symmetric shell). Absolute couplings never enter on their
/// own; every rate is expressed relative to this one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    detuning: T,
    rate_ref: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(detuning: T, rate_ref: T) -> Result<Self> {
        if !(detuning.is_finite() && detuning > T::zero()) {
            return Err(Error::invalid(
                "detuning",
                format!("must be finite and > 0, got {detuning}"),
            ));
        }
        if !(rate_ref.is_finite() && rate_ref > T::zero()) {
            return Err(Error::invalid(
                "rate_ref",
                format!("must be finite and > 0, got {rate_ref}"),
            ));
        }
        Ok(Self { detuning, rate_ref })
    }

    /// Parameters on the symmetric shell |q| = √(2δ), i.e. δ = q²/2.
    pub fn symmetric_shell(q_mag: T, rate_ref: T) -> Result<Self> {
        Self::new(q_mag * q_mag / T::lit(2.0), rate_ref)
    }

    pub fn detuning(&self) -> T {
        self.detuning
    }

    pub fn rate_ref(&self) -> T {
        self.rate_ref
    }
}

/// Wavevector in units of 1/σ⊥.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentumVector<T> {
    pub qx: T,
    pub qy: T,
    pub qz: T,
}

impl<T: Real> MomentumVector<T> {
    pub fn new(qx: T, qy: T, qz: T) -> Self {
        Self { qx, qy, qz }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn along_z(q: T) -> Self {
        Self::new(T::zero(), T::zero(), q)
    }

    /// Vector of length `q_mag` at polar angle `theta` from z and azimuth `phi`.
    pub fn from_polar(q_mag: T, theta: T, phi: T) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(q_mag * st * cp, q_mag * st * sp, q_mag * ct)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.qx * other.qx + self.qy * other.qy + self.qz * other.qz
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.qy * other.qz - self.qz * other.qy,
            self.qz * other.qx - self.qx * other.qz,
            self.qx * other.qy - self.qy * other.qx,
        )
    }

    /// Squared transverse magnitude qx² + qy².
    pub fn perp_sqr(&self) -> T {
        self.qx * self.qx + self.qy * self.qy
    }

    pub fn is_finite(&self) -> bool {
        self.qx.is_finite() && self.qy.is_finite() && self.qz.is_finite()
    }
}

impl<T: Real> Add for MomentumVector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.qx + rhs.qx, self.qy + rhs.qy, self.qz + rhs.qz)
    }
}

impl<T: Real> Sub for MomentumVector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.qx - rhs.qx, self.qy - rhs.qy, self.qz - rhs.qz)
    }
}

impl<T: Real> Neg for MomentumVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.qx, -self.qy, -self.qz)
    }
}

impl<T: Real> Mul<T> for MomentumVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.qx * s, self.qy * s, self.qz * s)
    }
}

/// Free-particle dispersion ω(q) = |q|²/2.
pub fn dispersion<T: Real>(q: &MomentumVector<T>) -> T {
    q.norm_sqr() / T::lit(2.0)
}

/// Energy mismatch Δ = ω(q) + ω(q′) − 2δ of a (+1, −1) pair.
pub fn energy_mismatch<T: Real>(
    q: &MomentumVector<T>,
    q_prime: &MomentumVector<T>,
    params: &ModelParams<T>,
) -> T {
    dispersion(q) + dispersion(q_prime) - T::lit(2.0) * params.detuning()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type V = MomentumVector<f64>;

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(&V::zero()), 0.0);
        assert_eq!(dispersion(&V::new(0.0, 0.0, 2.0)), 2.0);
        assert_eq!(dispersion(&V::new(1.0, 1.0, 1.0)), 1.5);
    }

    #[test]
    fn energy_mismatch_values() {
        let p2 = ModelParams::new(2.0, 1.0).unwrap();
        let on_shell = V::along_z(2.0f64.sqrt() * 2.0f64.sqrt());
        assert!(energy_mismatch(&on_shell, &on_shell, &p2).abs() < 1e-14);

        let p1 = ModelParams::new(1.0, 1.0).unwrap();
        assert_eq!(energy_mismatch(&V::zero(), &V::zero(), &p1), -2.0);

        let q = V::along_z(2.0);
        assert_eq!(energy_mismatch(&q, &-q, &p2), 0.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(CondensateGeometry::new(10.0, 1.0, 100).is_ok());
        assert!(CondensateGeometry::new(0.0, 1.0, 100).is_err());
        assert!(CondensateGeometry::new(1.0, -1.0, 100).is_err());
        assert!(CondensateGeometry::new(f64::INFINITY, 1.0, 100).is_err());
        assert!(CondensateGeometry::new(1.0, 1.0, 1).is_err());
        let g = CondensateGeometry::new(20.0, 2.0, 10).unwrap();
        assert_eq!(g.aspect_ratio(), 10.0);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        let p = ModelParams::symmetric_shell(10.0, 1.0).unwrap();
        assert_eq!(p.detuning(), 50.0);
    }

    #[test]
    fn works_in_single_precision() {
        let q = MomentumVector::<f32>::new(1.0, 1.0, 1.0);
        assert_eq!(dispersion(&q), 1.5f32);
    }

    fn rotate(v: V, axis: V, angle: f64) -> V {
        // Rodrigues' formula.
        let k = axis * (1.0 / axis.norm());
        let (s, c) = angle.sin_cos();
        v * c + k.cross(&v) * s + k * (k.dot(&v) * (1.0 - c))
    }

    proptest! {
        #[test]
        fn dispersion_is_rotation_invariant(
            qx in -50.0..50.0f64, qy in -50.0..50.0f64, qz in -50.0..50.0f64,
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.1..1.0f64,
            angle in 0.0..std::f64::consts::TAU,
        ) {
            let q = V::new(qx, qy, qz);
            let r = rotate(q, V::new(ax, ay, az), angle);
            let scale = 1.0f64.max(dispersion(&q));
            prop_assert!((dispersion(&r) - dispersion(&q)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn energy_mismatch_is_symmetric(
            a in proptest::array::uniform3(-20.0..20.0f64),
            b in proptest::array::uniform3(-20.0..20.0f64),
            delta in 0.01..100.0f64,
        ) {
            let p = ModelParams::new(delta, 1.0).unwrap();
            let q = V::new(a[0], a[1], a[2]);
            let qp = V::new(b[0], b[1], b[2]);
            prop_assert_eq!(energy_mismatch(&q, &qp, &p), energy_mismatch(&qp, &q, &p));
        }
    }
}
