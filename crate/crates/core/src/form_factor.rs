//! Condensate form factor: Fourier transform of the squared density |φ|⁴.
//!
//! For φ(r) ∝ exp[−z²/(2σ_z²) − (x²+y²)/(2σ⊥²)] the density-squared is a
//! Gaussian with variance σ²/4 per axis, so its normalized transform is
//!
//! ρ̄(k) = exp[−(k_z²σ_z² + (k_x²+k_y²)σ⊥²)/8],   k = q + q′.
//!
//! The quadrature path evaluates the Fourier integral directly and serves as
//! the independent check of the closed form.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{CondensateGeometry, MomentumVector};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Normalized form factor evaluated for a pair (q, q′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactorResult<T> {
    /// ρ̄(q + q′) ∈ [0, 1].
    pub value: T,
    /// Combined momentum q + q′.
    pub k: MomentumVector<T>,
}

/// Closed-form ρ̄(k) for the Gaussian condensate.
pub fn form_factor_closed<T: Real>(geom: &CondensateGeometry<T>, k: &MomentumVector<T>) -> T {
    (-exponent(geom, k) / T::lit(8.0)).exp()
}

/// |ρ̄(k)|², the weight entering the gain integral.
pub fn form_factor_sq<T: Real>(geom: &CondensateGeometry<T>, k: &MomentumVector<T>) -> T {
    (-exponent(geom, k) / T::lit(4.0)).exp()
}

fn exponent<T: Real>(geom: &CondensateGeometry<T>, k: &MomentumVector<T>) -> T {
    let sz = geom.sigma_z();
    let sp = geom.sigma_perp();
    k.qz * k.qz * sz * sz + k.perp_sqr() * sp * sp
}

/// ρ̄ for an explicit momentum pair.
pub fn form_factor<T: Real>(
    geom: &CondensateGeometry<T>,
    q: &MomentumVector<T>,
    q_prime: &MomentumVector<T>,
) -> FormFactorResult<T> {
    let k = *q + *q_prime;
    FormFactorResult {
        value: form_factor_closed(geom, &k),
        k,
    }
}

/// Tensor-product Gauss–Legendre grid for the direct Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    /// Starting node count per axis.
    pub nodes_per_axis: usize,
    /// Integration half-width per axis, in units of that axis' σ.
    pub half_width_sigmas: f64,
    /// Largest allowed change of the result when the node count doubles.
    pub tolerance: f64,
    /// Node count per axis beyond which refinement gives up.
    pub max_nodes: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            nodes_per_axis: 64,
            half_width_sigmas: 5.0,
            tolerance: 1e-10,
            max_nodes: 4096,
        }
    }
}

/// Direct quadrature of ρ̄(k) = ∫|φ|⁴e^{−ik·r} d³r / ∫|φ|⁴ d³r.
///
/// The node count doubles until two successive estimates agree within
/// `grid.tolerance`. The density is separable, so the tensor-product sum is
/// evaluated as a product of per-axis sums (identical arithmetic content,
/// O(n) instead of O(n³)).
pub fn form_factor_quad<T: Real>(
    geom: &CondensateGeometry<T>,
    k: &MomentumVector<T>,
    grid: &QuadratureGrid,
) -> Result<T> {
    if grid.nodes_per_axis == 0 || grid.max_nodes < grid.nodes_per_axis {
        return Err(Error::invalid(
            "grid",
            "node counts must satisfy 0 < nodes_per_axis <= max_nodes",
        ));
    }
    if !(grid.half_width_sigmas > 0.0) {
        return Err(Error::invalid("grid", "half_width_sigmas must be > 0"));
    }
    let tol = T::lit(grid.tolerance);
    let mut n = grid.nodes_per_axis;
    let mut coarse = tensor_product_estimate(geom, k, grid.half_width_sigmas, n)?;
    let mut change = T::infinity();
    while 2 * n <= grid.max_nodes {
        n *= 2;
        let fine = tensor_product_estimate(geom, k, grid.half_width_sigmas, n)?;
        change = (fine - coarse).abs();
        if change <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NonConvergent {
        what: "form factor quadrature",
        change: change.to_f64().unwrap_or(f64::INFINITY),
        tolerance: grid.tolerance,
    })
}

fn tensor_product_estimate<T: Real>(
    geom: &CondensateGeometry<T>,
    k: &MomentumVector<T>,
    half_width_sigmas: f64,
    n: usize,
) -> Result<T> {
    let rule = GaussLegendre::cached(n);
    let ix = axis_transform(&rule, geom.sigma_perp(), k.qx, half_width_sigmas);
    let iy = axis_transform(&rule, geom.sigma_perp(), k.qy, half_width_sigmas);
    let iz = axis_transform(&rule, geom.sigma_z(), k.qz, half_width_sigmas);
    let total = ix * iy * iz;
    if total.im.abs() > T::lit(1e-10) {
        return Err(Error::ImaginaryResidual(
            total.im.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(total.re)
}

/// Normalized 1D transform ∫ e^{−2x²/σ²} e^{−ikx} dx / ∫ e^{−2x²/σ²} dx.
///
/// Real parts below the summation round-off floor are flushed to zero: the
/// sum cannot resolve them and the sign is noise.
fn axis_transform<T: Real>(
    rule: &GaussLegendre,
    sigma: T,
    k: T,
    half_width_sigmas: f64,
) -> Complex<T> {
    let a = T::lit(half_width_sigmas) * sigma;
    let two = T::lit(2.0);
    let mut norm = T::zero();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, w) in rule.mapped(-a, a) {
        let u = x / sigma;
        let f = w * (-two * u * u).exp();
        norm = norm + f;
        let (s, c) = (k * x).sin_cos();
        acc = acc + Complex::new(f * c, -f * s);
    }
    let mut out = acc / norm;
    let floor = T::epsilon() * T::count(rule.len());
    if out.re.abs() <= floor {
        out.re = T::zero();
    }
    out
}

/// ρ̄(q + q′)/ρ̄(0) at the near-back-to-back partner q′ = −0.9q.
///
/// Measures how sharply the form factor selects opposite momenta; it tends
/// to zero once |q|σ ≫ 1.
pub fn delta_function_limit_check<T: Real>(
    geom: &CondensateGeometry<T>,
    q: &MomentumVector<T>,
) -> T {
    let eps = T::lit(0.1);
    let q_prime = -(*q * (T::one() - eps));
    let at_pair = form_factor(geom, q, &q_prime).value;
    at_pair / form_factor_closed(geom, &MomentumVector::zero())
}
