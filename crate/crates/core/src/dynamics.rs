//! Linearized pair dynamics with an undepleted spin-0 pump.
//!
//! Each side mode grows at its amplification rate Γ_q = N₀²G_q. Two
//! population laws are exposed:
//!
//! * the continuum Markov law n(t) = e^{Γt} − 1 with its pair correlation,
//! * the discrete two-mode squeeze law n(t) = sinh²(Γt/2) with Bogoliubov
//!   amplitudes u = cosh(Γt/2), v = −i sinh(Γt/2).
//!
//! Both share the asymptotic growth e^{Γt}; their prefactors differ by 4 and
//! at short times the Markov law is linear in t while the two-mode law is
//! quadratic. The exact few-mode oracle follows the two-mode law.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::form_factor::form_factor_closed;
use crate::model::{energy_mismatch, CondensateGeometry, ModelParams, MomentumVector};
use crate::scalar::Real;

/// Largest exponent accepted before reporting overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Occupations of a (+1, −1) mode pair at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePopulation<T> {
    pub t: T,
    pub rate: T,
    pub n_plus: T,
    pub n_minus: T,
}

/// Pair correlation ⟨ĉ₋₁,q ĉ₊₁,q′⟩ at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation<T> {
    pub q: MomentumVector<T>,
    pub q_prime: MomentumVector<T>,
    pub t: T,
    pub value: Complex<T>,
}

/// Bogoliubov amplitudes of the two-mode squeeze transformation
/// â(t) = u â(0) + v b̂†(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeCovariance<T> {
    pub u: Complex<T>,
    pub v: Complex<T>,
}

impl<T: Real> SqueezeCovariance<T> {
    /// |u|² − |v|², identically one for a valid transformation.
    ///
    /// Factored so the subtraction is exact; what remains is the rounding
    /// of u and v themselves, of order ε|u|².
    pub fn symplectic_invariant(&self) -> T {
        let (a, b) = (self.u.norm(), self.v.norm());
        (a - b) * (a + b)
    }

    /// Mean occupation ⟨â†â⟩ = |v|² from vacuum.
    pub fn occupation(&self) -> T {
        self.v.norm_sqr()
    }

    /// Pair amplitude ⟨âb̂⟩ = u v from vacuum.
    pub fn pair_amplitude(&self) -> Complex<T> {
        self.u * self.v
    }
}

fn check_rate_time<T: Real>(rate: T, t: T) -> Result<()> {
    if !(rate >= T::zero() && rate.is_finite()) {
        return Err(Error::invalid(
            "rate",
            format!("must be finite and >= 0, got {rate}"),
        ));
    }
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::invalid(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    Ok(())
}

fn check_exponent<T: Real>(x: T) -> Result<()> {
    if x > T::lit(MAX_EXPONENT) {
        return Err(Error::Overflow {
            exponent: x.to_f64().unwrap_or(f64::INFINITY),
            limit: MAX_EXPONENT,
        });
    }
    Ok(())
}

/// Continuum Markov population n(t) = e^{Γt} − 1.
pub fn population<T: Real>(rate: T, t: T) -> Result<T> {
    check_rate_time(rate, t)?;
    let x = rate * t;
    check_exponent(x)?;
    Ok(x.exp_m1())
}

/// Populations of both members of a pair; equal by construction.
pub fn mode_population<T: Real>(rate: T, t: T) -> Result<ModePopulation<T>> {
    let n = population(rate, t)?;
    Ok(ModePopulation {
        t,
        rate,
        n_plus: n,
        n_minus: n,
    })
}

/// Markov noise correlators (⟨f†f⟩, ⟨ff†⟩ strength) = (0, Γ).
pub fn noise_correlators<T: Real>(rate: T) -> (T, T) {
    (T::zero(), rate)
}

/// Two-mode squeeze amplitudes u = cosh(Γt/2), v = −i sinh(Γt/2).
pub fn evolve_covariance<T: Real>(rate: T, t: T) -> Result<SqueezeCovariance<T>> {
    check_rate_time(rate, t)?;
    check_exponent(rate * t)?;
    let r = rate * t / T::lit(2.0);
    Ok(SqueezeCovariance {
        u: Complex::new(r.cosh(), T::zero()),
        v: Complex::new(T::zero(), -r.sinh()),
    })
}

/// Two-mode squeeze occupation sinh²(Γt/2).
pub fn two_mode_population<T: Real>(rate: T, t: T) -> Result<T> {
    evolve_covariance(rate, t).map(|c| c.occupation())
}

/// Pair correlation of the linearized Markov solution:
///
/// C = −i A 𝒢_q(t) ρ̄(q+q′) [𝒢_q′(t) − e^{iΔt}] / (Γ_q′/2 − iΔ),
///
/// with 𝒢_x(t) = e^{Γ_x t/2}, Δ the pair energy mismatch and pump amplitude
/// A = rate_ref/2. That A makes the on-shell back-to-back correlation obey
/// |C|² → n(n+1) at long times for the reference mode.
pub fn correlation<T: Real>(
    geom: &CondensateGeometry<T>,
    params: &ModelParams<T>,
    q: &MomentumVector<T>,
    q_prime: &MomentumVector<T>,
    rates: (T, T),
    t: T,
) -> Result<PairCorrelation<T>> {
    let (rate_q, rate_qp) = rates;
    check_rate_time(rate_q, t)?;
    check_rate_time(rate_qp, t)?;
    check_exponent((rate_q + rate_qp) * t / T::lit(2.0))?;

    let half = T::lit(0.5);
    let delta = energy_mismatch(q, q_prime, params);
    let rho = form_factor_closed(geom, &(*q + *q_prime));
    let amplitude = params.rate_ref() * half;
    let envelope = (rate_q * t * half).exp();

    // 𝒢_q′ − e^{iΔt} = e^{iΔt}(e^{zt} − 1), z = Γ_q′/2 − iΔ.
    let z = Complex::new(rate_qp * half, -delta);
    let phase = Complex::new(T::zero(), delta * t).exp();
    let bracket = phase * expm1_over(z, t);

    let minus_i = Complex::new(T::zero(), -T::one());
    let value = minus_i * (amplitude * envelope * rho) * bracket;
    Ok(PairCorrelation {
        q: *q,
        q_prime: *q_prime,
        t,
        value,
    })
}

/// (e^{zt} − 1)/z, continuous through z = 0.
fn expm1_over<T: Real>(z: Complex<T>, t: T) -> Complex<T> {
    let zt = z * t;
    if zt.norm() < T::lit(1e-4) {
        // t (1 + zt/2 + (zt)²/6 + (zt)³/24)
        let one = Complex::new(T::one(), T::zero());
        let series = one + zt * (one / T::lit(2.0) + zt * (one / T::lit(6.0) + zt / T::lit(24.0)));
        return series * t;
    }
    (zt.exp() - Complex::new(T::one(), T::zero())) / z
}

/// Correlation of the reference back-to-back pair on the energy shell
/// (q′ = −q, Δ = 0, ρ̄ = 1, both rates equal to `rate_ref`):
/// C = −i e^{Γt/2}(e^{Γt/2} − 1).
pub fn onshell_correlation<T: Real>(params: &ModelParams<T>, t: T) -> Result<Complex<T>> {
    let rate = params.rate_ref();
    check_rate_time(rate, t)?;
    check_exponent(rate * t)?;
    let x = rate * t / T::lit(2.0);
    Ok(Complex::new(T::zero(), -(x.exp() * x.exp_m1())))
}

/// |C|²/[n(n+1)] for the reference on-shell pair; zero at t = 0 (limit).
pub fn onshell_correlation_ratio<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    let c = onshell_correlation(params, t)?;
    let n = population(params.rate_ref(), t)?;
    let denom = n * (n + T::one());
    Ok(if denom > T::zero() {
        c.norm_sqr() / denom
    } else {
        T::zero()
    })
}
