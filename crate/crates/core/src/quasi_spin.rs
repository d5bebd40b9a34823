//! Quasi-spin statistics of the two-trap pair state.
//!
//! After the pump is converted, N atoms sit in two traps, N/2 each. Pairs
//! were created together, so a trap holding k spin-(+1) atoms on the left
//! forces N/2 − k on the right:
//!
//! |Ψ⟩ = Σ_m a_m |N/2, m⟩_l |N/2, −m⟩_r,   m = 2k − N/2.
//!
//! Lz⁽ⁱ⁾ = f(N₊⁽ⁱ⁾ − N₋⁽ⁱ⁾) with convention factor f (1 for the plain
//! population difference, 1/2 for spin-½ normalization). Every branch is an
//! eigenstate of the total Lz with eigenvalue f(m − m) = 0.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance for coefficient vectors.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Coefficients a_m of the anticorrelated two-trap state.
#[derive(Debug, Clone, PartialEq)]
pub struct EprState {
    n_total: u64,
    /// Indexed by k = (m + N/2)/2, k = 0..=N/2.
    coeffs: Vec<Complex64>,
}

/// Per-trap and total Lz moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinStats {
    pub mean_l: f64,
    pub mean_r: f64,
    pub mean_total: f64,
    pub var_l: f64,
    pub var_r: f64,
    pub var_total: f64,
    pub convention_factor: f64,
}

fn check_even(n_total: u64) -> Result<u64> {
    if n_total % 2 == 1 {
        return Err(Error::OddAtomNumber(n_total));
    }
    if n_total < 2 {
        return Err(Error::invalid(
            "n_total",
            format!("need at least 2 atoms, got {n_total}"),
        ));
    }
    Ok(n_total / 2)
}

fn check_norm(coeffs: &[Complex64]) -> Result<()> {
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Quasi-spin eigenvalue m = 2k − N/2 of branch k.
fn m_of(k: usize, half: u64) -> i64 {
    2 * k as i64 - half as i64
}

impl EprState {
    /// State from coefficients ordered by ascending m (−N/2, −N/2+2, …, N/2).
    pub fn new(n_total: u64, coeffs: Vec<Complex64>) -> Result<Self> {
        let half = check_even(n_total)?;
        if coeffs.len() as u64 != half + 1 {
            return Err(Error::invalid(
                "coeffs",
                format!(
                    "expected {} coefficients for N = {n_total}, got {}",
                    half + 1,
                    coeffs.len()
                ),
            ));
        }
        check_norm(&coeffs)?;
        Ok(Self { n_total, coeffs })
    }

    /// Each pair independently sends its +1 member left or right with equal
    /// amplitude: |a_m|² = C(N/2, k)/2^{N/2}, zero phases.
    pub fn binomial(n_total: u64) -> Result<Self> {
        let half = check_even(n_total)?;
        let coeffs = binomial_probabilities(half)
            .into_iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect();
        Ok(Self { n_total, coeffs })
    }

    /// Single branch a_m = 1.
    pub fn single_branch(n_total: u64, m: i64) -> Result<Self> {
        let half = check_even(n_total)?;
        let k = branch_index(m, half).map_err(|reason| Error::invalid("m", reason))?;
        let mut coeffs = vec![Complex64::default(); half as usize + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(Self { n_total, coeffs })
    }

    /// Parses `m real imag` lines (blank lines and `#` comments ignored).
    /// Branches not listed get a zero coefficient.
    pub fn parse(n_total: u64, text: &str) -> Result<Self> {
        let half = check_even(n_total)?;
        let mut coeffs = vec![Complex64::default(); half as usize + 1];
        let mut seen = vec![false; half as usize + 1];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |reason: String| Error::InvalidCoefficients { line, reason };
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(format!(
                    "expected `m real imag`, got {} fields",
                    fields.len()
                )));
            }
            let m: i64 = fields[0]
                .parse()
                .map_err(|_| bad(format!("m `{}` is not an integer", fields[0])))?;
            let re: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("real part `{}` is not a number", fields[1])))?;
            let im: f64 = fields[2]
                .parse()
                .map_err(|_| bad(format!("imaginary part `{}` is not a number", fields[2])))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad("coefficient is not finite".into()));
            }
            let k = branch_index(m, half).map_err(bad)?;
            if seen[k] {
                return Err(bad(format!("m = {m} listed twice")));
            }
            seen[k] = true;
            coeffs[k] = Complex64::new(re, im);
        }
        check_norm(&coeffs)?;
        Ok(Self { n_total, coeffs })
    }

    /// Serializes in the `m real imag` format accepted by [`EprState::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.branches() {
            writeln!(out, "{m} {:.17e} {:.17e}", c.re, c.im).expect("writing to String");
        }
        out
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn half(&self) -> u64 {
        self.n_total / 2
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// (m, a_m) pairs in ascending m.
    pub fn branches(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = self.half();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, c)| (m_of(k, half), *c))
    }

    /// Lz statistics of both traps and the whole system.
    pub fn lz_stats(&self, convention_factor: f64) -> Result<SpinStats> {
        check_norm(&self.coeffs)?;
        let f = convention_factor;
        let (mut m1, mut m2) = (0.0, 0.0);
        let (mut t1, mut t2) = (0.0, 0.0);
        for (m, c) in self.branches() {
            let p = c.norm_sqr();
            let left = f * m as f64;
            let right = f * (-m) as f64;
            // Total eigenvalue on the branch |m⟩_l|−m⟩_r.
            let total = f * (m + (-m)) as f64;
            m1 += p * left;
            m2 += p * left * left;
            t1 += p * total;
            t2 += p * total * total;
            debug_assert_eq!(left + right, total);
        }
        // Right trap carries −m on every branch: mirrored mean, same variance.
        let var_l = (m2 - m1 * m1).max(0.0);
        Ok(SpinStats {
            mean_l: m1,
            mean_r: -m1,
            mean_total: t1,
            var_l,
            var_r: var_l,
            var_total: t2 - t1 * t1,
            convention_factor: f,
        })
    }

    /// Total-Lz variance relative to N independent atoms.
    pub fn squeezing_ratio(&self, convention_factor: f64) -> Result<f64> {
        let stats = self.lz_stats(convention_factor)?;
        Ok(stats.var_total / product_state_variance(self.n_total, convention_factor))
    }
}

fn branch_index(m: i64, half: u64) -> std::result::Result<usize, String> {
    let h = half as i64;
    if m.abs() > h {
        return Err(format!("m = {m} outside [-{h}, {h}]"));
    }
    if (m + h) % 2 != 0 {
        return Err(format!("m = {m} does not share the parity of N/2 = {h}"));
    }
    Ok(((m + h) / 2) as usize)
}

/// C(n, k)/2ⁿ for k = 0..=n; exact for n ≤ 60.
fn binomial_probabilities(n: u64) -> Vec<f64> {
    if n <= 60 {
        let mut c: u64 = 1;
        let scale = (2.0f64).powi(-(n as i32));
        let mut out = Vec::with_capacity(n as usize + 1);
        for k in 0..=n {
            out.push(c as f64 * scale);
            if k < n {
                c = (c as u128 * (n - k) as u128 / (k + 1) as u128) as u64;
            }
        }
        out
    } else {
        let ln2 = std::f64::consts::LN_2;
        let mut ln_c = 0.0;
        let mut out: Vec<f64> = (0..=n)
            .map(|k| {
                if k > 0 {
                    ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
                }
                (ln_c - n as f64 * ln2).exp()
            })
            .collect();
        // The running log sum drifts by a few ulps per step.
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        out
    }
}

/// (ΔLz)² for N independent atoms in (|+1⟩ + |−1⟩)/√2: f²·N.
pub fn product_state_variance(n_total: u64, convention_factor: f64) -> f64 {
    convention_factor * convention_factor * n_total as f64
}

/// General two-trap state with joint amplitudes over (m_l, m_r).
///
/// Used for contrast with the anticorrelated pair state, e.g. the
/// uncorrelated product of two binomial traps.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrapState {
    half: u64,
    /// Row-major over (k_l, k_r).
    amps: Vec<Complex64>,
}

impl JointTrapState {
    /// |ψ_l⟩ ⊗ |ψ_r⟩ from per-trap coefficient vectors (ascending m).
    pub fn product(left: &[Complex64], right: &[Complex64]) -> Result<Self> {
        if left.len() != right.len() || left.is_empty() {
            return Err(Error::invalid(
                "coeffs",
                "traps need equally long, non-empty vectors",
            ));
        }
        check_norm(left)?;
        check_norm(right)?;
        let amps = left
            .iter()
            .flat_map(|l| right.iter().map(move |r| l * r))
            .collect();
        Ok(Self {
            half: left.len() as u64 - 1,
            amps,
        })
    }

    /// Embeds the anticorrelated state: amplitude a_m on (m, −m).
    pub fn from_epr(state: &EprState) -> Self {
        let d = state.coeffs().len();
        let mut amps = vec![Complex64::default(); d * d];
        for (k, c) in state.coeffs().iter().enumerate() {
            amps[k * d + (d - 1 - k)] = *c;
        }
        Self {
            half: state.half(),
            amps,
        }
    }

    pub fn n_total(&self) -> u64 {
        2 * self.half
    }

    pub fn lz_stats(&self, convention_factor: f64) -> Result<SpinStats> {
        check_norm(&self.amps)?;
        let f = convention_factor;
        let d = self.half as usize + 1;
        let mut s = [0.0f64; 6];
        for kl in 0..d {
            for kr in 0..d {
                let p = self.amps[kl * d + kr].norm_sqr();
                let l = f * m_of(kl, self.half) as f64;
                let r = f * m_of(kr, self.half) as f64;
                let t = l + r;
                s[0] += p * l;
                s[1] += p * l * l;
                s[2] += p * r;
                s[3] += p * r * r;
                s[4] += p * t;
                s[5] += p * t * t;
            }
        }
        Ok(SpinStats {
            mean_l: s[0],
            mean_r: s[2],
            mean_total: s[4],
            var_l: (s[1] - s[0] * s[0]).max(0.0),
            var_r: (s[3] - s[2] * s[2]).max(0.0),
            var_total: (s[5] - s[4] * s[4]).max(0.0),
            convention_factor: f,
        })
    }

    pub fn squeezing_ratio(&self, convention_factor: f64) -> Result<f64> {
        let stats = self.lz_stats(convention_factor)?;
        Ok(stats.var_total / product_state_variance(self.n_total(), convention_factor))
    }
}
