//! Exact evolution of one pump mode coupled to one (+1, −1) pair mode.
//!
//! Spin exchange converts two spin-0 atoms into a (+1, −1) pair, so starting
//! from N₀ pump atoms the dynamics stays in the pair basis
//! {|N₀ − 2n, n, n⟩ : 0 ≤ n ≤ N₀/2}. The Hamiltonian χ(ĉ₊†ĉ₋†ĉ₀ĉ₀ + h.c.)
//! is tridiagonal there:
//!
//! ⟨n+1|H|n⟩ = χ (n+1) √((N₀−2n)(N₀−2n−1)).
//!
//! Replacing ĉ₀ĉ₀ by N₀ gives the undepleted two-mode squeezer with
//! occupation sinh²(N₀χt), i.e. amplification rate Γ = 2N₀χ.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// State |N₀ − 2n, n, n⟩ of the pair basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairBasisState {
    pub n0_atoms: u64,
    pub n_pairs: u64,
}

impl PairBasisState {
    /// All atoms in the spin-0 pump.
    pub fn all_pump(n0: u64) -> Self {
        Self {
            n0_atoms: n0,
            n_pairs: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.n0_atoms + 2 * self.n_pairs
    }

    /// Occupations of the +1 and −1 modes; always equal.
    pub fn side_occupations(&self) -> (u64, u64) {
        (self.n_pairs, self.n_pairs)
    }
}

/// Real symmetric tridiagonal Hamiltonian in the pair basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHamiltonian {
    n0: u64,
    chi: f64,
    diag: Vec<f64>,
    off_diag: Vec<f64>,
}

/// Resonant pair Hamiltonian (Δ = 0) for `n0` atoms.
pub fn build_hamiltonian(n0: u64, chi: f64) -> Result<PairHamiltonian> {
    build_hamiltonian_detuned(n0, chi, 0.0)
}

/// Pair Hamiltonian with an optional diagonal detuning Δ·n.
pub fn build_hamiltonian_detuned(n0: u64, chi: f64, detuning: f64) -> Result<PairHamiltonian> {
    if n0 % 2 == 1 {
        return Err(Error::OddAtomNumber(n0));
    }
    if n0 < 2 {
        return Err(Error::invalid(
            "n0",
            format!("need at least 2 atoms, got {n0}"),
        ));
    }
    if !chi.is_finite() {
        return Err(Error::invalid("chi", "must be finite"));
    }
    if !detuning.is_finite() {
        return Err(Error::invalid("detuning", "must be finite"));
    }
    let pairs = n0 / 2;
    let diag = (0..=pairs).map(|n| detuning * n as f64).collect();
    let off_diag = (0..pairs)
        .map(|n| {
            let pump = (n0 - 2 * n) as f64;
            chi * (n + 1) as f64 * (pump * (pump - 1.0)).sqrt()
        })
        .collect();
    Ok(PairHamiltonian {
        n0,
        chi,
        diag,
        off_diag,
    })
}

impl PairHamiltonian {
    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Couplings ⟨n+1|H|n⟩, n = 0..N₀/2 − 1.
    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.off_diag[j]
            } else if j == i + 1 {
                self.off_diag[i]
            } else {
                0.0
            }
        })
    }

    /// y = H x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let d = self.dim();
        for i in 0..d {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.off_diag[i - 1];
            }
            if i + 1 < d {
                acc += x[i + 1] * self.off_diag[i];
            }
            y[i] = acc;
        }
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut h = vec![Complex64::default(); self.dim()];
        self.apply(psi, &mut h);
        psi.iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Gershgorin bounds on the spectrum.
    fn spectral_bounds(&self) -> (f64, f64) {
        let d = self.dim();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..d {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off_diag[i - 1].abs();
            }
            if i + 1 < d {
                radius += self.off_diag[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Largest |eigenvalue| bound, used as the energy scale.
    pub fn energy_scale(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }
}

/// Propagation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Largest tolerated |‖ψ‖² − 1| before reporting `NonUnitary`.
    pub norm_budget: f64,
    /// Dimensions up to this use the dense eigendecomposition; larger ones
    /// the Chebyshev propagator.
    pub dense_limit: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            norm_budget: 1e-8,
            dense_limit: 2000,
        }
    }
}

/// Amplitudes over the pair basis at each requested time.
#[derive(Debug, Clone)]
pub struct FockEvolution {
    pub hamiltonian: PairHamiltonian,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
}

impl FockEvolution {
    pub fn chi(&self) -> f64 {
        self.hamiltonian.chi()
    }

    /// Largest |‖ψ(t)‖² − 1| over the run.
    pub fn max_norm_drift(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| (norm_sqr(a) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum()
}

/// Exact evolution from `initial` with default options.
pub fn evolve(
    h: &PairHamiltonian,
    initial: PairBasisState,
    times: &[f64],
) -> Result<FockEvolution> {
    evolve_with(h, initial, times, &EvolveOptions::default())
}

pub fn evolve_with(
    h: &PairHamiltonian,
    initial: PairBasisState,
    times: &[f64],
    options: &EvolveOptions,
) -> Result<FockEvolution> {
    if initial.total() != h.n0() {
        return Err(Error::invalid(
            "initial",
            format!(
                "state holds {} atoms, Hamiltonian {}",
                initial.total(),
                h.n0()
            ),
        ));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("times", "times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "times must be sorted"));
    }
    let mut psi0 = vec![Complex64::default(); h.dim()];
    psi0[initial.n_pairs as usize] = Complex64::new(1.0, 0.0);

    let amplitudes = if h.dim() <= options.dense_limit {
        propagate_dense(h, &psi0, times)
    } else {
        propagate_chebyshev(h, &psi0, times)
    };
    let evolution = FockEvolution {
        hamiltonian: h.clone(),
        times: times.to_vec(),
        amplitudes,
    };
    let drift = evolution.max_norm_drift();
    if !(drift <= options.norm_budget) {
        return Err(Error::NonUnitary {
            drift,
            budget: options.norm_budget,
        });
    }
    Ok(evolution)
}

/// ψ(t) = V e^{−iEt} Vᵀ ψ(0) from the eigendecomposition of H.
fn propagate_dense(h: &PairHamiltonian, psi0: &[Complex64], times: &[f64]) -> Vec<Vec<Complex64>> {
    let eig = SymmetricEigen::new(h.to_dense());
    let v = &eig.eigenvectors;
    let d = h.dim();
    let overlaps: Vec<Complex64> = (0..d)
        .map(|k| (0..d).map(|i| psi0[i] * v[(i, k)]).sum())
        .collect();
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return psi0.to_vec();
            }
            let phased: Vec<Complex64> = overlaps
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
                .collect();
            (0..d)
                .map(|i| (0..d).map(|k| phased[k] * v[(i, k)]).sum())
                .collect()
        })
        .collect()
}

/// Largest r·dt per Chebyshev step.
const CHEBYSHEV_STEP: f64 = 20.0;

/// Chebyshev expansion of e^{−iHt} between consecutive output times.
fn propagate_chebyshev(
    h: &PairHamiltonian,
    psi0: &[Complex64],
    times: &[f64],
) -> Vec<Vec<Complex64>> {
    let (lo, hi) = h.spectral_bounds();
    let center = 0.5 * (hi + lo);
    let radius = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE) * 1.01;
    let mut psi = psi0.to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut remaining = t - now;
        while remaining > 0.0 {
            let dt = remaining.min(CHEBYSHEV_STEP / radius);
            psi = chebyshev_step(h, &psi, center, radius, dt);
            remaining -= dt;
        }
        now = t;
        out.push(psi.clone());
    }
    out
}

fn chebyshev_step(
    h: &PairHamiltonian,
    psi: &[Complex64],
    center: f64,
    radius: f64,
    dt: f64,
) -> Vec<Complex64> {
    let d = psi.len();
    let x = radius * dt;
    let bessel = bessel_j_sequence(x);
    let scaled = |src: &[Complex64], dst: &mut [Complex64]| {
        h.apply(src, dst);
        for (y, s) in dst.iter_mut().zip(src) {
            *y = (*y - s * center) / radius;
        }
    };
    let mut t_prev = psi.to_vec();
    let mut t_curr = vec![Complex64::default(); d];
    scaled(&t_prev, &mut t_curr);

    let mut acc: Vec<Complex64> = t_prev.iter().map(|c| c * bessel[0]).collect();
    let mut phase = Complex64::new(0.0, -1.0);
    for (y, c) in acc.iter_mut().zip(&t_curr) {
        *y += c * phase * (2.0 * bessel[1]);
    }
    let mut t_next = vec![Complex64::default(); d];
    for &jk in &bessel[2..] {
        scaled(&t_curr, &mut t_next);
        for i in 0..d {
            t_next[i] = t_next[i] * 2.0 - t_prev[i];
        }
        phase *= Complex64::new(0.0, -1.0);
        let coef = phase * (2.0 * jk);
        for (y, c) in acc.iter_mut().zip(&t_next) {
            *y += c * coef;
        }
        std::mem::swap(&mut t_prev, &mut t_curr);
        std::mem::swap(&mut t_curr, &mut t_next);
    }
    let global = Complex64::from_polar(1.0, -center * dt);
    acc.iter().map(|c| c * global).collect()
}

/// J₀(x), J₁(x), … up to the order where the terms fall below 1e-17,
/// by Miller's backward recurrence normalized with J₀ + 2ΣJ₂ₖ = 1.
pub(crate) fn bessel_j_sequence(x: f64) -> Vec<f64> {
    let x = x.abs();
    let order = (x + 12.0 * x.cbrt() + 30.0).ceil() as usize;
    let start = order + 30;
    let mut values = vec![0.0; start + 2];
    values[start + 1] = 0.0;
    values[start] = 1e-300;
    for k in (1..=start).rev() {
        values[k - 1] = if x == 0.0 {
            0.0
        } else {
            2.0 * k as f64 / x * values[k] - values[k + 1]
        };
        // Rescale to avoid overflow on the way down.
        if values[k - 1].abs() > 1e250 {
            for v in values[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    if x == 0.0 {
        return vec![1.0];
    }
    let norm = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    let mut out: Vec<f64> = values[..=order].iter().map(|v| v / norm).collect();
    while out.len() > 2 && out.last().is_some_and(|v| v.abs() < 1e-17) {
        out.pop();
    }
    out
}

/// Expectation values at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockObservables {
    pub t: f64,
    pub n0_mean: f64,
    pub n_pair_mean: f64,
    /// Var(N₊ − N₋); every basis state has N₊ = N₋.
    pub var_lz: f64,
    pub var_npair: f64,
    pub norm: f64,
    pub energy: f64,
}

pub fn observables(evolution: &FockEvolution) -> Vec<FockObservables> {
    let h = &evolution.hamiltonian;
    let n0 = h.n0() as f64;
    evolution
        .times
        .iter()
        .zip(&evolution.amplitudes)
        .map(|(&t, psi)| {
            let norm = norm_sqr(psi);
            let mut n_pair = 0.0;
            let mut n_pair_sq = 0.0;
            let mut lz = 0.0;
            let mut lz_sq = 0.0;
            for (n, c) in psi.iter().enumerate() {
                let p = c.norm_sqr() / norm;
                let state = PairBasisState {
                    n0_atoms: h.n0() - 2 * n as u64,
                    n_pairs: n as u64,
                };
                let (plus, minus) = state.side_occupations();
                let l = plus as f64 - minus as f64;
                n_pair += p * n as f64;
                n_pair_sq += p * (n * n) as f64;
                lz += p * l;
                lz_sq += p * l * l;
            }
            FockObservables {
                t,
                n0_mean: n0 - 2.0 * n_pair,
                n_pair_mean: n_pair,
                var_lz: lz_sq - lz * lz,
                var_npair: (n_pair_sq - n_pair * n_pair).max(0.0),
                norm,
                energy: h.expectation(psi),
            }
        })
        .collect()
}
