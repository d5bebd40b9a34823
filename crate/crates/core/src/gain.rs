//! Directional gain of the pair-creation process.
//!
//! The gain of mode q is a momentum integral of |ρ̄(q+q′)|² restricted to the
//! energy shell ω(q) + ω(q′) = 2δ. With ω = q²/2 the shell is a sphere of
//! radius q_s = √(4δ − q²) and the delta function reduces exactly:
//!
//! ∫d³q′ F(q′) δ(Δ) = q_s ∮ dΩ′ F(q_s n̂′).
//!
//! The overall 2πκ² prefactor is dropped; only shapes and ratios are used,
//! and absolute rates are fixed through `ModelParams::rate_ref`.
//!
//! The angular integral is taken in a frame whose pole points along −q̂,
//! where the back-to-back partner sits. The polar variable u = 1 − cos θ′ is
//! split into geometric panels starting at the narrowest angular feature
//! ~1/(q_s σ_max), each carrying a Gauss–Legendre rule; every ring is
//! integrated with the periodic trapezoid rule, doubled adaptively.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form_factor::form_factor_sq;
use crate::model::{CondensateGeometry, ModelParams, MomentumVector};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Relative convergence target for a single azimuthal ring.
const RING_TOLERANCE: f64 = 1e-10;

/// Angular quadrature settings for the shell integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularGrid {
    /// Total Gauss–Legendre nodes in cos θ′, spread over the polar panels.
    pub polar_nodes: usize,
    /// Starting trapezoid nodes in φ′ on every ring.
    pub azimuth_nodes: usize,
    /// Maximum number of azimuthal doublings per ring.
    pub refine_levels: u32,
    /// Allowed relative change when both node counts are doubled.
    pub tolerance: f64,
}

impl Default for AngularGrid {
    fn default() -> Self {
        Self {
            polar_nodes: 256,
            azimuth_nodes: 256,
            refine_levels: 3,
            tolerance: 1e-6,
        }
    }
}

impl AngularGrid {
    /// Same grid with both node counts multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            polar_nodes: self.polar_nodes * factor,
            azimuth_nodes: self.azimuth_nodes * factor,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.polar_nodes < 2 || self.azimuth_nodes < 4 || !self.azimuth_nodes.is_multiple_of(2) {
            return Err(Error::invalid(
                "angular_nodes",
                "need >= 2 polar nodes and an even azimuth count >= 4",
            ));
        }
        Ok(())
    }
}

/// One sample of a gain-versus-angle scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPoint<T> {
    /// Angle between q and the long (z) axis, radians.
    pub theta: T,
    pub q_mag: T,
    /// Reduced shell integral ĝ(q) ≥ 0.
    pub g_raw: T,
    /// ĝ divided by the scan maximum.
    pub g_normalized: T,
}

/// Quadrature bookkeeping attached to a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMeta {
    pub grid: AngularGrid,
    /// Largest relative change observed under node doubling.
    pub max_relative_change: f64,
}

/// Gain sampled over a list of angles at fixed |q|.
#[derive(Debug, Clone, PartialEq)]
pub struct GainScan<T> {
    pub geom: CondensateGeometry<T>,
    pub q_mag: T,
    pub detuning: T,
    pub points: Vec<GainPoint<T>>,
    pub quadrature_meta: QuadratureMeta,
}

impl<T: Real> GainScan<T> {
    /// First angle past the maximum at which the normalized gain drops to
    /// one half, linearly interpolated between samples.
    pub fn half_width(&self) -> Option<T> {
        let half = T::lit(0.5);
        let peak = self
            .points
            .iter()
            .position(|p| p.g_normalized == T::one())?;
        self.points[peak..].windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            (a.g_normalized > half && b.g_normalized <= half).then(|| {
                let frac = (a.g_normalized - half) / (a.g_normalized - b.g_normalized);
                a.theta + frac * (b.theta - a.theta)
            })
        })
    }

    /// Angle of the largest gain in the scan.
    pub fn peak_theta(&self) -> T {
        self.points
            .iter()
            .find(|p| p.g_normalized == T::one())
            .map(|p| p.theta)
            .expect("normalized scan contains its maximum")
    }
}

/// Partner momentum on the energy shell: q_s = √(4δ − |q|²).
pub fn shell_momentum<T: Real>(q_mag: T, params: &ModelParams<T>) -> Result<T> {
    if !(q_mag >= T::zero() && q_mag.is_finite()) {
        return Err(Error::invalid(
            "q_mag",
            format!("must be finite and >= 0, got {q_mag}"),
        ));
    }
    let limit = T::lit(4.0) * params.detuning();
    let q_sq = q_mag * q_mag;
    if q_sq > limit {
        return Err(Error::ClosedChannel {
            q_mag_sq: q_sq.to_f64().unwrap_or(f64::INFINITY),
            limit: limit.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    // |q| rebuilt from components carries a few ulps; treat that as touching.
    let gap = limit - q_sq;
    if gap <= T::lit(8.0) * T::epsilon() * limit {
        return Ok(T::zero());
    }
    Ok(gap.sqrt())
}

/// Reduced gain ĝ(q) = q_s ∮ dΩ′ |ρ̄(q + q_s n̂′)|².
///
/// Evaluated at `grid` and at twice its node counts; the finer value is
/// returned when the two agree to `grid.tolerance` (relative).
pub fn gain_at<T: Real>(
    geom: &CondensateGeometry<T>,
    params: &ModelParams<T>,
    q: &MomentumVector<T>,
    grid: &AngularGrid,
) -> Result<T> {
    gain_with_change(geom, params, q, grid).map(|(g, _)| g)
}

fn gain_with_change<T: Real>(
    geom: &CondensateGeometry<T>,
    params: &ModelParams<T>,
    q: &MomentumVector<T>,
    grid: &AngularGrid,
) -> Result<(T, f64)> {
    grid.validate()?;
    if !q.is_finite() {
        return Err(Error::invalid("q", "momentum components must be finite"));
    }
    let q_s = shell_momentum(q.norm(), params)?;
    let coarse = shell_integral(geom, q, q_s, grid);
    let fine = shell_integral(geom, q, q_s, &grid.scaled(2));
    let change = if fine > T::zero() {
        ((fine - coarse) / fine).abs()
    } else {
        coarse.abs()
    };
    let change = change.to_f64().unwrap_or(f64::INFINITY);
    if !(change <= grid.tolerance) {
        return Err(Error::NonConvergent {
            what: "gain shell integral",
            change,
            tolerance: grid.tolerance,
        });
    }
    Ok((fine, change))
}

/// Orthonormal frame (e1, e2, e3) with e3 = −q̂ and e2 ⟂ z.
///
/// Tying e2 to the z axis makes the frame co-rotate with q about z, so the
/// quadrature inherits the condensate's azimuthal symmetry exactly.
fn partner_frame<T: Real>(q: &MomentumVector<T>) -> [MomentumVector<T>; 3] {
    let qn = q.norm();
    let z = MomentumVector::along_z(T::one());
    if qn == T::zero() {
        return [
            MomentumVector::new(T::one(), T::zero(), T::zero()),
            MomentumVector::new(T::zero(), T::one(), T::zero()),
            z,
        ];
    }
    let e3 = -(*q * qn.recip());
    let c = z.cross(&e3);
    let cn = c.norm();
    if cn <= T::epsilon() {
        let e1 = MomentumVector::new(T::one(), T::zero(), T::zero());
        return [e1, e3.cross(&e1), e3];
    }
    let e2 = c * cn.recip();
    let e1 = e2.cross(&e3);
    [e1, e2, e3]
}

/// Polar panel edges in u = 1 − cos θ′, geometric from the finest scale.
fn polar_panels<T: Real>(geom: &CondensateGeometry<T>, q_s: T) -> Vec<T> {
    let two = T::lit(2.0);
    let theta0 = (q_s * geom.max_width()).recip();
    let mut edge = theta0 * theta0 / two;
    let mut edges = vec![T::zero()];
    while edge < T::lit(0.5) {
        edges.push(edge);
        edge = edge * T::lit(4.0);
    }
    edges.push(two);
    edges
}

fn shell_integral<T: Real>(
    geom: &CondensateGeometry<T>,
    q: &MomentumVector<T>,
    q_s: T,
    grid: &AngularGrid,
) -> T {
    if q_s == T::zero() {
        return T::zero();
    }
    let [e1, e2, e3] = partner_frame(q);
    let edges = polar_panels(geom, q_s);
    let panels = edges.len() - 1;
    let per_panel = grid.polar_nodes.div_ceil(panels).max(4);
    let rule = GaussLegendre::cached(per_panel);

    let mut total = T::zero();
    for w in edges.windows(2) {
        for (u, weight) in rule.mapped(w[0], w[1]) {
            let cos_t = T::one() - u;
            let sin_t = (u * (T::lit(2.0) - u)).max(T::zero()).sqrt();
            let ring = ring_integral(grid.azimuth_nodes, grid.refine_levels, |phi: T| {
                let (sp, cp) = phi.sin_cos();
                let n = e1 * (sin_t * cp) + e2 * (sin_t * sp) + e3 * cos_t;
                form_factor_sq(geom, &(*q + n * q_s))
            });
            total = total + weight * ring;
        }
    }
    q_s * total
}

/// ∫₀^{2π} f(φ) dφ by the trapezoid rule, doubling up to `levels` times.
fn ring_integral<T: Real>(nodes: usize, levels: u32, f: impl Fn(T) -> T) -> T {
    let two_pi = T::TAU();
    let mut n = nodes;
    let mut sum: T = (0..n).map(|j| f(two_pi * T::count(j) / T::count(n))).sum();
    let mut estimate = sum * two_pi / T::count(n);
    for _ in 0..levels {
        let mid: T = (0..n)
            .map(|j| f(two_pi * (T::count(2 * j + 1)) / T::count(2 * n)))
            .sum();
        sum = sum + mid;
        n *= 2;
        let refined = sum * two_pi / T::count(n);
        let change = (refined - estimate).abs();
        estimate = refined;
        if change <= T::lit(RING_TOLERANCE) * refined.abs() + T::min_positive_value() {
            break;
        }
    }
    estimate
}

/// Gain versus polar angle at fixed |q| = `q_mag`, with q = q_mag (sin θ, 0, cos θ).
///
/// Angles are evaluated in parallel and returned sorted by θ.
pub fn gain_scan_theta<T: Real>(
    geom: &CondensateGeometry<T>,
    params: &ModelParams<T>,
    q_mag: T,
    thetas: &[T],
    grid: &AngularGrid,
) -> Result<GainScan<T>> {
    if thetas.is_empty() {
        return Err(Error::invalid("thetas", "scan needs at least one angle"));
    }
    if let Some(bad) = thetas
        .iter()
        .find(|t| !(**t >= T::zero() && **t <= T::PI()))
    {
        return Err(Error::invalid(
            "thetas",
            format!("angle {bad} outside [0, pi]"),
        ));
    }
    shell_momentum(q_mag, params)?;
    let mut sorted = thetas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("angles are finite"));

    let raw: Vec<(T, f64)> = sorted
        .par_iter()
        .map(|&theta| {
            let q = MomentumVector::from_polar(q_mag, theta, T::zero());
            gain_with_change(geom, params, &q, grid)
        })
        .collect::<Result<_>>()?;

    let max = raw.iter().map(|(g, _)| *g).fold(T::zero(), T::max);
    if !(max > T::zero()) {
        return Err(Error::AllZeroScan);
    }
    let max_relative_change = raw.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    let points = sorted
        .iter()
        .zip(&raw)
        .map(|(&theta, &(g_raw, _))| GainPoint {
            theta,
            q_mag,
            g_raw,
            g_normalized: g_raw / max,
        })
        .collect();
    Ok(GainScan {
        geom: *geom,
        q_mag,
        detuning: params.detuning(),
        points,
        quadrature_meta: QuadratureMeta {
            grid: *grid,
            max_relative_change,
        },
    })
}

/// Physical amplification rate Γ_q = rate_ref · ĝ(q)/ĝ_ref for a
/// normalized gain value.
pub fn rate_for_mode<T: Real>(scan_value: T, params: &ModelParams<T>) -> T {
    debug_assert!(
        scan_value >= T::zero() && scan_value <= T::one(),
        "normalized gain outside [0, 1]"
    );
    params.rate_ref() * scan_value
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    type V = MomentumVector<f64>;

    fn geom(sz: f64) -> CondensateGeometry<f64> {
        CondensateGeometry::new(sz, 1.0, 1000).unwrap()
    }

    #[test]
    fn shell_momentum_examples() {
        let p = ModelParams::new(2.0, 1.0).unwrap();
        let q = (2.0f64 * 2.0).sqrt();
        assert!((shell_momentum(q, &p).unwrap() - q).abs() < 1e-15);
        assert!((shell_momentum(0.0, &p).unwrap() - 8.0f64.sqrt()).abs() < 1e-15);
        assert!((shell_momentum(0.0, &p).unwrap() - 2.8284).abs() < 1e-4);
        assert!(matches!(
            shell_momentum(3.0, &p),
            Err(Error::ClosedChannel { .. })
        ));
        assert!(shell_momentum(-1.0, &p).is_err());
    }

    #[test]
    fn isotropic_gain_is_direction_independent() {
        let g = geom(1.0);
        let p = ModelParams::symmetric_shell(3.0, 1.0).unwrap();
        let grid = AngularGrid::default();
        let a = gain_at(&g, &p, &V::along_z(3.0), &grid).unwrap();
        let b = gain_at(&g, &p, &V::from_polar(3.0, FRAC_PI_4, 0.3), &grid).unwrap();
        assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn isotropic_gain_matches_analytic_shell_integral() {
        // σ = 1, on the symmetric shell: |k|² = 2q²(1 − cos α), so
        // ĝ = q ∫ 2π e^{−q²(1−cos α)/2} d(cos α) = (4π/q)(1 − e^{−q²}).
        let g = geom(1.0);
        for q in [0.5, 2.0, 6.0] {
            let p = ModelParams::symmetric_shell(q, 1.0).unwrap();
            let got = gain_at(&g, &p, &V::along_z(q), &AngularGrid::default()).unwrap();
            let want = 4.0 * PI / q * (1.0 - (-q * q).exp());
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "q = {q}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn elongated_condensate_favours_axis() {
        let g = geom(10.0);
        let p = ModelParams::symmetric_shell(10.0, 1.0).unwrap();
        let grid = AngularGrid::default();
        let at = |t: f64| gain_at(&g, &p, &V::from_polar(10.0, t, 0.0), &grid).unwrap();
        let (a, b, c) = (at(0.0), at(FRAC_PI_4), at(FRAC_PI_2));
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn closed_channel_propagates() {
        let p = ModelParams::new(2.0, 1.0).unwrap();
        let err = gain_at(&geom(10.0), &p, &V::along_z(3.0), &AngularGrid::default());
        assert!(matches!(err, Err(Error::ClosedChannel { .. })));
    }

    #[test]
    fn coarse_grid_reports_non_convergence() {
        let grid = AngularGrid {
            polar_nodes: 2,
            azimuth_nodes: 4,
            refine_levels: 0,
            tolerance: 1e-6,
        };
        let p = ModelParams::symmetric_shell(40.0, 1.0).unwrap();
        let err = gain_at(&geom(20.0), &p, &V::from_polar(40.0, 1.2, 0.0), &grid);
        assert!(matches!(err, Err(Error::NonConvergent { .. })), "{err:?}");
    }

    #[test]
    fn isotropic_scan_is_flat() {
        let p = ModelParams::symmetric_shell(5.0, 1.0).unwrap();
        let thetas: Vec<f64> = (0..=18).map(|i| i as f64 * PI / 36.0).collect();
        let scan = gain_scan_theta(&geom(1.0), &p, 5.0, &thetas, &AngularGrid::default()).unwrap();
        assert!(scan
            .points
            .iter()
            .all(|pt| (pt.g_normalized - 1.0).abs() < 1e-9));
    }

    #[test]
    fn scan_sorts_and_validates_angles() {
        let p = ModelParams::symmetric_shell(4.0, 1.0).unwrap();
        let grid = AngularGrid::default();
        let scan = gain_scan_theta(&geom(3.0), &p, 4.0, &[1.0, 0.0, 0.5], &grid).unwrap();
        let ts: Vec<f64> = scan.points.iter().map(|p| p.theta).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0]);
        assert_eq!(scan.peak_theta(), 0.0);
        assert!(gain_scan_theta(&geom(3.0), &p, 4.0, &[], &grid).is_err());
        assert!(gain_scan_theta(&geom(3.0), &p, 4.0, &[4.0], &grid).is_err());
    }

    #[test]
    fn zero_shell_gives_all_zero_scan() {
        // |q|² = 4δ leaves the partner at rest: q_s = 0.
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let err = gain_scan_theta(&geom(3.0), &p, 2.0, &[0.0, 0.5], &AngularGrid::default());
        assert_eq!(err.unwrap_err(), Error::AllZeroScan);
    }

    #[test]
    fn touching_shell_survives_component_round_off() {
        let p = ModelParams::new(1.0, 1.0).unwrap();
        for deg in 0..=90 {
            let q = MomentumVector::from_polar(2.0, f64::from(deg).to_radians(), 0.0);
            assert_eq!(shell_momentum(q.norm(), &p).unwrap(), 0.0);
        }
        assert!(shell_momentum(1.999_999, &p).unwrap() > 0.0);
    }

    #[test]
    fn half_width_interpolates() {
        let mk = |theta: f64, g: f64| GainPoint {
            theta,
            q_mag: 1.0,
            g_raw: g,
            g_normalized: g,
        };
        let scan = GainScan {
            geom: geom(2.0),
            q_mag: 1.0,
            detuning: 0.5,
            points: vec![mk(0.0, 1.0), mk(0.1, 0.8), mk(0.2, 0.4)],
            quadrature_meta: QuadratureMeta {
                grid: AngularGrid::default(),
                max_relative_change: 0.0,
            },
        };
        assert!((scan.half_width().unwrap() - 0.175).abs() < 1e-12);
    }

    #[test]
    fn rate_for_mode_examples() {
        let p = ModelParams::new(1.0, 3.0).unwrap();
        assert_eq!(rate_for_mode(1.0, &p), 3.0);
        assert_eq!(rate_for_mode(0.0, &p), 0.0);
        let p = ModelParams::new(1.0, 2.0).unwrap();
        assert_eq!(rate_for_mode(0.5, &p), 1.0);
    }

    #[test]
    fn single_precision_scan_runs() {
        let g = CondensateGeometry::<f32>::new(5.0, 1.0, 100).unwrap();
        let p = ModelParams::<f32>::symmetric_shell(5.0, 1.0).unwrap();
        let grid = AngularGrid {
            tolerance: 1e-3,
            ..AngularGrid::default()
        };
        let scan = gain_scan_theta(&g, &p, 5.0, &[0.0, 0.3, 1.5], &grid).unwrap();
        assert!(scan.points[0].g_normalized > scan.points[2].g_normalized);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn azimuthal_symmetry(theta in 0.0..PI, phi in 0.0..std::f64::consts::TAU, sz in 1.5..8.0f64) {
            let g = geom(sz);
            let p = ModelParams::symmetric_shell(6.0, 1.0).unwrap();
            let grid = AngularGrid::default();
            let a = gain_at(&g, &p, &V::from_polar(6.0, theta, 0.0), &grid).unwrap();
            let b = gain_at(&g, &p, &V::from_polar(6.0, theta, phi), &grid).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-10);
        }

        #[test]
        fn reflection_symmetry(theta in 0.0..FRAC_PI_2, sz in 1.5..8.0f64) {
            let g = geom(sz);
            let p = ModelParams::symmetric_shell(6.0, 1.0).unwrap();
            let grid = AngularGrid::default();
            let a = gain_at(&g, &p, &V::from_polar(6.0, theta, 0.0), &grid).unwrap();
            let b = gain_at(&g, &p, &V::from_polar(6.0, PI - theta, 0.0), &grid).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(((a - b) / a).abs() < 1e-10);
        }
    }
}
