//! Kuramoto vector fields for evenly spaced natural frequencies.
//!
//! Node indices are 1-based in the documentation and 0-based in code. The
//! middle node `n0 + 1` is the reference oscillator of the reduced
//! coordinates `v`, which hold the phase differences of the remaining `2 n0`
//! nodes relative to it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Model parameters: node count, frequency slope and coupling strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelConfig {
    n: usize,
    a: f64,
    k: f64,
}

impl ModelConfig {
    /// `n` must be odd and at least 3; `a` and `k` must be positive and finite.
    pub fn new(n: usize, a: f64, k: f64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Config(format!("n = {n} must be odd and >= 3")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!("frequency slope a = {a} must be positive")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Config(format!("coupling K = {k} must be positive")));
        }
        Ok(Self { n, a, k })
    }

    /// Builds a configuration from the ratio `K/a`.
    pub fn from_ratio(n: usize, a: f64, k_over_a: f64) -> Result<Self> {
        Self::new(n, a, k_over_a * a)
    }

    /// Builds a configuration with `a/K = beta`.
    pub fn from_beta(n: usize, a: f64, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Config(format!("a/K = {beta} must be positive")));
        }
        Self::new(n, a, a / beta)
    }

    /// Same model with `n0` half-width, i.e. `n = 2 n0 + 1`.
    pub fn with_n0(n0: usize, a: f64, k: f64) -> Result<Self> {
        Self::new(2 * n0 + 1, a, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n0(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Frequency spacing `a / n`.
    pub fn nu(&self) -> f64 {
        self.a / self.n as f64
    }

    /// Dimensionless control ratio `a / K`.
    pub fn beta(&self) -> f64 {
        self.a / self.k
    }

    /// Returns a copy with a different coupling strength.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.n, self.a, k)
    }
}

/// Natural frequencies `omega_i = a (2i - n - 1) / (2n)` and their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyProfile {
    pub omegas: Vec<f64>,
    pub omega_d: f64,
}

impl FrequencyProfile {
    pub fn evenly_spaced(cfg: &ModelConfig) -> Self {
        let n = cfg.n() as f64;
        let omegas: Vec<f64> = (1..=cfg.n())
            .map(|i| cfg.a() * (2.0 * i as f64 - n - 1.0) / (2.0 * n))
            .collect();
        let omega_d = omegas.iter().sum::<f64>() / n;
        Self { omegas, omega_d }
    }
}

/// Frequency function of the continuum limit, `omega(x) = a (x - 1/2)`.
pub fn frequency_function(a: f64, x: f64) -> f64 {
    a * (x - 0.5)
}

/// Index offset `i - n0 - 1` (for `i <= n0`) or `i - n0` (for `i > n0`) of
/// reduced coordinate `i` (1-based), i.e. the signed rank of the node
/// relative to the reference oscillator.
#[inline]
pub fn reduced_offset(i: usize, n0: usize) -> i64 {
    if i <= n0 {
        i as i64 - n0 as i64 - 1
    } else {
        i as i64 - n0 as i64
    }
}

/// Full node index (0-based) carrying reduced coordinate `k` (0-based).
#[inline]
pub fn full_index(k: usize, n0: usize) -> usize {
    if k < n0 {
        k
    } else {
        k + 1
    }
}

/// A phase configuration, either all `n` phases or the `2 n0` differences
/// to the reference oscillator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PhaseState {
    Full(Vec<f64>),
    Reduced(Vec<f64>),
}

impl PhaseState {
    /// Reduced coordinates `v_i = u_i - u_{n0+1}` (skipping the reference),
    /// each wrapped to `(-pi, pi]`.
    pub fn to_reduced(&self) -> Result<Vec<f64>> {
        match self {
            PhaseState::Reduced(v) => Ok(v.clone()),
            PhaseState::Full(u) => reduce(u),
        }
    }

    /// Full state with the reference oscillator at angle `theta`.
    pub fn to_full(&self, theta: f64) -> Vec<f64> {
        match self {
            PhaseState::Full(u) => u.clone(),
            PhaseState::Reduced(v) => lift(v, theta),
        }
    }
}

/// Reduced coordinates of a full state.
pub fn reduce(u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Config(format!("full state length {n} must be odd and >= 3")));
    }
    let n0 = (n - 1) / 2;
    let reference = u[n0];
    Ok((0..2 * n0)
        .map(|k| wrap_angle(u[full_index(k, n0)] - reference))
        .collect())
}

/// Full state from reduced coordinates with the reference oscillator at
/// `theta`; angles are wrapped to `(-pi, pi]`.
pub fn lift(v: &[f64], theta: f64) -> Vec<f64> {
    let n0 = v.len() / 2;
    let mut u = Vec::with_capacity(2 * n0 + 1);
    u.extend(v[..n0].iter().map(|&x| wrap_angle(x + theta)));
    u.push(wrap_angle(theta));
    u.extend(v[n0..].iter().map(|&x| wrap_angle(x + theta)));
    u
}

/// Lift without wrapping; the reference oscillator sits at exactly zero.
pub(crate) fn lift_raw(v: &[f64]) -> Vec<f64> {
    let n0 = v.len() / 2;
    let mut u = Vec::with_capacity(2 * n0 + 1);
    u.extend_from_slice(&v[..n0]);
    u.push(0.0);
    u.extend_from_slice(&v[n0..]);
    u
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// Right-hand side of the full Kuramoto model,
/// `du_i/dt = omega_i + (K/n) sum_j sin(u_j - u_i)`.
///
/// Each pair is evaluated once and added with opposite signs, so the coupling
/// contributions cancel exactly in the sum over components.
pub fn km_vector_field(u: &[f64], cfg: &ModelConfig, freq: &FrequencyProfile) -> Result<Vec<f64>> {
    let n = cfg.n();
    check_len(u.len(), n)?;
    check_len(freq.omegas.len(), n)?;
    let mut out = vec![0.0; n];
    km_vector_field_into(u, cfg.k() / n as f64, &freq.omegas, &mut out);
    Ok(out)
}

/// Allocation-free kernel of [`km_vector_field`]; `scale = K / n`.
pub(crate) fn km_vector_field_into(u: &[f64], scale: f64, omegas: &[f64], out: &mut [f64]) {
    let n = u.len();
    let mut coupling = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (u[j] - u[i]).sin();
            coupling[i] += s;
            coupling[j] -= s;
        }
    }
    for i in 0..n {
        out[i] = omegas[i] + scale * coupling[i];
    }
}

/// Right-hand side of the reduced system for the phase differences `v`.
pub fn reduced_vector_field(v: &[f64], cfg: &ModelConfig) -> Result<Vec<f64>> {
    let n0 = cfg.n0();
    check_len(v.len(), 2 * n0)?;
    let scale = cfg.k() / cfg.n() as f64;
    let nu = cfg.nu();
    let sines: Vec<f64> = v.iter().map(|x| x.sin()).collect();
    let sin_total: f64 = sines.iter().sum();
    Ok((0..2 * n0)
        .map(|i| {
            let mut coupling = 2.0 * sines[i];
            for j in 0..2 * n0 {
                if j != i {
                    coupling -= (v[j] - v[i]).sin();
                }
            }
            // sum_{j != i} sin v_j = sin_total - sin v_i
            coupling += sin_total - sines[i];
            reduced_offset(i + 1, n0) as f64 * nu - scale * coupling
        })
        .collect())
}

/// Jacobian of the full vector field at the lift of `v` (reference phase 0).
///
/// The matrix is `n x n`, symmetric, and annihilates `(1, ..., 1)`; row and
/// column `n0` (0-based) belong to the reference oscillator.
pub fn km_jacobian(v: &[f64], cfg: &ModelConfig) -> Result<Vec<Vec<f64>>> {
    check_len(v.len(), 2 * cfg.n0())?;
    Ok(jacobian_of_full(&lift_raw(v), cfg.k() / cfg.n() as f64))
}

/// Jacobian of the full vector field at an arbitrary full state.
pub fn km_jacobian_full(u: &[f64], cfg: &ModelConfig) -> Result<Vec<Vec<f64>>> {
    check_len(u.len(), cfg.n())?;
    Ok(jacobian_of_full(u, cfg.k() / cfg.n() as f64))
}

fn jacobian_of_full(u: &[f64], scale: f64) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = scale * (u[j] - u[i]).cos();
            a[i][j] = c;
            a[j][i] = c;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j]).sum();
        a[i][i] = -off;
    }
    a
}

/// Jacobian of the reduced vector field (`2 n0 x 2 n0`), obtained from the
/// full Jacobian by differencing against the reference row.
pub fn reduced_jacobian(v: &[f64], cfg: &ModelConfig) -> Result<Vec<Vec<f64>>> {
    let n0 = cfg.n0();
    let full = km_jacobian(v, cfg)?;
    Ok((0..2 * n0)
        .map(|i| {
            let fi = full_index(i, n0);
            (0..2 * n0)
                .map(|k| {
                    let fk = full_index(k, n0);
                    full[fi][fk] - full[n0][fk]
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(n: usize, a: f64, k: f64) -> ModelConfig {
        ModelConfig::new(n, a, k).unwrap()
    }

    #[test]
    fn config_rejects_even_and_small_n() {
        assert!(ModelConfig::new(4, 1.0, 1.0).is_err());
        assert!(ModelConfig::new(1, 1.0, 1.0).is_err());
        assert!(ModelConfig::new(3, 0.0, 1.0).is_err());
        assert!(ModelConfig::new(3, 1.0, -1.0).is_err());
        let c = cfg(5, 2.0, 4.0);
        assert_eq!(c.n0(), 2);
        assert_abs_diff_eq!(c.nu() * 5.0, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta() * c.k(), c.a(), epsilon = 1e-15);
    }

    #[test]
    fn frequencies_are_antisymmetric_with_zero_mean() {
        let c = cfg(11, 1.7, 1.0);
        let f = FrequencyProfile::evenly_spaced(&c);
        for i in 0..11 {
            assert_eq!(f.omegas[i], -f.omegas[10 - i]);
        }
        assert!(f.omega_d.abs() < 1e-15);
        assert_abs_diff_eq!(f.omegas[0], -1.7 * 10.0 / 22.0, epsilon = 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn synchronized_identical_oscillators_are_fixed() {
        let c = cfg(5, 1e-300, 1.0);
        let f = FrequencyProfile { omegas: vec![0.0; 5], omega_d: 0.0 };
        let out = km_vector_field(&[0.4; 5], &c, &f).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn n3_field_matches_direct_summation() {
        // term-by-term evaluation of the n = 3 system
        let c = cfg(3, 1.0, 1.0);
        let f = FrequencyProfile::evenly_spaced(&c);
        let u: [f64; 3] = [0.1, 0.2, 0.3];
        let nu = 1.0 / 3.0;
        let k3 = 1.0 / 3.0;
        let expected = [
            -nu + k3 * ((u[1] - u[0]).sin() + (u[2] - u[0]).sin()),
            k3 * ((u[0] - u[1]).sin() + (u[2] - u[1]).sin()),
            nu + k3 * ((u[0] - u[2]).sin() + (u[1] - u[2]).sin()),
        ];
        let got = km_vector_field(&u, &c, &f).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(got[i], expected[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_form_synchronized_state_is_stationary() {
        // C_D solves C = (1/n) sum sqrt(1 - (omega_i / (K C))^2) by fixed-point iteration
        let c = cfg(7, 1.0, 2.0);
        let f = FrequencyProfile::evenly_spaced(&c);
        let mut cd: f64 = 1.0;
        for _ in 0..200 {
            cd = f
                .omegas
                .iter()
                .map(|w| (1.0 - (w / (c.k() * cd)).powi(2)).sqrt())
                .sum::<f64>()
                / 7.0;
        }
        let u: Vec<f64> = f.omegas.iter().map(|w| (w / (c.k() * cd)).asin() + 0.3).collect();
        let out = km_vector_field(&u, &c, &f).unwrap();
        assert!(out.iter().all(|x| x.abs() < 1e-12), "{out:?}");
    }

    #[test]
    fn dimension_errors() {
        let c = cfg(5, 1.0, 1.0);
        let f = FrequencyProfile::evenly_spaced(&c);
        assert!(matches!(
            km_vector_field(&[0.0; 4], &c, &f),
            Err(Error::Dimension { expected: 5, got: 4 })
        ));
        assert!(reduced_vector_field(&[0.0; 3], &c).is_err());
        assert!(km_jacobian(&[0.0; 5], &c).is_err());
    }

    #[test]
    fn n3_reduced_equilibrium_from_cubic_relation() {
        // v = (-v2, v2) with sin v2 (1 + 2 cos v2) = a/K
        let v2: f64 = 0.7;
        let beta = v2.sin() * (1.0 + 2.0 * v2.cos());
        let c = ModelConfig::from_beta(3, 1.0, beta).unwrap();
        let out = reduced_vector_field(&[-v2, v2], &c).unwrap();
        assert!(out.iter().all(|x| x.abs() < 1e-14), "{out:?}");
    }

    #[test]
    fn jacobian_at_sync_point() {
        let c = cfg(5, 1.0, 2.0);
        let a = km_jacobian(&[0.0; 4], &c).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { 2.0 / 5.0 * (1.0 - 5.0) } else { 2.0 / 5.0 };
                assert_abs_diff_eq!(a[i][j], expected, epsilon = 1e-15);
            }
        }
    }

    fn angles(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-PI..PI, len)
    }

    proptest! {
        #[test]
        fn equivariant_under_global_shift(u in angles(7), theta in -PI..PI) {
            let c = cfg(7, 1.3, 0.9);
            let f = FrequencyProfile::evenly_spaced(&c);
            let base = km_vector_field(&u, &c, &f).unwrap();
            let shifted: Vec<f64> = u.iter().map(|x| x + theta).collect();
            let moved = km_vector_field(&shifted, &c, &f).unwrap();
            for (x, y) in base.iter().zip(&moved) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn components_sum_to_zero(u in angles(9)) {
            let c = cfg(9, 2.0, 1.1);
            let f = FrequencyProfile::evenly_spaced(&c);
            let out = km_vector_field(&u, &c, &f).unwrap();
            prop_assert!(out.iter().sum::<f64>().abs() < 1e-14);
        }

        #[test]
        fn reduced_field_is_difference_of_full_field(v in angles(6), theta in -PI..PI) {
            let c = cfg(7, 1.0, 1.7);
            let f = FrequencyProfile::evenly_spaced(&c);
            let u = lift(&v, theta);
            let full = km_vector_field(&u, &c, &f).unwrap();
            let red = reduced_vector_field(&v, &c).unwrap();
            for k in 0..6 {
                let diff = full[full_index(k, 3)] - full[3];
                prop_assert!((diff - red[k]).abs() < 1e-12, "{} vs {}", diff, red[k]);
            }
        }

        #[test]
        fn reduce_inverts_lift(v in angles(4), theta in -PI..PI) {
            let u = lift(&v, theta);
            let back = reduce(&u).unwrap();
            for (x, y) in v.iter().zip(&back) {
                prop_assert!(wrap_angle(x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn jacobian_matches_central_differences(v in angles(4)) {
            let c = cfg(5, 1.0, 1.3);
            let f = FrequencyProfile::evenly_spaced(&c);
            let a = km_jacobian(&v, &c).unwrap();
            let u = lift_raw(&v);
            let h = 1e-6;
            for j in 0..5 {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[j] += h;
                dn[j] -= h;
                let fp = km_vector_field(&up, &c, &f).unwrap();
                let fm = km_vector_field(&dn, &c, &f).unwrap();
                for i in 0..5 {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    prop_assert!((fd - a[i][j]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn jacobian_symmetric_with_zero_row_sums(v in angles(6)) {
            let c = cfg(7, 1.0, 2.5);
            let a = km_jacobian(&v, &c).unwrap();
            for i in 0..7 {
                for j in 0..7 {
                    prop_assert_eq!(a[i][j].to_bits(), a[j][i].to_bits());
                }
                prop_assert!(a[i].iter().sum::<f64>().abs() < 1e-14);
            }
        }
    }
}
