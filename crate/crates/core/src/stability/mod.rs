//! Spectral stability of equilibria.
//!
//! The Jacobian of the full Kuramoto field is symmetric, so its spectrum is
//! real and is computed with the cyclic Jacobi method. One eigenvalue is
//! always zero (the global phase shift); an equilibrium is called stable when
//! that is the only zero mode and all other eigenvalues are negative.

mod limit;

use serde::Serialize;

pub use crate::equilibria::h_sigma;
pub use limit::{limit_matrix, limit_matrix_check, LimitCase, LimitCheck, LimitMatrixSpec};

use crate::equilibria::{all_ones_fold, Equilibrium, SignSequence};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, SymmetricEigen};
use crate::model::{km_jacobian, ModelConfig};

/// Relative zero threshold: `|lambda| < ZERO_TOL_REL * max(1, rho)` counts
/// as zero, with `rho` a Gershgorin bound on the spectral radius.
pub const ZERO_TOL_REL: f64 = 1e-8;

/// Half-width of the bands around degenerate points (`xi0` of the all-ones
/// branch and the branch point `xi = 1`) where no verdict is asserted.
pub const MARGINAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Asymptotically stable as a family: one zero mode, no positive eigenvalue.
    Stable,
    /// At least one positive eigenvalue.
    Unstable,
    /// No positive eigenvalue but a degenerate (multiple) zero eigenvalue.
    Marginal,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Real spectrum of a symmetric matrix with signed eigenvalue counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub l_plus: usize,
    pub l_zero: usize,
    pub l_minus: usize,
    pub zero_tol: f64,
    pub verdict: Verdict,
    /// Unit eigenvectors, `eigenvectors[k]` belonging to `eigenvalues[k]`.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Gershgorin bound on the spectral radius.
pub fn spectral_radius_bound(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The default zero threshold for `a`.
pub fn default_zero_tol(a: &[Vec<f64>]) -> f64 {
    ZERO_TOL_REL * spectral_radius_bound(a).max(1.0)
}

fn classify_counts(l_plus: usize, l_zero: usize) -> Verdict {
    if l_plus > 0 {
        Verdict::Unstable
    } else if l_zero >= 2 {
        Verdict::Marginal
    } else {
        Verdict::Stable
    }
}

/// Spectrum of a symmetric matrix; eigenvalues with `|lambda| < zero_tol`
/// count as zero.
pub fn spectrum(a: &[Vec<f64>], zero_tol: f64) -> Result<StabilityReport> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(zero_tol >= 0.0) {
        return Err(Error::Domain { value: zero_tol, domain: "zero_tol >= 0" });
    }
    let SymmetricEigen { values, vectors } = jacobi_eigen(a)?;
    let l_plus = values.iter().filter(|&&x| x >= zero_tol).count();
    let l_minus = values.iter().filter(|&&x| x <= -zero_tol).count();
    let l_zero = values.len() - l_plus - l_minus;
    Ok(StabilityReport {
        verdict: classify_counts(l_plus, l_zero),
        eigenvalues: values,
        l_plus,
        l_zero,
        l_minus,
        zero_tol,
        eigenvectors: vectors,
    })
}

/// Spectrum of the full Jacobian at the reduced state `v`, default threshold.
pub fn jacobian_spectrum(v: &[f64], cfg: &ModelConfig) -> Result<StabilityReport> {
    let a = km_jacobian(v, cfg)?;
    spectrum(&a, default_zero_tol(&a))
}

/// Spectrum of the Jacobian at an equilibrium.
pub fn equilibrium_stability(eq: &Equilibrium, cfg: &ModelConfig) -> Result<StabilityReport> {
    jacobian_spectrum(&eq.v, cfg)
}

impl StabilityReport {
    /// Angle between `(1, ..., 1)/sqrt(n)` and the span of the eigenvectors
    /// of the zero eigenvalues (`pi/2` if there is no zero eigenvalue).
    pub fn zero_mode_angle(&self) -> f64 {
        let n = self.eigenvalues.len();
        let e = 1.0 / (n as f64).sqrt();
        let mut residual = vec![e; n];
        for (_, v) in self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .filter(|(l, _)| l.abs() < self.zero_tol)
        {
            let d: f64 = v.iter().map(|x| x * e).sum();
            for (r, x) in residual.iter_mut().zip(v) {
                *r -= d * x;
            }
        }
        let perp = residual.iter().map(|x| x * x).sum::<f64>().sqrt();
        perp.min(1.0).asin()
    }

    /// Eigenvalue of smallest magnitude.
    pub fn smallest_magnitude(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(f64::NAN)
    }
}

/// Verdict predicted from the sign pattern and `xi` alone, without a spectrum:
/// stable iff `sigma` is all ones and `xi < xi0`; marginal
/// within [`MARGINAL_BAND`] of `xi0` (all-ones only) or of `xi = 1`.
pub fn classify_by_pattern(sigma: &SignSequence, xi: f64, cfg: &ModelConfig) -> Result<Verdict> {
    if sigma.n0() != cfg.n0() {
        return Err(Error::Dimension { expected: 2 * cfg.n0(), got: sigma.len() });
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain { value: xi, domain: "(0, 1]" });
    }
    if (1.0 - xi).abs() < MARGINAL_BAND {
        return Ok(Verdict::Marginal);
    }
    if !sigma.is_all_ones() {
        return Ok(Verdict::Unstable);
    }
    let xi0 = all_ones_fold(sigma.n0())?.xi;
    Ok(if (xi - xi0).abs() < MARGINAL_BAND {
        Verdict::Marginal
    } else if xi < xi0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    })
}

/// The two stability quantities of the three-oscillator reduced system:
/// minus the trace and the determinant of the reduced Jacobian, each up to a
/// positive factor.
pub fn n3_stability_quantities(v1: f64, v2: f64) -> (f64, f64) {
    let (c1, c2, c12) = (v1.cos(), v2.cos(), (v2 - v1).cos());
    let first = -c1 - c2 - c12;
    let second = c1 * c2 + (c1 + c2) * c12;
    (first, second)
}

/// Closed-form verdict for `n = 3` from the trace/determinant conditions.
pub fn n3_closed_form_stability(v1: f64, v2: f64) -> Verdict {
    let (first, second) = n3_stability_quantities(v1, v2);
    if first > 0.0 || second < 0.0 {
        Verdict::Unstable
    } else if first < 0.0 && second > 0.0 {
        Verdict::Stable
    } else {
        Verdict::Marginal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{build_equilibrium, enumerate_sequences, solve_xi, ChiCurve};
    use approx::assert_abs_diff_eq;

    fn s(x: &str) -> SignSequence {
        x.parse().unwrap()
    }

    /// Configuration at which `(sigma, xi)` is an equilibrium datum.
    fn cfg_at(sigma: &SignSequence, xi: f64) -> ModelConfig {
        let chi = ChiCurve::new(sigma).value(xi).abs();
        ModelConfig::from_beta(2 * sigma.n0() + 1, 1.0, chi).unwrap()
    }

    #[test]
    fn synchronous_state_spectrum() {
        let n = 7;
        let k = 2.5;
        let cfg = ModelConfig::new(n, 1.0, k).unwrap();
        let rep = jacobian_spectrum(&vec![0.0; n - 1], &cfg).unwrap();
        assert_eq!((rep.l_plus, rep.l_zero, rep.l_minus), (0, 1, n - 1));
        assert_abs_diff_eq!(rep.eigenvalues[n - 1], 0.0, epsilon = 1e-12);
        for &x in &rep.eigenvalues[..n - 1] {
            assert_abs_diff_eq!(x, -k, epsilon = 1e-12);
        }
        assert_eq!(rep.verdict, Verdict::Stable);
        assert!(rep.zero_mode_angle() < 1e-10);
    }

    #[test]
    fn all_ones_n5_either_side_of_fold() {
        let sigma = SignSequence::all_ones(2);
        let xi0 = all_ones_fold(2).unwrap().xi;
        let xi = 0.5 * xi0;
        let cfg = cfg_at(&sigma, xi);
        let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
        assert_eq!(equilibrium_stability(&eq, &cfg).unwrap().verdict, Verdict::Stable);

        let xi = 0.5 * (1.0 + xi0);
        let cfg = cfg_at(&sigma, xi);
        let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
        let rep = equilibrium_stability(&eq, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        assert_eq!(rep.l_plus, 1);
    }

    #[test]
    fn pattern_classifier_bands() {
        let cfg = ModelConfig::new(5, 1.0, 1.0).unwrap();
        let sigma = SignSequence::all_ones(2);
        let xi0 = all_ones_fold(2).unwrap().xi;
        assert_eq!(classify_by_pattern(&sigma, xi0, &cfg).unwrap(), Verdict::Marginal);
        assert_eq!(classify_by_pattern(&sigma, xi0 - 1e-3, &cfg).unwrap(), Verdict::Stable);
        assert_eq!(classify_by_pattern(&sigma, xi0 + 1e-3, &cfg).unwrap(), Verdict::Unstable);
        assert_eq!(classify_by_pattern(&sigma, 1.0, &cfg).unwrap(), Verdict::Marginal);
        assert_eq!(classify_by_pattern(&s("+-++"), 0.3, &cfg).unwrap(), Verdict::Unstable);
        assert!(classify_by_pattern(&s("++"), 0.3, &cfg).is_err());
    }

    #[test]
    fn spectrum_rejects_asymmetric_input() {
        let a = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(matches!(spectrum(&a, 1e-8), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn n3_closed_form_on_all_branches() {
        // red branch below and above v0
        let v0 = ((15.0 + 33f64.sqrt()) / 32.0).sqrt().asin();
        assert_abs_diff_eq!(v0, 0.93592, epsilon = 1e-5);
        assert_eq!(n3_closed_form_stability(-0.5, 0.5), Verdict::Stable);
        assert_eq!(n3_closed_form_stability(-1.2, 1.2), Verdict::Unstable);
        // v1 = v2 - pi branch: second quantity equals -z^2
        let beta: f64 = 0.6;
        let v2 = beta.asin();
        let (first, second) = n3_stability_quantities(v2 - std::f64::consts::PI, v2);
        assert_abs_diff_eq!(first, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(second, -(1.0 - beta * beta), epsilon = 1e-14);
        // mirror branch: first quantity = -2(z - 1/2)^2 + 3/2 > 0
        let z: f64 = 0.3;
        let x = (1.0 - z * z).sqrt();
        let v1 = x.asin() - std::f64::consts::PI;
        let (first, _) = n3_stability_quantities(v1, -v1);
        assert_abs_diff_eq!(first, -2.0 * (z - 0.5).powi(2) + 1.5, epsilon = 1e-14);
    }

    #[test]
    fn n3_closed_form_agrees_with_spectrum() {
        for sigma in enumerate_sequences(1).unwrap() {
            for &ratio in &[0.6, 0.9, 1.0, 1.3, 2.0, 3.0, 10.0] {
                let cfg = ModelConfig::from_ratio(3, 1.0, ratio).unwrap();
                for xi in solve_xi(&sigma, cfg.beta(), 1e-13).unwrap() {
                    let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
                    let rep = equilibrium_stability(&eq, &cfg).unwrap();
                    let closed = n3_closed_form_stability(eq.v[0], eq.v[1]);
                    if rep.verdict != Verdict::Marginal {
                        assert_eq!(closed, rep.verdict, "{sigma} at K/a = {ratio}, xi = {xi}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_mode_at_every_equilibrium() {
        for &(n, ratio) in &[(3usize, 1.5), (5, 0.9), (7, 1.1)] {
            let cfg = ModelConfig::from_ratio(n, 1.0, ratio).unwrap();
            for eq in crate::equilibria::all_equilibria(&cfg, 1e-13).unwrap() {
                let rep = equilibrium_stability(&eq, &cfg).unwrap();
                assert!(rep.smallest_magnitude().abs() < 1e-8);
                assert!(rep.zero_mode_angle() < 1e-6, "{}", eq.sigma);
            }
        }
    }
}
