//! The `xi -> 0` limit of the scaled Jacobian.
//!
//! As `xi -> 0` every phase tends to `0` (sign `+1`, and the reference node)
//! or to `pi` (sign `-1`), and `(n/K) A` tends to an integer matrix `A0`
//! whose spectrum is known in closed form.

use serde::Serialize;

use super::{default_zero_tol, spectrum};
use crate::equilibria::{build_equilibrium, ChiCurve, SignSequence};
use crate::error::{Error, Result};
use crate::model::{km_jacobian, ModelConfig};

/// Point on the branch used to compare the true Jacobian with `A0`.
pub const SMALL_XI: f64 = 1e-3;

/// Which closed-form eigen-structure applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitCase {
    /// `n_plus = 2 n0`
    AllPlus,
    /// `n_plus = 2 n0 - 1`
    SingleMinus,
    /// `0 < n_plus < 2 n0 - 1`
    Mixed,
    /// `n_plus = 0`
    AllMinus,
}

/// Predicted eigen-structure of `A0` for one `(n_plus, n_minus)` split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitMatrixSpec {
    pub n_plus: usize,
    pub n_minus: usize,
    /// `n0 - n_plus`.
    pub n_hat: i64,
    pub case: LimitCase,
    /// `(eigenvalue, multiplicity)`, ascending, multiplicities positive.
    pub predicted: Vec<(i64, usize)>,
}

impl LimitMatrixSpec {
    pub fn new(n_plus: usize, n_minus: usize) -> Result<Self> {
        let m = n_plus + n_minus;
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "n_plus + n_minus = {m} must be positive and even"
            )));
        }
        let n0 = m / 2;
        let n = (2 * n0 + 1) as i64;
        let n_hat = n0 as i64 - n_plus as i64;
        let (case, list): (LimitCase, Vec<(i64, usize)>) = if n_minus == 0 {
            (LimitCase::AllPlus, vec![(0, 1), (-n, (n - 1) as usize)])
        } else if n_minus == 1 {
            (LimitCase::SingleMinus, vec![(0, 1), (n, 1), (-(n - 2), (n - 2) as usize)])
        } else if n_plus == 0 {
            (LimitCase::AllMinus, vec![(0, 1), (n, 1), (-(n - 2), (n - 2) as usize)])
        } else {
            (
                LimitCase::Mixed,
                vec![(0, 1), (n, 1), (2 * n_hat - 1, n_plus), (1 - 2 * n_hat, n_minus - 1)],
            )
        };
        let mut predicted: Vec<(i64, usize)> = Vec::new();
        for (value, mult) in list {
            if mult == 0 {
                continue;
            }
            match predicted.iter_mut().find(|(v, _)| *v == value) {
                Some(entry) => entry.1 += mult,
                None => predicted.push((value, mult)),
            }
        }
        predicted.sort();
        Ok(Self { n_plus, n_minus, n_hat, case, predicted })
    }

    pub fn for_sigma(sigma: &SignSequence) -> Self {
        Self::new(sigma.n_plus(), sigma.n_minus()).expect("sign sequences have even positive length")
    }

    pub fn positive_count(&self) -> usize {
        self.predicted.iter().filter(|(v, _)| *v > 0).map(|(_, m)| m).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.predicted.iter().filter(|(v, _)| *v == 0).map(|(_, m)| m).sum()
    }

    /// Predicted eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.predicted
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v as f64, m))
            .collect()
    }
}

/// `A0` with the `n_plus + 1` nodes at phase `0` (the reference included)
/// first and the `n_minus` nodes at phase `pi` last.
pub fn limit_matrix(n_plus: usize, n_minus: usize) -> Vec<Vec<f64>> {
    let p = n_plus + 1;
    let n = p + n_minus;
    let n_hat = (n_minus as f64 - n_plus as f64) / 2.0;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let same = (i < p) == (j < p);
            a[i][j] = if i == j {
                if i < p {
                    2.0 * n_hat
                } else {
                    -2.0 * (n_hat - 1.0)
                }
            } else if same {
                1.0
            } else {
                -1.0
            };
        }
    }
    a
}

/// Comparison of the closed-form prediction, the explicit `A0`, and the true
/// Jacobian near `xi = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub sigma: SignSequence,
    pub spec: LimitMatrixSpec,
    pub a0_eigenvalues: Vec<f64>,
    /// Largest deviation between the `A0` spectrum and the prediction.
    pub prediction_error: f64,
    /// `(l_plus, l_zero)` of `A0`.
    pub a0_counts: (usize, usize),
    /// `(l_plus, l_zero)` of the Jacobian at `xi = SMALL_XI`.
    pub jacobian_counts: (usize, usize),
    /// Largest deviation between the spectra of `(n/K) A` and `A0`.
    pub scaled_gap: f64,
}

impl LimitCheck {
    pub fn passed(&self) -> bool {
        self.prediction_error < 1e-9
            && self.a0_counts == (self.spec.positive_count(), self.spec.zero_count())
            && self.jacobian_counts == self.a0_counts
    }
}

/// Builds `A0` for `sigma`, compares its spectrum with the closed-form
/// prediction, and compares its signed counts with those of the Jacobian on
/// the `sigma` branch at `xi = SMALL_XI`. `cfg` supplies `n` and `a`; the
/// coupling is chosen so that `(sigma, SMALL_XI)` is an equilibrium datum.
pub fn limit_matrix_check(sigma: &SignSequence, cfg: &ModelConfig) -> Result<LimitCheck> {
    if sigma.n0() != cfg.n0() {
        return Err(Error::Dimension { expected: 2 * cfg.n0(), got: sigma.len() });
    }
    let spec = LimitMatrixSpec::for_sigma(sigma);
    let a0 = limit_matrix(spec.n_plus, spec.n_minus);
    let rep0 = spectrum(&a0, default_zero_tol(&a0))?;
    let predicted = spec.eigenvalues();
    let prediction_error = rep0
        .eigenvalues
        .iter()
        .zip(&predicted)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let chi = ChiCurve::new(sigma).value(SMALL_XI).abs();
    let near = ModelConfig::from_beta(cfg.n(), cfg.a(), chi)?;
    let eq = build_equilibrium(sigma, SMALL_XI, &near)?;
    let jac = km_jacobian(&eq.v, &near)?;
    let rep = spectrum(&jac, default_zero_tol(&jac))?;
    let scale = cfg.n() as f64 / near.k();
    let scaled_gap = rep
        .eigenvalues
        .iter()
        .zip(&rep0.eigenvalues)
        .map(|(x, y)| (x * scale - y).abs())
        .fold(0.0, f64::max);

    Ok(LimitCheck {
        sigma: sigma.clone(),
        a0_counts: (rep0.l_plus, rep0.l_zero),
        jacobian_counts: (rep.l_plus, rep.l_zero),
        a0_eigenvalues: rep0.eigenvalues,
        prediction_error,
        spec,
        scaled_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_sequences;

    #[test]
    fn closed_form_cases() {
        // n0 = 2, n = 5
        let a = LimitMatrixSpec::new(4, 0).unwrap();
        assert_eq!(a.case, LimitCase::AllPlus);
        assert_eq!(a.predicted, vec![(-5, 4), (0, 1)]);
        let d = LimitMatrixSpec::new(0, 4).unwrap();
        assert_eq!(d.case, LimitCase::AllMinus);
        assert_eq!(d.predicted, vec![(-3, 3), (0, 1), (5, 1)]);
        let b = LimitMatrixSpec::new(3, 1).unwrap();
        assert_eq!(b.predicted, vec![(-3, 3), (0, 1), (5, 1)]);
        let c = LimitMatrixSpec::new(1, 3).unwrap();
        assert_eq!(c.case, LimitCase::Mixed);
        assert_eq!(c.positive_count(), 2);
        assert!(LimitMatrixSpec::new(2, 1).is_err());
    }

    #[test]
    fn positive_count_formula() {
        for n0 in 1..=6usize {
            for n_plus in 0..=2 * n0 {
                let n_minus = 2 * n0 - n_plus;
                let spec = LimitMatrixSpec::new(n_plus, n_minus).unwrap();
                assert_eq!(spec.zero_count(), 1);
                assert_eq!(spec.positive_count(), n_minus.min(n_plus + 1));
                assert_eq!(spec.eigenvalues().len(), 2 * n0 + 1);
            }
        }
    }

    #[test]
    fn explicit_matrix_matches_prediction_and_jacobian() {
        for n0 in 1..=3usize {
            let cfg = ModelConfig::with_n0(n0, 1.0, 1.0).unwrap();
            for sigma in enumerate_sequences(n0).unwrap() {
                let check = limit_matrix_check(&sigma, &cfg).unwrap();
                assert!(check.passed(), "{check:?}");
                assert!(check.scaled_gap < 1e-2, "{sigma}: gap {}", check.scaled_gap);
            }
        }
    }
}
