//! Brute-force multistart Newton search for zeros of the reduced field,
//! independent of the sign-sequence construction.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::torus_distance;
use crate::linalg::solve;
use crate::model::{reduced_jacobian, reduced_vector_field, wrap_angle, ModelConfig};

#[derive(Debug, Clone, Copy)]
pub struct NewtonSearch {
    /// Starting points per coordinate; the start grid has `grid^(2 n0)` points.
    pub grid: usize,
    pub max_iter: usize,
    /// Max-norm residual accepted as a zero.
    pub tol: f64,
}

impl Default for NewtonSearch {
    fn default() -> Self {
        Self { grid: 8, max_iter: 100, tol: 1e-12 }
    }
}

fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn norm2_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn damped_newton(mut v: Vec<f64>, cfg: &ModelConfig, search: &NewtonSearch) -> Option<Vec<f64>> {
    let mut f = reduced_vector_field(&v, cfg).ok()?;
    for _ in 0..search.max_iter {
        if norm_inf(&f) < search.tol {
            return Some(v.into_iter().map(wrap_angle).collect());
        }
        let jac = reduced_jacobian(&v, cfg).ok()?;
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let step = solve(&jac, &rhs)?;
        if !step.iter().all(|s| s.is_finite()) {
            return None;
        }
        let merit = norm2_sq(&f);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(x, s)| x + lambda * s).collect();
            let ft = reduced_vector_field(&trial, cfg).ok()?;
            if norm2_sq(&ft) <= (1.0 - 1e-4 * lambda) * merit || lambda < 1e-8 {
                v = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
    }
    (norm_inf(&f) < search.tol).then(|| v.into_iter().map(wrap_angle).collect())
}

/// Distinct zeros of the reduced vector field reached from a uniform grid of
/// starting points on the torus.
pub fn find_reduced_zeros(cfg: &ModelConfig, search: &NewtonSearch) -> Vec<Vec<f64>> {
    let dim = 2 * cfg.n0();
    let m = search.grid;
    let total = m.pow(dim as u32);
    let found: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let start: Vec<f64> = (0..dim)
                .map(|_| {
                    let k = idx % m;
                    idx /= m;
                    -PI + (k as f64 + 0.5) * 2.0 * PI / m as f64
                })
                .collect();
            damped_newton(start, cfg, search)
        })
        .collect();
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for z in found {
        if !distinct.iter().any(|d| torus_distance(d, &z) < 1e-8) {
            distinct.push(z);
        }
    }
    distinct
}
