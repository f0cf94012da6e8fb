//! Uniform B-spline bases and the learnable one-dimensional edge functions
//! built from them.
//!
//! A [`SplineConfig`] with degree `k` and `g` grid intervals on
//! `[range_min, range_max]` places `g + 1` uniform knots on the domain and
//! extends them by `k` knots of the same spacing on each side. Exactly
//! `g + k` degree-`k` basis functions have support intersecting the domain;
//! those are the ones retained, so an edge function owns `g + k`
//! coefficients.
//!
//! Inputs outside the domain are clamped to it before evaluation. The
//! derivative with respect to the input is zero wherever clamping happened.
//! Interior knots use the right-continuous convention; the right end of the
//! domain belongs to the last interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplineConfig {
    /// Polynomial degree `k` (1 = piecewise linear).
    pub order: usize,
    /// Number of intervals `g` the domain is divided into.
    pub grid: usize,
    pub range_min: f64,
    pub range_max: f64,
}

impl Default for SplineConfig {
    /// Quadratic splines on three intervals over `[-1, 1]`.
    fn default() -> Self {
        Self {
            order: 2,
            grid: 3,
            range_min: -1.0,
            range_max: 1.0,
        }
    }
}

impl SplineConfig {
    pub fn new(order: usize, grid: usize, range_min: f64, range_max: f64) -> Result<Self> {
        let config = Self {
            order,
            grid,
            range_min,
            range_max,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidArgument("spline order must be >= 1".into()));
        }
        if self.grid < 1 {
            return Err(Error::InvalidArgument("spline grid must be >= 1".into()));
        }
        if !(self.range_min.is_finite() && self.range_max.is_finite())
            || self.range_min >= self.range_max
        {
            return Err(Error::InvalidArgument(format!(
                "spline range must satisfy min < max, got [{}, {}]",
                self.range_min, self.range_max
            )));
        }
        Ok(())
    }

    /// Coefficients per edge: `grid + order`.
    #[inline]
    pub fn basis_count(&self) -> usize {
        self.grid + self.order
    }

    /// Knot spacing `h`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.range_max - self.range_min) / self.grid as f64
    }

    pub fn knots(&self) -> KnotVector {
        let h = self.spacing();
        let k = self.order as f64;
        let knots = (0..self.grid + 2 * self.order + 1)
            .map(|j| self.range_min + (j as f64 - k) * h)
            .collect();
        KnotVector { knots }
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.range_min, self.range_max)
    }
}

/// Extended uniform knot sequence of length `grid + 2·order + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}

/// The `order + 1` basis functions that can be nonzero at a point.
///
/// `values[r]` is `B_{start + r}` evaluated at the (clamped) input.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpan {
    pub start: usize,
    pub values: Vec<f64>,
    /// Whether the input was outside the domain.
    pub clamped: bool,
}

impl BasisSpan {
    /// `Σ_r coeffs[start + r] · values[r]`.
    #[inline]
    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&coeffs[self.start..])
            .map(|(b, c)| b * c)
            .sum()
    }
}

/// Derivatives `dB_{start + r}/dx` at the (clamped) input; all zero when clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDerivSpan {
    pub start: usize,
    pub derivs: Vec<f64>,
}

impl BasisDerivSpan {
    #[inline]
    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        self.derivs
            .iter()
            .zip(&coeffs[self.start..])
            .map(|(d, c)| d * c)
            .sum()
    }
}

/// Interval index within the domain and the clamped input.
#[inline]
fn locate(config: &SplineConfig, x: f64) -> (usize, f64, bool) {
    let clamped = x < config.range_min || x > config.range_max;
    let x = config.clamp(x);
    let h = config.spacing();
    let cell = ((x - config.range_min) / h).floor();
    let cell = if cell < 0.0 { 0 } else { cell as usize };
    (cell.min(config.grid - 1), x, clamped)
}

/// Cox-de Boor triangle for the `degree + 1` nonzero bases of degree
/// `degree` on cell `cell` (domain-relative) at `x`.
fn triangle(config: &SplineConfig, cell: usize, x: f64, degree: usize) -> Vec<f64> {
    let h = config.spacing();
    // knot index of the left end of the cell is `cell + order`;
    // t_j = range_min + (j - order)·h, so t_{cell+order+m} = range_min + (cell+m)·h.
    let knot = |m: isize| config.range_min + (cell as isize + m) as f64 * h;
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knot(1 - j as isize);
        right[j] = knot(j as isize) - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

pub(crate) fn span_unchecked(config: &SplineConfig, x: f64) -> BasisSpan {
    let (cell, x, clamped) = locate(config, x);
    BasisSpan {
        start: cell,
        values: triangle(config, cell, x, config.order),
        clamped,
    }
}

pub(crate) fn deriv_span_unchecked(config: &SplineConfig, x: f64) -> BasisDerivSpan {
    let (cell, x, clamped) = locate(config, x);
    let k = config.order;
    if clamped {
        return BasisDerivSpan {
            start: cell,
            derivs: vec![0.0; k + 1],
        };
    }
    // Uniform knots: dB_{i,k}/dx = (B_{i,k-1} - B_{i+1,k-1}) / h.
    let lower = triangle(config, cell, x, k - 1);
    let h = config.spacing();
    let derivs = (0..=k)
        .map(|r| {
            let a = if r >= 1 { lower[r - 1] } else { 0.0 };
            let b = if r < k { lower[r] } else { 0.0 };
            (a - b) / h
        })
        .collect();
    BasisDerivSpan {
        start: cell,
        derivs,
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("spline input {x}")))
    }
}

/// Nonzero basis values at `x` together with their offset.
pub fn basis_span(config: &SplineConfig, x: f64) -> Result<BasisSpan> {
    check_finite(x)?;
    Ok(span_unchecked(config, x))
}

/// All `grid + order` basis values at `x` (after clamping).
pub fn basis_values(config: &SplineConfig, x: f64) -> Result<Vec<f64>> {
    let span = basis_span(config, x)?;
    let mut out = vec![0.0; config.basis_count()];
    out[span.start..span.start + span.values.len()].copy_from_slice(&span.values);
    Ok(out)
}

/// All `grid + order` basis derivatives at `x`.
pub fn basis_derivatives(config: &SplineConfig, x: f64) -> Result<Vec<f64>> {
    check_finite(x)?;
    let span = deriv_span_unchecked(config, x);
    let mut out = vec![0.0; config.basis_count()];
    out[span.start..span.start + span.derivs.len()].copy_from_slice(&span.derivs);
    Ok(out)
}

/// A learnable one-dimensional function `φ(x) = Σ_i c_i B_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    config: SplineConfig,
    coeffs: Vec<f64>,
}

impl EdgeFunction {
    pub fn new(config: SplineConfig, coeffs: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if coeffs.len() != config.basis_count() {
            return Err(Error::length(
                "EdgeFunction::new",
                config.basis_count(),
                coeffs.len(),
            ));
        }
        Ok(Self { config, coeffs })
    }

    pub fn zeros(config: SplineConfig) -> Self {
        Self {
            coeffs: vec![0.0; config.basis_count()],
            config,
        }
    }

    pub fn config(&self) -> &SplineConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        spline_eval(&self.config, &self.coeffs, x)
    }

    pub fn grad_coeffs(&self, x: f64) -> Result<Vec<f64>> {
        basis_values(&self.config, x)
    }

    pub fn grad_input(&self, x: f64) -> Result<f64> {
        spline_grad_input(&self.config, &self.coeffs, x)
    }
}

/// `φ(x)` for coefficients `coeffs` of length `grid + order`.
pub fn spline_eval(config: &SplineConfig, coeffs: &[f64], x: f64) -> Result<f64> {
    if coeffs.len() != config.basis_count() {
        return Err(Error::length("spline_eval", config.basis_count(), coeffs.len()));
    }
    Ok(basis_span(config, x)?.dot(coeffs))
}

/// `∂φ/∂c`, which is the basis vector at the clamped input.
pub fn spline_grad_coeffs(config: &SplineConfig, x: f64) -> Result<Vec<f64>> {
    basis_values(config, x)
}

/// `dφ/dx`; zero outside the domain.
pub fn spline_grad_input(config: &SplineConfig, coeffs: &[f64], x: f64) -> Result<f64> {
    if coeffs.len() != config.basis_count() {
        return Err(Error::length(
            "spline_grad_input",
            config.basis_count(),
            coeffs.len(),
        ));
    }
    check_finite(x)?;
    Ok(deriv_span_unchecked(config, x).dot(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Rng;

    /// Textbook recursive Cox-de Boor over the full extended knot vector.
    fn cox_de_boor(t: &[f64], i: usize, k: usize, x: f64) -> f64 {
        if k == 0 {
            return if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + k] - t[i];
        if d1 != 0.0 {
            v += (x - t[i]) / d1 * cox_de_boor(t, i, k - 1, x);
        }
        let d2 = t[i + k + 1] - t[i + 1];
        if d2 != 0.0 {
            v += (t[i + k + 1] - x) / d2 * cox_de_boor(t, i + 1, k - 1, x);
        }
        v
    }

    fn oracle_basis(config: &SplineConfig, x: f64) -> Vec<f64> {
        let t = config.knots();
        (0..config.basis_count())
            .map(|i| cox_de_boor(t.as_slice(), i, config.order, x))
            .collect()
    }

    #[test]
    fn knot_layout() {
        let c = SplineConfig::default();
        let t = c.knots();
        assert_eq!(t.len(), 3 + 2 * 2 + 1);
        let h = 2.0 / 3.0;
        for (j, v) in t.as_slice().iter().enumerate() {
            assert!((v - (-1.0 + (j as f64 - 2.0) * h)).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SplineConfig::new(0, 3, -1.0, 1.0).is_err());
        assert!(SplineConfig::new(2, 0, -1.0, 1.0).is_err());
        assert!(SplineConfig::new(2, 3, 1.0, 1.0).is_err());
        assert_eq!(SplineConfig::new(2, 3, -1.0, 1.0).unwrap().basis_count(), 5);
    }

    #[test]
    fn partition_of_unity_at_zero() {
        let c = SplineConfig::default();
        let b = basis_values(&c, 0.0).unwrap();
        assert_eq!(b.len(), 5);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_hats() {
        let c = SplineConfig::new(1, 1, 0.0, 1.0).unwrap();
        let b = basis_values(&c, 0.5).unwrap();
        assert_eq!(b, vec![0.5, 0.5]);
    }

    #[test]
    fn matches_recursive_oracle() {
        let c = SplineConfig::default();
        let fast = basis_values(&c, 0.37).unwrap();
        let slow = oracle_basis(&c, 0.37);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-14, "{fast:?} vs {slow:?}");
        }
        let mut rng = Rng::new(8);
        for order in 1..=4 {
            for grid in [1, 2, 3, 7] {
                let c = SplineConfig::new(order, grid, -2.0, 0.5).unwrap();
                for _ in 0..200 {
                    let x = rng.uniform(-2.0, 0.5);
                    let fast = basis_values(&c, x).unwrap();
                    let slow = oracle_basis(&c, x);
                    for (a, b) in fast.iter().zip(&slow) {
                        assert!((a - b).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn right_end_belongs_to_last_interval() {
        let c = SplineConfig::default();
        let at_end = basis_values(&c, 1.0).unwrap();
        let just_inside = basis_values(&c, 1.0 - 1e-12).unwrap();
        assert!((at_end.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in at_end.iter().zip(&just_inside) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_and_zero_coefficients() {
        let c = SplineConfig::default();
        let constant = EdgeFunction::new(c, vec![0.7; 5]).unwrap();
        let zero = EdgeFunction::zeros(c);
        for i in 0..=40 {
            let x = -1.0 + i as f64 * 0.05;
            assert!((constant.eval(x).unwrap() - 0.7).abs() < 1e-12);
            assert_eq!(zero.eval(x).unwrap(), 0.0);
            assert!(constant.grad_input(x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn eval_is_dot_with_basis() {
        let c = SplineConfig::new(3, 5, -1.0, 1.0).unwrap();
        let mut rng = Rng::new(2);
        let coeffs: Vec<f64> = (0..c.basis_count()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let edge = EdgeFunction::new(c, coeffs.clone()).unwrap();
        for i in 0..=100 {
            let x = -1.2 + i as f64 * 0.024;
            let b = basis_values(&c, x).unwrap();
            let expected: f64 = b.iter().zip(&coeffs).map(|(b, c)| b * c).sum();
            assert!((edge.eval(x).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn clamped_inputs() {
        let c = SplineConfig::default();
        let mut rng = Rng::new(4);
        let coeffs: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let edge = EdgeFunction::new(c, coeffs).unwrap();
        assert_eq!(edge.grad_coeffs(3.5).unwrap(), edge.grad_coeffs(1.0).unwrap());
        assert_eq!(edge.grad_coeffs(-9.0).unwrap(), edge.grad_coeffs(-1.0).unwrap());
        assert_eq!(edge.grad_input(1.5).unwrap(), 0.0);
        assert_eq!(edge.grad_input(-1.5).unwrap(), 0.0);
        assert_eq!(edge.eval(2.0).unwrap(), edge.eval(1.0).unwrap());
    }

    #[test]
    fn non_finite_input_is_an_error() {
        let c = SplineConfig::default();
        assert!(basis_values(&c, f64::NAN).is_err());
        assert!(basis_values(&c, f64::INFINITY).is_err());
        assert!(spline_grad_input(&c, &[0.0; 5], f64::NAN).is_err());
    }

    #[test]
    fn coefficient_gradient_matches_finite_difference() {
        let c = SplineConfig::default();
        let mut rng = Rng::new(6);
        let coeffs: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let h = 1e-6;
        for _ in 0..50 {
            let x = rng.uniform(-1.0, 1.0);
            let analytic = spline_grad_coeffs(&c, x).unwrap();
            assert!((analytic.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..5 {
                let mut plus = coeffs.clone();
                plus[i] += h;
                let mut minus = coeffs.clone();
                minus[i] -= h;
                let fd = (spline_eval(&c, &plus, x).unwrap() - spline_eval(&c, &minus, x).unwrap())
                    / (2.0 * h);
                // φ is linear in c, so the only error is cancellation (~1e-10
                // absolute); relative error is taken against max(|a|, |fd|, 1e-3).
                let denom = analytic[i].abs().max(fd.abs()).max(1e-3);
                assert!((fd - analytic[i]).abs() / denom < 1e-7);
            }
        }
    }

    #[test]
    fn input_gradient_at_quarter() {
        let c = SplineConfig::default();
        let mut rng = Rng::new(12);
        let coeffs: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let h = 1e-6;
        let x = 0.25;
        let analytic = spline_grad_input(&c, &coeffs, x).unwrap();
        let fd = (spline_eval(&c, &coeffs, x + h).unwrap() - spline_eval(&c, &coeffs, x - h).unwrap())
            / (2.0 * h);
        assert!((analytic - fd).abs() / analytic.abs().max(1e-12) < 1e-6);
    }
}
