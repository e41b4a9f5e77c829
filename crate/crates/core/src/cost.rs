//! Residual-based cost composition: `c(x, u) = Σ wᵢ · nᵢ(rᵢ(x, u))`.
//!
//! Each term names a residual (a signed quantity that vanishes when its sub-goal is met), a
//! twice-differentiable norm, and a non-negative weight. Vector residuals are normed element by
//! element and summed. Derivatives use the Gauss–Newton approximation: residual curvature is
//! dropped, so the Hessian is `Σ wᵢ Jᵢᵀ diag(n″ᵢ) Jᵢ`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `sqrt(x² + p²) − p`
    SmoothAbs,
    /// `½ x²`
    Quadratic,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::SmoothAbs => "smooth_abs",
            NormKind::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norm {
    pub kind: NormKind,
    pub p: f64,
}

/// Value and first two derivatives of a norm at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Norm {
    pub fn smooth_abs(p: f64) -> Self {
        Self { kind: NormKind::SmoothAbs, p }
    }

    pub fn quadratic() -> Self {
        Self { kind: NormKind::Quadratic, p: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == NormKind::SmoothAbs && !(self.p > 0.0) {
            return Err(contract(format!("smooth-abs smoothing must be positive, got {}", self.p)));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Result<NormValue> {
        self.validate()?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    fn eval_unchecked(&self, x: f64) -> NormValue {
        match self.kind {
            NormKind::SmoothAbs => {
                let p2 = self.p * self.p;
                let s = (x * x + p2).sqrt();
                NormValue { value: s - self.p, d1: x / s, d2: p2 / (s * s * s) }
            }
            NormKind::Quadratic => NormValue { value: 0.5 * x * x, d1: x, d2: 1.0 },
        }
    }
}

pub fn norm_eval(norm: &Norm, x: f64) -> Result<NormValue> {
    norm.eval(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTerm {
    pub residual: String,
    pub norm: NormKind,
    #[serde(default)]
    pub p: f64,
    pub weight: f64,
}

impl CostTerm {
    pub fn new(residual: &str, norm: Norm, weight: f64) -> Self {
        Self { residual: residual.into(), norm: norm.kind, p: norm.p, weight }
    }

    pub fn norm(&self) -> Norm {
        Norm { kind: self.norm, p: self.p }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub name: String,
    pub terms: Vec<CostTerm>,
}

impl CostSpec {
    pub fn new(name: &str, terms: Vec<CostTerm>) -> Result<Self> {
        let spec = Self { name: name.into(), terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(contract(format!("cost spec '{}' has no terms", self.name)));
        }
        let mut seen = HashSet::new();
        for t in &self.terms {
            if !seen.insert(t.residual.as_str()) {
                return Err(contract(format!("residual '{}' appears twice in '{}'", t.residual, self.name)));
            }
            if !(t.weight >= 0.0) || !t.weight.is_finite() {
                return Err(contract(format!("weight of '{}' must be finite and non-negative", t.residual)));
            }
            t.norm().validate()?;
        }
        Ok(())
    }

    pub fn with_scaled_weights(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight *= factor;
        }
        out
    }
}

/// Stacked residual values with a per-term slice layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector {
    pub values: DVector<f64>,
    offsets: Vec<usize>,
}

impl ResidualVector {
    pub fn zeros(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        offsets.push(0);
        for d in dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        Self { values: DVector::zeros(*offsets.last().unwrap()), offsets }
    }

    pub fn from_terms(terms: &[&[f64]]) -> Self {
        let dims: Vec<usize> = terms.iter().map(|t| t.len()).collect();
        let mut r = Self::zeros(&dims);
        for (i, t) in terms.iter().enumerate() {
            r.term_mut(i).copy_from_slice(t);
        }
        r
    }

    pub fn num_terms(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self, term: usize) -> std::ops::Range<usize> {
        self.offsets[term]..self.offsets[term + 1]
    }

    pub fn term(&self, term: usize) -> &[f64] {
        &self.values.as_slice()[self.range(term)]
    }

    pub fn term_mut(&mut self, term: usize) -> &mut [f64] {
        let r = self.range(term);
        &mut self.values.as_mut_slice()[r]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_layout(spec: &CostSpec, residuals: &ResidualVector) -> Result<()> {
    if residuals.num_terms() != spec.terms.len() {
        return Err(contract(format!(
            "residual layout has {} terms, cost spec '{}' has {}",
            residuals.num_terms(),
            spec.name,
            spec.terms.len()
        )));
    }
    Ok(())
}

pub fn cost_eval(spec: &CostSpec, residuals: &ResidualVector) -> Result<f64> {
    check_layout(spec, residuals)?;
    let mut total = 0.0;
    for (i, term) in spec.terms.iter().enumerate() {
        let norm = term.norm();
        norm.validate()?;
        let s: f64 = residuals.term(i).iter().map(|&r| norm.eval_unchecked(r).value).sum();
        total += term.weight * s;
    }
    Ok(total)
}

/// Gauss–Newton gradient and Hessian of the cost over the variables the Jacobian columns index.
///
/// `jacobian` stacks the per-term residual Jacobians row-wise in the residual layout order.
pub fn cost_derivatives(
    spec: &CostSpec,
    residuals: &ResidualVector,
    jacobian: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_layout(spec, residuals)?;
    if jacobian.nrows() != residuals.len() {
        return Err(contract(format!(
            "jacobian has {} rows, residual vector has {}",
            jacobian.nrows(),
            residuals.len()
        )));
    }
    let nv = jacobian.ncols();
    let mut grad = DVector::zeros(nv);
    let mut hess = DMatrix::zeros(nv, nv);
    for (i, term) in spec.terms.iter().enumerate() {
        if term.weight == 0.0 {
            continue;
        }
        let norm = term.norm();
        norm.validate()?;
        for row in residuals.range(i) {
            let n = norm.eval_unchecked(residuals.values[row]);
            let j = jacobian.row(row);
            grad.axpy(term.weight * n.d1, &j.transpose(), 1.0);
            hess.ger(term.weight * n.d2, &j.transpose(), &j.transpose(), 1.0);
        }
    }
    Ok((grad, hess))
}

/// Benchmark reward turned into a minimisable cost: smooth-abs of `r_max − r`.
pub fn reward_to_cost(reward: f64, r_max: f64, p: f64) -> Result<f64> {
    Ok(Norm::smooth_abs(p).eval(r_max - reward)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_abs_at_origin() {
        let n = Norm::smooth_abs(0.1).eval(0.0).unwrap();
        assert_eq!(n.value, 0.0);
        assert_eq!(n.d1, 0.0);
        assert_relative_eq!(n.d2, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn smooth_abs_arithmetic() {
        assert_relative_eq!(Norm::smooth_abs(4.0).eval(3.0).unwrap().value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_values() {
        let n = Norm::quadratic().eval(-2.0).unwrap();
        assert_eq!((n.value, n.d1, n.d2), (2.0, -2.0, 1.0));
    }

    #[test]
    fn smooth_abs_rejects_nonpositive_smoothing() {
        assert!(matches!(Norm::smooth_abs(0.0).eval(1.0), Err(crate::Error::Contract(_))));
        assert!(Norm::smooth_abs(-1.0).eval(1.0).is_err());
        assert!(reward_to_cost(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_residuals_cost_nothing() {
        let spec = CostSpec::new(
            "z",
            vec![
                CostTerm::new("a", Norm::quadratic(), 3.0),
                CostTerm::new("b", Norm::smooth_abs(0.2), 1.5),
            ],
        )
        .unwrap();
        let r = ResidualVector::zeros(&[1, 3]);
        assert_eq!(cost_eval(&spec, &r).unwrap(), 0.0);
    }

    #[test]
    fn single_weighted_quadratic_term() {
        let spec = CostSpec::new("q", vec![CostTerm::new("a", Norm::quadratic(), 2.0)]).unwrap();
        let r = ResidualVector::from_terms(&[&[3.0]]);
        assert_relative_eq!(cost_eval(&spec, &r).unwrap(), 9.0);
    }

    #[test]
    fn layout_mismatch_is_contract_error() {
        let spec = CostSpec::new("q", vec![CostTerm::new("a", Norm::quadratic(), 2.0)]).unwrap();
        let r = ResidualVector::zeros(&[1, 1]);
        assert!(cost_eval(&spec, &r).is_err());
        let r = ResidualVector::zeros(&[2]);
        assert!(cost_derivatives(&spec, &r, &DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CostSpec::new("empty", vec![]).is_err());
        let dup = vec![CostTerm::new("a", Norm::quadratic(), 1.0), CostTerm::new("a", Norm::quadratic(), 1.0)];
        assert!(CostSpec::new("dup", dup).is_err());
        assert!(CostSpec::new("neg", vec![CostTerm::new("a", Norm::quadratic(), -1.0)]).is_err());
    }

    #[test]
    fn identity_jacobian_quadratic_reduces_to_half_squared_norm() {
        let spec = CostSpec::new("q", vec![CostTerm::new("a", Norm::quadratic(), 1.0)]).unwrap();
        let r = ResidualVector::from_terms(&[&[0.5, -1.5, 2.0]]);
        let (g, h) = cost_derivatives(&spec, &r, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(g, r.values);
        assert_eq!(h, DMatrix::identity(3, 3));
    }

    #[test]
    fn zero_jacobian_gives_zero_derivatives() {
        let spec = CostSpec::new("s", vec![CostTerm::new("a", Norm::smooth_abs(0.3), 2.0)]).unwrap();
        let r = ResidualVector::from_terms(&[&[0.7, -0.2]]);
        let (g, h) = cost_derivatives(&spec, &r, &DMatrix::zeros(2, 5)).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        assert!(h.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reward_to_cost_examples() {
        assert_eq!(reward_to_cost(1.0, 1.0, 0.37).unwrap(), 0.0);
        assert_relative_eq!(reward_to_cost(0.0, 1.0, 0.1).unwrap(), 0.904988, epsilon = 1e-6);
        assert_relative_eq!(reward_to_cost(-3.0, 1.0, 4.0).unwrap(), 1.656854, epsilon = 1e-6);
    }

    #[test]
    fn serde_term_shape() {
        let t: CostTerm = serde_json::from_str(r#"{"residual":"head_height","norm":"smooth_abs","p":0.1,"weight":2.0}"#).unwrap();
        assert_eq!(t.norm(), Norm::smooth_abs(0.1));
        assert!(serde_json::from_str::<CostTerm>(r#"{"residual":"x","norm":"hinge","weight":1}"#).is_err());
    }
}
