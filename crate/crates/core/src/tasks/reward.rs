//! Bounded reward shaping in the dm_control style.

/// Shape of the fall-off outside the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigmoid {
    Gaussian,
    Quadratic,
}

/// 1 inside `[lower, upper]`, decaying with distance outside so that a point `margin` away scores
/// `value_at_margin`. A zero margin gives a hard indicator.
pub fn tolerance(x: f64, lower: f64, upper: f64, margin: f64, sigmoid: Sigmoid, value_at_margin: f64) -> f64 {
    if (lower..=upper).contains(&x) {
        return 1.0;
    }
    if margin <= 0.0 {
        return 0.0;
    }
    let d = if x < lower { lower - x } else { x - upper } / margin;
    match sigmoid {
        Sigmoid::Gaussian => {
            let scale = (-2.0 * value_at_margin.ln()).sqrt();
            (-0.5 * (d * scale).powi(2)).exp()
        }
        Sigmoid::Quadratic => {
            let scaled = d * (1.0 - value_at_margin).sqrt();
            if scaled.abs() < 1.0 {
                1.0 - scaled * scaled
            } else {
                0.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inside_bounds_is_one() {
        assert_eq!(tolerance(1.0, 0.5, f64::INFINITY, 0.3, Sigmoid::Gaussian, 0.1), 1.0);
        assert_eq!(tolerance(0.0, 0.0, 0.0, 1.0, Sigmoid::Quadratic, 0.0), 1.0);
    }

    #[test]
    fn value_at_margin_convention() {
        let v = tolerance(0.2, 0.6, f64::INFINITY, 0.4, Sigmoid::Gaussian, 0.1);
        assert!((v - 0.1).abs() < 1e-12);
        let q = tolerance(1.0, 0.0, 0.0, 1.0, Sigmoid::Quadratic, 0.0);
        assert_eq!(q, 0.0);
        let half = tolerance(0.5, 0.0, 0.0, 1.0, Sigmoid::Quadratic, 0.0);
        assert!((half - 0.75).abs() < 1e-12);
    }

    #[test]
    fn hard_indicator_without_margin() {
        assert_eq!(tolerance(2.0, 0.0, 1.0, 0.0, Sigmoid::Gaussian, 0.1), 0.0);
    }
}
