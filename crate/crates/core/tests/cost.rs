use horizon_bench::cost::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Nonlinear test residual: each row is `aᵀz + c·sin(bᵀz)`.
struct Residual {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DVector<f64>,
}

impl Residual {
    fn random(rng: &mut impl Rng, rows: usize, cols: usize) -> Self {
        Self {
            a: DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)),
            b: DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)),
            c: DVector::from_fn(rows, |_, _| rng.random_range(-0.5..0.5)),
        }
    }

    fn eval(&self, z: &DVector<f64>) -> DVector<f64> {
        let bz = &self.b * z;
        &self.a * z + self.c.component_mul(&bz.map(f64::sin))
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let bz = &self.b * z;
        let mut j = self.a.clone();
        for r in 0..j.nrows() {
            let s = self.c[r] * bz[r].cos();
            for col in 0..j.ncols() {
                j[(r, col)] += s * self.b[(r, col)];
            }
        }
        j
    }
}

fn random_spec(rng: &mut impl Rng, terms: usize) -> (CostSpec, Vec<usize>) {
    let dims: Vec<usize> = (0..terms).map(|_| rng.random_range(1..=3)).collect();
    let t = (0..terms)
        .map(|i| {
            let norm = if rng.random_bool(0.5) { Norm::quadratic() } else { Norm::smooth_abs(rng.random_range(0.01..2.0)) };
            CostTerm::new(&format!("r{i}"), norm, rng.random_range(0.0..10.0))
        })
        .collect();
    (CostSpec::new("random", t).unwrap(), dims)
}

fn layout(dims: &[usize], values: &DVector<f64>) -> ResidualVector {
    let mut r = ResidualVector::zeros(dims);
    r.values.copy_from(values);
    r
}

#[test]
fn norm_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let norm = if rng.random_bool(0.5) { Norm::quadratic() } else { Norm::smooth_abs(rng.random_range(0.01..5.0)) };
        let x: f64 = rng.random_range(-10.0..10.0);
        let h = 1e-4 * (x * x + norm.p * norm.p).sqrt().max(1e-2);
        let n = norm.eval(x).unwrap();
        let f = |x| norm.eval(x).unwrap();
        let d1 = (f(x + h).value - f(x - h).value) / (2.0 * h);
        let d2 = (f(x + h).d1 - f(x - h).d1) / (2.0 * h);
        assert!((n.d1 - d1).abs() < 1e-6, "{norm:?} x={x}: d1 {} vs {d1}", n.d1);
        assert!(rel_err(n.d2, d2) < 1e-4, "{norm:?} x={x}: d2 {} vs {d2}", n.d2);
    }
}

#[test]
fn cost_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let terms = rng.random_range(1..=5);
        let (spec, dims) = random_spec(&mut rng, terms);
        let rows: usize = dims.iter().sum();
        let nz = rng.random_range(1..=6);
        let res = Residual::random(&mut rng, rows, nz);
        let z = DVector::from_fn(nz, |_, _| rng.random_range(-2.0..2.0));
        let rv = layout(&dims, &res.eval(&z));
        let (g, _) = cost_derivatives(&spec, &rv, &res.jacobian(&z)).unwrap();
        let cost = |z: &DVector<f64>| cost_eval(&spec, &layout(&dims, &res.eval(z))).unwrap();
        let scale = g.amax().max(1.0);
        for k in 0..nz {
            let h = 1e-6;
            let mut zp = z.clone();
            zp[k] += h;
            let mut zm = z.clone();
            zm[k] -= h;
            let fd = (cost(&zp) - cost(&zm)) / (2.0 * h);
            assert!((g[k] - fd).abs() / scale < 1e-4, "component {k}: {} vs {fd}", g[k]);
        }
    }
}

#[test]
fn doubling_weights_doubles_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (spec, dims) = random_spec(&mut rng, 5);
        let rows: usize = dims.iter().sum();
        let rv = layout(&dims, &DVector::from_fn(rows, |_, _| rng.random_range(-3.0..3.0)));
        let c = cost_eval(&spec, &rv).unwrap();
        let c2 = cost_eval(&spec.with_scaled_weights(2.0), &rv).unwrap();
        assert!((c2 - 2.0 * c).abs() <= 1e-12 * c.abs().max(1.0));
    }
}

#[test]
fn gauss_newton_hessian_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let (spec, dims) = random_spec(&mut rng, 4);
        let rows: usize = dims.iter().sum();
        let nz = 5;
        let rv = layout(&dims, &DVector::from_fn(rows, |_, _| rng.random_range(-3.0..3.0)));
        let j = DMatrix::from_fn(rows, nz, |_, _| rng.random_range(-2.0..2.0));
        let (_, h) = cost_derivatives(&spec, &rv, &j).unwrap();
        for _ in 0..100 {
            let v = DVector::from_fn(nz, |_, _| rng.random_range(-1.0..1.0));
            assert!(v.dot(&(&h * &v)) >= -1e-10);
        }
    }
}

proptest! {
    #[test]
    fn smooth_abs_sandwich(x in -100.0f64..100.0, p in 1e-3f64..10.0, grow in 0.0f64..5.0) {
        let n = Norm::smooth_abs(p);
        let v = n.eval(x).unwrap().value;
        prop_assert!(x.abs() - p <= v + 1e-12);
        prop_assert!(v <= x.abs() + 1e-12);
        prop_assert_eq!(v, n.eval(-x).unwrap().value);
        let farther = x.abs() + grow;
        prop_assert!(n.eval(farther).unwrap().value >= v);
    }

    #[test]
    fn cost_is_non_negative_and_zero_only_at_zero(values in prop::collection::vec(-5.0f64..5.0, 4), w in 0.1f64..10.0, p in 0.01f64..1.0) {
        let spec = CostSpec::new("s", vec![
            CostTerm::new("a", Norm::smooth_abs(p), w),
            CostTerm::new("b", Norm::quadratic(), w),
        ]).unwrap();
        let r = ResidualVector::from_terms(&[&values[..2], &values[2..]]);
        let c = cost_eval(&spec, &r).unwrap();
        prop_assert!(c >= 0.0);
        prop_assert_eq!(c == 0.0, values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn norm_of_zero_is_zero(p in 1e-4f64..10.0) {
        prop_assert_eq!(Norm::smooth_abs(p).eval(0.0).unwrap().value, 0.0);
        prop_assert_eq!(Norm::quadratic().eval(0.0).unwrap().value, 0.0);
    }
}
