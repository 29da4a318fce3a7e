use std::f64::consts::PI;

use super::{Domain, MapFamily};

/// `f(x) = x + x^2 sin(pi/x)` on `[-1, 1]` (with `f(0) = 0`), continued
/// with slope `1/2` through `(1, 1)` and `(-1, -1)` outside.
pub fn diabolic_base(x: f64) -> f64 {
    if x > 1.0 {
        0.5 * (x + 1.0)
    } else if x < -1.0 {
        0.5 * (x + 1.0) - 1.0
    } else if x == 0.0 {
        0.0
    } else {
        x + x * x * (PI / x).sin()
    }
}

pub fn diabolic_base_derivative(x: f64) -> f64 {
    if x.abs() > 1.0 {
        0.5
    } else if x == 0.0 {
        1.0
    } else {
        1.0 + 2.0 * x * (PI / x).sin() - PI * (PI / x).cos()
    }
}

/// The pair `f_0(x) = f(x) + 1`, `f_1(x) = f(x - 1)` on `[-4, 4]`.
///
/// Each map has a single attracting fixed point (`3` and `-2`), while
/// `f_1 o f_0 = f o f` has infinitely many attracting fixed points
/// accumulating at `0`.
#[derive(Debug, Clone)]
pub struct DiabolicFamily {
    domain: Domain,
}

impl DiabolicFamily {
    pub fn new() -> Self {
        Self { domain: Domain::cube(1, -4.0, 4.0).expect("valid box") }
    }
}

impl Default for DiabolicFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl MapFamily for DiabolicFamily {
    fn name(&self) -> &str {
        "diabolic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn alphabet_size(&self) -> usize {
        2
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn apply(&self, i: usize, x: &[f64], out: &mut [f64]) {
        out[0] = match i {
            0 => diabolic_base(x[0]) + 1.0,
            _ => diabolic_base(x[0] - 1.0),
        };
    }

    fn jacobian_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        out[0] = match i {
            0 => diabolic_base_derivative(x[0]),
            _ => diabolic_base_derivative(x[0] - 1.0),
        };
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "name": "diabolic", "kind": "diabolic", "domain": self.domain })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{evaluate, finite_difference_jacobian, jacobian};

    #[test]
    fn continuity_at_joins() {
        for x in [1.0f64, -1.0] {
            let inside = diabolic_base(x - x.signum() * 1e-12);
            let outside = diabolic_base(x + x.signum() * 1e-12);
            assert!((inside - outside).abs() < 1e-9);
        }
    }

    #[test]
    fn stays_inside_unit_interval() {
        for k in 1..20000 {
            let x = -1.0 + 2.0 * k as f64 / 20000.0;
            assert!(diabolic_base(x).abs() < 1.0);
        }
    }

    #[test]
    fn fixed_points_of_the_pair() {
        let f = DiabolicFamily::new();
        assert_eq!(evaluate(&f, 0, &[3.0]).unwrap(), vec![3.0]);
        assert_eq!(evaluate(&f, 1, &[-2.0]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn linear_tail_slope() {
        let f = DiabolicFamily::new();
        assert_eq!(jacobian(&f, 0, &[2.5]).unwrap()[(0, 0)], 0.5);
        assert_eq!(jacobian(&f, 1, &[-3.0]).unwrap()[(0, 0)], 0.5);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let f = DiabolicFamily::new();
        for k in 0..=160 {
            let x = -4.0 + k as f64 / 20.0;
            for i in 0..2 {
                // skip the oscillation at 0 and the kinks at +-1
                let arg = if i == 0 { x } else { x - 1.0 };
                if arg.abs() < 0.2 || (arg.abs() - 1.0).abs() < 1e-3 {
                    continue;
                }
                let a = jacobian(&f, i, &[x]).unwrap()[(0, 0)];
                let b = finite_difference_jacobian(&f, i, &[x], 1e-6)[(0, 0)];
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "x={x} i={i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn self_map_of_box() {
        let f = DiabolicFamily::new();
        for k in 0..=800 {
            let x = -4.0 + k as f64 / 100.0;
            for i in 0..2 {
                assert!(f.domain().contains(&evaluate(&f, i, &[x]).unwrap()));
            }
        }
    }
}
