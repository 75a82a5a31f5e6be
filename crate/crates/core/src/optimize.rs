//! Local maximization of `min_j g_j(x)` by sequential linear programming with
//! a box trust region.
//!
//! Each iteration linearizes every term at the current point and solves
//!
//! ```text
//! maximize t  subject to  g_j(x) + ∇g_j(x)·δ >= t,  |δ_i| <= radius,  lo <= x + δ <= hi
//! ```
//!
//! The step is accepted when a separate merit function (normally the true
//! minimum, possibly with extra penalties the linearization cannot see)
//! improves; the radius then grows or shrinks with the ratio of actual to
//! predicted improvement.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

/// Value and sparse gradient of one term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub value: f64,
    pub grad: Vec<(usize, f64)>,
}

impl Term {
    pub fn new(value: f64, grad: Vec<(usize, f64)>) -> Self {
        Self { value, grad }
    }

    pub fn negated(&self) -> Term {
        Term {
            value: -self.value,
            grad: self.grad.iter().map(|&(i, g)| (i, -g)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlpOptions {
    pub initial_radius: f64,
    pub max_radius: f64,
    pub min_radius: f64,
    pub max_iterations: usize,
    /// Stop once the predicted improvement falls below this.
    pub min_predicted_gain: f64,
}

impl Default for SlpOptions {
    fn default() -> Self {
        Self {
            initial_radius: 0.05,
            max_radius: 0.5,
            min_radius: 1e-13,
            max_iterations: 400,
            min_predicted_gain: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlpOutcome {
    pub x: Vec<f64>,
    pub merit: f64,
    pub iterations: usize,
}

/// Maximizes `merit` starting from `x0`, using `terms` as its local linear
/// model. `terms` returns `None` where no model is available; such points
/// are never accepted.
pub fn maximize_min<T, M>(
    x0: &[f64],
    bounds: &[(f64, f64)],
    terms: T,
    merit: M,
    opts: &SlpOptions,
) -> SlpOutcome
where
    T: Fn(&[f64]) -> Option<Vec<Term>>,
    M: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    debug_assert_eq!(bounds.len(), n);
    let mut x: Vec<f64> = x0
        .iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
        .collect();
    let mut f = merit(&x);
    let mut radius = opts.initial_radius;
    let mut iterations = 0;

    while iterations < opts.max_iterations && radius >= opts.min_radius {
        iterations += 1;
        let Some(model) = terms(&x) else { break };
        let Some((step, t)) = solve_step(&x, bounds, &model, radius) else {
            radius *= 0.25;
            continue;
        };
        let predicted = t - f;
        if predicted <= opts.min_predicted_gain {
            break;
        }
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        let f_trial = merit(&trial);
        let ratio = (f_trial - f) / predicted;
        let step_len = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if ratio > 0.0 && f_trial > f {
            x = trial;
            f = f_trial;
            if ratio > 0.75 && step_len >= 0.9 * radius {
                radius = (2.0 * radius).min(opts.max_radius);
            } else if ratio < 0.25 {
                radius *= 0.5;
            }
        } else {
            radius = 0.25 * step_len.min(radius);
        }
    }
    SlpOutcome {
        x,
        merit: f,
        iterations,
    }
}

fn solve_step(
    x: &[f64],
    bounds: &[(f64, f64)],
    model: &[Term],
    radius: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let deltas: Vec<_> = x
        .iter()
        .zip(bounds)
        .map(|(&xi, &(lo, hi))| {
            let a = (-radius).max(lo - xi).min(0.0);
            let b = radius.min(hi - xi).max(0.0);
            lp.add_var(0.0, (a, b))
        })
        .collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for term in model {
        let mut expr = LinearExpr::empty();
        for &(i, g) in &term.grad {
            if g != 0.0 {
                expr.add(deltas[i], g);
            }
        }
        expr.add(t, -1.0);
        lp.add_constraint(expr, ComparisonOp::Ge, -term.value);
    }
    let sol = lp.solve().ok()?;
    let step: Vec<f64> = deltas.iter().map(|v| sol[*v]).collect();
    Some((step, sol[t]))
}

/// Central finite-difference gradient, as a dense sparse-vector.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<(usize, f64)> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (i, (up - down) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_of(terms: &[Term]) -> f64 {
        terms.iter().map(|t| t.value).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn solves_a_sharp_minimax_corner() {
        // max min(1 - |x - 0.3|, 1 - |y + 0.2|, 2 - x - y) has its peak at (0.3, -0.2)
        let terms = |x: &[f64]| {
            Some(vec![
                Term::new(1.0 - (x[0] - 0.3), vec![(0, -1.0)]),
                Term::new(1.0 + (x[0] - 0.3), vec![(0, 1.0)]),
                Term::new(1.0 - (x[1] + 0.2), vec![(1, -1.0)]),
                Term::new(1.0 + (x[1] + 0.2), vec![(1, 1.0)]),
                Term::new(2.0 - x[0] - x[1], vec![(0, -1.0), (1, -1.0)]),
            ])
        };
        let merit = |x: &[f64]| min_of(&terms(x).unwrap());
        let out = maximize_min(
            &[2.0, 2.0],
            &[(-5.0, 5.0); 2],
            terms,
            merit,
            &SlpOptions::default(),
        );
        assert!((out.x[0] - 0.3).abs() < 1e-10, "{:?}", out);
        assert!((out.x[1] + 0.2).abs() < 1e-10, "{:?}", out);
        assert!((out.merit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn handles_smooth_terms_with_bounds() {
        // max min(x^2 + y, 3 - y) over x in [0, 1]: optimum x = 1, y = 1, value 2
        let terms = |x: &[f64]| {
            Some(vec![
                Term::new(x[0] * x[0] + x[1], vec![(0, 2.0 * x[0]), (1, 1.0)]),
                Term::new(3.0 - x[1], vec![(1, -1.0)]),
            ])
        };
        let merit = |x: &[f64]| min_of(&terms(x).unwrap());
        let out = maximize_min(
            &[0.2, 0.0],
            &[(0.0, 1.0), (-10.0, 10.0)],
            terms,
            merit,
            &SlpOptions::default(),
        );
        assert!((out.merit - 2.0).abs() < 1e-9, "{:?}", out);
        assert!((out.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_gradient() {
        let g = numeric_gradient(|x| x[0] * x[0] * x[1], &[1.5, -2.0], 1e-6);
        assert!((g[0].1 - (-6.0)).abs() < 1e-6);
        assert!((g[1].1 - 2.25).abs() < 1e-6);
    }
}
