//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The two-loop recursion and the bracketing/zoom line search follow the
//! textbook formulation (Nocedal & Wright, algorithms 7.4, 3.5 and 3.6). The
//! initial inverse-Hessian guess is scaled by `sᵀy / yᵀy` of the newest pair.

use std::collections::VecDeque;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct LbfgsOptions {
    pub history: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_iterations: usize,
    /// Stop once the gradient L2 norm drops below this.
    pub grad_tol: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            history: 10,
            c1: 1e-4,
            c2: 0.9,
            max_iterations: 20_000,
            grad_tol: 1e-3,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// `(value, grad_norm)` at the start point and after every accepted step.
    pub trace: Vec<(f64, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Point {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x0: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    evaluations: usize,
}

impl<F> LineSearch<'_, F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    fn eval(&mut self, alpha: f64) -> Result<Point> {
        let x: Vec<f64> = self.x0.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let mut grad = vec![0.0; x.len()];
        let value = (self.objective)(&x, &mut grad)?;
        self.evaluations += 1;
        let slope = dot(&grad, self.dir);
        Ok(Point { alpha, value, slope, x, grad })
    }

    fn armijo(&self, p: &Point) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Point) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    /// Returns an accepted point, or `None` if no step with sufficient
    /// decrease was found.
    fn run(&mut self, alpha_init: f64, max_evals: usize) -> Result<Option<Point>> {
        let mut prev: Option<Point> = None;
        let mut alpha = alpha_init;
        for i in 0..max_evals {
            let p = self.eval(alpha)?;
            if !p.value.is_finite() {
                alpha *= 0.1;
                continue;
            }
            let prev_value = prev.as_ref().map_or(self.f0, |q| q.value);
            if !self.armijo(&p) || (i > 0 && p.value >= prev_value) {
                return self.zoom(prev, p, max_evals - i - 1);
            }
            if self.curvature(&p) {
                return Ok(Some(p));
            }
            if p.slope >= 0.0 {
                return self.zoom(Some(p), prev.unwrap_or_else(|| self.origin()), max_evals - i - 1);
            }
            alpha = 2.0 * p.alpha;
            prev = Some(p);
        }
        Ok(prev)
    }

    fn origin(&self) -> Point {
        Point {
            alpha: 0.0,
            value: self.f0,
            slope: self.slope0,
            x: self.x0.to_vec(),
            grad: Vec::new(),
        }
    }

    /// `lo` always satisfies sufficient decrease and has the lower value.
    fn zoom(&mut self, lo: Option<Point>, mut hi: Point, budget: usize) -> Result<Option<Point>> {
        let mut lo = lo.unwrap_or_else(|| self.origin());
        for _ in 0..budget {
            let alpha = interpolate(&lo, &hi);
            let p = self.eval(alpha)?;
            if !self.armijo(&p) || p.value >= lo.value {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Ok(Some(p));
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = std::mem::replace(&mut lo, p);
                } else {
                    lo = p;
                }
            }
            if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1.0) {
                break;
            }
        }
        // A step with sufficient decrease is still progress.
        Ok((lo.alpha > 0.0).then_some(lo))
    }
}

/// Minimizer of the cubic through both end points, kept inside the middle
/// 80% of the bracket; bisection when the cubic is unusable.
fn interpolate(a: &Point, b: &Point) -> f64 {
    let (lo, hi) = (a.alpha.min(b.alpha), a.alpha.max(b.alpha));
    let width = hi - lo;
    let d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    let mut alpha = 0.5 * (lo + hi);
    if disc >= 0.0 {
        let d2 = disc.sqrt() * (b.alpha - a.alpha).signum();
        let cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
        if cand.is_finite() {
            alpha = cand;
        }
    }
    alpha.clamp(lo + 0.1 * width, hi - 0.1 * width)
}

/// Minimizes `objective(x, grad) -> value`, which must fill `grad`.
pub fn minimize<F>(mut objective: F, x0: Vec<f64>, opts: &LbfgsOptions) -> Result<LbfgsReport>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut value = objective(&x, &mut grad)?;
    let mut evaluations = 1;
    let mut gnorm = norm(&grad);
    let mut trace = vec![(value, gnorm)];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.history);
    let mut iterations = 0;

    let termination = loop {
        if gnorm < opts.grad_tol {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }

        // Two-loop recursion for d = -H g.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            memory.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }
        let alpha_init = if memory.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut search = LineSearch {
            objective: &mut objective,
            x0: &x,
            dir: &dir,
            f0: value,
            slope0: slope,
            c1: opts.c1,
            c2: opts.c2,
            evaluations: 0,
        };
        let accepted = search.run(alpha_init, opts.max_line_search)?;
        evaluations += search.evaluations;
        let Some(p) = accepted else {
            if memory.is_empty() {
                break Termination::LineSearchFailed;
            }
            // Retry once along steepest descent before giving up.
            memory.clear();
            continue;
        };

        let s: Vec<f64> = p.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = p.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if memory.len() == opts.history {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = p.x;
        grad = p.grad;
        value = p.value;
        gnorm = norm(&grad);
        iterations += 1;
        trace.push((value, gnorm));
    };

    Ok(LbfgsReport {
        x,
        value,
        grad_norm: gnorm,
        iterations,
        evaluations,
        termination,
        trace,
    })
}
