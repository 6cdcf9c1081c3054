//! Quasi-Newton minimiser used by the QMLE and LAD baselines.

/// Result of a minimisation run.
#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Largest allowed step (Euclidean) in the search space.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iter: 500,
            max_step: 2.0,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BFGS with an inverse-Hessian update and Armijo backtracking.
///
/// `f` returns `None` (or a non-finite value) outside the domain; the line
/// search treats that as a failed trial and backtracks.
pub(crate) fn bfgs<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Outcome
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = match f(&x) {
        Some((v, g)) if v.is_finite() && g.iter().all(|c| c.is_finite()) => (v, g),
        _ => {
            return Outcome {
                x,
                iterations: 0,
                converged: false,
            }
        }
    };
    let identity = |d: usize| {
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 1.0;
        }
        h
    };
    let mut h = identity(d);
    let mut first = true;

    for iter in 0..opts.max_iter {
        if norm(&g) < opts.grad_tol {
            return Outcome {
                x,
                iterations: iter,
                converged: true,
            };
        }
        let mut p: Vec<f64> = (0..d)
            .map(|i| -(0..d).map(|j| h[i * d + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            h = identity(d);
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let pn = norm(&p);
        if pn > opts.max_step {
            let s = opts.max_step / pn;
            p.iter_mut().for_each(|v| *v *= s);
            slope *= s;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + step * pi).collect();
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite()
                    && gt.iter().all(|c| c.is_finite())
                    && ft <= fx + 1e-4 * step * slope
                {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            return Outcome {
                x,
                iterations: iter,
                converged: false,
            };
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if first {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
                first = false;
            }
            let hy: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| h[i * d + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..d {
                for j in 0..d {
                    h[i * d + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fn_;
        g = gn;
    }
    let converged = norm(&g) < opts.grad_tol;
    Outcome {
        x,
        iterations: opts.max_iter,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        (v, g)
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let out = bfgs(|x| Some(rosenbrock(x)), &[-1.2, 1.0], &BfgsOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bfgs_respects_undefined_region() {
        // minimum of (x-2)^2 with the domain x < 3
        let f = |x: &[f64]| (x[0] < 3.0).then(|| ((x[0] - 2.0).powi(2), vec![2.0 * (x[0] - 2.0)]));
        let out = bfgs(f, &[-5.0], &BfgsOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 2.0).abs() < 1e-6);
    }
}
