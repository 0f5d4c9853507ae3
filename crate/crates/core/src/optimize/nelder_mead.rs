//! Bounded Nelder-Mead simplex minimizer.
//!
//! Uses the dimension-adaptive coefficients of Gao and Han (2012). Trial
//! points are projected onto the box before evaluation, so every evaluated
//! point is feasible.

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once the spread of simplex values drops below this.
    pub f_tol: f64,
    /// ...and the simplex diameter (max-norm) drops below this.
    pub x_tol: f64,
    /// Initial simplex edge as a fraction of each box width.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            f_tol: 1e-10,
            x_tol: 1e-9,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` over the box `bounds` starting from `x0`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], bounds: &[(f64, f64)]) -> LocalResult
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert_eq!(n, bounds.len(), "bounds must match dimension");
        let nf = n as f64;
        let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
        let rho = 0.75 - 0.5 / nf;
        let sigma = 1.0 - 1.0 / nf.max(2.0);

        let project = |x: &mut [f64]| {
            for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
                *v = v.clamp(lo, hi);
            }
        };
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut start = x0.to_vec();
        project(&mut start);
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(start.clone());
        for i in 0..n {
            let mut v = start.clone();
            let (lo, hi) = bounds[i];
            let step = self.initial_step * (hi - lo).max(f64::MIN_POSITIVE);
            // step away from whichever face is nearer
            v[i] = if v[i] + step <= hi {
                v[i] + step
            } else {
                v[i] - step
            };
            project(&mut v);
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iterations {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let (best, worst, second) = (order[0], order[n], order[n - 1]);

            if values[worst] - values[best] <= self.f_tol && diameter(&simplex, best) <= self.x_tol
            {
                converged = true;
                break;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in &order[..n] {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += v;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= nf);

            affine(&mut trial, &centroid, &simplex[worst], alpha);
            project(&mut trial);
            let f_r = eval(&trial, &mut evals);

            if f_r < values[best] {
                affine(&mut trial2, &centroid, &simplex[worst], alpha * gamma);
                project(&mut trial2);
                let f_e = eval(&trial2, &mut evals);
                if f_e < f_r {
                    simplex[worst].copy_from_slice(&trial2);
                    values[worst] = f_e;
                } else {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = f_r;
                }
                continue;
            }
            if f_r < values[second] {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_r;
                continue;
            }

            // contraction: outside if the reflection helped at all
            let outside = f_r < values[worst];
            let coef = if outside { alpha * rho } else { -rho };
            affine(&mut trial2, &centroid, &simplex[worst], coef);
            project(&mut trial2);
            let f_c = eval(&trial2, &mut evals);
            let accept = if outside {
                f_c <= f_r
            } else {
                f_c < values[worst]
            };
            if accept {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_c;
                continue;
            }

            let anchor = simplex[best].clone();
            for &i in &order[1..] {
                for (v, a) in simplex[i].iter_mut().zip(&anchor) {
                    *v = a + sigma * (*v - a);
                }
                values[i] = eval(&simplex[i], &mut evals);
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("non-empty simplex");
        LocalResult {
            x: simplex[best].clone(),
            f: values[best],
            iterations,
            evaluations: evals,
            converged,
        }
    }
}

/// `out = c + t (c - w)`
fn affine(out: &mut [f64], c: &[f64], w: &[f64], t: f64) {
    for ((o, &ci), &wi) in out.iter_mut().zip(c).zip(w) {
        *o = ci + t * (ci - wi);
    }
}

fn diameter(simplex: &[Vec<f64>], best: usize) -> f64 {
    simplex
        .iter()
        .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 10.0,
            &[0.0, 0.0],
            &[(-5.0, 5.0), (-5.0, 5.0)],
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-4 && (res.x[1] + 0.5).abs() < 1e-4);
        assert!((res.f - 10.0).abs() < 1e-9);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_iterations: 10_000,
            ..NelderMead::default()
        };
        let res = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[(-3.0, 3.0), (-3.0, 3.0)],
        );
        assert!((res.x[0] - 1.0).abs() < 1e-3, "{res:?}");
        assert!((res.x[1] - 1.0).abs() < 1e-3, "{res:?}");
    }

    #[test]
    fn active_bound() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| x[0] + x[1] * x[1],
            &[0.5, 0.3],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        );
        assert!((res.x[0] + 1.0).abs() < 1e-8);
        assert!(res.x[1].abs() < 1e-4);
    }

    #[test]
    fn deterministic() {
        let nm = NelderMead::default();
        let f = |x: &[f64]| (x[0] * 3.0).sin() + x[1] * x[1] + 0.1 * x[2].powi(4);
        let b = [(-2.0, 2.0); 3];
        let a = nm.minimize(f, &[0.3, 0.2, 0.1], &b);
        let c = nm.minimize(f, &[0.3, 0.2, 0.1], &b);
        assert_eq!(a, c);
    }
}
