//! Small unconstrained minimizers: Nelder–Mead for the low-dimensional
//! measurement-angle problems, limited-memory BFGS for the separable-ensemble
//! fits.

/// Settings shared by the measure optimizers (discord and REE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOpts {
    pub seed: u64,
    pub restarts: usize,
    /// Points per axis of the discord angle grid.
    pub grid: usize,
    /// Simplex contraction tolerance.
    pub tol: f64,
}

impl Default for OptimizerOpts {
    fn default() -> Self {
        Self {
            seed: 42,
            restarts: 32,
            grid: 64,
            tol: 1e-9,
        }
    }
}

/// SplitMix64 step; derives independent per-restart seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Initial simplex edge length along each coordinate.
    pub step: f64,
    /// Stop when every vertex is within this distance (max-norm) of the best.
    pub xtol: f64,
    /// Stop when the function spread over the simplex is below this.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.1,
            xtol: 1e-9,
            ftol: 1e-15,
            max_iter: 500,
        }
    }
}

impl NelderMead {
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = &simplex[0];
            let size = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let spread = simplex[n].1 - best.1;
            if size <= self.xtol || spread.abs() <= self.ftol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let xr = along(-alpha);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(-gamma);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-rho);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let x_best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = x_best
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, v)| b + sigma * (v - b))
                    .collect();
                let v = eval(&x);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            evaluations,
            converged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Lbfgs {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the max-norm of the gradient falls below this.
    pub gtol: f64,
    /// Stop after `patience` consecutive steps that each improve the value
    /// by less than `ftol * (1 + |f|)`.
    pub ftol: f64,
    pub patience: usize,
}

impl Default for Lbfgs {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 2000,
            gtol: 1e-10,
            ftol: 1e-12,
            patience: 10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Lbfgs {
    /// `f(x, grad)` returns the value and writes the gradient. Non-finite
    /// values are treated as infeasible and trigger backtracking.
    pub fn minimize(&self, mut f: impl FnMut(&[f64], &mut [f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut g = vec![0.0; n];
        let mut value = f(&x, &mut g);
        let mut evaluations = 1;
        let mut history: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> =
            std::collections::VecDeque::with_capacity(self.memory);
        let mut stalled = 0;
        let mut iterations = 0;
        let mut converged = false;
        let mut x_new = vec![0.0; n];
        let mut g_new = vec![0.0; n];

        if !value.is_finite() {
            return Minimum { x, value, iterations, evaluations, converged };
        }

        while iterations < self.max_iter {
            if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= self.gtol {
                converged = true;
                break;
            }
            iterations += 1;

            // two-loop recursion
            let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, y, rho) in history.iter().rev() {
                let a = rho * dot(s, &d);
                for (di, yi) in d.iter_mut().zip(y) {
                    *di -= a * yi;
                }
                alphas.push(a);
            }
            if let Some((s, y, _)) = history.back() {
                let gamma = dot(s, y) / dot(y, y);
                d.iter_mut().for_each(|v| *v *= gamma);
            } else {
                let gn = dot(&g, &g).sqrt();
                d.iter_mut().for_each(|v| *v /= gn.max(1.0));
            }
            for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &d);
                for (di, si) in d.iter_mut().zip(s) {
                    *di += (a - b) * si;
                }
            }
            let mut slope = dot(&g, &d);
            if slope >= 0.0 {
                history.clear();
                d = g.iter().map(|v| -v).collect();
                slope = -dot(&g, &g);
            }

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                for i in 0..n {
                    x_new[i] = x[i] + t * d[i];
                }
                let v = f(&x_new, &mut g_new);
                evaluations += 1;
                if v.is_finite() && v <= value + 1e-4 * t * slope {
                    let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 1e-300 {
                        if history.len() == self.memory {
                            history.pop_front();
                        }
                        history.push_back((s, y, 1.0 / sy));
                    }
                    let improvement = value - v;
                    x.copy_from_slice(&x_new);
                    g.copy_from_slice(&g_new);
                    if improvement <= self.ftol * (1.0 + v.abs()) {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                    value = v;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                if history.is_empty() {
                    converged = true;
                    break;
                }
                history.clear();
                continue;
            }
            if stalled >= self.patience {
                converged = true;
                break;
            }
        }
        Minimum { x, value, iterations, evaluations, converged }
    }
}
