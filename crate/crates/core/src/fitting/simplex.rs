//! Nelder-Mead downhill simplex.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Relative simplex diameter at convergence.
    pub xtol: f64,
    /// Relative spread of vertex values at convergence.
    pub ftol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 10_000, xtol: 1e-8, ftol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimizes `f` from `x0`, with the initial simplex spanned by `step`
    /// along each axis. Non-finite values are treated as +inf.
    pub fn minimize<F>(&self, f: F, x0: &[f64], step: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let dim = x0.len();
        assert_eq!(dim, step.len());
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        pts.push(x0.to_vec());
        for i in 0..dim {
            let mut p = x0.to_vec();
            p[i] += step[i];
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            if self.is_converged(&pts, &vals) {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> =
                (0..dim).map(|j| pts[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64).collect();
            let along = |coef: f64| -> Vec<f64> {
                (0..dim).map(|j| centroid[j] + coef * (pts[dim][j] - centroid[j])).collect()
            };

            let xr = along(-REFLECT);
            let fr = eval(&xr);
            if fr < vals[0] {
                let xe = along(-EXPAND);
                let fe = eval(&xe);
                if fe < fr {
                    pts[dim] = xe;
                    vals[dim] = fe;
                } else {
                    pts[dim] = xr;
                    vals[dim] = fr;
                }
                continue;
            }
            if fr < vals[dim - 1] {
                pts[dim] = xr;
                vals[dim] = fr;
                continue;
            }
            // outside contraction when the reflection beat the worst vertex
            let xc = if fr < vals[dim] { along(-CONTRACT) } else { along(CONTRACT) };
            let fc = eval(&xc);
            if fc < vals[dim].min(fr) {
                pts[dim] = xc;
                vals[dim] = fc;
                continue;
            }
            for i in 1..=dim {
                for j in 0..dim {
                    pts[i][j] = pts[0][j] + SHRINK * (pts[i][j] - pts[0][j]);
                }
                vals[i] = eval(&pts[i]);
            }
        }

        let best = (0..=dim).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
        Minimum { x: pts[best].clone(), f: vals[best], iterations, converged }
    }

    fn is_converged(&self, pts: &[Vec<f64>], vals: &[f64]) -> bool {
        let best = &pts[0];
        let scale = 1.0 + best.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diameter = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread = vals[vals.len() - 1] - vals[0];
        vals[0].is_finite()
            && diameter <= self.xtol * scale
            && spread <= self.ftol * (vals[0].abs() + self.ftol)
    }
}
