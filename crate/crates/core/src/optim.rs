//! Derivative-free minimization (Nelder–Mead simplex).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex lies within `tol · max(1, ‖best‖)` of the
    /// best vertex.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial edge length relative to each coordinate's magnitude; zero
    /// coordinates get this as an absolute step.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `f` from `x0`. Non-finite objective values are treated as
/// `+∞`, so the search never accepts them. The returned value is never
/// above `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for k in 0..d {
        let mut v = x0.to_vec();
        let step = if x0[k].abs() > 1e-8 {
            opts.initial_step * x0[k].abs()
        } else {
            opts.initial_step
        };
        v[k] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut trial2 = vec![0.0; d];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[d];
        let scale = simplex[best].iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < opts.tol * scale {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..d] {
            for (c, v) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += v / d as f64;
            }
        }
        let second_worst = values[order[d - 1]];
        let along = |t: f64, out: &mut [f64], w: &[f64], c: &[f64]| {
            for ((o, cv), wv) in out.iter_mut().zip(c).zip(w) {
                *o = cv + t * (cv - wv);
            }
        };

        along(1.0, &mut trial, &simplex[worst], &centroid);
        let reflected = eval(&trial);
        if reflected < values[best] {
            along(2.0, &mut trial2, &simplex[worst], &centroid);
            let expanded = eval(&trial2);
            if expanded < reflected {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = expanded;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = reflected;
            }
            continue;
        }
        if reflected < second_worst {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = reflected;
            continue;
        }
        let (t, reference) = if reflected < values[worst] {
            (0.5, reflected)
        } else {
            (-0.5, values[worst])
        };
        along(t, &mut trial2, &simplex[worst], &centroid);
        let contracted = eval(&trial2);
        if contracted < reference {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = contracted;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (v, a) in simplex[idx].iter_mut().zip(&anchor) {
                *v = a + 0.5 * (*v - a);
            }
            values[idx] = eval(&simplex[idx]);
        }
    }
    let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_iter: 5000,
            ..Default::default()
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn nonsmooth_and_one_dimensional() {
        let m = nelder_mead(
            |x| (x[0] - 3.0).abs() + 2.0 * (x[1] + 1.0).abs(),
            &[0.0, 0.0],
            &Default::default(),
        );
        assert!((m.x[0] - 3.0).abs() < 1e-6 && (m.x[1] + 1.0).abs() < 1e-6, "{m:?}");
        let m = nelder_mead(|x| (x[0] - 0.3).powi(2), &[5.0], &Default::default());
        assert!((m.x[0] - 0.3).abs() < 1e-7);
    }

    #[test]
    fn never_worse_than_start_and_skips_nan() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { -x[0] };
        let m = nelder_mead(f, &[0.0], &Default::default());
        assert!(m.value <= 0.0 && m.x[0] <= 0.5);
    }
}
