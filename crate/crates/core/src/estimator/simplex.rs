//! Nelder-Mead simplex minimization inside the unit hypercube.
//!
//! Trial points are clamped to the cube before evaluation, so the objective
//! is never called outside it.

#[derive(Clone, Debug)]
pub(crate) struct SimplexOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexOptions {
    pub initial_step: f64,
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub max_restarts: usize,
}

fn clamp(u: &mut [f64]) {
    u.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

struct Counter<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counter<'_, F> {
    fn call(&mut self, u: &[f64]) -> f64 {
        self.evals += 1;
        sanitize((self.f)(u))
    }
}

fn one_pass<F: Fn(&[f64]) -> f64>(
    start: &[f64],
    start_value: f64,
    opts: &SimplexOptions,
    budget: usize,
    f: &mut Counter<'_, F>,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut points: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut values = vec![start_value];
    for i in 0..dim {
        let mut p = start.to_vec();
        // Step away from the nearer face so the vertex stays distinct.
        p[i] += if p[i] + opts.initial_step <= 1.0 {
            opts.initial_step
        } else {
            -opts.initial_step
        };
        clamp(&mut p);
        values.push(f.call(&p));
        points.push(p);
    }
    let spent_at_start = f.evals;

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[dim]);
        let spread = worst - best;
        let diameter = points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&points[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.tolerance * best.abs() || diameter < 1e-14 || f.evals - spent_at_start >= budget {
            return (points.swap_remove(0), values[0]);
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| points[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&points[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect();
            clamp(&mut p);
            p
        };

        let reflected = along(-1.0);
        let fr = f.call(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f.call(&expanded);
            if fe < fr {
                points[dim] = expanded;
                values[dim] = fe;
            } else {
                points[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            points[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[dim] {
            let c = along(-0.5);
            let v = f.call(&c);
            (c, v)
        } else {
            let c = along(0.5);
            let v = f.call(&c);
            (c, v)
        };
        if fc < values[dim].min(fr) {
            points[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=dim {
            let mut p: Vec<f64> = points[0]
                .iter()
                .zip(&points[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            clamp(&mut p);
            values[i] = f.call(&p);
            points[i] = p;
        }
    }
}

/// Minimizes `f` from `start`, restarting with a fresh simplex around the
/// incumbent until a restart stops improving it.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(start: &[f64], opts: &SimplexOptions, f: F) -> SimplexOutcome {
    let mut counter = Counter { f: &f, evals: 0 };
    let mut best = start.to_vec();
    clamp(&mut best);
    let mut best_value = counter.call(&best);
    let mut restarts = 0;
    let mut step = opts.initial_step;
    loop {
        let remaining = opts.max_evaluations.saturating_sub(counter.evals);
        if remaining == 0 {
            break;
        }
        let pass_opts = SimplexOptions {
            initial_step: step,
            ..*opts
        };
        let (p, v) = one_pass(&best, best_value, &pass_opts, remaining, &mut counter);
        let gain = best_value - v;
        if v < best_value {
            best = p;
            best_value = v;
        }
        if restarts >= opts.max_restarts || gain <= opts.tolerance * best_value.abs() {
            break;
        }
        restarts += 1;
        step *= 0.5;
    }
    SimplexOutcome {
        best,
        best_value,
        evaluations: counter.evals,
        restarts,
    }
}
