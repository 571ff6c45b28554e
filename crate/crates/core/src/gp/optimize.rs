//! Box-constrained Nelder-Mead minimizer used for hyperparameter fitting.
//!
//! Vertices are clamped to the box after every move. Non-finite objective
//! values are treated as `+inf` so failed evaluations are simply rejected.

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below
    /// `ftol * (1 + |f_best|)`...
    pub ftol: f64,
    /// ...and every vertex lies within `xtol` of the best one.
    pub xtol: f64,
    pub initial_step: f64,
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t * (b - a)
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

pub(crate) fn minimize<F>(mut f: F, start: &[f64], lower: &[f64], upper: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut x0 = start.to_vec();
    clamp_into(&mut x0, lower, upper);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), eval(&x0)));
    for i in 0..n {
        let mut xi = x0.clone();
        xi[i] += opts.initial_step;
        if xi[i] > upper[i] {
            xi[i] = x0[i] - opts.initial_step;
        }
        clamp_into(&mut xi, lower, upper);
        let fi = eval(&xi);
        simplex.push((xi, fi));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread_ok = best.is_finite() && (worst - best) <= opts.ftol * (1.0 + best.abs());
        let size_ok =
            simplex[1..].iter().all(|(x, _)| x.iter().zip(&simplex[0].0).all(|(a, b)| (a - b).abs() <= opts.xtol));
        if (spread_ok && size_ok) || evals.get() >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }

        let mut reflected = affine(&centroid, &simplex[n].0, -1.0);
        clamp_into(&mut reflected, lower, upper);
        let fr = eval(&reflected);

        if fr < simplex[0].1 {
            let mut expanded = affine(&centroid, &reflected, 2.0);
            clamp_into(&mut expanded, lower, upper);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }

        let outside = fr < simplex[n].1;
        let contracted =
            if outside { affine(&centroid, &reflected, 0.5) } else { affine(&centroid, &simplex[n].0, 0.5) };
        let fc = eval(&contracted);
        let accept = if outside { fc <= fr } else { fc < simplex[n].1 };
        if accept {
            simplex[n] = (contracted, fc);
            continue;
        }

        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = affine(&anchor, &vertex.0, 0.5);
            let fx = eval(&x);
            *vertex = (x, fx);
        }
    }

    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value }
}
