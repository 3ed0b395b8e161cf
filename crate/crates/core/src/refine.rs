//! Derivative-free local maximization (Nelder–Mead simplex).

use crate::scalar::{lit, Real};

#[derive(Debug, Clone)]
pub struct SimplexResult<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `f` starting from `start` with an axis-aligned initial simplex of
/// edge `scale`. Converges when the spread of simplex values falls below
/// `tol · (1 + |best|)`. Non-finite objective values are treated as `−∞`.
pub fn maximize<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    start: &[T],
    scale: T,
    tol: T,
    max_iter: usize,
) -> SimplexResult<T> {
    let dim = start.len();
    let mut eval = |p: &[T]| {
        let v = -f(p);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += scale;
        simplex.push(p);
    }
    let mut values: Vec<T> = simplex.iter().map(|p| eval(p)).collect();

    let (alpha, gamma, rho, sigma) = (T::one(), lit::<T>(2.0), lit::<T>(0.5), lit::<T>(0.5));
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[dim];
        if best.is_finite() && (worst - best).abs() <= tol * (T::one() + best.abs()) {
            converged = true;
            break;
        }

        let inv = T::one() / T::from_usize(dim).unwrap();
        let centroid: Vec<T> = (0..dim).map(|i| simplex[..dim].iter().map(|p| p[i]).sum::<T>() * inv).collect();
        let along =
            |coef: T| -> Vec<T> { centroid.iter().zip(&simplex[dim]).map(|(&c, &w)| c + coef * (c - w)).collect() };

        let reflected = along(alpha);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(gamma);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let contracted = if fr < values[dim] { along(rho) } else { along(-rho) };
        let fc = eval(&contracted);
        if fc < values[dim].min(fr) {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        for i in 1..=dim {
            let shrunk: Vec<T> = simplex[0].iter().zip(&simplex[i]).map(|(&b, &p)| b + sigma * (p - b)).collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }

    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    SimplexResult { point: simplex[best].clone(), value: -values[best], iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let r = maximize(
            |p: &[f64]| 5.0 - (p[0] - 1.0).powi(2) - 2.0 * (p[1] + 0.5).powi(2),
            &[0.0, 0.0],
            0.5,
            1e-14,
            2000,
        );
        assert!(r.converged);
        assert!((r.value - 5.0).abs() < 1e-10);
        assert!((r.point[0] - 1.0).abs() < 1e-4 && (r.point[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn respects_infeasible_region() {
        let r = maximize(|p: &[f64]| if p[0] > 1.0 { f64::NAN } else { p[0] }, &[0.0], 0.1, 1e-12, 500);
        assert!(r.point[0] <= 1.0 && r.value > 0.99);
    }
}
