//! Diagnostics over trajectories: Lyapunov estimates, error norms,
//! empirical convergence order and a tail-oscillation metric.

use crate::brownian::{integer_ratio, BrownianGrid};
use crate::error::{Error, Result};
use crate::integrators::{midpoint_step, MidpointOptions};
use crate::models::{build_linear_model, LinearParams};
use crate::trajectory::Trajectory;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Finite-horizon estimate `ln|z(T)| / T` of the Lyapunov exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub mu_hat: f64,
    pub t_end: f64,
    pub ln_abs_z_end: f64,
}

pub fn lyapunov_estimate(traj: &Trajectory) -> Result<LyapunovEstimate> {
    let z = traj.final_state().unwrap_or(f64::NAN);
    let t_end = traj.final_time();
    if z == 0.0 || !z.is_finite() || !(t_end > 0.0) {
        return Err(Error::EstimatorUndefined(z));
    }
    let ln_abs_z_end = z.abs().ln();
    Ok(LyapunovEstimate {
        mu_hat: ln_abs_z_end / t_end,
        t_end,
        ln_abs_z_end,
    })
}

/// Lyapunov estimate of the midpoint rule on a linear equation, with the
/// state renormalized to unit size after every step.
///
/// The scheme is homogeneous in `z`, so `ln|z_N|` is the sum of the
/// per-step log growth factors. This gives the same estimate as
/// [`lyapunov_estimate`] on the unnormalized trajectory while staying clear
/// of underflow: with `a = −19` the state itself drops below the smallest
/// double long before `T = 100`.
pub fn lyapunov_midpoint_linear(
    p: &LinearParams,
    grid: &BrownianGrid,
    h: f64,
    opts: &MidpointOptions,
) -> Result<LyapunovEstimate> {
    opts.validate()?;
    if p.z0 == 0.0 || !p.z0.is_finite() {
        return Err(Error::EstimatorUndefined(p.z0));
    }
    let coarse = grid.with_step(h)?;
    let model = build_linear_model(p);
    let mut ln_abs = p.z0.abs().ln();
    let mut z = p.z0.signum();
    for (n, &dw) in coarse.increments().iter().enumerate() {
        let next = midpoint_step(&model, z, coarse.dt(), dw, opts)
            .map_err(|e| e.at_step(n))?
            .state;
        if next == 0.0 {
            return Err(Error::EstimatorUndefined(0.0));
        }
        ln_abs += next.abs().ln();
        z = next.signum();
    }
    let t_end = coarse.t_end();
    Ok(LyapunovEstimate {
        mu_hat: ln_abs / t_end,
        t_end,
        ln_abs_z_end: ln_abs,
    })
}

/// Index pairs `(i, j)` with `a.times[i] == b.times[j]`, where one grid is
/// an integer refinement of the other and the coarse one ends inside the
/// fine one.
fn common_points(a: &Trajectory, b: &Trajectory) -> Result<Vec<(usize, usize)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Incompatible("empty trajectory".into()));
    }
    if a.len() == 1 || b.len() == 1 {
        return Ok(vec![(0, 0)]);
    }
    let incompatible = || {
        Error::Incompatible(format!(
            "grids with steps {} and {} are not nested",
            a.step(),
            b.step()
        ))
    };
    let (a_coarse, m) = if a.step() >= b.step() {
        (true, integer_ratio(a.step(), b.step()).ok_or_else(incompatible)?)
    } else {
        (false, integer_ratio(b.step(), a.step()).ok_or_else(incompatible)?)
    };
    let (coarse_len, fine_len) = if a_coarse {
        (a.len(), b.len())
    } else {
        (b.len(), a.len())
    };
    if (coarse_len - 1) * m > fine_len - 1 {
        return Err(Error::Incompatible(format!(
            "coarse grid of {coarse_len} points runs past the fine grid of {fine_len} points"
        )));
    }
    Ok((0..coarse_len)
        .map(|n| if a_coarse { (n, n * m) } else { (n * m, n) })
        .collect())
}

/// `max |x_n − x_ref(t_n)|` over the coarser grid's points. A non-finite
/// difference makes the result infinite.
pub fn sup_error(traj: &Trajectory, reference: &Trajectory) -> Result<f64> {
    let pairs = common_points(traj, reference)?;
    let (x, r) = (traj.states(), reference.states());
    Ok(pairs.iter().fold(0.0, |acc, &(i, j)| {
        let d = (x[i] - r[j]).abs();
        if d.is_nan() {
            f64::INFINITY
        } else {
            acc.max(d)
        }
    }))
}

fn index_at(traj: &Trajectory, t: f64) -> Result<usize> {
    let missing = || Error::Incompatible(format!("time {t} is not a grid point of the trajectory"));
    if t == 0.0 {
        return Ok(0);
    }
    let k = (t / traj.step()).round();
    if !(k >= 0.0) || (k * traj.step() - t).abs() > 1e-9 * t.abs() || k as usize >= traj.len() {
        return Err(missing());
    }
    Ok(k as usize)
}

/// `sqrt(mean over paths of (x(t) − x_ref(t))²)`; trajectory `k` is paired
/// with reference `k`.
pub fn ms_error(trajs: &[Trajectory], refs: &[Trajectory], t: f64) -> Result<f64> {
    if trajs.len() != refs.len() {
        return Err(Error::Incompatible(format!(
            "{} trajectories but {} references",
            trajs.len(),
            refs.len()
        )));
    }
    if trajs.is_empty() {
        return Err(Error::Incompatible("empty ensemble".into()));
    }
    let mut sum = 0.0;
    for (a, b) in trajs.iter().zip(refs) {
        let d = a.states()[index_at(a, t)?] - b.states()[index_at(b, t)?];
        sum += d * d;
    }
    Ok((sum / trajs.len() as f64).sqrt())
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn empirical_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::parameter("empirical order needs at least two points"));
    }
    if points
        .iter()
        .any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(Error::parameter("step sizes and errors must be positive and finite"));
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::parameter("step sizes must not all be equal"));
    }
    Ok(sxy / sxx)
}

/// `max |x_n − target|` over points with `t ≥ (1 − tail_fraction)·T`.
pub fn oscillation_metric(traj: &Trajectory, target: f64, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::parameter(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let start = (1.0 - tail_fraction) * traj.final_time();
    let mut tail = traj
        .times()
        .iter()
        .zip(traj.states())
        .filter(|(&t, _)| t >= start - 1e-12 * start.abs())
        .map(|(_, &x)| (x - target).abs())
        .peekable();
    if tail.peek().is_none() {
        return Err(Error::parameter("empty tail"));
    }
    Ok(tail.fold(0.0, |acc, d| if d.is_nan() { f64::INFINITY } else { acc.max(d) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::sample_brownian_grid;
    use crate::models::exact_linear_solution;
    use proptest::prelude::*;

    fn constant(h: f64, n: usize, v: f64) -> Trajectory {
        Trajectory::new(h, vec![v; n], "c", "s")
    }

    #[test]
    fn lyapunov_of_pure_decay() {
        let g = sample_brownian_grid(1, 10.0, 10).unwrap();
        let traj = exact_linear_solution(&LinearParams::new(-19.0, 0.0), &g);
        let est = lyapunov_estimate(&traj).unwrap();
        assert!((est.mu_hat + 19.0).abs() < 1e-12);
        assert_eq!(lyapunov_estimate(&constant(0.1, 11, 1.0)).unwrap().mu_hat, 0.0);
    }

    #[test]
    fn lyapunov_undefined_for_zero_end() {
        assert!(matches!(
            lyapunov_estimate(&constant(0.1, 5, 0.0)),
            Err(Error::EstimatorUndefined(_))
        ));
        assert!(lyapunov_estimate(&constant(0.1, 5, f64::NAN)).is_err());
    }

    #[test]
    fn renormalized_estimate_matches_direct_one() {
        let p = LinearParams::new(-1.0, -0.3).with_z0(0.5);
        let g = sample_brownian_grid(4, 8.0, 11).unwrap();
        let h = 8.0 / 2048.0;
        let traj = crate::integrators::integrate(
            &build_linear_model(&p),
            crate::integrators::Scheme::Midpoint,
            p.z0,
            &g,
            h,
            &MidpointOptions::default(),
        )
        .unwrap();
        let direct = lyapunov_estimate(&traj).unwrap();
        let renorm = lyapunov_midpoint_linear(&p, &g, h, &MidpointOptions::default()).unwrap();
        assert!((direct.mu_hat - renorm.mu_hat).abs() < 1e-12);
    }

    #[test]
    fn sup_error_basics() {
        let a = constant(0.1, 11, 0.5);
        let b = constant(0.1, 11, 1.0);
        assert_eq!(sup_error(&a, &a).unwrap(), 0.0);
        assert_eq!(sup_error(&a, &b).unwrap(), 0.5);
        let fine = constant(0.01, 101, 1.0);
        assert_eq!(sup_error(&a, &fine).unwrap(), 0.5);
        assert_eq!(sup_error(&fine, &a).unwrap(), 0.5);
        assert!(sup_error(&constant(0.03, 5, 0.0), &constant(0.02, 10, 0.0)).is_err());
        assert!(sup_error(&constant(0.1, 20, 0.0), &fine).is_err());
    }

    #[test]
    fn ms_error_basics() {
        let a = vec![constant(0.1, 11, 0.5)];
        let b = vec![constant(0.05, 21, 0.8)];
        assert_eq!(ms_error(&a, &a, 1.0).unwrap(), 0.0);
        assert!((ms_error(&a, &b, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(ms_error(&a, &[], 1.0).is_err());
        assert!(ms_error(&a, &b, 0.55).is_err());
    }

    #[test]
    fn order_of_power_laws() {
        assert!((empirical_order(&[(0.1, 0.1), (0.05, 0.05)]).unwrap() - 1.0).abs() < 1e-12);
        let pts: Vec<_> = (3..9).map(|k| {
            let h = 2f64.powi(-k);
            (h, 3.7 * h * h)
        }).collect();
        assert!((empirical_order(&pts).unwrap() - 2.0).abs() < 1e-10);
        assert!(empirical_order(&[(0.1, 0.1)]).is_err());
        assert!(empirical_order(&[(0.1, 0.0), (0.05, 0.1)]).is_err());
    }

    #[test]
    fn oscillation_basics() {
        assert_eq!(oscillation_metric(&constant(0.1, 11, 1.0), 1.0, 0.5).unwrap(), 0.0);
        let states: Vec<f64> = (0..21).map(|n| if n % 2 == 0 { 1.3 } else { 0.7 }).collect();
        let t = Trajectory::new(0.1, states, "m", "s");
        assert!((oscillation_metric(&t, 1.0, 0.5).unwrap() - 0.3).abs() < 1e-12);
        assert!(oscillation_metric(&t, 1.0, 0.0).is_err());
        assert!(oscillation_metric(&t, 1.0, 1.5).is_err());
        // only the tail counts
        let mut states = vec![5.0; 10];
        states.extend(vec![1.0; 11]);
        let t = Trajectory::new(0.1, states, "m", "s");
        assert_eq!(oscillation_metric(&t, 1.0, 0.5).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn error_norms_symmetric_and_nonnegative(
            xs in proptest::collection::vec(-10.0f64..10.0, 1..40),
            ys in proptest::collection::vec(-10.0f64..10.0, 1..40),
        ) {
            let n = xs.len().min(ys.len());
            let a = Trajectory::new(0.1, xs[..n].to_vec(), "a", "s");
            let b = Trajectory::new(0.1, ys[..n].to_vec(), "b", "s");
            let ab = sup_error(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, sup_error(&b, &a).unwrap());
            prop_assert_eq!(ab == 0.0, xs[..n] == ys[..n]);
            let t = (n - 1) as f64 * 0.1;
            let ms = ms_error(std::slice::from_ref(&a), std::slice::from_ref(&b), t).unwrap();
            prop_assert_eq!(ms, ms_error(&[b], &[a], t).unwrap());
            prop_assert!(ms >= 0.0);
        }

        #[test]
        fn order_recovers_exponent(p in 0.3f64..4.0, c in 1e-3f64..1e3) {
            let pts: Vec<_> = (2..8).map(|k| { let h = 2f64.powi(-k); (h, c * h.powf(p)) }).collect();
            prop_assert!((empirical_order(&pts).unwrap() - p).abs() < 1e-10);
        }
    }
}
