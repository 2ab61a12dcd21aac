//! Shared numerical kernels: fixed-step RK4, adaptive RKF45, a small dense
//! linear solver for the Newton iterations, and least-squares line fits used
//! by the convergence and validation reports.
//!
//! States are flat `&[f64]` slices; right-hand sides write their result into
//! a caller-provided buffer so the integrators stay allocation-free inside
//! the step loop.

use crate::{Error, Result};

/// Scratch buffers for classical fourth-order Runge–Kutta steps.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// One classical RK4 step of size `dt`, advancing `y` in place.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        f(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k1[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k2[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrate `y` from `t0` to `t1` with fixed step `dt` (the last step is
/// shortened to land on `t1` exactly). Returns the number of steps taken.
pub fn rk4_integrate<F>(f: &mut F, t0: f64, t1: f64, dt: f64, y: &mut [f64]) -> usize
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    assert!(dt > 0.0, "step size must be positive");
    let mut rk = Rk4::new(y.len());
    let mut t = t0;
    let mut steps = 0;
    // Tolerate one part in 2^40 of slack so that accumulating t by addition
    // does not produce a spurious final micro-step.
    let slack = dt * 1e-12;
    while t < t1 - slack {
        let h = dt.min(t1 - t);
        rk.step(f, t, y, h);
        t += h;
        steps += 1;
    }
    steps
}

/// Options for the adaptive Runge–Kutta–Fehlberg 4(5) driver.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial trial step; also the cap on step growth.
    pub dt_init: f64,
    /// Steps below this abort with a numerical error.
    pub dt_min: f64,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            dt_init: 1e-2,
            dt_min: 1e-14,
        }
    }
}

/// Adaptive RKF45 from `t0` to `t1`, advancing `y` in place. The fifth-order
/// solution is propagated; the embedded fourth-order solution only steers the
/// step size. Fails with a step-size-underflow error if the controller cannot
/// meet the tolerance.
pub fn rkf45_integrate<F>(
    f: &mut F,
    t0: f64,
    t1: f64,
    opts: AdaptiveOpts,
    y: &mut [f64],
) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];

    const A: [[f64; 5]; 5] = [
        [0.25, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
        [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
        [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
        [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ];
    const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
    const B5: [f64; 6] = [
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ];
    const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

    let mut t = t0;
    let mut dt = opts.dt_init.min(t1 - t0).max(opts.dt_min);
    let end_slack = (t1 - t0).abs() * 1e-14;
    while t < t1 - end_slack {
        let h = dt.min(t1 - t);
        f(t, y, &mut k[0]);
        for stage in 1..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += A[stage - 1][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            f(t + C[stage] * h, &tmp, &mut k[stage]);
        }
        let mut err_ratio: f64 = 0.0;
        for i in 0..n {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc5 += B5[j] * kj[i];
                acc4 += B4[j] * kj[i];
            }
            y5[i] = y[i] + h * acc5;
            let err = h * (acc5 - acc4);
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let r = (err / scale).abs();
            if !r.is_finite() {
                err_ratio = f64::INFINITY;
                break;
            }
            err_ratio = err_ratio.max(r);
        }
        if err_ratio <= 1.0 {
            y.copy_from_slice(&y5);
            t += h;
            let grow = if err_ratio > 0.0 {
                (0.9 * err_ratio.powf(-0.2)).min(5.0)
            } else {
                5.0
            };
            dt = h * grow;
        } else {
            let shrink = if err_ratio.is_finite() {
                (0.9 * err_ratio.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            dt = h * shrink;
        }
        if dt < opts.dt_min {
            return Err(Error::Numerical(format!(
                "adaptive step size underflow at t = {t:.6e} (dt = {dt:.3e})"
            )));
        }
    }
    Ok(())
}

/// Solve `a x = b` in place by LU with partial pivoting; `a` is n×n
/// row-major and is destroyed, `b` becomes the solution. Intended for the
/// small (≤ 32×32) Newton systems in this crate.
pub fn solve_dense(a: &mut [f64], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix/vector size mismatch");
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::Numerical(format!(
                "singular matrix in linear solve (pivot column {col})"
            )));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Least-squares line fit; returns (slope, intercept).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a line fit");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
