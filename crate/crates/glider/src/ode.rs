//! Embedded Dormand–Prince 5(4) integrator with dense output.
//!
//! The vector field here is smooth and only mildly stiff through quadratic
//! growth in backward time, which the callers handle with escape termination
//! rather than an implicit method. A stateful control callback runs after
//! every accepted step and can stop the integration with a caller-defined
//! reason.

use std::ops::ControlFlow;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
/// Steps below this fraction of the local time scale count as underflow.
const STEP_UNDERFLOW: f64 = 1e-14;

// Dormand–Prince coefficients.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the 5th and the embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output projection: interp coefficient j gets `sum_i k_i * P[i][j]`.
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status<R> {
    ReachedEnd,
    Stopped(R),
    StepSizeUnderflow,
    MaxSteps,
}

/// Quartic dense-output segment covering one accepted step.
#[derive(Debug, Clone)]
struct DenseSegment<const N: usize> {
    t0: f64,
    h: f64,
    y0: [f64; N],
    coeffs: [[f64; N]; 4],
}

impl<const N: usize> DenseSegment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let mut acc = [0.0; N];
        let mut power = theta;
        for coeff in &self.coeffs {
            for i in 0..N {
                acc[i] += power * coeff[i];
            }
            power *= theta;
        }
        let mut y = self.y0;
        for i in 0..N {
            y[i] += self.h * acc[i];
        }
        y
    }
}

/// Adaptive solution with the accepted steps and a continuous interpolant.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize, R> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub status: Status<R>,
    segments: Vec<DenseSegment<N>>,
}

impl<const N: usize, R> Solution<N, R> {
    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> [f64; N] {
        *self.states.last().unwrap()
    }

    /// Evaluates the dense interpolant; `t` is clamped to the solved span.
    pub fn sample(&self, t: f64) -> [f64; N] {
        if self.segments.is_empty() {
            return self.states[0];
        }
        let forward = self.segments[0].h > 0.0;
        let idx = self.segments.partition_point(|seg| {
            if forward {
                seg.t0 + seg.h <= t
            } else {
                seg.t0 + seg.h >= t
            }
        });
        let idx = idx.min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (either direction).
///
/// `control` runs after each accepted step; returning `Break(reason)` stops
/// the integration with `Status::Stopped(reason)`.
pub fn integrate<const N: usize, R>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    options: &OdeOptions,
    mut control: impl FnMut(f64, &[f64; N]) -> ControlFlow<R>,
) -> Solution<N, R> {
    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut segments = Vec::new();

    if t0 == t1 {
        return Solution {
            times,
            states,
            status: Status::ReachedEnd,
            segments,
        };
    }

    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = options
        .initial_step
        .map(|h| h.abs() * dir)
        .unwrap_or_else(|| initial_step(&f, t0, &y0, &k1, dir, options));

    let mut status = Status::MaxSteps;
    for _ in 0..options.max_steps {
        if h.abs() < STEP_UNDERFLOW * t.abs().max(1.0) {
            status = Status::StepSizeUnderflow;
            break;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        yi[i] += h * a * kj[i];
                    }
                }
            }
            k[stage + 1] = f(t + C[stage] * h, &yi);
        }

        let mut y_new = y;
        for (j, kj) in k.iter().enumerate() {
            if B[j] != 0.0 {
                for i in 0..N {
                    y_new[i] += h * B[j] * kj[i];
                }
            }
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = options.abs_tol + options.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            h *= MIN_FACTOR;
            continue;
        }
        if err > 1.0 {
            h *= (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            continue;
        }

        // Accepted.
        let mut coeffs = [[0.0; N]; 4];
        for (j, kj) in k.iter().enumerate() {
            for (ci, coeff) in coeffs.iter_mut().enumerate() {
                let p = P[j][ci];
                if p != 0.0 {
                    for i in 0..N {
                        coeff[i] += p * kj[i];
                    }
                }
            }
        }
        segments.push(DenseSegment {
            t0: t,
            h,
            y0: y,
            coeffs,
        });

        let t_new = t + h;
        times.push(t_new);
        states.push(y_new);

        if let ControlFlow::Break(reason) = control(t_new, &y_new) {
            status = Status::Stopped(reason);
            break;
        }
        if (t_new - t1) * dir >= 0.0 {
            status = Status::ReachedEnd;
            break;
        }

        t = t_new;
        y = y_new;
        k1 = k[6]; // FSAL
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        h *= factor;
    }

    Solution {
        times,
        states,
        status,
        segments,
    }
}

/// Step-size guess from the local derivative scale.
fn initial_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    options: &OdeOptions,
) -> f64 {
    let scale: Vec<f64> = y0
        .iter()
        .map(|yi| options.abs_tol + options.rel_tol * yi.abs())
        .collect();
    let d0 = rms(y0.iter().zip(&scale).map(|(y, s)| y / s), N);
    let d1 = rms(f0.iter().zip(&scale).map(|(f, s)| f / s), N);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };

    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * dir * f0[i];
    }
    let f1 = f(t0 + h0 * dir, &y1);
    let d2 = rms(
        f1.iter()
            .zip(f0.iter())
            .zip(&scale)
            .map(|((a, b), s)| (a - b) / s),
        N,
    ) / h0;

    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1) * dir
}

fn rms(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    (values.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sho(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let opts = OdeOptions::default();
        let sol = integrate(sho, 0.0, 10.0, [1.0, 0.0], &opts, |_, _| {
            ControlFlow::<()>::Continue(())
        });
        assert_eq!(sol.status, Status::ReachedEnd);
        let y = sol.final_state();
        assert!((y[0] - 10.0_f64.cos()).abs() < 1e-7);
        assert!((y[1] + 10.0_f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn dense_output_is_continuous_and_accurate() {
        let opts = OdeOptions::default();
        let sol = integrate(sho, 0.0, 10.0, [1.0, 0.0], &opts, |_, _| {
            ControlFlow::<()>::Continue(())
        });
        // Interpolant hits the accepted steps exactly at segment ends.
        for (i, &t) in sol.times.iter().enumerate() {
            let y = sol.sample(t);
            for (a, b) in y.iter().zip(&sol.states[i]) {
                assert!((a - b).abs() < 1e-9, "dense mismatch at accepted step t={t}");
            }
        }
        // And stays close to the exact solution in between.
        let mut t = 0.0;
        while t <= 10.0 {
            let y = sol.sample(t);
            assert!((y[0] - t.cos()).abs() < 1e-7, "dense error at t={t}");
            t += 0.0137;
        }
    }

    #[test]
    fn backward_integration() {
        let opts = OdeOptions::default();
        let sol = integrate(sho, 0.0, -5.0, [1.0, 0.0], &opts, |_, _| {
            ControlFlow::<()>::Continue(())
        });
        let y = sol.final_state();
        assert!((y[0] - 5.0_f64.cos()).abs() < 1e-7);
        assert!((y[1] - 5.0_f64.sin()).abs() < 1e-7);
        // Times strictly decreasing.
        assert!(sol.times.windows(2).all(|w| w[1] < w[0]));
        // Dense sampling works on the reversed span too.
        let y = sol.sample(-2.5);
        assert!((y[0] - 2.5_f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn zero_length_span() {
        let opts = OdeOptions::default();
        let sol = integrate(sho, 1.0, 1.0, [0.3, 0.7], &opts, |_, _| {
            ControlFlow::<()>::Continue(())
        });
        assert_eq!(sol.times, vec![1.0]);
        assert_eq!(sol.states[0], [0.3, 0.7]);
        assert_eq!(sol.status, Status::ReachedEnd);
    }

    #[test]
    fn control_callback_stops() {
        let opts = OdeOptions::default();
        let sol = integrate(
            |_t, y: &[f64; 1]| [y[0]],
            0.0,
            20.0,
            [1.0],
            &opts,
            |_, y| {
                if y[0] > 100.0 {
                    ControlFlow::Break("escaped")
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        assert_eq!(sol.status, Status::Stopped("escaped"));
        assert!(sol.final_state()[0] > 100.0);
        assert!(sol.final_time() < 20.0);
    }

    #[test]
    fn tolerance_controls_error() {
        // Error against a tight reference drops consistently as the
        // tolerance tightens.
        let reference = {
            let opts = OdeOptions {
                rel_tol: 1e-13,
                abs_tol: 1e-14,
                ..OdeOptions::default()
            };
            integrate(sho, 0.0, 10.0, [1.0, 0.0], &opts, |_, _| {
                ControlFlow::<()>::Continue(())
            })
            .final_state()
        };
        let mut errors = Vec::new();
        for tol in [1e-5, 1e-6, 1e-7, 1e-8] {
            let opts = OdeOptions {
                rel_tol: tol,
                abs_tol: tol * 1e-2,
                ..OdeOptions::default()
            };
            let y = integrate(sho, 0.0, 10.0, [1.0, 0.0], &opts, |_, _| {
                ControlFlow::<()>::Continue(())
            })
            .final_state();
            let err = ((y[0] - reference[0]).powi(2) + (y[1] - reference[1]).powi(2)).sqrt();
            errors.push(err);
        }
        for pair in errors.windows(2) {
            assert!(
                pair[1] < pair[0],
                "error should shrink with tolerance: {errors:?}"
            );
        }
        assert!(errors[3] < 1e-3 * errors[0], "{errors:?}");
    }
}
