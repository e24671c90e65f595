//! Dormand–Prince 5(4) with local error control and the 4th-order
//! continuous extension, so output can be reported on an arbitrary grid
//! independently of the accepted steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Adaptive explicit integrator. Stateless between calls.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub tol: Tolerance,
    pub max_steps: usize,
}

type Vector<const N: usize> = [f64; N];

fn axpy<const N: usize>(y: &Vector<N>, terms: &[(f64, &Vector<N>)]) -> Vector<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

impl DormandPrince {
    pub fn new(tol: Tolerance) -> Self {
        DormandPrince {
            tol,
            max_steps: 50_000_000,
        }
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each of
    /// the increasing `outputs` (all `>= t0`).
    ///
    /// A stage that fails to evaluate `f` is treated like an error-test
    /// failure and the step shrinks; once the step falls below the minimum the
    /// call fails with the current time.
    pub fn solve<const N: usize, F>(
        &self,
        mut f: F,
        t0: f64,
        y0: Vector<N>,
        outputs: &[f64],
    ) -> Result<Vec<Vector<N>>>
    where
        F: FnMut(f64, &Vector<N>) -> Result<Vector<N>>,
    {
        let mut out = Vec::with_capacity(outputs.len());
        let Some(&t_end) = outputs.last() else {
            return Ok(out);
        };
        let mut next = 0;
        while next < outputs.len() && outputs[next] <= t0 {
            out.push(y0);
            next += 1;
        }
        if next == outputs.len() {
            return Ok(out);
        }

        let fail = |t: f64, reason: String| Error::Integration { t, reason };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y).map_err(|e| fail(t, e.to_string()))?;
        let mut h = self.initial_step(&mut f, t, &y, &k1, t_end - t0);
        let mut steps = 0usize;
        let mut last_reject = false;

        while next < outputs.len() {
            steps += 1;
            if steps > self.max_steps {
                return Err(fail(t, format!("exceeded {} steps", self.max_steps)));
            }
            let h_min = 1e-13 * t.abs().max(1.0);
            if h < h_min {
                return Err(fail(t, format!("step size {h:e} fell below minimum {h_min:e}")));
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }

            match self.attempt(&mut f, t, &y, &k1, h) {
                Ok(trial) if trial.err <= 1.0 => {
                    let t_new = if last { t_end } else { t + h };
                    while next < outputs.len() && outputs[next] <= t_new {
                        let theta = ((outputs[next] - t) / h).clamp(0.0, 1.0);
                        out.push(trial.interpolate(&y, theta));
                        next += 1;
                    }
                    let fac = (SAFETY * trial.err.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
                    let fac = if last_reject { fac.min(1.0) } else { fac };
                    t = t_new;
                    y = trial.y_new;
                    k1 = trial.k7;
                    h *= fac;
                    last_reject = false;
                }
                Ok(trial) => {
                    h *= (SAFETY * trial.err.powf(-0.2)).clamp(FAC_MIN, 1.0);
                    last_reject = true;
                }
                Err(_) => {
                    h *= 0.25;
                    last_reject = true;
                }
            }
        }
        Ok(out)
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &Vector<N>,
        k1: &Vector<N>,
        span: f64,
    ) -> f64
    where
        F: FnMut(f64, &Vector<N>) -> Result<Vector<N>>,
    {
        let sc = |i: usize| self.tol.atol + self.tol.rtol * y[i].abs();
        let d0 = rms::<N>(|i| y[i] / sc(i));
        let d1 = rms::<N>(|i| k1[i] / sc(i));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = axpy(y, &[(h0, k1)]);
        let d2 = match f(t + h0, &y1) {
            Ok(k) => rms::<N>(|i| (k[i] - k1[i]) / sc(i)) / h0,
            Err(_) => return h0 * 1e-3,
        };
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    fn attempt<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &Vector<N>,
        k1: &Vector<N>,
        h: f64,
    ) -> Result<Trial<N>>
    where
        F: FnMut(f64, &Vector<N>) -> Result<Vector<N>>,
    {
        let k2 = f(t + C2 * h, &axpy(y, &[(h * A21, k1)]))?;
        let k3 = f(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]))?;
        let k4 = f(
            t + C4 * h,
            &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]),
        )?;
        let k5 = f(
            t + C5 * h,
            &axpy(y, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &axpy(
                y,
                &[(h * A61, k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)],
            ),
        )?;
        let y_new = axpy(
            y,
            &[(h * A71, k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)],
        );
        let k7 = f(t + h, &y_new)?;

        let err = rms::<N>(|i| {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            e / (self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs()))
        });

        let mut dense = [[0.0; N]; 4];
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            dense[0][i] = ydiff;
            dense[1][i] = bspl;
            dense[2][i] = ydiff - h * k7[i] - bspl;
            dense[3][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Ok(Trial {
            y_new,
            k7,
            err,
            dense,
        })
    }
}

struct Trial<const N: usize> {
    y_new: Vector<N>,
    k7: Vector<N>,
    err: f64,
    dense: [Vector<N>; 4],
}

impl<const N: usize> Trial<N> {
    fn interpolate(&self, y: &Vector<N>, theta: f64) -> Vector<N> {
        if theta == 1.0 {
            return self.y_new;
        }
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4] = &self.dense;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = y[i] + theta * (r1[i] + th1 * (r2[i] + theta * (r3[i] + th1 * r4[i])));
        }
        out
    }
}

fn rms<const N: usize>(mut g: impl FnMut(usize) -> f64) -> f64 {
    let s: f64 = (0..N).map(|i| g(i).powi(2)).sum();
    (s / N as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_on_a_grid() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.2).collect();
        let ys = DormandPrince::new(Tolerance::default())
            .solve(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], &grid)
            .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert_abs_diff_eq!(y[0], t.cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(y[1], -t.sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn exponential_growth() {
        let ys = DormandPrince::new(Tolerance { rtol: 1e-12, atol: 1e-14 })
            .solve(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], &[0.5, 3.0])
            .unwrap();
        assert_abs_diff_eq!(ys[0][0] / 0.5f64.exp(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ys[1][0] / 3f64.exp(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn finite_time_blow_up_reports_time() {
        // y' = y² from y = 1 blows up at t = 1; refuse |y| > 1e8 as a domain.
        let res = DormandPrince::new(Tolerance::default()).solve(
            |_, y: &[f64; 1]| {
                if y[0].abs() > 1e8 {
                    Err(Error::domain("blow-up"))
                } else {
                    Ok([y[0] * y[0]])
                }
            },
            0.0,
            [1.0],
            &[2.0],
        );
        match res {
            Err(Error::Integration { t, .. }) => assert!(t > 0.99 && t < 1.0, "t = {t}"),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn outputs_at_start_time_are_initial_state() {
        let ys = DormandPrince::new(Tolerance::default())
            .solve(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [2.0], &[0.0, 1.0])
            .unwrap();
        assert_eq!(ys[0], [2.0]);
    }
}
