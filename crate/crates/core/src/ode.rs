//! Dormand–Prince 5(4) integrator with embedded error control.
//!
//! The integrator always lands exactly on the requested end point, so callers
//! that need values on a fixed grid simply advance from node to node.

use crate::error::{Error, Result};

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

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive explicit Runge–Kutta integrator.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Step size carried between successive calls to [`Dopri5::advance`].
    h: f64,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 2_000_000,
            h: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.h = 0.0;
    }

    /// Advances `y` from `t` to `t_end`.
    ///
    /// `on_step` sees every accepted step; returning `false` aborts the
    /// integration and the state reached so far is reported through
    /// [`Advance::Stopped`].
    pub fn advance<const D: usize, F, O>(
        &mut self,
        f: &F,
        t: f64,
        y: [f64; D],
        t_end: f64,
        on_step: &mut O,
    ) -> Result<Advance<D>>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
        O: FnMut(f64, &[f64; D]) -> bool,
    {
        let span = t_end - t;
        if span == 0.0 {
            return Ok(Advance::Reached(y));
        }
        let dir = span.signum();
        let mut t = t;
        let mut y = y;
        let mut h = if self.h > 0.0 {
            self.h
        } else {
            self.initial_step(f, t, &y, span.abs())
        };
        let mut k1 = f(t, &y);
        let mut steps = 0usize;

        loop {
            let remaining = (t_end - t) * dir;
            if remaining <= 0.0 {
                return Ok(Advance::Reached(y));
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let hd = hs * dir;

            let (y_new, k7, err) = stage(f, t, &y, &k1, hd, self.rtol, self.atol);
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Ode(format!("exceeded {} steps", self.max_steps)));
            }

            if err <= 1.0 && y_new.iter().all(|x| x.is_finite()) {
                t = if last { t_end } else { t + hd };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || hs >= h {
                    h = hs * fac;
                }
                // a truncated final step says little about the natural step size
                self.h = h;
                if !on_step(t, &y) {
                    return Ok(Advance::Stopped(t, y));
                }
            } else {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = hs * fac;
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::Ode(format!("step size underflow at t = {t:e}")));
                }
            }
        }
    }

    fn initial_step<const D: usize, F>(&self, f: &F, t: f64, y: &[f64; D], span: f64) -> f64
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let k = f(t, y);
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..D {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (k[i] / sc).powi(2);
        }
        let d0 = (d0 / D as f64).sqrt();
        let d1 = (d1 / D as f64).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(span).max(1e-12 * span)
    }
}

/// Result of [`Dopri5::advance`].
#[derive(Debug, Clone, Copy)]
pub enum Advance<const D: usize> {
    Reached([f64; D]),
    Stopped(f64, [f64; D]),
}

fn stage<const D: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
    rtol: f64,
    atol: f64,
) -> ([f64; D], [f64; D], f64)
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut tmp = [0.0; D];
    for i in 0..D {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(t + C2 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(t + C3 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(t + C4 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(t + C5 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i]
            + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(t + h, &tmp);
    let mut y_new = [0.0; D];
    for i in 0..D {
        y_new[i] = y[i]
            + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    let k7 = f(t + h, &y_new);
    let mut err = 0.0;
    for i in 0..D {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err += (e / sc).powi(2);
    }
    (y_new, k7, (err / D as f64).sqrt())
}

/// Integrates on a prescribed increasing grid, returning the state at every node.
pub fn integrate_on_grid<const D: usize, F>(
    solver: &mut Dopri5,
    f: &F,
    grid: &[f64],
    y0: [f64; D],
    mut guard: impl FnMut(f64, &[f64; D]) -> bool,
) -> Result<std::result::Result<Vec<[f64; D]>, (f64, [f64; D])>>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0;
    out.push(y);
    for w in grid.windows(2) {
        match solver.advance(f, w[0], y, w[1], &mut guard)? {
            Advance::Reached(next) => y = next,
            Advance::Stopped(t, state) => return Ok(Err((t, state))),
        }
        out.push(y);
    }
    Ok(Ok(out))
}
