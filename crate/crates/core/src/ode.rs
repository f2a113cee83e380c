//! Adaptive embedded Runge–Kutta integration with dense output.
//!
//! Dormand–Prince 5(4): fifth-order propagation, fourth-order embedded error
//! estimate, FSAL, and the standard quartic dense-output interpolant. The
//! interpolant lets callers resample the solution on arbitrary grids without
//! constraining the adaptive step sequence.

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
// Fifth-order weights (also the last stage: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference to the embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 200_000;

/// One accepted step together with its dense-output polynomial.
#[derive(Clone, Debug)]
struct Segment<const D: usize> {
    t0: f64,
    h: f64,
    // rcont[m][c]: quartic interpolant coefficients, component c.
    rcont: [[f64; D]; 5],
}

/// Continuous solution of an initial value problem on `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct OdeSolution<const D: usize> {
    t0: f64,
    t1: f64,
    segments: Vec<Segment<D>>,
    /// Solution value at `t1`.
    pub y_end: [f64; D],
    /// Number of accepted steps.
    pub n_accepted: usize,
    /// Number of rejected steps.
    pub n_rejected: usize,
}

impl<const D: usize> OdeSolution<D> {
    /// Evaluate the dense output at `t ∈ [t0, t1]` (clamped at the ends).
    pub fn eval(&self, t: f64) -> [f64; D] {
        let t = t.clamp(self.t0.min(self.t1), self.t0.max(self.t1));
        // Binary search for the segment containing t.
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.segments[mid].t0 <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let seg = &self.segments[lo];
        let s = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let mut y = [0.0; D];
        for c in 0..D {
            let r = &seg.rcont;
            y[c] = r[0][c] + s * (r[1][c] + s1 * (r[2][c] + s * (r[3][c] + s1 * r[4][c])));
        }
        y
    }

    pub fn t_span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t1 > t0` with absolute/relative
/// tolerance `atol`/`rtol`, returning a densely evaluable solution.
pub fn integrate<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    t1: f64,
    y0: [f64; D],
    atol: f64,
    rtol: f64,
) -> Result<OdeSolution<D>> {
    if !(t1 > t0) {
        return Err(Error::Ode(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t, &y, &k1, atol, rtol).min(span);
    let mut segments = Vec::new();
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;

    for _ in 0..MAX_STEPS {
        if t >= t1 {
            break;
        }
        h = h.min(t1 - t);
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Ode(format!("step size underflow at t = {t}")));
        }

        let mut yt = [0.0; D];
        for c in 0..D {
            yt[c] = y[c] + h * A21 * k1[c];
        }
        let k2 = f(t + C2 * h, &yt);
        for c in 0..D {
            yt[c] = y[c] + h * (A31 * k1[c] + A32 * k2[c]);
        }
        let k3 = f(t + C3 * h, &yt);
        for c in 0..D {
            yt[c] = y[c] + h * (A41 * k1[c] + A42 * k2[c] + A43 * k3[c]);
        }
        let k4 = f(t + C4 * h, &yt);
        for c in 0..D {
            yt[c] = y[c] + h * (A51 * k1[c] + A52 * k2[c] + A53 * k3[c] + A54 * k4[c]);
        }
        let k5 = f(t + C5 * h, &yt);
        for c in 0..D {
            yt[c] = y[c] + h * (A61 * k1[c] + A62 * k2[c] + A63 * k3[c] + A64 * k4[c] + A65 * k5[c]);
        }
        let k6 = f(t + h, &yt);
        let mut y_new = [0.0; D];
        for c in 0..D {
            y_new[c] = y[c] + h * (B1 * k1[c] + B3 * k3[c] + B4 * k4[c] + B5 * k5[c] + B6 * k6[c]);
        }
        let k7 = f(t + h, &y_new);

        // Scaled error norm.
        let mut err = 0.0f64;
        for c in 0..D {
            let e = h
                * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c]);
            let sc = atol + rtol * y[c].abs().max(y_new[c].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / D as f64).sqrt();

        if err <= 1.0 {
            // Accept: record the dense-output polynomial for this step.
            let mut rcont = [[0.0; D]; 5];
            for c in 0..D {
                let ydiff = y_new[c] - y[c];
                let bspl = h * k1[c] - ydiff;
                rcont[0][c] = y[c];
                rcont[1][c] = ydiff;
                rcont[2][c] = bspl;
                rcont[3][c] = ydiff - h * k7[c] - bspl;
                rcont[4][c] = h
                    * (D1 * k1[c] + D3 * k3[c] + D4 * k4[c] + D5 * k5[c] + D6 * k6[c]
                        + D7 * k7[c]);
            }
            segments.push(Segment { t0: t, h, rcont });
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            n_accepted += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            n_rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0).min(0.9);
        }
    }

    if t < t1 {
        return Err(Error::Ode(format!(
            "step budget ({MAX_STEPS}) exhausted at t = {t} of [{t0}, {t1}]"
        )));
    }
    Ok(OdeSolution {
        t0,
        t1,
        segments,
        y_end: y,
        n_accepted,
        n_rejected,
    })
}

/// Conventional starting-step heuristic (order-5 variant).
fn initial_step<const D: usize>(
    f: &impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: &[f64; D],
    k1: &[f64; D],
    atol: f64,
    rtol: f64,
) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for c in 0..D {
        let sc = atol + rtol * y0[c].abs();
        d0 += (y0[c] / sc) * (y0[c] / sc);
        d1 += (k1[c] / sc) * (k1[c] / sc);
    }
    d0 = (d0 / D as f64).sqrt();
    d1 = (d1 / D as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = [0.0; D];
    for c in 0..D {
        y1[c] = y0[c] + h0 * k1[c];
    }
    let k2 = f(t0 + h0, &y1);
    let mut d2 = 0.0f64;
    for c in 0..D {
        let sc = atol + rtol * y0[c].abs();
        d2 += ((k2[c] - k1[c]) / sc) * ((k2[c] - k1[c]) / sc);
    }
    d2 = (d2 / D as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
