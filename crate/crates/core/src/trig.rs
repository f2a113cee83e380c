//! Trigonometric interpolation of uniformly sampled periodic data.
//!
//! A [`TrigSeries`] is the unique band-limited interpolant of `n` samples on a
//! uniform grid over one period. For smooth periodic data the interpolation
//! error decays geometrically in `n`, so with a few hundred samples the series
//! evaluates the underlying function — and its first two derivatives — to
//! near machine precision at arbitrary points.

use rustfft::{num_complex::Complex, FftPlanner};

/// Real trigonometric polynomial on a period `P`:
/// `f(θ) = c0 + Σ_{m=1}^{M-1} [α_m cos(mωθ) + β_m sin(mωθ)] + α_M cos(Mωθ)`
/// with `ω = 2π/P` and `M = n/2` (the Nyquist term is present only for even
/// sample counts).
#[derive(Clone, Debug)]
pub struct TrigSeries {
    period: f64,
    c0: f64,
    /// Cosine coefficients for modes `1..=modes`.
    alpha: Vec<f64>,
    /// Sine coefficients for modes `1..=modes` (Nyquist sine is zero).
    beta: Vec<f64>,
    /// True when the last mode is a (non-doubled) Nyquist mode.
    nyquist: bool,
}

impl TrigSeries {
    /// Interpolate `samples[j] = f(j·P/n)`, `j = 0..n`.
    pub fn fit(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        assert!(n >= 2, "need at least two samples");
        assert!(period > 0.0);
        let mut buf: Vec<Complex<f64>> =
            samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let c0 = buf[0].re / n as f64;
        let half = n / 2;
        let mut alpha = Vec::with_capacity(half);
        let mut beta = Vec::with_capacity(half);
        let nyquist = n % 2 == 0;
        let last_doubled = if nyquist { half - 1 } else { half };
        for m in 1..=last_doubled {
            alpha.push(2.0 * buf[m].re / n as f64);
            beta.push(-2.0 * buf[m].im / n as f64);
        }
        if nyquist {
            alpha.push(buf[half].re / n as f64);
            beta.push(0.0);
        }
        TrigSeries {
            period,
            c0,
            alpha,
            beta,
            nyquist,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn omega(&self) -> f64 {
        std::f64::consts::TAU / self.period
    }

    /// Evaluate `(f, f', f'')` at θ in one pass.
    pub fn eval_all(&self, theta: f64) -> (f64, f64, f64) {
        let w = self.omega();
        let phi = w * theta;
        let (sin1, cos1) = phi.sin_cos();
        // Recurrence over modes: cos((m+1)φ), sin((m+1)φ).
        let mut cm = cos1;
        let mut sm = sin1;
        let mut f = self.c0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let n_modes = self.alpha.len();
        for m in 1..=n_modes {
            let (am, bm) = (self.alpha[m - 1], self.beta[m - 1]);
            let mw = m as f64 * w;
            f += am * cm + bm * sm;
            d1 += mw * (bm * cm - am * sm);
            d2 -= mw * mw * (am * cm + bm * sm);
            if m < n_modes {
                let c_next = cm * cos1 - sm * sin1;
                sm = sm * cos1 + cm * sin1;
                cm = c_next;
            }
        }
        let _ = self.nyquist;
        (f, d1, d2)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_all(theta).0
    }

    pub fn deriv(&self, theta: f64) -> f64 {
        self.eval_all(theta).1
    }

    pub fn deriv2(&self, theta: f64) -> f64 {
        self.eval_all(theta).2
    }
}
