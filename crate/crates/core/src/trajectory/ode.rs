//! Dormand–Prince 5(4) with FSAL, elementary step control and single-step
//! re-evaluation used to polish events.

const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) enum StepOutcome {
    /// Size of the step taken.
    Accepted(f64),
    Underflow,
}

/// Adaptive integrator for the autonomous system `y' = f(y)`.
pub(crate) struct Rk45<F: FnMut(&[f64], &mut [f64])> {
    f: F,
    rtol: f64,
    atol: f64,
    pub h: f64,
    pub h_max: f64,
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    pub steps: usize,
}

impl<F: FnMut(&[f64], &mut [f64])> Rk45<F> {
    pub fn new(mut f: F, y0: Vec<f64>, tol: f64) -> Self {
        let n = y0.len();
        let mut dy = vec![0.0; n];
        f(&y0, &mut dy);
        let sc = |v: f64| tol + tol * v.abs();
        let d0 = (y0.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let d1 = (dy
            .iter()
            .zip(&y0)
            .map(|(d, v)| (d / sc(*v)).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            (0.01 * d0 / d1).min(0.1)
        };
        Rk45 {
            f,
            rtol: tol,
            atol: tol,
            h,
            h_max: f64::INFINITY,
            t: 0.0,
            y: y0,
            dy,
            k: vec![vec![0.0; n]; 7],
            tmp: vec![0.0; n],
            steps: 0,
        }
    }

    pub fn eval(&mut self, y: &[f64], out: &mut [f64]) {
        (self.f)(y, out)
    }

    #[allow(clippy::needless_range_loop)]
    /// Stages of one step of size `h` from `(y0, dy0)`; leaves the 5th-order
    /// solution in `out` and the stage derivatives in `self.k`.
    fn stages(&mut self, y0: &[f64], dy0: &[f64], h: f64, out: &mut [f64]) {
        let n = y0.len();
        self.k[0].copy_from_slice(dy0);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = y0[i] + h * acc;
            }
            (self.f)(&self.tmp, &mut self.k[s]);
        }
        // A[6] holds the 5th-order weights, so the last stage input is the solution
        out.copy_from_slice(&self.tmp);
    }

    /// Value at `t + tau` by a single unchecked step from the current start
    /// `(y0, dy0)`; used to polish event locations.
    pub fn restep(&mut self, y0: &[f64], dy0: &[f64], tau: f64) -> Vec<f64> {
        let mut out = vec![0.0; y0.len()];
        if tau == 0.0 {
            out.copy_from_slice(y0);
            return out;
        }
        self.stages(y0, dy0, tau, &mut out);
        out
    }

    /// Take one accepted step, never longer than `cap` when given.
    pub fn step(&mut self, cap: Option<f64>) -> StepOutcome {
        let n = self.y.len();
        let mut ynew = vec![0.0; n];
        loop {
            let mut h = self.h.min(self.h_max);
            if let Some(c) = cap {
                h = h.min(c);
            }
            if h < 1e-14 * self.t.abs().max(1.0) {
                return StepOutcome::Underflow;
            }
            let y0 = std::mem::take(&mut self.y);
            let dy0 = std::mem::take(&mut self.dy);
            self.stages(&y0, &dy0, h, &mut ynew);
            let mut err = 0.0;
            for i in 0..n {
                let e: f64 = h * (0..7).map(|s| E[s] * self.k[s][i]).sum::<f64>();
                let sc = self.atol + self.rtol * y0[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            self.y = y0;
            self.dy = dy0;
            if !err.is_finite() {
                self.h = h * 0.2;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.t += h;
                self.y.copy_from_slice(&ynew);
                self.dy.copy_from_slice(&self.k[6]);
                self.steps += 1;
                // a capped step says nothing about the natural step size
                if cap.is_none_or(|c| h < c) || factor < 1.0 {
                    self.h = h * factor;
                }
                return StepOutcome::Accepted(h);
            }
            self.h = h * factor;
        }
    }
}

/// Illinois false position for a root of `g` on `[0, h]` given the values at
/// the ends, using `y(τ)` from `eval`. Returns `(τ, y(τ))`.
pub(crate) fn locate<Y, G>(h: f64, y0: &[f64], y1: &[f64], g: G, mut eval: Y) -> (f64, Vec<f64>)
where
    Y: FnMut(f64) -> Vec<f64>,
    G: Fn(&[f64]) -> f64,
{
    let (mut a, mut b) = (0.0, h);
    let (mut ga, mut gb) = (g(y0), g(y1));
    let mut ya = y0.to_vec();
    let mut yb = y1.to_vec();
    let mut side = 0;
    for _ in 0..80 {
        if (b - a).abs() <= 1e-15 * h.abs().max(1e-300) {
            break;
        }
        let tau = if gb != ga { b - gb * (b - a) / (gb - ga) } else { 0.5 * (a + b) };
        let tau = if tau <= a.min(b) || tau >= a.max(b) { 0.5 * (a + b) } else { tau };
        let y = eval(tau);
        let gt = g(&y);
        if gt == 0.0 {
            return (tau, y);
        }
        if (gt > 0.0) == (ga > 0.0) {
            a = tau;
            ga = gt;
            ya = y;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = tau;
            gb = gt;
            yb = y;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if gt.abs() < 1e-15 {
            break;
        }
    }
    if ga.abs() < gb.abs() {
        (a, ya)
    } else {
        (b, yb)
    }
}

/// Cubic Hermite interpolant between `(y0, d0)` at 0 and `(y1, d1)` at `h`.
pub(crate) fn hermite(y0: &[f64], d0: &[f64], y1: &[f64], d1: &[f64], h: f64, tau: f64) -> Vec<f64> {
    let s = tau / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
        .collect()
}

/// Derivative of [`hermite`] with respect to `tau`.
pub(crate) fn hermite_derivative(
    y0: &[f64],
    d0: &[f64],
    y1: &[f64],
    d1: &[f64],
    h: f64,
    tau: f64,
) -> Vec<f64> {
    let s = tau / h;
    let h00 = 6.0 * s * s - 6.0 * s;
    let h10 = 3.0 * s * s - 4.0 * s + 1.0;
    let h01 = -6.0 * s * s + 6.0 * s;
    let h11 = 3.0 * s * s - 2.0 * s;
    (0..y0.len())
        .map(|i| (h00 * y0[i] + h01 * y1[i]) / h + h10 * d0[i] + h11 * d1[i])
        .collect()
}

impl<F: FnMut(&[f64], &mut [f64])> Rk45<F> {
    /// Recompute the stored derivative after the right-hand side changed.
    pub fn refresh(&mut self) {
        let y = self.y.clone();
        let mut dy = vec![0.0; y.len()];
        (self.f)(&y, &mut dy);
        self.dy = dy;
    }

    /// Advance exactly `duration`, calling `record` after every accepted step.
    pub fn advance<R: FnMut(f64, &[f64])>(&mut self, duration: f64, mut record: R) -> bool {
        let end = self.t + duration;
        while self.t < end {
            match self.step(Some(end - self.t)) {
                StepOutcome::Accepted(_) => {
                    if end - self.t <= 1e-13 * end.abs().max(1.0) {
                        self.t = end;
                    }
                    record(self.t, &self.y);
                    if !self.y.iter().all(|v| v.is_finite()) {
                        return false;
                    }
                }
                StepOutcome::Underflow => return false,
            }
        }
        true
    }
}
