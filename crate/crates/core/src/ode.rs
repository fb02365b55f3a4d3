//! Adaptive Dormand–Prince 5(4) integrator for small autonomous-size systems.

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-13, atol: 1e-16, h_init: 1e-3, h_max: 0.05 }
    }
}

/// Samples of an integration; `samples[i]` is the state at `outputs[i]`.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub samples: Vec<[f64; N]>,
    /// Whether the event predicate stopped the integration early.
    pub stopped: bool,
    /// Position and state at which the event fired.
    pub event_at: Option<(f64, [f64; N])>,
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn comb<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coef: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &a) in ks.iter().zip(coef) {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` through the increasing output
/// positions. Steps never cross an output position. After every accepted
/// step `event(t, y)` is evaluated; returning true stops the integration.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: OdeOptions,
    mut event: impl FnMut(f64, &[f64; N]) -> bool,
) -> Trajectory<N> {
    let mut samples = Vec::with_capacity(outputs.len());
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.h_init;
    let mut k1 = f(t, &y);
    for &target in outputs {
        while t < target {
            let last = h >= target - t;
            let step = if last { target - t } else { h.min(opts.h_max) };
            let k2 = f(t + C[0] * step, &comb(&y, step, &[k1], &A2));
            let k3 = f(t + C[1] * step, &comb(&y, step, &[k1, k2], &A3));
            let k4 = f(t + C[2] * step, &comb(&y, step, &[k1, k2, k3], &A4));
            let k5 = f(t + C[3] * step, &comb(&y, step, &[k1, k2, k3, k4], &A5));
            let k6 = f(t + C[4] * step, &comb(&y, step, &[k1, k2, k3, k4, k5], &A6));
            let ynew = comb(&y, step, &[k1, k2, k3, k4, k5, k6], &B);
            let k7 = f(t + step, &ynew);
            let ks = [k1, k2, k3, k4, k5, k6, k7];
            let mut err = 0.0;
            for i in 0..N {
                let e: f64 = ks.iter().zip(&E).map(|(k, c)| c * k[i]).sum::<f64>() * step;
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = ynew;
                k1 = k7;
                if !last {
                    h = step * factor;
                }
                if event(t, &y) {
                    return Trajectory { samples, stopped: true, event_at: Some((t, y)) };
                }
            } else {
                h = step * factor;
            }
        }
        samples.push(y);
    }
    Trajectory { samples, stopped: false, event_at: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let outs: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let tr = dopri5(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], &outs, OdeOptions::default(), |_, _| false);
        for (t, y) in outs.iter().zip(&tr.samples) {
            assert!((y[0] - t.cos()).abs() < 1e-11);
            assert!((y[1] + t.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn event_stops_integration() {
        let outs: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let tr = dopri5(|_, y: &[f64; 1]| [-1.0 + 0.0 * y[0]], 0.0, [1.0], &outs, OdeOptions::default(), |_, y| y[0] < 0.0);
        assert!(tr.stopped);
        assert!(tr.samples.len() <= 11);
    }
}
