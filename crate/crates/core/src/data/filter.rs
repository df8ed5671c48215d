use crate::{Error, Result};

/// Forward-backward single-pole low-pass.
///
/// Each pass is `yₖ = yₖ₋₁ + α(xₖ − yₖ₋₁)` with
/// `α = Δt / (Δt + 1/(2π f_c))`, started from the raw endpoint sample on
/// its side. The two pass orders differ only near the ends; the result is
/// their mean, which makes the filter commute with time reversal.
pub fn lowpass_zero_phase(signal: &[f64], cutoff_hz: f64, dt: f64) -> Result<Vec<f64>> {
    if signal.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "filter needs at least 3 samples, got {}",
            signal.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let nyquist = 0.5 / dt;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
        )));
    }
    let alpha = dt / (dt + 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz));
    let first = signal[0];
    let last = signal[signal.len() - 1];
    let forward = |x: &[f64]| {
        let mut y = Vec::with_capacity(x.len());
        let mut s = first;
        for &v in x {
            s += alpha * (v - s);
            y.push(s);
        }
        y
    };
    let backward = |x: &[f64]| {
        let mut y = vec![0.0; x.len()];
        let mut s = last;
        for (k, &v) in x.iter().enumerate().rev() {
            s += alpha * (v - s);
            y[k] = s;
        }
        y
    };
    let fb = backward(&forward(signal));
    let bf = forward(&backward(signal));
    Ok(fb.iter().zip(&bf).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Second-order accurate derivative: central differences inside,
/// three-point one-sided stencils at both ends.
pub fn differentiate(series: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "differentiation needs at least 3 samples, got {n}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let h2 = 2.0 * dt;
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * series[0] + 4.0 * series[1] - series[2]) / h2);
    for k in 1..n - 1 {
        d.push((series[k + 1] - series[k - 1]) / h2);
    }
    d.push((3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / h2);
    Ok(d)
}
