//! Butterworth IIR design by bilinear transform with frequency pre-warping.
//!
//! Analog sections are built in units where the bilinear constant `2*fs` is 1,
//! so a prewarped edge frequency `f` becomes `tan(pi*f/fs)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Bilinear map of `(n2 s^2 + n1 s + n0) / (d2 s^2 + d1 s + d0)` with `2*fs = 1`.
    /// A first-order prototype (`n2 = d2 = 0`) yields a first-order section.
    fn from_analog(num: [f64; 3], den: [f64; 3]) -> Self {
        let [n2, n1, n0] = num;
        let [d2, d1, d0] = den;
        if n2 == 0.0 && d2 == 0.0 {
            let a0 = d1 + d0;
            return Self {
                b0: (n1 + n0) / a0,
                b1: (n0 - n1) / a0,
                b2: 0.0,
                a1: (d0 - d1) / a0,
                a2: 0.0,
            };
        }
        let a0 = d2 + d1 + d0;
        Self {
            b0: (n2 + n1 + n0) / a0,
            b1: 2.0 * (n0 - n2) / a0,
            b2: (n2 - n1 + n0) / a0,
            a1: 2.0 * (d0 - d2) / a0,
            a2: (d2 - d1 + d0) / a0,
        }
    }

    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b0 + self.b1 * z_inv + self.b2 * z2) / (1.0 + self.a1 * z_inv + self.a2 * z2)
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    /// First-order sections are stored with `b2 = a2 = 0`.
    pub fn order(&self) -> usize {
        if self.a2 == 0.0 && self.b2 == 0.0 {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub design_rate: f64,
}

impl BiquadCascade {
    pub fn order(&self) -> usize {
        self.sections.iter().map(Biquad::order).sum()
    }

    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.design_rate);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.magnitude(freq_hz).log10()
    }

    pub fn is_stable(&self) -> bool {
        self.sections
            .iter()
            .all(|s| s.poles().iter().all(|p| p.norm() < 1.0))
    }

    /// Causal direct-form-II-transposed filtering from zero initial state.
    pub fn filter(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        self.filter_in_place(&mut out);
        out
    }

    pub fn filter_in_place(&self, signal: &mut [f64]) {
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in signal.iter_mut() {
                let x = *v;
                let y = s.b0 * x + z1;
                z1 = s.b1 * x - s.a1 * y + z2;
                z2 = s.b2 * x - s.a2 * y;
                *v = y;
            }
        }
    }
}

pub fn filter_forward(cascade: &BiquadCascade, signal: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::Signal("cannot filter an empty signal".into()));
    }
    Ok(cascade.filter(signal))
}

/// Normalized analog Butterworth poles in the closed upper half plane.
fn prototype_poles(order: usize) -> impl Iterator<Item = Complex64> {
    (0..order)
        .map(move |k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .filter(|p| p.im >= -1e-12)
}

fn prewarp(freq: f64, fs: f64) -> f64 {
    (PI * freq / fs).tan()
}

fn check_edge(name: &str, freq: f64, fs: f64) -> Result<()> {
    if fs.is_nan() || fs <= 0.0 {
        return Err(Error::FilterDesign(format!(
            "sample rate {fs} must be positive"
        )));
    }
    if !(freq > 0.0 && freq < fs / 2.0) {
        return Err(Error::FilterDesign(format!(
            "{name} {freq} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    Ok(())
}

enum Pass {
    Low,
    High,
}

fn design_single_edge(cutoff: f64, order: usize, fs: f64, pass: Pass) -> Result<BiquadCascade> {
    check_edge("cutoff", cutoff, fs)?;
    if order == 0 {
        return Err(Error::FilterDesign("order must be at least 1".into()));
    }
    let w = prewarp(cutoff, fs);
    let sections = prototype_poles(order)
        .map(|p| {
            if p.im.abs() < 1e-12 {
                // real pole at -w
                let num = match pass {
                    Pass::Low => [0.0, 0.0, w],
                    Pass::High => [0.0, 1.0, 0.0],
                };
                Biquad::from_analog(num, [0.0, 1.0, w])
            } else {
                let num = match pass {
                    Pass::Low => [0.0, 0.0, w * w],
                    Pass::High => [1.0, 0.0, 0.0],
                };
                Biquad::from_analog(num, [1.0, -2.0 * p.re * w, w * w])
            }
        })
        .collect();
    Ok(BiquadCascade {
        sections,
        design_rate: fs,
    })
}

/// Butterworth low-pass with unity DC gain and -3 dB at `cutoff`.
pub fn design_lowpass(cutoff: f64, order: usize, fs: f64) -> Result<BiquadCascade> {
    design_single_edge(cutoff, order, fs, Pass::Low)
}

pub fn design_highpass(cutoff: f64, order: usize, fs: f64) -> Result<BiquadCascade> {
    design_single_edge(cutoff, order, fs, Pass::High)
}

/// Butterworth band-stop of total order `order` (even) with -3 dB edges at
/// `low` and `high`. Each section has unity gain at DC and at Nyquist.
pub fn design_bandstop(low: f64, high: f64, order: usize, fs: f64) -> Result<BiquadCascade> {
    check_edge("low edge", low, fs)?;
    check_edge("high edge", high, fs)?;
    if low >= high {
        return Err(Error::FilterDesign(format!(
            "low edge {low} Hz must be below high edge {high} Hz"
        )));
    }
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::FilterDesign(format!(
            "band-stop order {order} must be even and > 0"
        )));
    }
    let (w1, w2) = (prewarp(low, fs), prewarp(high, fs));
    let w0_sq = w1 * w2;
    let bw = w2 - w1;

    let mut sections = Vec::with_capacity(order / 2);
    let section = |sum: Complex64, prod: Complex64| {
        // (s^2 + w0^2) / (s^2 - sum s + prod), scaled to unity DC gain
        let g = prod.re / w0_sq;
        Biquad::from_analog([g, 0.0, g * w0_sq], [1.0, -sum.re, prod.re])
    };
    for p in prototype_poles(order / 2) {
        // s^2 - (bw/p) s + w0^2 = 0
        let half = bw / (2.0 * p);
        let disc = (half * half - w0_sq).sqrt();
        let (q1, q2) = (half + disc, half - disc);
        if p.im.abs() < 1e-12 {
            sections.push(section(q1 + q2, q1 * q2));
        } else {
            for q in [q1, q2] {
                sections.push(section(q + q.conj(), q * q.conj()));
            }
        }
    }
    Ok(BiquadCascade {
        sections,
        design_rate: fs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analog_lowpass(f: f64, fc: f64, order: usize) -> f64 {
        1.0 / (1.0 + (f / fc).powi(2 * order as i32)).sqrt()
    }

    fn analog_bandstop(f: f64, low: f64, high: f64, order: usize) -> f64 {
        let x = (high - low) * f / (low * high - f * f).abs();
        1.0 / (1.0 + x.powi(order as i32)).sqrt()
    }

    fn db(m: f64) -> f64 {
        20.0 * m.log10()
    }

    #[test]
    fn lowpass_matches_butterworth_magnitude() {
        let lp = design_lowpass(2.0, 2, 2000.0).unwrap();
        assert_eq!(lp.order(), 2);
        assert!(lp.is_stable());
        assert!((lp.magnitude(0.0) - 1.0).abs() < 1e-9);
        assert!((lp.magnitude_db(2.0) + 3.0103).abs() < 0.1);
        assert!((lp.magnitude_db(20.0) + 40.0).abs() < 1.0);
        for f in [0.5, 1.0, 1.5, 2.5, 3.0, 5.0, 8.0, 12.0, 30.0, 50.0] {
            let diff = lp.magnitude_db(f) - db(analog_lowpass(f, 2.0, 2));
            assert!(diff.abs() < 1.0, "f={f}: {diff}");
        }
    }

    #[test]
    fn odd_order_lowpass_and_highpass() {
        let lp = design_lowpass(100.0, 3, 1000.0).unwrap();
        assert_eq!(lp.order(), 3);
        assert!(lp.is_stable());
        assert!((lp.magnitude_db(100.0) + 3.0103).abs() < 1e-6);
        let hp = design_highpass(20.0, 2, 1000.0).unwrap();
        assert!(hp.magnitude(0.0) < 1e-12);
        assert!((hp.magnitude(499.999) - 1.0).abs() < 1e-6);
        assert!((hp.magnitude_db(20.0) + 3.0103).abs() < 1e-6);
    }

    #[test]
    fn bandstop_notch_and_passband() {
        let bs = design_bandstop(60.0, 62.0, 4, 2000.0).unwrap();
        assert_eq!(bs.order(), 4);
        assert_eq!(bs.sections.len(), 2);
        assert!(bs.is_stable());
        assert!(bs.magnitude_db(61.0) <= -40.0);
        assert!(bs.magnitude_db(10.0) >= -0.1);
        assert!((bs.magnitude(0.0) - 1.0).abs() < 1e-9);
        assert!((bs.magnitude_db(60.0) + 3.0103).abs() < 1e-6);
        assert!((bs.magnitude_db(62.0) + 3.0103).abs() < 1e-6);
        for f in [10.0, 30.0, 50.0, 58.0, 59.0, 63.0, 64.0, 70.0, 100.0, 300.0] {
            let diff = bs.magnitude_db(f) - db(analog_bandstop(f, 60.0, 62.0, 4));
            assert!(diff.abs() < 1.0, "f={f}: {diff}");
        }
    }

    #[test]
    fn design_errors() {
        assert!(design_bandstop(62.0, 60.0, 4, 2000.0).is_err());
        assert!(design_bandstop(60.0, 62.0, 3, 2000.0).is_err());
        assert!(design_bandstop(60.0, 1200.0, 4, 2000.0).is_err());
        assert!(design_lowpass(0.0, 2, 2000.0).is_err());
        assert!(design_lowpass(1000.0, 2, 2000.0).is_err());
        assert!(design_lowpass(10.0, 0, 2000.0).is_err());
        assert!(filter_forward(&design_lowpass(2.0, 2, 2000.0).unwrap(), &[]).is_err());
    }

    #[test]
    fn constant_input_settles_to_itself() {
        let lp = design_lowpass(2.0, 2, 2000.0).unwrap();
        let c = 0.37;
        let out = filter_forward(&lp, &vec![c; 20_000]).unwrap();
        assert_eq!(out.len(), 20_000);
        assert!(out[18_000..].iter().all(|y| (y - c).abs() < 1e-6));
    }

    #[test]
    fn sinusoid_at_61_hz_is_removed() {
        let fs = 2000.0;
        let bs = design_bandstop(60.0, 62.0, 4, fs).unwrap();
        let x: Vec<f64> = (0..20_000)
            .map(|i| (2.0 * PI * 61.0 * i as f64 / fs).sin())
            .collect();
        let y = bs.filter(&x);
        let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
        let attenuation = 20.0 * (rms(&y[16_000..]) / rms(&x[16_000..])).log10();
        assert!(attenuation <= -40.0, "{attenuation} dB");
    }

    #[test]
    fn impulse_response_decays() {
        for cascade in [
            design_lowpass(2.0, 2, 2000.0).unwrap(),
            design_bandstop(60.0, 62.0, 4, 2000.0).unwrap(),
            design_highpass(20.0, 2, 2000.0).unwrap(),
        ] {
            let mut x = vec![0.0; 40_000];
            x[0] = 1.0;
            let h = cascade.filter(&x);
            assert!(h[30_000..].iter().all(|v| v.abs() < 1e-12));
            assert!(h.iter().map(|v| v.abs()).sum::<f64>().is_finite());
        }
    }
}
