//! Sub-grid displacement of hard-wall eigenfunctions.
//!
//! A sampled state with `ψ = 0` at both grid edges is extended oddly about
//! the walls, which makes it periodic and smooth; its trigonometric
//! interpolant is then translated exactly by a phase ramp in Fourier space.
//! Samples whose source position falls outside the grid are set to zero.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

pub struct Shifter {
    n: usize,
    period: usize,
    inverse: Arc<dyn Fft<f64>>,
    /// Spectrum of the odd extension of each input function.
    spectra: Vec<Vec<C64>>,
}

impl Shifter {
    /// `functions` are sampled on `n` points with zero first and last sample.
    pub fn new<'a, I>(n: usize, functions: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let period = 2 * (n - 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(period);
        let inverse = planner.plan_fft_inverse(period);
        let spectra = functions
            .into_iter()
            .map(|f| {
                assert_eq!(f.len(), n);
                let mut buf = vec![C64::new(0.0, 0.0); period];
                for j in 1..n - 1 {
                    buf[j] = C64::new(f[j], 0.0);
                    buf[period - j] = C64::new(-f[j], 0.0);
                }
                forward.process(&mut buf);
                buf
            })
            .collect();
        Self {
            n,
            period,
            inverse,
            spectra,
        }
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    /// Samples of `f_i(z - shift)` where `shift` is in units of the grid spacing.
    #[cfg(test)]
    pub fn shifted(&self, i: usize, shift: f64) -> Vec<f64> {
        let ramp = self.phase_ramp(shift);
        self.apply(i, &ramp, shift)
    }

    /// Every function shifted by the same amount, one row each.
    pub fn shifted_all(&self, shift: f64) -> Vec<Vec<f64>> {
        let ramp = self.phase_ramp(shift);
        (0..self.len())
            .map(|i| self.apply(i, &ramp, shift))
            .collect()
    }

    fn phase_ramp(&self, shift: f64) -> Vec<C64> {
        let p = self.period as f64;
        (0..self.period)
            .map(|k| {
                let freq = if 2 * k < self.period {
                    k as f64
                } else {
                    k as f64 - p
                };
                C64::from_polar(1.0 / p, -2.0 * std::f64::consts::PI * freq * shift / p)
            })
            .collect()
    }

    fn apply(&self, i: usize, ramp: &[C64], shift: f64) -> Vec<f64> {
        let mut buf: Vec<C64> = self.spectra[i]
            .iter()
            .zip(ramp)
            .map(|(c, r)| c * r)
            .collect();
        self.inverse.process(&mut buf);
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|j| {
                let src = j as f64 - shift;
                if src <= 0.0 || src >= last {
                    0.0
                } else {
                    buf[j].re
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integer_shift_is_exact_translation() {
        let n = 65;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let x = j as f64 / (n - 1) as f64;
                (PI * x).sin().powi(3) * (1.0 + x)
            })
            .collect();
        let s = Shifter::new(n, [f.as_slice()]);
        let g = s.shifted(0, 3.0);
        for j in 0..n {
            let expect = if j >= 3 { f[j - 3] } else { 0.0 };
            assert!((g[j] - expect).abs() < 1e-12, "{j}: {} vs {expect}", g[j]);
        }
        let back = s.shifted(0, 0.0);
        for j in 0..n {
            assert!((back[j] - f[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_shift_of_a_sine_mode() {
        let n = 101;
        let mode = |x: f64| (3.0 * PI * x / (n - 1) as f64).sin();
        let f: Vec<f64> = (0..n).map(|j| mode(j as f64)).collect();
        let s = Shifter::new(n, [f.as_slice()]);
        let g = s.shifted(0, 0.37);
        for j in 1..n - 1 {
            assert!((g[j] - mode(j as f64 - 0.37)).abs() < 1e-12);
        }
    }
}
