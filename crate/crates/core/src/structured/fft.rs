//! Iterative radix-2 FFT and FFT-based linear convolution.

use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Precomputed twiddles and bit-reversal table for one power-of-two length.
#[derive(Debug)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<usize>,
}

impl FftPlan {
    /// Panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = (-2.0 * PI * k as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let rev = (0..n).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect();
        Self { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn transform(&self, a: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(a.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let w = if inverse { w.conj() } else { w };
                    let u = a[start + k];
                    let v = a[start + k + half] * w;
                    a[start + k] = u + v;
                    a[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
        if inverse {
            let s = 1.0 / n as f64;
            a.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// `y_k = sum_j a_j exp(-2 pi i jk / n)`, in place.
    pub fn forward(&self, a: &mut [Complex64]) {
        self.transform(a, false);
    }

    pub fn inverse(&self, a: &mut [Complex64]) {
        self.transform(a, true);
    }

    /// Forward transform of a real vector zero-padded to the plan length.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); self.n];
        for (d, &s) in a.iter_mut().zip(x) {
            d.re = s;
        }
        self.forward(&mut a);
        a
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<FftPlan>>> = RefCell::new(HashMap::new());
}

/// Shared plan for length `n`, cached per thread.
pub fn plan(n: usize) -> Rc<FftPlan> {
    PLANS.with(|p| p.borrow_mut().entry(n).or_insert_with(|| Rc::new(FftPlan::new(n))).clone())
}

/// Discrete Fourier transform; the length must be a power of two.
pub fn fft(v: &[Complex64]) -> Vec<Complex64> {
    let mut a = v.to_vec();
    plan(v.len()).forward(&mut a);
    a
}

pub fn ifft(v: &[Complex64]) -> Vec<Complex64> {
    let mut a = v.to_vec();
    plan(v.len()).inverse(&mut a);
    a
}

/// Full linear convolution of two real vectors (length `a + b - 1`).
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let out = a.len() + b.len() - 1;
    let p = plan(next_pow2(out));
    let fa = p.forward_real(a);
    let mut fb = p.forward_real(b);
    for (x, y) in fb.iter_mut().zip(&fa) {
        *x *= y;
    }
    p.inverse(&mut fb);
    fb[..out].iter().map(|c| c.re).collect()
}

/// Convolution with a fixed vector whose spectrum is cached.
#[derive(Debug, Clone)]
pub struct ConvKernel {
    plan: Rc<FftPlan>,
    spectrum: Vec<Complex64>,
    len: usize,
}

impl ConvKernel {
    /// Kernel for convolving `v` with inputs of length up to `max_input`.
    pub fn new(v: &[f64], max_input: usize) -> Self {
        let p = plan(next_pow2(v.len() + max_input.max(1) - 1));
        let spectrum = p.forward_real(v);
        Self { plan: p, spectrum, len: v.len() }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let out = self.len + x.len() - 1;
        assert!(out <= self.plan.len());
        let mut fx = self.plan.forward_real(x);
        for (a, b) in fx.iter_mut().zip(&self.spectrum) {
            *a *= b;
        }
        self.plan.inverse(&mut fx);
        fx[..out].iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unit_and_ones() {
        let e1 = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        assert!(fft(&e1).iter().all(|z| (z - c(1.0)).norm() < 1e-15));
        let ones = vec![c(1.0); 4];
        let f = fft(&ones);
        assert!((f[0] - c(4.0)).norm() < 1e-15);
        assert!(f[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn matches_direct_dft() {
        let v: Vec<Complex64> = (0..8).map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64).cos() * 0.3)).collect();
        let f = fft(&v);
        for k in 0..8 {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, x) in v.iter().enumerate() {
                let ang = -2.0 * PI * (j * k) as f64 / 8.0;
                s += x * Complex64::new(ang.cos(), ang.sin());
            }
            assert!((s - f[k]).norm() < 1e-12);
        }
        let back = ifft(&f);
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct() {
        let a = [1.0, -2.0, 0.5, 3.0, 0.25];
        let b = [0.5, 4.0, -1.0];
        let got = convolve(&a, &b);
        for k in 0..7 {
            let mut s = 0.0;
            for i in 0..5 {
                if k >= i && k - i < 3 {
                    s += a[i] * b[k - i];
                }
            }
            assert!((got[k] - s).abs() < 1e-13);
        }
        let kern = ConvKernel::new(&b, 5);
        let again = kern.apply(&a);
        for (x, y) in got.iter().zip(&again) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
