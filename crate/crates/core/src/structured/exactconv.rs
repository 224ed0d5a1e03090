//! Convolution of double-double vectors to double-double accuracy in
//! `O(n log n)`: operands are cut into 14-bit integer slices on a common binary
//! grid, slice convolutions are evaluated by floating FFTs that stay far below
//! 2^53 and are therefore rounded back to exact integers.

use super::fft::{next_pow2, plan, FftPlan};
use crate::xprec::ExtScalar;
use num_complex::Complex64;
use std::rc::Rc;

const SLICE_BITS: i32 = 14;
const SLICES: usize = 8;
/// Highest retained slice-index sum.
const LEVELS: usize = SLICES + 1;

#[inline]
fn pow2(k: i32) -> f64 {
    if (-1000..1000).contains(&k) {
        2f64.powi(k)
    } else {
        // split to stay clear of intermediate overflow
        2f64.powi(k / 2) * 2f64.powi(k - k / 2)
    }
}

struct Sliced {
    exp: i32,
    slices: Vec<Vec<f64>>,
}

fn slice(x: &[ExtScalar]) -> Option<Sliced> {
    let maxabs = x.iter().fold(0.0f64, |m, v| m.max(v.hi.abs()));
    if maxabs == 0.0 || !maxabs.is_finite() {
        return None;
    }
    let exp = maxabs.log2().floor() as i32 + 1;
    let scale = pow2(-exp);
    let up = pow2(SLICE_BITS);
    let mut slices = vec![vec![0.0; x.len()]; SLICES];
    for (i, v) in x.iter().enumerate() {
        let mut r = ExtScalar::from_pair(v.hi * scale, v.lo * scale);
        for s in slices.iter_mut() {
            r = ExtScalar::from_pair(r.hi * up, r.lo * up);
            let c = r.hi.round();
            s[i] = c;
            r -= c;
        }
    }
    Some(Sliced { exp, slices })
}

fn spectra(p: &FftPlan, s: &Sliced) -> Vec<Vec<Complex64>> {
    s.slices.iter().map(|v| p.forward_real(v)).collect()
}

fn combine(p: &FftPlan, fa: &[Vec<Complex64>], ea: i32, fb: &[Vec<Complex64>], eb: i32, out: usize) -> Vec<ExtScalar> {
    let n = p.len();
    let mut result = vec![ExtScalar::ZERO; out];
    let mut level = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..LEVELS {
        level.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let mut any = false;
        for k in 0..SLICES.min(s + 1) {
            let l = s - k;
            if l >= SLICES {
                continue;
            }
            any = true;
            for ((z, a), b) in level.iter_mut().zip(&fa[k]).zip(&fb[l]) {
                *z += a * b;
            }
        }
        if !any {
            continue;
        }
        p.inverse(&mut level);
        let w = pow2(ea + eb - SLICE_BITS * (s as i32 + 2));
        for (r, z) in result.iter_mut().zip(&level) {
            let v = z.re.round();
            if v != 0.0 {
                *r += v * w;
            }
        }
    }
    result
}

/// Full linear convolution `c_k = sum_i a_i b_{k-i}` in extended precision.
pub fn xconvolve(a: &[ExtScalar], b: &[ExtScalar]) -> Vec<ExtScalar> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let out = a.len() + b.len() - 1;
    let (Some(sa), Some(sb)) = (slice(a), slice(b)) else {
        return vec![ExtScalar::ZERO; out];
    };
    let p = plan(next_pow2(out));
    let fa = spectra(&p, &sa);
    let fb = spectra(&p, &sb);
    combine(&p, &fa, sa.exp, &fb, sb.exp, out)
}

/// Extended-precision convolution with a fixed left operand.
pub struct XConvKernel {
    plan: Rc<FftPlan>,
    spectra: Vec<Vec<Complex64>>,
    exp: i32,
    len: usize,
    zero: bool,
}

impl XConvKernel {
    pub fn new(a: &[ExtScalar], max_input: usize) -> Self {
        let p = plan(next_pow2(a.len() + max_input.max(1) - 1));
        match slice(a) {
            Some(s) => Self { spectra: spectra(&p, &s), exp: s.exp, plan: p, len: a.len(), zero: false },
            None => Self { spectra: vec![], exp: 0, plan: p, len: a.len(), zero: true },
        }
    }

    pub fn apply(&self, b: &[ExtScalar]) -> Vec<ExtScalar> {
        let out = self.len + b.len() - 1;
        assert!(out <= self.plan.len());
        if self.zero {
            return vec![ExtScalar::ZERO; out];
        }
        let Some(sb) = slice(b) else {
            return vec![ExtScalar::ZERO; out];
        };
        let fb = spectra(&self.plan, &sb);
        combine(&self.plan, &self.spectra, self.exp, &fb, sb.exp, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Rng, Seed};
    use crate::xprec::xdot_ext;

    fn naive(a: &[ExtScalar], b: &[ExtScalar]) -> Vec<ExtScalar> {
        let out = a.len() + b.len() - 1;
        (0..out)
            .map(|k| {
                let lo = k.saturating_sub(b.len() - 1);
                let hi = k.min(a.len() - 1);
                let xs: Vec<ExtScalar> = (lo..=hi).map(|i| a[i]).collect();
                let ys: Vec<ExtScalar> = (lo..=hi).map(|i| b[k - i]).collect();
                xdot_ext(&xs, &ys)
            })
            .collect()
    }

    fn ext_random(rng: &mut Rng, n: usize, spread: f64) -> Vec<ExtScalar> {
        (0..n)
            .map(|_| {
                let h = rng.uniform() * 10f64.powf(spread * rng.uniform());
                ExtScalar::from_pair(h, h * 1e-17 * rng.uniform())
            })
            .collect()
    }

    #[test]
    fn agrees_with_naive_double_double() {
        let mut rng = Rng::new(Seed(3));
        for &(na, nb) in &[(1, 1), (5, 3), (64, 64), (300, 17), (1024, 1024)] {
            let a = ext_random(&mut rng, na, 2.0);
            let b = ext_random(&mut rng, nb, 2.0);
            let fast = xconvolve(&a, &b);
            let slow = naive(&a, &b);
            let scale: f64 = a.iter().map(|v| v.hi.abs()).fold(0.0, f64::max) * b.iter().map(|v| v.hi.abs()).sum::<f64>();
            for (x, y) in fast.iter().zip(&slow) {
                assert!((*x - *y).to_f64().abs() <= 1e-29 * scale, "{na}x{nb}: {x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn kernel_matches_free_function() {
        let mut rng = Rng::new(Seed(4));
        let a = ext_random(&mut rng, 40, 1.0);
        let b = ext_random(&mut rng, 33, 1.0);
        let k = XConvKernel::new(&a, 40);
        assert_eq!(k.apply(&b), xconvolve(&a, &b));
        assert!(xconvolve(&[ExtScalar::ZERO; 3], &b).iter().all(|v| v.hi == 0.0));
    }
}
