//! Internal FFT helpers built on rustfft. Real signals are carried through
//! complex buffers; all lengths are padded by the caller.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward FFT of a real signal zero-padded to `n` points.
pub(crate) fn forward_padded(x: &[f64], n: usize) -> Vec<Complex64> {
    assert!(x.len() <= n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Inverse FFT returning the real part scaled by 1/n.
pub(crate) fn inverse_real(mut spec: Vec<Complex64>) -> Vec<f64> {
    let n = spec.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let scale = 1.0 / n as f64;
    spec.into_iter().map(|c| c.re * scale).collect()
}

/// Linear convolution of two real sequences, length a + b - 1.
pub(crate) fn linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        return direct_convolve(a, b, out_len);
    }
    let n = out_len.next_power_of_two();
    let fa = forward_padded(a, n);
    let fb = forward_padded(b, n);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = inverse_real(prod);
    out.truncate(out_len);
    out
}

fn direct_convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}
