//! Dense 2-D convolution references for the separable Gaussian operators.

/// Normalized 1-D Gaussian taps, radius `ceil(3 * sigma)`.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0);
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Direct 2-D convolution with replicate padding, all in f64.
pub fn conv2_replicate(data: &[f64], w: usize, h: usize, kernel: &[Vec<f64>]) -> Vec<f64> {
    let kh = kernel.len();
    let kw = kernel[0].len();
    let (ry, rx) = (kh / 2, kw / 2);
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ky, row) in kernel.iter().enumerate() {
                let sy = (y + ky).saturating_sub(ry).min(h - 1);
                for (kx, &kv) in row.iter().enumerate() {
                    let sx = (x + kx).saturating_sub(rx).min(w - 1);
                    acc += kv * data[sy * w + sx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Gaussian blur as one dense 2-D convolution: the outer-product kernel is
/// re-normalized as a whole, the opposite construction from a separable
/// two-pass implementation.
pub fn ref_gaussian_blur(data: &[f32], w: usize, h: usize, sigma: f64) -> Vec<f32> {
    if sigma == 0.0 {
        return data.to_vec();
    }
    let t = gaussian_taps(sigma);
    let mut kernel: Vec<Vec<f64>> = t.iter().map(|&a| t.iter().map(|&b| a * b).collect()).collect();
    let total: f64 = kernel.iter().flatten().sum();
    for row in &mut kernel {
        for v in row {
            *v /= total;
        }
    }
    let src: Vec<f64> = data.iter().map(|&v| f64::from(v)).collect();
    conv2_replicate(&src, w, h, &kernel)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0) as f32)
        .collect()
}

/// Both gradient components of a map, via dense convolution with the
/// smoothing/derivative outer-product kernels. The derivative taps are
/// `j / sigma^2 * s[j]`, the shared operator definition.
pub fn ref_gradient(data: &[f32], w: usize, h: usize, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let s = gaussian_taps(sigma);
    let r = (s.len() / 2) as i64;
    let d: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(j, &sj)| (j as i64 - r) as f64 / (sigma * sigma) * sj)
        .collect();
    let kx: Vec<Vec<f64>> = s.iter().map(|&sy| d.iter().map(|&dx| sy * dx).collect()).collect();
    let ky: Vec<Vec<f64>> = d.iter().map(|&dy| s.iter().map(|&sx| dy * sx).collect()).collect();
    let src: Vec<f64> = data.iter().map(|&v| f64::from(v)).collect();
    (
        conv2_replicate(&src, w, h, &kx),
        conv2_replicate(&src, w, h, &ky),
    )
}

/// Gradient error: summed squared difference of the gradient fields,
/// divided by 1000.
pub fn ref_grad_error(pred: &[f32], gt: &[f32], w: usize, h: usize, sigma: f64) -> f64 {
    let (pgx, pgy) = ref_gradient(pred, w, h, sigma);
    let (ggx, ggy) = ref_gradient(gt, w, h, sigma);
    let mut sum = 0.0;
    for i in 0..w * h {
        let dx = pgx[i] - ggx[i];
        let dy = pgy[i] - ggy[i];
        sum += dx * dx + dy * dy;
    }
    sum / 1000.0
}
