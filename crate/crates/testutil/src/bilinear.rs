//! Per-pixel bilinear upsampling reference (align-corners-false sampling
//! with edge-clamped taps), computed in f64.

/// Resample `src` (sw x sh) to (dw x dh).
pub fn ref_bilinear(src: &[f32], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f32> {
    assert!(sw > 0 && sh > 0 && dw > 0 && dh > 0);
    let sx_scale = sw as f64 / dw as f64;
    let sy_scale = sh as f64 / dh as f64;
    let mut out = Vec::with_capacity(dw * dh);
    for dy in 0..dh {
        let fy = ((dy as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let wy = fy - y0 as f64;
        for dx in 0..dw {
            let fx = ((dx as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let wx = fx - x0 as f64;
            let top = f64::from(src[y0 * sw + x0]) * (1.0 - wx) + f64::from(src[y0 * sw + x1]) * wx;
            let bot = f64::from(src[y1 * sw + x0]) * (1.0 - wx) + f64::from(src[y1 * sw + x1]) * wx;
            out.push((top * (1.0 - wy) + bot * wy) as f32);
        }
    }
    out
}
