//! The four standard matting error metrics, plus the per-frame report row.
//!
//! Values follow the usual benchmark presentation: SAD, Grad, and Conn are
//! sums divided by 1000; MSE is the mean scaled by 1e3. All accumulation is
//! in `f64` over row-major order, so results are deterministic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imgcore::{gaussian_kernel, ScalarMap};

/// Tunable metric constants. Defaults are the standard benchmark choices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams {
    /// Sigma of the Gaussian-derivative filter in the gradient error.
    pub grad_sigma: f64,
    /// Threshold ladder step for the connectivity error.
    pub conn_step: f64,
    /// Connectivity degradations below this distance are forgiven.
    pub conn_gate: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            grad_sigma: 1.4,
            conn_step: 0.1,
            conn_gate: 0.15,
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_sigma.is_finite() && self.grad_sigma > 0.0) {
            return Err(Error::param(
                "grad_sigma",
                format!("{} must be > 0", self.grad_sigma),
            ));
        }
        if !(self.conn_step.is_finite() && self.conn_step > 0.0 && self.conn_step < 1.0) {
            return Err(Error::param(
                "conn_step",
                format!("{} must lie in (0, 1)", self.conn_step),
            ));
        }
        if !(self.conn_gate.is_finite() && self.conn_gate >= 0.0) {
            return Err(Error::param(
                "conn_gate",
                format!("{} must be >= 0", self.conn_gate),
            ));
        }
        Ok(())
    }
}

/// One evaluated frame: the four metric values plus pipeline wall time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub frame: String,
    pub sad: f64,
    pub mse: f64,
    pub grad: f64,
    pub conn: f64,
    pub wall_time_ms: f64,
}

/// Header of the CSV report; field order matches [`MetricReport`].
pub const REPORT_CSV_HEADER: &str = "frame,sad,mse,grad,conn,wall_time_ms";

impl MetricReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.frame, self.sad, self.mse, self.grad, self.conn, self.wall_time_ms
        )
    }
}

/// Arithmetic mean over reports, labeled `mean`. Returns `None` when empty.
pub fn mean_report(reports: &[MetricReport]) -> Option<MetricReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let mut m = MetricReport {
        frame: "mean".to_owned(),
        sad: 0.0,
        mse: 0.0,
        grad: 0.0,
        conn: 0.0,
        wall_time_ms: 0.0,
    };
    for r in reports {
        m.sad += r.sad;
        m.mse += r.mse;
        m.grad += r.grad;
        m.conn += r.conn;
        m.wall_time_ms += r.wall_time_ms;
    }
    m.sad /= n;
    m.mse /= n;
    m.grad /= n;
    m.conn /= n;
    m.wall_time_ms /= n;
    Some(m)
}

fn check_pair(context: &'static str, pred: &ScalarMap, gt: &ScalarMap) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(context, pred.dims(), gt.dims()));
    }
    Ok(())
}

/// Summed absolute difference, divided by 1000.
pub fn sad(pred: &ScalarMap, gt: &ScalarMap) -> Result<f64> {
    check_pair("sad", pred, gt)?;
    let mut sum = 0.0f64;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        sum += (f64::from(p) - f64::from(g)).abs();
    }
    Ok(sum / 1000.0)
}

/// Mean squared difference, scaled by 1e3.
pub fn mse(pred: &ScalarMap, gt: &ScalarMap) -> Result<f64> {
    check_pair("mse", pred, gt)?;
    let mut sum = 0.0f64;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let d = f64::from(p) - f64::from(g);
        sum += d * d;
    }
    Ok(sum / pred.data().len() as f64 * 1e3)
}

/// Horizontal smoothing pass with replicate padding.
fn smooth_x(src: &[f64], w: usize, h: usize, k: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (j, &kj) in k.iter().enumerate() {
                let sx = (x + j).saturating_sub(r).min(w - 1);
                acc += kj * row[sx];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Vertical smoothing pass with replicate padding.
fn smooth_y(src: &[f64], w: usize, h: usize, k: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (j, &kj) in k.iter().enumerate() {
                let sy = (y + j).saturating_sub(r).min(h - 1);
                acc += kj * src[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Horizontal derivative pass. Taps are paired antisymmetrically, so a
/// constant row yields exactly zero.
fn deriv_x(src: &[f64], w: usize, h: usize, d: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for j in 1..=r {
                let hi = (x + j).min(w - 1);
                let lo = x.saturating_sub(j);
                acc += d[r + j] * (row[hi] - row[lo]);
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Vertical derivative pass, antisymmetric like [`deriv_x`].
fn deriv_y(src: &[f64], w: usize, h: usize, d: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 1..=r {
                let hi = (y + j).min(h - 1) * w + x;
                let lo = y.saturating_sub(j) * w + x;
                acc += d[r + j] * (src[hi] - src[lo]);
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Gradient field of a map: derivative-of-Gaussian along one axis combined
/// with Gaussian smoothing along the other, replicate padding throughout.
/// The derivative kernel is `d[j] = j / sigma^2 * s[j]` with `s` the
/// normalized smoothing kernel, which gives a unit response to a unit ramp
/// in the limit.
fn gradient_field(map: &ScalarMap, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = map.dims();
    let s = gaussian_kernel(sigma);
    let r = (s.len() - 1) / 2;
    let d: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(j, &sj)| (j as f64 - r as f64) / (sigma * sigma) * sj)
        .collect();
    let src: Vec<f64> = map.data().iter().map(|&v| f64::from(v)).collect();
    let gx = smooth_y(&deriv_x(&src, w, h, &d, r), w, h, &s, r);
    let gy = smooth_x(&deriv_y(&src, w, h, &d, r), w, h, &s, r);
    (gx, gy)
}

/// Gradient error: summed squared difference of the two Gaussian-derivative
/// gradient fields, divided by 1000.
pub fn grad_error(pred: &ScalarMap, gt: &ScalarMap, params: &MetricParams) -> Result<f64> {
    check_pair("grad_error", pred, gt)?;
    params.validate()?;
    let (pgx, pgy) = gradient_field(pred, params.grad_sigma);
    let (ggx, ggy) = gradient_field(gt, params.grad_sigma);
    let mut sum = 0.0f64;
    for i in 0..pgx.len() {
        let dx = pgx[i] - ggx[i];
        let dy = pgy[i] - ggy[i];
        sum += dx * dx + dy * dy;
    }
    Ok(sum / 1000.0)
}

/// Largest 8-connected component of a boolean mask. Ties in size go to the
/// component encountered first in row-major order.
fn largest_component(mask: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut label = vec![u32::MAX; w * h];
    let mut sizes: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..w * h {
        if !mask[start] || label[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let mut size = 0usize;
        label[start] = id;
        stack.push((start % w, start / w));
        while let Some((x, y)) = stack.pop() {
            size += 1;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let ni = ny as usize * w + nx as usize;
                    if mask[ni] && label[ni] == u32::MAX {
                        label[ni] = id;
                        stack.push((nx as usize, ny as usize));
                    }
                }
            }
        }
        sizes.push(size);
    }
    let best = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i as u32);
    label
        .iter()
        .map(|&l| Some(l) == best && l != u32::MAX)
        .collect()
}

/// Connectivity error with the threshold-ladder definition: for each level
/// `theta = k * step < 1`, the source region is the largest 8-connected
/// component of `{pred >= theta AND gt >= theta}`; a pixel's level is the
/// last ladder value at which it still belonged to the source (1 if it never
/// dropped out, 0 if it was disconnected from the start). The per-map
/// connectedness is `1 - d` where `d = value - level` when `d >= conn_gate`,
/// else 1; the error is the summed absolute connectedness difference divided
/// by 1000.
pub fn conn_error(pred: &ScalarMap, gt: &ScalarMap, params: &MetricParams) -> Result<f64> {
    check_pair("conn_error", pred, gt)?;
    params.validate()?;
    let (w, h) = pred.dims();
    let n = w * h;
    let step = params.conn_step;

    const UNSEEN: f64 = -1.0;
    let mut level = vec![UNSEEN; n];
    let mut k = 1usize;
    loop {
        let theta = k as f64 * step;
        if theta >= 1.0 - step / 2.0 {
            break;
        }
        let mask: Vec<bool> = (0..n)
            .map(|i| f64::from(pred.data()[i]) >= theta && f64::from(gt.data()[i]) >= theta)
            .collect();
        let omega = largest_component(&mask, w, h);
        let prev = (k - 1) as f64 * step;
        for i in 0..n {
            if level[i] == UNSEEN && !omega[i] {
                level[i] = prev;
            }
        }
        k += 1;
    }
    for l in &mut level {
        if *l == UNSEEN {
            *l = 1.0;
        }
    }

    let phi = |value: f32, l: f64| -> f64 {
        let d = f64::from(value) - l;
        if d >= params.conn_gate {
            1.0 - d
        } else {
            1.0
        }
    };
    let mut sum = 0.0f64;
    for i in 0..n {
        sum += (phi(pred.data()[i], level[i]) - phi(gt.data()[i], level[i])).abs();
    }
    Ok(sum / 1000.0)
}

/// All four metrics on one frame pair.
pub fn evaluate(
    frame: &str,
    pred: &ScalarMap,
    gt: &ScalarMap,
    params: &MetricParams,
    wall_time_ms: f64,
) -> Result<MetricReport> {
    Ok(MetricReport {
        frame: frame.to_owned(),
        sad: sad(pred, gt)?,
        mse: mse(pred, gt)?,
        grad: grad_error(pred, gt, params)?,
        conn: conn_error(pred, gt, params)?,
        wall_time_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, v: Vec<f32>) -> ScalarMap {
        ScalarMap::new(w, h, v).unwrap()
    }

    fn varied(w: usize, h: usize) -> ScalarMap {
        map(w, h, (0..w * h).map(|i| (i % 11) as f32 / 10.0).collect())
    }

    #[test]
    fn identical_maps_score_zero_on_all_metrics() {
        let m = varied(64, 64);
        let p = MetricParams::default();
        assert_eq!(sad(&m, &m).unwrap(), 0.0);
        assert_eq!(mse(&m, &m).unwrap(), 0.0);
        assert_eq!(grad_error(&m, &m, &p).unwrap(), 0.0);
        assert_eq!(conn_error(&m, &m, &p).unwrap(), 0.0);
    }

    #[test]
    fn sad_hand_value() {
        let a = map(2, 2, vec![0.75, 0.0, 0.0, 0.0]);
        let b = map(2, 2, vec![0.25, 0.0, 0.0, 0.0]);
        assert_eq!(sad(&a, &b).unwrap(), 0.0005);
        assert_eq!(sad(&b, &a).unwrap(), 0.0005);
    }

    #[test]
    fn mse_hand_values() {
        let a = map(2, 2, vec![0.75, 0.0, 0.0, 0.0]);
        let b = map(2, 2, vec![0.25, 0.0, 0.0, 0.0]);
        assert_eq!(mse(&a, &b).unwrap(), 62.5);
        let ones = map(2, 2, vec![1.0; 4]);
        let zeros = map(2, 2, vec![0.0; 4]);
        assert_eq!(mse(&ones, &zeros).unwrap(), 1000.0);
    }

    #[test]
    fn grad_is_exactly_zero_for_constants_of_different_levels() {
        let a = ScalarMap::filled(16, 12, 0.3).unwrap();
        let b = ScalarMap::filled(16, 12, 0.9).unwrap();
        assert_eq!(grad_error(&a, &b, &MetricParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn grad_detects_a_shifted_edge() {
        let edge = |at: usize| -> ScalarMap {
            let v: Vec<f32> = (0..16 * 16)
                .map(|i| if i % 16 >= at { 1.0 } else { 0.0 })
                .collect();
            map(16, 16, v)
        };
        let g = grad_error(&edge(6), &edge(9), &MetricParams::default()).unwrap();
        assert!(g > 0.0, "shifted edges must disagree in gradient, got {g}");
    }

    #[test]
    fn conn_identical_two_blob_binary_structure_is_zero() {
        let mut v = vec![0.0f32; 64];
        for i in [0usize, 1, 8, 9, 54, 55, 62, 63] {
            v[i] = 1.0;
        }
        let m = map(8, 8, v);
        assert_eq!(conn_error(&m, &m, &MetricParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn conn_detached_blob_in_pred_scores_one_per_pixel() {
        // pred has a far blob that gt lacks; each blob pixel degrades fully.
        let pred = map(1, 3, vec![1.0, 0.0, 1.0]);
        let gt = map(1, 3, vec![1.0, 0.0, 0.0]);
        assert_eq!(conn_error(&pred, &gt, &MetricParams::default()).unwrap(), 0.001);
    }

    #[test]
    fn conn_forgives_differences_below_the_gate() {
        let pred = map(1, 1, vec![0.5]);
        let gt = map(1, 1, vec![0.4]);
        assert_eq!(conn_error(&pred, &gt, &MetricParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn largest_component_breaks_ties_toward_first_in_row_major_order() {
        // Two separated single pixels; the earlier one wins.
        let mask = vec![true, false, false, false, false, true];
        let omega = largest_component(&mask, 3, 2);
        assert_eq!(omega, vec![true, false, false, false, false, false]);
    }

    #[test]
    fn metrics_reject_mismatched_dims() {
        let a = ScalarMap::filled(4, 4, 0.5).unwrap();
        let b = ScalarMap::filled(4, 5, 0.5).unwrap();
        let p = MetricParams::default();
        assert!(sad(&a, &b).is_err());
        assert!(mse(&a, &b).is_err());
        assert!(grad_error(&a, &b, &p).is_err());
        assert!(conn_error(&a, &b, &p).is_err());
    }

    #[test]
    fn csv_header_and_row_format() {
        assert_eq!(REPORT_CSV_HEADER, "frame,sad,mse,grad,conn,wall_time_ms");
        let r = MetricReport {
            frame: "frame_003".to_owned(),
            sad: 0.0005,
            mse: 62.5,
            grad: 0.0,
            conn: 0.001,
            wall_time_ms: 12.5,
        };
        assert_eq!(r.csv_row(), "frame_003,0.0005,62.5,0,0.001,12.5");
    }

    #[test]
    fn mean_report_averages_fields() {
        let mk = |sad: f64, wall: f64| MetricReport {
            frame: "x".to_owned(),
            sad,
            mse: 2.0 * sad,
            grad: 0.0,
            conn: 0.0,
            wall_time_ms: wall,
        };
        let mean = mean_report(&[mk(1.0, 10.0), mk(3.0, 30.0)]).unwrap();
        assert_eq!(mean.frame, "mean");
        assert_eq!(mean.sad, 2.0);
        assert_eq!(mean.mse, 4.0);
        assert_eq!(mean.wall_time_ms, 20.0);
        assert!(mean_report(&[]).is_none());
    }
}
