//! Standard normal CDF evaluated by quadrature alone, so no
//! special-function library sits on both sides of a comparison.

use crate::quad::integrate_with_knots;

/// `sqrt(2*pi)` as a two-word constant (31 significant digits).
pub const SQRT_2PI_HI: f64 = 2.5066282746310007;
pub const SQRT_2PI_LO: f64 = -1.9758423471518894e-16;

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / SQRT_2PI_HI
}

/// Standard normal CDF to about 1e-13 absolute, by integrating the density
/// from 0 with knots every sigma.
pub fn normal_cdf(x: f64) -> f64 {
    if x <= -40.0 {
        return 0.0;
    }
    if x >= 40.0 {
        return 1.0;
    }
    let hi = x.abs();
    if hi == 0.0 {
        return 0.5;
    }
    let mut knots: Vec<f64> = (0..).map(f64::from).take_while(|&k| k < hi).collect();
    knots.push(hi);
    let tail = integrate_with_knots(&density, &knots, 1e-14);
    if x >= 0.0 {
        0.5 + tail
    } else {
        0.5 - tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_high_precision_references() {
        // Reference values carry 20 digits from an arbitrary-precision run.
        let cases = [
            (0.0, 0.5),
            (0.1, 0.53982783727702898367),
            (0.5, 0.69146246127401310364),
            (1.0, 0.84134474606854294859),
            (3.0, 0.99865010196836990547),
            (-1.0, 0.15865525393145705141),
        ];
        for (x, want) in cases {
            let got = normal_cdf(x);
            assert!((got - want).abs() < 1e-12, "Phi({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn symmetry_and_saturation() {
        assert!((normal_cdf(2.3) + normal_cdf(-2.3) - 1.0).abs() < 1e-13);
        assert_eq!(normal_cdf(41.0), 1.0);
        assert_eq!(normal_cdf(-41.0), 0.0);
    }
}
