//! Extended-precision re-derivation of the per-pixel depth posterior and
//! the depth-conditioned matte update, straight from their definitions.

use crate::dd::Dd;
use crate::gauss::{normal_cdf, SQRT_2PI_HI, SQRT_2PI_LO};

fn sqrt_2pi() -> Dd {
    Dd::from_words(SQRT_2PI_HI, SQRT_2PI_LO)
}

/// Uniform foreground density on `(0, mean]`.
fn likelihood_fg(d: f64, mean: f64) -> Dd {
    if d > 0.0 && d <= mean {
        Dd::ONE.div(Dd::from_f64(mean))
    } else {
        Dd::ZERO
    }
}

/// Zero-truncated normal background density, with the truncation mass from
/// quadrature rather than a library CDF.
fn likelihood_bg(d: f64, mean: f64, std: f64) -> Dd {
    if d <= 0.0 {
        return Dd::ZERO;
    }
    let z = Dd::from_f64(d)
        .sub(Dd::from_f64(mean))
        .div(Dd::from_f64(std));
    let density = z
        .mul(z)
        .mul(Dd::from_f64(-0.5))
        .exp()
        .div(Dd::from_f64(std).mul(sqrt_2pi()));
    density.div(Dd::from_f64(normal_cdf(mean / std)))
}

/// Posterior foreground probability:
/// `(P_F(d) * prior + prior * zeta) / (P_F(d) * prior + P_B(d) * (1 - prior) + zeta)`.
pub fn posterior_fg(d: f64, mean: f64, std: f64, prior_fg: f64, zeta: f64) -> f64 {
    let pf = likelihood_fg(d, mean);
    let pb = likelihood_bg(d, mean, std);
    let prior = Dd::from_f64(prior_fg);
    let zeta = Dd::from_f64(zeta);
    let num = pf.mul(prior).add(prior.mul(zeta));
    let den = pf
        .mul(prior)
        .add(pb.mul(Dd::ONE.sub(prior)))
        .add(zeta);
    num.div(den).value()
}

/// Depth-conditioned update of a matte value used as the per-pixel prior:
/// `P_F(d) * prior / (P_B(d) * (1 - prior) + P_F(d) * prior + guard)`,
/// with the prior returned unchanged when both likelihoods vanish.
pub fn posterior_update(d: f64, mean: f64, std: f64, prior: f64, guard: f64) -> f64 {
    let pf = likelihood_fg(d, mean);
    let pb = likelihood_bg(d, mean, std);
    if pf == Dd::ZERO && pb == Dd::ZERO {
        return prior;
    }
    let prior = Dd::from_f64(prior);
    let num = pf.mul(prior);
    let den = pb
        .mul(Dd::ONE.sub(prior))
        .add(pf.mul(prior))
        .add(Dd::from_f64(guard));
    num.div(den).value().clamp(0.0, 1.0)
}
