use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squeeze `lambda` and rotation `theta` of a squeeze-tomogram frame.
///
/// The frame maps `q` to `mu q + nu p` with `mu = e^lambda cos(theta)` and
/// `nu = e^-lambda sin(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyFrame {
    pub lambda: f64,
    pub theta: f64,
}

impl TomographyFrame {
    pub fn new(lambda: f64, theta: f64) -> Self {
        Self { lambda, theta }
    }

    pub fn mu(&self) -> f64 {
        self.lambda.exp() * self.theta.cos()
    }

    pub fn nu(&self) -> f64 {
        (-self.lambda).exp() * self.theta.sin()
    }

    pub fn munu(&self) -> (f64, f64) {
        frame_to_munu(self.lambda, self.theta)
    }
}

pub fn frame_to_munu(lambda: f64, theta: f64) -> (f64, f64) {
    (lambda.exp() * theta.cos(), (-lambda).exp() * theta.sin())
}

/// Canonical preimage of `(mu, nu)`.
///
/// For `mu > 0` the branch `|theta| <= pi/4` is taken; `mu = 0` with
/// `nu > 0` maps to `theta = pi/2`. Points with `mu < 0`, with `mu = 0` and
/// `nu <= 0`, or with `|mu nu| > 1/2` have no preimage on this branch.
pub fn munu_to_frame(mu: f64, nu: f64) -> Result<TomographyFrame> {
    let outside = |constraint| Err(Error::OutsideFrameImage { mu, nu, constraint });
    if !mu.is_finite() || !nu.is_finite() {
        return outside("mu and nu must be finite");
    }
    let prod = 2.0 * mu * nu;
    if prod.abs() > 1.0 {
        return outside("|mu nu| <= 1/2");
    }
    if mu < 0.0 {
        return outside("mu >= 0");
    }
    if mu == 0.0 {
        if nu <= 0.0 {
            return outside("nu > 0 when mu = 0");
        }
        return Ok(TomographyFrame::new(-nu.ln(), FRAC_PI_2));
    }
    let theta = 0.5 * prod.asin();
    Ok(TomographyFrame::new((mu / theta.cos()).ln(), theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_map_examples() {
        let (mu, nu) = frame_to_munu(0.0, FRAC_PI_2);
        assert!(mu.abs() < 1e-16 && (nu - 1.0).abs() < 1e-16);
        assert_eq!(frame_to_munu(0.0, 0.0), (1.0, 0.0));
        for lambda in [-1.3, 0.0, 0.4, 1.9] {
            let (mu, nu) = frame_to_munu(lambda, 0.7);
            assert!((mu * nu - (1.4f64).sin() / 2.0).abs() < 1e-15);
            let c2 = (1.4f64).cos().powi(2);
            assert!((1.0 - 4.0 * mu * mu * nu * nu - c2).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(munu_to_frame(1.0, 0.0).unwrap(), TomographyFrame::new(0.0, 0.0));
        assert_eq!(munu_to_frame(0.0, 1.0).unwrap(), TomographyFrame::new(0.0, FRAC_PI_2));
        let f = munu_to_frame(std::f64::consts::E, 0.0).unwrap();
        assert!((f.lambda - 1.0).abs() < 1e-15 && f.theta == 0.0);
    }

    #[test]
    fn round_trip_on_branch() {
        for lambda in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            for theta in [-0.78, -0.2, 0.0, 0.5, 0.785] {
                let (mu, nu) = frame_to_munu(lambda, theta);
                let f = munu_to_frame(mu, nu).unwrap();
                let (mu2, nu2) = f.munu();
                assert!((mu - mu2).abs() <= 1e-12 * mu.abs().max(1.0));
                assert!((nu - nu2).abs() <= 1e-12 * nu.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_points_off_the_image() {
        for (mu, nu) in [(1.0, 1.0), (-1.0, 0.2), (0.0, 0.0), (0.0, -2.0)] {
            assert!(matches!(munu_to_frame(mu, nu), Err(Error::OutsideFrameImage { .. })));
        }
    }
}
