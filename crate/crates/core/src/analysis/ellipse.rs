//! Concentration ellipses for 2-D clusters of scores.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// A data-concentration ellipse: the contour expected to contain a given
/// probability mass of a bivariate Gaussian fitted to the points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    /// Sample mean of the points.
    pub center: [f64; 2],
    /// Major then minor semi-axis length.
    pub semi_axes: [f64; 2],
    /// Orientation of the major axis, radians in (-pi/2, pi/2].
    pub angle: f64,
}

/// Chi-square quantile with 2 degrees of freedom: the squared
/// Mahalanobis radius containing probability `level`.
pub fn chi_square_quantile_2dof(level: f64) -> f64 {
    -2.0 * (1.0 - level).ln()
}

/// Fits the `level`-mass concentration ellipse of 2-D points.
///
/// The semi-axes are `sqrt(eigenvalue * q)` along the eigenvectors of the
/// sample covariance, with `q` the chi-square quantile with 2 degrees of
/// freedom (about 5.991 at the default 0.95). Points that are all
/// identical have a rank-0 covariance and are reported as degenerate;
/// collinear points simply produce a zero minor axis.
pub fn confidence_ellipse(points: &[[f64; 2]], level: f64) -> Result<Ellipse, AnalysisError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::InvalidLevel(level));
    }
    let m = points.len();
    if m < 3 {
        return Err(AnalysisError::NotEnoughData { needed: 3, got: m });
    }

    let mut center = [0.0_f64; 2];
    for p in points {
        center[0] += p[0];
        center[1] += p[1];
    }
    center[0] /= m as f64;
    center[1] /= m as f64;

    let (mut sxx, mut syy, mut sxy) = (0.0_f64, 0.0, 0.0);
    for p in points {
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let denom = (m - 1) as f64;
    sxx /= denom;
    syy /= denom;
    sxy /= denom;

    let trace = sxx + syy;
    let spread = ((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy).sqrt();
    let lambda_major = (trace + spread) / 2.0;
    let lambda_minor = ((trace - spread) / 2.0).max(0.0);
    if lambda_major <= 0.0 {
        return Err(AnalysisError::DegenerateCluster);
    }

    let q = chi_square_quantile_2dof(level);
    let mut angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    // canonical range (-pi/2, pi/2]
    if angle <= -std::f64::consts::FRAC_PI_2 {
        angle += std::f64::consts::PI;
    } else if angle > std::f64::consts::FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }

    Ok(Ellipse {
        center,
        semi_axes: [(lambda_major * q).sqrt(), (lambda_minor * q).sqrt()],
        angle,
    })
}
