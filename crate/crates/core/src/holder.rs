//! Hölder parametrizations of finite spaces by subsets of the line.

use serde::Serialize;
use thiserror::Error;

use crate::chain::{check_exponent, check_sequence, prefix_energies, ChainError};
use crate::metric::Metric;

/// Slack allowed when re-verifying the constant of a constructed parametrization.
pub const VERIFY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolderError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("points {i} and {j} share an anchor but have different images")]
    InfiniteConstant { i: usize, j: usize },
    #[error("{anchors} anchors but {images} images")]
    LengthMismatch { anchors: usize, images: usize },
    #[error("image index {index} is outside the target space")]
    ImageOutOfRange { index: usize },
    #[error("exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("constructed map has constant {constant} at pair ({i}, {j})")]
    VerificationFailure { constant: f64, i: usize, j: usize },
}

/// Anchors on `[0, ell]` mapped onto points of a space with a certified
/// Hölder constant at exponent `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderParametrization {
    pub anchors: Vec<f64>,
    pub images: Vec<usize>,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub constant: f64,
    pub ell: f64,
}

impl HolderParametrization {
    /// Image points sorted by anchor. Under a (1/s)-1-Hölder map this order
    /// has chain energy at most `ell`.
    pub fn induced_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.anchors.len()).collect();
        idx.sort_by(|&a, &b| self.anchors[a].total_cmp(&self.anchors[b]).then(a.cmp(&b)));
        idx.into_iter().map(|i| self.images[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderCheck {
    pub worst_constant: f64,
    /// Pair of anchor positions attaining the worst ratio, if there are two.
    pub witness: Option<(usize, usize)>,
}

/// Anchors `a_i` = chain energy of the first `i` points of `order`, mapped to
/// those points. The map is (1/s)-1-Hölder with total length `ell` equal to
/// the energy of the whole order.
pub fn build_parametrization<M: Metric + ?Sized>(
    space: &M,
    order: &[usize],
    s: f64,
) -> Result<HolderParametrization, HolderError> {
    check_sequence(order, space.len())?;
    check_exponent(s)?;
    let anchors = prefix_energies(space, order, s);
    let ell = *anchors.last().expect("nonempty");
    let alpha = 1.0 / s;
    let check = verify_holder(&anchors, space, order, alpha)?;
    if check.worst_constant > 1.0 + VERIFY_SLACK {
        let (i, j) = check.witness.unwrap_or((0, 0));
        return Err(HolderError::VerificationFailure { constant: check.worst_constant, i, j });
    }
    Ok(HolderParametrization { anchors, images: order.to_vec(), alpha, constant: 1.0, ell })
}

/// Worst ratio `d(f(a_i), f(a_j)) / |a_i - a_j|^alpha` over all pairs.
///
/// Equal anchors are allowed only with equal images.
pub fn verify_holder<M: Metric + ?Sized>(
    anchors: &[f64],
    target: &M,
    images: &[usize],
    alpha: f64,
) -> Result<HolderCheck, HolderError> {
    if anchors.len() != images.len() {
        return Err(HolderError::LengthMismatch { anchors: anchors.len(), images: images.len() });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(HolderError::InvalidExponent(alpha));
    }
    if let Some(&index) = images.iter().find(|&&i| i >= target.len()) {
        return Err(HolderError::ImageOutOfRange { index });
    }
    let mut worst = HolderCheck { worst_constant: 0.0, witness: None };
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let d = if images[i] == images[j] { 0.0 } else { target.dist(images[i], images[j]) };
            let gap = (anchors[i] - anchors[j]).abs();
            if gap == 0.0 {
                if d > 0.0 {
                    return Err(HolderError::InfiniteConstant { i, j });
                }
                continue;
            }
            let ratio = d / gap.powf(alpha);
            if worst.witness.is_none() || ratio > worst.worst_constant {
                worst = HolderCheck { worst_constant: ratio, witness: Some((i, j)) };
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::z_dp;
    use crate::metric::PointCloud;

    #[test]
    fn two_points_equality_case() {
        let p = PointCloud::line(vec![0.0, 0.4]).unwrap();
        let h = build_parametrization(&p, &[0, 1], 1.7).unwrap();
        assert_eq!(h.anchors[0], 0.0);
        assert!((h.anchors[1] - 0.4f64.powf(1.7)).abs() < 1e-15);
        assert!((h.anchors[1].powf(1.0 / 1.7) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn cantor_level_one_anchors() {
        let s = 2f64.ln() / 3f64.ln();
        let p = PointCloud::line(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        let h = build_parametrization(&p, &[0, 1, 2, 3], s).unwrap();
        for (a, e) in h.anchors.iter().zip([0.0, 0.5, 1.0, 1.5]) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
        assert!((0.5f64.powf(3f64.ln() / 2f64.ln()) - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.ell - z_dp(&p, &[0, 1, 2, 3], s).unwrap()).abs() == 0.0);
        assert_eq!(h.induced_order(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn verify_identity_and_constant_maps() {
        let p = PointCloud::line(vec![0.0, 0.3, 1.0]).unwrap();
        let anchors = [0.0, 0.3, 1.0];
        let c = verify_holder(&anchors, &p, &[0, 1, 2], 1.0).unwrap();
        assert!((c.worst_constant - 1.0).abs() < 1e-15);
        let c = verify_holder(&anchors, &p, &[1, 1, 1], 1.0).unwrap();
        assert_eq!(c.worst_constant, 0.0);
    }

    #[test]
    fn coinciding_anchors() {
        let p = PointCloud::line(vec![0.0, 1.0]).unwrap();
        assert_eq!(
            verify_holder(&[0.0, 0.0], &p, &[0, 1], 1.0),
            Err(HolderError::InfiniteConstant { i: 0, j: 1 })
        );
        assert!(verify_holder(&[0.0, 0.0], &p, &[1, 1], 1.0).is_ok());
        assert!(matches!(
            verify_holder(&[0.0], &p, &[0, 1], 1.0),
            Err(HolderError::LengthMismatch { .. })
        ));
    }
}
