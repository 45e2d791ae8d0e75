//! Sphere-to-plane projection math and the latitude-dependent distortion
//! map that conditions every deformable component.
//!
//! Angles are radians end to end. Only the equirectangular projection is
//! implemented; the generic stretching-ratio formula accepts an arbitrary
//! Jacobian determinant but no other projection is wired up.

use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

/// A point on the unit sphere: longitude `theta` in (-pi, pi), latitude
/// `phi` in (-pi/2, pi/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalCoord {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta > -std::f64::consts::PI && theta < std::f64::consts::PI) {
            return Err(Error::domain(format!("theta {theta} outside (-pi, pi)")));
        }
        if !(phi > -std::f64::consts::FRAC_PI_2 && phi < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!("phi {phi} outside (-pi/2, pi/2)")));
        }
        Ok(SphericalCoord { theta, phi })
    }
}

/// A point on the projection plane. Under ERP both coordinates are radians
/// with x in (-pi, pi) and y in (-pi/2, pi/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCoord {
    pub x: f64,
    pub y: f64,
}

/// Equirectangular projection: (x, y) = (theta, phi).
pub fn erp_project(p: SphericalCoord) -> PlaneCoord {
    PlaneCoord { x: p.theta, y: p.phi }
}

/// Inverse of [`erp_project`] on the open ERP domain.
pub fn erp_unproject(p: PlaneCoord) -> Result<SphericalCoord> {
    SphericalCoord::new(p.x, p.y)
}

/// Spherical-to-planar area ratio cos(phi) / |J|. For ERP (|J| = 1) this
/// reduces to cos(y).
pub fn jacobian_stretch(phi: f64, jac_abs: f64) -> Result<f64> {
    if !(jac_abs > 0.0) {
        return Err(Error::domain(format!("jacobian magnitude {jac_abs} must be > 0")));
    }
    if !(phi > -std::f64::consts::FRAC_PI_2 && phi < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!("phi {phi} outside (-pi/2, pi/2)")));
    }
    Ok(phi.cos() / jac_abs)
}

/// Patch placement inside a full ERP image: the global row of the patch
/// top plus the full image height, both in the resolution of the tensor
/// the geometry describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErpGeometry {
    pub row_offset: usize,
    pub full_height: usize,
}

impl ErpGeometry {
    pub fn full(height: usize) -> Self {
        ErpGeometry { row_offset: 0, full_height: height }
    }
}

/// Per-row cos-latitude weights for a (possibly cropped) ERP image.
///
/// Weights are constant along each row; the struct keeps the global row
/// provenance so patch maps agree with the full-image map.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMap {
    height: usize,
    width: usize,
    row_offset: usize,
    full_height: usize,
    rows: Vec<f64>,
}

impl DistortionMap {
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn row_offset(&self) -> usize {
        self.row_offset
    }
    pub fn full_height(&self) -> usize {
        self.full_height
    }

    /// Weight at local pixel (h, w); constant in w.
    pub fn value(&self, h: usize, _w: usize) -> f64 {
        self.rows[h]
    }

    /// Per-row weights, one entry per local row.
    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    /// Materializes the H x W grid as a 1 x 1 x H x W tensor.
    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        let mut t = Tensor::zeros(&[1, 1, self.height, self.width]);
        for h in 0..self.height {
            let v = T::from_f64(self.rows[h]);
            let base = h * self.width;
            for w in 0..self.width {
                t.data_mut()[base + w] = v;
            }
        }
        t
    }
}

/// Builds the cos-latitude distortion map for `height` rows starting at
/// global row `row_offset` of a `full_height`-row ERP image:
/// `cos((h_global + 0.5 - full_height/2) * pi / full_height)`.
pub fn distortion_map(height: usize, width: usize, row_offset: usize, full_height: usize) -> Result<DistortionMap> {
    if height == 0 || width == 0 || full_height == 0 {
        return Err(Error::domain("distortion_map: extents must be >= 1".to_string()));
    }
    if height > full_height || row_offset > full_height - height {
        return Err(Error::domain(format!(
            "distortion_map: rows [{row_offset}, {}) exceed full height {full_height}",
            row_offset + height
        )));
    }
    let fh = full_height as f64;
    let rows = (0..height)
        .map(|h| {
            let hg = (row_offset + h) as f64;
            ((hg + 0.5 - fh / 2.0) * std::f64::consts::PI / fh).cos()
        })
        .collect();
    Ok(DistortionMap { height, width, row_offset, full_height, rows })
}

/// Distortion map described by an [`ErpGeometry`] for a given patch size.
pub fn distortion_map_for(geom: ErpGeometry, height: usize, width: usize) -> Result<DistortionMap> {
    distortion_map(height, width, geom.row_offset, geom.full_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct per-pixel evaluation used as the oracle for the map builder.
    fn reference_weight(h_global: usize, full_height: usize) -> f64 {
        let fh = full_height as f64;
        ((h_global as f64 + 0.5 - fh / 2.0) * std::f64::consts::PI / fh).cos()
    }

    #[test]
    fn erp_projection_is_coordinate_identity() {
        let p = SphericalCoord::new(0.3, -0.2).unwrap();
        let q = erp_project(p);
        assert_eq!((q.x, q.y), (0.3, -0.2));

        let o = erp_project(SphericalCoord::new(0.0, 0.0).unwrap());
        assert_eq!((o.x, o.y), (0.0, 0.0));
    }

    #[test]
    fn erp_roundtrip_within_1e12() {
        let p = SphericalCoord::new(1.1, 0.7).unwrap();
        let back = erp_unproject(erp_project(p)).unwrap();
        assert!((back.theta - 1.1).abs() < 1e-12);
        assert!((back.phi - 0.7).abs() < 1e-12);
    }

    #[test]
    fn erp_rejects_out_of_domain() {
        assert!(SphericalCoord::new(std::f64::consts::PI, 0.0).is_err());
        assert!(SphericalCoord::new(0.0, std::f64::consts::FRAC_PI_2).is_err());
        assert!(erp_unproject(PlaneCoord { x: 4.0, y: 0.0 }).is_err());
    }

    #[test]
    fn stretch_ratio_values() {
        assert_eq!(jacobian_stretch(0.0, 1.0).unwrap(), 1.0);
        let v = jacobian_stretch(std::f64::consts::FRAC_PI_3, 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let v = jacobian_stretch(std::f64::consts::FRAC_PI_4, 2.0).unwrap();
        assert!((v - 0.35355339059327373).abs() < 1e-9);
        assert!(jacobian_stretch(0.5, 0.0).is_err());
        assert!(jacobian_stretch(0.5, -1.0).is_err());
    }

    #[test]
    fn stretch_reduces_to_cos_for_erp() {
        for i in 1..50 {
            let phi = -1.5 + 3.0 * (i as f64) / 50.0;
            let v = jacobian_stretch(phi, 1.0).unwrap();
            assert!((v - phi.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn distortion_map_h4_matches_direct_evaluation() {
        let m = distortion_map(4, 1, 0, 4).unwrap();
        let expect = [0.3826834323650898, 0.9238795325112867, 0.9238795325112867, 0.3826834323650898];
        for (h, &e) in expect.iter().enumerate() {
            assert!((m.value(h, 0) - e).abs() < 1e-12, "row {h}");
        }
    }

    #[test]
    fn distortion_map_cropped_window() {
        let m = distortion_map(2, 1, 1, 4).unwrap();
        assert!((m.value(0, 0) - 0.9238795325112867).abs() < 1e-12);
        assert!((m.value(1, 0) - 0.9238795325112867).abs() < 1e-12);
    }

    #[test]
    fn distortion_map_rejects_overrun() {
        assert!(distortion_map(3, 1, 2, 4).is_err());
        assert!(distortion_map(0, 1, 0, 4).is_err());
        assert!(distortion_map(5, 1, 0, 4).is_err());
    }

    #[test]
    fn full_map_is_hemispherically_symmetric() {
        for &h in &[2usize, 5, 16, 33, 128] {
            let m = distortion_map(h, 3, 0, h).unwrap();
            for r in 0..h {
                assert!(
                    (m.value(r, 0) - m.value(h - 1 - r, 0)).abs() < 1e-12,
                    "height {h} row {r}"
                );
            }
        }
    }

    #[test]
    fn equator_rows_are_maximal_and_values_in_unit_interval() {
        let h = 64;
        let m = distortion_map(h, 1, 0, h).unwrap();
        let max = m.rows().iter().cloned().fold(f64::MIN, f64::max);
        assert!((m.value(h / 2, 0) - max).abs() < 1e-15);
        assert!((m.value(h / 2 - 1, 0) - max).abs() < 1e-15);
        for r in 0..h {
            let v = m.value(r, 0);
            assert!(v > 0.0 && v <= 1.0);
        }
        // Monotone non-increasing away from the equator.
        for r in 0..h / 2 - 1 {
            assert!(m.value(r, 0) <= m.value(r + 1, 0) + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn patch_rows_match_full_map(full in 2usize..512, a in 0usize..511, k in 1usize..64) {
            let a = a % full;
            let k = 1 + k % (full - a).max(1);
            prop_assume!(a + k <= full);
            let whole = distortion_map(full, 2, 0, full).unwrap();
            let patch = distortion_map(k, 2, a, full).unwrap();
            for r in 0..k {
                prop_assert!((whole.value(a + r, 0) - patch.value(r, 0)).abs() < 1e-15);
            }
        }

        #[test]
        fn map_matches_reference_everywhere(full in 1usize..300, off in 0usize..299, h in 1usize..64) {
            let off = off % full;
            let h = 1 + h % (full - off).max(1);
            prop_assume!(off + h <= full);
            let m = distortion_map(h, 1, off, full).unwrap();
            for r in 0..h {
                prop_assert!((m.value(r, 0) - reference_weight(off + r, full)).abs() < 1e-12);
            }
        }
    }
}
