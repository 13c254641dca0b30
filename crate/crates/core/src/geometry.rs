//! Port geometry of a two-dimensional fluid-antenna surface and the spatial
//! correlation kernels evaluated on it.
//!
//! Ports sit on a uniform `n1 x n2` grid spanning an aperture of `w1 x w2`
//! wavelengths. All indices in this crate are zero-based: a port has
//! coordinates `(k1, k2)` with `k1 < n1`, `k2 < n2`, and linear index
//! `k2 * n1 + k1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FasError, Result};
use crate::special::{bessel_j0, spherical_j0};

/// Port grid and aperture of one side of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeometry {
    pub n1: usize,
    pub n2: usize,
    /// Aperture along dimension 1, in wavelengths.
    pub w1: f64,
    /// Aperture along dimension 2, in wavelengths.
    pub w2: f64,
}

/// Grid coordinates of a port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortCoords {
    pub k1: usize,
    pub k2: usize,
}

impl PortCoords {
    pub fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }
}

impl SurfaceGeometry {
    pub fn new(n1: usize, n2: usize, w1: f64, w2: f64) -> Result<Self> {
        let g = Self { n1, n2, w1, w2 };
        g.validate()?;
        Ok(g)
    }

    /// Square `n x n` grid over a `w x w` aperture.
    pub fn square(n: usize, w: f64) -> Result<Self> {
        Self::new(n, n, w, w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(FasError::domain(format!(
                "port grid must be at least 1x1, got {}x{}",
                self.n1, self.n2
            )));
        }
        if !(self.w1.is_finite() && self.w2.is_finite()) || self.w1 < 0.0 || self.w2 < 0.0 {
            return Err(FasError::domain(format!(
                "aperture must be finite and nonnegative, got {} x {}",
                self.w1, self.w2
            )));
        }
        Ok(())
    }

    pub fn port_count(&self) -> usize {
        self.n1 * self.n2
    }

    /// Spacing between neighbouring ports along each dimension; 0 when that
    /// dimension holds a single port.
    pub fn spacing(&self) -> (f64, f64) {
        let step = |n: usize, w: f64| if n > 1 { w / (n - 1) as f64 } else { 0.0 };
        (step(self.n1, self.w1), step(self.n2, self.w2))
    }

    fn check(&self, c: PortCoords) -> Result<()> {
        if c.k1 >= self.n1 || c.k2 >= self.n2 {
            return Err(FasError::domain(format!(
                "port ({}, {}) outside {}x{} grid",
                c.k1, c.k2, self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// Linear index of a port.
    pub fn map_index(&self, c: PortCoords) -> Result<usize> {
        self.check(c)?;
        Ok(c.k2 * self.n1 + c.k1)
    }

    /// Inverse of [`map_index`](Self::map_index).
    pub fn unmap_index(&self, linear: usize) -> Result<PortCoords> {
        if linear >= self.port_count() {
            return Err(FasError::domain(format!(
                "port index {linear} outside 0..{}",
                self.port_count()
            )));
        }
        Ok(PortCoords::new(linear % self.n1, linear / self.n1))
    }

    /// Position of a port in wavelengths. The surface lies in the y-z plane:
    /// dimension 2 runs along y and dimension 1 along z.
    pub fn port_position(&self, c: PortCoords) -> Result<[f64; 3]> {
        self.check(c)?;
        let (d1, d2) = self.spacing();
        Ok([0.0, c.k2 as f64 * d2, c.k1 as f64 * d1])
    }

    /// Position of the port with the given linear index.
    pub fn position(&self, linear: usize) -> Result<[f64; 3]> {
        self.port_position(self.unmap_index(linear)?)
    }

    /// Positions of every port in linear-index order.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let (d1, d2) = self.spacing();
        (0..self.port_count())
            .map(|l| {
                let (k1, k2) = (l % self.n1, l / self.n1);
                [0.0, k2 as f64 * d2, k1 as f64 * d1]
            })
            .collect()
    }

    /// Euclidean distance between two ports, in wavelengths.
    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        Ok(distance(&self.position(a)?, &self.position(b)?))
    }
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Spatial correlation between two port positions (in wavelengths).
///
/// Implementations must be symmetric in their arguments and return 1 for
/// coincident positions.
pub trait CorrelationKernel: Send + Sync {
    fn correlation(&self, a: &[f64; 3], b: &[f64; 3]) -> f64;

    fn name(&self) -> &str;
}

/// Rich isotropic scattering in 3D: `j0(2 pi d)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IsotropicKernel3d;

/// Isotropic scattering in the plane: `J0(2 pi d)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IsotropicKernel2d;

impl CorrelationKernel for IsotropicKernel3d {
    fn correlation(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        spherical_j0(2.0 * std::f64::consts::PI * distance(a, b))
    }

    fn name(&self) -> &str {
        "j0-3d"
    }
}

impl CorrelationKernel for IsotropicKernel2d {
    fn correlation(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        bessel_j0(2.0 * std::f64::consts::PI * distance(a, b))
    }

    fn name(&self) -> &str {
        "J0-2d"
    }
}

/// Serializable identifier of a shipped kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelId {
    #[default]
    Isotropic3d,
    Isotropic2d,
}

impl KernelId {
    pub fn kernel(self) -> Arc<dyn CorrelationKernel> {
        match self {
            KernelId::Isotropic3d => Arc::new(IsotropicKernel3d),
            KernelId::Isotropic2d => Arc::new(IsotropicKernel2d),
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelId::Isotropic3d => f.write_str("isotropic3d"),
            KernelId::Isotropic2d => f.write_str("isotropic2d"),
        }
    }
}

/// Correlation between two ports of `geom` under `kernel`.
pub fn correlation_entry(
    geom: &SurfaceGeometry,
    a: PortCoords,
    b: PortCoords,
    kernel: &dyn CorrelationKernel,
) -> Result<f64> {
    let pa = geom.port_position(a)?;
    let pb = geom.port_position(b)?;
    Ok(kernel.correlation(&pa, &pb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(n1: usize, n2: usize, w1: f64, w2: f64) -> SurfaceGeometry {
        SurfaceGeometry::new(n1, n2, w1, w2).unwrap()
    }

    #[test]
    fn port_positions() {
        let geom = g(2, 2, 1.0, 1.0);
        assert_eq!(
            geom.port_position(PortCoords::new(0, 0)).unwrap(),
            [0.0, 0.0, 0.0]
        );
        assert_eq!(
            geom.port_position(PortCoords::new(1, 1)).unwrap(),
            [0.0, 1.0, 1.0]
        );
        // a single port along dimension 1 contributes no offset
        let line = g(1, 5, 0.0, 2.0);
        assert_eq!(
            line.port_position(PortCoords::new(0, 2)).unwrap(),
            [0.0, 1.0, 0.0]
        );
        assert!(matches!(
            geom.port_position(PortCoords::new(2, 0)),
            Err(FasError::Domain(_))
        ));
    }

    #[test]
    fn index_mapping() {
        let geom = g(3, 4, 1.0, 1.0);
        assert_eq!(geom.map_index(PortCoords::new(0, 0)).unwrap(), 0);
        assert_eq!(geom.map_index(PortCoords::new(2, 3)).unwrap(), 11);
        assert_eq!(geom.map_index(PortCoords::new(1, 2)).unwrap(), 7);
        for l in 0..12 {
            assert_eq!(geom.map_index(geom.unmap_index(l).unwrap()).unwrap(), l);
        }
        assert!(geom.unmap_index(12).is_err());
        assert!(geom.map_index(PortCoords::new(3, 0)).is_err());
    }

    #[test]
    fn invalid_geometry() {
        assert!(SurfaceGeometry::new(0, 3, 1.0, 1.0).is_err());
        assert!(SurfaceGeometry::new(3, 3, -1.0, 1.0).is_err());
        assert!(SurfaceGeometry::new(3, 3, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn kernel_entries() {
        let k3 = IsotropicKernel3d;
        let geom = g(10, 10, 1.0, 1.0);
        let a = PortCoords::new(4, 4);
        assert_eq!(correlation_entry(&geom, a, a, &k3).unwrap(), 1.0);
        let adjacent = correlation_entry(&geom, a, PortCoords::new(5, 4), &k3).unwrap();
        assert_abs_diff_eq!(adjacent, 0.9207, epsilon = 1e-4);

        let half = g(1, 2, 0.0, 0.5);
        let zero =
            correlation_entry(&half, PortCoords::new(0, 0), PortCoords::new(0, 1), &k3).unwrap();
        assert_abs_diff_eq!(zero, 0.0, epsilon = 1e-15);

        let k2 = IsotropicKernel2d;
        let c = correlation_entry(&geom, a, PortCoords::new(0, 9), &k2).unwrap();
        let c_rev = correlation_entry(&geom, PortCoords::new(0, 9), a, &k2).unwrap();
        assert_eq!(c, c_rev);
        assert!(c.abs() <= 1.0);
    }
}
