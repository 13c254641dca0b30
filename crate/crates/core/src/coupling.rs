//! Mutual-coupling distortion of the port channel.
//!
//! Two surface technologies are modelled. With a liquid antenna only the
//! active ports radiate, so coupling is an `n x n` matrix over the selected
//! ports, applied after selection. With switchable pixels every port couples
//! regardless of its state, so coupling is an `N x N` matrix applied to the
//! full channel before selection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FasError, Result};
use crate::geometry::SurfaceGeometry;
use crate::linalg::{inverse, CMatrix};
use crate::selection::SelectionResult;
use crate::special::sine_cosine_integrals;

/// Free-space wave impedance in ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.73;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DipoleSpec {
    /// Dipole length in wavelengths.
    pub length: f64,
    /// Dipole width in wavelengths.
    pub width: f64,
    pub antenna_impedance: Complex64,
    pub load_impedance: Complex64,
}

impl Default for DipoleSpec {
    fn default() -> Self {
        let za = Complex64::new(73.08, 42.21);
        Self {
            length: 0.5,
            width: 0.001,
            antenna_impedance: za,
            load_impedance: za.conj(),
        }
    }
}

/// Mutual impedance of two parallel side-by-side half-wave dipoles whose
/// centres are `d` wavelengths apart (induced EMF method). `d = 0` returns
/// the self impedance.
pub fn dipole_mutual_impedance(d: f64, spec: &DipoleSpec) -> Result<Complex64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(FasError::domain(format!(
            "dipole spacing must be finite and nonnegative, got {d}"
        )));
    }
    if (spec.length - 0.5).abs() > 1e-12 {
        return Err(FasError::domain(format!(
            "closed-form mutual impedance needs half-wave dipoles, got length {}",
            spec.length
        )));
    }
    if d == 0.0 {
        return Ok(spec.antenna_impedance);
    }
    let pi = std::f64::consts::PI;
    let root = (4.0 * d * d + 1.0).sqrt();
    let u0 = 2.0 * pi * d;
    let u1 = pi * (root + 1.0);
    // root - 1 rewritten to avoid cancellation at small d
    let u2 = pi * 4.0 * d * d / (root + 1.0);
    let (s0, c0) = sine_cosine_integrals(u0);
    let (s1, c1) = sine_cosine_integrals(u1);
    let (s2, c2) = sine_cosine_integrals(u2);
    let k = FREE_SPACE_IMPEDANCE / (4.0 * pi);
    Ok(Complex64::new(
        k * (2.0 * c0 - c1 - c2),
        -k * (2.0 * s0 - s1 - s2),
    ))
}

/// Impedance matrix of dipoles placed at the given ports.
pub fn impedance_matrix(
    geom: &SurfaceGeometry,
    ports: &[usize],
    spec: &DipoleSpec,
) -> Result<CMatrix> {
    let pos = ports
        .iter()
        .map(|&p| geom.position(p))
        .collect::<Result<Vec<_>>>()?;
    let n = ports.len();
    let mut z = CMatrix::from_element(n, n, spec.antenna_impedance);
    for i in 0..n {
        for j in 0..i {
            let d = crate::geometry::distance(&pos[i], &pos[j]);
            let v = if d == 0.0 {
                // coincident distinct ports: treat as fully coupled
                spec.antenna_impedance
            } else {
                dipole_mutual_impedance(d, spec)?
            };
            z[(i, j)] = v;
            z[(j, i)] = v;
        }
    }
    Ok(z)
}

/// `(Z_A + Z_L) (Z + Z_L I)^-1`.
pub fn coupling_from_impedance(z: &CMatrix, spec: &DipoleSpec) -> Result<CMatrix> {
    let n = z.nrows();
    let shifted = z + CMatrix::identity(n, n) * spec.load_impedance;
    let inv = inverse(&shifted)
        .ok_or_else(|| FasError::NumericalRank("loaded impedance matrix is singular".into()))?;
    Ok(inv * (spec.antenna_impedance + spec.load_impedance))
}

/// Left (receive) and right (transmit) coupling matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub rx: CMatrix,
    pub tx: CMatrix,
}

/// Coupling among the active ports of a liquid antenna surface.
pub fn liquid_coupling(
    sel: &SelectionResult,
    geom_rx: &SurfaceGeometry,
    geom_tx: &SurfaceGeometry,
    spec: &DipoleSpec,
) -> Result<CouplingMatrices> {
    let rx = coupling_from_impedance(&impedance_matrix(geom_rx, &sel.rx_ports, spec)?, spec)?;
    let tx = coupling_from_impedance(&impedance_matrix(geom_tx, &sel.tx_ports, spec)?, spec)?;
    Ok(CouplingMatrices { rx, tx })
}

/// Target return loss and isolation of a pixel surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SMatrixModel {
    /// Largest reflection magnitude after scaling, in dB (negative).
    pub return_loss_db: f64,
    /// Port-to-port isolation in dB (positive).
    pub isolation_db: f64,
    pub reference_impedance: f64,
}

impl Default for SMatrixModel {
    fn default() -> Self {
        Self {
            return_loss_db: -15.0,
            isolation_db: 30.0,
            reference_impedance: 50.0,
        }
    }
}

/// Scaled S-matrix of a pixel surface and the scale factors applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSMatrix {
    pub s: CMatrix,
    pub return_loss_scale: f64,
    pub isolation_scale: f64,
}

/// `(Z - z0 I)(Z + z0 I)^-1`.
pub fn z_to_s(z: &CMatrix, z0: f64) -> Result<CMatrix> {
    let n = z.nrows();
    let eye = CMatrix::identity(n, n) * Complex64::new(z0, 0.0);
    let inv = inverse(&(z + &eye)).ok_or_else(|| FasError::domain("Z + z0 I is singular"))?;
    Ok((z - eye) * inv)
}

/// `z0 (I + S)(I - S)^-1`.
pub fn s_to_z(s: &CMatrix, z0: f64) -> Result<CMatrix> {
    if !s.is_square() {
        return Err(FasError::domain("S-matrix must be square"));
    }
    let n = s.nrows();
    let eye = CMatrix::identity(n, n);
    let inv = inverse(&(&eye - s)).ok_or_else(|| FasError::domain("I - S is singular"))?;
    Ok((eye + s) * inv * Complex64::new(z0, 0.0))
}

/// Baseline S-matrix of dipoles at every port, with the diagonal scaled so
/// its largest magnitude meets the return loss target and the off-diagonal
/// scaled so its largest magnitude meets the isolation target.
pub fn pixel_s_matrix(
    geom: &SurfaceGeometry,
    model: &SMatrixModel,
    spec: &DipoleSpec,
) -> Result<PixelSMatrix> {
    let ports: Vec<usize> = (0..geom.port_count()).collect();
    let z = impedance_matrix(geom, &ports, spec)?;
    let base = z_to_s(&z, model.reference_impedance)?;
    let n = base.nrows();
    let max_diag = (0..n).map(|i| base[(i, i)].norm()).fold(0.0, f64::max);
    let max_off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| base[(i, j)].norm())
        .fold(0.0, f64::max);
    let scale = |target_db: f64, max: f64| {
        if max > 0.0 {
            10f64.powf(target_db / 20.0) / max
        } else {
            1.0
        }
    };
    let alpha_rl = scale(model.return_loss_db, max_diag);
    let alpha_iso = scale(-model.isolation_db, max_off);
    let s = CMatrix::from_fn(n, n, |i, j| {
        base[(i, j)] * if i == j { alpha_rl } else { alpha_iso }
    });
    Ok(PixelSMatrix {
        s,
        return_loss_scale: alpha_rl,
        isolation_scale: alpha_iso,
    })
}

/// `N x N` coupling matrix of a pixel surface.
pub fn pixel_coupling_side(
    geom: &SurfaceGeometry,
    model: &SMatrixModel,
    spec: &DipoleSpec,
) -> Result<CMatrix> {
    let s = pixel_s_matrix(geom, model, spec)?;
    coupling_from_impedance(&s_to_z(&s.s, model.reference_impedance)?, spec)
}

pub fn pixel_coupling(
    geom_rx: &SurfaceGeometry,
    geom_tx: &SurfaceGeometry,
    model: &SMatrixModel,
    spec: &DipoleSpec,
) -> Result<CouplingMatrices> {
    Ok(CouplingMatrices {
        rx: pixel_coupling_side(geom_rx, model, spec)?,
        tx: pixel_coupling_side(geom_tx, model, spec)?,
    })
}

fn apply(h: &CMatrix, m: &CouplingMatrices) -> Result<CMatrix> {
    if m.rx.shape() != (h.nrows(), h.nrows()) || m.tx.shape() != (h.ncols(), h.ncols()) {
        return Err(FasError::domain(format!(
            "coupling matrices {:?}/{:?} do not match a {}x{} channel",
            m.rx.shape(),
            m.tx.shape(),
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(&m.rx * h * &m.tx)
}

/// Couples a selected `n_rx x n_tx` subchannel.
pub fn apply_coupling_liquid(h_sel: &CMatrix, m: &CouplingMatrices) -> Result<CMatrix> {
    apply(h_sel, m)
}

/// Couples the full `N_rx x N_tx` channel.
pub fn apply_coupling_pixel(h: &CMatrix, m: &CouplingMatrices) -> Result<CMatrix> {
    apply(h, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_gaussian_matrix, TrialSeed};
    use std::f64::consts::PI;

    /// Induced-EMF integral over the second dipole, composite Simpson.
    fn mutual_by_quadrature(d: f64) -> Complex64 {
        let (k, l) = (2.0 * PI, 0.5);
        let f = |z: f64| {
            let r1 = (d * d + (z - l / 2.0).powi(2)).sqrt();
            let r2 = (d * d + (z + l / 2.0).powi(2)).sqrt();
            let g =
                Complex64::from_polar(1.0 / r1, -k * r1) + Complex64::from_polar(1.0 / r2, -k * r2);
            g * (k * (l / 2.0 - z.abs())).sin()
        };
        let n = 20_000;
        let h = l / n as f64;
        let mut acc = f(-l / 2.0) + f(l / 2.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(-l / 2.0 + i as f64 * h) * w;
        }
        acc * (h / 3.0) * Complex64::new(0.0, FREE_SPACE_IMPEDANCE / (4.0 * PI))
    }

    #[test]
    fn mutual_impedance_matches_quadrature() {
        let spec = DipoleSpec::default();
        for d in [0.1, 0.25, 0.5, 1.0, 3.0, 10.0] {
            let z = dipole_mutual_impedance(d, &spec).unwrap();
            let q = mutual_by_quadrature(d);
            assert!(
                (z - q).norm() < 1e-6 * q.norm().max(1.0),
                "d = {d}: {z} vs {q}"
            );
        }
        let z = dipole_mutual_impedance(0.5, &spec).unwrap();
        assert!((z.re + 12.52).abs() < 0.01);
    }

    #[test]
    fn mutual_impedance_limits() {
        let spec = DipoleSpec::default();
        assert_eq!(
            dipole_mutual_impedance(0.0, &spec).unwrap(),
            Complex64::new(73.08, 42.21)
        );
        assert!(dipole_mutual_impedance(50.0, &spec).unwrap().norm() <= 1.0);
        assert!(dipole_mutual_impedance(-0.1, &spec).is_err());
        let full_wave = DipoleSpec {
            length: 1.0,
            ..spec
        };
        assert!(dipole_mutual_impedance(1.0, &full_wave).is_err());
    }

    #[test]
    fn single_port_coupling_is_one() {
        let g = SurfaceGeometry::square(3, 1.0).unwrap();
        let sel = SelectionResult::new(vec![4], vec![2], 9, 9).unwrap();
        let m = liquid_coupling(&sel, &g, &g, &DipoleSpec::default()).unwrap();
        assert!((m.rx[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((m.tx[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn far_ports_decouple_and_near_ports_couple() {
        let far = SurfaceGeometry::square(2, 50.0).unwrap();
        let sel = SelectionResult::full(4, 4);
        let m = liquid_coupling(&sel, &far, &far, &DipoleSpec::default()).unwrap();
        let eye = CMatrix::identity(4, 4);
        assert!((&m.rx - &eye).iter().all(|z| z.norm() <= 1e-2));

        let near = SurfaceGeometry::new(1, 2, 0.0, 0.1).unwrap();
        let sel = SelectionResult::full(2, 2);
        let m = liquid_coupling(&sel, &near, &near, &DipoleSpec::default()).unwrap();
        assert!(m.rx[(0, 1)].norm() > 0.05);
        assert_eq!(m.rx[(0, 1)], m.rx[(1, 0)]);
    }

    #[test]
    fn s_and_z_conversions() {
        let z0 = 50.0;
        let zero = CMatrix::zeros(3, 3);
        let z = s_to_z(&zero, z0).unwrap();
        assert!((z - CMatrix::identity(3, 3) * Complex64::new(z0, 0.0)).norm() < 1e-12);
        let half = CMatrix::from_element(1, 1, Complex64::new(0.5, 0.0));
        assert!((s_to_z(&half, z0).unwrap()[(0, 0)].re - 150.0).abs() < 1e-12);
        assert!(s_to_z(&CMatrix::identity(2, 2), z0).is_err());

        let s = draw_gaussian_matrix(TrialSeed::new(3, 0), 4, 4) * Complex64::new(0.1, 0.0);
        let back = z_to_s(&s_to_z(&s, z0).unwrap(), z0).unwrap();
        assert!((back - &s).norm() < 1e-10);
        let matched = CMatrix::identity(3, 3) * Complex64::new(z0, 0.0);
        assert!(z_to_s(&matched, z0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn pixel_levels_are_capped() {
        let g = SurfaceGeometry::new(3, 4, 1.0, 1.0).unwrap();
        let p = pixel_s_matrix(&g, &SMatrixModel::default(), &DipoleSpec::default()).unwrap();
        let n = p.s.nrows();
        let rl = 10f64.powf(-15.0 / 20.0);
        let iso = 10f64.powf(-30.0 / 20.0);
        for i in 0..n {
            for j in 0..n {
                let cap = if i == j { rl } else { iso };
                assert!(p.s[(i, j)].norm() <= cap * (1.0 + 1e-12));
            }
        }
        let side =
            pixel_coupling_side(&g, &SMatrixModel::default(), &DipoleSpec::default()).unwrap();
        assert_eq!(side.shape(), (12, 12));
    }

    #[test]
    fn applying_coupling() {
        let h = draw_gaussian_matrix(TrialSeed::new(9, 9), 2, 3);
        let id = CouplingMatrices {
            rx: CMatrix::identity(2, 2),
            tx: CMatrix::identity(3, 3),
        };
        assert_eq!(apply_coupling_liquid(&h, &id).unwrap(), h);
        let c = Complex64::new(0.5, 0.0);
        let scaled = CouplingMatrices {
            rx: CMatrix::identity(2, 2) * c,
            tx: CMatrix::identity(3, 3) * c,
        };
        let out = apply_coupling_pixel(&h, &scaled).unwrap();
        assert!((out - &h * Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(apply_coupling_pixel(&h.transpose(), &id).is_err());
    }
}
