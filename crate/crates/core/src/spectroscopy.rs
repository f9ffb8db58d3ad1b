//! Rigid-rotor working states and phase matching of the three beams.
//!
//! The cyclic system uses |1⟩ = |g⟩|0_00⟩, |2⟩ = |e⟩|1_11⟩ and |3⟩ built on
//! |e⟩|1_10,±1⟩, so only the J = 1 rigid-rotor energies are needed:
//! E(1_01) = B + C, E(1_11) = A + C, E(1_10) = A + B (ground level at 0).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::hz;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// |Δk| quoted for 1,2-propanediol, in rad/m.
pub const REFERENCE_PHASE_MISMATCH: f64 = std::f64::consts::TAU * 4.277;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectroscopyError {
    #[error("rotational constants must satisfy A >= B >= C > 0 (got A={a}, B={b}, C={c})")]
    BadOrdering { a: f64, b: f64, c: f64 },
    #[error("vibrational frequency must be finite and non-negative (got {0})")]
    BadVibration(f64),
    #[error("unsupported J=1 level K_a={ka}, K_c={kc}")]
    UnsupportedLevel { ka: u8, kc: u8 },
    #[error("beam direction {name} is not a unit vector (norm {norm})")]
    NotUnit { name: &'static str, norm: f64 },
    #[error("sample size unbounded: phase mismatch is zero")]
    Unbounded,
    #[error("margin must lie in (0, 1] (got {0})")]
    BadMargin(f64),
    #[error("phase mismatch must be finite and non-negative (got {0})")]
    BadMismatch(f64),
}

/// Rotational constants and vibrational frequency, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub omega_vib: f64,
}

impl RotorSpec {
    pub fn new(a: f64, b: f64, c: f64, omega_vib: f64) -> Result<Self, SpectroscopyError> {
        RotorSpec { a, b, c, omega_vib }.validate()
    }

    /// 1,2-propanediol: A, B, C = 2π·(8524.405, 3635.492, 2788.699) MHz,
    /// OH-stretch ω_vib = 2π·100.950 THz.
    pub fn propanediol() -> Self {
        RotorSpec { a: hz(8524.405e6), b: hz(3635.492e6), c: hz(2788.699e6), omega_vib: hz(100.950e12) }
    }

    pub fn validate(self) -> Result<Self, SpectroscopyError> {
        let RotorSpec { a, b, c, omega_vib } = self;
        let ordered = a.is_finite() && a >= b && b >= c && c > 0.0;
        if !ordered {
            return Err(SpectroscopyError::BadOrdering { a, b, c });
        }
        if !(omega_vib.is_finite() && omega_vib >= 0.0) {
            return Err(SpectroscopyError::BadVibration(omega_vib));
        }
        Ok(self)
    }

    /// Energy of the J = 1 level J_{K_a K_c}, M-independent.
    pub fn j1_level_energy(&self, ka: u8, kc: u8) -> Result<f64, SpectroscopyError> {
        match (ka, kc) {
            (0, 1) => Ok(self.b + self.c),
            (1, 1) => Ok(self.a + self.c),
            (1, 0) => Ok(self.a + self.b),
            _ => Err(SpectroscopyError::UnsupportedLevel { ka, kc }),
        }
    }

    pub fn transition_frequencies(&self) -> TransitionFrequencies {
        let omega21 = self.omega_vib + self.a + self.c;
        let omega31 = self.omega_vib + self.a + self.b;
        TransitionFrequencies {
            omega21,
            omega31,
            // B − C directly; omega31 − omega21 loses ~4 digits at THz scale
            omega32: self.b - self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionFrequencies {
    pub omega21: f64,
    pub omega31: f64,
    pub omega32: f64,
}

/// Propagation directions of the 1↔3 beam, the cavity mode and the 2↔3 beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamGeometry {
    pub k31: [f64; 3],
    pub ka: [f64; 3],
    pub k32: [f64; 3],
}

impl BeamGeometry {
    /// k31 ∥ ka along x, k32 along y.
    pub fn perpendicular() -> Self {
        BeamGeometry { k31: [1.0, 0.0, 0.0], ka: [1.0, 0.0, 0.0], k32: [0.0, 1.0, 0.0] }
    }

    /// All three beams co-propagating along x.
    pub fn collinear() -> Self {
        BeamGeometry { k31: [1.0, 0.0, 0.0], ka: [1.0, 0.0, 0.0], k32: [1.0, 0.0, 0.0] }
    }

    pub fn validate(&self) -> Result<(), SpectroscopyError> {
        for (name, v) in [("k31", self.k31), ("ka", self.ka), ("k32", self.k32)] {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= 1e-9) {
                return Err(SpectroscopyError::NotUnit { name, norm });
            }
        }
        Ok(())
    }
}

/// Detunings that fix the laboratory field frequencies:
/// ν31 = ω31 − Δ31 and ν_d = ω21 − Δ21; ν32 = ν31 − ν_d closes the loop.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldDetunings {
    pub delta_21: f64,
    pub delta_31: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldFrequencies {
    pub nu31: f64,
    pub nu_d: f64,
    pub nu32: f64,
}

impl FieldDetunings {
    pub fn field_frequencies(&self, tf: &TransitionFrequencies) -> FieldFrequencies {
        // ν32 = ω32 + Δ21 − Δ31 written without the THz-scale subtraction
        FieldFrequencies {
            nu31: tf.omega31 - self.delta_31,
            nu_d: tf.omega21 - self.delta_21,
            nu32: tf.omega32 + self.delta_21 - self.delta_31,
        }
    }
}

/// |Δk| = |k31 − ka − k32| in rad/m, with the cavity wavevector taken at
/// the drive frequency.
pub fn phase_mismatch(
    tf: &TransitionFrequencies,
    geometry: &BeamGeometry,
    detunings: FieldDetunings,
) -> Result<f64, SpectroscopyError> {
    geometry.validate()?;
    let f = detunings.field_frequencies(tf);
    let k32 = f.nu32 / SPEED_OF_LIGHT;
    let dk: [f64; 3] = if geometry.k31 == geometry.ka {
        // |k31| − |ka| = ν32/c by the three-photon condition; forming it from
        // ν32 avoids cancelling two ~2e6 rad/m numbers
        std::array::from_fn(|i| k32 * (geometry.k31[i] - geometry.k32[i]))
    } else {
        let (k31, ka) = (f.nu31 / SPEED_OF_LIGHT, f.nu_d / SPEED_OF_LIGHT);
        std::array::from_fn(|i| k31 * geometry.k31[i] - ka * geometry.ka[i] - k32 * geometry.k32[i])
    };
    Ok(dk.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Largest sample size l = margin·2π/|Δk| for which |Δk|·l stays below margin·2π.
pub fn max_sample_size(dk: f64, margin: f64) -> Result<f64, SpectroscopyError> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(SpectroscopyError::BadMargin(margin));
    }
    if !(dk.is_finite() && dk >= 0.0) {
        return Err(SpectroscopyError::BadMismatch(dk));
    }
    if dk == 0.0 {
        return Err(SpectroscopyError::Unbounded);
    }
    Ok(margin * std::f64::consts::TAU / dk)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
        // Rodrigues
        let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
        let cross = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
        std::array::from_fn(|i| v[i] * c + cross[i] * s + k[i] * dot * (1.0 - c))
    }

    proptest! {
        #[test]
        fn closure_of_the_triangle(
            a in 1e9f64..1e11, fb in 0.01f64..1.0, fc in 0.01f64..1.0, vib in 0.0f64..1e15
        ) {
            let b = a * fb;
            let c = b * fc;
            let tf = RotorSpec::new(a, b, c, vib).unwrap().transition_frequencies();
            prop_assert_eq!(tf.omega32, b - c);
            prop_assert!(((tf.omega31 - tf.omega21) - tf.omega32).abs() <= 1e-15 * tf.omega31.max(1.0) * 4.0);
            prop_assert!(tf.omega21 > 0.0 && tf.omega31 > 0.0);
        }

        #[test]
        fn mismatch_is_rotation_invariant(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0, angle in 0.0f64..6.3,
            theta in 0.0f64..3.1
        ) {
            let tf = RotorSpec::propanediol().transition_frequencies();
            let g = BeamGeometry {
                k31: [1.0, 0.0, 0.0],
                ka: [theta.cos(), theta.sin(), 0.0],
                k32: [0.0, 0.0, 1.0],
            };
            let axis = [ax, ay, az];
            let r = BeamGeometry {
                k31: rotate(g.k31, axis, angle),
                ka: rotate(g.ka, axis, angle),
                k32: rotate(g.k32, axis, angle),
            };
            let d0 = phase_mismatch(&tf, &g, FieldDetunings::default()).unwrap();
            let d1 = phase_mismatch(&tf, &r, FieldDetunings::default()).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-6 * d0.max(1.0));
        }

        #[test]
        fn collinear_never_exceeds_perpendicular(
            w21 in 1e12f64..1e15, w32 in 0.0f64..1e10, d21 in -1e9f64..1e9
        ) {
            let tf = TransitionFrequencies { omega21: w21, omega31: w21 + w32, omega32: w32 };
            let det = FieldDetunings { delta_21: d21, delta_31: 0.0 };
            let f = det.field_frequencies(&tf);
            prop_assume!(f.nu31 >= f.nu_d);
            let col = phase_mismatch(&tf, &BeamGeometry::collinear(), det).unwrap();
            let perp = phase_mismatch(&tf, &BeamGeometry::perpendicular(), det).unwrap();
            prop_assert!(col <= perp + 1e-12);
        }
    }
}
