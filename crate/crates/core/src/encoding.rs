//! Maps scalar inputs onto single-mode ancilla states.
//!
//! The encoding is the only nonlinear element between the input and the
//! reservoir observables, so the choice of scheme sets how nonlinear the
//! reservoir memory is.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{single_mode_state, GaussianState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme")]
pub enum EncodingScheme {
    /// `|alpha| = s + 1` (or `|alpha| = s` with `offset: false`, used for
    /// binary inputs in `{0, 1}`), `arg(alpha) = 0`.
    CoherentAmplitude {
        #[serde(default = "default_offset")]
        offset: bool,
    },
    /// `|alpha| = 1`, `arg(alpha) = 2 pi s`.
    CoherentPhase,
    /// `|alpha| = (1 - lambda)(s + 1) + lambda`, `arg(alpha) = 2 pi lambda s`.
    CoherentConvex { lambda: f64 },
    /// `n_th = s + 1`.
    Thermal,
    /// `r = s + 1`, `phi = 0`.
    SqueezeMagnitude,
    /// `r = 1`, `phi = 2 pi s`.
    SqueezePhase,
}

fn default_offset() -> bool {
    true
}

/// Parameters of a single-mode state, see [`single_mode_state`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AncillaParameters {
    pub n_th: f64,
    pub r: f64,
    pub phi: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl EncodingScheme {
    pub const fn coherent_amplitude() -> Self {
        Self::CoherentAmplitude { offset: true }
    }

    /// Binary-input variant, `|alpha| = s`.
    pub const fn coherent_amplitude_binary() -> Self {
        Self::CoherentAmplitude { offset: false }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CoherentAmplitude { .. } => "CoherentAmplitude",
            Self::CoherentPhase => "CoherentPhase",
            Self::CoherentConvex { .. } => "CoherentConvex",
            Self::Thermal => "Thermal",
            Self::SqueezeMagnitude => "SqueezeMagnitude",
            Self::SqueezePhase => "SqueezePhase",
        }
    }

    /// Encoded in the first moments rather than the covariances.
    pub fn is_displacement(&self) -> bool {
        matches!(self, Self::CoherentAmplitude { .. } | Self::CoherentPhase | Self::CoherentConvex { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::CoherentConvex { lambda } = self {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::InvalidParameter { name: "lambda", reason: format!("{lambda} not in [0, 1]") });
            }
        }
        Ok(())
    }

    pub fn parameters(&self, s: f64) -> Result<AncillaParameters> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::InputOutOfRange(s));
        }
        self.validate()?;
        let p = match *self {
            Self::CoherentAmplitude { offset } => {
                let amplitude = if offset { s + 1.0 } else { s };
                if amplitude < 0.0 {
                    return Err(Error::InputOutOfRange(s));
                }
                AncillaParameters { amplitude, ..Default::default() }
            }
            Self::CoherentPhase => AncillaParameters { amplitude: 1.0, phase: TAU * s, ..Default::default() },
            Self::CoherentConvex { lambda } => AncillaParameters {
                amplitude: (1.0 - lambda) * (s + 1.0) + lambda,
                phase: TAU * lambda * s,
                ..Default::default()
            },
            Self::Thermal => AncillaParameters { n_th: s + 1.0, ..Default::default() },
            Self::SqueezeMagnitude => AncillaParameters { r: s + 1.0, ..Default::default() },
            Self::SqueezePhase => AncillaParameters { r: 1.0, phi: TAU * s, ..Default::default() },
        };
        Ok(p)
    }
}

/// Ancilla state for input `s` at ancilla frequency `omega`.
pub fn encode(s: f64, scheme: &EncodingScheme, omega: f64) -> Result<GaussianState> {
    let p = scheme.parameters(s)?;
    single_mode_state(omega, p.n_th, p.r, p.phi, p.amplitude, p.phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const OMEGA: f64 = 0.25;

    fn all_schemes() -> Vec<EncodingScheme> {
        vec![
            EncodingScheme::coherent_amplitude(),
            EncodingScheme::CoherentPhase,
            EncodingScheme::CoherentConvex { lambda: 0.3 },
            EncodingScheme::Thermal,
            EncodingScheme::SqueezeMagnitude,
            EncodingScheme::SqueezePhase,
        ]
    }

    #[test]
    fn convex_at_zero_is_amplitude() {
        for s in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let a = encode(s, &EncodingScheme::CoherentConvex { lambda: 0.0 }, OMEGA).unwrap();
            let b = encode(s, &EncodingScheme::coherent_amplitude(), OMEGA).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn convex_at_one_is_phase() {
        let a = encode(0.37, &EncodingScheme::CoherentConvex { lambda: 1.0 }, OMEGA).unwrap();
        let b = encode(0.37, &EncodingScheme::CoherentPhase, OMEGA).unwrap();
        assert_abs_diff_eq!(a.mean, b.mean, epsilon = 1e-15);
    }

    #[test]
    fn thermal_minus_one_is_vacuum() {
        let s = encode(-1.0, &EncodingScheme::Thermal, OMEGA).unwrap();
        assert_eq!(s, GaussianState::vacuum(&[OMEGA]));
    }

    #[test]
    fn phase_endpoints_coincide() {
        for scheme in [EncodingScheme::CoherentPhase, EncodingScheme::SqueezePhase] {
            let a = encode(-1.0, &scheme, OMEGA).unwrap();
            let b = encode(1.0, &scheme, OMEGA).unwrap();
            assert_abs_diff_eq!(a.mean, b.mean, epsilon = 1e-12);
            assert_abs_diff_eq!(a.cov, b.cov, epsilon = 1e-12);
        }
    }

    #[test]
    fn binary_amplitude() {
        let scheme = EncodingScheme::coherent_amplitude_binary();
        assert_eq!(encode(0.0, &scheme, OMEGA).unwrap().mean.amax(), 0.0);
        let one = encode(1.0, &scheme, OMEGA).unwrap();
        assert_abs_diff_eq!(one.mean[0], (2.0 / OMEGA).sqrt(), epsilon = 1e-15);
        assert!(encode(-0.5, &scheme, OMEGA).is_err());
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        for scheme in all_schemes() {
            assert!(matches!(encode(1.01, &scheme, OMEGA), Err(Error::InputOutOfRange(_))));
            assert!(matches!(encode(-1.5, &scheme, OMEGA), Err(Error::InputOutOfRange(_))));
        }
        assert!(encode(0.0, &EncodingScheme::CoherentConvex { lambda: 1.2 }, OMEGA).is_err());
    }

    #[test]
    fn scheme_json_names() {
        let json = serde_json::to_string(&EncodingScheme::CoherentConvex { lambda: 0.5 }).unwrap();
        assert_eq!(json, r#"{"scheme":"CoherentConvex","lambda":0.5}"#);
        let parsed: EncodingScheme = serde_json::from_str(r#"{"scheme":"CoherentAmplitude"}"#).unwrap();
        assert_eq!(parsed, EncodingScheme::coherent_amplitude());
        let parsed: EncodingScheme = serde_json::from_str(r#"{"scheme":"SqueezePhase"}"#).unwrap();
        assert_eq!(parsed.name(), "SqueezePhase");
    }

    proptest! {
        #[test]
        fn encoded_states_are_physical(s in -1.0f64..=1.0, idx in 0usize..6) {
            let scheme = all_schemes()[idx];
            prop_assert!(encode(s, &scheme, OMEGA).unwrap().is_physical());
        }

        #[test]
        fn phase_schemes_are_periodic(s in -1.0f64..=0.0) {
            for scheme in [EncodingScheme::CoherentPhase, EncodingScheme::SqueezePhase] {
                let a = encode(s, &scheme, OMEGA).unwrap();
                let b = encode(s + 1.0, &scheme, OMEGA).unwrap();
                prop_assert!((a.mean - b.mean).amax() < 1e-12);
                prop_assert!((a.cov - b.cov).amax() < 1e-10);
            }
        }

        #[test]
        fn squeezed_encodings_are_pure(s in -1.0f64..=1.0) {
            for scheme in [EncodingScheme::SqueezeMagnitude, EncodingScheme::SqueezePhase] {
                let st = encode(s, &scheme, OMEGA).unwrap();
                prop_assert!((st.cov.determinant() - 0.25).abs() < 1e-12 * st.cov.amax().powi(2).max(1.0));
            }
        }
    }
}
