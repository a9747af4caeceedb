//! Built-in manifolds with closed-form oracles.

mod beam;
mod radial;

use std::sync::Arc;

pub use beam::{
    beam_amplitude, beam_manifold, beam_new_chart, beam_reference_field, caustic_onset, evolved_field, BeamEikonal, BesselBeam,
    EvolvedBeamState, Profile,
};
pub use radial::{
    radial_cap_inverse, radial_center, radial_central_point, radial_cutoff_amplitude, radial_field, radial_field_bessel, radial_manifold,
    radial_new_chart, radial_nonsingular_chart, radial_standard_chart, RadialManifold,
};

use crate::error::{Error, Result};
use crate::manifold::EikonalChart;

/// Quarter turns of the common phase e^{iπq/2} attached to every local operator
/// of the built-in examples.
pub const REFERENCE_QUARTER_TURNS: i32 = 1;

pub const EXAMPLE_NAMES: [&str; 3] = ["radial", "beam", "evolved-beam"];

/// Registry entry for the CLI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinExample {
    Radial,
    Beam { profile: Profile, k: f64 },
    EvolvedBeam { profile: Profile, k: f64, t: f64, c: f64 },
}

impl BuiltinExample {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinExample::Radial => "radial",
            BuiltinExample::Beam { .. } => "beam",
            BuiltinExample::EvolvedBeam { .. } => "evolved-beam",
        }
    }

    /// The eikonal chart the new singular chart is built on.
    pub fn eikonal_chart(&self) -> Result<Arc<dyn EikonalChart>> {
        Ok(match *self {
            BuiltinExample::Radial => Arc::new(RadialManifold),
            BuiltinExample::Beam { profile, k } => Arc::new(beam_manifold(profile, k)?.eikonal_chart(0.0, 1.0)?),
            BuiltinExample::EvolvedBeam { profile, k, t, c } => Arc::new(beam_manifold(profile, k)?.eikonal_chart(t, c)?),
        })
    }
}

/// λ = 1 + tanh φ + 1, k = 1; the evolved beam at t = 0.5, c = 1.
pub fn builtin(name: &str) -> Result<BuiltinExample> {
    let profile = Profile::Tanh { a: 1.0, b: 1.0 };
    match name {
        "radial" => Ok(BuiltinExample::Radial),
        "beam" => Ok(BuiltinExample::Beam { profile, k: 1.0 }),
        "evolved-beam" => Ok(BuiltinExample::EvolvedBeam { profile, k: 1.0, t: 0.5, c: 1.0 }),
        other => Err(Error::Config(format!("unknown example '{other}', expected one of {EXAMPLE_NAMES:?}"))),
    }
}
