//! Job configuration read from JSON.

use std::path::Path;

use caustica::examples::{BuiltinExample, Profile};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// "radial", "beam" or "evolved-beam"
    pub example: String,
    #[serde(default)]
    pub beam: Option<BeamSpec>,
    #[serde(default)]
    pub amplitude: AmplitudeSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default)]
    pub representation: Representation,
    /// second representation for `compare`
    #[serde(default)]
    pub compare_with: Option<Representation>,
    #[serde(default)]
    pub standard: StandardSpec,
    #[serde(default)]
    pub nonsingular: NonsingularSpec,
    #[serde(default)]
    pub path: Option<PathSpec>,
    #[serde(default)]
    pub cycle: Option<CycleSpec>,
    #[serde(default)]
    pub bridge: BridgeSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_h() -> Vec<f64> {
    vec![0.1]
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "one")]
    pub k: f64,
    /// evolution time, evolved-beam only
    #[serde(default = "half")]
    pub t: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_profile() -> ProfileSpec {
    ProfileSpec::Tanh { a: 1.0, b: 1.0 }
}

impl Default for BeamSpec {
    fn default() -> Self {
        Self { profile: default_profile(), k: 1.0, t: 0.5, c: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { value: f64 },
    Tanh { a: f64, b: f64 },
}

impl From<ProfileSpec> for Profile {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::Constant { value } => Profile::Constant(value),
            ProfileSpec::Tanh { a, b } => Profile::Tanh { a, b },
        }
    }
}

/// Built-in amplitudes. The first coordinate is τ on the radial manifold and α on the beam.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmplitudeSpec {
    /// 1 for |first| ≤ plateau, 0 beyond support
    Cutoff { plateau: f64, support: f64 },
    /// cutoff times a polar cap smooth_step((cos θ − start)/width), radial only
    CappedCutoff { plateau: f64, support: f64, start: f64, width: f64 },
    /// exp(−(α² + φ²)/width²) on the beam, exp(−τ²/width²) on the radial manifold
    Gaussian { width: f64 },
    Zero,
}

impl Default for AmplitudeSpec {
    fn default() -> Self {
        AmplitudeSpec::Cutoff { plateau: 10.0, support: 20.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn nodes(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row-major order, the last axis varying fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let nodes: Vec<Vec<f64>> = self.axes.iter().map(AxisSpec::nodes).collect();
        let mut out = vec![Vec::new()];
        for axis in &nodes {
            out = out.into_iter().flat_map(|p| axis.iter().map(move |&v| [p.as_slice(), &[v]].concat())).collect();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    New,
    Standard,
    Nonsingular,
    Global,
    /// closed-form oracle of the example
    Exact,
    #[default]
    Auto,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::New => "new",
            Representation::Standard => "standard",
            Representation::Nonsingular => "nonsingular",
            Representation::Global => "global",
            Representation::Exact => "exact",
            Representation::Auto => "auto",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StandardSpec {
    pub index: i64,
    pub p_max: f64,
}

impl Default for StandardSpec {
    fn default() -> Self {
        Self { index: 0, p_max: 0.96 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NonsingularSpec {
    pub max_radius: f64,
}

impl Default for NonsingularSpec {
    fn default() -> Self {
        Self { max_radius: 2.0 }
    }
}

/// Straight segment in manifold coordinates.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    /// one-based indices I of a canonical chart; absent means the path index
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
}

/// Loop in the last (angular) coordinate with the first two held at `at`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CycleSpec {
    pub at: [f64; 2],
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// φ supported on β > −1/2
    Positive,
    /// φ supported on β < 1/2
    Negative,
    /// φ ≡ 1, both stationary points interfering
    Whole,
}

/// Airy phase comparison for `bridge`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BridgeSpec {
    pub x: f64,
    /// absent runs the positive and negative branches separately
    #[serde(default)]
    pub branch: Option<Branch>,
}

impl Default for BridgeSpec {
    fn default() -> Self {
        Self { x: -1.0, branch: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// file stem for fields, suffixed with the h index
    pub stem: String,
    /// write PGM heatmaps for two-dimensional grids
    pub heatmap: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { stem: "field".into(), heatmap: true }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: f64,
    pub order_band: [f64; 2],
    /// relative difference below which two representations count as identical
    pub identical: f64,
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: 1e-8, order_band: [0.9, 1.5], identical: 1e-7, check: 1e-8 }
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn example(&self) -> Result<BuiltinExample, CliError> {
        let base = caustica::examples::builtin(&self.example).map_err(|e| CliError::Config(e.to_string()))?;
        let b = self.beam.unwrap_or_default();
        Ok(match base {
            BuiltinExample::Radial => base,
            BuiltinExample::Beam { .. } => BuiltinExample::Beam { profile: b.profile.into(), k: b.k },
            BuiltinExample::EvolvedBeam { .. } => BuiltinExample::EvolvedBeam { profile: b.profile.into(), k: b.k, t: b.t, c: b.c },
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let example = self.example()?;
        if self.h.is_empty() {
            return bad("h list is empty".into());
        }
        if let Some(h) = self.h.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return bad(format!("h must be positive, got {h}"));
        }
        if let Some(grid) = &self.grid {
            if grid.axes.len() != 3 {
                return bad(format!("grid needs 3 axes, got {}", grid.axes.len()));
            }
            if let Some(a) = grid.axes.iter().find(|a| a.count == 0 || !a.min.is_finite() || !a.max.is_finite() || a.max < a.min) {
                return bad(format!("invalid grid axis {a:?}: counts must be at least 1 and min ≤ max"));
            }
        }
        for rep in std::iter::once(self.representation).chain(self.compare_with) {
            check_representation(&example, rep, self.amplitude)?;
        }
        if let Some(b) = self.beam {
            Profile::from(b.profile).validate().map_err(|e| CliError::Config(e.to_string()))?;
            if !(b.k > 0.0 && b.c > 0.0 && b.t >= 0.0) {
                return bad("beam needs k > 0, c > 0 and t ≥ 0".into());
            }
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.identical > 0.0 && t.check > 0.0 && t.order_band[0] <= t.order_band[1]) {
            return bad("tolerances must be positive and the order band ordered".into());
        }
        match self.amplitude {
            AmplitudeSpec::Cutoff { plateau, support } | AmplitudeSpec::CappedCutoff { plateau, support, .. } if !(0.0 <= plateau && plateau < support) => {
                bad("cutoff amplitude needs 0 ≤ plateau < support".into())
            }
            AmplitudeSpec::CappedCutoff { width, .. } if !(width > 0.0) => bad("polar cap width must be positive".into()),
            AmplitudeSpec::CappedCutoff { .. } if !matches!(example, BuiltinExample::Radial) => bad("capped-cutoff amplitude is radial only".into()),
            AmplitudeSpec::Gaussian { width } if !(width > 0.0) => bad("gaussian width must be positive".into()),
            _ => Ok(()),
        }
    }
}

fn check_representation(example: &BuiltinExample, rep: Representation, amp: AmplitudeSpec) -> Result<(), CliError> {
    let ok = match example {
        BuiltinExample::Radial => match rep {
            Representation::Exact => matches!(amp, AmplitudeSpec::Cutoff { .. } | AmplitudeSpec::Zero),
            _ => true,
        },
        BuiltinExample::Beam { .. } => matches!(rep, Representation::New | Representation::Auto | Representation::Exact),
        BuiltinExample::EvolvedBeam { .. } => matches!(rep, Representation::New | Representation::Auto),
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("representation '{}' is not available for '{}' with this amplitude", rep.name(), example.name())))
    }
}
