//! Experiment configuration. Every physical quantity carries its SI unit in
//! the field name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_complex::Complex64;
use oam_lens::analytic::{LensElement, OpticalColumn};
use oam_lens::wave::{LGModeSpec, PropagationOptions, RadialGrid};
use oam_lens::{AxialFieldModel, BeamParameters, Polarity};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free text carried into the report.
    #[serde(default)]
    pub description: String,
    pub beam: BeamConfig,
    pub column: ColumnConfig,
    /// Source modes for wave runs.
    #[serde(default)]
    pub source: Option<SourceConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub voltage_volts: f64,
    #[serde(default)]
    pub relativistic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum PolarityConfig {
    Positive,
    Negative,
}

impl From<PolarityConfig> for Polarity {
    fn from(p: PolarityConfig) -> Self {
        match p {
            PolarityConfig::Positive => Polarity::Positive,
            PolarityConfig::Negative => Polarity::Negative,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    Glaser {
        #[serde(rename = "B0_tesla")]
        b0_tesla: f64,
        a_m: f64,
        b_m: f64,
        z_center_m: f64,
        polarity: PolarityConfig,
    },
    WireLoop {
        #[serde(rename = "B0_tesla")]
        b0_tesla: f64,
        #[serde(rename = "R_m")]
        r_m: f64,
        z_center_m: f64,
        polarity: PolarityConfig,
    },
    /// CSV with columns `z,B1,B3` (m, T, T), relative to `z_center_m`.
    Tabulated {
        csv_path: PathBuf,
        b_m: f64,
        z_center_m: f64,
        polarity: PolarityConfig,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ColumnConfig {
    /// Object plane; wave sources and rays start here.
    pub object_z_m: f64,
    #[serde(default)]
    pub exit_z_m: Option<f64>,
    #[serde(default)]
    pub elements: Vec<ElementConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub m: i32,
    pub w0_m: f64,
    #[serde(default = "one")]
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub modes: Vec<ModeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub rho_max_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WaveNumerics {
    #[serde(default)]
    pub step_scale: Option<f64>,
    #[serde(default)]
    pub lens_steps_per_extent: Option<f64>,
    #[serde(default)]
    pub absorber_strength: Option<f64>,
    #[serde(default)]
    pub max_step_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ImageConfig {
    pub pixels: usize,
    pub pitch_m: f64,
    /// Planes (a subset of the sample planes) at which images and profiles
    /// are written.
    pub planes_m: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SteppingConfig {
    Adaptive { rel_tol: f64 },
    Fixed { steps: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    /// Thin-lens focal lengths, Λ, Larmor phases and the column matrix.
    Focal { m_values: Vec<i32> },
    /// Ray trajectories. Each ray starts at the object plane with height
    /// `rho0_m` or, if absent, the LG peak radius for `w0_m`.
    Trace {
        m_values: Vec<i32>,
        #[serde(default)]
        rho0_m: Option<f64>,
        #[serde(default)]
        w0_m: Option<f64>,
        #[serde(default)]
        slope: f64,
        z_end_m: f64,
        stepping: SteppingConfig,
        #[serde(default)]
        sample_planes_m: Vec<f64>,
    },
    /// Wave propagation of the source through the column.
    Propagate {
        grid: GridConfig,
        sample_planes_m: Vec<f64>,
        #[serde(default)]
        images: Option<ImageConfig>,
        #[serde(default)]
        numerics: Option<WaveNumerics>,
    },
    /// Stacked-device tables. Λ and f0 come from the first element unless
    /// given.
    Stack {
        pairs: u32,
        m_values: Vec<i32>,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        f0_m: Option<f64>,
        #[serde(default)]
        spacing_s: Vec<f64>,
        /// Relative exact-vs-exponential gap above which a row is flagged.
        #[serde(default = "flag_default")]
        flag_tolerance: f64,
    },
    /// Propagate, aperture, compare transmitted m = ±1 for both polarities.
    Dichroism {
        grid: GridConfig,
        aperture_z_m: f64,
        aperture_radius_m: f64,
        #[serde(default)]
        numerics: Option<WaveNumerics>,
    },
    /// OAM spectrum of the source and after propagation, with a 2D
    /// synthesis and azimuthal decomposition round trip.
    Spectrum {
        grid: GridConfig,
        z_m: f64,
        pixels: usize,
        pitch_m: f64,
        #[serde(default = "n_phi_default")]
        n_phi: usize,
        #[serde(default)]
        numerics: Option<WaveNumerics>,
    },
}

fn flag_default() -> f64 {
    0.03
}

fn n_phi_default() -> usize {
    64
}

impl RunConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            RunConfig::Focal { .. } => "focal",
            RunConfig::Trace { .. } => "trace",
            RunConfig::Propagate { .. } => "propagate",
            RunConfig::Stack { .. } => "stack",
            RunConfig::Dichroism { .. } => "dichroism",
            RunConfig::Spectrum { .. } => "spectrum",
        }
    }
}

/// Reads and deserialises a config, reporting the path of a bad field.
pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> anyhow::Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("config field `{path}`: {}", e.into_inner())
    })?;
    Ok(cfg)
}

pub fn schema() -> schemars::schema::RootSchema {
    schemars::schema_for!(ExperimentConfig)
}

impl ExperimentConfig {
    pub fn beam(&self) -> anyhow::Result<BeamParameters> {
        let b = if self.beam.relativistic {
            BeamParameters::relativistic(self.beam.voltage_volts)
        } else {
            BeamParameters::new(self.beam.voltage_volts)
        };
        b.context("config field `beam.voltage_volts`")
    }

    /// Relative CSV paths are resolved against `base`.
    pub fn column(&self, base: &Path) -> anyhow::Result<OpticalColumn> {
        let mut elements = Vec::new();
        for (i, e) in self.column.elements.iter().enumerate() {
            let ctx = || format!("config field `column.elements[{i}]`");
            let (model, z) = match e {
                ElementConfig::Glaser {
                    b0_tesla,
                    a_m,
                    b_m,
                    z_center_m,
                    polarity,
                } => (
                    AxialFieldModel::glaser(*b0_tesla, *a_m, *b_m, (*polarity).into())
                        .with_context(ctx)?,
                    *z_center_m,
                ),
                ElementConfig::WireLoop {
                    b0_tesla,
                    r_m,
                    z_center_m,
                    polarity,
                } => (
                    AxialFieldModel::wire_loop(*b0_tesla, *r_m, (*polarity).into())
                        .with_context(ctx)?,
                    *z_center_m,
                ),
                ElementConfig::Tabulated {
                    csv_path,
                    b_m,
                    z_center_m,
                    polarity,
                } => {
                    let p = if csv_path.is_absolute() {
                        csv_path.clone()
                    } else {
                        base.join(csv_path)
                    };
                    (
                        AxialFieldModel::from_csv(&p, *b_m, (*polarity).into()).with_context(ctx)?,
                        *z_center_m,
                    )
                }
            };
            elements.push(LensElement { model, z_center: z });
        }
        let mut col = OpticalColumn::new(elements, self.column.object_z_m)
            .context("config field `column`")?;
        if let Some(exit) = self.column.exit_z_m {
            col = col.with_exit(exit).context("config field `column.exit_z_m`")?;
        }
        Ok(col)
    }

    pub fn modes(&self) -> anyhow::Result<Vec<LGModeSpec>> {
        let Some(src) = &self.source else {
            bail!("config field `source`: required for `{}` runs", self.run.kind());
        };
        if src.modes.is_empty() {
            bail!("config field `source.modes`: at least one mode is required");
        }
        Ok(src
            .modes
            .iter()
            .map(|m| LGModeSpec {
                m: m.m,
                w0: m.w0_m,
                amplitude: Complex64::new(m.amplitude_re, m.amplitude_im),
            })
            .collect())
    }
}

impl GridConfig {
    pub fn build(&self) -> anyhow::Result<RadialGrid> {
        RadialGrid::with_extent(self.points, self.rho_max_m).context("config field `run.grid`")
    }
}

pub fn wave_options(n: &Option<WaveNumerics>) -> PropagationOptions {
    let mut o = PropagationOptions::default();
    if let Some(n) = n {
        if let Some(v) = n.step_scale {
            o.step_scale = v;
        }
        if let Some(v) = n.lens_steps_per_extent {
            o.lens_steps_per_extent = v;
        }
        if let Some(v) = n.absorber_strength {
            o.absorber_strength = v;
        }
        o.max_step = n.max_step_m;
    }
    o
}
