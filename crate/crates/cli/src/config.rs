//! Run configuration: a TOML document of flat `[section]` key/value tables.
//! Unknown sections and keys are rejected.

use std::path::Path;

use hysterobeam::beam_fe::{assemble, modal_analysis, BeamGeometry, BeamModel};
use hysterobeam::forcing::{Forcing, ForcingArgs, ForcingRegistry};
use hysterobeam::hysteresis::solve_abar_for_chimax;
use hysterobeam::initial::InitialShape;
use hysterobeam::integrator::{Integrator, IntegratorRegistry, SchemeSettings};
use hysterobeam::rom::ModalIcSampler;
use hysterobeam::BoucWenParams;
use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{io_err, CliError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_A_BAR: f64 = 0.065;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form label echoed in reports.
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub beam: BeamSection,
    #[serde(default)]
    pub hysteresis: HysteresisSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    pub modes: Option<ModesSection>,
    pub analysis: Option<AnalysisSection>,
    pub convergence: Option<ConvergenceSection>,
    pub rom: Option<RomSection>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSection {
    pub n_elements: usize,
    pub n_gauss: usize,
    pub length: f64,
    pub flexural_rigidity: f64,
    pub mass_per_length: f64,
}

impl Default for BeamSection {
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        Self {
            n_elements: 10,
            n_gauss: 3,
            length: 1.0,
            flexural_rigidity: 2666.7,
            mass_per_length: 3.14,
        }
    }
}

/// At most one of `a_bar` and `chi_max` fixes the law's stiffness scale;
/// with neither, `a_bar` takes its default.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HysteresisSection {
    pub a_bar: Option<f64>,
    pub chi_max: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub n_h: f64,
    pub gamma_h: f64,
}

impl Default for HysteresisSection {
    fn default() -> Self {
        Self {
            a_bar: None,
            chi_max: None,
            alpha: 0.8,
            beta: 0.5,
            n_h: 0.5,
            gamma_h: 3000.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub integrator: String,
    pub h: f64,
    pub t_end: f64,
    pub stride: usize,
    /// `static`, `static-modes:<r>`, `equal-modes:<r>`, `random-modes:<r>` or `rest`.
    pub initial_shape: String,
    /// Initial tip displacement (m); for `random-modes` an upper bound.
    pub tip_amplitude: f64,
    /// Explicit modal coordinates of the initial displacement; overrides `initial_shape`.
    pub modal_coefficients: Option<Vec<f64>>,
    pub forcing: String,
    pub forcing_amplitude: f64,
    pub forcing_frequency: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            integrator: "semi-implicit".into(),
            h: 1e-4,
            t_end: 1.0,
            stride: 1,
            initial_shape: "static-modes:3".into(),
            tip_amplitude: 0.06,
            modal_coefficients: None,
            forcing: "none".into(),
            forcing_amplitude: 0.0,
            forcing_frequency: 0.0,
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Number of cycles `M` for the equivalent damping ratio.
    pub zeta_cycles: Option<usize>,
    /// Peak window `[t1, t2]` for the envelope decay slope.
    pub decay_window: Option<[f64; 2]>,
    pub spectrum: bool,
    /// Also run the adaptive reference and report the relative RMS tip error.
    pub compare_reference: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    /// Coarsest step `2^-coarse`.
    pub coarse: u32,
    /// Finest step `2^-fine`.
    pub fine: u32,
    pub instants: usize,
    pub tau: f64,
    /// `auto`, `adaptive` or `fine-step`.
    pub reference: String,
    pub rtol: f64,
    pub atol: f64,
    pub fit_window: Option<[f64; 2]>,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            coarse: 10,
            fine: 18,
            instants: 128,
            tau: 1.0,
            reference: "auto".into(),
            rtol: 1e-10,
            atol: 1e-12,
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RomSection {
    pub modes: usize,
    pub runs: usize,
    pub samples: usize,
    pub t_end: f64,
    pub h: f64,
    pub ic_scale: f64,
    /// Hysteresis points kept by `rom build`.
    pub points: usize,
    /// Greedy points computed and stored; `None` means every point.
    pub max_points: Option<usize>,
    pub epsilon: Option<f64>,
    pub eval_points: Vec<usize>,
}

impl Default for RomSection {
    fn default() -> Self {
        Self {
            modes: 3,
            runs: 60,
            samples: 1000,
            t_end: 1.0,
            h: 1e-4,
            ic_scale: 0.06,
            points: 100,
            max_points: None,
            epsilon: None,
            eval_points: vec![0, 10, 25, 50, 100, 150, 200],
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|source| CliError::Config {
            path: origin.to_string(),
            source,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn geometry(&self) -> Result<BeamGeometry> {
        let b = &self.beam;
        Ok(BeamGeometry::new(
            b.length,
            b.flexural_rigidity,
            b.mass_per_length,
            b.n_elements,
            b.n_gauss,
        )?)
    }

    pub fn params(&self) -> Result<BoucWenParams> {
        let h = &self.hysteresis;
        let a_bar = match (h.a_bar, h.chi_max) {
            (Some(a), None) => a,
            (None, None) => DEFAULT_A_BAR,
            (None, Some(c)) => solve_abar_for_chimax(c, h.alpha, h.beta, h.n_h)?,
            _ => {
                return Err(CliError::Invalid(
                    "[hysteresis] takes a_bar or chi_max, not both".into(),
                ))
            }
        };
        Ok(BoucWenParams::new(
            a_bar, h.alpha, h.beta, h.n_h, h.gamma_h,
        )?)
    }

    pub fn model(&self) -> Result<BeamModel> {
        Ok(assemble(&self.geometry()?, self.params()?.gamma_h())?)
    }

    pub fn integrator(&self) -> Result<Box<dyn Integrator>> {
        let s = &self.simulation;
        let settings = SchemeSettings {
            h: s.h,
            rtol: s.rtol,
            atol: s.atol,
            ..SchemeSettings::default()
        };
        Ok(IntegratorRegistry::default().build(&s.integrator, &settings)?)
    }

    pub fn forcing(&self, model: &BeamModel) -> Result<Box<dyn Forcing>> {
        let s = &self.simulation;
        let args = ForcingArgs {
            n_dof: model.n_dof(),
            tip_dof: model.tip_dof(),
            amplitude: s.forcing_amplitude,
            frequency: s.forcing_frequency,
        };
        Ok(ForcingRegistry::default().build(&s.forcing, &args)?)
    }

    /// Initial displacement field of `[simulation]`.
    pub fn initial_displacement(&self, model: &BeamModel) -> Result<DVector<f64>> {
        let s = &self.simulation;
        if let Some(xi) = &s.modal_coefficients {
            let basis = modal_analysis(model, xi.len())?;
            return Ok(&basis.shapes * DVector::from_column_slice(xi));
        }
        if s.initial_shape == "rest" {
            return Ok(DVector::zeros(model.n_dof()));
        }
        if let Some(r) = s.initial_shape.strip_prefix("random-modes:") {
            let r: usize = r.parse().map_err(|_| {
                CliError::Invalid(format!("bad mode count in `{}`", s.initial_shape))
            })?;
            let basis = modal_analysis(model, r)?;
            let xi =
                ModalIcSampler::new(&basis.shapes, model.tip_dof(), s.tip_amplitude, self.seed())?
                    .draw();
            return Ok(&basis.shapes * xi);
        }
        let shape: InitialShape = s.initial_shape.parse()?;
        Ok(shape.displacement(model, s.tip_amplitude)?)
    }

    pub fn convergence(&self) -> Result<&ConvergenceSection> {
        self.convergence
            .as_ref()
            .ok_or(CliError::MissingSection("convergence"))
    }

    pub fn rom(&self) -> Result<&RomSection> {
        self.rom.as_ref().ok_or(CliError::MissingSection("rom"))
    }
}
