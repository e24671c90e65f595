use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{self, PhasePoint};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[serde(rename = "meanfield")]
    MeanField,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `⟨a†a⟩/j`.
    MeanPhotonScaled,
    /// `⟨Π⟩`.
    Parity,
    /// Parity with coordinates rescaled by `√j` (mean-field only).
    ScaledParity,
}

impl Observable {
    pub const ALL: [Observable; 3] = [
        Observable::MeanPhotonScaled,
        Observable::Parity,
        Observable::ScaledParity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::MeanPhotonScaled => "mean_photon_scaled",
            Observable::Parity => "parity",
            Observable::ScaledParity => "scaled_parity",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown observable `{s}`"))
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::MeanField => "meanfield",
            Engine::Quantum => "quantum",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "meanfield" => Ok(Engine::MeanField),
            "quantum" => Ok(Engine::Quantum),
            _ => Err(format!("unknown engine `{s}` (expected meanfield or quantum)")),
        }
    }
}

/// One time sample. Mean-field samples carry the phase point; `values` line
/// up with [`Trajectory::observables`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub point: Option<PhasePoint>,
    pub values: Vec<f64>,
}

/// Time series produced by either engine. Sample times increase strictly
/// and start at the initial time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub engine: Engine,
    pub driven: bool,
    pub observables: Vec<Observable>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    fn column(&self, observable: Observable) -> Result<usize> {
        self.observables
            .iter()
            .position(|&o| o == observable)
            .ok_or_else(|| Error::domain(format!("trajectory does not record {observable}")))
    }

    /// `(t, value)` pairs of one recorded observable.
    pub fn series(&self, observable: Observable) -> Result<Vec<(f64, f64)>> {
        let k = self.column(observable)?;
        Ok(self.samples.iter().map(|s| (s.t, s.values[k])).collect())
    }

    pub fn final_value(&self, observable: Observable) -> Result<f64> {
        let k = self.column(observable)?;
        self.samples
            .last()
            .map(|s| s.values[k])
            .ok_or(Error::TooFewSamples(0))
    }

    pub fn time_average(&self, observable: Observable) -> Result<f64> {
        meanfield::time_average(&self.series(observable)?)
    }

    /// Fills `values` from the stored phase points (mean-field trajectories).
    pub fn attach_meanfield_observables(&mut self, observables: &[Observable]) -> Result<()> {
        let j = self.params.j();
        for sample in &mut self.samples {
            let point = sample
                .point
                .ok_or_else(|| Error::domain("sample has no phase point"))?;
            sample.values = observables
                .iter()
                .map(|&o| meanfield::observe(&point, j, o))
                .collect::<Result<_>>()?;
        }
        self.observables = observables.to_vec();
        Ok(())
    }
}
