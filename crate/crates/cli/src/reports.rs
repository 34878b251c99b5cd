//! JSON reports emitted by `info` and `verify`. The other commands emit the
//! report types of `qcap_core::io` and `qcap_core::capacity`.

use qcap_core::converse::Gadget;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemEntropy {
    pub label: String,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    pub dims: Vec<(String, usize)>,
    pub entropy: f64,
    pub marginals: Vec<SubsystemEntropy>,
    /// Source system; the quantities below refer to it.
    pub source: String,
    /// `I(A : rest)`, absent for a single subsystem.
    pub mutual_information: Option<f64>,
    /// `S(rest | A)`, absent for a single subsystem.
    pub conditional_entropy: Option<f64>,
    /// Coherent information of the source marginal, when a channel is given.
    pub coherent_information: Option<f64>,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleInfo {
    pub dim_A: usize,
    pub dim_R: usize,
    pub entries: usize,
    /// Holevo information of the `A` marginals.
    pub r_c: f64,
    /// Average coherent information, signed.
    pub r_q: f64,
    pub i_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub channel: Option<ChannelInfo>,
    pub state: Option<StateInfo>,
    pub ensemble: Option<EnsembleInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub epsilon: f64,
    pub value: f64,
    pub achieved_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetGrid {
    pub gadget: Gadget,
    pub points: Vec<GridPoint>,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverseSource {
    pub name: String,
    pub dim_C: usize,
    pub dim_Q: usize,
    pub dim_R: usize,
    pub grids: Vec<GadgetGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityData {
    pub p: Vec<f64>,
    pub n: usize,
    pub delta: f64,
    pub entropy: f64,
    /// `Σ_x |log₂ p(x)|` over the support.
    pub constant: f64,
    /// `n[H(p) + cδ]`.
    pub log2_dimension_bound: f64,
    pub log2_typical_count: f64,
    pub typical_mass: f64,
    pub samples: usize,
    pub sampled_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converse: Option<Vec<ConverseSource>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typicality: Option<TypicalityData>,
}

impl VerifyReport {
    pub fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { suite: suite.into(), seed, passed, checks, converse: None, typicality: None }
    }
}
