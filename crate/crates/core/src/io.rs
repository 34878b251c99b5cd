//! JSON file formats for states, channels, ensembles and reports, plus the
//! CSV form of trade-off curves.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::info::CQEnsemble;
use crate::ki::KIDecomposition;
use crate::linalg::{c, CMat, CVec};
use crate::space::TensorSpace;
use crate::state::DensityMatrix;
use crate::tradeoff::TradeoffCurve;

pub type ComplexPair = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexPair>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("matrix must be non-empty".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("matrix row {i} has {} entries, expected {ncols}", rows[i].len())));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_json(v: &CVec) -> Vec<ComplexPair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[ComplexPair]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])))
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub dims: Vec<(String, usize)>,
    pub matrix: MatrixJson,
}

impl StateSpec {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self { dims: rho.space().subsystems().to_vec(), matrix: matrix_to_json(rho.matrix()) }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let space = TensorSpace::new(self.dims.iter().map(|(l, d)| (l.clone(), *d)))?;
        DensityMatrix::new(space, matrix_from_json(&self.matrix)?)
    }

    pub fn parse(text: &str) -> Result<DensityMatrix> {
        from_json::<Self>(text, "state")?.to_state()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelSpec {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self { dim_in: ch.dim_in(), dim_out: ch.dim_out(), kraus: ch.kraus().iter().map(matrix_to_json).collect() }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let ch = QuantumChannel::new(kraus)?;
        if ch.dim_in() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: ch.dim_in() });
        }
        if ch.dim_out() != self.dim_out {
            return Err(Error::DimensionMismatch { expected: self.dim_out, found: ch.dim_out() });
        }
        Ok(ch)
    }

    pub fn parse(text: &str) -> Result<QuantumChannel> {
        from_json::<Self>(text, "channel")?.to_channel()
    }
}

/// Built-in channel from a name such as `dephasing(0.1)` or `identity(2)`.
pub fn named_channel(spec: &str) -> Result<QuantumChannel> {
    let spec = spec.trim();
    let bad = || Error::Parse(format!("cannot parse channel `{spec}`"));
    let open = spec.find('(').ok_or_else(bad)?;
    let inner = spec[open + 1..].strip_suffix(')').ok_or_else(bad)?.trim();
    let name = spec[..open].trim();
    let real = || inner.parse::<f64>().map_err(|_| bad());
    let dim = || inner.parse::<usize>().map_err(|_| bad());
    match name {
        "identity" => QuantumChannel::identity(dim()?),
        "trace_out" => QuantumChannel::trace_out(dim()?),
        "dephasing" => QuantumChannel::dephasing(real()?),
        "depolarizing" => QuantumChannel::depolarizing(real()?),
        "erasure" => QuantumChannel::erasure(real()?),
        "amplitude_damping" => QuantumChannel::amplitude_damping(real()?),
        _ => Err(Error::Parse(format!("unknown channel `{name}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleEntry {
    pub p: f64,
    pub vector: Vec<ComplexPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(rename = "dim_A")]
    pub dim_a: usize,
    #[serde(rename = "dim_R")]
    pub dim_r: usize,
    pub entries: Vec<EnsembleEntry>,
}

impl EnsembleSpec {
    pub fn from_ensemble(ens: &CQEnsemble) -> Self {
        Self {
            dim_a: ens.dim_a(),
            dim_r: ens.dim_r(),
            entries: ens.entries().map(|(p, v)| EnsembleEntry { p, vector: vector_to_json(v) }).collect(),
        }
    }

    pub fn to_ensemble(&self) -> Result<CQEnsemble> {
        let entries = self.entries.iter().map(|e| (e.p, vector_from_json(&e.vector))).collect();
        CQEnsemble::new(self.dim_a, self.dim_r, entries)
    }

    pub fn parse(text: &str) -> Result<CQEnsemble> {
        from_json::<Self>(text, "ensemble")?.to_ensemble()
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KidBlockReport {
    pub p: f64,
    pub dim_Q: usize,
    pub dim_N: usize,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KidReport {
    pub blocks: Vec<KidBlockReport>,
    pub S_C: f64,
    pub S_Q_given_C: f64,
    pub S_CQ: f64,
    pub reconstruction_error: f64,
    pub u_ki: MatrixJson,
}

impl KidReport {
    pub fn new(kid: &KIDecomposition) -> Self {
        Self {
            blocks: kid.blocks().iter().map(|b| KidBlockReport { p: b.p, dim_Q: b.dim_q, dim_N: b.dim_n }).collect(),
            S_C: kid.s_c(),
            S_Q_given_C: kid.s_q_given_c(),
            S_CQ: kid.s_cq(),
            reconstruction_error: kid.reconstruction_error(),
            u_ki: matrix_to_json(kid.u_ki()),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePointReport {
    pub t: Option<f64>,
    pub r_q: f64,
    pub r_c: f64,
    pub synthetic: bool,
    pub witness: Option<EnsembleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub level: usize,
    pub c_q: f64,
    pub c_c: f64,
    pub points: Vec<CurvePointReport>,
}

impl CurveReport {
    pub fn new(curve: &TradeoffCurve) -> Self {
        Self {
            level: curve.level,
            c_q: curve.c_q,
            c_c: curve.c_c,
            points: curve
                .points
                .iter()
                .map(|p| CurvePointReport {
                    t: p.t,
                    r_q: p.r_q,
                    r_c: p.r_c,
                    synthetic: p.synthetic,
                    witness: p.witness.as_ref().map(EnsembleSpec::from_ensemble),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Envelope vertices as CSV with columns `t,r_q,r_c,synthetic`; `t` is empty
/// for synthetic points.
pub fn curve_csv(curve: &TradeoffCurve) -> String {
    let mut out = String::from("t,r_q,r_c,synthetic\n");
    for p in &curve.points {
        let t = p.t.map(|t| t.to_string()).unwrap_or_default();
        writeln!(out, "{t},{},{},{}", p.r_q, p.r_c, p.synthetic).expect("writing to a String");
    }
    out
}

pub fn report_json<T: Serialize>(value: &T) -> String {
    to_json(value)
}
