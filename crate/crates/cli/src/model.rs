//! Model selection: the builtin binary erasure/symmetric model or explicit
//! tables read from a TOML file.
//!
//! ```toml
//! # p(a,b,e) row-major over A x B x E, P(y,z|x) row-major over X x Y x Z
//! [source]
//! a_size = 2
//! b_size = 2
//! e_size = 2
//! p_abe = [0.2, 0.05, 0.1, 0.15, 0.15, 0.1, 0.05, 0.2]
//! distortion = [[0, 1], [1, 0]]   # optional, Hamming by default
//!
//! [channel]
//! x_size = 2
//! y_size = 2
//! z_size = 2
//! p_yz_given_x = [0.72, 0.18, 0.08, 0.02, 0.02, 0.08, 0.18, 0.72]
//! ```

use std::path::Path;

use rdeq::info::{CondPmf, DistortionMatrix, JointTable};
use rdeq::regions::{BroadcastChannel, SourceModel};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::CliError;

pub const BUILTIN: &str = "bec-bsc";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    source: SourceSection,
    channel: ChannelSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceSection {
    a_size: usize,
    b_size: usize,
    e_size: usize,
    p_abe: Vec<f64>,
    distortion: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    p_yz_given_x: Vec<f64>,
}

pub struct Model {
    pub source: SourceModel,
    pub channel: BroadcastChannel,
    /// `(β, ε, ζ)` when the builtin model is used.
    pub builtin: Option<(f64, f64, f64)>,
    pub description: Value,
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Model(e.to_string())
}

pub fn builtin(beta: f64, eps: f64, zeta: f64) -> Result<Model, CliError> {
    Ok(Model {
        source: SourceModel::bec_bsc(beta, eps).map_err(invalid)?,
        channel: BroadcastChannel::noiseless_bsc(zeta).map_err(invalid)?,
        builtin: Some((beta, eps, zeta)),
        description: json!({ "name": BUILTIN, "beta": beta, "eps": eps, "zeta": zeta }),
    })
}

pub fn load(name: &str, beta: f64, eps: f64, zeta: f64) -> Result<Model, CliError> {
    if name == BUILTIN {
        return builtin(beta, eps, zeta);
    }
    let text = std::fs::read_to_string(Path::new(name)).map_err(|e| invalid(format!("{name}: {e}")))?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        invalid(format!("{name}: {}", msg.lines().last().unwrap_or(&msg).trim()))
    })?;

    let s = &file.source;
    let p_abe = JointTable::new(vec![s.a_size, s.b_size, s.e_size], s.p_abe.clone()).map_err(invalid)?;
    let distortion = match &s.distortion {
        Some(rows) => DistortionMatrix::new(rows.clone()).map_err(invalid)?,
        None => DistortionMatrix::hamming(s.a_size),
    };
    let source = SourceModel::new(p_abe, distortion).map_err(invalid)?;

    let c = &file.channel;
    let cond = CondPmf::from_flat(c.x_size, c.y_size * c.z_size, c.p_yz_given_x.clone()).map_err(invalid)?;
    let channel = BroadcastChannel::new(cond, c.y_size, c.z_size).map_err(invalid)?;
    Ok(Model { source, channel, builtin: None, description: json!({ "file": name }) })
}
