//! Record assembly and number formatting.

use rdeq::info::CondPmf;
use rdeq::regions::{AuxChannelSystem, AuxSourceSystem, ConstraintActivity, RegionOptimum};
use serde_json::{json, Value};

/// Decimal places of every number in a record.
pub const RECORD_DECIMALS: i32 = 6;
/// Significant digits of every number in a CSV file.
pub const CSV_SIGNIFICANT: usize = 9;

pub fn round(x: f64) -> f64 {
    let scale = 10f64.powi(RECORD_DECIMALS);
    // + 0.0 turns -0.0 into 0.0
    (x * scale).round() / scale + 0.0
}

fn rounded(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| round(x)).collect()
}

fn matrix(c: &CondPmf) -> Vec<Vec<f64>> {
    c.rows().map(rounded).collect()
}

pub fn record(command: &str, inputs: Value, results: Value, provenance: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "results": results,
        "provenance": provenance,
    })
}

pub fn provenance(seed: Option<u64>, config: Value) -> Value {
    json!({
        "seed": seed,
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// One line, keys sorted.
pub fn render(record: &Value) -> String {
    serde_json::to_string(record).expect("JSON values always serialize")
}

pub fn activity(a: &ConstraintActivity) -> Value {
    json!({
        "common_rate_slack": a.common_rate_slack.map(round),
        "common_rate_active": a.common_rate_slack.map(|_| a.common_rate_active()),
        "private_rate_slack": round(a.private_rate_slack),
        "private_rate_active": a.private_rate_active(),
        "distortion_slack": round(a.distortion_slack),
        "distortion_active": a.distortion_active(),
    })
}

pub fn source_system(s: &AuxSourceSystem) -> Value {
    let reconstruction = s.reconstruction().table().to_vec();
    match s {
        AuxSourceSystem::Chain { v_given_a, u_given_v, .. } => json!({
            "structure": "chain",
            "v_given_a": matrix(v_given_a),
            "u_given_v": matrix(u_given_v),
            "reconstruction": reconstruction,
        }),
        AuxSourceSystem::Joint { uv_given_a, u_size, v_size, .. } => json!({
            "structure": "joint",
            "u_size": u_size,
            "v_size": v_size,
            "uv_given_a": matrix(uv_given_a),
            "reconstruction": reconstruction,
        }),
    }
}

pub fn channel_system(c: &AuxChannelSystem) -> Value {
    json!({
        "p_x": rounded(c.p_x.probs()),
        "t_given_x": matrix(&c.t_given_x),
        "q_given_t": matrix(&c.q_given_t),
    })
}

pub fn optimum(k: f64, d: f64, o: &RegionOptimum) -> Value {
    json!({
        "k": round(k),
        "D": round(d),
        "delta": round(o.delta),
        "distortion": round(o.distortion),
        "activity": activity(&o.activity),
        "argmax": { "source": source_system(&o.source), "channel": channel_system(&o.channel) },
    })
}

/// `x` rounded to [`CSV_SIGNIFICANT`] significant digits, shortest form.
pub fn csv_number(x: f64) -> String {
    let rounded: f64 = format!("{x:.prec$e}", prec = CSV_SIGNIFICANT - 1).parse().unwrap_or(x);
    format!("{:?}", rounded + 0.0)
}
