//! Regions that collapse under an ordering of the side informations or of
//! the channel branches, and the closed form for the binary example.

use super::search::{BoundKind, ChannelShape, SearchProblem, SourceShape};
use super::{
    check_targets, positive_part, AuxChannelSystem, AuxSourceSystem, BroadcastChannel, OptimizerConfig, RegionError,
    RegionOptimum, Result, SourceModel, RATE_TOLERANCE,
};
use crate::info::{h2_unchecked, star_unchecked, CondPmf, Pmf};

/// Maximizes `H(A|E) − [I(V;A|B) − k(I(T;Y|Q) − I(T;Z|Q))]₊` subject to
/// `I(V;A|B) ≤ k I(T;Y)` and `D ≤ d_target`. Valid when Bob's side
/// information is less noisy than Eve's; the caller is responsible for that.
pub fn prop1_max_delta(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
) -> Result<RegionOptimum> {
    check_targets(source, k, d_target)?;
    config.validate()?;
    SearchProblem::new(source, channel, k, d_target, config, BoundKind::Prop1, SourceShape::VOnly, ChannelShape::Full)
        .optimize(config, &[])
}

/// Maximizes `H(A|VB) + I(A;B|U) − I(A;E|U)` subject to `I(V;A|B) ≤ k I(X;Y)`
/// and `D ≤ d_target`. Valid when Eve's channel output is less noisy than
/// Bob's; the caller is responsible for that.
pub fn prop2_max_delta(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
) -> Result<RegionOptimum> {
    check_targets(source, k, d_target)?;
    config.validate()?;
    SearchProblem::new(
        source,
        channel,
        k,
        d_target,
        config,
        BoundKind::Prop2,
        SourceShape::Chain,
        ChannelShape::Transparent,
    )
    .optimize(config, &[])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop3Value {
    /// `β(1 − h₂(u)) ≤ 1 − h₂(q)`.
    pub constraint_ok: bool,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop3Optimum {
    pub delta: f64,
    pub u: f64,
    pub q: f64,
}

fn check_unit(name: &str, x: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&x) {
        return Err(RegionError::Domain(format!("{name} = {x} not in [0, {hi}]")));
    }
    Ok(())
}

fn check_model(beta: f64, eps: f64, zeta: f64) -> Result<()> {
    check_unit("beta", beta, 1.0)?;
    check_unit("eps", eps, 0.5)?;
    check_unit("zeta", zeta, 0.5)
}

fn prop3_unchecked(beta: f64, eps: f64, zeta: f64, u: f64, q: f64) -> Prop3Value {
    let (hu, hq) = (h2_unchecked(u), h2_unchecked(q));
    let secrecy = h2_unchecked(zeta) + hq - h2_unchecked(star_unchecked(zeta, q));
    Prop3Value {
        constraint_ok: beta * (1.0 - hu) <= 1.0 - hq + RATE_TOLERANCE,
        delta: h2_unchecked(eps) + hu - h2_unchecked(star_unchecked(eps, u)) - positive_part(beta * hu - secrecy),
    }
}

/// Closed-form equivocation of the binary example: uniform source, Bob
/// through BEC(β), Eve through BSC(ε), noiseless main channel and BSC(ζ)
/// to Eve, one channel use per symbol, `U` and `Q` binary symmetric with
/// parameters `u` and `q`.
pub fn prop3_delta(beta: f64, eps: f64, zeta: f64, u: f64, q: f64) -> Result<Prop3Value> {
    check_model(beta, eps, zeta)?;
    check_unit("u", u, 0.5)?;
    check_unit("q", q, 0.5)?;
    Ok(prop3_unchecked(beta, eps, zeta, u, q))
}

const REFINE_POINTS: usize = 21;
const REFINE_ROUNDS: usize = 40;

/// Grid search of [`prop3_delta`] over `[0, 1/2]²` followed by repeated
/// zooming around the best feasible point.
pub fn prop3_max_delta(beta: f64, eps: f64, zeta: f64, resolution: usize) -> Result<Prop3Optimum> {
    check_model(beta, eps, zeta)?;
    if resolution < 100 {
        return Err(RegionError::Domain(format!("resolution {resolution} below 100")));
    }
    let mut best: Option<Prop3Optimum> = None;
    let consider = |u: f64, q: f64, best: &mut Option<Prop3Optimum>| {
        let v = prop3_unchecked(beta, eps, zeta, u, q);
        if v.constraint_ok && best.is_none_or(|b| v.delta > b.delta) {
            *best = Some(Prop3Optimum { delta: v.delta, u, q });
        }
    };
    let step = 0.5 / (resolution - 1) as f64;
    for i in 0..resolution {
        for j in 0..resolution {
            consider(i as f64 * step, j as f64 * step, &mut best);
        }
    }
    // u = 0 is always feasible, so a point exists
    let mut half = step;
    for _ in 0..REFINE_ROUNDS {
        let c = best.expect("u = 0 is feasible");
        for i in 0..REFINE_POINTS {
            for j in 0..REFINE_POINTS {
                let off = |n: usize| -half + 2.0 * half * n as f64 / (REFINE_POINTS - 1) as f64;
                let u = (c.u + off(i)).clamp(0.0, 0.5);
                let q = (c.q + off(j)).clamp(0.0, 0.5);
                consider(u, q, &mut best);
            }
        }
        half *= 0.5;
    }
    Ok(best.expect("u = 0 is feasible"))
}

/// The binary system whose inner-bound value is [`prop3_delta`]: the
/// source and channel models, `V = A`, `U` = BSC(u) of `V`, uniform `X`,
/// `T = X` and `Q` = BSC(q) of `T`.
pub fn bec_bsc_prop3_system(
    beta: f64,
    eps: f64,
    zeta: f64,
    u: f64,
    q: f64,
) -> Result<(SourceModel, BroadcastChannel, AuxSourceSystem, AuxChannelSystem)> {
    check_model(beta, eps, zeta)?;
    check_unit("u", u, 0.5)?;
    check_unit("q", q, 0.5)?;
    let source = SourceModel::bec_bsc(beta, eps)?;
    let channel = BroadcastChannel::noiseless_bsc(zeta)?;
    let aux_source = AuxSourceSystem::chain(&source, CondPmf::identity(2), CondPmf::bsc(u)?)?;
    let aux_channel = AuxChannelSystem::new(Pmf::uniform(2)?, CondPmf::identity(2), CondPmf::bsc(q)?)?;
    Ok((source, channel, aux_source, aux_channel))
}
