//! Tabulation of both bounds over a grid of `(k, D)` targets.

use super::{
    optimize_inner_with, optimize_outer_with, AuxChannelSystem, AuxSourceSystem, BroadcastChannel, ChannelAuxiliaries,
    OptimizerConfig, RegionOptimum, Result, SourceModel,
};

/// One grid point. Each bound is either its optimum or the error that
/// prevented it (typically infeasibility).
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub k: f64,
    pub d: f64,
    pub inner: Result<RegionOptimum>,
    pub outer: Result<RegionOptimum>,
}

/// Runs both optimizers at every `(k, D)` pair, `k` outermost.
///
/// Each inner run is also started from the inner optima of already
/// computed points with smaller-or-equal `k` and `D` (those systems stay
/// feasible when the targets loosen), and each outer run from the inner
/// optimum at the same point.
pub fn frontier_sweep(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k_list: &[f64],
    d_list: &[f64],
    config: &OptimizerConfig,
) -> Vec<FrontierPoint> {
    let mut points: Vec<FrontierPoint> = Vec::with_capacity(k_list.len() * d_list.len());
    for &k in k_list {
        for &d in d_list {
            let best_dominated = points
                .iter()
                .filter(|p| p.k <= k && p.d <= d)
                .filter_map(|p| p.inner.as_ref().ok())
                .max_by(|a, b| a.delta.total_cmp(&b.delta));
            let starts: Vec<(AuxSourceSystem, AuxChannelSystem)> =
                best_dominated.map(|o| (o.source.clone(), o.channel.clone())).into_iter().collect();
            let inner = optimize_inner_with(source, channel, k, d, config, ChannelAuxiliaries::Free, &starts);
            let outer_starts: Vec<_> = inner.iter().map(|o| (o.source.clone(), o.channel.clone())).collect();
            let outer = optimize_outer_with(source, channel, k, d, config, &outer_starts);
            points.push(FrontierPoint { k, d, inner, outer });
        }
    }
    points
}
