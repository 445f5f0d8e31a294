//! Multi-start sequential linear programming over stochastic-matrix rows.
//!
//! Every restart linearizes the objective and the constraints around the
//! current point, solves the linear model inside a box trust region and
//! keeps the step if an exact penalty merit improves. The `[·]₊` bracket is
//! modelled by an epigraph variable, and all violated constraints share one
//! elastic slack, matching the merit's max-violation penalty. Only feasible
//! iterates are ever reported.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::stats::{ChannelStats, ChannelTables, SourceStats, SourceTables};
use super::{
    positive_part, AuxChannelSystem, AuxSourceSystem, BroadcastChannel, Constraint, ConstraintActivity,
    OptimizerConfig, RegionError, RegionOptimum, Result, SourceModel, RATE_TOLERANCE,
};
use crate::info::{CondPmf, Pmf};

const PENALTY: f64 = 100.0;
const IMPROVE_EPS: f64 = 1e-13;
const FD_STEP: f64 = 1e-7;
const PREDICTED_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BoundKind {
    Inner,
    Outer,
    /// Less-noisy side information: `U` absent, `H(A|E)` replaces `H(A|UE)`.
    Prop1,
    /// Less-noisy eavesdropper channel: `Q = T = X`, no wiretap term.
    Prop2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SourceShape {
    /// `p(v|a)`, `p(u|v)`.
    Chain,
    /// `p(u,v|a)`.
    Joint,
    /// `p(v|a)` only, `U` constant.
    VOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ChannelShape {
    /// `p(x)`, `p(t|x)`, `p(q|t)`.
    Full,
    /// `p(x)` only, `Q = T = X`.
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    VGivenA,
    UGivenV,
    UVGivenA,
    PX,
    TGivenX,
    QGivenT,
}

impl Role {
    fn is_source(self) -> bool {
        matches!(self, Role::VGivenA | Role::UGivenV | Role::UVGivenA)
    }
}

#[derive(Debug, Clone)]
struct Block {
    role: Role,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Block {
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    normalize(&mut v);
    v
}

fn vertex(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = 1.0;
    v
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    /// The objective is `base − [leak]₊`, or `base` alone when there is no bracket.
    base: f64,
    leak: Option<f64>,
    /// `(lhs, rhs)` of the common-layer rate, when the bound has one.
    common: Option<(f64, f64)>,
    private: (f64, f64),
    distortion: f64,
}

impl Outcome {
    fn delta(&self) -> f64 {
        self.base - self.leak.map_or(0.0, positive_part)
    }
}

pub(crate) struct SearchProblem<'a> {
    source: &'a SourceModel,
    src_tables: SourceTables,
    ch_tables: ChannelTables,
    k: f64,
    d_target: f64,
    bound: BoundKind,
    source_shape: SourceShape,
    channel_shape: ChannelShape,
    nu: usize,
    nv: usize,
    nt: usize,
    nq: usize,
    identity_x: Vec<f64>,
}

struct RestartOutcome {
    best: Option<(Vec<Block>, Outcome)>,
    /// Largest violation at the end of the restart and which constraint it was.
    final_violation: (f64, Constraint),
}

impl<'a> SearchProblem<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source: &'a SourceModel,
        channel: &BroadcastChannel,
        k: f64,
        d_target: f64,
        config: &OptimizerConfig,
        bound: BoundKind,
        source_shape: SourceShape,
        channel_shape: ChannelShape,
    ) -> Self {
        let (na, nb, ne, nx) = (source.a_size(), source.b_size(), source.e_size(), channel.x_size());
        let nu = match source_shape {
            SourceShape::VOnly => 1,
            _ => config.u_card.unwrap_or(na + 2),
        };
        let nv = config.v_card.unwrap_or(na + 2);
        let (nt, nq) = match channel_shape {
            ChannelShape::Full => (config.t_card.unwrap_or(nx + 2), config.q_card.unwrap_or(nx + 2)),
            ChannelShape::Transparent => (nx, nx),
        };
        Self {
            source,
            src_tables: SourceTables::new(source.p_abe().probs(), na, nb, ne),
            ch_tables: ChannelTables::new(
                channel.y_given_x().as_flat(),
                channel.z_given_x().as_flat(),
                nx,
                channel.y_size(),
                channel.z_size(),
            ),
            k,
            d_target,
            bound,
            source_shape,
            channel_shape,
            nu,
            nv,
            nt,
            nq,
            identity_x: CondPmf::identity(nx).as_flat().to_vec(),
        }
    }

    fn layout(&self) -> Vec<(Role, usize, usize)> {
        let (na, nx) = (self.src_tables.na, self.ch_tables.nx);
        let mut l = match self.source_shape {
            SourceShape::Chain => vec![(Role::VGivenA, na, self.nv), (Role::UGivenV, self.nv, self.nu)],
            SourceShape::Joint => vec![(Role::UVGivenA, na, self.nu * self.nv)],
            SourceShape::VOnly => vec![(Role::VGivenA, na, self.nv)],
        };
        l.push((Role::PX, 1, nx));
        if self.channel_shape == ChannelShape::Full {
            l.push((Role::TGivenX, nx, self.nt));
            l.push((Role::QGivenT, self.nt, self.nq));
        }
        l
    }

    fn block<'b>(&self, blocks: &'b [Block], role: Role) -> Option<&'b Block> {
        blocks.iter().find(|b| b.role == role)
    }

    /// `p(u,v|a)` laid out `(a·nu + u)·nv + v`.
    fn source_weights(&self, blocks: &[Block]) -> Vec<f64> {
        match self.source_shape {
            // both already use the (a, u, v) layout
            SourceShape::Joint => self.block(blocks, Role::UVGivenA).unwrap().data.clone(),
            SourceShape::VOnly => self.block(blocks, Role::VGivenA).unwrap().data.clone(),
            SourceShape::Chain => {
                let v = self.block(blocks, Role::VGivenA).unwrap();
                let u = self.block(blocks, Role::UGivenV).unwrap();
                let (na, nu, nv) = (self.src_tables.na, self.nu, self.nv);
                let mut w = vec![0.0; na * nu * nv];
                for a in 0..na {
                    for vv in 0..nv {
                        let pv = v.data[a * nv + vv];
                        if pv == 0.0 {
                            continue;
                        }
                        for uu in 0..nu {
                            w[(a * nu + uu) * nv + vv] = pv * u.data[vv * nu + uu];
                        }
                    }
                }
                w
            }
        }
    }

    fn source_stats(&self, blocks: &[Block]) -> SourceStats {
        self.src_tables.stats(&self.source_weights(blocks), self.nu, self.nv, self.source.distortion())
    }

    fn channel_stats(&self, blocks: &[Block]) -> ChannelStats {
        let px = &self.block(blocks, Role::PX).unwrap().data;
        match self.channel_shape {
            ChannelShape::Full => {
                let t = &self.block(blocks, Role::TGivenX).unwrap().data;
                let q = &self.block(blocks, Role::QGivenT).unwrap().data;
                self.ch_tables.stats(px, t, q, self.nt, self.nq)
            }
            ChannelShape::Transparent => self.ch_tables.stats(px, &self.identity_x, &self.identity_x, self.nt, self.nq),
        }
    }

    /// Whether the common-layer rate has to be imposed. With `|U| = 1` it
    /// reads `0 ≤ k I(Q;Y)`; with `Q = T = X` it follows from the private
    /// rate because `I(U;A|B) ≤ I(V;A|B)` along the chain.
    fn common_constrained(&self) -> bool {
        self.bound == BoundKind::Inner && self.nu > 1 && self.channel_shape == ChannelShape::Full
    }

    fn combine(&self, s: &SourceStats, c: &ChannelStats) -> Outcome {
        let k = self.k;
        let (base, leak) = match self.bound {
            // with Q = T = X the wiretap term vanishes, and along the chain
            // H(A|UE) − I(V;A|UB) = H(A|VB) + I(A;B|U) − I(A;E|U)
            BoundKind::Inner | BoundKind::Prop2 if self.channel_shape == ChannelShape::Transparent => {
                (s.h_a_given_vb + s.i_ab_given_u - s.i_ae_given_u, None)
            }
            // U is constant in the VOnly shape, so these are H(A|E) and
            // I(V;A|B) computed along the same arithmetic path as the inner
            // bound with |U| = 1
            BoundKind::Inner | BoundKind::Prop1 => (s.h_a_given_ue, Some(s.i_va_given_ub - k * c.secrecy)),
            BoundKind::Outer => (s.h_a_given_ue, Some(s.i_va_given_b - s.i_ua_given_b - k * c.secrecy)),
            BoundKind::Prop2 => unreachable!("the less-noisy channel case always forces Q = T = X"),
        };
        let private_rhs = match self.channel_shape {
            ChannelShape::Full => k * c.i_ty,
            ChannelShape::Transparent => k * c.i_xy,
        };
        Outcome {
            base,
            leak,
            common: (self.bound == BoundKind::Inner).then_some((s.i_ua_given_b, k * c.i_qy)),
            private: (s.i_va_given_b, private_rhs),
            distortion: s.distortion,
        }
    }

    /// `lhs − rhs` of every imposed constraint.
    fn violations(&self, o: &Outcome) -> Vec<(f64, Constraint)> {
        let mut v = Vec::with_capacity(3);
        if self.common_constrained() {
            let (l, r) = o.common.expect("inner bound");
            v.push((l - r, Constraint::CommonRate));
        }
        v.push((o.private.0 - o.private.1, Constraint::PrivateRate));
        v.push((o.distortion - self.d_target, Constraint::Distortion));
        v
    }

    fn worst_violation(&self, o: &Outcome) -> (f64, Constraint) {
        self.violations(o)
            .into_iter()
            .fold((f64::NEG_INFINITY, Constraint::PrivateRate), |w, c| if c.0 > w.0 { c } else { w })
    }

    fn merit(&self, o: &Outcome) -> f64 {
        o.delta() - PENALTY * positive_part(self.worst_violation(o).0)
    }

    fn feasible(&self, o: &Outcome) -> bool {
        self.worst_violation(o).0 <= RATE_TOLERANCE
    }

    fn initial(&self, restart: usize, rng: &mut ChaCha8Rng) -> Vec<Block> {
        let strategy = restart % 4;
        let jitter = if restart < 4 { 0.0 } else { 0.5 * rng.random::<f64>() };
        let mut blocks = Vec::new();
        for (role, rows, cols) in self.layout() {
            let mut data = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                if cols == 1 {
                    data.push(1.0);
                    continue;
                }
                let mut row = match (strategy, role) {
                    (3, _) => dirichlet(rng, cols),
                    (_, Role::PX) => vec![1.0 / cols as f64; cols],
                    (0, _) | (_, Role::VGivenA | Role::TGivenX) => vertex(cols, i % cols),
                    (1, Role::UVGivenA) => {
                        let du = dirichlet(rng, self.nu);
                        let mut row = vec![0.0; cols];
                        for (u, p) in du.into_iter().enumerate() {
                            row[u * self.nv + i % self.nv] = p;
                        }
                        row
                    }
                    (1, _) => dirichlet(rng, cols),
                    (_, Role::UVGivenA) => vertex(cols, i % self.nv),
                    _ => vertex(cols, 0),
                };
                if jitter > 0.0 {
                    let noise = dirichlet(rng, cols);
                    row.iter_mut().zip(noise).for_each(|(x, n)| *x = (1.0 - jitter) * *x + jitter * n);
                }
                data.extend(row);
            }
            blocks.push(Block { role, rows, cols, data });
        }
        blocks
    }

    fn evaluate(&self, blocks: &[Block]) -> (SourceStats, ChannelStats, Outcome) {
        let src = self.source_stats(blocks);
        let ch = self.channel_stats(blocks);
        let out = self.combine(&src, &ch);
        (src, ch, out)
    }

    /// Scalars the linear model is built from: the smooth part of the
    /// objective, the bracketed leak, and each imposed violation.
    fn model_values(&self, o: &Outcome) -> Vec<f64> {
        let mut v = vec![o.base, o.leak.unwrap_or(0.0)];
        v.extend(self.violations(o).into_iter().map(|c| c.0));
        v
    }

    /// Sequential linear programming with a box trust region. Gradients are
    /// forward differences along each row entry followed by renormalization,
    /// which is the derivative along `e_j − row` and therefore exact for
    /// steps that keep the row sum fixed.
    fn ascend(&self, mut blocks: Vec<Block>, config: &OptimizerConfig) -> RestartOutcome {
        let movable: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.cols > 1)
            .flat_map(|(i, b)| (0..b.rows).map(move |r| (i, r)))
            .collect();

        let (mut src, mut ch, mut out) = self.evaluate(&blocks);
        let mut merit = self.merit(&out);
        let mut best: Option<(Vec<Block>, Outcome)> = None;
        let record = |blocks: &[Block], out: &Outcome, best: &mut Option<(Vec<Block>, Outcome)>| {
            if self.feasible(out) && best.as_ref().is_none_or(|(_, b)| out.delta() > b.delta()) {
                *best = Some((blocks.to_vec(), *out));
            }
        };
        record(&blocks, &out, &mut best);

        let mut radius = 1.0;
        for _ in 0..config.max_iterations {
            if movable.is_empty() || radius < config.tolerance {
                break;
            }
            let values = self.model_values(&out);
            let mut gradients: Vec<Vec<f64>> = Vec::new();
            for &(b, r) in &movable {
                let source_side = blocks[b].role.is_source();
                for j in 0..blocks[b].cols {
                    let saved = blocks[b].row(r).to_vec();
                    let row = blocks[b].row_mut(r);
                    row[j] += FD_STEP;
                    normalize(row);
                    let moved = if source_side {
                        self.combine(&self.source_stats(&blocks), &ch)
                    } else {
                        self.combine(&src, &self.channel_stats(&blocks))
                    };
                    blocks[b].row_mut(r).copy_from_slice(&saved);
                    let g = self.model_values(&moved).iter().zip(&values).map(|(m, v)| (m - v) / FD_STEP).collect();
                    gradients.push(g);
                }
            }

            let Some(step) = self.lp_step(&blocks, &movable, &values, &gradients, out.leak.is_some(), radius) else {
                radius *= 0.5;
                continue;
            };
            let saved = blocks.clone();
            let mut idx = 0;
            for &(b, r) in &movable {
                let row = blocks[b].row_mut(r);
                for x in row.iter_mut() {
                    *x = (*x + step[idx]).max(0.0);
                    idx += 1;
                }
                normalize(row);
            }
            let (new_src, new_ch, new_out) = self.evaluate(&blocks);
            let new_merit = self.merit(&new_out);
            if new_merit > merit + IMPROVE_EPS {
                (src, ch, out, merit) = (new_src, new_ch, new_out, new_merit);
                record(&blocks, &out, &mut best);
                radius = (radius * 2.0).min(1.0);
            } else {
                blocks = saved;
                radius *= 0.5;
            }
        }
        RestartOutcome { best, final_violation: self.worst_violation(&out) }
    }

    /// Solves the linearized problem inside the trust region; `None` when
    /// the model predicts no gain.
    fn lp_step(
        &self,
        blocks: &[Block],
        movable: &[(usize, usize)],
        values: &[f64],
        gradients: &[Vec<f64>],
        has_leak: bool,
        radius: f64,
    ) -> Option<Vec<f64>> {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let mut vars = Vec::with_capacity(gradients.len());
        let mut idx = 0;
        for &(b, r) in movable {
            let row = blocks[b].row(r);
            let mut row_vars = Vec::with_capacity(row.len());
            for &x in row {
                let v = lp.add_var(gradients[idx][0], ((-x).max(-radius), (1.0 - x).min(radius)));
                row_vars.push((v, 1.0));
                vars.push(v);
                idx += 1;
            }
            lp.add_constraint(&row_vars, ComparisonOp::Eq, 0.0);
        }
        let linear = |m: usize, extra: microlp::Variable| {
            let mut expr: Vec<_> = vars.iter().zip(gradients).map(|(&v, g)| (v, -g[m])).collect();
            expr.push((extra, 1.0));
            expr
        };
        if has_leak {
            let w = lp.add_var(-1.0, (0.0, f64::INFINITY));
            lp.add_constraint(linear(1, w), ComparisonOp::Ge, values[1]);
        }
        let s = lp.add_var(-PENALTY, (0.0, f64::INFINITY));
        for (m, &value) in values.iter().enumerate().skip(2) {
            lp.add_constraint(linear(m, s), ComparisonOp::Ge, value);
        }
        let outcome = lp.solve().ok()?;
        let solution = outcome.solution()?;
        // objective of the current point inside the same model
        let current = -positive_part(values[1]) * f64::from(u8::from(has_leak))
            - PENALTY * values[2..].iter().copied().fold(0.0, f64::max);
        let predicted = solution.objective() - current;
        (predicted > PREDICTED_GAIN).then(|| vars.iter().map(|&v| solution[v]).collect())
    }

    pub fn optimize(
        &self,
        config: &OptimizerConfig,
        starts: &[(AuxSourceSystem, AuxChannelSystem)],
    ) -> Result<RegionOptimum> {
        let start_blocks = starts.iter().map(|(s, c)| self.blocks_from(s, c)).collect::<Result<Vec<_>>>()?;
        let total = config.restarts + start_blocks.len();
        let outcomes: Vec<RestartOutcome> = (0..total)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                let init = match r.checked_sub(config.restarts) {
                    None => self.initial(r, &mut rng),
                    Some(i) => start_blocks[i].clone(),
                };
                self.ascend(init, config)
            })
            .collect();

        let mut winner: Option<&(Vec<Block>, Outcome)> = None;
        for o in &outcomes {
            if let Some(candidate) = &o.best {
                if winner.is_none_or(|w| candidate.1.delta() > w.1.delta()) {
                    winner = Some(candidate);
                }
            }
        }
        let Some((blocks, out)) = winner else {
            let (violation, constraint) = outcomes
                .iter()
                .map(|o| o.final_violation)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("at least one restart");
            return Err(RegionError::Infeasible { constraint, violation });
        };
        let (source, channel) = self.systems(blocks)?;
        Ok(RegionOptimum {
            delta: out.delta(),
            distortion: out.distortion,
            source,
            channel,
            activity: ConstraintActivity {
                common_rate_slack: out.common.map(|(l, r)| r - l),
                private_rate_slack: out.private.1 - out.private.0,
                distortion_slack: self.d_target - out.distortion,
            },
        })
    }

    fn systems(&self, blocks: &[Block]) -> Result<(AuxSourceSystem, AuxChannelSystem)> {
        let na = self.src_tables.na;
        let cond = |b: &Block| CondPmf::from_flat(b.rows, b.cols, b.data.clone());
        let source = match self.source_shape {
            SourceShape::Chain => AuxSourceSystem::chain(
                self.source,
                cond(self.block(blocks, Role::VGivenA).unwrap())?,
                cond(self.block(blocks, Role::UGivenV).unwrap())?,
            )?,
            SourceShape::VOnly => AuxSourceSystem::chain(
                self.source,
                cond(self.block(blocks, Role::VGivenA).unwrap())?,
                CondPmf::constant(self.nv, 1, 0)?,
            )?,
            SourceShape::Joint => AuxSourceSystem::joint(
                self.source,
                CondPmf::from_flat(na, self.nu * self.nv, self.block(blocks, Role::UVGivenA).unwrap().data.clone())?,
                self.nu,
                self.nv,
            )?,
        };
        let p_x = Pmf::new(self.block(blocks, Role::PX).unwrap().data.clone())?;
        let channel = match self.channel_shape {
            ChannelShape::Full => AuxChannelSystem::new(
                p_x,
                cond(self.block(blocks, Role::TGivenX).unwrap())?,
                cond(self.block(blocks, Role::QGivenT).unwrap())?,
            )?,
            ChannelShape::Transparent => AuxChannelSystem::transparent(p_x),
        };
        Ok((source, channel))
    }

    /// Embeds caller-supplied systems into this problem's parameter blocks,
    /// padding smaller auxiliary alphabets with never-used symbols.
    fn blocks_from(&self, source: &AuxSourceSystem, channel: &AuxChannelSystem) -> Result<Vec<Block>> {
        let mismatch = |what: &str| RegionError::DimensionMismatch(format!("starting point: {what}"));
        let (na, nx) = (self.src_tables.na, self.ch_tables.nx);
        if source.u_size() > self.nu || source.v_size() > self.nv {
            return Err(mismatch("auxiliary source alphabet larger than configured"));
        }
        let (su, sv) = (source.u_size(), source.v_size());
        let mut blocks = Vec::new();
        for (role, rows, cols) in self.layout() {
            let mut data = vec![0.0; rows * cols];
            match role {
                Role::VGivenA => {
                    let v = source.v_given_a();
                    for a in 0..na {
                        data[a * cols..a * cols + sv].copy_from_slice(v.row(a));
                    }
                }
                Role::UGivenV => {
                    let AuxSourceSystem::Chain { u_given_v, .. } = source else {
                        return Err(mismatch("chain structure required"));
                    };
                    for v in 0..rows {
                        if v < sv {
                            data[v * cols..v * cols + su].copy_from_slice(u_given_v.row(v));
                        } else {
                            data[v * cols] = 1.0;
                        }
                    }
                }
                Role::UVGivenA => {
                    let uv = source.uv_given_a();
                    for a in 0..na {
                        for u in 0..su {
                            for v in 0..sv {
                                data[a * cols + u * self.nv + v] = uv.get(a, u * sv + v);
                            }
                        }
                    }
                }
                Role::PX => {
                    if channel.p_x.len() != nx {
                        return Err(mismatch("p(x) size"));
                    }
                    data.copy_from_slice(channel.p_x.probs());
                }
                Role::TGivenX => {
                    let st = channel.t_given_x.output_size();
                    if st > self.nt {
                        return Err(mismatch("|T| larger than configured"));
                    }
                    for x in 0..nx {
                        data[x * cols..x * cols + st].copy_from_slice(channel.t_given_x.row(x));
                    }
                }
                Role::QGivenT => {
                    let (st, sq) = (channel.q_given_t.input_size(), channel.q_given_t.output_size());
                    if sq > self.nq {
                        return Err(mismatch("|Q| larger than configured"));
                    }
                    for t in 0..rows {
                        if t < st {
                            data[t * cols..t * cols + sq].copy_from_slice(channel.q_given_t.row(t));
                        } else {
                            data[t * cols] = 1.0;
                        }
                    }
                }
            }
            blocks.push(Block { role, rows, cols, data });
        }
        Ok(blocks)
    }
}
