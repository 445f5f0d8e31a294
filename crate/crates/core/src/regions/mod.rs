//! Inner and outer bounds on the rate-distortion-equivocation region, their
//! special cases, and the optimizers that trace the achievable equivocation.
//!
//! Variables are `U, V` (source auxiliaries), `A, B, E` (source, Bob's and
//! Eve's side information), `Q, T` (channel auxiliaries) and `X, Y, Z`
//! (channel input, Bob's and Eve's outputs). Source and channel variables
//! are independent, so every bound term is computed on one of the two
//! sub-joints `p(u,v,a,b,e)` and `p(q,t,x,y,z)`.

mod frontier;
mod search;
mod special;
mod stats;

pub use frontier::{frontier_sweep, FrontierPoint};
pub use special::{
    bec_bsc_prop3_system, prop1_max_delta, prop2_max_delta, prop3_delta, prop3_max_delta, Prop3Optimum, Prop3Value,
};

use thiserror::Error;

use crate::info::{
    assemble_joint, conditional_entropy, conditional_mutual_information, mutual_information, CondPmf, DistortionMatrix,
    Factor, InfoError, JointTable, Pmf,
};

use search::{BoundKind, ChannelShape, SearchProblem, SourceShape};

/// Rate and distortion inequalities are non-strict up to this slack.
pub const RATE_TOLERANCE: f64 = 1e-9;

/// A constraint whose slack is below this is reported as active.
pub const ACTIVE_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("auxiliary system has the wrong structure: {0}")]
    WrongMode(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("no feasible auxiliary system found; `{constraint}` violated by {violation:.3e}")]
    Infeasible { constraint: Constraint, violation: f64 },
}

pub type Result<T> = std::result::Result<T, RegionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `I(U;A|B) ≤ k I(Q;Y)`.
    CommonRate,
    /// `I(V;A|B) ≤ k I(T;Y)` (or `k I(X;Y)` when the channel is forced).
    PrivateRate,
    Distortion,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Constraint::CommonRate => "common-layer rate",
            Constraint::PrivateRate => "private-layer rate",
            Constraint::Distortion => "distortion",
        })
    }
}

pub(crate) fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Joint source `p(a,b,e)` together with the distortion measure on `A × A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    p_abe: JointTable,
    distortion: DistortionMatrix,
}

impl SourceModel {
    pub fn new(p_abe: JointTable, distortion: DistortionMatrix) -> Result<Self> {
        if p_abe.ndim() != 3 {
            return Err(RegionError::DimensionMismatch(format!("p(a,b,e) needs 3 axes, got {}", p_abe.ndim())));
        }
        let a = p_abe.dims()[0];
        if distortion.source_size() != a || distortion.reconstruction_size() != a {
            return Err(RegionError::DimensionMismatch(format!(
                "distortion is {}x{}, source alphabet has {a} symbols",
                distortion.source_size(),
                distortion.reconstruction_size()
            )));
        }
        Ok(Self { p_abe, distortion })
    }

    /// `p(a) p(b|a) p(e|a)`: side informations conditionally independent given the source.
    pub fn from_channels(
        p_a: &Pmf,
        b_given_a: &CondPmf,
        e_given_a: &CondPmf,
        distortion: DistortionMatrix,
    ) -> Result<Self> {
        let sizes = [p_a.len(), b_given_a.output_size(), e_given_a.output_size()];
        if b_given_a.input_size() != p_a.len() || e_given_a.input_size() != p_a.len() {
            return Err(RegionError::DimensionMismatch("side-information links vs source".into()));
        }
        let joint = assemble_joint(
            &sizes,
            &[
                Factor::marginal(vec![0], p_a),
                Factor::conditional(vec![0], vec![1], b_given_a.clone()),
                Factor::conditional(vec![0], vec![2], e_given_a.clone()),
            ],
        )?;
        Self::new(joint, distortion)
    }

    /// Uniform binary source, Bob observes it through BEC(β) and Eve through
    /// BSC(ε), Hamming distortion.
    pub fn bec_bsc(beta: f64, eps: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&eps) {
            return Err(RegionError::Domain(format!("eps {eps} not in [0, 1/2]")));
        }
        Self::from_channels(&Pmf::uniform(2)?, &CondPmf::bec(beta)?, &CondPmf::bsc(eps)?, DistortionMatrix::hamming(2))
    }

    pub fn p_abe(&self) -> &JointTable {
        &self.p_abe
    }

    pub fn distortion(&self) -> &DistortionMatrix {
        &self.distortion
    }

    pub fn a_size(&self) -> usize {
        self.p_abe.dims()[0]
    }

    pub fn b_size(&self) -> usize {
        self.p_abe.dims()[1]
    }

    pub fn e_size(&self) -> usize {
        self.p_abe.dims()[2]
    }

    pub fn p_a(&self) -> Vec<f64> {
        self.p_abe.marginal(&[0]).expect("axis 0 exists").probs().to_vec()
    }

    fn conditional_link(&self, axis: usize) -> CondPmf {
        let joint = self.p_abe.marginal(&[0, axis]).expect("axes exist");
        let out = joint.dims()[1];
        let rows = joint
            .probs()
            .chunks(out)
            .map(|row| {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    row.iter().map(|p| p / s).collect()
                } else {
                    vec![1.0 / out as f64; out]
                }
            })
            .collect();
        CondPmf::new(rows).expect("normalized rows")
    }

    /// `p(b|a)`; rows for zero-probability source symbols are uniform.
    pub fn b_given_a(&self) -> CondPmf {
        self.conditional_link(1)
    }

    /// `p(e|a)`; rows for zero-probability source symbols are uniform.
    pub fn e_given_a(&self) -> CondPmf {
        self.conditional_link(2)
    }

    /// `H(A|E)`.
    pub fn equivocation_without_coding(&self) -> f64 {
        conditional_entropy(&self.p_abe, &[0], &[2]).expect("valid axes")
    }
}

/// Broadcast channel `P(y,z|x)`; the output index is `y·|Z| + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastChannel {
    p_yz_given_x: CondPmf,
    y_size: usize,
    z_size: usize,
}

impl BroadcastChannel {
    pub fn new(p_yz_given_x: CondPmf, y_size: usize, z_size: usize) -> Result<Self> {
        if y_size * z_size != p_yz_given_x.output_size() {
            return Err(RegionError::DimensionMismatch(format!(
                "{} outputs cannot be split as {y_size}x{z_size}",
                p_yz_given_x.output_size()
            )));
        }
        Ok(Self { p_yz_given_x, y_size, z_size })
    }

    /// Outputs conditionally independent given the input.
    pub fn from_marginals(y_given_x: &CondPmf, z_given_x: &CondPmf) -> Result<Self> {
        if y_given_x.input_size() != z_given_x.input_size() {
            return Err(RegionError::DimensionMismatch("branches have different inputs".into()));
        }
        let (ny, nz) = (y_given_x.output_size(), z_given_x.output_size());
        let mut data = Vec::with_capacity(y_given_x.input_size() * ny * nz);
        for x in 0..y_given_x.input_size() {
            for y in 0..ny {
                for z in 0..nz {
                    data.push(y_given_x.get(x, y) * z_given_x.get(x, z));
                }
            }
        }
        Self::new(CondPmf::from_flat(y_given_x.input_size(), ny * nz, data)?, ny, nz)
    }

    /// Binary channel that is noiseless to Bob and a BSC(ζ) to Eve.
    pub fn noiseless_bsc(zeta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&zeta) {
            return Err(RegionError::Domain(format!("zeta {zeta} not in [0, 1/2]")));
        }
        Self::from_marginals(&CondPmf::identity(2), &CondPmf::bsc(zeta)?)
    }

    pub fn p_yz_given_x(&self) -> &CondPmf {
        &self.p_yz_given_x
    }

    pub fn x_size(&self) -> usize {
        self.p_yz_given_x.input_size()
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn y_given_x(&self) -> CondPmf {
        self.branch(true)
    }

    pub fn z_given_x(&self) -> CondPmf {
        self.branch(false)
    }

    fn branch(&self, bob: bool) -> CondPmf {
        let out = if bob { self.y_size } else { self.z_size };
        let mut data = vec![0.0; self.x_size() * out];
        for x in 0..self.x_size() {
            for y in 0..self.y_size {
                for z in 0..self.z_size {
                    let o = if bob { y } else { z };
                    data[x * out + o] += self.p_yz_given_x.get(x, y * self.z_size + z);
                }
            }
        }
        CondPmf::from_flat(self.x_size(), out, data).expect("marginal of a valid channel")
    }
}

/// Deterministic reconstruction `Â(v, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    v_size: usize,
    b_size: usize,
    map: Vec<usize>,
}

impl Reconstruction {
    pub fn new(v_size: usize, b_size: usize, map: Vec<usize>) -> Result<Self> {
        if map.len() != v_size * b_size {
            return Err(RegionError::DimensionMismatch(format!(
                "reconstruction table has {} entries, expected {}",
                map.len(),
                v_size * b_size
            )));
        }
        Ok(Self { v_size, b_size, map })
    }

    pub fn get(&self, v: usize, b: usize) -> usize {
        self.map[v * self.b_size + b]
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn b_size(&self) -> usize {
        self.b_size
    }

    pub fn table(&self) -> &[usize] {
        &self.map
    }
}

/// Source-side auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxSourceSystem {
    /// `p(u|v) p(v|a)`, the `U — V — A — (B,E)` structure of the inner bound.
    Chain { v_given_a: CondPmf, u_given_v: CondPmf, reconstruction: Reconstruction },
    /// `p(u,v|a)` with output index `u·|V| + v`, the outer-bound structure.
    Joint { uv_given_a: CondPmf, u_size: usize, v_size: usize, reconstruction: Reconstruction },
}

impl AuxSourceSystem {
    /// Chain system with the distortion-minimizing reconstruction.
    pub fn chain(source: &SourceModel, v_given_a: CondPmf, u_given_v: CondPmf) -> Result<Self> {
        if u_given_v.input_size() != v_given_a.output_size() {
            return Err(RegionError::DimensionMismatch("p(u|v) inputs vs |V|".into()));
        }
        let (reconstruction, _) = best_reconstruction(source, &v_given_a)?;
        Ok(Self::Chain { v_given_a, u_given_v, reconstruction })
    }

    /// Joint system with the distortion-minimizing reconstruction.
    pub fn joint(source: &SourceModel, uv_given_a: CondPmf, u_size: usize, v_size: usize) -> Result<Self> {
        if uv_given_a.output_size() != u_size * v_size {
            return Err(RegionError::DimensionMismatch("p(u,v|a) outputs vs |U||V|".into()));
        }
        let v_given_a = marginal_v(&uv_given_a, u_size, v_size);
        let (reconstruction, _) = best_reconstruction(source, &v_given_a)?;
        Ok(Self::Joint { uv_given_a, u_size, v_size, reconstruction })
    }

    /// All auxiliaries constant.
    pub fn constant(source: &SourceModel) -> Result<Self> {
        let a = source.a_size();
        Self::chain(source, CondPmf::constant(a, 1, 0)?, CondPmf::constant(1, 1, 0)?)
    }

    pub fn u_size(&self) -> usize {
        match self {
            Self::Chain { u_given_v, .. } => u_given_v.output_size(),
            Self::Joint { u_size, .. } => *u_size,
        }
    }

    pub fn v_size(&self) -> usize {
        match self {
            Self::Chain { v_given_a, .. } => v_given_a.output_size(),
            Self::Joint { v_size, .. } => *v_size,
        }
    }

    pub fn reconstruction(&self) -> &Reconstruction {
        match self {
            Self::Chain { reconstruction, .. } | Self::Joint { reconstruction, .. } => reconstruction,
        }
    }

    /// `p(u,v|a)` with output index `u·|V| + v`.
    pub fn uv_given_a(&self) -> CondPmf {
        match self {
            Self::Joint { uv_given_a, .. } => uv_given_a.clone(),
            Self::Chain { v_given_a, u_given_v, .. } => {
                let (na, nv, nu) = (v_given_a.input_size(), v_given_a.output_size(), u_given_v.output_size());
                let mut data = vec![0.0; na * nu * nv];
                for a in 0..na {
                    for v in 0..nv {
                        for u in 0..nu {
                            data[a * nu * nv + u * nv + v] = v_given_a.get(a, v) * u_given_v.get(v, u);
                        }
                    }
                }
                CondPmf::from_flat(na, nu * nv, data).expect("product of stochastic matrices")
            }
        }
    }

    pub fn v_given_a(&self) -> CondPmf {
        match self {
            Self::Chain { v_given_a, .. } => v_given_a.clone(),
            Self::Joint { uv_given_a, u_size, v_size, .. } => marginal_v(uv_given_a, *u_size, *v_size),
        }
    }

    /// Forget the chain structure.
    pub fn to_joint(&self) -> Self {
        match self {
            Self::Joint { .. } => self.clone(),
            Self::Chain { reconstruction, .. } => Self::Joint {
                uv_given_a: self.uv_given_a(),
                u_size: self.u_size(),
                v_size: self.v_size(),
                reconstruction: reconstruction.clone(),
            },
        }
    }
}

fn marginal_v(uv_given_a: &CondPmf, u_size: usize, v_size: usize) -> CondPmf {
    let na = uv_given_a.input_size();
    let mut data = vec![0.0; na * v_size];
    for a in 0..na {
        for u in 0..u_size {
            for v in 0..v_size {
                data[a * v_size + v] += uv_given_a.get(a, u * v_size + v);
            }
        }
    }
    CondPmf::from_flat(na, v_size, data).expect("marginal of a stochastic matrix")
}

/// Channel-side auxiliaries `p(x) p(t|x) p(q|t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxChannelSystem {
    pub p_x: Pmf,
    pub t_given_x: CondPmf,
    pub q_given_t: CondPmf,
}

impl AuxChannelSystem {
    pub fn new(p_x: Pmf, t_given_x: CondPmf, q_given_t: CondPmf) -> Result<Self> {
        if t_given_x.input_size() != p_x.len() || q_given_t.input_size() != t_given_x.output_size() {
            return Err(RegionError::DimensionMismatch("p(x), p(t|x), p(q|t) do not chain".into()));
        }
        Ok(Self { p_x, t_given_x, q_given_t })
    }

    /// `Q = T = X` with input distribution `p_x`.
    pub fn transparent(p_x: Pmf) -> Self {
        let n = p_x.len();
        Self { p_x, t_given_x: CondPmf::identity(n), q_given_t: CondPmf::identity(n) }
    }

    /// `T, Q` constant with input distribution `p_x`.
    pub fn constant(p_x: Pmf) -> Result<Self> {
        let n = p_x.len();
        Ok(Self { p_x, t_given_x: CondPmf::constant(n, 1, 0)?, q_given_t: CondPmf::constant(1, 1, 0)? })
    }
}

/// Picks `Â(v,b) = argmin_â Σ_a p(a,v,b) d(a,â)`, lowest symbol on ties, and
/// returns the resulting expected distortion.
pub fn best_reconstruction(source: &SourceModel, v_given_a: &CondPmf) -> Result<(Reconstruction, f64)> {
    let (na, nb, ne) = (source.a_size(), source.b_size(), source.e_size());
    if v_given_a.input_size() != na {
        return Err(RegionError::DimensionMismatch(format!(
            "p(v|a) has {} inputs, source has {na} symbols",
            v_given_a.input_size()
        )));
    }
    let nv = v_given_a.output_size();
    let p_ab: Vec<f64> = (0..na * nb).map(|ab| (0..ne).map(|e| source.p_abe.probs()[ab * ne + e]).sum()).collect();
    // p(v, a, b)
    let mut p_vab = vec![0.0; nv * na * nb];
    for a in 0..na {
        for v in 0..nv {
            for b in 0..nb {
                p_vab[(v * na + a) * nb + b] = v_given_a.get(a, v) * p_ab[a * nb + b];
            }
        }
    }
    let (map, distortion) = stats::reconstruct(&p_vab, nv, na, nb, &source.distortion);
    Ok((Reconstruction::new(nv, nb, map)?, distortion))
}

/// Terms of the inner bound for one auxiliary system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerEvaluation {
    /// `I(U;A|B)` and `k I(Q;Y)`.
    pub rate1_lhs: f64,
    pub rate1_rhs: f64,
    pub rate1_ok: bool,
    /// `I(V;A|B)` and `k I(T;Y)`.
    pub rate2_lhs: f64,
    pub rate2_rhs: f64,
    pub rate2_ok: bool,
    pub distortion: f64,
    pub delta_bound: f64,
}

/// Terms of the outer bound for one auxiliary system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterEvaluation {
    pub rate_lhs: f64,
    pub rate_rhs: f64,
    pub rate_ok: bool,
    pub distortion: f64,
    pub delta_bound: f64,
}

// axes of the assembled source joint
const U: usize = 0;
const V: usize = 1;
const A: usize = 2;
const B: usize = 3;
const E: usize = 4;
// axes of the assembled channel joint
const Q: usize = 0;
const T: usize = 1;
const X: usize = 2;
const Y: usize = 3;
const Z: usize = 4;

fn source_joint(source: &SourceModel, aux: &AuxSourceSystem) -> Result<JointTable> {
    let na = source.a_size();
    let sizes = [aux.u_size(), aux.v_size(), na, source.b_size(), source.e_size()];
    let abe = Pmf::new(source.p_abe.probs().to_vec())?;
    let mut factors = vec![Factor::marginal(vec![A, B, E], &abe)];
    match aux {
        AuxSourceSystem::Chain { v_given_a, u_given_v, .. } => {
            if v_given_a.input_size() != na {
                return Err(RegionError::DimensionMismatch("p(v|a) inputs vs |A|".into()));
            }
            factors.push(Factor::conditional(vec![A], vec![V], v_given_a.clone()));
            factors.push(Factor::conditional(vec![V], vec![U], u_given_v.clone()));
        }
        AuxSourceSystem::Joint { uv_given_a, .. } => {
            if uv_given_a.input_size() != na {
                return Err(RegionError::DimensionMismatch("p(u,v|a) inputs vs |A|".into()));
            }
            factors.push(Factor::conditional(vec![A], vec![U, V], uv_given_a.clone()));
        }
    }
    Ok(assemble_joint(&sizes, &factors)?)
}

fn channel_joint(channel: &BroadcastChannel, aux: &AuxChannelSystem) -> Result<JointTable> {
    if aux.p_x.len() != channel.x_size() {
        return Err(RegionError::DimensionMismatch(format!(
            "p(x) has {} symbols, channel has {} inputs",
            aux.p_x.len(),
            channel.x_size()
        )));
    }
    let sizes = [
        aux.q_given_t.output_size(),
        aux.t_given_x.output_size(),
        channel.x_size(),
        channel.y_size(),
        channel.z_size(),
    ];
    Ok(assemble_joint(
        &sizes,
        &[
            Factor::marginal(vec![X], &aux.p_x),
            Factor::conditional(vec![X], vec![T], aux.t_given_x.clone()),
            Factor::conditional(vec![T], vec![Q], aux.q_given_t.clone()),
            Factor::conditional(vec![X], vec![Y, Z], channel.p_yz_given_x.clone()),
        ],
    )?)
}

fn expected_distortion(source: &SourceModel, src: &JointTable, rec: &Reconstruction) -> Result<f64> {
    if rec.v_size() != src.dims()[V] || rec.b_size() != src.dims()[B] {
        return Err(RegionError::DimensionMismatch("reconstruction vs V x B".into()));
    }
    let vab = src.marginal(&[V, A, B])?;
    let mut d = 0.0;
    for v in 0..rec.v_size() {
        for a in 0..source.a_size() {
            for b in 0..rec.b_size() {
                let p = vab.get(&[v, a, b]);
                if p > 0.0 {
                    d += p * source.distortion.get(a, rec.get(v, b));
                }
            }
        }
    }
    Ok(d)
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(RegionError::Domain(format!("k = {k} must be a nonnegative number")));
    }
    Ok(())
}

/// `I(T;Y|Q) − I(T;Z|Q)`.
fn secrecy_term(ch: &JointTable) -> Result<f64> {
    Ok(conditional_mutual_information(ch, &[T], &[Y], &[Q])? - conditional_mutual_information(ch, &[T], &[Z], &[Q])?)
}

/// Evaluates the inner bound for a chain-structured auxiliary system.
pub fn evaluate_inner(
    source: &SourceModel,
    channel: &BroadcastChannel,
    aux_source: &AuxSourceSystem,
    aux_channel: &AuxChannelSystem,
    k: f64,
) -> Result<InnerEvaluation> {
    check_k(k)?;
    if !matches!(aux_source, AuxSourceSystem::Chain { .. }) {
        return Err(RegionError::WrongMode("the inner bound needs the U - V - A chain".into()));
    }
    let src = source_joint(source, aux_source)?;
    let ch = channel_joint(channel, aux_channel)?;

    let rate1_lhs = conditional_mutual_information(&src, &[U], &[A], &[B])?;
    let rate1_rhs = k * mutual_information(&ch, &[Q], &[Y])?;
    let rate2_lhs = conditional_mutual_information(&src, &[V], &[A], &[B])?;
    let rate2_rhs = k * mutual_information(&ch, &[T], &[Y])?;
    let leak = conditional_mutual_information(&src, &[V], &[A], &[U, B])? - k * secrecy_term(&ch)?;
    let delta_bound = conditional_entropy(&src, &[A], &[U, E])? - positive_part(leak);

    Ok(InnerEvaluation {
        rate1_lhs,
        rate1_rhs,
        rate1_ok: rate1_lhs <= rate1_rhs + RATE_TOLERANCE,
        rate2_lhs,
        rate2_rhs,
        rate2_ok: rate2_lhs <= rate2_rhs + RATE_TOLERANCE,
        distortion: expected_distortion(source, &src, aux_source.reconstruction())?,
        delta_bound,
    })
}

/// Evaluates the outer bound. Chain systems are accepted too (they are a
/// special case of `p(u,v|a)`).
pub fn evaluate_outer(
    source: &SourceModel,
    channel: &BroadcastChannel,
    aux_source: &AuxSourceSystem,
    aux_channel: &AuxChannelSystem,
    k: f64,
) -> Result<OuterEvaluation> {
    check_k(k)?;
    let src = source_joint(source, aux_source)?;
    let ch = channel_joint(channel, aux_channel)?;

    let rate_lhs = conditional_mutual_information(&src, &[V], &[A], &[B])?;
    let rate_rhs = k * mutual_information(&ch, &[T], &[Y])?;
    let leak = rate_lhs - conditional_mutual_information(&src, &[U], &[A], &[B])? - k * secrecy_term(&ch)?;
    let delta_bound = conditional_entropy(&src, &[A], &[U, E])? - positive_part(leak);
    Ok(OuterEvaluation {
        rate_lhs,
        rate_rhs,
        rate_ok: rate_lhs <= rate_rhs + RATE_TOLERANCE,
        distortion: expected_distortion(source, &src, aux_source.reconstruction())?,
        delta_bound,
    })
}

/// Search settings shared by every optimizer. Cardinalities left as `None`
/// default to `|A| + 2` for `U, V` and `|X| + 2` for `Q, T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub u_card: Option<usize>,
    pub v_card: Option<usize>,
    pub q_card: Option<usize>,
    pub t_card: Option<usize>,
    pub restarts: usize,
    /// Points per axis for grid searches (the binary closed form, sweeps).
    pub grid_resolution: usize,
    /// Maximum number of coordinate sweeps per restart.
    pub max_iterations: usize,
    pub seed: u64,
    /// Smallest step before a restart is declared converged.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            u_card: None,
            v_card: None,
            q_card: None,
            t_card: None,
            restarts: 32,
            grid_resolution: 1000,
            max_iterations: 400,
            seed: 0,
            tolerance: 1e-7,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        let cards = [self.u_card, self.v_card, self.q_card, self.t_card];
        if cards.contains(&Some(0)) {
            return Err(RegionError::Domain("auxiliary cardinalities must be positive".into()));
        }
        if self.restarts == 0 || self.max_iterations == 0 || self.grid_resolution == 0 {
            return Err(RegionError::Domain("restarts, iterations and grid must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(RegionError::Domain(format!("tolerance {} not in (0, 1)", self.tolerance)));
        }
        Ok(())
    }
}

/// How close each constraint is at an optimum: `rhs − lhs` (nonnegative up
/// to [`RATE_TOLERANCE`]). Bounds without a common-layer rate report `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintActivity {
    pub common_rate_slack: Option<f64>,
    pub private_rate_slack: f64,
    pub distortion_slack: f64,
}

impl ConstraintActivity {
    pub fn common_rate_active(&self) -> bool {
        self.common_rate_slack.is_some_and(|s| s < ACTIVE_SLACK)
    }

    pub fn private_rate_active(&self) -> bool {
        self.private_rate_slack < ACTIVE_SLACK
    }

    pub fn distortion_active(&self) -> bool {
        self.distortion_slack < ACTIVE_SLACK
    }
}

/// Best auxiliary system found by an optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOptimum {
    pub delta: f64,
    pub distortion: f64,
    pub source: AuxSourceSystem,
    pub channel: AuxChannelSystem,
    pub activity: ConstraintActivity,
}

fn check_targets(source: &SourceModel, k: f64, d_target: f64) -> Result<()> {
    check_k(k)?;
    if !(d_target >= 0.0 && d_target <= source.distortion.d_max() + RATE_TOLERANCE) {
        return Err(RegionError::Domain(format!(
            "distortion target {d_target} outside [0, {}]",
            source.distortion.d_max()
        )));
    }
    Ok(())
}

/// Channel auxiliaries searched by [`optimize_inner_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelAuxiliaries {
    /// `p(t|x)` and `p(q|t)` free.
    #[default]
    Free,
    /// `Q = T = X`; only `p(x)` is searched.
    Transparent,
}

/// Maximizes the inner-bound equivocation subject to both rate inequalities
/// and `D ≤ d_target`.
pub fn optimize_inner(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
) -> Result<RegionOptimum> {
    optimize_inner_with(source, channel, k, d_target, config, ChannelAuxiliaries::Free, &[])
}

/// [`optimize_inner`] with a restricted channel side and extra starting
/// points that are searched in addition to the configured restarts.
pub fn optimize_inner_with(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
    channel_aux: ChannelAuxiliaries,
    starts: &[(AuxSourceSystem, AuxChannelSystem)],
) -> Result<RegionOptimum> {
    check_targets(source, k, d_target)?;
    config.validate()?;
    let shape = match channel_aux {
        ChannelAuxiliaries::Free => ChannelShape::Full,
        ChannelAuxiliaries::Transparent => ChannelShape::Transparent,
    };
    let problem = SearchProblem::new(source, channel, k, d_target, config, BoundKind::Inner, SourceShape::Chain, shape);
    problem.optimize(config, starts)
}

/// Maximizes the outer-bound equivocation over joint `p(u,v|a)`.
///
/// The inner-bound optimum at the same point is added as a starting point,
/// so the result never falls below [`optimize_inner`] with the same config.
pub fn optimize_outer(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
) -> Result<RegionOptimum> {
    let seed = match optimize_inner(source, channel, k, d_target, config) {
        Ok(opt) => vec![(opt.source, opt.channel)],
        Err(RegionError::Infeasible { .. }) => vec![],
        Err(e) => return Err(e),
    };
    optimize_outer_with(source, channel, k, d_target, config, &seed)
}

/// [`optimize_outer`] with caller-supplied starting points (chain systems
/// are lifted to `p(u,v|a)`) instead of an internal inner-bound run.
pub fn optimize_outer_with(
    source: &SourceModel,
    channel: &BroadcastChannel,
    k: f64,
    d_target: f64,
    config: &OptimizerConfig,
    starts: &[(AuxSourceSystem, AuxChannelSystem)],
) -> Result<RegionOptimum> {
    check_targets(source, k, d_target)?;
    config.validate()?;
    let problem = SearchProblem::new(
        source,
        channel,
        k,
        d_target,
        config,
        BoundKind::Outer,
        SourceShape::Joint,
        ChannelShape::Full,
    );
    let lifted: Vec<_> = starts.iter().map(|(s, c)| (s.to_joint(), c.clone())).collect();
    problem.optimize(config, &lifted)
}
