//! Stochastic orderings between two channels sharing an input alphabet:
//! degradedness, less-noisy, and the BEC/BSC regime map.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::info::{entropy_of, h2, CondPmf, InfoError, Pmf, Result};

/// Residual below which a degrading channel is accepted.
pub const DEGRADED_TOLERANCE: f64 = 1e-9;

/// Slack allowed on a concavity test before it counts as a violation.
pub const CONCAVITY_TOLERANCE: f64 = 1e-12;

/// Default number of grid points for binary-input less-noisy tests.
pub const DEFAULT_LESS_NOISY_GRID: usize = 512;

const SEGMENT_SEED: u64 = 0x1e55_0015e;

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `degraded = base.then(channel)`.
    DegradingChannel(CondPmf),
    /// Two input distributions whose midpoint breaks concavity of
    /// `I(p; first) - I(p; second)`.
    ConcavityViolation { left: Pmf, right: Pmf, gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingVerdict {
    pub holds: bool,
    pub certificate: Option<Certificate>,
    pub tolerance_used: f64,
}

fn same_inputs(first: &CondPmf, second: &CondPmf) -> Result<()> {
    if first.input_size() != second.input_size() {
        return Err(InfoError::DimensionMismatch(format!(
            "channels have {} and {} inputs",
            first.input_size(),
            second.input_size()
        )));
    }
    Ok(())
}

/// Decides whether `degraded = W ∘ base` for some stochastic `W` by solving
/// `min t` subject to `|Σ_b base(b|a) W(o|b) − degraded(o|a)| ≤ t`.
pub fn is_degraded(base: &CondPmf, degraded: &CondPmf) -> Result<OrderingVerdict> {
    same_inputs(base, degraded)?;
    let (na, nb, no) = (base.input_size(), base.output_size(), degraded.output_size());

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..nb * no).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for b in 0..nb {
        let row: Vec<_> = (0..no).map(|o| (w[b * no + o], 1.0)).collect();
        lp.add_constraint(&row, ComparisonOp::Eq, 1.0);
    }
    for a in 0..na {
        for o in 0..no {
            let mut expr: Vec<_> =
                (0..nb).filter(|&b| base.get(a, b) != 0.0).map(|b| (w[b * no + o], base.get(a, b))).collect();
            expr.push((t, -1.0));
            lp.add_constraint(&expr, ComparisonOp::Le, degraded.get(a, o));
            let last = expr.len() - 1;
            expr[last].1 = 1.0;
            lp.add_constraint(&expr, ComparisonOp::Ge, degraded.get(a, o));
        }
    }
    let outcome = lp.solve().map_err(|e| InfoError::Domain(format!("degradedness LP failed: {e}")))?;
    let solution = outcome.solution().ok_or_else(|| InfoError::Domain("degradedness LP interrupted".into()))?;

    // Project the LP solution back onto the simplex and re-verify the composition.
    let mut rows = Vec::with_capacity(nb);
    for b in 0..nb {
        let mut row: Vec<f64> = (0..no).map(|o| solution[w[b * no + o]].max(0.0)).collect();
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
        rows.push(row);
    }
    let channel = CondPmf::new(rows)?;
    let composed = base.then(&channel)?;
    let residual = composed.as_flat().iter().zip(degraded.as_flat()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let holds = solution[t] < DEGRADED_TOLERANCE && residual < DEGRADED_TOLERANCE;
    Ok(OrderingVerdict {
        holds,
        certificate: holds.then_some(Certificate::DegradingChannel(channel)),
        tolerance_used: DEGRADED_TOLERANCE,
    })
}

/// `I(p; W)` in bits.
pub(crate) fn mutual_information_through(p: &[f64], channel: &CondPmf) -> f64 {
    let mut out = vec![0.0; channel.output_size()];
    let mut cond = 0.0;
    for (a, &pa) in p.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let row = channel.row(a);
        cond += pa * entropy_of(row);
        for (o, &w) in row.iter().enumerate() {
            out[o] += pa * w;
        }
    }
    entropy_of(&out) - cond
}

fn gap_fn<'a>(first: &'a CondPmf, second: &'a CondPmf) -> impl Fn(&[f64]) -> f64 + 'a {
    move |p| mutual_information_through(p, first) - mutual_information_through(p, second)
}

/// Tests whether `first` is less noisy than `second`, i.e. whether
/// `p ↦ I(p; first) − I(p; second)` is concave on the input simplex.
///
/// Binary inputs use second differences on a `grid`-point lattice; larger
/// inputs use midpoint concavity on `8·grid` random segments drawn from a
/// fixed seed.
pub fn is_less_noisy(first: &CondPmf, second: &CondPmf, grid: usize) -> Result<OrderingVerdict> {
    same_inputs(first, second)?;
    if grid < 16 {
        return Err(InfoError::Domain(format!("grid {grid} below the minimum of 16")));
    }
    let f = gap_fn(first, second);
    let n = first.input_size();
    let violation = if n == 1 {
        None
    } else if n == 2 {
        let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(&[1.0 - x, x])).collect();
        (1..grid - 1).find_map(|i| {
            let second_diff = fs[i - 1] - 2.0 * fs[i] + fs[i + 1];
            (second_diff > CONCAVITY_TOLERANCE)
                .then(|| (vec![1.0 - xs[i - 1], xs[i - 1]], vec![1.0 - xs[i + 1], xs[i + 1]], second_diff / 2.0))
        })
    } else {
        random_segment_search(&f, n, 8 * grid)
    };
    Ok(match violation {
        None => OrderingVerdict { holds: true, certificate: None, tolerance_used: CONCAVITY_TOLERANCE },
        Some((left, right, gap)) => OrderingVerdict {
            holds: false,
            certificate: Some(Certificate::ConcavityViolation { left: Pmf::new(left)?, right: Pmf::new(right)?, gap }),
            tolerance_used: CONCAVITY_TOLERANCE,
        },
    })
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn random_segment_search(f: &impl Fn(&[f64]) -> f64, n: usize, samples: usize) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    const LENGTHS: [f64; 4] = [1.0, 0.25, 0.05, 0.01];
    let mut rng = ChaCha8Rng::seed_from_u64(SEGMENT_SEED);
    for i in 0..samples {
        let left = random_simplex_point(&mut rng, n);
        let toward = random_simplex_point(&mut rng, n);
        let len = LENGTHS[i % LENGTHS.len()] * rng.random::<f64>();
        let right: Vec<f64> = left.iter().zip(&toward).map(|(l, t)| l + len * (t - l)).collect();
        let mid: Vec<f64> = left.iter().zip(&right).map(|(l, r)| 0.5 * (l + r)).collect();
        let gap = 0.5 * (f(&left) + f(&right)) - f(&mid);
        if gap > CONCAVITY_TOLERANCE {
            return Some((left, right, gap));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `A — B — E` is a Markov chain.
    MarkovDegraded,
    /// `B` is less noisy than `E` with respect to `A`.
    LessNoisy,
    /// Only `I(A;B) ≥ I(A;E)` holds.
    MoreCapable,
    None,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::MarkovDegraded => "MarkovDegraded",
            Regime::LessNoisy => "LessNoisy",
            Regime::MoreCapable => "MoreCapable",
            Regime::None => "None",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecBscRegime {
    pub regime: Regime,
    /// `(2ε, 4ε(1−ε), h₂(ε))`.
    pub thresholds: (f64, f64, f64),
}

/// Relation between Bob's BEC(β) and Eve's BSC(ε) side informations.
/// Ties go to the stronger regime.
pub fn classify_bec_bsc(beta: f64, eps: f64) -> Result<BecBscRegime> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(InfoError::Domain(format!("beta {beta} not in [0, 1]")));
    }
    if !(0.0..=0.5).contains(&eps) {
        return Err(InfoError::Domain(format!("eps {eps} not in [0, 1/2]")));
    }
    let thresholds = (2.0 * eps, 4.0 * eps * (1.0 - eps), h2(eps)?);
    let regime = if beta <= thresholds.0 {
        Regime::MarkovDegraded
    } else if beta <= thresholds.1 {
        Regime::LessNoisy
    } else if beta <= thresholds.2 {
        Regime::MoreCapable
    } else {
        Regime::None
    };
    Ok(BecBscRegime { regime, thresholds })
}
