//! Desk-scale simulations of the layered scheme and the uncoded baseline
//! on the binary model: uniform source, Bob's side information through
//! BEC(β), Eve's through BSC(ε), a noiseless main channel and BSC(ζ) to Eve.
//!
//! Binning uses random full-rank syndrome maps, decoding is exact
//! maximum likelihood inside the bin, and Eve's equivocation is the exact
//! posterior entropy obtained by enumeration. Every trial draws from its own
//! generator streams derived from `(seed, trial)`, so serial and parallel
//! runs produce identical reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::info::{entropy_of, h2_unchecked};

/// Longest source block for which posteriors are enumerated.
pub const MAX_BLOCK: usize = 20;
/// Longest source block for the two-layer scheme, which enumerates all `2^n` sequences.
pub const MAX_SCHEME_BLOCK: usize = 16;
/// Largest bin (coset) dimension for the binning simulation.
pub const MAX_BIN_BITS: usize = 16;
/// Largest dimension of the channel-layer code `(rp, rf)`.
pub const MAX_CHANNEL_CODE_BITS: usize = 20;
/// Slack on the rate-splitting identities.
pub const RATE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("enumeration bound exceeded: {what} needs 2^{bits} terms (limit 2^{limit})")]
    EnumerationBound { what: String, bits: usize, limit: usize },
    #[error("rate invariant violated: {0}")]
    RateInvariant(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Per-layer rates in bits per source symbol (`r1, r2, rc, rp, rf`) and
/// channel uses per source symbol (`k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeRates {
    pub r1: f64,
    pub r2: f64,
    pub rc: f64,
    pub rp: f64,
    pub rf: f64,
    pub k: f64,
}

impl SchemeRates {
    pub fn validate(&self) -> Result<()> {
        let all = [self.r1, self.r2, self.rc, self.rp, self.rf, self.k];
        if all.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(SimError::Domain(format!("rates must be nonnegative: {self:?}")));
        }
        if (self.r1 + self.r2 - self.rc - self.rp).abs() > RATE_SLACK {
            return Err(SimError::RateInvariant(format!(
                "r1 + r2 = {} differs from rc + rp = {}",
                self.r1 + self.r2,
                self.rc + self.rp
            )));
        }
        if self.r1 > self.rc + RATE_SLACK {
            return Err(SimError::RateInvariant(format!("r1 = {} exceeds rc = {}", self.r1, self.rc)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Source block length.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub beta: f64,
    pub eps: f64,
    pub zeta: f64,
    /// Spread trials over the rayon pool; the report does not depend on it.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n: 12, trials: 1000, seed: 0, beta: 0.5, eps: 0.1, zeta: 0.1, parallel: true }
    }
}

impl SimConfig {
    fn validate(&self, max_n: usize) -> Result<()> {
        if self.n == 0 || self.n > max_n {
            return Err(SimError::EnumerationBound {
                what: format!("block length n = {}", self.n),
                bits: self.n,
                limit: max_n,
            });
        }
        if self.trials == 0 {
            return Err(SimError::Domain("trials must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(SimError::Domain(format!("beta = {} not in [0, 1]", self.beta)));
        }
        for (name, x) in [("eps", self.eps), ("zeta", self.zeta)] {
            if !(0.0..=0.5).contains(&x) {
                return Err(SimError::Domain(format!("{name} = {x} not in [0, 1/2]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Hamming distortion per symbol at Bob.
    pub mean_distortion: f64,
    pub decode_error_rate: f64,
    /// `(1/n) H(Aⁿ | Eve's observations)`, averaged over trials.
    pub equivocation_per_symbol: f64,
    /// 95% normal-approximation half-width of the equivocation mean.
    pub confidence_halfwidth: f64,
    pub trials: usize,
    pub n: usize,
}

/// What one trial contributes to the report.
#[derive(Debug, Clone, Copy)]
struct TrialResult {
    distortion: f64,
    error: bool,
    equivocation: f64,
}

fn run_trials<F>(config: &SimConfig, trial: F) -> SimReport
where
    F: Fn(usize) -> TrialResult + Sync,
{
    let results: Vec<TrialResult> = if config.parallel {
        (0..config.trials).into_par_iter().map(&trial).collect()
    } else {
        (0..config.trials).map(&trial).collect()
    };
    let t = results.len() as f64;
    let mean = |f: &dyn Fn(&TrialResult) -> f64| results.iter().map(f).sum::<f64>() / t;
    let equivocation = mean(&|r| r.equivocation);
    let variance = if results.len() > 1 {
        results.iter().map(|r| (r.equivocation - equivocation).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    SimReport {
        mean_distortion: mean(&|r| r.distortion),
        decode_error_rate: mean(&|r| f64::from(u8::from(r.error))),
        equivocation_per_symbol: equivocation,
        confidence_halfwidth: 1.96 * (variance / t).sqrt(),
        trials: results.len(),
        n: config.n,
    }
}

/// Independent generator streams of one trial.
struct TrialRngs {
    source: ChaCha8Rng,
    code: ChaCha8Rng,
    channel: ChaCha8Rng,
}

fn trial_rngs(seed: u64, trial: usize) -> TrialRngs {
    let stream = |s: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(4 * trial as u64 + s);
        rng
    };
    TrialRngs { source: stream(0), code: stream(1), channel: stream(2) }
}

fn bernoulli_mask(rng: &mut ChaCha8Rng, n: usize, p: f64) -> u32 {
    (0..n).fold(0, |m, i| if rng.random_bool(p) { m | (1 << i) } else { m })
}

fn uniform_mask(rng: &mut ChaCha8Rng, n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        rng.random::<u32>() & low_bits(n)
    }
}

fn low_bits(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Source block, Bob's erasure pattern (set bits are erased) and Eve's observation.
struct SourceDraw {
    a: u32,
    erased: u32,
    e: u32,
}

fn draw_source(rng: &mut ChaCha8Rng, c: &SimConfig) -> SourceDraw {
    let a = uniform_mask(rng, c.n);
    let erased = bernoulli_mask(rng, c.n, c.beta);
    let e = a ^ bernoulli_mask(rng, c.n, c.eps);
    SourceDraw { a, erased, e }
}

fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

/// Rank over GF(2) of a matrix given as row bitmasks.
fn rank(rows: &[u32]) -> usize {
    // basis[b] has highest set bit b
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for &r in rows {
        let mut v = r;
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}

fn random_full_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<u32> {
    loop {
        let m: Vec<u32> = (0..rows).map(|_| uniform_mask(rng, cols)).collect();
        if rank(&m) == rows {
            return m;
        }
    }
}

fn syndrome(h: &[u32], x: u32) -> u32 {
    h.iter().enumerate().fold(0, |s, (i, &row)| s | (parity(row & x) << i))
}

/// All solutions of `H x = s` for full-row-rank `H` over `n` columns.
fn coset(h: &[u32], s: u32, n: usize) -> Vec<u32> {
    let mut rows: Vec<(u32, u32)> = h.iter().enumerate().map(|(i, &r)| (r, (s >> i) & 1)).collect();
    let mut pivots = Vec::with_capacity(rows.len());
    let mut rank = 0;
    for col in 0..n {
        let bit = 1 << col;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i].0 & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row.0 & bit != 0 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut x0 = 0;
    for (r, &p) in pivots.iter().enumerate() {
        x0 |= rows[r].1 << p;
    }
    let pivot_mask = pivots.iter().fold(0u32, |m, &p| m | (1 << p));
    let basis: Vec<u32> = (0..n)
        .filter(|f| pivot_mask & (1 << f) == 0)
        .map(|f| {
            let mut v = 1u32 << f;
            for (r, &p) in pivots.iter().enumerate() {
                if rows[r].0 & (1 << f) != 0 {
                    v |= 1 << p;
                }
            }
            v
        })
        .collect();
    gray_span(x0, &basis)
}

/// `offset ⊕ span(basis)`, enumerated in Gray-code order.
fn gray_span(offset: u32, basis: &[u32]) -> Vec<u32> {
    let size = 1usize << basis.len();
    let mut out = Vec::with_capacity(size);
    let mut x = offset;
    out.push(x);
    for i in 1..size {
        x ^= basis[i.trailing_zeros() as usize];
        out.push(x);
    }
    out
}

/// Lowest-valued candidate that agrees with Bob's unerased symbols.
fn bob_decode(candidates: &[u32], a: u32, erased: u32, n: usize) -> Option<u32> {
    let known = !erased & low_bits(n);
    candidates.iter().copied().filter(|&c| (c ^ a) & known == 0).min()
}

/// `log₂ p(obs | x)` for `bits` uses of a BSC(p).
fn bsc_log_likelihood(obs: u32, x: u32, bits: usize, p: f64) -> f64 {
    let d = (obs ^ x).count_ones() as f64;
    let same = bits as f64 - d;
    let term = |count: f64, prob: f64| if count == 0.0 { 0.0 } else { count * prob.log2() };
    term(d, p) + term(same, 1.0 - p)
}

/// Entropy in bits of the distribution proportional to `2^{log_weights}`.
fn entropy_from_log_weights(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp2()).collect();
    let total: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / total).collect();
    entropy_of(&p)
}

fn check_unit_half(name: &str, x: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&x) {
        return Err(SimError::Domain(format!("{name} = {x} not in [0, 1/2]")));
    }
    Ok(())
}

/// `H(A|E,Z)` per symbol for a uniform bit seen by Eve through BSC(ε) and,
/// sent uncoded, through BSC(ζ).
pub fn uncoded_equivocation(eps: f64, zeta: f64) -> Result<f64> {
    check_unit_half("eps", eps)?;
    check_unit_half("zeta", zeta)?;
    let flip = |p: f64, differ: bool| if differ { p } else { 1.0 - p };
    let mut h = 0.0;
    for e in [false, true] {
        for z in [false, true] {
            // a = 0 vs a = 1; observation bits differ from a when set
            let p0 = 0.5 * flip(eps, e) * flip(zeta, z);
            let p1 = 0.5 * flip(eps, !e) * flip(zeta, !z);
            let p = p0 + p1;
            if p > 0.0 {
                h += p * h2_unchecked(p0 / p);
            }
        }
    }
    Ok(h)
}

/// Uncoded transmission of the source over the noiseless main channel:
/// Bob recovers it exactly, and Eve's equivocation is the memoryless
/// per-symbol value [`uncoded_equivocation`].
pub fn sim_uncoded(config: &SimConfig) -> Result<SimReport> {
    config.validate(MAX_BLOCK)?;
    let per_symbol = uncoded_equivocation(config.eps, config.zeta)?;
    Ok(run_trials(config, |t| {
        let mut rngs = trial_rngs(config.seed, t);
        let draw = draw_source(&mut rngs.source, config);
        // x = a is received unchanged by Bob
        let received = draw.a;
        TrialResult {
            distortion: f64::from((received ^ draw.a).count_ones()) / config.n as f64,
            error: received != draw.a,
            equivocation: per_symbol,
        }
    }))
}

/// Lossless random binning at `rate` bits per symbol with the bin index
/// sent over a public noiseless link that Eve also reads.
pub fn sim_binning_lossless(config: &SimConfig, rate: f64) -> Result<SimReport> {
    config.validate(MAX_BLOCK)?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(SimError::Domain(format!("rate {rate} not in [0, 1]")));
    }
    let n = config.n;
    let m = block_bits(n, rate).min(n);
    let free = n - m;
    if free > MAX_BIN_BITS {
        return Err(SimError::EnumerationBound { what: "bin".into(), bits: free, limit: MAX_BIN_BITS });
    }
    Ok(run_trials(config, |t| {
        let mut rngs = trial_rngs(config.seed, t);
        let draw = draw_source(&mut rngs.source, config);
        let h = random_full_rank(&mut rngs.code, m, n);
        let bin = coset(&h, syndrome(&h, draw.a), n);
        let decoded = bob_decode(&bin, draw.a, draw.erased, n).expect("the source is in its own bin");
        let log_post: Vec<f64> = bin.iter().map(|&c| bsc_log_likelihood(draw.e, c, n, config.eps)).collect();
        TrialResult {
            distortion: f64::from((decoded ^ draw.a).count_ones()) / n as f64,
            error: decoded != draw.a,
            equivocation: entropy_from_log_weights(&log_post) / n as f64,
        }
    }))
}

/// Bit budget of the two-layer scheme for block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    m1: usize,
    m2: usize,
    nc: usize,
    np: usize,
    nf: usize,
}

/// `⌈n r⌉`, ignoring rounding noise in `n r`.
fn block_bits(n: usize, r: f64) -> usize {
    (n as f64 * r - RATE_SLACK).ceil().max(0.0) as usize
}

fn layout(n: usize, rates: &SchemeRates) -> Result<Layout> {
    let bits = |r: f64| block_bits(n, r);
    let (m1, m2) = (bits(rates.r1), bits(rates.r2));
    if m1 + m2 > n {
        return Err(SimError::Domain(format!("r1 + r2 gives {} bin bits for n = {n}", m1 + m2)));
    }
    let nc = bits(rates.rc).clamp(m1, m1 + m2);
    let np = m1 + m2 - nc;
    let nf = bits(rates.rf);
    let channel_uses = bits(rates.k);
    if nc + np + nf > channel_uses {
        return Err(SimError::RateInvariant(format!(
            "{} channel bits do not fit in {channel_uses} channel uses",
            nc + np + nf
        )));
    }
    if np + nf > MAX_CHANNEL_CODE_BITS {
        return Err(SimError::EnumerationBound {
            what: "channel coset code".into(),
            bits: np + nf,
            limit: MAX_CHANNEL_CODE_BITS,
        });
    }
    Ok(Layout { m1, m2, nc, np, nf })
}

/// The two-layer scheme: syndrome bits `(r1, r2)` of the source are
/// regrouped into `rc` (first `nc` bits, which contain all of `r1`) and
/// `rp`; `rc` is sent in the clear and `(rp, rf)` through a random
/// invertible map so that `rf` hides `rp` from Eve's noisy copy.
pub fn sim_separation_scheme(config: &SimConfig, rates: &SchemeRates) -> Result<SimReport> {
    config.validate(MAX_SCHEME_BLOCK)?;
    rates.validate()?;
    let n = config.n;
    let lay = layout(n, rates)?;
    let mt = lay.m1 + lay.m2;
    let ell = lay.np + lay.nf;
    let all_sources: Vec<u32> = (0..1u32 << n).collect();

    Ok(run_trials(config, |t| {
        let mut rngs = trial_rngs(config.seed, t);
        let draw = draw_source(&mut rngs.source, config);
        let h = random_full_rank(&mut rngs.code, mt, n);
        let g = random_full_rank(&mut rngs.code, ell, ell);
        // columns of G, for encoding and the Gray-code sweep
        let g_cols: Vec<u32> = (0..ell).map(|j| syndrome(&g, 1 << j)).collect();
        let encode_p = |w: u32| (0..ell).filter(|j| w >> j & 1 == 1).fold(0, |x, j| x ^ g_cols[j]);

        let s = syndrome(&h, draw.a);
        let rc = s & low_bits(lay.nc);
        let rp = s >> lay.nc;
        let rf = uniform_mask(&mut rngs.channel, lay.nf);
        let xp = encode_p(rp | (rf << lay.np));
        let zc = rc ^ bernoulli_mask(&mut rngs.channel, lay.nc, config.zeta);
        let zp = xp ^ bernoulli_mask(&mut rngs.channel, ell, config.zeta);

        // Bob: noiseless channel, invert G, then decode within the full bin
        let bin = coset(&h, s, n);
        let decoded = bob_decode(&bin, draw.a, draw.erased, n).expect("the source is in its own bin");

        // Eve: log₂ Σ_rf p(zp | G(rp ‖ rf)) for every rp, by a Gray sweep over all w
        let mut lp = vec![f64::NEG_INFINITY; 1 << lay.np];
        let mut x = 0u32;
        for i in 0..1usize << ell {
            if i > 0 {
                x ^= g_cols[(i.trailing_zeros()) as usize];
            }
            let w = (i ^ (i >> 1)) as u32;
            let slot = &mut lp[(w & low_bits(lay.np)) as usize];
            let l = bsc_log_likelihood(zp, x, ell, config.zeta);
            *slot = if *slot == f64::NEG_INFINITY {
                l
            } else {
                let (hi, lo) = if *slot > l { (*slot, l) } else { (l, *slot) };
                hi + (1.0 + (lo - hi).exp2()).log2()
            };
        }
        let log_post: Vec<f64> = all_sources
            .iter()
            .map(|&a| {
                let sa = syndrome(&h, a);
                bsc_log_likelihood(draw.e, a, n, config.eps)
                    + bsc_log_likelihood(zc, sa & low_bits(lay.nc), lay.nc, config.zeta)
                    + lp[(sa >> lay.nc) as usize]
            })
            .collect();
        TrialResult {
            distortion: f64::from((decoded ^ draw.a).count_ones()) / n as f64,
            error: decoded != draw.a,
            equivocation: entropy_from_log_weights(&log_post) / n as f64,
        }
    }))
}
