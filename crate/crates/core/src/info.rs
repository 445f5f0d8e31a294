//! Finite-alphabet probability tables and Shannon information measures.
//!
//! Everything is measured in bits. Zero-probability cells are skipped, which
//! implements the usual `0 log 0 = 0` convention. Computed mutual
//! informations that come out slightly negative from floating point
//! accumulation are clamped to zero when they are within [`CLAMP_SLACK`].

use thiserror::Error;

/// Tolerance used when validating that a table sums to one.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Slack allowed before a computed quantity is considered out of range.
pub const CLAMP_SLACK: f64 = 1e-10;

/// Largest dense joint table we are willing to build.
pub const MAX_TABLE_CELLS: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("invalid probability table: {0}")]
    InvalidPmf(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("axis {axis} out of range for a table with {ndim} axes")]
    AxisOutOfRange { axis: usize, ndim: usize },
    #[error("axis {0} used more than once")]
    OverlappingAxes(usize),
    #[error("factor wiring is not a directed factorization: {0}")]
    CyclicWiring(String),
    #[error("joint table would have {0} cells, above the limit of {MAX_TABLE_CELLS}")]
    TableTooLarge(usize),
    #[error("argument out of domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, InfoError>;

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(InfoError::InvalidPmf("empty table".into()));
    }
    let mut total = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(InfoError::InvalidPmf(format!("entry {i} is {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(InfoError::InvalidPmf(format!("entries sum to {total}")));
    }
    Ok(())
}

/// `-Σ p log₂ p` over a slice, skipping zero cells. No validation.
pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

pub(crate) fn clamp_nonneg(x: f64) -> f64 {
    if x < 0.0 && x > -CLAMP_SLACK {
        0.0
    } else {
        x
    }
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(InfoError::InvalidPmf("empty alphabet".into()));
        }
        Ok(Self { probs: vec![1.0 / size as f64; size] })
    }

    /// Point mass on `symbol`.
    pub fn degenerate(size: usize, symbol: usize) -> Result<Self> {
        if symbol >= size {
            return Err(InfoError::Domain(format!("symbol {symbol} outside alphabet of size {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A stochastic matrix `p(output | input)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPmf {
    input_size: usize,
    output_size: usize,
    data: Vec<f64>,
}

impl CondPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(InfoError::InvalidPmf("no rows".into()));
        }
        let output_size = rows[0].len();
        let mut data = Vec::with_capacity(input_size * output_size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(InfoError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            check_probs(row).map_err(|e| InfoError::InvalidPmf(format!("row {i}: {e}")))?;
            data.extend_from_slice(row);
        }
        Ok(Self { input_size, output_size, data })
    }

    /// Builds from a flat row-major buffer.
    pub fn from_flat(input_size: usize, output_size: usize, data: Vec<f64>) -> Result<Self> {
        if input_size == 0 || output_size == 0 || data.len() != input_size * output_size {
            return Err(InfoError::DimensionMismatch(format!(
                "{} entries for a {input_size}x{output_size} matrix",
                data.len()
            )));
        }
        for (i, row) in data.chunks(output_size).enumerate() {
            check_probs(row).map_err(|e| InfoError::InvalidPmf(format!("row {i}: {e}")))?;
        }
        Ok(Self { input_size, output_size, data })
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self { input_size: 1, output_size: p.len(), data: p.probs.clone() }
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { input_size: size, output_size: size, data }
    }

    /// Every input maps to `symbol`.
    pub fn constant(input_size: usize, output_size: usize, symbol: usize) -> Result<Self> {
        let row = Pmf::degenerate(output_size, symbol)?;
        Ok(Self { input_size, output_size, data: row.probs.repeat(input_size) })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_unit("crossover", p)?;
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel with erasure probability `p`; outputs are ordered `0, e, 1`.
    pub fn bec(p: f64) -> Result<Self> {
        check_unit("erasure probability", p)?;
        Self::new(vec![vec![1.0 - p, p, 0.0], vec![0.0, p, 1.0 - p]])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.data[input * self.output_size + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.data[input * self.output_size..(input + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.output_size)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Cascade: `self` followed by `next`, i.e. `Σ_b p(b|a) p(c|b)`.
    pub fn then(&self, next: &CondPmf) -> Result<CondPmf> {
        if self.output_size != next.input_size {
            return Err(InfoError::DimensionMismatch(format!(
                "cannot cascade {}x{} into {}x{}",
                self.input_size, self.output_size, next.input_size, next.output_size
            )));
        }
        let mut data = vec![0.0; self.input_size * next.output_size];
        for a in 0..self.input_size {
            for b in 0..self.output_size {
                let p = self.get(a, b);
                if p == 0.0 {
                    continue;
                }
                for c in 0..next.output_size {
                    data[a * next.output_size + c] += p * next.get(b, c);
                }
            }
        }
        Ok(CondPmf { input_size: self.input_size, output_size: next.output_size, data })
    }

    /// Output distribution for input distribution `p`.
    pub fn push(&self, p: &Pmf) -> Result<Pmf> {
        if p.len() != self.input_size {
            return Err(InfoError::DimensionMismatch(format!(
                "input pmf of size {} for a channel with {} inputs",
                p.len(),
                self.input_size
            )));
        }
        let mut out = vec![0.0; self.output_size];
        for (a, &pa) in p.probs().iter().enumerate() {
            for (o, &w) in self.row(a).iter().enumerate() {
                out[o] += pa * w;
            }
        }
        Ok(Pmf { probs: out })
    }
}

fn check_unit(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(InfoError::Domain(format!("{what} {p} not in [0, 1]")));
    }
    Ok(())
}

/// Dense joint distribution over several finite alphabets, row-major with
/// the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(InfoError::DimensionMismatch(format!("bad dims {dims:?}")));
        }
        let cells = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match cells {
            Some(c) if c > MAX_TABLE_CELLS => return Err(InfoError::TableTooLarge(c)),
            None => return Err(InfoError::TableTooLarge(usize::MAX)),
            Some(c) if c != probs.len() => {
                return Err(InfoError::DimensionMismatch(format!("dims {dims:?} need {c} cells, got {}", probs.len())))
            }
            _ => {}
        }
        check_probs(&probs)?;
        Ok(Self { dims, probs })
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self { dims: vec![p.len()], probs: p.probs.clone() }
    }

    /// Joint of an input pmf and a channel, axes `(input, output)`.
    pub fn from_channel(input: &Pmf, channel: &CondPmf) -> Result<Self> {
        if input.len() != channel.input_size() {
            return Err(InfoError::DimensionMismatch("input pmf vs channel".into()));
        }
        let mut probs = Vec::with_capacity(channel.as_flat().len());
        for (a, &pa) in input.probs().iter().enumerate() {
            probs.extend(channel.row(a).iter().map(|w| pa * w));
        }
        Ok(Self { dims: vec![input.len(), channel.output_size()], probs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of a single cell.
    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        self.probs[flat]
    }

    fn check_axes(&self, axes: &[usize], seen: &mut [bool]) -> Result<()> {
        for &a in axes {
            if a >= self.dims.len() {
                return Err(InfoError::AxisOutOfRange { axis: a, ndim: self.dims.len() });
            }
            if seen[a] {
                return Err(InfoError::OverlappingAxes(a));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Marginal over `axes`, which become the axes of the result in the given order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable> {
        let mut seen = vec![false; self.dims.len()];
        self.check_axes(axes, &mut seen)?;
        if axes.is_empty() {
            return Ok(JointTable { dims: vec![1], probs: vec![self.probs.iter().sum()] });
        }
        Ok(JointTable { dims: axes.iter().map(|&a| self.dims[a]).collect(), probs: self.marginal_unchecked(axes) })
    }

    fn marginal_unchecked(&self, axes: &[usize]) -> Vec<f64> {
        // stride of each source axis inside the output table
        let mut out_stride = vec![0usize; self.dims.len()];
        let mut size = 1;
        for &a in axes.iter().rev() {
            out_stride[a] = size;
            size *= self.dims[a];
        }
        let mut out = vec![0.0; size];
        let mut index = vec![0usize; self.dims.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // odometer increment, last axis fastest
            for ax in (0..self.dims.len()).rev() {
                index[ax] += 1;
                target += out_stride[ax];
                if index[ax] < self.dims[ax] {
                    break;
                }
                target -= out_stride[ax] * self.dims[ax];
                index[ax] = 0;
            }
        }
        out
    }

    /// Joint entropy of the variables on `axes` (empty set gives 0).
    pub fn entropy_of_axes(&self, axes: &[usize]) -> Result<f64> {
        let mut seen = vec![false; self.dims.len()];
        self.check_axes(axes, &mut seen)?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal_unchecked(axes)))
    }
}

/// Entropy of a pmf in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn check_disjoint(joint: &JointTable, groups: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; joint.ndim()];
    for g in groups {
        joint.check_axes(g, &mut seen)?;
    }
    Ok(())
}

/// `H(target | given)`.
pub fn conditional_entropy(joint: &JointTable, target: &[usize], given: &[usize]) -> Result<f64> {
    check_disjoint(joint, &[target, given])?;
    let h = joint.entropy_of_axes(&concat(target, given))? - joint.entropy_of_axes(given)?;
    Ok(clamp_nonneg(h))
}

/// `I(X; Y)` between two disjoint groups of axes.
pub fn mutual_information(joint: &JointTable, x: &[usize], y: &[usize]) -> Result<f64> {
    check_disjoint(joint, &[x, y])?;
    let i = joint.entropy_of_axes(x)? + joint.entropy_of_axes(y)? - joint.entropy_of_axes(&concat(x, y))?;
    Ok(clamp_nonneg(i))
}

/// `I(X; Y | Z)`.
pub fn conditional_mutual_information(joint: &JointTable, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    check_disjoint(joint, &[x, y, z])?;
    let xz = concat(x, z);
    let yz = concat(y, z);
    let xyz = concat(&xz, y);
    let i = joint.entropy_of_axes(&xz)? + joint.entropy_of_axes(&yz)?
        - joint.entropy_of_axes(&xyz)?
        - joint.entropy_of_axes(z)?;
    Ok(clamp_nonneg(i))
}

/// Binary entropy function.
pub fn h2(x: f64) -> Result<f64> {
    check_unit("h2 argument", x)?;
    Ok(h2_unchecked(x))
}

pub(crate) fn h2_unchecked(x: f64) -> f64 {
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).log2();
    }
    h
}

/// Binary convolution `a(1-b) + (1-a)b`.
pub fn star(a: f64, b: f64) -> Result<f64> {
    check_unit("star argument", a)?;
    check_unit("star argument", b)?;
    Ok(star_unchecked(a, b))
}

pub(crate) fn star_unchecked(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Distortion measure `d(a, â)` with values in `[0, d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    source_size: usize,
    reconstruction_size: usize,
    values: Vec<f64>,
    d_max: f64,
}

impl DistortionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let source_size = rows.len();
        if source_size == 0 {
            return Err(InfoError::DimensionMismatch("empty distortion matrix".into()));
        }
        let reconstruction_size = rows[0].len();
        let mut values = Vec::with_capacity(source_size * reconstruction_size);
        for row in &rows {
            if row.len() != reconstruction_size {
                return Err(InfoError::DimensionMismatch("ragged distortion matrix".into()));
            }
            for &d in row {
                if !d.is_finite() || d < 0.0 {
                    return Err(InfoError::Domain(format!("distortion entry {d}")));
                }
            }
            values.extend_from_slice(row);
        }
        let d_max = values.iter().copied().fold(0.0, f64::max);
        Ok(Self { source_size, reconstruction_size, values, d_max })
    }

    /// `d(a, â) = [a ≠ â]`.
    pub fn hamming(size: usize) -> Self {
        let mut values = vec![1.0; size * size];
        for i in 0..size {
            values[i * size + i] = 0.0;
        }
        Self { source_size: size, reconstruction_size: size, values, d_max: 1.0 }
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn reconstruction_size(&self) -> usize {
        self.reconstruction_size
    }

    pub fn get(&self, a: usize, a_hat: usize) -> f64 {
        self.values[a * self.reconstruction_size + a_hat]
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.reconstruction_size).map(<[f64]>::to_vec).collect()
    }
}

/// One conditional factor `p(children | parents)` of a directed factorization.
///
/// The table's input index enumerates the parents row-major (first parent
/// slowest); the output index enumerates the children the same way.
#[derive(Debug, Clone)]
pub struct Factor {
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
    pub table: CondPmf,
}

impl Factor {
    pub fn marginal(children: Vec<usize>, p: &Pmf) -> Self {
        Self { parents: vec![], children, table: CondPmf::from_pmf(p) }
    }

    pub fn conditional(parents: Vec<usize>, children: Vec<usize>, table: CondPmf) -> Self {
        Self { parents, children, table }
    }
}

/// Multiplies the factors into the joint over variables with alphabet sizes
/// `sizes`. Factors must be listed so that every parent has been introduced
/// as a child of an earlier factor, and every variable is introduced exactly once.
pub fn assemble_joint(sizes: &[usize], factors: &[Factor]) -> Result<JointTable> {
    let n = sizes.len();
    let mut introduced = vec![false; n];
    for (f_idx, f) in factors.iter().enumerate() {
        for &p in &f.parents {
            if p >= n {
                return Err(InfoError::AxisOutOfRange { axis: p, ndim: n });
            }
            if !introduced[p] {
                return Err(InfoError::CyclicWiring(format!(
                    "factor {f_idx} conditions on variable {p} before it is introduced"
                )));
            }
        }
        for &c in &f.children {
            if c >= n {
                return Err(InfoError::AxisOutOfRange { axis: c, ndim: n });
            }
            if introduced[c] {
                return Err(InfoError::CyclicWiring(format!("variable {c} introduced twice")));
            }
            introduced[c] = true;
        }
        let in_size: usize = f.parents.iter().map(|&p| sizes[p]).product();
        let out_size: usize = f.children.iter().map(|&c| sizes[c]).product();
        if f.table.input_size() != in_size || f.table.output_size() != out_size {
            return Err(InfoError::DimensionMismatch(format!(
                "factor {f_idx} is {}x{}, wiring needs {in_size}x{out_size}",
                f.table.input_size(),
                f.table.output_size()
            )));
        }
    }
    if let Some(v) = introduced.iter().position(|&b| !b) {
        return Err(InfoError::CyclicWiring(format!("variable {v} never introduced")));
    }
    let cells = sizes.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if cells > MAX_TABLE_CELLS {
        return Err(InfoError::TableTooLarge(cells));
    }

    let flat_of = |vars: &[usize], index: &[usize]| vars.iter().fold(0, |acc, &v| acc * sizes[v] + index[v]);
    let mut probs = Vec::with_capacity(cells);
    let mut index = vec![0usize; n];
    for _ in 0..cells {
        let mut p = 1.0;
        for f in factors {
            p *= f.table.get(flat_of(&f.parents, &index), flat_of(&f.children, &index));
            if p == 0.0 {
                break;
            }
        }
        probs.push(p);
        for ax in (0..n).rev() {
            index[ax] += 1;
            if index[ax] < sizes[ax] {
                break;
            }
            index[ax] = 0;
        }
    }
    // renormalize away the rounding drift of long products
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(InfoError::InvalidPmf(format!("assembled joint sums to {total}")));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(JointTable { dims: sizes.to_vec(), probs })
}
