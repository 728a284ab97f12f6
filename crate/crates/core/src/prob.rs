//! Finite-alphabet probability arithmetic.
//!
//! All information quantities are in bits and use the `0·log 0 = 0`
//! convention. Constructors validate simplex membership to [`SIMPLEX_TOL`]
//! and never renormalize their input.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Tolerance on the total mass of a distribution.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn plog2p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plog2p(p)).sum()
}

fn validate_mass(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite non-negative mass"
            )));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!(
            "total mass is {total}, expected 1"
        )));
    }
    Ok(())
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_mass(&probs)?;
        Ok(Distribution(probs))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Distribution(vec![1.0 / size as f64; size]))
    }

    /// Point mass on `symbol`.
    pub fn degenerate(size: usize, symbol: usize) -> Result<Self> {
        if symbol >= size {
            return Err(Error::DimensionMismatch(format!(
                "symbol {symbol} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Ok(Distribution(probs))
    }

    /// `(p, 1 - p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Distribution(vec![p, 1.0 - p]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Row-stochastic table: one [`Distribution`] over outputs per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StochasticMatrix {
    rows: Vec<Distribution>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                Distribution::new(r).map_err(|e| match e {
                    Error::InvalidDistribution(m) => {
                        Error::InvalidDistribution(format!("row {i}: {m}"))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<Distribution>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidDistribution("matrix has no rows".into()));
        };
        let width = first.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, row 0 has {width}",
                r.len()
            )));
        }
        Ok(StochasticMatrix { rows })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|i| Distribution::degenerate(size, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Every row equal to `row`.
    pub fn constant(inputs: usize, row: &Distribution) -> Result<Self> {
        Self::from_rows(vec![row.clone(); inputs])
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, input: usize) -> &Distribution {
        &self.rows[input]
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    /// Cascade `self` then `next`: `(A·B)(z|x) = Σ_y A(y|x) B(z|y)`.
    pub fn then(&self, next: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.outputs() != next.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "cannot cascade a {}x{} table into a {}x{} table",
                self.inputs(),
                self.outputs(),
                next.inputs(),
                next.outputs()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..next.outputs())
                    .map(|z| {
                        r.probs()
                            .iter()
                            .enumerate()
                            .map(|(y, &a)| a * next.get(y, z))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        StochasticMatrix::new(rows)
    }

    /// Output distribution when inputs are drawn from `input`.
    pub fn push_forward(&self, input: &Distribution) -> Result<Distribution> {
        if input.len() != self.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "input distribution has {} symbols, table has {} rows",
                input.len(),
                self.inputs()
            )));
        }
        let out = (0..self.outputs())
            .map(|y| (0..self.inputs()).map(|x| input[x] * self.get(x, y)).sum())
            .collect();
        Distribution::new(out)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.probs().to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for StochasticMatrix {
    type Error = Error;

    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        StochasticMatrix::new(v)
    }
}

impl From<StochasticMatrix> for Vec<Vec<f64>> {
    fn from(m: StochasticMatrix) -> Self {
        m.to_vecs()
    }
}

/// A probability table over a product alphabet, stored row-major (last axis
/// fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    dims: Vec<usize>,
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(dims: Vec<usize>, labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "axis sizes {dims:?} must be non-empty and positive"
            )));
        }
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} axes",
                labels.len(),
                dims.len()
            )));
        }
        let cells: usize = dims.iter().product();
        if probs.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for axis sizes {dims:?}",
                probs.len()
            )));
        }
        validate_mass(&probs)?;
        Ok(JointDistribution {
            dims,
            labels,
            probs,
        })
    }

    /// Two-axis joint `a(x)·b(y)`.
    pub fn product(a: &Distribution, b: &Distribution) -> Self {
        let probs = a
            .probs()
            .iter()
            .flat_map(|&pa| b.probs().iter().map(move |&pb| pa * pb))
            .collect();
        JointDistribution {
            dims: vec![a.len(), b.len()],
            labels: vec!["A".into(), "B".into()],
            probs,
        }
    }

    /// Two-axis joint `input(x)·table(y|x)`.
    pub fn from_conditional(input: &Distribution, table: &StochasticMatrix) -> Result<Self> {
        if input.len() != table.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} symbols, table has {} rows",
                input.len(),
                table.inputs()
            )));
        }
        let probs = (0..input.len())
            .flat_map(|x| table.row(x).probs().iter().map(move |&t| input[x] * t))
            .collect();
        Ok(JointDistribution {
            dims: vec![input.len(), table.outputs()],
            labels: vec!["X".into(), "Y".into()],
            probs,
        })
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} axes",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let flat: usize = index.iter().zip(self.strides()).map(|(&i, s)| i * s).sum();
        self.probs[flat]
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (k, &a) in axes.iter().enumerate() {
            if a >= self.dims.len() {
                return Err(Error::DimensionMismatch(format!(
                    "axis {a} does not exist in a {}-axis joint",
                    self.dims.len()
                )));
            }
            if axes[..k].contains(&a) {
                return Err(Error::DimensionMismatch(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Joint of the kept `axes`, in the order given; all other axes summed out.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointDistribution> {
        if axes.is_empty() {
            return Err(Error::DimensionMismatch("no axes kept".into()));
        }
        self.check_axes(axes)?;
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out_strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            out_strides[k] = out_strides[k + 1] * dims[k + 1];
        }
        let mut probs = vec![0.0; dims.iter().product()];
        let mut index = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let flat: usize = axes
                .iter()
                .zip(&out_strides)
                .map(|(&a, s)| index[a] * s)
                .sum();
            probs[flat] += p;
            // odometer increment, last axis fastest
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < self.dims[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(JointDistribution {
            dims,
            labels: axes.iter().map(|&a| self.labels[a].clone()).collect(),
            probs,
        })
    }

    /// Single-axis marginal as a [`Distribution`].
    pub fn marginal_of(&self, axis: usize) -> Result<Distribution> {
        let m = self.marginal(&[axis])?;
        Ok(Distribution(m.probs))
    }

    /// Conditional of the remaining axes (flattened row-major, in original
    /// order) given `given`.
    pub fn conditional(&self, given: usize) -> Result<Conditional> {
        self.check_axes(&[given])?;
        let rest: Vec<usize> = (0..self.dims.len()).filter(|&a| a != given).collect();
        if rest.is_empty() {
            return Err(Error::DimensionMismatch(
                "conditioning a single-axis joint on itself".into(),
            ));
        }
        let mut order = vec![given];
        order.extend_from_slice(&rest);
        let reordered = self.marginal(&order)?;
        let width = reordered.probs.len() / self.dims[given];
        let mut undefined = Vec::with_capacity(self.dims[given]);
        let rows = reordered
            .probs
            .chunks(width)
            .map(|chunk| {
                let mass: f64 = chunk.iter().sum();
                if mass > 0.0 {
                    undefined.push(false);
                    Distribution(chunk.iter().map(|&p| p / mass).collect())
                } else {
                    undefined.push(true);
                    Distribution(vec![1.0 / width as f64; width])
                }
            })
            .collect();
        Ok(Conditional {
            matrix: StochasticMatrix { rows },
            undefined,
        })
    }
}

/// A conditional table extracted from a joint. Rows whose conditioning symbol
/// carries no mass are set to uniform and flagged in `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    pub matrix: StochasticMatrix,
    pub undefined: Vec<bool>,
}

/// Shannon entropy in bits.
pub fn entropy(d: &Distribution) -> f64 {
    entropy_of(d.probs())
}

/// `h(p) = -p log p - (1-p) log (1-p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(plog2p(p) + plog2p(1.0 - p))
}

/// `I(A;B) = H(A) + H(B) - H(A,B)` for a two-axis joint.
pub fn mutual_information(j: &JointDistribution) -> Result<f64> {
    if j.axes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "mutual information needs a two-axis joint, got {} axes",
            j.axes()
        )));
    }
    let a = j.marginal_of(0)?;
    let b = j.marginal_of(1)?;
    let mi = entropy(&a) + entropy(&b) - entropy_of(j.probs());
    Ok(mi.max(0.0))
}

fn same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `D(P||Q)` in bits.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    let mut d = 0.0;
    for (symbol, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::AbsoluteContinuity { symbol, p: a });
        }
        d += a * (a / b).log2();
    }
    Ok(d.max(0.0))
}

pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(l1_slices(p.probs(), q.probs()))
}

pub(crate) fn l1_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `prior(u)·signal(w|u)·response(v|w)` as a joint over `(U, W, V)`.
pub fn compose_markov(
    prior: &Distribution,
    signal: &StochasticMatrix,
    response: &StochasticMatrix,
) -> Result<JointDistribution> {
    if prior.len() != signal.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} states, signal has {} rows",
            prior.len(),
            signal.inputs()
        )));
    }
    if signal.outputs() != response.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} messages, response has {} rows",
            signal.outputs(),
            response.inputs()
        )));
    }
    let (nu, nw, nv) = (prior.len(), signal.outputs(), response.outputs());
    let mut probs = Vec::with_capacity(nu * nw * nv);
    for u in 0..nu {
        for w in 0..nw {
            let puw = prior[u] * signal.get(u, w);
            probs.extend(response.row(w).probs().iter().map(|&r| puw * r));
        }
    }
    Ok(JointDistribution {
        dims: vec![nu, nw, nv],
        labels: vec!["U".into(), "W".into(), "V".into()],
        probs,
    })
}
