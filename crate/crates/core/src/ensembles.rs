//! Random measurement matrices and test signals.
//!
//! Every generator is a pure function of its arguments. Matrix column `j`
//! is drawn from its own stream `(seed, j)`, so the entries do not depend
//! on generation order.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};

const GAUSSIAN_TAG: u64 = 0x6761_7573;
const SPHERE_TAG: u64 = 0x7370_6872;
const SPARSE_TAG: u64 = 0x7370_7273;
const MIXED_TAG: u64 = 0x6d69_7864;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Gaussian,
    UniformSphere,
    External,
}

impl Ensemble {
    /// Code stored in the binary matrix header.
    pub fn code(self) -> u8 {
        match self {
            Ensemble::Gaussian => 0,
            Ensemble::UniformSphere => 1,
            Ensemble::External => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Ensemble::Gaussian),
            1 => Some(Ensemble::UniformSphere),
            2 => Some(Ensemble::External),
            _ => None,
        }
    }
}

/// Dense real `rows × cols` matrix, stored row-major, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    ensemble: Ensemble,
    seed: u64,
}

impl MeasurementMatrix {
    /// Wrap caller-supplied row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_provenance(rows, cols, data, Ensemble::External, 0)
    }

    pub fn with_provenance(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        ensemble: Ensemble,
        seed: u64,
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}×{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(MeasurementMatrix {
            rows,
            cols,
            data,
            ensemble,
            seed,
        })
    }

    /// Build from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(m, n, rows.concat())
    }

    /// Build from a list of columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        Self::from_row_major(m, n, transpose_columns(columns, m))
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_row_major(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.column_norm(j))
            .fold(0.0, f64::max)
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `Aᵀ·y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_mul_vec_into(y, &mut out);
        out
    }

    pub fn tr_mul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * a;
                }
            }
        }
    }

    /// `c·A`, keeping provenance.
    pub fn scaled(&self, c: f64) -> Self {
        MeasurementMatrix {
            data: self.data.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Matrix whose column `j` is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.cols];
        if perm.len() != self.cols || perm.iter().any(|&p| p >= self.cols || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the columns"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(perm.iter().map(|&p| row[p]));
        }
        Ok(MeasurementMatrix {
            data,
            ..self.clone()
        })
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "matrix dimensions must be positive, got {rows}×{cols}"
        )));
    }
    Ok(())
}

fn transpose_columns(columns: &[Vec<f64>], m: usize) -> Vec<f64> {
    let n = columns.len();
    let mut data = vec![0.0; m * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            data[i * n + j] = v;
        }
    }
    data
}

fn normal_vec(rng: &mut StreamRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform draw from the unit sphere in `R^dim`.
pub(crate) fn sphere_point(rng: &mut StreamRng, dim: usize) -> Vec<f64> {
    loop {
        let mut v = normal_vec(rng, dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// I.i.d. `N(0, 1/M)` entries: standard deviation `1/√M`, so every column
/// has expected squared norm one.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    check_dims(m, n)?;
    let sd = 1.0 / (m as f64).sqrt();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut rng = stream_rng(seed, &[GAUSSIAN_TAG, j as u64]);
            normal_vec(&mut rng, m).into_iter().map(|v| v * sd).collect()
        })
        .collect();
    MeasurementMatrix::with_provenance(
        m,
        n,
        transpose_columns(&columns, m),
        Ensemble::Gaussian,
        seed,
    )
}

/// Columns drawn independently and uniformly from the unit sphere in `R^M`.
pub fn gen_uniform_sphere(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    check_dims(m, n)?;
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| sphere_point(&mut stream_rng(seed, &[SPHERE_TAG, j as u64]), m))
        .collect();
    MeasurementMatrix::with_provenance(
        m,
        n,
        transpose_columns(&columns, m),
        Ensemble::UniformSphere,
        seed,
    )
}

/// Uniformly random size-`s` subset of `0..n`, sorted ascending.
pub fn random_support(rng: &mut StreamRng, n: usize, s: usize) -> Vec<usize> {
    let mut support = index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    support
}

/// Standard normal draws with exact zeros rejected.
fn nonzero_normals(rng: &mut StreamRng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        })
        .collect()
}

/// Scatter `values` onto `support` in a length-`n` zero vector.
pub fn place_on_support(values: &[f64], support: &[usize], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (&i, &v) in support.iter().zip(values) {
        x[i] = v;
    }
    x
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Exactly `s`-sparse vector on a uniformly random support with standard
/// normal nonzeros.
pub fn gen_sparse_signal(n: usize, s: usize, seed: u64) -> Result<Vec<f64>> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("sparsity must satisfy 1 ≤ S ≤ N, got S={s}, N={n}")));
    }
    let mut rng = stream_rng(seed, &[SPARSE_TAG]);
    let support = random_support(&mut rng, n, s);
    let values = nonzero_normals(&mut rng, s);
    Ok(place_on_support(&values, &support, n))
}

/// `x(j) = c·j^(−1/q)` (1-based `j`) scaled to unit ℓ² norm.
pub fn gen_powerlaw_signal(n: usize, q: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("signal length must be positive"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!("power-law exponent q must lie in (0, 1], got {q}")));
    }
    let raw: Vec<f64> = (1..=n).map(|j| (j as f64).powf(-1.0 / q)).collect();
    Ok(unit(raw))
}

/// Output of [`gen_mixed_signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSignal {
    pub x: Vec<f64>,
    pub support: Vec<usize>,
}

/// `x = x_T + λ·z_{T^c}` with `‖x_T‖₂ = ‖z_{T^c}‖₂ = 1` on a random size-`s`
/// support `T`.
///
/// The best `s`-term ℓ² error equals `λ` only when the head dominates the
/// tail entrywise; no ordering is enforced here.
pub fn gen_mixed_signal(n: usize, s: usize, lambda: f64, seed: u64) -> Result<MixedSignal> {
    if s == 0 || s >= n {
        return Err(Error::invalid(format!("mixed signal needs 1 ≤ S < N, got S={s}, N={n}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("λ must be a finite nonnegative number, got {lambda}")));
    }
    let mut rng = stream_rng(seed, &[MIXED_TAG]);
    let support = random_support(&mut rng, n, s);
    let head = unit(nonzero_normals(&mut rng, s));
    let tail = unit(nonzero_normals(&mut rng, n - s));
    Ok(MixedSignal {
        x: compose_mixed(&head, &tail, &support, lambda, n),
        support,
    })
}

/// Place unit-norm `head` on `support` and `lambda·tail` on its complement
/// (in increasing index order).
pub fn compose_mixed(
    head: &[f64],
    tail: &[f64],
    support: &[usize],
    lambda: f64,
    n: usize,
) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut in_support = vec![false; n];
    for (&i, &v) in support.iter().zip(head) {
        x[i] = v;
        in_support[i] = true;
    }
    let complement = (0..n).filter(|&i| !in_support[i]);
    for (i, &v) in complement.zip(tail) {
        x[i] = lambda * v;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    ExactSparse { s: usize },
    PowerLaw { q: f64 },
    Mixed { s: usize, lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub n: usize,
    pub kind: SignalKind,
    pub seed: u64,
}

impl SignalSpec {
    pub fn generate(&self) -> Result<Vec<f64>> {
        match self.kind {
            SignalKind::ExactSparse { s } => gen_sparse_signal(self.n, s, self.seed),
            SignalKind::PowerLaw { q } => gen_powerlaw_signal(self.n, q),
            SignalKind::Mixed { s, lambda } => {
                gen_mixed_signal(self.n, s, lambda, self.seed).map(|m| m.x)
            }
        }
    }
}
