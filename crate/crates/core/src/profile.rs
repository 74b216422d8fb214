//! Strategy profiles and the dense linear-algebra kernel shared by the solvers.
//!
//! A profile is a flat vector holding every player's action block back to
//! back; [`ProfileLayout`] records where each block starts. All arithmetic is
//! done in `f64` on plain slices, which keeps the hot loops allocation-light.

use std::ops::{Deref, Range};

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, GneError, Result};

/// Per-player block sizes and their prefix offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ProfileLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl ProfileLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(GneError::InvalidParameter("a layout needs at least one player".into()));
        }
        if dims.contains(&0) {
            return Err(GneError::InvalidParameter("every action block needs dimension >= 1".into()));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        offsets.push(0);
        for &m in &dims {
            offsets.push(offsets.last().unwrap() + m);
        }
        Ok(Self { dims, offsets })
    }

    /// `n` players with `m` actions each.
    pub fn uniform(num_players: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; num_players])
    }

    pub fn num_players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dim(&self, player: usize) -> usize {
        self.dims[player]
    }

    pub fn total_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Index range of `player`'s block inside a flat profile.
    pub fn range(&self, player: usize) -> Range<usize> {
        self.offsets[player]..self.offsets[player + 1]
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.num_players() {
            Ok(())
        } else {
            Err(GneError::IndexOutOfRange { index: player, num_players: self.num_players() })
        }
    }

    pub fn check_profile(&self, values: &[f64]) -> Result<()> {
        check_len(self.total_len(), values.len())
    }
}

impl TryFrom<Vec<usize>> for ProfileLayout {
    type Error = GneError;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<ProfileLayout> for Vec<usize> {
    fn from(layout: ProfileLayout) -> Self {
        layout.dims
    }
}

/// A joint action profile `a = (a_1, ..., a_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    layout: ProfileLayout,
    values: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(layout: ProfileLayout, values: Vec<f64>) -> Result<Self> {
        layout.check_profile(&values)?;
        check_finite(&values, "strategy profile")?;
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: ProfileLayout) -> Self {
        let values = vec![0.0; layout.total_len()];
        Self { layout, values }
    }

    pub fn layout(&self) -> &ProfileLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn block(&self, player: usize) -> Result<&[f64]> {
        self.layout.check_player(player)?;
        Ok(&self.values[self.layout.range(player)])
    }

    pub fn block_mut(&mut self, player: usize) -> Result<&mut [f64]> {
        self.layout.check_player(player)?;
        let range = self.layout.range(player);
        Ok(&mut self.values[range])
    }

    pub fn set_block(&mut self, player: usize, block: &[f64]) -> Result<()> {
        self.layout.check_player(player)?;
        check_len(self.layout.dim(player), block.len())?;
        check_finite(block, "action block")?;
        let range = self.layout.range(player);
        self.values[range].copy_from_slice(block);
        Ok(())
    }

    /// Copy of the profile with `player`'s block swapped for `block`, i.e. `(b_i, a_{-i})`.
    pub fn replace_block(&self, player: usize, block: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_block(player, block)?;
        Ok(out)
    }
}

impl Deref for StrategyProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for StrategyProfile {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Writes `(b_i, a_{-i})` into `out` without allocating.
pub(crate) fn mix_into(layout: &ProfileLayout, a: &[f64], player: usize, b: &[f64], out: &mut [f64]) {
    out.copy_from_slice(a);
    let range = layout.range(player);
    out[range.clone()].copy_from_slice(&b[range]);
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(GneError::InvalidParameter("matrix must be nonempty".into()));
        }
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GneError::InvalidParameter("ragged matrix rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (k, &d) in entries.iter().enumerate() {
            data[k * n + k] = d;
        }
        Self::from_row_major(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// `out = M x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(&self.data[r * self.cols..(r + 1) * self.cols], x);
        }
    }

    /// `out = Mᵀ x`
    pub fn tr_mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            axpy(xr, &self.data[r * self.cols..(r + 1) * self.cols], out);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_mul_vec_into(x, &mut out);
        out
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.rows).map(|r| x[r] * dot(&self.data[r * self.cols..(r + 1) * self.cols], y)).sum()
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        spectral_norm(self)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = GneError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.data.chunks(m.cols).map(<[f64]>::to_vec).collect()
    }
}

const POWER_MAX_ITERS: usize = 10_000;
const POWER_REL_TOL: f64 = 1e-15;

/// Largest singular value by power iteration on `MᵀM`.
///
/// Starts from the all-ones vector. A second deterministic start is also run
/// so that a top singular vector orthogonal to the ones vector is still found;
/// the larger estimate wins.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    check_finite(&m.data, "matrix")?;
    let ones = vec![1.0; m.cols];
    let skewed: Vec<f64> = (0..m.cols).map(|k| ((k as f64 + 1.0) * 0.7548776662466927).fract() - 0.5).collect();
    Ok(power_iteration(m, ones).max(power_iteration(m, skewed)))
}

fn power_iteration(m: &Matrix, start: Vec<f64>) -> f64 {
    let mut v = start;
    let n0 = norm(&v);
    if n0 == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= n0);
    let mut mv = vec![0.0; m.rows];
    let mut w = vec![0.0; m.cols];
    let mut sigma_sq = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        m.mul_vec_into(&v, &mut mv);
        let rayleigh = dot(&mv, &mv);
        m.tr_mul_vec_into(&mv, &mut w);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / wn);
        let converged = (rayleigh - sigma_sq).abs() <= POWER_REL_TOL * rayleigh;
        sigma_sq = rayleigh;
        if converged {
            break;
        }
    }
    sigma_sq.sqrt()
}
