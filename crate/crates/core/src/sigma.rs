//! Fibre angles `c_m = cos(pi m / (c+1))`, `s_m = sin(pi m / (c+1))` and the
//! coefficient matrices relating the monomial bases of binary forms under the
//! corresponding rotation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{AdhmError, Result};
use crate::linalg::{real, ComplexMatrix};

/// Largest `n` accepted by [`binomial`].
pub const MAX_BINOMIAL_N: u64 = 64;

/// Exact binomial coefficient for `n <= 64`.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if n > MAX_BINOMIAL_N {
        return Err(AdhmError::Domain(format!(
            "binomial({n}, {k}) exceeds the supported range n <= {MAX_BINOMIAL_N}"
        )));
    }
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub c_base: usize,
    pub m: i64,
    pub cos_val: f64,
    pub sin_val: f64,
}

/// The angle `pi m / (c_base + 1)`. Quarter turns are returned exactly, and
/// `angle_pair(c, -m)` is the exact mirror of `angle_pair(c, m)`.
pub fn angle_pair(c_base: usize, m: i64) -> Result<AnglePair> {
    if c_base == 0 {
        return Err(AdhmError::Domain("the chart base c must be at least 1".into()));
    }
    let denom = c_base as u64 + 1;
    let k = m.unsigned_abs() % (2 * denom);
    let (cos_val, sin_abs) = if (2 * k).is_multiple_of(denom) {
        match (2 * k) / denom {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let theta = std::f64::consts::PI * k as f64 / denom as f64;
        (theta.cos(), theta.sin())
    };
    let sin_val = if m < 0 { -sin_abs } else { sin_abs };
    // normalize -0.0
    let sin_val = if sin_val == 0.0 { 0.0 } else { sin_val };
    Ok(AnglePair {
        c_base,
        m,
        cos_val,
        sin_val,
    })
}

/// `sigma^h_m`, row `p`, column `q`: the coefficient of `mu2^q mu1^(h-q)` in
/// `(s mu1 + c mu2)^p (c mu1 - s mu2)^(h-p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMatrix {
    pub h: usize,
    pub m: i64,
    pub c_base: usize,
    pub entries: DMatrix<f64>,
}

/// Coefficients of `(a + b t)^k` in increasing powers of `t`.
fn binomial_expansion(a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    (0..=k)
        .map(|j| {
            let coeff = binomial(k as u64, j as u64)? as f64;
            Ok(coeff * a.powi((k - j) as i32) * b.powi(j as i32))
        })
        .collect()
}

fn poly_mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn sigma_matrix(h: usize, m: i64, c_base: usize) -> Result<SigmaMatrix> {
    let ang = angle_pair(c_base, m)?;
    let (c, s) = (ang.cos_val, ang.sin_val);
    let mut entries = DMatrix::<f64>::zeros(h + 1, h + 1);
    for p in 0..=h {
        // mu1 = 1, mu2 = t
        let left = binomial_expansion(s, c, p)?;
        let right = binomial_expansion(c, -s, h - p)?;
        for (q, v) in poly_mul(&left, &right).into_iter().enumerate() {
            entries[(p, q)] = v;
        }
    }
    Ok(SigmaMatrix {
        h,
        m,
        c_base,
        entries,
    })
}

impl SigmaMatrix {
    pub fn size(&self) -> usize {
        self.h + 1
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[(p, q)]
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.entries.map(real)
    }

    /// Nested rows of the matrix, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.size())
            .map(|p| (0..self.size()).map(|q| self.entries[(p, q)]).collect())
            .collect()
    }
}
