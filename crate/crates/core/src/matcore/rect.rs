use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CMat, C64};
use crate::error::{Error, Result};

/// Dense `rows x cols` complex matrix with no structural constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix {
    m: CMat,
}

impl RectMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Shape("rectangular matrix must be nonempty".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        Ok(Self { m })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { m: CMat::zeros(rows, cols) }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(CMat::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(rows: usize, cols: usize, real: &[f64], imag: &[f64]) -> Result<Self> {
        if real.len() != rows * cols || imag.len() != rows * cols {
            return Err(Error::Shape(format!("expected {} entries for a {rows}x{cols} matrix", rows * cols)));
        }
        Self::new(CMat::from_fn(rows, cols, |i, j| C64::new(real[i * cols + j], imag[i * cols + j])))
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        if self.m.shape() != other.m.shape() {
            return Err(Error::Shape("rectangular shapes differ".into()));
        }
        Ok(Self { m: &self.m - &other.m })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.m.shape() != other.m.shape() {
            return Err(Error::Shape("rectangular shapes differ".into()));
        }
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { m: &self.m * C64::new(a, 0.0) }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RectJson {
    rows: usize,
    cols: usize,
    real: Vec<f64>,
    #[serde(default)]
    imag: Option<Vec<f64>>,
}

impl Serialize for RectMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (r, c) = (self.rows(), self.cols());
        RectJson {
            rows: r,
            cols: c,
            real: (0..r * c).map(|k| self.m[(k / c, k % c)].re).collect(),
            imag: Some((0..r * c).map(|k| self.m[(k / c, k % c)].im).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RectMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RectJson::deserialize(d)?;
        if raw.rows > 4096 || raw.cols > 4096 {
            return Err(serde::de::Error::custom("unsupported dimension"));
        }
        let imag = raw.imag.unwrap_or_else(|| vec![0.0; raw.real.len()]);
        RectMatrix::from_parts(raw.rows, raw.cols, &raw.real, &imag).map_err(serde::de::Error::custom)
    }
}
