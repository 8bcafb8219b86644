//! JSON schemas for golden files and debugging dumps.
//!
//! Complex numbers are serialized as `[re, im]` pairs; matrices as
//! `{ "rows": n, "cols": m, "data": [[re, im], ...] }` in row-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, Cplx};

/// Serde adapter for a complex scalar as a `[re, im]` pair.
pub mod complex_pair {
    use super::Cplx;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Cplx, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Cplx, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Cplx::new(re, im))
    }
}

/// Row-major JSON form of a complex matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let e = m[(i, j)];
                data.push([e.re, e.im]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<CMatrix> {
        if j.data.len() != j.rows * j.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix json claims {}x{} but carries {} entries",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        let mut m = CMatrix::zeros(j.rows, j.cols);
        for i in 0..j.rows {
            for c in 0..j.cols {
                let [re, im] = j.data[i * j.cols + c];
                m[(i, c)] = Cplx::new(re, im);
            }
        }
        Ok(m)
    }
}
