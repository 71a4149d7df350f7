//! Serialization helpers shared by the report records.

use serde::{Serialize, Serializer};

use crate::linalg::CMat;

/// A complex matrix as nested rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct MatrixRecord(pub Vec<Vec<[f64; 2]>>);

impl From<&CMat> for MatrixRecord {
    fn from(m: &CMat) -> Self {
        MatrixRecord(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixRecord {
    /// Converts back to a matrix; rows must have equal length.
    pub fn to_matrix(&self) -> Option<CMat> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |r| r.len());
        if self.0.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(CMat::from_fn(rows, cols, |i, j| {
            crate::linalg::c(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

pub fn serialize_matrix<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
    MatrixRecord::from(m).serialize(s)
}
