//! Matrix JSON format: `{"rows": r, "cols": c, "entries": [[re, im], ...]}`,
//! row-major; real entries may be written as `[re]`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDocument {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixDocument> for ComplexMatrix {
    type Error = Error;

    fn try_from(doc: MatrixDocument) -> Result<Self> {
        let mut data = Vec::with_capacity(doc.entries.len());
        for (k, e) in doc.entries.iter().enumerate() {
            let z = match e.as_slice() {
                [re] => Complex64::new(*re, 0.0),
                [re, im] => Complex64::new(*re, *im),
                _ => {
                    return Err(Error::Parse(format!(
                        "entry {k} has {} components, expected [re] or [re, im]",
                        e.len()
                    )))
                }
            };
            data.push(z);
        }
        if data.len() != doc.rows * doc.cols {
            return Err(Error::Parse(format!(
                "{}x{} matrix needs {} entries, found {}",
                doc.rows,
                doc.cols,
                doc.rows * doc.cols,
                data.len()
            )));
        }
        ComplexMatrix::from_row_major(doc.rows, doc.cols, data)
    }
}

impl From<&ComplexMatrix> for MatrixDocument {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| vec![z.re, z.im]).collect(),
        }
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let doc: MatrixDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.try_into()
}

pub fn matrix_from_value(value: serde_json::Value) -> Result<ComplexMatrix> {
    let doc: MatrixDocument = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    doc.try_into()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixDocument::from(m)).expect("matrix document serializes")
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> std::io::Result<()> {
    let mut text = matrix_to_json(m);
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accepts_real_singletons() {
        let m = matrix_from_json(r#"{"rows":2,"cols":2,"entries":[[1],[0,2],[0,-2],[3]]}"#).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(m[(1, 1)], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matrix_from_json(r#"{"rows":2,"cols":2,"entries":[[1],[2]]}"#).is_err());
        assert!(matrix_from_json(r#"{"rows":1,"cols":1,"entries":[[1,2,3]]}"#).is_err());
        assert!(matrix_from_json(r#"{"rows":1,"cols":1,"entries":[[1]],"extra":0}"#).is_err());
        assert!(matrix_from_json(r#"{"rows":1,"cols":1,"entr"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut rng = crate::numerics::RngStream::new(seed, 0).generator();
            let m = ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_normal() * 1e3);
            let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
