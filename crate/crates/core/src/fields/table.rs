use std::path::Path;

use crate::error::{Error, Result};

/// Reads `z,B1,B3` columns (header required, SI units).
pub(super) fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["z", "B1", "B3"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::domain(format!(
            "{}: expected header `z,B1,B3`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut z, mut b1, mut b3) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|e| {
                Error::domain(format!(
                    "{}: row {} column {}: {e}",
                    path.display(),
                    line + 2,
                    expected[i]
                ))
            })
        };
        z.push(parse(0)?);
        b1.push(parse(1)?);
        b3.push(parse(2)?);
    }
    Ok((z, b1, b3))
}
