use std::io::Read;
use std::path::Path;

use super::IoError;
use crate::spatial::PointSet;

/// Points with optional ground-truth labels (empty when unlabeled).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: PointSet,
    pub labels: Vec<i64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_labels(&self) -> bool {
        !self.labels.is_empty()
    }
}

/// Reads a CSV file of real features with an optional trailing integer
/// label column. A first row that does not parse is taken as a header.
/// Row numbers in errors are 1-based file lines.
pub fn load_csv(path: &Path, has_labels: bool, normalize: bool) -> Result<Dataset, IoError> {
    read_csv(std::fs::File::open(path)?, has_labels, normalize)
}

pub fn read_csv(reader: impl Read, has_labels: bool, normalize: bool) -> Result<Dataset, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut arity = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, String> = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| f.to_string()))
            .collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if row == 1 => continue,
            Err(value) => return Err(IoError::ParseError { row, value }),
        };
        let expected = *arity.get_or_insert(values.len());
        if values.len() != expected {
            return Err(IoError::ArityMismatch {
                row,
                expected,
                found: values.len(),
            });
        }
        if has_labels {
            let (features, label) = values.split_at(values.len() - 1);
            let l = label[0];
            if l.fract() != 0.0 || !l.is_finite() {
                return Err(IoError::ParseError {
                    row,
                    value: record.get(record.len() - 1).unwrap_or("").to_string(),
                });
            }
            labels.push(l as i64);
            rows.push(features.to_vec());
        } else {
            rows.push(values);
        }
    }
    let dim = rows.first().ok_or(IoError::NoRows)?.len();
    if dim == 0 {
        return Err(IoError::Config("label column given but no features".into()));
    }
    let mut points = PointSet::from_rows(&rows)?;
    if normalize {
        points = min_max_normalize(&points);
    }
    Ok(Dataset { points, labels })
}

/// Rescales every feature to `[0, 1]`. Constant features map to 0.
pub fn min_max_normalize(ps: &PointSet) -> PointSet {
    let d = ps.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for (_, x) in ps.iter() {
        for j in 0..d {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    let rows: Vec<Vec<f64>> = ps
        .iter()
        .map(|(_, x)| {
            (0..d)
                .map(|j| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        (x[j] - lo[j]) / span
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    PointSet::with_ids(d, ps.ids(), &rows).expect("same ids and arity")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_rows_with_header() {
        let data = "x,y,label\n0,1,1\n2,3,1\n4,5,2\n6,7,2\n";
        let ds = read_csv(data.as_bytes(), true, false).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.labels, vec![1, 1, 2, 2]);
        assert_eq!(ds.points.coords(2).unwrap(), &[4.0, 5.0]);
    }

    #[test]
    fn ragged_row_reports_its_line() {
        let data = "0,1\n2,3\n4\n";
        match read_csv(data.as_bytes(), false, false) {
            Err(IoError::ArityMismatch {
                row: 3,
                expected: 2,
                found: 1,
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_its_line() {
        let data = "0,1\n2,x\n";
        assert!(matches!(
            read_csv(data.as_bytes(), false, false),
            Err(IoError::ParseError { row: 2, .. })
        ));
        let fractional_label = "0,1.5\n";
        assert!(matches!(
            read_csv(fractional_label.as_bytes(), true, false),
            Err(IoError::ParseError { row: 1, .. })
        ));
    }

    #[test]
    fn normalization() {
        let ds = read_csv("0,3\n5,3\n10,3\n".as_bytes(), false, true).unwrap();
        let xs: Vec<f64> = ds.points.iter().map(|(_, x)| x[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        assert!(ds.points.iter().all(|(_, x)| x[1] == 0.0));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            read_csv("".as_bytes(), false, true),
            Err(IoError::NoRows)
        ));
    }
}
