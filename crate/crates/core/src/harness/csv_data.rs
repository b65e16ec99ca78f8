use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSelector {
    /// Header name, matched case-sensitively.
    Name(String),
    /// 0-based column index.
    Index(usize),
    Last,
}

impl ResponseSelector {
    /// A header name, or a bare integer taken as a column index.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ResponseSelector::Index(i),
            Err(_) => ResponseSelector::Name(s.to_string()),
        }
    }
}

/// Header plus numeric cells of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let row = record
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    let column = headers.get(c).cloned().unwrap_or_else(|| c.to_string());
                    let v: f64 = cell.parse().map_err(|_| Error::Parse {
                        row: r + 1,
                        column: column.clone(),
                        message: format!("cannot parse {cell:?} as a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::NonFiniteValue {
                            location: format!("row {}, column {column:?}", r + 1),
                        });
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != headers.len() {
                return Err(Error::Parse {
                    row: r + 1,
                    column: String::new(),
                    message: format!("{} cells, header has {}", row.len(), headers.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn response_column(&self, selector: &ResponseSelector) -> Option<usize> {
        match selector {
            ResponseSelector::Name(name) => self.headers.iter().position(|h| h == name),
            ResponseSelector::Index(i) => (*i < self.headers.len()).then_some(*i),
            ResponseSelector::Last => self.headers.len().checked_sub(1),
        }
    }

    /// Splits off the response column.
    pub fn into_dataset(self, response: usize) -> Result<Dataset> {
        let features: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != response)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let responses = self.rows.iter().map(|r| r[response]).collect();
        Dataset::from_rows(&features, responses)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::Io {
                path: path.to_path_buf(),
                source: io,
            };
        }
        unreachable!("io error kind checked above");
    }
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        row,
        column: String::new(),
        message: e.to_string(),
    }
}

/// Reads a CSV with a header row; `selector` picks the response column and
/// every other column becomes a feature.
pub fn load_csv(path: &Path, selector: &ResponseSelector) -> Result<Dataset> {
    let table = NumericTable::read(path)?;
    let col = table
        .response_column(selector)
        .ok_or_else(|| Error::Parse {
            row: 0,
            column: format!("{selector:?}"),
            message: "response column not found in header".into(),
        })?;
    table.into_dataset(col)
}

/// Feature rows and, when present, their responses.
pub type TestRows = (Vec<Vec<f64>>, Option<Vec<f64>>);

/// Test rows for prediction. A file with `n_features + 1` columns carries
/// responses in the selected column; one with exactly `n_features` columns
/// is features only.
pub fn load_test_csv(
    path: &Path,
    selector: &ResponseSelector,
    n_features: usize,
) -> Result<TestRows> {
    let table = NumericTable::read(path)?;
    let width = table.headers.len();
    if width == n_features {
        return Ok((table.rows, None));
    }
    if width != n_features + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} has {width} columns, expected {n_features} or {}",
            path.display(),
            n_features + 1
        )));
    }
    let col = table
        .response_column(selector)
        .ok_or_else(|| Error::Parse {
            row: 0,
            column: format!("{selector:?}"),
            message: "response column not found in header".into(),
        })?;
    let data = table.into_dataset(col)?;
    Ok((
        data.rows().map(<[f64]>::to_vec).collect(),
        Some(data.responses().to_vec()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn last_column_response() {
        let f = write("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let d = load_csv(f.path(), &ResponseSelector::Last).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.row(2), &[7.0, 8.0]);
        assert_eq!(d.responses(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn named_response_is_case_sensitive() {
        let f = write("Y,x\n1,2\n3,4\n");
        let d = load_csv(f.path(), &ResponseSelector::parse("Y")).unwrap();
        assert_eq!(d.responses(), &[1.0, 3.0]);
        assert!(load_csv(f.path(), &ResponseSelector::parse("y")).is_err());
    }

    #[test]
    fn bad_cell_is_located() {
        let f = write("a,y\n1,2\n3,oops\n");
        match load_csv(f.path(), &ResponseSelector::Last) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn test_file_with_or_without_response() {
        let f = write("a,b,y\n1,2,3\n");
        let (rows, ys) = load_test_csv(f.path(), &ResponseSelector::Last, 2).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0]]);
        assert_eq!(ys, Some(vec![3.0]));
        let g = write("a,b\n1,2\n");
        let (rows, ys) = load_test_csv(g.path(), &ResponseSelector::Last, 2).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0]]);
        assert_eq!(ys, None);
        assert!(load_test_csv(g.path(), &ResponseSelector::Last, 5).is_err());
    }

    #[test]
    fn missing_file() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), &ResponseSelector::Last).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn non_finite_cell() {
        let f = write("a,y\ninf,2\n");
        assert!(matches!(
            load_csv(f.path(), &ResponseSelector::Last),
            Err(Error::NonFiniteValue { .. })
        ));
    }
}
