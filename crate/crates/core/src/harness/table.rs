//! Recorded input/output tables and their on-disk forms.
//!
//! Binary layout (a directory):
//!
//! ```text
//! manifest.json  {"format_version":1,"rows":n,"input_names":[..],"output_names":[..],
//!                 "dtype":"f64le","layout":"row-major"}
//! inputs.bin     n*d little-endian f64, row-major
//! outputs.bin    n*D little-endian f64, row-major
//! weights.bin    optional, n little-endian f64
//! ```
//!
//! The CSV form has a header naming inputs `in:<name>` and outputs `out:<name>`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::search::Dataset;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const INPUTS: &str = "inputs.bin";
pub const OUTPUTS: &str = "outputs.bin";
pub const WEIGHTS: &str = "weights.bin";

#[derive(Clone, Debug, PartialEq)]
pub struct IOTable {
    input_names: Vec<String>,
    output_names: Vec<String>,
    x: Matrix,
    y: Matrix,
}

impl IOTable {
    pub fn new(input_names: Vec<String>, output_names: Vec<String>, x: Matrix, y: Matrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::Shape(format!(
                "{} input rows but {} output rows",
                x.rows(),
                y.rows()
            )));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if input_names.len() != x.cols() || output_names.len() != y.cols() {
            return Err(Error::Shape(format!(
                "{} input names for {} columns, {} output names for {} columns",
                input_names.len(),
                x.cols(),
                output_names.len(),
                y.cols()
            )));
        }
        check_unique("input", &input_names)?;
        check_unique("output", &output_names)?;
        Ok(IOTable {
            input_names,
            output_names,
            x,
            y,
        })
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.x.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.y.cols()
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn inputs(&self) -> &Matrix {
        &self.x
    }

    pub fn outputs(&self) -> &Matrix {
        &self.y
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.input_names.iter().position(|n| n == name)
    }

    pub fn is_finite(&self) -> bool {
        self.x.all_finite() && self.y.all_finite()
    }

    /// Search dataset for output dimension `dim`.
    pub fn dataset(&self, dim: usize) -> Result<Dataset> {
        if dim >= self.n_outputs() {
            return Err(Error::Shape(format!(
                "output dimension {dim} out of range ({} outputs)",
                self.n_outputs()
            )));
        }
        Dataset::new(&self.x, &self.y.column(dim))
    }

    pub fn select_rows(&self, rows: &[usize]) -> IOTable {
        IOTable {
            input_names: self.input_names.clone(),
            output_names: self.output_names.clone(),
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
        }
    }

    pub(crate) fn with_inputs(&self, input_names: Vec<String>, x: Matrix) -> Result<IOTable> {
        IOTable::new(input_names, self.output_names.clone(), x, self.y.clone())
    }
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Data(format!("duplicate {kind} name `{n}`")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub format_version: u32,
    pub rows: usize,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub dtype: String,
    pub layout: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    pub allow_nonfinite: bool,
}

/// Loads a table from a binary table directory or a `.csv` file.
pub fn load_table(path: &Path, options: LoadOptions) -> Result<IOTable> {
    let table = if path.is_dir() {
        load_binary(path)?
    } else {
        load_csv(path)?
    };
    if !options.allow_nonfinite && !table.is_finite() {
        let bad = (0..table.rows())
            .find(|&i| {
                table.x.row(i).iter().chain(table.y.row(i)).any(|v| !v.is_finite())
            })
            .unwrap_or(0);
        return Err(Error::format(
            path,
            format!("non-finite value in row {bad} (loading with allow_nonfinite accepts it)"),
        ));
    }
    Ok(table)
}

fn load_binary(dir: &Path) -> Result<IOTable> {
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let m: TableManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&manifest_path, e.to_string()))?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::format(
            &manifest_path,
            format!("unsupported format_version {}", m.format_version),
        ));
    }
    if m.dtype != "f64le" || m.layout != "row-major" {
        return Err(Error::format(
            &manifest_path,
            format!("unsupported dtype/layout {}/{}", m.dtype, m.layout),
        ));
    }
    let x = read_matrix(&dir.join(INPUTS), m.rows, m.input_names.len())?;
    let y = read_matrix(&dir.join(OUTPUTS), m.rows, m.output_names.len())?;
    IOTable::new(m.input_names, m.output_names, x, y).map_err(|e| Error::format(dir, e.to_string()))
}

pub(crate) fn read_f64s(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(
            path,
            format!("{} bytes is not a whole number of f64 values", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub(crate) fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_matrix(path: &Path, rows: usize, cols: usize) -> Result<Matrix> {
    let values = read_f64s(path)?;
    if values.len() != rows * cols {
        let found = if cols == 0 {
            format!("{} values", values.len())
        } else if values.len() % cols == 0 {
            format!("{} rows", values.len() / cols)
        } else {
            format!("{} values ({cols} per row)", values.len())
        };
        return Err(Error::format(
            path,
            format!("manifest declares {rows} rows but payload holds {found}"),
        ));
    }
    Matrix::new(rows, cols, values)
}

/// Writes the binary form into `dir`, creating it if needed.
pub fn save_table(table: &IOTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = TableManifest {
        format_version: FORMAT_VERSION,
        rows: table.rows(),
        input_names: table.input_names.clone(),
        output_names: table.output_names.clone(),
        dtype: "f64le".into(),
        layout: "row-major".into(),
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    write_f64s(&dir.join(INPUTS), table.x.data())?;
    write_f64s(&dir.join(OUTPUTS), table.y.data())
}

pub fn save_weights(dir: &Path, weights: &[f64]) -> Result<()> {
    write_f64s(&dir.join(WEIGHTS), weights)
}

/// Reads `weights.bin` if present.
pub fn load_weights(dir: &Path, rows: usize) -> Result<Option<Vec<f64>>> {
    let path = dir.join(WEIGHTS);
    if !path.exists() {
        return Ok(None);
    }
    let w = read_f64s(&path)?;
    if w.len() != rows {
        return Err(Error::format(
            &path,
            format!("table has {rows} rows but weights hold {}", w.len()),
        ));
    }
    Ok(Some(w))
}

fn load_csv(path: &Path) -> Result<IOTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .clone();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (col, h) in header.iter().enumerate() {
        if let Some(n) = h.strip_prefix("in:") {
            inputs.push((col, n.to_string()));
        } else if let Some(n) = h.strip_prefix("out:") {
            outputs.push((col, n.to_string()));
        } else {
            return Err(Error::format(
                path,
                format!("column `{h}` is neither `in:<name>` nor `out:<name>`"),
            ));
        }
    }
    let mut x = Matrix::zeros(0, inputs.len());
    let mut y = Matrix::zeros(0, outputs.len());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let field = |col: usize| -> Result<f64> {
            let s = record.get(col).unwrap_or("");
            s.parse::<f64>().map_err(|_| {
                Error::format(path, format!("data row {}: `{s}` is not a number", line + 1))
            })
        };
        let xi = inputs.iter().map(|(c, _)| field(*c)).collect::<Result<Vec<_>>>()?;
        let yi = outputs.iter().map(|(c, _)| field(*c)).collect::<Result<Vec<_>>>()?;
        x.push_row(&xi)?;
        y.push_row(&yi)?;
    }
    IOTable::new(
        inputs.into_iter().map(|(_, n)| n).collect(),
        outputs.into_iter().map(|(_, n)| n).collect(),
        x,
        y,
    )
    .map_err(|e| Error::format(path, e.to_string()))
}

/// Writes the CSV form with `in:`/`out:` headers.
pub fn save_csv(table: &IOTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let header: Vec<String> = table
        .input_names
        .iter()
        .map(|n| format!("in:{n}"))
        .chain(table.output_names.iter().map(|n| format!("out:{n}")))
        .collect();
    w.write_record(&header).map_err(|e| Error::format(path, e.to_string()))?;
    for i in 0..table.rows() {
        let rec: Vec<String> = table
            .x
            .row(i)
            .iter()
            .chain(table.y.row(i))
            .map(|v| v.to_string())
            .collect();
        w.write_record(&rec).map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
