//! Domain types and dataset construction.
//!
//! The estimation unit is [`IvDataset`]: an outcome `y1`, one endogenous
//! regressor `y2`, optional exogenous controls `W` (n x k_w), and a raw
//! technical-instrument matrix `F_raw` (n x p, possibly p >> n). Instrument
//! columns are rescaled to unit empirical mean-square before any penalized
//! regression; the scale vector is kept so raw coordinates can always be
//! recovered. Columns are deliberately *not* demeaned — only second moments
//! are normalized — and no implicit intercept is ever added to the
//! instrument block (supply one as a control column if wanted).

use nalgebra::{DMatrix, DVector};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{col, mean_square};

/// Columns with empirical second moment below this are rejected as zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-14;

/// One estimation problem: outcome, endogenous regressor, controls, raw instruments.
#[derive(Debug, Clone)]
pub struct IvDataset {
    y1: DVector<f64>,
    y2: DVector<f64>,
    w: DMatrix<f64>,
    f_raw: DMatrix<f64>,
}

impl IvDataset {
    /// Validates dimensions and instrument columns, then assembles the dataset.
    ///
    /// `w` may have zero columns (no controls). Errors with
    /// [`Error::DimensionMismatch`] on inconsistent lengths and
    /// [`Error::ZeroColumn`] on an instrument column with (near-)zero second
    /// moment.
    pub fn new(
        y1: DVector<f64>,
        y2: DVector<f64>,
        w: DMatrix<f64>,
        f_raw: DMatrix<f64>,
    ) -> Result<Self> {
        let n = y1.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2 observations, got {n}")));
        }
        if y2.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "y1 has {n} rows but y2 has {}",
                y2.len()
            )));
        }
        if w.ncols() > 0 && w.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "y1 has {n} rows but W has {}",
                w.nrows()
            )));
        }
        if f_raw.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "y1 has {n} rows but F has {}",
                f_raw.nrows()
            )));
        }
        if f_raw.ncols() == 0 {
            return Err(Error::InvalidInput("need at least one instrument column".into()));
        }
        for j in 0..f_raw.ncols() {
            if mean_square(col(&f_raw, j)) < ZERO_COLUMN_TOL {
                return Err(Error::ZeroColumn(j));
            }
        }
        let w = if w.ncols() == 0 { DMatrix::zeros(n, 0) } else { w };
        Ok(Self { y1, y2, w, f_raw })
    }

    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn p(&self) -> usize {
        self.f_raw.ncols()
    }

    pub fn k_w(&self) -> usize {
        self.w.ncols()
    }

    pub fn y1(&self) -> &DVector<f64> {
        &self.y1
    }

    pub fn y2(&self) -> &DVector<f64> {
        &self.y2
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn f_raw(&self) -> &DMatrix<f64> {
        &self.f_raw
    }

    /// Normalizes the instrument block to unit column mean-squares.
    pub fn normalized(&self) -> Result<NormalizedDesign> {
        normalize_columns(&self.f_raw)
    }

    /// Dataset restricted to the given rows (used by the split-sample estimator).
    pub fn subset(&self, rows: &[usize]) -> Result<IvDataset> {
        let take_vec = |v: &DVector<f64>| DVector::from_iterator(rows.len(), rows.iter().map(|&i| v[i]));
        let take_mat = |m: &DMatrix<f64>| {
            DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
        };
        IvDataset::new(take_vec(&self.y1), take_vec(&self.y2), take_mat(&self.w), take_mat(&self.f_raw))
    }
}

/// Instrument matrix rescaled so every column has `E_n[f_ij^2] = 1`, plus the
/// diagonal scale `H` with `F_raw[:,j] = H_j * F[:,j]`.
#[derive(Debug, Clone)]
pub struct NormalizedDesign {
    pub f: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl NormalizedDesign {
    /// Reconstructs the raw matrix (`H_j * F[:,j]` per column).
    pub fn denormalize(&self) -> DMatrix<f64> {
        let mut out = self.f.clone();
        for j in 0..out.ncols() {
            let hj = self.h[j];
            out.column_mut(j).iter_mut().for_each(|x| *x *= hj);
        }
        out
    }
}

/// Rescales every column of `f_raw` to unit empirical mean-square.
///
/// `H_j = sqrt(E_n[F_raw[:,j]^2])`; errors with [`Error::ZeroColumn`] when a
/// column's second moment is below 1e-14.
pub fn normalize_columns(f_raw: &DMatrix<f64>) -> Result<NormalizedDesign> {
    let (n, p) = (f_raw.nrows(), f_raw.ncols());
    let mut h = DVector::zeros(p);
    let mut f = f_raw.clone();
    for j in 0..p {
        let msq = mean_square(col(f_raw, j));
        if msq < ZERO_COLUMN_TOL {
            return Err(Error::ZeroColumn(j));
        }
        let hj = msq.sqrt();
        h[j] = hj;
        f.column_mut(j).iter_mut().for_each(|x| *x /= hj);
    }
    debug_assert_eq!(f.nrows(), n);
    Ok(NormalizedDesign { f, h })
}

/// Convenience constructor mirroring the dataset-validation contract.
pub fn build_dataset(
    y1: DVector<f64>,
    y2: DVector<f64>,
    w: DMatrix<f64>,
    f_raw: DMatrix<f64>,
) -> Result<IvDataset> {
    IvDataset::new(y1, y2, w, f_raw)
}

/// Simulation ground truth: the optimal instrument values `D(x_i)`, the sparse
/// coefficient vector behind them, and the approximation-error bound.
#[derive(Debug, Clone)]
pub struct FirstStageTruth {
    pub d: DVector<f64>,
    pub beta0: DVector<f64>,
    pub s: usize,
    pub c_s: f64,
}

impl FirstStageTruth {
    /// Builds the truth record and checks it against the raw design:
    /// `s = ||beta0||_0` and `rms(D - F_raw * beta0) <= c_s` (up to 1e-10 slack).
    pub fn new(d: DVector<f64>, beta0: DVector<f64>, c_s: f64, f_raw: &DMatrix<f64>) -> Result<Self> {
        if d.len() != f_raw.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "D has {} rows but F has {}",
                d.len(),
                f_raw.nrows()
            )));
        }
        if beta0.len() != f_raw.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "beta0 has {} entries but F has {} columns",
                beta0.len(),
                f_raw.ncols()
            )));
        }
        let s = beta0.iter().filter(|b| **b != 0.0).count();
        let resid = &d - f_raw * &beta0;
        let err = crate::linalg::rms(resid.as_slice());
        if err > c_s + 1e-10 {
            return Err(Error::InvalidInput(format!(
                "approximation error {err} exceeds declared bound c_s = {c_s}"
            )));
        }
        Ok(Self { d, beta0, s, c_s })
    }
}

/// A dataset read from CSV along with its column names.
#[derive(Debug, Clone)]
pub struct NamedDataset {
    pub data: IvDataset,
    pub instrument_names: Vec<String>,
    pub control_names: Vec<String>,
}

/// Reads a dataset from CSV.
///
/// Contract: header row; exactly one `y1` column and one `y2` column; columns
/// prefixed `w_` are controls; columns prefixed `z_` are instruments; UTF-8
/// with `.` as the decimal separator. Any other column name is rejected.
pub fn read_csv(path: &Path) -> Result<NamedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::DataContract(format!("{}: {e}", path.display())))?;

    #[derive(Clone, Copy)]
    enum Role {
        Y1,
        Y2,
        Control(usize),
        Instrument(usize),
    }

    let headers = rdr
        .headers()
        .map_err(|e| Error::DataContract(format!("cannot read header: {e}")))?
        .clone();
    let mut roles = Vec::with_capacity(headers.len());
    let mut instrument_names = Vec::new();
    let mut control_names = Vec::new();
    let (mut saw_y1, mut saw_y2) = (false, false);
    for name in headers.iter() {
        let role = if name == "y1" {
            if saw_y1 {
                return Err(Error::DataContract("duplicate column `y1`".into()));
            }
            saw_y1 = true;
            Role::Y1
        } else if name == "y2" {
            if saw_y2 {
                return Err(Error::DataContract("duplicate column `y2`".into()));
            }
            saw_y2 = true;
            Role::Y2
        } else if let Some(_rest) = name.strip_prefix("w_") {
            control_names.push(name.to_string());
            Role::Control(control_names.len() - 1)
        } else if let Some(_rest) = name.strip_prefix("z_") {
            instrument_names.push(name.to_string());
            Role::Instrument(instrument_names.len() - 1)
        } else {
            return Err(Error::DataContract(format!(
                "unrecognized column `{name}` (expected y1, y2, w_*, or z_*)"
            )));
        };
        roles.push(role);
    }
    if !saw_y1 {
        return Err(Error::DataContract("missing required column `y1`".into()));
    }
    if !saw_y2 {
        return Err(Error::DataContract("missing required column `y2`".into()));
    }
    if instrument_names.is_empty() {
        return Err(Error::DataContract("no instrument columns (prefix `z_`) found".into()));
    }

    let k_w = control_names.len();
    let p = instrument_names.len();
    let mut y1 = Vec::new();
    let mut y2 = Vec::new();
    let mut w_rows: Vec<f64> = Vec::new();
    let mut f_rows: Vec<f64> = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::DataContract(format!("row {}: {e}", row_idx + 2)))?;
        if record.len() != roles.len() {
            return Err(Error::DataContract(format!(
                "row {}: expected {} fields, found {}",
                row_idx + 2,
                roles.len(),
                record.len()
            )));
        }
        let mut w_row = vec![0.0; k_w];
        let mut f_row = vec![0.0; p];
        for (field, role) in record.iter().zip(&roles) {
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::DataContract(format!("row {}: non-numeric value `{field}`", row_idx + 2))
            })?;
            match role {
                Role::Y1 => y1.push(value),
                Role::Y2 => y2.push(value),
                Role::Control(k) => w_row[*k] = value,
                Role::Instrument(k) => f_row[*k] = value,
            }
        }
        w_rows.extend_from_slice(&w_row);
        f_rows.extend_from_slice(&f_row);
    }
    let n = y1.len();
    if n < 2 {
        return Err(Error::DataContract(format!("need at least 2 data rows, found {n}")));
    }
    let w = DMatrix::from_row_slice(n, k_w, &w_rows);
    let f_raw = DMatrix::from_row_slice(n, p, &f_rows);
    let data = IvDataset::new(DVector::from_vec(y1), DVector::from_vec(y2), w, f_raw)
        .map_err(|e| match e {
            Error::ZeroColumn(j) => Error::DataContract(format!(
                "instrument column `{}` is identically zero",
                instrument_names[j]
            )),
            other => other,
        })?;
    Ok(NamedDataset { data, instrument_names, control_names })
}

/// Writes a dataset in the ingestion-contract layout (17 significant digits).
pub fn write_csv(path: &Path, data: &IvDataset) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    write!(out, "y1,y2")?;
    for k in 0..data.k_w() {
        write!(out, ",w_{}", k + 1)?;
    }
    for j in 0..data.p() {
        write!(out, ",z_{}", j + 1)?;
    }
    writeln!(out)?;
    for i in 0..data.n() {
        write!(out, "{:.16e},{:.16e}", data.y1()[i], data.y2()[i])?;
        for k in 0..data.k_w() {
            write!(out, ",{:.16e}", data.w()[(i, k)])?;
        }
        for j in 0..data.p() {
            write!(out, ",{:.16e}", data.f_raw()[(i, j)])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a plain symmetric matrix from CSV (no header), for `diagnose` on
/// externally supplied Gram matrices.
pub fn read_matrix_csv(reader: impl BufRead) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| Error::DataContract(format!("matrix row {}: non-numeric entry", i + 1)))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::DataContract(format!("matrix row {} has ragged length", i + 1)));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::DataContract("empty matrix file".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}
