//! Synthetic benchmark generators, CSV ingestion, splitting, and
//! standardization.
//!
//! CSV schema: columns `x1..xp` (predictors), `y` (response), optional
//! `f1..fk` (true sufficient predictors). Generated files carry a
//! `#meta:` comment line with the generator tag, seed, and sampling
//! algorithm so runs can be reproduced exactly.

use crate::error::{BennError, Result};
use crate::rng;
use crate::stats;
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Provenance of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: String,
    pub seed: u64,
    pub rng: String,
}

/// A predictor matrix with its response and optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    /// True sufficient predictors, one row per observation.
    pub truth: Option<Array2<f64>>,
    /// True basis of the linear reduction subspace (p x d).
    pub truth_basis: Option<Array2<f64>>,
    pub meta: Option<DatasetMeta>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    fn check_finite(&self) -> Result<()> {
        let all_finite = self.x.iter().all(|v| v.is_finite())
            && self.y.iter().all(|v| v.is_finite())
            && self
                .truth
                .as_ref()
                .is_none_or(|t| t.iter().all(|v| v.is_finite()));
        if all_finite {
            Ok(())
        } else {
            Err(BennError::Numerical("dataset contains non-finite values".into()))
        }
    }
}

/// Heteroscedastic benchmark: predictors i.i.d. Gaussian with mean 0.2
/// and variance 0.5, and
///
/// ```text
/// y = f1(x) + f2(x) * eps,    eps ~ N(0, 1)
/// f1(x) = sin((x1 + x2) pi / 10) + x1^2
/// f2(x) = 2 sin^2((x3 + x4) pi / 10) + x3^2
/// ```
///
/// The truth matrix holds `[f1, f2]` per row; the conditional mean of y
/// given x is f1 and the conditional standard deviation is |f2|.
pub fn gen_model_d(n: usize, p: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(BennError::Param("sample size must be >= 1".into()));
    }
    if p < 4 {
        return Err(BennError::Param(format!(
            "the heteroscedastic generator needs p >= 4, got {p}"
        )));
    }
    let mut r = rng::stream(seed);
    let sd = 0.5f64.sqrt();
    let x = Array2::from_shape_fn((n, p), |_| 0.2 + sd * rng::standard_normal(&mut r));
    let truth = true_predictors_d(&x)?;
    let y = Array1::from_shape_fn(n, |i| {
        truth[[i, 0]] + truth[[i, 1]] * rng::standard_normal(&mut r)
    });
    let ds = Dataset {
        x,
        y,
        truth: Some(truth),
        truth_basis: None,
        meta: Some(DatasetMeta {
            generator: "d-iv".into(),
            seed,
            rng: rng::RNG_ALGORITHM.into(),
        }),
    };
    ds.check_finite()?;
    Ok(ds)
}

/// True sufficient predictors of the heteroscedastic benchmark for given
/// predictor rows.
pub fn true_predictors_d(x: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() < 4 {
        return Err(BennError::Shape(format!(
            "need at least 4 predictor columns, got {}",
            x.ncols()
        )));
    }
    let c = std::f64::consts::PI / 10.0;
    Ok(Array2::from_shape_fn((x.nrows(), 2), |(i, j)| {
        if j == 0 {
            ((x[[i, 0]] + x[[i, 1]]) * c).sin() + x[[i, 0]] * x[[i, 0]]
        } else {
            let s = ((x[[i, 2]] + x[[i, 3]]) * c).sin();
            2.0 * s * s + x[[i, 2]] * x[[i, 2]]
        }
    }))
}

/// Linear reduction benchmark: a seeded orthonormal basis `B` (p x d),
/// standard normal predictors, and `y = sum_k sin(b_k . x) + noise_sd * eps`.
pub fn gen_linear(n: usize, p: usize, d: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    let mut r = rng::stream(seed);
    let basis = random_orthonormal_basis(p, d, &mut r)?;
    gen_linear_with_basis(n, &basis, noise_sd, rng::derive_seed(seed, 1))
}

/// Variant of [`gen_linear`] with a caller-supplied basis.
pub fn gen_linear_with_basis(
    n: usize,
    basis: &Array2<f64>,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(BennError::Param("sample size must be >= 1".into()));
    }
    let (p, d) = (basis.nrows(), basis.ncols());
    if d == 0 || d >= p {
        return Err(BennError::Param(format!(
            "basis must satisfy 1 <= d < p, got p = {p}, d = {d}"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(BennError::Param("noise standard deviation must be >= 0".into()));
    }
    let mut r = rng::stream(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng::standard_normal(&mut r));
    let truth = x.dot(basis);
    let y = Array1::from_shape_fn(n, |i| {
        let signal: f64 = truth.row(i).iter().map(|v| v.sin()).sum();
        signal + noise_sd * rng::standard_normal(&mut r)
    });
    let ds = Dataset {
        x,
        y,
        truth: Some(truth),
        truth_basis: Some(basis.clone()),
        meta: Some(DatasetMeta {
            generator: "linear".into(),
            seed,
            rng: rng::RNG_ALGORITHM.into(),
        }),
    };
    ds.check_finite()?;
    Ok(ds)
}

fn random_orthonormal_basis(
    p: usize,
    d: usize,
    r: &mut rand_chacha::ChaCha20Rng,
) -> Result<Array2<f64>> {
    if d == 0 || d >= p {
        return Err(BennError::Param(format!(
            "basis requires 1 <= d < p, got p = {p}, d = {d}"
        )));
    }
    let mut b = Array2::from_shape_fn((p, d), |_| rng::standard_normal(r));
    for j in 0..d {
        for k in 0..j {
            let proj = b.column(k).dot(&b.column(j));
            let prev = b.column(k).to_owned();
            b.column_mut(j).scaled_add(-proj, &prev);
        }
        let norm = b.column(j).dot(&b.column(j)).sqrt();
        if norm < 1e-8 {
            return Err(BennError::Numerical(
                "degenerate random basis draw".into(),
            ));
        }
        b.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(b)
}

/// Writes a dataset as CSV with its `#meta:` header comment. Floats are
/// written with shortest round-trip formatting, so reading the file back
/// recovers every value exactly.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    if let Some(meta) = &ds.meta {
        writeln!(w, "#meta: {}", serde_json::to_string(meta)?)?;
    }
    let p = ds.p();
    let k = ds.truth.as_ref().map_or(0, |t| t.ncols());
    let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    header.extend((1..=k).map(|j| format!("f{j}")));
    writeln!(w, "{}", header.join(","))?;

    for i in 0..ds.n() {
        let mut cells: Vec<String> = ds.x.row(i).iter().map(|v| format!("{v}")).collect();
        cells.push(format!("{}", ds.y[i]));
        if let Some(t) = &ds.truth {
            cells.extend(t.row(i).iter().map(|v| format!("{v}")));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a dataset written by [`save_csv`] (or any CSV with `x1..xp`,
/// `y`, optional `f1..fk` columns, in any column order).
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut meta = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#meta:") {
            meta = Some(serde_json::from_str::<DatasetMeta>(rest.trim()).map_err(|e| {
                BennError::Parse {
                    row: line_no + 1,
                    col: 1,
                    msg: format!("invalid metadata: {e}"),
                }
            })?);
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        match &header {
            None => {
                width = cells.len();
                header = Some(cells.iter().map(|s| s.to_string()).collect());
            }
            Some(_) => {
                if cells.len() != width {
                    return Err(BennError::Parse {
                        row: line_no + 1,
                        col: cells.len(),
                        msg: format!("expected {width} cells, found {}", cells.len()),
                    });
                }
                let mut row = Vec::with_capacity(width);
                for (c, cell) in cells.iter().enumerate() {
                    let v: f64 = cell.parse().map_err(|_| BennError::Parse {
                        row: line_no + 1,
                        col: c + 1,
                        msg: format!("non-numeric cell {cell:?}"),
                    })?;
                    row.push(v);
                }
                rows.push(row);
            }
        }
    }

    let header = header.ok_or(BennError::Parse {
        row: 0,
        col: 0,
        msg: "file has no header row".into(),
    })?;
    build_dataset(header, rows, meta)
}

fn build_dataset(
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    meta: Option<DatasetMeta>,
) -> Result<Dataset> {
    let mut x_cols: Vec<(usize, usize)> = Vec::new(); // (index in header, column within x)
    let mut f_cols: Vec<(usize, usize)> = Vec::new();
    let mut y_col: Option<usize> = None;
    for (idx, name) in header.iter().enumerate() {
        if name == "y" {
            if y_col.is_some() {
                return Err(BennError::Parse {
                    row: 1,
                    col: idx + 1,
                    msg: "duplicate column \"y\"".into(),
                });
            }
            y_col = Some(idx);
        } else if let Some(num) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            x_cols.push((idx, num));
        } else if let Some(num) = name.strip_prefix('f').and_then(|s| s.parse::<usize>().ok()) {
            f_cols.push((idx, num));
        } else {
            return Err(BennError::Parse {
                row: 1,
                col: idx + 1,
                msg: format!("unrecognized column {name:?}; expected x<i>, y, or f<i>"),
            });
        }
    }
    let y_col = y_col.ok_or(BennError::Parse {
        row: 1,
        col: 0,
        msg: "missing required column \"y\"".into(),
    })?;
    x_cols.sort_by_key(|&(_, num)| num);
    f_cols.sort_by_key(|&(_, num)| num);
    for (want, &(_, got)) in (1..).zip(&x_cols) {
        if got != want {
            return Err(BennError::Parse {
                row: 1,
                col: 0,
                msg: format!("predictor columns must be x1..xp without gaps; missing x{want}"),
            });
        }
    }
    if x_cols.is_empty() {
        return Err(BennError::Parse {
            row: 1,
            col: 0,
            msg: "no predictor columns x1..xp found".into(),
        });
    }

    let n = rows.len();
    let p = x_cols.len();
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    let mut truth = (!f_cols.is_empty()).then(|| Array2::zeros((n, f_cols.len())));
    for (i, row) in rows.iter().enumerate() {
        for (j, &(idx, _)) in x_cols.iter().enumerate() {
            x[[i, j]] = row[idx];
        }
        y[i] = row[y_col];
        if let Some(t) = truth.as_mut() {
            for (j, &(idx, _)) in f_cols.iter().enumerate() {
                t[[i, j]] = row[idx];
            }
        }
    }
    Ok(Dataset {
        x,
        y,
        truth,
        truth_basis: None,
        meta,
    })
}

/// Writes a plain matrix as CSV with columns `b1..bd` (used for bases).
pub fn save_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("b{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a matrix written by [`save_matrix_csv`]; the header row is
/// skipped and all cells must be numeric.
pub fn load_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut saw_header = false;
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let mut row = Vec::new();
        for (c, cell) in trimmed.split(',').map(str::trim).enumerate() {
            row.push(cell.parse::<f64>().map_err(|_| BennError::Parse {
                row: line_no + 1,
                col: c + 1,
                msg: format!("non-numeric cell {cell:?}"),
            })?);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(BennError::Parse {
                    row: line_no + 1,
                    col: row.len(),
                    msg: "ragged row".into(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BennError::Parse {
            row: 0,
            col: 0,
            msg: "matrix file has no data rows".into(),
        });
    }
    let (n, m) = (rows.len(), rows[0].len());
    Ok(Array2::from_shape_fn((n, m), |(i, j)| rows[i][j]))
}

/// Seeded disjoint split; the test set receives `floor(n * test_fraction)`
/// rows. Row order within each part follows the original dataset.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = ds.n();
    if n < 2 {
        return Err(BennError::Param("split needs at least 2 rows".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(BennError::Param(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (n as f64 * test_fraction).floor() as usize;
    if n_test == 0 || n_test == n {
        return Err(BennError::Param(format!(
            "test fraction {test_fraction} leaves an empty part at n = {n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    {
        use rand::seq::SliceRandom;
        let mut r = rng::stream(seed);
        indices.shuffle(&mut r);
    }
    let mut test_idx: Vec<usize> = indices[..n_test].to_vec();
    let mut train_idx: Vec<usize> = indices[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();

    Ok((take_rows(ds, &train_idx), take_rows(ds, &test_idx)))
}

fn take_rows(ds: &Dataset, idx: &[usize]) -> Dataset {
    Dataset {
        x: ds.x.select(Axis(0), idx),
        y: ds.y.select(Axis(0), idx),
        truth: ds.truth.as_ref().map(|t| t.select(Axis(0), idx)),
        truth_basis: ds.truth_basis.clone(),
        meta: ds.meta.clone(),
    }
}

/// Centering/scaling transform fitted on training predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Array1<f64>,
    pub sd: Array1<f64>,
    /// Columns left untouched because they were constant in training.
    pub passthrough: Vec<bool>,
}

impl Standardization {
    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            if self.passthrough[j] {
                continue;
            }
            let (m, s) = (self.mean[j], self.sd[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        out
    }

    pub fn any_passthrough(&self) -> bool {
        self.passthrough.iter().any(|&b| b)
    }
}

/// Centers and scales predictor columns by training-set statistics and
/// applies the same transform to the test set. Constant training columns
/// are passed through unchanged and flagged.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, Standardization)> {
    let p = train.p();
    if test.p() != p {
        return Err(BennError::Shape(format!(
            "train has {p} predictors, test has {}",
            test.p()
        )));
    }
    let mut mean = Array1::zeros(p);
    let mut sd = Array1::zeros(p);
    let mut passthrough = vec![false; p];
    for j in 0..p {
        let col: Vec<f64> = train.x.column(j).to_vec();
        mean[j] = stats::mean(&col);
        sd[j] = stats::sample_sd(&col);
        if sd[j] <= 1e-12 {
            passthrough[j] = true;
        }
    }
    let transform = Standardization { mean, sd, passthrough };
    let train_out = Dataset {
        x: transform.apply(&train.x),
        ..train.clone()
    };
    let test_out = Dataset {
        x: transform.apply(&test.x),
        ..test.clone()
    };
    Ok((train_out, test_out, transform))
}
