//! Data ingestion, standardization, and second-order expansion.
//!
//! A [`Dataset`] stores the base design matrix. When second-order terms are
//! requested the expanded columns (mains, squares, pairwise products) are
//! produced block by block from the stored rows and never materialized for the
//! whole data set.

use std::path::{Path, PathBuf};

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::likelihood::LinearModelData;

/// Rows per expanded block.
const BLOCK_ROWS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub source: PathBuf,
    pub response_column: String,
    pub standardize: bool,
    pub intercept: bool,
    pub second_order: bool,
}

impl DesignSpec {
    pub fn new(source: impl Into<PathBuf>, response_column: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            response_column: response_column.into(),
            standardize: true,
            intercept: true,
            second_order: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Main(usize),
    Square(usize),
    Interaction(usize, usize),
}

/// Column layout of the second-order model: `P` mains, then `P` squares,
/// then the `P(P−1)/2` products `x_i·x_j` for `i < j` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionMap {
    base: usize,
    terms: Vec<TermKind>,
}

impl ExpansionMap {
    pub fn new(base: usize) -> Self {
        let mut terms = Vec::with_capacity(expanded_count(base));
        terms.extend((0..base).map(TermKind::Main));
        terms.extend((0..base).map(TermKind::Square));
        for i in 0..base {
            for j in i + 1..base {
                terms.push(TermKind::Interaction(i, j));
            }
        }
        Self { base, terms }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn expanded(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[TermKind] {
        &self.terms
    }

    pub fn square_index(&self, i: usize) -> usize {
        self.base + i
    }

    pub fn interaction_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // pairs (a, b) with a < i come first: Σ_{a<i} (P − 1 − a)
        let before = i * (2 * self.base - i - 1) / 2;
        2 * self.base + before + (j - i - 1)
    }

    pub fn names(&self, base_names: &[String]) -> Vec<String> {
        self.terms
            .iter()
            .map(|t| match *t {
                TermKind::Main(i) => base_names[i].clone(),
                TermKind::Square(i) => format!("{}^2", base_names[i]),
                TermKind::Interaction(i, j) => format!("{}:{}", base_names[i], base_names[j]),
            })
            .collect()
    }
}

/// `2P + P(P−1)/2`.
pub fn expanded_count(base: usize) -> usize {
    2 * base + base * base.saturating_sub(1) / 2
}

pub fn expand_second_order(xrow: ArrayView1<f64>, map: &ExpansionMap) -> Result<Array1<f64>> {
    if xrow.len() != map.base {
        return Err(Error::dim(format!("row has {} entries, expansion expects {}", xrow.len(), map.base)));
    }
    let mut out = Array1::zeros(map.expanded());
    expand_into(xrow, map, out.as_slice_mut().expect("contiguous"));
    Ok(out)
}

fn expand_into(xrow: ArrayView1<f64>, map: &ExpansionMap, out: &mut [f64]) {
    let p = map.base;
    for i in 0..p {
        out[i] = xrow[i];
        out[p + i] = xrow[i] * xrow[i];
    }
    let mut k = 2 * p;
    for i in 0..p {
        for j in i + 1..p {
            out[k] = xrow[i] * xrow[j];
            k += 1;
        }
    }
}

/// One group per unordered pair `(i, j)` holding both mains, both squares and
/// the interaction, indexed in the expanded column layout.
pub fn hierarchical_groups(p: usize) -> Result<GroupStructure> {
    if p < 2 {
        return Err(Error::config(format!("hierarchical groups need at least 2 base predictors, got {p}")));
    }
    let map = ExpansionMap::new(p);
    let mut groups = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in i + 1..p {
            groups.push(vec![i, j, map.square_index(i), map.square_index(j), map.interaction_index(i, j)]);
        }
    }
    GroupStructure::from_groups(map.expanded(), &groups)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Dense(Array2<f64>),
    SecondOrder { base: Array2<f64>, map: ExpansionMap },
}

impl Design {
    pub fn n_rows(&self) -> usize {
        match self {
            Design::Dense(x) => x.nrows(),
            Design::SecondOrder { base, .. } => base.nrows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Design::Dense(x) => x.ncols(),
            Design::SecondOrder { map, .. } => map.expanded(),
        }
    }

    /// Calls `f(block, offset)` on consecutive blocks covering `rows` (all rows
    /// when `None`); `offset` is the position of the block's first row within
    /// the row list.
    pub fn for_each_block<F>(&self, rows: Option<&[usize]>, mut f: F)
    where
        F: FnMut(ArrayView2<f64>, usize),
    {
        match (self, rows) {
            (Design::Dense(x), None) => f(x.view(), 0),
            (Design::Dense(x), Some(idx)) => {
                if is_contiguous(idx) {
                    f(x.slice(s![idx[0]..idx[0] + idx.len(), ..]), 0);
                } else {
                    f(x.select(Axis(0), idx).view(), 0);
                }
            }
            (Design::SecondOrder { base, map }, rows) => {
                let n = rows.map_or(base.nrows(), |r| r.len());
                let mut block = Array2::zeros((BLOCK_ROWS.min(n), map.expanded()));
                let mut start = 0;
                while start < n {
                    let m = BLOCK_ROWS.min(n - start);
                    for k in 0..m {
                        let r = rows.map_or(start + k, |idx| idx[start + k]);
                        let mut out = block.row_mut(k);
                        expand_into(base.row(r), map, out.as_slice_mut().expect("contiguous"));
                    }
                    f(block.slice(s![..m, ..]), start);
                    start += m;
                }
            }
        }
    }

    /// Materializes the (possibly expanded) rows. Intended for small subsets.
    pub fn rows(&self, idx: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((idx.len(), self.n_cols()));
        self.for_each_block(Some(idx), |b, off| {
            out.slice_mut(s![off..off + b.nrows(), ..]).assign(&b);
        });
        out
    }
}

fn is_contiguous(idx: &[usize]) -> bool {
    !idx.is_empty() && idx.windows(2).all(|w| w[1] == w[0] + 1)
}

/// Per-column centering and scaling applied at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Columns with zero variance; centered but not scaled.
    pub constant: Vec<bool>,
}

impl Scaling {
    /// Standardizes columns in place: mean 0, sd 1 (population sd).
    pub fn fit_transform(x: &mut Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let p = x.ncols();
        let (mut mean, mut sd, mut constant) = (vec![0.0; p], vec![1.0; p], vec![false; p]);
        for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let m = col.sum() / n;
            col.mapv_inplace(|v| v - m);
            let var = col.iter().map(|v| v * v).sum::<f64>() / n;
            mean[j] = m;
            if var.sqrt() <= 1e-12 * (1.0 + m.abs()) {
                constant[j] = true;
                col.fill(0.0);
            } else {
                let s = var.sqrt();
                col.mapv_inplace(|v| v / s);
                sd[j] = s;
            }
        }
        Self { mean, sd, constant }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub design: Design,
    pub y: Array1<f64>,
    pub weights: Option<Array1<f64>>,
    /// Fit an unpenalized intercept.
    pub intercept: bool,
    pub column_names: Vec<String>,
    pub scaling: Option<Scaling>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        let ds = Self { design: Design::Dense(x), y, weights: None, intercept: false, column_names: names, scaling: None };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_intercept(mut self, intercept: bool) -> Self {
        self.intercept = intercept;
        self
    }

    /// Switches to the second-order design over the current base columns.
    pub fn into_second_order(mut self) -> Result<Self> {
        let base = match self.design {
            Design::Dense(x) => x,
            Design::SecondOrder { .. } => return Err(Error::config("dataset is already expanded")),
        };
        let map = ExpansionMap::new(base.ncols());
        self.column_names = map.names(&self.column_names);
        self.design = Design::SecondOrder { base, map };
        Ok(self)
    }

    pub fn from_linear(data: &LinearModelData) -> Result<Self> {
        let mut ds = Self::new(data.x.clone(), data.y.clone())?;
        ds.weights = data.weights.clone();
        Ok(ds)
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_pred(&self) -> usize {
        self.design.n_cols()
    }

    pub fn base(&self) -> ArrayView2<'_, f64> {
        match &self.design {
            Design::Dense(x) => x.view(),
            Design::SecondOrder { base, .. } => base.view(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.design.n_rows();
        if n == 0 || self.design.n_cols() == 0 {
            return Err(Error::dim("dataset must have at least one row and one column"));
        }
        if self.y.len() != n {
            return Err(Error::dim(format!("response has {} rows, design has {n}", self.y.len())));
        }
        if self.base().iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("design contains non-finite entries".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != n || w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::Data("weights must be nonnegative, one per row".into()));
            }
        }
        Ok(())
    }

    /// Row subset sharing the same column layout.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let pick = |a: &Array1<f64>| Array1::from_iter(rows.iter().map(|&r| a[r]));
        let design = match &self.design {
            Design::Dense(x) => Design::Dense(x.select(Axis(0), rows)),
            Design::SecondOrder { base, map } => {
                Design::SecondOrder { base: base.select(Axis(0), rows), map: map.clone() }
            }
        };
        Dataset {
            design,
            y: pick(&self.y),
            weights: self.weights.as_ref().map(pick),
            intercept: self.intercept,
            column_names: self.column_names.clone(),
            scaling: self.scaling.clone(),
        }
    }

    /// Maps coefficients fitted on standardized base columns back to the
    /// original column scale. Returns `(intercept, coefficients)`. Expanded
    /// designs are returned unchanged since their terms are products of
    /// standardized mains.
    pub fn original_scale(&self, intercept: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        match (&self.scaling, &self.design) {
            (Some(sc), Design::Dense(_)) => {
                let mut b0 = intercept;
                let coefs: Vec<f64> = beta
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| {
                        if sc.constant[j] {
                            0.0
                        } else {
                            let c = b / sc.sd[j];
                            b0 -= c * sc.mean[j];
                            c
                        }
                    })
                    .collect();
                (b0, coefs)
            }
            _ => (intercept, beta.to_vec()),
        }
    }
}

/// Reads a headered CSV with numeric cells.
pub fn load_csv(spec: &DesignSpec) -> Result<Dataset> {
    let (names, x, y) = read_numeric_csv(&spec.source, &spec.response_column)?;
    let mut x = x;
    let scaling = spec.standardize.then(|| Scaling::fit_transform(&mut x));
    let mut ds = Dataset::new(x, y)?;
    ds.column_names = names;
    ds.scaling = scaling;
    ds.intercept = spec.intercept;
    if spec.second_order {
        ds = ds.into_second_order()?;
    }
    Ok(ds)
}

fn read_numeric_csv(path: &Path, response: &str) -> Result<(Vec<String>, Array2<f64>, Array1<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let yi = header
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::Data(format!("response column '{response}' not found in {}", path.display())))?;
    if header.len() < 2 {
        return Err(Error::Data("need at least one predictor column besides the response".into()));
    }
    let names: Vec<String> = header.iter().enumerate().filter(|(i, _)| *i != yi).map(|(_, h)| h.clone()).collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Data(format!("row {}: expected {} fields, got {}", r, header.len(), rec.len())));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!("row {r}, column '{}': non-numeric cell '{cell}'", header[c]))
            })?;
            if c == yi {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    let x = Array2::from_shape_vec((ys.len(), names.len()), xs).map_err(|e| Error::Data(e.to_string()))?;
    Ok((names, x, Array1::from(ys)))
}
