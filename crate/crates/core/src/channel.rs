//! Finite channels `P(y|x)` stored as row-stochastic matrices, and the
//! channel algebra used by the data-processing and additivity checks.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LeakageError, Result};
use crate::simplex::{SimplexPoint, SIMPLEX_TOLERANCE};

/// Default row-sum tolerance for [`Channel::new`] and CSV loading.
pub const DEFAULT_ROW_TOLERANCE: f64 = 1e-9;

/// A conditional distribution `P(y|x)`: one row per input symbol, one column
/// per output symbol.
///
/// Labels are carried along as metadata only. No operation reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    probs: Vec<f64>,
    input_labels: Option<Vec<String>>,
    output_labels: Option<Vec<String>>,
}

impl Channel {
    /// Validates a raw matrix. Rows whose sum is off by less than `tolerance`
    /// are renormalized (rows already within `1e-12` are kept bit-for-bit);
    /// rows further off are rejected.
    pub fn new(rows: Vec<Vec<f64>>, tolerance: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(LeakageError::ShapeError("channel has no rows".into()));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(LeakageError::ShapeError("channel has no columns".into()));
        }
        let inputs = rows.len();
        let mut probs = Vec::with_capacity(inputs * outputs);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(LeakageError::ShapeError(format!(
                    "row {r} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(LeakageError::InvalidEntry { row: r, col: c, value: v });
                }
            }
            let sum: f64 = row.iter().sum();
            let deviation = (sum - 1.0).abs();
            if deviation <= SIMPLEX_TOLERANCE {
                probs.extend_from_slice(&row);
            } else if deviation < tolerance {
                probs.extend(row.iter().map(|v| v / sum));
            } else {
                return Err(LeakageError::NotStochastic { row: r, sum, tolerance });
            }
        }
        Ok(Self { inputs, outputs, probs, input_labels: None, output_labels: None })
    }

    /// Row-major construction from a flat slice.
    pub fn from_flat(data: &[f64], inputs: usize, outputs: usize, tolerance: f64) -> Result<Self> {
        if inputs == 0 || outputs == 0 || data.len() != inputs * outputs {
            return Err(LeakageError::ShapeError(format!(
                "{} values cannot form a {inputs}x{outputs} matrix",
                data.len()
            )));
        }
        Self::new(data.chunks(outputs).map(<[f64]>::to_vec).collect(), tolerance)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows, DEFAULT_ROW_TOLERANCE).expect("identity is stochastic")
    }

    /// Binary symmetric channel with crossover probability `flip`.
    pub fn bsc(flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(LeakageError::InvalidParameter(format!("crossover {flip} not in [0, 1]")));
        }
        Self::new(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]], DEFAULT_ROW_TOLERANCE)
    }

    /// Every input maps to the same output distribution.
    pub fn constant(inputs: usize, row: &[f64]) -> Result<Self> {
        Self::new(vec![row.to_vec(); inputs], DEFAULT_ROW_TOLERANCE)
    }

    pub fn with_input_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.inputs {
            return Err(LeakageError::ShapeError(format!(
                "{} input labels for {} inputs",
                labels.len(),
                self.inputs
            )));
        }
        self.input_labels = Some(labels);
        Ok(self)
    }

    pub fn with_output_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.outputs {
            return Err(LeakageError::ShapeError(format!(
                "{} output labels for {} outputs",
                labels.len(),
                self.outputs
            )));
        }
        self.output_labels = Some(labels);
        Ok(self)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.outputs)
    }

    /// Row-major matrix data.
    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn input_labels(&self) -> Option<&[String]> {
        self.input_labels.as_deref()
    }

    pub fn output_labels(&self) -> Option<&[String]> {
        self.output_labels.as_deref()
    }

    /// True when all rows are equal, i.e. input and output are independent.
    pub fn has_identical_rows(&self) -> bool {
        let first = self.row(0);
        self.rows().all(|r| r == first)
    }

    /// Natural logs of the entries, row-major; zero entries map to `-inf`.
    pub(crate) fn log_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }

    /// Cascade `X -> Y -> Z`: the matrix product `self * next`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(LeakageError::ShapeError(format!(
                "cannot compose {}x{} with {}x{}",
                self.inputs, self.outputs, next.inputs, next.outputs
            )));
        }
        let mut probs = vec![0.0; self.inputs * next.outputs];
        for x in 0..self.inputs {
            let out = &mut probs[x * next.outputs..(x + 1) * next.outputs];
            for y in 0..self.outputs {
                let p = self.prob(x, y);
                if p == 0.0 {
                    continue;
                }
                for (z, slot) in out.iter_mut().enumerate() {
                    *slot += p * next.prob(y, z);
                }
            }
        }
        Ok(Channel {
            inputs: self.inputs,
            outputs: next.outputs,
            probs,
            input_labels: self.input_labels.clone(),
            output_labels: next.output_labels.clone(),
        })
    }

    /// Independent parallel use `(X_a, X_b) -> (Y_a, Y_b)`: the Kronecker
    /// product. Input `(i, j)` has index `i * |X_b| + j`, likewise for outputs.
    pub fn product(&self, other: &Channel) -> Channel {
        let inputs = self.inputs * other.inputs;
        let outputs = self.outputs * other.outputs;
        let mut probs = Vec::with_capacity(inputs * outputs);
        for xa in 0..self.inputs {
            for xb in 0..other.inputs {
                for ya in 0..self.outputs {
                    let pa = self.prob(xa, ya);
                    probs.extend(other.row(xb).iter().map(|pb| pa * pb));
                }
            }
        }
        let pair = |a: Option<&[String]>, b: Option<&[String]>| match (a, b) {
            (Some(a), Some(b)) => {
                Some(a.iter().flat_map(|la| b.iter().map(move |lb| format!("{la}:{lb}"))).collect())
            }
            _ => None,
        };
        Channel {
            inputs,
            outputs,
            probs,
            input_labels: pair(self.input_labels(), other.input_labels()),
            output_labels: pair(self.output_labels(), other.output_labels()),
        }
    }

    /// Output distribution `P_Y = P_X * P(y|x)`.
    pub fn push_forward(&self, input: &SimplexPoint) -> Result<SimplexPoint> {
        if input.dim() != self.inputs {
            return Err(LeakageError::ShapeError(format!(
                "distribution over {} symbols pushed through a channel with {} inputs",
                input.dim(),
                self.inputs
            )));
        }
        let mut out = vec![0.0; self.outputs];
        for (x, &px) in input.weights().iter().enumerate() {
            for (slot, &p) in out.iter_mut().zip(self.row(x)) {
                *slot += px * p;
            }
        }
        Ok(SimplexPoint::from_trusted(out))
    }

    /// Parses the channel CSV format: one row per input symbol, comma
    /// separated probabilities, and an optional first line `# y0,y1,...`
    /// naming the outputs.
    pub fn from_csv_str(text: &str, tolerance: f64) -> Result<Self> {
        let mut labels: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        let mut seen_content = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                if seen_content {
                    return Err(LeakageError::Parse {
                        line: line_no,
                        message: "label header must be the first line".into(),
                    });
                }
                labels = Some(header.split(',').map(|s| s.trim().to_string()).collect());
                seen_content = true;
                continue;
            }
            seen_content = true;
            let row = line
                .split(',')
                .map(|cell| {
                    let cell = cell.trim();
                    cell.parse::<f64>().map_err(|_| LeakageError::Parse {
                        line: line_no,
                        message: format!("`{cell}` is not a decimal number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let channel = Self::new(rows, tolerance)?;
        match labels {
            Some(labels) => channel.with_output_labels(labels),
            None => Ok(channel),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>, tolerance: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, tolerance)
    }

    /// Serializes with 17 significant digits, enough to re-read every entry
    /// bit-for-bit.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        if let Some(labels) = &self.output_labels {
            let _ = writeln!(out, "# {}", labels.join(","));
        }
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}
