//! `tscnet v1` model files.
//!
//! ```text
//! tscnet v1
//! seed <u64>
//! layers <count>
//! layer <input_width> <output_width> <activation>
//! <output_width lines of input_width weights, row-major>
//! <one line of output_width biases>
//! ...
//! ```
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips `f64` (and `f32`) exactly.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, DenseLayer, DenseNetwork, NetError};
use crate::Scalar;

pub const MODEL_HEADER: &str = "tscnet v1";

pub fn write_model<T: Scalar>(net: &DenseNetwork<T>) -> String {
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("seed {}\n", net.seed()));
    out.push_str(&format!("layers {}\n", net.layers().len()));
    for layer in net.layers() {
        let spec = layer.spec();
        out.push_str(&format!(
            "layer {} {} {}\n",
            spec.input_width, spec.output_width, spec.activation
        ));
        for row in layer.weights.outer_iter() {
            push_values(&mut out, row.iter());
        }
        push_values(&mut out, layer.biases.iter());
    }
    out
}

fn push_values<'a, T: Scalar>(out: &mut String, values: impl Iterator<Item = &'a T>) {
    let line: Vec<String> = values.map(|v| format!("{v:.16e}")).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

pub fn save_model<T: Scalar>(net: &DenseNetwork<T>, path: &Path) -> Result<(), NetError> {
    std::fs::write(path, write_model(net)).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<DenseNetwork<T>, NetError> {
    let text = std::fs::read_to_string(path).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str), NetError> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok((i + 1, line.trim_end_matches('\r')))
            }
            None => Err(NetError::Parse {
                line: self.last + 1,
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), NetError> {
        let (no, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(parse_error(no, format!("expected `{key}`")));
        }
        Ok((no, parts.collect()))
    }

    fn values<T: Scalar>(&mut self, expected: usize) -> Result<Vec<T>, NetError> {
        let (no, line) = self.next_line()?;
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(no, format!("bad number `{tok}`")))
            })
            .collect::<Result<Vec<T>, _>>()?;
        if values.len() != expected {
            return Err(parse_error(
                no,
                format!("expected {expected} values, found {}", values.len()),
            ));
        }
        Ok(values)
    }
}

fn parse_error(line: usize, message: String) -> NetError {
    NetError::Parse { line, message }
}

fn parse_usize(no: usize, tok: Option<&&str>, what: &str) -> Result<usize, NetError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_error(no, format!("bad {what}")))
}

pub fn parse_model<T: Scalar>(text: &str) -> Result<DenseNetwork<T>, NetError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (no, header) = lines.next_line()?;
    if header.trim() != MODEL_HEADER {
        return Err(parse_error(no, format!("expected header `{MODEL_HEADER}`")));
    }
    let (no, seed) = lines.keyword("seed")?;
    let seed: u64 = seed
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(no, "bad seed".into()))?;
    let (no, count) = lines.keyword("layers")?;
    let count = parse_usize(no, count.first(), "layer count")?;
    if count == 0 {
        return Err(parse_error(no, "layer count must be positive".into()));
    }

    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, parts) = lines.keyword("layer")?;
        if parts.len() != 3 {
            return Err(parse_error(no, "expected `layer <in> <out> <activation>`".into()));
        }
        let input = parse_usize(no, parts.first(), "input width")?;
        let output = parse_usize(no, parts.get(1), "output width")?;
        let activation: Activation = parts[2].parse().map_err(|m| parse_error(no, m))?;
        if input == 0 || output == 0 {
            return Err(parse_error(no, "widths must be positive".into()));
        }
        let mut weights = Vec::with_capacity(input * output);
        for _ in 0..output {
            weights.extend(lines.values::<T>(input)?);
        }
        let biases = lines.values::<T>(output)?;
        layers.push(DenseLayer {
            activation,
            weights: Array2::from_shape_vec((output, input), weights).expect("sized above"),
            biases: Array1::from(biases),
        });
    }
    if let Some((i, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_error(i + 1, format!("trailing content `{extra}`")));
    }
    DenseNetwork::from_layers(layers, seed)
}
