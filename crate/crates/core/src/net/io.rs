use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::network::{Dense, Network, NetworkArch};
use super::train::EpochLog;
use crate::data::create;
use crate::error::{Error, Result};

const MAGIC: &str = "readervar-network 1";

/// Text model file: a header naming the architecture, then for each layer
/// a `layer,i,rows,cols` line, `rows` weight lines and one offset line.
pub fn write_network(net: &Network, path: &Path, provenance: Option<&str>) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    if let Some(p) = provenance {
        writeln!(out, "# {p}").map_err(io)?;
    }
    let arch = &net.arch;
    writeln!(out, "{MAGIC}").map_err(io)?;
    writeln!(out, "input_dim,{}", arch.input_dim).map_err(io)?;
    writeln!(out, "hidden_widths,{}", join(arch.hidden_widths.iter())).map_err(io)?;
    writeln!(out, "output_count,{}", arch.output_count).map_err(io)?;
    for (i, l) in net.layers.iter().enumerate() {
        writeln!(out, "layer,{i},{},{}", l.weights.nrows(), l.weights.ncols()).map_err(io)?;
        for row in l.weights.rows() {
            writeln!(out, "{}", join(row.iter())).map_err(io)?;
        }
        writeln!(out, "{}", join(l.bias.iter())).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn join<T: std::fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn load_network(path: &Path) -> Result<Network> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.starts_with('#') && !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let bad = |reason: String| Error::Header {
        path: path.to_path_buf(),
        reason,
    };
    let mut it = lines.iter().enumerate();
    match it.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(format!("expected `{MAGIC}`"))),
    }
    let mut field = |name: &str| -> Result<Vec<usize>> {
        let (_, l) = it.next().ok_or_else(|| bad(format!("missing {name}")))?;
        let rest = l
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix(','))
            .ok_or_else(|| bad(format!("expected {name}, got `{l}`")))?;
        rest.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad(format!("bad {name} value `{v}`"))))
            .collect()
    };
    let input_dim = field("input_dim")?[0];
    let hidden_widths = field("hidden_widths")?;
    let output_count = field("output_count")?[0];
    let arch = NetworkArch::new(input_dim, hidden_widths, output_count);
    arch.validate()?;

    let mut dims = vec![arch.input_dim];
    dims.extend(&arch.hidden_widths);
    dims.push(arch.output_count);
    let parse_row = |(n, l): (usize, &String), want: usize| -> Result<Vec<f64>> {
        let vals = l
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::row(path, n + 1, e.to_string()))?;
        if vals.len() != want || vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::row(path, n + 1, format!("expected {want} finite values")));
        }
        Ok(vals)
    };
    let mut layers = Vec::new();
    for (i, w) in dims.windows(2).enumerate() {
        let (_, header) = it.next().ok_or_else(|| bad(format!("missing layer {i}")))?;
        if *header != format!("layer,{i},{},{}", w[0], w[1]) {
            return Err(bad(format!("layer {i} header `{header}` does not match the architecture")));
        }
        let mut weights = Vec::with_capacity(w[0] * w[1]);
        for _ in 0..w[0] {
            let row = it.next().ok_or_else(|| bad(format!("layer {i} truncated")))?;
            weights.extend(parse_row((row.0, row.1), w[1])?);
        }
        let brow = it.next().ok_or_else(|| bad(format!("layer {i} truncated")))?;
        let bias = parse_row((brow.0, brow.1), w[1])?;
        layers.push(Dense {
            weights: Array2::from_shape_vec((w[0], w[1]), weights).expect("shape"),
            bias: Array1::from(bias),
        });
    }
    if let Some((_, extra)) = it.next() {
        return Err(bad(format!("unexpected trailing line `{extra}`")));
    }
    Ok(Network { arch, layers })
}

pub fn write_training_log(log: &[EpochLog], path: &Path, provenance: Option<&str>) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    if let Some(p) = provenance {
        writeln!(out, "# {p}").map_err(io)?;
    }
    writeln!(out, "epoch,train_loss,val_rmse").map_err(io)?;
    for e in log {
        writeln!(out, "{},{},{}", e.epoch, e.train_loss, e.val_rmse).map_err(io)?;
    }
    out.flush().map_err(io)
}
