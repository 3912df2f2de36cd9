//! Checkpoint serialization: a flat little-endian f64 archive plus a
//! plain-text shape manifest.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::mlp::{MlpConfig, MlpParams};

const TENSOR_NAMES: [&str; 8] = ["w1", "b1", "w2", "b2", "wa", "ba", "we", "be"];

/// Writes `<base>.bin` (all tensors concatenated, f64 little-endian) and
/// `<base>.manifest` (config line plus one `name rows cols` line per tensor).
pub fn save_checkpoint(params: &MlpParams, base: &Path) -> Result<()> {
    let cfg = params.cfg;
    let mut manifest = format!(
        "mlp {} {} {} {} {}\n",
        cfg.input_dim, cfg.hidden1, cfg.hidden2, cfg.attr_dim, cfg.embed_dim
    );
    let mut bin = fs::File::create(base.with_extension("bin"))?;
    for ((t, _), name) in params.tensors().iter().zip(TENSOR_NAMES) {
        manifest.push_str(&format!("{name} {} {}\n", t.rows, t.cols));
        for v in &t.data {
            bin.write_all(&v.to_le_bytes())?;
        }
    }
    fs::write(base.with_extension("manifest"), manifest)?;
    Ok(())
}

pub fn load_checkpoint(base: &Path) -> Result<MlpParams> {
    let manifest = fs::read_to_string(base.with_extension("manifest"))?;
    let mut lines = manifest.lines();
    let header = lines.next().ok_or_else(|| Error::invalid("empty checkpoint manifest"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "mlp" {
        return Err(Error::invalid("malformed checkpoint manifest header"));
    }
    let dims: Vec<usize> = fields[1..]
        .iter()
        .map(|s| s.parse().map_err(|_| Error::invalid("bad manifest dimension")))
        .collect::<Result<_>>()?;
    let cfg = MlpConfig {
        input_dim: dims[0],
        hidden1: dims[1],
        hidden2: dims[2],
        attr_dim: dims[3],
        embed_dim: dims[4],
    };
    let mut params = MlpParams::init(cfg, 0).zeros_like();

    let mut bin = fs::File::open(base.with_extension("bin"))?;
    for ((t, _), name) in params.tensors_mut().iter_mut().zip(TENSOR_NAMES) {
        let line = lines.next().ok_or_else(|| Error::invalid("truncated manifest"))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != name {
            return Err(Error::invalid(format!("manifest expected tensor {name}")));
        }
        let rows: usize = parts[1].parse().map_err(|_| Error::invalid("bad tensor rows"))?;
        let cols: usize = parts[2].parse().map_err(|_| Error::invalid("bad tensor cols"))?;
        if rows != t.rows || cols != t.cols {
            return Err(Error::invalid(format!("tensor {name} shape mismatch with config")));
        }
        let mut buf = [0u8; 8];
        for v in &mut t.data {
            bin.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    let mut extra = [0u8; 1];
    if bin.read(&mut extra)? != 0 {
        return Err(Error::invalid("checkpoint binary has trailing data"));
    }
    if !params.is_finite() {
        return Err(Error::NumericFailure("checkpoint contains non-finite values".into()));
    }
    Ok(params)
}
