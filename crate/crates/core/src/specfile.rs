//! On-disk channel descriptions. A channel file is a single JSON object
//! naming a recipe (`identity`, `depolarizing`, ...) or carrying an explicit
//! Choi or unitary matrix; matrices are nested row-major arrays of
//! `[re, im]` pairs. Unknown or inapplicable keys are rejected so a typo
//! cannot silently fall back to a default.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::channel::{ChannelChoi, ChannelError, ChannelSpec};
use crate::operator::{CMatrix, Cx};
use crate::superchannel::SuperchannelChoi;

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid channel JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad channel description: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Row-major complex matrix as it appears in the files.
pub type NestedMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    #[serde(rename = "type")]
    kind: String,
    d: Option<usize>,
    d_in: Option<usize>,
    d_out: Option<usize>,
    lambda: Option<f64>,
    choi: Option<NestedMatrix>,
    unitary: Option<NestedMatrix>,
}

fn bad(msg: String) -> SpecFileError {
    SpecFileError::BadFormat(msg)
}

pub fn nested_to_matrix(rows: &NestedMatrix) -> Result<CMatrix, SpecFileError> {
    let r = rows.len();
    if r == 0 {
        return Err(bad("matrix has no rows".into()));
    }
    let c = rows[0].len();
    if rows.iter().any(|row| row.len() != c) {
        return Err(bad("matrix rows have unequal lengths".into()));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| {
        Cx::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn matrix_to_nested(m: &CMatrix) -> NestedMatrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.entry(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

impl ChannelFile {
    fn require<T: Copy>(&self, f: Option<T>, name: &str) -> Result<T, SpecFileError> {
        f.ok_or_else(|| bad(format!("type {:?} requires field {name}", self.kind)))
    }

    fn forbid<T>(&self, f: &Option<T>, name: &str) -> Result<(), SpecFileError> {
        if f.is_some() {
            return Err(bad(format!(
                "field {name} does not apply to type {:?}",
                self.kind
            )));
        }
        Ok(())
    }

    fn into_spec(self) -> Result<ChannelSpec, SpecFileError> {
        let only = |allowed: &[&str]| -> Result<(), SpecFileError> {
            for (name, present) in [
                ("d", self.d.is_some()),
                ("d_in", self.d_in.is_some()),
                ("d_out", self.d_out.is_some()),
                ("lambda", self.lambda.is_some()),
                ("choi", self.choi.is_some()),
                ("unitary", self.unitary.is_some()),
            ] {
                if present && !allowed.contains(&name) {
                    self.forbid(&Some(()), name)?;
                }
            }
            Ok(())
        };
        match self.kind.as_str() {
            "identity" => {
                only(&["d"])?;
                Ok(ChannelSpec::Identity {
                    d: self.require(self.d, "d")?,
                })
            }
            "dephasing" => {
                only(&["d"])?;
                Ok(ChannelSpec::Dephasing {
                    d: self.require(self.d, "d")?,
                })
            }
            "depolarizing" => {
                only(&["d", "lambda"])?;
                Ok(ChannelSpec::Depolarizing {
                    lambda: self.require(self.lambda, "lambda")?,
                    d: self.require(self.d, "d")?,
                })
            }
            "partial-dephasing" => {
                only(&["d", "lambda"])?;
                Ok(ChannelSpec::PartialDephasing {
                    lambda: self.require(self.lambda, "lambda")?,
                    d: self.require(self.d, "d")?,
                })
            }
            "replace-plus" => {
                only(&["d"])?;
                Ok(ChannelSpec::ReplacePlus {
                    d: self.require(self.d, "d")?,
                })
            }
            "choi" => {
                only(&["d_in", "d_out", "choi"])?;
                let d_in = self.require(self.d_in, "d_in")?;
                let d_out = self.require(self.d_out, "d_out")?;
                let rows = self
                    .choi
                    .as_ref()
                    .ok_or_else(|| bad("type \"choi\" requires field choi".into()))?;
                let mat = nested_to_matrix(rows)?;
                if mat.rows() != d_in * d_out || mat.cols() != d_in * d_out {
                    return Err(bad(format!(
                        "choi matrix is {}x{}, expected {}x{}",
                        mat.rows(),
                        mat.cols(),
                        d_in * d_out,
                        d_in * d_out
                    )));
                }
                Ok(ChannelSpec::Choi { d_in, d_out, mat })
            }
            "unitary" => {
                only(&["unitary"])?;
                let rows = self
                    .unitary
                    .as_ref()
                    .ok_or_else(|| bad("type \"unitary\" requires field unitary".into()))?;
                let u = nested_to_matrix(rows)?;
                if u.rows() != u.cols() {
                    return Err(bad(format!(
                        "unitary matrix is {}x{}, expected square",
                        u.rows(),
                        u.cols()
                    )));
                }
                Ok(ChannelSpec::Unitary { u })
            }
            other => Err(bad(format!("unknown channel type {other:?}"))),
        }
    }
}

/// Parse a channel description from JSON text.
pub fn parse_channel_text(text: &str) -> Result<ChannelSpec, SpecFileError> {
    let file: ChannelFile = serde_json::from_str(text)?;
    file.into_spec()
}

/// Parse a channel description file.
pub fn read_channel_file(path: &Path) -> Result<ChannelSpec, SpecFileError> {
    let text = fs::read_to_string(path).map_err(|source| SpecFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_channel_text(&text)
}

/// A channel as a writable JSON value, always in explicit Choi form.
pub fn channel_to_value(c: &ChannelChoi) -> Value {
    json!({
        "type": "choi",
        "d_in": c.sys().d_in,
        "d_out": c.sys().d_out,
        "choi": matrix_to_nested(c.choi()),
    })
}

/// A superchannel as a writable JSON value: the four dimensions followed by
/// the Choi matrix in the same nested format.
pub fn superchannel_to_value(s: &SuperchannelChoi) -> Value {
    json!({
        "a0": s.sys_in().d_in,
        "a1": s.sys_in().d_out,
        "b0": s.sys_out().d_in,
        "b1": s.sys_out().d_out,
        "choi": matrix_to_nested(s.choi()),
    })
}
