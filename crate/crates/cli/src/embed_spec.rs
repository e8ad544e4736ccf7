//! TOML description of the objects to embed.
//!
//! ```toml
//! [[boundary]]
//! shape = "ellipse"
//! nd = 64
//! params = { a = 0.3, b = 0.15, tilt = 0.785398 }
//!
//! [[boundary]]
//! seeds = "cell.csv"   # relative to this file
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nodegen::embedded::EmbeddedSpec;
use nodegen::ShapeSpec;
use serde::Deserialize;

use crate::commands::{read_text, seeds_with_params, CliError};

const DEFAULT_ND: usize = 64;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedFile {
    #[serde(default)]
    boundary: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    shape: Option<String>,
    nd: Option<usize>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    seeds: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<Vec<EmbeddedSpec>, CliError> {
    let text = read_text(path)?;
    let file: EmbedFile =
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.boundary
        .iter()
        .enumerate()
        .map(|(k, entry)| {
            entry
                .resolve(base)
                .map_err(|e| e.context(&format!("boundary {}", k + 1)))
        })
        .collect()
}

impl Entry {
    fn resolve(&self, base: &Path) -> Result<EmbeddedSpec, CliError> {
        match (&self.shape, &self.seeds) {
            (Some(name), None) => {
                let mut shape = ShapeSpec::named(name)?;
                for (k, &v) in &self.params {
                    shape.set(k, v)?;
                }
                Ok(EmbeddedSpec::from_shape(
                    &shape,
                    self.nd.unwrap_or(DEFAULT_ND),
                )?)
            }
            (None, Some(file)) => {
                if self.nd.is_some() || !self.params.is_empty() {
                    return Err(CliError::Input(
                        "`nd` and `params` apply to shapes only".into(),
                    ));
                }
                let (seeds, params) = seeds_with_params(&base.join(file))?;
                Ok(EmbeddedSpec::new(seeds, params))
            }
            _ => Err(CliError::Input(
                "give exactly one of `shape` or `seeds`".into(),
            )),
        }
    }
}
