use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_f32_file, read_json, write_f32_file, write_json};
use crate::error::{Error, Result};
use crate::model::TextBank;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBankClass {
    pub name: String,
    pub description: String,
}

/// JSON half of a text bank. Binary rows follow `classes` order, then the
/// foreground row, then the background row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBankMeta {
    pub dim: usize,
    pub classes: Vec<TextBankClass>,
    pub foreground: String,
    pub background: String,
}

/// `<prefix>.json` and `<prefix>.bin`.
pub fn textbank_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".json"), with(".bin"))
}

pub fn load_textbank(json_path: &Path, bin_path: &Path) -> Result<TextBank> {
    let meta: TextBankMeta = read_json(json_path)?;
    let k = meta.classes.len();
    let dim = meta.dim;
    if dim == 0 {
        return Err(Error::format(json_path, "dim must be positive"));
    }
    let expected_rows = k as u64 + 2;
    let raw = match read_f32_file(bin_path, expected_rows * dim as u64) {
        Err(Error::SizeMismatch { actual, .. }) if actual % (4 * dim as u64) == 0 => {
            return Err(Error::format(
                bin_path,
                format!(
                    "expected K+2 rows ({expected_rows}), found {}",
                    actual / (4 * dim as u64)
                ),
            ));
        }
        other => other?,
    };
    let mut rows: Vec<Vec<f64>> = raw
        .chunks_exact(dim)
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let background = rows.pop().expect("K+2 rows");
    let foreground = rows.pop().expect("K+2 rows");
    let (names, descriptions) = meta
        .classes
        .into_iter()
        .map(|c| (c.name, c.description))
        .unzip();
    TextBank::new(names, descriptions, rows, foreground, background)
}

pub fn write_textbank(
    prefix: &Path,
    bank: &TextBank,
    foreground: &str,
    background: &str,
) -> Result<()> {
    let (json_path, bin_path) = textbank_paths(prefix);
    let meta = TextBankMeta {
        dim: bank.dim(),
        classes: bank
            .class_names()
            .iter()
            .zip(bank.class_descriptions())
            .map(|(name, description)| TextBankClass {
                name: name.clone(),
                description: description.clone(),
            })
            .collect(),
        foreground: foreground.to_string(),
        background: background.to_string(),
    };
    write_json(&json_path, &meta)?;
    write_f32_file(
        &bin_path,
        bank.class_embeddings()
            .chain([bank.foreground(), bank.background()]),
    )
}
