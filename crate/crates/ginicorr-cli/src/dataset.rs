//! Dataset ingestion: the bundled iris data and user-supplied CSV files.
//!
//! CSV files are RFC-4180-style UTF-8 with a configurable delimiter. When a
//! header row is present, columns are selected by name (an integer that
//! matches no header is also accepted as a 0-based index); without a header
//! they are selected by 0-based index only. The label column defaults to the
//! last column and the features to every other column. Label cells are kept
//! as strings and mapped to class indices in sorted order, so class numbering
//! does not depend on row order.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ginicorr::{iris_features, LabeledSample, IRIS_FEATURES, IRIS_SPECIES};

/// A parsed dataset plus the naming needed for readable reports.
#[derive(Debug)]
pub struct LoadedDataset {
    pub sample: LabeledSample,
    pub feature_names: Vec<String>,
    pub label_name: String,
    /// Class display names, indexed by the sample's class indices.
    pub class_names: Vec<String>,
    /// Where the data came from, for report headers.
    pub source: String,
}

/// Column-selection options for [`load`].
pub struct ColumnSpec<'a> {
    /// Label column name or index; `None` selects the last column.
    pub label: Option<&'a str>,
    /// Comma-separated feature names/indices; `None` selects all non-label
    /// columns.
    pub features: Option<&'a str>,
    pub delimiter: char,
    /// The first row is data, not a header.
    pub no_header: bool,
}

/// Loads `iris` (bundled) or a CSV file path.
pub fn load(data: &str, spec: &ColumnSpec<'_>) -> Result<LoadedDataset> {
    if data.eq_ignore_ascii_case("iris") {
        return load_iris(spec);
    }
    load_csv(Path::new(data), spec)
}

fn load_iris(spec: &ColumnSpec<'_>) -> Result<LoadedDataset> {
    if let Some(label) = spec.label {
        if label != "species" {
            bail!("the bundled iris data always uses its `species` column as the label");
        }
    }
    let indices: Vec<usize> = match spec.features {
        None => (0..IRIS_FEATURES.len()).collect(),
        Some(list) => list
            .split(',')
            .map(|raw| {
                let name = raw.trim();
                IRIS_FEATURES
                    .iter()
                    .position(|&f| f == name)
                    .or_else(|| name.parse::<usize>().ok().filter(|&i| i < IRIS_FEATURES.len()))
                    .ok_or_else(|| {
                        anyhow!(
                            "unknown iris feature '{name}' (available: {})",
                            IRIS_FEATURES.join(", ")
                        )
                    })
            })
            .collect::<Result<_>>()?,
    };
    let sample = iris_features(&indices)?;
    Ok(LoadedDataset {
        sample,
        feature_names: indices.iter().map(|&i| IRIS_FEATURES[i].to_string()).collect(),
        label_name: "species".into(),
        class_names: IRIS_SPECIES.iter().map(|s| s.to_string()).collect(),
        source: "iris (bundled)".into(),
    })
}

/// Resolves a column selector against the header (if any).
fn resolve_column(selector: &str, headers: Option<&[String]>, ncols: usize) -> Result<usize> {
    let selector = selector.trim();
    if let Some(headers) = headers {
        if let Some(i) = headers.iter().position(|h| h == selector) {
            return Ok(i);
        }
    }
    if let Ok(i) = selector.parse::<usize>() {
        if i < ncols {
            return Ok(i);
        }
        bail!("column index {i} out of range (the file has {ncols} columns)");
    }
    match headers {
        Some(headers) => bail!(
            "no column named '{selector}' (available: {})",
            headers.join(", ")
        ),
        None => bail!("'{selector}' is not a 0-based column index and the file has no header"),
    }
}

fn column_label(i: usize, headers: Option<&[String]>) -> String {
    match headers {
        Some(h) => h[i].clone(),
        None => format!("column {i}"),
    }
}

fn load_csv(path: &Path, spec: &ColumnSpec<'_>) -> Result<LoadedDataset> {
    if !spec.delimiter.is_ascii() {
        bail!("delimiter must be a single ASCII character");
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .has_headers(!spec.no_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let headers: Option<Vec<String>> = if spec.no_header {
        None
    } else {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    };

    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    if records.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let ncols = headers.as_ref().map(Vec::len).unwrap_or_else(|| records[0].len());

    let label_idx = match spec.label {
        Some(sel) => resolve_column(sel, headers.as_deref(), ncols)?,
        None => ncols
            .checked_sub(1)
            .ok_or_else(|| anyhow!("{}: the file has no columns", path.display()))?,
    };
    let feature_idx: Vec<usize> = match spec.features {
        None => (0..ncols).filter(|&i| i != label_idx).collect(),
        Some(list) => list
            .split(',')
            .map(|sel| resolve_column(sel, headers.as_deref(), ncols))
            .collect::<Result<_>>()?,
    };
    if feature_idx.is_empty() {
        bail!("no feature columns selected");
    }
    let mut seen = std::collections::HashSet::new();
    for &i in &feature_idx {
        if i == label_idx {
            bail!(
                "'{}' is the label column and cannot also be a feature",
                column_label(i, headers.as_deref())
            );
        }
        if !seen.insert(i) {
            bail!("feature '{}' selected twice", column_label(i, headers.as_deref()));
        }
    }

    let mut flat = Vec::with_capacity(records.len() * feature_idx.len());
    let mut label_strings = Vec::with_capacity(records.len());
    for record in &records {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != ncols {
            bail!(
                "{} line {line}: expected {ncols} fields, found {}",
                path.display(),
                record.len()
            );
        }
        for &fi in &feature_idx {
            let cell = record.get(fi).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| {
                anyhow!(
                    "{} line {line}, {}: '{cell}' is not numeric",
                    path.display(),
                    column_label(fi, headers.as_deref())
                )
            })?;
            if !value.is_finite() {
                bail!(
                    "{} line {line}, {}: non-finite value '{cell}'",
                    path.display(),
                    column_label(fi, headers.as_deref())
                );
            }
            flat.push(value);
        }
        label_strings.push(record.get(label_idx).unwrap_or("").to_string());
    }

    // Sorted unique label values -> class indices, independent of row order.
    let unique: std::collections::BTreeSet<&str> =
        label_strings.iter().map(String::as_str).collect();
    let class_names: Vec<String> = unique.into_iter().map(str::to_string).collect();
    let class_map: BTreeMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();
    if class_names.len() < 2 {
        bail!(
            "K >= 2 required: label column '{}' contains the single class '{}'",
            column_label(label_idx, headers.as_deref()),
            class_names.first().map(String::as_str).unwrap_or("")
        );
    }
    let labels: Vec<usize> = label_strings.iter().map(|s| class_map[s.as_str()]).collect();

    let sample = LabeledSample::from_flat(flat, feature_idx.len(), labels)?;
    Ok(LoadedDataset {
        sample,
        feature_names: feature_idx
            .iter()
            .map(|&i| column_label(i, headers.as_deref()))
            .collect(),
        label_name: column_label(label_idx, headers.as_deref()),
        class_names,
        source: path.display().to_string(),
    })
}
