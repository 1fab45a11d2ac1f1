//! Bundled example data: Fisher's iris measurements (150 flowers, four
//! measurements each, three species), embedded at compile time.

use crate::error::{Error, Result};
use crate::gmd::LabeledSample;

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Column names of the four iris measurements, in file order.
pub const IRIS_FEATURES: [&str; 4] = [
    "sepal_length",
    "sepal_width",
    "petal_length",
    "petal_width",
];

/// Species names in label order (label 0, 1, 2).
pub const IRIS_SPECIES: [&str; 3] = ["setosa", "versicolor", "virginica"];

/// The full iris sample: all four measurements, species as the label.
pub fn iris() -> LabeledSample {
    iris_features(&[0, 1, 2, 3]).expect("embedded iris data is valid")
}

/// The iris sample restricted to the given measurement columns (indices
/// into [`IRIS_FEATURES`]), in the order given.
pub fn iris_features(features: &[usize]) -> Result<LabeledSample> {
    if features.is_empty() {
        return Err(Error::InvalidParameter {
            name: "features",
            message: "at least one feature column is required".to_string(),
        });
    }
    for &f in features {
        if f >= IRIS_FEATURES.len() {
            return Err(Error::InvalidParameter {
                name: "features",
                message: format!("feature index {f} is out of range (0..=3)"),
            });
        }
    }
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for line in IRIS_CSV.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let values: Vec<f64> = fields[..4]
            .iter()
            .map(|v| v.parse().expect("embedded iris data is numeric"))
            .collect();
        for &f in features {
            x.push(values[f]);
        }
        let species = fields[4];
        let label = IRIS_SPECIES
            .iter()
            .position(|&s| s == species)
            .expect("embedded iris data has known species");
        labels.push(label);
    }
    LabeledSample::from_flat(x, features.len(), labels)
}
