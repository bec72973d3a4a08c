//! Manifold description files: a JSON document with expression-string
//! entries describing the chart, the symplectic form, and optionally the
//! Christoffel symbols of a connection.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "coordinates": ["x1", "x2"],
//!   "jet_order": 10,
//!   "omega": [["0", "1 + x1"], ["-(1 + x1)", "0"]],
//!   "christoffel": { "1,1,1": "2/3 - 2/3*x1" }
//! }
//! ```
//!
//! `{"preset": "darboux", "dimension": 4}` expands to the standard constant
//! structure before validation. Christoffel keys are 1-based `"k,i,j"`
//! triples for `Gamma^k_{ij}`; absent entries are zero; an absent
//! `christoffel` map means the zero connection.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expr::parse_expression;
use crate::geometry::{Connection, SymplecticStructure};
use crate::jet::Jet;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub christoffel: Option<BTreeMap<String, String>>,
}

/// Fully validated chart data.
#[derive(Clone, Debug)]
pub struct LoadedManifold {
    pub coordinates: Vec<String>,
    pub jet_order: u32,
    pub structure: SymplecticStructure,
    /// Present iff the file declared Christoffel symbols.
    pub connection: Option<Connection>,
}

/// Read, expand presets, and validate; every failure is collected rather
/// than stopping at the first.
pub fn load_spec(
    path: &Path,
    jet_order_override: Option<u32>,
    default_jet_order: u32,
) -> Result<LoadedManifold> {
    let text = std::fs::read_to_string(path)?;
    let file: ManifoldSpecFile = serde_json::from_str(&text)?;
    build_manifold(file, jet_order_override, default_jet_order)
}

/// Validate an in-memory description.
pub fn build_manifold(
    mut file: ManifoldSpecFile,
    jet_order_override: Option<u32>,
    default_jet_order: u32,
) -> Result<LoadedManifold> {
    let mut failures: Vec<String> = Vec::new();

    if let Some(preset) = file.preset.take() {
        match preset.as_str() {
            "darboux" => expand_darboux(&mut file),
            other => {
                return Err(Error::validation(format!("unknown preset `{other}`")));
            }
        }
    }

    let dimension = match file.dimension {
        Some(d) if d >= 2 && d % 2 == 0 => d,
        Some(d) => {
            return Err(Error::validation(format!(
                "dimension must be even and at least 2, got {d}"
            )));
        }
        None => return Err(Error::validation("dimension is required")),
    };

    let coordinates = file
        .coordinates
        .unwrap_or_else(|| (1..=dimension).map(|i| format!("x{i}")).collect());
    if coordinates.len() != dimension {
        return Err(Error::validation(format!(
            "expected {dimension} coordinates, got {}",
            coordinates.len()
        )));
    }
    for (index, name) in coordinates.iter().enumerate() {
        if name.is_empty()
            || !name.chars().next().unwrap().is_alphabetic()
            || !name.chars().all(|c| c.is_alphanumeric() || c == '_')
        {
            failures.push(format!(
                "coordinate {} has invalid name `{name}`",
                index + 1
            ));
        }
        if coordinates[..index].contains(name) {
            failures.push(format!("coordinate name `{name}` is repeated"));
        }
    }

    let jet_order = jet_order_override
        .or(file.jet_order)
        .unwrap_or(default_jet_order);

    let omega_sources = match &file.omega {
        Some(rows) => rows,
        None => return Err(Error::validation("omega matrix is required")),
    };
    if omega_sources.len() != dimension || omega_sources.iter().any(|row| row.len() != dimension) {
        return Err(Error::validation(format!(
            "omega must be a {dimension}x{dimension} matrix of expressions"
        )));
    }

    let mut omega_lower = vec![vec![Jet::zero(dimension, jet_order); dimension]; dimension];
    for (k, row) in omega_sources.iter().enumerate() {
        for (l, source) in row.iter().enumerate() {
            match parse_expression(source, &coordinates)
                .and_then(|e| e.to_jet(dimension, jet_order))
            {
                Ok(jet) => omega_lower[k][l] = jet,
                Err(error) => {
                    failures.push(format!("omega[{}][{}]: {error}", k + 1, l + 1));
                }
            }
        }
    }

    let mut christoffel = None;
    if let Some(map) = &file.christoffel {
        let mut gamma =
            vec![vec![vec![Jet::zero(dimension, jet_order); dimension]; dimension]; dimension];
        for (key, source) in map {
            match parse_index_triple(key, dimension) {
                Ok((k, i, j)) => {
                    match parse_expression(source, &coordinates)
                        .and_then(|e| e.to_jet(dimension, jet_order))
                    {
                        Ok(jet) => gamma[k][i][j] = jet,
                        Err(error) => failures.push(format!("christoffel[{key}]: {error}")),
                    }
                }
                Err(msg) => failures.push(msg),
            }
        }
        christoffel = Some(gamma);
    }

    if !failures.is_empty() {
        return Err(Error::Validation { failures });
    }

    let structure = match SymplecticStructure::validate(omega_lower) {
        Ok(structure) => structure,
        Err(Error::Validation {
            failures: structural,
        }) => {
            failures.extend(structural);
            return Err(Error::Validation { failures });
        }
        Err(other) => return Err(other),
    };

    let connection = match christoffel {
        Some(gamma) => Some(Connection::new(gamma, &structure)?),
        None => None,
    };

    Ok(LoadedManifold {
        coordinates,
        jet_order,
        structure,
        connection,
    })
}

fn expand_darboux(file: &mut ManifoldSpecFile) {
    let dimension = file.dimension.unwrap_or(2);
    file.dimension = Some(dimension);
    if file.omega.is_none() {
        let n = dimension / 2;
        let mut rows = vec![vec!["0".to_string(); dimension]; dimension];
        for i in 0..n {
            rows[i][i + n] = "1".to_string();
            rows[i + n][i] = "-1".to_string();
        }
        file.omega = Some(rows);
    }
}

fn parse_index_triple(
    key: &str,
    dimension: usize,
) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "christoffel key `{key}` must be a `k,i,j` index triple"
        ));
    }
    let mut indices = [0usize; 3];
    for (slot, part) in indices.iter_mut().zip(&parts) {
        match part.parse::<usize>() {
            Ok(value) if (1..=dimension).contains(&value) => *slot = value - 1,
            _ => {
                return Err(format!(
                    "christoffel key `{key}`: index `{part}` out of range 1..={dimension}"
                ));
            }
        }
    }
    Ok((indices[0], indices[1], indices[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::integer;

    fn build(json: &str) -> Result<LoadedManifold> {
        let file: ManifoldSpecFile = serde_json::from_str(json).unwrap();
        build_manifold(file, None, 6)
    }

    #[test]
    fn darboux_preset_expands() {
        let loaded = build(r#"{"preset": "darboux", "dimension": 2}"#).unwrap();
        assert_eq!(loaded.coordinates, vec!["x1", "x2"]);
        assert_eq!(loaded.jet_order, 6);
        assert!(loaded.connection.is_none());
        assert_eq!(loaded.structure.omega_lower()[0][1], Jet::one(2, 6));
    }

    #[test]
    fn curved_chart_with_symbols() {
        let loaded = build(
            r#"{
                "dimension": 2,
                "jet_order": 8,
                "omega": [["0", "1 + x1"], ["-1 - x1", "0"]],
                "christoffel": {"1,1,2": "x2"}
            }"#,
        )
        .unwrap();
        let connection = loaded.connection.unwrap();
        assert_eq!(
            connection.christoffel()[0][0][1],
            Jet::coordinate(2, 8, 1).unwrap()
        );
        assert_eq!(connection.christoffel()[0][1][0], Jet::zero(2, 8));
    }

    #[test]
    fn antisymmetry_failure_is_named() {
        let result = build(r#"{"dimension": 2, "omega": [["0", "1"], ["1", "0"]]}"#);
        match result {
            Err(Error::Validation { failures }) => {
                assert!(failures.contains(&"omega[1][2] != -omega[2][1]".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_failures_collected() {
        let result = build(
            r#"{
                "dimension": 2,
                "omega": [["0", "x3"], ["nope+", "0"]],
                "christoffel": {"5,1,1": "1", "1,1,1": "x9"}
            }"#,
        );
        match result {
            Err(Error::Validation { failures }) => {
                assert!(failures.len() >= 4, "got {failures:?}");
                assert!(failures.iter().any(|f| f.starts_with("omega[1][2]")));
                assert!(failures.iter().any(|f| f.starts_with("omega[2][1]")));
                assert!(failures.iter().any(|f| f.contains("out of range")));
                assert!(failures.iter().any(|f| f.starts_with("christoffel[1,1,1]")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jet_order_priority() {
        let file: ManifoldSpecFile =
            serde_json::from_str(r#"{"preset": "darboux", "dimension": 2, "jet_order": 4}"#)
                .unwrap();
        assert_eq!(build_manifold(file.clone(), None, 9).unwrap().jet_order, 4);
        assert_eq!(build_manifold(file, Some(12), 9).unwrap().jet_order, 12);
    }

    #[test]
    fn unknown_fields_rejected() {
        let parsed: std::result::Result<ManifoldSpecFile, _> =
            serde_json::from_str(r#"{"dimension": 2, "omege": []}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn custom_coordinate_names() {
        let loaded = build(
            r#"{
                "dimension": 2,
                "coordinates": ["q", "p"],
                "omega": [["0", "1 + q"], ["-1 - q", "0"]]
            }"#,
        )
        .unwrap();
        assert_eq!(
            loaded.structure.omega_lower()[0][1],
            Jet::one(2, 6)
                .add(&Jet::coordinate(2, 6, 0).unwrap())
                .unwrap()
        );
        assert_eq!(
            loaded.structure.omega_lower()[0][1].coefficient(&[1, 0]),
            integer(1)
        );
    }
}
