//! Facet-list reading and writing.
//!
//! Text format: one facet per line, whitespace-separated vertex ids, `#`
//! starts a comment line. JSON format: `{"facets": [[..], ..]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::{SimplicialComplex, Vertex};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct FacetsJson {
    facets: Vec<Vec<Vertex>>,
}

pub fn parse_facets_text(text: &str) -> Result<Vec<Vec<Vertex>>> {
    let mut facets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let facet = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Vertex>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("bad vertex id '{tok}': {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        facets.push(facet);
    }
    Ok(facets)
}

pub fn parse_facets_json(text: &str) -> Result<Vec<Vec<Vertex>>> {
    let parsed: FacetsJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    if let Some(i) = parsed.facets.iter().position(Vec::is_empty) {
        return Err(Error::EmptyFacet(i));
    }
    Ok(parsed.facets)
}

/// Picks the JSON reader when the first non-blank character is `{`.
pub fn parse_facets(text: &str) -> Result<Vec<Vec<Vertex>>> {
    if text.trim_start().starts_with('{') {
        parse_facets_json(text)
    } else {
        parse_facets_text(text)
    }
}

pub fn read_complex(path: &Path) -> Result<SimplicialComplex> {
    let text = std::fs::read_to_string(path)?;
    SimplicialComplex::generate(&parse_facets(&text)?)
}

pub fn write_facets_text(complex: &SimplicialComplex) -> String {
    let mut out = String::new();
    for f in complex.facets() {
        let line: Vec<String> = f.vertices().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn write_facets_json(complex: &SimplicialComplex) -> String {
    let facets = complex
        .facets()
        .into_iter()
        .map(|f| f.vertices().to_vec())
        .collect();
    serde_json::to_string(&FacetsJson { facets }).expect("plain data serializes")
}
