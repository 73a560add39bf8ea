//! Builtin generators and the bundled 3- and 4-manifolds.
//!
//! Bundled facet lists live in `data/<name>.facets` and are embedded at
//! build time; setting `CURVEKIT_DATA` to a directory with the same layout
//! (including `MANIFEST`) loads them from disk instead. Every file is checked
//! against its SHA-256 entry in `MANIFEST`, and every complex with expected
//! invariants is checked against them on load.
//!
//! The 600-cell is not bundled. Its invariants, for users who supply a facet
//! list: f = (120, 720, 1200, 600), every unit sphere an icosahedron, so
//! d(v) = 12, d_2(v) = 30, F(v) = 20 and edge degree 5; all of K_0..K_3
//! vanish.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::complex::{SimplicialComplex, Vertex};
use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::graph::{whitney_complex, Graph};
use crate::io::parse_facets;
use crate::spectral::{betti, BettiVector};

pub const DATA_ENV: &str = "CURVEKIT_DATA";
pub const BUNDLED_NAMES: [&str; 3] = ["homology_sphere", "rp3", "cp2"];

const EMBEDDED_MANIFEST: &str = include_str!("../data/MANIFEST");
const EMBEDDED: [(&str, &str); 3] = [
    ("homology_sphere", include_str!("../data/homology_sphere.facets")),
    ("rp3", include_str!("../data/rp3.facets")),
    ("cp2", include_str!("../data/cp2.facets")),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Builtin,
    Bundled(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub f_vector: Vec<usize>,
    pub chi: i64,
    pub betti: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct NamedComplex {
    pub name: String,
    pub source: Source,
    pub complex: SimplicialComplex,
    pub expected: Option<Expected>,
}

impl NamedComplex {
    pub fn self_check(&self) -> Result<()> {
        let Some(e) = &self.expected else {
            return Ok(());
        };
        let f = self.complex.f_vector().0;
        if f != e.f_vector {
            return Err(Error::DataIntegrity(format!(
                "{}: f-vector {:?}, expected {:?}",
                self.name, f, e.f_vector
            )));
        }
        let chi = self.complex.euler_characteristic();
        if chi != e.chi {
            return Err(Error::DataIntegrity(format!(
                "{}: chi {chi}, expected {}",
                self.name, e.chi
            )));
        }
        if let Some(b) = &e.betti {
            let got = betti(&self.complex);
            if got != BettiVector(b.clone()) {
                return Err(Error::DataIntegrity(format!(
                    "{}: betti {:?}, expected {b:?}",
                    self.name, got.0
                )));
            }
        }
        Ok(())
    }
}

/// Clique complex of the complete multipartite graph K_{2,..,2} with d
/// parts; vertices `2i` and `2i + 1` are antipodal.
pub fn cross_polytope(d: usize) -> Result<NamedComplex> {
    if d == 0 {
        return Err(Error::InvalidArgument("cross polytope needs d >= 1".into()));
    }
    let n = 2 * d as Vertex;
    let edges = (0..n).flat_map(|i| (i + 1..n).filter(move |j| i / 2 != j / 2).map(move |j| (i, j)));
    let graph = Graph::new(0..n, edges)?;
    let complex = whitney_complex(&graph)?;
    let f_vector = (0..d).map(|k| binomial(d, k + 1) as usize * (1 << (k + 1))).collect();
    let sphere_dim = d - 1;
    let chi = if sphere_dim % 2 == 0 { 2 } else { 0 };
    let mut b = vec![0; d];
    b[0] += 1;
    b[sphere_dim] += 1;
    let named = NamedComplex {
        name: format!("cross{d}"),
        source: Source::Builtin,
        complex,
        expected: Some(Expected {
            f_vector,
            chi,
            betti: Some(b),
        }),
    };
    named.self_check()?;
    Ok(named)
}

pub fn icosahedron() -> NamedComplex {
    // 0 top, 1..=5 upper ring, 6..=10 lower ring, 11 bottom
    let mut edges = vec![];
    for i in 0..5u32 {
        let (u, u_next) = (1 + i, 1 + (i + 1) % 5);
        let (l, l_next) = (6 + i, 6 + (i + 1) % 5);
        edges.extend([(0, u), (u, u_next), (l, l_next), (11, l), (u, l), (u, l_next)]);
    }
    let graph = Graph::new(0..12, edges).expect("no loops");
    NamedComplex {
        name: "icosahedron".into(),
        source: Source::Builtin,
        complex: whitney_complex(&graph).expect("small"),
        expected: Some(Expected {
            f_vector: vec![12, 30, 20],
            chi: 2,
            betti: Some(vec![1, 0, 1]),
        }),
    }
}

/// Uniform random graph with exactly `n_edges` edges on `n_vertices`
/// vertices (labelled 0..n), then its clique complex. The generator is
/// ChaCha8 seeded with `seed`.
pub fn random_clique_complex(n_vertices: usize, n_edges: usize, seed: u64) -> Result<NamedComplex> {
    let max = n_vertices * n_vertices.saturating_sub(1) / 2;
    if n_edges > max {
        return Err(Error::TooManyEdges {
            vertices: n_vertices,
            requested: n_edges,
            max,
        });
    }
    let pairs: Vec<(Vertex, Vertex)> = (0..n_vertices as Vertex)
        .flat_map(|i| (i + 1..n_vertices as Vertex).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, pairs.len(), n_edges);
    let graph = Graph::new(0..n_vertices as Vertex, chosen.iter().map(|i| pairs[i]))?;
    Ok(NamedComplex {
        name: format!("random:{n_vertices},{n_edges},{seed}"),
        source: Source::Builtin,
        complex: whitney_complex(&graph)?,
        expected: None,
    })
}

fn bundled_expected(name: &str) -> Expected {
    match name {
        "homology_sphere" => Expected {
            f_vector: vec![24, 154, 260, 130],
            chi: 0,
            betti: Some(vec![1, 0, 0, 1]),
        },
        "rp3" => Expected {
            f_vector: vec![11, 51, 80, 40],
            chi: 0,
            betti: Some(vec![1, 0, 0, 1]),
        },
        "cp2" => Expected {
            f_vector: vec![9, 36, 84, 90, 36],
            chi: 3,
            betti: Some(vec![1, 0, 1, 0, 1]),
        },
        _ => unreachable!("checked by caller"),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest_entry(manifest: &str, file: &str) -> Option<String> {
    manifest.lines().find_map(|line| {
        let mut parts = line.split_whitespace();
        let sum = parts.next()?;
        let name = parts.next()?.trim_start_matches('*');
        (name == file).then(|| sum.to_ascii_lowercase())
    })
}

fn verify_checksum(manifest: &str, file: &str, text: &str) -> Result<()> {
    let want = manifest_entry(manifest, file)
        .ok_or_else(|| Error::DataIntegrity(format!("{file} missing from MANIFEST")))?;
    let got = sha256_hex(text.as_bytes());
    if want == got {
        Ok(())
    } else {
        Err(Error::DataIntegrity(format!(
            "{file}: checksum {got} does not match MANIFEST {want}"
        )))
    }
}

/// Loads a bundled complex from `dir`, verifying checksum and invariants.
pub fn bundled_from_dir(name: &str, dir: &Path) -> Result<NamedComplex> {
    if !BUNDLED_NAMES.contains(&name) {
        return Err(Error::UnknownComplex(name.into()));
    }
    let file = format!("{name}.facets");
    let path = dir.join(&file);
    let manifest = std::fs::read_to_string(dir.join("MANIFEST"))
        .map_err(|e| Error::DataIntegrity(format!("cannot read MANIFEST: {e}")))?;
    let text = std::fs::read_to_string(&path)?;
    verify_checksum(&manifest, &file, &text)?;
    let named = NamedComplex {
        name: name.into(),
        source: Source::Bundled(path),
        complex: SimplicialComplex::generate(&parse_facets(&text)?)?,
        expected: Some(bundled_expected(name)),
    };
    named.self_check()?;
    Ok(named)
}

fn embedded(name: &str) -> Result<NamedComplex> {
    static CACHE: OnceLock<Mutex<HashMap<String, NamedComplex>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("poisoned").get(name) {
        return Ok(hit.clone());
    }
    let (_, text) = EMBEDDED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownComplex(name.into()))?;
    let file = format!("{name}.facets");
    verify_checksum(EMBEDDED_MANIFEST, &file, text)?;
    let named = NamedComplex {
        name: name.into(),
        source: Source::Bundled(PathBuf::from("data").join(file)),
        complex: SimplicialComplex::generate(&parse_facets(text)?)?,
        expected: Some(bundled_expected(name)),
    };
    named.self_check()?;
    cache
        .lock()
        .expect("poisoned")
        .insert(name.into(), named.clone());
    Ok(named)
}

/// `homology_sphere`, `rp3` or `cp2`.
pub fn bundled(name: &str) -> Result<NamedComplex> {
    match std::env::var_os(DATA_ENV) {
        Some(dir) => bundled_from_dir(name, Path::new(&dir)),
        None => embedded(name),
    }
}

/// Resolves a builtin name: the bundled manifolds, `cross<d>`,
/// `octahedron`, `16cell`, `icosahedron`, `triangle`, `cycle4`,
/// `triangle_bary2` (second barycentric refinement of the triangle),
/// `octahedron_bary` and `random:<vertices>,<edges>,<seed>`.
pub fn builtin(name: &str) -> Result<NamedComplex> {
    let simple = |name: &str, complex: SimplicialComplex| NamedComplex {
        name: name.into(),
        source: Source::Builtin,
        complex,
        expected: None,
    };
    if BUNDLED_NAMES.contains(&name) {
        return bundled(name);
    }
    if let Some(rest) = name.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::UnknownComplex(name.into()))
        };
        if parts.len() != 3 {
            return Err(Error::UnknownComplex(name.into()));
        }
        return random_clique_complex(parse(parts[0])? as usize, parse(parts[1])? as usize, parse(parts[2])?);
    }
    if let Some(d) = name.strip_prefix("cross") {
        let d = d.parse().map_err(|_| Error::UnknownComplex(name.into()))?;
        return cross_polytope(d);
    }
    match name {
        "octahedron" => cross_polytope(3).map(|mut c| {
            c.name = name.into();
            c
        }),
        "16cell" => cross_polytope(4).map(|mut c| {
            c.name = name.into();
            c
        }),
        "icosahedron" => Ok(icosahedron()),
        "triangle" => Ok(simple(name, SimplicialComplex::generate(&[vec![1, 2, 3]])?)),
        "cycle4" => cross_polytope(2).map(|mut c| {
            c.name = name.into();
            c
        }),
        "triangle_bary2" => {
            let t = SimplicialComplex::generate(&[vec![1, 2, 3]])?;
            Ok(simple(name, t.barycentric_refinement()?.barycentric_refinement()?))
        }
        "octahedron_bary" => {
            let o = cross_polytope(3)?.complex;
            Ok(simple(name, o.barycentric_refinement()?))
        }
        _ => Err(Error::UnknownComplex(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_polytopes() {
        let c2 = cross_polytope(2).unwrap();
        assert_eq!(c2.complex.f_vector().0, vec![4, 4]);
        assert_eq!(c2.complex.euler_characteristic(), 0);
        let c3 = cross_polytope(3).unwrap();
        assert_eq!(c3.complex.f_vector().0, vec![6, 12, 8]);
        assert_eq!(c3.complex.euler_characteristic(), 2);
        let c4 = cross_polytope(4).unwrap();
        assert_eq!(c4.complex.f_vector().0, vec![8, 24, 32, 16]);
        assert!(cross_polytope(0).is_err());
        assert_eq!(cross_polytope(1).unwrap().complex.f_vector().0, vec![2]);
    }

    #[test]
    fn icosahedron_self_check() {
        let ico = icosahedron();
        ico.self_check().unwrap();
        let g = Graph::one_skeleton(&ico.complex);
        assert!(g.vertices().all(|v| g.degree(v).unwrap() == 5));
    }

    #[test]
    fn random_complexes_are_reproducible() {
        let a = random_clique_complex(20, 50, 3).unwrap();
        let b = random_clique_complex(20, 50, 3).unwrap();
        assert_eq!(a.complex, b.complex);
        assert_eq!(a.complex.grade(1).len(), 50);
        let k5 = random_clique_complex(5, 10, 9).unwrap();
        assert_eq!(k5.complex.f_vector().0, vec![5, 10, 10, 5, 1]);
        assert_eq!(k5.complex.euler_characteristic(), 1);
        assert!(matches!(
            random_clique_complex(5, 11, 0),
            Err(Error::TooManyEdges { max: 10, .. })
        ));
    }

    #[test]
    fn manifest_lookup() {
        let m = "abc  x.facets\nDEF *y.facets\n";
        assert_eq!(manifest_entry(m, "x.facets").as_deref(), Some("abc"));
        assert_eq!(manifest_entry(m, "y.facets").as_deref(), Some("def"));
        assert_eq!(manifest_entry(m, "z.facets"), None);
        assert!(verify_checksum(m, "x.facets", "anything").is_err());
    }

    #[test]
    fn tampered_data_directory_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (_, text) = EMBEDDED[1];
        std::fs::write(dir.path().join("MANIFEST"), EMBEDDED_MANIFEST).unwrap();
        std::fs::write(dir.path().join("rp3.facets"), text).unwrap();
        let ok = bundled_from_dir("rp3", dir.path()).unwrap();
        assert_eq!(ok.complex.f_vector().0, vec![11, 51, 80, 40]);

        let mut bad = text.to_string();
        bad.push_str("1 2 3 4\n");
        std::fs::write(dir.path().join("rp3.facets"), bad).unwrap();
        assert!(matches!(bundled_from_dir("rp3", dir.path()), Err(Error::DataIntegrity(_))));
        assert!(matches!(bundled_from_dir("nope", dir.path()), Err(Error::UnknownComplex(_))));
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(builtin("dodecahedron"), Err(Error::UnknownComplex(_))));
        assert!(matches!(builtin("random:1,2"), Err(Error::UnknownComplex(_))));
        assert!(builtin("cycle4").is_ok());
    }
}
