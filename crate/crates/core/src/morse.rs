//! Poincaré-Hopf indices on G_k and index expectation.
//!
//! Given a locally injective g on G_k, every simplex y is sent to the
//! comparable k-simplex (x ⊆ y or y ⊆ x) on which g is largest, and the
//! index of x collects the energies ω(y) of everything sent to it. The
//! indices sum to χ(G). Averaging over IID uniform g recovers the k-form
//! curvature.

use std::collections::HashMap;

use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::complex::{Simplex, SimplicialComplex};
use crate::curvature::form_curvature;
use crate::error::{Error, Result};
use crate::exact::fmt_ratio;

/// Real function on G_k, values aligned with `complex.grade(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KFunction {
    pub k: usize,
    pub values: Vec<f64>,
    pub provenance: String,
}

impl KFunction {
    /// Reads `{"<v0>,<v1>,..": value, ..}` with one entry per k-simplex.
    pub fn from_json_map(g: &SimplicialComplex, k: usize, text: &str) -> Result<Self> {
        let map: HashMap<String, f64> = serde_json::from_str(text)?;
        let mut values = vec![None; g.grade(k).len()];
        for (key, value) in map {
            let verts = key
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad simplex key '{key}': {e}")))?;
            let s = Simplex::new(verts)?;
            if s.dim() != k {
                return Err(Error::InvalidArgument(format!("{s} is not a {k}-simplex")));
            }
            let i = g
                .grade(k)
                .binary_search(&s)
                .map_err(|_| Error::SimplexNotInComplex(s.clone()))?;
            values[i] = Some(value);
        }
        let got = values.iter().filter(|v| v.is_some()).count();
        if got != values.len() {
            return Err(Error::FunctionDomain {
                k,
                expected: values.len(),
                got,
            });
        }
        Ok(KFunction {
            k,
            values: values.into_iter().map(Option::unwrap).collect(),
            provenance: "user".into(),
        })
    }
}

/// Integer divisor on G_k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexField {
    pub k: usize,
    pub simplices: Vec<Simplex>,
    pub indices: Vec<i64>,
}

impl IndexField {
    pub fn sum(&self) -> i64 {
        self.indices.iter().sum()
    }
}

/// Pair of k-simplices that must receive distinct values, if any collides.
pub fn find_local_collision(g: &SimplicialComplex, k: usize, values: &[f64]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let grade = g.grade(k);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        for a in start..end {
            for b in a + 1..end {
                let (x, y) = (&grade[order[a]], &grade[order[b]]);
                if x.intersects(y) || g.contains(&x.union(y)) {
                    return Some((order[a].min(order[b]), order[a].max(order[b])));
                }
            }
        }
        start = end;
    }
    None
}

/// Values differ on any two k-simplices that intersect or span a common
/// simplex.
pub fn is_locally_injective(g: &SimplicialComplex, k: usize, values: &[f64]) -> bool {
    find_local_collision(g, k, values).is_none()
}

/// IID uniform values on [0, 1) from ChaCha8 seeded with `seed`.
pub fn random_k_function(g: &SimplicialComplex, k: usize, seed: u64) -> Result<KFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = random_k_function_with(g, k, &mut rng)?;
    f.provenance = format!("chacha8:{seed}");
    Ok(f)
}

pub fn random_k_function_with<R: Rng>(g: &SimplicialComplex, k: usize, rng: &mut R) -> Result<KFunction> {
    let n = g.grade(k).len();
    if n == 0 {
        return Err(Error::DimensionOutOfRange { k, max: g.dim() });
    }
    loop {
        let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        if is_locally_injective(g, k, &values) {
            return Ok(KFunction {
                k,
                values,
                provenance: "rng".into(),
            });
        }
    }
}

/// Comparable k-simplices of every simplex, as indices into G_k.
struct Transport {
    candidates: Vec<Vec<usize>>,
}

impl Transport {
    fn new(g: &SimplicialComplex, k: usize) -> Self {
        let grade = g.grade(k);
        let offset = g.grade_range(k).start;
        let mut candidates = vec![Vec::new(); g.len()];
        // y below or equal to some x in G_k
        for (xi, x) in grade.iter().enumerate() {
            for y in x.faces() {
                candidates[g.index_of(&y).expect("closed")].push(xi);
            }
        }
        // y strictly above G_k
        for (yi, y) in g.simplices().iter().enumerate().skip(g.grade_range(k).end) {
            candidates[yi] = y
                .subsets_of_size(k + 1)
                .iter()
                .map(|x| g.index_of(x).expect("closed") - offset)
                .collect();
        }
        for c in &mut candidates {
            c.sort_unstable();
        }
        Transport { candidates }
    }

    fn indices(&self, g: &SimplicialComplex, values: &[f64]) -> Vec<i64> {
        let mut out = vec![0i64; values.len()];
        for (y, cands) in g.simplices().iter().zip(&self.candidates) {
            // first maximum in canonical order
            let best = cands
                .iter()
                .copied()
                .reduce(|a, b| if values[b] > values[a] { b } else { a })
                .expect("strong cover gives every simplex a target");
            out[best] += y.omega();
        }
        out
    }
}

/// Poincaré-Hopf indices of `func` on G_k; the sum is verified to be χ(G).
pub fn ph_indices(g: &SimplicialComplex, k: usize, func: &KFunction) -> Result<IndexField> {
    g.require_strong_cover(k)?;
    let grade = g.grade(k);
    if func.k != k || func.values.len() != grade.len() {
        return Err(Error::FunctionDomain {
            k,
            expected: grade.len(),
            got: func.values.len(),
        });
    }
    if let Some((a, b)) = find_local_collision(g, k, &func.values) {
        return Err(Error::NotLocallyInjective {
            first: grade[a].clone(),
            second: grade[b].clone(),
            value: func.values[a],
        });
    }
    let indices = Transport::new(g, k).indices(g, &func.values);
    let field = IndexField {
        k,
        simplices: grade.to_vec(),
        indices,
    };
    if field.sum() != g.euler_characteristic() {
        return Err(Error::IdentityViolated(format!(
            "index sum {} != chi {}",
            field.sum(),
            g.euler_characteristic()
        )));
    }
    Ok(field)
}

/// Monte Carlo estimate of E[i_g(x)] over IID uniform g.
#[derive(Clone, Debug)]
pub struct IndexExpectation {
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub simplices: Vec<Simplex>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub exact: Vec<BigRational>,
}

impl IndexExpectation {
    /// Fraction of simplices whose mean lies within `z` standard errors of
    /// the exact curvature.
    pub fn fraction_within(&self, z: f64) -> f64 {
        if self.mean.is_empty() {
            return 1.0;
        }
        let ok = self
            .mean
            .iter()
            .zip(&self.stderr)
            .zip(&self.exact)
            .filter(|((m, s), e)| (*m - crate::exact::to_f64(e)).abs() <= z * *s)
            .count();
        ok as f64 / self.mean.len() as f64
    }

    /// `{"k":, "samples":, "seed":, "simplices":, "mean":, "stderr":, "exact":}`
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "samples": self.samples,
            "seed": self.seed,
            "simplices": self.simplices.iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>(),
            "mean": self.mean,
            "stderr": self.stderr,
            "exact": self.exact.iter().map(fmt_ratio).collect::<Vec<_>>(),
        })
    }
}

/// Sample `i` draws from ChaCha8 seeded with `seed` on stream `i`, so the
/// result does not depend on how samples are scheduled across threads.
pub fn index_expectation(g: &SimplicialComplex, k: usize, samples: usize, seed: u64) -> Result<IndexExpectation> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let exact = form_curvature(g, k)?.values;
    let transport = Transport::new(g, k);
    let n = g.grade(k).len();
    let (sum, sum_sq) = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let f = random_k_function_with(g, k, &mut rng).expect("G_k is non-empty");
            transport.indices(g, &f.values)
        })
        .fold(
            || (vec![0i64; n], vec![0i64; n]),
            |(mut s, mut q), idx| {
                for (j, v) in idx.into_iter().enumerate() {
                    s[j] += v;
                    q[j] += v * v;
                }
                (s, q)
            },
        )
        .reduce(
            || (vec![0i64; n], vec![0i64; n]),
            |(mut s1, mut q1), (s2, q2)| {
                for j in 0..n {
                    s1[j] += s2[j];
                    q1[j] += q2[j];
                }
                (s1, q1)
            },
        );
    let m = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|&s| s as f64 / m).collect();
    let stderr = sum
        .iter()
        .zip(&sum_sq)
        .map(|(&s, &q)| {
            if samples < 2 {
                return 0.0;
            }
            let var = (q as f64 - (s as f64).powi(2) / m) / (m - 1.0);
            (var.max(0.0) / m).sqrt()
        })
        .collect();
    Ok(IndexExpectation {
        k,
        samples,
        seed,
        simplices: g.grade(k).to_vec(),
        mean,
        stderr,
        exact,
    })
}
