//! Signed incidence, Dirac and Hodge operators, Betti numbers and super
//! traces.
//!
//! Operators are dense and indexed by the canonical simplex order of the
//! complex. Integer instantiations are exact; the `f64` instantiation is
//! used for functions of operators, which go through a symmetric
//! eigendecomposition ([`SymmetricSpectrum`]).

use std::io::Write;

use nalgebra::{DMatrix, Scalar, SymmetricEigen};
use num::complex::Complex64;
use num::Zero;
use serde::Serialize;

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::Result;
use crate::exact;

/// Eigenvalues closer than this are treated as one cluster by the
/// functional calculus.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-10;

/// Square operator on l²(G) together with the dimension block structure.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMatrix<T: Scalar> {
    pub entries: DMatrix<T>,
    pub grade_offsets: Vec<usize>,
}

impl<T: Scalar> GradedMatrix<T> {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn grade_range(&self, k: usize) -> std::ops::Range<usize> {
        self.grade_offsets[k]..self.grade_offsets[k + 1]
    }

    pub fn grades(&self) -> usize {
        self.grade_offsets.len().saturating_sub(1)
    }

    /// Diagonal block of grade k.
    pub fn block(&self, k: usize) -> DMatrix<T> {
        let r = self.grade_range(k);
        self.entries.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(T) -> U) -> GradedMatrix<U> {
        GradedMatrix {
            entries: self.entries.clone().map(f),
            grade_offsets: self.grade_offsets.clone(),
        }
    }

    /// `str(A) = Σ_i (-1)^{dim i} A[i][i]`.
    pub fn super_trace(&self) -> T
    where
        T: Zero + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
    {
        let mut acc = T::zero();
        for k in 0..self.grades() {
            for i in self.grade_range(k) {
                let a = self.entries[(i, i)].clone();
                acc = if k % 2 == 0 { acc + a } else { acc - a };
            }
        }
        acc
    }
}

impl GradedMatrix<i64> {
    pub fn to_f64(&self) -> GradedMatrix<f64> {
        self.map(|x| x as f64)
    }
}

/// `±1` when `y` is a codimension-one face of `x`, else 0. The sign is
/// `(-1)^i` with `i` the position in `x` of the vertex missing from `y`.
pub fn incidence_sign(x: &Simplex, y: &Simplex) -> i64 {
    if x.len() != y.len() + 1 || !y.is_subset_of(x) {
        return 0;
    }
    let i = x
        .vertices()
        .iter()
        .zip(y.vertices().iter().map(Some).chain(std::iter::once(None)))
        .position(|(a, b)| Some(a) != b)
        .expect("x has one more vertex than y");
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exterior derivative: `d[x][y] = incidence_sign(x, y)`; strictly lower
/// triangular in canonical order.
pub fn exterior_derivative(g: &SimplicialComplex) -> GradedMatrix<i64> {
    let n = g.len();
    let mut d = DMatrix::<i64>::zeros(n, n);
    for (i, x) in g.simplices().iter().enumerate() {
        for (pos, face) in x.boundary() {
            let j = g.index_of(&face).expect("complex is closed");
            d[(i, j)] = if pos % 2 == 0 { 1 } else { -1 };
        }
    }
    GradedMatrix {
        entries: d,
        grade_offsets: g.grade_offsets().to_vec(),
    }
}

/// Dirac operator `D = d + d^T`.
pub fn dirac(g: &SimplicialComplex) -> GradedMatrix<i64> {
    let d = exterior_derivative(g);
    let t = d.entries.transpose();
    GradedMatrix {
        entries: d.entries + t,
        grade_offsets: d.grade_offsets,
    }
}

/// Hodge Laplacian `L = D²`, computed from the sparse pattern of D.
pub fn hodge(g: &SimplicialComplex) -> GradedMatrix<i64> {
    let d = dirac(g);
    let n = d.size();
    let rows: Vec<Vec<(usize, i64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let v = d.entries[(i, j)];
                    (v != 0).then_some((j, v))
                })
                .collect()
        })
        .collect();
    let mut l = DMatrix::<i64>::zeros(n, n);
    for (i, ri) in rows.iter().enumerate() {
        for &(m, a) in ri {
            for &(j, b) in &rows[m] {
                l[(i, j)] += a * b;
            }
        }
    }
    GradedMatrix {
        entries: l,
        grade_offsets: d.grade_offsets,
    }
}

/// Diagonal blocks `L_0 .. L_q` of the Hodge Laplacian.
pub fn hodge_blocks(g: &SimplicialComplex) -> Vec<DMatrix<i64>> {
    let l = hodge(g);
    (0..l.grades()).map(|k| l.block(k)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

/// `b_k = dim ker L_k`, by exact elimination.
pub fn betti(g: &SimplicialComplex) -> BettiVector {
    BettiVector(hodge_blocks(g).iter().map(exact::nullity).collect())
}

/// `str(L^m)` in exact integer arithmetic.
pub fn hodge_power_super_trace(g: &SimplicialComplex, m: u32) -> i128 {
    hodge_blocks(g)
        .into_iter()
        .enumerate()
        .map(|(k, block)| {
            let b = block.map(|x| x as i128);
            let mut p = DMatrix::<i128>::identity(b.nrows(), b.ncols());
            for _ in 0..m {
                p = &p * &b;
            }
            let tr: i128 = p.diagonal().iter().sum();
            if k % 2 == 0 {
                tr
            } else {
                -tr
            }
        })
        .sum()
}

/// `str(exp(-tL))` via the eigenvalues of each Hodge block.
pub fn heat_super_trace(g: &SimplicialComplex, t: f64) -> f64 {
    hodge_block_eigenvalues(g)
        .iter()
        .enumerate()
        .map(|(k, ev)| {
            let s: f64 = ev.iter().map(|&mu| (-t * mu).exp()).sum();
            if k % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .sum()
}

pub fn hodge_block_eigenvalues(g: &SimplicialComplex) -> Vec<Vec<f64>> {
    hodge_blocks(g)
        .into_iter()
        .map(|b| {
            if b.is_empty() {
                vec![]
            } else {
                b.map(|x| x as f64).symmetric_eigenvalues().iter().copied().collect()
            }
        })
        .collect()
}

/// Eigendecomposition of a real symmetric matrix, used for all functions of
/// operators.
#[derive(Clone, Debug)]
pub struct SymmetricSpectrum {
    /// Eigenvalues with clusters (gaps below [`EIGEN_CLUSTER_TOL`]) snapped
    /// to their mean.
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricSpectrum {
    pub fn new(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        if n == 0 {
            return SymmetricSpectrum {
                values: vec![],
                vectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

        let mut start = 0;
        for i in 1..=n {
            if i == n || values[i] - values[i - 1] > EIGEN_CLUSTER_TOL {
                let mean = values[start..i].iter().sum::<f64>() / (i - start) as f64;
                values[start..i].iter_mut().for_each(|v| *v = mean);
                start = i;
            }
        }
        SymmetricSpectrum { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `f(A) = V f(Λ) V^T`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| self.vectors[(r, c)] * fv[c]);
        scaled * self.vectors.transpose()
    }

    pub fn apply_complex(&self, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let fv: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        let v = self.vectors.map(|x| Complex64::new(x, 0.0));
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| v[(r, c)] * fv[c]);
        scaled * v.transpose()
    }

    /// Diagonal of `f(A)` without forming the full matrix.
    pub fn diagonal(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|c| self.vectors[(r, c)].powi(2) * fv[c])
                    .sum()
            })
            .collect()
    }

    pub fn diagonal_complex(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let fv: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|c| fv[c] * self.vectors[(r, c)].powi(2))
                    .sum()
            })
            .collect()
    }
}

/// Spectrum of the Dirac operator of `g`.
pub fn dirac_spectrum(g: &SimplicialComplex) -> SymmetricSpectrum {
    SymmetricSpectrum::new(dirac(g).to_f64().entries)
}

/// Dense CSV dump with a `# <name> n=<n> grades=<offsets>` header.
pub fn write_matrix_csv<W: Write>(name: &str, m: &GradedMatrix<i64>, mut w: W) -> Result<()> {
    let offsets: Vec<String> = m.grade_offsets.iter().map(|o| o.to_string()).collect();
    writeln!(w, "# {name} n={} grades={}", m.size(), offsets.join(","))?;
    for row in m.entries.row_iter() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", cells.join(";"))?;
    }
    Ok(())
}
