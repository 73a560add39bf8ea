//! Exact curvatures on k-simplices.
//!
//! The energy ω(y) = (-1)^dim(y) of every simplex y is handed to the
//! k-simplices comparable with y: if y ⊆ x it is split evenly among the
//! `d_k(y)` k-simplices containing y, if y ⊋ x evenly among the
//! `C(|y|, k+1)` k-faces of y. Summing over G_k therefore returns χ(G)
//! whenever every simplex of dimension <= k sits in some k-simplex.
//!
//! All arithmetic in this module is exact.

use std::collections::BTreeSet;

use num::rational::BigRational;
use num::{One, Zero};
use serde::Serialize;
use serde_json::json;

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::exact::{binomial, fmt_ratio, int, ratio};
use crate::graph::{is_2manifold, is_3manifold, whitney_complex, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaTag {
    Form,
    Levitt,
    Facet,
    Edge3Manifold,
    Face3Manifold,
    Chamber3Manifold,
    TwoManifoldTable,
    Puiseux,
}

/// Exact function on G_k.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub k: usize,
    pub simplices: Vec<Simplex>,
    pub values: Vec<BigRational>,
    pub formula: FormulaTag,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> BigRational {
        self.values.iter().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn get(&self, x: &Simplex) -> Option<&BigRational> {
        self.simplices
            .binary_search(x)
            .ok()
            .map(|i| &self.values[i])
    }

    pub fn distinct_values(&self) -> BTreeSet<BigRational> {
        self.values.iter().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &BigRational)> {
        self.simplices.iter().zip(&self.values)
    }

    /// `{"k":, "chi":, "values": [{"simplex": [..], "value": "p/q"}]}`
    pub fn to_json(&self, chi: i64) -> serde_json::Value {
        let values: Vec<_> = self
            .iter()
            .map(|(s, v)| json!({"simplex": s.vertices(), "value": fmt_ratio(v)}))
            .collect();
        json!({"k": self.k, "chi": chi, "formula": self.formula, "values": values})
    }

    /// `simplex;value` rows, vertices space-separated, values as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("simplex;value\n");
        for (s, v) in self.iter() {
            let verts: Vec<String> = s.vertices().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{};{}\n", verts.join(" "), fmt_ratio(v)));
        }
        out
    }
}

fn check_gauss_bonnet(g: &SimplicialComplex, field: &CurvatureField) -> Result<()> {
    let chi = int(g.euler_characteristic());
    let sum = field.sum();
    if sum == chi {
        Ok(())
    } else {
        Err(Error::IdentityViolated(format!(
            "sum of K_{} is {} but chi = {}",
            field.k,
            fmt_ratio(&sum),
            fmt_ratio(&chi)
        )))
    }
}

/// k-form curvature
/// `K_k(x) = Σ_{y⊆x} ω(y)/d_k(y) + Σ_{j>k} (-1)^j d_j(x)/C(j+1, k+1)`.
///
/// Requires the strong cover at k; the Gauss-Bonnet sum is verified before
/// returning.
pub fn form_curvature(g: &SimplicialComplex, k: usize) -> Result<CurvatureField> {
    g.require_strong_cover(k)?;
    let q = g.dim().expect("cover check rejects the empty complex");
    let table = g.degree_table();
    let mut values = Vec::with_capacity(g.grade(k).len());
    for x in g.grade(k) {
        let xi = g.index_of(x).expect("member");
        let mut acc = BigRational::zero();
        for y in x.faces() {
            let yi = g.index_of(&y).expect("closed");
            acc += ratio(y.omega(), table[yi][k] as i64);
        }
        for j in k + 1..=q {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let dj = table[xi][j] as i64;
            if dj != 0 {
                acc += ratio(sign * dj, binomial(j + 1, k + 1) as i64);
            }
        }
        values.push(acc);
    }
    let field = CurvatureField {
        k,
        simplices: g.grade(k).to_vec(),
        values,
        formula: FormulaTag::Form,
    };
    check_gauss_bonnet(g, &field)?;
    Ok(field)
}

/// Vertex curvature `K(v) = Σ_{x∋v} ω(x)/|x|`.
pub fn levitt_curvature(g: &SimplicialComplex) -> Result<CurvatureField> {
    if g.is_empty() {
        return Err(Error::DimensionOutOfRange { k: 0, max: None });
    }
    let vertices = g.grade(0).to_vec();
    let mut values = vec![BigRational::zero(); vertices.len()];
    for x in g.simplices() {
        let share = ratio(x.omega(), x.len() as i64);
        for &v in x.vertices() {
            let i = vertices.binary_search(&Simplex::vertex(v)).expect("vertex");
            values[i] += &share;
        }
    }
    Ok(CurvatureField {
        k: 0,
        simplices: vertices,
        values,
        formula: FormulaTag::Levitt,
    })
}

/// Facet curvature `K_q(x) = Σ_{y⊆x} ω(y)/d_q(y)` for pure complexes.
pub fn facet_curvature(g: &SimplicialComplex) -> Result<CurvatureField> {
    let q = g.dim().ok_or(Error::DimensionOutOfRange { k: 0, max: None })?;
    g.require_strong_cover(q)?;
    let facets = g.grade(q);
    let values = facets
        .iter()
        .map(|x| {
            x.faces()
                .map(|y| {
                    let dq = facets.iter().filter(|f| y.is_subset_of(f)).count();
                    ratio(y.omega(), dq as i64)
                })
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect();
    Ok(CurvatureField {
        k: q,
        simplices: facets.to_vec(),
        values,
        formula: FormulaTag::Facet,
    })
}

fn flag_skeleton(g: &SimplicialComplex) -> Option<Graph> {
    let graph = Graph::one_skeleton(g);
    match whitney_complex(&graph) {
        Ok(w) if w == *g => Some(graph),
        _ => None,
    }
}

fn three_manifold_graph(g: &SimplicialComplex) -> Result<Graph> {
    flag_skeleton(g)
        .filter(is_3manifold)
        .ok_or(Error::NotA3Manifold)
}

fn common_neighbors(graph: &Graph, a: u32, b: u32) -> usize {
    let na = graph.neighbors(a).expect("vertex");
    let nb = graph.neighbors(b).expect("vertex");
    na.intersection(nb).count()
}

fn inv(n: usize) -> BigRational {
    ratio(1, n as i64)
}

/// `K_1(a,b) = 1/d(a) + 1/d(b) + d(a,b)/6 - 1` on a 3-manifold, with vertex
/// degrees d(a) and edge degree d(a,b) = |S(a) ∩ S(b)|.
pub fn edge_curvature_3manifold(g: &SimplicialComplex) -> Result<CurvatureField> {
    let graph = three_manifold_graph(g)?;
    let values = g
        .grade(1)
        .iter()
        .map(|e| {
            let (a, b) = (e.vertices()[0], e.vertices()[1]);
            inv(graph.degree(a).unwrap()) + inv(graph.degree(b).unwrap())
                + ratio(common_neighbors(&graph, a, b) as i64, 6)
                - BigRational::one()
        })
        .collect();
    Ok(CurvatureField {
        k: 1,
        simplices: g.grade(1).to_vec(),
        values,
        formula: FormulaTag::Edge3Manifold,
    })
}

/// `K_2(a,b,c) = Σ 1/d_2(v) - Σ 1/d(v,w) + 1/2`, where d_2(v) is the number
/// of edges of the unit sphere S(v).
pub fn face_curvature_3manifold(g: &SimplicialComplex) -> Result<CurvatureField> {
    let graph = three_manifold_graph(g)?;
    let values = g
        .grade(2)
        .iter()
        .map(|f| {
            let v = f.vertices();
            let mut acc = ratio(1, 2);
            for &a in v {
                acc += inv(graph.unit_sphere(a).unwrap().edge_count());
            }
            for (a, b) in [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])] {
                acc -= inv(common_neighbors(&graph, a, b));
            }
            acc
        })
        .collect();
    Ok(CurvatureField {
        k: 2,
        simplices: g.grade(2).to_vec(),
        values,
        formula: FormulaTag::Face3Manifold,
    })
}

/// `K_3(a,b,c,d) = Σ 1/F(v) - Σ 1/d(v,w) + 1`, where F(v) is the number of
/// triangles of the unit sphere S(v).
pub fn chamber_curvature_3manifold(g: &SimplicialComplex) -> Result<CurvatureField> {
    let graph = three_manifold_graph(g)?;
    let triangles = |a: u32| {
        let s = whitney_complex(&graph.unit_sphere(a).unwrap()).unwrap();
        s.grade(2).len()
    };
    let values = g
        .grade(3)
        .iter()
        .map(|x| {
            let v = x.vertices();
            let mut acc = BigRational::one();
            for &a in v {
                acc += inv(triangles(a));
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    acc -= inv(common_neighbors(&graph, v[i], v[j]));
                }
            }
            acc
        })
        .collect();
    Ok(CurvatureField {
        k: 3,
        simplices: g.grade(3).to_vec(),
        values,
        formula: FormulaTag::Chamber3Manifold,
    })
}

/// Closed-form curvature on a 2-manifold, with each simplex flagged as
/// interior or boundary.
#[derive(Clone, Debug)]
pub struct TwoManifoldField {
    pub field: CurvatureField,
    pub boundary: Vec<bool>,
}

/// Closed forms on 2-manifolds (with or without boundary).
///
/// Interior: `1 - d/6`, `1/d(a) + 1/d(b) - 1/3`, `Σ 1/d(v) - 1/2`.
/// Boundary vertex `2/3 - d/6`; boundary edge `1/d(a) + 1/d(b) - 2/3`.
/// A face touching the boundary gets `Σ 1/t(v) - 1/2 - b/2`, where t(v) is
/// the number of triangles at v (d(v) - 1 on the boundary) and b counts the
/// face's boundary edges.
pub fn two_manifold_curvatures(g: &SimplicialComplex, k: usize) -> Result<TwoManifoldField> {
    let graph = flag_skeleton(g).ok_or(Error::NotA2Manifold)?;
    let check = is_2manifold(&graph);
    if !check.is_manifold || g.dim() != Some(2) {
        return Err(Error::NotA2Manifold);
    }
    let on_boundary = |v: u32| check.boundary.binary_search(&v).is_ok();
    let d = |v: u32| graph.degree(v).unwrap() as i64;
    let boundary_edge = |a: u32, b: u32| common_neighbors(&graph, a, b) == 1;

    let mut values = Vec::new();
    let mut boundary = Vec::new();
    for x in g.grade(k) {
        let v = x.vertices();
        let (value, at_rim) = match k {
            0 => {
                let a = v[0];
                if on_boundary(a) {
                    (ratio(2, 3) - ratio(d(a), 6), true)
                } else {
                    (BigRational::one() - ratio(d(a), 6), false)
                }
            }
            1 => {
                let (a, b) = (v[0], v[1]);
                let base = ratio(1, d(a)) + ratio(1, d(b));
                if boundary_edge(a, b) {
                    (base - ratio(2, 3), true)
                } else {
                    (base - ratio(1, 3), false)
                }
            }
            2 => {
                let rim = v.iter().any(|&a| on_boundary(a));
                let mut acc = ratio(-1, 2);
                for &a in v {
                    let t = if on_boundary(a) { d(a) - 1 } else { d(a) };
                    acc += ratio(1, t);
                }
                let b = [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])]
                    .iter()
                    .filter(|(a, b)| boundary_edge(*a, *b))
                    .count() as i64;
                (acc - ratio(b, 2), rim)
            }
            _ => return Err(Error::DimensionOutOfRange { k, max: Some(2) }),
        };
        values.push(value);
        boundary.push(at_rim);
    }
    Ok(TwoManifoldField {
        field: CurvatureField {
            k,
            simplices: g.grade(k).to_vec(),
            values,
            formula: FormulaTag::TwoManifoldTable,
        },
        boundary,
    })
}

fn closed_surface_graph(g: &SimplicialComplex) -> Result<Graph> {
    let graph = flag_skeleton(g).ok_or(Error::NotA2Manifold)?;
    let check = is_2manifold(&graph);
    if check.is_manifold && !check.has_boundary() && g.dim() == Some(2) {
        Ok(graph)
    } else {
        Err(Error::NotA2Manifold)
    }
}

/// Second-order vertex curvature on a closed surface,
/// `K(v) = 1 - d(v)/6 + (-1 + Σ_{w∈S(v)} 1/d(w)) / 2`.
pub fn puiseux_vertex_curvature(g: &SimplicialComplex) -> Result<CurvatureField> {
    let graph = closed_surface_graph(g)?;
    let values = g
        .grade(0)
        .iter()
        .map(|x| {
            let v = x.vertices()[0];
            let s: BigRational = graph
                .neighbors(v)
                .unwrap()
                .iter()
                .map(|&w| inv(graph.degree(w).unwrap()))
                .fold(BigRational::zero(), |a, b| a + b);
            BigRational::one() - ratio(graph.degree(v).unwrap() as i64, 6)
                + (s - BigRational::one()) / int(2)
        })
        .collect();
    Ok(CurvatureField {
        k: 0,
        simplices: g.grade(0).to_vec(),
        values,
        formula: FormulaTag::Puiseux,
    })
}

/// `Σ_v Σ_{w∈S(v)} 1/d(w)`; equals |V| on graphs without isolated vertices.
pub fn inverse_degree_sum(graph: &Graph) -> BigRational {
    graph
        .vertices()
        .flat_map(|v| graph.neighbors(v).unwrap().iter().copied().collect::<Vec<_>>())
        .map(|w| inv(graph.degree(w).unwrap()))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `Σ_v |S(v)|`, twice the number of edges.
pub fn handshake_sum(graph: &Graph) -> usize {
    graph.vertices().map(|v| graph.degree(v).unwrap()).sum()
}

/// Simplex generating function `f_G(t) = 1 + Σ_k f_k t^{k+1}`: the constant
/// term counts the empty simplex, so `χ(G) = 1 - f_G(-1)` and
/// `f_G'(t) = Σ_v f_{S(v)}(t)` hold together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratingPolynomial {
    /// Coefficient of t^i at position i.
    pub coefficients: Vec<i64>,
}

impl GeneratingPolynomial {
    pub fn of(g: &SimplicialComplex) -> Self {
        let mut coefficients = vec![1];
        coefficients.extend(g.f_vector().0.iter().map(|&c| c as i64));
        GeneratingPolynomial { coefficients }
    }

    pub fn evaluate(&self, t: i64) -> i64 {
        self.coefficients.iter().rev().fold(0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Vec<i64> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as i64 * c)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratingIdentityReport {
    pub holds: bool,
    pub euler_relation_holds: bool,
    pub derivative: Vec<i64>,
    pub link_sum: Vec<i64>,
    /// `(power, derivative coefficient, link-sum coefficient)` where they differ.
    pub mismatches: Vec<(usize, i64, i64)>,
}

/// Compares `f_G'` with the sum of the link polynomials over all vertices.
pub fn generating_identity_check(g: &SimplicialComplex) -> GeneratingIdentityReport {
    let poly = GeneratingPolynomial::of(g);
    let derivative = poly.derivative();
    let mut link_sum: Vec<i64> = Vec::new();
    for v in g.grade(0) {
        let link = g.link_complex(v).expect("vertex of g");
        let lp = GeneratingPolynomial::of(&link);
        if link_sum.len() < lp.coefficients.len() {
            link_sum.resize(lp.coefficients.len(), 0);
        }
        for (i, c) in lp.coefficients.iter().enumerate() {
            link_sum[i] += c;
        }
    }
    let width = derivative.len().max(link_sum.len());
    let mismatches: Vec<(usize, i64, i64)> = (0..width)
        .filter_map(|i| {
            let a = derivative.get(i).copied().unwrap_or(0);
            let b = link_sum.get(i).copied().unwrap_or(0);
            (a != b).then_some((i, a, b))
        })
        .collect();
    GeneratingIdentityReport {
        holds: mismatches.is_empty(),
        euler_relation_holds: 1 - poly.evaluate(-1) == g.euler_characteristic(),
        derivative,
        link_sum,
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::generate(&[vec![1, 2, 3]]).unwrap()
    }

    fn octahedron() -> SimplicialComplex {
        let mut facets = vec![];
        for a in [0, 1] {
            for b in [2, 3] {
                for c in [4, 5] {
                    facets.push(vec![a, b, c]);
                }
            }
        }
        SimplicialComplex::generate(&facets).unwrap()
    }

    #[test]
    fn triangle_curvatures() {
        let g = triangle();
        let k0 = form_curvature(&g, 0).unwrap();
        // 1 - 2/2 + 1/3
        assert!(k0.values.iter().all(|v| *v == ratio(1, 3)));
        let k2 = form_curvature(&g, 2).unwrap();
        assert_eq!(k2.values, vec![int(1)]);
        let k1 = form_curvature(&g, 1).unwrap();
        // 1/2 + 1/2 - 1 + 1/3
        assert!(k1.values.iter().all(|v| *v == ratio(1, 3)));
    }

    #[test]
    fn form_curvature_needs_cover() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![3, 4]]).unwrap();
        assert!(matches!(form_curvature(&g, 2), Err(Error::CoverViolation { k: 2, .. })));
        assert!(matches!(
            form_curvature(&g, 5),
            Err(Error::DimensionOutOfRange { k: 5, .. })
        ));
        assert_eq!(form_curvature(&g, 1).unwrap().sum(), int(1));
    }

    #[test]
    fn levitt_matches_form_curvature() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![3, 4], vec![4, 5, 6, 7]]).unwrap();
        let a = levitt_curvature(&g).unwrap();
        let b = form_curvature(&g, 0).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn octahedron_tables() {
        let g = octahedron();
        let lev = levitt_curvature(&g).unwrap();
        assert!(lev.values.iter().all(|v| *v == ratio(1, 3)));
        let e = two_manifold_curvatures(&g, 1).unwrap();
        assert!(e.field.values.iter().all(|v| *v == ratio(1, 6)));
        assert_eq!(e.field.sum(), int(2));
        for k in 0..3 {
            let t = two_manifold_curvatures(&g, k).unwrap();
            assert_eq!(t.field.values, form_curvature(&g, k).unwrap().values);
            assert!(t.boundary.iter().all(|b| !b));
        }
        let p = puiseux_vertex_curvature(&g).unwrap();
        assert!(p.values.iter().all(|v| *v == ratio(1, 3)));
    }

    #[test]
    fn two_manifold_with_boundary_matches_form() {
        // the triangle is a disk with every simplex on the rim
        let g = triangle();
        for k in 0..3 {
            let t = two_manifold_curvatures(&g, k).unwrap();
            assert_eq!(t.field.values, form_curvature(&g, k).unwrap().values, "k={k}");
            assert!(t.boundary.iter().all(|&b| b));
        }
    }

    #[test]
    fn non_manifolds_are_rejected() {
        let k4 = SimplicialComplex::generate(&[vec![1, 2, 3, 4]]).unwrap();
        assert!(matches!(two_manifold_curvatures(&k4, 0), Err(Error::NotA2Manifold)));
        assert!(matches!(puiseux_vertex_curvature(&triangle()), Err(Error::NotA2Manifold)));
        assert!(matches!(edge_curvature_3manifold(&k4), Err(Error::NotA3Manifold)));
        // hollow triangle: skeleton is K3 but the face is missing
        let hollow = SimplicialComplex::generate(&[vec![1, 2], vec![2, 3], vec![1, 3]]).unwrap();
        assert!(matches!(two_manifold_curvatures(&hollow, 0), Err(Error::NotA2Manifold)));
    }

    #[test]
    fn facet_curvature_requires_purity() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![3, 4]]).unwrap();
        assert!(matches!(facet_curvature(&g), Err(Error::CoverViolation { .. })));
        let h = triangle();
        assert_eq!(facet_curvature(&h).unwrap().values, vec![int(1)]);
    }

    #[test]
    fn generating_polynomial() {
        let g = triangle();
        let p = GeneratingPolynomial::of(&g);
        assert_eq!(p.coefficients, vec![1, 3, 3, 1]);
        assert_eq!(1 - p.evaluate(-1), 1);
        let r = generating_identity_check(&g);
        assert!(r.holds && r.euler_relation_holds);

        let o = generating_identity_check(&octahedron());
        assert_eq!(o.derivative, vec![6, 24, 24]);
        assert_eq!(o.link_sum, vec![6, 24, 24]);
        assert!(o.holds);
    }

    #[test]
    fn isolated_vertex_generating_identity() {
        let g = SimplicialComplex::generate(&[vec![1, 2], vec![5]]).unwrap();
        let r = generating_identity_check(&g);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn handshake_and_inverse_degrees() {
        let graph = Graph::one_skeleton(&octahedron());
        assert_eq!(handshake_sum(&graph), 24);
        assert_eq!(inverse_degree_sum(&graph), int(6));
    }

    #[test]
    fn json_and_csv_output() {
        let k = form_curvature(&triangle(), 0).unwrap();
        let j = k.to_json(1);
        assert_eq!(j["values"][0]["value"], "1/3");
        assert_eq!(j["values"][0]["simplex"], serde_json::json!([1]));
        assert_eq!(k.to_csv().lines().nth(1), Some("1;1/3"));
    }
}
