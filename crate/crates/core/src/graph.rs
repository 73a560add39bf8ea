//! Finite simple graphs, their clique (Whitney) complexes and the manifold
//! recognition tests built on unit spheres.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::complex::{Simplex, SimplicialComplex, Vertex, DEFAULT_SIMPLEX_BUDGET};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self> {
        let mut g = Graph::default();
        for v in vertices {
            g.adj.entry(v).or_default();
        }
        for (a, b) in edges {
            if a == b {
                return Err(Error::GraphLoop(a));
            }
            g.adj.entry(a).or_default().insert(b);
            g.adj.entry(b).or_default().insert(a);
        }
        Ok(g)
    }

    /// Vertices and edges of a complex.
    pub fn one_skeleton(complex: &SimplicialComplex) -> Self {
        let edges = complex
            .grade(1)
            .iter()
            .map(|e| (e.vertices()[0], e.vertices()[1]));
        Graph::new(complex.vertices().iter().copied(), edges).expect("edges of a complex have no loops")
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&a, n)| n.range(a + 1..).map(move |&b| (a, b)))
    }

    pub fn neighbors(&self, v: Vertex) -> Result<&BTreeSet<Vertex>> {
        self.adj.get(&v).ok_or(Error::VertexNotInGraph(v))
    }

    pub fn degree(&self, v: Vertex) -> Result<usize> {
        self.neighbors(v).map(BTreeSet::len)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn induced(&self, vertices: &BTreeSet<Vertex>) -> Graph {
        let adj = vertices
            .iter()
            .filter(|v| self.adj.contains_key(v))
            .map(|&v| {
                let n = self.adj[&v].intersection(vertices).copied().collect();
                (v, n)
            })
            .collect();
        Graph { adj }
    }

    /// Induced subgraph on the neighbours of `v`.
    pub fn unit_sphere(&self, v: Vertex) -> Result<Graph> {
        let n = self.neighbors(v)?.clone();
        Ok(self.induced(&n))
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.adj.keys().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[&v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.adj.len()
    }

    fn is_cycle(&self) -> bool {
        self.adj.values().all(|n| n.len() == 2) && self.is_connected()
    }

    fn is_path(&self) -> bool {
        let ends = self.adj.values().filter(|n| n.len() == 1).count();
        self.vertex_count() >= 2
            && ends == 2
            && self.adj.values().all(|n| n.len() == 1 || n.len() == 2)
            && self.is_connected()
    }
}

/// Clique complex: every complete subgraph becomes a simplex.
pub fn whitney_complex(graph: &Graph) -> Result<SimplicialComplex> {
    whitney_complex_with_budget(graph, DEFAULT_SIMPLEX_BUDGET)
}

pub fn whitney_complex_with_budget(graph: &Graph, budget: usize) -> Result<SimplicialComplex> {
    let mut set = BTreeSet::new();
    let mut clique = Vec::new();

    // Grows cliques in increasing vertex order so each is visited once.
    fn extend(
        graph: &Graph,
        clique: &mut Vec<Vertex>,
        candidates: &BTreeSet<Vertex>,
        set: &mut BTreeSet<Simplex>,
        budget: usize,
    ) -> Result<()> {
        set.insert(Simplex::from_sorted(clique.clone()));
        if set.len() > budget {
            return Err(Error::SimplexBudgetExceeded(budget));
        }
        for &w in candidates {
            let next: BTreeSet<Vertex> = candidates
                .range(w + 1..)
                .filter(|u| graph.adj[&w].contains(u))
                .copied()
                .collect();
            clique.push(w);
            extend(graph, clique, &next, set, budget)?;
            clique.pop();
        }
        Ok(())
    }

    for (&v, n) in &graph.adj {
        let candidates: BTreeSet<Vertex> = n.range(v + 1..).copied().collect();
        clique.push(v);
        extend(graph, &mut clique, &candidates, &mut set, budget)?;
        clique.pop();
    }
    Ok(SimplicialComplex::from_closed_set(set))
}

/// Outcome of the 2-manifold test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoManifoldCheck {
    pub is_manifold: bool,
    /// Vertices whose unit sphere is a cycle of length >= 4.
    pub interior: Vec<Vertex>,
    /// Vertices whose unit sphere is a path.
    pub boundary: Vec<Vertex>,
    /// Vertices whose unit sphere is neither.
    pub singular: Vec<Vertex>,
}

impl TwoManifoldCheck {
    pub fn has_boundary(&self) -> bool {
        !self.boundary.is_empty()
    }
}

pub fn is_2manifold(graph: &Graph) -> TwoManifoldCheck {
    let mut check = TwoManifoldCheck {
        is_manifold: true,
        interior: vec![],
        boundary: vec![],
        singular: vec![],
    };
    for v in graph.vertices() {
        let s = graph.unit_sphere(v).expect("vertex of graph");
        if s.vertex_count() >= 4 && s.is_cycle() {
            check.interior.push(v);
        } else if s.is_path() {
            check.boundary.push(v);
        } else {
            check.singular.push(v);
        }
    }
    check.is_manifold = check.singular.is_empty();
    check
}

/// Connected 2-manifold without boundary and with Euler characteristic 2.
pub fn is_2sphere(graph: &Graph) -> bool {
    let check = is_2manifold(graph);
    check.is_manifold
        && !check.has_boundary()
        && graph.vertex_count() > 0
        && graph.is_connected()
        && whitney_complex(graph).is_ok_and(|c| c.euler_characteristic() == 2)
}

/// Every unit sphere is a 2-sphere.
pub fn is_3manifold(graph: &Graph) -> bool {
    graph.vertex_count() > 0
        && graph
            .vertices()
            .all(|v| is_2sphere(&graph.unit_sphere(v).expect("vertex of graph")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::FVector;

    fn cycle(n: u32) -> Graph {
        Graph::new(0..n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn complete(n: u32) -> Graph {
        Graph::new(0..n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    fn octahedron() -> Graph {
        // antipodal pairs (0,1), (2,3), (4,5)
        Graph::new(
            0..6,
            (0..6u32).flat_map(|i| (i + 1..6).filter(move |j| i / 2 != j / 2).map(move |j| (i, j))),
        )
        .unwrap()
    }

    #[test]
    fn loops_are_rejected() {
        assert!(matches!(Graph::new([1], [(1, 1)]), Err(Error::GraphLoop(1))));
    }

    #[test]
    fn four_cycle_has_no_triangles() {
        let c = whitney_complex(&cycle(4)).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn k3_matches_closure() {
        let w = whitney_complex(&complete(3)).unwrap();
        let g = SimplicialComplex::generate(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(w, g);
    }

    #[test]
    fn empty_graph_gives_empty_complex() {
        assert!(whitney_complex(&Graph::default()).unwrap().is_empty());
    }

    #[test]
    fn octahedron_cliques() {
        let w = whitney_complex(&octahedron()).unwrap();
        assert_eq!(w.f_vector(), FVector(vec![6, 12, 8]));
        for v in 0..6 {
            let s = octahedron().unit_sphere(v).unwrap();
            assert_eq!(s.vertex_count(), 4);
            assert!(s.is_cycle());
        }
    }

    #[test]
    fn skeleton_roundtrip() {
        let g = octahedron();
        let w = whitney_complex(&g).unwrap();
        assert_eq!(Graph::one_skeleton(&w), g);
    }

    #[test]
    fn clique_budget() {
        assert!(matches!(
            whitney_complex_with_budget(&complete(10), 100),
            Err(Error::SimplexBudgetExceeded(100))
        ));
    }

    #[test]
    fn manifold_classification() {
        let oct = is_2manifold(&octahedron());
        assert!(oct.is_manifold && !oct.has_boundary());
        assert!(is_2sphere(&octahedron()));

        let k4 = is_2manifold(&complete(4));
        assert!(!k4.is_manifold);
        assert_eq!(k4.singular.len(), 4);

        // a single triangle: every vertex sees a path of two vertices
        let tri = is_2manifold(&complete(3));
        assert!(tri.is_manifold);
        assert_eq!(tri.boundary.len(), 3);

        assert!(!is_3manifold(&octahedron()));
        assert!(!is_2sphere(&cycle(5)));
    }

    #[test]
    fn unit_sphere_missing_vertex() {
        assert!(matches!(cycle(4).unit_sphere(9), Err(Error::VertexNotInGraph(9))));
    }
}
