//! Finite abstract simplicial complexes.
//!
//! A complex is stored as a flat list of simplices in canonical order: by
//! dimension first, then lexicographically by the sorted vertex list. The
//! position of a simplex in this list is its row/column in every operator
//! built on the complex.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Default cap on the number of simplices a constructor may produce.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 200_000;

/// A non-empty, strictly increasing list of vertices.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Simplex(Vec<Vertex>);

impl Simplex {
    pub fn new(mut vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyFacet(0));
        }
        vertices.sort_unstable();
        vertices.dedup();
        Ok(Simplex(vertices))
    }

    /// Caller guarantees `vertices` is non-empty and strictly increasing.
    pub(crate) fn from_sorted(vertices: Vec<Vertex>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertex(v: Vertex) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// The energy (-1)^dim.
    pub fn omega(&self) -> i64 {
        if self.dim() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Simplex) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                match w.cmp(v) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn intersects(&self, other: &Simplex) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut v: Vec<Vertex> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }

    /// Vertices of `self` not in `other`, or `None` if nothing remains.
    pub fn difference(&self, other: &Simplex) -> Option<Simplex> {
        let v: Vec<Vertex> = self
            .0
            .iter()
            .copied()
            .filter(|v| !other.contains_vertex(*v))
            .collect();
        (!v.is_empty()).then_some(Simplex(v))
    }

    /// All non-empty subsets, including `self`.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        assert!(n < 64, "simplex too large to enumerate faces");
        (1u64..(1u64 << n)).map(move |mask| {
            Simplex(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }

    /// Codimension-one faces, paired with the position of the removed vertex.
    pub fn boundary(&self) -> impl Iterator<Item = (usize, Simplex)> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |i| {
            let mut v = self.0.clone();
            v.remove(i);
            (i, Simplex(v))
        })
    }

    /// Subsets with exactly `size` vertices.
    pub fn subsets_of_size(&self, size: usize) -> Vec<Simplex> {
        let mut out = Vec::new();
        let mut pick = Vec::with_capacity(size);
        fn rec(src: &[Vertex], size: usize, start: usize, pick: &mut Vec<Vertex>, out: &mut Vec<Simplex>) {
            if pick.len() == size {
                out.push(Simplex(pick.clone()));
                return;
            }
            let need = size - pick.len();
            for i in start..=src.len().saturating_sub(need) {
                if i >= src.len() {
                    break;
                }
                pick.push(src[i]);
                rec(src, size, i + 1, pick, out);
                pick.pop();
            }
        }
        if size >= 1 && size <= self.0.len() {
            rec(&self.0, size, 0, &mut pick, &mut out);
        }
        out
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<Vertex>> for Simplex {
    type Error = Error;
    fn try_from(v: Vec<Vertex>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<Vertex> {
    fn from(s: Simplex) -> Self {
        s.0
    }
}

/// Simplex counts per dimension.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FVector(pub Vec<usize>);

impl FVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }
}

/// Result of testing whether the k-simplices cover a complex.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CoverStatus {
    pub k: usize,
    /// Every vertex lies in some k-simplex.
    pub weak: bool,
    /// Every simplex of dimension <= k lies in some k-simplex.
    pub strong: bool,
    /// Simplices of dimension <= k contained in no k-simplex.
    pub witnesses: Vec<Simplex>,
}

/// Immutable simplicial complex in canonical order.
#[derive(Debug)]
pub struct SimplicialComplex {
    simplices: Vec<Simplex>,
    grade_offsets: Vec<usize>,
    index: HashMap<Simplex, usize>,
    vertex_set: Vec<Vertex>,
    degrees: OnceLock<Vec<Vec<usize>>>,
}

impl Clone for SimplicialComplex {
    fn clone(&self) -> Self {
        Self::from_closed_set(self.simplices.iter().cloned().collect())
    }
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.simplices == other.simplices
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    pub fn empty() -> Self {
        Self::from_closed_set(BTreeSet::new())
    }

    /// Downward closure of a facet list.
    pub fn generate(facets: &[Vec<Vertex>]) -> Result<Self> {
        Self::generate_with_budget(facets, DEFAULT_SIMPLEX_BUDGET)
    }

    pub fn generate_with_budget(facets: &[Vec<Vertex>], budget: usize) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, f) in facets.iter().enumerate() {
            let s = Simplex::new(f.clone()).map_err(|_| Error::EmptyFacet(i))?;
            if s.len() >= 63 || (1usize << s.len()) > budget.saturating_add(1) {
                return Err(Error::SimplexBudgetExceeded(budget));
            }
            if set.contains(&s) {
                continue;
            }
            for face in s.faces() {
                set.insert(face);
            }
            if set.len() > budget {
                return Err(Error::SimplexBudgetExceeded(budget));
            }
        }
        Ok(Self::from_closed_set(set))
    }

    /// Builds a complex from a family already known to be closed under
    /// taking non-empty subsets.
    pub(crate) fn from_closed_set(set: BTreeSet<Simplex>) -> Self {
        let simplices: Vec<Simplex> = set.into_iter().collect();
        let mut grade_offsets = Vec::new();
        for (i, s) in simplices.iter().enumerate() {
            while grade_offsets.len() <= s.dim() {
                grade_offsets.push(i);
            }
        }
        grade_offsets.push(simplices.len());
        let index = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let vertex_set = simplices
            .iter()
            .take_while(|s| s.dim() == 0)
            .map(|s| s.0[0])
            .collect();
        SimplicialComplex {
            simplices,
            grade_offsets,
            index,
            vertex_set,
            degrees: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Maximal dimension q, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(|s| s.dim())
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// `grade_offsets[k]..grade_offsets[k + 1]` is the block of k-simplices.
    pub fn grade_offsets(&self) -> &[usize] {
        &self.grade_offsets
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertex_set
    }

    pub fn grade_range(&self, k: usize) -> std::ops::Range<usize> {
        if k + 1 < self.grade_offsets.len() {
            self.grade_offsets[k]..self.grade_offsets[k + 1]
        } else {
            self.simplices.len()..self.simplices.len()
        }
    }

    /// The k-simplices G_k.
    pub fn grade(&self, k: usize) -> &[Simplex] {
        &self.simplices[self.grade_range(k)]
    }

    pub fn index_of(&self, x: &Simplex) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &Simplex) -> bool {
        self.index.contains_key(x)
    }

    fn require(&self, x: &Simplex) -> Result<usize> {
        self.index_of(x)
            .ok_or_else(|| Error::SimplexNotInComplex(x.clone()))
    }

    pub fn f_vector(&self) -> FVector {
        FVector(
            self.grade_offsets
                .windows(2)
                .map(|w| w[1] - w[0])
                .collect(),
        )
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(Simplex::omega).sum()
    }

    /// Maximal simplices.
    pub fn facets(&self) -> Vec<Simplex> {
        let table = self.degree_table();
        self.simplices
            .iter()
            .enumerate()
            .filter(|(i, s)| table[*i].get(s.dim() + 1).copied().unwrap_or(0) == 0)
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// `table[i][j]` = number of j-simplices containing simplex i.
    pub fn degree_table(&self) -> &[Vec<usize>] {
        self.degrees.get_or_init(|| {
            let width = self.dim().map_or(0, |q| q + 1);
            let mut table = vec![vec![0usize; width]; self.simplices.len()];
            for z in &self.simplices {
                let j = z.dim();
                for y in z.faces() {
                    table[self.index[&y]][j] += 1;
                }
            }
            table
        })
    }

    /// Number of j-simplices containing `x` (x itself counts when j = dim x).
    pub fn degree(&self, x: &Simplex, j: usize) -> Result<usize> {
        let i = self.require(x)?;
        Ok(self.degree_of_index(i, j))
    }

    pub(crate) fn degree_of_index(&self, i: usize, j: usize) -> usize {
        self.degree_table()[i].get(j).copied().unwrap_or(0)
    }

    /// All simplices of G containing `x`.
    pub fn open_star(&self, x: &Simplex) -> Result<Vec<Simplex>> {
        self.require(x)?;
        Ok(self
            .simplices
            .iter()
            .filter(|y| x.is_subset_of(y))
            .cloned()
            .collect())
    }

    /// The complex {y \ x : y ⊋ x}.
    pub fn link_complex(&self, x: &Simplex) -> Result<SimplicialComplex> {
        self.require(x)?;
        let set = self
            .simplices
            .iter()
            .filter(|y| y.len() > x.len() && x.is_subset_of(y))
            .filter_map(|y| y.difference(x))
            .collect();
        Ok(Self::from_closed_set(set))
    }

    pub fn cover_status(&self, k: usize) -> CoverStatus {
        let covered: BTreeSet<Vertex> = self
            .grade(k)
            .iter()
            .flat_map(|x| x.vertices().iter().copied())
            .collect();
        let weak = covered.len() == self.vertex_set.len();
        let witnesses: Vec<Simplex> = self
            .simplices
            .iter()
            .enumerate()
            .take_while(|(_, y)| y.dim() <= k)
            .filter(|(i, _)| self.degree_of_index(*i, k) == 0)
            .map(|(_, y)| y.clone())
            .collect();
        CoverStatus {
            k,
            weak,
            strong: witnesses.is_empty(),
            witnesses,
        }
    }

    /// Fails with `CoverViolation` unless every simplex of dimension <= k
    /// lies in a k-simplex.
    pub fn require_strong_cover(&self, k: usize) -> Result<()> {
        if self.dim().is_none_or(|q| k > q) {
            return Err(Error::DimensionOutOfRange { k, max: self.dim() });
        }
        let status = self.cover_status(k);
        if status.strong {
            Ok(())
        } else {
            Err(Error::CoverViolation {
                k,
                witnesses: status.witnesses,
            })
        }
    }

    pub fn is_pure(&self) -> bool {
        match self.dim() {
            Some(q) => self.cover_status(q).strong,
            None => true,
        }
    }

    /// Order complex of the face poset: one vertex per simplex of `self`
    /// (labelled by canonical index), one simplex per chain under strict
    /// inclusion.
    pub fn barycentric_refinement(&self) -> Result<SimplicialComplex> {
        self.barycentric_refinement_with_budget(DEFAULT_SIMPLEX_BUDGET)
    }

    pub fn barycentric_refinement_with_budget(&self, budget: usize) -> Result<SimplicialComplex> {
        let mut chains: Vec<Vec<Vec<Vertex>>> = Vec::with_capacity(self.len());
        let mut total = 0usize;
        for (i, x) in self.simplices.iter().enumerate() {
            let mut here = vec![vec![i as Vertex]];
            for f in x.faces().filter(|f| f.len() < x.len()) {
                let j = self.index[&f];
                for c in &chains[j] {
                    let mut c = c.clone();
                    c.push(i as Vertex);
                    here.push(c);
                }
            }
            total += here.len();
            if total > budget {
                return Err(Error::SimplexBudgetExceeded(budget));
            }
            chains.push(here);
        }
        let set = chains
            .into_iter()
            .flatten()
            .map(Simplex::from_sorted)
            .collect();
        Ok(Self::from_closed_set(set))
    }

    /// Applies an injective vertex relabelling.
    pub fn relabel(&self, f: impl Fn(Vertex) -> Vertex) -> SimplicialComplex {
        let set = self
            .simplices
            .iter()
            .map(|s| Simplex::new(s.0.iter().map(|&v| f(v)).collect()).expect("non-empty"))
            .collect();
        Self::from_closed_set(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[Vertex]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn simplex_normalizes_and_rejects_empty() {
        assert_eq!(s(&[3, 1, 2, 1]).vertices(), &[1, 2, 3]);
        assert!(Simplex::new(vec![]).is_err());
        assert_eq!(s(&[4]).dim(), 0);
        assert_eq!(s(&[1, 2]).omega(), -1);
    }

    #[test]
    fn subset_and_difference() {
        assert!(s(&[1, 3]).is_subset_of(&s(&[1, 2, 3])));
        assert!(!s(&[1, 4]).is_subset_of(&s(&[1, 2, 3])));
        assert!(s(&[1, 2, 3]).is_subset_of(&s(&[1, 2, 3])));
        assert_eq!(s(&[1, 2, 3]).difference(&s(&[2])), Some(s(&[1, 3])));
        assert_eq!(s(&[2]).difference(&s(&[2])), None);
        assert_eq!(s(&[1, 2, 3, 4]).subsets_of_size(2).len(), 6);
        assert_eq!(s(&[1, 2, 3]).subsets_of_size(3), vec![s(&[1, 2, 3])]);
    }

    #[test]
    fn closure_of_triangle() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3]]).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.f_vector(), FVector(vec![3, 3, 1]));
        assert_eq!(g.euler_characteristic(), 1);
        assert_eq!(g.grade_offsets(), &[0, 3, 6, 7]);
        // canonical order
        let order: Vec<String> = g.simplices().iter().map(|x| x.to_string()).collect();
        assert_eq!(order, ["(1)", "(2)", "(3)", "(1,2)", "(1,3)", "(2,3)", "(1,2,3)"]);
    }

    #[test]
    fn closure_dedups_and_rejects_empty_facets() {
        let a = SimplicialComplex::generate(&[vec![3, 2, 1], vec![1, 2, 3], vec![1, 2]]).unwrap();
        let b = SimplicialComplex::generate(&[vec![1, 2, 3]]).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            SimplicialComplex::generate(&[vec![1], vec![]]),
            Err(Error::EmptyFacet(1))
        ));
        assert!(SimplicialComplex::generate(&[]).unwrap().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let big: Vec<Vertex> = (0..20).collect();
        assert!(matches!(
            SimplicialComplex::generate_with_budget(&[big], 1000),
            Err(Error::SimplexBudgetExceeded(1000))
        ));
    }

    #[test]
    fn one_point_complex() {
        let g = SimplicialComplex::generate(&[vec![1]]).unwrap();
        assert_eq!(g.euler_characteristic(), 1);
        assert_eq!(g.dim(), Some(0));
    }

    #[test]
    fn degree_counts_containing_simplices() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![2, 3, 4]]).unwrap();
        assert_eq!(g.degree(&s(&[2]), 1).unwrap(), 3);
        assert_eq!(g.degree(&s(&[2, 3]), 2).unwrap(), 2);
        assert_eq!(g.degree(&s(&[1, 2]), 1).unwrap(), 1);
        assert_eq!(g.degree(&s(&[1]), 2).unwrap(), 1);
        assert!(matches!(
            g.degree(&s(&[1, 4]), 1),
            Err(Error::SimplexNotInComplex(_))
        ));
    }

    #[test]
    fn open_star_and_link() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![2, 3, 4]]).unwrap();
        assert_eq!(g.open_star(&s(&[1, 2, 3])).unwrap(), vec![s(&[1, 2, 3])]);
        assert_eq!(g.open_star(&s(&[2, 3])).unwrap().len(), 3);
        let link = g.link_complex(&s(&[2])).unwrap();
        // path 1 - 3 - 4
        assert_eq!(link.f_vector(), FVector(vec![3, 2]));
        assert!(g.link_complex(&s(&[1, 2, 3])).unwrap().is_empty());
    }

    #[test]
    fn weak_cover_fails_with_isolated_vertex() {
        let g = SimplicialComplex::generate(&[vec![1, 2], vec![2], vec![3]]).unwrap();
        let c = g.cover_status(1);
        assert!(!c.weak);
        assert!(!c.strong);
        assert_eq!(c.witnesses, vec![s(&[3])]);
        assert!(g.cover_status(0).strong);
    }

    #[test]
    fn strong_cover_detects_dangling_edge() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![3, 4, 5], vec![2, 4]]).unwrap();
        let c = g.cover_status(2);
        assert!(c.weak);
        assert!(!c.strong);
        assert_eq!(c.witnesses, vec![s(&[2, 4])]);
        assert!(matches!(
            g.require_strong_cover(2),
            Err(Error::CoverViolation { k: 2, .. })
        ));
    }

    #[test]
    fn pure_complex_is_covered_by_facets() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![2, 3, 4], vec![4, 5, 6]]).unwrap();
        assert!(g.cover_status(2).strong);
        assert!(g.is_pure());
        assert_eq!(g.facets().len(), 3);
    }

    #[test]
    fn refinement_of_point_and_triangle() {
        let p = SimplicialComplex::generate(&[vec![7]]).unwrap();
        let r = p.barycentric_refinement().unwrap();
        assert_eq!(r.simplices(), &[s(&[0])]);

        // chains in the face poset of a triangle: 7 + 12 + 6
        let t = SimplicialComplex::generate(&[vec![1, 2, 3]]).unwrap();
        let r = t.barycentric_refinement().unwrap();
        assert_eq!(r.f_vector(), FVector(vec![7, 12, 6]));
        assert_eq!(r.euler_characteristic(), 1);
    }

    #[test]
    fn relabel_keeps_shape() {
        let g = SimplicialComplex::generate(&[vec![1, 2, 3], vec![3, 4]]).unwrap();
        let h = g.relabel(|v| 10 - v);
        assert_eq!(h.f_vector(), g.f_vector());
        assert!(h.contains(&s(&[9, 8, 7])));
    }
}
