use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::Zero;
use proptest::prelude::*;

use curvekit::cli::classify;
use curvekit::complex::{Simplex, SimplicialComplex};
use curvekit::curvature::{form_curvature, levitt_curvature, two_manifold_curvatures};
use curvekit::dynamics::{
    default_c, dirac_distances, lax_deform_ode, lax_deform_qr, Chebyshev, GChoice, OdeConfig, OperatorMatrix, Wave,
};
use curvekit::exact::ratio;
use curvekit::graph::{whitney_complex, Graph};
use curvekit::morse::{ph_indices, random_k_function, KFunction};
use curvekit::spectral::{betti, hodge_power_super_trace};
use curvekit::{zoo, Error};

fn random_complex() -> impl Strategy<Value = SimplicialComplex> {
    (3usize..=12, any::<u64>()).prop_flat_map(|(n, seed)| {
        let max = (n * (n - 1) / 2).min(40);
        (Just(n), 0..=max, Just(seed))
            .prop_map(|(n, m, seed)| zoo::random_clique_complex(n, m, seed).unwrap().complex)
    })
}

/// Energy transport done literally: every simplex y hands ω(y) in equal
/// parts to the k-simplices comparable with it.
fn brute_curvature(g: &SimplicialComplex, k: usize) -> Vec<BigRational> {
    let top = g.grade(k);
    let mut out = vec![BigRational::zero(); top.len()];
    for y in g.simplices() {
        let targets: Vec<usize> = (0..top.len())
            .filter(|&i| y.is_subset_of(&top[i]) || top[i].is_subset_of(y))
            .collect();
        for &i in &targets {
            out[i] += ratio(y.omega(), targets.len() as i64);
        }
    }
    out
}

fn chi_rational(g: &SimplicialComplex) -> BigRational {
    BigRational::from_integer(g.euler_characteristic().into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gauss_bonnet_and_transport_oracle(g in random_complex()) {
        for k in 0..=g.dim().unwrap() {
            match form_curvature(&g, k) {
                Ok(f) => {
                    prop_assert_eq!(f.sum(), chi_rational(&g));
                    prop_assert_eq!(f.values, brute_curvature(&g, k));
                }
                Err(Error::CoverViolation { witnesses, .. }) => prop_assert!(!witnesses.is_empty()),
                Err(e) => prop_assert!(false, "unexpected error {}", e),
            }
        }
    }

    #[test]
    fn levitt_is_vertex_curvature(g in random_complex()) {
        prop_assert_eq!(levitt_curvature(&g).unwrap().values, form_curvature(&g, 0).unwrap().values);
    }

    #[test]
    fn relabeling_permutes_the_field(g in random_complex(), shift in 1u32..50) {
        let n = g.vertices().len() as u32;
        let h = g.relabel(|v| (n - 1 - v) * 3 + shift);
        for k in 0..=g.dim().unwrap() {
            let (Ok(a), Ok(b)) = (form_curvature(&g, k), form_curvature(&h, k)) else { continue };
            let map: BTreeMap<Simplex, BigRational> = b.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
            for (s, v) in a.iter() {
                let image = Simplex::new(s.vertices().iter().map(|&x| (n - 1 - x) * 3 + shift).collect()).unwrap();
                prop_assert_eq!(&map[&image], v);
            }
        }
    }

    #[test]
    fn whitney_of_skeleton_round_trips(g in random_complex()) {
        prop_assert_eq!(whitney_complex(&Graph::one_skeleton(&g)).unwrap(), g);
    }

    #[test]
    fn euler_poincare_and_mckean_singer(g in random_complex()) {
        prop_assert_eq!(betti(&g).euler_characteristic(), g.euler_characteristic());
        for m in 1..=3 {
            prop_assert_eq!(hodge_power_super_trace(&g, m), 0);
        }
    }

    #[test]
    fn poincare_hopf_sums(g in random_complex(), seed in any::<u64>()) {
        for k in 0..=g.dim().unwrap() {
            if g.require_strong_cover(k).is_err() {
                continue;
            }
            let f = random_k_function(&g, k, seed).unwrap();
            let idx = ph_indices(&g, k, &f).unwrap();
            prop_assert_eq!(idx.indices.iter().sum::<i64>(), g.euler_characteristic());
        }
    }

    #[test]
    fn wave_sum_is_chi(g in random_complex(), t in 0.0f64..5.0) {
        let wave = Wave::new(&g);
        prop_assert!((wave.diagonal(t).sum() - g.euler_characteristic() as f64).abs() < 1e-9);
    }
}

#[test]
fn barycentric_refinement_keeps_chi() {
    for seed in 0..20 {
        let g = zoo::random_clique_complex(10, 12 + seed as usize, seed).unwrap().complex;
        let b = g.barycentric_refinement().unwrap();
        assert_eq!(b.euler_characteristic(), g.euler_characteristic(), "seed {seed}");
        assert_eq!(b.vertices().len(), g.len());
    }
}

/// `1 - χ(S⁻(v))`, where S⁻(v) is the clique complex on the neighbours
/// with smaller value.
fn classical_index(graph: &Graph, values: &BTreeMap<u32, f64>, v: u32) -> i64 {
    let below: BTreeSet<u32> = graph
        .neighbors(v)
        .unwrap()
        .iter()
        .copied()
        .filter(|w| values[w] < values[&v])
        .collect();
    let sub = graph.induced(&below);
    let chi = if below.is_empty() { 0 } else { whitney_complex(&sub).unwrap().euler_characteristic() };
    1 - chi
}

#[test]
fn vertex_index_matches_classical_formula() {
    for seed in 0..20u64 {
        let nc = zoo::random_clique_complex(9, 10 + seed as usize, seed).unwrap();
        let g = nc.complex;
        let graph = Graph::one_skeleton(&g);
        let f = random_k_function(&g, 0, seed + 100).unwrap();
        let values: BTreeMap<u32, f64> = g.vertices().iter().copied().zip(f.values.iter().copied()).collect();
        let idx = ph_indices(&g, 0, &f).unwrap();
        for (x, i) in idx.simplices.iter().zip(&idx.indices) {
            let v = x.vertices()[0];
            assert_eq!(*i, classical_index(&graph, &values, v), "seed {seed} vertex {v}");
        }
    }
}

#[test]
fn shared_vertex_forbids_equal_values() {
    let g = SimplicialComplex::generate(&[vec![1, 2], vec![2, 3]]).unwrap();
    let f = KFunction {
        k: 1,
        values: vec![0.5, 0.5],
        provenance: "test".into(),
    };
    assert!(matches!(ph_indices(&g, 1, &f), Err(Error::NotLocallyInjective { .. })));
}

/// Disk with 8 boundary and 3 interior vertices.
fn kite() -> SimplicialComplex {
    let facets = [
        [9, 1, 2],
        [9, 2, 3],
        [9, 3, 10],
        [9, 8, 10],
        [9, 8, 1],
        [10, 3, 4],
        [10, 4, 11],
        [10, 7, 11],
        [10, 7, 8],
        [11, 4, 5],
        [11, 5, 6],
        [11, 6, 7],
    ];
    SimplicialComplex::generate(&facets.map(|f| f.to_vec())).unwrap()
}

#[test]
fn kite_region_sums() {
    let g = kite();
    assert_eq!(g.f_vector().0, vec![11, 22, 12]);
    assert_eq!(classify(&g), "2-manifold with boundary");
    for k in 0..=2 {
        let table = two_manifold_curvatures(&g, k).unwrap();
        let form = form_curvature(&g, k).unwrap();
        assert_eq!(table.field.values, form.values, "k={k}");
        assert_eq!(table.field.sum(), chi_rational(&g));
        assert!(table.boundary.iter().any(|b| *b));
    }
    // interior vertex of degree 6 is flat
    let k0 = form_curvature(&g, 0).unwrap();
    assert_eq!(k0.get(&Simplex::vertex(10)).unwrap(), &BigRational::zero());
}

#[test]
fn octahedron_edge_table() {
    let g = zoo::builtin("octahedron").unwrap().complex;
    let t = two_manifold_curvatures(&g, 1).unwrap();
    assert!(t.field.values.iter().all(|v| *v == ratio(1, 6)));
    assert_eq!(t.field.sum(), BigRational::from_integer(2.into()));
}

#[test]
fn ode_runs_the_qr_flow_backwards() {
    // e^{-tD} = QR gives D' = [D^- - D^+, D], the ODE with the sign flipped
    let g = zoo::builtin("triangle").unwrap().complex;
    let cfg = OdeConfig {
        dt: 1e-3,
        ..OdeConfig::default()
    };
    let ode = lax_deform_ode(&g, &[0.2], cfg).unwrap();
    let qr = lax_deform_qr(&g, -0.2, GChoice::Identity).unwrap();
    let (OperatorMatrix::Complex(a), OperatorMatrix::Real(b)) = (&ode[0].matrix, &qr.matrix) else {
        unreachable!()
    };
    let diff = a.map(|z| z.re) - b;
    assert!(diff.amax() < 1e-10, "{}", diff.amax());
    assert_eq!(ode[0].matrix.max_imaginary(), 0.0);
}

#[test]
fn complex_ode_moves_into_the_complex() {
    let g = zoo::builtin("cycle4").unwrap().complex;
    let cfg = OdeConfig {
        c_imag: 0.5,
        ..OdeConfig::default()
    };
    let out = lax_deform_ode(&g, &[0.5], cfg).unwrap();
    assert!(out[0].eig_drift < 1e-6);
    assert!(out[0].matrix.max_imaginary() > 1e-3);
    assert!(out[0].matrix.hermitian_error() < 1e-10);
}

#[test]
fn causal_propagator_is_local() {
    // (1 + cD)^t itself stays inside the cone; Q_t does not (see acceptance)
    let g = zoo::builtin("16cell").unwrap().complex;
    let dist = dirac_distances(&g);
    let d = curvekit::spectral::dirac(&g).to_f64().entries;
    let spectrum = curvekit::spectral::SymmetricSpectrum::new(d.clone());
    for t in 1..=3u32 {
        let a = curvekit::dynamics::propagator(&d, &spectrum, t as f64, GChoice::NegLogOnePlusCD { c: 0.05 });
        assert_eq!(curvekit::dynamics::outside_cone(&a, &dist, t), 0.0);
    }
}

#[test]
fn floating_chebyshev_locality() {
    let g = zoo::builtin("16cell").unwrap().complex;
    let c = default_c(&g);
    let cheb = Chebyshev::new(&g, &c).unwrap();
    let dist = dirac_distances(&g);
    let mut u0 = vec![0.0; g.len()];
    u0[3] = 1.0;
    let mut s = cheb.start(c, u0);
    for n in 1..=5u32 {
        for (y, v) in s.curr.iter().enumerate() {
            if dist[3][y].is_none_or(|d| d > n) {
                assert!(v.abs() <= 1e-14);
            }
        }
        s = cheb.step(&s);
    }
}
