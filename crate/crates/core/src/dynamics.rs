//! Time-dependent curvature and deformations of the Dirac operator.
//!
//! * Wave curvature: the energies ω(x) are replaced by
//!   `ω_t(x) = (-1)^dim(x) cos(Dt)[x][x]` and redistributed exactly like
//!   the form curvature. McKean-Singer keeps the total at χ(G).
//! * Lax deformation `D' = [g(D)^+ - g(D)^- + i c g(D)^0, D]`, either by
//!   factoring `e^{-t g(D)} = QR` or by integrating the ODE with RK4.
//! * Chebyshev stepping `u_{m+1} = 2cD u_m - u_{m-1}`, a causal wave
//!   evolution with unit propagation speed.
//!
//! Distances between simplices are graph distances in the adjacency given
//! by the non-zero off-diagonal entries of D.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num::complex::Complex64;
use num::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::exact::{binomial, to_f64};
use crate::curvature::form_curvature;
use crate::spectral::{dirac, SymmetricSpectrum};

/// Drift above which an ODE trajectory is rejected.
pub const ODE_DRIFT_TOLERANCE: f64 = 1e-6;

/// Entries below this are treated as zero when checking causality of Q.
pub const PATTERN_TOLERANCE: f64 = 1e-12;

/// `c = 1/(2 ceil(‖D‖₂))`, which keeps `‖cD‖₂ <= 1/2`.
pub fn default_c(g: &SimplicialComplex) -> f64 {
    let norm = Wave::new(g).spectrum.spectral_norm();
    1.0 / (2.0 * norm.ceil().max(1.0))
}

/// Diagonal energies of the wave operator at time t.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveDiagonal {
    pub t: f64,
    pub omega_t: Vec<f64>,
}

impl WaveDiagonal {
    pub fn sum(&self) -> f64 {
        self.omega_t.iter().sum()
    }
}

/// Real-valued field on G_k.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveCurvature {
    pub k: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

impl WaveCurvature {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `{"t":, "sum_K":, "values": [...]}`
    pub fn to_json(&self) -> serde_json::Value {
        json!({"t": self.t, "sum_K": self.sum(), "values": self.values})
    }
}

/// Dirac spectrum of a complex, reused across time samples.
pub struct Wave<'a> {
    complex: &'a SimplicialComplex,
    spectrum: SymmetricSpectrum,
}

impl<'a> Wave<'a> {
    pub fn new(g: &'a SimplicialComplex) -> Self {
        Wave {
            complex: g,
            spectrum: SymmetricSpectrum::new(dirac(g).to_f64().entries),
        }
    }

    pub fn spectrum(&self) -> &SymmetricSpectrum {
        &self.spectrum
    }

    /// `ω_t(x) = (-1)^dim(x) cos(Dt)[x][x]`
    pub fn diagonal(&self, t: f64) -> WaveDiagonal {
        let diag = self.spectrum.diagonal(|l| (l * t).cos());
        let omega_t = self
            .complex
            .simplices()
            .iter()
            .zip(diag)
            .map(|(x, d)| x.omega() as f64 * d)
            .collect();
        WaveDiagonal { t, omega_t }
    }

    /// Energies from `e^{iDt}` instead of `cos(Dt)`.
    pub fn diagonal_complex(&self, t: f64) -> Vec<Complex64> {
        let diag = self.spectrum.diagonal_complex(|l| Complex64::new(0.0, l * t).exp());
        self.complex
            .simplices()
            .iter()
            .zip(diag)
            .map(|(x, d)| d * x.omega() as f64)
            .collect()
    }

    /// `K_{k,t}(x) = Σ_{y⊆x} ω_t(y)/d_k(y) + Σ_{y⊋x} ω_t(y)/C(dim(y)+1, k+1)`
    pub fn curvature(&self, k: usize, t: f64) -> Result<WaveCurvature> {
        self.complex.require_strong_cover(k)?;
        let omega = self.diagonal(t).omega_t;
        Ok(WaveCurvature {
            k,
            t,
            values: redistribute(self.complex, k, &omega),
        })
    }

    pub fn curvature_complex(&self, k: usize, t: f64) -> Result<Vec<Complex64>> {
        self.complex.require_strong_cover(k)?;
        Ok(redistribute(self.complex, k, &self.diagonal_complex(t)))
    }
}

fn redistribute<T>(g: &SimplicialComplex, k: usize, omega: &[T]) -> Vec<T>
where
    T: Copy + std::ops::AddAssign + std::ops::Div<f64, Output = T> + Default,
{
    let table = g.degree_table();
    let offset = g.grade_range(k).start;
    let mut out = vec![T::default(); g.grade(k).len()];
    for (xi, x) in g.grade(k).iter().enumerate() {
        for y in x.faces() {
            let yi = g.index_of(&y).expect("closed");
            out[xi] += omega[yi] / table[yi][k] as f64;
        }
    }
    for (yi, y) in g.simplices().iter().enumerate().skip(g.grade_range(k).end) {
        let share = omega[yi] / binomial(y.len(), k + 1) as f64;
        for x in y.subsets_of_size(k + 1) {
            out[g.index_of(&x).expect("closed") - offset] += share;
        }
    }
    out
}

/// Wave curvature at a single time.
pub fn wave_curvature(g: &SimplicialComplex, k: usize, t: f64) -> Result<WaveCurvature> {
    Wave::new(g).curvature(k, t)
}

/// Largest deviation of the t = 0 wave curvature from the exact form
/// curvature.
pub fn wave_initial_error(g: &SimplicialComplex, k: usize) -> Result<f64> {
    let exact = form_curvature(g, k)?;
    let wave = wave_curvature(g, k, 0.0)?;
    Ok(exact
        .values
        .iter()
        .zip(&wave.values)
        .map(|(e, w)| (to_f64(e) - w).abs())
        .fold(0.0, f64::max))
}

/// All-pairs distances in the Dirac adjacency; `None` when unreachable.
pub fn dirac_distances(g: &SimplicialComplex) -> Vec<Vec<Option<u32>>> {
    let stencil = Stencil::new(g);
    let n = g.len();
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            dist[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                let d = dist[x].unwrap();
                for &(y, _) in &stencil.rows[x] {
                    if dist[y].is_none() {
                        dist[y] = Some(d + 1);
                        queue.push_back(y);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Choice of g in the Lax pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "g")]
pub enum GChoice {
    Identity,
    /// `g(D) = -log(1 + cD)`, so that `e^{-t g(D)} = (1 + cD)^t`.
    NegLogOnePlusCD { c: f64 },
}

impl fmt::Display for GChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GChoice::Identity => write!(f, "identity"),
            GChoice::NegLogOnePlusCD { c } => write!(f, "neg_log_1_plus_cD(c={c})"),
        }
    }
}

impl GChoice {
    fn check(&self, norm: f64) -> Result<()> {
        if let GChoice::NegLogOnePlusCD { c } = *self {
            if !(c * norm < 1.0) || c < 0.0 {
                return Err(Error::SpectralRadiusExceeded(c * norm));
            }
        }
        Ok(())
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            GChoice::Identity => x,
            GChoice::NegLogOnePlusCD { c } => -(1.0 + c * x).ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qr,
    Ode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl OperatorMatrix {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = match self {
            OperatorMatrix::Real(m) => SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect(),
            OperatorMatrix::Complex(m) => SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect(),
        };
        v.sort_by(f64::total_cmp);
        v
    }

    /// `max |A - A*|`
    pub fn hermitian_error(&self) -> f64 {
        match self {
            OperatorMatrix::Real(m) => (m - m.transpose()).amax(),
            OperatorMatrix::Complex(m) => (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    pub fn max_imaginary(&self) -> f64 {
        match self {
            OperatorMatrix::Real(_) => 0.0,
            OperatorMatrix::Complex(m) => m.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        }
    }
}

/// Snapshot of a deformed Dirac operator.
#[derive(Clone, Debug)]
pub struct DeformedOperator {
    pub t: f64,
    pub method: Method,
    pub g: GChoice,
    pub matrix: OperatorMatrix,
    /// Orthogonal factor of the QR deformation.
    pub q: Option<DMatrix<f64>>,
    /// `‖sort(eig(D_t)) - sort(eig(D_0))‖∞`
    pub eig_drift: f64,
}

impl DeformedOperator {
    /// Largest `|Q[x][y]|` over pairs further apart than `radius`.
    pub fn q_outside_cone(&self, dist: &[Vec<Option<u32>>], radius: u32) -> Option<f64> {
        self.q.as_ref().map(|q| outside_cone(q, dist, radius))
    }

    /// `{"t":, "eig_drift":, "offdiag_pattern_ok":}`; the pattern is only
    /// checked for the causal choice of g at integer times.
    pub fn to_json(&self, dist: Option<&[Vec<Option<u32>>]>) -> serde_json::Value {
        let pattern = match (dist, self.g, integer_time(self.t)) {
            (Some(d), GChoice::NegLogOnePlusCD { .. }, Some(r)) if r >= 0 => self
                .q_outside_cone(d, r as u32)
                .map(|m| m < PATTERN_TOLERANCE),
            _ => None,
        };
        json!({
            "t": self.t,
            "method": self.method,
            "eig_drift": self.eig_drift,
            "hermitian_error": self.matrix.hermitian_error(),
            "max_imaginary": self.matrix.max_imaginary(),
            "offdiag_pattern_ok": pattern,
        })
    }
}

/// Largest `|m[x][y]|` with distance(x, y) > radius.
pub fn outside_cone(m: &DMatrix<f64>, dist: &[Vec<Option<u32>>], radius: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..m.nrows() {
        for y in 0..m.ncols() {
            if dist[x][y].is_none_or(|d| d > radius) {
                worst = worst.max(m[(x, y)].abs());
            }
        }
    }
    worst
}

fn integer_time(t: f64) -> Option<i64> {
    (t.fract() == 0.0 && t.abs() < 1e6).then_some(t as i64)
}

fn drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `e^{-t g(D)}`; for the causal g at integer `t >= 0` this is the
/// matrix power `(1 + cD)^t`, whose zero pattern is exact.
pub fn propagator(d: &DMatrix<f64>, spectrum: &SymmetricSpectrum, t: f64, g: GChoice) -> DMatrix<f64> {
    if let (GChoice::NegLogOnePlusCD { c }, Some(p)) = (g, integer_time(t)) {
        if p >= 0 {
            let n = d.nrows();
            let step = DMatrix::identity(n, n) + d * c;
            let mut acc = DMatrix::identity(n, n);
            for _ in 0..p {
                acc = &acc * &step;
            }
            return acc;
        }
    }
    spectrum.apply(|l| (-t * g.eval(l)).exp())
}

/// QR factorization with a non-negative diagonal in R.
pub fn positive_qr(a: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    for i in 0..r.nrows() {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// `e^{-t g(D)} = Q_t R_t`, `D_t = Q_t^T D Q_t`.
pub fn lax_deform_qr(g: &SimplicialComplex, t: f64, choice: GChoice) -> Result<DeformedOperator> {
    let d = dirac(g).to_f64().entries;
    let spectrum = SymmetricSpectrum::new(d.clone());
    choice.check(spectrum.spectral_norm())?;
    Ok(deform_qr_with(&d, &spectrum, t, choice))
}

/// QR deformation at several times, sharing one eigendecomposition.
pub fn lax_deform_qr_grid(g: &SimplicialComplex, times: &[f64], choice: GChoice) -> Result<Vec<DeformedOperator>> {
    let d = dirac(g).to_f64().entries;
    let spectrum = SymmetricSpectrum::new(d.clone());
    choice.check(spectrum.spectral_norm())?;
    Ok(times.iter().map(|&t| deform_qr_with(&d, &spectrum, t, choice)).collect())
}

fn deform_qr_with(d: &DMatrix<f64>, spectrum: &SymmetricSpectrum, t: f64, choice: GChoice) -> DeformedOperator {
    let (q, _) = positive_qr(propagator(d, spectrum, t, choice));
    let dt = q.transpose() * d * &q;
    let dt = (&dt + dt.transpose()) * 0.5;
    let matrix = OperatorMatrix::Real(dt);
    let eig_drift = drift(&matrix.eigenvalues(), &sorted_eigenvalues(d));
    DeformedOperator {
        t,
        method: Method::Qr,
        g: choice,
        matrix,
        q: Some(q),
        eig_drift,
    }
}

fn sorted_eigenvalues(d: &DMatrix<f64>) -> Vec<f64> {
    OperatorMatrix::Real(d.clone()).eigenvalues()
}

/// Settings of the RK4 integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeConfig {
    pub dt: f64,
    pub g: GChoice,
    pub c_imag: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            dt: 1e-3,
            g: GChoice::Identity,
            c_imag: 0.0,
        }
    }
}

fn g_of(m: &DMatrix<Complex64>, g: GChoice) -> DMatrix<Complex64> {
    match g {
        GChoice::Identity => m.clone(),
        GChoice::NegLogOnePlusCD { .. } => {
            let eig = SymmetricEigen::new(m.clone());
            let v = &eig.eigenvectors;
            let f = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(g.eval(l), 0.0)));
            v * f * v.adjoint()
        }
    }
}

/// `[g^+ - g^- + i c g^0, D]`
fn lax_rhs(m: &DMatrix<Complex64>, g: GChoice, c_imag: f64) -> DMatrix<Complex64> {
    let gm = g_of(m, g);
    let n = m.nrows();
    let b = DMatrix::from_fn(n, n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Less => gm[(r, c)],
        std::cmp::Ordering::Greater => -gm[(r, c)],
        std::cmp::Ordering::Equal => Complex64::new(0.0, c_imag) * gm[(r, c)],
    });
    &b * m - m * &b
}

fn rk4_step(m: &DMatrix<Complex64>, h: f64, cfg: &OdeConfig) -> DMatrix<Complex64> {
    let scale = |a: &DMatrix<Complex64>, s: f64| a * Complex64::new(s, 0.0);
    let k1 = lax_rhs(m, cfg.g, cfg.c_imag);
    let k2 = lax_rhs(&(m + scale(&k1, h / 2.0)), cfg.g, cfg.c_imag);
    let k3 = lax_rhs(&(m + scale(&k2, h / 2.0)), cfg.g, cfg.c_imag);
    let k4 = lax_rhs(&(m + scale(&k3, h)), cfg.g, cfg.c_imag);
    m + scale(&(k1 + scale(&k2, 2.0) + scale(&k3, 2.0) + k4), h / 6.0)
}

/// RK4 trajectory of the Lax ODE sampled at `times` (non-negative,
/// non-decreasing). Fails with `StepSizeTooLarge` if the spectrum drifts
/// beyond [`ODE_DRIFT_TOLERANCE`].
pub fn lax_deform_ode(g: &SimplicialComplex, times: &[f64], cfg: OdeConfig) -> Result<Vec<DeformedOperator>> {
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(cfg.c_imag >= 0.0) {
        return Err(Error::InvalidArgument(format!("c_imag must be non-negative, got {}", cfg.c_imag)));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("ODE times must be non-negative and non-decreasing".into()));
    }
    let d = dirac(g).to_f64().entries;
    let initial = sorted_eigenvalues(&d);
    cfg.g.check(initial.iter().fold(0.0, |m: f64, v| m.max(v.abs())))?;

    let mut m = d.map(|x| Complex64::new(x, 0.0));
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while target - now > 1e-15 {
            let h = cfg.dt.min(target - now);
            m = rk4_step(&m, h, &cfg);
            now = if target - now <= cfg.dt { target } else { now + h };
        }
        let matrix = OperatorMatrix::Complex(m.clone());
        let eig_drift = drift(&matrix.eigenvalues(), &initial);
        if !(eig_drift <= ODE_DRIFT_TOLERANCE) {
            return Err(Error::StepSizeTooLarge {
                drift: eig_drift,
                tolerance: ODE_DRIFT_TOLERANCE,
            });
        }
        out.push(DeformedOperator {
            t: target,
            method: Method::Ode,
            g: cfg.g,
            matrix,
            q: None,
            eig_drift,
        });
    }
    Ok(out)
}

/// Non-zero entries of D row by row.
struct Stencil {
    rows: Vec<Vec<(usize, i64)>>,
}

impl Stencil {
    fn new(g: &SimplicialComplex) -> Self {
        let d = dirac(g).entries;
        let rows = (0..d.nrows())
            .map(|r| (0..d.ncols()).filter(|&c| d[(r, c)] != 0).map(|c| (c, d[(r, c)])).collect())
            .collect();
        Stencil { rows }
    }

    fn apply<T: Num + Clone + FromPrimitive>(&self, u: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(T::zero(), |acc, (j, s)| {
                    acc + T::from_i64(*s).expect("small integer") * u[*j].clone()
                })
            })
            .collect()
    }
}

/// Two consecutive iterates of `u_{m+1} = 2cD u_m - u_{m-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevState<T> {
    pub c: T,
    pub prev: Vec<T>,
    pub curr: Vec<T>,
    pub step: usize,
}

/// Causal evolution on l²(G), exact when `T` is a rational type.
pub struct Chebyshev<T> {
    stencil: Stencil,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Num + Clone + FromPrimitive + ToPrimitive> Chebyshev<T> {
    /// Fails unless `‖cD‖₂ < 1`.
    pub fn new(g: &SimplicialComplex, c: &T) -> Result<Self> {
        let c = c.to_f64().unwrap_or(f64::INFINITY);
        let norm = SymmetricSpectrum::new(dirac(g).to_f64().entries).spectral_norm();
        if !(c.abs() * norm < 1.0) {
            return Err(Error::SpectralRadiusExceeded(c.abs() * norm));
        }
        Ok(Chebyshev {
            stencil: Stencil::new(g),
            _marker: std::marker::PhantomData,
        })
    }

    pub fn apply_cd(&self, c: &T, u: &[T]) -> Vec<T> {
        self.stencil.apply(u).into_iter().map(|v| c.clone() * v).collect()
    }

    /// Starting pair `(u0, cD u0)`, for which iterate m is `T_m(cD) u0`.
    pub fn start(&self, c: T, u0: Vec<T>) -> ChebyshevState<T> {
        let u1 = self.apply_cd(&c, &u0);
        ChebyshevState {
            c,
            prev: u0,
            curr: u1,
            step: 1,
        }
    }

    pub fn step(&self, state: &ChebyshevState<T>) -> ChebyshevState<T> {
        let two = T::one() + T::one();
        let next = self
            .stencil
            .apply(&state.curr)
            .into_iter()
            .zip(&state.prev)
            .map(|(du, p)| two.clone() * state.c.clone() * du - p.clone())
            .collect();
        ChebyshevState {
            c: state.c.clone(),
            prev: state.curr.clone(),
            curr: next,
            step: state.step + 1,
        }
    }

    /// Advances `n` steps from `(u0, u1)`.
    pub fn evolve(&self, c: T, u0: Vec<T>, u1: Vec<T>, n: usize) -> ChebyshevState<T> {
        let mut state = ChebyshevState {
            c,
            prev: u0,
            curr: u1,
            step: 1,
        };
        for _ in 0..n {
            state = self.step(&state);
        }
        state
    }
}

/// One step of the Chebyshev recursion.
pub fn chebyshev_step<T: Num + Clone + FromPrimitive + ToPrimitive>(
    g: &SimplicialComplex,
    state: &ChebyshevState<T>,
) -> Result<ChebyshevState<T>> {
    Ok(Chebyshev::new(g, &state.c)?.step(state))
}

/// `n` steps of the Chebyshev recursion from `(u0, u1)`.
pub fn chebyshev_evolve<T: Num + Clone + FromPrimitive + ToPrimitive>(
    g: &SimplicialComplex,
    c: T,
    u0: Vec<T>,
    u1: Vec<T>,
    n: usize,
) -> Result<ChebyshevState<T>> {
    for u in [&u0, &u1] {
        if u.len() != g.len() {
            return Err(Error::InvalidArgument(format!(
                "state has length {}, complex has {} simplices",
                u.len(),
                g.len()
            )));
        }
    }
    Ok(Chebyshev::new(g, &c)?.evolve(c, u0, u1, n))
}

/// `T_m(cD)` built from the three-term recursion.
pub fn chebyshev_matrix(g: &SimplicialComplex, c: f64, m: usize) -> DMatrix<f64> {
    let cd = dirac(g).to_f64().entries * c;
    let n = cd.nrows();
    let mut prev = DMatrix::identity(n, n);
    if m == 0 {
        return prev;
    }
    let mut curr = cd.clone();
    for _ in 1..m {
        let next = &cd * &curr * 2.0 - &prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// `str(exp(i t arccos(cD)))`.
pub fn unitary_super_trace(g: &SimplicialComplex, c: f64, t: f64) -> Complex64 {
    let spectrum = SymmetricSpectrum::new(dirac(g).to_f64().entries);
    let diag = spectrum.diagonal_complex(|l| Complex64::new(0.0, t * (c * l).clamp(-1.0, 1.0).acos()).exp());
    g.simplices()
        .iter()
        .zip(diag)
        .map(|(x, d)| d * x.omega() as f64)
        .sum()
}
