//! Eigenvalue and eigenfunction derivatives of the twisted transition
//! operator at the trivial character, and the analytic `a₁`.
//!
//! Every polynomial here is a homogeneous polynomial in `u ∈ ℝᵈ`, where
//! `u` are coordinates of the twisting covector in an orthonormal basis of
//! the Albanese metric (unless a different frame is passed explicitly).
//! Polynomials are stored as fully symmetric coefficient tensors `T` with
//! `P(u) = Σ T_{i…l} u_i⋯u_l`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::albanese::{LatticeAnalysis, LatticeState};
use crate::error::Result;
use crate::linalg::ConstrainedSolver;
use crate::spectral::transition_matrix;

/// Dense symmetric tensor of order `order` over `ℝᵈ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor {
    pub dim: usize,
    pub order: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            data: vec![0.0; dim.pow(order as u32)],
        }
    }

    fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.order);
        ix.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, ix: &[usize]) -> f64 {
        self.data[self.offset(ix)]
    }

    pub fn set(&mut self, ix: &[usize], v: f64) {
        let o = self.offset(ix);
        self.data[o] = v;
    }

    fn multi_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.order {
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..self.dim).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// `Σ T_{i…} u_i⋯`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.multi_indices()
            .iter()
            .map(|ix| self.get(ix) * ix.iter().map(|&i| u[i]).product::<f64>())
            .sum()
    }

    /// Symmetric coefficient tensor of a homogeneous polynomial, by
    /// polarization: `T(e_{i₁},…,e_{i_k}) = (1/k!) Σ_S (−1)^{k−|S|} P(Σ_{j∈S} e_{i_j})`.
    pub fn from_polynomial(dim: usize, order: usize, p: impl Fn(&[f64]) -> f64) -> Self {
        let mut t = Self::zeros(dim, order);
        let factorial: f64 = (1..=order).map(|k| k as f64).product();
        for ix in t.multi_indices() {
            if ix.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let mut acc = 0.0;
            for mask in 0u32..(1 << order) {
                let mut u = vec![0.0; dim];
                for (j, &i) in ix.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        u[i] += 1.0;
                    }
                }
                let sign = if (order as u32 - mask.count_ones()).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                acc += sign * p(&u);
            }
            let v = acc / factorial;
            for perm in permutations(&ix) {
                t.set(&perm, v);
            }
        }
        t
    }

    /// Largest difference between an entry and any of its index permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ix in self.multi_indices() {
            let v = self.get(&ix);
            for p in permutations(&ix) {
                worst = worst.max((self.get(&p) - v).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            order: self.order,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }
}

fn permutations(ix: &[usize]) -> Vec<Vec<usize>> {
    if ix.len() <= 1 {
        return vec![ix.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..ix.len() {
        let mut rest = ix.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Solutions of the eigenfunction-derivative systems and the derivative
/// polynomials of `λ(u) = −log μ₀(χ_u)` at `u = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationData {
    pub dim: usize,
    /// `r_i(x)` with `ψ₀′(x) = 2π√−1·|V₀|^{1/2}·Σ r_i(x)u_i`.
    pub psi1: Vec<Vec<f64>>,
    /// `φ₀″(x) = Σ phi2[x]_{ij} u_i u_j`.
    pub phi2: Vec<Tensor>,
    /// `ψ₀″(x) = Σ psi2[x]_{ij} u_i u_j`.
    pub psi2: Vec<Tensor>,
    /// `λ″(u) = Σ lam2_{ij} u_i u_j`.
    pub lam2: Tensor,
    /// `λ⁽³⁾(u) = √−1·Σ lam3_{ijk} u_i u_j u_k`, from the `φ₀″` formula.
    pub lam3: Tensor,
    /// The same quantity from the `ψ₀′` formula.
    pub lam3_psi: Tensor,
    /// `λ⁽⁴⁾(u) = Σ lam4_{ijkl} u_i u_j u_k u_l`, from the `ψ₀′, ψ₀″` formula.
    pub lam4: Tensor,
    /// `⟨γ_p, ·⟩` in the frame of the forms.
    pub gamma: Vec<f64>,
    /// Largest residual among the solved systems.
    pub residual: f64,
}

impl PerturbationData {
    /// `λ′(u) = −2π√−1⟨γ_p, u⟩`.
    pub fn lambda1(&self, u: &[f64]) -> Complex<f64> {
        let g: f64 = self.gamma.iter().zip(u).map(|(a, b)| a * b).sum();
        Complex::new(0.0, -2.0 * PI * g)
    }

    pub fn lambda2(&self, u: &[f64]) -> Complex<f64> {
        Complex::new(self.lam2.eval(u), 0.0)
    }

    pub fn lambda3(&self, u: &[f64]) -> Complex<f64> {
        Complex::new(0.0, self.lam3.eval(u))
    }

    pub fn lambda4(&self, u: &[f64]) -> Complex<f64> {
        Complex::new(self.lam4.eval(u), 0.0)
    }

    /// Side conditions `Σψ₀′ = 0`, `Σφ₀″ = 0`, `Σψ₀″ = −|V₀|Σφ₀″m`, worst
    /// coefficient violation.
    pub fn side_condition_defect(&self, m: &[f64]) -> f64 {
        let n = self.psi1.len();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            worst = worst.max(self.psi1.iter().map(|r| r[i]).sum::<f64>().abs());
        }
        for k in 0..self.dim * self.dim {
            let s_phi: f64 = self.phi2.iter().map(|t| t.data[k]).sum();
            let s_phi_m: f64 = self.phi2.iter().zip(m).map(|(t, mm)| t.data[k] * mm).sum();
            let s_psi: f64 = self.psi2.iter().map(|t| t.data[k]).sum();
            worst = worst
                .max(s_phi.abs())
                .max((s_psi + n as f64 * s_phi_m).abs());
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// [`eigen_derivatives_with`] in the Albanese-orthonormal frame `w(e) = A·dΦ(e)`.
pub fn eigen_derivatives(a: &LatticeAnalysis) -> Result<PerturbationData> {
    eigen_derivatives_with(a, &a.embedded_displacements())
}

/// Solve the derivative systems with 1-form values `forms[e] ∈ ℝᵈ`, i.e.
/// `ω(e) = ⟨u, forms[e]⟩`.
pub fn eigen_derivatives_with(a: &LatticeAnalysis, forms: &[Vec<f64>]) -> Result<PerturbationData> {
    let g = &a.graph;
    let edges = g.edges();
    let n = g.n_vertices();
    let d = a.dim();
    let m = &a.measure.values;
    let sv = (n as f64).sqrt();
    let pi2 = PI * PI;

    let l = transition_matrix(g);
    let eye = DMatrix::identity(n, n);
    let ones = vec![1.0; n];
    let solve_t = ConstrainedSolver::new(&(&eye - l.transpose()), &ones)?;
    let solve = ConstrainedSolver::new(&(&eye - &l), &ones)?;
    let mut residual: f64 = 0.0;

    // p(ē) and m̃(e) per edge.
    let p_back: Vec<f64> = edges.iter().map(|e| edges[e.inverse].probability).collect();
    let weight: Vec<f64> = edges.iter().map(|e| e.probability * m[e.origin]).collect();
    let gamma: Vec<f64> = (0..d)
        .map(|i| weight.iter().zip(forms).map(|(w, f)| w * f[i]).sum())
        .collect();

    // ψ₀′: (I − ᵗL) r_i = Σ_{E_x} p(ē)w_i(e)m(t(e)) − m(x)·Σ_{E₀} p(ē)w_i(e)m(t(e)).
    let mut psi1 = vec![vec![0.0; d]; n];
    for i in 0..d {
        let total: f64 = edges
            .iter()
            .enumerate()
            .map(|(k, e)| p_back[k] * forms[k][i] * m[e.terminus])
            .sum();
        let rhs: Vec<f64> = (0..n)
            .map(|x| {
                g.out_edges(x)
                    .iter()
                    .map(|&k| p_back[k] * forms[k][i] * m[edges[k].terminus])
                    .sum::<f64>()
                    - m[x] * total
            })
            .collect();
        let r = solve_t.solve(&rhs, 0.0, "ψ₀′ system")?;
        for x in 0..n {
            psi1[x][i] = r[x];
        }
    }

    // φ₀″: (I − L)φ = −4π²|V₀|^{−1/2}(Σ_{E_x} p w_i w_j − Σ_{E₀} p w_i w_j m(o)), Σφ = 0.
    let mut phi2 = vec![Tensor::zeros(d, 2); n];
    let mut psi2 = vec![Tensor::zeros(d, 2); n];
    for i in 0..d {
        for j in i..d {
            let ww: Vec<f64> = forms.iter().map(|f| f[i] * f[j]).collect();
            let total: f64 = (0..edges.len()).map(|k| weight[k] * ww[k]).sum();
            let rhs: Vec<f64> = (0..n)
                .map(|x| {
                    let local: f64 = g
                        .out_edges(x)
                        .iter()
                        .map(|&k| edges[k].probability * ww[k])
                        .sum();
                    -4.0 * pi2 / sv * (local - total)
                })
                .collect();
            let phi = solve.solve(&rhs, 0.0, "φ₀″ system")?;

            // ψ₀″ with ψ₀′ = 2π√−1|V₀|^{1/2} r folded into real coefficients.
            let back_total: f64 = (0..edges.len())
                .map(|k| p_back[k] * ww[k] * m[edges[k].terminus])
                .sum();
            let rhs: Vec<f64> = (0..n)
                .map(|x| {
                    let mut cross = 0.0;
                    let mut second = 0.0;
                    for &k in g.out_edges(x) {
                        let t = edges[k].terminus;
                        cross += p_back[k] * (forms[k][i] * psi1[t][j] + forms[k][j] * psi1[t][i]);
                        second += p_back[k] * ww[k] * m[t];
                    }
                    cross += gamma[i] * psi1[x][j] + gamma[j] * psi1[x][i];
                    -8.0 * pi2 * sv * 0.5 * cross - 4.0 * pi2 * sv * (second - m[x] * back_total)
                })
                .collect();
            let side = -(n as f64) * phi.iter().zip(m).map(|(a, b)| a * b).sum::<f64>();
            let psi = solve_t.solve(&rhs, side, "ψ₀″ system")?;
            for x in 0..n {
                phi2[x].set(&[i, j], phi[x]);
                phi2[x].set(&[j, i], phi[x]);
                psi2[x].set(&[i, j], psi[x]);
                psi2[x].set(&[j, i], psi[x]);
            }
        }
    }

    // Residual of the assembled systems, recomputed independently.
    let check = |u: &[f64]| -> f64 {
        let om: Vec<f64> = forms.iter().map(|f| dot(f, u)).collect();
        let ru: Vec<f64> = psi1.iter().map(|r| dot(r, u)).collect();
        let lr: Vec<f64> = (0..n)
            .map(|x| ru[x] - (0..n).map(|y| l[(y, x)] * ru[y]).sum::<f64>())
            .collect();
        let total: f64 = (0..edges.len())
            .map(|k| p_back[k] * om[k] * m[edges[k].terminus])
            .sum();
        (0..n)
            .map(|x| {
                let local: f64 = g
                    .out_edges(x)
                    .iter()
                    .map(|&k| p_back[k] * om[k] * m[edges[k].terminus])
                    .sum();
                (lr[x] - (local - m[x] * total)).abs()
            })
            .fold(0.0, f64::max)
    };
    for i in 0..d {
        let mut u = vec![0.0; d];
        u[i] = 1.0;
        residual = residual.max(check(&u));
    }

    let polys = Polynomials {
        a,
        forms,
        weight: &weight,
        gamma: &gamma,
        psi1: &psi1,
        phi2: &phi2,
        psi2: &psi2,
        sv,
    };
    let lam2 = Tensor::from_polynomial(d, 2, |u| polys.lambda2(u));
    let lam3 = Tensor::from_polynomial(d, 3, |u| polys.lambda3_phi(u));
    let lam3_psi = Tensor::from_polynomial(d, 3, |u| polys.lambda3_psi(u));
    let lam4 = Tensor::from_polynomial(d, 4, |u| polys.lambda4(u));

    Ok(PerturbationData {
        dim: d,
        psi1,
        phi2,
        psi2,
        lam2,
        lam3,
        lam3_psi,
        lam4,
        gamma,
        residual,
    })
}

struct Polynomials<'a> {
    a: &'a LatticeAnalysis,
    forms: &'a [Vec<f64>],
    weight: &'a [f64],
    gamma: &'a [f64],
    psi1: &'a [Vec<f64>],
    phi2: &'a [Tensor],
    psi2: &'a [Tensor],
    sv: f64,
}

impl Polynomials<'_> {
    fn omega(&self, u: &[f64]) -> Vec<f64> {
        self.forms.iter().map(|f| dot(f, u)).collect()
    }

    fn moment(&self, om: &[f64], k: i32) -> f64 {
        self.weight.iter().zip(om).map(|(w, o)| w * o.powi(k)).sum()
    }

    fn g(&self, u: &[f64]) -> f64 {
        dot(self.gamma, u)
    }

    /// `‖ω‖² = Σ m̃ω² − ⟨γ_p, ω⟩²`.
    fn norm2(&self, u: &[f64]) -> f64 {
        let om = self.omega(u);
        self.moment(&om, 2) - self.g(u).powi(2)
    }

    fn lambda2(&self, u: &[f64]) -> f64 {
        4.0 * PI * PI * self.norm2(u)
    }

    fn common3(&self, u: &[f64]) -> f64 {
        let om = self.omega(u);
        let g = self.g(u);
        8.0 * PI.powi(3) * self.moment(&om, 3)
            - 24.0 * PI.powi(3) * self.norm2(u) * g
            - 8.0 * PI.powi(3) * g.powi(3)
    }

    fn lambda3_phi(&self, u: &[f64]) -> f64 {
        let om = self.omega(u);
        let phi: Vec<f64> = self.phi2.iter().map(|t| t.eval(u)).collect();
        let edges = self.a.graph.edges();
        let m = &self.a.measure.values;
        let s: f64 = edges
            .iter()
            .zip(&om)
            .map(|(e, o)| e.probability * o * (phi[e.terminus] - phi[e.origin]) * m[e.origin])
            .sum();
        self.common3(u) - 6.0 * PI * self.sv * s
    }

    /// `Σ_e p(e)ω(e)^k r(o(e))·u`.
    fn psi_moment(&self, u: &[f64], om: &[f64], k: i32) -> f64 {
        let ru: Vec<f64> = self.psi1.iter().map(|r| dot(r, u)).collect();
        self.a
            .graph
            .edges()
            .iter()
            .zip(om)
            .map(|(e, o)| e.probability * o.powi(k) * ru[e.origin])
            .sum()
    }

    fn lambda3_psi(&self, u: &[f64]) -> f64 {
        let om = self.omega(u);
        self.common3(u) - 24.0 * PI.powi(3) * self.psi_moment(u, &om, 2)
    }

    fn lambda4(&self, u: &[f64]) -> f64 {
        let om = self.omega(u);
        let g = self.g(u);
        let n2 = self.norm2(u);
        let pi4 = PI.powi(4);
        let psi: Vec<f64> = self.psi2.iter().map(|t| t.eval(u)).collect();
        let psi_sum: f64 = psi.iter().sum();
        let m = &self.a.measure.values;
        let second: f64 = self
            .a
            .graph
            .edges()
            .iter()
            .zip(&om)
            .map(|(e, o)| e.probability * o * o * (psi[e.origin] - psi_sum * m[e.origin]))
            .sum();
        -16.0 * pi4 * self.moment(&om, 4)
            + 48.0 * pi4 * n2 * n2
            + 64.0 * pi4 * g * self.moment(&om, 3)
            - 96.0 * pi4 * g * g * n2
            - 48.0 * pi4 * g.powi(4)
            - 192.0 * pi4 * g * self.psi_moment(u, &om, 2)
            + 64.0 * pi4 * self.psi_moment(u, &om, 3)
            + 24.0 * PI * PI / self.sv * second
    }
}

/// Coefficients `𝔮_α` of the expansion of the twisted heat kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QTensors {
    pub q1: Vec<f64>,
    pub q2: Tensor,
    pub q3: Tensor,
    pub q4: Tensor,
}

/// Extract `𝔮` for the vertex pair `(x0, y0)` of the analysed graph.
pub fn q_tensors(a: &LatticeAnalysis, p: &PerturbationData, x0: usize, y0: usize) -> QTensors {
    let d = p.dim;
    let sv = (a.graph.n_vertices() as f64).sqrt();
    let my = a.m(y0);
    let q1 = p.psi1[y0].iter().map(|r| -2.0 * PI * r).collect();
    let mut q2 = Tensor::zeros(d, 2);
    for i in 0..d {
        for j in 0..d {
            let v = -(sv * my * p.phi2[x0].get(&[i, j]) + p.psi2[y0].get(&[i, j]) / sv);
            q2.set(&[i, j], v);
        }
    }
    QTensors {
        q1,
        q2,
        q3: p.lam3.scaled(-1.0),
        q4: p.lam4.clone(),
    }
}

/// The terms of the `a₁` formula, for reporting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Terms {
    pub linear: f64,
    pub cubic_linear: f64,
    pub quadratic_trace: f64,
    pub mixed: f64,
    pub quartic_trace: f64,
    pub cubic_square: f64,
}

impl A1Terms {
    pub fn total(&self) -> f64 {
        self.linear
            + self.cubic_linear
            + self.quadratic_trace
            + self.mixed
            + self.quartic_trace
            + self.cubic_square
    }
}

/// `a₁` from the q-tensors at orthonormal displacement `z`.
///
/// The cubic-square term is `−(3Σ𝔮_{iij}𝔮_{jkk} + 2Σ𝔮_{ijk}²)/(1536π⁶)`, the
/// Gaussian expectation of the squared cubic term.
pub fn a1_terms(q: &QTensors, my: f64, z: &[f64]) -> A1Terms {
    let d = q.q1.len();
    let r = 0..d;
    let mut t = A1Terms {
        linear: dot(&q.q1, z) / (2.0 * PI * my),
        cubic_linear: 0.0,
        quadratic_trace: -r.clone().map(|i| q.q2.get(&[i, i])).sum::<f64>() / (8.0 * PI * PI * my),
        mixed: 0.0,
        quartic_trace: 0.0,
        cubic_square: 0.0,
    };
    let (mut mixed, mut quartic, mut contract, mut full) = (0.0, 0.0, 0.0, 0.0);
    let trace3: Vec<f64> = r
        .clone()
        .map(|j| r.clone().map(|i| q.q3.get(&[i, i, j])).sum())
        .collect();
    for i in 0..d {
        t.cubic_linear += trace3[i] * z[i] / (16.0 * PI.powi(3));
        for j in 0..d {
            mixed += q.q1[i] * q.q3.get(&[i, j, j]);
            quartic += q.q4.get(&[i, i, j, j]);
            for k in 0..d {
                full += q.q3.get(&[i, j, k]).powi(2);
            }
        }
        contract += trace3[i] * trace3[i];
    }
    t.mixed = -mixed / (32.0 * PI.powi(4) * my);
    t.quartic_trace = -quartic / (128.0 * PI.powi(4));
    t.cubic_square = -(3.0 * contract + 2.0 * full) / (1536.0 * PI.powi(6));
    t
}

/// The formula exactly as printed, with `Σ𝔮_{ij}z_j` in the second term and
/// `−5/(1536π⁶)Σ𝔮_{iij}𝔮_{jkk}` as the last one.
pub fn a1_terms_printed(q: &QTensors, my: f64, z: &[f64]) -> A1Terms {
    let d = q.q1.len();
    let mut t = a1_terms(q, my, z);
    t.cubic_linear = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| q.q2.get(&[i, j]) * z[j])
        .sum::<f64>()
        / (16.0 * PI.powi(3));
    let trace3: Vec<f64> = (0..d)
        .map(|j| (0..d).map(|i| q.q3.get(&[i, i, j])).sum())
        .collect();
    t.cubic_square = -5.0 * trace3.iter().map(|x| x * x).sum::<f64>() / (1536.0 * PI.powi(6));
    t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Analytic {
    pub value: f64,
    pub printed: f64,
    pub z: Vec<f64>,
    pub terms: A1Terms,
    pub q: QTensors,
}

/// Analytic `a₁(π(x), π(y), γ_p; z)` with `z = A(Φ(y) − Φ(x) − nρ)`.
pub fn a1_analytic(
    a: &LatticeAnalysis,
    p: &PerturbationData,
    x: &LatticeState,
    y: &LatticeState,
    n: usize,
) -> A1Analytic {
    let z = a.z(n, x, y);
    let q = q_tensors(a, p, x.vertex, y.vertex);
    let my = a.m(y.vertex);
    let terms = a1_terms(&q, my, &z);
    let printed = a1_terms_printed(&q, my, &z).total();
    A1Analytic {
        value: terms.total(),
        printed,
        z,
        terms,
        q,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdOrder {
    pub order: usize,
    pub analytic: [f64; 2],
    pub fd: [f64; 2],
    pub fd_half: [f64; 2],
    pub richardson: [f64; 2],
    pub error: f64,
    pub error_half: f64,
    pub error_richardson: f64,
    /// `error / error_half`; about 4 when the O(h²) truncation dominates.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdReport {
    pub direction: Vec<f64>,
    pub h: f64,
    pub orders: Vec<FdOrder>,
}

fn stencils(f: &dyn Fn(f64) -> Result<Complex<f64>>, h: f64) -> Result<[Complex<f64>; 4]> {
    let (m2, m1, z, p1, p2) = (f(-2.0 * h)?, f(-h)?, f(0.0)?, f(h)?, f(2.0 * h)?);
    Ok([
        (p1 - m1) / (2.0 * h),
        (p1 - z * 2.0 + m1) / (h * h),
        (p2 - p1 * 2.0 + m1 * 2.0 - m2) / (2.0 * h.powi(3)),
        (p2 - p1 * 4.0 + z * 6.0 - m1 * 4.0 + m2) / h.powi(4),
    ])
}

/// Central finite differences of `−log μ₀(χ_{t·u})` at `t = 0` against the
/// derivative polynomials, at steps `h` and `h/2`.
pub fn fd_crosscheck(
    a: &LatticeAnalysis,
    p: &PerturbationData,
    direction: &[f64],
    h: f64,
) -> Result<FdReport> {
    let forms = a.embedded_displacements();
    let f = |t: f64| -> Result<Complex<f64>> {
        let u: Vec<f64> = direction.iter().map(|x| x * t).collect();
        Ok(crate::spectral::perron_eigendata(&a.graph, &forms, &u)?.neg_log_mu())
    };
    let full = stencils(&f, h)?;
    let half = stencils(&f, h / 2.0)?;
    let analytic = [
        p.lambda1(direction),
        p.lambda2(direction),
        p.lambda3(direction),
        p.lambda4(direction),
    ];
    let pair = |z: Complex<f64>| [z.re, z.im];
    let orders = (0..4)
        .map(|k| {
            let rich = (half[k] * 4.0 - full[k]) / 3.0;
            let error = (full[k] - analytic[k]).norm();
            let error_half = (half[k] - analytic[k]).norm();
            FdOrder {
                order: k + 1,
                analytic: pair(analytic[k]),
                fd: pair(full[k]),
                fd_half: pair(half[k]),
                richardson: pair(rich),
                error,
                error_half,
                error_richardson: (rich - analytic[k]).norm(),
                ratio: error / error_half,
            }
        })
        .collect();
    Ok(FdReport {
        direction: direction.to_vec(),
        h,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarization_recovers_coefficients() {
        let p = |u: &[f64]| {
            3.0 * u[0].powi(4) + 12.0 * u[0] * u[0] * u[1] * u[1] - 2.0 * u[0] * u[1].powi(3)
        };
        let t = Tensor::from_polynomial(2, 4, p);
        assert!((t.get(&[0, 0, 0, 0]) - 3.0).abs() < 1e-12);
        assert!((t.get(&[0, 1, 0, 1]) - 2.0).abs() < 1e-12);
        assert!((t.get(&[1, 1, 1, 0]) + 0.5).abs() < 1e-12);
        assert!(t.symmetry_defect() == 0.0);
        let u = [0.3, -1.7];
        assert!((t.eval(&u) - p(&u)).abs() < 1e-12);
    }
}
