//! Exact n-step transition probabilities on the lattice.
//!
//! The distribution over states `(v, σ)` is propagated by dense convolution
//! sweeps over a fixed box that contains every state reachable within the
//! requested number of steps. Each target row is rebuilt from the source
//! rows in edge-list order, so the floating-point result does not depend on
//! how rows are scheduled across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::albanese::{LatticeAnalysis, LatticeState};
use crate::error::{Error, Result};
use crate::lattice::QuotientGraph;

pub const DEFAULT_STATE_CAP: u128 = 100_000_000;
const FLUSH: f64 = 1e-300;

#[derive(Clone, Debug)]
struct Support {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Support {
    fn point(dim: usize) -> Self {
        Self {
            lo: vec![0; dim],
            hi: vec![0; dim],
        }
    }

    fn empty(dim: usize) -> Self {
        Self {
            lo: vec![i64::MAX; dim],
            hi: vec![i64::MIN; dim],
        }
    }

    fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a > b)
    }

    fn union_shifted(&mut self, other: &Support, shift: &[i64]) {
        if other.is_empty() {
            return;
        }
        for k in 0..self.lo.len() {
            self.lo[k] = self.lo[k].min(other.lo[k] + shift[k]);
            self.hi[k] = self.hi[k].max(other.hi[k] + shift[k]);
        }
    }

    fn contains_prefix(&self, prefix: &[i64]) -> bool {
        !self.is_empty()
            && prefix
                .iter()
                .enumerate()
                .all(|(k, &c)| self.lo[k] <= c && c <= self.hi[k])
    }
}

#[derive(Clone, Debug)]
struct Step {
    origin: usize,
    p: f64,
    shift: Vec<i64>,
}

/// Propagates the distribution of the walk started at `(start, 0)`.
pub struct Propagator {
    dim: usize,
    n_vertices: usize,
    start: usize,
    n: usize,
    n_max: usize,
    lo: Vec<i64>,
    shape: Vec<usize>,
    incoming: Vec<Vec<Step>>,
    cur: Vec<Vec<f64>>,
    next: Vec<Vec<f64>>,
    support: Vec<Support>,
    stale: Vec<Support>,
}

impl Propagator {
    pub fn new(g: &QuotientGraph, start: usize, n_max: usize) -> Result<Self> {
        Self::with_cap(g, start, n_max, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(g: &QuotientGraph, start: usize, n_max: usize, cap: u128) -> Result<Self> {
        let dim = g.dim();
        let live: Vec<_> = g.edges().iter().filter(|e| e.probability > 0.0).collect();
        let mut lo = Vec::with_capacity(dim);
        let mut shape = Vec::with_capacity(dim);
        for k in 0..dim {
            let min = live
                .iter()
                .map(|e| e.translation[k])
                .min()
                .unwrap_or(0)
                .min(0);
            let max = live
                .iter()
                .map(|e| e.translation[k])
                .max()
                .unwrap_or(0)
                .max(0);
            lo.push(min * n_max as i64);
            shape.push(((max - min) * n_max as i64 + 1) as usize);
        }
        let cells: u128 = shape.iter().map(|&s| s as u128).product();
        let states = cells * g.n_vertices() as u128;
        if states > cap {
            return Err(Error::MemoryBudget { states, cap });
        }
        let cells = cells as usize;
        let n_vertices = g.n_vertices();
        let mut incoming = vec![Vec::new(); n_vertices];
        for e in &live {
            incoming[e.terminus].push(Step {
                origin: e.origin,
                p: e.probability,
                shift: e.translation.clone(),
            });
        }
        let mut cur = vec![vec![0.0; cells]; n_vertices];
        let mut support = vec![Support::empty(dim); n_vertices];
        let mut this = Self {
            dim,
            n_vertices,
            start,
            n: 0,
            n_max,
            lo,
            shape,
            incoming,
            cur: Vec::new(),
            next: vec![vec![0.0; cells]; n_vertices],
            support: Vec::new(),
            stale: vec![Support::empty(dim); n_vertices],
        };
        let origin = this.index(&vec![0; dim]).expect("origin inside the box");
        cur[start][origin] = 1.0;
        support[start] = Support::point(dim);
        this.cur = cur;
        this.support = support;
        Ok(this)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.start
    }

    fn index(&self, cell: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim {
            let off = cell[k] - self.lo[k];
            if off < 0 || off as usize >= self.shape[k] {
                return None;
            }
            idx = idx * self.shape[k] + off as usize;
        }
        Some(idx)
    }

    /// Probability of `(v, cell)` after the current number of steps.
    pub fn get(&self, v: usize, cell: &[i64]) -> f64 {
        self.index(cell).map_or(0.0, |i| self.cur[v][i])
    }

    /// Advance by one step.
    pub fn step(&mut self) {
        assert!(
            self.n < self.n_max,
            "propagator box was sized for {} steps",
            self.n_max
        );
        let d = self.dim;
        let row_len = self.shape[d - 1];
        let last_lo = self.lo[d - 1];
        let prefix_shape = &self.shape[..d - 1];
        let prefix_lo = &self.lo[..d - 1];

        let mut new_support = vec![Support::empty(d); self.n_vertices];
        for (t, steps) in self.incoming.iter().enumerate() {
            for s in steps {
                new_support[t].union_shifted(&self.support[s.origin], &s.shift);
            }
        }

        let cur = &self.cur;
        let support = &self.support;
        for t in 0..self.n_vertices {
            let steps = &self.incoming[t];
            let target = &new_support[t];
            let stale = &self.stale[t];
            self.next[t]
                .par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(r, row)| {
                    let mut prefix = vec![0i64; d - 1];
                    let mut rest = r;
                    for k in (0..d - 1).rev() {
                        prefix[k] = (rest % prefix_shape[k]) as i64 + prefix_lo[k];
                        rest /= prefix_shape[k];
                    }
                    if !target.contains_prefix(&prefix) {
                        if stale.contains_prefix(&prefix) {
                            row.fill(0.0);
                        }
                        return;
                    }
                    row.fill(0.0);
                    for s in steps {
                        let src = &support[s.origin];
                        let src_prefix: Vec<i64> =
                            prefix.iter().zip(&s.shift).map(|(a, b)| a - b).collect();
                        if !src.contains_prefix(&src_prefix) {
                            continue;
                        }
                        let mut src_row = 0usize;
                        for k in 0..d - 1 {
                            src_row =
                                src_row * prefix_shape[k] + (src_prefix[k] - prefix_lo[k]) as usize;
                        }
                        let shift = s.shift[d - 1];
                        let a = (src.lo[d - 1] + shift - last_lo) as usize;
                        let b = (src.hi[d - 1] + shift - last_lo) as usize;
                        let src_base = src_row * row_len;
                        let source = &cur[s.origin];
                        for j in a..=b {
                            let i = (j as i64 - shift) as usize;
                            row[j] += s.p * source[src_base + i];
                        }
                    }
                    for x in row.iter_mut() {
                        if *x < FLUSH {
                            *x = 0.0;
                        }
                    }
                });
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        self.stale = std::mem::replace(&mut self.support, new_support);
        self.n += 1;
    }

    /// Advance until `n` steps have been taken.
    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.step();
        }
    }

    /// Snapshot of the current distribution.
    pub fn table(&self) -> HeatKernelTable {
        HeatKernelTable {
            n: self.n,
            start: self.start,
            lo: self.lo.clone(),
            shape: self.shape.clone(),
            mass: self.cur.clone(),
        }
    }
}

/// Exact distribution of the walk after `n` steps from `(start, 0)`.
#[derive(Clone, Debug)]
pub struct HeatKernelTable {
    pub n: usize,
    pub start: usize,
    lo: Vec<i64>,
    shape: Vec<usize>,
    mass: Vec<Vec<f64>>,
}

impl HeatKernelTable {
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.mass.len()
    }

    fn index(&self, cell: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let off = cell[k] - self.lo[k];
            if off < 0 || off as usize >= self.shape[k] {
                return None;
            }
            idx = idx * self.shape[k] + off as usize;
        }
        Some(idx)
    }

    fn cell(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut c = vec![0; d];
        for k in (0..d).rev() {
            c[k] = (idx % self.shape[k]) as i64 + self.lo[k];
            idx /= self.shape[k];
        }
        c
    }

    pub fn get(&self, v: usize, cell: &[i64]) -> f64 {
        self.index(cell).map_or(0.0, |i| self.mass[v][i])
    }

    /// Every state with positive mass, ordered by vertex then cell.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Vec<i64>, f64)> + '_ {
        self.mass.iter().enumerate().flat_map(move |(v, m)| {
            m.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(move |(i, &p)| (v, self.cell(i), p))
        })
    }

    /// Every state in the table's box, zero or not.
    pub fn all_states(&self) -> impl Iterator<Item = (usize, Vec<i64>, f64)> + '_ {
        self.mass.iter().enumerate().flat_map(move |(v, m)| {
            m.iter()
                .enumerate()
                .map(move |(i, &p)| (v, self.cell(i), p))
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().flatten().sum()
    }

    /// Mass summed over cells, per vertex.
    pub fn vertex_marginal(&self) -> Vec<f64> {
        self.mass.iter().map(|m| m.iter().sum()).collect()
    }

    /// Inclusive cell bounds of the table's box.
    pub fn bounds(&self) -> Vec<(i64, i64)> {
        self.lo
            .iter()
            .zip(&self.shape)
            .map(|(&lo, &s)| (lo, lo + s as i64 - 1))
            .collect()
    }
}

/// Exact distribution after `n` steps from `(start, 0)` on the analysed graph.
pub fn exact_transition(a: &LatticeAnalysis, start: usize, n: usize) -> Result<HeatKernelTable> {
    exact_transition_on(&a.graph, start, n)
}

pub fn exact_transition_on(g: &QuotientGraph, start: usize, n: usize) -> Result<HeatKernelTable> {
    let mut prop = Propagator::new(g, start, n)?;
    prop.advance_to(n);
    Ok(prop.table())
}

/// `p(n, x, y)` on the analysed graph.
pub fn transition_probability(
    a: &LatticeAnalysis,
    n: usize,
    x: &LatticeState,
    y: &LatticeState,
) -> Result<f64> {
    let mut prop = Propagator::new(&a.graph, x.vertex, n)?;
    prop.advance_to(n);
    Ok(prop.get(y.vertex, &relative(x, y)))
}

fn relative(x: &LatticeState, y: &LatticeState) -> Vec<i64> {
    y.cell.iter().zip(&x.cell).map(|(a, b)| a - b).collect()
}

/// `K·vol·exp(−|z|²/2n)` with `z` the embedded drift-corrected displacement,
/// or 0 outside the admissible residue class.
fn gaussian_core(a: &LatticeAnalysis, n: usize, x: &LatticeState, y: &LatticeState) -> f64 {
    if !a.admissible(n, x, y) {
        return 0.0;
    }
    let z = a.z(n, x, y);
    let z2: f64 = z.iter().map(|v| v * v).sum();
    a.period_k as f64 * a.albanese.volume * (-z2 / (2.0 * n as f64)).exp()
}

/// Leading LCLT term `K·vol·m(y)·(2πn)^{−d/2}·exp(−|z|²/2n)`.
pub fn gaussian_leading(a: &LatticeAnalysis, n: usize, x: &LatticeState, y: &LatticeState) -> f64 {
    assert!(n >= 1);
    let d = a.dim() as i32;
    gaussian_core(a, n, x, y)
        * a.m(y.vertex)
        * (2.0 * std::f64::consts::PI * n as f64).powf(-(d as f64) / 2.0)
}

/// `U_n = p(n, x, y) / gaussian_leading(n, x, y)`.
pub fn lclt_ratio(
    a: &LatticeAnalysis,
    n: usize,
    x: &LatticeState,
    y: &LatticeState,
) -> Result<f64> {
    if !a.admissible(n, x, y) {
        return Err(Error::ZeroGaussian { n });
    }
    Ok(transition_probability(a, n, x, y)? / gaussian_leading(a, n, x, y))
}

/// `max_y |(2πn)^{d/2} p(n,x,y)/m(y) − K·vol·exp(−|z|²/2n)|` over all
/// vertices and the cells of `window` (the whole table when `None`), with
/// `x = (table.start, 0)`.
pub fn lclt_sup_error(
    a: &LatticeAnalysis,
    table: &HeatKernelTable,
    window: Option<&[(i64, i64)]>,
) -> f64 {
    let n = table.n;
    let d = a.dim() as f64;
    let scale = (2.0 * std::f64::consts::PI * n as f64).powf(d / 2.0);
    let x = LatticeState::origin(table.start, a.dim());
    let inside = |cell: &[i64]| match window {
        None => true,
        Some(w) => cell.iter().zip(w).all(|(c, (lo, hi))| lo <= c && c <= hi),
    };
    let mut worst: f64 = 0.0;
    for (v, cell, p) in table.all_states() {
        if !inside(&cell) {
            continue;
        }
        let y = LatticeState { vertex: v, cell };
        let err = (scale * p / a.m(v) - gaussian_core(a, n, &x, &y)).abs();
        worst = worst.max(err);
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcltPoint {
    pub n: usize,
    pub p: f64,
    pub gaussian: f64,
    pub ratio: f64,
}

/// `p(n,x,y(n))`, the Gaussian term and their ratio along `ns`.
pub fn lclt_series(
    a: &LatticeAnalysis,
    x: &LatticeState,
    y: impl Fn(usize) -> LatticeState,
    ns: &[usize],
) -> Result<Vec<LcltPoint>> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let mut prop = Propagator::new(&a.graph, x.vertex, n_max)?;
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::with_capacity(ns.len());
    for n in sorted {
        prop.advance_to(n);
        let yn = y(n);
        let p = prop.get(yn.vertex, &relative(x, &yn));
        let gaussian = if n == 0 {
            0.0
        } else {
            gaussian_leading(a, n, x, &yn)
        };
        out.push(LcltPoint {
            n,
            p,
            gaussian,
            ratio: if gaussian > 0.0 {
                p / gaussian
            } else {
                f64::NAN
            },
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    Richardson,
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Sample {
    pub n: usize,
    pub u: f64,
    /// `n(U_n − 1)`.
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Numeric {
    pub estimate: f64,
    pub method: Extrapolation,
    /// Root-mean-square residual of the `a₁ + c·n^{−1/2}` least-squares fit.
    pub residual: f64,
    pub slope: f64,
    pub samples: Vec<A1Sample>,
    pub warning: Option<String>,
}

/// Fit `f(n) ≈ a + c·n^{−1/2}`; returns `(a, c, rms residual)`.
fn fit_sqrt_model(samples: &[A1Sample]) -> (f64, f64, f64) {
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| (s.n as f64).powf(-0.5)).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.f).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - c * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - a - c * x).powi(2))
        .sum();
    (a, c, (rss / k).sqrt())
}

/// Extrapolate `f(n) = n(U_n − 1)` to `n → ∞` from exact probabilities.
///
/// `y` gives the target state for each `n`; when the walk drifts it must keep
/// `Φ(y) − Φ(x) − nρ` bounded (ideally constant).
pub fn a1_numeric(
    a: &LatticeAnalysis,
    x: &LatticeState,
    y: impl Fn(usize) -> LatticeState,
    n_list: &[usize],
) -> Result<A1Numeric> {
    if n_list.len() < 2 {
        return Err(Error::Argument(
            "a1_numeric needs at least two values of n".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("n_list must be strictly increasing".into()));
    }
    let series = lclt_series(a, x, &y, n_list)?;
    let mut samples = Vec::with_capacity(series.len());
    for pt in &series {
        if !(pt.gaussian > 0.0) {
            return Err(Error::ZeroGaussian { n: pt.n });
        }
        samples.push(A1Sample {
            n: pt.n,
            u: pt.ratio,
            f: pt.n as f64 * (pt.ratio - 1.0),
        });
    }
    Ok(extrapolate_a1(samples))
}

/// The extrapolation step of [`a1_numeric`], on precomputed samples.
pub fn extrapolate_a1(samples: Vec<A1Sample>) -> A1Numeric {
    let (fit_a, slope, residual) = fit_sqrt_model(&samples);
    let last = samples.last().expect("nonempty");
    let quarter = samples.iter().find(|s| 4 * s.n == last.n);
    let (estimate, method) = match quarter {
        Some(q) => (2.0 * last.f - q.f, Extrapolation::Richardson),
        None => (fit_a, Extrapolation::LeastSquares),
    };
    let warning = (residual > 0.1 * estimate.abs())
        .then(|| format!("ill-conditioned fit: residual {residual:e} exceeds 10% of the estimate"));
    A1Numeric {
        estimate,
        method,
        residual,
        slope,
        samples,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Builtin;

    #[test]
    fn square_two_steps() {
        let g = Builtin::Square.simple();
        let t2 = exact_transition_on(&g, 0, 2).unwrap();
        assert!((t2.get(0, &[0, 0]) - 0.25).abs() < 1e-15);
        assert!((t2.get(0, &[1, 1]) - 0.125).abs() < 1e-15);
        assert!((t2.get(0, &[2, 0]) - 0.0625).abs() < 1e-15);
        let t3 = exact_transition_on(&g, 0, 3).unwrap();
        assert_eq!(t3.get(0, &[0, 0]), 0.0);
        assert!((t3.total_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_steps_is_point_mass() {
        let g = Builtin::Hexagonal.simple();
        let t = exact_transition_on(&g, 1, 0).unwrap();
        let e: Vec<_> = t.entries().collect();
        assert_eq!(e, vec![(1, vec![0, 0], 1.0)]);
    }

    #[test]
    fn constant_samples_extrapolate_to_constant() {
        let samples = [8, 32, 128]
            .iter()
            .map(|&n| A1Sample {
                n,
                u: 0.0,
                f: -0.75,
            })
            .collect();
        let r = extrapolate_a1(samples);
        assert_eq!(r.estimate, -0.75);
        assert_eq!(r.method, Extrapolation::Richardson);
    }

    #[test]
    fn memory_cap() {
        let g = Builtin::Square.simple();
        assert!(matches!(
            Propagator::with_cap(&g, 0, 100, 1000),
            Err(Error::MemoryBudget { .. })
        ));
    }
}
