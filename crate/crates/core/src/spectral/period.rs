use serde::Serialize;

use super::{gcd, quotient_period};
use crate::error::{Error, Result};
use crate::lattice::{validate::irreducibility_gap, QuotientGraph};

pub(crate) const STATE_CAP: u128 = 100_000_000;

/// Default lifted search depth, `max(32, 4|V₀|)`.
pub fn default_search_depth(g: &QuotientGraph) -> usize {
    32.max(4 * g.n_vertices())
}

/// Dense indexing of lifted states `(v, τ)` with `‖τ‖∞ ≤ radius`.
pub(crate) struct LiftBox {
    dim: usize,
    radius: i64,
    side: usize,
    cells: usize,
    pub states: usize,
}

impl LiftBox {
    pub fn new(g: &QuotientGraph, radius: i64) -> Result<Self> {
        let side = (2 * radius + 1) as u128;
        let cells = side.checked_pow(g.dim() as u32).unwrap_or(u128::MAX);
        let states = cells.saturating_mul(g.n_vertices() as u128);
        if states > STATE_CAP {
            return Err(Error::MemoryBudget {
                states,
                cap: STATE_CAP,
            });
        }
        Ok(Self {
            dim: g.dim(),
            radius,
            side: side as usize,
            cells: cells as usize,
            states: states as usize,
        })
    }

    pub fn encode(&self, v: usize, tau: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for &t in tau.iter().rev() {
            if t.abs() > self.radius {
                return None;
            }
            idx = idx * self.side + (t + self.radius) as usize;
        }
        Some(v * self.cells + idx)
    }

    pub fn decode(&self, state: usize) -> (usize, Vec<i64>) {
        let v = state / self.cells;
        let mut rest = state % self.cells;
        let mut tau = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            tau.push((rest % self.side) as i64 - self.radius);
            rest /= self.side;
        }
        (v, tau)
    }

    /// Positive-probability successors of `state` inside the box.
    pub fn successors<'a>(
        &'a self,
        g: &'a QuotientGraph,
        state: usize,
    ) -> impl Iterator<Item = usize> + 'a {
        let (v, tau) = self.decode(state);
        g.out_edges(v).iter().filter_map(move |&i| {
            let e = &g.edges()[i];
            if e.probability <= 0.0 {
                return None;
            }
            let next: Vec<i64> = tau.iter().zip(&e.translation).map(|(a, b)| a + b).collect();
            self.encode(e.terminus, &next)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedPeriod {
    pub period: usize,
    pub quotient_period: usize,
    /// Longest walk length examined, `2·depth`.
    pub horizon: usize,
    pub radius: i64,
    pub search_depth: usize,
    /// Lengths `n ≤ horizon` at which the base state is revisited.
    pub return_times: Vec<usize>,
}

/// Period of the walk on the lattice itself; see [`lifted_period_detail`].
pub fn lifted_period(g: &QuotientGraph, search_depth: usize) -> Result<usize> {
    lifted_period_detail(g, search_depth).map(|p| p.period)
}

/// Gcd of the return times to `(base, 0)` observed within `2·depth` steps.
///
/// Heuristic: the horizon is finite, so the result is exact only once the
/// observed gcd has stabilised, which it does quickly for the lattices of
/// interest.
pub fn lifted_period_detail(g: &QuotientGraph, search_depth: usize) -> Result<LiftedPeriod> {
    assert!(search_depth >= 1);
    let radius = search_depth as i64 * g.max_translation();
    let lift = LiftBox::new(g, radius)?;
    let origin = lift.encode(0, &vec![0; g.dim()]).unwrap();
    let horizon = 2 * search_depth;

    let mut mark = vec![usize::MAX; lift.states];
    let mut frontier = vec![origin];
    let mut returns = Vec::new();
    let mut period = 0;
    for step in 1..=horizon {
        let mut next = Vec::with_capacity(frontier.len());
        for &s in &frontier {
            for t in lift.successors(g, s) {
                if mark[t] != step {
                    mark[t] = step;
                    next.push(t);
                }
            }
        }
        if mark[origin] == step {
            returns.push(step);
            period = gcd(period, step);
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    if period == 0 {
        return Err(Error::NoReturn { horizon });
    }
    Ok(LiftedPeriod {
        period,
        quotient_period: quotient_period(g),
        horizon,
        radius,
        search_depth,
        return_times: returns,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrreducibilityReport {
    pub quotient_irreducible: bool,
    /// A vertex pair `(x, y)` with `y` unreachable from `x`, if any.
    pub quotient_gap: Option<(String, String)>,
    pub lifted_reachable: bool,
    /// Always true: the lifted verdict is a finite-box reachability heuristic.
    pub heuristic: bool,
    pub radius: i64,
    pub inner_states: usize,
    pub inner_unreached: usize,
}

/// Exact quotient irreducibility plus a finite-box lifted reachability test.
pub fn check_irreducibility(g: &QuotientGraph, radius: i64) -> Result<IrreducibilityReport> {
    let gap = irreducibility_gap(g);
    let lift = LiftBox::new(g, radius)?;
    let origin = lift.encode(0, &vec![0; g.dim()]).unwrap();
    let mut seen = vec![false; lift.states];
    seen[origin] = true;
    let mut stack = vec![origin];
    while let Some(s) = stack.pop() {
        for t in lift.successors(g, s) {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let inner = radius / 2;
    let (mut inner_states, mut inner_unreached) = (0, 0);
    for (s, &hit) in seen.iter().enumerate() {
        let (_, tau) = lift.decode(s);
        if tau.iter().all(|t| t.abs() <= inner) {
            inner_states += 1;
            if !hit {
                inner_unreached += 1;
            }
        }
    }
    Ok(IrreducibilityReport {
        quotient_irreducible: gap.is_none(),
        quotient_gap: gap.map(|(x, y)| (g.vertices()[x].clone(), g.vertices()[y].clone())),
        lifted_reachable: inner_unreached == 0,
        heuristic: true,
        radius,
        inner_states,
        inner_unreached,
    })
}
