use std::fmt;

use serde::Serialize;

use super::QuotientGraph;

pub(crate) const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    InverseNotInvolution,
    SelfInverse,
    InverseEndpoints,
    InverseTranslation,
    ProbabilityRange,
    PairProbability,
    RowSum,
    Disconnected,
    NotIrreducible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn contains(&self, kind: ViolationKind, subject: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.kind == kind && v.subject == subject)
    }

    fn push(&mut self, kind: ViolationKind, subject: &str, message: String) {
        self.violations.push(Violation {
            kind,
            subject: subject.to_string(),
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", v.message)?;
        }
        Ok(())
    }
}

/// Check every structural and probabilistic invariant of `g`.
pub fn validate(g: &QuotientGraph) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let edges = g.edges();
    let names = g.vertices();

    for (i, e) in edges.iter().enumerate() {
        let inv = &edges[e.inverse];
        if e.inverse == i {
            report.push(
                SelfInverse,
                &e.id,
                format!("self-inverse edge unsupported at {}", e.id),
            );
            continue;
        }
        if inv.inverse != i {
            report.push(
                InverseNotInvolution,
                &e.id,
                format!("inverse pairing is not an involution at {}", e.id),
            );
        }
        if inv.origin != e.terminus || inv.terminus != e.origin {
            report.push(
                InverseEndpoints,
                &e.id,
                format!("endpoints of {} do not reverse those of {}", inv.id, e.id),
            );
        }
        if inv
            .translation
            .iter()
            .zip(&e.translation)
            .any(|(a, b)| *a != -*b)
        {
            report.push(
                InverseTranslation,
                &e.id,
                format!("τ({}) ≠ −τ({})", inv.id, e.id),
            );
        }
        if !(0.0..=1.0).contains(&e.probability) {
            report.push(
                ProbabilityRange,
                &e.id,
                format!("p({}) = {} outside [0,1]", e.id, e.probability),
            );
        }
        if i < e.inverse && !(e.probability + inv.probability > 0.0) {
            report.push(
                PairProbability,
                &e.id,
                format!("p(e)+p(ē)>0 violated at {}", e.id),
            );
        }
    }

    for (v, name) in names.iter().enumerate() {
        let s: f64 = g.out_edges(v).iter().map(|&i| edges[i].probability).sum();
        if !((s - 1.0).abs() <= ROW_SUM_TOL) {
            report.push(RowSum, name, format!("row sum Σp(e) = {s} ≠ 1 at {name}"));
        }
    }

    let n = g.n_vertices();
    let undirected = reach(n, 0, |v| {
        g.out_edges(v)
            .iter()
            .map(|&i| edges[i].terminus)
            .chain(edges.iter().filter(|e| e.terminus == v).map(|e| e.origin))
            .collect()
    });
    if let Some(v) = undirected.iter().position(|r| !r) {
        report.push(
            Disconnected,
            &names[v],
            format!(
                "support graph is disconnected: {} unreachable from {}",
                names[v], names[0]
            ),
        );
    } else if let Some((x, y)) = irreducibility_gap(g) {
        report.push(
            NotIrreducible,
            &names[y],
            format!(
                "quotient walk is not irreducible: {} unreachable from {}",
                names[y], names[x]
            ),
        );
    }
    report
}

/// First pair `(x, y)` such that `y` cannot be reached from `x` along
/// positive-probability edges.
pub(crate) fn irreducibility_gap(g: &QuotientGraph) -> Option<(usize, usize)> {
    let n = g.n_vertices();
    let step = |v: usize| -> Vec<usize> {
        g.out_edges(v)
            .iter()
            .map(|&i| &g.edges()[i])
            .filter(|e| e.probability > 0.0)
            .map(|e| e.terminus)
            .collect()
    };
    (0..n).find_map(|x| reach(n, x, step).iter().position(|r| !r).map(|y| (x, y)))
}

fn reach(n: usize, start: usize, next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for w in next(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
