use std::collections::HashMap;

use serde::Serialize;

use super::Geometry;
use crate::lattice::QuotientGraph;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationPoint {
    pub vertex: String,
    pub cell: Vec<i64>,
    pub coords: Vec<f64>,
}

/// Embedded points of a window of the lattice and the edges between them.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RealizationTable {
    pub points: Vec<RealizationPoint>,
    /// Pairs of row indices into `points`, one per undirected edge.
    pub edges: Vec<(usize, usize)>,
}

fn cells(window: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in window {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..=hi).map(move |x| {
                    let mut c = prefix.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }
    out
}

/// Points `A·(Φ(v) + σ)` for every vertex and every cell `σ` in the
/// inclusive box `window`.
pub fn export_realization(
    g: &QuotientGraph,
    geo: &Geometry,
    window: &[(i64, i64)],
) -> RealizationTable {
    assert_eq!(
        window.len(),
        g.dim(),
        "window must have one range per dimension"
    );
    if window.iter().any(|(lo, hi)| lo > hi) {
        return RealizationTable::default();
    }
    let mut table = RealizationTable::default();
    let mut row_of: HashMap<(usize, Vec<i64>), usize> = HashMap::new();
    for cell in cells(window) {
        for (v, name) in g.vertices().iter().enumerate() {
            let x: Vec<f64> = geo.realization.positions[v]
                .iter()
                .zip(&cell)
                .map(|(p, c)| p + *c as f64)
                .collect();
            row_of.insert((v, cell.clone()), table.points.len());
            table.points.push(RealizationPoint {
                vertex: name.clone(),
                cell: cell.clone(),
                coords: geo.albanese.embed(&x),
            });
        }
    }
    for ((v, cell), &row) in row_of.iter() {
        for &i in g.out_edges(*v) {
            let e = &g.edges()[i];
            if i > e.inverse {
                continue;
            }
            let target: Vec<i64> = cell
                .iter()
                .zip(&e.translation)
                .map(|(a, b)| a + b)
                .collect();
            if let Some(&to) = row_of.get(&(e.terminus, target)) {
                table.edges.push((row, to));
            }
        }
    }
    table.edges.sort_unstable();
    table
}
