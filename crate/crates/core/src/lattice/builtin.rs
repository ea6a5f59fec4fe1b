use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{parse_probability, EdgeSpec, QuotientGraph};
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// The three worked examples: square, triangular and hexagonal lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Square,
    Triangular,
    Hexagonal,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Square, Builtin::Triangular, Builtin::Hexagonal];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Square => "square",
            Builtin::Triangular => "triangular",
            Builtin::Hexagonal => "hexagonal",
        }
    }

    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            Builtin::Square => &["alpha", "alpha_p", "beta", "beta_p"],
            Builtin::Triangular | Builtin::Hexagonal => {
                &["alpha", "alpha_p", "beta", "beta_p", "gamma", "gamma_p"]
            }
        }
    }

    /// Parameters of the simple random walk.
    pub fn simple_params(self) -> BTreeMap<String, f64> {
        let v = match self {
            Builtin::Square => 0.25,
            Builtin::Triangular => 1.0 / 6.0,
            Builtin::Hexagonal => 1.0 / 3.0,
        };
        self.param_keys()
            .iter()
            .map(|k| (k.to_string(), v))
            .collect()
    }

    pub fn build(self, params: &BTreeMap<String, f64>) -> Result<QuotientGraph> {
        build_builtin(self, params)
    }

    pub fn simple(self) -> QuotientGraph {
        build_builtin(self, &self.simple_params()).expect("simple walk parameters are valid")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown builtin lattice {s:?} (square, triangular, hexagonal)"
                ))
            })
    }
}

/// Parse `k=v,k=v,…`; values may be decimals or rationals `a/b`.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Params(format!("expected key=value, found {item:?}")))?;
        let value = parse_probability(v).map_err(Error::Params)?;
        if out.insert(k.trim().to_string(), value).is_some() {
            return Err(Error::Params(format!("parameter {k} given twice")));
        }
    }
    Ok(out)
}

fn edge(id: &str, from: &str, to: &str, t: [i64; 2], p: f64, inverse: &str) -> EdgeSpec {
    EdgeSpec {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        translation: t.to_vec(),
        p,
        inverse: inverse.into(),
    }
}

/// Pair of mutually inverse edges `e` (from → to, τ) and `ē`.
fn pair(name: &str, from: &str, to: &str, t: [i64; 2], p: f64, p_inv: f64) -> [EdgeSpec; 2] {
    let bar = format!("{name}bar");
    [
        edge(name, from, to, t, p, &bar),
        edge(&bar, to, from, [-t[0], -t[1]], p_inv, name),
    ]
}

fn check_sum(what: &str, total: f64) -> Result<()> {
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        Err(Error::Params(format!("{what} = {total}, expected 1")))
    } else {
        Ok(())
    }
}

pub fn build_builtin(lattice: Builtin, params: &BTreeMap<String, f64>) -> Result<QuotientGraph> {
    let keys = lattice.param_keys();
    if let Some(k) = params.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(Error::Params(format!(
            "unknown parameter {k} for {lattice} (expected {})",
            keys.join(", ")
        )));
    }
    let get = |k: &str| -> Result<f64> {
        let v = *params
            .get(k)
            .ok_or_else(|| Error::Params(format!("missing parameter {k} for {lattice}")))?;
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Params(format!(
                "parameter {k} = {v} must be nonnegative"
            )));
        }
        Ok(v)
    };

    let (a, ap, b, bp) = (get("alpha")?, get("alpha_p")?, get("beta")?, get("beta_p")?);
    match lattice {
        Builtin::Square => {
            check_sum("alpha + alpha_p + beta + beta_p", a + ap + b + bp)?;
            let edges = [
                pair("e1", "x0", "x0", [1, 0], a, ap),
                pair("e2", "x0", "x0", [0, 1], b, bp),
            ];
            QuotientGraph::new(2, vec!["x0".into()], edges.into_iter().flatten().collect())
        }
        Builtin::Triangular => {
            let (c, cp) = (get("gamma")?, get("gamma_p")?);
            check_sum("α̂ + β̂ + γ̂", a + ap + b + bp + c + cp)?;
            // p(e₂) = β′ and p(ē₂) = β, following the worked example.
            let edges = [
                pair("e1", "x0", "x0", [1, 0], a, ap),
                pair("e2", "x0", "x0", [0, 1], bp, b),
                pair("e3", "x0", "x0", [-1, 1], c, cp),
            ];
            QuotientGraph::new(2, vec!["x0".into()], edges.into_iter().flatten().collect())
        }
        Builtin::Hexagonal => {
            let (c, cp) = (get("gamma")?, get("gamma_p")?);
            check_sum("alpha + beta + gamma", a + b + c)?;
            check_sum("alpha_p + beta_p + gamma_p", ap + bp + cp)?;
            let edges = [
                pair("e1", "x1", "x2", [1, 0], a, ap),
                pair("e2", "x1", "x2", [0, 0], b, bp),
                pair("e3", "x1", "x2", [0, 1], c, cp),
            ];
            QuotientGraph::new(
                2,
                vec!["x1".into(), "x2".into()],
                edges.into_iter().flatten().collect(),
            )
        }
    }
}
