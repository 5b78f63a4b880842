use std::collections::{BTreeMap, BTreeSet};

use super::CircuitError;

/// Gate angle in radians: a constant, a named symbol, or a sum of those.
///
/// Angles are stored unreduced; reduction modulo 2pi is left to the passes
/// that need it.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    Constant(f64),
    Symbol(String),
    Sum(Vec<ParamExpr>),
}

impl ParamExpr {
    pub fn symbol(name: impl Into<String>) -> Self {
        ParamExpr::Symbol(name.into())
    }

    /// Sum in normal form: nested sums flattened, all constants folded into
    /// one trailing term (dropped when it is exactly zero and symbols remain),
    /// symbols kept in order. A pure-constant sum collapses to `Constant`.
    pub fn sum(terms: impl IntoIterator<Item = ParamExpr>) -> Self {
        let mut symbols = Vec::new();
        let mut constant: Option<f64> = None;
        let mut stack: Vec<ParamExpr> = terms.into_iter().collect();
        stack.reverse();
        while let Some(t) = stack.pop() {
            match t {
                ParamExpr::Constant(c) => *constant.get_or_insert(0.0) += c,
                ParamExpr::Symbol(s) => symbols.push(ParamExpr::Symbol(s)),
                ParamExpr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            }
        }
        match (symbols.len(), constant) {
            (0, c) => ParamExpr::Constant(c.unwrap_or(0.0)),
            (1, None) => symbols.pop().unwrap(),
            (1, Some(c)) if c == 0.0 => symbols.pop().unwrap(),
            (_, Some(c)) if c != 0.0 => {
                symbols.push(ParamExpr::Constant(c));
                ParamExpr::Sum(symbols)
            }
            _ => ParamExpr::Sum(symbols),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ParamExpr::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ParamExpr::Constant(_))
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            ParamExpr::Constant(_) => {}
            ParamExpr::Symbol(s) => {
                out.insert(s.clone());
            }
            ParamExpr::Sum(terms) => terms.iter().for_each(|t| t.collect_symbols(out)),
        }
    }

    pub fn evaluate(&self, values: &BTreeMap<String, f64>) -> Result<f64, CircuitError> {
        match self {
            ParamExpr::Constant(c) => Ok(*c),
            ParamExpr::Symbol(s) => values
                .get(s)
                .copied()
                .ok_or_else(|| CircuitError::MissingSymbol(s.clone())),
            ParamExpr::Sum(terms) => terms.iter().map(|t| t.evaluate(values)).sum(),
        }
    }
}

impl From<f64> for ParamExpr {
    fn from(c: f64) -> Self {
        ParamExpr::Constant(c)
    }
}
