//! Weighted variable sets and the coordinates they realize.

use std::sync::Arc;


use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSpec {
    pub name: String,
    pub weight: Rational,
    /// Negative exponents permitted.
    pub laurent: bool,
}

impl VarSpec {
    pub fn new(name: impl Into<String>, weight: Rational, laurent: bool) -> Self {
        VarSpec {
            name: name.into(),
            weight,
            laurent,
        }
    }
}

/// How a geometric coordinate is realized by the chart's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coord {
    /// The coordinate is the variable itself.
    Var(usize),
    /// A logarithmic coordinate `c` seen through `exp_var = e^{rate * c}`,
    /// optionally also through an explicit variable standing for `c` itself.
    Exp {
        exp_var: usize,
        rate: Rational,
        log_var: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub vars: Vec<VarSpec>,
    pub coords: Vec<Coord>,
}

impl Chart {
    pub fn new(name: impl Into<String>, vars: Vec<VarSpec>, coords: Vec<Coord>) -> Result<Arc<Self>> {
        let name = name.into();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidChart(format!("duplicate variable {:?} in {name}", v.name)));
            }
        }
        let in_range = |i: usize| {
            if i < vars.len() {
                Ok(())
            } else {
                Err(Error::InvalidChart(format!("coordinate refers to variable {i} of {name}")))
            }
        };
        for c in &coords {
            match c {
                Coord::Var(i) => in_range(*i)?,
                Coord::Exp { exp_var, log_var, .. } => {
                    in_range(*exp_var)?;
                    if let Some(l) = log_var {
                        in_range(*l)?;
                    }
                }
            }
        }
        Ok(Arc::new(Chart { name, vars, coords }))
    }

    /// A chart of plain variables, one coordinate per variable.
    pub fn plain(name: impl Into<String>, vars: Vec<VarSpec>) -> Result<Arc<Self>> {
        let coords = (0..vars.len()).map(Coord::Var).collect();
        Self::new(name, vars, coords)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn ncoords(&self) -> usize {
        self.coords.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn weight(&self, var: usize) -> &Rational {
        &self.vars[var].weight
    }

    /// Index of the logarithmic coordinate, if any.
    pub fn exp_coord(&self) -> Option<usize> {
        self.coords.iter().position(|c| matches!(c, Coord::Exp { .. }))
    }

    /// Variable realizing plain coordinate `c`.
    pub fn coord_var(&self, c: usize) -> Option<usize> {
        match self.coords[c] {
            Coord::Var(v) => Some(v),
            Coord::Exp { .. } => None,
        }
    }
}
