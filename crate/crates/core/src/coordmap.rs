//! Invertible polynomial changes of coordinates between charts.
//!
//! A map from `source` to `target` is stored primarily through its inverse:
//! the source variables written as Laurent polynomials over the target. That
//! direction is all the transport laws need. The forward direction is kept
//! when it exists polynomially, possibly over an extension of the source
//! chart in which a fractional power is realized by a new Laurent variable.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::matrix::{inverse_unit_det, PolyMatrix};
use crate::exactalg::{Chart, Coord, Poly};

/// The forward direction of a [`CoordMap`].
#[derive(Clone, Debug)]
pub struct Forward {
    /// The source chart itself, or an extension of it.
    pub chart: Arc<Chart>,
    /// Source variables over `chart` (identity when `chart` is the source).
    pub embed: BTreeMap<String, Poly>,
    /// Variables of `chart` over the target.
    pub lift: BTreeMap<String, Poly>,
    /// Target variables over `chart`.
    pub polys: BTreeMap<String, Poly>,
}

#[derive(Clone, Debug)]
pub struct CoordMap {
    pub source: Arc<Chart>,
    pub target: Arc<Chart>,
    /// Source variables over the target chart.
    pub inverse: Option<BTreeMap<String, Poly>>,
    pub forward: Option<Forward>,
}

fn identity_bindings(chart: &Arc<Chart>) -> BTreeMap<String, Poly> {
    chart
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.clone(), Poly::var_idx(chart, i)))
        .collect()
}

fn check_bindings(what: &str, chart: &Chart, over: &Arc<Chart>, b: &BTreeMap<String, Poly>) -> Result<()> {
    for v in &chart.vars {
        match b.get(&v.name) {
            None => return Err(Error::InvalidChart(format!("{what}: no image for {}", v.name))),
            Some(p) if **p.chart() != **over => {
                return Err(Error::ChartMismatch {
                    left: p.chart().name.clone(),
                    right: over.name.clone(),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

impl Forward {
    /// A forward map over the source chart itself.
    pub fn plain(source: &Arc<Chart>, inverse_hint: Option<&BTreeMap<String, Poly>>, polys: BTreeMap<String, Poly>) -> Forward {
        Forward {
            chart: source.clone(),
            embed: identity_bindings(source),
            lift: inverse_hint.cloned().unwrap_or_default(),
            polys,
        }
    }
}

impl CoordMap {
    /// Builds the map and checks both compositions when both directions are
    /// given.
    pub fn new(
        source: Arc<Chart>,
        target: Arc<Chart>,
        inverse: Option<BTreeMap<String, Poly>>,
        forward: Option<Forward>,
    ) -> Result<CoordMap> {
        if inverse.is_none() && forward.is_none() {
            return Err(Error::InvalidChart("coordinate map without either direction".into()));
        }
        if source.ncoords() != target.ncoords() {
            return Err(Error::InvalidChart(format!(
                "{} has {} coordinates, {} has {}",
                source.name,
                source.ncoords(),
                target.name,
                target.ncoords()
            )));
        }
        if let Some(inv) = &inverse {
            check_bindings("inverse", &source, &target, inv)?;
        }
        let mut forward = forward;
        if let Some(fw) = &mut forward {
            let same = Arc::ptr_eq(&fw.chart, &source) || *fw.chart == *source;
            if same && fw.lift.is_empty() {
                if let Some(inv) = &inverse {
                    fw.lift = inv.clone();
                }
            }
            check_bindings("forward", &target, &fw.chart, &fw.polys)?;
            check_bindings("embed", &source, &fw.chart, &fw.embed)?;
        }
        let map = CoordMap {
            source,
            target,
            inverse,
            forward,
        };
        map.verify()?;
        Ok(map)
    }

    pub fn identity(chart: &Arc<Chart>) -> CoordMap {
        let id = identity_bindings(chart);
        CoordMap {
            source: chart.clone(),
            target: chart.clone(),
            inverse: Some(id.clone()),
            forward: Some(Forward {
                chart: chart.clone(),
                embed: id.clone(),
                lift: id.clone(),
                polys: id,
            }),
        }
    }

    /// Forward after inverse is the identity on the target, and inverse
    /// after forward is the embedding of the source.
    pub fn verify(&self) -> Result<()> {
        let (Some(inv), Some(fw)) = (&self.inverse, &self.forward) else {
            return Ok(());
        };
        check_bindings("lift", &fw.chart, &self.target, &fw.lift)?;
        for (i, v) in self.target.vars.iter().enumerate() {
            let back = fw.polys[&v.name].substitute(&self.target, &fw.lift)?;
            if back != Poly::var_idx(&self.target, i) {
                return Err(Error::NotInvertible(format!(
                    "{} -> {}: {} comes back as {back}",
                    self.source.name, self.target.name, v.name
                )));
            }
        }
        for v in &self.source.vars {
            let back = inv[&v.name].substitute(&fw.chart, &fw.polys)?;
            if back != fw.embed[&v.name] {
                return Err(Error::NotInvertible(format!(
                    "{} -> {}: {} comes back as {back}",
                    self.source.name, self.target.name, v.name
                )));
            }
        }
        Ok(())
    }

    pub fn inverse_bindings(&self) -> Result<&BTreeMap<String, Poly>> {
        self.inverse
            .as_ref()
            .ok_or_else(|| Error::NotInvertible(format!("{} -> {} has no polynomial inverse", self.source.name, self.target.name)))
    }

    /// Rewrites a polynomial over the source chart in target coordinates.
    pub fn pull(&self, p: &Poly) -> Result<Poly> {
        p.substitute(&self.target, self.inverse_bindings()?)
    }

    /// Rewrites a polynomial over the target chart in terms of the forward
    /// chart (the source or its extension).
    pub fn push(&self, p: &Poly) -> Result<Poly> {
        let fw = self
            .forward
            .as_ref()
            .ok_or_else(|| Error::NotInvertible(format!("{} -> {} has no forward map", self.source.name, self.target.name)))?;
        p.substitute(&fw.chart, &fw.polys)
    }

    /// `K[i][c] = ∂(source coordinate i)/∂(target coordinate c)` over the
    /// target chart.
    pub fn inverse_jacobian(&self) -> Result<PolyMatrix> {
        let inv = self.inverse_bindings()?;
        let n = self.source.ncoords();
        let mut k = Vec::with_capacity(n);
        for coord in &self.source.coords {
            let row: Vec<Poly> = match coord {
                Coord::Var(v) => {
                    let p = &inv[&self.source.vars[*v].name];
                    (0..n).map(|c| p.diff_coord(c)).collect()
                }
                Coord::Exp {
                    exp_var,
                    rate,
                    log_var,
                } => match log_var {
                    Some(lv) => {
                        let p = &inv[&self.source.vars[*lv].name];
                        (0..n).map(|c| p.diff_coord(c)).collect()
                    }
                    None => {
                        let e = &inv[&self.source.vars[*exp_var].name];
                        let einv = e.unit_inverse()?.scale(&rate.recip());
                        (0..n).map(|c| &e.diff_coord(c) * &einv).collect()
                    }
                },
            };
            k.push(row);
        }
        Ok(k)
    }

    /// Composition `self` followed by `next`. The forward direction is kept
    /// when both forward maps live on their plain source charts.
    pub fn then(&self, next: &CoordMap) -> Result<CoordMap> {
        if *self.target != *next.source {
            return Err(Error::ChartMismatch {
                left: self.target.name.clone(),
                right: next.source.name.clone(),
            });
        }
        let inverse = match (&self.inverse, &next.inverse) {
            (Some(a), Some(b)) => {
                let mut out = BTreeMap::new();
                for (k, p) in a {
                    out.insert(k.clone(), p.substitute(&next.target, b)?);
                }
                Some(out)
            }
            _ => None,
        };
        let forward = match (&self.forward, &next.forward) {
            (Some(a), Some(b)) if *a.chart == *self.source && *b.chart == *next.source => {
                let mut polys = BTreeMap::new();
                for (k, p) in &b.polys {
                    polys.insert(k.clone(), p.substitute(&self.source, &a.polys)?);
                }
                Some(Forward {
                    chart: self.source.clone(),
                    embed: identity_bindings(&self.source),
                    lift: inverse.clone().unwrap_or_default(),
                    polys,
                })
            }
            _ => None,
        };
        if inverse.is_none() && forward.is_none() {
            return Err(Error::NotInvertible(format!(
                "composition {} -> {} -> {}",
                self.source.name, self.target.name, next.target.name
            )));
        }
        CoordMap::new(self.source.clone(), next.target.clone(), inverse, forward)
    }
}

/// `J = K⁻¹`, the Jacobian of the target coordinates with respect to the
/// source ones, over the target chart.
pub fn forward_jacobian(k: &PolyMatrix, chart: &Arc<Chart>) -> Result<PolyMatrix> {
    inverse_unit_det(k, chart)
}

/// Σ over products, skipping zeros.
pub(crate) fn dot<'a, I>(chart: &Arc<Chart>, pairs: I) -> Poly
where
    I: IntoIterator<Item = (&'a Poly, &'a Poly)>,
{
    let mut acc = Poly::zero(chart);
    for (a, b) in pairs {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        acc = &acc + &(a * b);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{int, rat, VarSpec};

    fn charts() -> (Arc<Chart>, Arc<Chart>) {
        let a = Chart::new(
            "a",
            vec![VarSpec::new("x", int(1), false), VarSpec::new("E", int(1), true)],
            vec![
                Coord::Var(0),
                Coord::Exp {
                    exp_var: 1,
                    rate: int(1),
                    log_var: None,
                },
            ],
        )
        .unwrap();
        let b = Chart::new(
            "b",
            vec![VarSpec::new("z", int(1), false), VarSpec::new("F", int(1), true)],
            vec![
                Coord::Var(0),
                Coord::Exp {
                    exp_var: 1,
                    rate: int(1),
                    log_var: None,
                },
            ],
        )
        .unwrap();
        (a, b)
    }

    #[test]
    fn shear_with_exponential_roundtrips() {
        let (a, b) = charts();
        // z = x - 2E, F = E
        let z = Poly::var(&b, "z").unwrap();
        let f = Poly::var(&b, "F").unwrap();
        let x = Poly::var(&a, "x").unwrap();
        let e = Poly::var(&a, "E").unwrap();
        let inverse = BTreeMap::from([("x".to_string(), &z + &f.scale(&int(2))), ("E".to_string(), f.clone())]);
        let polys = BTreeMap::from([("z".to_string(), &x - &e.scale(&int(2))), ("F".to_string(), e.clone())]);
        let m = CoordMap::new(a.clone(), b.clone(), Some(inverse), Some(Forward::plain(&a, None, polys))).unwrap();
        let k = m.inverse_jacobian().unwrap();
        // ∂x/∂z = 1, ∂x/∂y^{2} = 2F, ∂y^2/∂y'^2 = 1
        assert_eq!(k[0][0], Poly::one(&b));
        assert_eq!(k[0][1], f.scale(&int(2)));
        assert!(k[1][0].is_zero());
        assert_eq!(k[1][1], Poly::one(&b));
        let j = forward_jacobian(&k, &b).unwrap();
        assert_eq!(j[0][1], f.scale(&int(-2)));
    }

    #[test]
    fn broken_inverse_is_rejected() {
        let (a, b) = charts();
        let z = Poly::var(&b, "z").unwrap();
        let f = Poly::var(&b, "F").unwrap();
        let x = Poly::var(&a, "x").unwrap();
        let e = Poly::var(&a, "E").unwrap();
        let inverse = BTreeMap::from([("x".to_string(), &z + &f.scale(&rat(3, 2))), ("E".to_string(), f.clone())]);
        let polys = BTreeMap::from([("z".to_string(), &x - &e.scale(&int(2))), ("F".to_string(), e)]);
        assert!(CoordMap::new(a.clone(), b, Some(inverse), Some(Forward::plain(&a, None, polys))).is_err());
    }

    #[test]
    fn identity_composes() {
        let (a, _) = charts();
        let id = CoordMap::identity(&a);
        let c = id.then(&id).unwrap();
        assert!(c.forward.is_some());
        assert!(c.inverse_jacobian().unwrap()[0][1].is_zero());
        assert!(!c.inverse_jacobian().unwrap()[1][1].is_zero());
    }
}
