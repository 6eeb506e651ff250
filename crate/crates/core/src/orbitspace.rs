//! Charts and generators of the orbit space: the shifted variables ζ, the
//! twisted invariants y^j, the θ-chart with its polynomial P(u), and a
//! first-principles computation of the intersection form in x-space.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coordmap::{CoordMap, Forward};
use crate::error::{Error, Result};
use crate::exactalg::{
    coefficient_equations, int, monomials_of_degree, rat, solve_linear, Chart, Coord, LinearSolveResult, Monomial,
    Poly, Rational, VarSpec,
};
use crate::metrics::BilinearForm;
use crate::rootdata::{self, Family, RootSystemSpec};

/// Default largest rank handled by [`compute_g_direct`].
pub const ORACLE_MAX_RANK: usize = 4;

/// `Exp` coordinate `y^{l+1}` seen through the variable `var`.
fn exp_coord(var: usize, rate: Rational) -> Coord {
    Coord::Exp {
        exp_var: var,
        rate,
        log_var: None,
    }
}

/// Rate of the exponential variable of the y-chart: `e^{y^{l+1}}`, except
/// for B_l with k = l where `e^{y^{l+1}/2}` is needed.
pub fn y_exp_rate(spec: &RootSystemSpec) -> Rational {
    if spec.family() == Family::B && spec.vertex() == spec.rank() {
        rat(1, 2)
    } else {
        int(1)
    }
}

/// Chart `y^1..y^l, e^{rate·y^{l+1}}` with weights `d_j` and `deg e^{y^{l+1}} = 1`.
pub fn y_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let l = spec.rank();
    let d = rootdata::degrees(spec);
    let rate = y_exp_rate(spec);
    let mut vars: Vec<VarSpec> = (1..=l).map(|j| VarSpec::new(format!("y{j}"), d[j - 1].clone(), false)).collect();
    let name = if rate.is_one() { "E" } else { "H" };
    vars.push(VarSpec::new(name, rate.clone(), true));
    let mut coords: Vec<Coord> = (0..l).map(Coord::Var).collect();
    coords.push(exp_coord(l, rate));
    Chart::new(format!("y[{}]", spec.id()), vars, coords).expect("valid y-chart")
}

/// Chart `θ^0..θ^l`, every variable of weight `k`.
pub fn theta_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let k = int(spec.vertex() as i64);
    let vars = (0..=spec.rank()).map(|j| VarSpec::new(format!("th{j}"), k.clone(), false)).collect();
    Chart::plain(format!("theta[{}]", spec.id()), vars).expect("valid theta-chart")
}

/// Chart of the shifted variables and `Q = e^{y^{l+1}/4}`. For C_l the
/// variables are `ζ_a`; for B_l they are the square roots `ρ_a = ζ_a^{1/2}`.
pub fn generator_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let l = spec.rank();
    let prefix = match spec.family() {
        Family::C => "zeta",
        Family::B => "rho",
    };
    let mut vars: Vec<VarSpec> = (1..=l).map(|a| VarSpec::new(format!("{prefix}{a}"), int(0), false)).collect();
    vars.push(VarSpec::new("Q", rat(1, 4), true));
    let mut coords: Vec<Coord> = (0..l).map(Coord::Var).collect();
    coords.push(exp_coord(l, rat(1, 4)));
    Chart::new(format!("gen[{}]", spec.id()), vars, coords).expect("valid generator chart")
}

/// Elementary symmetric polynomials `σ_0..σ_n` of the given polynomials.
pub fn elementary_symmetric(xs: &[Poly], chart: &Arc<Chart>) -> Vec<Poly> {
    let mut s = vec![Poly::one(chart)];
    for x in xs {
        let mut next = s.clone();
        next.push(Poly::zero(chart));
        for j in 1..next.len() {
            next[j] = &s.get(j).cloned().unwrap_or_else(|| Poly::zero(chart)) + &(&s[j - 1] * x);
        }
        s = next;
    }
    s
}

/// The generators `y^j = e^{d_j y^{l+1}} σ_j(ζ)` (with `y^l = e^{d_l y^{l+1}} Π ρ_a`
/// for B_l) as a map from the generator chart to the y-chart. Only the
/// forward direction exists.
pub fn build_generators(spec: &RootSystemSpec) -> CoordMap {
    let l = spec.rank();
    let src = generator_chart(spec);
    let ych = y_chart(spec);
    let d = rootdata::degrees(spec);
    let q = Poly::var_idx(&src, l);
    let base: Vec<Poly> = (0..l).map(|a| Poly::var_idx(&src, a)).collect();
    let zetas: Vec<Poly> = match spec.family() {
        Family::C => base.clone(),
        Family::B => base.iter().map(|r| r * r).collect(),
    };
    let sigma = elementary_symmetric(&zetas, &src);
    let mut polys = BTreeMap::new();
    for j in 1..=l {
        let four_d = &d[j - 1] * int(4);
        let e = four_d.to_integer().try_into().expect("small twist");
        let inv = if spec.family() == Family::B && j == l {
            base.iter().fold(Poly::one(&src), |acc, r| &acc * r)
        } else {
            sigma[j].clone()
        };
        polys.insert(format!("y{j}"), &q.pow(e).expect("positive power") * &inv);
    }
    let rate = y_exp_rate(spec);
    let qe = (&rate * int(4)).to_integer().try_into().expect("small rate");
    polys.insert(ych.vars[l].name.clone(), q.pow(qe).expect("positive power"));
    CoordMap {
        source: src.clone(),
        target: ych,
        inverse: None,
        forward: Some(Forward {
            chart: src.clone(),
            embed: src
                .vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.name.clone(), Poly::var_idx(&src, i)))
                .collect(),
            lift: BTreeMap::new(),
            polys,
        }),
    }
}

/// Coefficients of `P(u) = Σ u^{l-j} θ^j` over the θ-chart.
#[derive(Clone, Debug)]
pub struct GenPolyP {
    pub spec: RootSystemSpec,
    pub chart: Arc<Chart>,
    pub theta: Vec<Poly>,
}

impl GenPolyP {
    /// Checks `P(u) = e^{k y^{l+1}} Π (u + ζ_j)` after substituting the
    /// definitions of θ, in the chart `u, ζ, E`.
    pub fn verify_expansion(&self) -> Result<()> {
        let l = self.spec.rank();
        let k = self.spec.vertex();
        let mut vars = vec![VarSpec::new("u", int(0), false)];
        vars.extend((1..=l).map(|a| VarSpec::new(format!("zeta{a}"), int(0), false)));
        vars.push(VarSpec::new("E", int(1), true));
        let ch = Chart::plain("u-zeta-E", vars)?;
        let u = Poly::var_idx(&ch, 0);
        let e = Poly::var_idx(&ch, l + 1);
        let zetas: Vec<Poly> = (1..=l).map(|a| Poly::var_idx(&ch, a)).collect();
        let sigma = elementary_symmetric(&zetas, &ch);
        let d = rootdata::degrees(&self.spec);
        // θ^0 = E^k, θ^j = y^j E^{k-j} for j < k, y^j otherwise, y^j = E^{d_j} σ_j
        let mut bind = BTreeMap::new();
        bind.insert("th0".to_string(), e.pow(k as i32)?);
        for j in 1..=l {
            let dj: i32 = d[j - 1].to_integer().try_into().expect("integral degree");
            let shift = if j < k { (k - j) as i32 } else { 0 };
            bind.insert(format!("th{j}"), &e.pow(dj + shift)? * &sigma[j]);
        }
        let mut lhs = Poly::zero(&ch);
        for (j, th) in self.theta.iter().enumerate() {
            lhs = &lhs + &(&u.pow((l - j) as i32)? * &th.substitute(&ch, &bind)?);
        }
        let rhs = zetas.iter().fold(e.pow(k as i32)?, |acc, z| &acc * &(&u + z));
        if lhs != rhs {
            return Err(Error::ClosedFormMismatch(format!("P(u) expansion: {lhs} vs {rhs}")));
        }
        Ok(())
    }
}

pub fn assemble_p(spec: &RootSystemSpec) -> Result<GenPolyP> {
    if spec.family() != Family::C {
        return Err(Error::InvalidSpec("the θ-chart is built for C_l only".into()));
    }
    let chart = theta_chart(spec);
    let theta = (0..=spec.rank()).map(|j| Poly::var_idx(&chart, j)).collect();
    let p = GenPolyP {
        spec: *spec,
        chart,
        theta,
    };
    p.verify_expansion()?;
    Ok(p)
}

/// θ written in y (the polynomial direction), with the forward direction
/// over the extension `ε, θ^1..θ^l` where `θ^0 = ε^k`.
pub fn theta_to_y(spec: &RootSystemSpec) -> Result<CoordMap> {
    if spec.family() != Family::C {
        return Err(Error::InvalidSpec("the θ-chart is built for C_l only".into()));
    }
    let l = spec.rank();
    let k = spec.vertex();
    let th = theta_chart(spec);
    let y = y_chart(spec);
    let e = Poly::var_idx(&y, l);
    let mut inverse = BTreeMap::new();
    inverse.insert("th0".to_string(), e.pow(k as i32)?);
    for j in 1..=l {
        let yj = Poly::var_idx(&y, j - 1);
        let p = if j < k { &yj * &e.pow((k - j) as i32)? } else { yj };
        inverse.insert(format!("th{j}"), p);
    }
    let mut vars = vec![VarSpec::new("eps", int(1), true)];
    vars.extend(th.vars[1..].iter().cloned());
    let ext = Chart::plain(format!("theta-ext[{}]", spec.id()), vars)?;
    let eps = Poly::var_idx(&ext, 0);
    let mut embed = BTreeMap::new();
    embed.insert("th0".to_string(), eps.pow(k as i32)?);
    let mut lift = BTreeMap::new();
    lift.insert("eps".to_string(), e.clone());
    let mut polys = BTreeMap::new();
    for j in 1..=l {
        let name = format!("th{j}");
        embed.insert(name.clone(), Poly::var(&ext, &name)?);
        lift.insert(name.clone(), inverse[&name].clone());
        let tj = Poly::var(&ext, &name)?;
        let yj = if j < k { &tj * &eps.pow(-((k - j) as i32))? } else { tj };
        polys.insert(format!("y{j}"), yj);
    }
    polys.insert("E".to_string(), eps);
    CoordMap::new(
        th,
        y,
        Some(inverse),
        Some(Forward {
            chart: ext,
            embed,
            lift,
            polys,
        }),
    )
}

/// Chart `δ_a = e^{iπ x_a}`, `q = e^{iπ x_{l+1}/2}`.
pub fn oracle_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let l = spec.rank();
    let mut vars: Vec<VarSpec> = (1..=l).map(|a| VarSpec::new(format!("delta{a}"), int(0), true)).collect();
    vars.push(VarSpec::new("q", int(0), true));
    Chart::plain(format!("x[{}]", spec.id()), vars).expect("valid oracle chart")
}

/// The generator-chart variables in terms of `δ, q`.
fn oracle_bindings(spec: &RootSystemSpec, ch: &Arc<Chart>) -> Result<BTreeMap<String, Poly>> {
    let l = spec.rank();
    let delta = |a: usize| -> Poly {
        if a == 0 {
            Poly::one(ch)
        } else {
            Poly::var_idx(ch, a - 1)
        }
    };
    // e^{iπ u} + e^{-iπ u} for u = x_a - x_{a-1}, or 2x_l - x_{l-1} for the last B_l variable
    let cos2 = |num: Poly, den: Poly| -> Result<Poly> {
        let r = &num * &den.unit_inverse()?;
        Ok(&r + &r.unit_inverse()?)
    };
    let mut b = BTreeMap::new();
    for a in 1..=l {
        let half = if spec.family() == Family::B && a == l {
            cos2(&delta(l) * &delta(l), delta(l - 1))?
        } else {
            cos2(delta(a), delta(a - 1))?
        };
        match spec.family() {
            Family::C => b.insert(format!("zeta{a}"), &half * &half),
            Family::B => b.insert(format!("rho{a}"), half),
        };
    }
    b.insert("Q".to_string(), Poly::var_idx(ch, l));
    Ok(b)
}

/// The twisted generators `ỹ_1..ỹ_l` over the oracle chart.
pub fn oracle_generators(spec: &RootSystemSpec) -> Result<Vec<Poly>> {
    let ch = oracle_chart(spec);
    let gens = build_generators(spec);
    let b = oracle_bindings(spec, &ch)?;
    let fw = gens.forward.as_ref().expect("generators have a forward map");
    (1..=spec.rank())
        .map(|j| fw.polys[&format!("y{j}")].substitute(&ch, &b))
        .collect()
}

/// Re-expresses polynomials over the oracle chart as polynomials in the
/// y-chart by solving for coefficients over a weighted monomial basis.
struct Reexpress {
    ychart: Arc<Chart>,
    images: Vec<Poly>,
    cache: HashMap<Monomial, Poly>,
}

impl Reexpress {
    fn image(&mut self, m: &Monomial) -> Result<Poly> {
        if let Some(p) = self.cache.get(m) {
            return Ok(p.clone());
        }
        let ch = self.images[0].chart().clone();
        let mut p = Poly::one(&ch);
        for (i, &e) in m.exponents().iter().enumerate() {
            if e != 0 {
                p = &p * &self.images[i].pow(e)?;
            }
        }
        self.cache.insert(m.clone(), p.clone());
        Ok(p)
    }

    fn solve(&mut self, target: &Poly, degree: &Rational, label: &str) -> Result<Poly> {
        if target.is_zero() {
            return Ok(Poly::zero(&self.ychart));
        }
        let vars: Vec<usize> = (0..self.ychart.nvars()).collect();
        let basis = monomials_of_degree(&self.ychart, &vars, degree);
        let images: Vec<Vec<Poly>> = basis.iter().map(|m| self.image(m).map(|p| vec![p])).collect::<Result<_>>()?;
        let eqs = coefficient_equations(&images, std::slice::from_ref(target));
        match solve_linear(basis.len(), &eqs) {
            LinearSolveResult::Unique(x) => Ok(Poly::from_terms(&self.ychart, basis.into_iter().zip(x))),
            _ => Err(Error::ReexpressionFailed(label.to_string())),
        }
    }
}

/// The intersection form `g^{ij}(y)` from its definition: differentiate the
/// generators in x-space, contract with the extended metric, and re-express
/// the invariant result in the y-chart.
pub fn compute_g_direct(spec: &RootSystemSpec, max_rank: usize) -> Result<BilinearForm> {
    let l = spec.rank();
    if l > max_rank {
        return Err(Error::InvalidSpec(format!("oracle limited to rank {max_rank}")));
    }
    let (metric, degs) = rootdata::build(spec);
    let ch = oracle_chart(spec);
    let gens = oracle_generators(spec)?;
    // v[i][a] = D_a ỹ_i with D_a = δ_a ∂/∂δ_a and D_{l+1} = q ∂/∂q
    let mut v: Vec<Vec<Poly>> = gens.iter().map(|g| (0..=l).map(|a| g.euler(a)).collect()).collect();
    let mut last = vec![Poly::zero(&ch); l + 1];
    last[l] = Poly::constant(&ch, int(4));
    v.push(last);
    let ychart = y_chart(spec);
    let rate = y_exp_rate(spec);
    let mut images: Vec<Poly> = gens.clone();
    let qe: i32 = (&rate * int(4)).to_integer().try_into().expect("small rate");
    images.push(Poly::var_idx(&ch, l).pow(qe)?);
    let mut re = Reexpress {
        ychart: ychart.clone(),
        images,
        cache: HashMap::new(),
    };
    let mut dy = degs.d.clone();
    dy.push(Rational::zero());
    let mut m = vec![vec![Poly::zero(&ychart); l + 1]; l + 1];
    for i in 0..=l {
        for j in i..=l {
            let mut acc = Poly::zero(&ch);
            for a in 0..l {
                for b in 0..l {
                    let c = &metric.m[a][b];
                    if c.is_zero() {
                        continue;
                    }
                    acc = &acc + &(&v[i][a] * &v[j][b]).scale(&(c * rat(-1, 4)));
                }
            }
            let c = &metric.m[l][l] * rat(-1, 16);
            acc = &acc + &(&v[i][l] * &v[j][l]).scale(&c);
            let p = re.solve(&acc, &(&dy[i] + &dy[j]), &format!("g^({},{})", i + 1, j + 1))?;
            m[i][j] = p.clone();
            m[j][i] = p;
        }
    }
    BilinearForm::new(ychart, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_of_three() {
        let ch = Chart::plain(
            "abc",
            ["a", "b", "c"].iter().map(|n| VarSpec::new(*n, int(1), false)).collect(),
        )
        .unwrap();
        let xs: Vec<Poly> = (0..3).map(|i| Poly::var_idx(&ch, i)).collect();
        let s = elementary_symmetric(&xs, &ch);
        assert_eq!(s[2], &(&(&xs[0] * &xs[1]) + &(&xs[0] * &xs[2])) + &(&xs[1] * &xs[2]));
        assert_eq!(s[3], &(&xs[0] * &xs[1]) * &xs[2]);
    }

    #[test]
    fn rank_two_generators() {
        let spec = RootSystemSpec::c(2, 2).unwrap();
        let g = build_generators(&spec);
        let fw = g.forward.unwrap();
        let s = &g.source;
        let q = Poly::var(s, "Q").unwrap();
        let z1 = Poly::var(s, "zeta1").unwrap();
        let z2 = Poly::var(s, "zeta2").unwrap();
        // d = (1, 2): E^{d_j} = Q^{4 d_j}
        assert_eq!(fw.polys["y1"], &q.pow(4).unwrap() * &(&z1 + &z2));
        assert_eq!(fw.polys["y2"], &q.pow(8).unwrap() * &(&z1 * &z2));
        assert_eq!(fw.polys["E"], q.pow(4).unwrap());
    }

    #[test]
    fn c3k1_generators_match_listing() {
        let spec = RootSystemSpec::c(3, 1).unwrap();
        let fw = build_generators(&spec).forward.unwrap();
        let s = &fw.chart;
        let q4 = Poly::var(s, "Q").unwrap().pow(4).unwrap();
        let z: Vec<Poly> = (1..=3).map(|a| Poly::var(s, &format!("zeta{a}")).unwrap()).collect();
        assert_eq!(fw.polys["y1"], &q4 * &(&(&z[0] + &z[1]) + &z[2]));
        assert_eq!(fw.polys["y3"], &q4 * &(&(&z[0] * &z[1]) * &z[2]));
    }

    #[test]
    fn theta_definitions_and_weights() {
        let spec = RootSystemSpec::c(2, 2).unwrap();
        let m = theta_to_y(&spec).unwrap();
        let y = &m.target;
        let inv = m.inverse.as_ref().unwrap();
        let e = Poly::var(y, "E").unwrap();
        assert_eq!(inv["th0"], e.pow(2).unwrap());
        assert_eq!(inv["th1"], &Poly::var(y, "y1").unwrap() * &e);
        assert_eq!(inv["th2"], Poly::var(y, "y2").unwrap());
        for l in 1..=5 {
            for k in 1..=l {
                let spec = RootSystemSpec::c(l, k).unwrap();
                let m = theta_to_y(&spec).unwrap();
                for p in m.inverse.as_ref().unwrap().values() {
                    assert!(p.is_homogeneous_of(&int(k as i64)));
                }
                assemble_p(&spec).unwrap();
            }
        }
    }

    #[test]
    fn rank_one_direct_form() {
        let spec = RootSystemSpec::c(1, 1).unwrap();
        let g = compute_g_direct(&spec, 4).unwrap();
        let y = &g.chart;
        let y1 = Poly::var(y, "y1").unwrap();
        let e = Poly::var(y, "E").unwrap();
        assert_eq!(g.m[0][0], (&e * &y1).scale(&int(4)));
        assert_eq!(g.m[0][1], y1);
        assert_eq!(g.m[1][1], Poly::one(y));
    }

    #[test]
    fn direct_form_last_row() {
        for (fam, l, k) in [(Family::C, 2, 1), (Family::C, 2, 2), (Family::B, 2, 1), (Family::B, 2, 2)] {
            let spec = RootSystemSpec::new(fam, l, k).unwrap();
            let g = compute_g_direct(&spec, 4).unwrap();
            let d = rootdata::degrees(&spec);
            let dk = &d[k - 1];
            assert_eq!(g.m[l][l], Poly::constant(&g.chart, dk.recip()));
            for mm in 0..l {
                let want = Poly::var_idx(&g.chart, mm).scale(&(&d[mm] / dk));
                assert_eq!(g.m[mm][l], want, "{spec} m={}", mm + 1);
            }
        }
    }
}
