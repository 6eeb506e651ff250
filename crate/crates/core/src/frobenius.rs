//! The potential `F` in flat coordinates, the Euler field, and the checks
//! that make `(η, F, E)` a Frobenius structure of charge 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coordmap::{dot, CoordMap};
use crate::error::{Error, Result};
use crate::exactalg::{coefficient_equations, int, rat, solve_linear, Chart, LinearSolveResult, Monomial, Poly, Rational};
use crate::flatcoords::{build_flat, FlatPipeline};
use crate::metrics::{self, transform_christoffel, BilinearForm, ChristoffelContra};
use crate::orbitspace;
use crate::rootdata::{self, Family, RootSystemSpec};

/// `E = Σ d̃_α t^α ∂_α + (1/k) ∂_{l+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerField {
    pub linear: Vec<Rational>,
    pub last: Rational,
}

impl EulerField {
    pub fn new(spec: &RootSystemSpec) -> EulerField {
        let mut dt = rootdata::flat_degrees(spec);
        dt.pop();
        EulerField {
            linear: dt,
            last: rat(1, spec.vertex() as i64),
        }
    }

    /// Lie derivative of a function on the t-chart.
    pub fn apply(&self, f: &Poly) -> Poly {
        let l = self.linear.len();
        let mut out = f.diff_coord(l).scale(&self.last);
        for (a, d) in self.linear.iter().enumerate() {
            if !d.is_zero() {
                out = &out + &f.euler(a).scale(d);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PotentialF {
    pub f: Poly,
    /// `½(t^k)² t^{l+1}`
    pub head: Poly,
    /// `½ t^k Σ_{i,j≠k} η_{ij} t^i t^j`
    pub cubic: Poly,
    /// The rest, free of `t^k` and of explicit `t^{l+1}`.
    pub g: Poly,
}

#[derive(Clone, Debug)]
pub struct FrobeniusStructure {
    pub spec: RootSystemSpec,
    pub chart: Arc<Chart>,
    pub eta: Vec<Vec<Rational>>,
    pub eta_lower: Vec<Vec<Rational>>,
    pub euler: EulerField,
    pub potential: PotentialF,
    /// `F_{abc}` from the connection of g.
    pub third: Vec<Vec<Vec<Poly>>>,
    /// g and its connection in the t-chart.
    pub g: BilinearForm,
    pub gamma: ChristoffelContra,
    pub charge: Rational,
    pub pipeline: FlatPipeline,
}

/// g and its connection carried through `y → z → w → t`.
pub fn g_in_t(pipeline: &FlatPipeline) -> Result<(BilinearForm, ChristoffelContra)> {
    let p = &pipeline.pencil;
    let (g, gam) = transform_christoffel(&p.g, &p.gamma_g, &pipeline.z.map)?;
    let (g, gam) = transform_christoffel(&g, &gam, &pipeline.w.stage.map)?;
    transform_christoffel(&g, &gam, &pipeline.t.stage.map)
}

fn rational_inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&r| !a[r][c].is_zero())
            .ok_or_else(|| Error::NotInvertible("constant metric".into()))?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let (x, y) = (&f * &a[c][j], &f * &inv[c][j]);
                    a[r][j] -= x;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Ok(inv)
}

/// `Σ_{a,b} m1[i][a] m2[j][b] x[a][b]` for constant matrices `m1, m2`.
fn raise2(m1: &[Vec<Rational>], m2: &[Vec<Rational>], x: &[Vec<Poly>], ch: &Arc<Chart>) -> Vec<Vec<Poly>> {
    let n = m1.len();
    let mut out = vec![vec![Poly::zero(ch); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Poly::zero(ch);
            for a in (0..n).filter(|&a| !m1[i][a].is_zero()) {
                for b in (0..n).filter(|&b| !m2[j][b].is_zero()) {
                    acc = &acc + &x[a][b].scale(&(&m1[i][a] * &m2[j][b]));
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// `c^{ij}_m = Γ^{ij}_m / d̃_j` (completed by symmetry for `j = l+1`, and
/// `c^{l+1,l+1}_m = η_{km}`), lowered to `F_{abm} = η_{ai}η_{bj}c^{ij}_m`.
pub fn third_derivatives(
    spec: &RootSystemSpec,
    gamma: &ChristoffelContra,
    eta_lower: &[Vec<Rational>],
) -> Result<Vec<Vec<Vec<Poly>>>> {
    let ch = &gamma.chart;
    let l = spec.rank();
    let k = spec.vertex();
    let n = l + 1;
    let dt = rootdata::flat_degrees(spec);
    let mut c = vec![vec![vec![Poly::zero(ch); n]; n]; n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                c[i][j][m] = if j < l {
                    gamma.g[i][j][m].scale(&dt[j].recip())
                } else if i < l {
                    gamma.g[j][i][m].scale(&dt[i].recip())
                } else {
                    Poly::constant(ch, eta_lower[k - 1][m].clone())
                };
            }
        }
        for i in 0..l {
            for j in 0..i {
                if c[i][j][m] != c[j][i][m] {
                    return Err(Error::SymmetryViolation(format!(
                        "c^({},{})_{} = {} but c^({},{})_{} = {}",
                        i + 1,
                        j + 1,
                        m + 1,
                        c[i][j][m],
                        j + 1,
                        i + 1,
                        m + 1,
                        c[j][i][m]
                    )));
                }
            }
        }
    }
    let mut f = vec![vec![vec![Poly::zero(ch); n]; n]; n];
    for m in 0..n {
        let cm: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|j| c[i][j][m].clone()).collect()).collect();
        let low = raise2(eta_lower, eta_lower, &cm, ch);
        for a in 0..n {
            for b in 0..n {
                f[a][b][m] = low[a][b].clone();
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for m in 0..n {
                if f[a][b][m] != f[a][m][b] || f[a][b][m] != f[b][a][m] {
                    return Err(Error::SymmetryViolation(format!("F_({},{},{})", a + 1, b + 1, m + 1)));
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if f[k - 1][a][b] != Poly::constant(ch, eta_lower[a][b].clone()) {
                return Err(Error::SymmetryViolation(format!(
                    "F_({k},{},{}) = {} differs from η_ij",
                    a + 1,
                    b + 1,
                    f[k - 1][a][b]
                )));
            }
        }
    }
    Ok(f)
}

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn d3(p: &Poly, (a, b, c): (usize, usize, usize)) -> Poly {
    p.diff_coord(a).diff_coord(b).diff_coord(c)
}

/// Solves `∂_a∂_b∂_c F = F_{abc}` over the monomials obtained by
/// antidifferentiating every term once in each index, and splits F into its
/// head, cubic and remaining parts.
pub fn integrate_potential(spec: &RootSystemSpec, third: &[Vec<Vec<Poly>>], eta_lower: &[Vec<Rational>]) -> Result<PotentialF> {
    let l = spec.rank();
    let k = spec.vertex();
    let n = l + 1;
    let ch = third[0][0][0].chart().clone();
    let log = l;
    let evar = l + 1;
    let mut support: BTreeMap<Monomial, ()> = BTreeMap::new();
    let trip = triples(n);
    for &(a, b, c) in &trip {
        for (m, _) in third[a][b][c].terms() {
            let mut mono = m.clone();
            for idx in [a, b, c] {
                if idx < l {
                    mono = mono.with_exp(idx, mono.exp(idx) + 1);
                } else if mono.exp(evar) == 0 {
                    mono = mono.with_exp(log, mono.exp(log) + 1);
                }
            }
            for idx in (0..l).filter(|&i| [a, b, c].contains(&i)) {
                let r = [a, b, c].iter().filter(|&&i| i == idx).count() as i32;
                if (-r..0).contains(&m.exp(idx)) {
                    return Err(Error::LogarithmicIntegral(format!(
                        "F_({},{},{}) contains t{}^{}",
                        a + 1,
                        b + 1,
                        c + 1,
                        idx + 1,
                        m.exp(idx)
                    )));
                }
            }
            support.insert(mono, ());
        }
    }
    let basis: Vec<Poly> = support.into_keys().map(|m| Poly::term(&ch, m, Rational::one())).collect();
    let images: Vec<Vec<Poly>> = basis.iter().map(|b| trip.iter().map(|&t| d3(b, t)).collect()).collect();
    let targets: Vec<Poly> = trip.iter().map(|&(a, b, c)| third[a][b][c].clone()).collect();
    let eqs = coefficient_equations(&images, &targets);
    let x = match solve_linear(basis.len(), &eqs) {
        LinearSolveResult::Unique(x) => x,
        LinearSolveResult::Parametric { particular, .. } => particular,
        LinearSolveResult::Inconsistent => {
            return Err(Error::IntegrabilityViolation("no potential has these third derivatives".into()))
        }
    };
    let mut f = Poly::zero(&ch);
    for (c, b) in x.iter().zip(&basis) {
        if !c.is_zero() {
            f = &f + &b.scale(c);
        }
    }
    for &t in &trip {
        if d3(&f, t) != third[t.0][t.1][t.2] {
            return Err(Error::Inconsistent(format!("F_{:?} after integration", t)));
        }
    }
    split_potential(spec, f, eta_lower, &ch, k)
}

fn split_potential(spec: &RootSystemSpec, f: Poly, eta_lower: &[Vec<Rational>], ch: &Arc<Chart>, k: usize) -> Result<PotentialF> {
    let l = spec.rank();
    let tk = Poly::var_idx(ch, k - 1);
    let half = rat(1, 2);
    let head = (&(&tk * &tk) * &Poly::var_idx(ch, l)).scale(&half);
    let mut quad = Poly::zero(ch);
    for i in (0..l).filter(|&i| i != k - 1) {
        for j in (0..l).filter(|&j| j != k - 1) {
            if !eta_lower[i][j].is_zero() {
                quad = &quad + &(&Poly::var_idx(ch, i) * &Poly::var_idx(ch, j)).scale(&eta_lower[i][j]);
            }
        }
    }
    let cubic = (&tk * &quad).scale(&half);
    let g = &(&f - &head) - &cubic;
    if g.degree_in(k - 1) != 0 || g.min_degree_in(k - 1) != 0 {
        return Err(Error::ShapeMismatch(format!("remainder depends on t{k}")));
    }
    if g.degree_in(l) != 0 {
        return Err(Error::ShapeMismatch(format!("remainder depends explicitly on t{}", l + 1)));
    }
    if !g.is_homogeneous_of(&int(2)) {
        return Err(Error::ShapeMismatch("remainder is not of degree 2".into()));
    }
    Ok(PotentialF { f, head, cubic, g })
}

/// The Frobenius structure of C_l with vertex k.
pub fn build_structure(spec: &RootSystemSpec) -> Result<FrobeniusStructure> {
    if spec.family() != Family::C {
        return Err(Error::InvalidSpec(format!("{spec}: use b_to_c for type B")));
    }
    let pipeline = build_flat(spec)?;
    let (g, gamma) = g_in_t(&pipeline)?;
    let eta = pipeline.t.eta.clone();
    let eta_lower = rational_inverse(&eta)?;
    let third = third_derivatives(spec, &gamma, &eta_lower)?;
    let potential = integrate_potential(spec, &third, &eta_lower)?;
    Ok(FrobeniusStructure {
        spec: *spec,
        chart: g.chart.clone(),
        eta,
        eta_lower,
        euler: EulerField::new(spec),
        potential,
        third,
        g,
        gamma,
        charge: Rational::one(),
        pipeline,
    })
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Failing entries, each with its residual.
    pub residuals: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, residuals: Vec<String>) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            passed: residuals.is_empty(),
            residuals,
        }
    }
}

impl FrobeniusStructure {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    /// Third derivatives of the integrated potential.
    pub fn potential_third(&self) -> Vec<Vec<Vec<Poly>>> {
        let n = self.dim();
        let f = &self.potential.f;
        let d1: Vec<Poly> = (0..n).map(|a| f.diff_coord(a)).collect();
        let d2: Vec<Vec<Poly>> = (0..n).map(|a| (0..n).map(|b| d1[a].diff_coord(b)).collect()).collect();
        (0..n)
            .map(|a| (0..n).map(|b| (0..n).map(|c| d2[a][b].diff_coord(c)).collect()).collect())
            .collect()
    }

    /// `F_{ijλ}η^{λμ}F_{μpq} = F_{pjλ}η^{λμ}F_{μiq}` for all quadruples.
    pub fn verify_wdvv(&self) -> CheckReport {
        wdvv_residuals(&self.potential_third(), &self.eta, &self.chart)
    }

    /// Unity, quasi-homogeneity and the charge-1 scaling of η.
    pub fn verify_euler_unity(&self) -> CheckReport {
        let n = self.dim();
        let k = self.spec.vertex();
        let ch = &self.chart;
        let f3 = self.potential_third();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let want = Poly::constant(ch, self.eta_lower[i][j].clone());
                if f3[k - 1][i][j] != want {
                    bad.push(format!("F_({k},{},{}) - η_ij = {}", i + 1, j + 1, &f3[k - 1][i][j] - &want));
                }
            }
        }
        let f = &self.potential.f;
        let tk = Poly::var_idx(ch, k - 1);
        let want = (&tk * &tk).scale(&rat(1, 2 * k as i64));
        let lhs = &self.euler.apply(f) - &f.scale(&int(2));
        if lhs != want {
            bad.push(format!("L_E F - 2F - (t^k)²/(2k) = {}", &lhs - &want));
        }
        let dt = self.degrees();
        for i in 0..n {
            for j in 0..n {
                if !self.eta[i][j].is_zero() && &dt[i] + &dt[j] != Rational::one() {
                    bad.push(format!("η^({},{}) pairs degrees {} and {}", i + 1, j + 1, dt[i], dt[j]));
                }
            }
        }
        CheckReport::new("euler", bad)
    }

    /// `g^{ij} = L_E F^{ij}` and `Γ^{ij}_m = d̃_j c^{ij}_m`, with
    /// `F^{ij} = η^{ia}η^{jb}∂_a∂_b F` and `c^{ij}_m = η^{ia}η^{jb}F_{abm}`.
    pub fn verify_intersection(&self) -> CheckReport {
        let n = self.dim();
        let ch = &self.chart;
        let f = &self.potential.f;
        let hess: Vec<Vec<Poly>> = (0..n).map(|a| (0..n).map(|b| f.diff_coord(a).diff_coord(b)).collect()).collect();
        let up = raise2(&self.eta, &self.eta, &hess, ch);
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let le = self.euler.apply(&up[i][j]);
                if le != self.g.m[i][j] {
                    bad.push(format!("g^({},{}) - L_E F^({},{}) = {}", i + 1, j + 1, i + 1, j + 1, &self.g.m[i][j] - &le));
                }
            }
        }
        let f3 = self.potential_third();
        let dt = self.degrees();
        for m in 0..n {
            let fm: Vec<Vec<Poly>> = (0..n).map(|a| (0..n).map(|b| f3[a][b][m].clone()).collect()).collect();
            let c = raise2(&self.eta, &self.eta, &fm, ch);
            for i in 0..n {
                for j in 0..n {
                    let want = c[i][j].scale(&dt[j]);
                    if self.gamma.g[i][j][m] != want {
                        bad.push(format!(
                            "Γ^({},{})_{} - d̃_j c = {}",
                            i + 1,
                            j + 1,
                            m + 1,
                            &self.gamma.g[i][j][m] - &want
                        ));
                    }
                }
            }
        }
        CheckReport::new("intersection", bad)
    }

    /// `g^{m,l+1} = d̃_m t^m`, `g^{l+1,l+1} = 1/k`, `Γ^{l+1,i}_j = d̃_j δ_ij`
    /// and the degrees `deg g^{ij} = d̃_i + d̃_j`.
    pub fn verify_g_shape(&self) -> CheckReport {
        let n = self.dim();
        let l = n - 1;
        let ch = &self.chart;
        let dt = self.degrees();
        let mut bad = Vec::new();
        for m in 0..l {
            let want = Poly::var_idx(ch, m).scale(&dt[m]);
            if self.g.m[m][l] != want {
                bad.push(format!("g^({},{}) = {}", m + 1, l + 1, self.g.m[m][l]));
            }
        }
        if self.g.m[l][l].as_constant() != Some(rat(1, self.spec.vertex() as i64)) {
            bad.push(format!("g^({},{}) = {}", l + 1, l + 1, self.g.m[l][l]));
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { Poly::constant(ch, dt[j].clone()) } else { Poly::zero(ch) };
                if self.gamma.g[l][i][j] != want {
                    bad.push(format!("Γ^({},{})_{} = {}", l + 1, i + 1, j + 1, self.gamma.g[l][i][j]));
                }
            }
        }
        for (i, j) in self.g.degree_violations(&dt) {
            bad.push(format!("g^({},{}) is not of degree {}", i + 1, j + 1, &dt[i] + &dt[j]));
        }
        for (i, j, m) in self.gamma.degree_violations(&dt) {
            bad.push(format!("Γ^({},{})_{} has the wrong degree", i + 1, j + 1, m + 1));
        }
        CheckReport::new("g-shape", bad)
    }

    /// `d̃_1..d̃_{l+1}`.
    pub fn degrees(&self) -> Vec<Rational> {
        rootdata::flat_degrees(&self.spec)
    }
}

/// Associativity residuals of a third-derivative tensor with respect to a
/// constant η.
pub fn wdvv_residuals(f3: &[Vec<Vec<Poly>>], eta: &[Vec<Rational>], ch: &Arc<Chart>) -> CheckReport {
    let n = eta.len();
    // x[i][j][μ] = F_{ijλ} η^{λμ}
    let x: Vec<Vec<Vec<Poly>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|mu| {
                            let mut acc = Poly::zero(ch);
                            for lam in (0..n).filter(|&lam| !eta[lam][mu].is_zero()) {
                                acc = &acc + &f3[i][j][lam].scale(&eta[lam][mu]);
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let s = |i: usize, j: usize, p: usize, q: usize| dot(ch, (0..n).map(|mu| (&x[i][j][mu], &f3[mu][p][q])));
    let mut bad = Vec::new();
    for i in 0..n {
        for p in i + 1..n {
            for j in 0..n {
                for q in 0..n {
                    let r = &s(i, j, p, q) - &s(p, j, i, q);
                    if !r.is_zero() {
                        bad.push(format!("({},{},{},{}): {r}", i + 1, j + 1, p + 1, q + 1));
                    }
                }
            }
        }
    }
    CheckReport::new("wdvv", bad)
}

/// The structure of B_l: the C_l structure with the same rank and vertex,
/// together with the chart change from the C_l y-chart to the B_l y-chart.
/// For `l ≤ oracle_max_rank` the pulled-back form is compared with the
/// direct B_l computation.
pub fn b_to_c(spec_b: &RootSystemSpec, oracle_max_rank: usize) -> Result<(FrobeniusStructure, CoordMap)> {
    let map = metrics::c_to_b_map(spec_b)?;
    let c = build_structure(&spec_b.as_c())?;
    if spec_b.rank() <= oracle_max_rank {
        let pulled = metrics::transform_form_exact_div(&c.pipeline.pencil.g, &map)?;
        let direct = orbitspace::compute_g_direct(spec_b, oracle_max_rank)?;
        if pulled.m != direct.m {
            return Err(Error::OracleMismatch(format!("{spec_b}: pulled-back C_l form differs from the direct one")));
        }
    }
    Ok((c, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(ch: &Arc<Chart>, n: &str) -> Poly {
        Poly::var(ch, n).unwrap()
    }

    #[test]
    fn rank_one_potential() {
        let s = RootSystemSpec::c(1, 1).unwrap();
        let st = build_structure(&s).unwrap();
        let ch = &st.chart;
        let (t1, t2, e) = (v(ch, "t1"), v(ch, "t2"), v(ch, "E"));
        let want = &(&(&t1 * &t1) * &t2).scale(&rat(1, 2)) + &(&e * &e).scale(&rat(1, 2));
        assert_eq!(st.potential.f, want);
        assert_eq!(st.third[1][1][1], (&e * &e).scale(&int(4)));
        let lhs = &st.euler.apply(&st.potential.f) - &st.potential.f.scale(&int(2));
        assert_eq!(lhs, (&t1 * &t1).scale(&rat(1, 2)));
    }

    #[test]
    fn c3k1_values() {
        let s = RootSystemSpec::c(3, 1).unwrap();
        let st = build_structure(&s).unwrap();
        let ch = &st.chart;
        let (t2, t3) = (v(ch, "t2"), v(ch, "t3"));
        let want = &(&t2 * &t3.pow(-1).unwrap()).scale(&rat(1, 4)) - &(&t3 * &t3).scale(&rat(1, 12));
        assert_eq!(st.g.m[2][2], want);
        let m = Monomial::from_exponents(&[0, 3, -1, 0, 0]);
        assert_eq!(st.potential.f.coeff(&m), rat(1, 48));
        let m = Monomial::from_exponents(&[0, 0, 8, 0, 0]);
        assert_eq!(st.potential.f.coeff(&m), rat(-1, 36288));
        assert_eq!(st.potential.f.nterms(), 9);
        for r in [st.verify_wdvv(), st.verify_euler_unity(), st.verify_intersection(), st.verify_g_shape()] {
            assert!(r.passed, "{}: {:?}", r.name, r.residuals);
        }
    }

    #[test]
    fn corrupted_potential_breaks_wdvv() {
        let s = RootSystemSpec::c(3, 1).unwrap();
        let mut st = build_structure(&s).unwrap();
        let ch = st.chart.clone();
        let m = Monomial::from_exponents(&[0, 0, 8, 0, 0]);
        st.potential.f = &st.potential.f + &Poly::term(&ch, m, rat(1, 1000));
        assert!(!st.verify_wdvv().passed);
    }

    #[test]
    fn small_structures_pass_all_checks() {
        for l in 1..=3 {
            for k in 1..=l {
                let s = RootSystemSpec::c(l, k).unwrap();
                let st = build_structure(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
                for r in [st.verify_wdvv(), st.verify_euler_unity(), st.verify_intersection(), st.verify_g_shape()] {
                    assert!(r.passed, "{s} {}: {:?}", r.name, r.residuals);
                }
            }
        }
    }

    #[test]
    fn logarithmic_third_derivative_is_rejected() {
        let s = RootSystemSpec::c(2, 1).unwrap();
        let st = build_structure(&s).unwrap();
        let mut third = st.third.clone();
        let bad = Poly::var_idx(&st.chart, 1).pow(-1).unwrap();
        third[0][0][1] = &third[0][0][1] + &bad;
        let e = integrate_potential(&s, &third, &st.eta_lower).unwrap_err();
        assert!(matches!(e, Error::LogarithmicIntegral(_)), "{e}");
    }

    #[test]
    fn b_structure_is_the_c_structure() {
        let s = RootSystemSpec::b(3, 3).unwrap();
        let (st, map) = b_to_c(&s, 3).unwrap();
        assert_eq!(st.spec, RootSystemSpec::c(3, 3).unwrap());
        assert_eq!(map.target.vars[3].name, "H");
    }
}
