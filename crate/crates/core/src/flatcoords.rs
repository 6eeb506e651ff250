//! Flat coordinates of η in three stages: a triangular change `y → z` that
//! clears the R/P entries and normalizes the Q-block, a change `z → w`
//! involving a root `s` of `z^l`, and the flat chart `w → t`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coordmap::{dot, CoordMap, Forward};
use crate::error::{Error, Result};
use crate::exactalg::matrix::{inverse_unit_det, PolyMatrix};
use crate::exactalg::{
    coefficient_equations, int, monomials_of_degree, rat, solve_linear, solve_sparsest, Chart, Coord,
    LinearEquation, LinearSolveResult, Poly, Rational, VarSpec,
};
use crate::metrics::{build_pencil, transform_christoffel, BilinearForm, ChristoffelContra, FlatPencil};
use crate::rootdata::{self, Family, RootSystemSpec};

/// `p_j` for `j ≤ k` over the y-chart and the constants `c^j_m` of the
/// linear block, `c[i][m]` standing for `c^{k+1+i}_{k+1+m}`.
#[derive(Clone, Debug)]
pub struct TriangularChange {
    pub p: Vec<Poly>,
    pub c: Vec<Vec<Rational>>,
    /// Whether every `p_j` was the unique solution of its ansatz.
    pub unique: bool,
}

/// `B^i_j` for `1 ≤ i ≤ j ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BSeries {
    pub n: usize,
    b: Vec<Vec<Rational>>,
}

impl BSeries {
    /// `B^i_j` (1-based), zero below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        if j < i {
            Rational::zero()
        } else {
            self.b[i - 1][j - 1].clone()
        }
    }
}

/// A chart with η and its connection transported into it.
#[derive(Clone, Debug)]
pub struct ChartStage {
    pub map: CoordMap,
    pub eta: BilinearForm,
    pub gamma: ChristoffelContra,
}

#[derive(Clone, Debug)]
pub struct WChart {
    pub stage: ChartStage,
    /// `s = w^l` with `s^{2(l-k)} = z^l`; `None` when `k = l`.
    pub root_exponent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FlatChart {
    pub stage: ChartStage,
    /// `h_j` over the w-chart for `j = k+1..l-1`.
    pub h: Vec<(usize, Poly)>,
    pub unique: bool,
    /// Constant `η^{ij}` in the t-chart.
    pub eta: Vec<Vec<Rational>>,
}

/// Every stage from the pencil to the flat chart.
#[derive(Clone, Debug)]
pub struct FlatPipeline {
    pub spec: RootSystemSpec,
    pub pencil: FlatPencil,
    pub change: TriangularChange,
    pub bseries: BSeries,
    pub z: ChartStage,
    pub w: WChart,
    pub t: FlatChart,
}

/// Left side of `∇df = 0` raised with η:
/// `η^{ia}η^{jb}∂_a∂_b f + η^{jb}γ^{ic}_b ∂_c f`.
pub struct FlatnessOperator {
    chart: Arc<Chart>,
    eta: PolyMatrix,
    /// `m[i][j][c] = Σ_b η^{jb} γ^{ic}_b`
    m: Vec<Vec<Vec<Poly>>>,
}

impl FlatnessOperator {
    pub fn new(eta: &BilinearForm, gamma: &ChristoffelContra) -> FlatnessOperator {
        let ch = eta.chart.clone();
        let n = eta.dim();
        let mut m = vec![vec![vec![Poly::zero(&ch); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for c in 0..n {
                    m[i][j][c] = dot(&ch, (0..n).map(|b| (&eta.m[j][b], &gamma.g[i][c][b])));
                }
            }
        }
        FlatnessOperator {
            chart: ch,
            eta: eta.m.clone(),
            m,
        }
    }

    /// All `n²` components, row-major.
    pub fn apply(&self, f: &Poly) -> Vec<Poly> {
        let ch = &self.chart;
        let n = self.eta.len();
        let grad: Vec<Poly> = (0..n).map(|c| f.diff_coord(c)).collect();
        let hess: Vec<Vec<Poly>> = (0..n).map(|a| (0..n).map(|b| grad[a].diff_coord(b)).collect()).collect();
        let eh: Vec<Vec<Poly>> = (0..n)
            .map(|i| (0..n).map(|b| dot(ch, (0..n).map(|a| (&self.eta[i][a], &hess[a][b])))).collect())
            .collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let first = dot(ch, (0..n).map(|b| (&eh[i][b], &self.eta[j][b])));
                let second = dot(ch, (0..n).map(|c| (&self.m[i][j][c], &grad[c])));
                out.push(&first + &second);
            }
        }
        out
    }

    pub fn is_flat(&self, f: &Poly) -> bool {
        self.apply(f).iter().all(|p| p.is_zero())
    }

    /// Coefficients `x` with `f0 + Σ x_u basis_u` flat, sparsest when not
    /// unique. Returns the combination and the uniqueness flag.
    pub fn solve(&self, f0: &Poly, basis: &[Poly], what: &str) -> Result<(Poly, bool)> {
        let target: Vec<Poly> = self.apply(f0).iter().map(|p| p.neg()).collect();
        if basis.is_empty() {
            return if target.iter().all(|p| p.is_zero()) {
                Ok((f0.clone(), true))
            } else {
                Err(Error::AnsatzInsufficient(format!("{what}: empty ansatz")))
            };
        }
        let images: Vec<Vec<Poly>> = basis.iter().map(|b| self.apply(b)).collect();
        let eqs = coefficient_equations(&images, &target);
        let (x, unique) = solve_sparsest(basis.len(), &eqs).ok_or_else(|| Error::AnsatzInsufficient(what.to_string()))?;
        let mut f = f0.clone();
        for (c, b) in x.iter().zip(basis) {
            if !c.is_zero() {
                f = &f + &b.scale(c);
            }
        }
        Ok((f, unique))
    }
}

/// `p_1..p_k` with `y^j + p_j` flat for η, `p_j` weighted-homogeneous of
/// degree `d_j` in `y^1..y^{j-1}, E`.
pub fn solve_p_block(spec: &RootSystemSpec, pencil: &FlatPencil) -> Result<(Vec<Poly>, bool)> {
    let ch = &pencil.chart;
    let l = spec.rank();
    let d = rootdata::degrees(spec);
    let op = FlatnessOperator::new(&pencil.eta, &pencil.gamma_eta);
    let mut out = Vec::new();
    let mut unique = true;
    for j in 1..=spec.vertex() {
        let mut vars: Vec<usize> = (0..j - 1).collect();
        vars.push(l);
        let basis: Vec<Poly> = monomials_of_degree(ch, &vars, &d[j - 1])
            .into_iter()
            .map(|m| Poly::term(ch, m, Rational::one()))
            .collect();
        let yj = Poly::var_idx(ch, j - 1);
        let (f, u) = op.solve(&yj, &basis, &format!("p_{j}"))?;
        unique &= u;
        out.push(&f - &yj);
    }
    Ok((out, unique))
}

#[derive(Clone)]
enum Entry {
    Known(Rational),
    Unknown(usize),
}

/// The constants `B^i_j` from the quadratic relations, solved level by
/// level, and checked against the Taylor coefficients of
/// `cosh(√t/2)(2sinh(√t/2)/√t)^{2i-1}`.
pub fn b_coefficients(n: usize) -> Result<BSeries> {
    let b = b_by_recursion(n)?;
    let series = b_by_series(n);
    for i in 1..=n {
        for j in i..=n {
            if b[i - 1][j - 1] != series[i - 1][j - 1] {
                return Err(Error::SeriesRecursionMismatch { i, j });
            }
        }
    }
    Ok(BSeries { n, b })
}

fn b_by_recursion(n: usize) -> Result<Vec<Vec<Rational>>> {
    let mut b = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        b[i][i] = Rational::one();
    }
    for m in 2..=n {
        // unknowns x_a = B^a_m for a = 1..m-1 (index a-1)
        let get = |b: &Vec<Vec<Rational>>, a: usize, lvl: usize| -> Entry {
            if a > lvl {
                Entry::Known(Rational::zero())
            } else if lvl == m && a < m {
                Entry::Unknown(a - 1)
            } else {
                Entry::Known(b[a - 1][lvl - 1].clone())
            }
        };
        let mut eqs = Vec::new();
        for i in 1..m {
            for j in i..m {
                if i + j > m {
                    break;
                }
                let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
                let mut rhs = Rational::zero();
                let add = |e: Entry, c: Rational, coeffs: &mut BTreeMap<usize, Rational>, rhs: &mut Rational| match e {
                    Entry::Known(v) => *rhs -= c * v,
                    Entry::Unknown(u) => *coeffs.entry(u).or_insert_with(Rational::zero) += c,
                };
                add(get(&b, i + j - 1, m), int(4 * (i + j - 1) as i64), &mut coeffs, &mut rhs);
                add(get(&b, i + j, m), int((i + j) as i64), &mut coeffs, &mut rhs);
                let mm = int(4 * m as i64);
                for alpha in i..=m {
                    let beta = m + 1 - alpha;
                    if beta < j {
                        continue;
                    }
                    match (get(&b, i, alpha), get(&b, j, beta)) {
                        (Entry::Known(p), Entry::Known(q)) => rhs += &mm * p * q,
                        (Entry::Known(p), Entry::Unknown(u)) | (Entry::Unknown(u), Entry::Known(p)) => {
                            *coeffs.entry(u).or_insert_with(Rational::zero) -= &mm * p
                        }
                        (Entry::Unknown(_), Entry::Unknown(_)) => unreachable!("two factors at level {m}"),
                    }
                }
                eqs.push(LinearEquation::new(coeffs.into_iter().collect(), rhs));
            }
        }
        match solve_linear(m - 1, &eqs) {
            LinearSolveResult::Unique(x) => {
                for (a, v) in x.into_iter().enumerate() {
                    b[a][m - 1] = v;
                }
            }
            other => {
                return Err(Error::Inconsistent(format!("B-coefficients at level {m}: {other:?}")));
            }
        }
    }
    Ok(b)
}

fn series_mul(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn b_by_series(n: usize) -> Vec<Vec<Rational>> {
    let len = n.max(1);
    let mut fact = vec![Rational::one()];
    for i in 1..=2 * len + 1 {
        let next = &fact[i - 1] * int(i as i64);
        fact.push(next);
    }
    let four = |p: usize| int(4).pow(p as i32);
    // cosh(√t/2) = Σ (t/4)^p/(2p)!, 2sinh(√t/2)/√t = Σ (t/4)^p/(2p+1)!
    let ch: Vec<Rational> = (0..len).map(|p| (&four(p) * &fact[2 * p]).recip()).collect();
    let sh: Vec<Rational> = (0..len).map(|p| (&four(p) * &fact[2 * p + 1]).recip()).collect();
    let mut out = vec![vec![Rational::zero(); n]; n];
    let mut power = sh.clone();
    for i in 1..=n {
        let f = series_mul(&ch, &power, len);
        for alpha in 0..=n - i {
            out[i - 1][i - 1 + alpha] = f[alpha].clone();
        }
        power = series_mul(&power, &series_mul(&sh, &sh, len), len);
    }
    out
}

/// Chart `z^1..z^l, E` with the y-chart weights.
fn z_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    renamed_y_chart(spec, "z")
}

fn renamed_y_chart(spec: &RootSystemSpec, prefix: &str) -> Arc<Chart> {
    let y = crate::orbitspace::y_chart(spec);
    let mut vars = y.vars.clone();
    for (j, v) in vars.iter_mut().enumerate().take(spec.rank()) {
        v.name = format!("{prefix}{}", j + 1);
    }
    Chart::new(format!("{prefix}[{}]", spec.id()), vars, y.coords.clone()).expect("valid chart")
}

/// Inverse of a unit upper triangular rational matrix.
fn unit_upper_inverse(b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = b.len();
    let mut x = vec![vec![Rational::zero(); n]; n];
    for col in 0..n {
        for row in (0..=col).rev() {
            let mut v = if row == col { Rational::one() } else { Rational::zero() };
            for m in row + 1..=col {
                v -= &b[row][m] * &x[m][col];
            }
            x[row][col] = v;
        }
    }
    x
}

/// The change `y → z` and η in the z-chart.
pub fn build_z_chart(spec: &RootSystemSpec, pencil: &FlatPencil) -> Result<(TriangularChange, BSeries, ChartStage)> {
    check_c(spec)?;
    let l = spec.rank();
    let k = spec.vertex();
    let n = l - k;
    let y = pencil.chart.clone();
    let z = z_chart(spec);
    let (p, unique) = solve_p_block(spec, pencil)?;
    let bs = b_coefficients(n)?;
    let bmat: Vec<Vec<Rational>> = (1..=n).map(|i| (1..=n).map(|m| bs.get(i, m)).collect()).collect();
    let c = unit_upper_inverse(&bmat);

    let mut inverse: BTreeMap<String, Poly> = BTreeMap::new();
    inverse.insert("E".into(), Poly::var_idx(&z, l));
    let mut forward: BTreeMap<String, Poly> = BTreeMap::new();
    forward.insert("E".into(), Poly::var_idx(&y, l));
    for j in 1..=k {
        let pz = p[j - 1].substitute(&z, &inverse)?;
        inverse.insert(format!("y{j}"), &Poly::var_idx(&z, j - 1) - &pz);
        forward.insert(format!("z{j}"), &Poly::var_idx(&y, j - 1) + &p[j - 1]);
    }
    for i in 0..n {
        let mut yi = Poly::zero(&z);
        let mut zi = Poly::zero(&y);
        for m in i..n {
            yi = &yi + &Poly::var_idx(&z, k + m).scale(&bmat[i][m]);
            zi = &zi + &Poly::var_idx(&y, k + m).scale(&c[i][m]);
        }
        inverse.insert(format!("y{}", k + 1 + i), yi);
        forward.insert(format!("z{}", k + 1 + i), zi);
    }
    let map = CoordMap::new(y.clone(), z, Some(inverse.clone()), Some(Forward::plain(&y, Some(&inverse), forward)))?;
    let (eta, gamma) = transform_christoffel(&pencil.eta, &pencil.gamma_eta, &map)?;
    check_z_form(spec, &eta)?;
    Ok((TriangularChange { p, c, unique }, bs, ChartStage { map, eta, gamma }))
}

fn check_c(spec: &RootSystemSpec) -> Result<()> {
    if spec.family() != Family::C {
        return Err(Error::InvalidSpec(format!("flat coordinates are built for C_l, got {spec}")));
    }
    Ok(())
}

/// η in the z-chart: `k` on the anti-diagonal of the first `k-1` indices,
/// `η^{k,l+1} = 1`, `η^{k+a,k+b} = 4(a+b-1)z^{k+a+b-1}`.
pub fn z_form(spec: &RootSystemSpec, z: &Arc<Chart>) -> PolyMatrix {
    let l = spec.rank();
    let k = spec.vertex();
    let mut m = vec![vec![Poly::zero(z); l + 1]; l + 1];
    for i in 1..k {
        m[i - 1][k - i - 1] = Poly::constant(z, int(k as i64));
    }
    m[k - 1][l] = Poly::one(z);
    m[l][k - 1] = Poly::one(z);
    for a in 1..=l - k {
        for b in 1..=l - k {
            let s = a + b - 1;
            if s <= l - k {
                m[k + a - 1][k + b - 1] = Poly::var_idx(z, k + s - 1).scale(&int(4 * s as i64));
            }
        }
    }
    m
}

fn check_z_form(spec: &RootSystemSpec, eta: &BilinearForm) -> Result<()> {
    let want = z_form(spec, &eta.chart);
    compare_matrix(&eta.m, &want).map_err(|(i, j)| {
        Error::BlockFormMismatch(format!(
            "z-chart η^({},{}) = {}, expected {}",
            i + 1,
            j + 1,
            eta.m[i][j],
            want[i][j]
        ))
    })
}

fn compare_matrix(got: &PolyMatrix, want: &PolyMatrix) -> std::result::Result<(), (usize, usize)> {
    for i in 0..got.len() {
        for j in 0..got.len() {
            if got[i][j] != want[i][j] {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

/// Chart `w^1..w^l, E`; `w^l = s` is a Laurent variable.
fn w_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let l = spec.rank() as i64;
    let k = spec.vertex() as i64;
    let y = crate::orbitspace::y_chart(spec);
    let mut vars = Vec::new();
    for j in 1..=l {
        let (w, laurent) = if j <= k {
            (int(j), false)
        } else if j == l {
            (rat(k, 2 * (l - k)), true)
        } else if j == k + 1 {
            (rat(k * (2 * l - 2 * k - 1), 2 * (l - k)), false)
        } else {
            (rat(k * (l - j), l - k), false)
        };
        vars.push(VarSpec::new(format!("w{j}"), w, laurent));
    }
    vars.push(y.vars[spec.rank()].clone());
    Chart::new(format!("w[{}]", spec.id()), vars, y.coords.clone()).expect("valid w-chart")
}

/// The change `z → w` and η in the w-chart.
pub fn build_w_chart(spec: &RootSystemSpec, z: &ChartStage) -> Result<WChart> {
    let l = spec.rank();
    let k = spec.vertex();
    let zc = z.map.target.clone();
    let w = w_chart(spec);
    let mut inverse = BTreeMap::new();
    inverse.insert("E".to_string(), Poly::var_idx(&w, l));
    for j in 1..=k {
        inverse.insert(format!("z{j}"), Poly::var_idx(&w, j - 1));
    }
    let (map, root_exponent) = if k == l {
        let mut polys = BTreeMap::new();
        polys.insert("E".to_string(), Poly::var_idx(&zc, l));
        for j in 1..=l {
            polys.insert(format!("w{j}"), Poly::var_idx(&zc, j - 1));
        }
        let fw = Forward::plain(&zc, Some(&inverse), polys);
        (CoordMap::new(zc, w, Some(inverse), Some(fw))?, None)
    } else {
        let root = 2 * (l - k);
        let s = Poly::var_idx(&w, l - 1);
        for j in k + 1..l {
            let e = if j == k + 1 { 1 } else { 2 * (j - k) };
            inverse.insert(format!("z{j}"), &Poly::var_idx(&w, j - 1) * &s.pow(e as i32)?);
        }
        inverse.insert(format!("z{l}"), s.pow(root as i32)?);

        // z^1..z^{l-1}, s, E with z^l = s^{2(l-k)}
        let mut vars: Vec<VarSpec> = zc.vars[..l - 1].to_vec();
        vars.push(VarSpec::new("s", w.vars[l - 1].weight.clone(), true));
        vars.push(zc.vars[l].clone());
        let ext = Chart::new(format!("z-ext[{}]", spec.id()), vars, zc.coords.clone())?;
        let se = Poly::var_idx(&ext, l - 1);
        let mut embed = BTreeMap::new();
        let mut lift = BTreeMap::new();
        let mut polys = BTreeMap::new();
        for j in 1..l {
            let name = format!("z{j}");
            embed.insert(name.clone(), Poly::var_idx(&ext, j - 1));
            lift.insert(name.clone(), inverse[&name].clone());
            let zj = Poly::var_idx(&ext, j - 1);
            let wj = if j <= k {
                zj
            } else {
                let e = if j == k + 1 { 1 } else { 2 * (j - k) };
                &zj * &se.pow(-(e as i32))?
            };
            polys.insert(format!("w{j}"), wj);
        }
        embed.insert(format!("z{l}"), se.pow(root as i32)?);
        embed.insert("E".into(), Poly::var_idx(&ext, l));
        lift.insert("s".into(), s.clone());
        lift.insert("E".into(), Poly::var_idx(&w, l));
        polys.insert(format!("w{l}"), se);
        polys.insert("E".into(), Poly::var_idx(&ext, l));
        let fw = Forward {
            chart: ext,
            embed,
            lift,
            polys,
        };
        (CoordMap::new(zc, w, Some(inverse), Some(fw))?, Some(root))
    };
    let (eta, gamma) = transform_christoffel(&z.eta, &z.gamma, &map)?;
    check_w_form(spec, &eta)?;
    Ok(WChart {
        stage: ChartStage { map, eta, gamma },
        root_exponent,
    })
}

/// η in the w-chart: the anti-diagonal `k` block, `η^{k,l+1} = 1`,
/// `η^{k+1,l} = 2` (or `η^{l,l} = 1` when `l = k+1`), and
/// `η^{k+a,k+b} = S_{k+a+b-1}` for `2 ≤ a, b ≤ l-k-1` with
/// `S_m = 4(m-k)s^{-2}w^m` and `S_l = 4(l-k)s^{-2}`.
pub fn w_form(spec: &RootSystemSpec, w: &Arc<Chart>) -> PolyMatrix {
    let l = spec.rank();
    let k = spec.vertex();
    let mut m = vec![vec![Poly::zero(w); l + 1]; l + 1];
    for i in 1..k {
        m[i - 1][k - i - 1] = Poly::constant(w, int(k as i64));
    }
    m[k - 1][l] = Poly::one(w);
    m[l][k - 1] = Poly::one(w);
    if l == k {
        return m;
    }
    if l == k + 1 {
        m[l - 1][l - 1] = Poly::one(w);
        return m;
    }
    m[k][l - 1] = Poly::constant(w, int(2));
    m[l - 1][k] = Poly::constant(w, int(2));
    let s2 = Poly::var_idx(w, l - 1).pow(-2).expect("s is a Laurent variable");
    for a in 2..l - k {
        for b in 2..l - k {
            let idx = k + a + b - 1;
            if idx > l {
                continue;
            }
            let e = if idx == l {
                s2.scale(&int(4 * (l - k) as i64))
            } else {
                (&s2 * &Poly::var_idx(w, idx - 1)).scale(&int(4 * (idx - k) as i64))
            };
            m[k + a - 1][k + b - 1] = e;
        }
    }
    m
}

fn check_w_form(spec: &RootSystemSpec, eta: &BilinearForm) -> Result<()> {
    let want = w_form(spec, &eta.chart);
    compare_matrix(&eta.m, &want).map_err(|(i, j)| {
        Error::BlockFormMismatch(format!(
            "w-chart η^({},{}) = {}, expected {}",
            i + 1,
            j + 1,
            eta.m[i][j],
            want[i][j]
        ))
    })
}

/// Covariant `η_{ij}` and `γ^m_{ij}` (stored `[m][i][j]`) in the w-chart.
#[derive(Clone, Debug)]
pub struct CovariantConnection {
    pub eta_lower: PolyMatrix,
    pub gamma: Vec<Vec<Vec<Poly>>>,
}

/// Lowers the connection of η in the w-chart and checks its vanishing and
/// polynomiality pattern.
pub fn gamma_w(spec: &RootSystemSpec, w: &WChart) -> Result<CovariantConnection> {
    let st = &w.stage;
    let ch = &st.eta.chart;
    let n = st.eta.dim();
    let l = spec.rank();
    let k = spec.vertex();
    let lower = inverse_unit_det(&st.eta.m, ch)?;
    // γ^m_{ij} = -η_{is} Γ^{sm}_j
    let mut gamma = vec![vec![vec![Poly::zero(ch); n]; n]; n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[m][i][j] = dot(ch, (0..n).map(|s| (&lower[i][s], &st.gamma.g[s][m][j]))).neg();
            }
        }
    }
    let fail = |msg: String| Err(Error::PropertyViolation(msg));
    // coordinates are 1-based in messages
    for m in 1..=n {
        if m <= k || m == l || m == l + 1 {
            for i in 0..n {
                for j in 0..n {
                    if !gamma[m - 1][i][j].is_zero() {
                        return fail(format!("γ^{m}_({},{}) = {} is not zero", i + 1, j + 1, gamma[m - 1][i][j]));
                    }
                }
            }
        }
    }
    if l > k {
        let allowed: Vec<usize> = (k + 2..l).collect();
        let polynomial_in = |p: &Poly| {
            (0..ch.nvars()).all(|v| {
                if allowed.contains(&v) || v == l - 1 {
                    p.min_degree_in(v) >= 0
                } else {
                    p.degree_in(v) == 0 && p.min_degree_in(v) == 0
                }
            })
        };
        let wl = l - 1;
        for i in 0..n {
            for j in 0..n {
                let g = &gamma[k][i][j];
                let want = lower[i][j].diff_coord(wl).neg();
                if *g != want {
                    return fail(format!("γ^{}_({},{}) = {g}, expected -∂η_ij/∂w^l = {want}", k + 1, i + 1, j + 1));
                }
                if !polynomial_in(g) {
                    return fail(format!("γ^{}_({},{}) = {g} is not a polynomial in w^{}..w^{l}", k + 1, i + 1, j + 1, k + 3));
                }
            }
        }
        for m in k + 2..l {
            for i in (0..n).filter(|&i| i != l - 1) {
                for j in (0..n).filter(|&j| j != l - 1) {
                    let g = &gamma[m - 1][i][j];
                    if !polynomial_in(g) {
                        return fail(format!("γ^{m}_({},{}) = {g} is not a polynomial", i + 1, j + 1));
                    }
                }
            }
            let inv = Poly::var_idx(ch, l - 1).pow(-1)?;
            for j in 0..n {
                let want = if j == m - 1 { inv.clone() } else { Poly::zero(ch) };
                if gamma[m - 1][l - 1][j] != want {
                    return fail(format!("γ^{m}_({l},{}) = {}, expected {want}", j + 1, gamma[m - 1][l - 1][j]));
                }
            }
        }
    }
    Ok(CovariantConnection { eta_lower: lower, gamma })
}

/// Chart `t^1..t^l, t^{l+1}, E = e^{t^{l+1}}` with weights `d̃`, `deg E = 1/k`,
/// `t^l` Laurent; `t^{l+1}` is kept as an explicit variable as well.
pub fn t_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let l = spec.rank();
    let dt = rootdata::flat_degrees(spec);
    let mut vars: Vec<VarSpec> = (1..=l).map(|j| VarSpec::new(format!("t{j}"), dt[j - 1].clone(), j == l)).collect();
    vars.push(VarSpec::new(format!("t{}", l + 1), Rational::zero(), false));
    vars.push(VarSpec::new("E", rat(1, spec.vertex() as i64), true));
    let mut coords: Vec<Coord> = (0..l).map(Coord::Var).collect();
    coords.push(Coord::Exp {
        exp_var: l + 1,
        rate: Rational::one(),
        log_var: Some(l),
    });
    Chart::new(format!("t[{}]", spec.id()), vars, coords).expect("valid t-chart")
}

/// The constant η of the t-chart: `η^{i,k-i} = k`, `η^{k,l+1} = 1`,
/// `η^{k+1,l} = 2`, `η^{i,k+l+1-i} = 4(l-k)` for `k+2 ≤ i ≤ l-1`, and
/// `η^{l,l} = 1` in place of the pair `(k+1, l)` when `l = k+1`.
pub fn flat_eta(spec: &RootSystemSpec) -> Vec<Vec<Rational>> {
    let mut m = normal_form_pattern(spec);
    let (l, k) = (spec.rank(), spec.vertex());
    if l == k + 1 {
        m[l - 1][l - 1] = Rational::one();
    }
    m
}

/// The constant η pattern listed entry by entry for the flat chart, taken
/// literally (for `l = k+1` its `(k+1, l)` rule puts 2 on the diagonal).
pub fn normal_form_pattern(spec: &RootSystemSpec) -> Vec<Vec<Rational>> {
    let l = spec.rank();
    let k = spec.vertex();
    let mut m = vec![vec![Rational::zero(); l + 1]; l + 1];
    for i in 1..k {
        m[i - 1][k - i - 1] = int(k as i64);
    }
    for i in k + 2..l {
        m[i - 1][k + l - i] = int(4 * (l - k) as i64);
    }
    m[l][k - 1] = Rational::one();
    m[k - 1][l] = Rational::one();
    if l > k {
        m[l - 1][k] = int(2);
        m[k][l - 1] = int(2);
    }
    m
}

/// The flat chart `w → t`: `t^{k+1} = w^{k+1} + w^l h_{k+1}` and
/// `t^j = w^l(w^j + h_j)` for `k+2 ≤ j ≤ l-1`, each `h_j` fixed by flatness.
pub fn solve_flat_chart(spec: &RootSystemSpec, w: &WChart) -> Result<FlatChart> {
    let l = spec.rank();
    let k = spec.vertex();
    let wc = w.stage.eta.chart.clone();
    let t = t_chart(spec);
    let op = FlatnessOperator::new(&w.stage.eta, &w.stage.gamma);
    let s = Poly::var_idx(&wc, l - 1);
    let mut h: Vec<(usize, Poly)> = Vec::new();
    let mut tw: BTreeMap<usize, Poly> = BTreeMap::new();
    let mut unique = true;
    for j in (k + 1..l).rev() {
        let wj = Poly::var_idx(&wc, j - 1);
        let vars: Vec<usize> = (j..l - 1).collect();
        let deg = rat((k * (l - j)) as i64, (l - k) as i64);
        let (f0, factor) = if j == k + 1 { (wj.clone(), s.clone()) } else { (&s * &wj, s.clone()) };
        let basis: Vec<Poly> = monomials_of_degree(&wc, &vars, &deg)
            .into_iter()
            .map(|m| &factor * &Poly::term(&wc, m, Rational::one()))
            .collect();
        let (f, u) = op.solve(&f0, &basis, &format!("h_{j}"))?;
        unique &= u;
        let hj = (&f - &f0).exact_div(&factor)?;
        h.push((j, hj));
        tw.insert(j, f);
    }
    h.reverse();
    for j in 1..=l {
        if j <= k || j == l {
            tw.insert(j, Poly::var_idx(&wc, j - 1));
        }
    }
    for (j, f) in &tw {
        if !op.is_flat(f) {
            return Err(Error::EtaPatternMismatch(format!("t^{j} is not flat")));
        }
    }

    // w over t, from w^{l-1} down to w^{k+1}
    let tl = Poly::var_idx(&t, l - 1);
    let mut inverse: BTreeMap<String, Poly> = BTreeMap::new();
    inverse.insert("E".into(), Poly::var_idx(&t, l + 1));
    for j in 1..=l {
        if j <= k || j == l {
            inverse.insert(format!("w{j}"), Poly::var_idx(&t, j - 1));
        }
    }
    for (j, hj) in h.iter().rev() {
        let hj_t = hj.substitute(&t, &inverse)?;
        let tj = Poly::var_idx(&t, j - 1);
        let wj = if *j == k + 1 {
            &tj - &(&tl * &hj_t)
        } else {
            &(&tj * &tl.pow(-1)?) - &hj_t
        };
        inverse.insert(format!("w{j}"), wj);
    }

    // forward over the w-chart extended by an explicit logarithm
    let mut vars = wc.vars[..l].to_vec();
    vars.push(VarSpec::new("wlog", Rational::zero(), false));
    vars.push(wc.vars[l].clone());
    let mut coords: Vec<Coord> = (0..l).map(Coord::Var).collect();
    coords.push(Coord::Exp {
        exp_var: l + 1,
        rate: Rational::one(),
        log_var: Some(l),
    });
    let ext = Chart::new(format!("w-ext[{}]", spec.id()), vars, coords)?;
    let none = BTreeMap::new();
    let mut embed = BTreeMap::new();
    let mut lift = BTreeMap::new();
    let mut polys = BTreeMap::new();
    for v in &wc.vars {
        embed.insert(v.name.clone(), Poly::var(&ext, &v.name)?);
        lift.insert(v.name.clone(), inverse[&v.name].clone());
    }
    lift.insert("wlog".into(), Poly::var_idx(&t, l));
    for (j, f) in &tw {
        polys.insert(format!("t{j}"), f.substitute(&ext, &none)?);
    }
    polys.insert(format!("t{}", l + 1), Poly::var(&ext, "wlog")?);
    polys.insert("E".into(), Poly::var(&ext, "E")?);
    let fw = Forward {
        chart: ext,
        embed,
        lift,
        polys,
    };
    let map = CoordMap::new(wc, t, Some(inverse), Some(fw))?;
    let (eta, gamma) = transform_christoffel(&w.stage.eta, &w.stage.gamma, &map)?;
    let consts = eta
        .constants()
        .ok_or_else(|| Error::EtaPatternMismatch("η is not constant in the t-chart".into()))?;
    let want = flat_eta(spec);
    if consts != want {
        return Err(Error::EtaPatternMismatch(format!("η(t) = {consts:?}")));
    }
    if !gamma.is_zero() {
        return Err(Error::EtaPatternMismatch("connection of η does not vanish in the t-chart".into()));
    }
    Ok(FlatChart {
        stage: ChartStage { map, eta, gamma },
        h,
        unique,
        eta: consts,
    })
}

/// All stages for C_l.
pub fn build_flat(spec: &RootSystemSpec) -> Result<FlatPipeline> {
    check_c(spec)?;
    let pencil = build_pencil(spec)?;
    let (change, bseries, z) = build_z_chart(spec, &pencil)?;
    let w = build_w_chart(spec, &z)?;
    gamma_w(spec, &w)?;
    let t = solve_flat_chart(spec, &w)?;
    Ok(FlatPipeline {
        spec: *spec,
        pencil,
        change,
        bseries,
        z,
        w,
        t,
    })
}

impl FlatPipeline {
    /// The chart change `y → t` with only the polynomial direction.
    pub fn y_to_t(&self) -> Result<CoordMap> {
        self.z.map.then(&self.w.stage.map)?.then(&self.t.stage.map)
    }

    /// `t^1..t^l` written over `y^1..y^{l-1}, s, E` with `y^l = s^{2(l-k)}`
    /// (over the y-chart itself when `k = l`).
    pub fn flat_coordinates_over_y(&self) -> Result<(Arc<Chart>, Vec<Poly>)> {
        let l = self.spec.rank();
        let y = self.pencil.chart.clone();
        let zfw = self.z.map.forward.as_ref().expect("z-map has a forward direction");
        let wfw = self.w.stage.map.forward.as_ref().expect("w-map has a forward direction");
        let tfw = self.t.stage.map.forward.as_ref().expect("t-map has a forward direction");
        let (ext, ybind) = match self.w.root_exponent {
            None => (y.clone(), BTreeMap::new()),
            Some(root) => {
                let mut vars = y.vars[..l - 1].to_vec();
                vars.push(VarSpec::new("s", wfw.chart.vars[l - 1].weight.clone(), true));
                vars.push(y.vars[l].clone());
                let ext = Chart::new(format!("y-ext[{}]", self.spec.id()), vars, y.coords.clone())?;
                let mut b = BTreeMap::new();
                b.insert(format!("y{l}"), Poly::var_idx(&ext, l - 1).pow(root as i32)?);
                (ext, b)
            }
        };
        // z over ext
        let mut zb = BTreeMap::new();
        for (name, p) in &zfw.polys {
            zb.insert(name.clone(), p.substitute(&ext, &ybind)?);
        }
        if self.w.root_exponent.is_some() {
            zb.insert("s".into(), Poly::var(&ext, "s")?);
        }
        let mut wb = BTreeMap::new();
        for (name, p) in &wfw.polys {
            wb.insert(name.clone(), p.substitute(&ext, &zb)?);
        }
        let mut out = Vec::new();
        for j in 1..=l {
            out.push(tfw.polys[&format!("t{j}")].substitute(&ext, &wb)?);
        }
        Ok((ext, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_values() {
        let b = b_coefficients(8).unwrap();
        assert_eq!(b.get(1, 2), rat(1, 6));
        assert_eq!(b.get(2, 3), rat(1, 4));
        assert_eq!(b.get(1, 3), rat(1, 120));
        assert_eq!(b.get(3, 3), int(1));
    }

    #[test]
    fn p_block_examples() {
        let s = RootSystemSpec::c(3, 1).unwrap();
        let p = build_pencil(&s).unwrap();
        let (pj, unique) = solve_p_block(&s, &p).unwrap();
        assert!(unique);
        let e = Poly::var(&p.chart, "E").unwrap();
        assert_eq!(pj[0], e.scale(&int(-2)));

        let s = RootSystemSpec::c(4, 2).unwrap();
        let p = build_pencil(&s).unwrap();
        let (pj, _) = solve_p_block(&s, &p).unwrap();
        let e = Poly::var(&p.chart, "E").unwrap();
        let y1 = Poly::var(&p.chart, "y1").unwrap();
        assert_eq!(pj[0], e.scale(&int(-4)));
        assert_eq!(pj[1], &(&y1 * &e).scale(&int(-2)) + &(&e * &e).scale(&int(6)));
    }

    #[test]
    fn z_chart_c4k1() {
        let s = RootSystemSpec::c(4, 1).unwrap();
        let p = build_pencil(&s).unwrap();
        let (ch, _, st) = build_z_chart(&s, &p).unwrap();
        assert_eq!(ch.c[0][1], rat(-1, 6));
        assert_eq!(ch.c[0][2], rat(1, 30));
        assert_eq!(ch.c[1][2], rat(-1, 4));
        let fw = st.map.forward.as_ref().unwrap();
        let y = &p.chart;
        let v = |n: &str| Poly::var(y, n).unwrap();
        assert_eq!(fw.polys["z3"], &v("y3") - &v("y4").scale(&rat(1, 4)));
    }

    #[test]
    fn flat_chart_c4k1() {
        let s = RootSystemSpec::c(4, 1).unwrap();
        let f = build_flat(&s).unwrap();
        assert_eq!(f.t.h.len(), 2);
        let wc = &f.w.stage.eta.chart;
        let w3 = Poly::var(wc, "w3").unwrap();
        assert_eq!(f.t.h[0], (2, (&w3 * &w3).scale(&rat(-1, 12))));
        assert!(f.t.h[1].1.is_zero());
    }

    #[test]
    fn pipelines_small_ranks() {
        for l in 1..=4 {
            for k in 1..=l {
                let s = RootSystemSpec::c(l, k).unwrap();
                let f = build_flat(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
                assert_eq!(f.t.eta, flat_eta(&s));
                assert_eq!(f.t.eta == normal_form_pattern(&s), l != k + 1, "{s}");
            }
        }
    }

    #[test]
    fn flat_coordinates_c3k1_over_y() {
        let s = RootSystemSpec::c(3, 1).unwrap();
        let f = build_flat(&s).unwrap();
        let (ext, t) = f.flat_coordinates_over_y().unwrap();
        let v = |n: &str| Poly::var(&ext, n).unwrap();
        assert_eq!(t[0], &v("y1") - &v("E").scale(&int(2)));
        let s4 = v("s").pow(4).unwrap();
        let want = &(&v("y2") - &s4.scale(&rat(1, 6))) * &v("s").pow(-1).unwrap();
        assert_eq!(t[1], want);
        assert_eq!(t[2], v("s"));
    }
}
