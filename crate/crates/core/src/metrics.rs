//! Contravariant metrics and connections: the generating-function formulas
//! in the θ-chart, transport between charts, and the flat pencil `(g, η)`.

use std::sync::Arc;

use num_traits::Zero;

use crate::coordmap::{dot, forward_jacobian, CoordMap};
use crate::error::{Error, Result};
use crate::exactalg::matrix::{adjugate, det, PolyMatrix};
use crate::exactalg::{int, Chart, Monomial, Poly, Rational, VarSpec, WeightedDegree};
use crate::orbitspace::{self, theta_to_y};
use crate::rootdata::{self, Family, RootSystemSpec};

/// Symmetric matrix of contravariant components `g^{ij}`, indexed by chart
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    pub chart: Arc<Chart>,
    pub m: PolyMatrix,
}

impl BilinearForm {
    pub fn new(chart: Arc<Chart>, m: PolyMatrix) -> Result<BilinearForm> {
        let n = chart.ncoords();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChart(format!("form of wrong size on {}", chart.name)));
        }
        for i in 0..n {
            for j in 0..i {
                if m[i][j] != m[j][i] {
                    return Err(Error::SymmetryViolation(format!("g^({},{}) != g^({},{})", i + 1, j + 1, j + 1, i + 1)));
                }
            }
        }
        Ok(BilinearForm { chart, m })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Entrywise derivative along chart coordinate `c`.
    pub fn diff_coord(&self, c: usize) -> BilinearForm {
        BilinearForm {
            chart: self.chart.clone(),
            m: self.m.iter().map(|r| r.iter().map(|p| p.diff_coord(c)).collect()).collect(),
        }
    }

    /// Constant entries, if every entry is constant.
    pub fn constants(&self) -> Option<Vec<Vec<Rational>>> {
        self.m.iter().map(|r| r.iter().map(|p| p.as_constant()).collect()).collect()
    }

    /// Indices whose entry is not homogeneous of degree `deg[i] + deg[j]`.
    pub fn degree_violations(&self, deg: &[Rational]) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i..n {
                if !self.m[i][j].is_homogeneous_of(&(&deg[i] + &deg[j])) {
                    bad.push((i, j));
                }
            }
        }
        bad
    }
}

/// Contravariant Christoffel symbols `Γ^{ij}_m`, stored as `g[i][j][m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelContra {
    pub chart: Arc<Chart>,
    pub g: Vec<Vec<Vec<Poly>>>,
}

impl ChristoffelContra {
    pub fn diff_coord(&self, c: usize) -> ChristoffelContra {
        ChristoffelContra {
            chart: self.chart.clone(),
            g: self
                .g
                .iter()
                .map(|a| a.iter().map(|b| b.iter().map(|p| p.diff_coord(c)).collect()).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().flatten().flatten().all(|p| p.is_zero())
    }

    pub fn degree_violations(&self, deg: &[Rational]) -> Vec<(usize, usize, usize)> {
        let n = self.g.len();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    if !self.g[i][j][m].is_homogeneous_of(&(&(&deg[i] + &deg[j]) - &deg[m])) {
                        bad.push((i, j, m));
                    }
                }
            }
        }
        bad
    }
}

/// The metric `g`, the flat metric `η = ∂g/∂y^k` and their connections, all
/// over the y-chart.
#[derive(Clone, Debug)]
pub struct FlatPencil {
    pub spec: RootSystemSpec,
    pub chart: Arc<Chart>,
    pub g: BilinearForm,
    pub eta: BilinearForm,
    pub gamma_g: ChristoffelContra,
    pub gamma_eta: ChristoffelContra,
}

/// Chart `u, v, θ^0..θ^l` for the generating functions.
fn uv_chart(spec: &RootSystemSpec) -> Arc<Chart> {
    let th = orbitspace::theta_chart(spec);
    let mut vars = vec![VarSpec::new("u", int(0), false), VarSpec::new("v", int(0), false)];
    vars.extend(th.vars.iter().cloned());
    Chart::plain(format!("uv-theta[{}]", spec.id()), vars).expect("valid chart")
}

struct GenFun {
    l: usize,
    k: usize,
    ch: Arc<Chart>,
    th: Arc<Chart>,
    u: Poly,
    v: Poly,
}

impl GenFun {
    fn new(spec: &RootSystemSpec) -> Result<GenFun> {
        if spec.family() != Family::C {
            return Err(Error::InvalidSpec("generating functions are for C_l".into()));
        }
        let ch = uv_chart(spec);
        Ok(GenFun {
            l: spec.rank(),
            k: spec.vertex(),
            u: Poly::var_idx(&ch, 0),
            v: Poly::var_idx(&ch, 1),
            th: orbitspace::theta_chart(spec),
            ch,
        })
    }

    /// `Σ x^{l-j} θ^j` and its x-derivative, for `x = u` or `v`.
    fn p(&self, x: &Poly) -> (Poly, Poly) {
        let mut p = Poly::zero(&self.ch);
        let mut dp = Poly::zero(&self.ch);
        for j in 0..=self.l {
            let th = Poly::var_idx(&self.ch, j + 2);
            let e = (self.l - j) as i32;
            p = &p + &(&x.pow(e).unwrap() * &th);
            if e > 0 {
                dp = &dp + &(&x.pow(e - 1).unwrap() * &th).scale(&int(e as i64));
            }
        }
        (p, dp)
    }

    fn c(&self, n: i64) -> Poly {
        Poly::constant(&self.ch, int(n))
    }

    /// Splits a generating function into `[i][j]` coefficients of
    /// `u^{l-i} v^{l-j}` as polynomials over the θ-chart.
    fn split(&self, f: &Poly) -> Result<PolyMatrix> {
        let n = self.l + 1;
        let mut out = vec![vec![Poly::zero(&self.th); n]; n];
        for (m, c) in f.terms() {
            let (a, b) = (m.exp(0), m.exp(1));
            if a < 0 || b < 0 || a as usize > self.l || b as usize > self.l {
                return Err(Error::ClosedFormMismatch(format!("stray power u^{a} v^{b}")));
            }
            let (i, j) = (self.l - a as usize, self.l - b as usize);
            let mono = Monomial::from_exponents(&m.exponents()[2..]);
            out[i][j] = &out[i][j] + &Poly::term(&self.th, mono, c.clone());
        }
        Ok(out)
    }
}

/// `g^{θ^iθ^j}` from `(k-l)P(u)P(v) + [(u²+4u)P'(u)P(v) - (v²+4v)P(u)P'(v)]/(u-v)`.
pub fn g_theta(spec: &RootSystemSpec) -> Result<BilinearForm> {
    let gf = GenFun::new(spec)?;
    let (pu, dpu) = gf.p(&gf.u);
    let (pv, dpv) = gf.p(&gf.v);
    let (u, v) = (&gf.u, &gf.v);
    let four = gf.c(4);
    let au = &(u * u) + &(&four * u);
    let av = &(v * v) + &(&four * v);
    let num = &(&(&au * &dpu) * &pv) - &(&(&av * &pu) * &dpv);
    let quot = num.exact_div(&(u - v))?;
    let kl = gf.c(gf.k as i64 - gf.l as i64);
    let total = &(&(&kl * &pu) * &pv) + &quot;
    BilinearForm::new(gf.th.clone(), gf.split(&total)?)
}

/// `Γ^{θ^iθ^j}_m` from the generating function with the `(u-v)^{-2}` terms,
/// reading off the coefficient of `dθ^m`.
pub fn gamma_theta(spec: &RootSystemSpec) -> Result<ChristoffelContra> {
    let gf = GenFun::new(spec)?;
    let l = gf.l;
    let (pu, dpu) = gf.p(&gf.u);
    let (pv, _) = gf.p(&gf.v);
    let (u, v) = (&gf.u, &gf.v);
    let four = gf.c(4);
    let two = gf.c(2);
    let au = &(u * u) + &(&four * u);
    let av = &(v * v) + &(&four * v);
    let w = &(&(&two * u) + &(u * v)) + &(&two * v);
    let umv = u - v;
    let umv2 = &umv * &umv;
    let kl = gf.c(gf.k as i64 - l as i64);
    let n = l + 1;
    let mut g = vec![vec![vec![Poly::zero(&gf.th); n]; n]; n];
    for m in 0..=l {
        // dP(x) ↦ x^{l-m}, dP'(v) ↦ (l-m) v^{l-m-1}
        let e = (l - m) as i32;
        let du = u.pow(e)?;
        let dv = v.pow(e)?;
        let ddv = if e > 0 {
            v.pow(e - 1)?.scale(&int(e as i64))
        } else {
            Poly::zero(&gf.ch)
        };
        let first = &(&(&au * &dpu) * &dv) - &(&(&av * &pu) * &ddv);
        let second = &w * &(&(&pv * &du) - &(&pu * &dv));
        let num = &(&umv * &first) + &second;
        let total = &(&(&kl * &pu) * &dv) + &num.exact_div(&umv2)?;
        let split = gf.split(&total)?;
        for i in 0..n {
            for j in 0..n {
                g[i][j][m] = split[i][j].clone();
            }
        }
    }
    Ok(ChristoffelContra { chart: gf.th, g })
}

fn check_source(form_chart: &Arc<Chart>, map: &CoordMap) -> Result<()> {
    if **form_chart != *map.source {
        return Err(Error::ChartMismatch {
            left: form_chart.name.clone(),
            right: map.source.name.clone(),
        });
    }
    Ok(())
}

fn pull_matrix(m: &PolyMatrix, map: &CoordMap) -> Result<PolyMatrix> {
    m.iter().map(|r| r.iter().map(|p| map.pull(p)).collect()).collect()
}

/// `g'^{ab} = J^a_i J^b_j g^{ij}` with `J = (∂x/∂x')^{-1}`.
pub fn transform_form(form: &BilinearForm, map: &CoordMap) -> Result<BilinearForm> {
    check_source(&form.chart, map)?;
    let k = map.inverse_jacobian()?;
    let j = forward_jacobian(&k, &map.target)?;
    let g = pull_matrix(&form.m, map)?;
    BilinearForm::new(map.target.clone(), congruence(&j, &g, &map.target))
}

fn congruence(j: &PolyMatrix, g: &PolyMatrix, ch: &Arc<Chart>) -> PolyMatrix {
    let n = j.len();
    // (J g)
    let jg: PolyMatrix = (0..n)
        .map(|a| (0..n).map(|q| dot(ch, (0..n).map(|p| (&j[a][p], &g[p][q])))).collect())
        .collect();
    let mut out = vec![vec![Poly::zero(ch); n]; n];
    for a in 0..n {
        for b in a..n {
            let e = dot(ch, (0..n).map(|q| (&jg[a][q], &j[b][q])));
            out[a][b] = e.clone();
            out[b][a] = e;
        }
    }
    out
}

/// Transports a metric and its contravariant connection:
/// `Γ'^{ab}_c = J^a_p J^b_q Γ^{pq}_j K^j_c − g'^{ad} J^b_q ∂²x^q/∂x'^d∂x'^c`.
pub fn transform_christoffel(
    form: &BilinearForm,
    gamma: &ChristoffelContra,
    map: &CoordMap,
) -> Result<(BilinearForm, ChristoffelContra)> {
    check_source(&form.chart, map)?;
    check_source(&gamma.chart, map)?;
    let ch = &map.target;
    let k = map.inverse_jacobian()?;
    let j = forward_jacobian(&k, ch)?;
    let n = k.len();
    let g_old = pull_matrix(&form.m, map)?;
    let g_new = congruence(&j, &g_old, ch);
    let gam: Vec<Vec<Vec<Poly>>> = gamma
        .g
        .iter()
        .map(|a| a.iter().map(|b| b.iter().map(|p| map.pull(p)).collect()).collect())
        .collect::<Result<_>>()?;
    let z = || Poly::zero(ch);
    // t1[p][q][c] = Γ^{pq}_j K^j_c
    let mut t1 = vec![vec![vec![z(); n]; n]; n];
    for p in 0..n {
        for q in 0..n {
            for c in 0..n {
                t1[p][q][c] = dot(ch, (0..n).map(|s| (&gam[p][q][s], &k[s][c])));
            }
        }
    }
    let mut t2 = vec![vec![vec![z(); n]; n]; n];
    for a in 0..n {
        for q in 0..n {
            for c in 0..n {
                t2[a][q][c] = dot(ch, (0..n).map(|p| (&j[a][p], &t1[p][q][c])));
            }
        }
    }
    // u[b][d][c] = J^b_q ∂_d K^q_c
    let dk: Vec<Vec<Vec<Poly>>> = (0..n)
        .map(|q| (0..n).map(|d| (0..n).map(|c| k[q][c].diff_coord(d)).collect()).collect())
        .collect();
    let mut u = vec![vec![vec![z(); n]; n]; n];
    for b in 0..n {
        for d in 0..n {
            for c in 0..n {
                u[b][d][c] = dot(ch, (0..n).map(|q| (&j[b][q], &dk[q][d][c])));
            }
        }
    }
    let mut out = vec![vec![vec![z(); n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let first = dot(ch, (0..n).map(|q| (&j[b][q], &t2[a][q][c])));
                let second = dot(ch, (0..n).map(|d| (&g_new[a][d], &u[b][d][c])));
                out[a][b][c] = &first - &second;
            }
        }
    }
    Ok((
        BilinearForm::new(ch.clone(), g_new)?,
        ChristoffelContra {
            chart: ch.clone(),
            g: out,
        },
    ))
}

/// Like [`transform_form`] for maps whose Jacobian determinant `D` is not a
/// unit: `g' = adj(K) g adj(K)ᵀ / D²`, the division being exact whenever the
/// transported form is polynomial.
pub fn transform_form_exact_div(form: &BilinearForm, map: &CoordMap) -> Result<BilinearForm> {
    check_source(&form.chart, map)?;
    let ch = &map.target;
    let k = map.inverse_jacobian()?;
    let d = det(&k, ch);
    let adj = adjugate(&k, ch);
    let g = pull_matrix(&form.m, map)?;
    let d2 = &d * &d;
    let m = congruence(&adj, &g, ch)
        .into_iter()
        .map(|r| r.iter().map(|p| p.exact_div(&d2)).collect::<Result<Vec<_>>>())
        .collect::<Result<PolyMatrix>>()?;
    BilinearForm::new(ch.clone(), m)
}

/// The chart change from the C_l y-chart to the B_l y-chart:
/// `ȳ^j = y^j` for `j < l`, `ȳ^l = (y^l)²`, and `ȳ^{l+1} = y^{l+1}` (k < l)
/// or `½y^{l+1}` (k = l), bars marking the C_l coordinates.
pub fn c_to_b_map(spec_b: &RootSystemSpec) -> Result<CoordMap> {
    if spec_b.family() != Family::B {
        return Err(Error::InvalidSpec(format!("{spec_b} is not of type B")));
    }
    let l = spec_b.rank();
    let cy = orbitspace::y_chart(&spec_b.as_c());
    let by = orbitspace::y_chart(spec_b);
    let mut inv = std::collections::BTreeMap::new();
    for j in 0..l {
        let y = Poly::var_idx(&by, j);
        let img = if j + 1 == l { &y * &y } else { y };
        inv.insert(cy.vars[j].name.clone(), img);
    }
    // E of C_l is e^{ȳ^{l+1}}, which is the exponential variable of the B_l
    // chart in both cases (rate 1 for k < l, rate 1/2 for k = l).
    inv.insert(cy.vars[l].name.clone(), Poly::var_idx(&by, l));
    CoordMap::new(cy, by, Some(inv), None)
}

/// `g` of B_l obtained from the C_l pencil.
pub fn b_form_from_c(spec_b: &RootSystemSpec) -> Result<BilinearForm> {
    let map = c_to_b_map(spec_b)?;
    let pencil = build_pencil(&spec_b.as_c())?;
    transform_form_exact_div(&pencil.g, &map)
}

/// The flat pencil of C_l in the y-chart.
pub fn build_pencil(spec: &RootSystemSpec) -> Result<FlatPencil> {
    let map = theta_to_y(spec)?;
    let (g, gamma_g) = transform_christoffel(&g_theta(spec)?, &gamma_theta(spec)?, &map)?;
    let kc = spec.vertex() - 1;
    let eta = eta_from_g(&g, kc);
    let gamma_eta = gamma_g.diff_coord(kc);
    Ok(FlatPencil {
        spec: *spec,
        chart: g.chart.clone(),
        g,
        eta,
        gamma_g,
        gamma_eta,
    })
}

/// `η^{ij} = ∂g^{ij}/∂y^k`, with `kc` the zero-based coordinate index of `y^k`.
pub fn eta_from_g(g: &BilinearForm, kc: usize) -> BilinearForm {
    g.diff_coord(kc)
}

/// The matrix `η^{ij}(y)` written out with the entries `R_j, P_j, Q_m`.
pub fn eta_closed_form(spec: &RootSystemSpec) -> BilinearForm {
    let l = spec.rank();
    let k = spec.vertex();
    let ch = orbitspace::y_chart(spec);
    let e = Poly::var_idx(&ch, l);
    // y^0 = 1, y^j = 0 beyond l
    let y = |j: usize| -> Poly {
        if j == 0 {
            Poly::one(&ch)
        } else if j <= l {
            Poly::var_idx(&ch, j - 1)
        } else {
            Poly::zero(&ch)
        }
    };
    let kk = k as i64;
    let p = |j: usize| (&y(j - 1) * &e).scale(&int(4 * (kk - j as i64 + 1)));
    let r = |j: usize| &p(j) + &y(j).scale(&int(kk - j as i64));
    let q = |m: usize| {
        let a = y(k + m).scale(&int(4 * m as i64));
        if m == l - k {
            a
        } else {
            &a + &y(k + m + 1).scale(&int(m as i64 + 1))
        }
    };
    let n = l + 1;
    let mut m = vec![vec![Poly::zero(&ch); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            let val = if i < k && j < k {
                match (i + j).cmp(&k) {
                    std::cmp::Ordering::Less => Poly::zero(&ch),
                    std::cmp::Ordering::Equal => Poly::constant(&ch, int(kk)),
                    std::cmp::Ordering::Greater => r(i + j - k),
                }
            } else if j == k && i <= k {
                p(i)
            } else if i == k && j <= k {
                p(j)
            } else if i > k && i <= l && j > k && j <= l {
                let s = (i - k) + (j - k) - 1;
                if s <= l - k {
                    q(s)
                } else {
                    Poly::zero(&ch)
                }
            } else if (i == k && j == n) || (i == n && j == k) {
                Poly::one(&ch)
            } else {
                Poly::zero(&ch)
            };
            m[i - 1][j - 1] = val;
        }
    }
    BilinearForm { chart: ch, m }
}

/// `(-1)^l k^{k-1} 4^{l-k} (l-k)^{l-k} (y^l)^{l-k}`.
pub fn det_eta_closed_form(spec: &RootSystemSpec) -> Poly {
    det_eta_with_sign(spec, if spec.rank().is_multiple_of(2) { 1 } else { -1 })
}

/// The sign of `det η` read off from the block structure of the matrix:
/// the `(k, l+1)` pair contributes `-1` and the two anti-triangular blocks
/// contribute the signs of their reversal permutations.
pub fn det_eta_block_sign(spec: &RootSystemSpec) -> i64 {
    let (l, k) = (spec.rank(), spec.vertex());
    let rev = |n: usize| if n >= 2 { n * (n - 1) / 2 } else { 0 };
    if (rev(k - 1) + rev(l - k)) % 2 == 0 {
        -1
    } else {
        1
    }
}

/// `det η` with the sign from [`det_eta_block_sign`].
pub fn det_eta_block_form(spec: &RootSystemSpec) -> Poly {
    det_eta_with_sign(spec, det_eta_block_sign(spec))
}

fn det_eta_with_sign(spec: &RootSystemSpec, sign: i64) -> Poly {
    let l = spec.rank() as i64;
    let k = spec.vertex() as i64;
    let ch = orbitspace::y_chart(spec);
    let mut c = int(sign);
    c *= int(k.pow((k - 1) as u32));
    c *= int(4i64.pow((l - k) as u32));
    c *= int((l - k).pow((l - k) as u32));
    let yl = Poly::var_idx(&ch, spec.rank() - 1);
    &Poly::constant(&ch, c) * &yl.pow((l - k) as i32).unwrap()
}

/// Compares `η = ∂g/∂y^k` with the closed form.
pub fn check_eta_closed_form(pencil: &FlatPencil) -> Result<()> {
    let want = eta_closed_form(&pencil.spec);
    for i in 0..want.dim() {
        for j in 0..want.dim() {
            if pencil.eta.m[i][j] != want.m[i][j] {
                return Err(Error::ClosedFormMismatch(format!(
                    "η^({},{}) = {} but the closed form gives {}",
                    i + 1,
                    j + 1,
                    pencil.eta.m[i][j],
                    want.m[i][j]
                )));
            }
        }
    }
    Ok(())
}

/// The determinant of `η`, checked against the closed form.
pub fn det_eta_check(pencil: &FlatPencil) -> Result<Poly> {
    let d = det(&pencil.eta.m, &pencil.chart);
    let want = det_eta_closed_form(&pencil.spec);
    if d != want {
        return Err(Error::DetMismatch {
            got: d.to_string(),
            expected: want.to_string(),
        });
    }
    Ok(d)
}

/// Entries (as 1-based labels) of `g` and `Γ` that are not at most linear
/// in `y^k`; empty means the check passes.
pub fn linearity_check(g: &BilinearForm, gamma: &ChristoffelContra, kc: usize) -> Vec<String> {
    let mut bad = Vec::new();
    let n = g.dim();
    for i in 0..n {
        for j in 0..n {
            if !g.m[i][j].diff_coord(kc).diff_coord(kc).is_zero() {
                bad.push(format!("g^({},{})", i + 1, j + 1));
            }
            for m in 0..n {
                if !gamma.g[i][j][m].diff_coord(kc).diff_coord(kc).is_zero() {
                    bad.push(format!("Γ^({},{})_{}", i + 1, j + 1, m + 1));
                }
            }
        }
    }
    bad
}

/// Levi-Civita conditions for a contravariant connection:
/// `∂_m g^{ij} = Γ^{ij}_m + Γ^{ji}_m` and `g^{is} Γ^{jm}_s = g^{js} Γ^{im}_s`.
pub fn levi_civita_violations(g: &BilinearForm, gamma: &ChristoffelContra) -> Vec<String> {
    let n = g.dim();
    let ch = &g.chart;
    let mut bad = Vec::new();
    for m in 0..n {
        let dg = g.diff_coord(m);
        for i in 0..n {
            for j in i..n {
                if dg.m[i][j] != &gamma.g[i][j][m] + &gamma.g[j][i][m] {
                    bad.push(format!("compatibility ({},{};{})", i + 1, j + 1, m + 1));
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for m in 0..n {
                let a = dot(ch, (0..n).map(|s| (&g.m[i][s], &gamma.g[j][m][s])));
                let b = dot(ch, (0..n).map(|s| (&g.m[j][s], &gamma.g[i][m][s])));
                if a != b {
                    bad.push(format!("torsion ({},{};{})", i + 1, j + 1, m + 1));
                }
            }
        }
    }
    bad
}

/// Degree data of the y-chart with `d_{l+1} = 0`.
pub fn y_degrees(spec: &RootSystemSpec) -> Vec<Rational> {
    let mut d = rootdata::degrees(spec);
    d.push(Rational::zero());
    d
}

/// Whether a polynomial is homogeneous (or zero).
pub fn homogeneous(p: &Poly) -> bool {
    !matches!(p.weighted_degree(), WeightedDegree::NotHomogeneous(_))
}
