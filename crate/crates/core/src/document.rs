//! The exported structure document: JSON with `p/q` rationals and monomials
//! as `{variable: exponent}` maps, plus a LaTeX rendering of the potential.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coordmap::{CoordMap, Forward};
use crate::error::{Error, Result};
use crate::exactalg::{format_rational, parse_rational, Chart, Coord, Monomial, Poly, Rational, VarSpec};
use crate::frobenius::{wdvv_residuals, CheckReport, FrobeniusStructure};
use crate::orbitspace::theta_to_y;
use crate::rootdata::{Family, RootSystemSpec};

pub const FORMAT: &str = "weyl-frobenius-structure/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub family: String,
    pub rank: usize,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDoc {
    pub name: String,
    pub weight: String,
    pub laurent: bool,
}

/// A plain coordinate names its variable; a logarithmic one names the
/// exponential variable with its rate and, if present, the explicit variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordDoc {
    pub var: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDoc {
    pub name: String,
    pub variables: Vec<VarDoc>,
    pub coordinates: Vec<CoordDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coefficient: String,
    pub monomial: BTreeMap<String, i32>,
}

/// Terms in descending graded-lex order.
pub type PolyDoc = Vec<TermDoc>;
pub type BindingsDoc = BTreeMap<String, PolyDoc>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardDoc {
    pub chart: String,
    pub embed: BindingsDoc,
    pub lift: BindingsDoc,
    pub polys: BindingsDoc,
}

/// `inverse` holds source variables over the target chart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<BindingsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<ForwardDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub chart: String,
    pub entries: Vec<Vec<PolyDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDoc {
    pub chart: String,
    pub f: PolyDoc,
    pub head: PolyDoc,
    pub cubic: PolyDoc,
    pub remainder: PolyDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerDoc {
    pub linear: Vec<String>,
    pub last: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    pub name: String,
    pub passed: bool,
    pub residuals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDocument {
    pub format: String,
    pub spec: SpecDoc,
    /// For B_l: the C_l spec whose structure this is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identified_with: Option<SpecDoc>,
    pub charts: Vec<ChartDoc>,
    pub maps: Vec<MapDoc>,
    pub eta: Vec<Vec<String>>,
    pub eta_lower: Vec<Vec<String>>,
    pub intersection_form: MatrixDoc,
    pub potential: PotentialDoc,
    pub euler: EulerDoc,
    pub charge: String,
    pub report: Vec<CheckDoc>,
}

fn spec_doc(s: &RootSystemSpec) -> SpecDoc {
    SpecDoc {
        family: s.family().to_string(),
        rank: s.rank(),
        vertex: s.vertex(),
    }
}

impl SpecDoc {
    pub fn to_spec(&self) -> Result<RootSystemSpec> {
        let fam = match self.family.as_str() {
            "B" => Family::B,
            "C" => Family::C,
            f => return Err(Error::Parse(format!("unknown family {f:?}"))),
        };
        RootSystemSpec::new(fam, self.rank, self.vertex)
    }
}

fn chart_doc(ch: &Chart) -> ChartDoc {
    let name = |i: usize| ch.vars[i].name.clone();
    ChartDoc {
        name: ch.name.clone(),
        variables: ch
            .vars
            .iter()
            .map(|v| VarDoc {
                name: v.name.clone(),
                weight: format_rational(&v.weight),
                laurent: v.laurent,
            })
            .collect(),
        coordinates: ch
            .coords
            .iter()
            .map(|c| match c {
                Coord::Var(i) => CoordDoc {
                    var: name(*i),
                    rate: None,
                    log: None,
                },
                Coord::Exp { exp_var, rate, log_var } => CoordDoc {
                    var: name(*exp_var),
                    rate: Some(format_rational(rate)),
                    log: log_var.map(name),
                },
            })
            .collect(),
    }
}

pub fn poly_doc(p: &Poly) -> PolyDoc {
    let ch = p.chart();
    p.terms_desc()
        .map(|(m, c)| TermDoc {
            coefficient: format_rational(c),
            monomial: m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, &e)| (ch.vars[i].name.clone(), e))
                .collect(),
        })
        .collect()
}

fn bindings_doc(b: &BTreeMap<String, Poly>) -> BindingsDoc {
    b.iter().map(|(k, v)| (k.clone(), poly_doc(v))).collect()
}

fn rationals(m: &[Vec<Rational>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

/// Collects charts by name; a name must always denote the same chart.
#[derive(Default)]
struct ChartSet(BTreeMap<String, ChartDoc>, Vec<String>);

impl ChartSet {
    fn add(&mut self, ch: &Chart) -> String {
        let d = chart_doc(ch);
        match self.0.get(&ch.name) {
            Some(old) => assert_eq!(*old, d, "two different charts named {}", ch.name),
            None => {
                self.1.push(ch.name.clone());
                self.0.insert(ch.name.clone(), d);
            }
        }
        ch.name.clone()
    }

    fn into_vec(mut self) -> Vec<ChartDoc> {
        self.1.iter().map(|n| self.0.remove(n).expect("chart recorded")).collect()
    }
}

fn map_doc(name: &str, m: &CoordMap, charts: &mut ChartSet) -> MapDoc {
    let source = charts.add(&m.source);
    let target = charts.add(&m.target);
    MapDoc {
        name: name.to_string(),
        source,
        target,
        inverse: m.inverse.as_ref().map(bindings_doc),
        forward: m.forward.as_ref().map(|f| ForwardDoc {
            chart: charts.add(&f.chart),
            embed: bindings_doc(&f.embed),
            lift: bindings_doc(&f.lift),
            polys: bindings_doc(&f.polys),
        }),
    }
}

impl StructureDocument {
    /// `spec` is the requested spec; for B_l, `b_map` is the chart change
    /// from the C_l y-chart to the B_l y-chart.
    pub fn from_structure(
        spec: &RootSystemSpec,
        st: &FrobeniusStructure,
        b_map: Option<&CoordMap>,
        report: &[CheckReport],
    ) -> Result<StructureDocument> {
        let mut charts = ChartSet::default();
        let pl = &st.pipeline;
        let mut maps = vec![map_doc("theta-to-y", &theta_to_y(&st.spec)?, &mut charts)];
        maps.push(map_doc("y-to-z", &pl.z.map, &mut charts));
        maps.push(map_doc("z-to-w", &pl.w.stage.map, &mut charts));
        maps.push(map_doc("w-to-t", &pl.t.stage.map, &mut charts));
        if let Some(b) = b_map {
            maps.push(map_doc("c-to-b", b, &mut charts));
        }
        let tname = charts.add(&st.chart);
        let pot = &st.potential;
        Ok(StructureDocument {
            format: FORMAT.to_string(),
            spec: spec_doc(spec),
            identified_with: (spec.family() == Family::B).then(|| spec_doc(&st.spec)),
            charts: charts.into_vec(),
            maps,
            eta: rationals(&st.eta),
            eta_lower: rationals(&st.eta_lower),
            intersection_form: MatrixDoc {
                chart: tname.clone(),
                entries: st.g.m.iter().map(|r| r.iter().map(poly_doc).collect()).collect(),
            },
            potential: PotentialDoc {
                chart: tname,
                f: poly_doc(&pot.f),
                head: poly_doc(&pot.head),
                cubic: poly_doc(&pot.cubic),
                remainder: poly_doc(&pot.g),
            },
            euler: EulerDoc {
                linear: st.euler.linear.iter().map(format_rational).collect(),
                last: format_rational(&st.euler.last),
            },
            charge: format_rational(&st.charge),
            report: report
                .iter()
                .map(|r| CheckDoc {
                    name: r.name.clone(),
                    passed: r.passed,
                    residuals: r.residuals.clone(),
                })
                .collect(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Parses and validates: every chart, polynomial and rational must decode
    /// and be written in canonical form.
    pub fn from_json(text: &str) -> Result<StructureDocument> {
        let doc: StructureDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.decode()?;
        Ok(doc)
    }

    /// Rebuilds the typed data of the document.
    pub fn decode(&self) -> Result<DecodedDocument> {
        if self.format != FORMAT {
            return Err(Error::Parse(format!("unsupported format {:?}", self.format)));
        }
        let spec = self.spec.to_spec()?;
        let mut charts = BTreeMap::new();
        for c in &self.charts {
            if charts.insert(c.name.clone(), decode_chart(c)?).is_some() {
                return Err(Error::Parse(format!("chart {:?} listed twice", c.name)));
            }
        }
        let chart = |n: &str| {
            charts
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("unknown chart {n:?}")))
        };
        let mut maps = Vec::new();
        for m in &self.maps {
            let source = chart(&m.source)?;
            let target = chart(&m.target)?;
            let inverse = m.inverse.as_ref().map(|b| decode_bindings(&target, b)).transpose()?;
            let forward = match &m.forward {
                Some(f) => {
                    let fc = chart(&f.chart)?;
                    Some(Forward {
                        embed: decode_bindings(&fc, &f.embed)?,
                        lift: decode_bindings(&target, &f.lift)?,
                        polys: decode_bindings(&fc, &f.polys)?,
                        chart: fc,
                    })
                }
                None => None,
            };
            maps.push((
                m.name.clone(),
                CoordMap {
                    source,
                    target,
                    inverse,
                    forward,
                },
            ));
        }
        let n = spec.rank() + 1;
        let eta = decode_square(&self.eta, n)?;
        let eta_lower = decode_square(&self.eta_lower, n)?;
        let gch = chart(&self.intersection_form.chart)?;
        if self.intersection_form.entries.len() != n || self.intersection_form.entries.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("intersection form has the wrong size".into()));
        }
        let g = self
            .intersection_form
            .entries
            .iter()
            .map(|r| r.iter().map(|p| decode_poly(&gch, p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let pch = chart(&self.potential.chart)?;
        let f = decode_poly(&pch, &self.potential.f)?;
        for part in [&self.potential.head, &self.potential.cubic, &self.potential.remainder] {
            decode_poly(&pch, part)?;
        }
        if self.euler.linear.len() + 1 != n {
            return Err(Error::Parse("Euler field has the wrong size".into()));
        }
        let euler_linear = self.euler.linear.iter().map(|s| decode_rational(s)).collect::<Result<Vec<_>>>()?;
        let euler_last = decode_rational(&self.euler.last)?;
        decode_rational(&self.charge)?;
        Ok(DecodedDocument {
            spec,
            charts,
            maps,
            eta,
            eta_lower,
            g,
            potential_chart: pch,
            potential: f,
            euler_linear,
            euler_last,
        })
    }

    pub fn all_passed(&self) -> bool {
        self.report.iter().all(|r| r.passed)
    }
}

/// Typed contents of a [`StructureDocument`].
#[derive(Clone, Debug)]
pub struct DecodedDocument {
    pub spec: RootSystemSpec,
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub maps: Vec<(String, CoordMap)>,
    pub eta: Vec<Vec<Rational>>,
    pub eta_lower: Vec<Vec<Rational>>,
    pub g: Vec<Vec<Poly>>,
    pub potential_chart: Arc<Chart>,
    pub potential: Poly,
    pub euler_linear: Vec<Rational>,
    pub euler_last: Rational,
}

impl DecodedDocument {
    /// Associativity of the stored potential against the stored η.
    pub fn verify_wdvv(&self) -> CheckReport {
        let n = self.eta.len();
        let f = &self.potential;
        let f3: Vec<Vec<Vec<Poly>>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|c| f.diff_coord(a).diff_coord(b).diff_coord(c)).collect())
                    .collect()
            })
            .collect();
        wdvv_residuals(&f3, &self.eta, &self.potential_chart)
    }
}

/// Only the canonical `p/q` form with `gcd(p, q) = 1`, `q > 0` is accepted.
fn decode_rational(s: &str) -> Result<Rational> {
    let r = parse_rational(s)?;
    if format_rational(&r) != s {
        return Err(Error::Parse(format!("rational {s:?} is not in canonical p/q form")));
    }
    Ok(r)
}

fn decode_square(m: &[Vec<String>], n: usize) -> Result<Vec<Vec<Rational>>> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected a {n}×{n} matrix")));
    }
    m.iter().map(|r| r.iter().map(|s| decode_rational(s)).collect()).collect()
}

fn decode_chart(c: &ChartDoc) -> Result<Arc<Chart>> {
    let vars = c
        .variables
        .iter()
        .map(|v| Ok(VarSpec::new(v.name.clone(), decode_rational(&v.weight)?, v.laurent)))
        .collect::<Result<Vec<_>>>()?;
    let idx = |n: &str| {
        vars.iter()
            .position(|v| v.name == n)
            .ok_or_else(|| Error::Parse(format!("chart {:?} has no variable {n:?}", c.name)))
    };
    let coords = c
        .coordinates
        .iter()
        .map(|d| match (&d.rate, &d.log) {
            (None, None) => Ok(Coord::Var(idx(&d.var)?)),
            (Some(r), log) => Ok(Coord::Exp {
                exp_var: idx(&d.var)?,
                rate: decode_rational(r)?,
                log_var: log.as_deref().map(idx).transpose()?,
            }),
            (None, Some(_)) => Err(Error::Parse(format!("coordinate {:?} has a log variable but no rate", d.var))),
        })
        .collect::<Result<Vec<_>>>()?;
    let ch = Chart::new(c.name.clone(), vars, coords)?;
    if chart_doc(&ch) != *c {
        return Err(Error::Parse(format!("chart {:?} is not in canonical form", c.name)));
    }
    Ok(ch)
}

pub fn decode_poly(ch: &Arc<Chart>, d: &PolyDoc) -> Result<Poly> {
    let mut terms = Vec::with_capacity(d.len());
    for t in d {
        let c = decode_rational(&t.coefficient)?;
        if c.is_zero() {
            return Err(Error::Parse("zero coefficient stored".into()));
        }
        let mut e = vec![0; ch.nvars()];
        for (name, &x) in &t.monomial {
            if x == 0 {
                return Err(Error::Parse(format!("zero exponent stored for {name}")));
            }
            let i = ch.var_index(name)?;
            if x < 0 && !ch.vars[i].laurent {
                return Err(Error::Parse(format!("negative power of {name}")));
            }
            e[i] = x;
        }
        terms.push((Monomial::from_exponents(&e), c));
    }
    let p = Poly::from_terms(ch, terms);
    if poly_doc(&p) != *d {
        return Err(Error::Parse("terms are repeated or out of order".into()));
    }
    Ok(p)
}

fn decode_bindings(ch: &Arc<Chart>, b: &BindingsDoc) -> Result<BTreeMap<String, Poly>> {
    b.iter().map(|(k, v)| Ok((k.clone(), decode_poly(ch, v)?))).collect()
}

fn latex_rational_factor(c: &Rational, has_factors: bool) -> String {
    let a = c.abs();
    if a.is_one() && has_factors {
        String::new()
    } else if a.denom().is_one() {
        a.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
    }
}

/// One monomial of the t-chart, with `E^n` written as `e^{n t_{l+1}}` and
/// negative powers moved into a denominator.
fn latex_monomial(ch: &Chart, m: &Monomial, log_name: &str) -> (String, String) {
    let (mut num, mut den) = (String::new(), String::new());
    let mut exp_part = String::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let v = &ch.vars[i];
        let is_exp = ch
            .coords
            .iter()
            .any(|c| matches!(c, Coord::Exp { exp_var, .. } if *exp_var == i));
        if is_exp {
            let sub = &log_name[1..];
            exp_part = if e == 1 {
                format!("e^{{t_{{{sub}}}}}")
            } else {
                format!("e^{{{e}t_{{{sub}}}}}")
            };
            continue;
        }
        let base = match v.name.strip_prefix('t') {
            Some(sub) => format!("t_{{{sub}}}"),
            None => v.name.clone(),
        };
        let pw = |x: i32| if x == 1 { base.clone() } else { format!("{base}^{{{x}}}") };
        if e > 0 {
            num.push_str(&pw(e));
        } else {
            den.push_str(&pw(-e));
        }
    }
    num.push_str(&exp_part);
    (num, den)
}

/// `F = …` in descending graded-lex order with rational coefficients.
pub fn latex_potential(st: &FrobeniusStructure) -> String {
    let f = &st.potential.f;
    let ch = f.chart();
    let l = st.spec.rank();
    let log_name = ch.vars[l].name.clone();
    let mut out = String::from("F = ");
    for (n, (m, c)) in f.terms_desc().enumerate() {
        let (num, den) = latex_monomial(ch, m, &log_name);
        let sign = if c.is_negative() { "-" } else { "+" };
        if n == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if den.is_empty() {
            out.push_str(&latex_rational_factor(c, !num.is_empty()));
            out.push_str(&num);
        } else {
            out.push_str(&latex_rational_factor(c, true));
            let top = if num.is_empty() { "1".to_string() } else { num };
            let _ = write!(out, "\\frac{{{top}}}{{{den}}}");
        }
    }
    out
}

/// A standalone LaTeX fragment with the potential and the Euler field.
pub fn latex_document(spec: &RootSystemSpec, st: &FrobeniusStructure) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "% {spec}");
    let _ = writeln!(s, "\\begin{{equation*}}\n{}\n\\end{{equation*}}", latex_potential(st));
    let mut parts = Vec::new();
    for (i, d) in st.euler.linear.iter().enumerate() {
        if !d.is_zero() {
            let c = latex_rational_factor(d, true);
            parts.push(format!("{c}t_{{{}}}\\partial_{{{}}}", i + 1, i + 1));
        }
    }
    let n = st.euler.linear.len() + 1;
    parts.push(format!("{}\\partial_{{{n}}}", latex_rational_factor(&st.euler.last, true)));
    let _ = writeln!(s, "\\begin{{equation*}}\nE = {}\n\\end{{equation*}}", parts.join(" + "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::build_structure;

    fn doc(spec: RootSystemSpec) -> (FrobeniusStructure, StructureDocument) {
        let st = build_structure(&spec).unwrap();
        let r = vec![st.verify_wdvv()];
        let d = StructureDocument::from_structure(&spec, &st, None, &r).unwrap();
        (st, d)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (st, d) = doc(RootSystemSpec::c(3, 1).unwrap());
        let a = d.to_json();
        let back = StructureDocument::from_json(&a).unwrap();
        assert_eq!(back.to_json(), a);
        let dec = back.decode().unwrap();
        assert_eq!(dec.potential.to_string(), st.potential.f.to_string());
        assert!(dec.verify_wdvv().passed);
        assert_eq!(dec.maps.len(), 4);
    }

    #[test]
    fn potential_term_encoding() {
        let (_, d) = doc(RootSystemSpec::c(3, 1).unwrap());
        let mut m = BTreeMap::new();
        m.insert("t2".to_string(), 3);
        m.insert("t3".to_string(), -1);
        let t = d.potential.f.iter().find(|t| t.monomial == m).unwrap();
        assert_eq!(t.coefficient, "1/48");
        assert!(d.eta.iter().flatten().all(|s| s.contains('/')));
    }

    #[test]
    fn non_canonical_input_is_rejected() {
        let (_, d) = doc(RootSystemSpec::c(2, 1).unwrap());
        let good = d.to_json();
        assert!(StructureDocument::from_json(&good.replacen("\"1/2\"", "\"2/4\"", 1)).is_err());
        let mut bad = d.clone();
        bad.potential.f.reverse();
        assert!(StructureDocument::from_json(&bad.to_json()).is_err());
        let mut bad = d.clone();
        bad.potential.f[0].monomial.insert("zz".into(), 1);
        assert!(StructureDocument::from_json(&bad.to_json()).is_err());
        assert!(StructureDocument::from_json(&good[..good.len() / 2]).is_err());
    }

    #[test]
    fn latex_c3k1() {
        let st = build_structure(&RootSystemSpec::c(3, 1).unwrap()).unwrap();
        let s = latex_potential(&st);
        assert!(s.starts_with("F = -\\frac{1}{36288}t_{3}^{8} + "), "{s}");
        assert!(s.contains("\\frac{1}{48}\\frac{t_{2}^{3}}{t_{3}}"), "{s}");
        assert!(s.contains("\\frac{1}{2}e^{2t_{4}}"), "{s}");
        assert!(s.contains(" - \\frac{1}{48}t_{2}^{2}t_{3}^{2}"), "{s}");
    }
}
