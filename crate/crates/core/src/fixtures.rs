//! Worked examples C₃ k=1, C₄ k=1 and C₄ k=2 as literal data, and the
//! term-level comparison of a constructed structure against them.
//!
//! In the potentials `E` stands for `e^{t^{l+1}}` and `t{l+1}` for the single
//! explicit occurrence of `t^{l+1}`. Flat coordinates are written over the
//! y-chart with `y^l` replaced by `s^r`, `s = (y^l)^{1/r}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::{rat, Chart, Poly, Rational};
use crate::frobenius::{build_structure, FrobeniusStructure};
use crate::rootdata::RootSystemSpec;

pub struct Fixture {
    pub id: &'static str,
    pub family_rank_vertex: (usize, usize),
    pub potential: &'static str,
    /// Upper-triangular entries `(i, j, g^{ij})`, 1-based, where printed.
    pub intersection: &'static [(usize, usize, &'static str)],
    pub euler_linear: &'static [(i64, i64)],
    pub euler_last: (i64, i64),
    flat: fn(&Arc<Chart>) -> Result<Vec<Poly>>,
    /// `z^j` over the y-chart.
    pub z: &'static [(&'static str, &'static str)],
    /// `h_j` over the w-chart.
    pub h: &'static [(usize, &'static str)],
}

impl Fixture {
    pub fn spec(&self) -> RootSystemSpec {
        let (l, k) = self.family_rank_vertex;
        RootSystemSpec::c(l, k).expect("valid fixture spec")
    }

    /// The printed flat coordinates `t^1..t^l` over the given `y, s` chart.
    pub fn flat_coordinates(&self, ext: &Arc<Chart>) -> Result<Vec<Poly>> {
        (self.flat)(ext)
    }
}

fn p(ch: &Arc<Chart>, s: &str) -> Result<Poly> {
    Poly::parse(ch, s)
}

fn flat_c3k1(ch: &Arc<Chart>) -> Result<Vec<Poly>> {
    let s = Poly::var(ch, "s")?;
    Ok(vec![
        p(ch, "y1 - 2*E")?,
        &p(ch, "y2 - 1/6*s^4")? * &s.pow(-1)?,
        s,
    ])
}

fn flat_c4k1(ch: &Arc<Chart>) -> Result<Vec<Poly>> {
    let s = Poly::var(ch, "s")?;
    let w2 = &p(ch, "y2 - 1/6*y3 + 1/30*s^6")? * &s.pow(-1)?;
    let w3 = &p(ch, "y3 - 1/4*s^6")? * &s.pow(-4)?;
    let w4 = s;
    Ok(vec![
        p(ch, "y1 - 2*E")?,
        &w2 - &(&(&w3 * &w3) * &w4).scale(&rat(1, 12)),
        &w3 * &w4,
        w4,
    ])
}

fn flat_c4k2(ch: &Arc<Chart>) -> Result<Vec<Poly>> {
    let s = Poly::var(ch, "s")?;
    Ok(vec![
        p(ch, "y1 - 4*E")?,
        p(ch, "y2 - 2*y1*E + 6*E^2")?,
        &p(ch, "y3 - 1/6*s^4")? * &s.pow(-1)?,
        s,
    ])
}

pub const FIXTURES: [Fixture; 3] = [
    Fixture {
        id: "c3k1",
        family_rank_vertex: (3, 1),
        potential: "1/2*t1^2*t4 + 1/2*t1*t2*t3 - 1/48*t2^2*t3^2 + 1/1440*t2*t3^5 - 1/36288*t3^8 \
                    + t2*t3*E + 1/6*t3^4*E + 1/2*E^2 + 1/48*t2^3*t3^-1",
        intersection: &[
            (1, 1, "2*t2*t3*E + 1/3*t3^4*E + 4*E^2"),
            (1, 2, "7/3*t3^3*E + 7/2*t2*E"),
            (1, 3, "5/2*t3*E"),
            (1, 4, "t1"),
            (2, 2, "12*t3^2*E - 1/4*t2^2 + 1/12*t3^3*t2 - 1/108*t3^6 + 1/4*t2^3*t3^-3"),
            (2, 3, "2*t1 + 4*E - 1/3*t2*t3 + 1/72*t3^4 - 1/4*t2^2*t3^-2"),
            (2, 4, "3/4*t2"),
            (3, 3, "1/4*t2*t3^-1 - 1/12*t3^2"),
            (3, 4, "1/4*t3"),
            (4, 4, "1"),
        ],
        euler_linear: &[(1, 1), (3, 4), (1, 4)],
        euler_last: (1, 1),
        flat: flat_c3k1,
        z: &[],
        h: &[],
    },
    Fixture {
        id: "c4k1",
        family_rank_vertex: (4, 1),
        potential: "1/2*t1^2*t5 + 1/2*t1*t2*t4 - 1/6912*t3^4 + 1/17280*t3^3*t4^3 \
                    - 1/288*t2*t4*t3^2 - 1/34560*t4^6*t3^2 + 1/24*t1*t3^2 + 1/1440*t3*t4^4*t2 \
                    - 1/48*t2^2*t4^2 - 1/60480*t4^7*t2 + 1/345600*t4^9*t3 - 1/7603200*t4^12 \
                    + 1/12*E*t3^2 + 1/6*E*t3*t4^3 + 1/120*E*t4^6 + t2*t4*E + 1/2*E^2 \
                    + 1/24*t3*t2^2*t4^-1 - 1/216*t2*t3^3*t4^-2 + 1/4320*t3^5*t4^-3",
        intersection: &[],
        euler_linear: &[(1, 1), (5, 6), (1, 2), (1, 6)],
        euler_last: (1, 1),
        flat: flat_c4k1,
        z: &[("z1", "y1 - 2*E"), ("z2", "y2 - 1/6*y3 + 1/30*y4"), ("z3", "y3 - 1/4*y4"), ("z4", "y4")],
        h: &[(2, "-1/12*w3^2")],
    },
    Fixture {
        id: "c4k2",
        family_rank_vertex: (4, 2),
        potential: "1/2*t2^2*t5 + 1/4*t1^2*t2 + 1/2*t4*t3*t2 + 1/1440*t4^5*t3 - 1/48*t4^2*t3^2 \
                    - 1/36288*t4^8 - 1/96*t1^4 + 1/2*E^2*t1^2 + 1/6*E*t1*t4^4 + 2/3*t4^4*E^2 \
                    + E*t1*t3*t4 + t3*t4*E^2 + 1/4*E^4 + 1/48*t3^3*t4^-1",
        intersection: &[
            (1, 1, "2*t2 - 1/2*t1^2 + 4*E^2"),
            // printed with 1/2 on t3*t4*E; L_E F^{12} of the printed potential gives 3
            (1, 2, "6*t1*E^2 + 1/2*t4^4*E + 3*t3*t4*E"),
            (1, 3, "5*t3*E + 10/3*t4^3*E"),
            (1, 4, "3*t4*E"),
            (1, 5, "1/2*t1"),
            (2, 2, "2*E*t1*t3*t4 + 8*E^4 + 8*t3*t4*E^2 + 16/3*E^2*t4^4 + 4*E^2*t1^2 + 1/3*E*t4^4*t1"),
            (2, 3, "56/3*E^2*t4^3 + 7*E^2*t3 + 7/3*t1*t4^3*E + 7/2*E*t1*t3"),
            (2, 4, "5*E^2*t4 + 5/2*t4*E*t1"),
            (2, 5, "t2"),
            (3, 3, "12*t4^2*E*t1 + 48*t4^2*E^2 - 1/4*t3^2 + 1/12*t3*t4^3 - 1/108*t4^6 + 1/4*t3^3*t4^-3"),
            (3, 4, "2*t2 + 4*E*t1 + 4*E^2 - 1/3*t4*t3 + 1/72*t4^4 - 1/4*t3^2*t4^-2"),
            (3, 5, "3/4*t3"),
            (4, 4, "1/4*t3*t4^-1 - 1/12*t4^2"),
            (4, 5, "1/4*t4"),
            (5, 5, "1/2"),
        ],
        euler_linear: &[(1, 2), (1, 1), (3, 4), (1, 4)],
        euler_last: (1, 2),
        flat: flat_c4k2,
        z: &[],
        h: &[],
    },
];

pub fn fixture(id: &str) -> Result<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::UnknownFixture(id.to_string()))
}

/// Differences found in one part of the comparison.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectionDiff {
    pub name: String,
    pub diffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub fixture: String,
    pub matched: bool,
    /// The match needed `s → −s`.
    pub sign_flipped: bool,
    pub expected_terms: usize,
    pub computed_terms: usize,
    pub sections: Vec<SectionDiff>,
}

/// `name: expected a, got b` for every monomial where the two differ.
pub fn term_diff(expected: &Poly, computed: &Poly) -> Vec<String> {
    let mut monos: BTreeMap<_, ()> = BTreeMap::new();
    for (m, _) in expected.terms().chain(computed.terms()) {
        monos.insert(m.clone(), ());
    }
    let ch = expected.chart();
    let mut out = Vec::new();
    for m in monos.into_keys() {
        let (a, b) = (expected.coeff(&m), computed.coeff(&m));
        if a != b {
            let name = Poly::term(ch, m, Rational::from_integer(1.into())).to_string();
            out.push(format!("{name}: expected {a}, got {b}"));
        }
    }
    out
}

/// Signs `σ_j` with `t^j(−s) = σ_j t^j(s)`, if every coordinate is even or odd in `s`.
fn parity_signs(flat: &[Poly], flipped: &[Poly]) -> Option<Vec<i64>> {
    flat.iter()
        .zip(flipped)
        .map(|(a, b)| {
            if a == b {
                Some(1)
            } else if *a == b.neg() {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

fn flip_s(ext: &Arc<Chart>, polys: &[Poly]) -> Result<Vec<Poly>> {
    let mut b = BTreeMap::new();
    for (i, v) in ext.vars.iter().enumerate() {
        let x = Poly::var_idx(ext, i);
        b.insert(v.name.clone(), if v.name == "s" { x.neg() } else { x });
    }
    polys.iter().map(|q| q.substitute(ext, &b)).collect()
}

fn apply_signs(f: &Poly, signs: &[i64]) -> Result<Poly> {
    let ch = f.chart();
    let mut b = BTreeMap::new();
    for (i, v) in ch.vars.iter().enumerate() {
        let x = Poly::var_idx(ch, i);
        let flip = signs.get(i).is_some_and(|&s| s < 0);
        b.insert(v.name.clone(), if flip { x.neg() } else { x });
    }
    f.substitute(ch, &b)
}

fn compare_once(fx: &Fixture, st: &FrobeniusStructure, ext: &Arc<Chart>, flat: &[Poly], f: &Poly) -> Result<Vec<SectionDiff>> {
    let mut sections = Vec::new();
    let want_f = Poly::parse(&st.chart, fx.potential)?;
    sections.push(SectionDiff {
        name: "potential".into(),
        diffs: term_diff(&want_f, f),
    });
    let want_t = fx.flat_coordinates(ext)?;
    let mut d = Vec::new();
    for (j, (a, b)) in want_t.iter().zip(flat).enumerate() {
        d.extend(term_diff(a, b).into_iter().map(|x| format!("t{}: {x}", j + 1)));
    }
    sections.push(SectionDiff {
        name: "flat coordinates".into(),
        diffs: d,
    });
    Ok(sections)
}

/// Builds the fixture's structure and compares potential, flat coordinates,
/// Euler field, printed intersection-form entries and intermediate data.
pub fn compare(fx: &Fixture) -> Result<ComparisonReport> {
    let st = build_structure(&fx.spec())?;
    compare_structure(fx, &st)
}

pub fn compare_structure(fx: &Fixture, st: &FrobeniusStructure) -> Result<ComparisonReport> {
    let (ext, flat) = st.pipeline.flat_coordinates_over_y()?;
    let f = &st.potential.f;
    let mut sections = compare_once(fx, st, &ext, &flat, f)?;
    let mut sign_flipped = false;
    if sections.iter().any(|s| !s.diffs.is_empty()) && ext.var_index("s").is_ok() {
        let flipped = flip_s(&ext, &flat)?;
        if let Some(signs) = parity_signs(&flat, &flipped) {
            let g = apply_signs(f, &signs)?;
            let alt = compare_once(fx, st, &ext, &flipped, &g)?;
            if alt.iter().all(|s| s.diffs.is_empty()) {
                sections = alt;
                sign_flipped = true;
            }
        }
    }

    let mut d = Vec::new();
    let want: Vec<Rational> = fx.euler_linear.iter().map(|&(a, b)| rat(a, b)).collect();
    if want != st.euler.linear {
        d.push(format!("linear part: expected {want:?}, got {:?}", st.euler.linear));
    }
    let last = rat(fx.euler_last.0, fx.euler_last.1);
    if last != st.euler.last {
        d.push(format!("last component: expected {last}, got {}", st.euler.last));
    }
    sections.push(SectionDiff {
        name: "euler".into(),
        diffs: d,
    });

    let mut d = Vec::new();
    for &(i, j, text) in fx.intersection {
        let want = Poly::parse(&st.chart, text)?;
        d.extend(term_diff(&want, &st.g.m[i - 1][j - 1]).into_iter().map(|x| format!("g^({i},{j}) {x}")));
    }
    sections.push(SectionDiff {
        name: "intersection form".into(),
        diffs: d,
    });

    let mut d = Vec::new();
    if !fx.z.is_empty() {
        let zfw = st.pipeline.z.map.forward.as_ref().expect("z-map has a forward direction");
        for &(name, text) in fx.z {
            let want = Poly::parse(&st.pipeline.pencil.chart, text)?;
            d.extend(term_diff(&want, &zfw.polys[name]).into_iter().map(|x| format!("{name} {x}")));
        }
    }
    let wch = st.pipeline.w.stage.eta.chart.clone();
    for &(j, text) in fx.h {
        let want = Poly::parse(&wch, text)?;
        match st.pipeline.t.h.iter().find(|(i, _)| *i == j) {
            Some((_, h)) => d.extend(term_diff(&want, h).into_iter().map(|x| format!("h{j} {x}"))),
            None => d.push(format!("h{j} missing")),
        }
    }
    sections.push(SectionDiff {
        name: "intermediate".into(),
        diffs: d,
    });

    Ok(ComparisonReport {
        fixture: fx.id.to_string(),
        matched: sections.iter().all(|s| s.diffs.is_empty()),
        sign_flipped,
        expected_terms: Poly::parse(&st.chart, fx.potential)?.nterms(),
        computed_terms: f.nterms(),
        sections,
    })
}
