//! Exact arithmetic: rationals, weighted Laurent polynomials, linear algebra.

pub mod chart;
pub mod linsolve;
pub mod matrix;
pub mod poly;
pub mod rational;

use std::collections::BTreeMap;

pub use chart::{Chart, Coord, VarSpec};
pub use linsolve::{solve_linear, solve_sparsest, LinearEquation, LinearSolveResult};
pub use poly::{Monomial, Poly, WeightedDegree};
pub use rational::{format_rational, int, parse_rational, rat, Rational};

/// Linear equations stating `Σ_u x_u · images[u][e] = targets[e]` for every
/// polynomial slot `e`, one equation per monomial.
pub fn coefficient_equations(images: &[Vec<Poly>], targets: &[Poly]) -> Vec<LinearEquation> {
    let mut eqs = Vec::new();
    for (e, target) in targets.iter().enumerate() {
        let mut rows: BTreeMap<Monomial, LinearEquation> = BTreeMap::new();
        for (m, c) in target.terms() {
            rows.entry(m.clone()).or_default().rhs = c.clone();
        }
        for (u, img) in images.iter().enumerate() {
            for (m, c) in img[e].terms() {
                rows.entry(m.clone()).or_default().coeffs.push((u, c.clone()));
            }
        }
        eqs.extend(rows.into_values());
    }
    eqs
}

/// All exponent vectors over `vars` (nonnegative) with the given weighted
/// degree. Every listed variable must have positive weight.
pub fn monomials_of_degree(chart: &Chart, vars: &[usize], degree: &Rational) -> Vec<Monomial> {
    use num_traits::{Signed, Zero};
    let mut out = Vec::new();
    let mut exps = vec![0i32; chart.nvars()];
    fn rec(
        chart: &Chart,
        vars: &[usize],
        k: usize,
        left: Rational,
        exps: &mut Vec<i32>,
        out: &mut Vec<Monomial>,
    ) {
        if left.is_zero() {
            out.push(Monomial::from_exponents(exps));
            return;
        }
        if k == vars.len() || left.is_negative() {
            return;
        }
        let v = vars[k];
        let w = chart.weight(v).clone();
        assert!(w.is_positive(), "monomial enumeration needs positive weights");
        let mut left = left;
        let mut e = 0;
        loop {
            exps[v] = e;
            rec(chart, vars, k + 1, left.clone(), exps, out);
            left -= &w;
            if left.is_negative() {
                break;
            }
            e += 1;
        }
        exps[v] = 0;
    }
    if degree.is_negative() {
        return out;
    }
    rec(chart, vars, 0, degree.clone(), &mut exps, &mut out);
    out.sort();
    out
}
