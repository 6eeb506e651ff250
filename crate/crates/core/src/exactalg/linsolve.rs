//! Exact sparse linear solving by fraction-free elimination.
//!
//! Rows are kept as primitive integer vectors: each new equation is cleared
//! of denominators, reduced against the existing pivot rows by integer
//! cross-multiplication, and divided by its content. The pivot rows stay in
//! reduced echelon form, so back substitution is a single division per
//! pivot.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// `Σ coeffs[i].1 · x_{coeffs[i].0} = rhs`.
#[derive(Clone, Debug, Default)]
pub struct LinearEquation {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl LinearEquation {
    pub fn new(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        LinearEquation { coeffs, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearSolveResult {
    Unique(Vec<Rational>),
    Parametric {
        /// The solution with every free unknown set to zero.
        particular: Vec<Rational>,
        free: Vec<usize>,
        null_space: Vec<Vec<Rational>>,
    },
    Inconsistent,
}

impl LinearSolveResult {
    pub fn unique(self) -> Option<Vec<Rational>> {
        match self {
            LinearSolveResult::Unique(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: BTreeMap<usize, BigInt>,
    rhs: BigInt,
}

impl Row {
    fn from_equation(eq: &LinearEquation) -> Row {
        let mut lcm = BigInt::one();
        for (_, c) in &eq.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        lcm = lcm.lcm(eq.rhs.denom());
        let scale = |c: &Rational| c.numer() * (&lcm / c.denom());
        let mut coeffs: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (i, c) in &eq.coeffs {
            *coeffs.entry(*i).or_insert_with(BigInt::zero) += scale(c);
        }
        coeffs.retain(|_, c| !c.is_zero());
        let mut r = Row {
            coeffs,
            rhs: scale(&eq.rhs),
        };
        r.make_primitive();
        r
    }

    fn make_primitive(&mut self) {
        let mut g = self.rhs.abs();
        for c in self.coeffs.values() {
            g = g.gcd(c);
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        for c in self.coeffs.values_mut() {
            *c /= &g;
        }
        self.rhs /= &g;
    }

    /// `self ← a·self − b·other`, with `a = other[v]`, `b = self[v]`.
    fn eliminate(&mut self, v: usize, other: &Row) {
        let b = match self.coeffs.get(&v) {
            Some(b) => b.clone(),
            None => return,
        };
        let a = other.coeffs[&v].clone();
        let g = a.gcd(&b);
        let (a, b) = (&a / &g, &b / &g);
        if !a.is_one() {
            for c in self.coeffs.values_mut() {
                *c *= &a;
            }
            self.rhs *= &a;
        }
        for (i, c) in &other.coeffs {
            let e = self.coeffs.entry(*i).or_insert_with(BigInt::zero);
            *e -= &b * c;
        }
        self.rhs -= &b * &other.rhs;
        self.coeffs.retain(|_, c| !c.is_zero());
        self.make_primitive();
    }
}

/// Solves the system over `n` unknowns.
pub fn solve_linear(n: usize, equations: &[LinearEquation]) -> LinearSolveResult {
    let mut pivots: BTreeMap<usize, Row> = BTreeMap::new();
    for eq in equations {
        let mut r = Row::from_equation(eq);
        let hits: Vec<usize> = r.coeffs.keys().filter(|v| pivots.contains_key(v)).cloned().collect();
        for v in hits {
            r.eliminate(v, &pivots[&v]);
        }
        let Some(&p) = r.coeffs.keys().next() else {
            if r.rhs.is_zero() {
                continue;
            }
            return LinearSolveResult::Inconsistent;
        };
        if r.coeffs[&p].is_negative() {
            for c in r.coeffs.values_mut() {
                *c = -c.clone();
            }
            r.rhs = -r.rhs.clone();
        }
        for row in pivots.values_mut() {
            if row.coeffs.contains_key(&p) {
                row.eliminate(p, &r);
            }
        }
        pivots.insert(p, r);
    }
    let free: Vec<usize> = (0..n).filter(|v| !pivots.contains_key(v)).collect();
    let mut particular = vec![Rational::zero(); n];
    for (&p, row) in &pivots {
        particular[p] = Rational::new(row.rhs.clone(), row.coeffs[&p].clone());
    }
    if free.is_empty() {
        return LinearSolveResult::Unique(particular);
    }
    let null_space = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (&p, row) in &pivots {
                if let Some(c) = row.coeffs.get(&f) {
                    v[p] = -Rational::new(c.clone(), row.coeffs[&p].clone());
                }
            }
            v
        })
        .collect();
    LinearSolveResult::Parametric {
        particular,
        free,
        null_space,
    }
}

/// A solution with the fewest nonzero unknowns, ties broken by the
/// lexicographically smallest vector. The flag reports whether the system
/// had a unique solution to begin with. `None` when inconsistent.
pub fn solve_sparsest(n: usize, equations: &[LinearEquation]) -> Option<(Vec<Rational>, bool)> {
    match solve_linear(n, equations) {
        LinearSolveResult::Unique(v) => return Some((v, true)),
        LinearSolveResult::Inconsistent => return None,
        LinearSolveResult::Parametric { .. } => {}
    }
    for size in 0..=n {
        let mut best: Option<Vec<Rational>> = None;
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            let mut eqs = equations.to_vec();
            eqs.extend(
                (0..n)
                    .filter(|u| !support.contains(u))
                    .map(|u| LinearEquation::new(vec![(u, Rational::one())], Rational::zero())),
            );
            let sol = match solve_linear(n, &eqs) {
                LinearSolveResult::Unique(v) => Some(v),
                LinearSolveResult::Parametric { particular, .. } => Some(particular),
                LinearSolveResult::Inconsistent => None,
            };
            if let Some(v) = sol {
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
        if let Some(b) = best {
            return Some((b, false));
        }
    }
    None
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{int, rat};

    fn eq(c: &[(usize, i64)], rhs: i64) -> LinearEquation {
        LinearEquation::new(c.iter().map(|&(i, v)| (i, int(v))).collect(), int(rhs))
    }

    #[test]
    fn single_unknown() {
        assert_eq!(
            solve_linear(1, &[eq(&[(0, 2)], 1)]),
            LinearSolveResult::Unique(vec![rat(1, 2)])
        );
    }

    #[test]
    fn b_coefficient_instance() {
        // 4B + 2 = 16B, i.e. 12B = 2
        assert_eq!(
            solve_linear(1, &[eq(&[(0, 12)], 2)]),
            LinearSolveResult::Unique(vec![rat(1, 6)])
        );
    }

    #[test]
    fn inconsistent() {
        assert_eq!(
            solve_linear(2, &[eq(&[(0, 1), (1, 1)], 1), eq(&[(0, 1), (1, 1)], 2)]),
            LinearSolveResult::Inconsistent
        );
    }

    #[test]
    fn parametric_null_space() {
        let r = solve_linear(3, &[eq(&[(0, 1), (1, 1)], 2), eq(&[(1, 1), (2, -1)], 0)]);
        match r {
            LinearSolveResult::Parametric {
                particular,
                free,
                null_space,
            } => {
                assert_eq!(free, vec![2]);
                assert_eq!(particular, vec![int(2), int(0), int(0)]);
                assert_eq!(null_space, vec![vec![int(-1), int(1), int(1)]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_and_fractions() {
        let eqs = vec![
            LinearEquation::new(vec![(0, rat(1, 2)), (1, rat(1, 3))], rat(5, 6)),
            LinearEquation::new(vec![(0, int(3)), (1, int(2))], int(5)),
            LinearEquation::new(vec![(0, int(1)), (1, int(-1))], int(0)),
        ];
        assert_eq!(solve_linear(2, &eqs), LinearSolveResult::Unique(vec![int(1), int(1)]));
    }

    #[test]
    fn sparsest_prefers_small_support() {
        // x0 + x1 + x2 = 2, x1 + x2 = 1: solutions (1, t, 1-t)
        let eqs = vec![
            LinearEquation::new(vec![(0, int(1)), (1, int(1)), (2, int(1))], int(2)),
            LinearEquation::new(vec![(1, int(1)), (2, int(1))], int(1)),
        ];
        let (v, unique) = solve_sparsest(3, &eqs).unwrap();
        assert!(!unique);
        assert_eq!(v, vec![int(1), int(0), int(1)]);
    }
}
