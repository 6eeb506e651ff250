//! Determinants and inverses of small polynomial matrices.

use std::collections::HashMap;
use std::sync::Arc;

use super::chart::Chart;
use super::poly::Poly;
use crate::error::{Error, Result};

pub type PolyMatrix = Vec<Vec<Poly>>;

/// Determinant by expansion over column subsets, skipping zero entries.
pub fn det(m: &[Vec<Poly>], chart: &Arc<Chart>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(chart);
    }
    let mut layer: HashMap<u32, Poly> = HashMap::new();
    layer.insert(0, Poly::one(chart));
    for entries in m {
        let mut next: HashMap<u32, Poly> = HashMap::new();
        for (&set, acc) in &layer {
            for (col, e) in entries.iter().enumerate() {
                if set & (1 << col) != 0 || e.is_zero() {
                    continue;
                }
                let above = (set >> (col + 1)).count_ones();
                let mut t = acc * e;
                if above % 2 == 1 {
                    t = -t;
                }
                let key = set | (1 << col);
                match next.get_mut(&key) {
                    Some(p) => *p = &*p + &t,
                    None => {
                        next.insert(key, t);
                    }
                }
            }
        }
        next.retain(|_, p| !p.is_zero());
        layer = next;
        if layer.is_empty() {
            return Poly::zero(chart);
        }
    }
    layer.remove(&((1u32 << n) - 1)).unwrap_or_else(|| Poly::zero(chart))
}

fn minor(m: &[Vec<Poly>], skip_row: usize, skip_col: usize) -> PolyMatrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_col)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect()
}

/// Classical adjugate, `adj(m)·m = det(m)·1`.
pub fn adjugate(m: &[Vec<Poly>], chart: &Arc<Chart>) -> PolyMatrix {
    let n = m.len();
    let mut adj = vec![vec![Poly::zero(chart); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(m, j, i), chart);
            adj[i][j] = if (i + j) % 2 == 1 { -c } else { c };
        }
    }
    adj
}

/// Inverse of a matrix whose determinant is a unit (a single Laurent
/// monomial term), as adjugate over determinant.
pub fn inverse_unit_det(m: &[Vec<Poly>], chart: &Arc<Chart>) -> Result<PolyMatrix> {
    let d = det(m, chart);
    let dinv = d
        .unit_inverse()
        .map_err(|_| Error::NotInvertible(format!("determinant {d}")))?;
    Ok(adjugate(m, chart)
        .into_iter()
        .map(|r| r.iter().map(|c| c * &dinv).collect())
        .collect())
}

pub fn matmul(a: &[Vec<Poly>], b: &[Vec<Poly>], chart: &Arc<Chart>) -> PolyMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Poly::zero(chart); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Poly::zero(chart);
            for s in 0..k {
                if a[i][s].is_zero() || b[s][j].is_zero() {
                    continue;
                }
                acc = &acc + &(&a[i][s] * &b[s][j]);
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn transpose(a: &[Vec<Poly>]) -> PolyMatrix {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn identity(n: usize, chart: &Arc<Chart>) -> PolyMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Poly::one(chart) } else { Poly::zero(chart) })
                .collect()
        })
        .collect()
}
