//! Degree data and invariant metrics of the root systems B_l and C_l with a
//! marked Dynkin vertex.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{int, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    B,
    C,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::B => "B",
            Family::C => "C",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            _ => Err(Error::InvalidSpec(format!("unknown family {s:?}"))),
        }
    }
}

/// A root system family, its rank `l` and the marked vertex `k`, `1 ≤ k ≤ l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootSystemSpec {
    family: Family,
    rank: usize,
    vertex: usize,
}

impl RootSystemSpec {
    pub fn new(family: Family, rank: usize, vertex: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidSpec("rank must be positive".into()));
        }
        if vertex == 0 || vertex > rank {
            return Err(Error::InvalidSpec(format!("vertex {vertex} outside 1..={rank}")));
        }
        if family == Family::B && rank < 2 {
            return Err(Error::InvalidSpec("B_l needs rank at least 2".into()));
        }
        Ok(RootSystemSpec { family, rank, vertex })
    }

    pub fn c(rank: usize, vertex: usize) -> Result<Self> {
        Self::new(Family::C, rank, vertex)
    }

    pub fn b(rank: usize, vertex: usize) -> Result<Self> {
        Self::new(Family::B, rank, vertex)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `l`
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `k`
    pub fn vertex(&self) -> usize {
        self.vertex
    }

    /// The C_l spec with the same rank and vertex.
    pub fn as_c(&self) -> RootSystemSpec {
        RootSystemSpec {
            family: Family::C,
            ..*self
        }
    }

    /// Short identifier such as `c3k1`.
    pub fn id(&self) -> String {
        format!("{}{}k{}", self.family.to_string().to_lowercase(), self.rank, self.vertex)
    }
}

impl fmt::Display for RootSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{} (k={})", self.family, self.rank, self.vertex)
    }
}

/// `4π²·(dx_m, dx_n)` on the extended space, indices `0..=l` (the last one
/// is the extra direction).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedMetric {
    pub m: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeData {
    /// `d_j = (ω_j, ω_k)`, `j = 1..l`.
    pub d: Vec<Rational>,
    /// Determinant of the Cartan matrix.
    pub cartan_det: u32,
    /// Degrees of the flat coordinates `t^1..t^{l+1}`.
    pub flat: Vec<Rational>,
}

pub fn degrees(spec: &RootSystemSpec) -> Vec<Rational> {
    let (l, k) = (spec.rank as i64, spec.vertex as i64);
    (1..=l)
        .map(|j| match spec.family {
            Family::C => int(j.min(k)),
            Family::B if k < l => {
                if j < l {
                    int(j.min(k))
                } else {
                    rat(k, 2)
                }
            }
            Family::B => {
                if j < l {
                    rat(j, 2)
                } else {
                    rat(l, 4)
                }
            }
        })
        .collect()
}

/// Degrees of the flat coordinates; identical for B_l and C_l.
pub fn flat_degrees(spec: &RootSystemSpec) -> Vec<Rational> {
    let (l, k) = (spec.rank as i64, spec.vertex as i64);
    (1..=l + 1)
        .map(|j| {
            if j <= k {
                rat(j, k)
            } else if j <= l {
                rat(2 * l - 2 * j + 1, 2 * (l - k))
            } else {
                Rational::zero()
            }
        })
        .collect()
}

pub fn build(spec: &RootSystemSpec) -> (ExtendedMetric, DegreeData) {
    let l = spec.rank;
    let d = degrees(spec);
    let mut m = vec![vec![Rational::zero(); l + 1]; l + 1];
    for a in 1..=l {
        for b in a..=l {
            let v = match spec.family {
                Family::C => int(a as i64),
                Family::B => {
                    if b < l {
                        int(a as i64)
                    } else if a < l {
                        rat(a as i64, 2)
                    } else {
                        rat(l as i64, 4)
                    }
                }
            };
            m[a - 1][b - 1] = v.clone();
            m[b - 1][a - 1] = v;
        }
    }
    m[l][l] = -d[spec.vertex - 1].recip();
    (
        ExtendedMetric { m },
        DegreeData {
            d,
            cartan_det: 2,
            flat: flat_degrees(spec),
        },
    )
}

/// The involution `i ↦ i*` on `1..=l+1`: reflection inside each component of
/// the Dynkin diagram with vertex `k` removed, and `k ↔ l+1`.
pub fn dual_index(spec: &RootSystemSpec, i: usize) -> usize {
    let (l, k) = (spec.rank, spec.vertex);
    assert!((1..=l + 1).contains(&i), "index {i} outside 1..={}", l + 1);
    if i == k {
        l + 1
    } else if i == l + 1 {
        k
    } else if i < k {
        k - i
    } else {
        k + l + 1 - i
    }
}

/// Leading principal minors of a rational matrix, by exact elimination.
pub fn leading_minors(m: &[Vec<Rational>]) -> Vec<Rational> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut out = Vec::with_capacity(n);
    let mut det = Rational::one();
    for p in 0..n {
        let piv = a[p][p].clone();
        det *= &piv;
        out.push(det.clone());
        if piv.is_zero() {
            // remaining minors are not determined by this pivot sequence
            out.resize(n, Rational::zero());
            break;
        }
        for r in p + 1..n {
            let f = &a[r][p] / &piv;
            for c in p..n {
                let t = &f * &a[p][c];
                a[r][c] -= t;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn c3_metric_block() {
        let (m, d) = build(&RootSystemSpec::c(3, 1).unwrap());
        let v: Vec<Vec<Rational>> = m.m[..3].iter().map(|r| r[..3].to_vec()).collect();
        let want = [[1, 1, 1], [1, 2, 2], [1, 2, 3]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(v[i][j], int(want[i][j]));
            }
        }
        assert_eq!(m.m[3][3], int(-1));
        assert_eq!(d.d, vec![int(1); 3]);
    }

    #[test]
    fn c4k2_extra_entry() {
        let (m, d) = build(&RootSystemSpec::c(4, 2).unwrap());
        assert_eq!(m.m[4][4], rat(-1, 2));
        assert_eq!(d.d, vec![int(1), int(2), int(2), int(2)]);
    }

    #[test]
    fn b_metric_corner_and_degrees() {
        for l in 2..=6 {
            let (m, _) = build(&RootSystemSpec::b(l, 1).unwrap());
            assert_eq!(m.m[l - 1][l - 1], rat(l as i64, 4));
        }
        assert_eq!(degrees(&RootSystemSpec::b(4, 2).unwrap()), vec![int(1), int(2), int(2), int(1)]);
        assert_eq!(degrees(&RootSystemSpec::b(3, 3).unwrap()), vec![rat(1, 2), int(1), rat(3, 4)]);
        assert_eq!(build(&RootSystemSpec::b(3, 3).unwrap()).0.m[3][3], rat(-4, 3));
    }

    #[test]
    fn duality_examples() {
        let s = RootSystemSpec::c(3, 1).unwrap();
        assert_eq!(flat_degrees(&s), vec![int(1), rat(3, 4), rat(1, 4), int(0)]);
        assert_eq!(dual_index(&s, 1), 4);
        assert_eq!(dual_index(&s, 2), 3);
        let s = RootSystemSpec::c(4, 2).unwrap();
        assert_eq!(dual_index(&s, 1), 1);
        assert_eq!(flat_degrees(&s)[0], rat(1, 2));
    }

    #[test]
    fn duality_sums_and_positivity() {
        for family in [Family::B, Family::C] {
            for l in 1..=8 {
                for k in 1..=l {
                    let Ok(s) = RootSystemSpec::new(family, l, k) else { continue };
                    let dt = flat_degrees(&s);
                    for i in 1..=l + 1 {
                        let j = dual_index(&s, i);
                        assert_eq!(dual_index(&s, j), i);
                        assert_eq!(&dt[i - 1] + &dt[j - 1], int(1), "{s} i={i}");
                    }
                    let (m, _) = build(&s);
                    let v: Vec<Vec<Rational>> = m.m[..l].iter().map(|r| r[..l].to_vec()).collect();
                    assert!(leading_minors(&v).iter().all(|x| x.is_positive()), "{s}");
                }
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(RootSystemSpec::c(3, 0).is_err());
        assert!(RootSystemSpec::c(3, 4).is_err());
        assert!(RootSystemSpec::c(0, 1).is_err());
        assert!("D".parse::<Family>().is_err());
    }
}
