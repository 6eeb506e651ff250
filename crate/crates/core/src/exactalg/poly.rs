//! Sparse multivariate Laurent polynomials with rational coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::chart::{Chart, Coord};
use super::rational::{display_rational, is_negative, Rational};
use crate::error::{Error, Result};

/// Exponent vector, one entry per chart variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[i32; 8]>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn from_exponents(exps: &[i32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn var(n: usize, i: usize, e: i32) -> Self {
        let mut m = Self::one(n);
        m.0[i] = e;
        m
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> i32 {
        self.0[i]
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn with_exp(&self, i: usize, e: i32) -> Monomial {
        let mut m = self.clone();
        m.0[i] = e;
        m
    }

    pub fn weighted_degree(&self, chart: &Chart) -> Rational {
        let mut d = Rational::zero();
        for (i, &e) in self.0.iter().enumerate() {
            if e != 0 {
                d += chart.weight(i) * Rational::from_integer(e.into());
            }
        }
        d
    }

    /// Negative exponents only on Laurent variables.
    pub fn admissible(&self, chart: &Chart) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| e >= 0 || chart.vars[i].laurent)
    }
}

/// Graded lexicographic: total exponent first, then lexicographic.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone)]
pub struct Poly {
    chart: Arc<Chart>,
    terms: BTreeMap<Monomial, Rational>,
}

/// Result of a homogeneity query.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightedDegree {
    Zero,
    Homogeneous(Rational),
    NotHomogeneous(Vec<(Monomial, Rational)>),
}

fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Poly {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        Poly {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Arc<Chart>, c: Rational) -> Self {
        let mut p = Self::zero(chart);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(chart.nvars()), c);
        }
        p
    }

    pub fn one(chart: &Arc<Chart>) -> Self {
        Self::constant(chart, Rational::one())
    }

    pub fn term(chart: &Arc<Chart>, m: Monomial, c: Rational) -> Self {
        debug_assert_eq!(m.0.len(), chart.nvars());
        let mut p = Self::zero(chart);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// The variable with index `i`.
    pub fn var_idx(chart: &Arc<Chart>, i: usize) -> Self {
        Self::term(chart, Monomial::var(chart.nvars(), i, 1), Rational::one())
    }

    pub fn var(chart: &Arc<Chart>, name: &str) -> Result<Self> {
        Ok(Self::var_idx(chart, chart.var_index(name)?))
    }

    /// Builds from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(chart: &Arc<Chart>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(chart);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Reads the `Display` form: `1/48*t2^3*t3^-1 - t1 + 2`. Spaces are ignored.
    pub fn parse(chart: &Arc<Chart>, text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut prev = ' ';
        for c in compact.chars() {
            if (c == '+' || c == '-') && prev != '^' {
                if !cur.is_empty() {
                    pieces.push((neg, std::mem::take(&mut cur)));
                } else if !pieces.is_empty() {
                    return Err(Error::Parse(format!("dangling sign in {text:?}")));
                }
                neg = c == '-';
            } else {
                cur.push(c);
            }
            prev = c;
        }
        if cur.is_empty() {
            return Err(Error::Parse(format!("dangling sign in {text:?}")));
        }
        pieces.push((neg, cur));
        let mut p = Self::zero(chart);
        for (neg, piece) in pieces {
            if piece == "0" {
                continue;
            }
            let mut c = Rational::one();
            let mut m = Monomial::one(chart.nvars());
            for f in piece.split('*') {
                if f.starts_with(|ch: char| ch.is_ascii_digit()) {
                    c *= super::rational::parse_rational(f)?;
                    continue;
                }
                let (name, e) = match f.split_once('^') {
                    Some((n, e)) => (n, e.parse::<i32>().map_err(|_| Error::Parse(format!("bad exponent in {f:?}")))?),
                    None => (f, 1),
                };
                let i = chart.var_index(name)?;
                m.0[i] += e;
            }
            if neg {
                c = -c;
            }
            p.add_term(m, c);
        }
        for m in p.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e < 0 && !chart.vars[i].laurent {
                    return Err(Error::Parse(format!("negative power of {}", chart.vars[i].name)));
                }
            }
        }
        Ok(p)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if same_chart(&self.chart, &other.chart) {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                left: self.chart.name.clone(),
                right: other.chart.name.clone(),
            })
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        if self.terms.len() < other.terms.len() {
            return other.try_mul(self);
        }
        let mut acc: HashMap<Monomial, Rational> = HashMap::with_capacity(self.terms.len() * other.terms.len().max(1));
        for (mb, cb) in &other.terms {
            for (ma, ca) in &self.terms {
                let c = ca * cb;
                acc.entry(ma.mul(mb))
                    .and_modify(|x| *x += &c)
                    .or_insert(c);
            }
        }
        Ok(Poly {
            chart: self.chart.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn neg(&self) -> Poly {
        Poly {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(a, b)| (a.mul(m), b * c)).collect(),
        }
    }

    /// `self^e`; negative `e` only for single-term polynomials.
    pub fn pow(&self, e: i32) -> Result<Poly> {
        if e < 0 {
            return self.unit_inverse()?.pow(-e);
        }
        let mut result = Poly::one(&self.chart);
        let mut base = self.clone();
        let mut n = e as u32;
        while n > 0 {
            if n & 1 == 1 {
                result = result.try_mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Inverse of a single-term polynomial whose variables are all Laurent.
    pub fn unit_inverse(&self) -> Result<Poly> {
        if self.terms.len() != 1 {
            return Err(Error::NonUnitLaurentSubstitution(self.to_string()));
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let inv = Monomial::one(m.0.len()).div(m);
        if !inv.admissible(&self.chart) {
            return Err(Error::NonUnitLaurentSubstitution(self.to_string()));
        }
        Ok(Poly::term(&self.chart, inv, c.recip()))
    }

    /// Partial derivative with respect to a chart variable.
    pub fn diff(&self, var: usize) -> Poly {
        let mut r = Poly::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e != 0 {
                r.terms
                    .insert(m.with_exp(var, e - 1), c * Rational::from_integer(e.into()));
            }
        }
        r
    }

    /// `x ∂/∂x` for the variable `x`: scales each term by its exponent.
    pub fn euler(&self, var: usize) -> Poly {
        let mut r = Poly::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e != 0 {
                r.terms.insert(m.clone(), c * Rational::from_integer(e.into()));
            }
        }
        r
    }

    /// Derivative along geometric coordinate `c` of the chart. For a
    /// logarithmic coordinate this is `rate·E ∂/∂E` plus `∂/∂L` for its
    /// explicit variable.
    pub fn diff_coord(&self, c: usize) -> Poly {
        match &self.chart.coords[c] {
            Coord::Var(v) => self.diff(*v),
            Coord::Exp {
                exp_var,
                rate,
                log_var,
            } => {
                let mut r = self.euler(*exp_var).scale(rate);
                if let Some(l) = log_var {
                    let d = self.diff(*l);
                    for (m, c) in d.terms {
                        r.add_term(m, c);
                    }
                }
                r
            }
        }
    }

    /// Replaces variables by polynomials over `target`. Variables without a
    /// binding map to the same-named variable of `target`; variables that do
    /// not occur need neither.
    pub fn substitute(&self, target: &Arc<Chart>, bindings: &BTreeMap<String, Poly>) -> Result<Poly> {
        let n = self.chart.nvars();
        let used: Vec<bool> = (0..n).map(|i| self.terms.keys().any(|m| m.0[i] != 0)).collect();
        let mut images: Vec<Poly> = Vec::with_capacity(n);
        for (i, v) in self.chart.vars.iter().enumerate() {
            if !used[i] {
                images.push(Poly::zero(target));
                continue;
            }
            let img = match bindings.get(&v.name) {
                Some(p) => {
                    if !same_chart(p.chart(), target) {
                        return Err(Error::ChartMismatch {
                            left: p.chart.name.clone(),
                            right: target.name.clone(),
                        });
                    }
                    p.clone()
                }
                None => Poly::var(target, &v.name)?,
            };
            images.push(img);
        }
        let mut cache: HashMap<(usize, i32), Poly> = HashMap::new();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let key = (i, e);
                if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(key) {
                    let p = if e < 0 {
                        images[i]
                            .unit_inverse()
                            .map_err(|_| Error::NonUnitLaurentSubstitution(self.chart.vars[i].name.clone()))?
                            .pow(-e)?
                    } else {
                        images[i].pow(e)?
                    };
                    slot.insert(p);
                }
                t = t.try_mul(&cache[&key])?;
                if t.is_zero() {
                    break;
                }
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// Exact quotient `self / q`; fails if `q` does not divide `self`.
    pub fn exact_div(&self, q: &Poly) -> Result<Poly> {
        self.check(q)?;
        if q.is_zero() {
            return Err(Error::NonExactDivision);
        }
        let n = self.chart.nvars();
        let (lo_p, hi_p) = self.exponent_box();
        let (lo_q, hi_q) = q.exponent_box();
        let (lq_m, lq_c) = q.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.chart);
        while let Some((lm, lc)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let m = lm.div(&lq_m);
            let inside = (0..n).all(|i| m.0[i] >= lo_p[i] - hi_q[i] && m.0[i] <= hi_p[i] - lo_q[i]);
            if !inside || !m.admissible(&self.chart) {
                return Err(Error::NonExactDivision);
            }
            let c = lc / &lq_c;
            let sub = q.mul_monomial(&m, &c);
            for (mm, cc) in sub.terms {
                rem.add_term(mm, -cc);
            }
            quot.add_term(m, c);
        }
        Ok(quot)
    }

    /// Per-variable minimum and maximum exponents (zeros if empty).
    pub fn exponent_box(&self) -> (Vec<i32>, Vec<i32>) {
        let n = self.chart.nvars();
        let mut lo = vec![i32::MAX; n];
        let mut hi = vec![i32::MIN; n];
        for m in self.terms.keys() {
            for i in 0..n {
                lo[i] = lo[i].min(m.0[i]);
                hi[i] = hi[i].max(m.0[i]);
            }
        }
        if self.terms.is_empty() {
            lo.fill(0);
            hi.fill(0);
        }
        (lo, hi)
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        let mut it = self.terms.iter();
        let Some((m0, _)) = it.next() else {
            return WeightedDegree::Zero;
        };
        let d0 = m0.weighted_degree(&self.chart);
        let mut bad = Vec::new();
        for (m, c) in &self.terms {
            if m.weighted_degree(&self.chart) != d0 {
                bad.push((m.clone(), c.clone()));
            }
        }
        if bad.is_empty() {
            WeightedDegree::Homogeneous(d0)
        } else {
            WeightedDegree::NotHomogeneous(bad)
        }
    }

    /// True when zero or homogeneous of weighted degree `d`.
    pub fn is_homogeneous_of(&self, d: &Rational) -> bool {
        self.terms.keys().all(|m| &m.weighted_degree(&self.chart) == d)
    }

    /// Highest power of variable `v` occurring (0 for the zero polynomial).
    pub fn degree_in(&self, v: usize) -> i32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, v: usize) -> i32 {
        self.terms.keys().map(|m| m.0[v]).min().unwrap_or(0)
    }

    /// Re-tags the polynomial with an equal-shaped chart (same variable count).
    pub fn with_chart(&self, chart: &Arc<Chart>) -> Result<Poly> {
        if chart.nvars() != self.chart.nvars() {
            return Err(Error::ChartMismatch {
                left: self.chart.name.clone(),
                right: chart.name.clone(),
            });
        }
        Ok(Poly {
            chart: chart.clone(),
            terms: self.terms.clone(),
        })
    }

    /// Terms in descending graded-lex order.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart) && self.terms == other.terms
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.chart.name, self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms_desc().enumerate() {
            let neg = is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(self.chart.vars[i].name.clone());
                } else if e != 0 {
                    factors.push(format!("{}^{}", self.chart.vars[i].name, e));
                }
            }
            if factors.is_empty() {
                write!(f, "{}", display_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", display_rational(&abs), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Poly> for &Poly {
            type Output = Poly;
            /// Panics on chart mismatch; use the `try_` form where charts may differ.
            fn $m(self, rhs: &Poly) -> Poly {
                self.$f(rhs).expect("polynomial chart mismatch")
            }
        }
        impl std::ops::$tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs).expect("polynomial chart mismatch")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

impl std::ops::Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::chart::VarSpec;
    use crate::exactalg::rational::{int, rat};

    fn uv() -> Arc<Chart> {
        Chart::plain(
            "uv",
            vec![
                VarSpec::new("u", int(1), false),
                VarSpec::new("v", int(1), false),
                VarSpec::new("y", int(1), true),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_inverts_display() {
        let ch = uv();
        let p = Poly::parse(&ch, "1/48*u^3*y^-1 - u*v + 2 - 3/2*y^2").unwrap();
        assert_eq!(p.nterms(), 4);
        assert_eq!(Poly::parse(&ch, &p.to_string()).unwrap(), p);
        assert_eq!(Poly::parse(&ch, "-u").unwrap(), Poly::var_idx(&ch, 0).neg());
        assert!(Poly::parse(&ch, "u^-1").is_err());
        assert!(Poly::parse(&ch, "u +").is_err());
        assert!(Poly::parse(&ch, "w").is_err());
        assert!(Poly::parse(&ch, "1/0*u").is_err());
    }

    #[test]
    fn difference_of_squares() {
        let c = uv();
        let u = Poly::var(&c, "u").unwrap();
        let v = Poly::var(&c, "v").unwrap();
        let p = &(&u - &v) * &(&u + &v);
        assert_eq!(p, &(&u * &u) - &(&v * &v));
        assert!((&p + &p.neg()).is_zero());
        assert_eq!(p.exact_div(&(&u - &v)).unwrap(), &u + &v);
    }

    #[test]
    fn laurent_division_and_failure() {
        let c = uv();
        let u = Poly::var(&c, "u").unwrap();
        let y = Poly::var(&c, "y").unwrap();
        let q = u.exact_div(&y).unwrap();
        assert_eq!(q, Poly::term(&c, Monomial::from_exponents(&[1, 0, -1]), int(1)));
        // u is not a unit
        assert_eq!(y.exact_div(&u), Err(Error::NonExactDivision));
        let v = Poly::var(&c, "v").unwrap();
        assert_eq!((&u + &Poly::one(&c)).exact_div(&(&u - &v)), Err(Error::NonExactDivision));
    }

    #[test]
    fn derivative_and_degree() {
        let c = uv();
        let u = Poly::var(&c, "u").unwrap();
        assert_eq!((&u * &u).diff(0), u.scale(&int(2)));
        assert_eq!(Poly::constant(&c, int(5)).weighted_degree(), WeightedDegree::Homogeneous(int(0)));
        let mixed = &u + &(&u * &u);
        assert!(matches!(mixed.weighted_degree(), WeightedDegree::NotHomogeneous(_)));
    }

    #[test]
    fn negative_power_of_non_unit_rejected() {
        let c = uv();
        let y = Poly::var(&c, "y").unwrap();
        let inv_y = y.pow(-1).unwrap();
        let mut b = BTreeMap::new();
        b.insert("y".to_string(), &Poly::var(&c, "u").unwrap() + &Poly::one(&c));
        assert!(matches!(inv_y.substitute(&c, &b), Err(Error::NonUnitLaurentSubstitution(_))));
        assert_eq!(inv_y.scale(&rat(1, 2)).to_string(), "1/2*y^-1");
    }
}
