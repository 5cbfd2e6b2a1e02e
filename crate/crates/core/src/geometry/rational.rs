//! Exact scalars and vectors over Q.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Canonical rational scalar (gcd-reduced, positive denominator).
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.125"`.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let t = text.trim();
    let bad = || Error::InvalidParameter(format!("malformed rational `{text}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            s => s.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = int_part.abs() * &scale + frac_part;
        let n = if negative { -mag } else { mag };
        return Ok(Rat::new(n, scale));
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// `p/q`, or `p` for integers.
pub fn format_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering truncated to `digits` fractional digits.
pub fn decimal(q: &Rat, digits: usize) -> String {
    let negative = q.is_negative();
    let a = q.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (int, frac) = scaled.div_rem(&scale);
    let mut s = String::new();
    if negative && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if digits > 0 {
        let f = frac.to_string();
        s.push('.');
        for _ in f.len()..digits {
            s.push('0');
        }
        s.push_str(&f);
    }
    s
}

/// Exact square root when `q` is the square of a rational.
pub fn sqrt_exact(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Rational bounds `lo <= sqrt(q) <= hi` with `hi - lo <= 2^-bits`.
pub fn sqrt_bounds(q: &Rat, bits: u32) -> (Rat, Rat) {
    assert!(!q.is_negative(), "square root of a negative rational");
    if let Some(r) = sqrt_exact(q) {
        return (r.clone(), r);
    }
    let scale = BigInt::one() << bits;
    let scaled = (q.numer() * &scale * &scale).div_floor(q.denom());
    let s = scaled.sqrt();
    let lo = Rat::new(s.clone(), scale.clone());
    let hi = Rat::new(s + 1, scale);
    (lo, hi)
}

/// A positive rational not exceeding `sqrt(q)`; `q` must be positive.
pub fn sqrt_lower_positive(q: &Rat) -> Rat {
    let mut bits = 16;
    loop {
        let (lo, _) = sqrt_bounds(q, bits);
        if lo.is_positive() {
            return lo;
        }
        bits *= 2;
    }
}

pub fn sqrt_upper(q: &Rat) -> Rat {
    sqrt_bounds(q, 48).1
}

/// Decimal rendering of `sqrt(q)`.
pub fn sqrt_decimal(q: &Rat, digits: usize) -> String {
    let bits = (digits as f64 * 3.33).ceil() as u32 + 8;
    decimal(&sqrt_bounds(q, bits).0, digits)
}

/// Exact point, direction or covector in Q^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QVector(Vec<Rat>);

impl QVector {
    pub fn new(coords: Vec<Rat>) -> Self {
        QVector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        QVector(vec![Rat::zero(); dim])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        QVector(coords.iter().map(|&c| rat(c)).collect())
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rat::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rat> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn dot(&self, other: &QVector) -> Rat {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> Rat {
        self.dot(self)
    }

    /// Sum of absolute values; an upper bound for the Euclidean norm.
    pub fn norm_l1(&self) -> Rat {
        self.0.iter().fold(Rat::zero(), |acc, c| acc + c.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Rat) -> QVector {
        QVector(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: &Rat, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn concat(&self, other: &QVector) -> QVector {
        let mut c = self.0.clone();
        c.extend(other.0.iter().cloned());
        QVector(c)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> QVector {
        QVector(self.0[range].to_vec())
    }

    pub fn select(&self, indices: &[usize]) -> QVector {
        QVector(indices.iter().map(|&i| self.0[i].clone()).collect())
    }

    /// Places coordinate `i` at position `map[i]` of a zero vector of length `dim`.
    pub fn embed(&self, dim: usize, map: &[usize]) -> QVector {
        let mut v = Self::zeros(dim);
        for (c, &j) in self.0.iter().zip(map) {
            v.0[j] = c.clone();
        }
        v
    }

    /// Positive multiple with coprime integer coordinates; zero stays zero.
    pub fn primitive(&self) -> QVector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * &lcm).to_integer()).collect();
        let gcd = ints
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        QVector(
            ints.into_iter()
                .map(|c| Rat::from_integer(c / &gcd))
                .collect(),
        )
    }

    /// Primitive representative of the line through the vector (first nonzero coordinate positive).
    pub fn line_key(&self) -> QVector {
        let p = self.primitive();
        match p.0.iter().find(|c| !c.is_zero()) {
            Some(c) if c.is_negative() => -&p,
            _ => p,
        }
    }
}

impl Index<usize> for QVector {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl From<Vec<Rat>> for QVector {
    fn from(v: Vec<Rat>) -> Self {
        QVector(v)
    }
}

impl FromIterator<Rat> for QVector {
    fn from_iter<I: IntoIterator<Item = Rat>>(iter: I) -> Self {
        QVector(iter.into_iter().collect())
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Add for QVector {
    type Output = QVector;
    fn add(self, other: QVector) -> QVector {
        &self + &other
    }
}

impl Sub for QVector {
    type Output = QVector;
    fn sub(self, other: QVector) -> QVector {
        &self - &other
    }
}

impl Sub<&QVector> for QVector {
    type Output = QVector;
    fn sub(self, other: &QVector) -> QVector {
        &self - other
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rat(c))?;
        }
        write!(f, ")")
    }
}

/// Solves the square system `a x = b` exactly; `None` when singular.
pub fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] * &inv;
                for c in col..n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
                let v = &b[col] * &f;
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Basis of `{x : row . x = 0 for every row}`.
pub fn nullspace(rows: &[QVector], dim: usize) -> Vec<QVector> {
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| r.coords().to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for k in c..dim {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..dim {
                    let v = &m[r][k] * &f;
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); dim];
            v[f] = Rat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][f].clone();
            }
            QVector(v).primitive()
        })
        .collect()
}

/// Rank of a set of vectors.
pub fn rank(rows: &[QVector], dim: usize) -> usize {
    dim - nullspace(rows, dim).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rat("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-4").unwrap(), rat(-4));
        assert_eq!(parse_rat("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rat("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(
            parse_rat("1/0").unwrap_err(),
            Error::InvalidParameter("zero denominator".into())
        );
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let (lo, hi) = sqrt_bounds(&rat(2), 30);
        assert!(&lo * &lo <= rat(2) && &hi * &hi >= rat(2));
        assert_eq!(sqrt_exact(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(sqrt_exact(&rat(2)), None);
        assert_eq!(sqrt_decimal(&rat(2), 12), "1.414213562373");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(decimal(&ratio(-5, 2), 2), "-2.50");
        assert_eq!(decimal(&rat(7), 0), "7");
    }

    #[test]
    fn primitive_and_line_key() {
        let v = QVector::new(vec![ratio(1, 2), ratio(-3, 4)]);
        assert_eq!(v.primitive(), QVector::from_ints(&[2, -3]));
        assert_eq!((-&v).line_key(), QVector::from_ints(&[2, -3]));
    }

    #[test]
    fn nullspace_of_a_line() {
        let ns = nullspace(&[QVector::from_ints(&[1, -1, 0])], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(v.dot(&QVector::from_ints(&[1, -1, 0])).is_zero());
        }
    }
}
