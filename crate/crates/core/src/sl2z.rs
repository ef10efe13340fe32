//! Exact integer algebra in SL(2,Z): link monodromies of T_{p,q,r}
//! singularities, their classification and conjugacy.
//!
//! Conjugacy of hyperbolic elements is decided through the cyclic R/L word
//! normal form, computed from the periodic continued fraction of the
//! attracting fixed point. Parabolic and elliptic classes use their own
//! exact invariants. All arithmetic is checked; overflow is reported.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// 2×2 integer matrix `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Sl2Matrix {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

fn checked(v: Option<i64>) -> Result<i64> {
    v.ok_or(Error::Overflow("SL(2,Z) arithmetic"))
}

impl Sl2Matrix {
    pub const IDENTITY: Sl2Matrix = Sl2Matrix { a: 1, b: 0, c: 0, d: 1 };
    pub const R: Sl2Matrix = Sl2Matrix { a: 1, b: 1, c: 0, d: 1 };
    pub const L: Sl2Matrix = Sl2Matrix { a: 1, b: 0, c: 1, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::NotUnimodular { a, b, c, d });
        }
        Ok(Sl2Matrix { a, b, c, d })
    }

    pub fn from_rows(rows: [[i64; 2]; 2]) -> Result<Self> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn a(&self) -> i64 {
        self.a
    }
    pub fn b(&self) -> i64 {
        self.b
    }
    pub fn c(&self) -> i64 {
        self.c
    }
    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn determinant(&self) -> i128 {
        (self.a as i128) * (self.d as i128) - (self.b as i128) * (self.c as i128)
    }

    pub fn trace(&self) -> i128 {
        self.a as i128 + self.d as i128
    }

    pub fn mul(&self, o: &Sl2Matrix) -> Result<Sl2Matrix> {
        let e = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            checked(checked(x.checked_mul(y))?.checked_add(checked(z.checked_mul(w))?))
        };
        Ok(Sl2Matrix {
            a: e(self.a, o.a, self.b, o.c)?,
            b: e(self.a, o.b, self.b, o.d)?,
            c: e(self.c, o.a, self.d, o.c)?,
            d: e(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn inverse(&self) -> Result<Sl2Matrix> {
        Ok(Sl2Matrix {
            a: self.d,
            b: checked(self.b.checked_neg())?,
            c: checked(self.c.checked_neg())?,
            d: self.a,
        })
    }

    pub fn neg(&self) -> Result<Sl2Matrix> {
        Ok(Sl2Matrix {
            a: checked(self.a.checked_neg())?,
            b: checked(self.b.checked_neg())?,
            c: checked(self.c.checked_neg())?,
            d: checked(self.d.checked_neg())?,
        })
    }

    pub fn pow(&self, k: u32) -> Result<Sl2Matrix> {
        let mut acc = Sl2Matrix::IDENTITY;
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `P · self · P⁻¹`.
    pub fn conjugate_by(&self, p: &Sl2Matrix) -> Result<Sl2Matrix> {
        p.mul(self)?.mul(&p.inverse()?)
    }

    pub fn conjugacy_type(&self) -> ConjugacyType {
        let t = self.trace();
        let kind = if t.abs() > 2 {
            ConjugacyKind::Hyperbolic
        } else if t == 2 && *self != Sl2Matrix::IDENTITY {
            ConjugacyKind::Unipotent
        } else if t == -2 && (self.b != 0 || self.c != 0) {
            ConjugacyKind::NegativeTrace
        } else {
            ConjugacyKind::FiniteOrder
        };
        ConjugacyType { kind, trace: t as i64 }
    }
}

impl fmt::Display for Sl2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Conjugacy-relevant type of an element of SL(2,Z).
///
/// `NegativeTrace` covers the parabolic elements of trace −2 (the negatives
/// of unipotents); hyperbolic elements of trace ≤ −3 are `Hyperbolic`.
/// `FiniteOrder` covers ±I and all elements with |trace| < 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjugacyKind {
    Hyperbolic,
    Unipotent,
    FiniteOrder,
    NegativeTrace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyType {
    pub kind: ConjugacyKind,
    pub trace: i64,
}

fn factor(k: i64) -> Result<Sl2Matrix> {
    Sl2Matrix::new(checked(k.checked_sub(1))?, -1, 1, 0)
}

fn validate_triple(p: i64, q: i64, r: i64) -> Result<()> {
    if p < 2 || q < 2 || r < 2 {
        return Err(Error::InvalidTriple { p, q, r });
    }
    Ok(())
}

/// Monodromy of the T_{p,q,r} link, `F(r)·F(q)·F(p)` with `F(k) = [[k−1,−1],[1,0]]`.
pub fn monodromy_matrix(p: i64, q: i64, r: i64) -> Result<Sl2Matrix> {
    validate_triple(p, q, r)?;
    factor(r)?.mul(&factor(q)?)?.mul(&factor(p)?)
}

fn ser_ratio<S: Serializer>(v: &Ratio<i128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceIdentity {
    pub trace_computed: i64,
    #[serde(serialize_with = "ser_ratio")]
    pub trace_formula: Ratio<i128>,
    pub equal: bool,
}

fn reciprocal_sum(p: i64, q: i64, r: i64) -> Result<Ratio<i128>> {
    // pqr bounded by i64::MAX keeps every intermediate of the sum inside i128
    (p as i128)
        .checked_mul(q as i128)
        .and_then(|x| x.checked_mul(r as i128))
        .filter(|x| *x <= i64::MAX as i128)
        .ok_or(Error::Overflow("reciprocal sum"))?;
    Ok(Ratio::new(1, p as i128) + Ratio::new(1, q as i128) + Ratio::new(1, r as i128))
}

/// Compares the matrix trace of `A_{p,q,r}` with `2 + pqr(1 − 1/p − 1/q − 1/r)`
/// evaluated in exact rationals.
pub fn trace_identity_check(p: i64, q: i64, r: i64) -> Result<TraceIdentity> {
    let m = monodromy_matrix(p, q, r)?;
    let sum = reciprocal_sum(p, q, r)?;
    let pqr = Ratio::from_integer(p as i128 * q as i128 * r as i128);
    let formula = Ratio::from_integer(2) + pqr * (Ratio::from_integer(1) - sum);
    let trace = i64::try_from(m.trace()).map_err(|_| Error::Overflow("trace"))?;
    Ok(TraceIdentity {
        trace_computed: trace,
        equal: formula == Ratio::from_integer(trace as i128),
        trace_formula: formula,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    SimpleElliptic,
    Cusp,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularityClass {
    pub kind: SingularityKind,
    pub triple: (i64, i64, i64),
    #[serde(serialize_with = "ser_ratio")]
    pub reciprocal_sum: Ratio<i128>,
}

pub fn classify_singularity(p: i64, q: i64, r: i64) -> Result<SingularityClass> {
    validate_triple(p, q, r)?;
    let sum = reciprocal_sum(p, q, r)?;
    let one = Ratio::from_integer(1);
    let kind = if sum == one {
        SingularityKind::SimpleElliptic
    } else if sum < one {
        SingularityKind::Cusp
    } else {
        SingularityKind::Other
    };
    Ok(SingularityClass { kind, triple: (p, q, r), reciprocal_sum: sum })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Letter {
    R,
    L,
}

/// Cyclic word over {R, L}, stored as its lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RlWord(Vec<Letter>);

impl RlWord {
    pub fn new(mut letters: Vec<Letter>) -> Self {
        canonical_rotation(&mut letters);
        RlWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> Result<Sl2Matrix> {
        self.0.iter().try_fold(Sl2Matrix::IDENTITY, |acc, l| match l {
            Letter::R => acc.mul(&Sl2Matrix::R),
            Letter::L => acc.mul(&Sl2Matrix::L),
        })
    }

    /// True when `other` is a cyclic rotation of this word.
    pub fn is_rotation_of(&self, other: &RlWord) -> bool {
        self == other
    }
}

impl fmt::Display for RlWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::R => "R",
                Letter::L => "L",
            })?;
        }
        Ok(())
    }
}

fn canonical_rotation(w: &mut Vec<Letter>) {
    let n = w.len();
    if n == 0 {
        return;
    }
    let best = (0..n)
        .min_by(|&i, &j| {
            let a = w[i..].iter().chain(&w[..i]);
            let b = w[j..].iter().chain(&w[..j]);
            a.cmp(b)
        })
        .unwrap_or(0);
    w.rotate_left(best);
}

fn isqrt(n: i128) -> i128 {
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Continued-fraction quotients of the attracting fixed point of `m`
/// (trace ≥ 3): returns `(quotients, period_start)`.
fn fixed_point_expansion(m: &Sl2Matrix) -> Result<(Vec<i128>, usize)> {
    let t = m.trace();
    let disc = t.checked_mul(t).and_then(|x| x.checked_sub(4)).ok_or(Error::Overflow("discriminant"))?;
    let root = isqrt(disc);
    // attracting fixed point ((a - d) + sqrt(D)) / (2c); c != 0 for hyperbolic m
    let mut p = m.a as i128 - m.d as i128;
    let mut q = 2 * m.c as i128;
    let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
    let mut quotients = Vec::new();
    loop {
        if let Some(&start) = seen.get(&(p, q)) {
            return Ok((quotients, start));
        }
        seen.insert((p, q), quotients.len());
        let a = if q > 0 {
            (p + root).div_euclid(q)
        } else {
            -(p + root).div_euclid(-q) - 1
        };
        quotients.push(a);
        let np = a.checked_mul(q).and_then(|x| x.checked_sub(p)).ok_or(Error::Overflow("continued fraction"))?;
        let num = disc - np * np;
        if num % q != 0 {
            return Err(Error::Domain("continued fraction recurrence lost integrality".into()));
        }
        q = num / q;
        p = np;
    }
}

/// Cyclic R/L normal form of a hyperbolic matrix with trace ≥ 3.
///
/// Two such matrices are conjugate in SL(2,Z) iff their words agree.
pub fn rl_word(m: &Sl2Matrix) -> Result<RlWord> {
    if m.trace() < 3 {
        return Err(Error::Domain(format!("rl_word needs a hyperbolic matrix with trace >= 3, got {m}")));
    }
    let (quotients, start) = fixed_point_expansion(m)?;
    let period = quotients.len() - start;
    let at = |i: usize| quotients[start + (i - start) % period];
    // start at an even index so the accumulated continued-fraction map has det +1
    let first = if start % 2 == 0 { start } else { start + 1 };
    let len = if period % 2 == 0 { period } else { 2 * period };
    let mut base = Vec::new();
    for i in 0..len {
        let e = at(first + i);
        if e < 1 {
            return Err(Error::Domain("non-positive periodic partial quotient".into()));
        }
        let letter = if i % 2 == 0 { Letter::R } else { Letter::L };
        base.extend(std::iter::repeat(letter).take(e as usize));
    }
    let primitive = RlWord(base.clone()).product()?;
    let target = m.trace();
    let mut power = primitive;
    let mut letters = base.clone();
    while power.trace() < target {
        power = power.mul(&primitive)?;
        letters.extend_from_slice(&base);
    }
    if power.trace() != target {
        return Err(Error::Domain(format!("{m} is not a power of its primitive stabilizer element")));
    }
    Ok(RlWord::new(letters))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// For a trace-2 matrix `M ≠ I`, the unique `n ≠ 0` with `M ~ [[1,n],[0,1]]`.
pub fn unipotent_parameter(m: &Sl2Matrix) -> Result<i64> {
    if m.trace() != 2 || *m == Sl2Matrix::IDENTITY {
        return Err(Error::Domain(format!("{m} is not a non-trivial unipotent")));
    }
    // (M - I)^2 = 0, so a non-zero column of M - I spans the fixed line.
    let (x, y) = if m.b != 0 || m.d != 1 { (m.b, m.d - 1) } else { (m.a - 1, m.c) };
    let (g, _, _) = ext_gcd(x, y);
    let (x, y) = (x / g, y / g);
    let (_, s, t) = ext_gcd(x, y);
    // s*x + t*y = 1, so P = [[x, -t], [y, s]] has det 1 and first column (x, y)
    let p = Sl2Matrix::new(x, -t, y, s)?;
    let n = p.inverse()?.mul(m)?.mul(&p)?;
    Ok(n.b)
}

pub fn are_conjugate(m1: &Sl2Matrix, m2: &Sl2Matrix) -> Result<bool> {
    let (t1, t2) = (m1.conjugacy_type(), m2.conjugacy_type());
    if t1 != t2 {
        return Ok(false);
    }
    match t1.kind {
        ConjugacyKind::Hyperbolic => {
            if t1.trace > 0 {
                Ok(rl_word(m1)? == rl_word(m2)?)
            } else {
                Ok(rl_word(&m1.neg()?)? == rl_word(&m2.neg()?)?)
            }
        }
        ConjugacyKind::Unipotent => Ok(unipotent_parameter(m1)? == unipotent_parameter(m2)?),
        ConjugacyKind::NegativeTrace => {
            Ok(unipotent_parameter(&m1.neg()?)? == unipotent_parameter(&m2.neg()?)?)
        }
        ConjugacyKind::FiniteOrder => {
            if m1.b == 0 && m1.c == 0 || m2.b == 0 && m2.c == 0 {
                Ok(m1 == m2)
            } else {
                // elliptic classes: one positive- and one negative-definite form class
                Ok(m1.c.signum() == m2.c.signum())
            }
        }
    }
}

pub fn conjugate_to_inverse(m: &Sl2Matrix) -> Result<bool> {
    are_conjugate(m, &m.inverse()?)
}

/// Exhaustive search for `P` with `|entries| ≤ bound` and `P·m1·P⁻¹ = m2`.
pub fn brute_force_conjugator(m1: &Sl2Matrix, m2: &Sl2Matrix, bound: i64) -> Option<Sl2Matrix> {
    let bound = bound.max(1);
    let satisfies = |p: &Sl2Matrix| matches!((p.mul(m1), m2.mul(p)), (Ok(x), Ok(y)) if x == y);
    if satisfies(&Sl2Matrix::IDENTITY) {
        return Some(Sl2Matrix::IDENTITY);
    }
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                if x != 0 {
                    let num = 1 + y as i128 * z as i128;
                    if num % x as i128 != 0 {
                        continue;
                    }
                    let w = num / x as i128;
                    if w.abs() > bound as i128 {
                        continue;
                    }
                    if let Ok(p) = Sl2Matrix::new(x, y, z, w as i64) {
                        if satisfies(&p) {
                            return Some(p);
                        }
                    }
                } else if y as i128 * z as i128 == -1 {
                    for w in -bound..=bound {
                        if let Ok(p) = Sl2Matrix::new(x, y, z, w) {
                            if satisfies(&p) {
                                return Some(p);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologicalInvariants {
    pub mu: i64,
    pub chi_fiber: i64,
    pub chi_glued: i64,
    pub euler_number_if_nil: Option<i64>,
}

pub fn topological_invariants(p: i64, q: i64, r: i64) -> Result<TopologicalInvariants> {
    validate_triple(p, q, r)?;
    let mu = p
        .checked_add(q)
        .and_then(|s| s.checked_add(r))
        .and_then(|s| s.checked_sub(1))
        .ok_or(Error::Overflow("Milnor number"))?;
    let chi_fiber = mu + 1;
    let mut sorted = [p, q, r];
    sorted.sort_unstable();
    let euler = match sorted {
        [3, 3, 3] => Some(-3),
        [2, 4, 4] => Some(-2),
        [2, 3, 6] => Some(-1),
        _ => None,
    };
    Ok(TopologicalInvariants {
        mu,
        chi_fiber,
        chi_glued: chi_fiber.checked_mul(2).ok_or(Error::Overflow("Euler characteristic"))?,
        euler_number_if_nil: euler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> Sl2Matrix {
        Sl2Matrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn displayed_monodromies() {
        assert_eq!(monodromy_matrix(2, 3, 7).unwrap(), m(5, -11, 1, -2));
        assert_eq!(monodromy_matrix(4, 4, 4).unwrap(), m(21, -8, 8, -3));
        assert_eq!(monodromy_matrix(2, 3, 6).unwrap().trace(), 2);
    }

    #[test]
    fn trace_identity_examples() {
        let t = trace_identity_check(2, 3, 7).unwrap();
        assert_eq!((t.trace_computed, t.equal), (3, true));
        assert_eq!(t.trace_formula, Ratio::from_integer(3));
        assert_eq!(trace_identity_check(3, 3, 3).unwrap().trace_computed, 2);
        assert_eq!(trace_identity_check(4, 4, 4).unwrap().trace_computed, 18);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_singularity(3, 3, 3).unwrap().kind, SingularityKind::SimpleElliptic);
        assert_eq!(classify_singularity(2, 3, 7).unwrap().kind, SingularityKind::Cusp);
        assert_eq!(classify_singularity(2, 3, 5).unwrap().kind, SingularityKind::Other);
        assert!(matches!(classify_singularity(1, 3, 7), Err(Error::InvalidTriple { .. })));
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(Sl2Matrix::new(2, 0, 0, 1).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = i64::MAX / 2;
        assert!(matches!(monodromy_matrix(big, big, big), Err(Error::Overflow(_))));
    }

    #[test]
    fn rl_word_of_cat_map() {
        let w = rl_word(&m(2, 1, 1, 1)).unwrap();
        assert_eq!(w.to_string(), "RL");
        assert_eq!(w.product().unwrap().trace(), 3);
    }

    #[test]
    fn rl_word_matches_displayed_conjugates() {
        let a237 = monodromy_matrix(2, 3, 7).unwrap();
        assert_eq!(rl_word(&a237).unwrap(), rl_word(&m(2, 1, 1, 1)).unwrap());
        let a444 = monodromy_matrix(4, 4, 4).unwrap();
        assert_eq!(rl_word(&a444).unwrap(), rl_word(&m(13, 8, 8, 5)).unwrap());
    }

    #[test]
    fn rl_word_rejects_non_hyperbolic() {
        assert!(rl_word(&Sl2Matrix::IDENTITY).is_err());
        assert!(rl_word(&m(1, 0, 3, 1)).is_err());
        assert!(rl_word(&m(-2, -1, -1, -1)).is_err());
    }

    #[test]
    fn unipotent_representatives() {
        for (t, ell) in [((3, 3, 3), 3), ((2, 4, 4), 2), ((2, 3, 6), 1)] {
            let a = monodromy_matrix(t.0, t.1, t.2).unwrap();
            assert!(are_conjugate(&a, &m(1, 0, ell, 1)).unwrap(), "{t:?}");
            assert!(!are_conjugate(&a, &m(1, 0, ell + 1, 1)).unwrap());
        }
    }

    #[test]
    fn unipotent_not_conjugate_to_inverse() {
        let a = monodromy_matrix(3, 3, 3).unwrap();
        assert!(!conjugate_to_inverse(&a).unwrap());
        assert!(brute_force_conjugator(&a, &a.inverse().unwrap(), 20).is_none());
    }

    #[test]
    fn brute_force_examples() {
        let a = monodromy_matrix(2, 3, 7).unwrap();
        let p = brute_force_conjugator(&a, &a.inverse().unwrap(), 60).unwrap();
        assert_eq!(a.conjugate_by(&p).unwrap(), a.inverse().unwrap());
        assert_eq!(
            brute_force_conjugator(&Sl2Matrix::IDENTITY, &Sl2Matrix::IDENTITY, 1),
            Some(Sl2Matrix::IDENTITY)
        );
        assert!(brute_force_conjugator(&m(2, 1, 1, 1), &m(1, 1, 1, 2), 10).is_some());
    }

    #[test]
    fn mixed_types_are_not_conjugate() {
        assert!(!are_conjugate(&m(2, 1, 1, 1), &m(1, 0, 1, 1)).unwrap());
        assert!(are_conjugate(&m(0, -1, 1, 0), &m(0, -1, 1, 0)).unwrap());
        assert!(!are_conjugate(&m(0, -1, 1, 0), &m(0, 1, -1, 0)).unwrap());
    }

    #[test]
    fn invariants() {
        let t = topological_invariants(2, 3, 7).unwrap();
        assert_eq!((t.mu, t.chi_fiber, t.chi_glued, t.euler_number_if_nil), (11, 12, 24, None));
        let t = topological_invariants(4, 4, 4).unwrap();
        assert_eq!((t.mu, t.chi_fiber, t.chi_glued), (11, 12, 24));
        assert_eq!(topological_invariants(3, 3, 3).unwrap().euler_number_if_nil, Some(-3));
        assert_eq!(topological_invariants(4, 2, 4).unwrap().euler_number_if_nil, Some(-2));
    }
}
