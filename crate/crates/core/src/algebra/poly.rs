//! Exact multivariate polynomials over the rationals in the fixed ordered
//! variable tuple `(a, s, k, p)`.
//!
//! Terms live in a map from exponent 4-tuples to `BigRational` coefficients,
//! ordered graded-lexicographically; zero coefficients are never stored, so
//! two polynomials are equal exactly when their canonical forms coincide.
//! The feature set is deliberately small — ring arithmetic, integer powers,
//! substitution, exact evaluation, display — which is all that
//! expand-and-compare identity checking needs.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Names of the fixed variable tuple, in storage order.
pub const VAR_NAMES: [&str; 4] = ["a", "s", "k", "p"];

/// Exponent 4-tuple with graded-lexicographic ordering.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Monomial(pub [u32; 4]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact polynomial in `(a, s, k, p)` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = MultiPoly::default();
        p.insert(Monomial([0; 4]), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    /// The rational constant n/d.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// The variable with the given index in [`VAR_NAMES`] order.
    pub fn var(idx: usize) -> Self {
        assert!(idx < 4, "variable index out of range");
        let mut e = [0u32; 4];
        e[idx] = 1;
        let mut p = MultiPoly::default();
        p.insert(Monomial(e), BigRational::one());
        p
    }

    pub fn a() -> Self {
        Self::var(0)
    }
    pub fn s() -> Self {
        Self::var(1)
    }
    pub fn k() -> Self {
        Self::var(2)
    }
    pub fn p() -> Self {
        Self::var(3)
    }

    fn insert(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = MultiPoly::default();
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.terms.insert(*m, v * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = MultiPoly::int(1);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Replace one variable by an arbitrary polynomial (or constant).
    pub fn substitute(&self, idx: usize, value: &MultiPoly) -> Self {
        assert!(idx < 4, "variable index out of range");
        let max_e = self
            .terms
            .keys()
            .map(|m| m.0[idx])
            .max()
            .unwrap_or(0) as usize;
        // Precompute value^0..value^max_e.
        let mut powers = Vec::with_capacity(max_e + 1);
        powers.push(MultiPoly::int(1));
        for e in 1..=max_e {
            powers.push(&powers[e - 1] * value);
        }
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut rest = *m;
            let e = rest.0[idx] as usize;
            rest.0[idx] = 0;
            let mut base = MultiPoly::default();
            base.insert(rest, c.clone());
            out = &out + &(&base * &powers[e]);
        }
        out
    }

    /// Exact evaluation at a rational point `(a, s, k, p)`.
    pub fn eval(&self, point: &[BigRational; 4]) -> BigRational {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    term *= &point[i];
                }
            }
            total += term;
        }
        total
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$method(&rhs)
            }
        }
    };
}

impl std::ops::Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, c.clone());
        }
        out
    }
}
forward_binop!(Add, add);

impl std::ops::Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, -c.clone());
        }
        out
    }
}
forward_binop!(Sub, sub);

impl std::ops::Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut e = [0u32; 4];
                for i in 0..4 {
                    e[i] = ma.0[i] + mb.0[i];
                }
                out.insert(Monomial(e), ca * cb);
            }
        }
        out
    }
}
forward_binop!(Mul, mul);

impl std::ops::Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-BigRational::one())
    }
}

impl std::ops::Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Descending graded-lex: leading term first.
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            let unit_coeff = abs.is_one() && m.degree() > 0;
            if !unit_coeff {
                write!(f, "{abs}")?;
            }
            let mut wrote_var = false;
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !unit_coeff || wrote_var {
                    write!(f, "·")?;
                }
                wrote_var = true;
                write!(f, "{}", VAR_NAMES[j])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
            let _ = wrote_var;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(vals: [i64; 4]) -> [BigRational; 4] {
        vals.map(|v| BigRational::from_integer(BigInt::from(v)))
    }

    #[test]
    fn square_of_a_binomial() {
        let sum = MultiPoly::a() + MultiPoly::s();
        let sq = sum.pow(2);
        let want = MultiPoly::a().pow(2)
            + MultiPoly::int(2) * MultiPoly::a() * MultiPoly::s()
            + MultiPoly::s().pow(2);
        assert_eq!(sq, want);
        assert_eq!(sq.num_terms(), 3);
    }

    #[test]
    fn self_difference_is_canonical_zero() {
        let p = (MultiPoly::a() + MultiPoly::k().pow(3)) * (MultiPoly::p() - MultiPoly::int(2));
        let z = &p - &p;
        assert!(z.is_zero());
        assert_eq!(z, MultiPoly::zero());
    }

    #[test]
    fn substitute_constant_and_polynomial() {
        // (p − 2)·a with p := 4 becomes 2a.
        let expr = (MultiPoly::p() - MultiPoly::int(2)) * MultiPoly::a();
        let got = expr.substitute(3, &MultiPoly::int(4));
        assert_eq!(got, MultiPoly::int(2) * MultiPoly::a());
        // a := s + 1 in a² gives s² + 2s + 1.
        let sq = MultiPoly::a().pow(2);
        let got = sq.substitute(0, &(MultiPoly::s() + MultiPoly::int(1)));
        let want = MultiPoly::s().pow(2) + MultiPoly::int(2) * MultiPoly::s() + MultiPoly::int(1);
        assert_eq!(got, want);
    }

    #[test]
    fn graded_lex_orders_by_degree_first() {
        let m1 = Monomial([0, 0, 3, 0]); // degree 3
        let m2 = Monomial([1, 1, 0, 0]); // degree 2
        assert!(m2 < m1);
        let m3 = Monomial([1, 0, 1, 0]);
        let m4 = Monomial([0, 2, 0, 0]);
        // Equal degree: lexicographic on the tuple, a before s.
        assert!(m4 < m3);
    }

    #[test]
    fn display_is_readable() {
        let p = MultiPoly::a().pow(2) - MultiPoly::int(3) * MultiPoly::s() * MultiPoly::k();
        let s = format!("{p}");
        assert!(s == "a^2 - 3·s·k" || s == "-3·s·k + a^2", "got {s}");
        assert_eq!(format!("{}", MultiPoly::zero()), "0");
    }

    // Small random polynomials for the ring-axiom properties.
    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        proptest::collection::vec(
            (
                proptest::array::uniform4(0u32..3),
                -9i64..10,
            ),
            0..6,
        )
        .prop_map(|terms| {
            let mut p = MultiPoly::zero();
            for (e, c) in terms {
                let mut t = MultiPoly::default();
                t.insert(Monomial(e), BigRational::from_integer(BigInt::from(c)));
                p = p + t;
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(x in arb_poly(), y in arb_poly(), z in arb_poly()) {
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&x - &x, MultiPoly::zero());
        }

        #[test]
        fn evaluation_is_a_ring_morphism(x in arb_poly(), y in arb_poly()) {
            let pt = point([2, -3, 5, 7]);
            prop_assert_eq!((&x + &y).eval(&pt), x.eval(&pt) + y.eval(&pt));
            prop_assert_eq!((&x * &y).eval(&pt), x.eval(&pt) * y.eval(&pt));
        }

        #[test]
        fn substitution_commutes_with_evaluation(x in arb_poly(), v in -4i64..5) {
            // Substituting k := v then evaluating equals evaluating with k = v.
            let substituted = x.substitute(2, &MultiPoly::int(v));
            let pt = point([3, -2, v, 5]);
            prop_assert_eq!(substituted.eval(&pt), x.eval(&pt));
        }
    }
}
