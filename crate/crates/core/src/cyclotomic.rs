//! Exact arithmetic with integer combinations of n-th roots of unity.
//!
//! A value is stored as a length-n integer vector over the spanning set
//! 1, zeta, ..., zeta^(n-1) with zeta = e^(2 pi i / n). That spanning set is
//! not a basis, so equality and the zero test reduce modulo the n-th
//! cyclotomic polynomial, which is exact integer arithmetic throughout.
//! Additions and multiplications by roots of unity never leave the
//! representation, which is all the half-interval character sums need.

use crate::numtheory::lcm;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PolyCache = Mutex<HashMap<u64, Arc<Vec<i64>>>>;
type PowerCache = Mutex<HashMap<u64, Arc<Vec<Vec<i64>>>>>;

fn poly_cache() -> &'static PolyCache {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn power_cache() -> &'static PowerCache {
    static CACHE: OnceLock<PowerCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact quotient of the polynomial `num` by the monic polynomial `den`
/// (coefficients ascending); panics if the division is not exact.
fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    assert_eq!(*den.last().unwrap(), 1, "divisor must be monic");
    let mut rem = num.to_vec();
    let out_len = num.len() - den.len() + 1;
    let mut quot = vec![0i64; out_len];
    for i in (0..out_len).rev() {
        let c = rem[i + den.len() - 1];
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "division was not exact");
    quot
}

/// The n-th cyclotomic polynomial, coefficients ascending (memoized).
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<i64>> {
    assert!(n >= 1);
    if let Some(p) = poly_cache().lock().unwrap().get(&n) {
        return Arc::clone(p);
    }
    // x^n - 1 divided by the cyclotomic polynomials of all proper divisors
    let divisors: Vec<u64> = (1..n).filter(|e| n % e == 0).collect();
    let smaller: Vec<Arc<Vec<i64>>> = divisors.iter().map(|&e| cyclotomic_polynomial(e)).collect();
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for s in &smaller {
        poly = exact_div(&poly, s);
    }
    let arc = Arc::new(poly);
    poly_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&arc));
    arc
}

/// For k in phi(n)..n, the canonical expansion of zeta^k over the power
/// basis 1..zeta^(phi(n)-1); row k - phi(n) holds zeta^k (memoized).
fn power_reductions(n: u64) -> Arc<Vec<Vec<i64>>> {
    if let Some(t) = power_cache().lock().unwrap().get(&n) {
        return Arc::clone(t);
    }
    let phi_poly = cyclotomic_polynomial(n);
    let deg = phi_poly.len() - 1;
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n as usize - deg);
    if n as usize > deg {
        // zeta^deg = -(lower part of the cyclotomic polynomial)
        let mut cur: Vec<i64> = phi_poly[..deg].iter().map(|&c| -c).collect();
        rows.push(cur.clone());
        for _ in 1..(n as usize - deg) {
            // multiply by zeta: shift, folding the overflow term back in
            let top = cur[deg - 1];
            for j in (1..deg).rev() {
                cur[j] = cur[j - 1] - top * phi_poly[j];
            }
            cur[0] = -top * phi_poly[0];
            rows.push(cur.clone());
        }
    }
    let arc = Arc::new(rows);
    power_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&arc));
    arc
}

/// An element of Z[zeta_n], stored over the spanning set zeta^0..zeta^(n-1).
#[derive(Debug, Clone)]
pub struct CyclotomicInteger {
    order: u64,
    coeffs: Vec<i64>,
}

impl CyclotomicInteger {
    pub fn zero(order: u64) -> CyclotomicInteger {
        assert!(order >= 1);
        CyclotomicInteger {
            order,
            coeffs: vec![0; order as usize],
        }
    }

    pub fn from_integer(order: u64, value: i64) -> CyclotomicInteger {
        let mut z = CyclotomicInteger::zero(order);
        z.coeffs[0] = value;
        z
    }

    /// zeta_order^k.
    pub fn root_of_unity(order: u64, k: u64) -> CyclotomicInteger {
        let mut z = CyclotomicInteger::zero(order);
        z.coeffs[(k % order) as usize] = 1;
        z
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Add zeta^k in place.
    pub fn add_root(&mut self, k: u64) {
        self.coeffs[(k % self.order) as usize] += 1;
    }

    /// Multiply by zeta^k (a rotation of the spanning set).
    pub fn mul_root(&self, k: u64) -> CyclotomicInteger {
        let n = self.order as usize;
        let k = (k % self.order) as usize;
        let mut out = vec![0i64; n];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[(j + k) % n] = c;
        }
        CyclotomicInteger {
            order: self.order,
            coeffs: out,
        }
    }

    /// Multiply by (1 - zeta^k).
    pub fn mul_one_minus_root(&self, k: u64) -> CyclotomicInteger {
        self - &self.mul_root(k)
    }

    /// The same value re-expressed with a larger order (new = m * order),
    /// sending zeta_order^k to zeta_new^(m k).
    pub fn promoted(&self, new_order: u64) -> CyclotomicInteger {
        assert!(new_order >= 1 && new_order % self.order == 0);
        let m = (new_order / self.order) as usize;
        let mut out = vec![0i64; new_order as usize];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[j * m] = c;
        }
        CyclotomicInteger {
            order: new_order,
            coeffs: out,
        }
    }

    /// Canonical coordinates over the power basis 1..zeta^(phi(n)-1).
    pub fn reduced(&self) -> Vec<i64> {
        let deg = cyclotomic_polynomial(self.order).len() - 1;
        let mut out: Vec<i64> = self.coeffs[..deg.min(self.coeffs.len())].to_vec();
        out.resize(deg, 0);
        if self.order as usize > deg {
            let rows = power_reductions(self.order);
            for (k, &c) in self.coeffs.iter().enumerate().skip(deg) {
                if c != 0 {
                    for (j, &r) in rows[k - deg].iter().enumerate() {
                        out[j] += c * r;
                    }
                }
            }
        }
        out
    }

    /// The canonical representative (reduced coordinates, padded back to
    /// length n).
    pub fn canonical(&self) -> CyclotomicInteger {
        let mut coeffs = self.reduced();
        coeffs.resize(self.order as usize, 0);
        CyclotomicInteger {
            order: self.order,
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        if self.coeffs.iter().all(|&c| c == 0) {
            return true;
        }
        self.reduced().iter().all(|&c| c == 0)
    }

    /// `Some(v)` when the value is the rational integer `v`.
    pub fn as_integer(&self) -> Option<i64> {
        let r = self.reduced();
        if r[1..].iter().all(|&c| c == 0) {
            Some(r[0])
        } else {
            None
        }
    }
}

impl std::ops::Add for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn add(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
        let n = lcm(self.order, rhs.order);
        let mut a = self.promoted(n);
        let b = rhs.promoted(n);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += *y;
        }
        a
    }
}

impl std::ops::Sub for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn sub(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
        let n = lcm(self.order, rhs.order);
        let mut a = self.promoted(n);
        let b = rhs.promoted(n);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= *y;
        }
        a
    }
}

impl std::ops::Neg for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn neg(self) -> CyclotomicInteger {
        CyclotomicInteger {
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

/// Equality of the represented algebraic numbers, across orders.
impl PartialEq for CyclotomicInteger {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(n: u64) -> Vec<i64> {
        cyclotomic_polynomial(n).as_ref().clone()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(poly(1), vec![-1, 1]); // x - 1
        assert_eq!(poly(2), vec![1, 1]); // x + 1
        assert_eq!(poly(3), vec![1, 1, 1]);
        assert_eq!(poly(4), vec![1, 0, 1]);
        assert_eq!(poly(6), vec![1, -1, 1]);
        assert_eq!(poly(12), vec![1, 0, -1, 0, 1]); // x^4 - x^2 + 1
    }

    #[test]
    fn cyclotomic_105_has_coefficient_minus_two() {
        // the first index with a coefficient outside {-1, 0, 1}
        let p = poly(105);
        assert_eq!(p[7], -2);
    }

    #[test]
    fn full_root_sums_vanish() {
        for n in 2..=60u64 {
            let mut s = CyclotomicInteger::zero(n);
            for k in 0..n {
                s.add_root(k);
            }
            assert!(s.is_zero(), "sum of all {n}-th roots");
        }
    }

    #[test]
    fn sixth_root_satisfies_its_relation() {
        // zeta_6^2 - zeta_6 + 1 = 0
        let z = CyclotomicInteger::root_of_unity(6, 1);
        let relation = &(&z.mul_root(1) - &z) + &CyclotomicInteger::from_integer(6, 1);
        assert!(relation.is_zero());
        assert!(!z.is_zero());
    }

    #[test]
    fn as_integer_sees_through_the_representation() {
        // 1 + zeta_3 + zeta_3^2 + 5 = 5
        let mut v = CyclotomicInteger::from_integer(3, 5);
        v.add_root(0);
        v.add_root(1);
        v.add_root(2);
        assert_eq!(v.as_integer(), Some(5));
        assert_eq!(CyclotomicInteger::root_of_unity(8, 1).as_integer(), None);
        assert_eq!(CyclotomicInteger::root_of_unity(7, 0).as_integer(), Some(1));
    }

    #[test]
    fn canonical_is_equal_and_reduced() {
        let mut v = CyclotomicInteger::root_of_unity(12, 11);
        v.add_root(5);
        v.add_root(1);
        let c = v.canonical();
        assert_eq!(c, v);
        assert!(c.coeffs()[4..].iter().all(|&x| x == 0));
    }

    proptest! {
        #[test]
        fn rerepresentation_preserves_value(n in 1u64..40, m in 1u64..8, k in 0u64..40) {
            let a = CyclotomicInteger::root_of_unity(n, k % n);
            let b = CyclotomicInteger::root_of_unity(n * m, (k % n) * m);
            prop_assert!(a == b);
        }

        #[test]
        fn subtraction_of_equal_values_is_zero(n in 1u64..30,
                                               coeffs in prop::collection::vec(-5i64..5, 1..30)) {
            let mut a = CyclotomicInteger::zero(n);
            for (j, &c) in coeffs.iter().enumerate() {
                a.coeffs[j % n as usize] += c;
            }
            let b = a.canonical();
            prop_assert!(a == b);
            prop_assert!((&a - &b).is_zero());
            let shifted = a.mul_root(1).mul_root(n - 1); // full rotation
            prop_assert!(shifted == a);
        }

        #[test]
        fn one_minus_root_factor_matches_direct(n in 2u64..30, k in 0u64..30,
                                                j in 0u64..30) {
            let v = CyclotomicInteger::root_of_unity(n, j % n);
            let lhs = v.mul_one_minus_root(k % n);
            let rhs = &v - &v.mul_root(k % n);
            prop_assert!(lhs == rhs);
        }
    }
}
