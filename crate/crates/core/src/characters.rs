//! Dirichlet characters modulo d, represented by exponent vectors against
//! the cyclic components of (Z/dZ)^*, with values written as powers of a
//! fixed root of unity of order n = lambda(d).
//!
//! The central quantity is the half-interval sum c(chi) = sum of chi(a)
//! over units 0 < a < d/2, computed exactly in Z[zeta_n]. A subgroup H is
//! balanced exactly when c(chi) = 0 for every odd character trivial on H;
//! the reduction and non-vanishing rules implemented here decide that
//! without ever expanding the sum.

use crate::cyclotomic::CyclotomicInteger;
use crate::numtheory::{factorize, gcd, reduce_mod};
use crate::unitgroup::{Subgroup, UnitGroupStructure};
use crate::{Error, Result};
use std::sync::Arc;

/// A Dirichlet character mod d: component exponents (t_i) against the unit
/// group decomposition, meaning chi(g_i) = zeta_n^(t_i * n / order_i).
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    structure: Arc<UnitGroupStructure>,
    exponents: Vec<u64>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}
impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn new(structure: Arc<UnitGroupStructure>, exponents: Vec<u64>) -> Result<Self> {
        let comps = structure.components();
        if exponents.len() != comps.len() {
            return Err(Error::Internal(format!(
                "expected {} exponents, got {}",
                comps.len(),
                exponents.len()
            )));
        }
        for (t, c) in exponents.iter().zip(comps) {
            if *t >= c.order {
                return Err(Error::Internal(format!(
                    "exponent {t} out of range for component of order {}",
                    c.order
                )));
            }
        }
        Ok(DirichletCharacter {
            structure,
            exponents,
        })
    }

    /// The principal character mod d (or the modulus-1 character for d = 1).
    pub fn trivial(d: u64) -> DirichletCharacter {
        let structure = Arc::new(UnitGroupStructure::for_modulus(d));
        let exponents = vec![0; structure.components().len()];
        DirichletCharacter {
            structure,
            exponents,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.structure.modulus()
    }

    pub fn structure(&self) -> &Arc<UnitGroupStructure> {
        &self.structure
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// The common order n = lambda(d) that all values are expressed in.
    pub fn value_order(&self) -> u64 {
        self.structure.lambda().max(1)
    }

    /// The multiplicative order of the character itself.
    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(self.structure.components())
            .fold(1, |acc, (&t, c)| {
                crate::numtheory::lcm(acc, c.order / gcd(t, c.order))
            })
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&t| t == 0)
    }

    /// chi(a) as `Some(k)` meaning zeta_n^k, or `None` on non-units.
    pub fn evaluate(&self, a: i64) -> Option<u64> {
        let d = self.modulus();
        if d == 1 {
            return Some(0);
        }
        let r = reduce_mod(a, d);
        if gcd(r, d) != 1 {
            return None;
        }
        let dlog = self.structure.discrete_log(r as i64).expect("unit");
        Some(self.exponent_of(&dlog))
    }

    /// Value exponent from a precomputed dlog vector.
    pub(crate) fn exponent_of(&self, dlog: &[u64]) -> u64 {
        let n = self.value_order();
        let mut k: u128 = 0;
        for ((&t, &x), c) in self
            .exponents
            .iter()
            .zip(dlog)
            .zip(self.structure.components())
        {
            k += (t as u128 * x as u128 % n as u128) * (n / c.order) as u128;
        }
        (k % n as u128) as u64
    }

    /// chi(-1) = -1; characters mod 1 and 2 are even.
    pub fn is_odd(&self) -> bool {
        let d = self.modulus();
        if d <= 2 {
            return false;
        }
        self.evaluate(-1) == Some(self.value_order() / 2)
    }

    /// True when chi is 1 on every generator of H (hence on all of H).
    pub fn is_trivial_on(&self, h: &Subgroup) -> Result<bool> {
        if h.modulus != self.modulus() {
            return Err(Error::ModulusMismatch(h.modulus, self.modulus()));
        }
        Ok(h.generators
            .iter()
            .all(|&g| self.evaluate(g as i64) == Some(0)))
    }

    /// The conductor: the smallest divisor f of d such that chi is trivial
    /// on every unit congruent to 1 mod f. The principal character has
    /// conductor 1.
    pub fn conductor(&self) -> u64 {
        let d = self.modulus();
        for f in factorize(d).expect("d >= 1").divisors() {
            let trivial_on_kernel = (1..d)
                .filter(|&a| a % f == 1 % f && gcd(a, d) == 1)
                .all(|a| self.evaluate(a as i64) == Some(0));
            if trivial_on_kernel {
                return f;
            }
        }
        d
    }

    /// Re-express chi at a smaller modulus dm (conductor | dm | d), i.e.
    /// find the character mod dm that induces chi.
    pub(crate) fn induce_to(&self, dm: u64) -> Result<DirichletCharacter> {
        let d = self.modulus();
        if dm == d {
            return Ok(self.clone());
        }
        if d % dm != 0 {
            return Err(Error::Internal(format!("{dm} does not divide {d}")));
        }
        if dm == 1 {
            return Ok(DirichletCharacter::trivial(1));
        }
        let target = Arc::new(UnitGroupStructure::for_modulus(dm));
        // the part of d made of primes not dividing dm
        let mut s = 1u64;
        for &(p, e) in &self.structure.factorization().factors {
            if dm % p != 0 {
                s *= p.pow(e);
            }
        }
        let n = self.value_order();
        let nm = target.lambda().max(1);
        let mut exponents = Vec::with_capacity(target.components().len());
        for c in target.components() {
            // lift the component generator to a unit mod d: congruent to the
            // generator in its own prime power, 1 everywhere else
            let lift = crt_pair(c.generator, c.prime_power, 1, (dm / c.prime_power) * s);
            let k = self
                .evaluate(lift as i64)
                .ok_or_else(|| Error::Internal(format!("lift {lift} not a unit mod {d}")))?;
            // rescale zeta_n^k into zeta_nm, then into the component
            let knm = k as u128 * nm as u128;
            if knm % n as u128 != 0 {
                return Err(Error::Internal(format!(
                    "character does not descend to modulus {dm}"
                )));
            }
            let km = (knm / n as u128) as u64;
            let tm = km as u128 * c.order as u128;
            if tm % nm as u128 != 0 {
                return Err(Error::Internal(format!(
                    "character value of order not dividing {} at modulus {dm}",
                    c.order
                )));
            }
            exponents.push(((tm / nm as u128) as u64) % c.order);
        }
        DirichletCharacter::new(target, exponents)
    }

    /// The primitive character (at the conductor) inducing chi.
    pub fn primitive_inducing(&self) -> Result<DirichletCharacter> {
        self.induce_to(self.conductor())
    }
}

/// x with x = a mod m, x = b mod n for coprime m, n (0 <= x < m n).
fn crt_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    if m == 1 {
        return b % n.max(1);
    }
    if n == 1 {
        return a % m;
    }
    let inv = crate::numtheory::invmod(m % n, n).expect("coprime moduli");
    let diff = (b + n - a % n) % n;
    a + m * crate::numtheory::mulmod(diff, inv, n)
}

/// Every character mod d (d > 2), the principal character first, ordered by
/// odometer over the component exponents (rightmost fastest).
pub fn all_characters(d: u64) -> Result<Vec<DirichletCharacter>> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    let structure = Arc::new(UnitGroupStructure::for_modulus(d));
    let orders: Vec<u64> = structure.components().iter().map(|c| c.order).collect();
    let total = structure.phi();
    let mut out = Vec::with_capacity(total as usize);
    let mut exps = vec![0u64; orders.len()];
    loop {
        out.push(DirichletCharacter {
            structure: Arc::clone(&structure),
            exponents: exps.clone(),
        });
        // odometer increment
        let mut i = orders.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// The half-interval sum c(chi) = sum of chi(a) over units 0 < a < d/2,
/// exact in Z[zeta_n], returned in canonical reduced form.
pub fn c_chi(chi: &DirichletCharacter) -> CyclotomicInteger {
    let d = chi.modulus();
    let n = chi.value_order();
    let mut acc = CyclotomicInteger::zero(n);
    for a in 1..=(d.saturating_sub(1)) / 2 {
        if gcd(a, d) == 1 {
            if let Some(k) = chi.evaluate(a as i64) {
                acc.add_root(k);
            }
        }
    }
    acc.canonical()
}

/// The same sum evaluated by stripping primes off the modulus down to the
/// conductor: each step to d' = d/l multiplies by -chi'(2) (l = 2) or by
/// (1 - chi'(l)) (l odd), where a factor chi'(l) with l | d' is read as 0.
/// The primitive base case is then summed directly. Equals [`c_chi`] on
/// every character; the principal character is summed directly since the
/// stripping rules assume a non-principal one.
pub fn c_chi_via_reduction(chi: &DirichletCharacter) -> CyclotomicInteger {
    if chi.is_principal() {
        return c_chi(chi);
    }
    let cond = chi.conductor();
    let n_top = chi.value_order();
    // walk down to the conductor, recording each stripped prime
    let mut steps: Vec<(u64, DirichletCharacter)> = Vec::new(); // (l, character mod m/l)
    let mut current = chi.clone();
    while current.modulus() > cond {
        let m = current.modulus();
        let l = current
            .structure
            .factorization()
            .primes()
            .find(|&l| (m / l) % cond == 0)
            .expect("a strippable prime exists above the conductor");
        let below = current.induce_to(m / l).expect("conductor divides m/l");
        steps.push((l, below.clone()));
        current = below;
    }
    // sum the primitive base case, then fold the factors back on
    let mut acc = c_chi(&current);
    for (l, chi_below) in steps.iter().rev() {
        let n_below = chi_below.value_order();
        acc = acc.promoted(n_below);
        match (l, chi_below.evaluate(*l as i64)) {
            (2, None) => return CyclotomicInteger::zero(n_top), // complete sum: vanishes
            (2, Some(k)) => acc = -&acc.mul_root(k),
            (_, None) => {}                                     // factor (1 - 0) = 1
            (_, Some(k)) => acc = acc.mul_one_minus_root(k),
        }
    }
    acc.promoted(n_top).canonical()
}

/// Whether c(chi) is nonzero, for odd chi, decided without cyclotomic
/// arithmetic: with chi induced by the primitive chi' of conductor d',
/// c(chi) != 0 exactly when (i) 4 does not divide d or d/d' is odd, and
/// (ii) chi'(l) != 1 for every odd prime l dividing d but not d'.
pub fn c_chi_nonvanishing(chi: &DirichletCharacter) -> Result<bool> {
    if !chi.is_odd() {
        return Err(Error::EvenCharacter);
    }
    let d = chi.modulus();
    let cond = chi.conductor();
    if d % 4 == 0 && (d / cond) % 2 == 0 {
        return Ok(false);
    }
    let primitive = chi.primitive_inducing()?;
    for l in chi.structure.factorization().primes() {
        if l != 2 && cond % l != 0 && primitive.evaluate(l as i64) == Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The character mod d with the given values pinned on generators of
    /// its components, found by scanning all characters.
    fn character_where(d: u64, pred: impl Fn(&DirichletCharacter) -> bool) -> DirichletCharacter {
        all_characters(d)
            .unwrap()
            .into_iter()
            .find(|chi| pred(chi))
            .expect("no character matches")
    }

    #[test]
    fn character_counts_and_principal_first() {
        let chars = all_characters(24).unwrap();
        assert_eq!(chars.len(), 8);
        assert!(chars[0].is_principal());
        assert!(chars.iter().all(|c| c.order() <= 2)); // lambda(24) = 2
        assert_eq!(all_characters(5).unwrap().len(), 4);
        assert!(all_characters(2).is_err());
    }

    #[test]
    fn odd_characters_mod_5() {
        // the two order-4 characters are odd, the principal and quadratic even
        let odd: Vec<u64> = all_characters(5)
            .unwrap()
            .iter()
            .filter(|c| c.is_odd())
            .map(|c| c.order())
            .collect();
        assert_eq!(odd, vec![4, 4]);
    }

    #[test]
    fn evaluate_known_character_mod_8() {
        // chi(3) = 1, chi(5) = -1 forces exponents (1, 1) on (-1, 5)
        let chi = character_where(8, |c| {
            c.evaluate(3) == Some(0) && c.evaluate(5) == Some(1)
        });
        assert_eq!(chi.exponents(), &[1, 1]);
        assert!(chi.is_odd()); // chi(-1) = chi(7) = -1
        assert_eq!(chi.evaluate(4), None);
        assert_eq!(c_chi(&chi).as_integer(), Some(2)); // chi(1) + chi(3) = 2
    }

    #[test]
    fn principal_character_sums_to_half_phi() {
        for d in [3u64, 8, 12, 30, 45] {
            let chi = DirichletCharacter::trivial(d);
            let phi = crate::numtheory::euler_phi(d).unwrap();
            assert_eq!(c_chi(&chi).as_integer(), Some(phi as i64 / 2), "d={d}");
            assert_eq!(c_chi_via_reduction(&chi), c_chi(&chi));
        }
    }

    #[test]
    fn conductor_examples() {
        assert_eq!(DirichletCharacter::trivial(12).conductor(), 1);
        // lift of the quadratic character mod 3 to modulus 12
        let chi = character_where(12, |c| {
            !c.is_principal() && c.evaluate(5) == Some(c.value_order() / 2) && c.evaluate(7) == Some(0)
        });
        // chi(5) = chi(2 mod 3) = -1, chi(7) = chi(1 mod 3) = 1
        assert_eq!(chi.conductor(), 3);
        // a primitive odd character mod 5
        let odd5 = character_where(5, |c| c.is_odd());
        assert_eq!(odd5.conductor(), 5);
    }

    #[test]
    fn primitive_inducing_matches_on_units() {
        for d in [12u64, 24, 45, 60] {
            for chi in all_characters(d).unwrap() {
                let prim = chi.primitive_inducing().unwrap();
                assert_eq!(prim.modulus(), chi.conductor());
                assert_eq!(prim.conductor(), prim.modulus()); // primitive
                let n = chi.value_order();
                let np = prim.value_order();
                for a in 1..d {
                    if gcd(a, d) != 1 {
                        continue;
                    }
                    let k = chi.evaluate(a as i64).unwrap();
                    let kp = prim.evaluate(a as i64).unwrap();
                    // zeta_n^k == zeta_np^kp
                    assert_eq!(k * np, kp * n, "d={d} a={a}");
                }
            }
        }
    }

    #[test]
    fn reduction_strips_a_factor_of_two() {
        // quadratic character mod 3 lifted to modulus 6:
        // c = -chi'(2) c(chi') = -(-1)(1) = 1, and directly chi(1) = 1
        let chi6 = character_where(6, |c| !c.is_principal());
        assert_eq!(chi6.conductor(), 3);
        assert_eq!(c_chi(&chi6).as_integer(), Some(1));
        assert_eq!(c_chi_via_reduction(&chi6).as_integer(), Some(1));

        // lifted further to modulus 12 the first strip hits an even quotient
        // (2 | 6), a complete sum: c = 0 even though c != 0 at modulus 6
        let chi12 = character_where(12, |c| {
            !c.is_principal() && c.evaluate(7) == Some(0)
        });
        assert_eq!(chi12.conductor(), 3);
        assert!(c_chi(&chi12).is_zero());
        assert!(c_chi_via_reduction(&chi12).is_zero());
    }

    #[test]
    fn reduction_kills_a_sum_through_a_trivial_factor() {
        // the quadratic character mod 11 has chi'(5) = 1 (5 = 2^4, exponent
        // even), so lifting to modulus 55 multiplies by (1 - chi'(5)) = 0
        let chi11 = character_where(11, |c| c.order() == 2);
        assert_eq!(chi11.evaluate(5), Some(0));
        assert!(chi11.is_odd());
        assert!(!c_chi(&chi11).is_zero());
        let chi55 = character_where(55, |c| {
            c.conductor() == 11 && c.order() == 2
        });
        assert!(c_chi(&chi55).is_zero());
        assert!(c_chi_via_reduction(&chi55).is_zero());
        // and the non-vanishing rule agrees: condition (ii) fails
        assert!(chi55.is_odd());
        assert!(!c_chi_nonvanishing(&chi55).unwrap());
    }

    #[test]
    fn reduction_agrees_with_direct_sum_everywhere_small() {
        for d in 3..=60u64 {
            for chi in all_characters(d).unwrap() {
                assert_eq!(c_chi_via_reduction(&chi), c_chi(&chi), "d={d}");
            }
        }
    }

    #[test]
    fn even_nonprincipal_sums_vanish_small() {
        for d in 3..=60u64 {
            for chi in all_characters(d).unwrap() {
                if !chi.is_odd() && !chi.is_principal() {
                    assert!(c_chi(&chi).is_zero(), "d={d}");
                }
            }
        }
    }

    #[test]
    fn nonvanishing_rule_matches_exact_test_small() {
        for d in 3..=60u64 {
            for chi in all_characters(d).unwrap() {
                if chi.is_odd() {
                    assert_eq!(
                        c_chi_nonvanishing(&chi).unwrap(),
                        !c_chi(&chi).is_zero(),
                        "d={d}"
                    );
                }
            }
        }
        let even = DirichletCharacter::trivial(8);
        assert_eq!(c_chi_nonvanishing(&even), Err(Error::EvenCharacter));
    }

    #[test]
    fn character_orthogonality() {
        for d in 3..=60u64 {
            let chars = all_characters(d).unwrap();
            for a in 1..d {
                if gcd(a, d) != 1 {
                    continue;
                }
                let n = chars[0].value_order();
                let mut acc = CyclotomicInteger::zero(n);
                for chi in &chars {
                    acc.add_root(chi.evaluate(a as i64).unwrap());
                }
                if a == 1 {
                    assert_eq!(acc.as_integer(), Some(chars.len() as i64));
                } else {
                    assert!(acc.is_zero(), "d={d} a={a}");
                }
            }
        }
    }
}
