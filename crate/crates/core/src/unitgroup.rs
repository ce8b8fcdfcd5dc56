//! Structure of the unit group (Z/dZ)^*: cyclic components, discrete
//! logarithms, subgroups and cosets.
//!
//! The group is decomposed by CRT into cyclic factors: one factor per odd
//! prime power (generated by the smallest primitive root), a single factor
//! of order 2 for 2^2, and the pair <-1> x <5> for 2^e with e >= 3. The
//! factor d = 2 contributes nothing and is dropped.

use crate::numtheory::{gcd, invmod, mulmod, powmod, reduce_mod, Factorization, Factorizer};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

/// One cyclic factor of (Z/dZ)^*. The generator is a residue modulo
/// `prime_power`, and `order` is its exact multiplicative order there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub prime: u64,
    pub prime_power: u64,
    pub generator: u64,
    pub order: u64,
}

/// The full cyclic decomposition of (Z/dZ)^*, ordered with the 2-part first
/// (as <-1> then <5> when both are present) and odd primes ascending.
#[derive(Debug)]
pub struct UnitGroupStructure {
    modulus: u64,
    factorization: Factorization,
    components: Vec<Component>,
    phi: u64,
    lambda: u64,
    /// v_2(d); the first one or two components belong to the 2-part iff
    /// this is >= 2.
    two_exp: u32,
    /// Lazily built lookup tables (generator power -> exponent) for every
    /// component except the sign component of the 2-part.
    tables: OnceLock<Vec<Option<HashMap<u64, u64>>>>,
}

impl PartialEq for UnitGroupStructure {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}
impl Eq for UnitGroupStructure {}

/// Smallest primitive root modulo the odd prime power `pp = p^e`.
fn smallest_primitive_root(p: u64, pp: u64, fac: &Factorizer) -> u64 {
    let phi = pp / p * (p - 1);
    let mut check_primes: Vec<u64> = fac.factorize(p - 1).primes().collect();
    if pp > p {
        check_primes.push(p);
    }
    'cand: for g in 2.. {
        if g % p == 0 {
            continue;
        }
        for &q in &check_primes {
            if powmod(g, phi / q, pp) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!()
}

impl UnitGroupStructure {
    /// Build the decomposition for any modulus >= 1 (1 and 2 yield the
    /// trivial group); the public entry point [`unit_group`] insists on
    /// d > 2 as the rest of the crate does.
    pub(crate) fn with_factorizer(d: u64, fac: &Factorizer) -> UnitGroupStructure {
        assert!(d >= 1);
        let factorization = fac.factorize(d);
        let mut components = Vec::new();
        let mut two_exp = 0u32;
        for &(p, e) in &factorization.factors {
            if p == 2 {
                two_exp = e;
                let pp = 1u64 << e;
                match e {
                    1 => {}
                    2 => components.push(Component {
                        prime: 2,
                        prime_power: 4,
                        generator: 3,
                        order: 2,
                    }),
                    _ => {
                        components.push(Component {
                            prime: 2,
                            prime_power: pp,
                            generator: pp - 1,
                            order: 2,
                        });
                        components.push(Component {
                            prime: 2,
                            prime_power: pp,
                            generator: 5,
                            order: pp / 4,
                        });
                    }
                }
            } else {
                let pp = p.pow(e);
                components.push(Component {
                    prime: p,
                    prime_power: pp,
                    generator: smallest_primitive_root(p, pp, fac),
                    order: pp / p * (p - 1),
                });
            }
        }
        let phi = factorization.phi();
        let lambda = factorization.lambda();
        UnitGroupStructure {
            modulus: d,
            factorization,
            components,
            phi,
            lambda,
            two_exp,
            tables: OnceLock::new(),
        }
    }

    pub(crate) fn for_modulus(d: u64) -> UnitGroupStructure {
        Self::with_factorizer(d, &Factorizer::Plain)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn components(&self) -> &[Component] {
        &self.components
    }
    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }
    pub fn phi(&self) -> u64 {
        self.phi
    }
    /// The exponent of the group, i.e. Carmichael's lambda(d).
    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// True when component `idx` is the sign factor <-1> of a 2-part with
    /// modulus divisible by 8 (or the single factor of 2^2).
    fn is_sign_component(&self, idx: usize) -> bool {
        self.two_exp >= 2 && idx == 0
    }

    /// True when component `idx` is the <5> factor of a 2-part with modulus
    /// divisible by 8.
    fn is_five_component(&self, idx: usize) -> bool {
        self.two_exp >= 3 && idx == 1
    }

    fn tables(&self) -> &Vec<Option<HashMap<u64, u64>>> {
        self.tables.get_or_init(|| {
            self.components
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    if self.is_sign_component(idx) {
                        None
                    } else {
                        let mut map = HashMap::with_capacity(c.order as usize);
                        let mut x = 1u64;
                        for k in 0..c.order {
                            map.insert(x, k);
                            x = mulmod(x, c.generator, c.prime_power);
                        }
                        Some(map)
                    }
                })
                .collect()
        })
    }

    /// For a unit `a`, the residue the component sees: `a mod 2^e` with the
    /// sign stripped for the <5> factor, `a mod p^e` otherwise.
    fn component_residue(&self, idx: usize, a: u64) -> u64 {
        let c = &self.components[idx];
        let r = a % c.prime_power;
        if self.is_five_component(idx) && r % 4 == 3 {
            c.prime_power - r
        } else {
            r
        }
    }

    /// Exponent vector of the unit `a` against the component generators,
    /// via the precomputed lookup tables.
    pub fn discrete_log(&self, a: i64) -> Result<Vec<u64>> {
        let r = reduce_mod(a, self.modulus);
        if self.modulus > 1 && gcd(r, self.modulus) != 1 {
            return Err(Error::NotAUnit {
                a,
                modulus: self.modulus,
            });
        }
        let tables = self.tables();
        let mut exps = Vec::with_capacity(self.components.len());
        for idx in 0..self.components.len() {
            if self.is_sign_component(idx) {
                let m = self.components[idx].prime_power;
                exps.push(u64::from(r % m % 4 == 3));
            } else {
                let res = self.component_residue(idx, r);
                let exp = tables[idx].as_ref().expect("table built")[&res];
                exps.push(exp);
            }
        }
        Ok(exps)
    }

    /// Same exponent vector as [`discrete_log`](Self::discrete_log), but via
    /// Pohlig-Hellman per component so no lookup table is materialized;
    /// this is what full-interval scans use.
    pub(crate) fn discrete_log_untabled(&self, a: u64, fac: &Factorizer) -> Result<Vec<u64>> {
        let r = a % self.modulus.max(1);
        if self.modulus > 1 && gcd(r, self.modulus) != 1 {
            return Err(Error::NotAUnit {
                a: a as i64,
                modulus: self.modulus,
            });
        }
        let mut exps = Vec::with_capacity(self.components.len());
        for (idx, c) in self.components.iter().enumerate() {
            if self.is_sign_component(idx) {
                exps.push(u64::from(r % c.prime_power % 4 == 3));
            } else {
                let res = self.component_residue(idx, r);
                let order_fac = fac.factorize(c.order);
                let x = cyclic_dlog(c.generator, res, c.prime_power, &order_fac)
                    .ok_or_else(|| Error::Internal(format!("dlog of {res} mod {}", c.prime_power)))?;
                exps.push(x);
            }
        }
        Ok(exps)
    }

    /// Discrete log of `a` within the single component `idx` (with `a`
    /// interpreted modulo its prime power); `None` when `a` is not a unit
    /// there. Lets callers evaluate components at integers that are units
    /// locally but not modulo d, such as a prime dividing another factor.
    pub(crate) fn component_dlog_untabled(
        &self,
        idx: usize,
        a: u64,
        fac: &Factorizer,
    ) -> Option<u64> {
        let c = &self.components[idx];
        let r = a % c.prime_power;
        if gcd(r, c.prime_power) != 1 {
            return None;
        }
        if self.is_sign_component(idx) {
            return Some(u64::from(r % 4 == 3));
        }
        let res = self.component_residue(idx, r);
        let order_fac = fac.factorize(c.order);
        cyclic_dlog(c.generator, res, c.prime_power, &order_fac)
    }

    /// Inverse of [`discrete_log`](Self::discrete_log): CRT-combine the
    /// component values of the exponent vector back into a unit.
    pub fn exponent_to_residue(&self, exps: &[u64]) -> u64 {
        assert_eq!(exps.len(), self.components.len());
        // residues per distinct prime power
        let mut parts: Vec<(u64, u64)> = Vec::new();
        let mut idx = 0;
        while idx < self.components.len() {
            let c = &self.components[idx];
            if self.is_sign_component(idx) && self.is_five_component(idx + 1) {
                let pp = c.prime_power;
                let five = powmod(5, exps[idx + 1] % self.components[idx + 1].order, pp);
                let r = if exps[idx] % 2 == 1 { pp - five } else { five };
                parts.push((r, pp));
                idx += 2;
            } else {
                let r = powmod(c.generator, exps[idx] % c.order, c.prime_power);
                parts.push((r, c.prime_power));
                idx += 1;
            }
        }
        // the factor 2 of a d = 2 mod 4 modulus carries no component, but a
        // unit must still be odd
        if self.two_exp == 1 {
            parts.push((1, 2));
        }
        let mut x = 0u64;
        let mut m = 1u64;
        for (r, pp) in parts {
            // x' = x mod m, x' = r mod pp
            let inv = invmod(m % pp, pp).expect("prime powers are coprime");
            let diff = (r + pp - x % pp) % pp;
            x += m * mulmod(diff, inv, pp);
            m *= pp;
        }
        if self.modulus <= 2 {
            0 % self.modulus.max(1)
        } else {
            x % self.modulus
        }
    }
}

/// Decomposition of (Z/dZ)^* for d > 2.
pub fn unit_group(d: u64) -> Result<UnitGroupStructure> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    Ok(UnitGroupStructure::for_modulus(d))
}

// ---- Pohlig-Hellman --------------------------------------------------------

/// Discrete log of `a` in the cyclic group `<g>` of order `order_fac.value`
/// inside (Z/modulus)^*; `None` when `a` is outside the subgroup.
pub(crate) fn cyclic_dlog(g: u64, a: u64, modulus: u64, order_fac: &Factorization) -> Option<u64> {
    let order = order_fac.value;
    if modulus == 1 || order == 1 {
        return if a % modulus.max(1) == 1 % modulus.max(1) {
            Some(0)
        } else {
            None
        };
    }
    let mut residue = 0u64; // x mod m so far
    let mut m_done = 1u64;
    for &(q, e) in &order_fac.factors {
        let qe = q.pow(e);
        let cof = order / qe;
        let gq = powmod(g, cof, modulus);
        let aq = powmod(a, cof, modulus);
        let x_q = prime_power_dlog(gq, aq, q, e, modulus)?;
        // CRT into the accumulator
        let inv = invmod(m_done % qe, qe).expect("coprime moduli");
        let diff = (x_q + qe - residue % qe) % qe;
        residue += m_done * mulmod(diff, inv, qe);
        m_done *= qe;
    }
    Some(residue)
}

/// Digit-by-digit dlog in a cyclic group of order q^e.
fn prime_power_dlog(g: u64, a: u64, q: u64, e: u32, modulus: u64) -> Option<u64> {
    let qe = q.pow(e);
    let gamma = powmod(g, qe / q, modulus); // order q
    let g_inv = invmod(g, modulus)?;
    let mut x = 0u64;
    for i in 0..e {
        let shift = powmod(g_inv, x, modulus);
        let h = powmod(mulmod(a, shift, modulus), qe / q.pow(i + 1), modulus);
        let digit = prime_dlog(gamma, h, q, modulus)?;
        x += digit * q.pow(i);
    }
    Some(x)
}

/// dlog in a group of prime order q: linear scan for small q, baby-step
/// giant-step above that.
fn prime_dlog(gamma: u64, h: u64, q: u64, modulus: u64) -> Option<u64> {
    if q < 64 {
        let mut x = 1u64;
        for j in 0..q {
            if x == h {
                return Some(j);
            }
            x = mulmod(x, gamma, modulus);
        }
        return None;
    }
    let m = (q as f64).sqrt().ceil() as u64;
    let mut baby = HashMap::with_capacity(m as usize);
    let mut x = 1u64;
    for j in 0..m {
        baby.entry(x).or_insert(j);
        x = mulmod(x, gamma, modulus);
    }
    // x is now gamma^m; step by its inverse
    let giant = invmod(x, modulus)?;
    let mut cur = h;
    for i in 0..=m {
        if let Some(&j) = baby.get(&cur) {
            return Some((i * m + j) % q);
        }
        cur = mulmod(cur, giant, modulus);
    }
    None
}

// ---- subgroups -------------------------------------------------------------

/// A subgroup of (Z/dZ)^*, stored as its sorted element set together with
/// the generating set it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub elements: Vec<u64>,
}

impl Subgroup {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&(x % self.modulus)).is_ok()
    }

    /// True when every element of `self` lies in `other`.
    pub fn subset_of(&self, other: &Subgroup) -> bool {
        self.modulus == other.modulus && self.elements.iter().all(|&x| other.contains(x))
    }
}

fn check_unit(a: i64, d: u64) -> Result<u64> {
    let r = reduce_mod(a, d);
    if gcd(r, d) != 1 {
        return Err(Error::NotAUnit { a, modulus: d });
    }
    Ok(r)
}

/// The cyclic subgroup generated by `g` (reduced mod d) in (Z/dZ)^*.
pub fn cyclic_subgroup(d: u64, g: i64) -> Result<Subgroup> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    let r = check_unit(g, d)?;
    let mut elements = vec![1u64];
    let mut x = r;
    while x != 1 {
        elements.push(x);
        x = mulmod(x, r, d);
    }
    elements.sort_unstable();
    Ok(Subgroup {
        modulus: d,
        generators: vec![r],
        elements,
    })
}

/// The subgroup generated by a set of units (closure under multiplication).
pub fn subgroup_generated(d: u64, gens: &[i64]) -> Result<Subgroup> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    let mut reduced = Vec::with_capacity(gens.len());
    for &g in gens {
        let r = check_unit(g, d)?;
        if !reduced.contains(&r) {
            reduced.push(r);
        }
    }
    let mut seen: HashSet<u64> = HashSet::new();
    seen.insert(1);
    let mut queue: VecDeque<u64> = VecDeque::new();
    queue.push_back(1);
    while let Some(x) = queue.pop_front() {
        for &g in &reduced {
            let y = mulmod(x, g, d);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    let mut elements: Vec<u64> = seen.into_iter().collect();
    elements.sort_unstable();
    Ok(Subgroup {
        modulus: d,
        generators: reduced,
        elements,
    })
}

/// The cosets of H in (Z/dZ)^*, each sorted, ordered by least representative.
pub fn cosets(d: u64, h: &Subgroup) -> Result<Vec<Vec<u64>>> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    if h.modulus != d {
        return Err(Error::ModulusMismatch(h.modulus, d));
    }
    let mut covered: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    for u in 1..d {
        if gcd(u, d) != 1 || covered.contains(&u) {
            continue;
        }
        let mut coset: Vec<u64> = h.elements.iter().map(|&x| mulmod(u, x, d)).collect();
        coset.sort_unstable();
        covered.extend(coset.iter().copied());
        out.push(coset);
    }
    Ok(out)
}

/// Every subgroup of (Z/dZ)^*, found by saturating generator extensions;
/// intended for small d (the all-subgroups cross-checks cap at a few
/// hundred). Sorted by (order, elements) for determinism.
pub fn all_subgroups(d: u64) -> Result<Vec<Subgroup>> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    let units: Vec<u64> = (1..d).filter(|&u| gcd(u, d) == 1).collect();
    let trivial = subgroup_generated(d, &[])?;
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    seen.insert(trivial.elements.clone());
    let mut out = vec![trivial];
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        let base = out[i].clone();
        for &u in &units {
            if base.contains(u) {
                continue;
            }
            let mut gens: Vec<i64> = base.generators.iter().map(|&g| g as i64).collect();
            gens.push(u as i64);
            let bigger = subgroup_generated(d, &gens)?;
            if seen.insert(bigger.elements.clone()) {
                out.push(bigger);
                frontier.push(out.len() - 1);
            }
        }
    }
    out.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::multiplicative_order;
    use proptest::prelude::*;

    #[test]
    fn small_decompositions() {
        // (Z/8)^* = <-1> x <5>
        let s = unit_group(8).unwrap();
        let comps: Vec<(u64, u64, u64)> = s
            .components()
            .iter()
            .map(|c| (c.prime_power, c.generator, c.order))
            .collect();
        assert_eq!(comps, vec![(8, 7, 2), (8, 5, 2)]);

        // (Z/5)^* is cyclic with smallest primitive root 2
        let s = unit_group(5).unwrap();
        let comps: Vec<(u64, u64, u64)> = s
            .components()
            .iter()
            .map(|c| (c.prime_power, c.generator, c.order))
            .collect();
        assert_eq!(comps, vec![(5, 2, 4)]);

        // (Z/12)^*: the 2-part C2 (generated by -1 = 3 mod 4) then mod 3
        let s = unit_group(12).unwrap();
        let comps: Vec<(u64, u64, u64)> = s
            .components()
            .iter()
            .map(|c| (c.prime_power, c.generator, c.order))
            .collect();
        assert_eq!(comps, vec![(4, 3, 2), (3, 2, 2)]);

        assert_eq!(unit_group(2).unwrap_err(), Error::ModulusTooSmall(2));
        assert_eq!(unit_group(0).unwrap_err(), Error::ModulusTooSmall(0));
    }

    #[test]
    fn component_orders_multiply_to_phi_and_generators_have_stated_order() {
        for d in 3..400u64 {
            let s = unit_group(d).unwrap();
            let prod: u64 = s.components().iter().map(|c| c.order).product();
            assert_eq!(prod, s.phi(), "d={d}");
            for c in s.components() {
                assert_eq!(
                    multiplicative_order(c.generator as i64, c.prime_power).unwrap(),
                    c.order,
                    "d={d} pp={}",
                    c.prime_power
                );
            }
        }
    }

    #[test]
    fn discrete_log_example_mod_8() {
        let s = unit_group(8).unwrap();
        // 7 = -1 * 5^0
        assert_eq!(s.discrete_log(7).unwrap(), vec![1, 0]);
        assert_eq!(s.discrete_log(5).unwrap(), vec![0, 1]);
        assert_eq!(s.discrete_log(3).unwrap(), vec![1, 1]); // 3 = -5 mod 8
        assert!(s.discrete_log(4).is_err());
    }

    #[test]
    fn discrete_log_roundtrips_for_every_unit() {
        for d in 3..=2000u64 {
            let s = unit_group(d).unwrap();
            for a in 1..d {
                if gcd(a, d) != 1 {
                    continue;
                }
                let exps = s.discrete_log(a as i64).unwrap();
                assert_eq!(s.exponent_to_residue(&exps), a, "d={d} a={a}");
            }
        }
    }

    #[test]
    fn untabled_dlog_agrees_with_tables() {
        let fac = Factorizer::Plain;
        for d in [3u64, 8, 16, 24, 45, 97, 128, 243, 256, 255, 1024, 2048, 3571] {
            let s = unit_group(d).unwrap();
            for a in 1..d {
                if gcd(a, d) != 1 {
                    continue;
                }
                assert_eq!(
                    s.discrete_log_untabled(a, &fac).unwrap(),
                    s.discrete_log(a as i64).unwrap(),
                    "d={d} a={a}"
                );
            }
        }
    }

    #[test]
    fn cyclic_subgroup_examples() {
        // 3 has order 10 mod 44; 3^5 = 243 = 23 mod 44
        let h = cyclic_subgroup(44, 3).unwrap();
        assert_eq!(h.order(), 10);
        assert!(h.contains(23));

        let h = cyclic_subgroup(4, -1).unwrap();
        assert_eq!(h.elements, vec![1, 3]);

        assert!(matches!(
            cyclic_subgroup(12, 4),
            Err(Error::NotAUnit { .. })
        ));
    }

    #[test]
    fn generated_subgroup_examples() {
        // <3, -1> mod 13: 3 has order 3, adjoining -1 doubles it
        let h = subgroup_generated(13, &[3, -1]).unwrap();
        assert_eq!(h.order(), 6);
        assert_eq!(h.elements, vec![1, 3, 4, 9, 10, 12]);

        let h = subgroup_generated(8, &[]).unwrap();
        assert_eq!(h.elements, vec![1]);
    }

    #[test]
    fn cosets_of_17_mod_24() {
        let h = cyclic_subgroup(24, 17).unwrap();
        let cs = cosets(24, &h).unwrap();
        assert_eq!(
            cs,
            vec![
                vec![1, 17],
                vec![5, 13],
                vec![7, 23],
                vec![11, 19],
            ]
        );
    }

    #[test]
    fn all_subgroups_counts() {
        // (Z/24)^* = C2^3 has 16 subgroups; (Z/16)^* = C2 x C4 has 8
        assert_eq!(all_subgroups(24).unwrap().len(), 16);
        assert_eq!(all_subgroups(16).unwrap().len(), 8);
        // (Z/7)^* = C6: one subgroup per divisor of 6
        assert_eq!(all_subgroups(7).unwrap().len(), 4);
    }

    #[test]
    fn all_subgroups_are_subgroups() {
        for d in 3..60u64 {
            for h in all_subgroups(d).unwrap() {
                assert!(h.contains(1));
                for &a in &h.elements {
                    for &b in &h.elements {
                        assert!(h.contains(mulmod(a, b, d)), "d={d}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn cosets_partition_the_units(d in 3u64..300, g in 1i64..300) {
            let r = reduce_mod(g, d);
            prop_assume!(gcd(r, d) == 1);
            let h = cyclic_subgroup(d, g).unwrap();
            let cs = cosets(d, &h).unwrap();
            let mut all: Vec<u64> = cs.iter().flatten().copied().collect();
            all.sort_unstable();
            let units: Vec<u64> = (1..d).filter(|&u| gcd(u, d) == 1).collect();
            prop_assert_eq!(all, units);
            for c in &cs {
                prop_assert_eq!(c.len() as u64, h.order());
            }
        }

        #[test]
        fn subgroup_generated_is_idempotent(d in 3u64..200, a in 1i64..200, b in 1i64..200) {
            prop_assume!(gcd(reduce_mod(a, d), d) == 1 && gcd(reduce_mod(b, d), d) == 1);
            let h = subgroup_generated(d, &[a, b]).unwrap();
            let again = subgroup_generated(
                d,
                &h.elements.iter().map(|&x| x as i64).collect::<Vec<_>>(),
            )
            .unwrap();
            prop_assert_eq!(h.elements, again.elements);
        }
    }
}
