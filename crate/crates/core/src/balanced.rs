//! Balancedness deciders for subgroups of (Z/dZ)^*.
//!
//! A subgroup H is balanced when every coset uH has equally many members
//! with least positive representative below d/2 as above. Three independent
//! routes decide this: direct coset counting (the ground truth), exact
//! character sums (c(chi) = 0 for every odd chi trivial on H), and a fast
//! search that replaces the cyclotomic zero test with the conductor-based
//! non-vanishing rule, never materializing a character table.

use crate::characters::DirichletCharacter;
use crate::numtheory::{
    factorize, gcd, is_prime, multiplicative_order, mulmod, powmod, reduce_mod, Factorizer,
};
use crate::unitgroup::{cosets, cyclic_subgroup, Subgroup, UnitGroupStructure};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// Which decision route produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Definition,
    Characters,
    Fast,
}

/// Evidence for a not-balanced verdict.
#[derive(Debug, Clone)]
pub enum Witness {
    /// A coset with unequal halves, listed in increasing order.
    Coset(Vec<u64>),
    /// An odd character trivial on H whose half-interval sum is nonzero.
    Character(DirichletCharacter),
}

/// The outcome of a balancedness test, with evidence on the negative path.
#[derive(Debug, Clone)]
pub struct BalancedVerdict {
    pub modulus: u64,
    pub subgroup: Subgroup,
    pub balanced: bool,
    pub method: Method,
    pub witness: Option<Witness>,
}

fn validate(d: u64, h: &Subgroup) -> Result<()> {
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    if h.modulus != d {
        return Err(Error::ModulusMismatch(h.modulus, d));
    }
    Ok(())
}

/// Decide by counting coset halves directly. Ground truth.
pub fn is_balanced_definition(d: u64, h: &Subgroup) -> Result<BalancedVerdict> {
    validate(d, h)?;
    for coset in cosets(d, h)? {
        let below = coset.iter().filter(|&&a| 2 * a < d).count();
        let above = coset.len() - below;
        if below != above {
            return Ok(BalancedVerdict {
                modulus: d,
                subgroup: h.clone(),
                balanced: false,
                method: Method::Definition,
                witness: Some(Witness::Coset(coset)),
            });
        }
    }
    Ok(BalancedVerdict {
        modulus: d,
        subgroup: h.clone(),
        balanced: true,
        method: Method::Definition,
        witness: None,
    })
}

/// Decide by the exact criterion: balanced iff c(chi) = 0 for every odd
/// character trivial on H, with the sums tested in Z[zeta_n].
pub fn is_balanced_characters(d: u64, h: &Subgroup) -> Result<BalancedVerdict> {
    validate(d, h)?;
    for chi in crate::characters::all_characters(d)? {
        if chi.is_odd() && chi.is_trivial_on(h)? && !crate::characters::c_chi(&chi).is_zero() {
            return Ok(BalancedVerdict {
                modulus: d,
                subgroup: h.clone(),
                balanced: false,
                method: Method::Characters,
                witness: Some(Witness::Character(chi)),
            });
        }
    }
    Ok(BalancedVerdict {
        modulus: d,
        subgroup: h.clone(),
        balanced: true,
        method: Method::Characters,
        witness: None,
    })
}

/// Decide with no cyclotomic arithmetic: search for an odd character
/// trivial on H passing the conductor-based non-vanishing conditions.
pub fn is_balanced_fast(d: u64, h: &Subgroup) -> Result<BalancedVerdict> {
    validate(d, h)?;
    let structure = Arc::new(UnitGroupStructure::for_modulus(d));
    let fac = Factorizer::Plain;
    let dlogs: Vec<Vec<u64>> = h
        .generators
        .iter()
        .map(|&g| structure.discrete_log_untabled(g, &fac))
        .collect::<Result<_>>()?;
    match witness_character_exponents(&structure, &dlogs, &fac) {
        Some(exponents) => {
            let chi = DirichletCharacter::new(Arc::clone(&structure), exponents)?;
            Ok(BalancedVerdict {
                modulus: d,
                subgroup: h.clone(),
                balanced: false,
                method: Method::Fast,
                witness: Some(Witness::Character(chi)),
            })
        }
        None => Ok(BalancedVerdict {
            modulus: d,
            subgroup: h.clone(),
            balanced: true,
            method: Method::Fast,
            witness: None,
        }),
    }
}

/// Search for an odd character trivial on the subgroup generated by the
/// given discrete-log vectors whose half-interval sum is nonzero, i.e. a
/// witness that the subgroup is not balanced. Returns its exponent vector.
///
/// The search walks the components in increasing-order-of-size, keeping the
/// partial value of each linear constraint (one per generator, plus the
/// oddness constraint) and pruning with suffix gcds: a branch survives only
/// while every constraint's remaining target is reachable by the suffix.
/// At each node the admissible exponents form an arithmetic progression
/// (CRT-merged across constraints), so only near-solutions are visited.
/// Leaves are exact solutions, then filtered by the non-vanishing rule.
pub(crate) fn witness_character_exponents(
    structure: &UnitGroupStructure,
    generator_dlogs: &[Vec<u64>],
    fac: &Factorizer,
) -> Option<Vec<u64>> {
    let comps = structure.components();
    let k = comps.len();
    if k == 0 {
        return None;
    }
    let d = structure.modulus();
    let n = structure.lambda(); // even for d > 2
    let j2 = d.trailing_zeros();
    let strides: Vec<u64> = comps.iter().map(|c| n / c.order).collect();

    // dlog of -1: exponent order/2 on odd components; on the 2-part, the
    // sign generator alone carries it (and -1 = 3 mod 4 when j2 = 2)
    let minus_one: Vec<u64> = comps
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.prime == 2 {
                u64::from(i == 0)
            } else {
                c.order / 2
            }
        })
        .collect();

    // constraints: sum of t_i * w_i = target (mod n)
    let mut constraints: Vec<(Vec<u64>, u64)> = Vec::with_capacity(generator_dlogs.len() + 1);
    for dl in generator_dlogs {
        let w = (0..k)
            .map(|i| mulmod(dl[i] % comps[i].order, strides[i], n))
            .collect();
        constraints.push((w, 0));
    }
    let odd_w = (0..k).map(|i| mulmod(minus_one[i], strides[i], n)).collect();
    constraints.push((odd_w, n / 2));

    // visit small components first; big ones resolve by exact progressions
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| comps[i].order);

    // suffix[c][depth] = gcd(n, w_c over order[depth..]); reachability bound
    let suffix: Vec<Vec<u64>> = constraints
        .iter()
        .map(|(w, _)| {
            let mut s = vec![n; k + 1];
            for depth in (0..k).rev() {
                s[depth] = gcd(s[depth + 1], w[order[depth]]);
            }
            s
        })
        .collect();

    let mut walk = WitnessWalk {
        structure,
        fac,
        comps,
        n,
        j2,
        strides,
        constraints,
        order,
        suffix,
        sums: vec![0; generator_dlogs.len() + 1],
        exps: vec![0; k],
        prime_dlogs: HashMap::new(),
    };
    if walk.descend(0) {
        Some(walk.exps)
    } else {
        None
    }
}

struct WitnessWalk<'a> {
    structure: &'a UnitGroupStructure,
    fac: &'a Factorizer<'a>,
    comps: &'a [crate::unitgroup::Component],
    n: u64,
    j2: u32,
    strides: Vec<u64>,
    constraints: Vec<(Vec<u64>, u64)>,
    order: Vec<usize>,
    suffix: Vec<Vec<u64>>,
    sums: Vec<u64>,
    exps: Vec<u64>,
    prime_dlogs: HashMap<u64, Vec<Option<u64>>>,
}

impl WitnessWalk<'_> {
    fn descend(&mut self, depth: usize) -> bool {
        if depth == self.comps.len() {
            return self.leaf_is_nonvanishing();
        }
        let ci = self.order[depth];
        let m = self.comps[ci].order;
        // intersect per-constraint progressions for the exponent here
        let mut prog: Option<(u64, u64)> = Some((0, 1)); // t = a (mod q)
        for (c, (w, target)) in self.constraints.iter().enumerate() {
            let reach = self.suffix[c][depth + 1];
            let rhs = (target + self.n - self.sums[c]) % self.n % reach;
            let wi = w[ci] % reach;
            let g = gcd(wi, reach);
            if rhs % g != 0 {
                prog = None;
                break;
            }
            if reach == g {
                continue; // constraint free at this depth
            }
            let q = reach / g;
            let a = mulmod(
                rhs / g,
                crate::numtheory::invmod(wi / g, q).expect("coprime by construction"),
                q,
            );
            prog = merge_progressions(prog.unwrap(), (a, q));
            if prog.is_none() {
                break;
            }
        }
        let Some((a, q)) = prog else { return false };
        let mut t = a;
        while t < m {
            for (c, (w, _)) in self.constraints.iter().enumerate() {
                self.sums[c] = (self.sums[c] + mulmod(t, w[ci], self.n)) % self.n;
            }
            self.exps[ci] = t;
            if self.descend(depth + 1) {
                return true;
            }
            for (c, (w, _)) in self.constraints.iter().enumerate() {
                self.sums[c] = (self.sums[c] + self.n - mulmod(t, w[ci], self.n)) % self.n;
            }
            t += q;
        }
        false
    }

    /// The non-vanishing conditions on an exact solution chi: the 2-part of
    /// the conductor must exhaust the 2-part of d (else d/d' is even), and
    /// each odd prime l | d outside the conductor needs chi'(l) != 1.
    fn leaf_is_nonvanishing(&mut self) -> bool {
        if self.j2 >= 3 {
            if self.exps[1] % 2 == 0 {
                return false; // conductor 2-part falls short of 2^j2
            }
        } else if self.j2 == 2 && self.exps[0] != 1 {
            return false;
        }
        for i in 0..self.comps.len() {
            if self.comps[i].prime == 2 || self.exps[i] != 0 {
                continue;
            }
            let l = self.comps[i].prime;
            if !self.prime_dlogs.contains_key(&l) {
                let v = (0..self.comps.len())
                    .map(|j| self.structure.component_dlog_untabled(j, l, self.fac))
                    .collect();
                self.prime_dlogs.insert(l, v);
            }
            let dl = &self.prime_dlogs[&l];
            let mut val: u128 = 0;
            for j in 0..self.comps.len() {
                if j == i {
                    continue;
                }
                let x = dl[j].expect("l is a unit in the other components");
                val += (self.exps[j] as u128 * x as u128 % self.n as u128)
                    * self.strides[j] as u128;
            }
            if val % self.n as u128 == 0 {
                return false; // chi'(l) = 1
            }
        }
        true
    }
}

/// Intersect t = a (mod q) with t = b (mod r), both moduli dividing n.
fn merge_progressions((a, q): (u64, u64), (b, r): (u64, u64)) -> Option<(u64, u64)> {
    let g = gcd(q, r);
    if (b + r - a % r) % r % g != 0 {
        return None;
    }
    let lcm = q / g * r;
    let step = (b + r - a % r) % r / g;
    let inv = crate::numtheory::invmod(q / g % (r / g), r / g).unwrap_or(0);
    let x = a + q * mulmod(step, inv, r / g);
    Some((x % lcm, lcm))
}

/// Whether target lies in the cyclic subgroup generated by p mod d,
/// by direct power enumeration.
pub(crate) fn power_subgroup_contains(p: i64, d: u64, target: u64) -> Result<bool> {
    let r = reduce_mod(p, d);
    if gcd(r, d) != 1 {
        return Err(Error::NotAUnit { a: p, modulus: d });
    }
    let t = target % d;
    let mut x = 1u64;
    loop {
        if x == t {
            return Ok(true);
        }
        x = mulmod(x, r, d);
        if x == 1 {
            return Ok(t == 1);
        }
    }
}

/// All exceptional balanced pairs (d, h) with 3 <= d <= d_max: h has order
/// 2, generates a balanced subgroup, and is neither -1 nor the always-
/// balanced half-shift 1/2 d + 1 (present when 4 | d). The complete list
/// for d_max >= 60 is (24,17), (24,19), (60,41), (60,49).
pub fn order2_scan(d_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for d in 3..=d_max {
        for h in 2..d - 1 {
            if gcd(h, d) != 1 || mulmod(h, h, d) != 1 {
                continue;
            }
            if d % 4 == 0 && h == d / 2 + 1 {
                continue;
            }
            let subgroup = cyclic_subgroup(d, h as i64).expect("unit of order 2");
            if is_balanced_definition(d, &subgroup)
                .expect("valid input")
                .balanced
            {
                out.push((d, h));
            }
        }
    }
    out
}

/// Classification of an odd prime power r^a coprime to p by how much of
/// the unit group p and -1 generate, refining by l_p(r^a) mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimePowerType {
    /// p and -1 together generate all units mod r^a.
    One,
    /// They generate a proper subgroup.
    Two,
    /// Proper subgroup and l_p(r^a) = 2 (mod 4).
    Three,
    /// Proper subgroup and l_p(r^a) odd.
    Four,
}

impl PrimePowerType {
    pub fn label(self) -> u8 {
        match self {
            PrimePowerType::One => 1,
            PrimePowerType::Two => 2,
            PrimePowerType::Three => 3,
            PrimePowerType::Four => 4,
        }
    }
}

/// Classify the odd prime power r^a with respect to the base p.
pub fn prime_power_type(p: i64, r: u64, a: u32) -> Result<PrimePowerType> {
    if p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(p));
    }
    if r == 2 || !is_prime(r) {
        return Err(Error::NotOddPrime(r));
    }
    if a == 0 {
        return Err(Error::ZeroInput);
    }
    let m = r
        .checked_pow(a)
        .ok_or_else(|| Error::Internal(format!("{r}^{a} overflows")))?;
    let pr = reduce_mod(p, m);
    if pr % r == 0 {
        return Err(Error::NotAUnit { a: p, modulus: m });
    }
    let l = multiplicative_order(p, m)?;
    let phi = m / r * (r - 1);
    let minus_one_in = l % 2 == 0 && powmod(pr, l / 2, m) == m - 1;
    let joint = if minus_one_in { l } else { 2 * l };
    Ok(if joint == phi {
        PrimePowerType::One
    } else if l % 2 == 1 {
        PrimePowerType::Four
    } else if l % 4 == 2 {
        PrimePowerType::Three
    } else {
        PrimePowerType::Two
    })
}

/// Outcome of the Type-3/Type-4 dichotomy test for <p> mod d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropCritVerdict {
    /// 4 | d and 1/2 d + 1 lies in <p>: the half-shift route to balance.
    InBp0,
    /// <p> mod d is not balanced.
    NotBalanced,
    /// The hypotheses do not apply to this (p, d).
    HypothesesNotMet,
}

/// When d has an odd prime s with Type 3, an odd prime t with Type 4, and
/// 4 | l_p(d), then either 1/2 d + 1 in <p> (with 4 | d) or <p> is not
/// balanced; report which branch holds, or that the hypotheses fail.
pub fn prop_crit_conclusion(p: i64, d: u64) -> Result<PropCritVerdict> {
    if p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(p));
    }
    if d < 3 {
        return Err(Error::ModulusTooSmall(d));
    }
    let r = reduce_mod(p, d);
    if gcd(r, d) != 1 {
        return Err(Error::NotAUnit { a: p, modulus: d });
    }
    let mut has_type3 = false;
    let mut has_type4 = false;
    for l in factorize(d)?.primes() {
        if l == 2 {
            continue;
        }
        match prime_power_type(p, l, 1)? {
            PrimePowerType::Three => has_type3 = true,
            PrimePowerType::Four => has_type4 = true,
            _ => {}
        }
    }
    if !has_type3 || !has_type4 || multiplicative_order(p, d)? % 4 != 0 {
        return Ok(PropCritVerdict::HypothesesNotMet);
    }
    if d % 4 == 0 && power_subgroup_contains(p, d, d / 2 + 1)? {
        Ok(PropCritVerdict::InBp0)
    } else {
        Ok(PropCritVerdict::NotBalanced)
    }
}
