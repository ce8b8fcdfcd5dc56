//! Elementary number theory on `u64`: factorization, Euler phi, Carmichael
//! lambda, multiplicative orders, and the 2-adic valuation of p^k - 1.
//!
//! Everything here is exact 64-bit arithmetic (with `u128` intermediates);
//! factorization runs trial division below one million and falls back to
//! Brent's variant of Pollard rho, with a deterministic Miller-Rabin test.

use crate::{Error, Result};

/// Greatest common divisor.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple (panics on overflow; callers stay far below u64).
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Reduce a possibly negative integer modulo `n >= 1` into `0..n`.
pub fn reduce_mod(a: i64, n: u64) -> u64 {
    let n_i = n as i128;
    let r = (a as i128).rem_euclid(n_i);
    r as u64
}

/// Modular multiplication through `u128`.
pub fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Modular exponentiation; `powmod(a, e, 1) == 0`.
pub fn powmod(mut a: u64, mut e: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, n);
        }
        a = mulmod(a, a, n);
        e >>= 1;
    }
    acc
}

/// Modular inverse of `a` modulo `n` when gcd(a, n) = 1.
pub fn invmod(a: u64, n: u64) -> Option<u64> {
    // extended Euclid over i128 so intermediate coefficients never overflow
    let (mut r0, mut r1) = (n as i128, (a % n.max(1)) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        None
    } else {
        Some(s0.rem_euclid(n as i128) as u64)
    }
}

// ---- primality -------------------------------------------------------------

/// Witnesses that make Miller-Rabin deterministic for every `u64`.
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin primality test for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..(n - 1).trailing_zeros() {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// ---- factorization ---------------------------------------------------------

/// A positive integer together with its sorted prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Euler's totient from the factorization.
    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e - 1) * (p - 1))
            .product()
    }

    /// Carmichael's lambda from the factorization.
    pub fn lambda(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &(p, e)| {
            let comp = if p == 2 {
                match e {
                    1 => 1,
                    2 => 2,
                    _ => 1u64 << (e - 2),
                }
            } else {
                p.pow(e - 1) * (p - 1)
            };
            lcm(acc, comp)
        })
    }

    /// All divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                divs.extend(prev.iter().map(|d| d * pe));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// The distinct primes dividing the value.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }
}

/// Trial division is attempted below this bound before Pollard rho takes over.
const TRIAL_LIMIT: u64 = 1_000_000;

fn rho_step(x: u64, c: u64, n: u64) -> u64 {
    (mulmod(x, x, n) + c) % n
}

/// Brent's cycle-finding variant of Pollard rho; `n` must be odd, composite,
/// and free of factors below the trial-division bound.
fn pollard_rho(n: u64) -> u64 {
    for c in 1.. {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = rho_step(x, c, n);
            y = rho_step(rho_step(y, c, n), c, n);
            d = gcd(x.abs_diff(y), n);
            count += 1;
            if count > 1 << 26 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
    }
    unreachable!()
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Factor `n >= 1` into primes.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0u32;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p <= TRIAL_LIMIT && p * p <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        if m < TRIAL_LIMIT * TRIAL_LIMIT {
            // anything left below the square of the trial bound is prime
            factors.push((m, 1));
        } else {
            let mut rest = Vec::new();
            factor_into(m, &mut rest);
            rest.sort_unstable();
            let mut i = 0;
            while i < rest.len() {
                let j = rest[i..].iter().take_while(|&&q| q == rest[i]).count();
                factors.push((rest[i], j as u32));
                i += j;
            }
        }
    }
    factors.sort_unstable();
    Ok(Factorization { value: n, factors })
}

/// Euler's totient of `n >= 1`.
pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.phi())
}

/// Carmichael's lambda of `n >= 1` (the exponent of the unit group).
pub fn carmichael_lambda(n: u64) -> Result<u64> {
    Ok(factorize(n)?.lambda())
}

/// Multiplicative order of `a` modulo `n >= 1`; `a` may be negative and is
/// reduced first. Errors when gcd(a, n) > 1.
pub fn multiplicative_order(a: i64, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    if n == 1 {
        return Ok(1);
    }
    let r = reduce_mod(a, n);
    if gcd(r, n) != 1 {
        return Err(Error::NotAUnit { a, modulus: n });
    }
    let lam = carmichael_lambda(n)?;
    Ok(order_dividing(r, lam, n))
}

/// Order of the unit `r` modulo `n` given a known multiple `bound` of it.
pub(crate) fn order_dividing(r: u64, bound: u64, n: u64) -> u64 {
    order_dividing_with(r, bound, n, &Factorizer::Plain)
}

/// [`order_dividing`] drawing factorizations from the given factorizer, so
/// full-interval scans can reuse a smallest-prime-factor sieve.
pub(crate) fn order_dividing_with(r: u64, bound: u64, n: u64, fac: &Factorizer) -> u64 {
    let mut order = bound;
    for (q, _) in fac.factorize(bound).factors {
        while order % q == 0 && powmod(r, order / q, n) == 1 {
            order /= q;
        }
    }
    order
}


/// Exponent of the prime `r` in `m >= 1`.
pub fn valuation(r: u64, m: u64) -> Result<u32> {
    if !is_prime(r) {
        return Err(Error::NotPrime(r));
    }
    if m == 0 {
        return Err(Error::ZeroInput);
    }
    let mut m = m;
    let mut v = 0;
    while m % r == 0 {
        m /= r;
        v += 1;
    }
    Ok(v)
}

/// v_2(p^k - 1) for odd `p` with |p| > 1 and `k >= 1`, via the closed form
///
/// * k odd:  v_2(p - 1),
/// * k even: v_2(p^2 - 1) + v_2(k) - 1,
///
/// so no power p^k is ever expanded.
pub fn v2_pow_minus_one(p: i64, k: u64) -> Result<u32> {
    if p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(p));
    }
    if p % 2 == 0 {
        return Err(Error::EvenBase(p));
    }
    if k == 0 {
        return Err(Error::ZeroInput);
    }
    if k % 2 == 1 {
        let pm1 = (p as i128 - 1).unsigned_abs();
        Ok(pm1.trailing_zeros())
    } else {
        let sq = (p as i128 * p as i128 - 1) as u128;
        Ok(sq.trailing_zeros() + k.trailing_zeros() - 1)
    }
}

// ---- interval factorization ------------------------------------------------

/// Smallest-prime-factor sieve for factoring every integer in `1..=limit`
/// in O(log n) divisions; used to speed up full-interval scans.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> FactorSieve {
        assert!(limit < u32::MAX as u64, "sieve limit must fit in u32");
        let n = limit as usize + 1;
        let mut spf = vec![0u32; n];
        let mut i = 2usize;
        while i < n {
            if spf[i] == 0 {
                let mut j = i;
                while j < n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
            i += 1;
        }
        FactorSieve { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Factor `1 <= n <= limit` by repeated smallest-prime lookups.
    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.limit, "n out of sieve range");
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as u64;
            let mut e = 0u32;
            while m as u64 % p == 0 {
                m /= p as usize;
                e += 1;
            }
            factors.push((p, e));
        }
        factors.sort_unstable();
        Factorization { value: n, factors }
    }
}

/// Either a shared sieve or plain per-call factorization; lets scan code take
/// one parameter and work with or without the precomputed table.
pub enum Factorizer<'a> {
    Plain,
    Sieve(&'a FactorSieve),
}

impl Factorizer<'_> {
    pub fn factorize(&self, n: u64) -> Factorization {
        match self {
            Factorizer::Plain => factorize(n).expect("n >= 1"),
            Factorizer::Sieve(s) if n <= s.limit() => s.factorize(n),
            Factorizer::Sieve(_) => factorize(n).expect("n >= 1"),
        }
    }
}
