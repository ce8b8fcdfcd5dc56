//! Full-interval scans classifying, for a fixed integer p, the moduli d
//! whose power subgroup <p> is balanced.
//!
//! Membership routes, from cheapest to most general: the half-shift
//! criterion (4 | d and 1/2 d + 1 a power of p, decided by the valuation
//! rule on v2(p^l - 1)), the negation criterion (-1 a power of p), two
//! rejections (odd subgroup order; a Type-3 plus Type-4 prime pair with
//! 4 | l_p(d)), and finally the character-witness search. A scan touches
//! every d <= x_max coprime to p and reports per-checkpoint counts of
//!
//! * Bp    — d with <p> balanced,
//! * Bp0   — d with 4 | d and 1/2 d + 1 in <p> (always balanced),
//! * Bp1   — d with -1 in <p> (always balanced),
//! * Bpstar = Bp minus Bp0.

use crate::balanced::{power_subgroup_contains, witness_character_exponents};
use crate::numtheory::{
    gcd, lcm, multiplicative_order, order_dividing_with, powmod, reduce_mod, v2_pow_minus_one,
    FactorSieve, Factorization, Factorizer,
};
use crate::unitgroup::UnitGroupStructure;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn validate_pd(p: i64, d: u64) -> Result<u64> {
    if p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(p));
    }
    if d <= 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    let r = reduce_mod(p, d);
    if gcd(r, d) != 1 {
        return Err(Error::NotAUnit { a: p, modulus: d });
    }
    Ok(r)
}

/// True iff some power of p is -1 mod d, i.e. p^(l/2) = -1 with l = l_p(d)
/// even (an odd-order subgroup cannot contain -1).
pub fn in_b_p1(p: i64, d: u64) -> Result<bool> {
    let r = validate_pd(p, d)?;
    let l = multiplicative_order(p, d)?;
    Ok(l % 2 == 0 && powmod(r, l / 2, d) == d - 1)
}

/// True iff 4 | d and 1/2 d + 1 is a power of p, by direct membership.
/// Vacuously false for even p, which cannot be coprime to 4 | d.
pub fn in_b_p0(p: i64, d: u64) -> Result<bool> {
    validate_pd(p, d)?;
    Ok(d % 4 == 0 && power_subgroup_contains(p, d, d / 2 + 1)?)
}

/// The valuation criterion behind [`in_b_p0_fast`], for d = 2^j m, j >= 2,
/// m odd (which forces p odd): when l_p(m) is odd, membership holds iff
/// j = 1 + v2(p-1) or j > v2(p^2-1); when even, iff j > v2(p^(l_p(m)) - 1).
fn half_shift_member(p: i64, j: u32, l_m: u64) -> Result<bool> {
    Ok(if l_m % 2 == 1 {
        j == 1 + v2_pow_minus_one(p, 1)? || j > v2_pow_minus_one(p, 2)?
    } else {
        j > v2_pow_minus_one(p, l_m)?
    })
}

/// Same predicate as [`in_b_p0`], decided by the valuation criterion with
/// no power enumeration.
pub fn in_b_p0_fast(p: i64, d: u64) -> Result<bool> {
    validate_pd(p, d)?;
    let j = d.trailing_zeros();
    if j < 2 {
        return Ok(false);
    }
    let l_m = multiplicative_order(p, d >> j)?;
    half_shift_member(p, j, l_m)
}

fn validate_odd_m(p: i64, m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::ZeroInput);
    }
    if m % 2 == 0 {
        return Err(Error::EvenModulus(m));
    }
    if p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(p));
    }
    if p % 2 == 0 {
        return Err(Error::EvenBase(p));
    }
    if gcd(reduce_mod(p, m), m) != 1 {
        return Err(Error::NotAUnit { a: p, modulus: m });
    }
    Ok(())
}

/// f_p(m) = v2(p^(l_p(m)) - 1), for odd m coprime to the odd base p; the
/// least j admitting 2^j m as a half-shift member is j = f_p(m) + 1 or
/// beyond, so this valuation controls the 2-part of those members.
pub fn f_p(p: i64, m: u64) -> Result<u32> {
    validate_odd_m(p, m)?;
    v2_pow_minus_one(p, multiplicative_order(p, m)?)
}

/// f'_p(m) = max(f_p(m), v2(p^2 - 1)); every j > f'_p(m) works.
pub fn f_p_prime(p: i64, m: u64) -> Result<u32> {
    Ok(f_p(p, m)?.max(v2_pow_minus_one(p, 2)?))
}

/// g_p(m) = v2(p^(lambda(m)) - 1), an upper companion to f'_p.
pub fn g_p(p: i64, m: u64) -> Result<u32> {
    validate_odd_m(p, m)?;
    v2_pow_minus_one(p, crate::numtheory::carmichael_lambda(m)?)
}

/// True iff <p> mod d is balanced.
pub fn in_b_p(p: i64, d: u64) -> Result<bool> {
    validate_pd(p, d)?;
    Ok(classify(p, d, &Factorizer::Plain)?.in_bp)
}

/// One scanned modulus: its 2-part split, the order data the half-shift
/// criterion consumes, and the four membership flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub d: u64,
    pub j: u32,
    pub m: u64,
    #[serde(rename = "l_p_m")]
    pub l_p_of_m: u64,
    #[serde(rename = "f_p_m")]
    pub f_p_of_m: u32,
    #[serde(rename = "in_Bp")]
    pub in_bp: bool,
    #[serde(rename = "in_Bp0")]
    pub in_bp0: bool,
    #[serde(rename = "in_Bp1")]
    pub in_bp1: bool,
    #[serde(rename = "in_Bpstar")]
    pub in_bpstar: bool,
}

/// Classify one modulus d known to be coprime to p, d > 2.
fn classify(p: i64, d: u64, fac: &Factorizer) -> Result<CensusRecord> {
    let r = reduce_mod(p, d);
    let dfac = fac.factorize(d);
    let j = d.trailing_zeros();
    let m = d >> j;
    let mfac = Factorization {
        value: m,
        factors: dfac.factors.iter().copied().filter(|&(q, _)| q != 2).collect(),
    };
    let l_m = if m == 1 {
        1
    } else {
        order_dividing_with(r % m, mfac.lambda(), m, fac)
    };
    // the f_p(m) column is defined for odd p only; even p stores 0
    let f_m = if p % 2 != 0 { v2_pow_minus_one(p, l_m)? } else { 0 };
    let in_bp0 = j >= 2 && half_shift_member(p, j, l_m)?;
    if in_bp0 {
        assert!(j > f_m, "half-shift member d={d} violates j > f_p(m)");
    }
    let l_two = if j == 0 {
        1
    } else {
        let pp = 1u64 << j;
        let lam2 = if j == 1 { 1 } else if j == 2 { 2 } else { pp / 4 };
        order_dividing_with(r % pp, lam2, pp, fac)
    };
    let l_d = lcm(l_m, l_two);
    let in_bp1 = l_d % 2 == 0 && powmod(r, l_d / 2, d) == d - 1;
    let in_bp = if in_bp0 || in_bp1 {
        true
    } else if l_d % 2 == 1 {
        false // balanced subgroups have even order
    } else if l_d % 4 == 0 && has_type3_and_type4(p, &dfac, fac) {
        false // the dichotomy: the half-shift route is already excluded
    } else {
        let structure = UnitGroupStructure::with_factorizer(d, fac);
        let dlog = structure.discrete_log_untabled(r, fac)?;
        witness_character_exponents(&structure, &[dlog], fac).is_none()
    };
    Ok(CensusRecord {
        d,
        j,
        m,
        l_p_of_m: l_m,
        f_p_of_m: f_m,
        in_bp,
        in_bp0,
        in_bp1,
        in_bpstar: in_bp && !in_bp0,
    })
}

/// Whether d has both an odd prime s with l_p(s) = 2 (mod 4) and an odd
/// prime t with l_p(t) odd, each generating (with -1) a proper subgroup of
/// the units mod the prime.
fn has_type3_and_type4(p: i64, dfac: &Factorization, fac: &Factorizer) -> bool {
    let mut t3 = false;
    let mut t4 = false;
    for s in dfac.primes().filter(|&s| s != 2) {
        let pr = reduce_mod(p, s);
        let l = order_dividing_with(pr, s - 1, s, fac);
        if l % 4 == 0 {
            continue;
        }
        let minus_in = l % 2 == 0 && powmod(pr, l / 2, s) == s - 1;
        let joint = if minus_in { l } else { 2 * l };
        if joint == s - 1 {
            continue;
        }
        if l % 2 == 1 {
            t4 = true;
        } else {
            t3 = true;
        }
        if t3 && t4 {
            return true;
        }
    }
    false
}

/// How much per-d detail a scan should retain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordEmission {
    /// Counts only.
    None,
    /// Keep records of d with <p> balanced.
    MembersOnly,
    /// Keep every scanned record.
    All,
}

/// Scan configuration; `shards` sets the worker count without affecting
/// output, and `use_sieve` trades memory for interval factorization speed.
#[derive(Debug, Clone)]
pub struct CensusConfig {
    pub p: i64,
    pub x_max: u64,
    pub checkpoints: Vec<u64>,
    pub records: RecordEmission,
    pub shards: usize,
    pub use_sieve: bool,
}

/// Counts at one checkpoint x, plus two descriptive columns: the
/// loglog-normalized half-shift count and the ratio Bpstar / Bp1 (absent
/// when Bp1 = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: u64,
    #[serde(rename = "Bp")]
    pub bp: u64,
    #[serde(rename = "Bp0")]
    pub bp0: u64,
    #[serde(rename = "Bp1")]
    pub bp1: u64,
    #[serde(rename = "Bpstar")]
    pub bpstar: u64,
    #[serde(rename = "Bp0_norm")]
    pub bp0_norm: f64,
    #[serde(rename = "ratio_star_over_B1")]
    pub ratio_star_over_b1: Option<f64>,
}

/// A finished scan: checkpoint counts and (optionally) the record stream,
/// sorted by d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTable {
    pub p: i64,
    pub x_max: u64,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<CensusRecord>,
}

/// Round to `digits` significant figures (descriptive columns only).
fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let mag = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - mag);
    (v * scale).round() / scale
}

/// Run the scan over 2 < d <= x_max, gcd(d, p) = 1. The interval is cut
/// into fixed-size chunks processed by a pool of `shards` workers; chunk
/// results merge by index, so output is identical for every shard count.
pub fn census_scan(config: &CensusConfig) -> Result<CensusTable> {
    if config.p.unsigned_abs() <= 1 {
        return Err(Error::BaseTooSmall(config.p));
    }
    if config.x_max < 3 {
        return Err(Error::ModulusTooSmall(config.x_max));
    }
    let x_max = config.x_max;
    let mut cps: Vec<u64> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&x| (3..=x_max).contains(&x))
        .collect();
    cps.sort_unstable();
    cps.dedup();
    if cps.is_empty() {
        cps.push(x_max);
    }
    let sieve = config.use_sieve.then(|| FactorSieve::new(x_max));

    const CHUNK: u64 = 1 << 12;
    let chunks = (x_max - 2).div_ceil(CHUNK);
    struct ChunkOut {
        counts: Vec<[u64; 4]>,
        records: Vec<CensusRecord>,
    }
    let scan_chunk = |ci: u64| -> Result<ChunkOut> {
        let lo = 3 + ci * CHUNK;
        let hi = (lo + CHUNK - 1).min(x_max);
        let fac = match &sieve {
            Some(s) => Factorizer::Sieve(s),
            None => Factorizer::Plain,
        };
        let mut counts = vec![[0u64; 4]; cps.len()];
        let mut records = Vec::new();
        for d in lo..=hi {
            if gcd(reduce_mod(config.p, d), d) != 1 {
                continue;
            }
            let rec = classify(config.p, d, &fac)?;
            for (k, &x) in cps.iter().enumerate() {
                if d <= x {
                    counts[k][0] += u64::from(rec.in_bp);
                    counts[k][1] += u64::from(rec.in_bp0);
                    counts[k][2] += u64::from(rec.in_bp1);
                    counts[k][3] += u64::from(rec.in_bpstar);
                }
            }
            let keep = match config.records {
                RecordEmission::All => true,
                RecordEmission::MembersOnly => rec.in_bp,
                RecordEmission::None => false,
            };
            if keep {
                records.push(rec);
            }
        }
        Ok(ChunkOut { counts, records })
    };
    let outs: Vec<ChunkOut> = if config.shards.max(1) == 1 {
        (0..chunks).map(scan_chunk).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.shards)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(scan_chunk)
                .collect::<Result<_>>()
        })?
    };

    let mut checkpoints = Vec::with_capacity(cps.len());
    for (k, &x) in cps.iter().enumerate() {
        let mut sum = [0u64; 4];
        for out in &outs {
            for (acc, v) in sum.iter_mut().zip(out.counts[k]) {
                *acc += v;
            }
        }
        let [bp, bp0, bp1, bpstar] = sum;
        debug_assert_eq!(bp, bp0 + bpstar);
        checkpoints.push(Checkpoint {
            x,
            bp,
            bp0,
            bp1,
            bpstar,
            bp0_norm: round_sig(bp0 as f64 * (x as f64).ln().ln() / x as f64, 6),
            ratio_star_over_b1: (bp1 > 0).then(|| round_sig(bpstar as f64 / bp1 as f64, 6)),
        });
    }
    let records = outs.into_iter().flat_map(|o| o.records).collect();
    Ok(CensusTable {
        p: config.p,
        x_max,
        checkpoints,
        records,
    })
}

impl CensusTable {
    /// The record stream as CSV with the fixed header; booleans as 0/1.
    pub fn records_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("d,j,m,l_p_m,f_p_m,in_Bp,in_Bp0,in_Bp1,in_Bpstar\n");
        for r in &self.records {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.d,
                r.j,
                r.m,
                r.l_p_of_m,
                r.f_p_of_m,
                u8::from(r.in_bp),
                u8::from(r.in_bp0),
                u8::from(r.in_bp1),
                u8::from(r.in_bpstar),
            )
            .expect("writing to a String");
        }
        s
    }

    /// The checkpoint table as CSV.
    pub fn checkpoints_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("x,Bp,Bp0,Bp1,Bpstar,Bp0_norm,ratio_star_over_B1\n");
        for c in &self.checkpoints {
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                c.x,
                c.bp,
                c.bp0,
                c.bp1,
                c.bpstar,
                c.bp0_norm,
                c.ratio_star_over_b1
                    .map_or(String::new(), |v| v.to_string()),
            )
            .expect("writing to a String");
        }
        s
    }

    /// The whole table as one JSON object.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }
}
