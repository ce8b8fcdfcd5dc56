//! Ranks of the elliptic curves y^2 = x(x+1)(x+u^d) over the rational
//! function field F_q(u), q = p^f odd.
//!
//! The rank is a finite sum over the divisors e of d with e > 2: each e
//! whose power subgroup <p> mod e is balanced contributes phi(e)/l_q(e),
//! where l_q(e) is the multiplicative order of q mod e. The module exposes
//! the per-divisor breakdown, a supersingular special case with rank d-2
//! or d-1, and interval statistics (average, max, histogram) with
//! descriptive comparison columns.

use crate::census::{in_b_p, in_b_p1};
use crate::numtheory::{euler_phi, factorize, multiplicative_order};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Split an odd prime power q = p^f; anything else is rejected.
fn split_prime_power(q: u64) -> Result<(u64, u32)> {
    let fac = factorize(q).map_err(|_| Error::NotOddPrimePower(q))?;
    match fac.factors.as_slice() {
        [(p, f)] if *p % 2 == 1 => Ok((*p, *f)),
        _ => Err(Error::NotOddPrimePower(q)),
    }
}

fn signed(n: u64) -> Result<i64> {
    i64::try_from(n).map_err(|_| Error::Internal(format!("{n} exceeds the signed range")))
}

/// One divisor e of d with e > 2: whether <p> mod e is balanced, and the
/// contribution phi(e)/l_q(e) it adds to the rank when it is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub e: u64,
    pub balanced: bool,
    pub phi: u64,
    pub l: u64,
    pub contribution: u64,
}

/// The rank of y^2 = x(x+1)(x+u^d) over F_q(u) with its per-divisor rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub q: u64,
    pub p: u64,
    pub f: u32,
    pub d: u64,
    pub rows: Vec<RankRow>,
    pub rank: u64,
}

/// Compute the rank over F_q(u), q = p^f with p an odd prime, for d >= 1
/// coprime to p. Balance is a property of the characteristic p; the order
/// l is taken with respect to q itself.
pub fn rank_ed(q: u64, d: u64) -> Result<RankReport> {
    let (p, f) = split_prime_power(q)?;
    if d == 0 {
        return Err(Error::ZeroInput);
    }
    if d % p == 0 {
        return Err(Error::CharacteristicDividesD { p, d });
    }
    let p_signed = signed(p)?;
    let mut rows = Vec::new();
    let mut rank = 0u64;
    for e in factorize(d)?.divisors() {
        if e <= 2 {
            continue;
        }
        let balanced = in_b_p(p_signed, e)?;
        let phi = euler_phi(e)?;
        let l = multiplicative_order(signed(q % e)?, e)?;
        let contribution = if balanced {
            if phi % l != 0 {
                return Err(Error::Internal(format!(
                    "balanced divisor e={e} has l={l} not dividing phi={phi}"
                )));
            }
            phi / l
        } else {
            0
        };
        rank += contribution;
        rows.push(RankRow {
            e,
            balanced,
            phi,
            l,
            contribution,
        });
    }
    let bound = if d % 2 == 0 { d - 2 } else { d - 1 };
    if rank > bound {
        return Err(Error::Internal(format!(
            "rank {rank} for d={d} exceeds the structural bound {bound}"
        )));
    }
    Ok(RankReport {
        q,
        p,
        f,
        d,
        rows,
        rank,
    })
}

/// When some power of p is -1 mod d and q = 1 mod d, the rank attains its
/// structural maximum: d-2 for even d, d-1 for odd. Checks that equality
/// holds; precondition failures surface as errors, a failed equality (a
/// bug, not bad input) as Ok(false).
pub fn supersingular_rank_check(q: u64, d: u64) -> Result<bool> {
    let (p, _) = split_prime_power(q)?;
    if d == 0 {
        return Err(Error::ZeroInput);
    }
    if d % p == 0 {
        return Err(Error::CharacteristicDividesD { p, d });
    }
    if !in_b_p1(signed(p)?, d)? {
        return Err(Error::SupersingularPrecondition(format!(
            "no power of {p} is -1 mod {d}"
        )));
    }
    if q % d != 1 {
        return Err(Error::SupersingularPrecondition(format!(
            "{q} is not 1 mod {d}"
        )));
    }
    let expected = if d % 2 == 0 { d - 2 } else { d - 1 };
    Ok(rank_ed(q, d)?.rank == expected)
}

/// One statistics row: the rank at d plus descriptive columns — the
/// group-to-exponent ratio phi/lambda, the lower-bound quantity phi/l_q,
/// and the ceiling d / (2 log_q d) with its slack above the actual rank
/// (absent for d <= 2 where the logarithm degenerates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub d: u64,
    pub rank: u64,
    pub phi_over_lambda: f64,
    pub phi_over_l_q: f64,
    pub brumer_ceiling: Option<f64>,
    pub brumer_slack: Option<f64>,
}

/// Interval rank statistics over d <= x_max coprime to p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub q: u64,
    pub p: u64,
    pub f: u32,
    pub x_max: u64,
    pub average: f64,
    pub max_rank: u64,
    pub argmax_d: u64,
    /// (rank value, number of d attaining it), ascending by rank.
    pub histogram: Vec<(u64, u64)>,
    pub rows: Vec<StatsRow>,
}

fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let mag = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - mag);
    (v * scale).round() / scale
}

/// Scan every d <= x_max coprime to p; the average divides the rank sum
/// by x_max itself (skipped d contribute zero). While scanning, asserts
/// divisor persistence of the negation criterion: d with -1 a power of p
/// passes the property to every divisor e > 2.
pub fn rank_stats(q: u64, x_max: u64) -> Result<RankStats> {
    if x_max < 3 {
        return Err(Error::ModulusTooSmall(x_max));
    }
    let (p, f) = split_prime_power(q)?;
    let p_signed = signed(p)?;
    let rows: Vec<StatsRow> = (1..=x_max)
        .into_par_iter()
        .map(|d| -> Result<Option<StatsRow>> {
            if d % p == 0 {
                return Ok(None);
            }
            let dfac = factorize(d)?;
            let report = rank_ed(q, d)?;
            if d > 2 && in_b_p1(p_signed, d)? {
                for e in dfac.divisors() {
                    if e > 2 {
                        assert!(
                            in_b_p1(p_signed, e)?,
                            "negation membership fails to persist from d={d} to e={e}"
                        );
                    }
                }
            }
            let phi = dfac.phi() as f64;
            let lambda = dfac.lambda() as f64;
            let l_q = multiplicative_order(signed(q % d)?, d)? as f64;
            let brumer = (d > 2).then(|| {
                let log_q_d = (d as f64).ln() / (q as f64).ln();
                d as f64 / (2.0 * log_q_d)
            });
            Ok(Some(StatsRow {
                d,
                rank: report.rank,
                phi_over_lambda: round_sig(phi / lambda, 6),
                phi_over_l_q: round_sig(phi / l_q, 6),
                brumer_ceiling: brumer.map(|b| round_sig(b, 6)),
                brumer_slack: brumer.map(|b| round_sig(b - report.rank as f64, 6)),
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let total: u64 = rows.iter().map(|r| r.rank).sum();
    let (max_rank, argmax_d) = rows
        .iter()
        .map(|r| (r.rank, r.d))
        .max_by(|a, b| (a.0, std::cmp::Reverse(a.1)).cmp(&(b.0, std::cmp::Reverse(b.1))))
        .unwrap_or((0, 0));
    let mut histogram = std::collections::BTreeMap::new();
    for r in &rows {
        *histogram.entry(r.rank).or_insert(0u64) += 1;
    }
    Ok(RankStats {
        q,
        p,
        f,
        x_max,
        average: round_sig(total as f64 / x_max as f64, 6),
        max_rank,
        argmax_d,
        histogram: histogram.into_iter().collect(),
        rows,
    })
}

impl RankReport {
    /// JSON with the fixed key order q, p, f, d, rows, rank.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl RankStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    /// CSV rows d,rank followed by a `#`-prefixed aggregate trailer.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("d,rank\n");
        for r in &self.rows {
            writeln!(s, "{},{}", r.d, r.rank).expect("writing to a String");
        }
        writeln!(s, "# x_max,{}", self.x_max).expect("writing to a String");
        writeln!(s, "# average,{}", self.average).expect("writing to a String");
        writeln!(s, "# max_rank,{}", self.max_rank).expect("writing to a String");
        writeln!(s, "# argmax_d,{}", self.argmax_d).expect("writing to a String");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balanced::is_balanced_definition;
    use crate::unitgroup::cyclic_subgroup;

    #[test]
    fn small_rank_values() {
        assert_eq!(rank_ed(3, 1).unwrap().rank, 0); // no divisors over 2
        assert_eq!(rank_ed(3, 2).unwrap().rank, 0);
        assert_eq!(rank_ed(3, 4).unwrap().rank, 1); // e=4: phi 2, l 2
        assert_eq!(rank_ed(81, 5).unwrap().rank, 4); // e=5: phi 4, l 1
        assert_eq!(rank_ed(81, 10).unwrap().rank, 8); // e in {5, 10}
    }

    #[test]
    fn report_rows_for_d_10() {
        let report = rank_ed(81, 10).unwrap();
        assert_eq!((report.q, report.p, report.f, report.d), (81, 3, 4, 10));
        assert_eq!(report.rows.len(), 2); // e = 5 and e = 10
        let top = &report.rows[1];
        assert_eq!(top.e, 10);
        assert!(top.balanced); // 3^2 = 9 = -1 mod 10
        assert_eq!(top.phi, 4);
        assert_eq!(top.l, 1); // 81 = 1 mod 10
        assert_eq!(top.contribution, 4);
        assert_eq!(report.rank, 8);
    }

    #[test]
    fn rejects_bad_field_sizes() {
        assert!(matches!(rank_ed(12, 5), Err(Error::NotOddPrimePower(12))));
        assert!(matches!(rank_ed(16, 5), Err(Error::NotOddPrimePower(16))));
        assert!(matches!(rank_ed(1, 5), Err(Error::NotOddPrimePower(1))));
        assert!(matches!(
            rank_ed(3, 6),
            Err(Error::CharacteristicDividesD { p: 3, d: 6 })
        ));
        assert!(rank_ed(3, 0).is_err());
    }

    #[test]
    fn matches_definitional_oracle() {
        for q in [3u64, 5, 9, 27] {
            let (p, _) = split_prime_power(q).unwrap();
            for d in 1..=120u64 {
                if d % p == 0 {
                    continue;
                }
                let mut expected = 0;
                for e in factorize(d).unwrap().divisors() {
                    if e <= 2 {
                        continue;
                    }
                    let sub = cyclic_subgroup(e, p as i64).unwrap();
                    if is_balanced_definition(e, &sub).unwrap().balanced {
                        let l = multiplicative_order((q % e) as i64, e).unwrap();
                        expected += crate::numtheory::euler_phi(e).unwrap() / l;
                    }
                }
                assert_eq!(rank_ed(q, d).unwrap().rank, expected, "q={q} d={d}");
            }
        }
    }

    #[test]
    fn supersingular_equality() {
        assert!(supersingular_rank_check(81, 5).unwrap()); // 4 = 5-1
        assert!(supersingular_rank_check(81, 10).unwrap()); // 8 = 10-2
        assert!(supersingular_rank_check(9, 4).unwrap()); // 2 = 4-2
        assert!(supersingular_rank_check(729, 7).unwrap()); // 6 = 7-1
        // preconditions surface as errors, not false
        assert!(matches!(
            supersingular_rank_check(81, 13),
            Err(Error::SupersingularPrecondition(_)) // l_3(13) = 3 odd
        ));
        assert!(matches!(
            supersingular_rank_check(3, 5),
            Err(Error::SupersingularPrecondition(_)) // 3 is not 1 mod 5
        ));
    }

    #[test]
    fn stats_small_interval() {
        let stats = rank_stats(3, 10).unwrap();
        assert_eq!((stats.q, stats.p, stats.f), (3, 3, 1));
        // admissible d: 1,2,4,5,7,8,10
        assert_eq!(stats.rows.len(), 7);
        let by_d = |d: u64| stats.rows.iter().find(|r| r.d == d).unwrap();
        assert_eq!(by_d(4).rank, 1);
        assert_eq!(by_d(5).rank, 1); // e=5 balanced, phi=4, l_3(5)=4
        assert_eq!(by_d(8).rank, 1); // only e=4 balanced
        assert_eq!(by_d(10).rank, 2); // e=5 and e=10, one apiece
    }

    #[test]
    fn stats_average_and_extremes() {
        let stats = rank_stats(3, 3).unwrap();
        assert_eq!(stats.average, 0.0); // only d=1,2 admissible, both rank 0
        assert_eq!(stats.max_rank, 0);

        let stats = rank_stats(3, 10).unwrap();
        let total: u64 = stats.rows.iter().map(|r| r.rank).sum();
        assert_eq!(stats.average, total as f64 / 10.0);
        let max = stats.rows.iter().map(|r| r.rank).max().unwrap();
        assert_eq!(stats.max_rank, max);
        assert_eq!(
            stats.argmax_d,
            stats
                .rows
                .iter()
                .filter(|r| r.rank == max)
                .map(|r| r.d)
                .min()
                .unwrap()
        );
        let counted: u64 = stats.histogram.iter().map(|&(_, c)| c).sum();
        assert_eq!(counted as usize, stats.rows.len());
    }

    #[test]
    fn stats_lower_bound_from_negation_members() {
        // every d with -1 a power of p contributes at least phi(d)/l_q(d)
        let stats = rank_stats(5, 50).unwrap();
        let mut bound = 0u64;
        for d in 3..=50u64 {
            if d % 5 == 0 || !in_b_p1(5, d).unwrap() {
                continue;
            }
            let l = multiplicative_order((5 % d) as i64, d).unwrap();
            bound += crate::numtheory::euler_phi(d).unwrap() / l;
        }
        assert!(stats.average * 50.0 + 1e-9 >= bound as f64);
    }

    #[test]
    fn json_key_order_is_fixed() {
        let report = rank_ed(3, 4).unwrap();
        let json = report.to_json();
        assert!(json.starts_with("{\"q\":3,\"p\":3,\"f\":1,\"d\":4,\"rows\":["));
        assert!(json.contains("{\"e\":4,\"balanced\":true,\"phi\":2,\"l\":2,\"contribution\":1}"));
        assert!(json.ends_with("\"rank\":1}"));
        let back: RankReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn csv_has_trailer() {
        let csv = rank_stats(3, 5).unwrap().to_csv();
        assert!(csv.starts_with("d,rank\n1,0\n2,0\n4,1\n5,1\n"));
        assert!(csv.contains("# average,"));
        assert!(csv.contains("# max_rank,1"));
        assert!(csv.contains("# argmax_d,4"));
    }
}
