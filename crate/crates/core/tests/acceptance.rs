//! Full-tier verification gate: each test runs one cross-check suite at
//! its complete sweep bounds and prints a single pass/fail line with the
//! suite's diagnostic.

use balanced_core::verify::{self, Check, Tier};

fn assert_check(check: Check) {
    println!(
        "{} {} ({:.2}s): {}",
        if check.passed { "PASS" } else { "FAIL" },
        check.name,
        check.seconds,
        check.detail
    );
    assert!(check.passed, "{}: {}", check.name, check.detail);
}

#[test]
fn order2_exceptional_pairs_are_exactly_four() {
    assert_check(verify::check_order2_exceptions(Tier::Full));
}

#[test]
fn three_deciders_agree_on_cyclic_and_all_subgroups() {
    assert_check(verify::check_decider_agreement(Tier::Full));
}

#[test]
fn character_sum_identities_hold_exactly() {
    assert_check(verify::check_character_identities(Tier::Full));
}

#[test]
fn half_shift_fast_path_matches_power_enumeration() {
    assert_check(verify::check_half_shift_fast_path(Tier::Full));
}

#[test]
fn valuation_closed_form_matches_big_integers() {
    assert_check(verify::check_valuation_closed_form(Tier::Full));
}

#[test]
fn membership_route_intersection_is_tiny() {
    assert_check(verify::check_route_intersection(Tier::Full));
}

#[test]
fn census_is_coherent_and_shard_deterministic() {
    assert_check(verify::check_census_determinism(Tier::Full));
}

#[test]
fn rank_formula_matches_oracle_and_extremal_cases() {
    assert_check(verify::check_rank_formula(Tier::Full));
}

#[test]
fn balance_is_monotone_even_ordered_and_family_wide() {
    assert_check(verify::check_structural_properties(Tier::Full));
}

#[test]
fn two_prime_order_test_confirmed_by_oracle() {
    assert_check(verify::check_dichotomy(Tier::Full));
}
