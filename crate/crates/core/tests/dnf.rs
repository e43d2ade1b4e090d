//! CNF → DNF conversion along a witness expression.

mod common;

#[test]
fn converted_matrix_agrees_and_stays_narrow() {
    common::check_dnf(7, 100).unwrap();
}
