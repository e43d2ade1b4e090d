//! Worked-example formulas for the right branch of the running example's expression
//! (nodes 3, 5, 8, 9, 10), plus byte-exact snapshots of the written encodings.

mod common;

use common::{check_layers, check_snapshot, LAYERS, SNAPSHOTS};

#[test]
fn layers_match_worked_examples() {
    for (sem, tables) in LAYERS {
        check_layers(sem, tables).unwrap();
    }
}

#[test]
fn written_encodings_match_snapshots() {
    for (sem, stem) in SNAPSHOTS {
        check_snapshot(sem, stem).unwrap();
    }
}
