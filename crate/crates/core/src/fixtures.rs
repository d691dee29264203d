//! Small hand-built models shared by unit tests.

use crate::mechanisms::{AssignmentLaw, Distribution};
use crate::netcore::Assignment;
use crate::outcomes::OutcomeTable;

fn a(s: &str) -> Assignment {
    Assignment::parse(s).unwrap()
}

fn table(n: usize, rows: &[(usize, &str, f64)]) -> OutcomeTable {
    let mut t = OutcomeTable::new(n, 1, Some(0.0));
    for &(unit, d, v) in rows {
        t.set(0, unit, a(d), v).unwrap();
    }
    t
}

/// Two units, outcome 0,1,2,3 by (own, other) treatment.
pub fn dyad_outcomes() -> OutcomeTable {
    table(
        2,
        &[
            (0, "00", 0.0),
            (0, "10", 1.0),
            (0, "01", 2.0),
            (0, "11", 3.0),
            (1, "00", 0.0),
            (1, "01", 1.0),
            (1, "10", 2.0),
            (1, "11", 3.0),
        ],
    )
}

/// Path 1-2-3; the two end units have spillover-on-the-treated of one.
pub fn triad_outcomes() -> OutcomeTable {
    table(
        3,
        &[
            (0, "100", 0.0),
            (0, "110", 1.0),
            (0, "101", 2.0),
            (0, "111", 3.0),
            (2, "001", 0.0),
            (2, "011", 1.0),
            (2, "101", 2.0),
            (2, "111", 3.0),
        ],
    )
}

/// Four-unit clique; only unit 1 has non-zero outcomes.
pub fn quad_outcomes() -> OutcomeTable {
    table(
        4,
        &[
            (0, "1110", 1.0),
            (0, "1100", 0.0),
            (0, "1101", 2.0),
            (0, "1010", 1.0),
            (0, "1011", 3.0),
            (0, "1001", 2.0),
        ],
    )
}

pub fn uniform_over(rows: &[&str]) -> AssignmentLaw {
    let p = 1.0 / rows.len() as f64;
    let n = rows[0].len();
    AssignmentLaw::Explicit(Distribution::new(n, rows.iter().map(|r| (a(r), p)).collect()).unwrap())
}
