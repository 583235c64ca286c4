//! The worked GESL instance: alphabet `{1, 2, 3}`, trees `1(2)`, `2`, `3`,
//! `3` in two classes, and its three cost tables.

use std::f64::consts::LN_2;

use crate::costs::CostTable;
use crate::trees::{parse_tree, Alphabet, Dataset, Record};

pub fn alphabet() -> Alphabet {
    Alphabet::from_names(&["1", "2", "3"]).expect("valid alphabet")
}

/// Records `x1 = 1(2)`, `x2 = 2` (class `A`) and `x3 = x4 = 3` (class `B`).
pub fn dataset() -> Dataset {
    let a = alphabet();
    let records = [("1(2)", "A"), ("2", "A"), ("3", "B"), ("3", "B")]
        .iter()
        .map(|(t, l)| Record {
            tree: parse_tree(t, &a).expect("valid tree"),
            label: l.to_string(),
        })
        .collect();
    Dataset::new(a, records).expect("non-empty")
}

/// `ln 2` off the diagonal, zero on it.
pub fn c0() -> CostTable {
    CostTable::uniform(alphabet(), LN_2)
}

/// Cost learned by single-script GESL.
pub fn c1() -> CostTable {
    let h = LN_2 / 2.0;
    CostTable::from_entries(
        alphabet(),
        &[
            ("1", "3", h),
            ("2", "3", LN_2),
            ("2", "-", h),
            ("3", "1", h),
            ("-", "2", h),
        ],
    )
    .expect("valid entries")
}

/// Cost reported for all-scripts GESL with metric constraints. Note that it
/// violates the triangle inequality, e.g. `c(2,3) > c(2,1) + c(1,3)`.
pub fn c2() -> CostTable {
    let h = LN_2 / 2.0;
    CostTable::from_entries(
        alphabet(),
        &[
            ("1", "3", h),
            ("2", "3", LN_2),
            ("2", "-", h),
            ("3", "1", h),
            ("3", "2", LN_2),
            ("3", "-", h),
            ("-", "2", h),
            ("-", "3", h),
        ],
    )
    .expect("valid entries")
}
