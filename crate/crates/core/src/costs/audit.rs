use std::fmt;

use super::{CostTable, Element, METRIC_TOLERANCE};

/// Outcome of checking the four pseudo-metric properties of a cost table.
///
/// Each flag is false exactly when its witness list is non-empty. Triangle
/// witnesses `(x, y, z)` mean `c(x, z) > c(x, y) + c(y, z)`; symmetry
/// witnesses `(x, y)` mean `c(x, y) < c(y, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAudit {
    pub non_negativity: bool,
    pub self_identity: bool,
    pub symmetry: bool,
    pub triangle_inequality: bool,
    pub negative_entries: Vec<(Element, Element)>,
    pub nonzero_diagonal: Vec<Element>,
    pub asymmetric_pairs: Vec<(Element, Element)>,
    pub triangle_violations: Vec<(Element, Element, Element)>,
}

impl MetricAudit {
    pub fn is_pseudometric(&self) -> bool {
        self.non_negativity && self.self_identity && self.symmetry && self.triangle_inequality
    }

    pub fn summary(&self) -> String {
        let mut failed = Vec::new();
        if !self.non_negativity {
            failed.push("non-negativity");
        }
        if !self.self_identity {
            failed.push("self-identity");
        }
        if !self.symmetry {
            failed.push("symmetry");
        }
        if !self.triangle_inequality {
            failed.push("triangle inequality");
        }
        if failed.is_empty() {
            "pseudo-metric".to_string()
        } else {
            format!("violates {}", failed.join(", "))
        }
    }
}

impl fmt::Display for MetricAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |ok: bool| if ok { "ok" } else { "VIOLATED" };
        writeln!(f, "non-negativity: {}", flag(self.non_negativity))?;
        for (x, y) in &self.negative_entries {
            writeln!(f, "  c({x},{y}) < 0")?;
        }
        writeln!(f, "self-identity: {}", flag(self.self_identity))?;
        for x in &self.nonzero_diagonal {
            writeln!(f, "  c({x},{x}) != 0")?;
        }
        writeln!(f, "symmetry: {}", flag(self.symmetry))?;
        for (x, y) in &self.asymmetric_pairs {
            writeln!(f, "  c({x},{y}) < c({y},{x})")?;
        }
        writeln!(f, "triangle inequality: {}", flag(self.triangle_inequality))?;
        for (x, y, z) in &self.triangle_violations {
            writeln!(f, "  c({x},{z}) > c({x},{y}) + c({y},{z})")?;
        }
        Ok(())
    }
}

pub fn check_pseudometric(c: &CostTable) -> MetricAudit {
    check_pseudometric_with_tolerance(c, METRIC_TOLERANCE)
}

/// Exhaustive O(m^3) audit; comparisons allow `tol * max(1, |operands|)`.
pub fn check_pseudometric_with_tolerance(c: &CostTable, tol: f64) -> MetricAudit {
    let m = c.dim();
    let el = |i| Element::from_index(c.alphabet(), i);
    let slack = |a: f64, b: f64| tol * 1f64.max(a.abs()).max(b.abs());

    let mut negative_entries = Vec::new();
    let mut nonzero_diagonal = Vec::new();
    let mut asymmetric_pairs = Vec::new();
    let mut triangle_violations = Vec::new();

    for i in 0..m {
        if c.get(i, i).abs() > tol {
            nonzero_diagonal.push(el(i));
        }
        for j in 0..m {
            let v = c.get(i, j);
            if v < -tol {
                negative_entries.push((el(i), el(j)));
            }
            let w = c.get(j, i);
            if i != j && w - v > slack(v, w) {
                asymmetric_pairs.push((el(i), el(j)));
            }
        }
    }
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let direct = c.get(x, z);
                let detour = c.get(x, y) + c.get(y, z);
                if direct - detour > slack(direct, detour) {
                    triangle_violations.push((el(x), el(y), el(z)));
                }
            }
        }
    }

    MetricAudit {
        non_negativity: negative_entries.is_empty(),
        self_identity: nonzero_diagonal.is_empty(),
        symmetry: asymmetric_pairs.is_empty(),
        triangle_inequality: triangle_violations.is_empty(),
        negative_entries,
        nonzero_diagonal,
        asymmetric_pairs,
        triangle_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{c0, c1, c2};
    use crate::trees::Symbol;

    fn sym(s: &str) -> Element {
        Element::Symbol(Symbol::new(s).unwrap())
    }

    #[test]
    fn default_cost_is_pseudometric() {
        let audit = check_pseudometric(&c0());
        assert!(audit.is_pseudometric(), "{audit}");
        assert!(audit.triangle_violations.is_empty());
    }

    #[test]
    fn learned_cost_violations_have_witnesses() {
        let audit = check_pseudometric(&c1());
        assert!(!audit.symmetry);
        assert!(audit.asymmetric_pairs.contains(&(sym("3"), sym("2"))));
        assert!(!audit.triangle_inequality);
        assert!(audit
            .triangle_violations
            .contains(&(sym("2"), sym("1"), sym("3"))));
        assert!(audit.non_negativity && audit.self_identity);
    }

    #[test]
    fn all_scripts_cost_is_not_a_pseudometric() {
        // c(2,3) = ln 2 exceeds c(2,1) + c(1,3) = ln 2 / 2
        let audit = check_pseudometric(&c2());
        assert!(audit.symmetry);
        assert!(!audit.triangle_inequality);
        assert!(audit
            .triangle_violations
            .contains(&(sym("2"), sym("1"), sym("3"))));
    }

    #[test]
    fn witnesses_match_flags() {
        let mut c = c0();
        c.set(0, 0, 0.5);
        c.set(1, 2, -1.0);
        let audit = check_pseudometric(&c);
        assert!(!audit.self_identity && audit.nonzero_diagonal == vec![sym("1")]);
        assert!(!audit.non_negativity && audit.negative_entries == vec![(sym("2"), sym("3"))]);
    }
}
