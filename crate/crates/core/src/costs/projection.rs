use nalgebra::DMatrix;

use super::CostTable;

/// Maps any table onto a pseudo-metric: clamp negatives to zero, zero the
/// diagonal, symmetrize by averaging, then replace every entry by its
/// shortest-path distance. The closure is the largest pseudo-metric below
/// the symmetrized table, so pseudo-metric inputs are returned unchanged.
pub fn metric_projection(c: &CostTable) -> CostTable {
    let mut d = symmetric_part(c.entries());
    shortest_path_closure(&mut d);
    CostTable::new(c.alphabet().clone(), d).expect("projection keeps shape")
}

fn symmetric_part(e: &DMatrix<f64>) -> DMatrix<f64> {
    let m = e.nrows();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * (e[(i, j)].max(0.0) + e[(j, i)].max(0.0))
        }
    })
}

fn shortest_path_closure(d: &mut DMatrix<f64>) {
    let m = d.nrows();
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
}

/// Euclidean projection onto the cone of pseudo-metrics on the extended
/// alphabet, via Dykstra's alternating projections over the non-negativity
/// and triangle half-spaces. A final closure pass removes residual
/// violations left by the iteration tolerance.
pub fn nearest_pseudometric(c: &CostTable) -> CostTable {
    let e = c.entries();
    let m = e.nrows();
    // Projection onto symmetric zero-diagonal matrices first; the cone lies
    // inside that subspace.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            pairs.push((i, j));
        }
    }
    let pid = |i: usize, j: usize| -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // index of (a, b) in row-major upper-triangular order
        a * (2 * m - a - 1) / 2 + (b - a - 1)
    };
    let mut x: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| 0.5 * (e[(i, j)] + e[(j, i)]))
        .collect();

    // (long side, short side, short side)
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (ab, ac, bc) = (pid(a, b), pid(a, c), pid(b, c));
                triangles.push([ac, ab, bc]);
                triangles.push([ab, ac, bc]);
                triangles.push([bc, ab, ac]);
            }
        }
    }
    let mut tri_corr = vec![0.0; triangles.len()];
    let mut nonneg_corr = vec![0.0; x.len()];

    for _sweep in 0..20_000 {
        let mut change: f64 = 0.0;
        for (t, &[long, s1, s2]) in triangles.iter().enumerate() {
            // undo the previous correction: y = x + theta * a, a = e_long - e_s1 - e_s2
            let theta = tri_corr[t];
            let y = [x[long] + theta, x[s1] - theta, x[s2] - theta];
            let viol = y[0] - y[1] - y[2];
            let step = viol.max(0.0) / 3.0;
            let new = [y[0] - step, y[1] + step, y[2] + step];
            change = change
                .max((new[0] - x[long]).abs())
                .max((new[1] - x[s1]).abs())
                .max((new[2] - x[s2]).abs());
            x[long] = new[0];
            x[s1] = new[1];
            x[s2] = new[2];
            tri_corr[t] = step;
        }
        for (k, v) in x.iter_mut().enumerate() {
            let y = *v + nonneg_corr[k];
            let p = y.max(0.0);
            change = change.max((p - *v).abs());
            nonneg_corr[k] = y - p;
            *v = p;
        }
        if change < 1e-14 {
            break;
        }
    }

    let mut d = DMatrix::zeros(m, m);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        d[(i, j)] = x[k].max(0.0);
        d[(j, i)] = x[k].max(0.0);
    }
    shortest_path_closure(&mut d);
    CostTable::new(c.alphabet().clone(), d).expect("projection keeps shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::check_pseudometric;
    use crate::reference::{c0, c1};

    #[test]
    fn pseudometric_input_is_a_fixed_point() {
        assert_eq!(metric_projection(&c0()), c0());
        assert!(nearest_pseudometric(&c0()).max_abs_diff(&c0()) < 1e-12);
    }

    #[test]
    fn projecting_gesl_cost_repairs_it() {
        let p = metric_projection(&c1());
        assert!(check_pseudometric(&p).is_pseudometric());
        let sym = symmetric_part(c1().entries());
        assert!(p.entries().iter().zip(sym.iter()).all(|(a, b)| a <= b));
    }

    #[test]
    fn negative_entries_are_clamped() {
        let mut c = c0();
        c.set(0, 1, -1.0);
        let p = metric_projection(&c);
        assert!(p.get(0, 1) >= 0.0);
        assert!(check_pseudometric(&p).is_pseudometric());
    }

    #[test]
    fn nearest_pseudometric_beats_closure_in_distance() {
        let c = c1();
        let near = nearest_pseudometric(&c);
        let closed = metric_projection(&c);
        assert!(check_pseudometric(&near).is_pseudometric());
        let dist = |a: &CostTable| (a.entries() - c.entries()).norm();
        assert!(dist(&near) <= dist(&closed) + 1e-9);
    }

    #[test]
    fn nearest_pseudometric_simple_violation() {
        // three points with one side too long: d(0,2) = 3 > 1 + 1
        let a = crate::trees::Alphabet::from_names(&["a", "b"]).unwrap();
        let c = CostTable::from_entries(
            a,
            &[
                ("a", "b", 1.0),
                ("b", "a", 1.0),
                ("b", "-", 1.0),
                ("-", "b", 1.0),
                ("a", "-", 3.0),
                ("-", "a", 3.0),
            ],
        )
        .unwrap();
        let p = nearest_pseudometric(&c);
        // equal shift of 1/3 along (1, 1, -1)
        assert!((p.get_named("a", "-").unwrap() - 8.0 / 3.0).abs() < 1e-9);
        assert!((p.get_named("a", "b").unwrap() - 4.0 / 3.0).abs() < 1e-9);
    }
}
