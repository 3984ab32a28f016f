//! Minimum population loss over a class on a finitely supported
//! distribution.

use std::collections::BTreeMap;

use crate::classes::ConceptClass;
use crate::data::Instance;
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

/// `min_h L_D(h)` over the class. Tabular classes are scanned; thresholds
/// are swept over the support; halfspaces in one or two dimensions are
/// enumerated over every linear dichotomy of the support.
pub fn opt_value(class: &ConceptClass, d: &DiscreteDistribution) -> Result<f64> {
    d.check(&class.universe())?;
    // Mass of label 1 and label 0 per distinct instance.
    let mut per: BTreeMap<Instance, (f64, f64)> = BTreeMap::new();
    for (e, w) in d.iter() {
        let slot = per.entry(e.x.clone()).or_insert((0.0, 0.0));
        if e.y {
            slot.0 += w;
        } else {
            slot.1 += w;
        }
    }
    let points: Vec<(Instance, f64, f64)> = per.into_iter().map(|(x, (a, b))| (x, a, b)).collect();
    // Loss of a labeling: mass of the label not chosen.
    let loss = |labels: &mut dyn Iterator<Item = bool>| -> f64 {
        points
            .iter()
            .zip(labels)
            .map(|((_, one, zero), l)| if l { *zero } else { *one })
            .sum()
    };
    match class {
        ConceptClass::FiniteTabular(t) => {
            let mut best = f64::INFINITY;
            for &row in t.rows() {
                let l = loss(&mut points.iter().map(|(x, _, _)| {
                    let i = x.as_id().expect("checked universe");
                    (row >> i) & 1 == 1
                }));
                best = best.min(l);
            }
            Ok(best)
        }
        ConceptClass::Threshold1D => {
            // Points are sorted; theta at each point or above all of them.
            let mut best = f64::INFINITY;
            for cut in 0..=points.len() {
                best = best.min(loss(&mut (0..points.len()).map(|i| i >= cut)));
            }
            Ok(best)
        }
        ConceptClass::Halfspace { dim } => {
            let coords: Vec<Vec<f64>> = points
                .iter()
                .map(|(x, _, _)| x.as_point().expect("checked universe").to_vec())
                .collect();
            let directions = match dim {
                1 => vec![vec![1.0], vec![-1.0]],
                2 => directions_2d(&coords),
                _ => {
                    return Err(Error::unsupported(
                        "opt_value",
                        format!("halfspaces in dimension {dim}"),
                    ));
                }
            };
            let mut best = f64::INFINITY;
            for w in directions {
                let mut order: Vec<(f64, usize)> = coords
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.iter().zip(&w).map(|(a, b)| a * b).sum(), i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0));
                // Positive side is a suffix of the order, cut between
                // distinct projections.
                for cut in 0..=order.len() {
                    if cut > 0 && cut < order.len() && order[cut].0 == order[cut - 1].0 {
                        continue;
                    }
                    let mut labels = vec![false; order.len()];
                    for &(_, i) in &order[cut..] {
                        labels[i] = true;
                    }
                    best = best.min(loss(&mut labels.into_iter()));
                }
            }
            Ok(best)
        }
    }
}

/// One unit normal inside every arc between consecutive critical angles
/// (normals perpendicular to some pair of points), so that each linear
/// dichotomy is realized by some direction with no projection ties.
fn directions_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    let mut crit = vec![0.0];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (dx, dy) = (points[j][0] - points[i][0], points[j][1] - points[i][1]);
            let a = dy.atan2(dx) + PI / 2.0;
            for v in [a, a + PI] {
                crit.push(v.rem_euclid(2.0 * PI));
            }
        }
    }
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut out = Vec::with_capacity(2 * crit.len());
    for (k, &a) in crit.iter().enumerate() {
        let b = crit.get(k + 1).copied().unwrap_or(crit[0] + 2.0 * PI);
        for t in [a, 0.5 * (a + b)] {
            out.push(vec![t.cos(), t.sin()]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::TabularClass;
    use crate::data::Example;

    #[test]
    fn coin_class() {
        let class = ConceptClass::FiniteTabular(TabularClass::constants(1).unwrap());
        let d = DiscreteDistribution::new(vec![Example::id(0, true), Example::id(0, false)], vec![0.3, 0.7]).unwrap();
        assert!((opt_value(&class, &d).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn realizable_is_zero() {
        let class = ConceptClass::FiniteTabular(TabularClass::intervals(5).unwrap());
        let d = DiscreteDistribution::labeled(&[0.2; 5], |i| (1..3).contains(&i)).unwrap();
        assert_eq!(opt_value(&class, &d).unwrap(), 0.0);
    }

    #[test]
    fn threshold_decreasing_labels() {
        let d = DiscreteDistribution::new(
            vec![Example::scalar(0.0, true), Example::scalar(1.0, false)],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(opt_value(&ConceptClass::Threshold1D, &d).unwrap(), 0.5);
        // Halfspaces in 1-D can point either way.
        let p = |v: f64, y| Example::new(Instance::point(vec![v]), y);
        let d1 = DiscreteDistribution::new(vec![p(0.0, true), p(1.0, false)], vec![0.5, 0.5]).unwrap();
        assert_eq!(opt_value(&ConceptClass::halfspace(1).unwrap(), &d1).unwrap(), 0.0);
    }

    #[test]
    fn xor_in_the_plane() {
        let p = |a: f64, b: f64, y| Example::new(Instance::point(vec![a, b]), y);
        let d = DiscreteDistribution::new(
            vec![
                p(0.0, 0.0, false),
                p(1.0, 1.0, false),
                p(0.0, 1.0, true),
                p(1.0, 0.0, true),
            ],
            vec![0.4, 0.3, 0.2, 0.1],
        )
        .unwrap();
        // Best linear dichotomy leaves out the lightest point.
        let v = opt_value(&ConceptClass::halfspace(2).unwrap(), &d).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        assert!(opt_value(
            &ConceptClass::halfspace(3).unwrap(),
            &DiscreteDistribution::point_mass(Example::new(Instance::point(vec![0.0, 0.0, 0.0]), true))
        )
        .is_err());
    }
}
