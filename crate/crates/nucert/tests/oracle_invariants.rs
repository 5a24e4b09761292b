//! Structural invariants of the exact section-counting oracle and the
//! closed-form bounds, checked on sweeps independent of any single frozen
//! value.

use num::rational::BigRational;
use num::BigInt;

use nucert::toric::{CurvePairOracle, ToricPairOracle};
use nucert::{
    intersection_form_of, nu_lower_bound, truncated_nu, SectionOracle, SurfacePair, ToricDivisor,
    ToricSurface,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ample_catalog() -> Vec<ToricDivisor> {
    let mut out = Vec::new();
    for d in 1..=4 {
        out.push(ToricDivisor::p2_o(d).unwrap());
    }
    for a in 1..=3 {
        for b in 1..=3 {
            out.push(ToricDivisor::p1xp1_o(a, b).unwrap());
        }
    }
    for (s, f) in [(1, 2), (1, 3), (2, 3)] {
        out.push(ToricDivisor::hirzebruch_class(1, s, f).unwrap());
    }
    out
}

#[test]
fn counts_are_monotone_in_level_and_twist() {
    for l in ample_catalog() {
        for e in ample_catalog() {
            if l.surface() != e.surface() {
                continue;
            }
            let oracle = ToricPairOracle::new(l.clone(), e.clone()).unwrap();
            for n in 1..=20u64 {
                let mut previous = oracle.h0(n, 0);
                assert!(previous > 0, "ample class with no sections at n = {n}");
                let mut k = 1u64;
                loop {
                    let current = oracle.h0(n, k);
                    assert!(
                        current <= previous,
                        "({l}) minus {k}({e}) at n = {n}: count grew from {previous} to {current}"
                    );
                    if current == 0 {
                        assert_eq!(oracle.h0(n, k + 1), 0, "count must stay zero deeper in");
                        break;
                    }
                    previous = current;
                    k += 1;
                }
            }
        }
    }
}

#[test]
fn counts_grow_strictly_along_ample_rays() {
    for l in ample_catalog() {
        let oracle = ToricPairOracle::new(l.clone(), l.clone()).unwrap();
        let mut previous = 0u64;
        for n in 1..=50u64 {
            let current = oracle.h0(n, 0);
            assert!(current > previous, "({l}): h0 at n = {n} did not grow");
            previous = current;
        }
    }
}

#[test]
fn plane_and_quadric_closed_forms() {
    for d in 0..=60i64 {
        let h0 = ToricDivisor::p2_o(d).unwrap().h0();
        assert_eq!(h0, ((d + 1) * (d + 2) / 2) as u64, "plane degree {d}");
    }
    assert_eq!(ToricDivisor::p2_o(-1).unwrap().h0(), 0);
    for a in 0..=12i64 {
        for b in 0..=12i64 {
            let h0 = ToricDivisor::p1xp1_o(a, b).unwrap().h0();
            assert_eq!(h0, ((a + 1) * (b + 1)) as u64, "bidegree ({a},{b})");
        }
    }
    assert_eq!(ToricDivisor::p1xp1_o(3, -1).unwrap().h0(), 0);
    assert_eq!(ToricDivisor::p1xp1_o(-1, 3).unwrap().h0(), 0);
}

#[test]
fn second_difference_recovers_self_intersection() {
    // Counts of an ample class on a smooth complete surface grow as a
    // quadratic in the level with leading coefficient D^2 / 2, exactly.
    for d in ample_catalog() {
        let self_int = d.intersection_number(&d).unwrap();
        let at = |n: i64| {
            d.scale_sub(n, &d, 0).unwrap().h0() as i64
        };
        for n in 1..=10i64 {
            let second = at(n + 1) - 2 * at(n) + at(n - 1);
            assert_eq!(second, self_int, "({d}) at n = {n}");
        }
    }
}

#[test]
fn closed_form_bound_is_linear_in_scaling() {
    for l in ample_catalog() {
        for e in ample_catalog() {
            if l.surface() != e.surface() {
                continue;
            }
            let base = nu_lower_bound(&SurfacePair::from_divisors(&l, &e).unwrap());
            for c in 2..=4i64 {
                let scaled_l = l.scale_sub(c, &e, 0).unwrap();
                let scaled = nu_lower_bound(&SurfacePair::from_divisors(&scaled_l, &e).unwrap());
                assert_eq!(scaled.value(), &(q(c, 1) * base.value()), "({l}) scaled by {c}");
            }
        }
    }
}

#[test]
fn catalog_families_yield_valid_forms() {
    let families: Vec<Vec<ToricDivisor>> = vec![
        vec![ToricDivisor::p2_o(1).unwrap(); 4],
        vec![ToricDivisor::p1xp1_o(1, 1).unwrap(); 4],
        (1..=4).map(|d| ToricDivisor::p2_o(d).unwrap()).collect(),
        [(1, 2), (1, 3), (2, 3)]
            .iter()
            .map(|&(s, f)| ToricDivisor::hirzebruch_class(1, s, f).unwrap())
            .collect(),
    ];
    for family in families {
        let form = intersection_form_of(&family).unwrap();
        assert!(form.validate().passed());
        for (i, a) in family.iter().enumerate() {
            for (j, b) in family.iter().enumerate() {
                assert_eq!(form.entry(i, j), a.intersection_number(b).unwrap());
            }
        }
    }
}

#[test]
fn effective_but_not_ample_classes_still_count() {
    // Rulings and sections have few sections but are not empty.
    let ruling = ToricDivisor::p1xp1_o(5, 0).unwrap();
    assert!(!ruling.is_ample());
    assert!(ruling.is_basepoint_free());
    assert_eq!(ruling.h0(), 6);

    let surface = ToricSurface::hirzebruch(1).unwrap();
    let fiber = surface.ray_divisor(0).unwrap();
    assert!(!fiber.is_ample());
    assert_eq!(fiber.h0(), 2);
    let section = surface.ray_divisor(1).unwrap();
    assert!(!section.is_basepoint_free());
    assert_eq!(section.h0(), 1);
}

#[test]
fn lattice_points_agree_with_counts() {
    let samples = vec![
        ToricDivisor::p2_o(3).unwrap(),
        ToricDivisor::p1xp1_o(2, 3).unwrap(),
        ToricDivisor::hirzebruch_class(2, 1, 3).unwrap(),
        ToricDivisor::p2_o(0).unwrap(),
        ToricDivisor::p1xp1_o(4, 0).unwrap(),
    ];
    for d in samples {
        let points = d.lattice_points();
        assert_eq!(points.len() as u64, d.h0(), "({d})");
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), points.len(), "({d}): duplicate lattice point");
        for p in &points {
            for ray in 0..d.surface().ray_count() {
                assert!(d.order_at(*p, ray) >= 0, "({d}): point {p:?} outside polygon");
            }
        }
    }
}

#[test]
fn curve_oracle_matches_its_formula() {
    for a in 1..=5i64 {
        for b in 1..=5i64 {
            let oracle = CurvePairOracle { l_degree: a, e_degree: b };
            for n in 1..=30u64 {
                for k in 0..=(n * a as u64 / b as u64 + 2) {
                    let degree = a * n as i64 - b * k as i64;
                    let expected = if degree >= 0 { (degree + 1) as u64 } else { 0 };
                    assert_eq!(oracle.h0(n, k), expected, "degrees ({a},{b}), n = {n}, k = {k}");
                }
            }
        }
    }
}

#[test]
fn quartic_line_ratio_is_constant_at_every_level() {
    // For L of degree 4 and a line, the truncated ratio is 4/3 at every
    // truncation level, not only in the limit.
    let l = ToricDivisor::p2_o(4).unwrap();
    let e = ToricDivisor::p2_o(1).unwrap();
    let oracle = ToricPairOracle::new(l, e).unwrap();
    for n in 1..=30u64 {
        assert_eq!(truncated_nu(&oracle, n).unwrap(), q(4, 3), "level {n}");
    }
}
