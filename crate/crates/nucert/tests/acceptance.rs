//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single PASS line and enforces its runtime budget.

use std::time::{Duration, Instant};

use num::rational::BigRational;
use num::{BigInt, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nucert::filtration::{
    self, find_epsilon_b, is_adapted, qlin, toric_profile_via_h0, AdaptedBasis,
    FilteredSectionSpace, TwoFlags,
};
use nucert::rational::ratio;
use nucert::toric::{CurvePairOracle, ToricPairOracle};
use nucert::{
    curve_nu, intersection_form_of, morse_lower_bound, nu_lower_bound, rationalize,
    solve_fixed_point, truncated_nu, Error, IntersectionForm, NuCertificate, SectionOracle,
    SurfacePair, ToricDivisor, ToricSurface, DEFAULT_DENOMINATOR_CAP, DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
};

fn within_budget(start: Instant, limit: Duration, what: &str) {
    let elapsed = start.elapsed();
    assert!(elapsed < limit, "{what} took {elapsed:?}, budget {limit:?}");
}

fn q_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Every (L, E) pair the soundness sweeps run over: ample classes on the
/// plane (degrees up to 4), the quadric (bidegrees up to (3,3)), and the
/// first Hirzebruch surface (coefficients up to 3).
fn catalog() -> Vec<(ToricDivisor, ToricDivisor)> {
    let mut pairs = Vec::new();
    for dl in 1..=4 {
        for de in 1..=4 {
            pairs.push((ToricDivisor::p2_o(dl).unwrap(), ToricDivisor::p2_o(de).unwrap()));
        }
    }
    for la in 1..=3 {
        for lb in 1..=3 {
            for ea in 1..=3 {
                for eb in 1..=3 {
                    pairs.push((
                        ToricDivisor::p1xp1_o(la, lb).unwrap(),
                        ToricDivisor::p1xp1_o(ea, eb).unwrap(),
                    ));
                }
            }
        }
    }
    let ample_f1 = [(1, 2), (1, 3), (2, 3)];
    for &(ls, lf) in &ample_f1 {
        for &(es, ef) in &ample_f1 {
            pairs.push((
                ToricDivisor::hirzebruch_class(1, ls, lf).unwrap(),
                ToricDivisor::hirzebruch_class(1, es, ef).unwrap(),
            ));
        }
    }
    pairs
}

/// Largest k with k * e_sq <= n * l_dot_e.
fn k_max(pair: &SurfacePair, n: u64) -> u64 {
    let bound = i128::from(n) * i128::from(pair.l_dot_e()) / i128::from(pair.e_sq());
    u64::try_from(bound).unwrap()
}

#[test]
fn criterion_1_curve_formula() {
    let start = Instant::now();
    let tolerance = ratio(1, 500);
    for a in 1..=5i64 {
        for b in 1..=5i64 {
            let oracle = CurvePairOracle { l_degree: a, e_degree: b };
            let observed = truncated_nu(&oracle, 1000).unwrap();
            let exact = curve_nu(a, b).unwrap();
            let gap = (&observed - &exact).abs();
            assert!(gap <= tolerance, "degrees ({a},{b}): observed {observed}, exact {exact}");
        }
    }
    within_budget(start, Duration::from_secs(1), "criterion 1");
    println!("criterion 1 (curve ratio a/(2b) at n = 1000): PASS");
}

#[test]
fn criterion_2_closed_form_sound_on_catalog() {
    let start = Instant::now();
    let n = 200u64;
    let slack = ratio(2, 200);
    for (l, e) in catalog() {
        let pair = SurfacePair::from_divisors(&l, &e).unwrap();
        let bound = nu_lower_bound(&pair);
        let oracle = ToricPairOracle::new(l.clone(), e.clone()).unwrap();
        let observed = truncated_nu(&oracle, n).unwrap();
        assert!(
            observed >= bound.value() - &slack,
            "pair ({l}, {e}): truncation {observed} under bound {}",
            bound.value()
        );
    }

    let line = ToricDivisor::p2_o(1).unwrap();
    let quartic = ToricDivisor::p2_o(4).unwrap();
    let unit_oracle = ToricPairOracle::new(line.clone(), line.clone()).unwrap();
    assert_eq!(truncated_nu(&unit_oracle, n).unwrap(), ratio(1, 3));
    let unit_pair = SurfacePair::from_divisors(&line, &line).unwrap();
    assert_eq!(nu_lower_bound(&unit_pair).value(), &ratio(7, 24));
    let quartic_oracle = ToricPairOracle::new(quartic.clone(), line.clone()).unwrap();
    assert_eq!(truncated_nu(&quartic_oracle, n).unwrap(), ratio(4, 3));
    let quartic_pair = SurfacePair::from_divisors(&quartic, &line).unwrap();
    assert_eq!(nu_lower_bound(&quartic_pair).value(), &ratio(7, 6));

    within_budget(start, Duration::from_secs(60), "criterion 2");
    println!("criterion 2 (closed-form bound vs truncation on catalog): PASS");
}

#[test]
fn criterion_3_quadratic_count_with_linear_deficit() {
    let start = Instant::now();
    for (l, e) in catalog() {
        let pair = SurfacePair::from_divisors(&l, &e).unwrap();
        let oracle = ToricPairOracle::new(l.clone(), e.clone()).unwrap();

        // Calibrate the linear deficit coefficient on small n.
        let mut c = BigRational::zero();
        for n in 1..=20u64 {
            for k in 1..=k_max(&pair, n) {
                let predicted = morse_lower_bound(&pair, n, k).unwrap();
                let counted = q_u64(oracle.h0(n, k));
                let deficit = (&predicted - &counted) / q_u64(n);
                if deficit > c {
                    c = deficit;
                }
            }
        }

        // The calibrated linear slack must then cover every level up to 100.
        for n in 1..=100u64 {
            let allowance = &c * q_u64(n);
            for k in 1..=k_max(&pair, n) {
                let predicted = morse_lower_bound(&pair, n, k).unwrap();
                let counted = q_u64(oracle.h0(n, k));
                assert!(
                    counted >= &predicted - &allowance,
                    "pair ({l}, {e}) at n = {n}, k = {k}: count {counted} under {predicted} - {allowance}"
                );
            }
        }
    }
    within_budget(start, Duration::from_secs(120), "criterion 3");
    println!("criterion 3 (quadratic count bound with calibrated linear deficit): PASS");
}

fn tuples(r: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::new();
        for stem in &out {
            for v in lo..=hi {
                let mut t = stem.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn random_hodge_form(rng: &mut ChaCha8Rng) -> IntersectionForm {
    let r = rng.gen_range(2..=6usize);
    let diag: Vec<i64> = (0..r).map(|_| rng.gen_range(1..=4i64)).collect();
    let mut rows = vec![vec![0i64; r]; r];
    for (i, &d) in diag.iter().enumerate() {
        rows[i][i] = d;
    }
    for i in 0..r {
        for j in i + 1..r {
            let floor = ((diag[i] * diag[j]) as f64).sqrt().ceil() as i64;
            let v = rng.gen_range(floor..=20);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    IntersectionForm::new(rows).unwrap()
}

#[test]
fn criterion_4_solver_accuracy() {
    let start = Instant::now();

    // (a) rank-one forms have the closed-form solution x_i proportional to 1/d_i.
    for r in 2..=4usize {
        for d in tuples(r, 1, 5) {
            let rows: Vec<Vec<i64>> =
                d.iter().map(|&di| d.iter().map(|&dj| di * dj).collect()).collect();
            let form = IntersectionForm::new(rows).unwrap();
            let solved = solve_fixed_point(&form, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
            let harmonic: f64 = d.iter().map(|&di| 1.0 / di as f64).sum();
            for (i, &xi) in solved.x.coords().iter().enumerate() {
                let closed = (1.0 / d[i] as f64) / harmonic;
                assert!(
                    (xi - closed).abs() <= 1e-10,
                    "degrees {d:?}: x[{i}] = {xi}, closed form {closed}"
                );
            }
        }
    }

    // (b) random admissible forms: tight residual, small exact certificate.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e75_6365);
    for case in 0..100 {
        let form = random_hodge_form(&mut rng);
        let solved = solve_fixed_point(&form, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
            .unwrap_or_else(|e| panic!("case {case}, form {:?}: {e}", form.rows()));
        assert!(solved.residual <= 1e-12, "case {case}: residual {}", solved.residual);
        let cert = rationalize(&form, &solved, DEFAULT_DENOMINATOR_CAP, true).unwrap();
        assert!(cert.denominator() <= 10_000);
        cert.verify(&form).unwrap();
        for margin in cert.margins() {
            assert!(margin > BigRational::zero(), "case {case}: nonpositive margin {margin}");
        }
    }

    // (c) r = 2 cross-check against a brute grid over the segment.
    for rows in [
        vec![vec![1, 2], vec![2, 4]],
        vec![vec![1, 1], vec![1, 1]],
        vec![vec![2, 3], vec![3, 4]],
        vec![vec![1, 4], vec![4, 6]],
        vec![vec![3, 5], vec![5, 7]],
    ] {
        let (a, b, c) = (rows[0][0] as f64, rows[0][1] as f64, rows[1][1] as f64);
        let form = IntersectionForm::new(rows).unwrap();
        let solved = solve_fixed_point(&form, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        let mut best_t = 0.0;
        let mut best_gap = f64::INFINITY;
        for i in 1..100_000 {
            let t = i as f64 * 1e-5;
            let g1 = a * t + b * (1.0 - t);
            let g2 = b * t + c * (1.0 - t);
            let gap = (t * g1 - (1.0 - t) * g2).abs();
            if gap < best_gap {
                best_gap = gap;
                best_t = t;
            }
        }
        let xi = solved.x.coords()[0];
        assert!((xi - best_t).abs() <= 1e-3, "solver {xi} vs grid {best_t}");
    }

    within_budget(start, Duration::from_secs(30), "criterion 4");
    println!("criterion 4 (solver vs closed form, random forms, grid): PASS");
}

#[test]
fn criterion_5_four_divisor_pipeline() {
    let start = Instant::now();

    let configurations = [
        (vec![ToricDivisor::p2_o(1).unwrap(); 4], ToricDivisor::p2_o(4).unwrap()),
        (vec![ToricDivisor::p1xp1_o(1, 1).unwrap(); 4], ToricDivisor::p1xp1_o(4, 4).unwrap()),
    ];
    for (divisors, total) in configurations {
        let form = intersection_form_of(&divisors).unwrap();
        let solved = solve_fixed_point(&form, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        let cert = rationalize(&form, &solved, DEFAULT_DENOMINATOR_CAP, false).unwrap();
        cert.verify(&form).unwrap();
        assert_eq!(cert.multiplicities(), &[1, 1, 1, 1]);
        assert_eq!(cert.margins(), vec![ratio(1, 6); 4]);

        // The certified bound for nu(L; D_i) clears the multiplicity m_i = 1.
        for bound in cert.scaled_nu_lower_bounds() {
            assert_eq!(bound, ratio(7, 6));
            assert!(bound > ratio(1, 1));
        }
        // Independently, the closed form on (L, D_i) gives the same 7/6.
        let pair = SurfacePair::from_divisors(&total, &divisors[0]).unwrap();
        assert_eq!(nu_lower_bound(&pair).value(), &ratio(7, 6));
    }

    within_budget(start, Duration::from_secs(1), "criterion 5");
    println!("criterion 5 (four-divisor pipeline, margin 1/6, bound 7/6 > 1): PASS");
}

fn vec_q(xs: &[i64]) -> qlin::Vector {
    xs.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}

fn space_q(ambient: usize, gens: &[&[i64]]) -> qlin::Subspace {
    qlin::Subspace::new(ambient, gens.iter().map(|g| vec_q(g)).collect()).unwrap()
}

/// Per-flag maximum of the order-sum score over every basis drawn from the
/// pool.
fn brute_force_max_scores(ambient: usize, pool: &[qlin::Vector], flags: &TwoFlags) -> [u64; 2] {
    fn recurse(
        pool: &[qlin::Vector],
        ambient: usize,
        start_at: usize,
        chosen: &mut Vec<usize>,
        best: &mut [u64; 2],
        flags: &TwoFlags,
    ) {
        if chosen.len() == ambient {
            let mut span = qlin::SpanBuilder::new();
            for &c in chosen.iter() {
                span.insert(&pool[c]);
            }
            if span.rank() == ambient {
                for (which, levels) in [flags.first(), flags.second()].into_iter().enumerate() {
                    let score: u64 =
                        chosen.iter().map(|&c| qlin::flag_order(levels, &pool[c])).sum();
                    best[which] = best[which].max(score);
                }
            }
            return;
        }
        for idx in start_at..pool.len() {
            chosen.push(idx);
            recurse(pool, ambient, idx + 1, chosen, best, flags);
            chosen.pop();
        }
    }

    let mut best = [0u64; 2];
    recurse(pool, ambient, 0, &mut Vec::new(), &mut best, flags);
    best
}

#[test]
fn criterion_6_adapted_basis_identity() {
    let start = Instant::now();

    // Monomial identity: order sums along each line equal the summed section
    // counts of the twisted-down bundles, for every level b up to 6.
    let surface = ToricSurface::p2();
    let l = ToricDivisor::p2_o(1).unwrap();
    let d1 = surface.ray_divisor(0).unwrap();
    let d2 = surface.ray_divisor(1).unwrap();
    for b in 1..=6u64 {
        let space = FilteredSectionSpace::from_toric(&l, b, &[d1.clone(), d2.clone()]).unwrap();
        let basis = space.adapted_basis().unwrap();
        let sums = basis.order_sums();
        assert_eq!(sums, space.mu_sums(), "level {b}: order sums vs mu sums");
        for (i, d) in [&d1, &d2].into_iter().enumerate() {
            let profile = toric_profile_via_h0(&l, b, d).unwrap();
            assert_eq!(&space.profiles()[i], &profile, "level {b}, filtration {i}");
            assert_eq!(sums[i], filtration::mu_sum(&profile), "level {b}, filtration {i}");
        }
        assert!(is_adapted(&basis.order_matrix(), space.profiles()));
    }

    // Brute-force maximality on explicit low-dimensional flag pairs: no basis
    // drawn from the pool beats the adapted basis on either flag.
    let cases: Vec<(usize, TwoFlags)> = vec![
        (
            3,
            TwoFlags::new(
                3,
                vec![space_q(3, &[&[1, 1, 0], &[0, 0, 1]]), space_q(3, &[&[1, 1, 0]])],
                vec![space_q(3, &[&[0, 1, 0], &[0, 0, 1]]), space_q(3, &[&[0, 0, 1]])],
            )
            .unwrap(),
        ),
        (
            4,
            TwoFlags::new(
                4,
                vec![
                    space_q(4, &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]),
                    space_q(4, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]),
                    space_q(4, &[&[1, 0, 0, 0]]),
                ],
                vec![
                    space_q(4, &[&[0, 0, 0, 1], &[1, 0, 1, 0]]),
                    space_q(4, &[&[0, 0, 0, 1]]),
                ],
            )
            .unwrap(),
        ),
    ];
    for (ambient, flags) in cases {
        let space = FilteredSectionSpace::from_flags(flags.clone()).unwrap();
        let basis = space.adapted_basis().unwrap();
        let sums = basis.order_sums();
        assert!(is_adapted(&basis.order_matrix(), space.profiles()));
        let AdaptedBasis::Linear(vectors) = &basis else {
            panic!("linear model must yield a linear basis");
        };

        let mut pool: Vec<qlin::Vector> = Vec::new();
        for levels in [flags.first(), flags.second()] {
            for level in levels {
                pool.extend(level.basis().iter().cloned());
            }
        }
        for i in 0..ambient {
            let mut e = vec![0i64; ambient];
            e[i] = 1;
            pool.push(vec_q(&e));
        }
        pool.extend(vectors.iter().map(|v| v.vector.clone()));
        pool.sort();
        pool.dedup();

        let best = brute_force_max_scores(ambient, &pool, &flags);
        assert_eq!(sums[0], best[0], "flag 1 order sum not maximal");
        assert_eq!(sums[1], best[1], "flag 2 order sum not maximal");
    }

    within_budget(start, Duration::from_secs(5), "criterion 6");
    println!("criterion 6 (adapted-basis order identity and brute maximality): PASS");
}

#[test]
fn criterion_7_epsilon_level_search() {
    let start = Instant::now();

    let line = ToricDivisor::p2_o(1).unwrap();
    let l = ToricDivisor::p2_o(4).unwrap();
    let pair = SurfacePair::from_divisors(&l, &line).unwrap();
    let pairs = vec![pair; 4];
    let oracles: Vec<ToricPairOracle> =
        (0..4).map(|_| ToricPairOracle::new(l.clone(), line.clone()).unwrap()).collect();
    let refs: Vec<&dyn SectionOracle> = oracles.iter().map(|o| o as &dyn SectionOracle).collect();

    let report = find_epsilon_b(&pairs, &refs, &[1, 1, 1, 1], &ratio(1, 10), 100).unwrap();
    assert_eq!(report.b, 1);
    for d in &report.per_divisor {
        assert_eq!(d.section_sum, 20);
        assert_eq!(d.h0_bl, 15);
        assert_eq!(d.required, ratio(33, 2));
    }

    let rejected = find_epsilon_b(&pairs, &refs, &[1, 1, 1, 1], &ratio(2, 5), 100);
    assert!(
        matches!(rejected, Err(Error::EpsilonPrecondition(_))),
        "slack 2/5 must fail the growth precondition"
    );

    within_budget(start, Duration::from_secs(1), "criterion 7");
    println!("criterion 7 (level search: b = 1 at slack 1/10, 2/5 rejected): PASS");
}

#[test]
fn criterion_8_certificate_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6365_7274);
    for case in 0..100 {
        let form = random_hodge_form(&mut rng);
        let solved = solve_fixed_point(&form, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        let cert = rationalize(&form, &solved, DEFAULT_DENOMINATOR_CAP, true).unwrap();
        cert.verify(&form).unwrap_or_else(|e| panic!("case {case} failed to re-verify: {e}"));

        // Any single multiplicity off by one must be rejected.
        for i in 0..cert.r() {
            for delta in [-1i64, 1] {
                let mut m = cert.multiplicities().to_vec();
                let shifted = m[i] as i64 + delta;
                if shifted < 0 {
                    continue;
                }
                m[i] = shifted as u64;
                let tampered = NuCertificate::from_parts(
                    m,
                    cert.denominator(),
                    cert.per_divisor().to_vec(),
                    cert.residual(),
                    cert.assumed_ample(),
                );
                match tampered {
                    Ok(t) => assert!(
                        t.verify(&form).is_err(),
                        "case {case}: multiplicity {i} shifted by {delta} passed"
                    ),
                    Err(_) => {}
                }
            }
        }

        // Any single matrix entry off by one must be rejected.
        let rows = form.rows();
        for i in 0..form.r() {
            for j in 0..form.r() {
                for delta in [-1i64, 1] {
                    let mut tampered_rows = rows.clone();
                    tampered_rows[i][j] += delta;
                    match IntersectionForm::new(tampered_rows) {
                        Ok(other) => assert!(
                            cert.verify(&other).is_err(),
                            "case {case}: entry ({i},{j}) shifted by {delta} passed"
                        ),
                        Err(_) => {}
                    }
                }
            }
        }
    }
    within_budget(start, Duration::from_secs(10), "criterion 8");
    println!("criterion 8 (random certificates re-verify, perturbations rejected): PASS");
}
