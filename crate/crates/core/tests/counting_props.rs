mod common;

use common::{box_points, ints, lattice, plucker_count, primitive_vector_count, q};
use grasscount_core::arithmetic::sigma_d;
use grasscount_core::counting::{
    count_affine_ball, count_all, count_avoiding, count_flags, duality_count, enumerate_primitive, split_p1_p2,
    CountOptions, HeightBudget, Strategy as Route,
};
use grasscount_core::exact::saturate;
use grasscount_core::{IntegerMatrix, Lattice, Limits, Rational, SquaredMagnitude};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn budget(h2: &Rational) -> HeightBudget {
    HeightBudget::from_h_squared(h2.clone()).unwrap()
}

fn p(l: &Lattice, d: usize, h2: &Rational) -> u64 {
    enumerate_primitive(l, d, &budget(h2), &CountOptions::default()).unwrap().count
}

fn h2_for(l: &Lattice, d: usize, k: i64) -> Rational {
    // Scale the budget to the lattice so that counts stay small but nonzero.
    let base = l.successive_minima().unwrap().lambda_squared[..d].iter().fold(q(1, 1), |acc, s| acc * s.value());
    base * q(k, 2)
}

#[test]
fn plucker_oracle_on_z4() {
    let z4 = Lattice::identity(4).unwrap();
    for h2 in [1, 2, 3, 5, 8, 13, 25, 36] {
        assert_eq!(p(&z4, 2, &q(h2, 1)), plucker_count(&z4, &q(h2, 1)), "H^2 = {h2}");
    }
    for h2 in [1, 2, 4, 9, 25, 100] {
        let want = primitive_vector_count(&z4, &q(h2, 1));
        assert_eq!(p(&z4, 1, &q(h2, 1)), want);
        assert_eq!(p(&z4, 3, &q(h2, 1)), want);
    }
}

#[test]
fn known_counts_for_integer_lattices() {
    let z2 = Lattice::identity(2).unwrap();
    for (h2, want) in [(1, 2), (2, 4), (4, 4), (9, 8), (25, 24), (100, 96)] {
        assert_eq!(p(&z2, 1, &q(h2, 1)), want);
    }
    let z4 = Lattice::identity(4).unwrap();
    for (h, want) in [(1, 6), (2, 74), (3, 458), (4, 1322), (5, 3194), (6, 7994)] {
        assert_eq!(p(&z4, 2, &q(h * h, 1)), want, "H = {h}");
    }
}

#[test]
fn count_all_equals_hnf_enumeration_on_z2() {
    // Rank-1 sublattices of Z^2 of covolume <= H: multiples m v of primitive v.
    let z2 = Lattice::identity(2).unwrap();
    for h2 in [1i64, 4, 10, 50] {
        let brute: u64 = box_points(&z2, &q(h2, 1)).len() as u64 / 2;
        let all = count_all(&z2, 1, &budget(&q(h2, 1)), &CountOptions::default()).unwrap().count;
        assert_eq!(all, brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_one_matches_box_scan(l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)), k in 1i64..=12) {
        let h2 = h2_for(&l, 1, k);
        prop_assert_eq!(p(&l, 1, &h2), primitive_vector_count(&l, &h2));
    }

    #[test]
    fn rank_two_matches_plucker(l in (3usize..=4).prop_flat_map(|n| lattice(n, 2)), k in 1i64..=6) {
        let h2 = h2_for(&l, 2, k);
        prop_assert_eq!(p(&l, 2, &h2), plucker_count(&l, &h2));
    }

    #[test]
    fn duality_is_exact(l in (2usize..=4).prop_flat_map(|n| lattice(n, 3)), k in 1i64..=6) {
        let n = l.rank();
        for d in 1..n {
            let h2 = h2_for(&l, d, k);
            let direct = enumerate_primitive(&l, d, &budget(&h2), &CountOptions::direct()).unwrap().count;
            let dual = duality_count(&l, d, &budget(&h2), &CountOptions::default()).unwrap().count;
            prop_assert_eq!(direct, dual);
            let polar_side = budget(&(&h2 / l.det_squared().value()));
            let polar = enumerate_primitive(&l.polar(), n - d, &polar_side, &CountOptions::direct()).unwrap().count;
            prop_assert_eq!(direct, polar);
        }
    }

    #[test]
    fn scale_equivariance(l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)), k in 1i64..=6, c in prop::sample::select(vec![(2, 1), (1, 3), (3, 2)])) {
        let c = q(c.0, c.1);
        let scaled = l.scaled(&c).unwrap();
        for d in 1..l.rank() {
            let h2 = h2_for(&l, d, k);
            let factor = num_traits::Pow::pow(&c, 2 * d as u32);
            prop_assert_eq!(p(&scaled, d, &(&h2 * factor)), p(&l, d, &h2));
        }
    }

    #[test]
    fn moebius_relation(l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)), k in 1i64..=10) {
        for d in 1..l.rank() {
            let h2 = h2_for(&l, d, k) * q(4, 1);
            let all = count_all(&l, d, &budget(&h2), &CountOptions::default()).unwrap().count;
            let mut total = 0u64;
            let mut m = 1i64;
            loop {
                let b = &h2 / q(m * m, 1);
                let pm = p(&l, d, &b);
                if pm == 0 {
                    break;
                }
                total += (sigma_d(d as u32, m as u64) * BigInt::from(pm).to_biguint().unwrap()).to_u64().unwrap();
                m += 1;
            }
            prop_assert_eq!(all, total);
        }
    }

    #[test]
    fn split_partitions_the_count(
        l in (3usize..=4).prop_flat_map(|n| lattice(n, 3)),
        k in 1i64..=6,
        axis in 0usize..4,
    ) {
        let n = l.rank();
        let axis = axis % n;
        let mut v = vec![BigInt::zero(); n];
        v[axis] = BigInt::from(1);
        for d in 2..n {
            let h2 = h2_for(&l, d, k);
            let (p1, p2) = split_p1_p2(&l, d, &budget(&h2), &v, &CountOptions::default()).unwrap();
            prop_assert_eq!(p1 + p2, p(&l, d, &h2));
            let bar = l.project_quotient(&v).unwrap();
            let reduced = &h2 / l.norm_squared(&v).value();
            prop_assert_eq!(p2, p(&bar, d - 1, &reduced));
        }
    }

    #[test]
    fn avoidance_complements_the_meeting_count(
        l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)),
        k in 1i64..=8,
        row in prop::collection::vec(-2i64..=2, 3),
    ) {
        let n = l.rank();
        let row: Vec<BigInt> = row[..n].iter().map(|&x| BigInt::from(x)).collect();
        prop_assume!(row.iter().any(|x| !x.is_zero()));
        let s = l.sublattice(&saturate(&IntegerMatrix::from_rows(&[row]).unwrap()).unwrap()).unwrap();
        for d in 1..n {
            let h2 = h2_for(&l, d, k);
            let listed = enumerate_primitive(&l, d, &budget(&h2), &CountOptions::materialized()).unwrap();
            let subs = listed.sublattices.unwrap();
            let meeting = subs
                .iter()
                .filter(|b| b.coords().stack(s.coords()).unwrap().rank() < d + s.rank())
                .count() as u64;
            let avoiding = count_avoiding(&l, d, &budget(&h2), &s, &CountOptions::default()).unwrap().count;
            prop_assert_eq!(avoiding + meeting, listed.count);
        }
    }

    #[test]
    fn counts_are_monotone(l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)), ks in prop::collection::vec(1i64..=10, 4)) {
        let mut ks = ks;
        ks.sort();
        for d in 1..l.rank() {
            let counts: Vec<u64> = ks.iter().map(|&k| p(&l, d, &h2_for(&l, d, k))).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            let all: Vec<u64> = ks
                .iter()
                .map(|&k| count_all(&l, d, &budget(&h2_for(&l, d, k)), &CountOptions::default()).unwrap().count)
                .collect();
            prop_assert!(all.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn materialized_lists_are_sorted_and_within_budget(l in (2usize..=3).prop_flat_map(|n| lattice(n, 3)), k in 1i64..=8) {
        for d in 1..l.rank() {
            let h2 = h2_for(&l, d, k);
            for route in [Route::Direct, Route::Dual] {
                let r = enumerate_primitive(&l, d, &budget(&h2), &CountOptions::materialized().with_strategy(route)).unwrap();
                let subs = r.sublattices.unwrap();
                prop_assert_eq!(subs.len() as u64, r.count);
                let dets: Vec<SquaredMagnitude> = subs.iter().map(|s| s.det_squared()).collect();
                prop_assert!(dets.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(dets.iter().all(|x| x.value() <= &h2));
                prop_assert!(subs.iter().all(|s| s.is_primitive() && s.rank() == d));
            }
        }
    }

    #[test]
    fn flag_counts_match_pairwise_enumeration(k in 1i64..=12, skew in prop::sample::select(vec![1i64, 2, 3])) {
        // Lattice diag(1, 1, skew); every rank-1 and rank-2 sublattice has det^2 >= 1.
        let l = Lattice::diagonal(&[q(1, 1), q(1, 1), q(skew, 1)]).unwrap();
        let h2 = q(k * k, 1);
        // Height^2 = det_1^4 det_2^4 <= H^2 and both factors are >= 1.
        let ones = enumerate_primitive(&l, 1, &budget(&q(k, 1)), &CountOptions::materialized()).unwrap().sublattices.unwrap();
        let twos = enumerate_primitive(&l, 2, &budget(&q(k, 1)), &CountOptions::materialized()).unwrap().sublattices.unwrap();
        let mut all = 0u64;
        let mut generic = 0u64;
        for s1 in &ones {
            for s2 in &twos {
                if s2.coords().stack(s1.coords()).unwrap().rank() != 2 {
                    continue;
                }
                let a = num_traits::Pow::pow(s1.det_squared().value(), 2u32);
                let b = num_traits::Pow::pow(s2.det_squared().value(), 2u32);
                if a * b > h2 {
                    continue;
                }
                all += 1;
                let inner = s2.as_lattice().minima_filtration(1).unwrap();
                let w = inner.basis();
                let stacked = s1.basis().stack(&w).unwrap();
                if stacked.rank() == 2 {
                    generic += 1;
                }
            }
        }
        let got = count_flags(&l, 1, 2, &budget(&h2), false, &CountOptions::default()).unwrap().count;
        prop_assert_eq!(got, all);
        let got = count_flags(&l, 1, 2, &budget(&h2), true, &CountOptions::default()).unwrap().count;
        prop_assert_eq!(got, generic);
    }

    #[test]
    fn affine_ball_matches_box_scan(
        l in lattice(2, 3),
        t in prop::collection::vec((-5i64..=5, 1i64..=4), 2),
        r in 1i64..=12,
    ) {
        let shift: Vec<Rational> = t.iter().map(|&(a, b)| q(a, b)).collect();
        let r2 = q(r, 2);
        let got = count_affine_ball(&l, &shift, &SquaredMagnitude::new(r2.clone()).unwrap(), &Limits::default()).unwrap();
        // Oracle: lattice points x B with |x B - t|^2 <= r2, by scanning around the
        // rounded coordinates of t.
        let b = l.basis();
        let inv = b.inverse().unwrap();
        let tc: Vec<f64> = (0..2)
            .map(|j| (0..2).map(|i| (&shift[i] * &inv[(i, j)]).to_f64().unwrap()).sum())
            .collect();
        let ginv = l.gram().inverse().unwrap();
        let reach: Vec<i64> = (0..2).map(|i| (&r2 * &ginv[(i, i)]).to_f64().unwrap().sqrt() as i64 + 2).collect();
        let mut want = 0u64;
        for x0 in tc[0] as i64 - reach[0]..=tc[0] as i64 + reach[0] {
            for x1 in tc[1] as i64 - reach[1]..=tc[1] as i64 + reach[1] {
                let v = l.vector(&ints(&[x0, x1]));
                let d2: Rational = v.iter().zip(&shift).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 <= r2 {
                    want += 1;
                }
            }
        }
        prop_assert_eq!(got, want);
    }
}

#[test]
fn duality_strategy_routes_agree_on_skew_lattices() {
    let skew = Lattice::diagonal(&[q(1, 1), q(1, 1), q(1, 1), q(5, 1)]).unwrap();
    for h2 in [1i64, 4, 12] {
        let b = budget(&q(h2, 1));
        for d in 1..4 {
            let direct = enumerate_primitive(&skew, d, &b, &CountOptions::direct()).unwrap().count;
            let dual = enumerate_primitive(&skew, d, &b, &CountOptions::default().with_strategy(Route::Dual)).unwrap().count;
            assert_eq!(direct, dual, "d = {d}, H^2 = {h2}");
        }
    }
}
