use super::*;
use crate::exact::RationalMatrix;

fn z(n: usize) -> Lattice {
    Lattice::identity(n).unwrap()
}

fn h2(v: u64) -> HeightBudget {
    HeightBudget::from_integer_h_squared(v)
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn p(l: &Lattice, d: usize, b: u64) -> u64 {
    enumerate_primitive(l, d, &h2(b), &CountOptions::direct()).unwrap().count
}

#[test]
fn primitive_examples() {
    assert_eq!(p(&z(2), 1, 1), 2);
    let r = enumerate_primitive(&z(2), 1, &h2(4), &CountOptions::materialized()).unwrap();
    assert_eq!(r.count, 4);
    let coords: Vec<_> = r
        .sublattices
        .unwrap()
        .iter()
        .map(|s| s.coords().to_i64_rows().unwrap()[0].clone())
        .collect();
    assert_eq!(coords, vec![vec![0, 1], vec![1, 0], vec![1, -1], vec![1, 1]]);
    let skew = Lattice::new(RationalMatrix::from_i64_rows(&[&[2, 1, 0], &[0, 3, 1], &[1, 0, 4]]).unwrap()).unwrap();
    assert_eq!(p(&skew, 1, 3), 0);
    assert_eq!(p(&skew, 2, 10), 0);
}

#[test]
fn primitive_rank_errors() {
    assert!(matches!(
        enumerate_primitive(&z(3), 0, &h2(4), &CountOptions::default()),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        enumerate_primitive(&z(3), 3, &h2(4), &CountOptions::default()),
        Err(Error::Argument(_))
    ));
    let limits = Limits { max_rank: 2, ..Limits::default() };
    assert!(matches!(
        enumerate_primitive(&z(3), 1, &h2(4), &CountOptions::direct().with_limits(limits)),
        Err(Error::Capacity(_))
    ));
    let limits = Limits { max_vectors: 10, ..Limits::default() };
    assert!(matches!(
        enumerate_primitive(&z(3), 1, &h2(100), &CountOptions::direct().with_limits(limits)),
        Err(Error::Capacity(_))
    ));
}

#[test]
fn known_small_counts() {
    // Independent brute force over Plücker coordinates.
    let expect = [(1, 6), (2, 30), (3, 62), (4, 74), (5, 170), (9, 458), (25, 3194)];
    for (b, want) in expect {
        assert_eq!(p(&z(4), 2, b), want, "H^2 = {b}");
    }
    for (b, want) in [(1, 3), (2, 9), (4, 13), (9, 49), (25, 205)] {
        assert_eq!(p(&z(3), 1, b), want);
        assert_eq!(p(&z(3), 2, b), want);
    }
}

#[test]
fn count_all_examples() {
    let c = |b| count_all(&z(2), 1, &h2(b), &CountOptions::default()).unwrap().count;
    assert_eq!(c(4), 6);
    assert_eq!(c(1), 2);
    let r = count_all(&z(2), 1, &h2(4), &CountOptions::materialized()).unwrap();
    assert_eq!(r.sublattices.as_ref().unwrap().len(), 6);
    assert_eq!(r.sublattices.unwrap().iter().filter(|s| !s.is_primitive()).count(), 2);
    for b in [1, 4, 9, 20] {
        assert!(count_all(&z(3), 2, &h2(b), &CountOptions::default()).unwrap().count >= p(&z(3), 2, b));
    }
}

#[test]
fn avoiding_examples() {
    let l = z(2);
    let e1 = l.sublattice(&IntegerMatrix::from_i64_rows(&[&[1, 0]]).unwrap()).unwrap();
    let r = count_avoiding(&l, 1, &h2(4), &e1, &CountOptions::default()).unwrap();
    assert_eq!(r.count, 3);
    assert_eq!(count_avoiding(&l, 1, &h2(0), &e1, &CountOptions::default()).unwrap().count, 0);
    let l3 = z(3);
    let plane = l3.sublattice(&IntegerMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]]).unwrap()).unwrap();
    assert!(matches!(
        count_avoiding(&l3, 2, &h2(4), &plane, &CountOptions::default()),
        Err(Error::Argument(_))
    ));
}

#[test]
fn split_examples() {
    let l = z(3);
    let (p1, p2) = split_p1_p2(&l, 2, &h2(4), &ints(&[0, 0, 1]), &CountOptions::default()).unwrap();
    assert_eq!(p2, 4);
    assert_eq!(p1 + p2, p(&l, 2, 4));
    let below = HeightBudget::from_h_squared(q("1/2")).unwrap();
    assert_eq!(split_p1_p2(&l, 2, &below, &ints(&[0, 0, 1]), &CountOptions::default()).unwrap(), (0, 0));
    assert!(matches!(
        split_p1_p2(&l, 2, &h2(4), &ints(&[0, 0, 2]), &CountOptions::default()),
        Err(Error::NotPrimitive(_))
    ));
}

#[test]
fn flag_examples() {
    let l = z(3);
    let all = count_flags(&l, 1, 2, &h2(1), false, &CountOptions::default()).unwrap();
    assert_eq!(all.count, 6);
    assert_eq!(count_flags(&l, 1, 2, &HeightBudget::from_h_squared(q("1/2")).unwrap(), false, &CountOptions::default()).unwrap().count, 0);
    for b in [1, 16, 100] {
        let all = count_flags(&l, 1, 2, &h2(b), false, &CountOptions::default()).unwrap().count;
        let generic = count_flags(&l, 1, 2, &h2(b), true, &CountOptions::default()).unwrap().count;
        assert!(generic <= all);
    }
    assert!(matches!(count_flags(&l, 2, 2, &h2(4), false, &CountOptions::default()), Err(Error::Argument(_))));
}

#[test]
fn affine_ball_examples() {
    let half = vec![q("1/2"), q("1/2")];
    assert_eq!(count_affine_ball(&z(2), &half, &SquaredMagnitude::from_integer(1), &Limits::default()).unwrap(), 4);
    let zero = vec![q("0"), q("0")];
    assert_eq!(count_affine_ball(&z(2), &zero, &SquaredMagnitude::zero(), &Limits::default()).unwrap(), 1);
    for k in 0..6u64 {
        let c = count_affine_ball(&z(1), &[q("0")], &SquaredMagnitude::from_integer(k * k), &Limits::default()).unwrap();
        assert_eq!(c, 2 * k + 1);
    }
    // A shift off the span only shrinks the radius.
    let line = Lattice::new(RationalMatrix::from_i64_rows(&[&[1, 0]]).unwrap()).unwrap();
    let off = vec![q("0"), q("1")];
    assert_eq!(count_affine_ball(&line, &off, &SquaredMagnitude::from_integer(2), &Limits::default()).unwrap(), 3);
}

#[test]
fn duality_examples() {
    let l = z(4);
    for b in [1, 4, 9, 30] {
        let dual = duality_count(&l, 3, &h2(b), &CountOptions::default()).unwrap().count;
        assert_eq!(dual, p(&l, 1, b));
    }
    assert_eq!(duality_count(&l, 2, &HeightBudget::from_h_squared(q("1/2")).unwrap(), &CountOptions::default()).unwrap().count, 0);
}

#[test]
fn duality_materializes_in_the_original_lattice() {
    let l = Lattice::new(RationalMatrix::from_i64_rows(&[&[2, 1, 0], &[0, 3, 1], &[1, 0, 4]]).unwrap()).unwrap();
    let budget = h2(200);
    let direct = enumerate_primitive(&l, 2, &budget, &CountOptions::materialized().with_strategy(Strategy::Direct)).unwrap();
    let dual = enumerate_primitive(&l, 2, &budget, &CountOptions::materialized().with_strategy(Strategy::Dual)).unwrap();
    assert_eq!(direct.count, dual.count);
    let a: Vec<_> = direct.sublattices.unwrap().iter().map(|s| s.coords().clone()).collect();
    let b: Vec<_> = dual.sublattices.unwrap().iter().map(|s| s.coords().clone()).collect();
    assert_eq!(a, b);
}

#[test]
fn result_json_shape() {
    let r = enumerate_primitive(&z(2), 1, &h2(2), &CountOptions::materialized()).unwrap();
    let v = r.to_json().unwrap();
    assert_eq!(v["count"], 4);
    assert_eq!(v["params"]["variant"], "primitive");
    assert_eq!(v["sublattices"].as_array().unwrap().len(), 4);
    assert_eq!(v["h_squared"], "2");
}
