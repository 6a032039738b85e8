mod common;

use cantorflow::cantor::{IntFunction, InvariantMeasure, PointCode, SymbolicSystem};
use cantorflow::ktheory::{beta, beta_of_extension, iota, pushforward, K0Cache};
use cantorflow::rokhlin::{CantorMap, SliceChain, TowerDecomposition, DEFAULT_MAX_STEPS};
use cantorflow::suspension::{Roof, Suspension};
use cantorflow::Error;
use common::{chains, random_off, random_subset};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain(i: usize) -> &'static SliceChain {
    &chains()[i]
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn random_point<R: Rng>(sys: &SymbolicSystem, rng: &mut R) -> PointCode {
    if sys.is_odometer() {
        let b = sys.symbols_at(0) as u8;
        let prefix = (0..rng.gen_range(0..6))
            .map(|_| rng.gen_range(0..b))
            .collect();
        let period = (0..rng.gen_range(1..3))
            .map(|_| rng.gen_range(0..b))
            .collect();
        sys.periodic_point(prefix, period).unwrap()
    } else {
        sys.point_step(&sys.default_point(), rng.gen_range(-20..=20))
            .unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn iota_ignores_pushforward_off_the_tops(i in 0usize..3, n in 0usize..3, seed: u64) {
        let c = chain(i);
        let td = c.tower(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = c.system().depth_window((n + 3).min(6));
        let f = random_off(c.slice(n), &td.pre_inner().unwrap(), window, &mut rng);
        let pushed = pushforward(td.outer(), &f).unwrap();
        prop_assert!(iota(td, &f).unwrap().same(&iota(td, &pushed).unwrap()).unwrap());
    }

    #[test]
    fn return_map_factors_through_t(i in 0usize..3, n in 0usize..4, seed: u64) {
        let c = chain(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_subset(c.slice(n + 1), n + 3, &mut rng);
        let lhs = c.induced(n + 1).forward(&a).unwrap();
        let rhs = c.induced(n).forward(&c.tower(n).t_apply(&a).unwrap()).unwrap();
        prop_assert!(lhs.same(&rhs).unwrap());
    }

    #[test]
    fn iota_is_functorial(i in 0usize..3, n in 0usize..3, seed: u64) {
        let c = chain(i);
        let direct = match TowerDecomposition::new(c.induced(n).clone(), c.slice(n + 2), DEFAULT_MAX_STEPS) {
            Ok(td) => td,
            Err(Error::Disjointness) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = IntFunction::random(c.slice(n), c.system().depth_window(n + 3), 5, &mut rng).unwrap();
        let two = iota(c.tower(n + 1), &iota(c.tower(n), &f).unwrap()).unwrap();
        prop_assert!(two.same(&iota(&direct, &f).unwrap()).unwrap());
    }

    #[test]
    fn iota_intertwines_return_maps(i in 0usize..3, n in 0usize..3, seed: u64) {
        let c = chain(i);
        let td = c.tower(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = td.pre_inner().unwrap();
        let f = IntFunction::random(&pre, c.system().depth_window(n + 3), 5, &mut rng).unwrap().extend_by_zero(c.slice(n)).unwrap();
        let lhs = pushforward(c.induced(n + 1), &iota(td, &f).unwrap()).unwrap();
        let rhs = iota(td, &pushforward(td.outer(), &f).unwrap()).unwrap();
        prop_assert!(lhs.same(&rhs).unwrap());
    }

    #[test]
    fn beta_does_not_see_the_extension(i in 0usize..3, n in 0usize..3, seed: u64) {
        let c = chain(i);
        let td = c.tower(n);
        let mu = InvariantMeasure::new(c.system());
        let mut cache = K0Cache::new(c.system(), &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = td.pre_inner().unwrap();
        let window = c.system().depth_window(n + 2);
        let f = IntFunction::random(&pre, window, 5, &mut rng).unwrap();
        let zero_ext = f.extend_by_zero(c.slice(n)).unwrap();
        let other = zero_ext.add(&random_off(c.slice(n), &pre, window, &mut rng)).unwrap();
        let b = beta(td, &f).unwrap();
        prop_assert!(b.same(&beta_of_extension(td, &zero_ext).unwrap()).unwrap());
        prop_assert!(cache.same_class(&b, &beta_of_extension(td, &other).unwrap()).unwrap());
    }

    #[test]
    fn flow_group_law(num in proptest::collection::vec(-40i64..=40, 3), den in proptest::collection::vec(1i64..=12, 3), fib: bool, seed: u64) {
        let sys = SymbolicSystem::parse(if fib { common::FIBONACCI } else { common::DYADIC }).unwrap();
        let susp = if fib { Suspension::new(&sys, Roof::parse(&sys, "a=1,b=3/2").unwrap()) } else { Suspension::mapping_torus(&sys) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&sys, &mut rng);
        let (r, s, t) = (rational(num[0], den[0]), rational(num[1], den[1]), rational(num[2], den[2]));
        let p = susp.normalize(&x, &r).unwrap();
        let two = susp.flow_step(&susp.flow_step(&p, &s).unwrap(), &t).unwrap();
        let one = susp.flow_step(&p, &(&s + &t)).unwrap();
        prop_assert_eq!(&two, &one);
        prop_assert_eq!(&one, &susp.normalize(&x, &(&r + &s + &t)).unwrap());
        prop_assert!(one.t >= rational(0, 1) && one.t < susp.roof().at(&one.base).unwrap());
    }
}

#[test]
fn composed_t_maps_reach_deeper_slices() {
    for c in chains() {
        for n in 0..c.stages() {
            for k in 0..=4 {
                if n + k + 2 > c.stages() {
                    continue;
                }
                let mut a = c.tower(n + k + 1).pre_inner().unwrap();
                for m in (n..=n + k).rev() {
                    a = c.tower(m).t_apply(&a).unwrap();
                }
                let expected = c.induced(n).backward(c.slice(n + k + 2)).unwrap();
                assert!(
                    a.same(&expected).unwrap(),
                    "{} n={n} k={k}",
                    c.system().descriptor()
                );
            }
        }
    }
}

#[test]
fn decompositions_partition_and_satisfy_kac() {
    for c in chains() {
        let mu = InvariantMeasure::new(c.system());
        for td in c.towers() {
            let r = td.check(&mu).unwrap();
            assert!(r.all(), "{r:?}");
            if c.system().is_odometer() {
                assert!(r.kac_lhs.is_exact());
            }
        }
    }
}
