#![allow(dead_code)]

use std::sync::OnceLock;

use cantorflow::cantor::{ClopenSet, IntFunction, SymbolicSystem, Window};
use cantorflow::rokhlin::{auto_nest, SliceChain, DEFAULT_MAX_STEPS};
use rand::Rng;

pub const DYADIC: &str = "odometer base=2";
pub const TRIADIC: &str = "odometer base=3";
pub const FIBONACCI: &str = "substitution a:ab,b:a";

/// `S_n = [0^n]` for `n = 1..=count`.
pub fn zeros_chain(desc: &str, count: usize) -> SliceChain {
    let sys = SymbolicSystem::parse(desc).unwrap();
    let slices: Vec<ClopenSet> = (1..=count)
        .map(|k| ClopenSet::parse_cylinder(&sys, &"0".repeat(k)).unwrap())
        .collect();
    SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS).unwrap()
}

pub fn nested_chain(desc: &str, count: usize) -> SliceChain {
    let sys = SymbolicSystem::parse(desc).unwrap();
    let slices = auto_nest(&sys, &sys.default_point(), count, DEFAULT_MAX_STEPS).unwrap();
    SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS).unwrap()
}

/// Long chains shared across tests: dyadic, triadic, Fibonacci.
pub fn chains() -> &'static [SliceChain; 3] {
    static C: OnceLock<[SliceChain; 3]> = OnceLock::new();
    C.get_or_init(|| {
        [
            zeros_chain(DYADIC, 9),
            zeros_chain(TRIADIC, 7),
            nested_chain(FIBONACCI, 6),
        ]
    })
}

/// A nonempty random union of atoms of `set` on a window at least `depth`
/// deep.
pub fn random_subset<R: Rng>(set: &ClopenSet, depth: usize, rng: &mut R) -> ClopenSet {
    let sys = set.system();
    let w = sys.depth_window(depth).hull(&set.window());
    let words = set.refine(w).unwrap().words().to_vec();
    let mut pick: Vec<_> = words
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    if pick.is_empty() {
        pick.push(words[rng.gen_range(0..words.len())].clone());
    }
    ClopenSet::from_words(sys, w, pick).unwrap()
}

/// A random function on `slice` vanishing on `zero_on`.
pub fn random_off<R: Rng>(
    slice: &ClopenSet,
    zero_on: &ClopenSet,
    window: Window,
    rng: &mut R,
) -> IntFunction {
    let rest = slice.difference(zero_on).unwrap();
    if rest.is_empty() {
        return IntFunction::zero(slice);
    }
    IntFunction::random(&rest, window, 5, rng)
        .unwrap()
        .extend_by_zero(slice)
        .unwrap()
}
