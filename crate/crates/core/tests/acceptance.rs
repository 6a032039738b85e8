//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL` line
//! with its measurements; run with `--nocapture` to see them.

mod common;

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cantorflow::cantor::{ClopenSet, IntFunction, InvariantMeasure, SymbolicSystem};
use cantorflow::kernels::{convergence_study, IdentityErrors};
use cantorflow::ktheory::{
    delta_steps, iota, middle_square, order_iso_check, pushforward, right_square, verify_exact_row,
    K0Cache, OrderIsoConfig,
};
use cantorflow::rokhlin::{CantorMap, InducedSystem, TowerDecomposition, DEFAULT_MAX_STEPS};
use cantorflow::suspension::{
    parse_rational, verify_flowbox_properties, FlowboxStructure, Suspension,
};
use common::{
    chains, nested_chain, random_off, random_subset, zeros_chain, DYADIC, FIBONACCI, TRIADIC,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: usize, pass: bool, elapsed: Duration, detail: String) {
    let line = format!(
        "criterion {id}: {} ({:.2} s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{line}");
}

/// `(1, …, 1, 0)` with `b^k − 1` ones, run-length encoded.
fn expected_factors(b: usize, k: u32) -> Vec<(String, usize)> {
    let ones = b.pow(k) - 1;
    let mut v = Vec::new();
    if ones > 0 {
        v.push(("1".to_string(), ones));
    }
    v.push(("0".to_string(), 1));
    v
}

fn odometer_dimension_group(id: usize, desc: &str, b: usize) {
    let start = Instant::now();
    let c = zeros_chain(desc, 8);
    let mu = InvariantMeasure::new(c.system());
    // [0^{n+1}] first returns to [0^n] after b steps
    let heights = c
        .towers()
        .iter()
        .all(|td| td.heights() == vec![b as u64 - 1]);
    let r = order_iso_check(
        &c,
        &mu,
        &OrderIsoConfig {
            depth: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let mut times = true;
    let mut traces = true;
    for e in &r.stages {
        let scale = BigInt::from(b).pow(e.stage as u32);
        let expected = BigRational::new(BigInt::from(1), scale).to_string();
        traces &= e.slice_trace == expected;
        if e.stage < 8 {
            times &= e.iota_on_constants == Some(b as i64);
        }
    }
    let factors = r
        .depth_factors
        .iter()
        .all(|(k, f)| *f == expected_factors(b, *k as u32));
    let model = r.model_generator.as_deref() == Some(format!("1/{}", b.pow(8)).as_str());
    let positivity =
        r.positivity.disagree == 0 && r.positivity.undetermined == 0 && r.positivity.samples > 0;
    let iso = r.compatible && r.injective && r.surjective;
    let elapsed = start.elapsed();
    let pass = heights
        && times
        && traces
        && factors
        && model
        && positivity
        && iso
        && elapsed < Duration::from_secs(10);
    report(
        id,
        pass,
        elapsed,
        format!(
            "base {b}: J = {{{}}} {heights}, x{b} on constants {times}, traces b^-n {traces}, factors {factors}, \
             model 1/{b}^8 {model}, iso {iso}, positivity {}/{} agree"
        , b - 1, r.positivity.agree, r.positivity.samples),
    );
}

#[test]
fn criterion_1_dyadic_dimension_group() {
    odometer_dimension_group(1, DYADIC, 2);
}

#[test]
fn criterion_2_triadic_dimension_group() {
    odometer_dimension_group(2, TRIADIC, 3);
}

#[test]
fn criterion_3_exact_sequence_suite() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for (desc, slices, rows) in [(DYADIC, 6, 5), (FIBONACCI, 4, 3)] {
        let c = nested_chain(desc, slices);
        let sys = c.system();
        let mu = InvariantMeasure::new(sys);
        let mut cache = K0Cache::new(sys, &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut exact, mut middle, mut right, mut worst, mut late) = (0, 0, 0, 0, 0);
        for n in 0..rows {
            exact += usize::from(verify_exact_row(&c, n, n + 3, &mu).unwrap().all());
            for _ in 0..50 {
                let f = IntFunction::random(
                    &c.tower(n).pre_inner().unwrap(),
                    sys.depth_window(n + 2),
                    4,
                    &mut rng,
                )
                .unwrap();
                middle += usize::from(middle_square(&c, n, &f, &mut cache).unwrap());
                match delta_steps(&c, n, &f).unwrap() {
                    Some(s) if s <= 3 => worst = worst.max(s),
                    _ => late += 1,
                }
                let h =
                    IntFunction::random(c.slice(n), sys.depth_window(n + 3), 4, &mut rng).unwrap();
                right += usize::from(right_square(&c, n, &h, &mut cache).unwrap());
            }
        }
        pass &= exact == rows && middle == 50 * rows && right == 50 * rows && late == 0;
        detail.push(format!(
            "{desc}: rows {exact}/{rows}, middle {middle}/{}, right {right}/{}, delta max {worst}",
            50 * rows,
            50 * rows
        ));
    }
    let elapsed = start.elapsed();
    report(
        3,
        pass && elapsed < Duration::from_secs(60),
        elapsed,
        detail.join("; "),
    );
}

#[test]
fn criterion_4_tower_map_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cs = chains();
    let mut iota_ok = 0;
    let mut factor_ok = 0;
    let mut composed_ok = 0;
    for k in 0..50 {
        let c = &cs[k % 3];
        let n = rng.gen_range(0..3);
        let td = c.tower(n);
        let window = c.system().depth_window((n + 3).min(6));
        let f = random_off(c.slice(n), &td.pre_inner().unwrap(), window, &mut rng);
        let g = pushforward(td.outer(), &f).unwrap();
        iota_ok += usize::from(iota(td, &f).unwrap().same(&iota(td, &g).unwrap()).unwrap());

        let a = random_subset(c.slice(n + 1), n + 3, &mut rng);
        let lhs = c.induced(n + 1).forward(&a).unwrap();
        let rhs = c.induced(n).forward(&td.t_apply(&a).unwrap()).unwrap();
        factor_ok += usize::from(lhs.same(&rhs).unwrap());

        let depth = rng.gen_range(0..=4.min(c.stages() - n - 2));
        let mut set = c.tower(n + depth + 1).pre_inner().unwrap();
        for m in (n..=n + depth).rev() {
            set = c.tower(m).t_apply(&set).unwrap();
        }
        let expected = c.induced(n).backward(c.slice(n + depth + 2)).unwrap();
        composed_ok += usize::from(set.same(&expected).unwrap());
    }
    let pass = iota_ok == 50 && factor_ok == 50 && composed_ok == 50;
    report(
        4,
        pass,
        start.elapsed(),
        format!("iota off the tops {iota_ok}/50, return map factors {factor_ok}/50, composed t maps {composed_ok}/50"),
    );
}

#[test]
fn criterion_5_rokhlin_invariants() {
    let start = Instant::now();
    let mut decompositions: Vec<(SymbolicSystem, TowerDecomposition)> = Vec::new();
    for c in chains()
        .iter()
        .chain([zeros_chain(TRIADIC, 8), nested_chain(FIBONACCI, 4)].iter())
    {
        decompositions.extend(c.towers().iter().map(|td| (c.system().clone(), td.clone())));
    }
    let dy = SymbolicSystem::parse(DYADIC).unwrap();
    let fib = SymbolicSystem::parse(FIBONACCI).unwrap();
    for (sys, outer, inner) in [
        (&dy, None, "00"),
        (&fib, Some("a"), "aa"),
        (&fib, None, "ab"),
    ] {
        let outer = outer.map_or_else(
            || ClopenSet::full(sys),
            |w| ClopenSet::parse_cylinder(sys, w).unwrap(),
        );
        let ind = Arc::new(InducedSystem::new(sys, &outer, DEFAULT_MAX_STEPS).unwrap());
        let td = TowerDecomposition::new(
            ind,
            &ClopenSet::parse_cylinder(sys, inner).unwrap(),
            DEFAULT_MAX_STEPS,
        )
        .unwrap();
        decompositions.push((sys.clone(), td));
    }
    let (mut ok, mut exact, mut worst) = (0, 0, 0.0f64);
    for (sys, td) in &decompositions {
        let r = td.check(&InvariantMeasure::new(sys)).unwrap();
        let bijective = td.outer().is_bijective().unwrap();
        ok += usize::from(r.all() && bijective);
        if sys.is_odometer() {
            exact += usize::from(
                r.kac_lhs.is_exact()
                    && r.kac_rhs.is_exact()
                    && r.kac_lhs.value() == r.kac_rhs.value(),
            );
        } else {
            worst = worst.max((r.kac_lhs.value() - r.kac_rhs.value()).abs());
        }
    }
    let odometers = decompositions
        .iter()
        .filter(|(s, _)| s.is_odometer())
        .count();
    let pass = ok == decompositions.len() && exact == odometers;
    report(
        5,
        pass,
        start.elapsed(),
        format!("{ok}/{} decompositions partition, {exact}/{odometers} odometer Kac sums exact, Fibonacci Kac defect {worst:.1e}", decompositions.len()),
    );
}

#[test]
fn criterion_6_suspension_flow() {
    let start = Instant::now();
    let sys = SymbolicSystem::parse(DYADIC).unwrap();
    let torus = Suspension::mapping_torus(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut group = 0;
    for _ in 0..500 {
        let q = |rng: &mut ChaCha8Rng| {
            BigRational::new(
                BigInt::from(rng.gen_range(-36..=36)),
                BigInt::from(rng.gen_range(1..=12)),
            )
        };
        let (r, s, t) = (q(&mut rng), q(&mut rng), q(&mut rng));
        let prefix = (0..rng.gen_range(0..5))
            .map(|_| rng.gen_range(0..2))
            .collect();
        let x = sys
            .periodic_point(prefix, vec![rng.gen_range(0..2)])
            .unwrap();
        let p = torus.normalize(&x, &r).unwrap();
        let lhs = torus
            .flow_step(&torus.flow_step(&p, &s).unwrap(), &t)
            .unwrap();
        group += usize::from(lhs == torus.flow_step(&p, &(&s + &t)).unwrap());
    }
    let fb = FlowboxStructure::build(&torus, &sys.default_point(), 16).unwrap();
    let r = verify_flowbox_properties(&torus, &fb, 100, 6).unwrap();
    let lengths = (1..=16).all(|n| {
        r.stages.iter().any(|row| {
            row.n == n
                && parse_rational(&row.length).unwrap()
                    >= BigRational::from_integer(BigInt::from(n))
        })
    });
    let structural =
        r.nested && r.lengths_diverge && r.shrinks_to_center && r.nonempty_interior && r.admissible;
    let contained = r.containment_samples == 100 && r.containment_failures == 0;
    report(
        6,
        group == 500 && lengths && structural && contained,
        start.elapsed(),
        format!(
            "group law {group}/500, l_n >= n for n <= 16 {lengths}, nested, shrinking, open {structural}, containments {}/{}",
            r.containment_samples - r.containment_failures,
            r.containment_samples
        ),
    );
}

#[test]
fn criterion_7_kernel_convergence() {
    let start = Instant::now();
    let r = convergence_study(64, 0).unwrap();
    let elapsed = start.elapsed();
    let coarse = r.coarse.errors.values();
    let below = coarse.iter().all(|e| *e <= r.coarse.tolerance);
    let shrink = r.converges();
    let parts: Vec<String> = IdentityErrors::names()
        .iter()
        .zip(coarse.iter().zip(r.ratios.values()))
        .map(|(name, (e, q))| format!("{name} {e:.2e} x{q:.2}"))
        .collect();
    report(
        7,
        below && shrink && r.all() && elapsed < Duration::from_secs(120),
        elapsed,
        format!(
            "tol {:.2e} at N = 64: {}",
            r.coarse.tolerance,
            parts.join(", ")
        ),
    );
}
