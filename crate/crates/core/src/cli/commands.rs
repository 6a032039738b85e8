use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Check, Command, RunConfig};
use crate::cantor::{
    ClopenSet, IntFunction, InvariantMeasure, PointCode, SymbolicSystem, Weight, EPS_MU,
};
use crate::error::{Error, Result};
use crate::kernels::{convergence_study_for, IdentityErrors};
use crate::ktheory::{
    bratteli_dot, bratteli_edges, delta_steps, middle_square, order_iso_check, right_square,
    verify_exact_row, CrossedK0, K0Cache, OrderIsoConfig,
};
use crate::rokhlin::{auto_nest, CantorMap, InducedSystem, SliceChain, DEFAULT_MAX_STEPS};
use crate::suspension::{
    parse_rational, return_lands_on_image, verify_flowbox_properties, FlowboxStructure, Roof,
    Suspension,
};

pub(super) struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    pub artifact: Option<String>,
}

fn check(checks: &mut Vec<Check>, name: impl Into<String>, pass: bool) {
    checks.push(Check {
        name: name.into(),
        pass,
    });
}

pub(super) fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    let sys = SymbolicSystem::parse(&cfg.system)?;
    match cfg.command {
        Command::System => system(cfg, &sys),
        Command::K0 => k0(cfg, &sys),
        Command::Towers => towers(cfg, &sys),
        Command::ExactSequence => exact_sequence(cfg, &sys),
        Command::OrderIso => order_iso(cfg, &sys),
        Command::Flow => flow(cfg, &sys),
        Command::Flowbox => flowbox(cfg, &sys),
        Command::KernelsCheck => kernels(cfg, &sys),
        Command::Bratteli => bratteli(cfg, &sys),
    }
}

fn point(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<PointCode> {
    match &cfg.point {
        Some(s) => sys.parse_point(s),
        None => Ok(sys.default_point()),
    }
}

/// `--slices`, else `--auto-nest k`, else `fallback` nested cylinders around
/// the point; cut to `--stages` when given.
fn slices(cfg: &RunConfig, sys: &SymbolicSystem, fallback: usize) -> Result<Vec<ClopenSet>> {
    let mut out = match (&cfg.slices, cfg.auto_nest) {
        (Some(s), _) => SliceChain::parse_slices(sys, s)?,
        (None, k) => {
            let k = k.or(cfg.stages).unwrap_or(fallback);
            auto_nest(sys, &point(cfg, sys)?, k, DEFAULT_MAX_STEPS)?
        }
    };
    if let Some(n) = cfg.stages {
        out.truncate(n);
    }
    Ok(out)
}

fn chain(cfg: &RunConfig, sys: &SymbolicSystem, fallback: usize) -> Result<SliceChain> {
    SliceChain::new(sys, &slices(cfg, sys, fallback)?, DEFAULT_MAX_STEPS)
}

fn suspension(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Suspension> {
    Ok(Suspension::new(sys, Roof::parse(sys, &cfg.tau)?))
}

fn slack(w: &Weight) -> f64 {
    if w.is_exact() {
        0.0
    } else {
        4.0 * EPS_MU
    }
}

fn system(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let d = cfg.depth.unwrap_or(4);
    let mu = InvariantMeasure::new(sys);
    let mut checks = Vec::new();
    let sizes: Vec<usize> = (1..=d)
        .map(|k| sys.language(sys.depth_window(k)).map(|l| l.len()))
        .collect::<Result<_>>()?;
    let w = sys.depth_window(d);
    let mut atoms = Vec::new();
    let mut total = Weight::zero_exact();
    let mut invariant = true;
    for word in sys.language(w)?.iter() {
        let a = ClopenSet::from_words(sys, w, vec![word.clone()])?;
        let m = mu.measure(&a)?;
        let img = mu.measure(&a.image(1)?)?;
        invariant &= m.agrees(&img, slack(&m).max(slack(&img)));
        total = total.add(&m);
        atoms.push(json!({ "word": sys.word_string(word), "measure": m }));
    }
    let one = Weight::Exact(BigRational::one());
    check(
        &mut checks,
        format!("atoms of depth {d} have total measure 1"),
        total.agrees(&one, slack(&total) * sizes.len().max(1) as f64),
    );
    check(&mut checks, "measure is invariant on atoms", invariant);
    let result = json!({
        "descriptor": sys.descriptor(),
        "odometer": sys.is_odometer(),
        "depth": d,
        "language_sizes": sizes,
        "atoms": atoms,
        "default_point": sys.point_string(&sys.default_point()),
    });
    Ok(Outcome {
        checks,
        result,
        artifact: None,
    })
}

fn k0(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let d = cfg.depth.unwrap_or(4);
    let mu = InvariantMeasure::new(sys);
    let k = CrossedK0::new(sys, sys.depth_window(d), &mu)?;
    let finer = CrossedK0::new(sys, sys.depth_window(d + 1), &mu)?;
    let mut checks = Vec::new();
    check(&mut checks, "quotient map kills the relations", k.verify());
    check(
        &mut checks,
        "trace vanishes on relations",
        k.trace_kills_relations(),
    );
    check(
        &mut checks,
        format!("refinement from depth {d} to {} descends to classes", d + 1),
        k.refinement_descends(&finer)?,
    );
    let result = json!({
        "depth": d,
        "summary": k.summary(),
        "model_generator": k.odometer_model_generator().map(|q| q.to_string()),
    });
    Ok(Outcome {
        checks,
        result,
        artifact: None,
    })
}

fn towers(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let c = chain(cfg, sys, 3)?;
    let mu = InvariantMeasure::new(sys);
    let mut checks = Vec::new();
    let mut stages = Vec::new();
    let mut heights = Vec::new();
    for (n, td) in c.towers().iter().enumerate() {
        let tc = td.check(&mu)?;
        check(
            &mut checks,
            format!("stage {n}: floors partition and Kac identity"),
            tc.all(),
        );
        heights.push(td.heights());
        stages.push(json!({ "stage": n, "decomposition": td.to_json(), "check": tc }));
    }
    Ok(Outcome {
        checks,
        result: json!({ "heights": heights, "stages": stages }),
        artifact: None,
    })
}

fn exact_sequence(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let c = chain(cfg, sys, if sys.is_odometer() { 6 } else { 4 })?;
    let mu = InvariantMeasure::new(sys);
    let samples = cfg.samples.unwrap_or(50);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for n in 0..c.stages() {
        let r = verify_exact_row(&c, n, cfg.depth.unwrap_or(n + 3), &mu)?;
        check(&mut checks, format!("stage {n}: exact row"), r.all());
        rows.push(r);
    }
    let mut cache = K0Cache::new(sys, &mu);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut squares = Vec::new();
    for n in 0..c.stages().saturating_sub(1) {
        let pre = c.tower(n).pre_inner()?;
        let (mut middle, mut right, mut worst, mut unstable, mut truncated) = (0, 0, 0, 0, 0);
        for _ in 0..samples {
            let f = IntFunction::random(&pre, sys.depth_window(n + 2), 4, &mut rng)?;
            middle += usize::from(!middle_square(&c, n, &f, &mut cache)?);
            match delta_steps(&c, n, &f)? {
                Some(s) if s <= 3 => worst = worst.max(s),
                Some(s) => {
                    worst = worst.max(s);
                    unstable += 1;
                }
                // the chain ran out before three steps
                None if n + 3 >= c.stages() => truncated += 1,
                None => unstable += 1,
            }
            let h = IntFunction::random(c.slice(n), sys.depth_window(n + 3), 4, &mut rng)?;
            right += usize::from(!right_square(&c, n, &h, &mut cache)?);
        }
        check(
            &mut checks,
            format!("stage {n}: middle square on {samples} samples"),
            middle == 0,
        );
        check(
            &mut checks,
            format!("stage {n}: right square on {samples} samples"),
            right == 0,
        );
        check(
            &mut checks,
            format!("stage {n}: delta reaches a constant within 3 steps"),
            unstable == 0,
        );
        squares.push(json!({
            "stage": n,
            "samples": samples,
            "middle_failures": middle,
            "right_failures": right,
            "delta_max_steps": worst,
            "delta_unstabilized": unstable,
            "delta_truncated": truncated,
        }));
    }
    Ok(Outcome {
        checks,
        result: json!({ "rows": rows, "squares": squares }),
        artifact: None,
    })
}

fn order_iso(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let c = chain(cfg, sys, 6)?;
    let mu = InvariantMeasure::new(sys);
    let oc = OrderIsoConfig {
        depth: cfg.depth.unwrap_or(c.stages()),
        positivity_samples: cfg.samples.unwrap_or(200),
        delta_samples: 20,
        seed: cfg.seed,
    };
    let r = order_iso_check(&c, &mu, &oc)?;
    let mut checks = Vec::new();
    check(
        &mut checks,
        "connecting maps compatible with the trace",
        r.compatible,
    );
    check(&mut checks, "limit map injective", r.injective);
    check(&mut checks, "limit map surjective", r.surjective);
    check(
        &mut checks,
        "positivity agrees with trace positivity",
        r.positivity.disagree == 0,
    );
    check(
        &mut checks,
        "delta stabilizes on sampled inputs",
        r.delta.unstabilized == 0,
    );
    Ok(Outcome {
        checks,
        result: serde_json::to_value(&r).expect("reports serialize"),
        artifact: None,
    })
}

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    let den: i64 = rng.gen_range(1..=12);
    let num: i64 = rng.gen_range(-36..=36);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn flow(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let susp = suspension(cfg, sys)?;
    let x = point(cfg, sys)?;
    let s = parse_rational(&cfg.time)?;
    let p = susp.point(&x)?;
    let q = susp.flow_step(&p, &s)?;
    let samples = cfg.samples.unwrap_or(500);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut group, mut normal) = (0, 0);
    for _ in 0..samples {
        let base = sys.point_step(&x, rng.gen_range(-8..=8))?;
        let p = susp.normalize(&base, &random_rational(&mut rng))?;
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        let lhs = susp.flow_step(&susp.flow_step(&p, &b)?, &a)?;
        let rhs = susp.flow_step(&p, &(&a + &b))?;
        group += usize::from(lhs != rhs);
        normal += usize::from(susp.normalize(&lhs.base, &lhs.t)? != lhs || lhs.t.is_negative());
    }
    let sl = slices(cfg, sys, 2)?;
    let mut returns = 0;
    let mut tried = 0;
    for set in &sl {
        let ind = InducedSystem::new(sys, set, DEFAULT_MAX_STEPS)?;
        let mut y = susp.point(&x)?.base;
        for _ in 0..8 {
            if set.contains(&y)? {
                tried += 1;
                returns += usize::from(!return_lands_on_image(&susp, &ind, &y)?);
                y = ind.point_forward(&y)?;
            } else {
                y = sys.point_step(&y, 1)?;
            }
        }
    }
    let mut checks = Vec::new();
    check(
        &mut checks,
        format!("group law on {samples} random triples"),
        group == 0,
    );
    check(&mut checks, "flowed points are normalized", normal == 0);
    check(
        &mut checks,
        format!("return to slice lands on induced image ({tried} points)"),
        returns == 0,
    );
    let result = json!({
        "roof": susp.roof().to_json(),
        "start": susp.point_json(&p),
        "time": s.to_string(),
        "end": susp.point_json(&q),
        "samples": samples,
        "group_law_failures": group,
        "normalization_failures": normal,
        "return_failures": returns,
    });
    Ok(Outcome {
        checks,
        result,
        artifact: None,
    })
}

fn flowbox(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let susp = suspension(cfg, sys)?;
    let center = point(cfg, sys)?;
    let fb = FlowboxStructure::build(&susp, &center, cfg.stages.unwrap_or(8))?;
    let r = verify_flowbox_properties(&susp, &fb, cfg.samples.unwrap_or(100), cfg.seed)?;
    let mut checks = Vec::new();
    check(&mut checks, "slices nested", r.nested);
    check(&mut checks, "box lengths reach n", r.lengths_diverge);
    check(
        &mut checks,
        "slices shrink to the center",
        r.shrinks_to_center,
    );
    check(
        &mut checks,
        "boxes have nonempty interior",
        r.nonempty_interior,
    );
    check(&mut checks, "lengths admissible", r.admissible);
    check(
        &mut checks,
        format!("{} sampled containments", r.containment_samples),
        r.containment_failures == 0,
    );
    let result = json!({
        "center": sys.point_string(&center),
        "roof": susp.roof().to_json(),
        "report": r,
    });
    Ok(Outcome {
        checks,
        result,
        artifact: None,
    })
}

fn kernels(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    if cfg.grid < 4 {
        return Err(Error::Invalid(format!(
            "--grid must be at least 4, got {}",
            cfg.grid
        )));
    }
    let susp = suspension(cfg, sys)?;
    let upper = match slices(cfg, sys, 1)?.into_iter().next() {
        Some(s) => s,
        None => return Err(Error::Invalid("kernels check needs one slice".into())),
    };
    let r = convergence_study_for(&susp, &upper, cfg.grid, cfg.seed)?;
    let mut checks = Vec::new();
    let names = IdentityErrors::names();
    let (c, f, q) = (
        r.coarse.errors.values(),
        r.fine.errors.values(),
        r.ratios.values(),
    );
    for i in 0..names.len() {
        check(
            &mut checks,
            format!("{} within tolerance at N = {}", names[i], r.coarse.grid),
            c[i] <= r.coarse.tolerance,
        );
        check(
            &mut checks,
            format!("{} within tolerance at N = {}", names[i], r.fine.grid),
            f[i] <= r.fine.tolerance,
        );
        check(
            &mut checks,
            format!(
                "{} shrinks by {} when N doubles",
                names[i], r.required_ratio
            ),
            q[i] <= r.required_ratio,
        );
    }
    check(
        &mut checks,
        "block isometries",
        r.coarse.within_tolerance() && r.fine.within_tolerance(),
    );
    check(
        &mut checks,
        "mask preserved",
        r.coarse.mask_preserved && r.fine.mask_preserved,
    );
    Ok(Outcome {
        checks,
        result: serde_json::to_value(&r).expect("reports serialize"),
        artifact: None,
    })
}

fn bratteli(cfg: &RunConfig, sys: &SymbolicSystem) -> Result<Outcome> {
    let c = chain(cfg, sys, 3)?;
    let dot = bratteli_dot(c.towers())?;
    let edges: Vec<Value> = bratteli_edges(c.towers())?
        .into_iter()
        .map(|e| json!({ "from": e.from, "to": e.to, "multiplicities": e.multiplicities }))
        .collect();
    let mut checks = Vec::new();
    check(
        &mut checks,
        "diagram has a vertex per tower",
        !c.towers().is_empty(),
    );
    let result = json!({
        "stages": c.stages(),
        "vertices": c.towers().iter().map(|t| t.heights().len()).collect::<Vec<_>>(),
        "edges": edges,
    });
    Ok(Outcome {
        checks,
        result,
        artifact: Some(dot),
    })
}
