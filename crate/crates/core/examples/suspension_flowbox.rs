//! Exact flow on suspensions and the flowbox structure around a point.

use cantorflow::cantor::SymbolicSystem;
use cantorflow::suspension::{
    parse_rational, verify_flowbox_properties, FlowboxStructure, Roof, Suspension,
};

fn main() -> cantorflow::Result<()> {
    let sys = SymbolicSystem::parse("odometer base=2")?;
    let torus = Suspension::mapping_torus(&sys);
    let x = sys.default_point();

    let p = torus.normalize(&x, &parse_rational("7/10")?)?;
    let q = torus.flow_step(&p, &parse_rational("1/2")?)?;
    println!(
        "{:?} + 1/2 = {:?}",
        torus.point_json(&p),
        torus.point_json(&q)
    );

    let fb = FlowboxStructure::build(&torus, &x, 16)?;
    for n in [1, 4, 8, 16] {
        let s = fb.slice(n);
        println!("S_{n}: depth {}, l_n = {}", s.depth, s.length);
    }
    let r = verify_flowbox_properties(&torus, &fb, 100, 0)?;
    println!(
        "all checks {} ({} containment failures)",
        r.all(),
        r.containment_failures
    );

    let fib = SymbolicSystem::parse("substitution a:ab,b:a")?;
    let susp = Suspension::new(&fib, Roof::parse(&fib, "a=1,b=3/2")?);
    let fb = FlowboxStructure::build(&susp, &fib.default_point(), 4)?;
    let r = verify_flowbox_properties(&susp, &fb, 50, 0)?;
    println!(
        "fibonacci with roof a=1,b=3/2: lengths {:?}, all {}",
        r.stages
            .iter()
            .map(|s| s.length.clone())
            .collect::<Vec<_>>(),
        r.all()
    );
    Ok(())
}
