use crate::cantor::{ClopenSet, IntFunction};
use crate::error::{Error, Result};
use crate::rokhlin::{InducedSystem, TowerDecomposition};

fn require_domain(f: &IntFunction, domain: &ClopenSet, what: &str) -> Result<()> {
    if !f.domain().same(domain)? {
        return Err(Error::Invalid(format!(
            "{what}: function lives on the wrong slice"
        )));
    }
    Ok(())
}

/// `Φ̂_* f = f ∘ Φ_S^{-1}` for the induced map on the function's slice.
pub fn pushforward(ind: &InducedSystem, f: &IntFunction) -> Result<IntFunction> {
    require_domain(f, ind.slice(), "pushforward")?;
    let mut parts = Vec::new();
    for (_, k, image) in ind.pieces() {
        parts.push(f.pull(image, -(k as i64))?);
    }
    IntFunction::glue(ind.slice(), &parts)?.simplify()
}

/// `f ∘ Φ_S` on the slice, the inverse of [`pushforward`].
pub fn pullback(ind: &InducedSystem, f: &IntFunction) -> Result<IntFunction> {
    require_domain(f, ind.slice(), "pullback")?;
    let mut parts = Vec::new();
    for (piece, k, _) in ind.pieces() {
        parts.push(f.pull(piece, k as i64)?);
    }
    IntFunction::glue(ind.slice(), &parts)?.simplify()
}

/// `ι_*(f)(y) = Σ_{k=0}^{j} f(Φ_n^k y)` for `y` in the base of the height-`j`
/// tower.
pub fn iota(td: &TowerDecomposition, f: &IntFunction) -> Result<IntFunction> {
    require_domain(f, td.outer_slice(), "iota")?;
    let inner = td.inner_slice();
    let mut parts = Vec::new();
    for tower in td.towers() {
        let mut acc = IntFunction::zero(tower.base());
        for floor in &tower.arrivals {
            for (piece, m) in floor {
                let g = f.pull(piece, *m as i64)?.extend_by_zero(tower.base())?;
                acc = acc.add(&g)?;
            }
        }
        parts.push(acc);
    }
    IntFunction::glue(inner, &parts)?.simplify()
}

/// The constant `m` on `Φ_n^{-1}(S_{n+1})`.
pub fn eta(td: &TowerDecomposition, m: i64) -> Result<IntFunction> {
    Ok(IntFunction::constant(&td.pre_inner()?, m))
}

/// `β(f) = ι_*(g) − ι_*(Φ̂_* g)` with `g` the zero extension of `f` from
/// `Φ_n^{-1}(S_{n+1})` to `S_n`.
pub fn beta(td: &TowerDecomposition, f: &IntFunction) -> Result<IntFunction> {
    require_domain(f, &td.pre_inner()?, "beta")?;
    let g = f.extend_by_zero(td.outer_slice())?;
    beta_of_extension(td, &g)
}

/// `ι_*(g) − ι_*(Φ̂_* g)` for any `g` on the outer slice.
pub fn beta_of_extension(td: &TowerDecomposition, g: &IntFunction) -> Result<IntFunction> {
    let a = iota(td, g)?;
    let b = iota(td, &pushforward(td.outer(), g)?)?;
    a.sub(&b)?.simplify()
}

/// `δ(f) = f ∘ t_n` restricted to `Φ_{n+1}^{-1}(S_{n+2})`, where `next` holds
/// the towers of `S_{n+2}` inside `S_{n+1}`.
pub fn delta(
    td: &TowerDecomposition,
    next: &TowerDecomposition,
    f: &IntFunction,
) -> Result<IntFunction> {
    require_domain(f, &td.pre_inner()?, "delta")?;
    let target = next.pre_inner()?;
    let mut parts = Vec::new();
    for tower in td.towers() {
        let base_part = target.intersection(tower.base())?;
        if base_part.is_empty() {
            continue;
        }
        for (piece, m) in tower.arrivals.last().unwrap() {
            let part = piece.intersection(&base_part)?;
            if !part.is_empty() {
                parts.push(f.pull(&part, *m as i64)?);
            }
        }
    }
    IntFunction::glue(&target, &parts)?.simplify()
}
