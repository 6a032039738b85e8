use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::{ClopenSet, LocallyConstant, PointCode, SymbolicSystem, Window};
use crate::error::{Error, Result};
use crate::rokhlin::{InducedSystem, TowerDecomposition};

/// Exact locally constant rational functions.
pub type RationalFunction = LocallyConstant<BigRational>;

/// A strictly positive locally constant roof `τ` on the whole base.
#[derive(Clone, Debug)]
pub struct Roof {
    f: RationalFunction,
    constant: Option<BigRational>,
}

/// Roof as a map from atom words to `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoofJson {
    pub start: i64,
    pub len: usize,
    pub values: BTreeMap<String, String>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl Roof {
    pub fn constant(sys: &SymbolicSystem, c: BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Invalid("roof values must be positive".into()));
        }
        Ok(Roof {
            f: LocallyConstant::constant(&ClopenSet::full(sys), c.clone()),
            constant: Some(c),
        })
    }

    /// The mapping-torus roof `τ ≡ 1`.
    pub fn unit(sys: &SymbolicSystem) -> Self {
        Self::constant(sys, BigRational::from_integer(1.into())).unwrap()
    }

    pub fn from_function(f: RationalFunction) -> Result<Self> {
        let sys = f.domain().system().clone();
        if !f.domain().same(&ClopenSet::full(&sys))? {
            return Err(Error::Invalid("a roof lives on the whole base".into()));
        }
        let f = f.simplify()?;
        let atoms = ClopenSet::full(&sys).refine(f.window())?;
        for w in atoms.words() {
            if !f.value_on(w).is_positive() {
                return Err(Error::Invalid(format!(
                    "roof is not positive on [{}]",
                    sys.word_string(w)
                )));
            }
        }
        let constant = f.constant_value()?;
        Ok(Roof { f, constant })
    }

    /// Parses `word=p/q` pairs on a common window, e.g. `a=1,b=3/2`.
    pub fn parse(sys: &SymbolicSystem, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if !spec.contains('=') {
            return Self::constant(sys, parse_rational(spec)?);
        }
        let mut values = BTreeMap::new();
        let mut len = None;
        for part in spec.split(',') {
            let (w, q) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad roof entry '{part}'")))?;
            let (start, word) = match w.split_once(':') {
                Some((s, w)) => (
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Invalid(format!("bad start '{s}'")))?,
                    w,
                ),
                None => (0, w),
            };
            let word = sys.parse_word(word.trim())?;
            match len {
                None => len = Some((start, word.len())),
                Some(l) if l != (start, word.len()) => {
                    return Err(Error::Invalid("roof atoms must share one window".into()));
                }
                _ => {}
            }
            values.insert(word, parse_rational(q)?);
        }
        let (start, len) = len.unwrap();
        let f =
            LocallyConstant::from_values(&ClopenSet::full(sys), Window::new(start, len), values)?;
        Self::from_function(f)
    }

    pub fn from_json(sys: &SymbolicSystem, j: &RoofJson) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (w, q) in &j.values {
            values.insert(sys.parse_word(w)?, parse_rational(q)?);
        }
        let f = LocallyConstant::from_values(
            &ClopenSet::full(sys),
            Window::new(j.start, j.len),
            values,
        )?;
        Self::from_function(f)
    }

    pub fn to_json(&self) -> RoofJson {
        let sys = self.f.domain().system();
        RoofJson {
            start: self.f.window().start,
            len: self.f.window().len,
            values: self
                .f
                .values()
                .iter()
                .map(|(w, q)| (sys.word_string(w), q.to_string()))
                .collect(),
        }
    }

    pub fn function(&self) -> &RationalFunction {
        &self.f
    }

    pub fn constant_value(&self) -> Option<&BigRational> {
        self.constant.as_ref()
    }

    pub fn at(&self, p: &PointCode) -> Result<BigRational> {
        match &self.constant {
            Some(c) => Ok(c.clone()),
            None => self.f.eval(p),
        }
    }

    /// `Σ_{i<m} τ(Φ^i y)` on `piece`.
    pub fn orbit_sum(&self, piece: &ClopenSet, m: u64) -> Result<RationalFunction> {
        if let Some(c) = &self.constant {
            return Ok(LocallyConstant::constant(
                piece,
                c * BigRational::from_integer(m.into()),
            ));
        }
        let mut acc = LocallyConstant::zero(piece);
        for i in 0..m {
            acc = acc.add(&self.f.pull(piece, i as i64)?)?;
        }
        acc.simplify()
    }

    /// The real first-return time to the slice of `ind`.
    pub fn return_time(&self, ind: &InducedSystem) -> Result<RationalFunction> {
        let mut parts = Vec::new();
        for (piece, k, _) in ind.pieces() {
            parts.push(self.orbit_sum(piece, k)?);
        }
        LocallyConstant::glue(ind.slice(), &parts)?.simplify()
    }

    /// `[j][k]`: real time from the base of tower `j` to its floor `k`.
    pub fn arrive_times(&self, td: &TowerDecomposition) -> Result<Vec<Vec<RationalFunction>>> {
        let mut out = Vec::new();
        for t in td.towers() {
            let mut row = Vec::new();
            for floor in &t.arrivals {
                let mut parts = Vec::new();
                for (piece, m) in floor {
                    parts.push(self.orbit_sum(piece, *m)?);
                }
                row.push(LocallyConstant::glue(t.base(), &parts)?.simplify()?);
            }
            out.push(row);
        }
        Ok(out)
    }
}

/// Minimum of a nonempty rational function.
pub fn min_value(f: &RationalFunction) -> Result<BigRational> {
    let atoms = f.domain().refine(f.window().hull(&f.domain().window()))?;
    let g = f.refine(atoms.window())?;
    atoms
        .words()
        .iter()
        .map(|w| g.value_on(w))
        .min()
        .ok_or_else(|| Error::Invalid("minimum over an empty set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rokhlin::DEFAULT_MAX_STEPS;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn dyadic_return_time_two() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let roof = Roof::unit(&s);
        let ind = InducedSystem::new(
            &s,
            &ClopenSet::parse_cylinder(&s, "0").unwrap(),
            DEFAULT_MAX_STEPS,
        )
        .unwrap();
        assert_eq!(
            roof.return_time(&ind).unwrap().constant_value().unwrap(),
            Some(q("2"))
        );
        let full = InducedSystem::new(&s, &ClopenSet::full(&s), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(
            roof.return_time(&full).unwrap().constant_value().unwrap(),
            Some(q("1"))
        );
    }

    #[test]
    fn fibonacci_return_values() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let roof = Roof::parse(&s, "a=1,b=3/2").unwrap();
        let a = ClopenSet::parse_cylinder(&s, "a").unwrap();
        let ind = InducedSystem::new(&s, &a, DEFAULT_MAX_STEPS).unwrap();
        let r = roof.return_time(&ind).unwrap();
        let mut vals: Vec<BigRational> = r
            .level_sets()
            .unwrap()
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        vals.sort();
        assert_eq!(vals, vec![q("1"), q("5/2")]);
        assert_eq!(min_value(&r).unwrap(), q("1"));
        // C = S gives τ itself
        let full = InducedSystem::new(&s, &ClopenSet::full(&s), DEFAULT_MAX_STEPS).unwrap();
        assert!(roof
            .return_time(&full)
            .unwrap()
            .same(roof.function())
            .unwrap());
    }

    #[test]
    fn rejects_nonpositive() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        assert!(Roof::parse(&s, "a=1,b=0").is_err());
        assert!(Roof::parse(&s, "a=1").is_err());
        assert!(Roof::parse(&s, "-2").is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let roof = Roof::parse(&s, "a=1,b=3/2").unwrap();
        let back = Roof::from_json(&s, &roof.to_json()).unwrap();
        assert!(back.function().same(roof.function()).unwrap());
    }
}
