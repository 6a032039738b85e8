use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::{ClopenSet, PointCode, Window, Word};
use crate::error::{Error, Result};

/// Values a locally constant function may take.
pub trait Coefficient:
    Clone
    + PartialEq
    + Debug
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + Add<Output = T>
        + Sub<Output = T>
        + Neg<Output = T>
        + Mul<Output = T>
{
}

/// A locally constant function on a clopen domain, stored as its nonzero
/// values on the words of one window.
#[derive(Clone, Debug)]
pub struct LocallyConstant<V> {
    domain: ClopenSet,
    window: Window,
    values: BTreeMap<Word, V>,
}

/// Integer-valued clopen functions, the elements of `C(S, ℤ)`.
pub type IntFunction = LocallyConstant<i64>;

fn refine_map<V: Clone>(
    domain: &ClopenSet,
    from: Window,
    values: &BTreeMap<Word, V>,
    to: Window,
) -> Result<BTreeMap<Word, V>> {
    if from == to || values.is_empty() {
        return Ok(values.clone());
    }
    let sys = domain.system();
    let mut out = BTreeMap::new();
    if from.len == 0 {
        let v = values.get(&Vec::new()).cloned();
        if let Some(v) = v {
            for u in sys.language(to)?.iter() {
                out.insert(u.clone(), v.clone());
            }
        }
        return Ok(out);
    }
    if sys.is_odometer() {
        for (w, v) in values {
            let cyl = ClopenSet::from_words(sys, from, vec![w.clone()])?.refine(to)?;
            for u in cyl.words() {
                out.insert(u.clone(), v.clone());
            }
        }
    } else {
        let off = (from.start - to.start) as usize;
        for u in sys.language(to)?.iter() {
            if let Some(v) = values.get(&u[off..off + from.len]) {
                out.insert(u.clone(), v.clone());
            }
        }
    }
    Ok(out)
}

impl<V: Coefficient> LocallyConstant<V> {
    pub fn zero(domain: &ClopenSet) -> Self {
        LocallyConstant {
            domain: domain.clone(),
            window: domain.window(),
            values: BTreeMap::new(),
        }
    }

    pub fn constant(domain: &ClopenSet, c: V) -> Self {
        let mut f = Self::zero(domain);
        if !c.is_zero() {
            for w in domain.words() {
                f.values.insert(w.clone(), c.clone());
            }
        }
        f
    }

    /// `c` on `set`, zero on the rest of the domain.
    pub fn on_set(domain: &ClopenSet, set: &ClopenSet, c: V) -> Result<Self> {
        if !set.is_subset(domain)? {
            return Err(Error::Invalid("support leaves the function domain".into()));
        }
        let window = domain.window().hull(&set.window());
        let set = set.refine(window)?;
        let mut values = BTreeMap::new();
        if !c.is_zero() {
            for w in set.words() {
                values.insert(w.clone(), c.clone());
            }
        }
        Ok(LocallyConstant {
            domain: domain.clone(),
            window,
            values,
        })
    }

    /// Builds a function from values on the atoms of `window` inside the
    /// domain; atoms missing from `values` get zero.
    pub fn from_values(
        domain: &ClopenSet,
        window: Window,
        values: BTreeMap<Word, V>,
    ) -> Result<Self> {
        if !window.contains(&domain.window()) {
            return Err(Error::Invalid(
                "function window must contain the domain window".into(),
            ));
        }
        let atoms = domain.refine(window)?;
        let mut clean = BTreeMap::new();
        for (w, v) in values {
            if v.is_zero() {
                continue;
            }
            if atoms.words().binary_search(&w).is_err() {
                return Err(Error::Invalid(format!(
                    "value given on {} outside the domain",
                    domain.system().word_string(&w)
                )));
            }
            clean.insert(w, v);
        }
        Ok(LocallyConstant {
            domain: domain.clone(),
            window,
            values: clean,
        })
    }

    pub fn domain(&self) -> &ClopenSet {
        &self.domain
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Nonzero values keyed by words of the window.
    pub fn values(&self) -> &BTreeMap<Word, V> {
        &self.values
    }

    /// The atoms of the domain at the function's window.
    pub fn atoms(&self) -> Result<Vec<Word>> {
        Ok(self.domain.refine(self.window)?.words().to_vec())
    }

    pub fn value_on(&self, w: &[u8]) -> V {
        self.values.get(w).cloned().unwrap_or_else(V::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn refine(&self, w: Window) -> Result<Self> {
        if !w.contains(&self.window) {
            return Err(Error::Invalid(format!(
                "cannot refine window {:?} to {:?}",
                self.window, w
            )));
        }
        Ok(LocallyConstant {
            domain: self.domain.clone(),
            window: w,
            values: refine_map(&self.domain, self.window, &self.values, w)?,
        })
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if !self.domain.same(&other.domain)? {
            return Err(Error::Invalid("functions live on different domains".into()));
        }
        let w = self.window.hull(&other.window);
        Ok((self.refine(w)?, other.refine(w)?))
    }

    fn combine(&self, other: &Self, op: impl Fn(V, V) -> V) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let mut values = BTreeMap::new();
        let keys: std::collections::BTreeSet<&Word> =
            a.values.keys().chain(b.values.keys()).collect();
        for k in keys {
            let v = op(a.value_on(k), b.value_on(k));
            if !v.is_zero() {
                values.insert(k.clone(), v);
            }
        }
        Ok(LocallyConstant {
            domain: a.domain.clone(),
            window: a.window,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x - y)
    }

    pub fn neg(&self) -> Self {
        LocallyConstant {
            domain: self.domain.clone(),
            window: self.window,
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &V) -> Self {
        let mut values = BTreeMap::new();
        for (k, v) in &self.values {
            let x = v.clone() * c.clone();
            if !x.is_zero() {
                values.insert(k.clone(), x);
            }
        }
        LocallyConstant {
            domain: self.domain.clone(),
            window: self.window,
            values,
        }
    }

    /// Equality as functions.
    pub fn same(&self, other: &Self) -> Result<bool> {
        Ok(self.domain.same(&other.domain)? && self.sub(other)?.is_zero())
    }

    pub fn eval(&self, p: &PointCode) -> Result<V> {
        if !self.domain.contains(p)? {
            return Err(Error::Invalid("point outside the function domain".into()));
        }
        let c = self.domain.system().point_coords(p, self.window)?;
        Ok(self.value_on(&c))
    }

    pub fn support(&self) -> Result<ClopenSet> {
        ClopenSet::from_words(
            self.domain.system(),
            self.window,
            self.values.keys().cloned().collect(),
        )
    }

    /// Nonzero values with the sets where they are taken.
    pub fn level_sets(&self) -> Result<Vec<(V, ClopenSet)>> {
        let mut groups: Vec<(V, Vec<Word>)> = Vec::new();
        for (k, v) in &self.values {
            match groups.iter_mut().find(|g| &g.0 == v) {
                Some(g) => g.1.push(k.clone()),
                None => groups.push((v.clone(), vec![k.clone()])),
            }
        }
        groups
            .into_iter()
            .map(|(v, ws)| {
                Ok((
                    v,
                    ClopenSet::from_words(self.domain.system(), self.window, ws)?,
                ))
            })
            .collect()
    }

    /// The common value if the function is constant on its domain.
    pub fn constant_value(&self) -> Result<Option<V>> {
        if self.values.is_empty() {
            return Ok(Some(V::zero()));
        }
        let atoms = self.domain.refine(self.window)?;
        if atoms.words().len() != self.values.len() {
            return Ok(None);
        }
        let first = self.values.values().next().unwrap();
        Ok(if self.values.values().all(|v| v == first) {
            Some(first.clone())
        } else {
            None
        })
    }

    /// Zero extension to a larger domain.
    pub fn extend_by_zero(&self, domain: &ClopenSet) -> Result<Self> {
        if !self.domain.is_subset(domain)? {
            return Err(Error::Invalid(
                "extension domain does not contain the function domain".into(),
            ));
        }
        let window = self.window.hull(&domain.window());
        let f = self.refine(window)?;
        Ok(LocallyConstant {
            domain: domain.clone(),
            window,
            values: f.values,
        })
    }

    pub fn restrict(&self, domain: &ClopenSet) -> Result<Self> {
        if !domain.is_subset(&self.domain)? {
            return Err(Error::Invalid("restriction domain is not a subset".into()));
        }
        let window = self.window.hull(&domain.window());
        let f = self.refine(window)?;
        let d = domain.refine(window)?;
        let values = f
            .values
            .into_iter()
            .filter(|(k, _)| d.words().binary_search(k).is_ok())
            .collect();
        Ok(LocallyConstant {
            domain: domain.clone(),
            window,
            values,
        })
    }

    /// The function `x ↦ self(Φ^k x)` on `piece`; requires `Φ^k(piece)`
    /// inside the domain.
    pub fn pull(&self, piece: &ClopenSet, k: i64) -> Result<Self> {
        let mut out = Self::zero(piece);
        for (v, set) in self.level_sets()? {
            let part = set.image(-k)?.intersection(piece)?;
            if !part.is_empty() {
                out = out.add(&Self::on_set(piece, &part, v)?)?;
            }
        }
        Ok(out)
    }

    /// Sum of functions living on disjoint pieces of `domain`.
    pub fn glue(domain: &ClopenSet, parts: &[Self]) -> Result<Self> {
        let mut out = Self::zero(domain);
        for p in parts {
            out = out.add(&p.extend_by_zero(domain)?)?;
        }
        Ok(out)
    }

    /// Shrinks the window as far as the values and the domain allow.
    pub fn simplify(&self) -> Result<Self> {
        let dom = self.domain.simplify()?;
        let mut cur = LocallyConstant {
            domain: dom.clone(),
            window: self.window,
            values: self.values.clone(),
        };
        let sys = self.domain.system().clone();
        loop {
            let w = cur.window;
            if w.len == 0 || w == dom.window() {
                break;
            }
            let mut cands = vec![Window::new(w.start, w.len - 1)];
            if !sys.is_odometer() {
                cands.push(Window::new(w.start + 1, w.len - 1));
            }
            let mut moved = false;
            for c in cands {
                if !c.contains(&dom.window()) {
                    continue;
                }
                let off = (c.start - w.start) as usize;
                let atoms = cur.domain.refine(w)?;
                let mut proj: HashMap<Word, V> = HashMap::new();
                let mut ok = true;
                for u in atoms.words() {
                    let p = u[off..off + c.len].to_vec();
                    let v = cur.value_on(u);
                    match proj.get(&p) {
                        Some(x) if x != &v => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            proj.insert(p, v);
                        }
                    }
                }
                if ok {
                    let values = proj.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                    let c = if c.len == 0 { Window::EMPTY } else { c };
                    cur = LocallyConstant {
                        domain: cur.domain.clone(),
                        window: c,
                        values,
                    };
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
        Ok(cur)
    }
}

impl IntFunction {
    pub fn indicator(domain: &ClopenSet, set: &ClopenSet) -> Result<Self> {
        Self::on_set(domain, set, 1)
    }

    /// Values as a vector over the given atoms, which must refine the
    /// function's window.
    pub fn coordinates(&self, window: Window, atoms: &[Word]) -> Result<Vec<i64>> {
        let f = self.refine(window)?;
        Ok(atoms.iter().map(|a| f.value_on(a)).collect())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.values().all(|&v| v >= 0)
    }

    /// Uniform values in `-bound..=bound` on the atoms of `domain` at a
    /// window containing the domain's.
    pub fn random<R: rand::Rng + ?Sized>(
        domain: &ClopenSet,
        window: Window,
        bound: i64,
        rng: &mut R,
    ) -> Result<Self> {
        let window = window.hull(&domain.window());
        let mut values = BTreeMap::new();
        for w in domain.refine(window)?.words() {
            let v = rng.gen_range(-bound..=bound);
            if v != 0 {
                values.insert(w.clone(), v);
            }
        }
        Self::from_values(domain, window, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::SymbolicSystem;

    fn cyl(s: &SymbolicSystem, w: &str) -> ClopenSet {
        ClopenSet::parse_cylinder(s, w).unwrap()
    }

    #[test]
    fn arithmetic_and_constancy() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let full = ClopenSet::full(&s);
        let a = IntFunction::indicator(&full, &cyl(&s, "0")).unwrap();
        let b = IntFunction::indicator(&full, &cyl(&s, "1")).unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.constant_value().unwrap(), Some(1));
        assert_eq!(sum.simplify().unwrap().window().len, 0);
        assert_eq!(a.constant_value().unwrap(), None);
        assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn pull_along_shift() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let full = ClopenSet::full(&s);
        let f = IntFunction::indicator(&full, &cyl(&s, "11")).unwrap();
        // f∘Φ is the indicator of Φ^{-1}[11] = [01]
        let g = f.pull(&full, 1).unwrap();
        assert!(g
            .same(&IntFunction::indicator(&full, &cyl(&s, "01")).unwrap())
            .unwrap());
    }

    #[test]
    fn subshift_eval_and_restrict() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let full = ClopenSet::full(&s);
        let f = IntFunction::on_set(&full, &cyl(&s, "ab"), 5).unwrap();
        let p = s.default_point();
        // z = ...a.abaab..., so z_0 z_1 = ab
        assert_eq!(f.eval(&p).unwrap(), 5);
        let r = f.restrict(&cyl(&s, "a")).unwrap();
        assert_eq!(r.constant_value().unwrap(), None);
        let r = f.restrict(&cyl(&s, "b")).unwrap();
        assert_eq!(r.constant_value().unwrap(), Some(0));
    }
}
