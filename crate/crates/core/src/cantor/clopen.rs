use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PointCode, SymbolicSystem, Word};
use crate::error::{Error, Result};

/// A block of consecutive coordinates `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub len: usize,
}

impl Window {
    pub const EMPTY: Window = Window { start: 0, len: 0 };

    pub fn new(start: i64, len: usize) -> Self {
        Window { start, len }
    }

    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }

    /// Smallest window containing both; empty windows are neutral.
    pub fn hull(&self, other: &Window) -> Window {
        if self.len == 0 {
            return *other;
        }
        if other.len == 0 {
            return *self;
        }
        let s = self.start.min(other.start);
        let e = self.end().max(other.end());
        Window::new(s, (e - s) as usize)
    }

    pub fn contains(&self, other: &Window) -> bool {
        other.len == 0 || (self.start <= other.start && other.end() <= self.end())
    }

    pub fn shifted(&self, d: i64) -> Window {
        Window::new(self.start + d, self.len)
    }
}

/// A clopen subset of a symbolic system: the points whose coordinates on
/// `window` form one of `words`.
#[derive(Clone)]
pub struct ClopenSet {
    sys: SymbolicSystem,
    window: Window,
    words: Vec<Word>,
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.words.iter().map(|w| self.sys.word_string(w)).collect();
        write!(f, "Clopen[{}..{})", self.window.start, self.window.end())?;
        write!(f, "{{{}}}", ws.join(","))
    }
}

impl PartialEq for ClopenSet {
    fn eq(&self, other: &Self) -> bool {
        self.same(other).unwrap_or(false)
    }
}

fn sorted_merge(a: &[Word], b: &[Word], keep_a: bool, keep_both: bool, keep_b: bool) -> Vec<Word> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        let ord = if i == a.len() {
            Ordering::Greater
        } else if j == b.len() {
            Ordering::Less
        } else {
            a[i].cmp(&b[j])
        };
        match ord {
            Ordering::Less => {
                if keep_a {
                    out.push(a[i].clone());
                }
                i += 1;
            }
            Ordering::Greater => {
                if keep_b {
                    out.push(b[j].clone());
                }
                j += 1;
            }
            Ordering::Equal => {
                if keep_both {
                    out.push(a[i].clone());
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl ClopenSet {
    pub fn full(sys: &SymbolicSystem) -> Self {
        ClopenSet {
            sys: sys.clone(),
            window: Window::EMPTY,
            words: vec![Vec::new()],
        }
    }

    pub fn empty(sys: &SymbolicSystem) -> Self {
        ClopenSet {
            sys: sys.clone(),
            window: Window::EMPTY,
            words: Vec::new(),
        }
    }

    /// Builds a set from words on a window, rejecting inadmissible words.
    pub fn from_words(sys: &SymbolicSystem, window: Window, mut words: Vec<Word>) -> Result<Self> {
        sys.check_window(window)?;
        for w in &words {
            if !sys.is_admissible(window, w)? {
                return Err(Error::Inadmissible(sys.word_string(w)));
            }
        }
        words.sort();
        words.dedup();
        let window = if window.len == 0 {
            Window::EMPTY
        } else {
            window
        };
        Ok(ClopenSet {
            sys: sys.clone(),
            window,
            words,
        })
    }

    pub fn cylinder(sys: &SymbolicSystem, start: i64, word: Word) -> Result<Self> {
        Self::from_words(sys, Window::new(start, word.len()), vec![word])
    }

    /// Parses `[start:]word`; a bare word starts at 0.
    pub fn parse_cylinder(sys: &SymbolicSystem, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (start, word) = match spec.rsplit_once(':') {
            Some((s, w)) => (
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Invalid(format!("bad cylinder start {s:?}")))?,
                w.trim(),
            ),
            None => (0, spec),
        };
        Self::cylinder(sys, start, sys.parse_word(word)?)
    }

    /// Union of all depth-`d` atoms given by the predicate.
    pub fn from_atoms(
        sys: &SymbolicSystem,
        window: Window,
        pick: impl Fn(&[u8]) -> bool,
    ) -> Result<Self> {
        let words = sys
            .language(window)?
            .iter()
            .filter(|w| pick(w))
            .cloned()
            .collect();
        Self::from_words(sys, window, words)
    }

    pub fn system(&self) -> &SymbolicSystem {
        &self.sys
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn check_same_system(&self, other: &ClopenSet) -> Result<()> {
        if self.sys != other.sys {
            return Err(Error::SystemMismatch);
        }
        Ok(())
    }

    /// The same set described on a larger window.
    pub fn refine(&self, target: Window) -> Result<ClopenSet> {
        if self.window == target || self.words.is_empty() {
            return Ok(self.clone());
        }
        if !target.contains(&self.window) {
            return Err(Error::Invalid(format!(
                "cannot refine window {:?} to {:?}",
                self.window, target
            )));
        }
        self.sys.check_window(target)?;
        let words = if self.window.len == 0 {
            self.sys.language(target)?.as_ref().clone()
        } else if self.sys.is_odometer() {
            let mut out = self.words.clone();
            for i in self.window.len..target.len {
                let b = self.sys.symbols_at(i as i64) as u8;
                out = out
                    .into_iter()
                    .flat_map(|p| {
                        (0..b).map(move |d| {
                            let mut q = p.clone();
                            q.push(d);
                            q
                        })
                    })
                    .collect();
            }
            out.sort();
            out
        } else {
            let off = (self.window.start - target.start) as usize;
            let len = self.window.len;
            self.sys
                .language(target)?
                .iter()
                .filter(|u| {
                    self.words
                        .binary_search_by(|w| w.as_slice().cmp(&u[off..off + len]))
                        .is_ok()
                })
                .cloned()
                .collect()
        };
        Ok(ClopenSet {
            sys: self.sys.clone(),
            window: target,
            words,
        })
    }

    fn aligned(&self, other: &ClopenSet) -> Result<(ClopenSet, ClopenSet)> {
        self.check_same_system(other)?;
        let w = self.window.hull(&other.window);
        Ok((self.refine(w)?, other.refine(w)?))
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        if self.is_empty() {
            self.check_same_system(other)?;
            return Ok(other.clone());
        }
        if other.is_empty() {
            self.check_same_system(other)?;
            return Ok(self.clone());
        }
        let (a, b) = self.aligned(other)?;
        let words = sorted_merge(&a.words, &b.words, true, true, true);
        Ok(ClopenSet { words, ..a })
    }

    pub fn intersection(&self, other: &ClopenSet) -> Result<ClopenSet> {
        if self.is_empty() || other.is_empty() {
            self.check_same_system(other)?;
            return Ok(ClopenSet::empty(&self.sys));
        }
        let (a, b) = self.aligned(other)?;
        let words = sorted_merge(&a.words, &b.words, false, true, false);
        Ok(ClopenSet { words, ..a })
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        if self.is_empty() || other.is_empty() {
            self.check_same_system(other)?;
            return Ok(self.clone());
        }
        let (a, b) = self.aligned(other)?;
        let words = sorted_merge(&a.words, &b.words, true, false, false);
        Ok(ClopenSet { words, ..a })
    }

    pub fn complement(&self) -> Result<ClopenSet> {
        ClopenSet::full(&self.sys).difference(self)
    }

    pub fn is_subset(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }

    /// Set equality, independent of the describing window.
    pub fn same(&self, other: &ClopenSet) -> Result<bool> {
        let (a, b) = self.aligned(other)?;
        Ok(a.words == b.words)
    }

    /// Image under the `k`-th power of the system homeomorphism.
    pub fn image(&self, k: i64) -> Result<ClopenSet> {
        if self.is_empty() || k == 0 {
            return Ok(self.clone());
        }
        if self.sys.is_odometer() {
            let mut words: Vec<Word> = self
                .words
                .iter()
                .map(|w| self.sys.odometer_add(w, k as i128))
                .collect();
            words.sort();
            Ok(ClopenSet {
                sys: self.sys.clone(),
                window: self.window,
                words,
            })
        } else {
            Ok(ClopenSet {
                sys: self.sys.clone(),
                window: if self.window.len == 0 {
                    self.window
                } else {
                    self.window.shifted(-k)
                },
                words: self.words.clone(),
            })
        }
    }

    pub fn preimage(&self, k: i64) -> Result<ClopenSet> {
        self.image(-k)
    }

    /// Shrinks the window as far as possible without changing the set.
    pub fn simplify(&self) -> Result<ClopenSet> {
        if self.is_empty() {
            return Ok(ClopenSet::empty(&self.sys));
        }
        let mut cur = self.clone();
        loop {
            if cur.window.len == 0 {
                return Ok(ClopenSet::full(&self.sys));
            }
            let mut changed = false;
            let w = cur.window;
            let mut tries = vec![Window::new(w.start, w.len - 1)];
            if !self.sys.is_odometer() {
                tries.push(Window::new(w.start + 1, w.len - 1));
            }
            for (t, cand) in tries.into_iter().enumerate() {
                let mut proj: Vec<Word> = cur
                    .words
                    .iter()
                    .map(|u| {
                        if t == 0 {
                            u[..u.len() - 1].to_vec()
                        } else {
                            u[1..].to_vec()
                        }
                    })
                    .collect();
                proj.sort();
                proj.dedup();
                let coarse = ClopenSet {
                    sys: self.sys.clone(),
                    window: if cand.len == 0 { Window::EMPTY } else { cand },
                    words: proj,
                };
                if coarse.refine(w)?.words == cur.words {
                    cur = coarse;
                    changed = true;
                    break;
                }
            }
            if !changed {
                return Ok(cur);
            }
        }
    }

    pub fn contains(&self, p: &PointCode) -> Result<bool> {
        if self.is_empty() {
            return Ok(false);
        }
        let c = self.sys.point_coords(p, self.window)?;
        Ok(self.words.binary_search(&c).is_ok())
    }

    /// Splits the set into atoms of its window.
    pub fn atoms(&self) -> Vec<ClopenSet> {
        self.words
            .iter()
            .map(|w| ClopenSet {
                sys: self.sys.clone(),
                window: self.window,
                words: vec![w.clone()],
            })
            .collect()
    }

    pub fn to_json(&self) -> ClopenJson {
        ClopenJson {
            system: self.sys.descriptor().to_string(),
            start: self.window.start,
            len: self.window.len,
            words: self.words.iter().map(|w| self.sys.word_string(w)).collect(),
        }
    }

    pub fn from_json(sys: &SymbolicSystem, j: &ClopenJson) -> Result<ClopenSet> {
        if j.system != sys.descriptor() {
            return Err(Error::SystemMismatch);
        }
        let words = j
            .words
            .iter()
            .map(|w| sys.parse_word(w))
            .collect::<Result<Vec<_>>>()?;
        ClopenSet::from_words(sys, Window::new(j.start, j.len), words)
    }
}

/// Serialized form of a clopen set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClopenJson {
    pub system: String,
    pub start: i64,
    pub len: usize,
    pub words: Vec<String>,
}

impl SymbolicSystem {
    /// Adds `k` to a finite odometer word with carries dropped past its end.
    pub fn odometer_add(&self, w: &[u8], k: i128) -> Word {
        let mut carry = k;
        let mut out = Vec::with_capacity(w.len());
        for (i, &d) in w.iter().enumerate() {
            let b = self.symbols_at(i as i64) as i128;
            let v = d as i128 + carry;
            out.push(v.rem_euclid(b) as u8);
            carry = v.div_euclid(b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic() -> SymbolicSystem {
        SymbolicSystem::parse("odometer base=2").unwrap()
    }

    fn fib() -> SymbolicSystem {
        SymbolicSystem::parse("substitution a:ab,b:a").unwrap()
    }

    #[test]
    fn dyadic_image_rolls_over() {
        let s = dyadic();
        let a = ClopenSet::parse_cylinder(&s, "11").unwrap();
        let img = a.image(1).unwrap();
        assert_eq!(img.words(), &[vec![0, 0]]);
        assert_eq!(img.preimage(1).unwrap(), a);
    }

    #[test]
    fn difference_of_cylinders() {
        let s = dyadic();
        let a = ClopenSet::parse_cylinder(&s, "0").unwrap();
        let b = ClopenSet::parse_cylinder(&s, "01").unwrap();
        let d = a.difference(&b).unwrap();
        assert_eq!(d.words(), &[vec![0, 0]]);
        assert_eq!(d.window(), Window::new(0, 2));
    }

    #[test]
    fn simplify_merges_siblings() {
        let s = dyadic();
        let a = ClopenSet::parse_cylinder(&s, "1")
            .unwrap()
            .refine(Window::new(0, 4))
            .unwrap();
        assert_eq!(a.words().len(), 8);
        let b = a.simplify().unwrap();
        assert_eq!(b.window(), Window::new(0, 1));
        let f = ClopenSet::full(&s)
            .refine(Window::new(0, 3))
            .unwrap()
            .simplify()
            .unwrap();
        assert_eq!(f.window().len, 0);
        assert_eq!(f.words().len(), 1);
    }

    #[test]
    fn subshift_image_shifts_window() {
        let s = fib();
        let b = ClopenSet::parse_cylinder(&s, "b").unwrap();
        let img = b.image(1).unwrap();
        assert_eq!(img.window(), Window::new(-1, 1));
        // b is always preceded by a
        let a_then = ClopenSet::parse_cylinder(&s, "-1:a").unwrap();
        assert!(img.is_subset(&ClopenSet::full(&s)).unwrap());
        assert!(b.is_subset(&a_then).unwrap());
    }

    #[test]
    fn subshift_simplify_drops_forced_coordinates() {
        let s = fib();
        let b = ClopenSet::parse_cylinder(&s, "b").unwrap();
        let wide = b.refine(Window::new(-2, 5)).unwrap();
        assert_eq!(wide.simplify().unwrap().window(), Window::new(0, 1));
    }

    #[test]
    fn inadmissible_word_rejected() {
        let s = fib();
        assert!(matches!(
            ClopenSet::parse_cylinder(&s, "bb").unwrap_err(),
            Error::Inadmissible(_)
        ));
        let d = dyadic();
        assert!(ClopenSet::parse_cylinder(&d, "3:0").is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = fib();
        let a = ClopenSet::parse_cylinder(&s, "-2:aab").unwrap();
        let j = a.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: ClopenJson = serde_json::from_str(&text).unwrap();
        assert_eq!(ClopenSet::from_json(&s, &back).unwrap(), a);
    }

    #[test]
    fn system_mismatch() {
        let a = ClopenSet::full(&dyadic());
        let b = ClopenSet::full(&fib());
        assert_eq!(a.union(&b).unwrap_err(), Error::SystemMismatch);
    }
}
