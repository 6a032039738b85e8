use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Window, Word};
use crate::error::{Error, Result};

/// Word length up to which the complexity function is scanned for a stall.
pub const DEFAULT_APERIODICITY_BOUND: usize = 64;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A primitive substitution on a finite alphabet. Letters are stored as
/// indices into `letters`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub letters: Vec<char>,
    pub rules: Vec<Word>,
}

impl Substitution {
    pub fn apply(&self, w: &[u8]) -> Word {
        w.iter()
            .flat_map(|&a| self.rules[a as usize].iter().copied())
            .collect()
    }

    pub fn apply_n(&self, w: &[u8], n: u32) -> Word {
        let mut out = w.to_vec();
        for _ in 0..n {
            out = self.apply(&out);
        }
        out
    }

    /// `m[a][b]` = number of occurrences of `b` in the image of `a`.
    pub fn incidence(&self) -> Vec<Vec<u64>> {
        let k = self.letters.len();
        let mut m = vec![vec![0u64; k]; k];
        for (a, rule) in self.rules.iter().enumerate() {
            for &b in rule {
                m[a][b as usize] += 1;
            }
        }
        m
    }

    /// Some power of the incidence matrix is entrywise positive. Wielandt's
    /// bound `(k-1)^2 + 1` limits the search.
    pub fn is_primitive(&self) -> bool {
        let k = self.letters.len();
        let base: Vec<Vec<bool>> = self
            .incidence()
            .iter()
            .map(|r| r.iter().map(|&x| x > 0).collect())
            .collect();
        let mut p = base.clone();
        for _ in 0..((k - 1) * (k - 1) + 1) {
            if p.iter().all(|r| r.iter().all(|&x| x)) {
                return true;
            }
            let mut q = vec![vec![false; k]; k];
            for i in 0..k {
                for j in 0..k {
                    q[i][j] = (0..k).any(|l| p[i][l] && base[l][j]);
                }
            }
            p = q;
        }
        p.iter().all(|r| r.iter().all(|&x| x))
    }

    fn min_image_len(&self, n: u32) -> usize {
        (0..self.letters.len() as u8)
            .map(|a| self.apply_n(&[a], n).len())
            .min()
            .unwrap_or(0)
    }

    /// Length-2 factors of the subshift language, by closure under the
    /// substitution.
    fn two_letter_words(&self) -> BTreeSet<Word> {
        let mut set = BTreeSet::new();
        for rule in &self.rules {
            for f in rule.windows(2) {
                set.insert(f.to_vec());
            }
        }
        loop {
            let mut grown = set.clone();
            for uv in &set {
                for f in self.apply(uv).windows(2) {
                    grown.insert(f.to_vec());
                }
            }
            if grown.len() == set.len() {
                return set;
            }
            set = grown;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    /// Add-one-with-carry on sequences whose `i`-th digit is below
    /// `bases[i % bases.len()]`; digit 0 is least significant.
    Odometer { bases: Vec<u64> },
    /// Left shift on the two-sided subshift of a primitive aperiodic substitution.
    Substitution(Substitution),
}

struct Inner {
    family: Family,
    descriptor: String,
    id: u64,
    two_letter: BTreeSet<Word>,
    languages: Mutex<HashMap<usize, Arc<Vec<Word>>>>,
}

/// A free minimal Cantor system given symbolically. Cloning is cheap.
#[derive(Clone)]
pub struct SymbolicSystem {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for SymbolicSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymbolicSystem({})", self.inner.descriptor)
    }
}

impl PartialEq for SymbolicSystem {
    fn eq(&self, other: &Self) -> bool {
        self.inner.id == other.inner.id && self.inner.family == other.inner.family
    }
}

impl SymbolicSystem {
    /// Parses `odometer base=<int>[,<int>...]` or
    /// `substitution <letter>:<word>(,<letter>:<word>)*`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        Self::parse_with_bound(descriptor, DEFAULT_APERIODICITY_BOUND)
    }

    pub fn parse_with_bound(descriptor: &str, aperiodicity_bound: usize) -> Result<Self> {
        let d = descriptor.trim();
        let (kind, rest) = d
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Descriptor(d.to_string()))?;
        let rest = rest.trim();
        match kind {
            "odometer" => {
                let list = rest
                    .strip_prefix("base=")
                    .ok_or_else(|| Error::Descriptor(format!("expected base=..., got {rest:?}")))?;
                let bases = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Descriptor(format!("bad base entry {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::odometer(bases)
            }
            "substitution" => {
                let mut letters = Vec::new();
                let mut raw = Vec::new();
                for rule in rest.split(',') {
                    let (l, w) = rule
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| Error::Descriptor(format!("bad rule {rule:?}")))?;
                    let mut lc = l.trim().chars();
                    let letter = match (lc.next(), lc.next()) {
                        (Some(c), None) => c,
                        _ => return Err(Error::Descriptor(format!("bad letter {l:?}"))),
                    };
                    if letters.contains(&letter) {
                        return Err(Error::Descriptor(format!("letter {letter} defined twice")));
                    }
                    letters.push(letter);
                    raw.push(w.trim().to_string());
                }
                let mut rules = Vec::new();
                for w in &raw {
                    if w.is_empty() {
                        return Err(Error::Descriptor("empty substitution image".into()));
                    }
                    let word = w
                        .chars()
                        .map(|c| {
                            letters
                                .iter()
                                .position(|&l| l == c)
                                .map(|i| i as u8)
                                .ok_or_else(|| Error::Descriptor(format!("unknown letter {c}")))
                        })
                        .collect::<Result<Word>>()?;
                    rules.push(word);
                }
                Self::substitution(Substitution { letters, rules }, aperiodicity_bound)
            }
            _ => Err(Error::Descriptor(format!("unknown family {kind:?}"))),
        }
    }

    pub fn odometer(bases: Vec<u64>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::Descriptor("odometer needs at least one base".into()));
        }
        if let Some(&b) = bases.iter().find(|&&b| b < 2) {
            return Err(Error::BaseTooSmall(b));
        }
        if bases.iter().any(|&b| b > DIGITS.len() as u64) {
            return Err(Error::Descriptor(
                "odometer bases above 36 are not supported".into(),
            ));
        }
        let list: Vec<String> = bases.iter().map(|b| b.to_string()).collect();
        let descriptor = format!("odometer base={}", list.join(","));
        Ok(Self::build(
            Family::Odometer { bases },
            descriptor,
            BTreeSet::new(),
        ))
    }

    pub fn substitution(sub: Substitution, aperiodicity_bound: usize) -> Result<Self> {
        if sub.letters.len() < 2 || !sub.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        let rules: Vec<String> = sub
            .letters
            .iter()
            .zip(&sub.rules)
            .map(|(l, r)| {
                format!(
                    "{l}:{}",
                    r.iter()
                        .map(|&x| sub.letters[x as usize])
                        .collect::<String>()
                )
            })
            .collect();
        let descriptor = format!("substitution {}", rules.join(","));
        let two_letter = sub.two_letter_words();
        let sys = Self::build(Family::Substitution(sub), descriptor, two_letter);
        let mut prev = sys.language(Window::new(0, 1))?.len();
        for n in 1..aperiodicity_bound {
            let next = sys.language(Window::new(0, n + 1))?.len();
            if next <= prev {
                return Err(Error::Periodic(n));
            }
            prev = next;
        }
        Ok(sys)
    }

    fn build(family: Family, descriptor: String, two_letter: BTreeSet<Word>) -> Self {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        descriptor.hash(&mut h);
        SymbolicSystem {
            inner: Arc::new(Inner {
                family,
                descriptor,
                id: h.finish(),
                two_letter,
                languages: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn family(&self) -> &Family {
        &self.inner.family
    }

    pub fn descriptor(&self) -> &str {
        &self.inner.descriptor
    }

    pub fn id(&self) -> u64 {
        self.inner.id
    }

    pub fn is_odometer(&self) -> bool {
        matches!(self.inner.family, Family::Odometer { .. })
    }

    pub fn substitution_rule(&self) -> Option<&Substitution> {
        match &self.inner.family {
            Family::Substitution(s) => Some(s),
            Family::Odometer { .. } => None,
        }
    }

    /// Number of symbols allowed at coordinate `i`.
    pub fn symbols_at(&self, i: i64) -> u64 {
        match &self.inner.family {
            Family::Odometer { bases } => bases[i.rem_euclid(bases.len() as i64) as usize],
            Family::Substitution(s) => s.letters.len() as u64,
        }
    }

    /// Canonical window of the depth-`d` partition: one-sided prefixes for
    /// odometers, centred blocks for subshifts.
    pub fn depth_window(&self, d: usize) -> Window {
        if self.is_odometer() {
            Window::new(0, d)
        } else {
            Window::new(-((d / 2) as i64), d)
        }
    }

    pub fn check_window(&self, w: Window) -> Result<()> {
        if self.is_odometer() && w.len > 0 && w.start != 0 {
            return Err(Error::Invalid(format!(
                "odometer windows start at coordinate 0, got {}",
                w.start
            )));
        }
        Ok(())
    }

    /// All admissible words on the window, sorted.
    pub fn language(&self, w: Window) -> Result<Arc<Vec<Word>>> {
        self.check_window(w)?;
        let key = w.len;
        if let Some(l) = self.inner.languages.lock().unwrap().get(&key) {
            return Ok(l.clone());
        }
        let words = match &self.inner.family {
            Family::Odometer { .. } => {
                let mut out: Vec<Word> = vec![Vec::new()];
                for i in 0..w.len {
                    let b = self.symbols_at(i as i64) as u8;
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
            }
            Family::Substitution(s) => self.subshift_language(s, w.len),
        };
        let arc = Arc::new(words);
        self.inner
            .languages
            .lock()
            .unwrap()
            .insert(key, arc.clone());
        Ok(arc)
    }

    fn subshift_language(&self, s: &Substitution, n: usize) -> Vec<Word> {
        match n {
            0 => return vec![Vec::new()],
            1 => return (0..s.letters.len() as u8).map(|a| vec![a]).collect(),
            2 => return self.inner.two_letter.iter().cloned().collect(),
            _ => {}
        }
        let mut k = 0;
        while s.min_image_len(k) < n - 1 {
            k += 1;
        }
        let mut set = BTreeSet::new();
        for uv in &self.inner.two_letter {
            let img = s.apply_n(uv, k);
            for f in img.windows(n) {
                set.insert(f.to_vec());
            }
        }
        set.into_iter().collect()
    }

    pub fn is_admissible(&self, w: Window, word: &[u8]) -> Result<bool> {
        if word.len() != w.len {
            return Ok(false);
        }
        if self.is_odometer() {
            self.check_window(w)?;
            return Ok(word
                .iter()
                .enumerate()
                .all(|(i, &d)| (d as u64) < self.symbols_at(i as i64)));
        }
        Ok(self.language(w)?.binary_search(&word.to_vec()).is_ok())
    }

    pub fn symbol_char(&self, x: u8) -> char {
        match &self.inner.family {
            Family::Odometer { .. } => DIGITS[x as usize] as char,
            Family::Substitution(s) => s.letters[x as usize],
        }
    }

    pub fn word_string(&self, w: &[u8]) -> String {
        w.iter().map(|&x| self.symbol_char(x)).collect()
    }

    pub fn parse_symbol(&self, c: char) -> Result<u8> {
        match &self.inner.family {
            Family::Odometer { .. } => DIGITS
                .iter()
                .position(|&d| d as char == c.to_ascii_lowercase())
                .map(|i| i as u8)
                .ok_or_else(|| Error::Inadmissible(c.to_string())),
            Family::Substitution(s) => s
                .letters
                .iter()
                .position(|&l| l == c)
                .map(|i| i as u8)
                .ok_or_else(|| Error::Inadmissible(c.to_string())),
        }
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        s.chars().map(|c| self.parse_symbol(c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_descriptor() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        assert!(s.is_odometer());
        assert_eq!(s.language(Window::new(0, 3)).unwrap().len(), 8);
        assert_eq!(s.descriptor(), "odometer base=2");
    }

    #[test]
    fn fibonacci_is_primitive() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let sub = s.substitution_rule().unwrap();
        assert_eq!(sub.incidence(), vec![vec![1, 1], vec![1, 0]]);
        // squaring the incidence matrix gives [[2,1],[1,1]] > 0
        assert!(sub.is_primitive());
        // Sturmian complexity n + 1
        for n in 1..20 {
            assert_eq!(s.language(Window::new(0, n)).unwrap().len(), n + 1);
        }
    }

    #[test]
    fn periodic_substitution_rejected() {
        let e = SymbolicSystem::parse("substitution a:ab,b:ab").unwrap_err();
        assert!(matches!(e, Error::Periodic(_)));
    }

    #[test]
    fn non_primitive_rejected() {
        assert_eq!(
            SymbolicSystem::parse("substitution a:ab,b:b").unwrap_err(),
            Error::NotPrimitive
        );
    }

    #[test]
    fn descriptor_errors() {
        assert_eq!(
            SymbolicSystem::parse("odometer base=1").unwrap_err(),
            Error::BaseTooSmall(1)
        );
        assert!(matches!(
            SymbolicSystem::parse("odometer 2").unwrap_err(),
            Error::Descriptor(_)
        ));
        assert!(matches!(
            SymbolicSystem::parse("rotation alpha=0.5").unwrap_err(),
            Error::Descriptor(_)
        ));
        assert!(matches!(
            SymbolicSystem::parse("substitution a:ac,b:a").unwrap_err(),
            Error::Descriptor(_)
        ));
    }

    #[test]
    fn language_by_brute_force() {
        // every factor of a long prefix of the fixed point is in the language
        // and every language word occurs in that prefix
        let s = SymbolicSystem::parse("substitution a:ab,b:ba").unwrap();
        let sub = s.substitution_rule().unwrap();
        let long = sub.apply_n(&[0], 12);
        for n in 1..9 {
            let found: BTreeSet<Word> = long.windows(n).map(|w| w.to_vec()).collect();
            let lang: BTreeSet<Word> = s
                .language(Window::new(0, n))
                .unwrap()
                .iter()
                .cloned()
                .collect();
            assert_eq!(found, lang, "length {n}");
        }
    }
}
