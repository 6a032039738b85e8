use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::{ClopenSet, Family, SymbolicSystem, Window, Word};
use crate::error::{Error, Result};

/// Error budget attached to every approximate subshift measure.
pub const EPS_MU: f64 = 1e-12;

const POWER_ITERATION_LIMIT: usize = 200_000;

/// The measure of a clopen set: exact for odometers, an f64 with an error
/// bound otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    Exact(BigRational),
    Approx { value: f64, err: f64 },
}

impl Weight {
    pub fn zero_exact() -> Self {
        Weight::Exact(BigRational::zero())
    }

    pub fn value(&self) -> f64 {
        match self {
            Weight::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Weight::Approx { value, .. } => *value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            Weight::Exact(_) => 0.0,
            Weight::Approx { err, .. } => *err,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Weight::Exact(_))
    }

    pub fn add(&self, other: &Weight) -> Weight {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => Weight::Exact(a + b),
            _ => Weight::Approx {
                value: self.value() + other.value(),
                err: self.err() + other.err(),
            },
        }
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => Weight::Exact(a - b),
            _ => Weight::Approx {
                value: self.value() - other.value(),
                err: self.err() + other.err(),
            },
        }
    }

    pub fn scale(&self, k: i64) -> Weight {
        match self {
            Weight::Exact(a) => Weight::Exact(a * BigRational::from_integer(BigInt::from(k))),
            Weight::Approx { value, err } => Weight::Approx {
                value: value * k as f64,
                err: err * k.unsigned_abs() as f64,
            },
        }
    }

    /// Equality up to the combined error bounds plus `slack`.
    pub fn agrees(&self, other: &Weight, slack: f64) -> bool {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => a == b,
            _ => (self.value() - other.value()).abs() <= self.err() + other.err() + slack,
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        match self {
            Weight::Exact(q) => {
                m.serialize_entry("exact", &q.to_string())?;
                m.serialize_entry("value", &self.value())?;
            }
            Weight::Approx { value, err } => {
                m.serialize_entry("value", value)?;
                m.serialize_entry("err", err)?;
            }
        }
        m.end()
    }
}

/// The unique invariant probability measure of a uniquely ergodic
/// symbolic system.
pub struct InvariantMeasure {
    sys: SymbolicSystem,
    frequencies: Mutex<HashMap<usize, Arc<HashMap<Word, f64>>>>,
}

impl InvariantMeasure {
    pub fn new(sys: &SymbolicSystem) -> Self {
        InvariantMeasure {
            sys: sys.clone(),
            frequencies: Mutex::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &SymbolicSystem {
        &self.sys
    }

    pub fn measure(&self, a: &ClopenSet) -> Result<Weight> {
        if a.system() != &self.sys {
            return Err(Error::SystemMismatch);
        }
        if a.is_empty() {
            return Ok(match self.sys.family() {
                Family::Odometer { .. } => Weight::zero_exact(),
                Family::Substitution(_) => Weight::Approx {
                    value: 0.0,
                    err: 0.0,
                },
            });
        }
        let w = a.window();
        match self.sys.family() {
            Family::Odometer { .. } => {
                let mut denom = BigInt::one();
                for i in 0..w.len {
                    denom *= BigInt::from(self.sys.symbols_at(i as i64));
                }
                Ok(Weight::Exact(BigRational::new(
                    BigInt::from(a.words().len()),
                    denom,
                )))
            }
            Family::Substitution(_) => {
                let table = self.frequencies(w.len)?;
                let mut value = 0.0;
                for word in a.words() {
                    value += table.get(word).copied().ok_or(Error::MeasureDepth(w.len))?;
                }
                Ok(Weight::Approx { value, err: EPS_MU })
            }
        }
    }

    pub fn measure_f64(&self, a: &ClopenSet) -> Result<f64> {
        Ok(self.measure(a)?.value())
    }

    /// Frequencies of all admissible subshift words of length `n`.
    pub fn frequencies(&self, n: usize) -> Result<Arc<HashMap<Word, f64>>> {
        if let Some(t) = self.frequencies.lock().unwrap().get(&n) {
            return Ok(t.clone());
        }
        let sub = self
            .sys
            .substitution_rule()
            .ok_or_else(|| Error::Invalid("word frequencies are defined for subshifts".into()))?;
        let words = self.sys.language(Window::new(0, n))?;
        let table: HashMap<Word, f64> = if n == 0 {
            [(Vec::new(), 1.0)].into_iter().collect()
        } else {
            let index: HashMap<&Word, usize> =
                words.iter().enumerate().map(|(i, w)| (w, i)).collect();
            let mut q = 1;
            while (0..sub.letters.len() as u8).any(|a| sub.apply_n(&[a], q).len() < n) {
                q += 1;
            }
            // induced substitution on n-blocks, as a sparse row list
            let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(words.len());
            for w in words.iter() {
                let img = sub.apply_n(w, q);
                let first = sub.apply_n(&w[..1], q).len();
                let mut row: HashMap<usize, f64> = HashMap::new();
                for i in 0..first {
                    let j = *index
                        .get(&img[i..i + n].to_vec())
                        .ok_or(Error::MeasureDepth(n))?;
                    *row.entry(j).or_default() += 1.0;
                }
                let mut row: Vec<(usize, f64)> = row.into_iter().collect();
                row.sort_by_key(|e| e.0);
                rows.push(row);
            }
            let m = words.len();
            let mut v = vec![1.0 / m as f64; m];
            for _ in 0..POWER_ITERATION_LIMIT {
                let mut next = vec![0.0; m];
                for (i, row) in rows.iter().enumerate() {
                    for &(j, c) in row {
                        next[j] += v[i] * c;
                    }
                }
                let s: f64 = next.iter().sum();
                next.iter_mut().for_each(|x| *x /= s);
                let diff = next
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                v = next;
                if diff <= 4.0 * f64::EPSILON {
                    break;
                }
            }
            words.iter().cloned().zip(v).collect()
        };
        let arc = Arc::new(table);
        self.frequencies.lock().unwrap().insert(n, arc.clone());
        Ok(arc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empirical(sys: &SymbolicSystem, word: &str) -> f64 {
        let sub = sys.substitution_rule().unwrap();
        let mut long = vec![0u8];
        while long.len() < 1 << 20 {
            long = sub.apply(&long);
        }
        let w = sys.parse_word(word).unwrap();
        let hits = long.windows(w.len()).filter(|x| *x == w.as_slice()).count();
        hits as f64 / (long.len() - w.len() + 1) as f64
    }

    #[test]
    fn fibonacci_frequencies_match_golden_ratio() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let mu = InvariantMeasure::new(&s);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let cases = [
            ("a", 1.0 / phi),
            ("b", 1.0 / (phi * phi)),
            ("aa", 1.0 / phi.powi(3)),
            ("ab", 1.0 / (phi * phi)),
            ("ba", 1.0 / (phi * phi)),
        ];
        for (w, expect) in cases {
            let c = ClopenSet::parse_cylinder(&s, w).unwrap();
            let got = mu.measure(&c).unwrap();
            assert!(
                (got.value() - expect).abs() < EPS_MU,
                "{w}: {} vs {expect}",
                got.value()
            );
        }
    }

    #[test]
    fn frequencies_agree_with_counts() {
        for desc in [
            "substitution a:ab,b:a",
            "substitution a:ab,b:ba",
            "substitution a:aab,b:ba",
        ] {
            let s = SymbolicSystem::parse(desc).unwrap();
            let mu = InvariantMeasure::new(&s);
            for n in 1..6 {
                for w in s.language(Window::new(0, n)).unwrap().iter() {
                    let ws = s.word_string(w);
                    let c = ClopenSet::cylinder(&s, 0, w.clone()).unwrap();
                    let got = mu.measure_f64(&c).unwrap();
                    let emp = empirical(&s, &ws);
                    assert!((got - emp).abs() < 1e-4, "{desc} {ws}: {got} vs {emp}");
                }
            }
        }
    }

    #[test]
    fn odometer_measure_is_exact() {
        let s = SymbolicSystem::parse("odometer base=2,3").unwrap();
        let mu = InvariantMeasure::new(&s);
        let c = ClopenSet::parse_cylinder(&s, "12").unwrap();
        assert_eq!(
            mu.measure(&c).unwrap(),
            Weight::Exact(BigRational::new(1.into(), 6.into()))
        );
        let full = ClopenSet::full(&s);
        assert_eq!(
            mu.measure(&full).unwrap(),
            Weight::Exact(BigRational::one())
        );
    }

    #[test]
    fn shifted_cylinders_have_equal_measure() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let mu = InvariantMeasure::new(&s);
        let c = ClopenSet::parse_cylinder(&s, "aab").unwrap();
        let m0 = mu.measure(&c).unwrap();
        let m7 = mu.measure(&c.image(7).unwrap()).unwrap();
        assert!(m0.agrees(&m7, 0.0));
    }
}
