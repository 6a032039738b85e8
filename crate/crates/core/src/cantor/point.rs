use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{SymbolicSystem, Window, Word};
use crate::error::{Error, Result};

/// A finitely described point of a symbolic system.
///
/// Odometer points are eventually periodic digit sequences. Subshift points
/// are shifts `Φ^shift(z)` of a two-sided fixed point `z` of `σ^power` seeded
/// by `z_{-1} = left`, `z_0 = right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointCode {
    EventuallyPeriodic {
        prefix: Word,
        period: Word,
    },
    SubstitutionFixed {
        power: u32,
        left: u8,
        right: u8,
        shift: i64,
    },
}

fn orbit_period(f: impl Fn(u8) -> u8, x: u8, bound: usize) -> Option<u32> {
    let mut y = f(x);
    for p in 1..=bound {
        if y == x {
            return Some(p as u32);
        }
        y = f(y);
    }
    None
}

fn canonical_periodic(mut prefix: Word, period: Word) -> (Word, Word) {
    let n = period.len();
    let q = (1..=n)
        .find(|q| n.is_multiple_of(*q) && (0..n).all(|i| period[i] == period[i % q]))
        .unwrap_or(n);
    let mut period = period[..q].to_vec();
    while let Some(&last) = prefix.last() {
        if last != *period.last().unwrap() {
            break;
        }
        prefix.pop();
        period.rotate_right(1);
    }
    (prefix, period)
}

impl SymbolicSystem {
    fn odometer_cycle(&self) -> usize {
        match self.family() {
            super::Family::Odometer { bases } => bases.len(),
            _ => 1,
        }
    }

    /// Canonical odometer point, after checking every digit is admissible.
    pub fn periodic_point(&self, prefix: Word, period: Word) -> Result<PointCode> {
        if !self.is_odometer() {
            return Err(Error::Invalid(
                "eventually periodic codes describe odometer points".into(),
            ));
        }
        if period.is_empty() {
            return Err(Error::Invalid("empty period".into()));
        }
        let l = period.len().lcm(&self.odometer_cycle());
        for i in 0..prefix.len() + l {
            let d = if i < prefix.len() {
                prefix[i]
            } else {
                period[(i - prefix.len()) % period.len()]
            };
            if d as u64 >= self.symbols_at(i as i64) {
                return Err(Error::Inadmissible(self.word_string(&[d])));
            }
        }
        let (prefix, period) = canonical_periodic(prefix, period);
        Ok(PointCode::EventuallyPeriodic { prefix, period })
    }

    /// The fixed point of the least power of the substitution that fixes the
    /// seed `left.right`, shifted by `shift`.
    pub fn fixed_point(&self, left: u8, right: u8, shift: i64) -> Result<PointCode> {
        let sub = self.substitution_rule().ok_or_else(|| {
            Error::Invalid("substitution points need a substitution system".into())
        })?;
        if !self.is_admissible(Window::new(-1, 2), &[left, right])? {
            return Err(Error::Inadmissible(self.word_string(&[left, right])));
        }
        let k = sub.letters.len();
        let pr = orbit_period(|a| sub.rules[a as usize][0], right, k);
        let pl = orbit_period(|a| *sub.rules[a as usize].last().unwrap(), left, k);
        match (pl, pr) {
            (Some(a), Some(b)) => Ok(PointCode::SubstitutionFixed {
                power: a.lcm(&b),
                left,
                right,
                shift,
            }),
            _ => Err(Error::Invalid(format!(
                "no power of the substitution fixes the seed {}",
                self.word_string(&[left, right])
            ))),
        }
    }

    /// `0^∞` for odometers, the first admissible fixed seed for subshifts.
    pub fn default_point(&self) -> PointCode {
        if self.is_odometer() {
            return PointCode::EventuallyPeriodic {
                prefix: vec![],
                period: vec![0],
            };
        }
        let seeds = self
            .language(Window::new(-1, 2))
            .expect("two-letter language");
        seeds
            .iter()
            .find_map(|s| self.fixed_point(s[0], s[1], 0).ok())
            .expect("a primitive substitution has a periodic two-letter seed")
    }

    pub fn validate_point(&self, p: &PointCode) -> Result<()> {
        match p {
            PointCode::EventuallyPeriodic { prefix, period } => {
                let c = self.periodic_point(prefix.clone(), period.clone())?;
                if &c != p {
                    return Err(Error::Invalid("point code is not canonical".into()));
                }
                Ok(())
            }
            PointCode::SubstitutionFixed {
                power,
                left,
                right,
                shift,
            } => {
                let c = self.fixed_point(*left, *right, *shift)?;
                match c {
                    PointCode::SubstitutionFixed { power: q, .. } if *power % q == 0 => Ok(()),
                    _ => Err(Error::Invalid(
                        "seed is not fixed by the given power".into(),
                    )),
                }
            }
        }
    }

    /// Coordinates of the point on a window.
    pub fn point_coords(&self, p: &PointCode, w: Window) -> Result<Word> {
        self.check_window(w)?;
        match p {
            PointCode::EventuallyPeriodic { prefix, period } => Ok((0..w.len)
                .map(|i| {
                    if i < prefix.len() {
                        prefix[i]
                    } else {
                        period[(i - prefix.len()) % period.len()]
                    }
                })
                .collect()),
            PointCode::SubstitutionFixed {
                power,
                left,
                right,
                shift,
            } => {
                let sub = self.substitution_rule().ok_or(Error::SystemMismatch)?;
                if w.len == 0 {
                    return Ok(vec![]);
                }
                let lo = w.start + shift;
                let hi = w.end() + shift;
                let mut right_half = vec![*right];
                while (right_half.len() as i64) < hi {
                    right_half = sub.apply_n(&right_half, *power);
                }
                let mut left_half = vec![*left];
                while (left_half.len() as i64) < -lo {
                    left_half = sub.apply_n(&left_half, *power);
                }
                Ok((lo..hi)
                    .map(|j| {
                        if j >= 0 {
                            right_half[j as usize]
                        } else {
                            left_half[(left_half.len() as i64 + j) as usize]
                        }
                    })
                    .collect())
            }
        }
    }

    /// Image of the point under the `k`-th power of the system map.
    pub fn point_step(&self, p: &PointCode, k: i64) -> Result<PointCode> {
        match p {
            PointCode::SubstitutionFixed {
                power,
                left,
                right,
                shift,
            } => Ok(PointCode::SubstitutionFixed {
                power: *power,
                left: *left,
                right: *right,
                shift: shift + k,
            }),
            PointCode::EventuallyPeriodic { prefix, period } => {
                if !self.is_odometer() {
                    return Err(Error::SystemMismatch);
                }
                if k == 0 {
                    return Ok(p.clone());
                }
                let l = period.len().lcm(&self.odometer_cycle());
                // enough blocks that the low digits can absorb |k|
                let mut head = prefix.len();
                let mut cap: u128 = 1;
                while cap <= k.unsigned_abs() as u128 {
                    for i in head..head + l {
                        cap = cap.saturating_mul(self.symbols_at(i as i64) as u128);
                    }
                    head += l;
                }
                let total = head + l;
                let mut digits = self.point_coords(p, Window::new(0, total))?;
                let mut carry = k as i128;
                for (i, d) in digits.iter_mut().enumerate() {
                    let b = self.symbols_at(i as i64) as i128;
                    let v = *d as i128 + carry;
                    *d = v.rem_euclid(b) as u8;
                    carry = v.div_euclid(b);
                }
                let tail = match carry {
                    0 => period.clone(),
                    1 => vec![0],
                    -1 => (total..total + self.odometer_cycle())
                        .map(|i| (self.symbols_at(i as i64) - 1) as u8)
                        .collect(),
                    _ => unreachable!("carry out of the absorbing block is at most one"),
                };
                self.periodic_point(digits, tail)
            }
        }
    }

    /// Parses `prefix(period)` for odometers and `l.r[@shift]` for subshifts.
    pub fn parse_point(&self, s: &str) -> Result<PointCode> {
        let s = s.trim();
        if self.is_odometer() {
            let (pre, rest) = s
                .split_once('(')
                .ok_or_else(|| Error::Invalid(format!("expected prefix(period), got {s:?}")))?;
            let per = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Invalid(format!("expected prefix(period), got {s:?}")))?;
            self.periodic_point(self.parse_word(pre)?, self.parse_word(per)?)
        } else {
            let (seed, shift) = match s.split_once('@') {
                Some((a, b)) => (
                    a,
                    b.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Invalid(format!("bad shift {b:?}")))?,
                ),
                None => (s, 0),
            };
            let (l, r) = seed
                .split_once('.')
                .ok_or_else(|| Error::Invalid(format!("expected l.r[@shift], got {s:?}")))?;
            let l = self.parse_word(l)?;
            let r = self.parse_word(r)?;
            if l.len() != 1 || r.len() != 1 {
                return Err(Error::Invalid("seed letters must be single symbols".into()));
            }
            self.fixed_point(l[0], r[0], shift)
        }
    }

    pub fn point_string(&self, p: &PointCode) -> String {
        match p {
            PointCode::EventuallyPeriodic { prefix, period } => {
                format!("{}({})", self.word_string(prefix), self.word_string(period))
            }
            PointCode::SubstitutionFixed {
                left, right, shift, ..
            } => {
                let seed = format!("{}.{}", self.symbol_char(*left), self.symbol_char(*right));
                if *shift == 0 {
                    seed
                } else {
                    format!("{seed}@{shift}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_add_one() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let z = s.default_point();
        let one = s.point_step(&z, 1).unwrap();
        assert_eq!(s.point_string(&one), "1(0)");
        let minus_one = s.point_step(&z, -1).unwrap();
        assert_eq!(s.point_string(&minus_one), "(1)");
        assert_eq!(s.point_step(&minus_one, 1).unwrap(), z);
        let five = s.point_step(&z, 5).unwrap();
        assert_eq!(s.point_string(&five), "101(0)");
        assert_eq!(s.point_step(&five, -5).unwrap(), z);
    }

    #[test]
    fn periodic_canonical_form() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let p = s
            .periodic_point(vec![0, 1, 0, 1], vec![0, 1, 0, 1])
            .unwrap();
        assert_eq!(
            p,
            PointCode::EventuallyPeriodic {
                prefix: vec![],
                period: vec![0, 1]
            }
        );
    }

    #[test]
    fn mixed_radix_wraparound() {
        let s = SymbolicSystem::parse("odometer base=2,3").unwrap();
        let top = s.parse_point("(12)").unwrap();
        assert_eq!(s.point_step(&top, 1).unwrap(), s.default_point());
        assert!(s.parse_point("(2)").is_err());
        let x = s.parse_point("1(01)").unwrap();
        let y = s.point_step(&x, 1234).unwrap();
        assert_eq!(s.point_step(&y, -1234).unwrap(), x);
    }

    #[test]
    fn fibonacci_fixed_point() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let z = s.default_point();
        assert_eq!(s.point_string(&z), "a.a");
        match z {
            PointCode::SubstitutionFixed { power, .. } => assert_eq!(power, 2),
            _ => panic!(),
        }
        // right half is the Fibonacci word abaababa...
        let c = s.point_coords(&z, Window::new(0, 8)).unwrap();
        assert_eq!(s.word_string(&c), "abaababa");
        let c = s.point_coords(&z, Window::new(-3, 3)).unwrap();
        // σ²(a) = aba, σ⁴(a) = abaababa ends in ...aba
        assert_eq!(s.word_string(&c), "aba");
        let y = s.point_step(&z, 2).unwrap();
        assert_eq!(
            s.point_coords(&y, Window::new(0, 3)).unwrap(),
            s.point_coords(&z, Window::new(2, 3)).unwrap()
        );
    }

    #[test]
    fn bad_seed() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        assert!(s.parse_point("b.b").is_err());
        // b never starts an image, so no power fixes it on the right
        assert!(s.parse_point("a.b").is_err());
    }
}
