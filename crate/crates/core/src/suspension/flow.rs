use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::roof::Roof;
use crate::cantor::{PointCode, SymbolicSystem};
use crate::error::Result;
use crate::rokhlin::{CantorMap, InducedSystem};

/// A point `[t, x]` of the suspension, kept with `0 ≤ t < τ(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuspensionPoint {
    pub base: PointCode,
    pub t: BigRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuspensionPointJson {
    pub base: String,
    pub t: String,
}

/// The suspension of `(S, Φ)` under a roof.
#[derive(Clone, Debug)]
pub struct Suspension {
    sys: SymbolicSystem,
    roof: Roof,
}

impl Suspension {
    pub fn new(sys: &SymbolicSystem, roof: Roof) -> Self {
        Suspension {
            sys: sys.clone(),
            roof,
        }
    }

    /// The mapping torus.
    pub fn mapping_torus(sys: &SymbolicSystem) -> Self {
        Self::new(sys, Roof::unit(sys))
    }

    pub fn system(&self) -> &SymbolicSystem {
        &self.sys
    }

    pub fn roof(&self) -> &Roof {
        &self.roof
    }

    /// The representative of `[t, x]` with `0 ≤ t < τ`.
    pub fn normalize(&self, base: &PointCode, t: &BigRational) -> Result<SuspensionPoint> {
        self.sys.validate_point(base)?;
        let mut x = base.clone();
        let mut t = t.clone();
        loop {
            if t.is_negative() {
                x = self.sys.point_step(&x, -1)?;
                t += self.roof.at(&x)?;
                continue;
            }
            let tau = self.roof.at(&x)?;
            if t >= tau {
                t -= tau;
                x = self.sys.point_step(&x, 1)?;
                continue;
            }
            return Ok(SuspensionPoint { base: x, t });
        }
    }

    pub fn point(&self, base: &PointCode) -> Result<SuspensionPoint> {
        self.normalize(base, &BigRational::zero())
    }

    /// `φ_s(p)`.
    pub fn flow_step(&self, p: &SuspensionPoint, s: &BigRational) -> Result<SuspensionPoint> {
        if s.is_zero() {
            return Ok(p.clone());
        }
        self.normalize(&p.base, &(&p.t + s))
    }

    /// Times `u` in the open interval `(lo, hi)` with `φ_{-u}(p)` on the zero
    /// section, paired with the base point there, in increasing order.
    pub fn section_crossings(
        &self,
        p: &SuspensionPoint,
        lo: &BigRational,
        hi: &BigRational,
    ) -> Result<Vec<(BigRational, PointCode)>> {
        let mut out = Vec::new();
        // backward in time: u grows from t
        let mut x = p.base.clone();
        let mut u = p.t.clone();
        while &u < hi {
            if &u > lo {
                out.push((u.clone(), x.clone()));
            }
            x = self.sys.point_step(&x, -1)?;
            u += self.roof.at(&x)?;
        }
        // forward in time: u shrinks below t
        let mut x = p.base.clone();
        let mut u = p.t.clone();
        loop {
            u -= self.roof.at(&x)?;
            x = self.sys.point_step(&x, 1)?;
            if &u <= lo {
                break;
            }
            if &u < hi {
                out.push((u.clone(), x.clone()));
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn point_json(&self, p: &SuspensionPoint) -> SuspensionPointJson {
        SuspensionPointJson {
            base: self.sys.point_string(&p.base),
            t: p.t.to_string(),
        }
    }
}

/// `φ_R(y) = [0, Φ_C(y)]` for `y ∈ C` and `R` the real return time to `C`.
pub fn return_lands_on_image(
    susp: &Suspension,
    ind: &InducedSystem,
    y: &PointCode,
) -> Result<bool> {
    let r = susp.roof().return_time(ind)?.eval(y)?;
    let q = susp.flow_step(&susp.point(y)?, &r)?;
    Ok(q.t.is_zero() && q.base == ind.point_forward(y)?)
}
