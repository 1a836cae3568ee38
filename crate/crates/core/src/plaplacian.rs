//! The p-Laplacian map φ_r(s) = |s|^(r-2)·s and the Lipschitz constants
//! used by the contraction theorems.

use crate::error::DomainError;

/// An exponent r > 1. Serves both as p and as its conjugate q.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(r: f64) -> Result<Self, DomainError> {
        if r.is_finite() && r > 1.0 {
            Ok(Self(r))
        } else {
            Err(DomainError::new("Exponent", format!("exponent must be > 1, got {r}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The Hölder conjugate r/(r-1).
    pub fn conjugate(self) -> Self {
        Self(self.0 / (self.0 - 1.0))
    }

    /// φ_r(s); zero at s = 0 for every r > 1.
    #[inline]
    pub fn phi(self, s: f64) -> f64 {
        phi(self, s)
    }
}

/// Which half of the Lipschitz estimate applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// 1 < r ≤ 2 on same-sign arguments with |x|, |y| ≥ m > 0.
    LowerBounded,
    /// r > 2 on arguments with |x|, |y| ≤ M.
    UpperBounded,
}

#[inline]
pub fn phi(r: Exponent, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let r = r.0;
    if r == 2.0 {
        return s;
    }
    s.abs().powf(r - 2.0) * s
}

pub fn conjugate(p: f64) -> Result<f64, DomainError> {
    Ok(Exponent::new(p).map_err(|_| DomainError::new("conjugate", format!("p must be > 1, got {p}")))?.conjugate().0)
}

/// Lipschitz constant (r-1)·bound^(r-2) of φ_r on the set described by `regime`.
pub fn lipschitz_bound(r: Exponent, bound: f64, regime: Regime) -> Result<f64, DomainError> {
    if !(bound.is_finite() && bound > 0.0) {
        return Err(DomainError::new("lipschitz_bound", format!("bound must be positive, got {bound}")));
    }
    match regime {
        Regime::LowerBounded if r.0 > 2.0 => Err(DomainError::new(
            "lipschitz_bound",
            format!("lower-bounded estimate needs 1 < r <= 2, got r = {}", r.0),
        )),
        Regime::UpperBounded if r.0 <= 2.0 => Err(DomainError::new(
            "lipschitz_bound",
            format!("upper-bounded estimate needs r > 2, got r = {}", r.0),
        )),
        _ => Ok((r.0 - 1.0) * bound.powf(r.0 - 2.0)),
    }
}
