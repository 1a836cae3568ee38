//! Green's kernels of the three-point problem.
//!
//! ```text
//! G(t,s) = ((1-s)^(α-1) - (t-s)^(α-1)) / Γ(α)    s ≤ t
//!        =  (1-s)^(α-1)                / Γ(α)    t ≤ s
//! H(t,s) = ((1-s)^(α-2) - (t-s)^(α-2)) / Γ(α-1)  s ≤ t
//!        =  (1-s)^(α-2)                / Γ(α-1)  t ≤ s
//! K(t,s) = G(t,s) + H(η,s)
//! Φ(s)   = (α-s)(1-s)^(α-2) / Γ(α)  = G(s,s) + H(s,s)
//! ```

use crate::error::DomainError;
use crate::specialfn::gamma;

/// Round-off allowance for arguments that should lie in [0, 1].
const SLACK: f64 = 1e-14;

/// Order α ∈ (2, 3] and interior point η ∈ (0, 1), with Γ(α), Γ(α-1) cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    eta: f64,
    gamma_a: f64,
    gamma_a1: f64,
}

/// x^e for x ∈ [-SLACK, ∞); tiny negatives are round-off and map to 0.
#[inline]
fn pow_clamped(x: f64, e: f64) -> Result<f64, DomainError> {
    if x > 0.0 {
        Ok(x.powf(e))
    } else if x >= -SLACK {
        Ok(if e == 0.0 { 1.0 } else { 0.0 })
    } else {
        Err(DomainError::new("kernel", format!("negative power base {x:e}")))
    }
}

#[inline]
fn unit(name: &'static str, x: f64) -> Result<f64, DomainError> {
    if (-SLACK..=1.0 + SLACK).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(DomainError::new(name, format!("argument {x} outside [0, 1]")))
    }
}

impl KernelParams {
    pub fn new(alpha: f64, eta: f64) -> Result<Self, DomainError> {
        if !(alpha > 2.0 && alpha <= 3.0) {
            return Err(DomainError::new("KernelParams", format!("alpha must lie in (2, 3], got {alpha}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(DomainError::new("KernelParams", format!("eta must lie in (0, 1), got {eta}")));
        }
        Ok(Self { alpha, eta, gamma_a: gamma(alpha)?, gamma_a1: gamma(alpha - 1.0)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Γ(α)
    pub fn gamma_alpha(&self) -> f64 {
        self.gamma_a
    }

    /// Γ(α-1)
    pub fn gamma_alpha_minus_one(&self) -> f64 {
        self.gamma_a1
    }

    /// Shared two-branch shape of G and H; the seam s = t takes the upper branch.
    #[inline]
    fn branch(&self, t: f64, s: f64, exp: f64, norm: f64) -> Result<f64, DomainError> {
        let upper = pow_clamped(1.0 - s, exp)?;
        if s >= t {
            Ok(upper / norm)
        } else {
            Ok((upper - pow_clamped(t - s, exp)?) / norm)
        }
    }

    pub fn g_kernel(&self, t: f64, s: f64) -> Result<f64, DomainError> {
        let (t, s) = (unit("g_kernel", t)?, unit("g_kernel", s)?);
        self.branch(t, s, self.alpha - 1.0, self.gamma_a)
    }

    pub fn h_kernel(&self, t: f64, s: f64) -> Result<f64, DomainError> {
        let (t, s) = (unit("h_kernel", t)?, unit("h_kernel", s)?);
        self.branch(t, s, self.alpha - 2.0, self.gamma_a1)
    }

    /// K(t,s) = G(t,s) + H(η,s). The second kernel is evaluated at η, not t.
    pub fn k_kernel(&self, t: f64, s: f64) -> Result<f64, DomainError> {
        Ok(self.g_kernel(t, s)? + self.h_kernel(self.eta, s)?)
    }

    /// G(s,s) = (1-s)^(α-1)/Γ(α)
    pub fn g_diag(&self, s: f64) -> Result<f64, DomainError> {
        Ok(pow_clamped(1.0 - unit("g_diag", s)?, self.alpha - 1.0)? / self.gamma_a)
    }

    /// H(s,s) = (1-s)^(α-2)/Γ(α-1)
    pub fn h_diag(&self, s: f64) -> Result<f64, DomainError> {
        Ok(pow_clamped(1.0 - unit("h_diag", s)?, self.alpha - 2.0)? / self.gamma_a1)
    }

    /// Φ(s) = (α-s)(1-s)^(α-2)/Γ(α), the upper envelope of K(·,s).
    pub fn phi_envelope(&self, s: f64) -> Result<f64, DomainError> {
        let s = unit("phi_envelope", s)?;
        Ok((self.alpha - s) * pow_clamped(1.0 - s, self.alpha - 2.0)? / self.gamma_a)
    }

    /// ∫₀¹ Φ(s) ds = (α+1)/Γ(α+1) in closed form.
    pub fn envelope_integral(&self) -> f64 {
        (self.alpha + 1.0) / (self.alpha * self.gamma_a)
    }

    /// γ = (1-η^(α-2))(1-ρ^(α-1)), the cone constant for ρ ∈ (0,1).
    pub fn cone_gamma(&self, rho: f64) -> Result<f64, DomainError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(DomainError::new("cone_gamma", format!("rho must lie in (0, 1), got {rho}")));
        }
        Ok((1.0 - self.eta.powf(self.alpha - 2.0)) * (1.0 - rho.powf(self.alpha - 1.0)))
    }
}
