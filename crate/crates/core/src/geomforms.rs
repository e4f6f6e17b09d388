//! The fields `c₃, 𝒬, 𝒫, ℒ, K` of the gauge construction and the matrix
//! expressing `(𝒬, 𝒫)` linearly in `(τ₃, τ₄)`.

use crate::error::Result;
use crate::phase::{omega_from_m, BodyParams, StateGM};
use crate::profile::{contact_vector, eval_profile, ProfileEval, ProfileSpec};
use crate::scalar::Real;
use crate::smallalg::{SmallMatrix, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LqpValues<T> {
    /// `(γ × (Ω × s))₃`
    pub c3: T,
    pub q: T,
    pub p: T,
    /// `ℒ = 𝒬γ + 𝒫e₃`
    pub lvec: Vec3<T>,
    /// `K = −mϱ⟨γ, s⟩Ω + ℒ`
    pub kvec: Vec3<T>,
}

/// Direct evaluation from `Ω`.
///
/// `𝒬 = −m(ϱ²⟨Ω,γ⟩ − ϱ'c₃)`, `𝒫 = m(Lϱ⟨Ω,γ⟩ − L'c₃)`. With these signs on
/// the `c₃` terms, `ℒ` reproduces the equations of motion and the rate laws
/// of `j₁, j₂` for non-spherical profiles too.
pub fn qpl_values<T: Real>(params: &BodyParams<T>, profile: &ProfileEval<T>, state: &StateGM<T>) -> Result<LqpValues<T>> {
    let om = omega_from_m(params, profile, state)?;
    let s = contact_vector(profile, state.gamma)?;
    Ok(lqp_from(params, profile, state.gamma, s, om))
}

pub(crate) fn lqp_from<T: Real>(
    params: &BodyParams<T>,
    profile: &ProfileEval<T>,
    g: Vec3<T>,
    s: Vec3<T>,
    om: Vec3<T>,
) -> LqpValues<T> {
    let m = params.m;
    let c3 = g.cross(om.cross(s)).z;
    let og = om.dot(g);
    let q = -m * (profile.rho * profile.rho * og - profile.rho_p * c3);
    let p = m * (profile.l * profile.rho * og - profile.l_p * c3);
    let lvec = g * q + Vec3::e3() * p;
    let kvec = om * (-m * profile.rho * g.dot(s)) + lvec;
    LqpValues { c3, q, p, lvec, kvec }
}

/// `[𝒬𝒫](τ₁)`, with `(𝒬, 𝒫) = [𝒬𝒫](τ₁)·(τ₃, τ₄)`.
///
/// Rows are `(𝒬, 𝒫)`, columns `(τ₃, τ₄)`. Refuses `|τ₁| > 1 − 1e−9`.
pub fn qp_matrix<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, tau1: T) -> Result<SmallMatrix<T>> {
    let pe = eval_profile(spec, tau1)?;
    Ok(qp_matrix_at(params, &pe))
}

pub(crate) fn qp_matrix_at<T: Real>(params: &BodyParams<T>, pe: &ProfileEval<T>) -> SmallMatrix<T> {
    let (m, i1, i3) = (params.m, params.i1, params.i3);
    let t = pe.gamma3;
    let w = T::one() - t * t;
    let (rho, zeta, l) = (pe.rho, pe.zeta, pe.l);
    let (rp, lp) = (pe.rho_p, pe.l_p);
    let sigma = m * (rho * w + zeta * t);
    let p_tau = i1 * i3 + m * (i1 * rho * rho * w + i3 * zeta * zeta);
    let k = m / p_tau;
    let a11 = i3 * (-rho * rho - rp * zeta) - rho * rho * rho * sigma;
    let a12 = -rho * i1 * (rho * t - rp * w) - rho * rho * zeta * sigma;
    let a21 = i3 * (rho * l + lp * zeta) + rho * rho * l * sigma;
    let a22 = rho * i1 * (l * t - lp * w) + rho * zeta * l * sigma;
    let mut out = SmallMatrix::zeros(2);
    out.set(0, 0, k * a11);
    out.set(0, 1, k * a12);
    out.set(1, 0, k * a21);
    out.set(1, 1, k * a22);
    out
}
