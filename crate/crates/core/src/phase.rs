//! States on `S² × ℝ³`, the `M ↔ Ω` map, invariants and energy.

use crate::error::{Error, Result};
use crate::profile::{
    contact_vector, contact_vector_unchecked, eval_profile_ambient, eval_profile_raw, profile_scalars,
    profile_scalars_unchecked, ProfileEval, ProfileScalars, ProfileSpec,
};
use crate::scalar::{lit, unit_tol, Real};
use crate::smallalg::Vec3;

/// Mass, axisymmetric inertia `diag(I1, I1, I3)` and gravity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyParams<T> {
    pub m: T,
    pub i1: T,
    pub i3: T,
    pub grav: T,
}

impl<T: Real> BodyParams<T> {
    pub fn new(m: T, i1: T, i3: T, grav: T) -> Result<Self> {
        let p = Self { m, i1, i3, grav };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.m, self.i1, self.i3, self.grav].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("body parameters must be finite".into()));
        }
        if self.m <= T::zero() || self.i1 <= T::zero() || self.i3 <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "mass and inertia must be positive, got m={}, I1={}, I3={}",
                self.m, self.i1, self.i3
            )));
        }
        if self.grav < T::zero() {
            return Err(Error::InvalidParameter(format!("gravity must be non-negative, got {}", self.grav)));
        }
        Ok(())
    }

    pub fn inertia(&self) -> Vec3<T> {
        Vec3::new(self.i1, self.i1, self.i3)
    }
}

/// A point `(γ, M)` with `γ` the vertical seen from the body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateGM<T> {
    pub gamma: Vec3<T>,
    pub momentum: Vec3<T>,
}

impl<T: Real> StateGM<T> {
    /// Checked constructor: `γ` must be a unit vector to within [`unit_tol`].
    pub fn new(gamma: Vec3<T>, momentum: Vec3<T>) -> Result<Self> {
        if !gamma.is_finite() || !momentum.is_finite() {
            return Err(Error::NonFinite { what: "state".into() });
        }
        if (gamma.norm() - T::one()).abs() > unit_tol() {
            return Err(Error::Consistency(format!("gamma must be a unit vector, |gamma| = {}", gamma.norm())));
        }
        Ok(Self { gamma, momentum })
    }

    /// Normalises `γ` first.
    pub fn normalized(gamma: Vec3<T>, momentum: Vec3<T>) -> Result<Self> {
        Self::new(gamma.normalized(), momentum)
    }

    /// `(γ₁, γ₂, γ₃, M₁, M₂, M₃)`
    pub fn to_array(&self) -> [T; 6] {
        let (g, m) = (self.gamma, self.momentum);
        [g.x, g.y, g.z, m.x, m.y, m.z]
    }

    /// Inverse of [`Self::to_array`]; does not renormalise.
    pub fn from_array(x: &[T; 6]) -> Self {
        Self {
            gamma: Vec3::new(x[0], x[1], x[2]),
            momentum: Vec3::new(x[3], x[4], x[5]),
        }
    }
}

/// The invariant coordinates `τ₁ … τ₅` (stored zero-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantPoint<T> {
    pub tau: [T; 5],
}

impl<T: Real> InvariantPoint<T> {
    pub fn new(tau: [T; 5]) -> Self {
        Self { tau }
    }

    /// `τ₂² + τ₃² − (1 − τ₁²)τ₅`
    pub fn relation_residual(&self) -> T {
        let t = &self.tau;
        t[1] * t[1] + t[2] * t[2] - (T::one() - t[0] * t[0]) * t[4]
    }
}

/// Mass, inertia and shape in one place.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solid<T> {
    pub params: BodyParams<T>,
    pub spec: ProfileSpec<T>,
}

impl<T: Real> Solid<T> {
    pub fn new(params: BodyParams<T>, spec: ProfileSpec<T>) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        Ok(Self { params, spec })
    }

    /// Profile at `γ₃` of the state, poles included.
    pub fn profile_at(&self, state: &StateGM<T>) -> Result<ProfileEval<T>> {
        eval_profile_ambient(&self.spec, state.gamma.z)
    }

    pub fn contact(&self, state: &StateGM<T>) -> Result<Vec3<T>> {
        contact_vector(&self.profile_at(state)?, state.gamma)
    }

    pub fn scalars(&self, state: &StateGM<T>) -> Result<ProfileScalars<T>> {
        profile_scalars(&self.params, &self.profile_at(state)?, state.gamma)
    }

    pub fn omega(&self, state: &StateGM<T>) -> Result<Vec3<T>> {
        omega_from_m(&self.params, &self.profile_at(state)?, state)
    }

    pub fn energy(&self, state: &StateGM<T>) -> Result<T> {
        energy(&self.params, &self.profile_at(state)?, state)
    }
}

/// Solves `M = 𝕀Ω + m s×(Ω×s)` for `Ω`.
pub fn omega_from_m<T: Real>(params: &BodyParams<T>, profile: &ProfileEval<T>, state: &StateGM<T>) -> Result<Vec3<T>> {
    let sc = profile_scalars(params, profile, state.gamma)?;
    let s = contact_vector(profile, state.gamma)?;
    omega_with(params, s, &sc, state.momentum)
}

fn omega_with<T: Real>(params: &BodyParams<T>, s: Vec3<T>, sc: &ProfileScalars<T>, momentum: Vec3<T>) -> Result<Vec3<T>> {
    let a = params.inertia() + Vec3::new(T::one(), T::one(), T::one()) * (params.m * sc.ss);
    let a_inv = Vec3::new(a.x.recip(), a.y.recip(), a.z.recip());
    let aim = momentum.hadamard(a_inv);
    let ais = s.hadamard(a_inv);
    let s_om = aim.dot(s) / sc.e;
    let om = aim + ais * (params.m * s_om);
    if !om.is_finite() {
        return Err(Error::NonFinite { what: "angular velocity".into() });
    }
    Ok(om)
}

/// Everything derived from `(γ, M)` without requiring `|γ| = 1`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Kinematics<T> {
    pub pe: ProfileEval<T>,
    pub s: Vec3<T>,
    pub omega: Vec3<T>,
}

pub(crate) fn kinematics_raw<T: Real>(
    params: &BodyParams<T>,
    spec: &ProfileSpec<T>,
    gamma: Vec3<T>,
    momentum: Vec3<T>,
) -> Result<Kinematics<T>> {
    if !gamma.is_finite() || !momentum.is_finite() {
        return Err(Error::NonFinite { what: "state".into() });
    }
    let pe = eval_profile_raw(spec, gamma.z);
    let s = contact_vector_unchecked(&pe, gamma);
    let sc = profile_scalars_unchecked(params, &pe, gamma)?;
    let omega = omega_with(params, s, &sc, momentum)?;
    Ok(Kinematics { pe, s, omega })
}

/// Energy on the ambient `ℝ³ × ℝ³`.
pub(crate) fn energy_raw<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, x: &[T; 6]) -> Result<T> {
    let st = StateGM::from_array(x);
    let k = kinematics_raw(params, spec, st.gamma, st.momentum)?;
    Ok(lit::<T>(0.5) * st.momentum.dot(k.omega) - params.m * params.grav * st.gamma.dot(k.s))
}

/// `M = 𝕀Ω + m s×(Ω×s)`.
pub fn m_from_omega<T: Real>(
    params: &BodyParams<T>,
    profile: &ProfileEval<T>,
    gamma: Vec3<T>,
    omega: Vec3<T>,
) -> Result<Vec3<T>> {
    let s = contact_vector(profile, gamma)?;
    Ok(params.inertia().hadamard(omega) + s.cross(omega.cross(s)) * params.m)
}

pub fn invariants<T: Real>(state: &StateGM<T>) -> InvariantPoint<T> {
    let (g, m) = (state.gamma, state.momentum);
    InvariantPoint::new([
        g.z,
        g.x * m.y - g.y * m.x,
        g.x * m.x + g.y * m.y,
        m.z,
        m.x * m.x + m.y * m.y,
    ])
}

/// `H = ½⟨M, Ω⟩ − m·grav·⟨γ, s⟩`.
pub fn energy<T: Real>(params: &BodyParams<T>, profile: &ProfileEval<T>, state: &StateGM<T>) -> Result<T> {
    let om = omega_from_m(params, profile, state)?;
    let s = contact_vector(profile, state.gamma)?;
    Ok(lit::<T>(0.5) * state.momentum.dot(om) - params.m * params.grav * state.gamma.dot(s))
}

/// `(j₁, j₂) = (−M₃, ⟨γ, M⟩)`.
pub fn momentum_components<T: Real>(state: &StateGM<T>) -> (T, T) {
    (-state.momentum.z, state.gamma.dot(state.momentum))
}
