//! Shape functions of an axisymmetric rolling body.
//!
//! The contact point, seen from the centre of mass in the body frame, is
//! `s(γ) = ϱ(γ₃)γ − L(γ₃)e₃` with `L = ϱγ₃ − ζ`, so `s₃ = ζ`.

use crate::error::{Error, Result};
use crate::phase::BodyParams;
use crate::scalar::{lit, to_f64, unit_tol, Real};
use crate::smallalg::Vec3;

/// Distance from the poles `γ₃ = ±1` below which [`eval_profile`] refuses
/// to evaluate.
pub const POLE_GUARD: f64 = 1e-9;

/// Smallest admissible value of `E = 1 − m⟨A⁻¹s, s⟩`.
pub const MIN_E: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileSpec<T> {
    /// Sphere of radius `r` whose centre of mass sits `l` above the
    /// geometric centre along the symmetry axis.
    Routh { r: T, l: T },
    /// Ellipsoid with squared semi-axes `b` (equatorial) and `c` (polar).
    Ellipsoid { b: T, c: T },
}

impl<T: Real> ProfileSpec<T> {
    pub fn routh(r: T, l: T) -> Result<Self> {
        let spec = ProfileSpec::Routh { r, l };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ellipsoid(b: T, c: T) -> Result<Self> {
        let spec = ProfileSpec::Ellipsoid { b, c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProfileSpec::Routh { r, l } => {
                if !(r.is_finite() && l.is_finite()) || r <= T::zero() {
                    return Err(Error::InvalidParameter(format!("routh radius must be positive, got r={r}")));
                }
                if l.abs() >= r {
                    return Err(Error::InvalidParameter(format!(
                        "routh offset must satisfy |l| < r, got l={l}, r={r}"
                    )));
                }
            }
            ProfileSpec::Ellipsoid { b, c } => {
                if !(b.is_finite() && c.is_finite()) || b <= T::zero() || c <= T::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "ellipsoid semi-axes must be positive, got b={b}, c={c}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether this is the `b = c` ellipsoid (a homogeneous-shape ball).
    pub fn is_chaplygin(&self) -> bool {
        matches!(*self, ProfileSpec::Ellipsoid { b, c } if b == c)
    }
}

/// Profile functions and their `γ₃`-derivatives at one value of `γ₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileEval<T> {
    pub gamma3: T,
    pub rho: T,
    pub zeta: T,
    pub l: T,
    pub rho_p: T,
    pub zeta_p: T,
    pub l_p: T,
}

/// Evaluates the profile on the open band `|γ₃| ≤ 1 − 1e−9` of the reduced
/// space.
pub fn eval_profile<T: Real>(spec: &ProfileSpec<T>, gamma3: T) -> Result<ProfileEval<T>> {
    let band = T::one() - lit(POLE_GUARD);
    if !gamma3.is_finite() || gamma3.abs() > band {
        return Err(Error::Domain {
            quantity: "gamma3",
            value: to_f64(gamma3),
            domain: format!("[-{0}, {0}]", to_f64(band)),
        });
    }
    Ok(eval_profile_raw(spec, gamma3))
}

/// Evaluates the profile on the closed interval `[−1, 1]`.
///
/// Both presets are smooth at the poles, so phase-space quantities such as
/// `Ω`, the energy and the equations of motion may be evaluated there even
/// though the reduced space is singular.
pub fn eval_profile_ambient<T: Real>(spec: &ProfileSpec<T>, gamma3: T) -> Result<ProfileEval<T>> {
    let slack = T::one() + lit(1e-9);
    if !gamma3.is_finite() || gamma3.abs() > slack {
        return Err(Error::Domain {
            quantity: "gamma3",
            value: to_f64(gamma3),
            domain: "[-1, 1]".into(),
        });
    }
    Ok(eval_profile_raw(spec, gamma3))
}

/// No domain check; used for finite-difference stencils that straddle the
/// unit sphere.
pub(crate) fn eval_profile_raw<T: Real>(spec: &ProfileSpec<T>, g: T) -> ProfileEval<T> {
    match *spec {
        ProfileSpec::Routh { r, l } => ProfileEval {
            gamma3: g,
            rho: -r,
            zeta: -r * g + l,
            l: -l,
            rho_p: T::zero(),
            zeta_p: -r,
            l_p: T::zero(),
        },
        ProfileSpec::Ellipsoid { b, c } => {
            let d = b * (T::one() - g * g) + c * g * g;
            let sd = d.sqrt();
            let d32 = d * sd;
            let rho = -b / sd;
            let zeta = -c * g / sd;
            ProfileEval {
                gamma3: g,
                rho,
                zeta,
                l: (c - b) * g / sd,
                rho_p: b * (c - b) * g / d32,
                zeta_p: -b * c / d32,
                l_p: b * (c - b) / d32,
            }
        }
    }
}

fn check_gamma<T: Real>(eval: &ProfileEval<T>, gamma: Vec3<T>) -> Result<()> {
    let tol = unit_tol::<T>();
    if (gamma.norm() - T::one()).abs() > tol {
        return Err(Error::Consistency(format!(
            "gamma must be a unit vector, |gamma| = {}",
            gamma.norm()
        )));
    }
    if (eval.gamma3 - gamma.z).abs() > tol {
        return Err(Error::Consistency(format!(
            "profile evaluated at gamma3={} but gamma.z={}",
            eval.gamma3, gamma.z
        )));
    }
    Ok(())
}

/// `s = ϱγ − L e₃`.
pub fn contact_vector<T: Real>(eval: &ProfileEval<T>, gamma: Vec3<T>) -> Result<Vec3<T>> {
    check_gamma(eval, gamma)?;
    Ok(contact_vector_unchecked(eval, gamma))
}

pub(crate) fn contact_vector_unchecked<T: Real>(eval: &ProfileEval<T>, gamma: Vec3<T>) -> Vec3<T> {
    gamma * eval.rho - Vec3::e3() * eval.l
}

/// Scalars shared by the Legendre map, the `[𝒬𝒫]` matrix and the rate laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileScalars<T> {
    /// `m⟨s, γ⟩`
    pub sigma: T,
    /// `𝕀₁ + m⟨s, s⟩`
    pub a1: T,
    /// `1 − m⟨A⁻¹s, s⟩`
    pub e: T,
    /// `𝕀₁𝕀₃ + m⟨𝕀s, s⟩`
    pub p_tau: T,
    /// `⟨γ, s⟩`
    pub gs: T,
    /// `⟨s, s⟩`
    pub ss: T,
}

pub fn profile_scalars<T: Real>(
    params: &BodyParams<T>,
    eval: &ProfileEval<T>,
    gamma: Vec3<T>,
) -> Result<ProfileScalars<T>> {
    check_gamma(eval, gamma)?;
    profile_scalars_unchecked(params, eval, gamma)
}

pub(crate) fn profile_scalars_unchecked<T: Real>(
    params: &BodyParams<T>,
    eval: &ProfileEval<T>,
    gamma: Vec3<T>,
) -> Result<ProfileScalars<T>> {
    let s = contact_vector_unchecked(eval, gamma);
    let m = params.m;
    let ss = s.dot(s);
    let gs = gamma.dot(s);
    let a1 = params.i1 + m * ss;
    let a3 = params.i3 + m * ss;
    let e = T::one() - m * ((s.x * s.x + s.y * s.y) / a1 + s.z * s.z / a3);
    if !(e > lit(MIN_E)) {
        return Err(Error::Degenerate {
            e: to_f64(e),
            min: MIN_E,
        });
    }
    let is_s = params.i1 * (s.x * s.x + s.y * s.y) + params.i3 * s.z * s.z;
    Ok(ProfileScalars {
        sigma: m * gs,
        a1,
        e,
        p_tau: params.i1 * params.i3 + m * is_s,
        gs,
        ss,
    })
}
