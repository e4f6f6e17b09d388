//! Equations of motion on `(γ, M)`, RK4 integration and diagnostics.

use crate::error::{Error, Result};
use crate::geomforms::qpl_values;
use crate::momenta::MomentumCoefficients;
use crate::phase::{energy, invariants, kinematics_raw, momentum_components, BodyParams, InvariantPoint, Solid, StateGM};
use crate::profile::{contact_vector_unchecked, eval_profile_raw, profile_scalars, ProfileEval, ProfileSpec};
use crate::scalar::{lit, to_f64, Real};
use crate::smallalg::{Mat3, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub t_final: T,
    pub method: Method,
    pub renormalize_gamma: bool,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(dt: T, t_final: T) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            method: Method::Rk4,
            renormalize_gamma: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be at least dt, got t_final={}, dt={}",
                self.t_final, self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps, `t_final/dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (to_f64(self.t_final) / to_f64(self.dt)).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub state: StateGM<T>,
    pub inv: InvariantPoint<T>,
    pub energy: T,
    pub big_j1: T,
    pub big_j2: T,
    pub j1: T,
    pub j2: T,
}

/// `ṡ = ϱ'γ̇₃γ + ϱγ̇ − L'γ̇₃e₃`
fn s_dot<T: Real>(pe: &ProfileEval<T>, gamma: Vec3<T>, gamma_dot: Vec3<T>) -> Vec3<T> {
    gamma * (pe.rho_p * gamma_dot.z) + gamma_dot * pe.rho - Vec3::e3() * (pe.l_p * gamma_dot.z)
}

fn rhs_parts<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, gamma: Vec3<T>, m: Vec3<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let k = kinematics_raw(params, spec, gamma, m)?;
    Ok(rhs_from(params, &k.pe, gamma, m, k.s, k.omega))
}

fn rhs_from<T: Real>(
    params: &BodyParams<T>,
    pe: &ProfileEval<T>,
    gamma: Vec3<T>,
    m: Vec3<T>,
    s: Vec3<T>,
    om: Vec3<T>,
) -> (Vec3<T>, Vec3<T>) {
    let gd = gamma.cross(om);
    let sd = s_dot(pe, gamma, gd);
    let md = m.cross(om) + sd.cross(om.cross(s)) * params.m + s.cross(gamma) * (params.m * params.grav);
    (gd, md)
}

/// `γ̇ = γ×Ω`, `Ṁ = M×Ω + m ṡ×(Ω×s) + m·grav·(s×γ)`.
pub fn rhs<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, state: &StateGM<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    rhs_parts(params, spec, state.gamma, state.momentum)
}

/// Same equations with the sign of the gravity term reversed. Only useful as
/// a negative control: it does not conserve the energy.
pub fn rhs_flipped_gravity<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, state: &StateGM<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let k = kinematics_raw(params, spec, state.gamma, state.momentum)?;
    let (gd, md) = rhs_from(params, &k.pe, state.gamma, state.momentum, k.s, k.omega);
    let g = k.s.cross(state.gamma) * (params.m * params.grav);
    Ok((gd, md - g - g))
}

fn rk4_step<T: Real>(
    field: &impl Fn(&StateGM<T>) -> Result<(Vec3<T>, Vec3<T>)>,
    st: &StateGM<T>,
    dt: T,
) -> Result<StateGM<T>> {
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let shift = |d: &(Vec3<T>, Vec3<T>), h: T| StateGM {
        gamma: st.gamma + d.0 * h,
        momentum: st.momentum + d.1 * h,
    };
    let k1 = field(st)?;
    let k2 = field(&shift(&k1, dt * half))?;
    let k3 = field(&shift(&k2, dt * half))?;
    let k4 = field(&shift(&k3, dt))?;
    let w = dt / lit(6.0);
    Ok(StateGM {
        gamma: st.gamma + (k1.0 + k2.0 * two + k3.0 * two + k4.0) * w,
        momentum: st.momentum + (k1.1 + k2.1 * two + k3.1 * two + k4.1) * w,
    })
}

/// Gauge momenta at a state, clamping `τ₁` into the coefficient domain.
fn clamped_momenta<T: Real>(momenta: &dyn MomentumCoefficients<T>, state: &StateGM<T>, warned: &mut bool) -> Result<(T, T)> {
    let (lo, hi) = momenta.domain();
    let t = state.gamma.z;
    let tc = t.max(lo).min(hi);
    if tc != t && !*warned {
        log::warn!("tau1 = {} left the momenta grid [{}, {}]; clamping", t, lo, hi);
        *warned = true;
    }
    let c = momenta.coefficients(tc)?;
    let (j1, j2) = momentum_components(state);
    Ok((c[0].f * j1 + c[0].g * j2, c[1].f * j1 + c[1].g * j2))
}

fn sample<T: Real>(
    solid: &Solid<T>,
    momenta: &dyn MomentumCoefficients<T>,
    t: T,
    state: StateGM<T>,
    warned: &mut bool,
) -> Result<TrajectorySample<T>> {
    let pe = eval_profile_raw(&solid.spec, state.gamma.z);
    let e = energy(&solid.params, &pe, &state)?;
    let (big_j1, big_j2) = clamped_momenta(momenta, &state, warned)?;
    let (j1, j2) = momentum_components(&state);
    Ok(TrajectorySample {
        t,
        state,
        inv: invariants(&state),
        energy: e,
        big_j1,
        big_j2,
        j1,
        j2,
    })
}

/// Fixed-step RK4 along the true equations of motion.
pub fn integrate<T: Real>(
    solid: &Solid<T>,
    state0: &StateGM<T>,
    cfg: &IntegratorConfig<T>,
    momenta: &dyn MomentumCoefficients<T>,
) -> Result<Vec<TrajectorySample<T>>> {
    integrate_with(solid, state0, cfg, momenta, |st| rhs(&solid.params, &solid.spec, st))
}

/// RK4 along an arbitrary vector field on `(γ, M)`, monitoring the true
/// energy and momenta of `solid`.
pub fn integrate_with<T: Real>(
    solid: &Solid<T>,
    state0: &StateGM<T>,
    cfg: &IntegratorConfig<T>,
    momenta: &dyn MomentumCoefficients<T>,
    field: impl Fn(&StateGM<T>) -> Result<(Vec3<T>, Vec3<T>)>,
) -> Result<Vec<TrajectorySample<T>>> {
    cfg.validate()?;
    let state0 = StateGM::new(state0.gamma, state0.momentum)?;
    let n = cfg.steps();
    let mut warned = false;
    let mut out = Vec::with_capacity(n + 1);
    out.push(sample(solid, momenta, T::zero(), state0, &mut warned)?);
    let mut st = state0;
    for k in 1..=n {
        let next = rk4_step(&field, &st, cfg.dt);
        st = match next {
            Ok(s) if s.gamma.is_finite() && s.momentum.is_finite() => s,
            _ => return Err(Error::Diverged { last_valid: k - 1 }),
        };
        if cfg.renormalize_gamma {
            st.gamma = st.gamma.normalized();
        }
        let t = cfg.dt * lit(k as f64);
        match sample(solid, momenta, t, st, &mut warned) {
            Ok(s) if s.energy.is_finite() => out.push(s),
            _ => return Err(Error::Diverged { last_valid: k - 1 }),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates<T> {
    /// `dj₁/dt` along the motion
    pub dj1: T,
    /// `dj₂/dt` along the motion
    pub dj2: T,
    /// `−𝒬τ₂/A₁`
    pub pred1: T,
    /// `−𝒫τ₂/A₁`
    pub pred2: T,
}

/// Time derivatives of `j₁, j₂` and their closed-form predictions.
pub fn nonconservation_rates<T: Real>(params: &BodyParams<T>, profile: &ProfileEval<T>, state: &StateGM<T>) -> Result<Rates<T>> {
    let sc = profile_scalars(params, profile, state.gamma)?;
    let v = qpl_values(params, profile, state)?;
    let om = crate::phase::omega_from_m(params, profile, state)?;
    let s = contact_vector_unchecked(profile, state.gamma);
    let (gd, md) = rhs_from(params, profile, state.gamma, state.momentum, s, om);
    let tau2 = invariants(state).tau[1];
    Ok(Rates {
        dj1: -md.z,
        dj2: gd.dot(state.momentum) + state.gamma.dot(md),
        pred1: -v.q * tau2 / sc.a1,
        pred2: -v.p * tau2 / sc.a1,
    })
}

/// Attitude `g` and planar contact-point position `(a₁, a₂)` along a
/// trajectory, from `ġ = g·hat(Ω)` and `ȧ = −g(Ω×s)`.
///
/// Each step re-runs the RK4 stages of the `(γ, M)` system from the stored
/// sample, so `(g, a)` see exactly the stage values of the original run.
pub fn reconstruct_full<T: Real>(
    solid: &Solid<T>,
    traj: &[TrajectorySample<T>],
    g0: Mat3<T>,
    a0: [T; 2],
) -> Result<Vec<(Mat3<T>, [T; 2])>> {
    let first = traj.first().ok_or_else(|| Error::Consistency("empty trajectory".into()))?;
    let tol = lit::<T>(1e-8);
    if g0.orthogonality_defect() > tol || (g0.det() - T::one()).abs() > tol {
        return Err(Error::Consistency("initial attitude is not a rotation".into()));
    }
    if (g0.row(2) - first.state.gamma).max_abs() > tol {
        return Err(Error::Consistency("third row of the initial attitude differs from gamma".into()));
    }
    let mut out = Vec::with_capacity(traj.len());
    out.push((g0, a0));
    let (mut g, mut a) = (g0, Vec3::new(a0[0], a0[1], T::zero()));
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let (params, spec) = (&solid.params, &solid.spec);
    // joint derivative of (γ, M, g, a)
    let joint = |gamma: Vec3<T>, m: Vec3<T>, gg: &Mat3<T>| -> Result<(Vec3<T>, Vec3<T>, Mat3<T>, Vec3<T>)> {
        let k = kinematics_raw(params, spec, gamma, m)?;
        let (gd, md) = rhs_from(params, &k.pe, gamma, m, k.s, k.omega);
        let g_dot = gg.mul_mat(&Mat3::hat(k.omega));
        let a_dot = -gg.mul_vec(k.omega.cross(k.s));
        Ok((gd, md, g_dot, a_dot))
    };
    for w in traj.windows(2) {
        let dt = w[1].t - w[0].t;
        let (y, m) = (w[0].state.gamma, w[0].state.momentum);
        let k1 = joint(y, m, &g)?;
        let h2 = dt * half;
        let k2 = joint(y + k1.0 * h2, m + k1.1 * h2, &g.add_scaled(&k1.2, h2))?;
        let k3 = joint(y + k2.0 * h2, m + k2.1 * h2, &g.add_scaled(&k2.2, h2))?;
        let k4 = joint(y + k3.0 * dt, m + k3.1 * dt, &g.add_scaled(&k3.2, dt))?;
        let six = dt / lit(6.0);
        g = g
            .add_scaled(&k1.2, six)
            .add_scaled(&k2.2, six * two)
            .add_scaled(&k3.2, six * two)
            .add_scaled(&k4.2, six)
            .reorthonormalize();
        a += (k1.3 + k2.3 * two + k3.3 * two + k4.3) * six;
        out.push((g, [a.x, a.y]));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DriftReport<T> {
    pub d_energy: T,
    pub d_j1: T,
    pub d_j2: T,
    /// Largest `|τ₂² + τ₃² − (1 − τ₁²)τ₅|` seen.
    pub d_relation: T,
}

pub fn drift_report<T: Real>(traj: &[TrajectorySample<T>]) -> DriftReport<T> {
    let Some(first) = traj.first() else {
        return DriftReport::default();
    };
    let mut r = DriftReport {
        d_energy: T::zero(),
        d_j1: T::zero(),
        d_j2: T::zero(),
        d_relation: T::zero(),
    };
    for s in traj {
        r.d_energy = r.d_energy.max((s.energy - first.energy).abs());
        r.d_j1 = r.d_j1.max((s.big_j1 - first.big_j1).abs());
        r.d_j2 = r.d_j2.max((s.big_j2 - first.big_j2).abs());
        r.d_relation = r.d_relation.max(s.inv.relation_residual().abs());
    }
    r
}
