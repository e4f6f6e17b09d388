//! Brackets on `(γ, M)` and on the invariant coordinates `τ`.
//!
//! Convention: the coordinate matrix holds `Π_ab = {x_a, x_b}` and the
//! equations of motion read `ẋ = {x, H} = Π∇H`. In this convention
//! `{τ₁, τ₂} = 1 − τ₁²`.

use crate::error::{Error, Result};
use crate::geomforms::{lqp_from, qp_matrix};
use crate::momenta::MomentumCoefficients;
use crate::phase::{energy_raw, invariants, kinematics_raw, BodyParams, InvariantPoint, Solid, StateGM};
use crate::profile::{eval_profile, ProfileEval, ProfileSpec};
use crate::scalar::{lit, Real};
use crate::smallalg::{try_grad_fd, SmallMatrix, Vec3, DEFAULT_FD_SCALE};

/// Relative outer step used when differentiating a bracket that was itself
/// evaluated with finite differences.
pub const NESTED_FD_SCALE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BracketKind {
    /// The bracket built from `M + K`.
    Nonholonomic,
    /// The bracket built from `M + ℒ`.
    Gauged,
}

/// A smooth function on `ℝᴺ`, optionally with an analytic gradient.
pub trait ScalarField<T: Real, const N: usize> {
    fn value(&self, x: &[T; N]) -> Result<T>;

    fn gradient(&self, _x: &[T; N]) -> Option<Result<[T; N]>> {
        None
    }

    /// Relative step for the finite-difference fallback.
    fn fd_scale(&self) -> f64 {
        DEFAULT_FD_SCALE
    }
}

/// Analytic gradient when available, central differences otherwise.
pub fn field_gradient<T: Real, const N: usize>(field: &dyn ScalarField<T, N>, x: &[T; N]) -> Result<[T; N]> {
    match field.gradient(x) {
        Some(g) => g,
        None => try_grad_fd(|y| field.value(y), x, lit(field.fd_scale())),
    }
}

/// Wraps a closure; gradient by finite differences.
pub struct FnField<F>(pub F);

impl<T: Real, const N: usize, F: Fn(&[T; N]) -> Result<T>> ScalarField<T, N> for FnField<F> {
    fn value(&self, x: &[T; N]) -> Result<T> {
        (self.0)(x)
    }
}

/// The linear coordinate function `x_k`.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

impl<T: Real, const N: usize> ScalarField<T, N> for Coordinate {
    fn value(&self, x: &[T; N]) -> Result<T> {
        Ok(x[self.0])
    }

    fn gradient(&self, _x: &[T; N]) -> Option<Result<[T; N]>> {
        let mut g = [T::zero(); N];
        g[self.0] = T::one();
        Some(Ok(g))
    }
}

/// Invariant `τ_{k+1}` on `(γ, M)`.
#[derive(Clone, Copy, Debug)]
pub struct Tau(pub usize);

impl<T: Real> ScalarField<T, 6> for Tau {
    fn value(&self, x: &[T; 6]) -> Result<T> {
        Ok(invariants(&StateGM::from_array(x)).tau[self.0])
    }

    fn gradient(&self, x: &[T; 6]) -> Option<Result<[T; 6]>> {
        let [g1, g2, _, m1, m2, _] = *x;
        let (o, z) = (T::one(), T::zero());
        let two = lit::<T>(2.0);
        let g = match self.0 {
            0 => [z, z, o, z, z, z],
            1 => [m2, -m1, z, -g2, g1, z],
            2 => [m1, m2, z, g1, g2, z],
            3 => [z, z, z, z, z, o],
            4 => [z, z, z, two * m1, two * m2, z],
            k => return Some(Err(Error::InvalidParameter(format!("no invariant tau{}", k + 1)))),
        };
        Some(Ok(g))
    }
}

/// `j₁ = −M₃` (index 0) or `j₂ = ⟨γ, M⟩` (index 1).
#[derive(Clone, Copy, Debug)]
pub struct SmallJ(pub usize);

impl<T: Real> ScalarField<T, 6> for SmallJ {
    fn value(&self, x: &[T; 6]) -> Result<T> {
        Ok(match self.0 {
            0 => -x[5],
            _ => x[0] * x[3] + x[1] * x[4] + x[2] * x[5],
        })
    }

    fn gradient(&self, x: &[T; 6]) -> Option<Result<[T; 6]>> {
        let z = T::zero();
        Some(Ok(match self.0 {
            0 => [z, z, z, z, z, -T::one()],
            _ => [x[3], x[4], x[5], x[0], x[1], x[2]],
        }))
    }
}

/// `J_i = f_i(γ₃)·j₁ + g_i(γ₃)·j₂` for `i ∈ {0, 1}`.
pub struct GaugeMomentumField<'a, T> {
    pub coeffs: &'a dyn MomentumCoefficients<T>,
    pub index: usize,
}

impl<T: Real> ScalarField<T, 6> for GaugeMomentumField<'_, T> {
    fn value(&self, x: &[T; 6]) -> Result<T> {
        let c = self.coeffs.coefficients(x[2])?[self.index];
        let j1 = -x[5];
        let j2 = x[0] * x[3] + x[1] * x[4] + x[2] * x[5];
        Ok(c.f * j1 + c.g * j2)
    }

    fn gradient(&self, x: &[T; 6]) -> Option<Result<[T; 6]>> {
        let c = match self.coeffs.coefficients(x[2]) {
            Ok(c) => c[self.index],
            Err(e) => return Some(Err(e)),
        };
        let j1 = -x[5];
        let j2 = x[0] * x[3] + x[1] * x[4] + x[2] * x[5];
        Some(Ok([
            c.g * x[3],
            c.g * x[4],
            c.g * x[5] + c.df * j1 + c.dg * j2,
            c.g * x[0],
            c.g * x[1],
            c.g * x[2] - c.f,
        ]))
    }
}

/// The energy `½⟨M, Ω⟩ − m·grav·⟨γ, s⟩`.
pub struct Hamiltonian<'a, T> {
    pub solid: &'a Solid<T>,
}

impl<T: Real> ScalarField<T, 6> for Hamiltonian<'_, T> {
    fn value(&self, x: &[T; 6]) -> Result<T> {
        energy_raw(&self.solid.params, &self.solid.spec, x)
    }
}

/// `{f, g}` as a field in its own right, for nesting.
pub struct BracketField<'a, T> {
    pub solid: &'a Solid<T>,
    pub f: &'a dyn ScalarField<T, 6>,
    pub g: &'a dyn ScalarField<T, 6>,
    pub kind: BracketKind,
}

impl<T: Real> ScalarField<T, 6> for BracketField<'_, T> {
    fn value(&self, x: &[T; 6]) -> Result<T> {
        bracket_at(self.solid, self.f, self.g, x, self.kind)
    }

    fn fd_scale(&self) -> f64 {
        NESTED_FD_SCALE
    }
}

fn fill_bivector<T: Real>(gamma: Vec3<T>, w: Vec3<T>) -> SmallMatrix<T> {
    let mut pi = SmallMatrix::antisymmetric(6);
    for i in 0..3 {
        let col = gamma.cross(Vec3::basis(i));
        for a in 0..3 {
            pi.set_pair(a, 3 + i, col[a]);
        }
    }
    // {M_i, M_j} = −ε_ijk W_k
    pi.set_pair(3, 4, -w.z);
    pi.set_pair(4, 5, -w.x);
    pi.set_pair(5, 3, -w.y);
    pi
}

fn bivector_raw<T: Real>(solid: &Solid<T>, x: &[T; 6], kind: BracketKind) -> Result<SmallMatrix<T>> {
    let st = StateGM::from_array(x);
    let k = kinematics_raw(&solid.params, &solid.spec, st.gamma, st.momentum)?;
    let v = lqp_from(&solid.params, &k.pe, st.gamma, k.s, k.omega);
    let extra = match kind {
        BracketKind::Gauged => v.lvec,
        BracketKind::Nonholonomic => v.kvec,
    };
    Ok(fill_bivector(st.gamma, st.momentum + extra))
}

/// The 6×6 matrix `{x_a, x_b}` in the order `(γ₁, γ₂, γ₃, M₁, M₂, M₃)`.
pub fn bivector_gm<T: Real>(
    params: &BodyParams<T>,
    profile: &ProfileEval<T>,
    state: &StateGM<T>,
    kind: BracketKind,
) -> Result<SmallMatrix<T>> {
    let v = crate::geomforms::qpl_values(params, profile, state)?;
    let extra = match kind {
        BracketKind::Gauged => v.lvec,
        BracketKind::Nonholonomic => v.kvec,
    };
    Ok(fill_bivector(state.gamma, state.momentum + extra))
}

fn bracket_at<T: Real>(
    solid: &Solid<T>,
    f: &dyn ScalarField<T, 6>,
    g: &dyn ScalarField<T, 6>,
    x: &[T; 6],
    kind: BracketKind,
) -> Result<T> {
    let pi = bivector_raw(solid, x, kind)?;
    let df = field_gradient(f, x)?;
    let dg = field_gradient(g, x)?;
    Ok(pi.bilinear(&df, &dg))
}

/// `{f, g} = ∇fᵀ Π ∇g` at `state`.
pub fn bracket<T: Real>(
    solid: &Solid<T>,
    f: &dyn ScalarField<T, 6>,
    g: &dyn ScalarField<T, 6>,
    state: &StateGM<T>,
    kind: BracketKind,
) -> Result<T> {
    bracket_at(solid, f, g, &state.to_array(), kind)
}

/// `Π∇f`, the vector field generated by `f`.
pub fn hamiltonian_vector<T: Real>(
    solid: &Solid<T>,
    f: &dyn ScalarField<T, 6>,
    state: &StateGM<T>,
    kind: BracketKind,
) -> Result<[T; 6]> {
    let x = state.to_array();
    let pi = bivector_raw(solid, &x, kind)?;
    let df = field_gradient(f, &x)?;
    let v = pi.mul_vec(&df);
    Ok([v[0], v[1], v[2], v[3], v[4], v[5]])
}

/// Cyclic sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
pub fn jacobiator<T: Real>(
    solid: &Solid<T>,
    f: &dyn ScalarField<T, 6>,
    g: &dyn ScalarField<T, 6>,
    h: &dyn ScalarField<T, 6>,
    state: &StateGM<T>,
    kind: BracketKind,
) -> Result<T> {
    let gh = BracketField { solid, f: g, g: h, kind };
    let hf = BracketField { solid, f: h, g: f, kind };
    let fg = BracketField { solid, f, g, kind };
    Ok(bracket(solid, f, &gh, state, kind)? + bracket(solid, g, &hf, state, kind)? + bracket(solid, h, &fg, state, kind)?)
}

/// Closed form of the nonholonomic Jacobiator on `(τ₁, j₂, τ₄)` in the
/// sign convention of this module: `−mϱ⟨γ,s⟩(γ₁² + γ₂²)/A₁`.
pub fn nonholonomic_jacobiator_closed_form<T: Real>(solid: &Solid<T>, state: &StateGM<T>) -> Result<T> {
    let pe = solid.profile_at(state)?;
    let sc = solid.scalars(state)?;
    let g = state.gamma;
    Ok(-solid.params.m * pe.rho * sc.gs * (g.x * g.x + g.y * g.y) / sc.a1)
}

/// The reduced bracket of the invariants `{τ_a, τ_b}` as a 5×5 matrix.
///
/// Nonzero entries (one-based):
/// `{τ₁,τ₂} = 1−τ₁²`, `{τ₂,τ₃} = (1−τ₁²)(τ₄+ℒ₃)`, `{τ₂,τ₄} = −(1−τ₁²)𝒬`,
/// `{τ₁,τ₅} = 2τ₂`, `{τ₃,τ₅} = −2τ₂(τ₄+ℒ₃)`, `{τ₄,τ₅} = 2τ₂𝒬`,
/// `{τ₂,τ₅} = −2(τ₁τ₅ − τ₃(τ₄+ℒ₃))`, with `ℒ₃ = 𝒬τ₁ + 𝒫` and
/// `(𝒬, 𝒫) = [𝒬𝒫](τ₁)(τ₃, τ₄)`.
pub fn reduced_bivector_tau<T: Real>(
    params: &BodyParams<T>,
    spec: &ProfileSpec<T>,
    point: &InvariantPoint<T>,
) -> Result<SmallMatrix<T>> {
    let t = point.tau;
    let rel = point.relation_residual();
    if !(rel.abs() <= lit::<T>(1e-6) * T::one().max(t[4].abs())) {
        return Err(Error::Consistency(format!("invariant point violates tau2^2 + tau3^2 = (1 - tau1^2) tau5 by {rel}")));
    }
    let a = qp_matrix(params, spec, t[0])?;
    let qp = a.mul_vec(&[t[2], t[3]]);
    let (q, p) = (qp[0], qp[1]);
    let l3 = q * t[0] + p;
    let w = T::one() - t[0] * t[0];
    let two = lit::<T>(2.0);
    let m4 = t[3] + l3;
    let mut pi = SmallMatrix::antisymmetric(5);
    pi.set_pair(0, 1, w);
    pi.set_pair(1, 2, w * m4);
    pi.set_pair(1, 3, -w * q);
    pi.set_pair(0, 4, two * t[1]);
    pi.set_pair(2, 4, -two * t[1] * m4);
    pi.set_pair(3, 4, two * t[1] * q);
    pi.set_pair(1, 4, -two * (t[0] * t[4] - t[2] * m4));
    Ok(pi)
}

/// Largest gap between `{τ_a, τ_b}` on `(γ, M)` and the explicit reduced
/// matrix.
pub fn pushforward_residual<T: Real>(solid: &Solid<T>, state: &StateGM<T>) -> Result<T> {
    let explicit = reduced_bivector_tau(&solid.params, &solid.spec, &invariants(state))?;
    let mut worst = T::zero();
    for a in 0..5 {
        for b in (a + 1)..5 {
            let v = bracket(solid, &Tau(a), &Tau(b), state, BracketKind::Gauged)?;
            worst = worst.max((v - explicit.get(a, b)).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CasimirResiduals<T> {
    /// `max_k |{J₁, τ_k}|`
    pub max_j1: T,
    /// `max_k |{J₂, τ_k}|`
    pub max_j2: T,
    /// `|{J₁, J₂}|`
    pub involution: T,
    /// `max |Π∇J₁ − f₁(τ₁)·(e₃×γ, e₃×M)|`
    pub vertical_j1: T,
    /// `max |Π∇J₂ − f₂(τ₁)·(e₃×γ, e₃×M)|`
    pub vertical_j2: T,
}

/// Casimir, involution and verticality residuals of the two momenta.
///
/// With `kind = Gauged` all entries vanish; `Nonholonomic` is a diagnostic.
pub fn casimir_residuals<T: Real>(
    solid: &Solid<T>,
    state: &StateGM<T>,
    momenta: &dyn MomentumCoefficients<T>,
    kind: BracketKind,
) -> Result<CasimirResiduals<T>> {
    eval_profile(&solid.spec, state.gamma.z)?;
    let coeffs = momenta.coefficients(state.gamma.z)?;
    let j = [GaugeMomentumField { coeffs: momenta, index: 0 }, GaugeMomentumField { coeffs: momenta, index: 1 }];
    let mut max_j = [T::zero(); 2];
    let mut vertical = [T::zero(); 2];
    let e3 = Vec3::<T>::e3();
    let gen_g = e3.cross(state.gamma);
    let gen_m = e3.cross(state.momentum);
    let generator = [gen_g.x, gen_g.y, gen_g.z, gen_m.x, gen_m.y, gen_m.z];
    for i in 0..2 {
        for k in 0..5 {
            max_j[i] = max_j[i].max(bracket(solid, &j[i], &Tau(k), state, kind)?.abs());
        }
        let v = hamiltonian_vector(solid, &j[i], state, kind)?;
        for c in 0..6 {
            vertical[i] = vertical[i].max((v[c] - coeffs[i].f * generator[c]).abs());
        }
    }
    Ok(CasimirResiduals {
        max_j1: max_j[0],
        max_j2: max_j[1],
        involution: bracket(solid, &j[0], &j[1], state, kind)?.abs(),
        vertical_j1: vertical[0],
        vertical_j2: vertical[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rhs;
    use crate::momenta::{solve_momenta, RouthClosedForm};
    use proptest::prelude::*;

    fn solid(spec: ProfileSpec<f64>, grav: f64) -> Solid<f64> {
        Solid::new(BodyParams::new(1.0, 2.0, 3.0, grav).unwrap(), spec).unwrap()
    }

    fn routh(r: f64, l: f64) -> ProfileSpec<f64> {
        ProfileSpec::routh(r, l).unwrap()
    }

    fn worked() -> StateGM<f64> {
        StateGM::new(Vec3::new(0.6, 0.0, 0.8), Vec3::new(1.0, 2.0, 3.0)).unwrap()
    }

    #[test]
    fn bivector_examples() {
        let s = solid(routh(1.0, 0.0), 9.8);
        let st = StateGM::new(Vec3::e3(), Vec3::new(0.0, 0.0, 3.0)).unwrap();
        let pe = s.profile_at(&st).unwrap();
        let gauged = bivector_gm(&s.params, &pe, &st, BracketKind::Gauged).unwrap();
        let nh = bivector_gm(&s.params, &pe, &st, BracketKind::Nonholonomic).unwrap();
        assert!((gauged.get(3, 4) + 2.0).abs() < 1e-14);
        assert!((nh.get(3, 4) + 1.0).abs() < 1e-14);
        assert_eq!(gauged.get(2, 5), 0.0);
        assert_eq!(gauged.get(0, 4), -1.0);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(gauged.get(a, b), 0.0);
            }
        }
        assert_eq!(gauged.max_abs_diff(&gauged.transpose().clone()), 2.0 * gauged.max_abs());
        assert!(gauged.is_tagged_antisymmetric());
    }

    #[test]
    fn bracket_examples() {
        let s = solid(routh(1.0, 0.0), 0.0);
        let st = worked();
        let v = bracket(&s, &Tau(0), &Tau(1), &st, BracketKind::Gauged).unwrap();
        assert!((v - 0.36).abs() < 1e-12);
        let h = Hamiltonian { solid: &s };
        assert!(bracket(&s, &h, &h, &st, BracketKind::Gauged).unwrap().abs() < 1e-10);
        let v = bracket(&s, &h, &Tau(3), &st, BracketKind::Gauged).unwrap();
        assert!((v - 4.0 / 9.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn vector_field_matches_rhs() {
        for spec in [routh(1.0, 0.1), ProfileSpec::ellipsoid(2.0, 1.0).unwrap()] {
            let s = solid(spec, 9.8);
            let st = StateGM::normalized(Vec3::new(0.3, -0.5, 0.6), Vec3::new(0.7, -1.1, 2.0)).unwrap();
            let (gd, md) = rhs(&s.params, &s.spec, &st).unwrap();
            for kind in [BracketKind::Gauged, BracketKind::Nonholonomic] {
                let v = hamiltonian_vector(&s, &Hamiltonian { solid: &s }, &st, kind).unwrap();
                let want = [gd.x, gd.y, gd.z, md.x, md.y, md.z];
                for c in 0..6 {
                    assert!((v[c] - want[c]).abs() < 1e-8, "{kind:?} {c}: {} vs {}", v[c], want[c]);
                }
            }
        }
    }

    #[test]
    fn not_poisson_anchor() {
        let s = solid(routh(1.0, 0.0), 9.8);
        let st = worked();
        let closed = nonholonomic_jacobiator_closed_form(&s, &st).unwrap();
        assert!((closed + 0.12).abs() < 1e-14);
        let got = jacobiator(&s, &Tau(0), &SmallJ(1), &Tau(3), &st, BracketKind::Nonholonomic).unwrap();
        assert!((got - closed).abs() < 1e-4 * closed.abs(), "{got} vs {closed}");
        let gauged = jacobiator(&s, &Tau(0), &SmallJ(1), &Tau(3), &st, BracketKind::Gauged).unwrap();
        assert!(gauged.abs() < 1e-7, "{gauged}");
        let rep = jacobiator(&s, &Tau(1), &Tau(1), &Tau(4), &st, BracketKind::Nonholonomic).unwrap();
        assert!(rep.abs() < 1e-8);
    }

    /// Brute-force oracle: explicit cyclic sum with every derivative taken
    /// by finite differences of the raw matrix entries.
    #[test]
    fn not_poisson_sign_by_brute_force() {
        let s = solid(routh(1.0, 0.0), 9.8);
        let x0 = worked().to_array();
        let pij = |x: &[f64; 6], i: usize, j: usize| bivector_raw(&s, x, BracketKind::Nonholonomic).unwrap().get(i, j);
        // f = γ₃, h = M₃ are linear; g = ⟨γ, M⟩ is quadratic
        let df = [0., 0., 1., 0., 0., 0.];
        let dh = [0., 0., 0., 0., 0., 1.];
        let dg = |x: &[f64; 6]| [x[3], x[4], x[5], x[0], x[1], x[2]];
        let br = |x: &[f64; 6], a: &[f64; 6], b: &[f64; 6]| {
            let mut acc = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    acc += a[i] * pij(x, i, j) * b[j];
                }
            }
            acc
        };
        let grad = |f: &dyn Fn(&[f64; 6]) -> f64| {
            let mut g = [0.0; 6];
            for i in 0..6 {
                let h = 1e-5;
                let (mut p, mut m) = (x0, x0);
                p[i] += h;
                m[i] -= h;
                g[i] = (f(&p) - f(&m)) / (2.0 * h);
            }
            g
        };
        let gh = grad(&|x| br(x, &dg(x), &dh));
        let hf = grad(&|x| br(x, &dh, &df));
        let fg = grad(&|x| br(x, &df, &dg(x)));
        let total = br(&x0, &df, &gh) + br(&x0, &dg(&x0), &hf) + br(&x0, &dh, &fg);
        assert!((total + 0.12).abs() < 1e-6, "{total}");
    }

    #[test]
    fn reduced_matrix_examples() {
        let s = solid(routh(1.0, 0.0), 9.8);
        let inv = invariants(&worked());
        let pi = reduced_bivector_tau(&s.params, &s.spec, &inv).unwrap();
        assert!((pi.get(0, 1) - 0.36).abs() < 1e-14);
        assert!((pi.get(1, 2) - 0.76).abs() < 1e-13);
        assert!(pi.is_tagged_antisymmetric());
        assert!(pushforward_residual(&s, &worked()).unwrap() < 1e-8);

        let flat = InvariantPoint::new([0.5, 0.0, 0.4, 1.0, 0.16 / 0.75]);
        let pi = reduced_bivector_tau(&s.params, &s.spec, &flat).unwrap();
        assert_eq!((pi.get(0, 4), pi.get(2, 4), pi.get(3, 4)), (0.0, 0.0, 0.0));

        let bad = InvariantPoint::new([0.5, 1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(reduced_bivector_tau(&s.params, &s.spec, &bad), Err(Error::Consistency(_))));

        let rest = StateGM::new(Vec3::new(0.6, 0.0, 0.8), Vec3::zero()).unwrap();
        assert!(pushforward_residual(&s, &rest).unwrap() < 1e-10);
    }

    #[test]
    fn chaplygin_uses_q_only() {
        let s = solid(ProfileSpec::ellipsoid(1.5, 1.5).unwrap(), 9.8);
        let st = StateGM::normalized(Vec3::new(0.3, 0.4, 0.5), Vec3::new(1.0, -2.0, 0.5)).unwrap();
        let t = invariants(&st).tau;
        let qp = qp_matrix(&s.params, &s.spec, t[0]).unwrap().mul_vec(&[t[2], t[3]]);
        assert!(qp[1].abs() < 1e-12);
        let pi = reduced_bivector_tau(&s.params, &s.spec, &invariants(&st)).unwrap();
        let w = 1.0 - t[0] * t[0];
        assert!((pi.get(1, 2) - w * (t[3] + qp[0] * t[0])).abs() < 1e-12);
    }

    #[test]
    fn casimirs_routh_closed_form() {
        let s = solid(routh(1.0, 0.1), 9.8);
        let cf = RouthClosedForm::new(s.params, 1.0, 0.1).unwrap();
        let r = casimir_residuals(&s, &worked(), &cf, BracketKind::Gauged).unwrap();
        assert!(r.max_j1 < 1e-8 && r.max_j2 < 1e-8 && r.involution < 1e-8, "{r:?}");
        assert!(r.vertical_j1 < 1e-12 && r.vertical_j2 < 1e-12, "{r:?}");

        let nh = casimir_residuals(&s, &worked(), &cf, BracketKind::Nonholonomic).unwrap();
        assert!(nh.max_j1 > 1e-2, "{nh:?}");

        let rest = StateGM::new(Vec3::new(0.6, 0.0, 0.8), Vec3::zero()).unwrap();
        let r = casimir_residuals(&s, &rest, &cf, BracketKind::Gauged).unwrap();
        assert!(r.max_j1 < 1e-12 && r.max_j2 < 1e-12 && r.involution < 1e-12);
    }

    #[test]
    fn casimirs_tabulated_ellipsoid() {
        let s = solid(ProfileSpec::ellipsoid(2.0, 1.0).unwrap(), 9.8);
        let sol = solve_momenta(&s.params, &s.spec, 1e-3, 1e-4).unwrap();
        let st = StateGM::normalized(Vec3::new(0.3, -0.5, 0.6), Vec3::new(0.7, -1.1, 2.0)).unwrap();
        let r = casimir_residuals(&s, &st, &sol, BracketKind::Gauged).unwrap();
        assert!(r.max_j1 < 1e-8 && r.max_j2 < 1e-8 && r.involution < 1e-8, "{r:?}");
        assert!(r.vertical_j1 < 1e-10 && r.vertical_j2 < 1e-10, "{r:?}");
    }

    fn state() -> impl Strategy<Value = StateGM<f64>> {
        (0.0f64..6.3, -0.95f64..0.95, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(th, z, a, b, c)| {
            let q = (1.0 - z * z).sqrt();
            StateGM { gamma: Vec3::new(q * th.cos(), q * th.sin(), z), momentum: Vec3::new(a, b, c) }
        })
    }

    fn specs() -> impl Strategy<Value = ProfileSpec<f64>> {
        prop_oneof![
            (0.5f64..2.0, -0.5f64..0.5).prop_map(|(r, f)| ProfileSpec::Routh { r, l: f * r }),
            (0.5f64..3.0, 0.5f64..3.0).prop_map(|(b, c)| ProfileSpec::Ellipsoid { b, c }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn antisymmetry_and_leibniz(spec in specs(), st in state(), a in 0usize..5, b in 0usize..5, c in 0usize..5) {
            let s = solid(spec, 9.8);
            let kind = BracketKind::Nonholonomic;
            let ab = bracket(&s, &Tau(a), &Tau(b), &st, kind).unwrap();
            let ba = bracket(&s, &Tau(b), &Tau(a), &st, kind).unwrap();
            prop_assert!((ab + ba).abs() < 1e-9);
            let prod = FnField(|x: &[f64; 6]| Ok(Tau(a).value(x)? * Tau(b).value(x)?));
            let x = st.to_array();
            let lhs = bracket(&s, &prod, &Tau(c), &st, kind).unwrap();
            let fa: f64 = Tau(a).value(&x).unwrap();
            let fb: f64 = Tau(b).value(&x).unwrap();
            let rhs = fa * bracket(&s, &Tau(b), &Tau(c), &st, kind).unwrap()
                + fb * bracket(&s, &Tau(a), &Tau(c), &st, kind).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-7 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
        }

        #[test]
        fn generator_is_vertical(st in state(), k in 0usize..5) {
            let e3 = Vec3::e3();
            let gg = e3.cross(st.gamma);
            let gm = e3.cross(st.momentum);
            let xi = [gg.x, gg.y, gg.z, gm.x, gm.y, gm.z];
            let d = Tau(k).gradient(&st.to_array()).unwrap().unwrap();
            let pairing: f64 = d.iter().zip(xi).map(|(a, b)| a * b).sum();
            prop_assert!(pairing.abs() < 1e-10);
        }

        #[test]
        fn analytic_tau_gradients(st in state(), k in 0usize..5) {
            let x = st.to_array();
            let exact = Tau(k).gradient(&x).unwrap().unwrap();
            let fd = try_grad_fd(|y| Tau(k).value(y), &x, 1e-5).unwrap();
            for i in 0..6 {
                prop_assert!((exact[i] - fd[i]).abs() < 1e-8);
            }
        }

        #[test]
        fn pushforward_agrees(spec in specs(), st in state()) {
            let s = solid(spec, 9.8);
            prop_assert!(pushforward_residual(&s, &st).unwrap() < 1e-8);
        }
    }
}
