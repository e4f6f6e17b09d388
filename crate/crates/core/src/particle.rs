//! A particle in ℝ³ with the constraint `ż = y·ẋ`.
//!
//! Coordinates on the constraint manifold are `(x, y, z, pₓ, p_y)`; the
//! frame `e₁ = ∂x + y∂z, e₂ = ∂y, e₃ = ∂pₓ, e₄ = ∂p_y` carries the 2-form
//! with `Ω(e₁,e₃) = Ω(e₂,e₄) = 1` and `Ω(e₁,e₂) = −y·pₓ/(1 + y²)`.

use crate::brackets::{field_gradient, Coordinate, ScalarField, NESTED_FD_SCALE};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::smallalg::{invert_small, SmallMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParticleState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub px: T,
    pub py: T,
}

impl<T: Real> ParticleState<T> {
    pub fn new(x: T, y: T, z: T, px: T, py: T) -> Self {
        Self { x, y, z, px, py }
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.x, self.y, self.z, self.px, self.py]
    }

    pub fn from_array(a: &[T; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// `(ẋ, ẏ, ż, ṗₓ, ṗ_y)`
pub fn particle_rhs<T: Real>(s: &ParticleState<T>) -> [T; 5] {
    let q = T::one() + s.y * s.y;
    let xd = s.px / q;
    [xd, s.py, s.y * xd, s.y * s.px * s.py / q, T::zero()]
}

/// `J = pₓ/√(1 + y²)`
pub fn particle_momentum<T: Real>(s: &ParticleState<T>) -> T {
    s.px / (T::one() + s.y * s.y).sqrt()
}

/// `H = ½(pₓ²/(1 + y²) + p_y²)`
pub fn particle_energy<T: Real>(s: &ParticleState<T>) -> T {
    lit::<T>(0.5) * (s.px * s.px / (T::one() + s.y * s.y) + s.py * s.py)
}

/// Which frame 2-form to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrameForm {
    #[default]
    Full,
    /// `Ω(e₁, e₂)` set to zero; a diagnostic that removes the curvature term.
    DroppedCurvature,
}

/// The 4×4 frame 2-form at `s`.
pub fn particle_frame_form<T: Real>(s: &ParticleState<T>, form: FrameForm) -> SmallMatrix<T> {
    let mut om = SmallMatrix::antisymmetric(4);
    om.set_pair(0, 2, T::one());
    om.set_pair(1, 3, T::one());
    if form == FrameForm::Full {
        om.set_pair(0, 1, -s.y * s.px / (T::one() + s.y * s.y));
    }
    om
}

/// The vector field `X_g` of a function with gradient `dg`, in coordinates.
pub fn particle_vector_field<T: Real>(dg: &[T; 5], s: &ParticleState<T>, form: FrameForm) -> Result<[T; 5]> {
    let frame = [dg[0] + s.y * dg[2], dg[1], dg[3], dg[4]];
    let inv = invert_small(&particle_frame_form(s, form).transpose())?;
    let c = inv.mul_vec(&frame);
    Ok([c[0], c[1], s.y * c[0], c[2], c[3]])
}

fn bracket_at<T: Real>(
    f: &dyn ScalarField<T, 5>,
    g: &dyn ScalarField<T, 5>,
    x: &[T; 5],
    form: FrameForm,
) -> Result<T> {
    let s = ParticleState::from_array(x);
    let xg = particle_vector_field(&field_gradient(g, x)?, &s, form)?;
    let df = field_gradient(f, x)?;
    Ok(df.iter().zip(xg).fold(T::zero(), |acc, (a, b)| acc + *a * b))
}

/// `{f, g} = df(X_g)`, so that `ḟ = {f, H}`.
pub fn particle_bracket<T: Real>(f: &dyn ScalarField<T, 5>, g: &dyn ScalarField<T, 5>, state: &ParticleState<T>) -> Result<T> {
    bracket_at(f, g, &state.to_array(), FrameForm::Full)
}

pub fn particle_bracket_with<T: Real>(
    f: &dyn ScalarField<T, 5>,
    g: &dyn ScalarField<T, 5>,
    state: &ParticleState<T>,
    form: FrameForm,
) -> Result<T> {
    bracket_at(f, g, &state.to_array(), form)
}

struct NestedBracket<'a, T> {
    f: &'a dyn ScalarField<T, 5>,
    g: &'a dyn ScalarField<T, 5>,
    form: FrameForm,
}

impl<T: Real> ScalarField<T, 5> for NestedBracket<'_, T> {
    fn value(&self, x: &[T; 5]) -> Result<T> {
        bracket_at(self.f, self.g, x, self.form)
    }

    fn fd_scale(&self) -> f64 {
        NESTED_FD_SCALE
    }
}

/// Cyclic sum of nested brackets.
pub fn particle_jacobiator<T: Real>(
    f: &dyn ScalarField<T, 5>,
    g: &dyn ScalarField<T, 5>,
    h: &dyn ScalarField<T, 5>,
    state: &ParticleState<T>,
    form: FrameForm,
) -> Result<T> {
    let x = state.to_array();
    let gh = NestedBracket { f: g, g: h, form };
    let hf = NestedBracket { f: h, g: f, form };
    let fg = NestedBracket { f, g, form };
    Ok(bracket_at(f, &gh, &x, form)? + bracket_at(g, &hf, &x, form)? + bracket_at(h, &fg, &x, form)?)
}

/// `|Jacobiator|` on the coordinates `(y, pₓ, p_y)` of the reduced space.
pub fn particle_jacobiator_reduced<T: Real>(state: &ParticleState<T>, form: FrameForm) -> Result<T> {
    Ok(particle_jacobiator(&Coordinate(1), &Coordinate(3), &Coordinate(4), state, form)?.abs())
}

pub struct ParticleMomentum;

impl<T: Real> ScalarField<T, 5> for ParticleMomentum {
    fn value(&self, x: &[T; 5]) -> Result<T> {
        Ok(particle_momentum(&ParticleState::from_array(x)))
    }

    fn gradient(&self, x: &[T; 5]) -> Option<Result<[T; 5]>> {
        let q = T::one() + x[1] * x[1];
        let z = T::zero();
        Some(Ok([z, -x[3] * x[1] / (q * q.sqrt()), z, q.sqrt().recip(), z]))
    }
}

pub struct ParticleEnergy;

impl<T: Real> ScalarField<T, 5> for ParticleEnergy {
    fn value(&self, x: &[T; 5]) -> Result<T> {
        Ok(particle_energy(&ParticleState::from_array(x)))
    }

    fn gradient(&self, x: &[T; 5]) -> Option<Result<[T; 5]>> {
        let q = T::one() + x[1] * x[1];
        let z = T::zero();
        Some(Ok([z, -x[3] * x[3] * x[1] / (q * q), z, x[3] / q, x[4]]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleSample<T> {
    pub t: T,
    pub state: ParticleState<T>,
    pub momentum: T,
    pub energy: T,
}

/// Fixed-step RK4; `renormalize_gamma` is ignored.
pub fn integrate_particle<T: Real>(state0: &ParticleState<T>, cfg: &IntegratorConfig<T>) -> Result<Vec<ParticleSample<T>>> {
    cfg.validate()?;
    if !state0.is_finite() {
        return Err(Error::NonFinite { what: "particle state".into() });
    }
    let mk = |t: T, s: ParticleState<T>| ParticleSample {
        t,
        state: s,
        momentum: particle_momentum(&s),
        energy: particle_energy(&s),
    };
    let n = cfg.steps();
    let dt = cfg.dt;
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = state0.to_array();
    out.push(mk(T::zero(), *state0));
    let shift = |x: &[T; 5], d: &[T; 5], h: T| std::array::from_fn::<T, 5, _>(|i| x[i] + d[i] * h);
    let f = |x: &[T; 5]| particle_rhs(&ParticleState::from_array(x));
    for k in 1..=n {
        let k1 = f(&x);
        let k2 = f(&shift(&x, &k1, dt * half));
        let k3 = f(&shift(&x, &k2, dt * half));
        let k4 = f(&shift(&x, &k3, dt));
        x = std::array::from_fn(|i| x[i] + dt / lit(6.0) * (k1[i] + two * k2[i] + two * k3[i] + k4[i]));
        let s = ParticleState::from_array(&x);
        if !s.is_finite() {
            return Err(Error::Diverged { last_valid: k - 1 });
        }
        out.push(mk(dt * lit(k as f64), s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::FnField;
    use crate::smallalg::grad_fd;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64, px: f64, py: f64) -> ParticleState<f64> {
        ParticleState::new(x, y, z, px, py)
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(particle_rhs(&p(0., 1., 0., 1., 1.)), [0.5, 1.0, 0.5, 0.5, 0.0]);
        assert_eq!(particle_rhs(&p(0., 0., 0., 1., 0.)), [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(particle_rhs(&p(0.3, -1.2, 2.0, 0., 0.)).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn momentum_examples() {
        assert_eq!(particle_momentum(&p(5., 0., 1., 1., 2.)), 1.0);
        assert_eq!(particle_momentum(&p(5., 0.7, 1., 0., 2.)), 0.0);
        assert!((particle_momentum(&p(0., 1., 0., 2., 0.)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn convention_anchor() {
        let s = p(0., 1., 0., 1., 1.);
        let dh = ParticleEnergy.gradient(&s.to_array()).unwrap().unwrap();
        let v = particle_vector_field(&dh, &s, FrameForm::Full).unwrap();
        let want = particle_rhs(&s);
        for i in 0..5 {
            assert!((v[i] - want[i]).abs() < 1e-14, "{v:?}");
        }
        assert!(particle_bracket(&ParticleEnergy, &ParticleEnergy, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn frame_form_inverse_at_origin() {
        let om = particle_frame_form(&p(0., 0., 0., 1., 1.), FrameForm::Full);
        let inv = invert_small(&om).unwrap();
        assert_eq!(inv.max_abs_diff(&om.transpose()), 0.0);
    }

    #[test]
    fn quiet_state_has_zero_jacobiator() {
        let j = particle_jacobiator_reduced(&p(0.4, -1.1, 0.2, 0., 0.), FrameForm::Full).unwrap();
        assert!(j < 1e-10);
    }

    #[test]
    fn curvature_entry_drives_unreduced_jacobiator() {
        let s = p(0.3, 0.9, -0.4, 1.2, -0.7);
        let xs = [Coordinate(0), Coordinate(3), Coordinate(4)];
        let full = particle_jacobiator(&xs[0], &xs[1], &xs[2], &s, FrameForm::Full).unwrap();
        let flat = particle_jacobiator(&xs[0], &xs[1], &xs[2], &s, FrameForm::DroppedCurvature).unwrap();
        assert!(full.abs() > 1e-2 && flat.abs() < 1e-8, "{full} {flat}");
    }

    #[test]
    fn conservation_along_flow() {
        let cfg = IntegratorConfig::new(1e-3, 10.0).unwrap();
        let traj = integrate_particle(&p(0., 0., 0., 1., 1.), &cfg).unwrap();
        let (j0, e0) = (traj[0].momentum, traj[0].energy);
        let dj = traj.iter().map(|s| (s.momentum - j0).abs()).fold(0.0, f64::max);
        let de = traj.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max);
        assert!(dj < 1e-8 && de < 1e-8, "{dj} {de}");
    }

    #[test]
    fn momentum_equation_on_grid() {
        for i in 0..=400 {
            let y = -4.0 + 0.02 * i as f64;
            let f = |v: &[f64; 1]| 1.0 / (1.0 + v[0] * v[0]).sqrt();
            let fp = -y / (1.0 + y * y).powf(1.5);
            assert!((fp + f(&[y]) * y / (1.0 + y * y)).abs() < 1e-12);
            let fd = grad_fd(f, &[y], 1e-5).unwrap()[0];
            assert!((fd - fp).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn momentum_is_casimir_of_reduced_functions(
            x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0, px in -2.0f64..2.0, py in -2.0f64..2.0,
        ) {
            let s = p(x, y, z, px, py);
            let f = FnField(|v: &[f64; 5]| Ok(v[1].sin() * v[3] + v[4] * v[4] * v[1]));
            let b = particle_bracket(&ParticleMomentum, &f, &s).unwrap();
            prop_assert!(b.abs() < 1e-8, "{}", b);
            for k in [1usize, 3, 4] {
                prop_assert!(particle_bracket(&ParticleMomentum, &Coordinate(k), &s).unwrap().abs() < 1e-12);
            }
        }

        #[test]
        fn hamiltonian_field_matches_rhs(
            x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0, px in -2.0f64..2.0, py in -2.0f64..2.0,
        ) {
            let s = p(x, y, z, px, py);
            let dh = ParticleEnergy.gradient(&s.to_array()).unwrap().unwrap();
            let v = particle_vector_field(&dh, &s, FrameForm::Full).unwrap();
            let want = particle_rhs(&s);
            for i in 0..5 {
                prop_assert!((v[i] - want[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn analytic_gradients(y in -2.0f64..2.0, px in -2.0f64..2.0, py in -2.0f64..2.0) {
            let x = [0.1, y, 0.2, px, py];
            for field in [&ParticleMomentum as &dyn ScalarField<f64, 5>, &ParticleEnergy] {
                let exact = field.gradient(&x).unwrap().unwrap();
                let fd = grad_fd(|v| field.value(v).unwrap(), &x, 1e-5).unwrap();
                for i in 0..5 {
                    prop_assert!((exact[i] - fd[i]).abs() < 1e-8);
                }
            }
        }
    }
}
