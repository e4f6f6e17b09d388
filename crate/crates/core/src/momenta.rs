//! Coefficients `(f, g)(τ₁)` of the conserved momenta `J = f·j₁ + g·j₂`.
//!
//! They solve the linear system
//! `(f′, g′) = ((τ₁, −1), (1, 0))·[𝒬𝒫]ᵀ(τ₁)·(f, g)`,
//! which is tabulated numerically for any profile and known in closed form
//! for the Routh sphere.

use crate::error::{Error, Result};
use crate::geomforms::{qp_matrix, qp_matrix_at};
use crate::phase::{momentum_components, BodyParams, StateGM};
use crate::profile::{eval_profile_raw, ProfileSpec};
use crate::scalar::{lit, to_f64, Real};

/// A coefficient pair and its `τ₁`-derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairValue<T> {
    pub f: T,
    pub g: T,
    pub df: T,
    pub dg: T,
}

/// Anything that can supply the two coefficient pairs at a given `τ₁`.
pub trait MomentumCoefficients<T: Real> {
    fn coefficients(&self, tau1: T) -> Result<[PairValue<T>; 2]>;

    /// Interval of `τ₁` on which [`Self::coefficients`] is defined.
    fn domain(&self) -> (T, T) {
        (-T::one(), T::one())
    }
}

/// A single coefficient pair with a derivative, for [`ode_residual`].
pub trait DifferentiablePair<T: Real> {
    fn value(&self, tau1: T) -> Result<PairValue<T>>;
}

impl<T: Real, F: Fn(T) -> Result<PairValue<T>>> DifferentiablePair<T> for F {
    fn value(&self, tau1: T) -> Result<PairValue<T>> {
        self(tau1)
    }
}

fn ode_rhs_unchecked<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, tau1: T, fg: (T, T)) -> (T, T) {
    let a = qp_matrix_at(params, &eval_profile_raw(spec, tau1));
    ode_rhs_with(&a, tau1, fg)
}

fn ode_rhs_with<T: Real>(a: &crate::smallalg::SmallMatrix<T>, tau1: T, (f, g): (T, T)) -> (T, T) {
    let u0 = a.get(0, 0) * f + a.get(1, 0) * g;
    let u1 = a.get(0, 1) * f + a.get(1, 1) * g;
    (tau1 * u0 - u1, u0)
}

/// Right-hand side of the coefficient system.
pub fn momenta_ode_rhs<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, tau1: T, fg: (T, T)) -> Result<(T, T)> {
    let a = qp_matrix(params, spec, tau1)?;
    Ok(ode_rhs_with(&a, tau1, fg))
}

/// Tabulated basis of solutions on a uniform grid in `τ₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentaSolution<T> {
    pub grid: Vec<T>,
    /// `pairs[k] = [(f₁, g₁), (f₂, g₂)]` at `grid[k]`.
    pub pairs: Vec<[(T, T); 2]>,
    pub params: BodyParams<T>,
    pub spec: ProfileSpec<T>,
    pub delta: T,
    /// Actual grid spacing (at most the requested step).
    pub step: T,
}

/// Checks the pole margin `δ ∈ [1e−6, 0.1]` and the step `h ∈ (0, 1e−3]`.
pub fn validate_grid<T: Real>(delta: T, h: T) -> Result<()> {
    if !(delta >= lit(1e-6) && delta <= lit(0.1)) {
        return Err(Error::InvalidParameter(format!("delta must lie in [1e-6, 0.1], got {delta}")));
    }
    if !(h > T::zero() && h <= lit(1e-3)) {
        return Err(Error::InvalidParameter(format!("momenta step must lie in (0, 1e-3], got {h}")));
    }
    Ok(())
}

/// Integrates the coefficient system by RK4 from `τ₁ = 0` to `±(1 − δ)`,
/// starting from `(1, 0)` and `(0, 1)`.
pub fn solve_momenta<T: Real>(params: &BodyParams<T>, spec: &ProfileSpec<T>, delta: T, h: T) -> Result<MomentaSolution<T>> {
    params.validate()?;
    spec.validate()?;
    validate_grid(delta, h)?;
    let end = T::one() - delta;
    let n = (to_f64(end) / to_f64(h) * (1.0 - 1e-12)).ceil() as usize;
    let step = end / lit(n as f64);

    let march = |dir: T| -> Result<Vec<[(T, T); 2]>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut y = [(T::one(), T::zero()), (T::zero(), T::one())];
        out.push(y);
        let hs = step * dir;
        let half = lit::<T>(0.5);
        let sixth = lit::<T>(1.0 / 6.0);
        let two = lit::<T>(2.0);
        for k in 0..n {
            let t0 = hs * lit(k as f64);
            for pair in y.iter_mut() {
                let rhs = |t: T, v: (T, T)| ode_rhs_unchecked(params, spec, t, v);
                let add = |v: (T, T), d: (T, T), s: T| (v.0 + d.0 * s, v.1 + d.1 * s);
                let k1 = rhs(t0, *pair);
                let k2 = rhs(t0 + hs * half, add(*pair, k1, hs * half));
                let k3 = rhs(t0 + hs * half, add(*pair, k2, hs * half));
                let k4 = rhs(t0 + hs, add(*pair, k3, hs));
                pair.0 = pair.0 + hs * sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0);
                pair.1 = pair.1 + hs * sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1);
                if !(pair.0.is_finite() && pair.1.is_finite()) {
                    return Err(Error::Diverged { last_valid: k });
                }
            }
            out.push(y);
        }
        Ok(out)
    };

    let fwd = march(T::one())?;
    let bwd = march(-T::one())?;
    let mut grid = Vec::with_capacity(2 * n + 1);
    let mut pairs = Vec::with_capacity(2 * n + 1);
    for k in (1..=n).rev() {
        grid.push(-step * lit(k as f64));
        pairs.push(bwd[k]);
    }
    for (k, p) in fwd.into_iter().enumerate() {
        grid.push(step * lit(k as f64));
        pairs.push(p);
    }
    log::debug!("tabulated momenta on {} nodes, step {}", grid.len(), step);
    Ok(MomentaSolution {
        grid,
        pairs,
        params: *params,
        spec: *spec,
        delta,
        step,
    })
}

impl<T: Real> MomentaSolution<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lower(&self) -> T {
        self.grid[0]
    }

    pub fn upper(&self) -> T {
        self.grid[self.grid.len() - 1]
    }

    pub fn contains(&self, tau1: T) -> bool {
        tau1 >= self.lower() && tau1 <= self.upper()
    }

    /// Piecewise-linear interpolation of both pairs.
    pub fn interpolate(&self, tau1: T) -> Result<[(T, T); 2]> {
        if !tau1.is_finite() || !self.contains(tau1) {
            return Err(Error::Domain {
                quantity: "tau1",
                value: to_f64(tau1),
                domain: format!("[{}, {}]", to_f64(self.lower()), to_f64(self.upper())),
            });
        }
        let pos = (tau1 - self.lower()) / self.step;
        let last = self.grid.len() - 2;
        let k = pos.floor().to_usize().unwrap_or(0).min(last);
        let w = (tau1 - self.grid[k]) / self.step;
        let lerp = |a: T, b: T| a + (b - a) * w;
        let (p, q) = (self.pairs[k], self.pairs[k + 1]);
        Ok([
            (lerp(p[0].0, q[0].0), lerp(p[0].1, q[0].1)),
            (lerp(p[1].0, q[1].0), lerp(p[1].1, q[1].1)),
        ])
    }

    /// Smallest `|f₁g₂ − f₂g₁|` over the grid and where it occurs.
    pub fn min_independence(&self) -> (T, T) {
        let mut best = (T::infinity(), T::zero());
        for (t, p) in self.grid.iter().zip(&self.pairs) {
            let d = (p[0].0 * p[1].1 - p[1].0 * p[0].1).abs();
            if d < best.0 {
                best = (d, *t);
            }
        }
        best
    }

    /// How far a known coefficient pair lies from the span of the tabulated
    /// basis: expands the pair in the basis at `τ₁ = 0`, then returns the
    /// largest deviation of that constant combination over the grid.
    pub fn span_residual(&self, target: impl Fn(T) -> Result<(T, T)>) -> Result<T> {
        let (c1, c2) = target(T::zero())?;
        let mut worst = T::zero();
        for (t, p) in self.grid.iter().zip(&self.pairs) {
            let (f, g) = target(*t)?;
            let df = c1 * p[0].0 + c2 * p[1].0 - f;
            let dg = c1 * p[0].1 + c2 * p[1].1 - g;
            worst = worst.max(df.abs()).max(dg.abs());
        }
        Ok(worst)
    }

    /// One of the two tabulated pairs as a [`DifferentiablePair`], with the
    /// derivative taken by central differences on the grid.
    pub fn tabulated_pair(&self, index: usize) -> TabulatedPair<'_, T> {
        assert!(index < 2);
        TabulatedPair { solution: self, index }
    }
}

impl<T: Real> MomentumCoefficients<T> for MomentaSolution<T> {
    /// Interpolated values; derivatives taken from the system itself at the
    /// interpolated point, so that `(f, g)` and `(f′, g′)` are mutually
    /// consistent.
    fn coefficients(&self, tau1: T) -> Result<[PairValue<T>; 2]> {
        let pairs = self.interpolate(tau1)?;
        let a = qp_matrix_at(&self.params, &eval_profile_raw(&self.spec, tau1));
        let mk = |(f, g): (T, T)| {
            let (df, dg) = ode_rhs_with(&a, tau1, (f, g));
            PairValue { f, g, df, dg }
        };
        Ok([mk(pairs[0]), mk(pairs[1])])
    }

    fn domain(&self) -> (T, T) {
        (self.lower(), self.upper())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TabulatedPair<'a, T> {
    solution: &'a MomentaSolution<T>,
    index: usize,
}

impl<T: Real> DifferentiablePair<T> for TabulatedPair<'_, T> {
    fn value(&self, tau1: T) -> Result<PairValue<T>> {
        let sol = self.solution;
        let h = sol.step;
        let lo = (tau1 - h).max(sol.lower());
        let hi = (tau1 + h).min(sol.upper());
        let at = |t: T| sol.interpolate(t).map(|p| p[self.index]);
        let (c, m, p) = (at(tau1)?, at(lo)?, at(hi)?);
        Ok(PairValue {
            f: c.0,
            g: c.1,
            df: (p.0 - m.0) / (hi - lo),
            dg: (p.1 - m.1) / (hi - lo),
        })
    }
}

/// Closed-form coefficients for the Routh sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouthClosedForm<T> {
    pub params: BodyParams<T>,
    pub r: T,
    pub l: T,
}

impl<T: Real> RouthClosedForm<T> {
    pub fn new(params: BodyParams<T>, r: T, l: T) -> Result<Self> {
        params.validate()?;
        ProfileSpec::routh(r, l)?;
        Ok(Self { params, r, l })
    }

    /// Pair one is constant `(l, r)`; pair two is
    /// `((−I₁ − mlζ)/√P, −mrζ/√P)` with `ζ = −rγ₃ + l`.
    pub fn pairs(&self, gamma3: T) -> [PairValue<T>; 2] {
        let BodyParams { m, i1, i3, .. } = self.params;
        let (r, l) = (self.r, self.l);
        let zeta = -r * gamma3 + l;
        let p = i1 * i3 + m * (i1 * r * r * (T::one() - gamma3 * gamma3) + i3 * zeta * zeta);
        let two = lit::<T>(2.0);
        let dp = m * (-two * i1 * r * r * gamma3 - two * r * i3 * zeta);
        let sp = p.sqrt();
        let f = (-i1 - m * l * zeta) / sp;
        let g = -m * r * zeta / sp;
        let half_log = dp / (two * p);
        [
            PairValue {
                f: l,
                g: r,
                df: T::zero(),
                dg: T::zero(),
            },
            PairValue {
                f,
                g,
                df: m * l * r / sp - f * half_log,
                dg: m * r * r / sp - g * half_log,
            },
        ]
    }
}

impl<T: Real> MomentumCoefficients<T> for RouthClosedForm<T> {
    fn coefficients(&self, tau1: T) -> Result<[PairValue<T>; 2]> {
        Ok(self.pairs(tau1))
    }
}

pub fn routh_closed_form<T: Real>(params: &BodyParams<T>, r: T, l: T, gamma3: T) -> Result<[PairValue<T>; 2]> {
    if !(gamma3.abs() < T::one()) {
        return Err(Error::Domain {
            quantity: "gamma3",
            value: to_f64(gamma3),
            domain: "(-1, 1)".into(),
        });
    }
    Ok(RouthClosedForm::new(*params, r, l)?.pairs(gamma3))
}

/// `J_i = f_i(τ₁)·j₁ + g_i(τ₁)·j₂`.
pub fn eval_gauge_momenta<T: Real, C: MomentumCoefficients<T> + ?Sized>(coeffs: &C, state: &StateGM<T>) -> Result<(T, T)> {
    let c = coeffs.coefficients(state.gamma.z)?;
    let (j1, j2) = momentum_components(state);
    Ok((c[0].f * j1 + c[0].g * j2, c[1].f * j1 + c[1].g * j2))
}

/// `‖(f′, g′) − rhs(f, g)‖∞` for a candidate pair.
pub fn ode_residual<T: Real>(
    params: &BodyParams<T>,
    spec: &ProfileSpec<T>,
    pair: &dyn DifferentiablePair<T>,
    tau1: T,
) -> Result<T> {
    let v = pair.value(tau1)?;
    let (rf, rg) = momenta_ode_rhs(params, spec, tau1, (v.f, v.g))?;
    Ok((v.df - rf).abs().max((v.dg - rg).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallalg::Vec3;
    use proptest::prelude::*;

    fn body() -> BodyParams<f64> {
        BodyParams::new(1.0, 2.0, 3.0, 9.8).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let spec = ProfileSpec::routh(1.0, 0.0).unwrap();
        let (f, g) = momenta_ode_rhs(&body(), &spec, 0.0, (1.0, 0.0)).unwrap();
        assert!(f.abs() < 1e-15 && (g + 0.5).abs() < 1e-15);
        let spec = ProfileSpec::routh(1.0, 0.1).unwrap();
        for t in [-0.9, 0.0, 0.4] {
            let (f, g) = momenta_ode_rhs(&body(), &spec, t, (0.1, 1.0)).unwrap();
            assert!(f.abs() < 1e-15 && g.abs() < 1e-15);
            assert_eq!(momenta_ode_rhs(&body(), &spec, t, (0.0, 0.0)).unwrap(), (0.0, 0.0));
        }
        assert!(momenta_ode_rhs(&body(), &spec, 1.0, (1.0, 0.0)).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let p = routh_closed_form(&body(), 1.0, 0.0, 0.0).unwrap();
        assert!((p[1].f + 2.0 / 8f64.sqrt()).abs() < 1e-15 && p[1].g == 0.0);
        let p = routh_closed_form(&body(), 1.0, 0.1, 0.0).unwrap();
        assert!((p[1].f + 2.01 / 8.03f64.sqrt()).abs() < 1e-15);
        assert!((p[1].g + 0.1 / 8.03f64.sqrt()).abs() < 1e-15);
        assert!((p[1].f + 0.7093).abs() < 1e-4 && (p[1].g + 0.0353).abs() < 1e-4);
        assert_eq!((p[0].f, p[0].g), (0.1, 1.0));
        assert!(routh_closed_form(&body(), 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn closed_form_momenta_values() {
        let cf = RouthClosedForm::new(body(), 1.0, 0.1).unwrap();
        let st = StateGM::new(Vec3::e3(), Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let (j1, _) = eval_gauge_momenta(&cf, &st).unwrap();
        assert!((j1 - 2.7).abs() < 1e-14);

        let cf = RouthClosedForm::new(body(), 1.0, 0.0).unwrap();
        let st = StateGM::new(Vec3::e3(), Vec3::new(0.0, 0.0, 2.0)).unwrap();
        let (_, j2) = eval_gauge_momenta(&cf, &st).unwrap();
        let solid = crate::phase::Solid::new(body(), ProfileSpec::routh(1.0, 0.0).unwrap()).unwrap();
        let om = solid.omega(&st).unwrap();
        let p = solid.scalars(&st).unwrap().p_tau;
        assert!((j2 - p.sqrt() * om.z).abs() < 1e-9);

        let zero = StateGM::new(Vec3::e3(), Vec3::zero()).unwrap();
        let (a, b) = eval_gauge_momenta(&cf, &zero).unwrap();
        assert!(a == 0.0 && b == 0.0);
    }

    #[test]
    fn closed_form_residuals() {
        let params = body();
        let spec = ProfileSpec::routh(1.0, 0.1).unwrap();
        let cf = RouthClosedForm::new(params, 1.0, 0.1).unwrap();
        for i in 0..1000 {
            let t = -0.999 + 1.998 * i as f64 / 999.0;
            for k in 0..2 {
                let pair = |x: f64| Ok(cf.pairs(x)[k]);
                let r = ode_residual(&params, &spec, &pair, t).unwrap();
                if k == 0 {
                    // rounding in [𝒬𝒫]ᵀ(l, r) only
                    assert!(r < 1e-15);
                }
                assert!(r < 1e-9, "pair {k} at {t}: {r}");
            }
        }
        let bad = |x: f64| Ok(PairValue { f: 1.0, g: x, df: 0.0, dg: 1.0 });
        assert!(ode_residual(&params, &spec, &bad, 0.3).unwrap() > 1e-3);
    }

    #[test]
    fn grid_shape_and_span() {
        let params = body();
        let spec = ProfileSpec::routh(1.0, 0.1).unwrap();
        let sol = solve_momenta(&params, &spec, 1e-3, 1e-4).unwrap();
        assert_eq!(sol.len(), 19981);
        assert!((sol.upper() - 0.999).abs() < 1e-12 && (sol.lower() + 0.999).abs() < 1e-12);
        assert!(sol.grid.windows(2).all(|w| w[1] > w[0]));
        let cf = RouthClosedForm::new(params, 1.0, 0.1).unwrap();
        for k in 0..2 {
            let res = sol.span_residual(|t| Ok((cf.pairs(t)[k].f, cf.pairs(t)[k].g))).unwrap();
            assert!(res < 1e-8, "pair {k}: {res}");
        }
        let (d, _) = sol.min_independence();
        assert!(d > 1e-8);
        assert!(sol.interpolate(0.9995).is_err());

        let tab = sol.tabulated_pair(1);
        assert!(ode_residual(&params, &spec, &tab, 0.37).unwrap() < 1e-6);
    }

    #[test]
    fn rejects_bad_solver_arguments() {
        let spec = ProfileSpec::routh(1.0, 0.1).unwrap();
        assert!(solve_momenta(&body(), &spec, 0.5, 1e-4).is_err());
        assert!(solve_momenta(&body(), &spec, 1e-3, 1e-2).is_err());
    }

    #[test]
    fn non_dividing_step_stays_within_request() {
        let spec = ProfileSpec::ellipsoid(2.0, 1.0).unwrap();
        let sol = solve_momenta(&body(), &spec, 0.05, 7e-4).unwrap();
        assert!(sol.step <= 7e-4 && (sol.upper() - 0.95).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kernel_pair_is_stationary(r in 0.1f64..3.0, f in -0.95f64..0.95, t in -0.999f64..0.999) {
            let l = f * r;
            let (a, b) = momenta_ode_rhs(&body(), &ProfileSpec::Routh { r, l }, t, (l, r)).unwrap();
            prop_assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        }
    }
}
