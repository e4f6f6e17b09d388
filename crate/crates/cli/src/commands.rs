//! The three subcommands: `simulate`, `check` and `momenta`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nonholo::brackets::{
    casimir_residuals, jacobiator, nonholonomic_jacobiator_closed_form, pushforward_residual, BracketKind, SmallJ, Tau,
};
use nonholo::dynamics::{drift_report, integrate, nonconservation_rates, TrajectorySample};
use nonholo::geomforms::{qp_matrix, qpl_values};
use nonholo::momenta::{
    ode_residual, routh_closed_form, solve_momenta, MomentaSolution, MomentumCoefficients, PairValue, RouthClosedForm,
};
use nonholo::particle::{integrate_particle, particle_jacobiator_reduced, FrameForm, ParticleSample};
use nonholo::phase::{invariants, BodyParams, Solid, StateGM};
use nonholo::profile::ProfileSpec;
use nonholo::sampling::{particle_states, solid_states};
use serde::Serialize;

use crate::config::{Initial, RunConfig, System};
use crate::error::CliError;
use crate::report::{CheckResult, Report};

/// Number of evenly spaced `τ₁` values for the closed-form residual check.
const CLOSED_FORM_POINTS: usize = 1000;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row(w: &mut impl Write, path: &Path, values: &[f64]) -> Result<(), CliError> {
    let line = values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",");
    writeln!(w, "{line}").map_err(|e| CliError::io(path, e))
}

/// Coefficients used for `J₁, J₂`: closed form for the Routh sphere,
/// tabulated otherwise.
pub enum Coefficients {
    Closed(RouthClosedForm<f64>),
    Table(MomentaSolution<f64>),
}

impl Coefficients {
    pub fn for_config(cfg: &RunConfig) -> nonholo::Result<Option<Self>> {
        Ok(match cfg.system {
            System::Routh { body, r, l } => Some(Coefficients::Closed(RouthClosedForm::new(body, r, l)?)),
            System::Ellipsoid { body, b, c } => Some(Coefficients::Table(solve_momenta(
                &body,
                &ProfileSpec::Ellipsoid { b, c },
                cfg.momenta.delta,
                cfg.momenta.h,
            )?)),
            System::Particle => None,
        })
    }

    pub fn as_dyn(&self) -> &dyn MomentumCoefficients<f64> {
        match self {
            Coefficients::Closed(c) => c,
            Coefficients::Table(t) => t,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub system: String,
    pub steps: usize,
    pub dE: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dJ: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dJ1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dJ2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_relation: Option<f64>,
}

fn solid_run(cfg: &RunConfig, body: BodyParams<f64>, spec: ProfileSpec<f64>, st: &StateGM<f64>) -> nonholo::Result<Vec<TrajectorySample<f64>>> {
    let coeffs = Coefficients::for_config(cfg)?.expect("solid system");
    integrate(&Solid::new(body, spec)?, st, &cfg.integrator.to_config(), coeffs.as_dyn())
}

fn particle_run(cfg: &RunConfig) -> nonholo::Result<Vec<ParticleSample<f64>>> {
    let Initial::Particle(p) = cfg.initial else {
        unreachable!("particle config carries a particle state")
    };
    integrate_particle(&p, &cfg.integrator.to_config())
}

/// Integrates the configured system, writes the trajectory as CSV and
/// returns the drift summary.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateSummary, CliError> {
    let system = cfg.system.kind().name().to_string();
    match (cfg.system.solid(), cfg.initial) {
        (Some((body, spec)), Initial::Solid(st)) => {
            let traj = solid_run(cfg, body, spec, &st)?;
            let mut w = create(out)?;
            writeln!(w, "t,g1,g2,g3,M1,M2,M3,tau1,tau2,tau3,tau4,tau5,E,J1,J2,j1,j2").map_err(|e| CliError::io(out, e))?;
            for s in &traj {
                let (g, m, tau) = (s.state.gamma, s.state.momentum, s.inv.tau);
                let row = [
                    s.t, g.x, g.y, g.z, m.x, m.y, m.z, tau[0], tau[1], tau[2], tau[3], tau[4], s.energy, s.big_j1, s.big_j2, s.j1,
                    s.j2,
                ];
                write_row(&mut w, out, &row)?;
            }
            w.flush().map_err(|e| CliError::io(out, e))?;
            let d = drift_report(&traj);
            Ok(SimulateSummary {
                system,
                steps: traj.len() - 1,
                dE: d.d_energy,
                dJ: None,
                dJ1: Some(d.d_j1),
                dJ2: Some(d.d_j2),
                d_relation: Some(d.d_relation),
            })
        }
        (None, Initial::Particle(_)) => {
            let traj = particle_run(cfg)?;
            let mut w = create(out)?;
            writeln!(w, "t,x,y,z,px,py,J,E").map_err(|e| CliError::io(out, e))?;
            for s in &traj {
                let p = s.state;
                write_row(&mut w, out, &[s.t, p.x, p.y, p.z, p.px, p.py, s.momentum, s.energy])?;
            }
            w.flush().map_err(|e| CliError::io(out, e))?;
            let (j0, e0) = (traj[0].momentum, traj[0].energy);
            let fold = |f: &dyn Fn(&ParticleSample<f64>) -> f64| traj.iter().map(f).fold(0.0, f64::max);
            Ok(SimulateSummary {
                system,
                steps: traj.len() - 1,
                dE: fold(&|s| (s.energy - e0).abs()),
                dJ: Some(fold(&|s| (s.momentum - j0).abs())),
                dJ1: None,
                dJ2: None,
                d_relation: None,
            })
        }
        _ => unreachable!("parse_config pairs the initial state with the system"),
    }
}

fn max_over<S>(items: &[S], f: impl Fn(&S) -> nonholo::Result<f64>) -> nonholo::Result<f64> {
    items.iter().try_fold(0.0, |acc: f64, s| Ok(acc.max(f(s)?)))
}

fn solid_checks(cfg: &RunConfig, body: BodyParams<f64>, spec: ProfileSpec<f64>, st0: &StateGM<f64>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let solid = match Solid::new(body, spec) {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::evaluate("setup", "body and profile are admissible", 0.0, Err(e))],
    };
    let states = solid_states::<f64>(cfg.seed, cfg.samples);
    let coeffs = Coefficients::for_config(cfg).map(|c| c.expect("solid system"));

    let casimir = |pick: fn(&nonholo::brackets::CasimirResiduals<f64>) -> f64| {
        let c = coeffs.as_ref().map_err(Clone::clone)?;
        max_over(&states, |st| Ok(pick(&casimir_residuals(&solid, st, c.as_dyn(), BracketKind::Gauged)?)))
    };
    out.push(CheckResult::evaluate(
        "casimirs",
        "gauge momenta are Casimirs of the gauged reduced bracket",
        1e-8,
        casimir(|r| r.max_j1.max(r.max_j2)),
    ));
    out.push(CheckResult::evaluate(
        "involution",
        "the two gauge momenta are in involution",
        1e-8,
        casimir(|r| r.involution),
    ));
    out.push(CheckResult::evaluate(
        "gauged-jacobi",
        "gauged reduced bracket satisfies the Jacobi identity",
        1e-6,
        max_over(&states, |st| {
            let mut worst: f64 = 0.0;
            for a in 0..5 {
                for b in (a + 1)..5 {
                    for c in (b + 1)..5 {
                        let j = jacobiator(&solid, &Tau(a), &Tau(b), &Tau(c), st, BracketKind::Gauged)?;
                        worst = worst.max(j.abs());
                    }
                }
            }
            Ok(worst)
        }),
    ));
    out.push(CheckResult::evaluate(
        "non-poisson-value",
        "nonholonomic reduced bracket violates the Jacobi identity by the closed-form amount",
        1e-4,
        max_over(&states, |st| {
            let j = jacobiator(&solid, &Tau(0), &SmallJ(1), &Tau(3), st, BracketKind::Nonholonomic)?;
            let c = nonholonomic_jacobiator_closed_form(&solid, st)?;
            Ok((j - c).abs() / c.abs())
        }),
    ));
    out.push(CheckResult::evaluate(
        "qp-linear",
        "Q and P are linear in (tau3, tau4)",
        1e-9,
        max_over(&states, |st| {
            let pe = solid.profile_at(st)?;
            let v = qpl_values(&body, &pe, st)?;
            let t = invariants(st).tau;
            let m = qp_matrix(&body, &spec, t[0])?.mul_vec(&[t[2], t[3]]);
            let err = (v.q - m[0]).abs().max((v.p - m[1]).abs());
            Ok(err / v.q.abs().max(v.p.abs()).max(f64::MIN_POSITIVE))
        }),
    ));
    out.push(CheckResult::evaluate(
        "pushforward",
        "brackets of the invariants match the explicit reduced matrix",
        1e-8,
        max_over(&states, |st| pushforward_residual(&solid, st)),
    ));
    out.push(CheckResult::evaluate(
        "rate-law",
        "j1 and j2 change at the rates -Q tau2/A1 and -P tau2/A1",
        1e-5,
        max_over(&states, |st| {
            let pe = solid.profile_at(st)?;
            let r = nonconservation_rates(&body, &pe, st)?;
            let size = r.pred1.abs().max(r.pred2.abs()).max(1e-12);
            Ok((r.dj1 - r.pred1).abs().max((r.dj2 - r.pred2).abs()) / size)
        }),
    ));

    let traj = coeffs
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|c| integrate(&solid, st0, &cfg.integrator.to_config(), c.as_dyn()));
    let conservation_tol = if matches!(spec, ProfileSpec::Routh { .. }) { 1e-6 } else { 1e-5 };
    out.push(CheckResult::evaluate(
        "conservation",
        "energy and both gauge momenta are conserved",
        conservation_tol,
        traj.as_ref().map_err(Clone::clone).map(|t| {
            let d = drift_report(t);
            d.d_energy.max(d.d_j1).max(d.d_j2)
        }),
    ));
    out.push(CheckResult::evaluate(
        "invariant-relation",
        "tau2^2 + tau3^2 = (1 - tau1^2) tau5 along the motion",
        1e-8,
        traj.as_ref().map_err(Clone::clone).map(|t| drift_report(t).d_relation),
    ));

    match spec {
        ProfileSpec::Routh { r, l } => {
            out.push(CheckResult::evaluate(
                "qp-kernel",
                "(l, r) spans the kernel of the transposed coefficient matrix",
                1e-12,
                (0..=200).try_fold(0.0, |acc: f64, k| {
                    let g = -0.999 + 1.998 * k as f64 / 200.0;
                    let v = qp_matrix(&body, &spec, g)?.transpose().mul_vec(&[l, r]);
                    Ok(acc.max(v[0].abs()).max(v[1].abs()))
                }),
            ));
            out.push(CheckResult::evaluate(
                "closed-form-ode",
                "closed-form coefficient pairs solve the momentum equation",
                1e-9,
                (0..2).try_fold(0.0, |acc: f64, i| {
                    let pair = move |t: f64| -> nonholo::Result<PairValue<f64>> { Ok(routh_closed_form(&body, r, l, t)?[i]) };
                    (0..CLOSED_FORM_POINTS).try_fold(acc, |acc, k| {
                        let t = -0.999 + 1.998 * k as f64 / (CLOSED_FORM_POINTS - 1) as f64;
                        Ok(acc.max(ode_residual(&body, &spec, &pair, t)?))
                    })
                }),
            ));
            out.push(CheckResult::evaluate(
                "closed-form-span",
                "closed-form pairs lie in the span of the numerical solutions",
                1e-6,
                solve_momenta(&body, &spec, cfg.momenta.delta, cfg.momenta.h).and_then(|sol| span_residual(&sol, body, r, l)),
            ));
        }
        ProfileSpec::Ellipsoid { .. } if spec.is_chaplygin() => {
            out.push(CheckResult::evaluate(
                "p-identically-zero",
                "P vanishes for the ball-shaped body",
                1e-12,
                max_over(&states, |st| Ok(qpl_values(&body, &solid.profile_at(st)?, st)?.p.abs())),
            ));
            out.push(CheckResult::evaluate(
                "ball-j2-conservation",
                "<gamma, M> is conserved for the ball-shaped body",
                1e-8,
                traj.as_ref().map_err(Clone::clone).map(|t| {
                    let j0 = t[0].j2;
                    t.iter().map(|s| (s.j2 - j0).abs()).fold(0.0, f64::max)
                }),
            ));
        }
        ProfileSpec::Ellipsoid { .. } => {}
    }
    out
}

fn span_residual(sol: &MomentaSolution<f64>, body: BodyParams<f64>, r: f64, l: f64) -> nonholo::Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        worst = worst.max(sol.span_residual(|t| {
            let v = routh_closed_form(&body, r, l, t)?[i];
            Ok((v.f, v.g))
        })?);
    }
    Ok(worst)
}

fn particle_checks(cfg: &RunConfig) -> Vec<CheckResult> {
    let traj = particle_run(cfg);
    let drift = |f: fn(&ParticleSample<f64>) -> f64| {
        traj.as_ref().map_err(Clone::clone).map(|t| {
            let v0 = f(&t[0]);
            t.iter().map(|s| (f(s) - v0).abs()).fold(0.0, f64::max)
        })
    };
    let states = particle_states::<f64>(cfg.seed, cfg.samples);
    vec![
        CheckResult::evaluate(
            "energy-conservation",
            "the energy is conserved",
            1e-8,
            drift(|s| s.energy),
        ),
        CheckResult::evaluate(
            "momentum-conservation",
            "J = px/sqrt(1 + y^2) is conserved",
            1e-8,
            drift(|s| s.momentum),
        ),
        CheckResult::evaluate(
            "reduced-jacobi",
            "the reduced bracket on (y, px, py) satisfies the Jacobi identity",
            1e-7,
            max_over(&states, |s| particle_jacobiator_reduced(s, FrameForm::Full)),
        ),
    ]
}

/// Runs the verification battery at `samples` seeded states.
pub fn check(cfg: &RunConfig) -> Report {
    let checks = match (cfg.system.solid(), cfg.initial) {
        (Some((body, spec)), Initial::Solid(st)) => solid_checks(cfg, body, spec, &st),
        _ => particle_checks(cfg),
    };
    Report::new(cfg.system.kind().name(), cfg.seed, cfg.samples, checks)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentaSummary {
    pub system: String,
    pub rows: usize,
    pub step: f64,
    /// Smallest `|f₁g₂ − f₂g₁|` on the grid.
    pub min_independence: f64,
    pub min_independence_at: f64,
    /// Largest distance of the closed forms from the numerical span (Routh
    /// sphere only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_span_residual: Option<f64>,
}

/// Tabulates the momentum coefficients on the configured grid.
pub fn momenta(cfg: &RunConfig, out: &Path) -> Result<MomentaSummary, CliError> {
    let Some((body, spec)) = cfg.system.solid() else {
        return Err(CliError::Usage("momenta needs a solid system (routh or ellipsoid)".into()));
    };
    let sol = solve_momenta(&body, &spec, cfg.momenta.delta, cfg.momenta.h)?;
    let closed = match spec {
        ProfileSpec::Routh { r, l } => Some((r, l)),
        ProfileSpec::Ellipsoid { .. } => None,
    };
    let mut w = create(out)?;
    let header = if closed.is_some() {
        "tau1,f1,g1,f2,g2,f1_cf,g1_cf,f2_cf,g2_cf"
    } else {
        "tau1,f1,g1,f2,g2"
    };
    writeln!(w, "{header}").map_err(|e| CliError::io(out, e))?;
    for (t, p) in sol.grid.iter().zip(&sol.pairs) {
        let mut row = vec![*t, p[0].0, p[0].1, p[1].0, p[1].1];
        if let Some((r, l)) = closed {
            let c = routh_closed_form(&body, r, l, *t)?;
            row.extend([c[0].f, c[0].g, c[1].f, c[1].g]);
        }
        write_row(&mut w, out, &row)?;
    }
    w.flush().map_err(|e| CliError::io(out, e))?;
    let (det, at) = sol.min_independence();
    let max_span_residual = match closed {
        Some((r, l)) => Some(span_residual(&sol, body, r, l)?),
        None => None,
    };
    Ok(MomentaSummary {
        system: cfg.system.kind().name().to_string(),
        rows: sol.len(),
        step: sol.step,
        min_independence: det,
        min_independence_at: at,
        max_span_residual,
    })
}
