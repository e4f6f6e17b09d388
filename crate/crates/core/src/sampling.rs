//! Reproducible random states for Monte-Carlo checks.
//!
//! Sample `k` of a run with seed `s` is drawn from its own ChaCha8 stream
//! `(s, k)`, so results do not depend on evaluation order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::particle::ParticleState;
use crate::phase::StateGM;
use crate::scalar::{lit, Real};
use crate::smallalg::Vec3;

/// Largest `|γ₃|` produced by [`random_solid_state`].
pub const MAX_ABS_GAMMA3: f64 = 0.95;
/// Half-width of the box for `M`.
pub const MOMENTUM_BOX: f64 = 3.0;
/// Half-width of the box for particle states.
pub const PARTICLE_BOX: f64 = 2.0;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `γ` uniform on the sphere restricted to `|γ₃| < 0.95`, `M` uniform in
/// `[−3, 3]³`.
pub fn random_solid_state<T: Real, R: Rng + ?Sized>(rng: &mut R) -> StateGM<T> {
    // uniform γ₃ gives the uniform measure on the sphere
    let z = loop {
        let z: f64 = rng.gen_range(-1.0..1.0);
        if z.abs() < MAX_ABS_GAMMA3 {
            break z;
        }
    };
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let q = (1.0 - z * z).sqrt();
    let mut m = [0.0; 3];
    for c in m.iter_mut() {
        *c = rng.gen_range(-MOMENTUM_BOX..MOMENTUM_BOX);
    }
    StateGM {
        gamma: Vec3::new(lit(q * phi.cos()), lit(q * phi.sin()), lit(z)),
        momentum: Vec3::new(lit(m[0]), lit(m[1]), lit(m[2])),
    }
}

pub fn random_particle_state<T: Real, R: Rng + ?Sized>(rng: &mut R) -> ParticleState<T> {
    let mut v = [T::zero(); 5];
    for c in v.iter_mut() {
        *c = lit(rng.gen_range(-PARTICLE_BOX..PARTICLE_BOX));
    }
    ParticleState::from_array(&v)
}

/// `count` solid states for `seed`.
pub fn solid_states<T: Real>(seed: u64, count: usize) -> Vec<StateGM<T>> {
    (0..count)
        .map(|k| random_solid_state(&mut sample_rng(seed, k as u64)))
        .collect()
}

/// `count` particle states for `seed`.
pub fn particle_states<T: Real>(seed: u64, count: usize) -> Vec<ParticleState<T>> {
    (0..count)
        .map(|k| random_particle_state(&mut sample_rng(seed, k as u64)))
        .collect()
}
