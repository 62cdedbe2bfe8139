#![allow(dead_code)]

use pole_ladder::analysis::sample_generic_pair;
use pole_ladder::geometry;
use pole_ladder::manifolds::{self, SpaceOptions, DEFAULT_FIXED_STEP};
use pole_ladder::{ConnectionSpace, Point, TangentVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every registry family at a small dimension.
pub const FLEET: [&str; 6] = ["euclidean-3", "sphere-2", "hyperbolic-2", "spd-3", "so3", "bump2d"];

pub fn space(name: &str) -> Box<dyn ConnectionSpace> {
    manifolds::from_name(name).unwrap()
}

/// bump2d with the fixed-step integrator used by sweeps.
pub fn bump_sweep() -> Box<dyn ConnectionSpace> {
    manifolds::build(
        "bump2d",
        &SpaceOptions {
            fixed_step: Some(DEFAULT_FIXED_STEP),
            ..Default::default()
        },
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest tangent length used by random trials on `space`.
pub fn reach(space: &dyn ConnectionSpace) -> f64 {
    space.validity_radius().min(1.5) * 0.5
}

/// Random tangent vector at `p` with declared norm in `(0, r)`.
pub fn random_vector(space: &dyn ConnectionSpace, p: &Point, r: f64, rng: &mut ChaCha8Rng) -> TangentVector {
    let len = rng.random_range(0.05..1.0) * r;
    space.sample_unit_tangent(p, rng).scale(len)
}

/// A random transport problem `(p, q, u)` with `q = exp_p(v)`.
pub fn random_problem(space: &dyn ConnectionSpace, rng: &mut ChaCha8Rng) -> (Point, Point, TangentVector) {
    let r = reach(space);
    let p = space.sample_point(rng, r.min(1.0));
    let v = random_vector(space, &p, r, rng);
    let q = geometry::exp(space, &p, &v).unwrap();
    let u = random_vector(space, &p, r, rng);
    (p, q, u)
}

/// Seeded generic direction pair at the reference point.
pub fn reference_pair(space: &dyn ConnectionSpace, seed: u64) -> (Point, TangentVector, TangentVector) {
    let m = space.reference_point();
    let (a, b) = sample_generic_pair(space, &m, &mut rng(seed));
    (m, a, b)
}

pub fn dist(a: &TangentVector, b: &TangentVector) -> f64 {
    (&a.components - &b.components).norm()
}
