//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero when any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use pole_ladder::analysis::{bch_residuals, convergence_order, log_spaced_scales, one_step_sweep};
use pole_ladder::experiments::{exactness_sweep, random_trial, Command};
use pole_ladder::geometry;
use pole_ladder::manifolds::SYMMETRIC_FLEET;
use pole_ladder::{ConnectionSpace, SchemeKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

type Outcome = Result<String, String>;

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{detail}; {took:.1?}"))
    }
}

fn sweep_scales() -> Vec<f64> {
    log_spaced_scales(0.02, 0.2, 7)
}

fn exactness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for name in SYMMETRIC_FLEET {
        let space = space(name);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let trials: Vec<_> = (0..100).map(|_| random_trial(space.as_ref(), &mut rng)).collect();
        for s in exactness_sweep(space.as_ref(), &trials, 1e-10) {
            if s.evaluated < 90 {
                return Err(format!("{name} {}: only {} of 100 trials evaluated", s.scheme, s.evaluated));
            }
            if !s.failures.is_empty() {
                return Err(format!("{name} {}: {}", s.scheme, s.failures.join("; ")));
            }
            worst = worst.max(s.max_error);
        }
    }
    within(start, Duration::from_secs(30), format!("max relative error {worst:.2e}"))
}

fn third_order() -> Outcome {
    let start = Instant::now();
    let space = bump_sweep();
    let (m, du, dv) = reference_pair(space.as_ref(), SEED);
    let scales = sweep_scales();
    let rows = one_step_sweep(space.as_ref(), &m, &du, &dv, &scales, SchemeKind::PoleV2).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let fit = convergence_order(&scales, &errors).map_err(|e| e.to_string())?;
    let detail = format!("slope {:.4}, r² {:.7}", fit.fitted_slope, fit.r_squared);
    if !(3.7..=4.3).contains(&fit.fitted_slope) || fit.r_squared < 0.999 {
        return Err(detail);
    }
    within(start, Duration::from_secs(60), detail)
}

fn defects(kind: SchemeKind, scales: &[f64]) -> Result<Vec<f64>, String> {
    let space = bump_sweep();
    let (m, du, dv) = reference_pair(space.as_ref(), SEED);
    let rows = one_step_sweep(space.as_ref(), &m, &du, &dv, scales, kind).map_err(|e| e.to_string())?;
    rows.iter()
        .map(|r| r.predictor_defect.ok_or_else(|| "no prediction".to_string()))
        .collect()
}

fn predictor_match() -> Outcome {
    let start = Instant::now();
    let d = defects(SchemeKind::PoleV2, &[0.05, 0.025, 0.0125])?;
    let detail = format!("defects {:.4} {:.4} {:.4}", d[0], d[1], d[2]);
    if d[0] > 0.15 || !(d[1] < d[0] && d[2] < d[1]) {
        return Err(detail);
    }
    within(start, Duration::from_secs(60), detail)
}

fn alternative_variant() -> Outcome {
    let d = defects(SchemeKind::PoleAlt, &[0.05])?;
    let space = bump_sweep();
    let (m, du, dv) = reference_pair(space.as_ref(), SEED);
    let scales = sweep_scales();
    let rows = one_step_sweep(space.as_ref(), &m, &du, &dv, &scales, SchemeKind::PoleAvg).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let slope = convergence_order(&scales, &errors).map_err(|e| e.to_string())?.fitted_slope;
    let detail = format!("alt defect {:.4}, averaged slope {slope:.4}", d[0]);
    if d[0] > 0.15 || slope >= 4.5 {
        return Err(detail);
    }
    Ok(detail)
}

fn bch_slope(space: &dyn ConnectionSpace, order: usize) -> Result<f64, String> {
    let (lo, hi) = Command::BchCheck.default_scales();
    let scales = log_spaced_scales(lo, hi, 7);
    let (x, du, dv) = reference_pair(space, SEED);
    let res = bch_residuals(space, &x, &dv, &du, &scales, order).map_err(|e| e.to_string())?;
    Ok(convergence_order(&scales, &res).map_err(|e| e.to_string())?.fitted_slope)
}

fn bch_expansion() -> Outcome {
    let bump = bump_sweep();
    let mut parts = Vec::new();
    let mut ok = true;
    for order in [1, 3, 4] {
        let s = bch_slope(bump.as_ref(), order)?;
        ok &= s >= order as f64 + 0.8;
        parts.push(format!("bump2d order {order}: {s:.3}"));
    }
    let s = bch_slope(space("sphere-2").as_ref(), 3)?;
    ok &= s >= 4.8;
    parts.push(format!("sphere-2 order 3: {s:.3}"));
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn schild_baseline() -> Outcome {
    let space = bump_sweep();
    let (m, du, dv) = reference_pair(space.as_ref(), SEED);
    let scales = sweep_scales();
    let sweep = |kind| -> Result<Vec<f64>, String> {
        Ok(one_step_sweep(space.as_ref(), &m, &du, &dv, &scales, kind)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| r.error)
            .collect())
    };
    let schild = sweep(SchemeKind::Schild)?;
    let pole = sweep(SchemeKind::PoleV2)?;
    if let Some(i) = (0..scales.len()).find(|&i| schild[i] <= pole[i]) {
        return Err(format!("h={}: schild {:.3e} <= pole {:.3e}", scales[i], schild[i], pole[i]));
    }
    let ss = convergence_order(&scales, &schild).map_err(|e| e.to_string())?.fitted_slope;
    let ps = convergence_order(&scales, &pole).map_err(|e| e.to_string())?.fitted_slope;
    let detail = format!("schild slope {ss:.4}, pole slope {ps:.4}");
    if ss < ps {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest observed value of every invariant defect, with its limit.
struct Invariants {
    entries: Vec<(&'static str, f64, f64)>,
}

impl Invariants {
    fn record(&mut self, label: &'static str, value: f64, limit: f64) {
        match self.entries.iter_mut().find(|e| e.0 == label) {
            Some(e) => e.1 = e.1.max(value),
            None => self.entries.push((label, value, limit)),
        }
    }
}

fn structural_invariants() -> Outcome {
    let mut inv = Invariants { entries: Vec::new() };
    for name in FLEET {
        let space = space(name);
        let s = space.as_ref();
        let tol = *s.tolerances();
        let caps = s.capabilities();
        let mut rng = rng(SEED);
        for _ in 0..25 {
            let (p, q, u) = random_problem(s, &mut rng);
            let v = geometry::log(s, &p, &q).map_err(|e| format!("{name}: {e}"))?;
            let back = geometry::log(s, &p, &geometry::exp(s, &p, &v).unwrap()).unwrap();
            inv.record("round trip", dist(&back, &v) / v.component_norm().max(1.0), tol.log_tol);

            let m = geometry::midpoint(s, &p, &q).unwrap();
            inv.record("barycenter", geometry::barycenter_residual(s, &m, &p, &q).unwrap(), tol.log_tol);

            let twice = geometry::geodesic_symmetry(s, &m, &geometry::geodesic_symmetry(s, &m, &p).unwrap()).unwrap();
            inv.record("involution", twice.coord_distance(&p), tol.log_tol);

            if caps.locally_symmetric || name.starts_with("euclidean") {
                let sym = |c: &pole_ladder::Point, x: &pole_ladder::Point| geometry::geodesic_symmetry(s, c, x).unwrap();
                let x = geometry::exp(s, &m, &random_vector(s, &m, reach(s), &mut rng)).unwrap();
                let lhs = sym(&q, &sym(&p, &sym(&q, &x)));
                let rhs = sym(&sym(&q, &p), &x);
                inv.record("composition", lhs.coord_distance(&rhs), 1e-9);
            }

            let w = random_vector(s, &p, reach(s), &mut rng);
            let tu = geometry::transport_oracle(s, &u, &q).unwrap();
            let tw = geometry::transport_oracle(s, &w, &q).unwrap();
            let combo = geometry::transport_oracle(s, &u.scale(0.7).axpy(-1.3, &w), &q).unwrap();
            let scale = u.component_norm() + w.component_norm();
            inv.record("linearity", dist(&combo, &tu.scale(0.7).axpy(-1.3, &tw)) / scale, tol.log_tol);
            if caps.has_metric {
                let before = s.inner(&u, &w).unwrap();
                let after = s.inner(&tu, &tw).unwrap();
                inv.record("isometry", (before - after).abs() / (s.norm(&u) * s.norm(&w)), tol.log_tol);
            }

            if caps.has_curvature {
                let a = random_vector(s, &p, 1.0, &mut rng);
                let r = |x: &pole_ladder::TangentVector, y: &pole_ladder::TangentVector, z: &pole_ladder::TangentVector| {
                    geometry::curvature(s, &p, x, y, z).unwrap()
                };
                let size = r(&u, &w, &a).component_norm().max(1e-300);
                let skew = r(&u, &w, &a).add(&r(&w, &u, &a));
                let bianchi = r(&u, &w, &a).add(&r(&w, &a, &u)).add(&r(&a, &u, &w));
                let unit = u.component_norm() * w.component_norm() * a.component_norm();
                inv.record("skew symmetry", skew.component_norm() / size, 1e-12);
                inv.record("first Bianchi", bianchi.component_norm() / unit, 1e-9);
            }
        }
    }
    let detail = inv
        .entries
        .iter()
        .map(|(l, v, _)| format!("{l} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    if inv.entries.iter().all(|(_, v, lim)| v <= lim) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn v1_v2_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for name in FLEET {
        let space = space(name);
        let s = space.as_ref();
        let mut rng = rng(SEED);
        for _ in 0..100 {
            let (p, q, u) = random_problem(s, &mut rng);
            let a = SchemeKind::PoleV1.step(s, &p, &q, &u).map_err(|e| format!("{name}: {e}"))?;
            let b = SchemeKind::PoleV2.step(s, &p, &q, &u).map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(dist(&a, &b));
        }
    }
    let detail = format!("max difference {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("symmetric-space exactness", exactness),
        ("third-order one-step accuracy", third_order),
        ("leading-term predictor match", predictor_match),
        ("alternative variant predictor", alternative_variant),
        ("double exponential series", bch_expansion),
        ("Schild baseline", schild_baseline),
        ("structural invariants", structural_invariants),
        ("v1/v2 equivalence", v1_v2_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
