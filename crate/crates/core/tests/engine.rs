mod common;

use common::*;
use tilepic::engine::{charge_density, EngineOptions, MergeMode, SimState};
use tilepic::reference::{self, naive_step, NaiveState};
use tilepic::{SpeciesSpec, Vec3};

fn det(threads: usize) -> EngineOptions {
    EngineOptions { threads, mode: MergeMode::Deterministic }
}

fn compare_with_naive(s: &SimState, n: &NaiveState) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        worst = worst.max(max_abs_diff(&component(&s.emf.e, c), &n.e_component(c)));
        worst = worst.max(max_abs_diff(&component(&s.emf.b, c), &n.b_component(c)));
        worst = worst.max(max_abs_diff(&component(&s.current.j, c), &n.j_component(c)));
    }
    for (k, sp) in s.species.iter().enumerate() {
        let rho = charge_density(&sp.map.particles, sp.q, &s.cfg, s.emf.boundary).interior();
        worst = worst.max(max_abs_diff(&rho, &n.charge(k)));
    }
    worst
}

#[test]
fn one_step_matches_naive_oracle() {
    for seed in 0..8 {
        let mut s = random_state(seed, 16, 4, 300, det(1));
        let mut n = NaiveState::from_sim(&s).unwrap();
        s.step().unwrap();
        naive_step(&mut n).unwrap();
        let d = compare_with_naive(&s, &n);
        assert!(d <= 1e-13, "seed {seed}: {d}");
    }
}

#[test]
fn filtered_step_matches_naive_oracle() {
    let mut s = random_state(11, 16, 4, 300, det(1));
    s.cfg.filter_passes = 2;
    let mut n = NaiveState::from_sim(&s).unwrap();
    for _ in 0..3 {
        s.step().unwrap();
        naive_step(&mut n).unwrap();
    }
    let d = compare_with_naive(&s, &n);
    assert!(d <= 1e-12, "{d}");
}

#[test]
fn naive_steps_compose() {
    let s = random_state(3, 16, 4, 100, det(1));
    let mut a = NaiveState::from_sim(&s).unwrap();
    let mut b = a.clone();
    naive_step(&mut a).unwrap();
    naive_step(&mut a).unwrap();
    reference::naive_run(&mut b, 2).unwrap();
    assert_eq!(a.e, b.e);
    assert_eq!(a.b, b.b);
}

#[test]
fn deterministic_mode_is_thread_count_independent() {
    let run = |threads| {
        let mut s = random_state(5, 16, 4, 500, det(threads));
        for _ in 0..10 {
            s.step().unwrap();
        }
        s
    };
    let base = run(1);
    for threads in [2, 4, 8] {
        let s = run(threads);
        assert_eq!(s.emf, base.emf, "threads = {threads}");
        assert_eq!(s.current, base.current);
        for (a, b) in s.species.iter().zip(&base.species) {
            assert_eq!(a.map.tile_offset, b.map.tile_offset);
            assert_eq!(tile_multisets(&a.map), tile_multisets(&b.map));
            let bits = |m: &tilepic::tiling::TileMap| m.particles.iter().map(|p| p.bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.map), bits(&b.map));
        }
    }
}

#[test]
fn fast_mode_tracks_deterministic() {
    let mut a = random_state(7, 16, 4, 500, det(1));
    let mut b = random_state(7, 16, 4, 500, EngineOptions { threads: 4, mode: MergeMode::Fast });
    for _ in 0..5 {
        a.step().unwrap();
        b.step().unwrap();
    }
    for c in 0..3 {
        assert!(max_abs_diff(&component(&a.emf.b, c), &component(&b.emf.b, c)) < 1e-10);
    }
    assert_eq!(a.particle_count(), b.particle_count());
}

#[test]
fn particle_count_is_conserved() {
    let mut s = random_state(9, 16, 4, 400, det(2));
    let n0 = s.particle_count();
    for _ in 0..20 {
        s.step().unwrap();
        assert_eq!(s.particle_count(), n0);
        assert!(s.species.iter().all(|sp| sp.map.is_sorted()));
    }
}

#[test]
fn energy_matches_naive_sums() {
    let s = random_state(13, 16, 4, 200, det(1));
    let n = NaiveState::from_sim(&s).unwrap();
    let (ee, eb) = s.field_energy();
    let (ne, nb) = n.field_energy();
    assert!((ee - ne).abs() <= 1e-14 * ne.abs());
    assert!((eb - nb).abs() <= 1e-14 * nb.abs());
    let (k, nk) = (s.kinetic_energy(), n.kinetic_energy());
    assert!((k - nk).abs() <= 1e-13 * nk.abs(), "{k} {nk}");
}

#[test]
fn warm_plasma_has_no_self_force() {
    let mut cfg = common::small_config(32, 8);
    cfg.species = vec![SpeciesSpec::new("electrons", -1.0, (4, 4)).with_thermal(Vec3::new(0.3, 0.3, 0.3))];
    let mut s = SimState::new(cfg, det(1)).unwrap();
    let stats = |s: &SimState| {
        let ps = &s.species[0].map.particles;
        let n = ps.len() as f64;
        let mean = ps.iter().fold(Vec3::ZERO, |a, p| a + p.u) * (1.0 / n);
        (mean, n)
    };
    let (m0, n) = stats(&s);
    let se = 0.3 / n.sqrt();
    for _ in 0..200 {
        s.step().unwrap();
    }
    let (m1, _) = stats(&s);
    for c in 0..3 {
        assert!((m1.get(c) - m0.get(c)).abs() <= 5.0 * se, "component {c}: {} vs {}", m1.get(c), m0.get(c));
    }
}

#[test]
fn gyro_orbit_through_the_engine() {
    use tilepic::fields::YeeGrid;
    use tilepic::tiling::{TileGeometry, TileMap};
    use tilepic::Particle;

    let mut cfg = common::small_config(32, 8);
    let mut spec = SpeciesSpec::new("probe", -1.0, (1, 1));
    // negligible self-field
    spec.density = 1e-12;
    cfg.species = vec![spec.clone()];
    cfg.dt = 0.01;
    let bz = 2.0;
    let mut emf = YeeGrid::new(32, 32, cfg.guard, cfg.dx, cfg.dy);
    emf.b.fill(Vec3::new(0.0, 0.0, bz));
    let u0 = 0.5;
    let p = Particle { ix: 16, iy: 16, x: 0.5, y: 0.5, u: Vec3::new(u0, 0.0, 0.0) };
    let map = TileMap::from_particles(TileGeometry::new(32, 32, 8, 8), vec![p]);
    let mut s = SimState::from_parts(cfg.clone(), Some(emf), vec![(spec, map)], det(1)).unwrap();
    let gamma = (1.0f64 + u0 * u0).sqrt();
    let period = 2.0 * std::f64::consts::PI * gamma / bz;
    let steps = (period / cfg.dt).round() as usize;
    for _ in 0..steps {
        s.step().unwrap();
    }
    let q = s.species[0].map.particles[0];
    // back near the start after one period, speed preserved
    let back = ((q.ix as f64 + q.x - 16.5).powi(2) + (q.iy as f64 + q.y - 16.5).powi(2)).sqrt() * cfg.dx;
    assert!(back < 0.02, "{back}");
    assert!((q.u.norm() - u0).abs() < 1e-9);
}

#[test]
fn continuity_holds_for_engine_steps() {
    let mut s = random_state(21, 16, 4, 1, det(1));
    s.species.truncate(1);
    for _ in 0..50 {
        let sp = &s.species[0];
        let before = reference::charge_density(&sp.map.particles, sp.q, &reference::Mesh::of(&s.cfg));
        s.step().unwrap();
        let sp = &s.species[0];
        let after = reference::charge_density(&sp.map.particles, sp.q, &reference::Mesh::of(&s.cfg));
        let j: Vec<[f64; 3]> = s.current.j.interior().into_iter().map(|v| [v.x, v.y, v.z]).collect();
        let r = reference::continuity_residual(&j, &before, &after, s.cfg.dt, &reference::Mesh::of(&s.cfg));
        assert!(r <= 1e-12, "{r}");
    }
}
