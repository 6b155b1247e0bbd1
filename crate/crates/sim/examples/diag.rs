// temporary diagnostic
use morph_core::{default_humanoid, center_of_mass, DEFAULT_REST_ROOT_HEIGHT};
use morph_sim::*;
use morph_core::{Quat, Vec3};

fn rest_state(skeleton: &morph_core::Skeleton, height: f64) -> SimCharacterState {
    let n = skeleton.len();
    SimCharacterState {
        root_pos: Vec3::new(0.0, 0.0, height),
        root_rot: Quat::identity(),
        root_lin_vel: Vec3::zeros(),
        root_ang_vel: Vec3::zeros(),
        joint_rot: vec![Quat::identity(); n - 1],
        joint_ang_vel: vec![Vec3::zeros(); n - 1],
        last_torques: vec![Vec3::zeros(); n - 1],
    }
}

fn main() {
    let skel = default_humanoid();

    // --- resting with fixed targets
    let config = SimConfig::default();
    let targets = vec![Quat::identity(); skel.len() - 1];
    let mut state = rest_state(&skel, DEFAULT_REST_ROOT_HEIGHT);
    let mut max_pen_settle = 0.0f64;
    for i in 0..90 {
        state = step_toward(&skel, &state, &targets, &config).unwrap();
        let p = max_penetration(&skel, &state);
        if i % 15 == 0 { println!("settle t={:.2} pen={:.2}mm root_z={:.4}", i as f64/30.0, p*1000.0, state.root_pos.z); }
        max_pen_settle = max_pen_settle.max(p);
    }
    println!("settle max pen: {:.2} mm", max_pen_settle*1000.0);
    let mut max_pen = 0.0f64;
    for _ in 0..60 {
        state = step_toward(&skel, &state, &targets, &config).unwrap();
        max_pen = max_pen.max(max_penetration(&skel, &state));
    }
    println!("rest max pen over 2s: {:.2} mm  root z {:.4}", max_pen*1000.0, state.root_pos.z);

    // --- COM ballistic with spin
    for substeps in [4u32, 16] {
        let config = SimConfig { substeps, pd_kp: 1e-12, pd_kd: 1e-12, ..SimConfig::default() };
        let mut state = rest_state(&skel, 8.0);
        state.joint_ang_vel[0] = Vec3::new(0.0, 3.0, 0.0);
        state.joint_ang_vel[3] = Vec3::new(2.0, 0.0, 1.0);
        let action = Action::zeros(skel.len());
        let com = |s: &SimCharacterState| {
            let kin = body_kinematics(&skel, s);
            center_of_mass(&skel, &kin.positions)
        };
        let c0 = com(&state);
        let t = 0.3;
        for _ in 0..(t / config.dt).round() as usize {
            state = step(&skel, &state, &action, &config).unwrap();
        }
        let c1 = com(&state);
        let dt_sub = config.substep_dt();
        let expected_drop = 0.5 * 9.81 * (t*t + t*dt_sub);
        println!("substeps {}: com drift x={:+.5} y={:+.5} drop={:.5} vs {:.5}", substeps, c1.x-c0.x, c1.y-c0.y, c0.z-c1.z, expected_drop);
    }

    // --- energy after drop
    for substeps in [4u32, 16] {
        let config = SimConfig { substeps, pd_kp: 1e-12, pd_kd: 1e-12, ..SimConfig::default() };
        let mut state = rest_state(&skel, DEFAULT_REST_ROOT_HEIGHT + 0.2);
        let action = Action::zeros(skel.len());
        let total_steps = 75usize;
        let window = 15usize;
        let mut energies = vec![mechanical_energy(&skel, &state, &config)];
        for _ in 0..total_steps {
            state = step(&skel, &state, &action, &config).unwrap();
            energies.push(mechanical_energy(&skel, &state, &config));
        }
        let mut worst = f64::NEG_INFINITY; let mut at = 0;
        for i in 0..energies.len() - window {
            let rise = energies[i + window] - energies[i];
            if rise > worst { worst = rise; at = i; }
        }
        println!("substeps {}: worst window rise {:+.6} J at step {} (E0 {:.3} Eend {:.3})", substeps, worst, at, energies[0], energies[total_steps]);
    }
}
