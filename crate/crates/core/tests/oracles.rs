//! Independent oracles for kinematics and plausibility metrics.
//!
//! Every oracle here re-derives its quantity from scratch (homogeneous
//! matrix chains, naive per-frame loops) without touching the library's
//! computation paths, then the two are compared on seeded random data.

use morph_core::{
    aggregate_ifr, default_humanoid, derive_velocities, float_metric, forward_kinematics, mpjpe,
    penetrate, pfc, skate, ConditionTag, ContactParams, MotionSequence, Pose, Quat, Skeleton,
    Vec3,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

// ---------------------------------------------------------------------------
// Independent homogeneous-matrix-chain forward kinematics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Mat4([[f64; 4]; 4]);

impl Mat4 {
    fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat4(m)
    }

    /// Homogeneous transform from a (w,x,y,z) quaternion and translation,
    /// using the textbook quaternion-to-matrix formula.
    fn from_quat_trans(q: &Quat, t: Vec3) -> Self {
        let (w, x, y, z) = (q.w, q.i, q.j, q.k);
        Mat4([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
                t.x,
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
                t.y,
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
                t.z,
            ],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    fn mul(&self, other: &Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for (k, row) in other.0.iter().enumerate() {
                    acc += self.0[i][k] * row[j];
                }
                out[i][j] = acc;
            }
        }
        Mat4(out)
    }

    fn translation(&self) -> Vec3 {
        Vec3::new(self.0[0][3], self.0[1][3], self.0[2][3])
    }
}

fn oracle_fk(skeleton: &Skeleton, pose: &Pose) -> Vec<Vec3> {
    let mut chains: Vec<Mat4> = Vec::with_capacity(skeleton.len());
    for (i, joint) in skeleton.joints().iter().enumerate() {
        let local = match joint.parent {
            None => Mat4::from_quat_trans(&pose.joint_rot[0], pose.root_pos),
            Some(_) => Mat4::from_quat_trans(&pose.joint_rot[i], joint.offset),
        };
        let world = match joint.parent {
            None => Mat4::identity().mul(&local),
            Some(p) => chains[p].mul(&local),
        };
        chains.push(world);
    }
    chains.iter().map(Mat4::translation).collect()
}

// ---------------------------------------------------------------------------
// Random clip construction
// ---------------------------------------------------------------------------

fn random_quat(rng: &mut ChaCha8Rng, max_angle: f64) -> Quat {
    let axis = Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let angle = rng.gen_range(-max_angle..max_angle);
    if axis.norm() < 1e-9 {
        return Quat::identity();
    }
    Quat::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}

fn random_pose(skeleton: &Skeleton, rng: &mut ChaCha8Rng, near_ground: bool) -> Pose {
    let z = if near_ground {
        rng.gen_range(0.80..0.95)
    } else {
        rng.gen_range(0.5..1.5)
    };
    let root_pos = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), z);
    let joint_rot = (0..skeleton.len())
        .map(|_| random_quat(rng, 0.5))
        .collect();
    Pose { root_pos, joint_rot }
}

fn random_clip(skeleton: &Skeleton, rng: &mut ChaCha8Rng, frames: usize) -> MotionSequence {
    // Smooth-ish random walk so velocities stay bounded.
    let mut pose = random_pose(skeleton, rng, true);
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let mut next = pose.clone();
        next.root_pos += Vec3::new(
            rng.gen_range(-0.02..0.02),
            rng.gen_range(-0.02..0.02),
            rng.gen_range(-0.02..0.02),
        );
        for q in &mut next.joint_rot {
            *q = *q * random_quat(rng, 0.05);
        }
        out.push(next.clone());
        pose = next;
    }
    MotionSequence::new(
        30,
        out,
        ConditionTag {
            label: "stand".into(),
            seed: 0,
        },
        "humanoid13",
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// FK and MPJPE oracles
// ---------------------------------------------------------------------------

#[test]
fn fk_matches_matrix_chain_oracle_on_1000_random_poses() {
    let skel = default_humanoid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let pose = random_pose(&skel, &mut rng, false);
        let fast = forward_kinematics(&skel, &pose).unwrap();
        let slow = oracle_fk(&skel, &pose);
        for (a, b) in fast.positions.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-9, "fk mismatch: {a:?} vs {b:?}");
        }
    }
}

fn oracle_mpjpe(skeleton: &Skeleton, a: &MotionSequence, b: &MotionSequence) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for l in 0..a.len() {
        let pa = oracle_fk(skeleton, &a.frames[l]);
        let pb = oracle_fk(skeleton, &b.frames[l]);
        for j in 0..skeleton.len() {
            let d = pa[j] - pb[j];
            total += (d.x * d.x + d.y * d.y + d.z * d.z).sqrt();
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn mpjpe_matches_double_loop_oracle() {
    let skel = default_humanoid();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let a = random_clip(&skel, &mut rng, 6);
        let b = random_clip(&skel, &mut rng, 6);
        let fast = mpjpe(&skel, &a, &b).unwrap();
        let slow = oracle_mpjpe(&skel, &a, &b);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }
}

#[test]
fn mpjpe_metric_properties() {
    let skel = default_humanoid();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let a = random_clip(&skel, &mut rng, 4);
        let b = random_clip(&skel, &mut rng, 4);
        let c = random_clip(&skel, &mut rng, 4);
        let ab = mpjpe(&skel, &a, &b).unwrap();
        let ba = mpjpe(&skel, &b, &a).unwrap();
        let aa = mpjpe(&skel, &a, &a).unwrap();
        let ac = mpjpe(&skel, &a, &c).unwrap();
        let cb = mpjpe(&skel, &c, &b).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert_eq!(aa, 0.0);
        assert!(ab <= ac + cb + 1e-12, "triangle inequality violated");
    }
}

#[test]
fn velocities_reintegrate_positions() {
    let skel = default_humanoid();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let seq = random_clip(&skel, &mut rng, 20);
    let d = derive_velocities(&skel, &seq).unwrap();
    let dt = 1.0 / seq.fps as f64;
    for j in 0..skel.len() {
        let mut p = d.joint_pos[0][j];
        for l in 1..seq.len() {
            p += d.lin_vel[l][j] * dt;
            assert!(
                (p - d.joint_pos[l][j]).norm() < 1e-9,
                "reintegration drifted at frame {l}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Naive per-frame metric oracles (spec definitions, independent loops)
// ---------------------------------------------------------------------------

struct NaiveFrames {
    positions: Vec<Vec<Vec3>>,
    fps: f64,
}

fn naive_frames(skeleton: &Skeleton, seq: &MotionSequence) -> NaiveFrames {
    NaiveFrames {
        positions: seq.frames.iter().map(|f| oracle_fk(skeleton, f)).collect(),
        fps: seq.fps as f64,
    }
}

fn naive_lowest_bottom(skeleton: &Skeleton, frame: &[Vec3]) -> f64 {
    let mut low = f64::INFINITY;
    for (j, p) in skeleton.joints().iter().zip(frame) {
        let b = p.z - j.collision_radius;
        if b < low {
            low = b;
        }
    }
    low
}

fn naive_penetrate(skeleton: &Skeleton, f: &NaiveFrames) -> f64 {
    let mut acc = 0.0;
    for frame in &f.positions {
        let low = naive_lowest_bottom(skeleton, frame);
        if low < 0.0 {
            acc += -low;
        }
    }
    acc / f.positions.len() as f64 * 1000.0
}

fn naive_float(skeleton: &Skeleton, f: &NaiveFrames, contact_height_m: f64) -> f64 {
    let mut acc = 0.0;
    for frame in &f.positions {
        let low = naive_lowest_bottom(skeleton, frame);
        if low > contact_height_m {
            acc += low - contact_height_m;
        }
    }
    acc / f.positions.len() as f64 * 1000.0
}

fn naive_skate(skeleton: &Skeleton, f: &NaiveFrames, contact_height_m: f64) -> f64 {
    let mut acc = 0.0;
    let mut n = 0usize;
    for &foot in skeleton.foot_indices() {
        let r = skeleton.joints()[foot].collision_radius;
        for l in 1..f.positions.len() {
            let now = f.positions[l][foot];
            let prev = f.positions[l - 1][foot];
            if now.z - r <= contact_height_m && prev.z - r <= contact_height_m {
                let dx = now.x - prev.x;
                let dy = now.y - prev.y;
                acc += (dx * dx + dy * dy).sqrt() * 1000.0;
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        acc / n as f64
    }
}

fn naive_pfc(skeleton: &Skeleton, f: &NaiveFrames) -> f64 {
    let n = f.positions.len();
    let total_mass: f64 = skeleton.joints().iter().map(|j| j.mass).sum();
    let com: Vec<Vec3> = f
        .positions
        .iter()
        .map(|frame| {
            let mut c = Vec3::zeros();
            for (j, p) in skeleton.joints().iter().zip(frame) {
                c += p * j.mass;
            }
            c / total_mass
        })
        .collect();
    // Backward-difference foot velocities, frame 0 copying frame 1.
    let feet = skeleton.foot_indices();
    let mut foot_speed = vec![vec![0.0f64; feet.len()]; n];
    for l in 1..n {
        for (fi, &foot) in feet.iter().enumerate() {
            foot_speed[l][fi] = ((f.positions[l][foot] - f.positions[l - 1][foot]) * f.fps).norm();
        }
    }
    foot_speed[0] = foot_speed[1].clone();

    let mut scores = Vec::new();
    let mut max_acc = 0.0f64;
    for i in 1..n - 1 {
        let mut a = (com[i + 1] - com[i] * 2.0 + com[i - 1]) * f.fps * f.fps;
        if a.z < 0.0 {
            a.z = 0.0;
        }
        let norm = a.norm();
        if norm > max_acc {
            max_acc = norm;
        }
        let mut s = norm;
        for fi in 0..feet.len() {
            s *= foot_speed[i][fi];
        }
        scores.push(s);
    }
    if max_acc <= 0.0 || scores.is_empty() {
        return 0.0;
    }
    scores.iter().sum::<f64>() / scores.len() as f64 / max_acc
}

#[test]
fn metrics_match_naive_oracles_on_100_random_clips() {
    let skel = default_humanoid();
    let contact = ContactParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..100 {
        let seq = random_clip(&skel, &mut rng, 8);
        let frames = naive_frames(&skel, &seq);
        let p_fast = penetrate(&skel, &seq).unwrap();
        let p_slow = naive_penetrate(&skel, &frames);
        assert!((p_fast - p_slow).abs() < 1e-9, "clip {i}: penetrate {p_fast} vs {p_slow}");

        let f_fast = float_metric(&skel, &seq, &contact).unwrap();
        let f_slow = naive_float(&skel, &frames, contact.contact_height_m());
        assert!((f_fast - f_slow).abs() < 1e-9, "clip {i}: float {f_fast} vs {f_slow}");

        let s_fast = skate(&skel, &seq, &contact).unwrap();
        let s_slow = naive_skate(&skel, &frames, contact.contact_height_m());
        assert!((s_fast - s_slow).abs() < 1e-9, "clip {i}: skate {s_fast} vs {s_slow}");

        let c_fast = pfc(&skel, &seq).unwrap();
        let c_slow = naive_pfc(&skel, &frames);
        assert!((c_fast - c_slow).abs() < 1e-9, "clip {i}: pfc {c_fast} vs {c_slow}");
    }
}

#[test]
fn ifr_monotone_trend_reference() {
    // Acceptance set grows with tau, so IFR over a fixed error batch is
    // non-increasing; mirrors the direction of the published tau sweep.
    let errors: Vec<f64> = (0..40).map(|i| 0.03 * i as f64).collect();
    let taus: Vec<f64> = (1..=10).map(|t| t as f64 / 10.0).collect();
    let mut last = f64::INFINITY;
    for tau in taus {
        let rejected: Vec<bool> = errors.iter().map(|&e| e > tau).collect();
        let ifr = aggregate_ifr(&rejected).unwrap();
        assert!(ifr <= last + 1e-12);
        last = ifr;
    }
}
