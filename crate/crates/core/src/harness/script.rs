//! Scripted bimanual trajectories with known block structure.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::demonstration::{
    classify_displacements, Arm, ArmBases, ArmState, BimanualSample, BlockCategory, DemoError, Demonstration, Gripper,
    SeedObject, SegmentationParams,
};
use crate::geometry::{RigidPose, Vec3};

/// Builder for piecewise-linear demonstrations sampled at a fixed rate.
/// Poses are world-frame until [`DemoScript::into_demonstration`].
#[derive(Debug, Clone)]
pub struct DemoScript {
    dt: f64,
    speed: f64,
    angular_speed: f64,
    samples: Vec<BimanualSample>,
}

/// Expected segmentation of a script, derived from its exact structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedTrajectory {
    pub samples: Vec<BimanualSample>,
    /// Block start indices after the first block.
    pub boundaries: Vec<usize>,
    pub categories: Vec<BlockCategory>,
}

impl DemoScript {
    pub fn new(left: ArmState, right: ArmState, dt: f64) -> Self {
        Self {
            dt,
            speed: 0.15,
            angular_speed: 0.8,
            samples: alloc::vec![BimanualSample { t: 0.0, left, right }],
        }
    }

    pub fn with_speeds(mut self, speed: f64, angular_speed: f64) -> Self {
        self.speed = speed;
        self.angular_speed = angular_speed;
        self
    }

    pub fn current(&self) -> &BimanualSample {
        self.samples.last().expect("script always has a sample")
    }

    fn push(&mut self, left: ArmState, right: ArmState) {
        let t = self.current().t + self.dt;
        self.samples.push(BimanualSample { t, left, right });
    }

    /// Moves one or both arms in straight lines (slerped orientation) at the
    /// script speeds, both arms finishing together.
    pub fn move_to(&mut self, left: Option<RigidPose>, right: Option<RigidPose>) -> &mut Self {
        let start = *self.current();
        let steps_for = |from: &RigidPose, to: &RigidPose| {
            let lin = from.translation.distance(to.translation) / (self.speed * self.dt);
            let ang = from.rotation.angle_to(&to.rotation) / (self.angular_speed * self.dt);
            lin.max(ang).ceil() as usize
        };
        let mut n = 1usize;
        if let Some(p) = &left {
            n = n.max(steps_for(&start.left.pose, p));
        }
        if let Some(p) = &right {
            n = n.max(steps_for(&start.right.pose, p));
        }
        let interp = |from: &ArmState, to: Option<&RigidPose>, s: f64| match to {
            None => *from,
            Some(p) => ArmState::new(
                RigidPose::new(from.pose.rotation.slerp(&p.rotation, s), from.pose.translation.lerp(p.translation, s)),
                from.gripper,
            ),
        };
        for i in 1..=n {
            let s = i as f64 / n as f64;
            let l = interp(&start.left, left.as_ref(), s);
            let r = interp(&start.right, right.as_ref(), s);
            self.push(l, r);
        }
        self
    }

    pub fn move_arm(&mut self, arm: Arm, pose: RigidPose) -> &mut Self {
        match arm {
            Arm::Left => self.move_to(Some(pose), None),
            Arm::Right => self.move_to(None, Some(pose)),
        }
    }

    /// Translates an arm by `offset`, keeping its orientation.
    pub fn shift_arm(&mut self, arm: Arm, offset: Vec3) -> &mut Self {
        let mut p = self.current().arm(arm).pose;
        p.translation += offset;
        self.move_arm(arm, p)
    }

    /// Holds still for `seconds` (rounded to whole samples).
    pub fn pause(&mut self, seconds: f64) -> &mut Self {
        let n = (seconds / self.dt).round() as usize;
        let s = *self.current();
        for _ in 0..n {
            self.push(s.left, s.right);
        }
        self
    }

    /// Appends one sample with the arm's gripper switched to `state`.
    pub fn gripper(&mut self, arm: Arm, state: Gripper) -> &mut Self {
        let mut s = *self.current();
        s.arm_mut(arm).gripper = state;
        self.push(s.left, s.right);
        self
    }

    /// Expected blocks from the exact (noise-free) structure: runs of
    /// identical poses at least `pause_span` long and away from both ends
    /// split at their midpoint unless they contain gripper flips, which split
    /// at the flip; flips elsewhere split too. Categories compare the clean
    /// endpoint displacements against `δ`.
    pub fn finish(&self, params: &SegmentationParams) -> ScriptedTrajectory {
        let s = &self.samples;
        let n = s.len();
        let same = |i: usize| s[i].left.pose == s[i + 1].left.pose && s[i].right.pose == s[i + 1].right.pose;
        let flip = |i: usize| s[i].left.gripper != s[i - 1].left.gripper || s[i].right.gripper != s[i - 1].right.gripper;
        let mut bounds = Vec::new();
        let mut in_pause = alloc::vec![false; n];
        let mut i = 0;
        while i + 1 < n {
            if !same(i) {
                i += 1;
                continue;
            }
            let a = i;
            while i + 1 < n && same(i) {
                i += 1;
            }
            let b = i;
            if a == 0 || b == n - 1 || s[b].t - s[a].t < params.pause_span {
                continue;
            }
            let flips: Vec<usize> = ((a + 1)..=b).filter(|&k| flip(k)).collect();
            for k in (a + 1)..=b {
                in_pause[k] = true;
            }
            if flips.is_empty() {
                bounds.push((a + b) / 2);
            } else {
                bounds.extend(flips);
            }
        }
        for k in 1..n {
            if flip(k) && !in_pause[k] {
                bounds.push(k);
            }
        }
        bounds.sort_unstable();
        bounds.dedup();

        let mut categories = Vec::new();
        let mut start = 0;
        for end in bounds.iter().copied().chain(core::iter::once(n)) {
            let term = end.min(n - 1);
            let d = |arm: Arm| params.distance(s[start].arm(arm), s[term].arm(arm));
            categories.push(classify_displacements(d(Arm::Left), d(Arm::Right), params).category);
            start = end;
        }
        ScriptedTrajectory {
            samples: s.clone(),
            boundaries: bounds,
            categories,
        }
    }

    pub fn samples(&self) -> &[BimanualSample] {
        &self.samples
    }

    /// Converts the world-frame samples into a demonstration with
    /// arm-base-frame poses.
    pub fn into_demonstration(
        &self,
        task_id: impl Into<String>,
        seed_objects: BTreeMap<String, SeedObject>,
        bases: ArmBases,
    ) -> Result<Demonstration, DemoError> {
        let samples = self
            .samples
            .iter()
            .map(|s| BimanualSample {
                t: s.t,
                left: ArmState::new(bases.to_base(Arm::Left, &s.left.pose), s.left.gripper),
                right: ArmState::new(bases.to_base(Arm::Right, &s.right.pose), s.right.gripper),
            })
            .collect();
        Demonstration::new(task_id, samples, seed_objects, bases)
    }
}

/// Adds translation noise drawn uniformly from a ball of radius `amplitude`
/// to every pose.
pub fn add_position_noise<R: Rng>(samples: &mut [BimanualSample], amplitude: f64, rng: &mut R) {
    let draw = |rng: &mut R| loop {
        let v = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v * amplitude;
        }
    };
    for s in samples {
        s.left.pose.translation += draw(rng);
        s.right.pose.translation += draw(rng);
    }
}

/// Random script for the segmentation oracle: 2 to 5 motion segments
/// (left, right or both arms, 0.1 to 0.3 m each) separated by 1 to 2 s
/// pauses, with occasional gripper toggles inside pauses.
pub fn random_script<R: Rng>(rng: &mut R, dt: f64) -> DemoScript {
    let start = |y: f64| ArmState::new(RigidPose::from_translation(Vec3::new(0.0, y, 0.3)), Gripper::Open);
    let mut script = DemoScript::new(start(0.3), start(-0.3), dt);
    let segments = rng.random_range(2..=5);
    for k in 0..segments {
        if k > 0 {
            let p = rng.random_range(1.0..2.0);
            script.pause(0.5 * p);
            if rng.random_bool(0.3) {
                let arm = if rng.random_bool(0.5) { Arm::Left } else { Arm::Right };
                let g = match script.current().arm(arm).gripper {
                    Gripper::Open => Gripper::Closed,
                    Gripper::Closed => Gripper::Open,
                };
                script.gripper(arm, g);
            }
            script.pause(0.5 * p);
        }
        let offset = |rng: &mut R| {
            let dir = loop {
                let v = Vec3::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                if let Some(u) = v.normalized().filter(|_| v.norm() <= 1.0 && v.norm() > 0.1) {
                    break u;
                }
            };
            dir * rng.random_range(0.1..0.3)
        };
        let cur = *script.current();
        let shifted = |s: &ArmState, o: Vec3| {
            let mut p = s.pose;
            p.translation += o;
            p
        };
        match rng.random_range(0..3) {
            0 => {
                let o = offset(rng);
                script.move_to(Some(shifted(&cur.left, o)), None);
            }
            1 => {
                let o = offset(rng);
                script.move_to(None, Some(shifted(&cur.right, o)));
            }
            _ => {
                let (a, b) = (offset(rng), offset(rng));
                script.move_to(Some(shifted(&cur.left, a)), Some(shifted(&cur.right, b)));
            }
        }
    }
    script
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demonstration::segment_blocks;

    fn st(x: f64, y: f64) -> ArmState {
        ArmState::new(RigidPose::from_translation(Vec3::new(x, y, 0.3)), Gripper::Open)
    }

    fn identity_bases() -> ArmBases {
        ArmBases {
            left: RigidPose::IDENTITY,
            right: RigidPose::IDENTITY,
        }
    }

    #[test]
    fn left_pause_right() {
        let p = SegmentationParams::default();
        let mut s = DemoScript::new(st(0.0, 0.3), st(0.0, -0.3), 0.1);
        s.shift_arm(Arm::Left, Vec3::new(0.2, 0.0, 0.0)).pause(1.0).shift_arm(Arm::Right, Vec3::new(0.2, 0.0, 0.0));
        let expected = s.finish(&p);
        assert_eq!(expected.categories, [BlockCategory::SingleArmLeft, BlockCategory::SingleArmRight]);
        let demo = s.into_demonstration("t", BTreeMap::new(), identity_bases()).unwrap();
        let blocks = segment_blocks(&demo, &p).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].category, BlockCategory::SingleArmLeft);
        assert_eq!(blocks[1].category, BlockCategory::SingleArmRight);
        assert!((blocks[1].start as i64 - expected.boundaries[0] as i64).abs() <= 1);
    }

    #[test]
    fn dual_motion_single_block() {
        let p = SegmentationParams::default();
        let mut s = DemoScript::new(st(0.0, 0.3), st(0.0, -0.3), 0.1);
        s.move_to(
            Some(RigidPose::from_translation(Vec3::new(0.3, 0.3, 0.3))),
            Some(RigidPose::from_translation(Vec3::new(0.3, -0.3, 0.3))),
        );
        let demo = s.into_demonstration("t", BTreeMap::new(), identity_bases()).unwrap();
        let blocks = segment_blocks(&demo, &p).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].category, BlockCategory::DualArm);
    }
}
