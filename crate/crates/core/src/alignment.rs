//! Rigid alignment of seed motions onto novel object poses, plus the scaled
//! size-offset adjustment of motion endpoints.

use alloc::vec::Vec;

use crate::demonstration::{Aep, Arm, ArmBases, ArmState, Block};
use crate::geometry::{RigidPose, Rotation, Vec3};
use crate::perception::BoxDims;

/// Default size-offset scale.
pub const DEFAULT_LAMBDA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentDelta {
    /// `T = P_novel ∘ P_demo⁻¹`, world frame.
    pub transform: RigidPose,
    /// `(Δl, Δw, Δh)` in the object principal frame.
    pub size_offset: Vec3,
    pub lambda: f64,
}

impl AlignmentDelta {
    pub fn identity(lambda: f64) -> Self {
        Self {
            transform: RigidPose::IDENTITY,
            size_offset: Vec3::ZERO,
            lambda,
        }
    }

    /// True when applying the delta cannot change anything.
    pub fn is_identity(&self) -> bool {
        self.transform == RigidPose::IDENTITY && self.size_offset == Vec3::ZERO
    }
}

/// Delta mapping the seed object onto the novel one. Bitwise-equal poses
/// give an exact identity transform.
pub fn object_delta(p_demo: &RigidPose, p_novel: &RigidPose, b_demo: BoxDims, b_novel: BoxDims, lambda: f64) -> AlignmentDelta {
    let transform = if p_demo == p_novel {
        RigidPose::IDENTITY
    } else {
        p_novel.compose(&p_demo.inverse())
    };
    AlignmentDelta {
        transform,
        size_offset: Vec3::new(b_novel.l - b_demo.l, b_novel.w - b_demo.w, b_novel.h - b_demo.h),
        lambda,
    }
}

/// Carries a seed grasp pose (world frame) along with the object.
pub fn adapt_grasp(delta: &AlignmentDelta, p_grasp_demo: &RigidPose) -> RigidPose {
    delta.transform.compose(p_grasp_demo)
}

/// Shifts a world-frame state by `λ·(Δl, Δw, Δh)` expressed in `object_frame`.
pub fn offset_endpoint(state: &ArmState, delta: &AlignmentDelta, object_frame: &Rotation) -> ArmState {
    if delta.size_offset == Vec3::ZERO {
        return *state;
    }
    let shift = object_frame.rotate(delta.size_offset * delta.lambda);
    let mut out = *state;
    out.pose.translation += shift;
    out
}

/// Re-targets the AEPs of a variable block. States are mapped into the world
/// through the arm bases, transformed by the delta, offset in the novel
/// object's frame, and mapped back. Only the bound arm is adapted when the
/// block names one.
pub fn adapt_block(
    block: &Block,
    aeps: &[Aep],
    delta: &AlignmentDelta,
    object_frame: &Rotation,
    bases: &ArmBases,
) -> Vec<Aep> {
    if delta.is_identity() {
        return aeps.to_vec();
    }
    let adapt = |arm: Arm, s: &ArmState| -> ArmState {
        let world = ArmState::new(bases.to_world(arm, &s.pose), s.gripper);
        let moved = ArmState::new(adapt_grasp(delta, &world.pose), world.gripper);
        let shifted = offset_endpoint(&moved, delta, object_frame);
        ArmState::new(bases.to_base(arm, &shifted.pose), shifted.gripper)
    };
    aeps.iter()
        .map(|a| {
            if block.bound_arm.is_some_and(|b| b != a.arm) {
                return *a;
            }
            Aep {
                start_state: adapt(a.arm, &a.start_state),
                end_state: adapt(a.arm, &a.end_state),
                ..*a
            }
        })
        .collect()
}
