//! Outer-loop optimizer: schedules, projected steps, output-iterate selection.

mod optimizer;
mod schedule;

pub use optimizer::{project_box, select_iterate, wrap_phase, zosga_step, StepOutcome, StepRules, Trajectory, Zosga};
pub use schedule::{step_size, theorem1_bound, DecaySchedule, ScheduleParams, StepSizes, TheoremConstants};
