//! Versioned system prompts, stored as text assets under `prompts/v1`.

use crate::agents::Role;

pub const PROMPT_VERSION: &str = "v1";

const WORKER: &str = include_str!("../../prompts/v1/worker.txt");
const TRIMMER: &str = include_str!("../../prompts/v1/trimmer.txt");
const KSP_REPORTER: &str = include_str!("../../prompts/v1/ksp_reporter.txt");
const TRIMMER_SELF_CHECK: &str = include_str!("../../prompts/v1/trimmer_self_check.txt");
const ROW_REDUCER: &str = include_str!("../../prompts/v1/row_reducer.txt");
const COL_REDUCER: &str = include_str!("../../prompts/v1/col_reducer.txt");
const COVER_SEEKER: &str = include_str!("../../prompts/v1/cover_seeker.txt");
const MATCHER: &str = include_str!("../../prompts/v1/matcher.txt");
const PAINTER: &str = include_str!("../../prompts/v1/painter.txt");
const NORMALIZER: &str = include_str!("../../prompts/v1/normalizer.txt");
const TAP_REPORTER: &str = include_str!("../../prompts/v1/tap_reporter.txt");

/// Single-agent baselines that solve a whole instance in one call.
pub const KSP_ZERO_SHOT: &str = include_str!("../../prompts/v1/ksp_zero_shot.txt");
pub const TAP_ZERO_SHOT: &str = include_str!("../../prompts/v1/tap_zero_shot.txt");

pub fn system_prompt(role: Role) -> Option<&'static str> {
    Some(match role {
        Role::Worker => WORKER,
        Role::Trimmer => TRIMMER,
        Role::KspReporter => KSP_REPORTER,
        Role::RowReducer => ROW_REDUCER,
        Role::ColReducer => COL_REDUCER,
        Role::Matcher => MATCHER,
        Role::Painter => PAINTER,
        Role::Normalizer => NORMALIZER,
        Role::TapReporter => TAP_REPORTER,
        Role::CoverSeeker => COVER_SEEKER,
    })
}

/// Follow-up prompt listing the role's typical mistakes, where one exists.
pub fn self_check_prompt(role: Role) -> Option<&'static str> {
    match role {
        Role::Trimmer => Some(TRIMMER_SELF_CHECK),
        _ => None,
    }
}
