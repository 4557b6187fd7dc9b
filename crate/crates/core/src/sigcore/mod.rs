//! Path embedding and truncated signatures.

mod path;
mod signature;

pub use path::{
    interpolate_path, time_augment, total_variation, AugmentedPath, ChannelSeries,
    PiecewiseLinearPath,
};
pub use signature::{
    chen_concat, path_signature, segment_signature, sig_dim, signature, signature_with_budget,
    word_at, word_name, GradedSignature, DEFAULT_FEATURE_BUDGET,
};
