//! Rician channel ensemble and effective-channel composition.

pub mod correlation;
pub mod irs;
pub mod model;
pub mod network;

pub use correlation::{correlation_matrix, irs_correlation, path_loss, Correlation};
pub use irs::{AmplitudeMode, Block, IrsLayout, IrsState};
pub use model::{
    compose_channel, direct_channel, draw_statistical_csi, effective_channel, sample_realization,
    ChannelFn, ChannelModel, ChannelRealization, RealizationChannel, StatisticalCsi,
};
pub use network::{
    CorrelationCoeffs, IrsPanel, LinkDistances, NetworkConfig, PathLossExponents, RicianFactors,
};
