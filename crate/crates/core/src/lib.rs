//! Two-timescale sumrate optimization for IRS-aided MISO downlinks.
//!
//! The outer loop learns static IRS phases/amplitudes with a zeroth-order
//! stochastic gradient ascent that only probes the effective channel; the
//! inner loop designs AP precoders per channel realization with WMMSE.
//!
//! All numeric code is generic over [`Real`] (`f32`/`f64`); the `*64`
//! aliases below are the types the harness and CLI use.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod gradients;
pub mod harness;
pub mod linalg;
pub mod scalar;
pub mod zosga;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type C64 = Cx<f64>;
pub type C32 = Cx<f32>;

pub type IrsState64 = channel::IrsState<f64>;
pub type IrsState32 = channel::IrsState<f32>;
pub type ChannelModel64 = channel::ChannelModel<f64>;
pub type ChannelModel32 = channel::ChannelModel<f32>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
pub type Precoder64 = beamforming::PrecoderMatrix<f64>;
pub type Precoder32 = beamforming::PrecoderMatrix<f32>;
pub type Wmmse64 = beamforming::Wmmse<f64>;
pub type Wmmse32 = beamforming::Wmmse<f32>;
