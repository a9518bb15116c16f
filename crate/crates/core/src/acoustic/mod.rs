//! Acoustic forward model, filters, and the delay-domain front-end.

mod delay;
mod filters;
mod operator;

pub use delay::{
    delay_transform, delay_transform_limited, one_hot_sos, DelayMode, DelayOutput,
    DEFAULT_MAX_CHANNEL_VOXELS,
};
pub use filters::{
    bandpass_filter, crop_leading_samples, eir_filter, frequency_response,
    out_of_band_energy_fraction, EirSpec,
};
pub use operator::{ForwardOperator, ReachMask, SOS_BOUNDS_MPS};

pub(crate) use operator::{check_grid, check_sinogram, distance, sample_linear, sample_position};
