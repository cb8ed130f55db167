//! Two-stage channel estimation: UL pilot MMSE at the RAUs, then
//! beamforming training at the DL users and UL RAUs. Each stage exists in a
//! closed-form flavor (statistics feeding the rate expressions) and a
//! per-realization flavor (feeding the simulation oracle), plus the Gamma
//! moment-matching toolkit both rely on.

pub mod gamma;
pub mod interference;
pub mod pilot;
pub mod training;

pub use gamma::{gamma_project, gamma_sum, nakagami_mean, GammaPair};
pub use interference::{
    f_hat_realize, interference_mmse, interference_off, InterferenceEstStats,
};
pub use pilot::{pilot_mmse_realize, pilot_mmse_stats, EtaFormula, PilotEstStats, PilotEstimate};
pub use training::{
    bf_training_all, bf_training_stats, build_precoders, dim_loss, mu_hat_realize,
    BfTrainingStats, MuRealization,
};
