//! Advice exchange: suggestion collection, trust mechanisms, Boltzmann
//! selection and the advisor-tagged replay buffer.

mod buffer;
mod group;
mod select;
mod trust;

pub use buffer::AdvisorBuffer;
pub use group::{agent_stream, GroupSettings, Member, PeerGroup, SelectionRule, StepReport};
pub use select::{boltzmann_probabilities, peer_select, sample_index, TemperatureSchedule};
pub use trust::{combine_weights, omega, Mechanism, MechanismSet, RunningMinMax, TrustState};
