//! Probe response of a cross-cavity magnomechanical system.
//!
//! Two microwave cavities share a YIG sphere whose magnon mode couples to a
//! mechanical breathing mode. Under a strong drive the magnon–phonon coupling
//! opens transparency windows whose shape is controlled by the relative
//! amplitude ξ and phase φ of the two cavity probes.
//!
//! All frequencies, detunings and rates are angular (rad/s) inside the
//! library. [`config`] converts from ordinary frequencies on input.

pub mod config;
pub mod error;
pub mod oracle;
pub mod params;
pub mod response;
pub mod steady;
pub mod sweep;
pub mod transport;

pub use config::{load_config, LoadedConfig};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{DetuningMode, ProbeConfig, SystemParams};
pub use response::{probe_response, ResponseModel, ResponsePoint};
pub use steady::{solve_steady_state, SteadyState};
pub use sweep::{locate_extrema, run_sweep, Axis, AxisKind, Extremum, Observable, SweepResult, SweepSpec};
pub use transport::{group_delay, transmission, DelayMethod, TransportPoint};
