//! Engineering qubit and qutrit dynamics with controlled noise.
//!
//! A target state is turned into a control schedule, the schedule into a
//! Hamiltonian, and the Hamiltonian is propagated with and without
//! stochastic perturbations of the control angles. Ensemble averages are
//! checked against closed-form dephasing and depolarizing channels.

pub mod channels;
pub mod ensemble;
pub mod error;
pub mod figures;
pub mod grid;
pub mod noise;
pub mod propagate;
pub mod qcore;
pub mod schedule;
pub mod stirap;
pub mod synth;
pub mod table;
pub mod validate;

pub use channels::{Channel, ChannelSnapshot, CriticalTime};
pub use ensemble::{run_ensemble, EnsembleConfig, EnsembleReport, SimulationMode};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use noise::{NoiseKind, NoiseModel, NoisePath};
pub use qcore::{DensityMatrix, Ket, Mat, C64};
pub use schedule::{Angle, Curve, Schedule};
pub use synth::{ControlSystem, ThreeLevel, TwoLevel};
