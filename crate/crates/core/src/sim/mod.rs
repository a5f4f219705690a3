//! Discrete-event engine, network elements and the dumbbell topology.

pub mod engine;
pub mod link;
pub mod loss;
pub mod packet;
pub mod queue;
pub mod time;
pub mod topology;

pub use engine::{Engine, EngineConfig, FlowSetup, RunStats};
pub use link::Link;
pub use loss::LossModel;
pub use packet::{FlowId, Packet, PacketKind};
pub use queue::{DropTailQueue, EnqueueOutcome};
pub use time::SimTime;
pub use topology::{Topology, TopologyConfig};
