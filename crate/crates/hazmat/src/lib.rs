//! End-to-end safety chain for hazardous-materials road transport:
//!
//! - [`card`]: the 512-byte hazard card carried by RFID tags on the truck,
//!   with bit-exact encode/decode and a CRC-64 integrity tail.
//! - [`registry`]: offline folder-per-field code database resolving card
//!   codes into a human-readable intervention sheet.
//! - [`truck`]: the onboard unit as a pure state machine; crash and
//!   rollover detection, driver warnings, alert composition and retry.
//! - [`portal`]: roadside reader portals, relay chains toward aggregators,
//!   wire frames with CRC-32, store-and-forward queues and backup logs.
//! - [`dispatch`]: idempotent event store with tracking, alert and report
//!   queries, a replayable persistence log and a loopback TCP handler.
//! - [`sim`]: deterministic fixed-step simulation tying it all together,
//!   with fault injection and byte-stable logs.
//! - [`fixtures`]: shared demo card, registry and scenario.
//!
//! Start with the runnable examples (`cargo run --example end_to_end`) or
//! the `hazmat` CLI.

pub mod card;
pub mod crc;
pub mod dispatch;
pub mod fixtures;
pub mod portal;
pub mod registry;
pub mod sim;
pub mod truck;

pub use card::{decode_card, encode_card, CardBlob, CardError, HazmatCard};
pub use dispatch::EventStore;
pub use portal::{assign_topology, Frame, Portal, ReadEvent};
pub use registry::{load_registry, InterventionSheet, Registry};
pub use sim::{run, run_from_file, Scenario};
pub use truck::{AlertMessage, Effect, TruckUnit, UnitConfig};
