//! A component-level model of a single-cycle RV32I core.
//!
//! The crate is layered bottom-up: [`bits`] (adders, extension, field
//! slicing), [`isa`] (encode/decode), [`alu`], [`control`], [`datapath`],
//! and [`cpu`], which drives the datapath one cycle at a time and carries a
//! separate reference interpreter for differential checking. Around the core
//! sit the [`asm`] assembler, [`image`] memory-image I/O and the [`display`]
//! output stage.

pub mod alu;
pub mod asm;
pub mod bits;
pub mod control;
pub mod cpu;
pub mod datapath;
pub mod display;
pub mod image;
pub mod isa;

pub use cpu::{Engine, MachineConfig, MachineState, Status, TrapKind};
pub use image::MemImage;
pub use isa::{decode, encode, Instruction, Mnemonic};
