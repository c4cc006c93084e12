//! Machine state and the two step engines.
//!
//! [`MachineState::step_structural`] wires the datapath components together
//! under the control unit's signals. [`MachineState::step_functional`]
//! interprets instructions directly and shares nothing with it but the
//! instruction decoder. Their agreement is checked by the differential
//! tests and by [`run_lockstep`].

mod functional;
mod structural;
mod trace;

use std::fmt;

use thiserror::Error;

use crate::datapath::{
    DataMemory, InstructionMemory, LoadError, ProgramCounter, RegisterFile, DEFAULT_DISPLAY_ADDR,
    DEFAULT_DMEM_BYTES, DEFAULT_IMEM_BYTES,
};
use crate::image::MemImage;

pub use structural::{MemAccess, MemAccessKind, StepEffects};
pub use trace::{TraceError, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrapKind {
    Ecall,
    Ebreak,
    IllegalInstruction,
    MisalignedAccess,
    MisalignedTarget,
    AccessOutOfRange,
    FetchOutOfRange,
}

impl TrapKind {
    /// ECALL and EBREAK stop the machine cleanly; everything else is a fault.
    pub fn is_halt(self) -> bool {
        matches!(self, TrapKind::Ecall | TrapKind::Ebreak)
    }

    pub fn name(self) -> &'static str {
        match self {
            TrapKind::Ecall => "ECALL",
            TrapKind::Ebreak => "EBREAK",
            TrapKind::IllegalInstruction => "ILLEGAL_INSTRUCTION",
            TrapKind::MisalignedAccess => "MISALIGNED_ACCESS",
            TrapKind::MisalignedTarget => "MISALIGNED_TARGET",
            TrapKind::AccessOutOfRange => "ACCESS_OUT_OF_RANGE",
            TrapKind::FetchOutOfRange => "FETCH_OUT_OF_RANGE",
        }
    }
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Halted(TrapKind),
    Fault(TrapKind),
}

impl Status {
    pub fn from_trap(kind: TrapKind) -> Self {
        if kind.is_halt() {
            Status::Halted(kind)
        } else {
            Status::Fault(kind)
        }
    }

    pub fn is_running(self) -> bool {
        self == Status::Running
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Running => f.write_str("RUNNING"),
            Status::Halted(k) => write!(f, "HALTED({k})"),
            Status::Fault(k) => write!(f, "FAULT({k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Structural,
    Functional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineConfig {
    pub imem_bytes: u32,
    pub dmem_bytes: u32,
    pub display_addr: u32,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            imem_bytes: DEFAULT_IMEM_BYTES,
            dmem_bytes: DEFAULT_DMEM_BYTES,
            display_addr: DEFAULT_DISPLAY_ADDR,
        }
    }
}

/// Complete architectural state of the core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub pc: ProgramCounter,
    pub rf: RegisterFile,
    pub imem: InstructionMemory,
    pub dmem: DataMemory,
    pub status: Status,
    pub cycle_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("cycle budget exhausted after {cycles} cycles")]
    CycleBudgetExhausted { cycles: u64 },
}

impl MachineState {
    /// Reset state: pc at the start of instruction memory, registers and
    /// data memory cleared (apart from an optional data image).
    pub fn new(imem: InstructionMemory, dmem: DataMemory) -> Self {
        MachineState {
            pc: ProgramCounter::new(imem.base()).expect("imem base is word-aligned"),
            rf: RegisterFile::new(),
            imem,
            dmem,
            status: Status::Running,
            cycle_count: 0,
        }
    }

    pub fn from_images(
        config: &MachineConfig,
        program: &MemImage,
        data: Option<&MemImage>,
    ) -> Result<Self, LoadError> {
        let imem = InstructionMemory::from_image(program, 0, config.imem_bytes)?;
        let dmem = match data {
            Some(img) => DataMemory::with_image(config.dmem_bytes, config.display_addr, img)?,
            None => DataMemory::new(config.dmem_bytes, config.display_addr)?,
        };
        Ok(Self::new(imem, dmem))
    }

    /// Convenience constructor with the default memory sizes.
    pub fn with_program(words: &[u32]) -> Result<Self, LoadError> {
        Self::from_images(&MachineConfig::default(), &MemImage::new(0, words.to_vec()), None)
    }

    pub fn step(&mut self, engine: Engine) {
        match engine {
            Engine::Structural => self.step_structural(),
            Engine::Functional => self.step_functional(),
        }
    }

    /// One cycle through the component datapath. No-op unless running.
    pub fn step_structural(&mut self) {
        if self.status.is_running() {
            structural::step(self);
        }
    }

    /// One cycle of the reference interpreter. No-op unless running.
    pub fn step_functional(&mut self) {
        if self.status.is_running() {
            functional::step(self);
        }
    }

    /// Steps until the machine stops or `max_cycles` steps have been taken.
    pub fn run(&mut self, engine: Engine, max_cycles: u64) -> Result<Status, RunError> {
        for _ in 0..max_cycles {
            if !self.status.is_running() {
                break;
            }
            self.step(engine);
        }
        if self.status.is_running() {
            Err(RunError::CycleBudgetExhausted {
                cycles: self.cycle_count,
            })
        } else {
            Ok(self.status)
        }
    }

    pub fn reg(&self, index: u8) -> u32 {
        self.rf.get(index)
    }
}

/// First point where the two engines disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// Cycle (1-based) whose step produced different states.
    pub cycle: u64,
    pub pc: u32,
    pub detail: String,
    pub structural: Box<MachineState>,
    pub functional: Box<MachineState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LockstepOutcome {
    Agreed(Result<Status, RunError>),
    Diverged(Divergence),
}

/// Names the first field that differs between two states, if any.
pub fn first_difference(a: &MachineState, b: &MachineState) -> Option<String> {
    if a.pc != b.pc {
        return Some(format!("pc {:#010x} vs {:#010x}", a.pc.get(), b.pc.get()));
    }
    if a.status != b.status {
        return Some(format!("status {} vs {}", a.status, b.status));
    }
    for i in 0..32u8 {
        if a.reg(i) != b.reg(i) {
            return Some(format!("x{i} {:#010x} vs {:#010x}", a.reg(i), b.reg(i)));
        }
    }
    if a.dmem != b.dmem {
        if a.dmem.output_latch() != b.dmem.output_latch() {
            return Some(format!(
                "output latch {:#x} vs {:#x}",
                a.dmem.output_latch(),
                b.dmem.output_latch()
            ));
        }
        let at = a
            .dmem
            .bytes()
            .iter()
            .zip(b.dmem.bytes())
            .position(|(x, y)| x != y)
            .unwrap_or(0);
        return Some(format!("dmem byte {at:#x}"));
    }
    if a.imem != b.imem {
        return Some("imem".into());
    }
    if a.cycle_count != b.cycle_count {
        return Some(format!("cycle_count {} vs {}", a.cycle_count, b.cycle_count));
    }
    None
}

/// Runs both engines side by side from the same state, comparing after
/// every step.
pub fn run_lockstep(initial: &MachineState, max_cycles: u64) -> LockstepOutcome {
    let mut s = initial.clone();
    let mut f = initial.clone();
    for _ in 0..max_cycles {
        if !s.status.is_running() {
            break;
        }
        let pc = s.pc.get();
        s.step_structural();
        f.step_functional();
        if let Some(detail) = first_difference(&s, &f) {
            return LockstepOutcome::Diverged(Divergence {
                cycle: s.cycle_count.max(f.cycle_count),
                pc,
                detail,
                structural: Box::new(s),
                functional: Box::new(f),
            });
        }
    }
    LockstepOutcome::Agreed(if s.status.is_running() {
        Err(RunError::CycleBudgetExhausted {
            cycles: s.cycle_count,
        })
    } else {
        Ok(s.status)
    })
}
