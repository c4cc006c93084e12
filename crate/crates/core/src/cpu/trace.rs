use std::fmt;

use thiserror::Error;

use crate::asm::disassemble;
use crate::control::{ControlSignals, MemWidth};

use super::structural::{self, MemAccess, MemAccessKind};
use super::{MachineState, Status, TrapKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("machine is not running ({0})")]
    NotRunning(Status),
}

/// One executed cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub pc: u32,
    /// `None` when the fetch itself faulted.
    pub raw: Option<u32>,
    pub disasm: String,
    pub signals: Option<ControlSignals>,
    pub reg_write: Option<(u8, u32)>,
    pub mem: Option<MemAccess>,
    pub trap: Option<TrapKind>,
    /// Display latch value when the cycle drove the output.
    pub output: Option<u32>,
}

impl MachineState {
    /// Executes one structural step and reports what it did.
    pub fn trace_step(&mut self) -> Result<TraceRecord, TraceError> {
        if !self.status.is_running() {
            return Err(TraceError::NotRunning(self.status));
        }
        let pc = self.pc.get();
        let fx = structural::step(self);
        let output = fx
            .signals
            .filter(|s| s.output_enable)
            .map(|_| self.dmem.output_latch());
        Ok(TraceRecord {
            cycle: self.cycle_count,
            pc,
            raw: fx.raw,
            disasm: fx
                .raw
                .map(|w| disassemble(w, pc))
                .unwrap_or_else(|| "-".into()),
            signals: fx.signals,
            reg_write: fx.reg_write,
            mem: fx.mem,
            trap: fx.trap,
            output,
        })
    }
}

impl TraceRecord {
    /// Space-separated effect list for the last trace column.
    pub fn writes(&self) -> String {
        let mut parts = Vec::new();
        if let Some((rd, v)) = self.reg_write {
            parts.push(format!("x{rd}={v:#010x}"));
        }
        if let Some(m) = self.mem.filter(|m| m.kind == MemAccessKind::Write) {
            let (bits, v) = match m.width {
                MemWidth::Byte => (8, m.value & 0xFF),
                MemWidth::Half => (16, m.value & 0xFFFF),
                MemWidth::Word => (32, m.value),
            };
            parts.push(format!("mem{bits}[{:#010x}]={v:#x}", m.addr));
        }
        if let Some(v) = self.output {
            parts.push(format!("out={v}"));
        }
        if let Some(t) = self.trap {
            parts.push(format!("trap={t}"));
        }
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join(" ")
        }
    }
}

/// `cycle<TAB>pc<TAB>raw<TAB>disasm<TAB>writes`
impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let raw = self
            .raw
            .map(|w| format!("{w:08x}"))
            .unwrap_or_else(|| "-".into());
        write!(
            f,
            "{}\t{:08x}\t{}\t{}\t{}",
            self.cycle,
            self.pc,
            raw,
            self.disasm,
            self.writes()
        )
    }
}
