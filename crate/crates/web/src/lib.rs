//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string. The plain Rust functions
//! behind them return serializable structs so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rvsim_core::asm::assemble;
use rvsim_core::bits::BitVec;
use rvsim_core::display::{
    display_digits, double_dabble_steps, render_output, seven_seg_encode, DabblePhase,
};
use rvsim_core::MachineState;

/// Trace lines kept for the page; longer runs report only the tail count.
pub const TRACE_LIMIT: usize = 2_000;

#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct TraceLine {
    pub cycle: u64,
    pub pc: u32,
    pub raw: Option<u32>,
    pub disasm: String,
    pub writes: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub errors: Vec<Diagnostic>,
    pub status: String,
    pub cycles: u64,
    pub pc: u32,
    pub registers: Vec<u32>,
    pub latch: u32,
    pub display: String,
    pub trace: Vec<TraceLine>,
    pub trace_truncated: bool,
}

/// Assemble `src` at address 0 and run it on the structural engine.
pub fn run_program(src: &str, max_cycles: u64, digits: usize) -> RunReport {
    let mut report = RunReport {
        errors: Vec::new(),
        status: String::new(),
        cycles: 0,
        pc: 0,
        registers: vec![0; 32],
        latch: 0,
        display: render_output(0, digits),
        trace: Vec::new(),
        trace_truncated: false,
    };
    let image = match assemble(src, 0) {
        Ok(img) => img,
        Err(errs) => {
            report.errors = errs
                .0
                .into_iter()
                .map(|e| Diagnostic {
                    line: e.line,
                    column: e.column,
                    message: e.kind.to_string(),
                })
                .collect();
            report.status = "ASSEMBLY_ERROR".into();
            return report;
        }
    };
    let mut s = match MachineState::with_program(&image.words) {
        Ok(s) => s,
        Err(e) => {
            report.errors.push(Diagnostic {
                line: 0,
                column: 0,
                message: e.to_string(),
            });
            report.status = "LOAD_ERROR".into();
            return report;
        }
    };
    while s.status.is_running() && s.cycle_count < max_cycles {
        let rec = s.trace_step().expect("machine is running");
        if report.trace.len() < TRACE_LIMIT {
            report.trace.push(TraceLine {
                cycle: rec.cycle,
                pc: rec.pc,
                raw: rec.raw,
                disasm: rec.disasm.clone(),
                writes: rec.writes(),
            });
        } else {
            report.trace_truncated = true;
        }
    }
    report.status = s.status.to_string();
    report.cycles = s.cycle_count;
    report.pc = s.pc.get();
    report.registers = s.rf.as_array().to_vec();
    report.latch = s.dmem.output_latch();
    report.display = render_output(report.latch, digits);
    report
}

#[derive(Debug, Serialize)]
pub struct DabbleRow {
    pub iteration: u32,
    /// `"add3"` or `"shift"`.
    pub phase: &'static str,
    /// BCD nibbles, most significant first, e.g. `["0", "2", "4"]`.
    pub bcd: Vec<String>,
    /// Binary bits not yet shifted out.
    pub remaining: String,
}

#[derive(Debug, Serialize)]
pub struct DabbleReport {
    pub error: Option<String>,
    pub digits: Vec<u8>,
    pub rows: Vec<DabbleRow>,
}

/// Every add-3 and shift phase of converting `value` (as a `width`-bit
/// number) to BCD.
pub fn dabble_explorer(value: u32, width: u32) -> DabbleReport {
    let v = match BitVec::new(width, value) {
        Ok(v) => v,
        Err(e) => {
            return DabbleReport {
                error: Some(e.to_string()),
                digits: Vec::new(),
                rows: Vec::new(),
            }
        }
    };
    let (digits, steps) = double_dabble_steps(v);
    // enough nibbles for the largest value of this width
    let nibbles = (u64::MAX >> (64 - width)).min(u32::MAX as u64).to_string().len() as u32;
    let rows = steps
        .iter()
        .map(|s| DabbleRow {
            iteration: s.iteration,
            phase: match s.phase {
                DabblePhase::Add3 => "add3",
                DabblePhase::Shift => "shift",
            },
            bcd: (0..nibbles)
                .rev()
                .map(|k| format!("{:x}", (s.bcd >> (4 * k)) & 0xF))
                .collect(),
            remaining: format!("{:0w$b}", s.remaining, w = width as usize),
        })
        .collect();
    DabbleReport {
        error: None,
        digits: digits.digits,
        rows,
    }
}

#[derive(Debug, Serialize)]
pub struct SevenSegReport {
    pub digits: Vec<u8>,
    /// Segment bits per digit, a..g as bits 0..6.
    pub segments: Vec<u8>,
    pub lit: Vec<String>,
    pub text: String,
}

/// Seven-segment patterns for the low `digit_count` digits of `value`.
pub fn seven_seg(value: u32, digit_count: usize) -> SevenSegReport {
    let digits = display_digits(value, digit_count);
    let patterns: Vec<_> = digits
        .iter()
        .map(|&d| seven_seg_encode(d).expect("digits are 0..=9"))
        .collect();
    SevenSegReport {
        segments: patterns.iter().map(|p| p.segments).collect(),
        lit: patterns.iter().map(|p| p.lit()).collect(),
        text: render_output(value, digit_count),
        digits,
    }
}

fn json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

#[wasm_bindgen(js_name = runProgram)]
pub fn run_program_js(src: &str, max_cycles: u32, digits: u32) -> String {
    json(&run_program(src, max_cycles as u64, digits as usize))
}

#[wasm_bindgen(js_name = dabbleExplorer)]
pub fn dabble_explorer_js(value: u32, width: u32) -> String {
    json(&dabble_explorer(value, width))
}

#[wasm_bindgen(js_name = sevenSeg)]
pub fn seven_seg_js(value: u32, digits: u32) -> String {
    json(&seven_seg(value, digits as usize))
}
