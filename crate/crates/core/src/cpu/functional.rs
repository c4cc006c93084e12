//! Reference interpreter. Works straight from instruction semantics on the
//! raw register array and byte store; only the decoder is shared with the
//! structural engine.

use crate::datapath::ProgramCounter;
use crate::isa::{decode, Mnemonic::*};

use super::{MachineState, Status, TrapKind};

pub(super) fn step(s: &mut MachineState) {
    s.cycle_count += 1;
    if let Err(trap) = execute(s) {
        s.status = Status::from_trap(trap);
    }
}

fn fetch(s: &MachineState, pc: u32) -> Result<u32, TrapKind> {
    let base = s.imem.base();
    if pc < base {
        return Err(TrapKind::FetchOutOfRange);
    }
    let index = ((pc - base) / 4) as usize;
    s.imem
        .words()
        .get(index)
        .copied()
        .ok_or(TrapKind::FetchOutOfRange)
}

fn load(s: &MachineState, addr: u32, size: u32, signed: bool) -> Result<u32, TrapKind> {
    if !addr.is_multiple_of(size) {
        return Err(TrapKind::MisalignedAccess);
    }
    let mem = s.dmem.bytes();
    let end = addr as u64 + size as u64;
    let raw = if end <= mem.len() as u64 {
        let mut v = 0u32;
        for k in (0..size).rev() {
            v = (v << 8) | mem[(addr + k) as usize] as u32;
        }
        v
    } else if addr == s.dmem.display_addr() && size == 4 {
        s.dmem.output_latch()
    } else {
        return Err(TrapKind::AccessOutOfRange);
    };
    Ok(match (size, signed) {
        (1, true) => raw as u8 as i8 as i32 as u32,
        (2, true) => raw as u16 as i16 as i32 as u32,
        _ => raw,
    })
}

fn store(s: &mut MachineState, addr: u32, size: u32, value: u32) -> Result<(), TrapKind> {
    if !addr.is_multiple_of(size) {
        return Err(TrapKind::MisalignedAccess);
    }
    let display = addr == s.dmem.display_addr() && size == 4;
    let end = addr as u64 + size as u64;
    let len = s.dmem.bytes().len() as u64;
    if end > len && !display {
        return Err(TrapKind::AccessOutOfRange);
    }
    if end <= len {
        let mem = s.dmem.bytes_mut();
        for k in 0..size {
            mem[(addr + k) as usize] = (value >> (8 * k)) as u8;
        }
    }
    if display {
        s.dmem.set_output_latch(value);
    }
    Ok(())
}

fn execute(s: &mut MachineState) -> Result<(), TrapKind> {
    let pc = s.pc.get();
    let raw = fetch(s, pc)?;
    let inst = decode(raw).map_err(|_| TrapKind::IllegalInstruction)?;

    let regs = *s.rf.as_array();
    let x = |r: u8| if r == 0 { 0 } else { regs[r as usize] };
    let a = x(inst.rs1);
    let b = x(inst.rs2);
    let imm = inst.imm as u32;
    let shamt = |v: u32| v & 31;

    let mut next = pc.wrapping_add(4);
    let mut result: Option<u32> = None;
    let branch = |cond: bool, next: &mut u32| {
        if cond {
            *next = pc.wrapping_add(imm);
        }
    };

    match inst.mnemonic {
        Add => result = Some(a.wrapping_add(b)),
        Sub => result = Some(a.wrapping_sub(b)),
        Sll => result = Some(a << shamt(b)),
        Slt => result = Some(((a as i32) < (b as i32)) as u32),
        Sltu => result = Some((a < b) as u32),
        Xor => result = Some(a ^ b),
        Srl => result = Some(a >> shamt(b)),
        Sra => result = Some(((a as i32) >> shamt(b)) as u32),
        Or => result = Some(a | b),
        And => result = Some(a & b),
        Addi => result = Some(a.wrapping_add(imm)),
        Slti => result = Some(((a as i32) < inst.imm) as u32),
        Sltiu => result = Some((a < imm) as u32),
        Xori => result = Some(a ^ imm),
        Ori => result = Some(a | imm),
        Andi => result = Some(a & imm),
        Slli => result = Some(a << shamt(imm)),
        Srli => result = Some(a >> shamt(imm)),
        Srai => result = Some(((a as i32) >> shamt(imm)) as u32),
        Lui => result = Some(imm),
        Auipc => result = Some(pc.wrapping_add(imm)),
        Beq => branch(a == b, &mut next),
        Bne => branch(a != b, &mut next),
        Blt => branch((a as i32) < (b as i32), &mut next),
        Bge => branch((a as i32) >= (b as i32), &mut next),
        Bltu => branch(a < b, &mut next),
        Bgeu => branch(a >= b, &mut next),
        Jal => {
            result = Some(pc.wrapping_add(4));
            next = pc.wrapping_add(imm);
        }
        Jalr => {
            result = Some(pc.wrapping_add(4));
            next = a.wrapping_add(imm) & !1;
        }
        Lb => result = Some(load(s, a.wrapping_add(imm), 1, true)?),
        Lh => result = Some(load(s, a.wrapping_add(imm), 2, true)?),
        Lw => result = Some(load(s, a.wrapping_add(imm), 4, false)?),
        Lbu => result = Some(load(s, a.wrapping_add(imm), 1, false)?),
        Lhu => result = Some(load(s, a.wrapping_add(imm), 2, false)?),
        Sb => store(s, a.wrapping_add(imm), 1, b)?,
        Sh => store(s, a.wrapping_add(imm), 2, b)?,
        Sw => store(s, a.wrapping_add(imm), 4, b)?,
        Fence => {}
        Ecall => return Err(TrapKind::Ecall),
        Ebreak => return Err(TrapKind::Ebreak),
    }

    // Only control transfers can produce a misaligned pc, and those never
    // touch memory, so checking here still leaves no side effects.
    let next = ProgramCounter::new(next).ok_or(TrapKind::MisalignedTarget)?;
    if let Some(v) = result {
        if inst.rd != 0 {
            s.rf.raw_mut()[inst.rd as usize] = v;
        }
    }
    s.pc = next;
    Ok(())
}
