//! Stateful datapath components: register file, program counter,
//! instruction memory and data memory with the display output latch.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::alu::AluResult;
use crate::bits::{sign_extend, zero_extend, BitVec};
use crate::control::{BranchKind, ControlSignals, MemWidth, PcSrc};
use crate::cpu::TrapKind;
use crate::image::MemImage;

pub const DEFAULT_IMEM_BYTES: u32 = 4096;
pub const DEFAULT_DMEM_BYTES: u32 = 4096;
pub const DEFAULT_DISPLAY_ADDR: u32 = 0x0000_0FFC;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("memory size {0} is not a power of two of at least 4 bytes")]
    BadSize(u32),
    #[error("image origin {0:#x} is not word-aligned")]
    UnalignedOrigin(u32),
    #[error("image of {words} words at {origin:#x} does not fit in {capacity} bytes")]
    TooLarge {
        origin: u32,
        words: usize,
        capacity: u32,
    },
    #[error("display address {0:#x} is not word-aligned")]
    UnalignedDisplay(u32),
}

fn check_size(bytes: u32) -> Result<(), LoadError> {
    if bytes < 4 || !bytes.is_power_of_two() {
        Err(LoadError::BadSize(bytes))
    } else {
        Ok(())
    }
}

/// 32 x 32-bit registers, two read ports and one write port. x0 reads as
/// zero and ignores writes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegisterFile {
    regs: [u32; 32],
}

impl RegisterFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read(&self, a1: u8, a2: u8) -> (u32, u32) {
        (self.get(a1), self.get(a2))
    }

    pub fn write(&mut self, a3: u8, wd: u32, we: bool) {
        if we && a3 != 0 {
            self.regs[(a3 & 31) as usize] = wd;
        }
    }

    pub fn get(&self, index: u8) -> u32 {
        match index & 31 {
            0 => 0,
            i => self.regs[i as usize],
        }
    }

    pub fn as_array(&self) -> &[u32; 32] {
        &self.regs
    }

    /// Raw write access for the reference interpreter, which applies the
    /// x0 rule itself.
    pub(crate) fn raw_mut(&mut self) -> &mut [u32; 32] {
        &mut self.regs
    }
}

/// Byte address of the current instruction. Always word-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ProgramCounter(u32);

impl ProgramCounter {
    pub fn new(pc: u32) -> Option<Self> {
        (pc & 3 == 0).then_some(ProgramCounter(pc))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Read-only instruction store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionMemory {
    base: u32,
    words: Arc<[u32]>,
}

impl InstructionMemory {
    /// Zero-filled memory of `size_bytes` starting at `base`, with `image`
    /// placed at its origin.
    pub fn from_image(image: &MemImage, base: u32, size_bytes: u32) -> Result<Self, LoadError> {
        check_size(size_bytes)?;
        if base & 3 != 0 {
            return Err(LoadError::UnalignedOrigin(base));
        }
        let mut words = vec![0u32; (size_bytes / 4) as usize];
        let too_large = LoadError::TooLarge {
            origin: image.origin,
            words: image.words.len(),
            capacity: size_bytes,
        };
        let start = image
            .origin
            .checked_sub(base)
            .ok_or_else(|| too_large.clone())?;
        if start & 3 != 0 {
            return Err(LoadError::UnalignedOrigin(image.origin));
        }
        let start = (start / 4) as usize;
        let end = start + image.words.len();
        if end > words.len() {
            return Err(too_large);
        }
        words[start..end].copy_from_slice(&image.words);
        Ok(InstructionMemory {
            base,
            words: words.into(),
        })
    }

    pub fn from_words(words: &[u32]) -> Result<Self, LoadError> {
        let size = ((words.len().max(1) * 4) as u32).next_power_of_two();
        Self::from_image(&MemImage::new(0, words.to_vec()), 0, size)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn size_bytes(&self) -> u32 {
        (self.words.len() * 4) as u32
    }

    pub fn fetch(&self, pc: u32) -> Result<u32, TrapKind> {
        let offset = pc.wrapping_sub(self.base);
        if pc < self.base || offset & 3 != 0 {
            return Err(TrapKind::FetchOutOfRange);
        }
        self.words
            .get((offset / 4) as usize)
            .copied()
            .ok_or(TrapKind::FetchOutOfRange)
    }

    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.base.hash(&mut h);
        self.words.hash(&mut h);
        h.finish()
    }
}

/// Result of one data-memory port cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemPortOutput {
    pub rd: u32,
    pub output_enable: bool,
}

/// Byte-addressed little-endian data memory with a single read/write port.
///
/// A word store to `display_addr` also updates the output latch. When the
/// display address lies outside the backing store, only word accesses to it
/// are accepted and a word load returns the latch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataMemory {
    bytes: Vec<u8>,
    display_addr: u32,
    output_latch: u32,
}

impl DataMemory {
    pub fn new(size_bytes: u32, display_addr: u32) -> Result<Self, LoadError> {
        check_size(size_bytes)?;
        if display_addr & 3 != 0 {
            return Err(LoadError::UnalignedDisplay(display_addr));
        }
        Ok(DataMemory {
            bytes: vec![0; size_bytes as usize],
            display_addr,
            output_latch: 0,
        })
    }

    pub fn with_image(
        size_bytes: u32,
        display_addr: u32,
        image: &MemImage,
    ) -> Result<Self, LoadError> {
        let mut dm = Self::new(size_bytes, display_addr)?;
        if image.origin & 3 != 0 {
            return Err(LoadError::UnalignedOrigin(image.origin));
        }
        let end = image.origin as u64 + image.words.len() as u64 * 4;
        if end > size_bytes as u64 {
            return Err(LoadError::TooLarge {
                origin: image.origin,
                words: image.words.len(),
                capacity: size_bytes,
            });
        }
        for (k, w) in image.words.iter().enumerate() {
            let at = image.origin as usize + 4 * k;
            dm.bytes[at..at + 4].copy_from_slice(&w.to_le_bytes());
        }
        Ok(dm)
    }

    pub fn size_bytes(&self) -> u32 {
        self.bytes.len() as u32
    }

    pub fn display_addr(&self) -> u32 {
        self.display_addr
    }

    pub fn output_latch(&self) -> u32 {
        self.output_latch
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub(crate) fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.bytes
    }

    pub(crate) fn set_output_latch(&mut self, v: u32) {
        self.output_latch = v;
    }

    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.bytes.hash(&mut h);
        self.output_latch.hash(&mut h);
        h.finish()
    }

    /// Little-endian word at a word-aligned in-range address.
    pub fn word_at(&self, addr: u32) -> Option<u32> {
        let a = addr as usize;
        let b = self.bytes.get(a..a + 4)?;
        Some(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// One port cycle. At most one of `read`/`write` may be set; with
    /// neither set the port is idle and returns zero.
    #[allow(clippy::too_many_arguments)]
    pub fn access(
        &mut self,
        addr: u32,
        wd: u32,
        width: MemWidth,
        unsigned: bool,
        read: bool,
        write: bool,
    ) -> Result<MemPortOutput, TrapKind> {
        assert!(!(read && write), "data memory has a single port");
        if !read && !write {
            return Ok(MemPortOutput::default());
        }
        let n = width.bytes();
        if !addr.is_multiple_of(n) {
            return Err(TrapKind::MisalignedAccess);
        }
        let in_store = (addr as u64 + n as u64) <= self.bytes.len() as u64;
        let is_display = addr == self.display_addr && width == MemWidth::Word;
        if !in_store && !is_display {
            return Err(TrapKind::AccessOutOfRange);
        }

        if write {
            if in_store {
                let a = addr as usize;
                let le = wd.to_le_bytes();
                self.bytes[a..a + n as usize].copy_from_slice(&le[..n as usize]);
            }
            if is_display {
                self.output_latch = wd;
            }
            return Ok(MemPortOutput {
                rd: 0,
                output_enable: is_display,
            });
        }

        let raw = if in_store {
            let a = addr as usize;
            let mut le = [0u8; 4];
            le[..n as usize].copy_from_slice(&self.bytes[a..a + n as usize]);
            u32::from_le_bytes(le)
        } else {
            self.output_latch
        };
        let v = BitVec::new(n * 8, raw).expect("assembled from n bytes");
        let extended = if unsigned {
            zero_extend(v, 32)
        } else {
            sign_extend(v, 32)
        }
        .expect("widening to 32");
        Ok(MemPortOutput {
            rd: extended.value(),
            output_enable: false,
        })
    }

    /// `addr: word` hex lines, eight words per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (row, chunk) in self.bytes.chunks(32).enumerate() {
            let _ = write!(out, "{:08x}:", row * 32);
            for w in chunk.chunks(4) {
                let _ = write!(out, " {:08x}", u32::from_le_bytes([w[0], w[1], w[2], w[3]]));
            }
            out.push('\n');
        }
        out
    }
}

/// Whether the comparator flags satisfy a branch condition.
pub fn branch_taken(kind: BranchKind, alu: &AluResult) -> bool {
    match kind {
        BranchKind::None => false,
        BranchKind::Beq => alu.eq,
        BranchKind::Bne => !alu.eq,
        BranchKind::Blt => alu.lt_signed,
        BranchKind::Bge => !alu.lt_signed,
        BranchKind::Bltu => alu.lt_unsigned,
        BranchKind::Bgeu => !alu.lt_unsigned,
        BranchKind::Jal | BranchKind::Jalr => true,
    }
}

/// `rs1 + imm` with bit 0 cleared.
pub fn jalr_target(rs1val: u32, imm: u32) -> u32 {
    rs1val.wrapping_add(imm) & !1
}

/// Next-pc selection.
pub fn pc_next(
    pc: u32,
    sig: &ControlSignals,
    alu: &AluResult,
    imm: u32,
    rs1val: u32,
) -> Result<u32, TrapKind> {
    let plus4 = pc.wrapping_add(4);
    let next = match sig.pc_src {
        PcSrc::Plus4 => plus4,
        PcSrc::BranchTarget => {
            if branch_taken(sig.branch_kind, alu) {
                pc.wrapping_add(imm)
            } else {
                plus4
            }
        }
        PcSrc::JumpTarget => pc.wrapping_add(imm),
        PcSrc::JalrTarget => jalr_target(rs1val, imm),
    };
    if next & 3 != 0 {
        Err(TrapKind::MisalignedTarget)
    } else {
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alu::{alu_exec, AluOp};
    use crate::control::signals_for;
    use crate::isa::Mnemonic;

    #[test]
    fn register_file_rules() {
        let mut rf = RegisterFile::new();
        assert_eq!(rf.read(7, 31), (0, 0));
        rf.write(0, 0xDEAD, true);
        assert_eq!(rf.read(0, 0), (0, 0));
        rf.write(5, 7, true);
        assert_eq!(rf.read(5, 0), (7, 0));
        rf.write(5, 9, false);
        assert_eq!(rf.get(5), 7);
        rf.write(1, 42, true);
        let (a, b) = rf.read(1, 1);
        assert_eq!(a, b);
    }

    #[test]
    fn imem_fetch() {
        let im = InstructionMemory::from_image(&MemImage::new(0, vec![0x13, 0x93]), 0, 16).unwrap();
        assert_eq!(im.fetch(0), Ok(0x13));
        assert_eq!(im.fetch(4), Ok(0x93));
        assert_eq!(im.fetch(8), Ok(0));
        assert_eq!(im.fetch(16), Err(TrapKind::FetchOutOfRange));
        assert_eq!(im.fetch(0xFFFF_FFFC), Err(TrapKind::FetchOutOfRange));
        let based = InstructionMemory::from_image(&MemImage::new(0x100, vec![1]), 0x100, 16).unwrap();
        assert_eq!(based.fetch(0x100), Ok(1));
        assert_eq!(based.fetch(0xFC), Err(TrapKind::FetchOutOfRange));
    }

    #[test]
    fn imem_rejects_oversized_images() {
        assert!(matches!(
            InstructionMemory::from_image(&MemImage::new(0, vec![0; 5]), 0, 16),
            Err(LoadError::TooLarge { .. })
        ));
        assert_eq!(
            InstructionMemory::from_image(&MemImage::new(0, vec![]), 0, 24),
            Err(LoadError::BadSize(24))
        );
    }

    /// Little-endian reference: bytes of the word, lowest address first.
    fn le_byte(word: u32, k: usize) -> u32 {
        (word >> (8 * k)) & 0xFF
    }

    #[test]
    fn little_endian_byte_order() {
        let mut dm = DataMemory::new(64, 0x3C).unwrap();
        dm.access(0, 0x1122_3344, MemWidth::Word, false, false, true).unwrap();
        for k in 0..4 {
            let rd = dm.access(k, 0, MemWidth::Byte, true, true, false).unwrap().rd;
            assert_eq!(rd, le_byte(0x1122_3344, k as usize));
        }
        assert_eq!(dm.access(0, 0, MemWidth::Byte, true, true, false).unwrap().rd, 0x44);
        assert_eq!(dm.access(2, 0, MemWidth::Half, true, true, false).unwrap().rd, 0x1122);
    }

    #[test]
    fn load_extension() {
        let mut dm = DataMemory::new(64, 0x3C).unwrap();
        dm.access(4, 0xFF80, MemWidth::Half, false, false, true).unwrap();
        assert_eq!(dm.access(4, 0, MemWidth::Half, false, true, false).unwrap().rd, 0xFFFF_FF80);
        assert_eq!(dm.access(4, 0, MemWidth::Half, true, true, false).unwrap().rd, 0xFF80);
        assert_eq!(dm.access(4, 0, MemWidth::Byte, false, true, false).unwrap().rd, 0xFFFF_FF80);
        assert_eq!(dm.access(5, 0, MemWidth::Byte, false, true, false).unwrap().rd, 0xFFFF_FFFF);
        assert_eq!(dm.access(6, 0, MemWidth::Half, false, true, false).unwrap().rd, 0);
    }

    #[test]
    fn alignment_and_range() {
        let mut dm = DataMemory::new(64, 0x3C).unwrap();
        assert_eq!(
            dm.access(2, 0, MemWidth::Word, false, true, false),
            Err(TrapKind::MisalignedAccess)
        );
        assert_eq!(
            dm.access(1, 0, MemWidth::Half, false, false, true),
            Err(TrapKind::MisalignedAccess)
        );
        assert_eq!(
            dm.access(64, 0, MemWidth::Byte, false, true, false),
            Err(TrapKind::AccessOutOfRange)
        );
        assert!(dm.access(63, 0, MemWidth::Byte, false, true, false).is_ok());
    }

    #[test]
    fn display_latch() {
        let mut dm = DataMemory::new(64, 0x3C).unwrap();
        let out = dm.access(0x3C, 55, MemWidth::Word, false, false, true).unwrap();
        assert!(out.output_enable);
        assert_eq!(dm.output_latch(), 55);
        assert_eq!(dm.word_at(0x3C), Some(55));
        // byte store does not drive the display
        let out = dm.access(0x3C, 7, MemWidth::Byte, false, false, true).unwrap();
        assert!(!out.output_enable);
        assert_eq!(dm.output_latch(), 55);

        let mut mmio = DataMemory::new(64, 0x8000_0000).unwrap();
        mmio.access(0x8000_0000, 99, MemWidth::Word, false, false, true).unwrap();
        assert_eq!(mmio.output_latch(), 99);
        assert_eq!(mmio.access(0x8000_0000, 0, MemWidth::Word, false, true, false).unwrap().rd, 99);
        assert_eq!(
            mmio.access(0x8000_0000, 0, MemWidth::Byte, false, false, true),
            Err(TrapKind::AccessOutOfRange)
        );
        assert!(mmio.bytes().iter().all(|&b| b == 0));
    }

    #[test]
    fn dump_format() {
        let mut dm = DataMemory::new(64, 0x3C).unwrap();
        dm.access(4, 0xCAFE, MemWidth::Word, false, false, true).unwrap();
        let dump = dm.dump();
        let lines: Vec<_> = dump.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "00000000: 00000000 0000cafe 00000000 00000000 00000000 00000000 00000000 00000000"
        );
        assert!(lines[1].starts_with("00000020: "));
    }

    #[test]
    fn pc_next_examples() {
        let plus4 = signals_for(Mnemonic::Addi);
        let none = AluResult::default();
        assert_eq!(pc_next(8, &plus4, &none, 0, 0), Ok(12));

        let beq = signals_for(Mnemonic::Beq);
        let eq = alu_exec(AluOp::Sub, 3, 3);
        assert_eq!(pc_next(100, &beq, &eq, (-8i32) as u32, 0), Ok(92));
        let ne = alu_exec(AluOp::Sub, 3, 4);
        assert_eq!(pc_next(100, &beq, &ne, (-8i32) as u32, 0), Ok(104));
        assert_eq!(pc_next(100, &beq, &eq, 6, 0), Err(TrapKind::MisalignedTarget));
        assert_eq!(pc_next(100, &beq, &ne, 6, 0), Ok(104));

        let jalr = signals_for(Mnemonic::Jalr);
        assert_eq!(jalr_target(7, 0), 6);
        // target 7 with bit 0 cleared is 6, which is not word-aligned
        assert_eq!(pc_next(0, &jalr, &none, 0, 7), Err(TrapKind::MisalignedTarget));
        assert_eq!(pc_next(0, &jalr, &none, 1, 7), Ok(8));

        let jal = signals_for(Mnemonic::Jal);
        assert_eq!(pc_next(16, &jal, &none, (-16i32) as u32, 0), Ok(0));
    }

    #[test]
    fn pc_newtype_alignment() {
        assert!(ProgramCounter::new(4).is_some());
        assert!(ProgramCounter::new(6).is_none());
    }
}
