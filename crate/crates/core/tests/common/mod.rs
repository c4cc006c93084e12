//! Shared generators and fixtures for the integration tests.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use rvsim_core::asm::assemble;
use rvsim_core::cpu::{MachineConfig, MachineState};
use rvsim_core::isa::{encode, Format, Instruction, Mnemonic};
use rvsim_core::MemImage;

pub const SUM: &str = include_str!("../../../../programs/sum.s");
pub const FIB: &str = include_str!("../../../../programs/fib.s");
pub const MEMCPY: &str = include_str!("../../../../programs/memcpy.s");
pub const BRANCHES: &str = include_str!("../../../../programs/branches.s");
pub const COVERAGE: &str = include_str!("../../../../programs/coverage.s");
pub const EBREAK: &str = include_str!("../../../../programs/ebreak.s");
pub const SUM_HEX: &str = include_str!("../../../../programs/sum.hex");

pub const GOLDEN: [(&str, &str); 6] = [
    ("sum", SUM),
    ("fib", FIB),
    ("memcpy", MEMCPY),
    ("branches", BRANCHES),
    ("coverage", COVERAGE),
    ("ebreak", EBREAK),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn load(src: &str) -> MachineState {
    let img = assemble(src, 0).expect("golden program assembles");
    MachineState::from_images(&MachineConfig::default(), &img, None).unwrap()
}

/// Small data memory keeps random states cheap to clone and compare.
pub const FUZZ_CONFIG: MachineConfig = MachineConfig {
    imem_bytes: 1024,
    dmem_bytes: 1024,
    display_addr: 0x3FC,
};

fn reg(rng: &mut impl Rng) -> u8 {
    rng.gen_range(0..32)
}

fn imm12(rng: &mut impl Rng) -> i32 {
    rng.gen_range(-2048..2048)
}

/// Any legal instruction with uniformly chosen mnemonic and fields.
pub fn random_instruction(rng: &mut impl Rng) -> Instruction {
    let m = *Mnemonic::ALL.choose(rng).unwrap();
    random_fields(m, rng)
}

pub fn random_fields(m: Mnemonic, rng: &mut impl Rng) -> Instruction {
    use Mnemonic::*;
    match m {
        Ecall | Ebreak => Instruction::i(m, 0, 0, 0),
        Fence => Instruction::i(m, reg(rng), reg(rng), imm12(rng)),
        _ if m.is_shift_imm() => Instruction::i(m, reg(rng), reg(rng), rng.gen_range(0..32)),
        _ => match m.format() {
            Format::R => Instruction::r(m, reg(rng), reg(rng), reg(rng)),
            Format::I => Instruction::i(m, reg(rng), reg(rng), imm12(rng)),
            Format::S => Instruction::sb(m, reg(rng), reg(rng), imm12(rng)),
            Format::B => Instruction::sb(m, reg(rng), reg(rng), rng.gen_range(-2048..2048) * 2),
            Format::U => Instruction::uj(m, reg(rng), (rng.gen::<u32>() & 0xFFFF_F000) as i32),
            Format::J => Instruction::uj(m, reg(rng), rng.gen_range(-(1 << 19)..(1 << 19)) * 2),
        },
    }
}

/// Instruction biased toward staying inside a program of `len` words at
/// `index` and toward memory accesses that hit data memory.
pub fn program_instruction(rng: &mut impl Rng, index: usize, len: usize) -> Instruction {
    let mut i = random_instruction(rng);
    let m = i.mnemonic;
    if m.is_system() && rng.gen_bool(0.9) {
        // keep programs running longer
        return Instruction::nop();
    }
    if (m.is_branch() || m == Mnemonic::Jal) && rng.gen_bool(0.9) {
        let target = rng.gen_range(0..len) as i32;
        i.imm = (target - index as i32) * 4;
    }
    if (m.is_load() || m.is_store() || m == Mnemonic::Jalr) && rng.gen_bool(0.7) {
        // small offsets from a register that usually holds an address
        i.rs1 = rng.gen_range(1..8);
        i.imm = rng.gen_range(-16..16) * if rng.gen_bool(0.8) { 4 } else { 1 };
    }
    i
}

/// Registers x1..x7 hold data-memory addresses (aligned, mostly), the rest
/// random words.
pub fn randomize_registers(s: &mut MachineState, rng: &mut impl Rng) {
    let size = s.dmem.size_bytes();
    for r in 1..32u8 {
        let v = if r < 8 {
            match rng.gen_range(0..10) {
                0 => s.dmem.display_addr(),
                1 => rng.gen::<u32>(),
                2 => rng.gen_range(0..size),
                _ => rng.gen_range(16..size / 4 - 16) * 4,
            }
        } else {
            match rng.gen_range(0..4) {
                0 => rng.gen_range(0..64),
                _ => rng.gen(),
            }
        };
        s.rf.write(r, v, true);
    }
}

pub fn random_dmem_image(rng: &mut impl Rng, bytes: u32) -> MemImage {
    MemImage::new(0, (0..bytes / 4).map(|_| rng.gen()).collect())
}

/// One random instruction at a random pc, surrounded by random words.
pub fn random_single_state(rng: &mut ChaCha8Rng) -> MachineState {
    let words = (FUZZ_CONFIG.imem_bytes / 4) as usize;
    let pc_index = rng.gen_range(0..words);
    let mut imem: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    imem[pc_index] = if rng.gen_bool(0.97) {
        let len = words;
        encode(&program_instruction(rng, pc_index, len)).unwrap()
    } else {
        rng.gen()
    };
    let data = random_dmem_image(rng, FUZZ_CONFIG.dmem_bytes);
    let mut s =
        MachineState::from_images(&FUZZ_CONFIG, &MemImage::new(0, imem), Some(&data)).unwrap();
    s.pc = rvsim_core::datapath::ProgramCounter::new(pc_index as u32 * 4).unwrap();
    randomize_registers(&mut s, rng);
    s
}

/// A program of 1..=256 random instructions.
pub fn random_program_state(rng: &mut ChaCha8Rng) -> MachineState {
    let len = rng.gen_range(1..=256);
    let words: Vec<u32> = (0..len)
        .map(|k| encode(&program_instruction(rng, k, len)).unwrap())
        .collect();
    let data = random_dmem_image(rng, FUZZ_CONFIG.dmem_bytes);
    let mut s =
        MachineState::from_images(&FUZZ_CONFIG, &MemImage::new(0, words), Some(&data)).unwrap();
    randomize_registers(&mut s, rng);
    s
}
