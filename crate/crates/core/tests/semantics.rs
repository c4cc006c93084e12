//! Golden programs and hand-computed per-instruction results, run on both
//! engines.

mod common;

use common::*;
use rvsim_core::cpu::{run_lockstep, Engine, LockstepOutcome, MachineState};
use rvsim_core::display::render_output;
use rvsim_core::{Status, TrapKind};

fn run_both(src: &str) -> MachineState {
    let start = load(src);
    let mut s = start.clone();
    let mut f = start.clone();
    let rs = s.run(Engine::Structural, 100_000);
    let rf = f.run(Engine::Functional, 100_000);
    assert_eq!(rs, rf);
    assert_eq!(s, f);
    assert!(matches!(run_lockstep(&start, 100_000), LockstepOutcome::Agreed(_)));
    s
}

#[test]
fn sum_program() {
    let s = run_both(SUM);
    assert_eq!(s.status, Status::Halted(TrapKind::Ecall));
    assert_eq!(s.reg(10), 55);
    assert_eq!(s.dmem.output_latch(), 55);
    assert_eq!(render_output(s.dmem.output_latch(), 2), render_output(55, 2));
}

#[test]
fn fib_program() {
    let s = run_both(FIB);
    assert_eq!(s.status, Status::Halted(TrapKind::Ecall));
    assert_eq!(s.reg(10), 55);
}

#[test]
fn memcpy_program() {
    let s = run_both(MEMCPY);
    assert_eq!(s.status, Status::Halted(TrapKind::Ecall));
    assert_eq!(s.reg(10), 16);
    // same seed sequence computed on the host
    let mut x = 0x1234_5678u32;
    let mut xor = 0;
    for k in 0..16u32 {
        assert_eq!(s.dmem.word_at(0x100 + 4 * k), Some(x));
        assert_eq!(s.dmem.word_at(0x200 + 4 * k), Some(x));
        xor ^= x;
        x = (x ^ (x << 3)).wrapping_add(0x1f);
    }
    assert_eq!(s.reg(11), xor);
}

#[test]
fn branch_matrix_program() {
    let s = run_both(BRANCHES);
    assert_eq!(s.status, Status::Halted(TrapKind::Ecall));
    assert_eq!(s.reg(10), 12);
    assert_eq!(s.dmem.output_latch(), 12);
}

#[test]
fn ebreak_program() {
    let s = run_both(EBREAK);
    assert_eq!(s.status, Status::Halted(TrapKind::Ebreak));
    assert_eq!(s.reg(10), 3);
    assert_eq!(s.pc.get(), 4);
}

#[test]
fn coverage_program_results() {
    let s = run_both(COVERAGE);
    assert_eq!(s.status, Status::Halted(TrapKind::Ecall));
    let expect: &[(u8, u32)] = &[
        (1, 0x8000_0000),
        (2, 4),
        (3, (-7i32) as u32),
        (4, 1),
        (5, 0),
        (6, 0xFFFF_FF06),
        (7, 0x70),
        (8, 9),
        (9, 0x700),
        (11, 1),
        (12, 0xFFFF_FFFF),
        (13, 0x79),
        (14, 9u32.wrapping_sub(0x70)),
        (15, 18),
        (16, 1),
        (17, 0),
        (18, 0x79),
        (19, 0x0040_0000),
        (20, 0xFFC0_0000),
        (21, 0x79),
        (22, 0x70),
        (23, 0x100),
        (24, (-7i32) as u32),
        (25, 0xFFFF_FFF9),
        (26, 0xFFF9),
        (27, 0xFFFF_FFF9),
        (28, 0xF9),
    ];
    for &(r, v) in expect {
        assert_eq!(s.reg(r), v, "x{r}");
    }
    // jal at word 37 links 38*4; auipc at word 38; jalr at word 39 links 40*4
    assert_eq!(s.reg(29), 38 * 4);
    assert_eq!(s.reg(30), 38 * 4);
    assert_eq!(s.reg(31), 40 * 4);
    assert_eq!(s.pc.get(), 41 * 4);
    assert_eq!(s.dmem.word_at(0x100), Some((-7i32) as u32));
    assert_eq!(s.dmem.word_at(0x104), Some(0x0070_0700));
}
