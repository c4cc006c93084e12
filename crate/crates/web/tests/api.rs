use rvsim_web::{dabble_explorer, run_program, seven_seg};

const PROGRAMS: [(&str, &str, u32); 4] = [
    ("sum", include_str!("../../../programs/sum.s"), 55),
    ("fib", include_str!("../../../programs/fib.s"), 55),
    ("memcpy", include_str!("../../../programs/memcpy.s"), 16),
    ("branches", include_str!("../../../programs/branches.s"), 12),
];

#[test]
fn golden_programs_run_in_the_demo() {
    for (name, src, x10) in PROGRAMS {
        let r = run_program(src, 100_000, 4);
        assert_eq!(r.status, "HALTED(ECALL)", "{name}");
        assert_eq!(r.registers[10], x10, "{name}");
        assert_eq!(r.registers[0], 0);
        assert!(r.trace.windows(2).all(|w| w[1].cycle == w[0].cycle + 1));
    }
}

#[test]
fn display_agrees_with_the_segment_view() {
    let r = run_program(include_str!("../../../programs/sum.s"), 100_000, 4);
    assert_eq!(r.display, seven_seg(r.latch, 4).text);
}

#[test]
fn explorer_ends_on_the_decimal_value() {
    for v in [0u32, 9, 10, 99, 65_535, u32::MAX] {
        let r = dabble_explorer(v, 32);
        let shown: String = r.rows.last().unwrap().bcd.concat();
        assert_eq!(shown.trim_start_matches('0').parse::<u64>().unwrap_or(0), v as u64);
        assert_eq!(r.rows.iter().filter(|s| s.phase == "shift").count(), 32);
    }
}
