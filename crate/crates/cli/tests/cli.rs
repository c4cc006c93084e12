use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn program(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(name)
}

fn rvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_sum_reports_status_registers_and_display() {
    let o = rvsim(&["run", path(&program("sum.s"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("status: HALTED(ECALL)"));
    assert!(out.contains("x10=0x37"));
    assert!(out.contains(" _   _   _   _ \n| | | | |_  |_ \n|_| |_|  _|  _|\n"));
}

#[test]
fn differential_run_over_corpus() {
    for name in ["sum.s", "fib.s", "memcpy.s", "branches.s", "coverage.s", "ebreak.s"] {
        let o = rvsim(&["run", path(&program(name)), "--engine", "differential"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).contains("engines agree"));
    }
}

#[test]
fn engines_print_identical_reports() {
    let run = |engine| stdout(&rvsim(&["run", path(&program("memcpy.s")), "--engine", engine]));
    assert_eq!(run("structural"), run("functional"));
}

#[test]
fn budget_exhaustion_exits_4() {
    let o = rvsim(&["run", path(&program("fib.s")), "--max-cycles", "5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("status: RUNNING"));
    assert!(stdout(&o).contains("cycles: 5"));
}

#[test]
fn fault_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("mis.s");
    std::fs::write(&src, "addi x1, x0, 6\njalr x0, 0(x1)\n").unwrap();
    let o = rvsim(&["run", path(&src)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAULT(MISALIGNED_TARGET)"));
    assert!(stdout(&o).contains("cycles: 2"));
}

#[test]
fn asm_writes_the_golden_image() {
    let dir = tempfile::tempdir().unwrap();
    let hex = dir.path().join("sum.hex");
    let o = rvsim(&["asm", path(&program("sum.s")), "-o", path(&hex)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&hex).unwrap(),
        std::fs::read_to_string(program("sum.hex")).unwrap()
    );
    let o = rvsim(&["run", path(&hex)]);
    assert!(stdout(&o).contains("display: 55"));
}

#[test]
fn bin_and_hex_images_run_the_same() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("fib.bin");
    let o = rvsim(&["asm", path(&program("fib.s")), "-o", path(&bin), "--format", "bin"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::metadata(&bin).unwrap().len() % 4, 0);
    assert_eq!(
        stdout(&rvsim(&["run", path(&bin)])),
        stdout(&rvsim(&["run", path(&program("fib.s"))]))
    );
}

#[test]
fn assembly_errors_exit_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.s");
    std::fs::write(&src, "nop\nbeq x0, x0, nowhere\n").unwrap();
    let o = rvsim(&["asm", path(&src), "-o", path(&dir.path().join("o.hex"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("nowhere"), "{err}");
    assert!(err.contains("bad.s:2:"), "{err}");
}

#[test]
fn unreadable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.s");
    let o = rvsim(&["asm", path(&missing), "-o", path(&dir.path().join("o.hex"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(rvsim(&["run", path(&missing)]).status.code(), Some(2));
}

#[test]
fn bad_machine_configuration_exits_1() {
    let sum = program("sum.s");
    assert_eq!(rvsim(&["run", path(&sum), "--dmem-size", "1000"]).status.code(), Some(1));
    assert_eq!(rvsim(&["run", path(&sum), "--display-addr", "0x102"]).status.code(), Some(1));
}

#[test]
fn step_prints_one_line_per_cycle() {
    let o = rvsim(&["step", path(&program("sum.s")), "--count", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "1\t00000000\t00000513\taddi x10, x0, 0\tx10=0x00000000");
    // stepping past the halt stops at the trapping cycle
    let o = rvsim(&["step", path(&program("ebreak.s")), "--count", "100"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stdout(&o).contains("trap=EBREAK"));
}

#[test]
fn trace_flag_matches_step() {
    let traced = stdout(&rvsim(&["run", path(&program("sum.s")), "--trace"]));
    let stepped = stdout(&rvsim(&["step", path(&program("sum.s")), "--count", "1000"]));
    assert!(traced.starts_with(&stepped));
    assert_eq!(
        rvsim(&["run", path(&program("sum.s")), "--trace", "--engine", "functional"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn disasm_source_reassembles() {
    let dir = tempfile::tempdir().unwrap();
    let o = rvsim(&["disasm", "--source", path(&program("sum.hex"))]);
    assert_eq!(o.status.code(), Some(0));
    let src = dir.path().join("round.s");
    std::fs::write(&src, stdout(&o)).unwrap();
    let hex = dir.path().join("round.hex");
    rvsim(&["asm", path(&src), "-o", path(&hex)]);
    assert_eq!(
        std::fs::read_to_string(hex).unwrap(),
        std::fs::read_to_string(program("sum.hex")).unwrap()
    );
    let listing = stdout(&rvsim(&["disasm", path(&program("sum.hex"))]));
    assert!(listing.starts_with("00000000:  00000513  addi x10, x0, 0\n"));
}

#[test]
fn controls_table_has_a_row_per_mnemonic() {
    let o = rvsim(&["controls", "--table"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 41);
    assert!(out.contains("\nlw,I,1,1,0,1,REG,IMM,ADD,NONE,PLUS4,MEM,WORD,0,0,0\n"));
    let one = stdout(&rvsim(&["controls", "sw"]));
    assert!(one.contains("mem_write      1"));
    assert_eq!(rvsim(&["controls", "mul"]).status.code(), Some(1));
}

#[test]
fn dump_dmem_lists_eight_words_per_line() {
    let o = rvsim(&["run", path(&program("sum.s")), "--dump-dmem", "--dmem-size", "64"]);
    let out = stdout(&o);
    let dump: Vec<&str> = out.lines().filter(|l| l.starts_with("000000")).collect();
    assert_eq!(dump.len(), 2);
    assert_eq!(dump[0].split_whitespace().count(), 9);
}
