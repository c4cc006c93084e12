use std::fmt::Write as _;

use crate::image::MemImage;
use crate::isa::{decode, Format, Instruction, Mnemonic};

fn rel(imm: i32) -> String {
    if imm < 0 {
        format!(".{imm}")
    } else {
        format!(".+{imm}")
    }
}

fn fence_set(bits: i32) -> String {
    "iorw"
        .chars()
        .zip([8, 4, 2, 1])
        .filter(|&(_, b)| bits & b != 0)
        .map(|(c, _)| c)
        .collect()
}

fn render(i: &Instruction) -> Option<String> {
    let m = i.mnemonic;
    let s = match m.format() {
        _ if m.is_system() => m.name().to_string(),
        Format::I if m == Mnemonic::Fence => {
            let (pred, succ) = ((i.imm >> 4) & 0xF, i.imm & 0xF);
            // Only the plain `fence pred, succ` form has assembler syntax.
            if i.rd != 0 || i.rs1 != 0 || i.imm & !0xFF != 0 || pred == 0 || succ == 0 {
                return None;
            }
            if i.imm == 0xFF {
                "fence".into()
            } else {
                format!("fence {}, {}", fence_set(pred), fence_set(succ))
            }
        }
        Format::R => format!("{m} x{}, x{}, x{}", i.rd, i.rs1, i.rs2),
        Format::I if m.is_load() || m == Mnemonic::Jalr => {
            format!("{m} x{}, {}(x{})", i.rd, i.imm, i.rs1)
        }
        Format::I => format!("{m} x{}, x{}, {}", i.rd, i.rs1, i.imm),
        Format::S => format!("{m} x{}, {}(x{})", i.rs2, i.imm, i.rs1),
        Format::B => format!("{m} x{}, x{}, {}", i.rs1, i.rs2, rel(i.imm)),
        Format::U => format!("{m} x{}, {:#x}", i.rd, (i.imm as u32) >> 12),
        Format::J => format!("{m} x{}, {}", i.rd, rel(i.imm)),
    };
    Some(s)
}

/// Canonical assembly for one word. `pc` is accepted for callers that
/// annotate targets; branch and jump targets are rendered pc-relative.
pub fn disassemble(w: u32, _pc: u32) -> String {
    decode(w)
        .ok()
        .and_then(|i| render(&i))
        .unwrap_or_else(|| format!(".word {w:#010x}"))
}

/// Source text that reassembles to `img`.
pub fn disassemble_image(img: &MemImage) -> String {
    let mut out = String::new();
    if img.origin != 0 {
        let _ = writeln!(out, ".org {:#x}", img.origin);
    }
    for (k, &w) in img.words.iter().enumerate() {
        let pc = img.origin.wrapping_add(4 * k as u32);
        let _ = writeln!(out, "    {}", disassemble(w, pc));
    }
    out
}
