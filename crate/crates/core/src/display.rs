//! Output stage: binary to BCD by double dabble, then seven-segment
//! patterns and a text rendering of the output latch.
//!
//! Rendering uses three rows per digit, three columns wide, with one space
//! between digits. Rows keep their trailing spaces so every line of a
//! rendering has the same width (`4 * digits - 1`):
//!
//! ```text
//!  _   _
//! |_  |_
//!  _|  _|
//! ```
//!
//! is `55`. Segment `a` is the top bar, `b`/`c` the right side top and
//! bottom, `d` the bottom bar, `e`/`f` the left side bottom and top, `g`
//! the middle bar.

use thiserror::Error;

use crate::bits::BitVec;

pub const DEFAULT_DIGITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DisplayError {
    #[error("{0} is not a decimal digit")]
    DigitRange(u8),
}

/// Decimal digits, most significant first, no leading zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcdDigits {
    pub digits: Vec<u8>,
    pub source_width: u32,
}

impl BcdDigits {
    pub fn value(&self) -> u64 {
        self.digits.iter().fold(0, |acc, &d| acc * 10 + d as u64)
    }
}

/// One phase of the shift-and-add-3 loop, for visualizing the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DabblePhase {
    /// Nibbles of 5 or more received +3.
    Add3,
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DabbleStep {
    pub iteration: u32,
    pub phase: DabblePhase,
    /// Packed BCD nibbles after this phase.
    pub bcd: u64,
    /// Binary bits not yet shifted out, left-aligned in `width` bits.
    pub remaining: u32,
}

const BCD_NIBBLES: u32 = 10;

fn nibble(bcd: u64, k: u32) -> u64 {
    (bcd >> (4 * k)) & 0xF
}

fn dabble(v: BitVec, mut observe: impl FnMut(DabbleStep)) -> u64 {
    let width = v.width();
    // scratch = [bcd nibbles | binary], binary in the low `width` bits
    let mut scratch: u128 = v.value() as u128;
    let bcd_of = |s: u128| (s >> width) as u64;
    let bin_of = |s: u128| (s & ((1u128 << width) - 1)) as u32;

    for i in 0..width {
        let mut bcd = bcd_of(scratch);
        let mut corrected = false;
        for k in 0..BCD_NIBBLES {
            if nibble(bcd, k) >= 5 {
                bcd += 3 << (4 * k);
                corrected = true;
            }
        }
        scratch = ((bcd as u128) << width) | bin_of(scratch) as u128;
        if corrected {
            observe(DabbleStep {
                iteration: i,
                phase: DabblePhase::Add3,
                bcd,
                remaining: bin_of(scratch),
            });
        }

        scratch <<= 1;
        let bcd = bcd_of(scratch);
        debug_assert!(
            (0..BCD_NIBBLES).all(|k| nibble(bcd, k) <= 9),
            "BCD nibble above 9 after shift {i}: {bcd:#x}"
        );
        observe(DabbleStep {
            iteration: i,
            phase: DabblePhase::Shift,
            bcd,
            remaining: bin_of(scratch),
        });
    }
    bcd_of(scratch)
}

fn unpack(bcd: u64, width: u32) -> BcdDigits {
    let mut digits: Vec<u8> = (0..BCD_NIBBLES)
        .rev()
        .map(|k| nibble(bcd, k) as u8)
        .skip_while(|&d| d == 0)
        .collect();
    if digits.is_empty() {
        digits.push(0);
    }
    BcdDigits {
        digits,
        source_width: width,
    }
}

/// Shift-and-add-3 conversion of `v` to decimal digits.
pub fn double_dabble(v: BitVec) -> BcdDigits {
    unpack(dabble(v, |_| {}), v.width())
}

/// Same conversion, also returning every intermediate phase.
pub fn double_dabble_steps(v: BitVec) -> (BcdDigits, Vec<DabbleStep>) {
    let mut steps = Vec::new();
    let bcd = dabble(v, |s| steps.push(s));
    (unpack(bcd, v.width()), steps)
}

/// Segments a..g as bits 0..6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SevenSegPattern {
    pub segments: u8,
}

const DIGIT_SEGMENTS: [u8; 10] = [0x3F, 0x06, 0x5B, 0x4F, 0x66, 0x6D, 0x7D, 0x07, 0x7F, 0x6F];

impl SevenSegPattern {
    pub const BLANK: SevenSegPattern = SevenSegPattern { segments: 0 };

    /// Segment by letter index: 0 = a ... 6 = g.
    pub fn is_on(self, segment: usize) -> bool {
        segment < 7 && (self.segments >> segment) & 1 == 1
    }

    pub fn lit(self) -> String {
        "abcdefg"
            .chars()
            .enumerate()
            .filter(|&(i, _)| self.is_on(i))
            .map(|(_, c)| c)
            .collect()
    }

    fn rows(self) -> [String; 3] {
        let on = |seg: usize, c: char| if self.is_on(seg) { c } else { ' ' };
        [
            [' ', on(0, '_'), ' '].iter().collect(),
            [on(5, '|'), on(6, '_'), on(1, '|')].iter().collect(),
            [on(4, '|'), on(3, '_'), on(2, '|')].iter().collect(),
        ]
    }
}

pub fn seven_seg_encode(d: u8) -> Result<SevenSegPattern, DisplayError> {
    DIGIT_SEGMENTS
        .get(d as usize)
        .map(|&segments| SevenSegPattern { segments })
        .ok_or(DisplayError::DigitRange(d))
}

/// The low `digit_count` decimal digits of `latch`, zero-padded on the left.
pub fn display_digits(latch: u32, digit_count: usize) -> Vec<u8> {
    let n = digit_count.max(1);
    let digits = double_dabble(BitVec::word(latch)).digits;
    if digits.len() >= n {
        digits[digits.len() - n..].to_vec()
    } else {
        let mut padded = vec![0; n - digits.len()];
        padded.extend(digits);
        padded
    }
}

/// Three-line seven-segment rendering of `latch`.
pub fn render_output(latch: u32, digit_count: usize) -> String {
    let patterns: Vec<SevenSegPattern> = display_digits(latch, digit_count)
        .into_iter()
        .map(|d| seven_seg_encode(d).expect("digits are 0..=9"))
        .collect();
    let mut out = String::new();
    for row in 0..3 {
        let line: Vec<String> = patterns.iter().map(|p| p.rows()[row].clone()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(width: u32, v: u32) -> Vec<u8> {
        double_dabble(BitVec::new(width, v).unwrap()).digits
    }

    #[test]
    fn examples() {
        assert_eq!(dd(32, 0), vec![0]);
        assert_eq!(dd(8, 255), vec![2, 5, 5]);
        assert_eq!(dd(32, u32::MAX), vec![4, 2, 9, 4, 9, 6, 7, 2, 9, 5]);
        assert_eq!(dd(1, 1), vec![1]);
    }

    #[test]
    fn exhaustive_16_bit() {
        for v in 0..=0xFFFFu32 {
            let expect: Vec<u8> = v.to_string().bytes().map(|b| b - b'0').collect();
            assert_eq!(dd(16, v), expect);
        }
    }

    #[test]
    fn steps_reach_the_result() {
        let (digits, steps) = double_dabble_steps(BitVec::new(8, 243).unwrap());
        assert_eq!(digits.digits, vec![2, 4, 3]);
        assert_eq!(steps.iter().filter(|s| s.phase == DabblePhase::Shift).count(), 8);
        assert_eq!(steps.last().unwrap().bcd, 0x243);
        assert!(steps.iter().any(|s| s.phase == DabblePhase::Add3));
    }

    #[test]
    fn segments() {
        assert_eq!(seven_seg_encode(8).unwrap().lit(), "abcdefg");
        assert_eq!(seven_seg_encode(1).unwrap().lit(), "bc");
        assert_eq!(seven_seg_encode(0).unwrap().lit(), "abcdef");
        assert_eq!(seven_seg_encode(7).unwrap().lit(), "abc");
        assert_eq!(seven_seg_encode(10), Err(DisplayError::DigitRange(10)));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_output(55, 2), " _   _ \n|_  |_ \n _|  _|\n");
        assert_eq!(render_output(0, 1), " _ \n| |\n|_|\n");
        assert_eq!(display_digits(12345, 3), vec![3, 4, 5]);
        assert_eq!(render_output(12345, 3), render_output(345, 3));
        assert_eq!(display_digits(55, 4), vec![0, 0, 5, 5]);
        assert_eq!(display_digits(7, 0), vec![7]);
        let all = render_output(1_234_567_890, 10);
        assert!(all.lines().all(|l| l.len() == 39));
    }
}
