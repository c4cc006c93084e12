//! Bit-level arithmetic primitives.
//!
//! Everything above this layer (ALU, load extension, instruction field
//! slicing) is expressed in terms of these small pure functions, which are
//! exhaustively checked against native integer arithmetic in the tests.

use std::fmt;

use thiserror::Error;

/// Widest vector supported. RV32I never needs more.
pub const MAX_WIDTH: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit width {0} outside 1..=32")]
    InvalidWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueOverflow { value: u32, width: u32 },
    #[error("operand widths differ ({0} vs {1})")]
    WidthMismatch(u32, u32),
    #[error("cannot extend a {from}-bit vector to {to} bits")]
    Narrowing { from: u32, to: u32 },
    #[error("field bounds out of order or out of range: hi={hi} lo={lo}")]
    IndexOrder { hi: u32, lo: u32 },
}

/// A fixed-width bit vector of 1 to 32 bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    width: u32,
    value: u32,
}

#[inline]
fn mask(width: u32) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

impl BitVec {
    pub fn new(width: u32, value: u32) -> Result<Self, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::InvalidWidth(width));
        }
        if value & !mask(width) != 0 {
            return Err(BitsError::ValueOverflow { value, width });
        }
        Ok(BitVec { width, value })
    }

    /// Builds a vector keeping only the low `width` bits of `value`.
    pub fn truncating(width: u32, value: u32) -> Result<Self, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::InvalidWidth(width));
        }
        Ok(BitVec {
            width,
            value: value & mask(width),
        })
    }

    pub fn word(value: u32) -> Self {
        BitVec { width: 32, value }
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn bit(self, i: u32) -> bool {
        i < self.width && (self.value >> i) & 1 == 1
    }

    pub fn msb(self) -> bool {
        self.bit(self.width - 1)
    }

    /// Keeps the low `to_width` bits.
    pub fn truncate(self, to_width: u32) -> Result<Self, BitsError> {
        if to_width > self.width {
            return Err(BitsError::InvalidWidth(to_width));
        }
        BitVec::truncating(to_width, self.value)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}@{}", self.value, self.width)
    }
}

/// One-bit full adder: returns `(sum, carry_out)`.
#[inline]
pub fn full_add(a: bool, b: bool, cin: bool) -> (bool, bool) {
    let sum = a ^ b ^ cin;
    let cout = (a & b) | (a & cin) | (b & cin);
    (sum, cout)
}

fn check_widths(a: BitVec, b: BitVec) -> Result<u32, BitsError> {
    if a.width != b.width {
        Err(BitsError::WidthMismatch(a.width, b.width))
    } else {
        Ok(a.width)
    }
}

/// Chain of full adders from bit 0 upward.
pub fn ripple_add(a: BitVec, b: BitVec, cin: bool) -> Result<(BitVec, bool), BitsError> {
    let width = check_widths(a, b)?;
    let mut carry = cin;
    let mut sum = 0u32;
    for i in 0..width {
        let (s, c) = full_add(a.bit(i), b.bit(i), carry);
        sum |= (s as u32) << i;
        carry = c;
    }
    Ok((BitVec { width, value: sum }, carry))
}

const GROUP: usize = 4;

/// Sum-of-products carry lookahead over up to four positions.
///
/// `carries[k]` is the carry into position `k`; `carries[n]` is the carry
/// out. Each carry is computed directly from the generate/propagate terms
/// and the incoming carry, never from the previous carry.
fn lookahead(g: &[bool], p: &[bool], c0: bool, carries: &mut [bool]) {
    let n = g.len();
    carries[0] = c0;
    for k in 1..=n {
        // c_k = g_{k-1} | p_{k-1} g_{k-2} | ... | p_{k-1}..p_0 c_0
        let mut c = false;
        for j in 0..k {
            let mut term = g[j];
            for &pp in &p[j + 1..k] {
                term &= pp;
            }
            c |= term;
        }
        c |= p[..k].iter().all(|&x| x) & c0;
        carries[k] = c;
    }
}

/// Two-level carry-lookahead adder built from 4-bit lookahead groups.
///
/// Bit-level generate/propagate terms feed per-group lookahead units; the
/// groups' own generate/propagate terms feed a second lookahead level that
/// produces the carry into each group.
pub fn cla_add(a: BitVec, b: BitVec, cin: bool) -> Result<(BitVec, bool), BitsError> {
    let width = check_widths(a, b)? as usize;
    let mut g = [false; 32];
    let mut p = [false; 32];
    for i in 0..width {
        let (x, y) = (a.bit(i as u32), b.bit(i as u32));
        g[i] = x & y;
        p[i] = x ^ y;
    }

    let groups = width.div_ceil(GROUP);
    let mut group_g = [false; 8];
    let mut group_p = [false; 8];
    for k in 0..groups {
        let lo = k * GROUP;
        let hi = (lo + GROUP).min(width);
        // Group generate: carry out of the group assuming carry-in 0.
        let mut c = [false; GROUP + 1];
        lookahead(&g[lo..hi], &p[lo..hi], false, &mut c);
        group_g[k] = c[hi - lo];
        group_p[k] = p[lo..hi].iter().all(|&x| x);
    }

    let mut sum = 0u32;
    let mut cout = cin;
    // Second level: carry into each group, in chunks of four groups.
    let mut chunk_carry = cin;
    for chunk in (0..groups).step_by(GROUP) {
        let end = (chunk + GROUP).min(groups);
        let mut group_cin = [false; GROUP + 1];
        lookahead(
            &group_g[chunk..end],
            &group_p[chunk..end],
            chunk_carry,
            &mut group_cin,
        );
        for k in chunk..end {
            let lo = k * GROUP;
            let hi = (lo + GROUP).min(width);
            let mut c = [false; GROUP + 1];
            lookahead(&g[lo..hi], &p[lo..hi], group_cin[k - chunk], &mut c);
            for i in lo..hi {
                sum |= ((p[i] ^ c[i - lo]) as u32) << i;
            }
        }
        chunk_carry = group_cin[end - chunk];
        cout = chunk_carry;
    }

    Ok((
        BitVec {
            width: width as u32,
            value: sum,
        },
        cout,
    ))
}

pub fn sign_extend(v: BitVec, to_width: u32) -> Result<BitVec, BitsError> {
    if to_width < v.width || to_width > MAX_WIDTH {
        return Err(BitsError::Narrowing {
            from: v.width,
            to: to_width,
        });
    }
    let high = if v.msb() {
        mask(to_width) & !mask(v.width)
    } else {
        0
    };
    Ok(BitVec {
        width: to_width,
        value: v.value | high,
    })
}

pub fn zero_extend(v: BitVec, to_width: u32) -> Result<BitVec, BitsError> {
    if to_width < v.width || to_width > MAX_WIDTH {
        return Err(BitsError::Narrowing {
            from: v.width,
            to: to_width,
        });
    }
    Ok(BitVec {
        width: to_width,
        value: v.value,
    })
}

/// Bits `hi..=lo` of `w`.
pub fn extract_field(w: u32, hi: u32, lo: u32) -> Result<BitVec, BitsError> {
    if hi > 31 || lo > hi {
        return Err(BitsError::IndexOrder { hi, lo });
    }
    let width = hi - lo + 1;
    Ok(BitVec {
        width,
        value: (w >> lo) & mask(width),
    })
}
