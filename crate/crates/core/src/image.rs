//! Memory images in Logisim's `v2.0 raw` text format and as raw
//! little-endian binary.
//!
//! The writer is canonical: lowercase hex without leading zeros, eight
//! tokens per line, and any run of four or more identical words collapsed
//! into an `N*value` token (`N` in decimal). The reader also accepts `#`
//! comments and arbitrary whitespace, as Logisim does.

use thiserror::Error;

pub const HEADER: &str = "v2.0 raw";
pub const WORDS_PER_LINE: usize = 8;
pub const RUN_THRESHOLD: usize = 4;

/// Dense run of words starting at byte address `origin`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MemImage {
    pub origin: u32,
    pub words: Vec<u32>,
}

impl MemImage {
    pub fn new(origin: u32, words: Vec<u32>) -> Self {
        MemImage { origin, words }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("missing or unrecognized header (expected `{HEADER}`)")]
    BadHeader,
    #[error("line {line}: bad token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: value `{token}` does not fit in 32 bits")]
    Overflow { line: usize, token: String },
    #[error("binary image length {0} is not a multiple of 4")]
    RaggedBinary(usize),
}

pub fn write_v2raw(img: &MemImage) -> String {
    let mut tokens = Vec::new();
    let words = &img.words;
    let mut i = 0;
    while i < words.len() {
        let v = words[i];
        let run = words[i..].iter().take_while(|&&w| w == v).count();
        if run >= RUN_THRESHOLD {
            tokens.push(format!("{run}*{v:x}"));
            i += run;
        } else {
            tokens.push(format!("{v:x}"));
            i += 1;
        }
    }

    let mut out = String::from(HEADER);
    out.push('\n');
    for line in tokens.chunks(WORDS_PER_LINE) {
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_hex(token: &str, line: usize) -> Result<u32, ImageError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ImageError::BadToken {
            line,
            token: token.to_string(),
        });
    }
    u32::from_str_radix(token, 16).map_err(|_| ImageError::Overflow {
        line,
        token: token.to_string(),
    })
}

pub fn read_v2raw(text: &str) -> Result<MemImage, ImageError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == HEADER => {}
        _ => return Err(ImageError::BadHeader),
    }

    let mut words = Vec::new();
    for (idx, raw_line) in lines {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            match token.split_once('*') {
                Some((count, value)) => {
                    let bad = || ImageError::BadToken {
                        line,
                        token: token.to_string(),
                    };
                    if count.is_empty() || !count.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(bad());
                    }
                    let n: usize = count.parse().map_err(|_| bad())?;
                    if n == 0 {
                        return Err(bad());
                    }
                    let v = parse_hex(value, line)?;
                    words.extend(std::iter::repeat_n(v, n));
                }
                None => words.push(parse_hex(token, line)?),
            }
        }
    }
    Ok(MemImage::new(0, words))
}

pub fn write_bin(img: &MemImage) -> Vec<u8> {
    img.words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

pub fn read_bin(bytes: &[u8]) -> Result<MemImage, ImageError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(ImageError::RaggedBinary(bytes.len()));
    }
    let words = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(MemImage::new(0, words))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writer_examples() {
        assert_eq!(write_v2raw(&MemImage::new(0, vec![0x13])), "v2.0 raw\n13\n");
        assert_eq!(write_v2raw(&MemImage::new(0, vec![0; 5])), "v2.0 raw\n5*0\n");
        assert_eq!(
            write_v2raw(&MemImage::new(0, vec![7, 7, 7, 1])),
            "v2.0 raw\n7 7 7 1\n"
        );
        assert_eq!(write_v2raw(&MemImage::default()), "v2.0 raw\n");
        let nine: Vec<u32> = (1..=9).collect();
        assert_eq!(
            write_v2raw(&MemImage::new(0, nine)),
            "v2.0 raw\n1 2 3 4 5 6 7 8\n9\n"
        );
        assert_eq!(
            write_v2raw(&MemImage::new(0, vec![0xDEADBEEF])),
            "v2.0 raw\ndeadbeef\n"
        );
    }

    #[test]
    fn reader_examples() {
        assert_eq!(read_v2raw("v2.0 raw\n13 93\n").unwrap().words, vec![0x13, 0x93]);
        assert_eq!(read_v2raw("v3.0 hex\n13\n"), Err(ImageError::BadHeader));
        assert_eq!(read_v2raw(""), Err(ImageError::BadHeader));
        assert!(matches!(
            read_v2raw("v2.0 raw\n1ffffffff\n"),
            Err(ImageError::Overflow { line: 2, .. })
        ));
        assert!(matches!(
            read_v2raw("v2.0 raw\n13\n12 zz\n"),
            Err(ImageError::BadToken { line: 3, .. })
        ));
        assert!(matches!(
            read_v2raw("v2.0 raw\n0*5\n"),
            Err(ImageError::BadToken { .. })
        ));
        assert_eq!(
            read_v2raw("v2.0 raw\n# comment\n3*a 1 # trailing\n").unwrap().words,
            vec![0xA, 0xA, 0xA, 1]
        );
        assert_eq!(
            read_v2raw("v2.0 raw\r\n0000FFFF\r\n").unwrap().words,
            vec![0xFFFF]
        );
    }

    #[test]
    fn binary_round_trip() {
        let img = MemImage::new(0, vec![0x1122_3344, 0x13]);
        let bytes = write_bin(&img);
        assert_eq!(&bytes[..4], &[0x44, 0x33, 0x22, 0x11]);
        assert_eq!(read_bin(&bytes), Ok(img));
        assert_eq!(read_bin(&[1, 2, 3]), Err(ImageError::RaggedBinary(3)));
    }

    fn images() -> impl Strategy<Value = Vec<u32>> {
        // Small alphabet so runs appear often.
        prop::collection::vec(
            prop_oneof![Just(0u32), Just(0x13u32), any::<u32>()],
            0..64,
        )
    }

    proptest! {
        #[test]
        fn round_trip(words in images()) {
            let img = MemImage::new(0, words);
            let text = write_v2raw(&img);
            let back = read_v2raw(&text).unwrap();
            prop_assert_eq!(&back, &img);
            prop_assert_eq!(write_v2raw(&back), text);
        }
    }
}
