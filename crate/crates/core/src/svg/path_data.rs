//! Tokenizer and grammar for the SVG path `d` attribute.

use thiserror::Error;

/// A path command as written, before relative/shorthand lowering.
///
/// `args` holds one or more argument groups for implicit repetition
/// (`L 1 2 3 4` is a single `L` with two groups).
#[derive(Clone, Debug, PartialEq)]
pub struct RawCommand {
    pub letter: char,
    pub args: Vec<f64>,
}

impl RawCommand {
    pub fn new(letter: char, args: Vec<f64>) -> Self {
        RawCommand { letter, args }
    }

    pub fn is_relative(&self) -> bool {
        self.letter.is_ascii_lowercase()
    }

    /// Iterates argument groups of `arity(letter)` numbers each.
    pub fn groups(&self) -> impl Iterator<Item = &[f64]> {
        let n = arity(self.letter).unwrap_or(0);
        let chunk = n.max(1);
        let count = if n == 0 { 1 } else { self.args.len() / n };
        (0..count).map(move |i| {
            if n == 0 {
                &self.args[0..0]
            } else {
                &self.args[i * chunk..(i + 1) * chunk]
            }
        })
    }
}

/// Number of arguments per group, `None` for letters outside the grammar.
pub fn arity(letter: char) -> Option<usize> {
    match letter.to_ascii_uppercase() {
        'M' | 'L' | 'T' => Some(2),
        'H' | 'V' => Some(1),
        'C' => Some(6),
        'S' | 'Q' => Some(4),
        'A' => Some(7),
        'Z' => Some(0),
        _ => None,
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PathDataError {
    #[error("missing coordinate at byte {offset}")]
    MissingCoordinate { offset: usize },
    #[error("unknown command letter '{letter}' at byte {offset}")]
    UnknownLetter { letter: char, offset: usize },
    #[error("non-finite number at byte {offset}")]
    NonFiniteNumber { offset: usize },
    #[error("arc flag must be 0 or 1 at byte {offset}")]
    BadArcFlag { offset: usize },
    #[error("expected a command letter at byte {offset}")]
    ExpectedCommand { offset: usize },
}

impl PathDataError {
    pub fn offset(&self) -> usize {
        match *self {
            PathDataError::MissingCoordinate { offset }
            | PathDataError::UnknownLetter { offset, .. }
            | PathDataError::NonFiniteNumber { offset }
            | PathDataError::BadArcFlag { offset }
            | PathDataError::ExpectedCommand { offset } => offset,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r' | b'\x0c')) {
            self.pos += 1;
        }
    }

    fn skip_separator(&mut self) {
        self.skip_whitespace();
        if self.peek() == Some(b',') {
            self.pos += 1;
            self.skip_whitespace();
        }
    }

    fn at_number_start(&self) -> bool {
        matches!(self.peek(), Some(b'0'..=b'9' | b'+' | b'-' | b'.'))
    }

    /// Scans `[sign] digits [. digits] [e [sign] digits]`; `None` when no digits.
    fn scan_number(&mut self) -> Option<(usize, usize)> {
        let start = self.pos;
        let mut i = self.pos;
        let b = self.bytes;
        if matches!(b.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let int_start = i;
        while matches!(b.get(i), Some(b'0'..=b'9')) {
            i += 1;
        }
        let mut digits = i - int_start;
        if b.get(i) == Some(&b'.') {
            let frac_start = i + 1;
            let mut j = frac_start;
            while matches!(b.get(j), Some(b'0'..=b'9')) {
                j += 1;
            }
            digits += j - frac_start;
            i = j;
        }
        if digits == 0 {
            return None;
        }
        if matches!(b.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(b.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            let exp_start = j;
            while matches!(b.get(j), Some(b'0'..=b'9')) {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        self.pos = i;
        Some((start, i))
    }

    fn number(&mut self) -> Result<f64, PathDataError> {
        self.skip_separator();
        let offset = self.pos;
        let (start, end) = self
            .scan_number()
            .ok_or(PathDataError::MissingCoordinate { offset })?;
        let value: f64 = self.text[start..end]
            .parse()
            .map_err(|_| PathDataError::MissingCoordinate { offset })?;
        if !value.is_finite() {
            return Err(PathDataError::NonFiniteNumber { offset });
        }
        Ok(value)
    }

    fn flag(&mut self) -> Result<f64, PathDataError> {
        self.skip_separator();
        let offset = self.pos;
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(0.0)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(1.0)
            }
            None => Err(PathDataError::MissingCoordinate { offset }),
            Some(c) if c.is_ascii_alphabetic() => Err(PathDataError::MissingCoordinate { offset }),
            Some(_) => Err(PathDataError::BadArcFlag { offset }),
        }
    }
}

/// Parses a path `d` attribute into commands, preserving letters and order.
pub fn parse_path_data(text: &str) -> Result<Vec<RawCommand>, PathDataError> {
    let mut cur = Cursor {
        bytes: text.as_bytes(),
        text,
        pos: 0,
    };
    let mut out = Vec::new();
    loop {
        cur.skip_whitespace();
        let Some(byte) = cur.peek() else { break };
        let offset = cur.pos;
        if !byte.is_ascii_alphabetic() {
            return Err(PathDataError::ExpectedCommand { offset });
        }
        let letter = byte as char;
        let n = arity(letter).ok_or(PathDataError::UnknownLetter { letter, offset })?;
        cur.pos += 1;
        let mut args = Vec::new();
        if n > 0 {
            loop {
                for i in 0..n {
                    let is_flag = letter.eq_ignore_ascii_case(&'a') && (i == 3 || i == 4);
                    args.push(if is_flag { cur.flag()? } else { cur.number()? });
                }
                cur.skip_separator();
                if !cur.at_number_start() {
                    break;
                }
            }
        }
        out.push(RawCommand { letter, args });
    }
    Ok(out)
}
