//! Text ingestion: one point per line as whitespace-separated `index:value`
//! tokens with ascending indices. Parsing streams line by line, holding one
//! record in memory at a time; malformed lines carry their line number so a
//! caller can fail fast or skip and count.

use std::fmt;
use std::io::BufRead;

use crate::point::SparsePoint;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Token lacks the `index:value` shape.
    MissingColon(String),
    BadIndex(String),
    BadValue(String),
    NonFinite(String),
    ZeroValue(String),
    UnsortedIndex { index: u32 },
    IndexOutOfRange { index: u32, dim: u32 },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingColon(tok) => write!(f, "token `{tok}` is not index:value"),
            ParseErrorKind::BadIndex(tok) => write!(f, "bad coordinate index in `{tok}`"),
            ParseErrorKind::BadValue(tok) => write!(f, "bad coordinate value in `{tok}`"),
            ParseErrorKind::NonFinite(tok) => write!(f, "non-finite value in `{tok}`"),
            ParseErrorKind::ZeroValue(tok) => write!(f, "zero value in `{tok}` must be omitted"),
            ParseErrorKind::UnsortedIndex { index } => {
                write!(f, "index {index} breaks ascending order")
            }
            ParseErrorKind::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimensionality {dim}")
            }
        }
    }
}

#[derive(Debug)]
pub struct IngestError {
    pub line: usize,
    pub kind: IngestErrorKind,
}

#[derive(Debug)]
pub enum IngestErrorKind {
    Parse(ParseErrorKind),
    Io(std::io::Error),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            IngestErrorKind::Parse(kind) => write!(f, "line {}: {kind}", self.line),
            IngestErrorKind::Io(e) => write!(f, "line {}: io error: {e}", self.line),
        }
    }
}

impl std::error::Error for IngestError {}

/// Parses one text line into a point. Values are read at 32-bit precision,
/// which is the precision every stored point carries anyway. An empty line
/// is the empty point.
pub fn parse_point(line: &str, dim: Option<u32>) -> Result<SparsePoint, ParseErrorKind> {
    let mut keys: Vec<u32> = Vec::new();
    let mut vals: Vec<f32> = Vec::new();
    for tok in line.split_whitespace() {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| ParseErrorKind::MissingColon(tok.to_string()))?;
        let index: u32 = idx
            .parse()
            .map_err(|_| ParseErrorKind::BadIndex(tok.to_string()))?;
        let value: f32 = val
            .parse()
            .map_err(|_| ParseErrorKind::BadValue(tok.to_string()))?;
        if !value.is_finite() {
            return Err(ParseErrorKind::NonFinite(tok.to_string()));
        }
        if value == 0.0 {
            return Err(ParseErrorKind::ZeroValue(tok.to_string()));
        }
        if let Some(d) = dim {
            if index >= d {
                return Err(ParseErrorKind::IndexOutOfRange { index, dim: d });
            }
        }
        if keys.last().is_some_and(|&prev| prev >= index) {
            return Err(ParseErrorKind::UnsortedIndex { index });
        }
        keys.push(index);
        vals.push(value);
    }
    Ok(SparsePoint::from_sorted_unchecked(keys, vals))
}

/// Streaming reader over a point file; yields one point (or one error with
/// its line number) per line.
pub struct PointReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    dim: Option<u32>,
}

impl<R: BufRead> PointReader<R> {
    pub fn new(reader: R, dim: Option<u32>) -> Self {
        PointReader { lines: reader.lines(), line_no: 0, dim }
    }
}

impl<R: BufRead> Iterator for PointReader<R> {
    type Item = Result<SparsePoint, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(match line {
            Ok(text) => parse_point(&text, self.dim)
                .map_err(|kind| IngestError { line: self.line_no, kind: IngestErrorKind::Parse(kind) }),
            Err(e) => Err(IngestError { line: self.line_no, kind: IngestErrorKind::Io(e) }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(pairs: &[(u32, f32)]) -> SparsePoint {
        SparsePoint::from_pairs(pairs.to_vec()).unwrap()
    }

    #[test]
    fn parses_the_documented_format() {
        assert_eq!(parse_point("0:1.5 7:-2", None).unwrap(), pt(&[(0, 1.5), (7, -2.0)]));
        assert!(parse_point("", None).unwrap().is_empty());
        assert!(parse_point("   ", None).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_tokens() {
        assert!(matches!(parse_point("7:0", None), Err(ParseErrorKind::ZeroValue(_))));
        assert!(matches!(parse_point("abc", None), Err(ParseErrorKind::MissingColon(_))));
        assert!(matches!(parse_point("x:1", None), Err(ParseErrorKind::BadIndex(_))));
        assert!(matches!(parse_point("1:x", None), Err(ParseErrorKind::BadValue(_))));
        assert!(matches!(parse_point("1:inf", None), Err(ParseErrorKind::NonFinite(_))));
        assert!(matches!(
            parse_point("5:1 3:1", None),
            Err(ParseErrorKind::UnsortedIndex { index: 3 })
        ));
        assert!(matches!(
            parse_point("5:1 5:2", None),
            Err(ParseErrorKind::UnsortedIndex { index: 5 })
        ));
        assert!(matches!(
            parse_point("1024:1", Some(1024)),
            Err(ParseErrorKind::IndexOutOfRange { index: 1024, dim: 1024 })
        ));
    }

    #[test]
    fn reader_reports_line_numbers() {
        let data = "0:1\n1:bad\n2:3\n";
        let mut reader = PointReader::new(data.as_bytes(), None);
        assert!(reader.next().unwrap().is_ok());
        let err = reader.next().unwrap().unwrap_err();
        assert_eq!(err.line, 2);
        assert!(reader.next().unwrap().is_ok());
        assert!(reader.next().is_none());
    }

    #[test]
    fn streams_a_large_synthetic_source_without_buffering_it() {
        // A reader that fabricates one million lines on the fly; the point
        // reader must consume it record by record.
        struct Gen {
            next: usize,
            buf: Vec<u8>,
            at: usize,
        }
        impl std::io::Read for Gen {
            fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
                if self.at == self.buf.len() {
                    if self.next == 1_000_000 {
                        return Ok(0);
                    }
                    self.buf = format!("{}:1 {}:2\n", self.next % 512, 512 + self.next % 512)
                        .into_bytes();
                    self.at = 0;
                    self.next += 1;
                }
                let n = out.len().min(self.buf.len() - self.at);
                out[..n].copy_from_slice(&self.buf[self.at..self.at + n]);
                self.at += n;
                Ok(n)
            }
        }

        let gen = Gen { next: 0, buf: Vec::new(), at: 0 };
        let reader = PointReader::new(std::io::BufReader::new(gen), Some(1024));
        let mut count = 0usize;
        let mut nnz = 0usize;
        for p in reader {
            let p = p.unwrap();
            count += 1;
            nnz += p.nnz();
        }
        assert_eq!(count, 1_000_000);
        assert_eq!(nnz, 2_000_000);
    }
}
