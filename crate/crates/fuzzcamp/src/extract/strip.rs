//! Comment removal that keeps line numbers and literals intact.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unterminated block comment starting at line {line}, column {col}")]
pub struct UnterminatedComment {
    pub line: u32,
    pub col: u32,
}

/// Removes `/* */` and `//` comments.
///
/// A block comment becomes a single space followed by the newlines it
/// contained, so token separation and line numbering both survive. A line
/// comment is deleted outright; its terminating newline is kept. String and
/// character literals pass through verbatim, including comment-looking
/// content inside them. A literal left open at the end of a line stops being
/// treated as a literal there; the tokenizer reports that case later.
pub fn strip_comments(text: &str) -> Result<String, UnterminatedComment> {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    let bump = |b: u8, line: &mut u32, col: &mut u32| {
        if b == b'\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                let (start_line, start_col) = (line, col);
                bump(b'/', &mut line, &mut col);
                bump(b'*', &mut line, &mut col);
                i += 2;
                let mut newlines = 0u32;
                let mut closed = false;
                while i < bytes.len() {
                    if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                        bump(b'*', &mut line, &mut col);
                        bump(b'/', &mut line, &mut col);
                        i += 2;
                        closed = true;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        newlines += 1;
                    }
                    bump(bytes[i], &mut line, &mut col);
                    i += 1;
                }
                if !closed {
                    return Err(UnterminatedComment {
                        line: start_line,
                        col: start_col,
                    });
                }
                out.push(' ');
                for _ in 0..newlines {
                    out.push('\n');
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    bump(bytes[i], &mut line, &mut col);
                    i += 1;
                }
                // newline itself is copied by the outer loop
            }
            b'"' | b'\'' => {
                let quote = b;
                out.push(b as char);
                bump(b, &mut line, &mut col);
                i += 1;
                while i < bytes.len() {
                    let c = bytes[i];
                    if c == b'\\' && i + 1 < bytes.len() {
                        out.push(c as char);
                        out.push(bytes[i + 1] as char);
                        bump(c, &mut line, &mut col);
                        bump(bytes[i + 1], &mut line, &mut col);
                        i += 2;
                        continue;
                    }
                    if c == b'\n' {
                        // unterminated at end of line; resume normal scanning
                        break;
                    }
                    out.push(c as char);
                    bump(c, &mut line, &mut col);
                    i += 1;
                    if c == quote {
                        break;
                    }
                }
            }
            _ => {
                // copy one UTF-8 scalar worth of bytes
                let ch_len = utf8_len(b);
                let end = (i + ch_len).min(bytes.len());
                out.push_str(&text[i..end]);
                for &cb in &bytes[i..end] {
                    bump(cb, &mut line, &mut col);
                }
                i = end;
            }
        }
    }
    Ok(out)
}

fn utf8_len(first: u8) -> usize {
    match first {
        b if b & 0x80 == 0 => 1,
        b if b & 0xE0 == 0xC0 => 2,
        b if b & 0xF0 == 0xE0 => 3,
        _ if first & 0xF8 == 0xF0 => 4,
        _ => 1,
    }
}
