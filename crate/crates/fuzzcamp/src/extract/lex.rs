//! Maximal-munch tokenizer for comment-free C source.
//!
//! This is deliberately shallow: enough lexical structure for construct
//! detection, nothing resembling a parser. Literal contents never escape as
//! keyword or punctuator tokens.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    Str,
    CharLit,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unterminated {kind} literal at line {line}, column {col}")]
    UnterminatedLiteral {
        kind: &'static str,
        line: u32,
        col: u32,
    },
    #[error("unexpected character {ch:?} at line {line}, column {col}")]
    UnexpectedCharacter { ch: char, line: u32, col: u32 },
}

const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex", "_Imaginary",
    "__inline", "__inline__", "__volatile", "__volatile__", "__const", "__restrict",
    "__restrict__", "__signed__", "__extension__", "typeof", "__typeof__", "asm", "__asm",
    "__asm__", "__attribute__",
];

// longest first within each group so maximal munch falls out of the scan order
const PUNCT3: &[&str] = &["<<=", ">>=", "..."];
const PUNCT2: &[&str] = &[
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "##",
];
const PUNCT1: &[char] = &[
    '[', ']', '(', ')', '{', '}', '.', '&', '*', '+', '-', '~', '!', '/', '%', '<', '>', '=',
    '^', '|', '?', ':', ';', ',', '#',
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(stripped: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = stripped.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];

        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        // backslash-newline acts as whitespace; we do not splice tokens
        if c == '\\' && i + 1 < chars.len() && chars[i + 1] == '\n' {
            advance!(2);
            continue;
        }
        if c == '\\' && i + 1 < chars.len() && chars[i + 1] == '\r' {
            advance!(2);
            continue;
        }

        let (tok_line, tok_col) = (line, col);

        if is_ident_start(c) {
            let start = i;
            let mut end = i;
            while end < chars.len() && is_ident_continue(chars[end]) {
                end += 1;
            }
            let lexeme: String = chars[start..end].iter().collect();
            let kind = if is_keyword(&lexeme) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            advance!(end - start);
            tokens.push(Token {
                kind,
                lexeme,
                line: tok_line,
                col: tok_col,
            });
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit())
        {
            // pp-number: digits, letters, dots, and exponent signs
            let start = i;
            let mut end = i + 1;
            while end < chars.len() {
                let d = chars[end];
                let continues = d.is_ascii_alphanumeric()
                    || d == '.'
                    || d == '_'
                    || ((d == '+' || d == '-')
                        && matches!(chars[end - 1], 'e' | 'E' | 'p' | 'P'));
                if !continues {
                    break;
                }
                end += 1;
            }
            let lexeme: String = chars[start..end].iter().collect();
            advance!(end - start);
            tokens.push(Token {
                kind: TokenKind::Number,
                lexeme,
                line: tok_line,
                col: tok_col,
            });
            continue;
        }

        if c == '"' || c == '\'' {
            let quote = c;
            let kind_name = if quote == '"' { "string" } else { "character" };
            let start = i;
            let mut end = i + 1;
            let mut closed = false;
            while end < chars.len() {
                let d = chars[end];
                if d == '\\' && end + 1 < chars.len() {
                    end += 2;
                    continue;
                }
                if d == '\n' {
                    break;
                }
                end += 1;
                if d == quote {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(LexError::UnterminatedLiteral {
                    kind: kind_name,
                    line: tok_line,
                    col: tok_col,
                });
            }
            let lexeme: String = chars[start..end].iter().collect();
            advance!(end - start);
            tokens.push(Token {
                kind: if quote == '"' {
                    TokenKind::Str
                } else {
                    TokenKind::CharLit
                },
                lexeme,
                line: tok_line,
                col: tok_col,
            });
            continue;
        }

        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let matched = PUNCT3
            .iter()
            .find(|p| rest.starts_with(**p))
            .or_else(|| PUNCT2.iter().find(|p| rest.starts_with(**p)))
            .map(|p| p.to_string())
            .or_else(|| PUNCT1.contains(&c).then(|| c.to_string()));
        match matched {
            Some(lexeme) => {
                advance!(lexeme.chars().count());
                tokens.push(Token {
                    kind: TokenKind::Punct,
                    lexeme,
                    line: tok_line,
                    col: tok_col,
                });
            }
            None => {
                return Err(LexError::UnexpectedCharacter {
                    ch: c,
                    line: tok_line,
                    col: tok_col,
                });
            }
        }
    }
    Ok(tokens)
}
