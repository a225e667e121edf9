//! Tokens of the model syntax.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// A token with its 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 17] = [
    "=>", "?", "~", "$", ".", "|", "(", ")", "[", "]", "{", "}", "^", "@", ":", ";", ",",
];

/// Splits `text` into tokens; `=` on its own is also a symbol.
pub fn tokenize(text: &str) -> Result<Vec<Spanned>, (usize, usize, char)> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            out.push(Spanned {
                tok: Tok::Ident(word.to_string()),
                line,
                col,
            });
            col += word.len();
            continue;
        }
        let rest = &text[i..];
        let sym = SYMBOLS
            .iter()
            .find(|s| rest.starts_with(**s))
            .copied()
            .or(if c == '=' { Some("=") } else { None });
        match sym {
            Some(s) => {
                out.push(Spanned {
                    tok: Tok::Sym(s),
                    line,
                    col,
                });
                for _ in 0..s.len() {
                    chars.next();
                }
                col += s.len();
            }
            None => return Err((line, col, c)),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
