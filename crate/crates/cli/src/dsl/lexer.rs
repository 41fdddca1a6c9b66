use crate::error::DslError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: &str = "=[](),+-*/^";

/// Splits `text` into tokens. Newlines inside brackets or parentheses are
/// dropped so matrices may span several lines; `#` starts a comment.
pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut depth: i32 = 0;
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: lineno + 1,
                col: i + 1,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v: f64 = lit.parse().map_err(|_| DslError::Parse {
                    line: pos.line,
                    col: pos.col,
                    expected: vec!["number".into()],
                    found: format!("`{lit}`"),
                })?;
                out.push(Token { tok: Tok::Num(v), pos });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    pos,
                });
                continue;
            }
            if SYMBOLS.contains(c) {
                match c {
                    '(' | '[' => depth += 1,
                    ')' | ']' => depth -= 1,
                    _ => {}
                }
                out.push(Token { tok: Tok::Sym(c), pos });
                i += 1;
                continue;
            }
            return Err(DslError::Parse {
                line: pos.line,
                col: pos.col,
                expected: vec!["expression".into()],
                found: format!("`{c}`"),
            });
        }
        if depth <= 0 {
            out.push(Token {
                tok: Tok::Newline,
                pos: Pos {
                    line: lineno + 1,
                    col: chars.len() + 1,
                },
            });
        }
    }
    let last = text.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line: last + 1, col: 1 },
    });
    Ok(out)
}
