use super::ast::{Diagnostic, Pos, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number { value: f64, is_int: bool },
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    /// Text after `#`, up to end of line.
    Comment(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        let tok = match c {
            ' ' | '\t' | '\r' | '\n' => {
                cur.bump();
                continue;
            }
            '#' => {
                cur.bump();
                let mut text = String::new();
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    text.push(c);
                    cur.bump();
                }
                Tok::Comment(text)
            }
            '(' | ')' | '[' | ']' | ',' | '=' => {
                cur.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    _ => Tok::Eq,
                }
            }
            '"' => {
                cur.bump();
                let mut text = String::new();
                loop {
                    match cur.bump() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(Diagnostic::error(
                                Span { start, end: cur.pos() },
                                "unterminated string literal",
                            ))
                        }
                        Some(c) => text.push(c),
                    }
                }
                Tok::Str(text)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => lex_number(&mut cur, start)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(text)
            }
            other => {
                cur.bump();
                return Err(Diagnostic::error(
                    Span { start, end: cur.pos() },
                    format!("unexpected character {other:?}"),
                ));
            }
        };
        out.push(Token {
            tok,
            span: Span { start, end: cur.pos() },
        });
    }
    Ok(out)
}

fn lex_number(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, Diagnostic> {
    let mut text = String::new();
    let mut is_int = true;
    if let Some(c @ ('-' | '+')) = cur.peek() {
        text.push(c);
        cur.bump();
    }
    let mut digits = 0;
    while let Some(c) = cur.peek() {
        match c {
            '0'..='9' => digits += 1,
            '.' => is_int = false,
            'e' | 'E' => {
                is_int = false;
                text.push(c);
                cur.bump();
                if let Some(s @ ('-' | '+')) = cur.peek() {
                    text.push(s);
                    cur.bump();
                }
                continue;
            }
            _ => break,
        }
        text.push(c);
        cur.bump();
    }
    let bad = || {
        Diagnostic::error(
            Span {
                start,
                end: Pos {
                    line: start.line,
                    column: start.column + text.chars().count(),
                },
            },
            format!("malformed number `{text}`"),
        )
    };
    if digits == 0 {
        return Err(bad());
    }
    let value: f64 = text.parse().map_err(|_| bad())?;
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(Tok::Number { value, is_int })
}
