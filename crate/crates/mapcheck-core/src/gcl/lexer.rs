//! GCL tokenizer. `#` starts a comment running to end of line.

use super::ast::Pos;
use super::GclError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    KwVar,
    KwProc,
    KwAccept,
    Colon,
    DotDot,
    Assign, // :=
    Eq,     // =
    Semi,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Arrow, // ->
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::KwVar => "`var`".into(),
            Tok::KwProc => "`proc`".into(),
            Tok::KwAccept => "`accept`".into(),
            Tok::Colon => "`:`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Percent => "`%`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.chars.next()?;
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }
}

pub fn lex(text: &str) -> Result<Vec<Spanned>, GclError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        while let Some(ch) = cur.peek() {
            if ch == '#' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else if ch.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let pos = cur.pos();
        let Some(ch) = cur.peek() else {
            out.push(Spanned { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if ch.is_ascii_alphabetic() || ch == '_' {
            let mut name = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    name.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match name.as_str() {
                "var" => Tok::KwVar,
                "proc" => Tok::KwProc,
                "accept" => Tok::KwAccept,
                _ => Tok::Ident(name),
            }
        } else if ch.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let value: i64 = digits.parse().map_err(|_| GclError::Lexical {
                pos,
                message: format!("integer literal `{digits}` out of range"),
            })?;
            Tok::Int(value)
        } else {
            cur.bump();
            match ch {
                ':' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::Assign
                    } else {
                        Tok::Colon
                    }
                }
                '.' => {
                    if cur.peek() == Some('.') {
                        cur.bump();
                        Tok::DotDot
                    } else {
                        return Err(GclError::Lexical {
                            pos,
                            message: "stray `.` (did you mean `..`?)".into(),
                        });
                    }
                }
                '=' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::EqEq
                    } else {
                        Tok::Eq
                    }
                }
                '!' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::Ne
                    } else {
                        Tok::Bang
                    }
                }
                '<' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                '>' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                '&' => {
                    if cur.peek() == Some('&') {
                        cur.bump();
                        Tok::AndAnd
                    } else {
                        return Err(GclError::Lexical {
                            pos,
                            message: "stray `&` (did you mean `&&`?)".into(),
                        });
                    }
                }
                '|' => {
                    if cur.peek() == Some('|') {
                        cur.bump();
                        Tok::OrOr
                    } else {
                        return Err(GclError::Lexical {
                            pos,
                            message: "stray `|` (did you mean `||`?)".into(),
                        });
                    }
                }
                '-' => {
                    if cur.peek() == Some('>') {
                        cur.bump();
                        Tok::Arrow
                    } else {
                        Tok::Minus
                    }
                }
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '%' => Tok::Percent,
                other => {
                    return Err(GclError::Lexical {
                        pos,
                        message: format!("unexpected character `{other}`"),
                    });
                }
            }
        };
        out.push(Spanned { tok, pos });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_minimal_model() {
        let toks = lex("var x:0..1=0;").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|s| &s.tok).collect();
        assert!(matches!(kinds[0], Tok::KwVar));
        assert!(matches!(kinds[1], Tok::Ident(n) if n == "x"));
        assert!(matches!(kinds[2], Tok::Colon));
        assert!(matches!(kinds[3], Tok::Int(0)));
        assert!(matches!(kinds[4], Tok::DotDot));
    }

    #[test]
    fn tracks_positions_across_lines() {
        let toks = lex("var x: 0..1 = 0;\nproc P { x == 0 -> x := 1 }").unwrap();
        let proc_tok = toks.iter().find(|s| s.tok == Tok::KwProc).unwrap();
        assert_eq!((proc_tok.pos.line, proc_tok.pos.col), (2, 1));
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let toks = lex("# header\nvar x: 0..1 = 0; # tail\n").unwrap();
        assert!(matches!(toks[0].tok, Tok::KwVar));
        assert_eq!(toks[0].pos.line, 2);
    }

    #[test]
    fn reports_bad_character_position() {
        let err = lex("var x: 0..1 = 0;\n  $").unwrap_err();
        match err {
            GclError::Lexical { pos, .. } => assert_eq!((pos.line, pos.col), (2, 3)),
            other => panic!("expected lexical error, got {other}"),
        }
    }

    #[test]
    fn distinguishes_assign_from_colon_and_eq() {
        let toks = lex("x := 1 = 2 == 3").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|s| &s.tok).collect();
        assert!(matches!(kinds[1], Tok::Assign));
        assert!(matches!(kinds[3], Tok::Eq));
        assert!(matches!(kinds[5], Tok::EqEq));
    }
}
