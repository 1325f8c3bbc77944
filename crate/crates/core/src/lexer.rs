//! Tokenizer for the `.ctr` contract language.
//!
//! Line-oriented surface syntax with `//` comments, `;` terminators, and a
//! small fixed keyword set. Accepts LF and CRLF input. Every token carries
//! the 1-based line/column of its first character so parse errors can point
//! back into the source.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(Arc<str>),
    Int(i64),
    // keywords
    KwContract,
    KwResources,
    KwService,
    KwGuard,
    KwPre,
    KwEffect,
    KwChoice,
    KwCall,
    KwBlock,
    KwReturn,
    KwProtocol,
    KwBool,
    KwInt,
    KwEnum,
    KwTrue,
    KwFalse,
    KwAnd,
    KwOr,
    KwNot,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Pipe,
    Question,
    Star,
    Bang,
    Plus,
    Minus,
    Arrow,
    DotDot,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    /// Human-readable token name used in "expected ..." error lists.
    pub fn describe(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::KwContract => "`contract`",
            Tok::KwResources => "`resources`",
            Tok::KwService => "`service`",
            Tok::KwGuard => "`guard`",
            Tok::KwPre => "`pre`",
            Tok::KwEffect => "`effect`",
            Tok::KwChoice => "`choice`",
            Tok::KwCall => "`call`",
            Tok::KwBlock => "`block`",
            Tok::KwReturn => "`return`",
            Tok::KwProtocol => "`protocol`",
            Tok::KwBool => "`bool`",
            Tok::KwInt => "`int`",
            Tok::KwEnum => "`enum`",
            Tok::KwTrue => "`true`",
            Tok::KwFalse => "`false`",
            Tok::KwAnd => "`and`",
            Tok::KwOr => "`or`",
            Tok::KwNot => "`not`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Pipe => "`|`",
            Tok::Question => "`?`",
            Tok::Star => "`*`",
            Tok::Bang => "`!`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Arrow => "`->`",
            Tok::DotDot => "`..`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Lexical error with position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "contract" => Tok::KwContract,
        "resources" => Tok::KwResources,
        "service" => Tok::KwService,
        "guard" => Tok::KwGuard,
        "pre" => Tok::KwPre,
        "effect" => Tok::KwEffect,
        "choice" => Tok::KwChoice,
        "call" => Tok::KwCall,
        "block" => Tok::KwBlock,
        "return" => Tok::KwReturn,
        "protocol" => Tok::KwProtocol,
        "bool" => Tok::KwBool,
        "int" => Tok::KwInt,
        "enum" => Tok::KwEnum,
        "true" => Tok::KwTrue,
        "false" => Tok::KwFalse,
        "and" => Tok::KwAnd,
        "or" => Tok::KwOr,
        "not" => Tok::KwNot,
        _ => return None,
    })
}

/// Tokenize full source text. The returned stream always ends with `Eof`.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(Token { tok: $tok, pos: $pos })
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' => {
                push!(Tok::LBrace, pos);
                i += 1;
                col += 1;
            }
            b'}' => {
                push!(Tok::RBrace, pos);
                i += 1;
                col += 1;
            }
            b'(' => {
                push!(Tok::LParen, pos);
                i += 1;
                col += 1;
            }
            b')' => {
                push!(Tok::RParen, pos);
                i += 1;
                col += 1;
            }
            b'[' => {
                push!(Tok::LBracket, pos);
                i += 1;
                col += 1;
            }
            b']' => {
                push!(Tok::RBracket, pos);
                i += 1;
                col += 1;
            }
            b':' => {
                push!(Tok::Colon, pos);
                i += 1;
                col += 1;
            }
            b';' => {
                push!(Tok::Semi, pos);
                i += 1;
                col += 1;
            }
            b',' => {
                push!(Tok::Comma, pos);
                i += 1;
                col += 1;
            }
            b'|' => {
                push!(Tok::Pipe, pos);
                i += 1;
                col += 1;
            }
            b'?' => {
                push!(Tok::Question, pos);
                i += 1;
                col += 1;
            }
            b'*' => {
                push!(Tok::Star, pos);
                i += 1;
                col += 1;
            }
            b'+' => {
                push!(Tok::Plus, pos);
                i += 1;
                col += 1;
            }
            b'-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    push!(Tok::Arrow, pos);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Minus, pos);
                    i += 1;
                    col += 1;
                }
            }
            b'.' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'.' {
                    push!(Tok::DotDot, pos);
                    i += 2;
                    col += 2;
                } else {
                    return Err(LexError { pos, message: String::from("unexpected `.`") });
                }
            }
            b'=' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::EqEq, pos);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Assign, pos);
                    i += 1;
                    col += 1;
                }
            }
            b'!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::NotEq, pos);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Bang, pos);
                    i += 1;
                    col += 1;
                }
            }
            b'<' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::Le, pos);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Lt, pos);
                    i += 1;
                    col += 1;
                }
            }
            b'>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::Ge, pos);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Gt, pos);
                    i += 1;
                    col += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &source[start..i];
                let n: i64 = text.parse().map_err(|_| LexError {
                    pos,
                    message: String::from("integer literal out of range"),
                })?;
                col += (i - start) as u32;
                push!(Tok::Int(n), pos);
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let text = &source[start..i];
                col += (i - start) as u32;
                match keyword(text) {
                    Some(kw) => push!(kw, pos),
                    None => push!(Tok::Ident(Arc::from(text)), pos),
                }
            }
            _ => {
                return Err(LexError {
                    pos,
                    message: alloc::format!("unexpected character `{}`", c as char),
                });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_punctuation_and_idents() {
        let toks = lex("contract C { x: int[0..3] = 1; }").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert!(matches!(kinds[0], Tok::KwContract));
        assert!(matches!(kinds[1], Tok::Ident(s) if &**s == "C"));
        assert!(kinds.contains(&&Tok::DotDot));
        assert!(matches!(kinds.last().unwrap(), Tok::Eof));
    }

    #[test]
    fn distinguishes_assign_eq_and_bang() {
        let toks = lex("= == ! != -> -").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            alloc::vec![Tok::Assign, Tok::EqEq, Tok::Bang, Tok::NotEq, Tok::Arrow, Tok::Minus, Tok::Eof]
        );
    }

    #[test]
    fn comments_and_crlf() {
        let toks = lex("// header\r\ncontract // trailing\r\nC").unwrap();
        assert!(matches!(toks[0].tok, Tok::KwContract));
        assert_eq!(toks[0].pos.line, 2);
        assert!(matches!(toks[1].tok, Tok::Ident(_)));
        assert_eq!(toks[1].pos.line, 3);
    }

    #[test]
    fn positions_are_one_based() {
        let toks = lex("contract").unwrap();
        assert_eq!(toks[0].pos, Pos { line: 1, col: 1 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("contract C @").unwrap_err();
        assert_eq!(err.pos.line, 1);
        assert_eq!(err.pos.col, 12);
    }
}
