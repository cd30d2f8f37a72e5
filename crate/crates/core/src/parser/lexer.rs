//! Tokenizer for the BC+ input language. `%` starts a comment running to the
//! end of the line.

use crate::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case initial identifier.
    LIdent(String),
    /// Upper-case initial identifier (a schematic variable).
    UIdent(String),
    Int(i64),
    SectionIntro, // :-
    DoubleColon,  // ::
    Colon,
    Semi,
    Comma,
    Period,
    DotDot,
    LParen,
    RParen,
    Amp,
    Pipe,
    Arrow,   // ->
    Tilde,
    Eq,
    Neq, // \=
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    SlashSlash,
    Supersort, // >>
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub pos: Pos,
}

pub fn lex(text: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            tokens.push(Token {
                tok: $tok,
                pos: $pos,
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        let mut advance = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                advance(&mut i, &mut col, 1);
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                push!(Tok::LParen, pos);
                advance(&mut i, &mut col, 1);
            }
            ')' => {
                push!(Tok::RParen, pos);
                advance(&mut i, &mut col, 1);
            }
            ';' => {
                push!(Tok::Semi, pos);
                advance(&mut i, &mut col, 1);
            }
            ',' => {
                push!(Tok::Comma, pos);
                advance(&mut i, &mut col, 1);
            }
            '&' => {
                push!(Tok::Amp, pos);
                advance(&mut i, &mut col, 1);
            }
            '|' => {
                push!(Tok::Pipe, pos);
                advance(&mut i, &mut col, 1);
            }
            '~' => {
                push!(Tok::Tilde, pos);
                advance(&mut i, &mut col, 1);
            }
            '=' => {
                push!(Tok::Eq, pos);
                advance(&mut i, &mut col, 1);
            }
            '+' => {
                push!(Tok::Plus, pos);
                advance(&mut i, &mut col, 1);
            }
            '*' => {
                push!(Tok::Star, pos);
                advance(&mut i, &mut col, 1);
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push!(Tok::DotDot, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Period, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push!(Tok::SectionIntro, pos);
                    advance(&mut i, &mut col, 2);
                } else if chars.get(i + 1) == Some(&':') {
                    push!(Tok::DoubleColon, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Colon, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push!(Tok::Arrow, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Minus, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '\\' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Neq, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    errors.push(LexError {
                        message: "stray '\\' (expected '\\=')".to_string(),
                        pos,
                    });
                    advance(&mut i, &mut col, 1);
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Le, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Lt, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Ge, pos);
                    advance(&mut i, &mut col, 2);
                } else if chars.get(i + 1) == Some(&'>') {
                    push!(Tok::Supersort, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Gt, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '/' => {
                if chars.get(i + 1) == Some(&'/') {
                    push!(Tok::SlashSlash, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    errors.push(LexError {
                        message: "stray '/' (floor division is '//')".to_string(),
                        pos,
                    });
                    advance(&mut i, &mut col, 1);
                }
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                match text.parse::<i64>() {
                    Ok(n) => push!(Tok::Int(n), pos),
                    Err(_) => errors.push(LexError {
                        message: format!("integer literal out of range: {text}"),
                        pos,
                    }),
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                if c.is_ascii_uppercase() {
                    push!(Tok::UIdent(text), pos);
                } else {
                    push!(Tok::LIdent(text), pos);
                }
            }
            _ => {
                errors.push(LexError {
                    message: format!("unexpected character: {c:?}"),
                    pos,
                });
                advance(&mut i, &mut col, 1);
            }
        }
    }
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_declaration_line() {
        let (toks, errs) = lex("loc(block) :: inertialFluent(loc);");
        assert!(errs.is_empty());
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert!(matches!(kinds[0], Tok::LIdent(s) if s == "loc"));
        assert!(kinds.contains(&&Tok::DoubleColon));
        assert!(kinds.contains(&&Tok::Semi));
    }

    #[test]
    fn neq_is_a_single_token() {
        let (toks, errs) = lex("B1\\=B2");
        assert!(errs.is_empty());
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[1].tok, Tok::Neq);
    }

    #[test]
    fn range_does_not_eat_period() {
        let (toks, _) = lex("0..10 :: integer.");
        assert_eq!(toks[0].tok, Tok::Int(0));
        assert_eq!(toks[1].tok, Tok::DotDot);
        assert_eq!(toks[2].tok, Tok::Int(10));
        assert_eq!(toks.last().unwrap().tok, Tok::Period);
    }

    #[test]
    fn comments_are_skipped() {
        let (toks, _) = lex("p. % this is a comment\nq.");
        assert_eq!(toks.len(), 4);
        assert_eq!(toks[2].pos.line, 2);
    }

    #[test]
    fn positions_track_lines_and_columns() {
        let (toks, _) = lex("ab\n  cd");
        assert_eq!(toks[0].pos, Pos::new(1, 1));
        assert_eq!(toks[1].pos, Pos::new(2, 3));
    }
}
