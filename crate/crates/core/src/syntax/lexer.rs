use std::fmt;

use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    StrLiteral,
    Operator,
    Punctuation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, lexeme: &str) -> bool {
        self.lexeme == lexeme && self.kind != TokenKind::StrLiteral
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexeme)
    }
}

pub const KEYWORDS: &[&str] = &[
    "int", "bool", "str", "void", "if", "else", "for", "while", "return", "break", "continue",
    "true", "false",
];

// Longest first so maximal munch is a prefix scan.
const OPERATORS: &[&str] = &[
    "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||", "+", "-", "*",
    "/", "%", "<", ">", "=", "!", "?", ":",
];

const PUNCTUATION: &[u8] = b"(){}[];,";

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Tokenizes MiniLang source. Comments and whitespace are dropped.
pub fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let b = bytes[pos];
        if b.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if text[pos..].starts_with("//") {
            pos = text[pos..].find('\n').map_or(bytes.len(), |n| pos + n);
            continue;
        }
        if text[pos..].starts_with("/*") {
            match text[pos + 2..].find("*/") {
                Some(n) => pos += n + 4,
                None => {
                    return Err(SyntaxError::Lex {
                        offset: pos,
                        message: "unterminated block comment".into(),
                    })
                }
            }
            continue;
        }

        let start = pos;
        let kind = if b.is_ascii_alphabetic() || b == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            if is_keyword(&text[start..pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if b.is_ascii_digit() {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < bytes.len() && (bytes[pos].is_ascii_alphabetic() || bytes[pos] == b'_') {
                return Err(SyntaxError::Lex {
                    offset: start,
                    message: format!("malformed integer literal starting `{}`", &text[start..=pos]),
                });
            }
            if text[start..pos].parse::<i64>().is_err() {
                return Err(SyntaxError::Lex {
                    offset: start,
                    message: "integer literal out of range".into(),
                });
            }
            TokenKind::IntLiteral
        } else if b == b'"' {
            pos += 1;
            loop {
                match bytes.get(pos) {
                    None | Some(b'\n') => {
                        return Err(SyntaxError::Lex {
                            offset: start,
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some(b'"') => {
                        pos += 1;
                        break;
                    }
                    Some(b'\\') => match bytes.get(pos + 1) {
                        Some(b'"' | b'\\' | b'n' | b't') => pos += 2,
                        _ => {
                            return Err(SyntaxError::Lex {
                                offset: pos,
                                message: "unknown escape sequence".into(),
                            })
                        }
                    },
                    Some(c) if c.is_ascii() && !c.is_ascii_control() => pos += 1,
                    Some(_) => {
                        return Err(SyntaxError::Lex {
                            offset: pos,
                            message: "non-ASCII character in string literal".into(),
                        })
                    }
                }
            }
            TokenKind::StrLiteral
        } else if PUNCTUATION.contains(&b) {
            pos += 1;
            TokenKind::Punctuation
        } else if let Some(op) = OPERATORS.iter().find(|op| text[pos..].starts_with(**op)) {
            pos += op.len();
            TokenKind::Operator
        } else {
            let ch = text[pos..].chars().next().unwrap_or('?');
            return Err(SyntaxError::Lex {
                offset: pos,
                message: format!("unexpected character `{ch}`"),
            });
        };

        tokens.push(Token {
            kind,
            lexeme: text[start..pos].to_string(),
            span: Span::new(start, pos),
        });
    }
    Ok(tokens)
}

/// Source form of a string value, with quotes and escapes.
pub fn quote_str(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for ch in value.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Decodes a string literal lexeme (including quotes).
pub fn unquote_str(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(text: &str) -> Vec<String> {
        lex(text).unwrap().into_iter().map(|t| t.lexeme).collect()
    }

    #[test]
    fn maximal_munch_prefers_increment() {
        let toks = lex("i++").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].kind, TokenKind::Identifier);
        assert_eq!(toks[1].lexeme, "++");
        assert_eq!(toks[1].kind, TokenKind::Operator);
    }

    #[test]
    fn empty_for_header_splits_punctuation() {
        assert_eq!(lexemes("for(;;)"), ["for", "(", ";", ";", ")"]);
        assert_eq!(lex("for(;;)").unwrap()[0].kind, TokenKind::Keyword);
    }

    #[test]
    fn hex_prefix_is_rejected_at_literal_offset() {
        let err = lex("int x = 0x;").unwrap_err();
        assert!(matches!(err, SyntaxError::Lex { offset: 8, .. }), "{err:?}");
    }

    #[test]
    fn comments_and_whitespace_dropped() {
        assert_eq!(lexemes("a /* b */ = // c\n d;"), ["a", "=", "d", ";"]);
    }

    #[test]
    fn unknown_character_reports_offset() {
        assert!(matches!(lex("x = y @ z;"), Err(SyntaxError::Lex { offset: 6, .. })));
        assert!(matches!(lex("x = 1.5;"), Err(SyntaxError::Lex { offset: 5, .. })));
    }

    #[test]
    fn string_literals_keep_escapes() {
        let toks = lex(r#"s = "a\"b";"#).unwrap();
        assert_eq!(toks[2].kind, TokenKind::StrLiteral);
        assert_eq!(unquote_str(&toks[2].lexeme), "a\"b");
        assert_eq!(quote_str("a\"b"), toks[2].lexeme);
    }

    #[test]
    fn spans_slice_back_to_lexemes() {
        let src = "int  f ( ) { return a<=b ; }";
        for t in lex(src).unwrap() {
            assert!(t.span.start < t.span.end);
            assert_eq!(&src[t.span.start..t.span.end], t.lexeme);
        }
    }
}
