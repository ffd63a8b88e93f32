use super::token::{is_keyword, Token, TokenKind};
use super::FrontendError;

/// Lex MiniC source. `//` comments and whitespace are discarded; positions
/// are 1-based.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    let two_char_ops = ["<<", ">>", "<=", ">=", "==", "!=", "&&", "||"];
    let one_char_ops = "+-*/%&|^<>=!~";
    let puncts = "(){},;";

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '/' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(chars[i]);
                i += 1;
                col += 1;
            }
            let kind = if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                text: word,
                line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                digits.push(chars[i]);
                i += 1;
                col += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Int,
                text: digits,
                line,
                col: start_col,
            });
            continue;
        }
        if i + 1 < chars.len() {
            let pair: String = [c, chars[i + 1]].iter().collect();
            if two_char_ops.contains(&pair.as_str()) {
                tokens.push(Token {
                    kind: TokenKind::Op,
                    text: pair,
                    line,
                    col: start_col,
                });
                i += 2;
                col += 2;
                continue;
            }
        }
        if one_char_ops.contains(c) {
            tokens.push(Token {
                kind: TokenKind::Op,
                text: c.to_string(),
                line,
                col: start_col,
            });
            i += 1;
            col += 1;
            continue;
        }
        if puncts.contains(c) {
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: c.to_string(),
                line,
                col: start_col,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(FrontendError::Lex {
            line,
            column: col,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(tokens)
}
