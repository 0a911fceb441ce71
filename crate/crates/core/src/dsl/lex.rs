use num_bigint::BigInt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 19] = [
    "->", "!=", "<=", ">=", "+", "-", "*", "/", "^", "(", ")", "{", "}", ",", "!", "=", "<", ">", ";",
];

/// Split source text into tokens. Header comments (`# key: value`) are
/// returned separately.
pub fn lex(src: &str) -> Result<(Vec<Token>, Vec<(String, String)>), ParseError> {
    let mut toks = Vec::new();
    let mut headers = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                if toks.is_empty() {
                    let rest: String = chars[i + 1..].iter().collect();
                    if let Some((k, v)) = rest.split_once(':') {
                        headers.push((k.trim().to_string(), v.trim().to_string()));
                    }
                }
                break;
            }
            let col = i + 1;
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push(Token { tok: Tok::Int(s.parse().unwrap()), line: line_no, col });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push(Token { tok: Tok::Ident(s), line: line_no, col });
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    toks.push(Token { tok: Tok::Sym(s), line: line_no, col });
                    i += s.len();
                }
                None => {
                    return Err(ParseError::at(line_no, col, format!("unexpected character `{c}`")));
                }
            }
        }
    }
    let (line, col) = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok((toks, headers))
}
