use std::fmt;

use super::QueryError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Token {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Turnstile,
    Dot,
    Star,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier {s:?}"),
            Token::LParen => f.write_str("'('"),
            Token::RParen => f.write_str("')'"),
            Token::LBracket => f.write_str("'['"),
            Token::RBracket => f.write_str("']'"),
            Token::Comma => f.write_str("','"),
            Token::Turnstile => f.write_str("':-'"),
            Token::Dot => f.write_str("'.'"),
            Token::Star => f.write_str("'*'"),
        }
    }
}

/// Tokenizer shared by the query, plan and bushy-tree syntaxes. Positions are
/// byte offsets into the input.
pub(crate) struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(Token, usize)>,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src, pos: 0, peeked: None }
    }

    fn scan(&mut self) -> Result<Option<(Token, usize)>, QueryError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = bytes[self.pos];
        let tok = match c {
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'[' => Token::LBracket,
            b']' => Token::RBracket,
            b',' => Token::Comma,
            b'.' => Token::Dot,
            b'*' => Token::Star,
            b':' if bytes.get(self.pos + 1) == Some(&b'-') => {
                self.pos += 2;
                return Ok(Some((Token::Turnstile, start)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                return Ok(Some((Token::Ident(self.src[start..self.pos].to_string()), start)));
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(QueryError::Syntax { pos: start, message: format!("unexpected character {ch:?}") });
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }

    pub fn peek(&mut self) -> Result<Option<(Token, usize)>, QueryError> {
        if self.peeked.is_none() {
            self.peeked = self.scan()?;
        }
        Ok(self.peeked.clone())
    }

    pub fn next(&mut self) -> Result<Option<(Token, usize)>, QueryError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.scan(),
        }
    }

    pub fn expect(&mut self, want: Token) -> Result<usize, QueryError> {
        match self.next()? {
            Some((t, pos)) if t == want => Ok(pos),
            Some((t, pos)) => Err(QueryError::Syntax { pos, message: format!("expected {want}, found {t}") }),
            None => Err(QueryError::Syntax { pos: self.src.len(), message: format!("expected {want}, found end of input") }),
        }
    }

    pub fn ident(&mut self) -> Result<String, QueryError> {
        match self.next()? {
            Some((Token::Ident(s), _)) => Ok(s),
            Some((t, pos)) => Err(QueryError::Syntax { pos, message: format!("expected identifier, found {t}") }),
            None => Err(QueryError::Syntax { pos: self.src.len(), message: "expected identifier, found end of input".into() }),
        }
    }

    pub fn at_end(&mut self) -> Result<bool, QueryError> {
        Ok(self.peek()?.is_none())
    }
}
