//! Tokens and s-expressions.

use num_bigint::BigUint;

use super::{PddlError, Pos, Source};

/// Nesting deeper than this is rejected rather than recursed into.
pub const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Open,
    Close,
    /// Lower-cased name, `?variable`, `:keyword` or `-`.
    Word(String),
    Number(BigUint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | '?' | ':' | '=' | '<' | '>' | '+' | '*' | '/' | '@')
}

pub fn tokenize(text: &str, source: Source) -> Result<Vec<Token>, PddlError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { source, line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' | ')' => {
                chars.next();
                col += 1;
                tokens.push(Token {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    pos,
                });
            }
            c if is_word_char(c) => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    word.extend(c.to_lowercase());
                    chars.next();
                    col += 1;
                }
                tokens.push(Token {
                    tok: classify(word, pos)?,
                    pos,
                });
            }
            other => {
                return Err(PddlError::Lex {
                    pos,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(tokens)
}

fn classify(word: String, pos: Pos) -> Result<Tok, PddlError> {
    let lex = |message: String| PddlError::Lex { pos, message };
    let first = word.chars().next().expect("words are nonempty");
    if first.is_ascii_digit() {
        if word.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(Tok::Number(word.parse().expect("digit string")));
        }
        if word.contains('.') && word.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
            return Err(lex(format!("number `{word}`: only nonnegative integers are supported")));
        }
        return Err(lex(format!("malformed token `{word}`")));
    }
    if first == '-' && word.len() > 1 {
        return Err(lex(format!("malformed token `{word}`")));
    }
    if (first == '?' || first == ':') && word.len() == 1 {
        return Err(lex(format!("`{word}` must be followed by a name")));
    }
    Ok(Tok::Word(word))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Word(String, Pos),
    Number(BigUint, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Word(_, p) | Sexpr::Number(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_word(&self) -> Option<&str> {
        match self {
            Sexpr::Word(w, _) => Some(w),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            _ => None,
        }
    }

    /// First word of a list, e.g. `and` for `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexpr::as_word)
    }
}

/// Reads exactly one top-level list. Iterative, so hostile nesting cannot
/// overflow the stack.
pub fn read_document(tokens: &[Token], source: Source) -> Result<Sexpr, PddlError> {
    let parse = |pos, message: String| PddlError::Parse { pos, message };
    let mut stack: Vec<(Vec<Sexpr>, Pos)> = Vec::new();
    let mut done: Option<Sexpr> = None;
    for t in tokens {
        if done.is_some() {
            return Err(parse(t.pos, "unexpected content after the closing parenthesis".into()));
        }
        match &t.tok {
            Tok::Open => {
                if stack.len() >= MAX_DEPTH {
                    return Err(parse(t.pos, format!("nesting deeper than {MAX_DEPTH} levels")));
                }
                stack.push((Vec::new(), t.pos));
            }
            Tok::Close => {
                let (items, pos) = stack.pop().ok_or_else(|| parse(t.pos, "unbalanced `)`".into()))?;
                let list = Sexpr::List(items, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            Tok::Word(w) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexpr::Word(w.clone(), t.pos)),
                None => return Err(parse(t.pos, format!("expected `(`, found `{w}`"))),
            },
            Tok::Number(n) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexpr::Number(n.clone(), t.pos)),
                None => return Err(parse(t.pos, format!("expected `(`, found `{n}`"))),
            },
        }
    }
    if let Some((_, pos)) = stack.last() {
        return Err(parse(*pos, "unclosed `(`".into()));
    }
    done.ok_or_else(|| {
        parse(
            Pos {
                source,
                line: 1,
                col: 1,
            },
            "empty input".into(),
        )
    })
}
