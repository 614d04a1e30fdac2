//! Recursive-descent parser for `.lud` rule descriptions.
//!
//! Grammar (whitespace separates tokens, `#` starts a line comment):
//!
//! ```text
//! form   := '(' keyword arg* ')'
//! arg    := form | string | integer | symbol | player | name ':' arg
//!         | '{' arg* '}' | '?' category [ '{' form ('|' form)* '}' ]
//! player := 'P1' | 'P2'
//! ```
//!
//! Errors are collected rather than raised, so a single pass reports every
//! problem in the text.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Arg, Hole, LudemeNode, LudemeTree, PlayerRef, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseErrorKind {
    UnbalancedParen,
    EmptyForm,
    BadToken,
    RootNotGame,
    DuplicateNamedArg,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.line, self.column, self.kind, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseErrorList(pub Vec<ParseError>);

impl ParseErrorList {
    pub fn kinds(&self) -> Vec<ParseErrorKind> {
        self.0.iter().map(|e| e.kind).collect()
    }
}

impl fmt::Display for ParseErrorList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrorList {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    SetOpen,
    SetClose,
    Pipe,
    Str(String),
    Int(i64),
    Ident(String),
    Name(String),
    Hole(String),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric()
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_ident_char(c)) {
            self.bump();
        }
        self.src[start..self.pos].to_string()
    }

    fn tokenize(mut self, errors: &mut Vec<(ParseErrorKind, Span, String)>) -> Vec<Token> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            let tok = match c {
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                '#' => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                    continue;
                }
                '(' => {
                    self.bump();
                    Tok::Open
                }
                ')' => {
                    self.bump();
                    Tok::Close
                }
                '{' => {
                    self.bump();
                    Tok::SetOpen
                }
                '}' => {
                    self.bump();
                    Tok::SetClose
                }
                '|' => {
                    self.bump();
                    Tok::Pipe
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    let mut closed = false;
                    while let Some(c) = self.bump() {
                        match c {
                            '"' => {
                                closed = true;
                                break;
                            }
                            '\\' => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(other) => s.push(other),
                                None => break,
                            },
                            other => s.push(other),
                        }
                    }
                    if !closed {
                        errors.push((
                            ParseErrorKind::BadToken,
                            Span::new(start, self.pos),
                            "unterminated string literal".into(),
                        ));
                        continue;
                    }
                    Tok::Str(s)
                }
                '?' => {
                    self.bump();
                    if matches!(self.peek(), Some(c) if is_ident_start(c)) {
                        Tok::Hole(self.ident())
                    } else {
                        errors.push((
                            ParseErrorKind::BadToken,
                            Span::new(start, self.pos),
                            "expected a category name after `?`".into(),
                        ));
                        continue;
                    }
                }
                c if c.is_ascii_digit() || c == '-' => {
                    self.bump();
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    let text = &self.src[start..self.pos];
                    match text.parse::<i64>() {
                        Ok(v) if !matches!(self.peek(), Some(c) if is_ident_char(c)) => Tok::Int(v),
                        _ => {
                            while matches!(self.peek(), Some(c) if is_ident_char(c)) {
                                self.bump();
                            }
                            errors.push((
                                ParseErrorKind::BadToken,
                                Span::new(start, self.pos),
                                format!("malformed integer `{}`", &self.src[start..self.pos]),
                            ));
                            continue;
                        }
                    }
                }
                c if is_ident_start(c) => {
                    let id = self.ident();
                    if self.peek() == Some(':') {
                        self.bump();
                        Tok::Name(id)
                    } else {
                        Tok::Ident(id)
                    }
                }
                other => {
                    self.bump();
                    errors.push((
                        ParseErrorKind::BadToken,
                        Span::new(start, self.pos),
                        format!("unexpected character {other:?}"),
                    ));
                    continue;
                }
            };
            out.push(Token {
                tok,
                span: Span::new(start, self.pos),
            });
        }
        out
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<(ParseErrorKind, Span, String)>,
    eof: usize,
}

enum Closer {
    Form,
    Set,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&mut self, kind: ParseErrorKind, span: Span, msg: impl Into<String>) {
        self.errors.push((kind, span, msg.into()));
    }

    /// Parses a form; the current token is `(`.
    fn form(&mut self) -> Option<LudemeNode> {
        let open = self.tokens[self.pos].span;
        self.pos += 1;
        let keyword = match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Ident(k)) => {
                self.pos += 1;
                k
            }
            Some(Tok::Close) => {
                let end = self.tokens[self.pos].span.end;
                self.pos += 1;
                self.error(ParseErrorKind::EmptyForm, Span::new(open.start, end), "empty form `()`");
                return None;
            }
            Some(_) => {
                let span = self.tokens[self.pos].span;
                self.error(ParseErrorKind::BadToken, span, "expected a ludeme keyword after `(`");
                String::new()
            }
            None => {
                self.error(ParseErrorKind::UnbalancedParen, open, "unclosed `(`");
                return None;
            }
        };
        let (args, end) = self.args_until(Closer::Form, open);
        let mut seen: Vec<&str> = Vec::new();
        let mut dups = Vec::new();
        for a in &args {
            if let Arg::Named(n, _) = a {
                if seen.contains(&n.as_str()) {
                    dups.push(n.clone());
                }
                seen.push(n);
            }
        }
        for d in dups {
            self.error(
                ParseErrorKind::DuplicateNamedArg,
                Span::new(open.start, end),
                format!("named argument `{d}` given more than once"),
            );
        }
        if keyword.is_empty() {
            return None;
        }
        Some(LudemeNode {
            keyword,
            args,
            span: Span::new(open.start, end),
        })
    }

    fn args_until(&mut self, closer: Closer, open: Span) -> (Vec<Arg>, usize) {
        let mut args = Vec::new();
        loop {
            let Some(tok) = self.peek().cloned() else {
                self.error(
                    ParseErrorKind::UnbalancedParen,
                    open,
                    match closer {
                        Closer::Form => "unclosed `(`",
                        Closer::Set => "unclosed `{`",
                    },
                );
                return (args, self.eof);
            };
            match (&tok.tok, &closer) {
                (Tok::Close, Closer::Form) | (Tok::SetClose, Closer::Set) => {
                    self.pos += 1;
                    return (args, tok.span.end);
                }
                (Tok::Close, Closer::Set) | (Tok::SetClose, Closer::Form) => {
                    self.pos += 1;
                    self.error(ParseErrorKind::UnbalancedParen, tok.span, "mismatched closing bracket");
                }
                _ => {
                    if let Some(a) = self.arg() {
                        args.push(a);
                    }
                }
            }
        }
    }

    fn arg(&mut self) -> Option<Arg> {
        let tok = self.peek()?.clone();
        match tok.tok {
            Tok::Open => self.form().map(Arg::Node),
            Tok::SetOpen => {
                self.pos += 1;
                let (items, _) = self.args_until(Closer::Set, tok.span);
                Some(Arg::Set(items))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Some(Arg::Str(s))
            }
            Tok::Int(i) => {
                self.pos += 1;
                Some(Arg::Int(i))
            }
            Tok::Ident(id) => {
                self.pos += 1;
                Some(match id.as_str() {
                    "P1" => Arg::Player(PlayerRef::P1),
                    "P2" => Arg::Player(PlayerRef::P2),
                    _ => Arg::Symbol(id),
                })
            }
            Tok::Name(name) => {
                self.pos += 1;
                match self.peek().map(|t| &t.tok) {
                    None | Some(Tok::Close) | Some(Tok::SetClose) | Some(Tok::Pipe) => {
                        self.error(ParseErrorKind::BadToken, tok.span, format!("named argument `{name}:` has no value"));
                        None
                    }
                    Some(Tok::Name(_)) => {
                        self.error(ParseErrorKind::BadToken, tok.span, format!("named argument `{name}:` has no value"));
                        None
                    }
                    _ => self.arg().map(|v| Arg::Named(name, Box::new(v))),
                }
            }
            Tok::Hole(category) => {
                self.pos += 1;
                let mut options = Vec::new();
                let mut end = tok.span.end;
                if matches!(self.peek(), Some(t) if t.tok == Tok::SetOpen && t.span.start == tok.span.end) {
                    let set_open = self.tokens[self.pos].span;
                    self.pos += 1;
                    loop {
                        match self.peek().cloned() {
                            None => {
                                self.error(ParseErrorKind::UnbalancedParen, set_open, "unclosed `{` in hole");
                                end = self.eof;
                                break;
                            }
                            Some(t) => match t.tok {
                                Tok::SetClose => {
                                    self.pos += 1;
                                    end = t.span.end;
                                    break;
                                }
                                Tok::Pipe => {
                                    self.pos += 1;
                                }
                                Tok::Open => {
                                    if let Some(n) = self.form() {
                                        options.push(n);
                                    }
                                }
                                Tok::Close => {
                                    self.pos += 1;
                                    self.error(ParseErrorKind::UnbalancedParen, t.span, "mismatched closing bracket");
                                }
                                _ => {
                                    self.pos += 1;
                                    self.error(ParseErrorKind::BadToken, t.span, "hole options must be ludemes");
                                }
                            },
                        }
                    }
                }
                Some(Arg::Hole(Hole {
                    category,
                    options,
                    span: Span::new(tok.span.start, end),
                }))
            }
            Tok::Pipe => {
                self.pos += 1;
                self.error(ParseErrorKind::BadToken, tok.span, "`|` outside a hole");
                None
            }
            Tok::Close | Tok::SetClose => {
                self.pos += 1;
                self.error(ParseErrorKind::UnbalancedParen, tok.span, "unexpected closing bracket");
                None
            }
        }
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses a rule description into a [`LudemeTree`].
pub fn parse(text: &str) -> Result<LudemeTree, ParseErrorList> {
    let mut raw_errors = Vec::new();
    let tokens = Lexer { src: text, pos: 0 }.tokenize(&mut raw_errors);
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: raw_errors,
        eof: text.len(),
    };

    let mut roots = Vec::new();
    while let Some(tok) = p.peek().cloned() {
        match tok.tok {
            Tok::Open => {
                if let Some(n) = p.form() {
                    roots.push(n);
                }
            }
            _ => {
                // Top-level atoms are reported once and otherwise ignored.
                p.arg();
                if !matches!(tok.tok, Tok::Close | Tok::SetClose) {
                    p.error(ParseErrorKind::BadToken, tok.span, "expected `(` at top level");
                }
            }
        }
    }

    match roots.len() {
        0 => {
            if p.errors.is_empty() {
                p.error(ParseErrorKind::RootNotGame, Span::new(0, text.len()), "no `(game ...)` form found");
            }
        }
        1 if roots[0].keyword == "game" => {}
        1 => {
            let span = roots[0].span;
            let kw = roots[0].keyword.clone();
            p.error(ParseErrorKind::RootNotGame, span, format!("root ludeme is `{kw}`, expected `game`"));
        }
        _ => {
            let span = roots[1].span;
            p.error(ParseErrorKind::RootNotGame, span, "more than one top-level form");
        }
    }

    if p.errors.is_empty() {
        return Ok(LudemeTree { root: roots.remove(0) });
    }
    let mut errors: Vec<ParseError> = p
        .errors
        .into_iter()
        .map(|(kind, span, message)| {
            let (line, column) = line_col(text, span.start);
            ParseError {
                kind,
                line,
                column,
                span,
                message,
            }
        })
        .collect();
    errors.sort_by_key(|e| (e.span.start, e.span.end));
    Err(ParseErrorList(errors))
}

/// Lossy entry point for raw bytes (invalid UTF-8 becomes U+FFFD).
pub fn parse_bytes(bytes: &[u8]) -> Result<LudemeTree, ParseErrorList> {
    parse(&String::from_utf8_lossy(bytes))
}
