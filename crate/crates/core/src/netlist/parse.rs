//! Line-oriented netlist parser.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::ast::{CircuitAst, Connect, DeclKind, Endpoint, NodeDecl};
use crate::primitives::{NodeKind, Port};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateName,
    UnknownNodeKind,
    UnknownPort,
    UnknownName,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::DuplicateName => "duplicate name",
            ParseErrorKind::UnknownNodeKind => "unknown node kind",
            ParseErrorKind::UnknownPort => "unknown port",
            ParseErrorKind::UnknownName => "unknown name",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(u32),
    Colon,
    Comma,
    Arrow,
    Dot,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

fn err(line: usize, col: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        kind,
        message: message.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            ':' => {
                toks.push((col, Tok::Colon));
                i += 1;
            }
            ',' => {
                toks.push((col, Tok::Comma));
                i += 1;
            }
            '.' => {
                toks.push((col, Tok::Dot));
                i += 1;
            }
            '(' => {
                toks.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((col, Tok::RParen));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push((col, Tok::Arrow));
                i += 2;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| {
                    err(
                        line_no,
                        col,
                        ParseErrorKind::Syntax,
                        format!("number `{s}` out of range"),
                    )
                })?;
                toks.push((col, Tok::Number(n)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((col, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => {
                return Err(err(
                    line_no,
                    col,
                    ParseErrorKind::Syntax,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    /// Column just past the end of the line, for errors at end of input.
    eol: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.eol)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        err(self.line, self.col(), ParseErrorKind::Syntax, message)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.syntax(format!("expected {want}, found {t}"))),
            None => Err(self.syntax(format!("expected {want} at end of line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => Err(self.syntax(format!("expected {what}, found {t}"))),
            None => Err(self.syntax(format!("expected {what} at end of line"))),
        }
    }

    /// `ident ('.' ident)*`, returned as segments.
    fn path(&mut self, what: &str) -> Result<Vec<String>, ParseError> {
        let mut parts = vec![self.ident(what)?];
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            parts.push(self.ident("identifier after `.`")?);
        }
        Ok(parts)
    }

    fn end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.syntax(format!("unexpected {t}"))),
        }
    }
}

fn endpoint(cur: &mut Cursor<'_>, what: &str) -> Result<(Endpoint, usize), ParseError> {
    let col = cur.col();
    let mut parts = cur.path(what)?;
    let ep = if parts.len() == 1 {
        Endpoint::Pin(parts.pop().unwrap())
    } else {
        let port = parts.pop().unwrap();
        Endpoint::Port {
            node: parts.join("."),
            port,
        }
    };
    Ok((ep, col))
}

fn prim_kind(cur: &mut Cursor<'_>) -> Result<NodeKind, ParseError> {
    let col = cur.col();
    let word = cur.ident("node kind")?;
    Ok(match word.as_str() {
        "junction" => NodeKind::Junction,
        "scalpel" => NodeKind::Scalpel,
        "const1" => NodeKind::ConstSource,
        "sensor_syringe" => NodeKind::SensorSyringe,
        "tap" => NodeKind::Tap,
        "join" => NodeKind::Join,
        "waste" => NodeKind::WasteSink,
        "hold" => {
            cur.expect(Tok::LParen)?;
            let phases = match cur.peek() {
                Some(Tok::Number(n)) if *n >= 1 => *n,
                Some(Tok::Number(_)) => return Err(cur.syntax("hold needs at least 1 phase")),
                _ => return Err(cur.syntax("expected phase count in hold(<k>)")),
            };
            cur.pos += 1;
            cur.expect(Tok::RParen)?;
            NodeKind::EmHold { phases }
        }
        other => {
            return Err(err(
                cur.line,
                col,
                ParseErrorKind::UnknownNodeKind,
                format!("unknown node kind `{other}`"),
            ))
        }
    })
}

struct PendingConnect {
    connect: Connect,
    cols: (usize, usize),
}

/// Parses netlist text into a [`CircuitAst`].
///
/// Name resolution and primitive port names are checked here; arity,
/// connectivity and gate ports are left to validation.
pub fn parse(text: &str) -> Result<CircuitAst, ParseError> {
    let mut ast = CircuitAst::default();
    let mut have_header = false;
    // name -> (line, col) of declaration
    let mut declared: HashMap<String, (usize, usize)> = HashMap::new();
    let mut pending = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            toks: &toks,
            pos: 0,
            eol: raw.chars().count() + 1,
        };
        let kw_col = cur.col();
        let keyword = cur.ident("statement keyword")?;
        if !have_header && keyword != "circuit" {
            return Err(err(
                line,
                kw_col,
                ParseErrorKind::Syntax,
                "netlist must start with `circuit <name>`",
            ));
        }
        let mut declare = |name: &str, col: usize| -> Result<(), ParseError> {
            if let Some((l, c)) = declared.get(name) {
                return Err(err(
                    line,
                    col,
                    ParseErrorKind::DuplicateName,
                    format!("`{name}` already declared at {l}:{c}"),
                ));
            }
            declared.insert(name.to_string(), (line, col));
            Ok(())
        };
        match keyword.as_str() {
            "circuit" => {
                if have_header {
                    return Err(err(
                        line,
                        kw_col,
                        ParseErrorKind::Syntax,
                        "second `circuit` header",
                    ));
                }
                ast.name = cur.ident("circuit name")?;
                have_header = true;
            }
            "input" | "output" => loop {
                let col = cur.col();
                let name = cur.ident("port name")?;
                declare(&name, col)?;
                if keyword == "input" {
                    ast.inputs.push(name);
                } else {
                    ast.outputs.push(name);
                }
                match cur.peek() {
                    Some(Tok::Comma) => cur.pos += 1,
                    _ => break,
                }
            },
            "node" | "gate" => {
                let col = cur.col();
                let name = cur.path("node name")?.join(".");
                cur.expect(Tok::Colon)?;
                let kind = if keyword == "node" {
                    DeclKind::Prim(prim_kind(&mut cur)?)
                } else {
                    DeclKind::Gate(cur.ident("macro name")?)
                };
                declare(&name, col)?;
                ast.nodes.push(NodeDecl { name, kind, line });
            }
            "connect" => {
                let (from, c1) = endpoint(&mut cur, "source endpoint")?;
                let arrow_col = cur.col();
                cur.expect(Tok::Arrow)?;
                if cur.peek().is_none() {
                    return Err(err(
                        line,
                        arrow_col,
                        ParseErrorKind::Syntax,
                        "dangling `->`: expected destination endpoint",
                    ));
                }
                let (to, c2) = endpoint(&mut cur, "destination endpoint")?;
                pending.push(PendingConnect {
                    connect: Connect { from, to, line },
                    cols: (c1, c2),
                });
            }
            other => {
                return Err(err(
                    line,
                    kw_col,
                    ParseErrorKind::Syntax,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
        cur.end()?;
    }
    if !have_header {
        return Err(err(
            1,
            1,
            ParseErrorKind::Syntax,
            "missing `circuit <name>` header",
        ));
    }

    for p in pending {
        let line = p.connect.line;
        for (ep, col) in [(&p.connect.from, p.cols.0), (&p.connect.to, p.cols.1)] {
            check_endpoint(&ast, ep, line, col)?;
        }
        ast.connects.push(p.connect);
    }
    Ok(ast)
}

fn check_endpoint(
    ast: &CircuitAst,
    ep: &Endpoint,
    line: usize,
    col: usize,
) -> Result<(), ParseError> {
    match ep {
        Endpoint::Pin(name) => {
            if ast.inputs.contains(name) || ast.outputs.contains(name) {
                Ok(())
            } else if ast.node(name).is_some() {
                Err(err(
                    line,
                    col,
                    ParseErrorKind::Syntax,
                    format!("node `{name}` needs a port (`{name}.<port>`)"),
                ))
            } else {
                Err(err(
                    line,
                    col,
                    ParseErrorKind::UnknownName,
                    format!("`{name}` is not declared"),
                ))
            }
        }
        Endpoint::Port { node, port } => {
            let Some(decl) = ast.node(node) else {
                return Err(err(
                    line,
                    col,
                    ParseErrorKind::UnknownName,
                    format!("`{node}` is not declared"),
                ));
            };
            if let DeclKind::Prim(kind) = decl.kind {
                let ok = port
                    .parse::<Port>()
                    .map(|p| kind.accepts_input(p) || kind.has_output(p))
                    .unwrap_or(false);
                if !ok {
                    return Err(err(
                        line,
                        col,
                        ParseErrorKind::UnknownPort,
                        format!("{} `{node}` has no port `{port}`", kind.name()),
                    ));
                }
            }
            Ok(())
        }
    }
}
