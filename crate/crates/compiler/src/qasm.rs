//! Reader and writer for the OPENQASM 2.0 subset used as the compiler's text format.

use crate::program::{LogicalProgram, Op};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parsed program plus the statements that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub program: LogicalProgram,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str,
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Str => "string".into(),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Arrow => "`->`".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (li + 1, i + 1);
            let err = |message: String| ParseError { line, column, message };
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, column });
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), line, column });
            } else if c == '"' {
                let close = chars[i + 1..].iter().position(|&d| d == '"').ok_or_else(|| err("unterminated string".into()))?;
                i += close + 2;
                out.push(Token { tok: Tok::Str, line, column });
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                i += 2;
                out.push(Token { tok: Tok::Arrow, line, column });
            } else if ";[],()".contains(c) {
                i += 1;
                out.push(Token { tok: Tok::Sym(c), line, column });
            } else {
                return Err(err(format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.column))
    }

    fn error_at(&self, (line, column): (usize, usize), message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }

    fn next(&mut self, what: &str) -> Result<Token, ParseError> {
        let t = self.peek().cloned().ok_or_else(|| self.error_at(self.end, format!("expected {what}, found end of input")))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.next(&format!("`{c}`"))?;
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.error_at((t.line, t.column), format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let t = self.next("identifier")?;
        match t.tok {
            Tok::Ident(s) => Ok(s),
            other => Err(self.error_at((t.line, t.column), format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let t = self.next("integer")?;
        match &t.tok {
            Tok::Number(s) => s.parse().map_err(|_| self.error_at((t.line, t.column), format!("expected integer, found {s}"))),
            other => Err(self.error_at((t.line, t.column), format!("expected integer, found {}", describe(other)))),
        }
    }

    /// `name[index]`, returning the index and its position.
    fn indexed(&mut self) -> Result<(String, usize, (usize, usize)), ParseError> {
        let at = self.here();
        let name = self.ident()?;
        self.expect_sym('[')?;
        let index = self.integer()?;
        self.expect_sym(']')?;
        Ok((name, index, at))
    }

    fn skip_statement(&mut self) -> Result<(), ParseError> {
        while self.next("`;`")?.tok != Tok::Sym(';') {}
        Ok(())
    }
}

/// Parses a Clifford+T program; only `h s sdg t tdg x z cx` are accepted as gates.
pub fn parse_program(text: &str) -> Result<Parsed, ParseError> {
    parse(text, false)
}

/// Parses compiler output, additionally accepting `swap`, `ec`, `cs_to_rm` and `cs_to_steane`.
pub fn parse_isa(text: &str) -> Result<Parsed, ParseError> {
    parse(text, true)
}

fn parse(text: &str, isa: bool) -> Result<Parsed, ParseError> {
    let tokens = lex(text)?;
    let lines = text.lines().count().max(1);
    let end = (lines, text.lines().last().map_or(0, |l| l.chars().count()) + 1);
    let mut p = Parser { tokens, pos: 0, end };
    let mut warnings = Vec::new();

    let at = p.here();
    match p.next("`OPENQASM` header")?.tok {
        Tok::Ident(s) if s == "OPENQASM" => {}
        _ => return Err(p.error_at(at, "program must start with `OPENQASM 2.0;`")),
    }
    let at = p.here();
    match p.next("version")?.tok {
        Tok::Number(v) if v == "2.0" || v == "2" => {}
        _ => return Err(p.error_at(at, "only version 2.0 is supported")),
    }
    p.expect_sym(';')?;

    let mut register: Option<(String, usize)> = None;
    let mut program = LogicalProgram::new(0);
    while let Some(t) = p.peek().cloned() {
        let at = (t.line, t.column);
        let Tok::Ident(word) = &t.tok else {
            return Err(p.error_at(at, format!("expected statement, found {}", describe(&t.tok))));
        };
        p.pos += 1;
        match word.as_str() {
            "include" => {
                let s = p.next("file name")?;
                if s.tok != Tok::Str {
                    return Err(p.error_at((s.line, s.column), "expected quoted file name"));
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                let (name, size, _) = p.indexed()?;
                p.expect_sym(';')?;
                if register.is_some() {
                    return Err(p.error_at(at, "only one quantum register is supported"));
                }
                program.n_qubits = size;
                register = Some((name, size));
            }
            "creg" => {
                p.indexed()?;
                p.expect_sym(';')?;
            }
            "measure" => {
                p.skip_statement()?;
                warnings.push(format!("line {}: measure ignored", at.0));
            }
            name => {
                let op = Op::from_mnemonic(name).filter(|op| isa || op.is_basis_gate());
                let Some(op) = op else {
                    return Err(p.error_at(at, format!("gate `{name}` is not in the Clifford+T basis; decompose to Clifford+T first")));
                };
                let (reg, size) = register.clone().ok_or_else(|| p.error_at(at, "gate before register declaration"))?;
                let mut qubits = Vec::new();
                loop {
                    let (r, index, arg_at) = p.indexed()?;
                    if r != reg {
                        return Err(p.error_at(arg_at, format!("unknown register `{r}`")));
                    }
                    if index >= size {
                        return Err(p.error_at(arg_at, format!("index {index} out of range for `{reg}[{size}]`")));
                    }
                    if qubits.contains(&index) {
                        return Err(p.error_at(arg_at, format!("qubit {index} used twice")));
                    }
                    qubits.push(index);
                    let sep = p.next("`,` or `;`")?;
                    match sep.tok {
                        Tok::Sym(',') => continue,
                        Tok::Sym(';') => break,
                        other => return Err(p.error_at((sep.line, sep.column), format!("expected `,` or `;`, found {}", describe(&other)))),
                    }
                }
                if qubits.len() != op.arity() {
                    return Err(p.error_at(at, format!("`{name}` takes {} qubit(s), got {}", op.arity(), qubits.len())));
                }
                program.push(op, &qubits);
            }
        }
    }
    if register.is_none() {
        return Err(p.error_at(p.end, "missing `qreg` declaration"));
    }
    Ok(Parsed { program, warnings })
}

/// Writes `program` in the text format over register `q`.
pub fn emit(program: &LogicalProgram) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", program.n_qubits);
    for instr in &program.instrs {
        let _ = writeln!(out, "{instr}");
    }
    out
}
