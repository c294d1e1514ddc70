//! OpenQASM 2.0 reader and writer for the subset routing needs.
//!
//! Supported: the `OPENQASM`/`include` headers, `qreg`/`creg`, standard-library
//! gate applications of arity one or two (with register broadcast), `barrier`,
//! `measure` and `reset`. Custom `gate` definitions, `opaque`, classical
//! conditionals and gates of arity three or more are rejected.
//!
//! Multiple registers are flattened in declaration order, so the emitted text
//! always uses a single `q`/`c` register pair.

mod emit;
mod lexer;

use std::collections::HashMap;
use std::fmt;

pub use emit::emit_qasm;
use lexer::{tokenize, Tok, Token};

use crate::circuit::{Circuit, Gate, GateKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownGate(String),
    UnsupportedArity {
        gate: String,
        arity: usize,
    },
    WrongArgumentCount {
        gate: String,
        expected: usize,
        found: usize,
    },
    UndeclaredRegister(String),
    Redeclared(String),
    OperandOutOfRange {
        register: String,
        index: u64,
        size: usize,
    },
    DuplicateOperand(usize),
    BroadcastMismatch,
    Unsupported(String),
}

impl ParseError {
    pub(crate) fn new(line: usize, col: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, col, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownGate(g) => write!(f, "unknown gate '{g}'"),
            ParseErrorKind::UnsupportedArity { gate, arity } => {
                write!(f, "unsupported gate arity: '{gate}' acts on {arity} qubits")
            }
            ParseErrorKind::WrongArgumentCount {
                gate,
                expected,
                found,
            } => write!(f, "'{gate}' expects {expected} arguments, found {found}"),
            ParseErrorKind::UndeclaredRegister(r) => write!(f, "undeclared register '{r}'"),
            ParseErrorKind::Redeclared(r) => write!(f, "register '{r}' declared twice"),
            ParseErrorKind::OperandOutOfRange {
                register,
                index,
                size,
            } => write!(f, "operand {register}[{index}] out of range (size {size})"),
            ParseErrorKind::DuplicateOperand(q) => write!(f, "duplicate operand (qubit {q})"),
            ParseErrorKind::BroadcastMismatch => write!(f, "register sizes differ in broadcast"),
            ParseErrorKind::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl std::error::Error for ParseError {}

/// Parameter count and qubit count for the gates we accept.
fn gate_signature(name: &str) -> Option<(usize, usize)> {
    let sig = match name {
        "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "sx" | "sxdg" | "u0" => (0, 1),
        "rx" | "ry" | "rz" | "u1" | "p" => (1, 1),
        "u2" => (2, 1),
        "u3" | "u" | "U" => (3, 1),
        "cx" | "CX" | "cy" | "cz" | "ch" | "swap" | "iswap" | "ecr" | "dcx" | "csx" => (0, 2),
        "crx" | "cry" | "crz" | "cu1" | "cp" | "rxx" | "ryy" | "rzz" | "rzx" => (1, 2),
        "cu3" => (3, 2),
        "cu" => (4, 2),
        "ccx" | "cswap" | "rccx" => (0, 3),
        "c3x" | "rc3x" | "c3sqrtx" => (0, 4),
        "c4x" => (0, 5),
        _ => return None,
    };
    Some(sig)
}

struct Register {
    offset: usize,
    size: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qregs: HashMap<String, Register>,
    cregs: HashMap<String, Register>,
    circuit: Circuit,
}

/// An argument resolves either to one index or to a whole register.
enum Arg {
    One(usize),
    Reg(Vec<usize>),
}

impl Arg {
    fn len(&self) -> Option<usize> {
        match self {
            Arg::One(_) => None,
            Arg::Reg(v) => Some(v.len()),
        }
    }

    fn at(&self, i: usize) -> usize {
        match self {
            Arg::One(q) => *q,
            Arg::Reg(v) => v[i],
        }
    }

    fn all(&self) -> Vec<usize> {
        match self {
            Arg::One(q) => vec![*q],
            Arg::Reg(v) => v.clone(),
        }
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, kind))
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.syntax("unexpected end of input"),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected {want:?}, found {t:?}");
                self.syntax(msg)
            }
            None => self.syntax(format!("expected {want:?}, found end of input")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next()? {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            other => {
                let msg = format!("expected identifier, found {other:?}");
                self.syntax(msg)
            }
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            other => {
                let msg = format!("expected integer, found {other:?}");
                self.syntax(msg)
            }
        }
    }

    fn parse(mut self) -> Result<Circuit, ParseError> {
        while let Some(tok) = self.peek().cloned() {
            let Tok::Ident(word) = tok else {
                return self.syntax(format!("unexpected {tok:?} at start of statement"));
            };
            match word.as_str() {
                "OPENQASM" => {
                    self.pos += 1;
                    match self.next()? {
                        Tok::Real(v) if (v - 2.0).abs() < 1.0 => {}
                        Tok::Int(2) => {}
                        _ => {
                            return self.err(ParseErrorKind::Unsupported(
                                "only OpenQASM 2.x is accepted".into(),
                            ))
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                "include" => {
                    self.pos += 1;
                    match self.next()? {
                        Tok::Str(_) => {}
                        _ => return self.syntax("expected file name after include"),
                    }
                    self.expect(Tok::Semi)?;
                }
                "qreg" | "creg" => self.declaration(word == "qreg")?,
                "gate" | "opaque" => {
                    return self.err(ParseErrorKind::Unsupported(format!("'{word}' definitions")))
                }
                "if" => {
                    return self.err(ParseErrorKind::Unsupported("classical conditionals".into()))
                }
                "measure" => self.measure()?,
                "barrier" => self.barrier()?,
                "reset" => {
                    self.pos += 1;
                    let arg = self.argument(true)?;
                    self.expect(Tok::Semi)?;
                    for q in arg.all() {
                        self.circuit.push(GateKind::OneQubit, "reset", vec![q]);
                    }
                }
                _ => self.application()?,
            }
        }
        Ok(self.circuit)
    }

    fn declaration(&mut self, quantum: bool) -> Result<(), ParseError> {
        self.pos += 1;
        let name = self.ident()?;
        self.expect(Tok::LBracket)?;
        let size = self.int()? as usize;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Semi)?;
        if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
            return self.err(ParseErrorKind::Redeclared(name));
        }
        if quantum {
            let offset = self.circuit.num_qubits;
            self.circuit.num_qubits += size;
            self.qregs.insert(name, Register { offset, size });
        } else {
            let offset = self.circuit.num_clbits;
            self.circuit.num_clbits += size;
            self.cregs.insert(name, Register { offset, size });
        }
        Ok(())
    }

    fn argument(&mut self, quantum: bool) -> Result<Arg, ParseError> {
        let name = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.get(&name) else {
            return self.err(ParseErrorKind::UndeclaredRegister(name));
        };
        let (offset, size) = (reg.offset, reg.size);
        if self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            let index = self.int()?;
            if index as usize >= size {
                return self.err(ParseErrorKind::OperandOutOfRange {
                    register: name,
                    index,
                    size,
                });
            }
            self.expect(Tok::RBracket)?;
            Ok(Arg::One(offset + index as usize))
        } else {
            Ok(Arg::Reg((offset..offset + size).collect()))
        }
    }

    fn argument_list(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = vec![self.argument(true)?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.argument(true)?);
        }
        Ok(args)
    }

    fn measure(&mut self) -> Result<(), ParseError> {
        self.pos += 1;
        let q = self.argument(true)?;
        self.expect(Tok::Arrow)?;
        let c = self.argument(false)?;
        self.expect(Tok::Semi)?;
        match (q.len(), c.len()) {
            (None, None) => {}
            (Some(a), Some(b)) if a == b => {}
            _ => return self.err(ParseErrorKind::BroadcastMismatch),
        }
        for i in 0..q.len().unwrap_or(1) {
            self.circuit.push_full(
                GateKind::Measure,
                "measure",
                vec![q.at(i)],
                Vec::new(),
                Some(c.at(i)),
            );
        }
        Ok(())
    }

    fn barrier(&mut self) -> Result<(), ParseError> {
        self.pos += 1;
        let args = self.argument_list()?;
        self.expect(Tok::Semi)?;
        let mut qubits: Vec<usize> = Vec::new();
        for a in &args {
            for q in a.all() {
                if !qubits.contains(&q) {
                    qubits.push(q);
                }
            }
        }
        self.circuit.push(GateKind::Barrier, "barrier", qubits);
        Ok(())
    }

    fn application(&mut self) -> Result<(), ParseError> {
        let start = self.here();
        let name = self.ident()?;
        let Some((nparams, arity)) = gate_signature(&name) else {
            return Err(ParseError::new(
                start.0,
                start.1,
                ParseErrorKind::UnknownGate(name),
            ));
        };
        if arity > 2 {
            return Err(ParseError::new(
                start.0,
                start.1,
                ParseErrorKind::UnsupportedArity { gate: name, arity },
            ));
        }
        let mut params = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                params.push(self.expr()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    params.push(self.expr()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        if params.len() != nparams {
            return Err(ParseError::new(
                start.0,
                start.1,
                ParseErrorKind::Syntax(format!(
                    "'{name}' takes {nparams} parameters, found {}",
                    params.len()
                )),
            ));
        }
        let args = self.argument_list()?;
        self.expect(Tok::Semi)?;
        if args.len() != arity {
            return Err(ParseError::new(
                start.0,
                start.1,
                ParseErrorKind::WrongArgumentCount {
                    gate: name,
                    expected: arity,
                    found: args.len(),
                },
            ));
        }

        let mut width = None;
        for a in &args {
            if let Some(n) = a.len() {
                match width {
                    None => width = Some(n),
                    Some(w) if w != n => return self.err(ParseErrorKind::BroadcastMismatch),
                    _ => {}
                }
            }
        }
        let kind = match (arity, name.as_str()) {
            (1, _) => GateKind::OneQubit,
            (_, "swap") => GateKind::Swap,
            _ => GateKind::TwoQubit,
        };
        for i in 0..width.unwrap_or(1) {
            let qubits: Vec<usize> = args.iter().map(|a| a.at(i)).collect();
            if arity == 2 && qubits[0] == qubits[1] {
                return Err(ParseError::new(
                    start.0,
                    start.1,
                    ParseErrorKind::DuplicateOperand(qubits[0]),
                ));
            }
            self.circuit
                .push_full(kind, name.clone(), qubits, params.clone(), None);
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    v += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    v *= self.power()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    v /= self.power()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn power(&mut self) -> Result<f64, ParseError> {
        let base = self.unary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.power()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<f64, ParseError> {
        match self.next()? {
            Tok::Int(n) => Ok(n as f64),
            Tok::Real(v) => Ok(v),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ident(id) if id == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(id) => {
                let f: fn(f64) -> f64 = match id.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return self.syntax(format!("unknown identifier '{id}' in expression"));
                    }
                };
                self.expect(Tok::LParen)?;
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(f(v))
            }
            other => {
                self.pos -= 1;
                self.syntax(format!("unexpected {other:?} in expression"))
            }
        }
    }
}

/// Parses OpenQASM 2.0 source into a [`Circuit`] whose gate ids follow
/// textual order.
pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    parse_qasm_named(text, "circuit")
}

pub fn parse_qasm_named(text: &str, name: &str) -> Result<Circuit, ParseError> {
    let toks = tokenize(text)?;
    let parser = Parser {
        toks,
        pos: 0,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        circuit: Circuit::new(name, 0),
    };
    parser.parse()
}

/// Physical layout metadata carried in `// qroute:` comment lines.
pub fn read_layout_comment(text: &str, key: &str) -> Option<Vec<usize>> {
    let prefix = format!("// qroute: {key}");
    text.lines().find_map(|l| {
        let rest = l.trim().strip_prefix(&prefix)?;
        rest.split_whitespace()
            .map(|t| t.parse().ok())
            .collect::<Option<Vec<usize>>>()
    })
}

/// Gate list helper mostly for tests: the (name, qubits) pairs of a circuit.
pub fn gate_pairs(c: &Circuit) -> Vec<(String, Vec<usize>)> {
    c.gates
        .iter()
        .map(|g: &Gate| (g.name.clone(), g.qubits.clone()))
        .collect()
}
