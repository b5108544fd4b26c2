//! The expression DSL: a whitespace-insensitive recursive-descent parser
//! with byte-span diagnostics, and the matching renderer.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := scalar | 'E' '(' int ',' int ')' | 'I'
//!         | 'diag' '(' seq ')'
//!         | 'shift' '(' int [',' set] [',' seq] ')'
//!         | 'row' '(' int ',' seq ')'
//!         | 'finite' '{' (i ',' j ':' scalar)* '}'
//!         | 'solveshift' '(' expr ')'
//!         | '[' expr ',' expr ']' | '(' expr ')'
//! seq    := 'const' '(' c ')' | 'periodic' '(' [c-list ';'] c-list ')'
//!         | 'fin' '(' (i ':' c)* ')'
//! set    := 'all' | 'fin' '{' i-list '}' | 'periodic' '(' [bit-list ';'] bit-list ')'
//! ```
//!
//! A bare scalar denotes that multiple of the identity; `shift(k)` defaults
//! to all rows with unit weights. When `shift` carries a single descriptor
//! argument it is read as the row set. Scalars follow the ambient field:
//! `n`, `-n`, or `n/d`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use glcf_core::expr::MatExpr;
use glcf_core::field::{FieldElem, FieldId};
use glcf_core::index_set::{IndexSet, SetKind};
use glcf_core::seq::{SeqDesc, SeqKind};
use glcf_core::zexpr::{ZMatExpr, ZSeq, ZSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub msg: String,
    pub span: (usize, usize),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}..{}: {}", self.span.0, self.span.1, self.msg)
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: (usize, usize),
}

fn lex(src: &str) -> PResult<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let v: u64 = text.parse().map_err(|_| ParseError {
                msg: format!("integer {text} out of range"),
                span: (start, i),
            })?;
            out.push(Token {
                tok: Tok::Int(v),
                span: (start, i),
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: (start, i),
            });
        } else if "+-*/,;:()[]{}".contains(c) {
            i += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                span: (start, i),
            });
        } else {
            return Err(ParseError {
                msg: format!("unexpected character {c:?}"),
                span: (start, start + 1),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    field: FieldId,
    end: usize,
}

/// Either side of the grammar: ℕ-indexed or ℤ-indexed.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Natural,
    Integer,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or((self.end, self.end))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            msg: msg.into(),
            span: self.span(),
        })
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.bump();
                Ok(())
            }
            other => {
                let found = match other {
                    Some(t) => format!("{t:?}"),
                    None => "end of input".into(),
                };
                self.err(format!("expected {c:?}, found {found}"))
            }
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(p)) if *p == c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.bump();
                Ok(v)
            }
            _ => self.err("expected an integer"),
        }
    }

    /// Signed integer (ℤ-side indices and shift offsets).
    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_punct('-');
        let v = self.int()?;
        let v = i64::try_from(v).map_err(|_| ParseError {
            msg: "integer out of range".into(),
            span: self.span(),
        })?;
        Ok(if neg { -v } else { v })
    }

    /// 1-based index on the ℕ side.
    fn index(&mut self, side: Side) -> PResult<i64> {
        let span = self.span();
        let v = self.signed_int()?;
        if side == Side::Natural && v < 1 {
            return Err(ParseError {
                msg: format!("index {v} is below 1"),
                span,
            });
        }
        Ok(v)
    }

    fn scalar(&mut self) -> PResult<FieldElem> {
        let span = self.span();
        let neg = self.eat_punct('-');
        let n = self.int()? as i64;
        let n = if neg { -n } else { n };
        if self.eat_punct('/') {
            let d = self.int()? as i64;
            self.field.from_ratio(n, d).map_err(|e| ParseError {
                msg: e.to_string(),
                span,
            })
        } else {
            Ok(self.field.from_i64(n))
        }
    }

    fn scalar_list(&mut self, terminators: &[char]) -> PResult<Vec<FieldElem>> {
        let mut out = Vec::new();
        loop {
            out.push(self.scalar()?);
            if self.eat_punct(',') {
                continue;
            }
            match self.peek() {
                Some(Tok::Punct(p)) if terminators.contains(p) => break,
                _ => return self.err("expected ',' or a list terminator"),
            }
        }
        Ok(out)
    }

    fn seq(&mut self) -> PResult<SeqDesc> {
        let span = self.span();
        let name = match self.bump() {
            Some(Tok::Ident(s)) => s,
            _ => {
                return Err(ParseError {
                    msg: "expected a sequence: const(..), periodic(..), or fin(..)".into(),
                    span,
                })
            }
        };
        match name.as_str() {
            "const" => {
                self.expect_punct('(')?;
                let c = self.scalar()?;
                self.expect_punct(')')?;
                Ok(SeqDesc::constant(c))
            }
            "periodic" => {
                self.expect_punct('(')?;
                let first = self.scalar_list(&[';', ')'])?;
                let (prefix, period) = if self.eat_punct(';') {
                    let period = self.scalar_list(&[')'])?;
                    (first, period)
                } else {
                    (Vec::new(), first)
                };
                self.expect_punct(')')?;
                if period.is_empty() {
                    return Err(ParseError {
                        msg: "period must be nonempty".into(),
                        span,
                    });
                }
                SeqDesc::eventually_periodic(self.field, prefix, period).map_err(|e| ParseError {
                    msg: e.to_string(),
                    span,
                })
            }
            "fin" => {
                self.expect_punct('(')?;
                let mut entries = BTreeMap::new();
                while !self.eat_punct(')') {
                    let ispan = self.span();
                    let i = self.index(Side::Natural)? as u64;
                    self.expect_punct(':')?;
                    let v = self.scalar()?;
                    if entries.insert(i, v).is_some() {
                        return Err(ParseError {
                            msg: format!("duplicate index {i}"),
                            span: ispan,
                        });
                    }
                    self.eat_punct(',');
                }
                SeqDesc::finite_support(self.field, &entries).map_err(|e| ParseError {
                    msg: e.to_string(),
                    span,
                })
            }
            other => Err(ParseError {
                msg: format!("unknown sequence form {other:?}"),
                span,
            }),
        }
    }

    fn bit_list(&mut self, terminators: &[char]) -> PResult<Vec<bool>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Int(0)) => {
                    out.push(false);
                    self.bump();
                }
                Some(Tok::Int(1)) => {
                    out.push(true);
                    self.bump();
                }
                _ => return self.err("expected bit 0 or 1"),
            }
            if self.eat_punct(',') {
                continue;
            }
            match self.peek() {
                Some(Tok::Punct(p)) if terminators.contains(p) => break,
                _ => return self.err("expected ',' or a list terminator"),
            }
        }
        Ok(out)
    }

    fn set(&mut self) -> PResult<IndexSet> {
        let span = self.span();
        let name = match self.bump() {
            Some(Tok::Ident(s)) => s,
            _ => {
                return Err(ParseError {
                    msg: "expected a set: all, fin{..}, or periodic(..)".into(),
                    span,
                })
            }
        };
        match name.as_str() {
            "all" => Ok(IndexSet::all()),
            "fin" => {
                self.expect_punct('{')?;
                let mut members = BTreeSet::new();
                while !self.eat_punct('}') {
                    members.insert(self.index(Side::Natural)? as u64);
                    self.eat_punct(',');
                }
                IndexSet::finite(&members).map_err(|e| ParseError {
                    msg: e.to_string(),
                    span,
                })
            }
            "periodic" => {
                self.expect_punct('(')?;
                let first = self.bit_list(&[';', ')'])?;
                let (prefix, period) = if self.eat_punct(';') {
                    let period = self.bit_list(&[')'])?;
                    (first, period)
                } else {
                    (Vec::new(), first)
                };
                self.expect_punct(')')?;
                if period.is_empty() {
                    return Err(ParseError {
                        msg: "period must be nonempty".into(),
                        span,
                    });
                }
                IndexSet::eventually_periodic(prefix, period).map_err(|e| ParseError {
                    msg: e.to_string(),
                    span,
                })
            }
            other => Err(ParseError {
                msg: format!("unknown set form {other:?}"),
                span,
            }),
        }
    }

    fn looks_like_set(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => match s.as_str() {
                "all" | "periodic" => true,
                "fin" => matches!(
                    self.tokens.get(self.pos + 1).map(|t| &t.tok),
                    Some(Tok::Punct('{'))
                ),
                _ => false,
            },
            _ => false,
        }
    }
}

/// A factor is either a scalar atom or a matrix expression; scalars fold
/// multiplicatively and turn into scalings against matrix factors.
enum Factor {
    Scalar(FieldElem),
    Matrix(MatExpr),
}

struct NParser(Parser);

impl NParser {
    fn expr(&mut self) -> PResult<MatExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.0.eat_punct('+') {
                terms.push(self.term()?);
            } else if matches!(self.0.peek(), Some(Tok::Punct('-'))) {
                // Binary minus: negate the following term.
                self.0.bump();
                let t = self.term()?;
                terms.push(MatExpr::scale(self.0.field.one().neg(), t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            MatExpr::Sum(terms)
        })
    }

    fn term(&mut self) -> PResult<MatExpr> {
        let mut acc = self.factor()?;
        while self.0.eat_punct('*') {
            let rhs = self.factor()?;
            acc = match (acc, rhs) {
                (Factor::Scalar(a), Factor::Scalar(b)) => {
                    Factor::Scalar(a.mul(&b).map_err(|e| ParseError {
                        msg: e.to_string(),
                        span: self.0.span(),
                    })?)
                }
                (Factor::Scalar(c), Factor::Matrix(e)) | (Factor::Matrix(e), Factor::Scalar(c)) => {
                    Factor::Matrix(MatExpr::scale(c, e))
                }
                (Factor::Matrix(a), Factor::Matrix(b)) => Factor::Matrix(MatExpr::prod(a, b)),
            };
        }
        Ok(match acc {
            Factor::Scalar(c) => {
                if c.is_zero() {
                    MatExpr::Zero
                } else {
                    MatExpr::ScalarE(c)
                }
            }
            Factor::Matrix(e) => e,
        })
    }

    fn factor(&mut self) -> PResult<Factor> {
        let span = self.0.span();
        match self.0.peek().cloned() {
            Some(Tok::Punct('-')) | Some(Tok::Int(_)) => Ok(Factor::Scalar(self.0.scalar()?)),
            Some(Tok::Punct('(')) => {
                self.0.bump();
                let e = self.expr()?;
                self.0.expect_punct(')')?;
                Ok(Factor::Matrix(e))
            }
            Some(Tok::Punct('[')) => {
                self.0.bump();
                let a = self.expr()?;
                self.0.expect_punct(',')?;
                let b = self.expr()?;
                self.0.expect_punct(']')?;
                Ok(Factor::Matrix(MatExpr::bracket(a, b)))
            }
            Some(Tok::Ident(name)) => {
                self.0.bump();
                match name.as_str() {
                    "I" => Ok(Factor::Matrix(MatExpr::ScalarE(self.0.field.one()))),
                    "E" => {
                        self.0.expect_punct('(')?;
                        let i = self.0.index(Side::Natural)? as u64;
                        self.0.expect_punct(',')?;
                        let j = self.0.index(Side::Natural)? as u64;
                        self.0.expect_punct(')')?;
                        Ok(Factor::Matrix(MatExpr::basis(i, j)))
                    }
                    "diag" => {
                        self.0.expect_punct('(')?;
                        let s = self.0.seq()?;
                        self.0.expect_punct(')')?;
                        Ok(Factor::Matrix(MatExpr::Diag(s)))
                    }
                    "shift" => {
                        self.0.expect_punct('(')?;
                        let offset = self.0.signed_int()?;
                        if offset == 0 {
                            return Err(ParseError {
                                msg: "shift offset must be nonzero".into(),
                                span,
                            });
                        }
                        let mut rows = IndexSet::all();
                        let mut weights = SeqDesc::constant(self.0.field.one());
                        if self.0.eat_punct(',') {
                            if self.0.looks_like_set() {
                                rows = self.0.set()?;
                                if self.0.eat_punct(',') {
                                    weights = self.0.seq()?;
                                }
                            } else {
                                weights = self.0.seq()?;
                            }
                        }
                        self.0.expect_punct(')')?;
                        Ok(Factor::Matrix(MatExpr::Shift {
                            offset,
                            rows,
                            weights,
                        }))
                    }
                    "row" => {
                        self.0.expect_punct('(')?;
                        let r = self.0.index(Side::Natural)? as u64;
                        self.0.expect_punct(',')?;
                        let s = self.0.seq()?;
                        self.0.expect_punct(')')?;
                        Ok(Factor::Matrix(MatExpr::RowMat { row: r, seq: s }))
                    }
                    "finite" => {
                        self.0.expect_punct('{')?;
                        let mut entries = BTreeMap::new();
                        while !self.0.eat_punct('}') {
                            let i = self.0.index(Side::Natural)? as u64;
                            self.0.expect_punct(',')?;
                            let j = self.0.index(Side::Natural)? as u64;
                            self.0.expect_punct(':')?;
                            let v = self.0.scalar()?;
                            entries.insert((i, j), v);
                            self.0.eat_punct(',');
                        }
                        Ok(Factor::Matrix(MatExpr::FiniteLit(entries)))
                    }
                    "solveshift" => {
                        self.0.expect_punct('(')?;
                        let e = self.expr()?;
                        self.0.expect_punct(')')?;
                        Ok(Factor::Matrix(MatExpr::SolveShift(Box::new(e))))
                    }
                    other => Err(ParseError {
                        msg: format!("unknown form {other:?}"),
                        span,
                    }),
                }
            }
            _ => Err(ParseError {
                msg: "expected an expression".into(),
                span,
            }),
        }
    }
}

/// Parses an ℕ-indexed expression in the ambient field.
pub fn parse_expr(src: &str, field: FieldId) -> PResult<MatExpr> {
    let tokens = lex(src)?;
    let mut p = NParser(Parser {
        tokens,
        pos: 0,
        field,
        end: src.len(),
    });
    let e = p.expr()?;
    if p.0.pos != p.0.tokens.len() {
        return p.0.err("trailing input");
    }
    Ok(e)
}

struct ZParser(Parser);

impl ZParser {
    fn expr(&mut self) -> PResult<ZMatExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.0.eat_punct('+') {
                terms.push(self.term()?);
            } else if matches!(self.0.peek(), Some(Tok::Punct('-'))) {
                self.0.bump();
                let t = self.term()?;
                terms.push(ZMatExpr::scale(self.0.field.one().neg(), t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ZMatExpr::Sum(terms)
        })
    }

    fn term(&mut self) -> PResult<ZMatExpr> {
        enum F {
            S(FieldElem),
            M(ZMatExpr),
        }
        let mut acc = match self.factor()? {
            ZFactor::Scalar(c) => F::S(c),
            ZFactor::Matrix(e) => F::M(e),
        };
        while self.0.eat_punct('*') {
            let rhs = match self.factor()? {
                ZFactor::Scalar(c) => F::S(c),
                ZFactor::Matrix(e) => F::M(e),
            };
            acc = match (acc, rhs) {
                (F::S(a), F::S(b)) => F::S(a.mul(&b).map_err(|e| ParseError {
                    msg: e.to_string(),
                    span: self.0.span(),
                })?),
                (F::S(c), F::M(e)) | (F::M(e), F::S(c)) => F::M(ZMatExpr::scale(c, e)),
                (F::M(a), F::M(b)) => F::M(ZMatExpr::prod(a, b)),
            };
        }
        Ok(match acc {
            F::S(c) => {
                if c.is_zero() {
                    ZMatExpr::Zero
                } else {
                    ZMatExpr::ScalarE(c)
                }
            }
            F::M(e) => e,
        })
    }

    fn factor(&mut self) -> PResult<ZFactor> {
        let span = self.0.span();
        match self.0.peek().cloned() {
            Some(Tok::Punct('-')) | Some(Tok::Int(_)) => Ok(ZFactor::Scalar(self.0.scalar()?)),
            Some(Tok::Punct('(')) => {
                self.0.bump();
                let e = self.expr()?;
                self.0.expect_punct(')')?;
                Ok(ZFactor::Matrix(e))
            }
            Some(Tok::Punct('[')) => {
                self.0.bump();
                let a = self.expr()?;
                self.0.expect_punct(',')?;
                let b = self.expr()?;
                self.0.expect_punct(']')?;
                Ok(ZFactor::Matrix(ZMatExpr::bracket(a, b)))
            }
            Some(Tok::Ident(name)) => {
                self.0.bump();
                match name.as_str() {
                    "I" => Ok(ZFactor::Matrix(ZMatExpr::ScalarE(self.0.field.one()))),
                    "E" => {
                        self.0.expect_punct('(')?;
                        let i = self.0.signed_int()?;
                        self.0.expect_punct(',')?;
                        let j = self.0.signed_int()?;
                        self.0.expect_punct(')')?;
                        Ok(ZFactor::Matrix(ZMatExpr::basis(i, j)))
                    }
                    "finite" => {
                        self.0.expect_punct('{')?;
                        let mut entries = BTreeMap::new();
                        while !self.0.eat_punct('}') {
                            let i = self.0.signed_int()?;
                            self.0.expect_punct(',')?;
                            let j = self.0.signed_int()?;
                            self.0.expect_punct(':')?;
                            let v = self.0.scalar()?;
                            entries.insert((i, j), v);
                            self.0.eat_punct(',');
                        }
                        Ok(ZFactor::Matrix(ZMatExpr::FiniteLit(entries)))
                    }
                    "diag" => {
                        // Text form supports constant diagonals; richer
                        // two-sided descriptors travel through JSON.
                        self.0.expect_punct('(')?;
                        let s = self.0.seq()?;
                        self.0.expect_punct(')')?;
                        match s.eventual_value() {
                            Some(_) if s.is_eventually_constant() && s.settle_point() == 1 => {
                                Ok(ZFactor::Matrix(ZMatExpr::Diag(ZSeq::constant(s.eval(1)))))
                            }
                            _ => Err(ParseError {
                                msg: "two-sided diagonals need the JSON form; text accepts const(..)".into(),
                                span,
                            }),
                        }
                    }
                    "shift" => {
                        self.0.expect_punct('(')?;
                        let offset = self.0.signed_int()?;
                        if offset == 0 {
                            return Err(ParseError {
                                msg: "shift offset must be nonzero".into(),
                                span,
                            });
                        }
                        let mut weight = self.0.field.one();
                        if self.0.eat_punct(',') {
                            let s = self.0.seq()?;
                            if s.is_eventually_constant() && s.settle_point() == 1 {
                                weight = s.eval(1);
                            } else {
                                return Err(ParseError {
                                    msg: "two-sided shifts need the JSON form; text accepts const weights".into(),
                                    span,
                                });
                            }
                        }
                        self.0.expect_punct(')')?;
                        Ok(ZFactor::Matrix(ZMatExpr::Shift {
                            offset,
                            rows: ZSet::all(),
                            weights: ZSeq::constant(weight),
                        }))
                    }
                    other => Err(ParseError {
                        msg: format!("unknown form {other:?} on the two-sided index side"),
                        span,
                    }),
                }
            }
            _ => Err(ParseError {
                msg: "expected an expression".into(),
                span,
            }),
        }
    }
}

enum ZFactor {
    Scalar(FieldElem),
    Matrix(ZMatExpr),
}

/// Parses a ℤ-indexed expression in the ambient field.
pub fn parse_zexpr(src: &str, field: FieldId) -> PResult<ZMatExpr> {
    let tokens = lex(src)?;
    let mut p = ZParser(Parser {
        tokens,
        pos: 0,
        field,
        end: src.len(),
    });
    let e = p.expr()?;
    if p.0.pos != p.0.tokens.len() {
        return p.0.err("trailing input");
    }
    Ok(e)
}

fn render_seq(s: &SeqDesc) -> String {
    match s.kind() {
        SeqKind::FiniteSupport(map) => {
            let inner: Vec<String> = map.iter().map(|(i, v)| format!("{i}: {v}")).collect();
            format!("fin({})", inner.join(", "))
        }
        SeqKind::EventuallyConstant(prefix, tail) => {
            if prefix.is_empty() {
                format!("const({tail})")
            } else {
                let pre: Vec<String> = prefix.iter().map(|v| v.to_string()).collect();
                format!("periodic({}; {tail})", pre.join(", "))
            }
        }
        SeqKind::EventuallyPeriodic(prefix, period) => {
            let per: Vec<String> = period.iter().map(|v| v.to_string()).collect();
            if prefix.is_empty() {
                format!("periodic({})", per.join(", "))
            } else {
                let pre: Vec<String> = prefix.iter().map(|v| v.to_string()).collect();
                format!("periodic({}; {})", pre.join(", "), per.join(", "))
            }
        }
    }
}

fn render_set(s: &IndexSet) -> String {
    if *s == IndexSet::all() {
        return "all".into();
    }
    match s.kind() {
        SetKind::Finite(members) => {
            let inner: Vec<String> = members.iter().map(|m| m.to_string()).collect();
            format!("fin{{{}}}", inner.join(", "))
        }
        SetKind::EventuallyPeriodic(prefix, period) => {
            let bit = |b: &bool| if *b { "1" } else { "0" };
            let per: Vec<&str> = period.iter().map(bit).collect();
            if prefix.is_empty() {
                format!("periodic({})", per.join(", "))
            } else {
                let pre: Vec<&str> = prefix.iter().map(bit).collect();
                format!("periodic({}; {})", pre.join(", "), per.join(", "))
            }
        }
    }
}

/// Scalars inside expressions render field-neutrally: residues as bare
/// integers, rationals as n or n/d.
fn render_scalar(c: &FieldElem) -> String {
    match c {
        FieldElem::Prime { value, .. } => value.to_string(),
        other => other.to_string(),
    }
}

fn atomic(e: &MatExpr) -> bool {
    matches!(
        e,
        MatExpr::Basis(..)
            | MatExpr::FiniteLit(_)
            | MatExpr::Diag(_)
            | MatExpr::Shift { .. }
            | MatExpr::RowMat { .. }
            | MatExpr::Bracket(..)
            | MatExpr::SolveShift(_)
    )
}

fn render_factor(e: &MatExpr) -> String {
    if atomic(e) {
        render(e)
    } else {
        format!("({})", render(e))
    }
}

/// Renders an expression back into the DSL.
pub fn render(e: &MatExpr) -> String {
    match e {
        MatExpr::Zero => "0".into(),
        MatExpr::ScalarE(c) => {
            if c.is_one() {
                "I".into()
            } else {
                render_scalar(c)
            }
        }
        MatExpr::Basis(i, j) => format!("E({i},{j})"),
        MatExpr::FiniteLit(entries) => {
            let inner: Vec<String> = entries
                .iter()
                .map(|(&(i, j), v)| format!("{i},{j}: {}", render_scalar(v)))
                .collect();
            format!("finite{{{}}}", inner.join(", "))
        }
        MatExpr::Diag(s) => format!("diag({})", render_seq(s)),
        MatExpr::Shift {
            offset,
            rows,
            weights,
        } => format!("shift({offset}, {}, {})", render_set(rows), render_seq(weights)),
        MatExpr::RowMat { row, seq } => format!("row({row}, {})", render_seq(seq)),
        MatExpr::Sum(terms) => {
            let parts: Vec<String> = terms
                .iter()
                .map(|t| {
                    if matches!(t, MatExpr::Sum(_)) {
                        format!("({})", render(t))
                    } else {
                        render(t)
                    }
                })
                .collect();
            parts.join(" + ")
        }
        MatExpr::Scale(c, inner) => {
            format!("{} * {}", render_scalar(c), render_factor(inner))
        }
        MatExpr::Prod(a, b) => {
            format!("{} * {}", render_factor(a), render_factor(b))
        }
        MatExpr::Bracket(a, b) => format!("[{}, {}]", render(a), render(b)),
        MatExpr::SolveShift(a) => format!("solveshift({})", render(a)),
    }
}

/// Structural rendering for ℤ-indexed expressions. Two-sided descriptors
/// print as neg/zero/pos triples; this form is informational, the JSON
/// schema is the faithful interchange format.
pub fn render_z(e: &ZMatExpr) -> String {
    fn zseq(s: &ZSeq) -> String {
        format!(
            "zseq(neg: {}; zero: {}; pos: {})",
            render_seq(&s.neg),
            s.at_zero,
            render_seq(&s.pos)
        )
    }
    fn zset(s: &ZSet) -> String {
        format!(
            "zset(neg: {}; zero: {}; pos: {})",
            render_set(&s.neg),
            if s.at_zero { 1 } else { 0 },
            render_set(&s.pos)
        )
    }
    match e {
        ZMatExpr::Zero => "0".into(),
        ZMatExpr::ScalarE(c) => {
            if c.is_one() {
                "I".into()
            } else {
                render_scalar(c)
            }
        }
        ZMatExpr::Basis(i, j) => format!("E({i},{j})"),
        ZMatExpr::FiniteLit(entries) => {
            let inner: Vec<String> = entries
                .iter()
                .map(|(&(i, j), v)| format!("{i},{j}: {}", render_scalar(v)))
                .collect();
            format!("finite{{{}}}", inner.join(", "))
        }
        ZMatExpr::Diag(s) => format!("diag({})", zseq(s)),
        ZMatExpr::Shift {
            offset,
            rows,
            weights,
        } => format!("shift({offset}, {}, {})", zset(rows), zseq(weights)),
        ZMatExpr::RowMat { row, seq } => format!("row({row}, {})", zseq(seq)),
        ZMatExpr::Sum(terms) => {
            let parts: Vec<String> = terms.iter().map(render_z).collect();
            parts.join(" + ")
        }
        ZMatExpr::Scale(c, inner) => format!("{} * ({})", render_scalar(c), render_z(inner)),
        ZMatExpr::Prod(a, b) => format!("({}) * ({})", render_z(a), render_z(b)),
        ZMatExpr::Bracket(a, b) => format!("[{}, {}]", render_z(a), render_z(b)),
    }
}
