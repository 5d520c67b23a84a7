//! Textual first-order queries over the trib relations.
//!
//! The concrete syntax follows the usual theorem-prover conventions:
//!
//! ```text
//! ?msd_trib Ea Eb (s=a+b) & ((TRL[n]=@0)=>b=0) & $rst(n,a)
//! ```
//!
//! * quantifiers `E` (exists) and `A` (for all) take a comma-separated
//!   variable list, possibly glued to the first variable (`Ea`, `Am`), and
//!   scope to the end of the enclosing parenthesis;
//! * connectives `~ & | => <=>` in decreasing binding strength, with `~`
//!   applying to the atom or parenthesized formula right after it;
//! * atoms compare sums of variables and constants (`u+t=s`, `m<n`), index a
//!   word automaton (`TRL[n]=@1`), or call a named relation (`$rst(n,a)`);
//!   call arguments may themselves be sums, which desugar through fresh
//!   existential variables;
//! * a leading `?msd_trib` tag is accepted and ignored: Tribonacci is the
//!   only numeration system here.

use std::collections::BTreeMap;
use std::fmt;

use crate::relations::{dfao_eq, Relation, RelationContext, RelationError};
use crate::worddfao::WordDfaoRegistry;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(u64),
    Sum(Box<Term>, Box<Term>),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Sum(a, b) => write!(f, "{a}+{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Quant {
        universal: bool,
        vars: Vec<String>,
        body: Box<Formula>,
    },
    Not(Box<Formula>),
    Bin {
        op: Connective,
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
    Compare {
        op: CmpOp,
        lhs: Term,
        rhs: Term,
    },
    /// `Word[term] = @value`
    WordEq {
        word: String,
        index: Term,
        value: i64,
    },
    /// `$name(args)`
    Call {
        name: String,
        args: Vec<Term>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported numeration system `{0}` (only msd_trib)")]
    UnsupportedNumeration(String),
    #[error("unbound relation `${0}`")]
    UnboundRelation(String),
    #[error("unbound word automaton `{0}`")]
    UnboundWord(String),
    #[error("relation `${name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("quantified variable `{0}` is not free in its scope")]
    QuantifierVarNotFree(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    WordName(String),
    Number(u64),
    AtValue(i64),
    Quant(bool), // universal?
    Dollar,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Amp,
    Pipe,
    Tilde,
    Implies,
    Iff,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    tokens: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(text: &'a str) -> Result<Vec<(usize, Tok)>, QueryError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
            tokens: Vec::new(),
        };
        lx.scan()?;
        Ok(lx.tokens)
    }

    fn err(&self, msg: &str) -> QueryError {
        QueryError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn scan(&mut self) -> Result<(), QueryError> {
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                }
                b'?' => {
                    self.pos += 1;
                    let tag = self.take_word();
                    if tag != "msd_trib" {
                        return Err(QueryError::UnsupportedNumeration(tag));
                    }
                    // accepted and ignored
                }
                b'(' => self.push1(start, Tok::LParen),
                b')' => self.push1(start, Tok::RParen),
                b'[' => self.push1(start, Tok::LBracket),
                b']' => self.push1(start, Tok::RBracket),
                b',' => self.push1(start, Tok::Comma),
                b'+' => self.push1(start, Tok::Plus),
                b'&' => self.push1(start, Tok::Amp),
                b'|' => self.push1(start, Tok::Pipe),
                b'~' => self.push1(start, Tok::Tilde),
                b'$' => self.push1(start, Tok::Dollar),
                b'=' => {
                    if self.src.get(self.pos + 1) == Some(&b'>') {
                        self.pos += 2;
                        self.tokens.push((start, Tok::Implies));
                    } else {
                        self.push1(start, Tok::Eq);
                    }
                }
                b'!' => {
                    if self.src.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        self.tokens.push((start, Tok::Ne));
                    } else {
                        return Err(self.err("expected `!=`"));
                    }
                }
                b'<' => {
                    if self.src[self.pos..].starts_with(b"<=>") {
                        self.pos += 3;
                        self.tokens.push((start, Tok::Iff));
                    } else if self.src[self.pos..].starts_with(b"<=") {
                        self.pos += 2;
                        self.tokens.push((start, Tok::Le));
                    } else {
                        self.push1(start, Tok::Lt);
                    }
                }
                b'>' => {
                    if self.src.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        self.tokens.push((start, Tok::Ge));
                    } else {
                        self.push1(start, Tok::Gt);
                    }
                }
                b'@' => {
                    self.pos += 1;
                    let negative = self.src.get(self.pos) == Some(&b'-');
                    if negative {
                        self.pos += 1;
                    }
                    let num = self
                        .take_number()
                        .ok_or_else(|| self.err("expected digits after `@`"))?;
                    let value = num as i64;
                    self.tokens
                        .push((start, Tok::AtValue(if negative { -value } else { value })));
                }
                b'0'..=b'9' => {
                    let num = self.take_number().unwrap();
                    self.tokens.push((start, Tok::Number(num)));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let word = self.take_word();
                    let first = word.as_bytes()[0];
                    if word == "E" || word == "A" {
                        self.tokens.push((start, Tok::Quant(word == "A")));
                    } else if (first == b'E' || first == b'A')
                        && word.len() > 1
                        && word.as_bytes()[1..]
                            .iter()
                            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'_')
                    {
                        // `Ea` is the quantifier E followed by the variable a
                        self.tokens.push((start, Tok::Quant(first == b'A')));
                        self.tokens
                            .push((start + 1, Tok::Ident(word[1..].to_string())));
                    } else if first.is_ascii_uppercase() {
                        self.tokens.push((start, Tok::WordName(word)));
                    } else {
                        self.tokens.push((start, Tok::Ident(word)));
                    }
                }
                other => {
                    return Err(self.err(&format!("unexpected character `{}`", other as char)));
                }
            }
        }
        Ok(())
    }

    fn push1(&mut self, start: usize, tok: Tok) {
        self.pos += 1;
        self.tokens.push((start, tok));
    }

    fn take_word(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn take_number(&mut self) -> Option<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

pub fn parse(text: &str) -> Result<Formula, QueryError> {
    let tokens = Lexer::run(text)?;
    let end = text.len();
    let mut parser = Parser {
        tokens,
        pos: 0,
        end,
    };
    let formula = parser.formula()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(formula)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> QueryError {
        let pos = self
            .tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end);
        QueryError::Parse {
            pos,
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), QueryError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, QueryError> {
        let mut lhs = self.implies_level()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implies_level()?;
            lhs = Formula::Bin {
                op: Connective::Iff,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn implies_level(&mut self) -> Result<Formula, QueryError> {
        let mut lhs = self.or_level()?;
        while self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.or_level()?;
            lhs = Formula::Bin {
                op: Connective::Implies,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn or_level(&mut self) -> Result<Formula, QueryError> {
        let mut lhs = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_level()?;
            lhs = Formula::Bin {
                op: Connective::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, QueryError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::Bin {
                op: Connective::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, QueryError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Quant(universal)) => {
                let universal = *universal;
                self.pos += 1;
                let mut vars = vec![self.ident("quantified variable")?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    vars.push(self.ident("quantified variable")?);
                }
                // quantifiers scope to the end of the enclosing parenthesis
                let body = self.formula()?;
                Ok(Formula::Quant {
                    universal,
                    vars,
                    body: Box::new(body),
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Dollar) => {
                self.pos += 1;
                let name = self.ident("relation name after `$`")?;
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.term()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::Call { name, args })
            }
            Some(Tok::WordName(_)) => {
                let name = match self.next() {
                    Some(Tok::WordName(n)) => n,
                    _ => unreachable!(),
                };
                self.expect(Tok::LBracket, "`[`")?;
                let index = self.term()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Eq, "`=` after word indexing")?;
                match self.next() {
                    Some(Tok::AtValue(v)) => Ok(Formula::WordEq {
                        word: name,
                        index,
                        value: v,
                    }),
                    _ => Err(self.error("expected `@value`")),
                }
            }
            _ => {
                let lhs = self.term()?;
                let op = match self.next() {
                    Some(Tok::Eq) => CmpOp::Eq,
                    Some(Tok::Ne) => CmpOp::Ne,
                    Some(Tok::Lt) => CmpOp::Lt,
                    Some(Tok::Le) => CmpOp::Le,
                    Some(Tok::Gt) => CmpOp::Gt,
                    Some(Tok::Ge) => CmpOp::Ge,
                    _ => return Err(self.error("expected a comparison operator")),
                };
                let rhs = self.term()?;
                Ok(Formula::Compare { op, lhs, rhs })
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn term(&mut self) -> Result<Term, QueryError> {
        let mut t = self.primary_term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.primary_term()?;
            t = Term::Sum(Box::new(t), Box::new(rhs));
        }
        Ok(t)
    }

    fn primary_term(&mut self) -> Result<Term, QueryError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(Term::Var(s)),
            Some(Tok::Number(n)) => Ok(Term::Const(n)),
            _ => Err(self.error("expected a variable or a number")),
        }
    }
}

// ---------------------------------------------------------------------------
// compilation
// ---------------------------------------------------------------------------

/// Named relations and word automata a query may reference.
#[derive(Default)]
pub struct QueryEnv {
    pub relations: BTreeMap<String, Relation>,
    pub words: WordDfaoRegistry,
}

impl QueryEnv {
    pub fn new() -> QueryEnv {
        QueryEnv::default()
    }
}

struct Compiler<'a> {
    ctx: &'a RelationContext,
    env: &'a QueryEnv,
    fresh: usize,
}

/// Compiles a parsed formula into a relation over its free variables.
pub fn compile(
    formula: &Formula,
    ctx: &RelationContext,
    env: &QueryEnv,
) -> Result<Relation, QueryError> {
    let mut compiler = Compiler { ctx, env, fresh: 0 };
    compiler.compile(formula)
}

/// Parses and compiles in one step.
pub fn run_query(
    text: &str,
    ctx: &RelationContext,
    env: &QueryEnv,
) -> Result<Relation, QueryError> {
    compile(&parse(text)?, ctx, env)
}

/// Free variables of a formula, for projection scheduling.
fn free_vars(f: &Formula, out: &mut std::collections::BTreeSet<String>) {
    fn term_vars(t: &Term, out: &mut std::collections::BTreeSet<String>) {
        match t {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Sum(a, b) => {
                term_vars(a, out);
                term_vars(b, out);
            }
        }
    }
    match f {
        Formula::Quant { vars, body, .. } => {
            let mut inner = std::collections::BTreeSet::new();
            free_vars(body, &mut inner);
            for v in vars {
                inner.remove(v);
            }
            out.extend(inner);
        }
        Formula::Not(inner) => free_vars(inner, out),
        Formula::Bin { lhs, rhs, .. } => {
            free_vars(lhs, out);
            free_vars(rhs, out);
        }
        Formula::Compare { lhs, rhs, .. } => {
            term_vars(lhs, out);
            term_vars(rhs, out);
        }
        Formula::WordEq { index, .. } => term_vars(index, out),
        Formula::Call { args, .. } => {
            for a in args {
                term_vars(a, out);
            }
        }
    }
}

fn flatten_and<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::Bin {
            op: Connective::And,
            lhs,
            rhs,
        } => {
            flatten_and(lhs, out);
            flatten_and(rhs, out);
        }
        other => out.push(other),
    }
}

impl<'a> Compiler<'a> {
    fn fresh_var(&mut self) -> String {
        let name = format!("#{}", self.fresh);
        self.fresh += 1;
        name
    }

    fn compile(&mut self, f: &Formula) -> Result<Relation, QueryError> {
        match f {
            Formula::Quant {
                universal,
                vars,
                body,
            } => {
                if !universal {
                    return self.compile_exists(vars, body);
                }
                let inner = self.compile(body)?;
                for v in vars {
                    if !inner.vars().contains(v) {
                        return Err(QueryError::QuantifierVarNotFree(v.clone()));
                    }
                }
                let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                Ok(inner.forall(&names)?)
            }
            Formula::Not(inner) => Ok(self.compile(inner)?.not()?),
            Formula::Bin { op, lhs, rhs } => {
                let l = self.compile(lhs)?;
                let r = self.compile(rhs)?;
                let out = match op {
                    Connective::And => l.and(&r)?,
                    Connective::Or => l.or(&r)?,
                    Connective::Implies => l.implies(&r)?,
                    Connective::Iff => l.iff(&r)?,
                };
                Ok(out)
            }
            Formula::Compare { op, lhs, rhs } => self.compile_compare(*op, lhs, rhs),
            Formula::WordEq { word, index, value } => {
                let dfao = self
                    .env
                    .words
                    .get(word)
                    .ok_or_else(|| QueryError::UnboundWord(word.clone()))?;
                match index {
                    Term::Var(v) => Ok(dfao_eq(dfao, v, *value)?),
                    other => {
                        let aux = self.fresh_var();
                        let base = dfao_eq(dfao, &aux, *value)?;
                        let bind =
                            self.compile_compare(CmpOp::Eq, &Term::Var(aux.clone()), other)?;
                        Ok(base.and(&bind)?.exists(&[aux.as_str()])?)
                    }
                }
            }
            Formula::Call { name, args } => self.compile_call(name, args),
        }
    }

    /// Existential quantification over a conjunction projects each bound
    /// variable as soon as no remaining conjunct mentions it, which keeps
    /// the intermediate track count small on wide formulas.
    fn compile_exists(&mut self, vars: &[String], body: &Formula) -> Result<Relation, QueryError> {
        let mut conjuncts = Vec::new();
        flatten_and(body, &mut conjuncts);
        let frees: Vec<std::collections::BTreeSet<String>> = conjuncts
            .iter()
            .map(|c| {
                let mut s = std::collections::BTreeSet::new();
                free_vars(c, &mut s);
                s
            })
            .collect();
        for v in vars {
            if !frees.iter().any(|f| f.contains(v)) {
                return Err(QueryError::QuantifierVarNotFree(v.clone()));
            }
        }
        let mut pending: std::collections::BTreeSet<&String> = vars.iter().collect();
        let mut acc: Option<Relation> = None;
        for (k, conjunct) in conjuncts.iter().enumerate() {
            let compiled = self.compile(conjunct)?;
            acc = Some(match acc {
                None => compiled,
                Some(prev) => prev.and(&compiled)?,
            });
            let current = acc.as_ref().unwrap();
            let ready: Vec<String> = pending
                .iter()
                .filter(|v| {
                    current.vars().contains(*v) && !frees[k + 1..].iter().any(|f| f.contains(**v))
                })
                .map(|v| (*v).clone())
                .collect();
            if !ready.is_empty() {
                let refs: Vec<&str> = ready.iter().map(|s| s.as_str()).collect();
                acc = Some(acc.unwrap().exists(&refs)?);
                for v in &ready {
                    pending.remove(v);
                }
            }
        }
        Ok(acc.expect("conjunction is never empty"))
    }

    /// Grounds a term to a variable, emitting constraints for constants and
    /// sums through fresh existentially quantified names.
    fn ground_term(
        &mut self,
        term: &Term,
        constraints: &mut Vec<Relation>,
        auxes: &mut Vec<String>,
    ) -> Result<String, QueryError> {
        match term {
            Term::Var(v) => Ok(v.clone()),
            Term::Const(c) => {
                let aux = self.fresh_var();
                constraints.push(self.ctx.rel_const(&aux, *c)?);
                auxes.push(aux.clone());
                Ok(aux)
            }
            Term::Sum(a, b) => {
                let va = self.ground_term(a, constraints, auxes)?;
                let mut vb = self.ground_term(b, constraints, auxes)?;
                if vb == va {
                    // x + x needs an alias for the second operand
                    let alias = self.fresh_var();
                    constraints.push(self.ctx.rel_eq(&alias, &va)?);
                    auxes.push(alias.clone());
                    vb = alias;
                }
                let aux = self.fresh_var();
                constraints.push(self.ctx.rel_sum(&aux, &va, &vb)?);
                auxes.push(aux.clone());
                Ok(aux)
            }
        }
    }

    fn compile_compare(
        &mut self,
        op: CmpOp,
        lhs: &Term,
        rhs: &Term,
    ) -> Result<Relation, QueryError> {
        // direct forms that need no auxiliaries
        match (op, lhs, rhs) {
            (CmpOp::Eq, Term::Var(x), Term::Sum(a, b))
            | (CmpOp::Eq, Term::Sum(a, b), Term::Var(x)) => {
                if let (Term::Var(y), Term::Var(z)) = (a.as_ref(), b.as_ref()) {
                    if x != y && x != z && y != z {
                        return Ok(self.ctx.rel_sum(x, y, z)?);
                    }
                }
            }
            (CmpOp::Eq, Term::Var(x), Term::Const(c))
            | (CmpOp::Eq, Term::Const(c), Term::Var(x)) => {
                return Ok(self.ctx.rel_const(x, *c)?);
            }
            _ => {}
        }
        let mut constraints = Vec::new();
        let mut auxes = Vec::new();
        let va = self.ground_term(lhs, &mut constraints, &mut auxes)?;
        let vb = self.ground_term(rhs, &mut constraints, &mut auxes)?;
        let base = if va == vb {
            // reflexive comparison: trivially true or trivially false
            match op {
                CmpOp::Eq | CmpOp::Le | CmpOp::Ge => self.ctx.rel_true(&va)?,
                CmpOp::Ne | CmpOp::Lt | CmpOp::Gt => self.ctx.rel_false(&va)?,
            }
        } else {
            match op {
                CmpOp::Eq => self.ctx.rel_eq(&va, &vb)?,
                CmpOp::Ne => self.ctx.rel_eq(&va, &vb)?.not()?,
                CmpOp::Lt => self.ctx.rel_lt(&va, &vb)?,
                CmpOp::Le => self.ctx.rel_leq(&va, &vb)?,
                CmpOp::Gt => self.ctx.rel_lt(&vb, &va)?,
                CmpOp::Ge => self.ctx.rel_leq(&vb, &va)?,
            }
        };
        self.close_over(base, constraints, auxes)
    }

    fn compile_call(&mut self, name: &str, args: &[Term]) -> Result<Relation, QueryError> {
        let rel = self
            .env
            .relations
            .get(name)
            .ok_or_else(|| QueryError::UnboundRelation(name.to_string()))?
            .clone();
        if rel.arity() != args.len() {
            return Err(QueryError::ArityMismatch {
                name: name.to_string(),
                expected: rel.arity(),
                got: args.len(),
            });
        }
        // plain distinct variables rename directly
        let plain: Option<Vec<&String>> = args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Some(v),
                _ => None,
            })
            .collect();
        if let Some(vars) = plain {
            let mut distinct = vars.clone();
            distinct.sort();
            distinct.dedup();
            if distinct.len() == vars.len() {
                let params: Vec<String> = rel.vars().to_vec();
                let map: Vec<(&str, &str)> = params
                    .iter()
                    .zip(vars.iter())
                    .map(|(p, v)| (p.as_str(), v.as_str()))
                    .collect();
                return Ok(rel.renamed(&map)?);
            }
        }
        // general case: rename parameters to fresh names, then bind each to
        // its argument term and project the fresh names away
        let params: Vec<String> = rel.vars().to_vec();
        let fresh: Vec<String> = params.iter().map(|_| self.fresh_var()).collect();
        let map: Vec<(&str, &str)> = params
            .iter()
            .zip(fresh.iter())
            .map(|(p, f)| (p.as_str(), f.as_str()))
            .collect();
        let mut out = rel.renamed(&map)?;
        for (f, arg) in fresh.iter().zip(args.iter()) {
            let bound = self.compile_compare(CmpOp::Eq, &Term::Var(f.clone()), arg)?;
            out = out.and(&bound)?;
        }
        let fresh_refs: Vec<&str> = fresh.iter().map(|s| s.as_str()).collect();
        Ok(out.exists(&fresh_refs)?)
    }

    fn close_over(
        &mut self,
        base: Relation,
        constraints: Vec<Relation>,
        auxes: Vec<String>,
    ) -> Result<Relation, QueryError> {
        let mut out = base;
        for c in constraints {
            out = out.and(&c)?;
        }
        if !auxes.is_empty() {
            let refs: Vec<&str> = auxes.iter().map(|s| s.as_str()).collect();
            out = out.exists(&refs)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> QueryEnv {
        QueryEnv {
            relations: BTreeMap::new(),
            words: WordDfaoRegistry::standard(),
        }
    }

    #[test]
    fn quantifiers_scope_to_the_right() {
        // `A & Quant ...` keeps the implication inside the quantifier body
        let f = parse("n=1 & Am (m<n) => m=0").unwrap();
        match f {
            Formula::Bin {
                op: Connective::And,
                rhs,
                ..
            } => match *rhs {
                Formula::Quant {
                    universal, body, ..
                } => {
                    assert!(universal);
                    assert!(matches!(
                        *body,
                        Formula::Bin {
                            op: Connective::Implies,
                            ..
                        }
                    ));
                }
                other => panic!("expected quantifier, got {other:?}"),
            },
            other => panic!("expected conjunction, got {other:?}"),
        }
    }

    #[test]
    fn glued_and_listed_quantifier_variables() {
        let glued = parse("Ea Eb a=b").unwrap();
        let listed = parse("E a,b a=b").unwrap();
        match (glued, listed) {
            (Formula::Quant { vars: v1, body, .. }, Formula::Quant { vars: v2, .. }) => {
                assert_eq!(v1, vec!["a"]);
                assert!(matches!(*body, Formula::Quant { .. }));
                assert_eq!(v2, vec!["a", "b"]);
            }
            other => panic!("unexpected shapes: {other:?}"),
        }
    }

    #[test]
    fn tilde_binds_the_following_unit() {
        let f = parse("~a=b | c=d").unwrap();
        assert!(matches!(
            f,
            Formula::Bin {
                op: Connective::Or,
                ..
            }
        ));
    }

    #[test]
    fn word_indexing_compiles_against_the_registry() {
        let ctx = RelationContext::new().unwrap();
        let rel = run_query("TRL[n]=@1", &ctx, &env()).unwrap();
        assert!(rel.accepts_values(&[12]));
        assert!(!rel.accepts_values(&[6]));
        let tr2 = run_query("TR[n]=@2", &ctx, &env()).unwrap();
        assert!(tr2.accepts_values(&[3]));
        assert!(!tr2.accepts_values(&[4]));
    }

    #[test]
    fn sums_in_word_index_desugar() {
        let ctx = RelationContext::new().unwrap();
        let rel = run_query("TR[n+1]=@2", &ctx, &env()).unwrap();
        assert!(rel.accepts_values(&[2]));
        assert!(!rel.accepts_values(&[3]));
    }

    #[test]
    fn numeration_tag_is_checked() {
        assert!(parse("?msd_trib x=1").is_ok());
        assert!(matches!(
            parse("?msd_fib x=1"),
            Err(QueryError::UnsupportedNumeration(_))
        ));
    }
}
