//! Recursive-descent parser from tokens to an untyped syntax tree.
//!
//! Name resolution and sort checking happen afterwards in `check`.

use super::ast::{ArithOp, CmpOp};
use super::lexer::{Pos, Tok, Token};
use super::LangError;

#[derive(Clone, Debug)]
pub enum SExpr {
    Ident(String, Pos),
    Int(i64, Pos),
    Str(String, Pos),
    App(String, Vec<SExpr>, Pos),
    Arith(ArithOp, Box<SExpr>, Box<SExpr>, Pos),
    Neg(Box<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Ident(_, p)
            | SExpr::Int(_, p)
            | SExpr::Str(_, p)
            | SExpr::App(_, _, p)
            | SExpr::Arith(_, _, _, p)
            | SExpr::Neg(_, p) => *p,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SVar {
    pub name: String,
    pub sort: Option<String>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub enum SForm {
    Bool(bool, Pos),
    Atom(String, Vec<SExpr>, Pos),
    Cmp(CmpOp, SExpr, SExpr, Pos),
    Not(Box<SForm>, Pos),
    And(Box<SForm>, Box<SForm>, Pos),
    Or(Box<SForm>, Box<SForm>, Pos),
    Implies(Box<SForm>, Box<SForm>, Pos),
    ImpliedBy(Box<SForm>, Box<SForm>, Pos),
    Equiv(Box<SForm>, Box<SForm>, Pos),
    Quant {
        forall: bool,
        vars: Vec<SVar>,
        body: Box<SForm>,
        pos: Pos,
    },
}

impl SForm {
    pub fn pos(&self) -> Pos {
        match self {
            SForm::Bool(_, p)
            | SForm::Atom(_, _, p)
            | SForm::Cmp(_, _, _, p)
            | SForm::Not(_, p)
            | SForm::And(_, _, p)
            | SForm::Or(_, _, p)
            | SForm::Implies(_, _, p)
            | SForm::ImpliedBy(_, _, p)
            | SForm::Equiv(_, _, p) => *p,
            SForm::Quant { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SRule {
    pub vars: Vec<SVar>,
    pub head: SForm,
    pub body: Option<SForm>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub enum SVocItem {
    Type {
        name: String,
        isa: Option<String>,
        constructors: Option<Vec<String>>,
        pos: Pos,
    },
    Extern {
        name: String,
        pos: Pos,
    },
    Symbol {
        name: String,
        partial: bool,
        args: Vec<String>,
        out: Option<String>,
        pos: Pos,
    },
}

#[derive(Clone, Debug)]
pub enum SValue {
    Int(i64, Pos),
    Str(String, Pos),
    Ident(String, Pos),
}

impl SValue {
    pub fn pos(&self) -> Pos {
        match self {
            SValue::Int(_, p) | SValue::Str(_, p) | SValue::Ident(_, p) => *p,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SElem {
    Range(i64, i64, Pos),
    Tuple(Vec<SValue>, Option<SValue>, Pos),
}

#[derive(Clone, Debug)]
pub enum SInterp {
    Scalar(SValue),
    Set(Vec<SElem>),
    Procedure(String),
}

#[derive(Clone, Debug)]
pub struct SInterpItem {
    pub symbol: String,
    pub value: SInterp,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub enum SBlock {
    Vocabulary {
        name: String,
        ltc: bool,
        items: Vec<SVocItem>,
        pos: Pos,
    },
    Theory {
        name: String,
        vocabulary: String,
        vocabulary_pos: Pos,
        sentences: Vec<SForm>,
        definitions: Vec<Vec<SRule>>,
        pos: Pos,
    },
    Structure {
        name: String,
        vocabulary: String,
        vocabulary_pos: Pos,
        items: Vec<SInterpItem>,
        pos: Pos,
    },
    Procedure {
        name: String,
        text: String,
        pos: Pos,
    },
    Simulation {
        name: String,
        entries: Vec<(String, String, Pos)>,
        pos: Pos,
    },
}

const AGGREGATES: [&str; 5] = ["sum", "prod", "min", "max", "card"];

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
}

pub fn parse_blocks(toks: Vec<Token>) -> Result<Vec<SBlock>, LangError> {
    let mut p = Parser { toks, i: 0 };
    let mut blocks = Vec::new();
    while p.peek() != &Tok::Eof {
        blocks.push(p.block()?);
    }
    Ok(blocks)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, LangError> {
        if self.peek() == &t {
            Ok(self.advance().pos)
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, Pos), LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.advance().pos;
                Ok((s, pos))
            }
            t => self.error(format!("expected an identifier, found {t}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), LangError> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    /// `a::b::c`
    fn qualified_name(&mut self) -> Result<(String, Pos), LangError> {
        let (mut name, pos) = self.ident()?;
        while self.eat(&Tok::ColonColon) {
            name.push_str("::");
            name.push_str(&self.ident()?.0);
        }
        Ok((name, pos))
    }

    fn block(&mut self) -> Result<SBlock, LangError> {
        let pos = self.pos();
        if let Tok::Procedure { name, text } = self.peek().clone() {
            self.advance();
            return Ok(SBlock::Procedure { name, text, pos });
        }
        let (kw, _) = self.ident()?;
        match kw.as_str() {
            "vocabulary" | "LTCvocabulary" => {
                let (name, _) = self.qualified_name()?;
                self.eat(&Tok::Colon);
                self.expect(Tok::LBrace)?;
                let mut items = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    items.push(self.voc_item()?);
                    self.eat(&Tok::Semi);
                }
                Ok(SBlock::Vocabulary {
                    name,
                    ltc: kw == "LTCvocabulary",
                    items,
                    pos,
                })
            }
            "theory" => {
                let (name, _) = self.qualified_name()?;
                self.expect(Tok::Colon)?;
                let (vocabulary, vocabulary_pos) = self.qualified_name()?;
                self.expect(Tok::LBrace)?;
                let mut sentences = Vec::new();
                let mut definitions = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    if self.eat(&Tok::LBrace) {
                        let mut rules = Vec::new();
                        while !self.eat(&Tok::RBrace) {
                            rules.push(self.rule()?);
                        }
                        definitions.push(rules);
                    } else {
                        sentences.push(self.formula()?);
                        self.expect(Tok::Dot)?;
                    }
                }
                Ok(SBlock::Theory {
                    name,
                    vocabulary,
                    vocabulary_pos,
                    sentences,
                    definitions,
                    pos,
                })
            }
            "structure" => {
                let (name, _) = self.qualified_name()?;
                self.expect(Tok::Colon)?;
                let (vocabulary, vocabulary_pos) = self.qualified_name()?;
                self.expect(Tok::LBrace)?;
                let mut items = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    items.push(self.interp_item()?);
                    self.eat(&Tok::Semi);
                }
                Ok(SBlock::Structure {
                    name,
                    vocabulary,
                    vocabulary_pos,
                    items,
                    pos,
                })
            }
            "simulation" => {
                let (name, _) = self.qualified_name()?;
                self.expect(Tok::LBrace)?;
                let mut entries = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    let (role, rpos) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let (target, _) = self.qualified_name()?;
                    entries.push((role, target, rpos));
                    self.eat(&Tok::Semi);
                }
                Ok(SBlock::Simulation { name, entries, pos })
            }
            other => Err(LangError::Parse {
                pos,
                msg: format!(
                    "expected `vocabulary`, `theory`, `structure`, `procedure` or `simulation`, found `{other}`"
                ),
            }),
        }
    }

    fn voc_item(&mut self) -> Result<SVocItem, LangError> {
        let pos = self.pos();
        if self.is_keyword("type") {
            self.advance();
            let (name, _) = self.ident()?;
            let mut isa = None;
            let mut constructors = None;
            if self.is_keyword("isa") {
                self.advance();
                isa = Some(self.ident()?.0);
            }
            if self.is_keyword("constructed") {
                self.advance();
                self.keyword("from")?;
                self.expect(Tok::LBrace)?;
                let mut cs = Vec::new();
                loop {
                    cs.push(self.ident()?.0);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                constructors = Some(cs);
            }
            return Ok(SVocItem::Type {
                name,
                isa,
                constructors,
                pos,
            });
        }
        if self.is_keyword("extern") {
            self.advance();
            self.keyword("vocabulary")?;
            let (name, _) = self.qualified_name()?;
            return Ok(SVocItem::Extern { name, pos });
        }
        let partial = if self.is_keyword("partial") {
            self.advance();
            true
        } else {
            false
        };
        let (name, _) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.ident()?.0);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let out = if self.eat(&Tok::Colon) {
            Some(self.ident()?.0)
        } else {
            None
        };
        if partial && out.is_none() {
            return Err(LangError::Parse {
                pos,
                msg: format!("`partial` applies to functions only, but `{name}` has no result sort"),
            });
        }
        Ok(SVocItem::Symbol {
            name,
            partial,
            args,
            out,
            pos,
        })
    }

    fn interp_item(&mut self) -> Result<SInterpItem, LangError> {
        let (symbol, pos) = self.ident()?;
        self.expect(Tok::Eq)?;
        let value = if self.eat(&Tok::LBrace) {
            let mut elems = Vec::new();
            if !self.eat(&Tok::RBrace) {
                loop {
                    elems.push(self.elem()?);
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    self.expect(Tok::Semi)?;
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                }
            }
            SInterp::Set(elems)
        } else if self.is_keyword("procedure") {
            self.advance();
            SInterp::Procedure(self.ident()?.0)
        } else {
            SInterp::Scalar(self.value()?)
        };
        Ok(SInterpItem { symbol, value, pos })
    }

    fn elem(&mut self) -> Result<SElem, LangError> {
        let pos = self.pos();
        if self.eat(&Tok::LParen) {
            let mut vals = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    vals.push(self.value()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            let image = if self.eat(&Tok::MapsTo) {
                Some(self.value()?)
            } else {
                None
            };
            return Ok(SElem::Tuple(vals, image, pos));
        }
        let first = self.value()?;
        if self.eat(&Tok::DotDot) {
            let hi = self.value()?;
            return match (first, hi) {
                (SValue::Int(lo, _), SValue::Int(hi, _)) => Ok(SElem::Range(lo, hi, pos)),
                _ => Err(LangError::Parse {
                    pos,
                    msg: "ranges need integer bounds".into(),
                }),
            };
        }
        let mut vals = vec![first];
        while self.eat(&Tok::Comma) {
            vals.push(self.value()?);
        }
        let image = if self.eat(&Tok::MapsTo) {
            Some(self.value()?)
        } else {
            None
        };
        Ok(SElem::Tuple(vals, image, pos))
    }

    fn value(&mut self) -> Result<SValue, LangError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(SValue::Int(n, pos))
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.advance();
                        Ok(SValue::Int(-n, pos))
                    }
                    t => self.error(format!("expected an integer after `-`, found {t}")),
                }
            }
            Tok::Str(s) => {
                self.advance();
                Ok(SValue::Str(s, pos))
            }
            Tok::Ident(s) => {
                self.advance();
                if self.peek() == &Tok::LParen && self.peek_at(1) == &Tok::RParen {
                    self.advance();
                    self.advance();
                }
                Ok(SValue::Ident(s, pos))
            }
            Tok::DotDot => self.error("elided enumerations (`...`) are not part of the language"),
            t => self.error(format!("expected a value, found {t}")),
        }
    }

    fn quant_vars(&mut self) -> Result<Vec<SVar>, LangError> {
        let mut vars = Vec::new();
        while let Tok::Ident(name) = self.peek().clone() {
            let pos = self.advance().pos;
            let sort = if self.eat(&Tok::LBrack) {
                let s = self.ident()?.0;
                self.expect(Tok::RBrack)?;
                Some(s)
            } else {
                None
            };
            vars.push(SVar { name, sort, pos });
        }
        if vars.is_empty() {
            return self.error("expected quantified variables");
        }
        self.expect(Tok::Colon)?;
        Ok(vars)
    }

    fn rule(&mut self) -> Result<SRule, LangError> {
        let pos = self.pos();
        let vars = if self.eat(&Tok::Forall) {
            self.quant_vars()?
        } else {
            Vec::new()
        };
        let head = self.atomic()?;
        let body = if self.eat(&Tok::Arrow) {
            Some(self.formula()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        Ok(SRule { vars, head, body, pos })
    }

    pub fn formula(&mut self) -> Result<SForm, LangError> {
        let mut lhs = self.implication()?;
        while self.peek() == &Tok::Equiv {
            let pos = self.advance().pos;
            let rhs = self.implication()?;
            lhs = SForm::Equiv(Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<SForm, LangError> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Tok::Implies => {
                let pos = self.advance().pos;
                let rhs = self.implication()?;
                Ok(SForm::Implies(Box::new(lhs), Box::new(rhs), pos))
            }
            Tok::ImpliedBy => {
                let pos = self.advance().pos;
                let rhs = self.implication()?;
                Ok(SForm::ImpliedBy(Box::new(lhs), Box::new(rhs), pos))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<SForm, LangError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == &Tok::Or {
            let pos = self.advance().pos;
            let rhs = self.conjunction()?;
            lhs = SForm::Or(Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<SForm, LangError> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::And {
            let pos = self.advance().pos;
            let rhs = self.unary()?;
            lhs = SForm::And(Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SForm, LangError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(SForm::Not(Box::new(self.unary()?), pos))
            }
            Tok::Forall | Tok::Exists => {
                let forall = self.advance().tok == Tok::Forall;
                let vars = self.quant_vars()?;
                let body = self.formula()?;
                Ok(SForm::Quant {
                    forall,
                    vars,
                    body: Box::new(body),
                    pos,
                })
            }
            _ => self.atomic(),
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn atomic(&mut self) -> Result<SForm, LangError> {
        let pos = self.pos();
        if let Tok::Ident(s) = self.peek() {
            if (s == "true" || s == "false") && self.peek_at(1) != &Tok::LParen {
                let b = s == "true";
                self.advance();
                return Ok(SForm::Bool(b, pos));
            }
        }
        let start = self.i;
        let term = self.term();
        match term {
            Ok(lhs) => {
                if let Some(op) = self.cmp_op() {
                    let pos = self.advance().pos;
                    let rhs = self.term()?;
                    if self.cmp_op().is_some() {
                        return self.error("comparisons are not associative; add parentheses");
                    }
                    return Ok(SForm::Cmp(op, lhs, rhs, pos));
                }
                match lhs {
                    SExpr::Ident(name, p) => return Ok(SForm::Atom(name, Vec::new(), p)),
                    SExpr::App(name, args, p) => return Ok(SForm::Atom(name, args, p)),
                    _ => {}
                }
                self.i = start;
                if self.peek() == &Tok::LParen {
                    return self.paren_formula();
                }
                Err(LangError::Parse {
                    pos,
                    msg: "expected a formula, found a term".into(),
                })
            }
            Err(e) => {
                if matches!(e, LangError::Unsupported { .. }) {
                    return Err(e);
                }
                self.i = start;
                if self.peek() == &Tok::LParen {
                    self.paren_formula()
                } else {
                    Err(e)
                }
            }
        }
    }

    fn paren_formula(&mut self) -> Result<SForm, LangError> {
        self.expect(Tok::LParen)?;
        let f = self.formula()?;
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    pub fn term(&mut self) -> Result<SExpr, LangError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.advance().pos;
            let rhs = self.product()?;
            lhs = SExpr::Arith(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn product(&mut self) -> Result<SExpr, LangError> {
        let mut lhs = self.neg()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash | Tok::Percent => {
                    return self.error("only `+`, `-` and `*` are supported in arithmetic");
                }
                _ => return Ok(lhs),
            };
            let pos = self.advance().pos;
            let rhs = self.neg()?;
            lhs = SExpr::Arith(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn neg(&mut self) -> Result<SExpr, LangError> {
        if self.peek() == &Tok::Minus {
            let pos = self.advance().pos;
            if let Tok::Int(n) = self.peek().clone() {
                self.advance();
                return Ok(SExpr::Int(-n, pos));
            }
            return Ok(SExpr::Neg(Box::new(self.neg()?), pos));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SExpr, LangError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(SExpr::Int(n, pos))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(SExpr::Str(s, pos))
            }
            Tok::Hash => Err(LangError::Unsupported {
                pos,
                msg: "aggregates are not supported".into(),
            }),
            Tok::Ident(name) => {
                self.advance();
                if AGGREGATES.contains(&name.as_str()) && self.peek() == &Tok::LBrace {
                    return Err(LangError::Unsupported {
                        pos,
                        msg: format!("aggregate `{name}{{...}}` is not supported"),
                    });
                }
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.term()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Ok(SExpr::App(name, args, pos))
                } else {
                    Ok(SExpr::Ident(name, pos))
                }
            }
            Tok::LParen => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => self.error(format!("expected a term, found {t}")),
        }
    }
}
