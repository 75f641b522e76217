//! Simple types, multiset types and typing contexts, shared by both systems.
//!
//! Multisets are stored sorted under the derived total order on types, and
//! every nested multiset is sorted too, so structural equality is multiset
//! equality at every level.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Name, Pattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    /// The single base type of the upper-bound system.
    Star,
    /// Tight constant for neutral terms.
    StarN,
    /// Tight constant for other canonical terms.
    StarM,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Base(Base),
    Product(MultisetType, MultisetType),
    Arrow(MultisetType, Box<SimpleType>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultisetType(Vec<SimpleType>);

/// Either form of type a judgment can assign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Assigned {
    Simple(SimpleType),
    Multi(MultisetType),
}

/// A map from names to multisets. Names mapped to `[]` are not stored, so
/// `G; x:[]` and `G` are the same value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypingContext(BTreeMap<Name, MultisetType>);

impl SimpleType {
    pub const STAR: SimpleType = SimpleType::Base(Base::Star);
    pub const N: SimpleType = SimpleType::Base(Base::StarN);
    pub const M: SimpleType = SimpleType::Base(Base::StarM);

    pub fn arrow(dom: MultisetType, cod: SimpleType) -> SimpleType {
        SimpleType::Arrow(dom, Box::new(cod))
    }

    pub fn is_tight(&self) -> bool {
        matches!(self, SimpleType::Base(Base::StarN | Base::StarM))
    }

    /// Whether `pred` holds for some base constant occurring in the type.
    pub fn any_base(&self, pred: &dyn Fn(Base) -> bool) -> bool {
        match self {
            SimpleType::Base(b) => pred(*b),
            SimpleType::Product(a, b) => a.any_base(pred) || b.any_base(pred),
            SimpleType::Arrow(a, s) => a.any_base(pred) || s.any_base(pred),
        }
    }
}

impl MultisetType {
    pub fn new(mut elems: Vec<SimpleType>) -> MultisetType {
        elems.sort();
        MultisetType(elems)
    }

    pub fn empty() -> MultisetType {
        MultisetType(Vec::new())
    }

    pub fn single(t: SimpleType) -> MultisetType {
        MultisetType(vec![t])
    }

    pub fn elems(&self) -> &[SimpleType] {
        &self.0
    }

    /// `|A|`, the number of elements counted with multiplicity.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_tight(&self) -> bool {
        self.0.iter().all(SimpleType::is_tight)
    }

    pub fn any_base(&self, pred: &dyn Fn(Base) -> bool) -> bool {
        self.0.iter().any(|t| t.any_base(pred))
    }
}

/// Multiset union: multiplicities add.
pub fn multiset_union(a: &MultisetType, b: &MultisetType) -> MultisetType {
    MultisetType::new(a.0.iter().chain(b.0.iter()).cloned().collect())
}

impl FromIterator<SimpleType> for MultisetType {
    fn from_iter<I: IntoIterator<Item = SimpleType>>(iter: I) -> Self {
        MultisetType::new(iter.into_iter().collect())
    }
}

impl Assigned {
    pub fn is_tight(&self) -> bool {
        match self {
            Assigned::Simple(t) => t.is_tight(),
            Assigned::Multi(a) => a.is_tight(),
        }
    }

    pub fn any_base(&self, pred: &dyn Fn(Base) -> bool) -> bool {
        match self {
            Assigned::Simple(t) => t.any_base(pred),
            Assigned::Multi(a) => a.any_base(pred),
        }
    }

    pub fn as_simple(&self) -> Option<&SimpleType> {
        match self {
            Assigned::Simple(t) => Some(t),
            Assigned::Multi(_) => None,
        }
    }

    pub fn as_multi(&self) -> Option<&MultisetType> {
        match self {
            Assigned::Multi(a) => Some(a),
            Assigned::Simple(_) => None,
        }
    }
}

impl TypingContext {
    pub fn new() -> TypingContext {
        TypingContext::default()
    }

    pub fn singleton(x: Name, a: MultisetType) -> TypingContext {
        let mut g = TypingContext::new();
        g.insert(x, a);
        g
    }

    /// Sets `x` to `a`; an empty `a` removes `x` from the domain.
    pub fn insert(&mut self, x: Name, a: MultisetType) {
        if a.is_empty() {
            self.0.remove(&x);
        } else {
            self.0.insert(x, a);
        }
    }

    pub fn get(&self, x: &str) -> MultisetType {
        self.0.get(x).cloned().unwrap_or_default()
    }

    pub fn dom(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &MultisetType)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_tight(&self) -> bool {
        self.0.values().all(MultisetType::is_tight)
    }

    pub fn any_base(&self, pred: &dyn Fn(Base) -> bool) -> bool {
        self.0.values().any(|a| a.any_base(pred))
    }

    /// `G|p`: keeps the variables of `p`.
    pub fn restrict(&self, p: &Pattern) -> TypingContext {
        let vars = p.vars();
        TypingContext(self.0.iter().filter(|(x, _)| vars.contains(x)).map(|(x, a)| (x.clone(), a.clone())).collect())
    }

    /// `G \ vars`: drops the given variables.
    pub fn erase<'a>(&self, vars: impl IntoIterator<Item = &'a Name>) -> TypingContext {
        let mut g = self.clone();
        for x in vars {
            g.0.remove(x);
        }
        g
    }

    /// `G ^ D`: pointwise multiset union.
    pub fn meet(&self, other: &TypingContext) -> TypingContext {
        let mut g = self.clone();
        for (x, a) in &other.0 {
            let joined = multiset_union(&g.get(x), a);
            g.insert(x.clone(), joined);
        }
        g
    }

    pub fn rename_keys(&self, f: &dyn Fn(&Name) -> Name) -> TypingContext {
        let mut g = TypingContext::new();
        for (x, a) in &self.0 {
            let joined = multiset_union(&g.get(&f(x)), a);
            g.insert(f(x), joined);
        }
        g
    }
}

/// Meet of a list of contexts; the empty list gives the empty context.
pub fn context_meet<'a>(gs: impl IntoIterator<Item = &'a TypingContext>) -> TypingContext {
    gs.into_iter().fold(TypingContext::new(), |acc, g| acc.meet(g))
}

pub fn context_restrict(g: &TypingContext, p: &Pattern) -> TypingContext {
    g.restrict(p)
}

pub fn context_erase<'a>(g: &TypingContext, vars: impl IntoIterator<Item = &'a Name>) -> TypingContext {
    g.erase(vars)
}

impl FromIterator<(Name, MultisetType)> for TypingContext {
    fn from_iter<I: IntoIterator<Item = (Name, MultisetType)>>(iter: I) -> Self {
        let mut g = TypingContext::new();
        for (x, a) in iter {
            let joined = multiset_union(&g.get(&x), &a);
            g.insert(x, joined);
        }
        g
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax: `*`, `*N`, `*M`, `[t1, t2]`, `A -> s`, `A x B`.

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Star => "*",
            Base::StarN => "*N",
            Base::StarM => "*M",
        })
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(b) => write!(f, "{b}"),
            SimpleType::Product(a, b) => write!(f, "{a} x {b}"),
            SimpleType::Arrow(a, s) => write!(f, "{a} -> {s}"),
        }
    }
}

impl fmt::Display for MultisetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Assigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assigned::Simple(t) => write!(f, "{t}"),
            Assigned::Multi(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, a)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{a}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad type at offset {pos}: {msg}")]
pub struct TypeSyntaxError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TTok {
    Star(Base),
    LBrack,
    RBrack,
    Comma,
    Arrow,
    Times,
    LParen,
    RParen,
    Eof,
}

fn lex_type(s: &str) -> Result<Vec<(usize, TTok)>, TypeSyntaxError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let (tok, width) = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '*' | '•' => match next {
                Some('N') => (TTok::Star(Base::StarN), 2),
                Some('M') => (TTok::Star(Base::StarM), 2),
                _ => (TTok::Star(Base::Star), 1),
            },
            '[' => (TTok::LBrack, 1),
            ']' => (TTok::RBrack, 1),
            ',' => (TTok::Comma, 1),
            '(' => (TTok::LParen, 1),
            ')' => (TTok::RParen, 1),
            'x' | '×' => (TTok::Times, 1),
            '→' => (TTok::Arrow, 1),
            '-' if next == Some('>') => (TTok::Arrow, 2),
            other => return Err(TypeSyntaxError { pos, msg: format!("unexpected `{other}`") }),
        };
        out.push((pos, tok));
        i += width;
    }
    out.push((s.len(), TTok::Eof));
    Ok(out)
}

struct TypeParser {
    toks: Vec<(usize, TTok)>,
    at: usize,
}

impl TypeParser {
    fn peek(&self) -> &TTok {
        &self.toks[self.at].1
    }

    fn bump(&mut self) {
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
    }

    fn fail<T>(&self, msg: &str) -> Result<T, TypeSyntaxError> {
        Err(TypeSyntaxError { pos: self.toks[self.at].0, msg: msg.to_string() })
    }

    fn expect(&mut self, t: TTok, what: &str) -> Result<(), TypeSyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn assigned(&mut self) -> Result<Assigned, TypeSyntaxError> {
        if *self.peek() == TTok::LBrack {
            let a = self.multiset()?;
            if *self.peek() == TTok::Eof {
                return Ok(Assigned::Multi(a));
            }
            return self.after_multiset(a).map(Assigned::Simple);
        }
        self.simple().map(Assigned::Simple)
    }

    fn simple(&mut self) -> Result<SimpleType, TypeSyntaxError> {
        match self.peek().clone() {
            TTok::Star(b) => {
                self.bump();
                Ok(SimpleType::Base(b))
            }
            TTok::LParen => {
                self.bump();
                let t = self.simple()?;
                self.expect(TTok::RParen, "`)`")?;
                Ok(t)
            }
            TTok::LBrack => {
                let a = self.multiset()?;
                self.after_multiset(a)
            }
            _ => self.fail("expected a type"),
        }
    }

    fn after_multiset(&mut self, a: MultisetType) -> Result<SimpleType, TypeSyntaxError> {
        match self.peek() {
            TTok::Arrow => {
                self.bump();
                Ok(SimpleType::arrow(a, self.simple()?))
            }
            TTok::Times => {
                self.bump();
                Ok(SimpleType::Product(a, self.multiset()?))
            }
            _ => self.fail("expected `->` or `x` after a multiset"),
        }
    }

    fn multiset(&mut self) -> Result<MultisetType, TypeSyntaxError> {
        self.expect(TTok::LBrack, "`[`")?;
        let mut elems = Vec::new();
        if *self.peek() != TTok::RBrack {
            elems.push(self.simple()?);
            while *self.peek() == TTok::Comma {
                self.bump();
                elems.push(self.simple()?);
            }
        }
        self.expect(TTok::RBrack, "`]`")?;
        Ok(MultisetType::new(elems))
    }

    fn done(&self) -> Result<(), TypeSyntaxError> {
        if *self.peek() == TTok::Eof {
            Ok(())
        } else {
            self.fail("trailing input")
        }
    }
}

/// Parses either a simple type or a bare multiset.
pub fn parse_assigned(s: &str) -> Result<Assigned, TypeSyntaxError> {
    let mut p = TypeParser { toks: lex_type(s)?, at: 0 };
    let a = p.assigned()?;
    p.done()?;
    Ok(a)
}

pub fn parse_simple_type(s: &str) -> Result<SimpleType, TypeSyntaxError> {
    let mut p = TypeParser { toks: lex_type(s)?, at: 0 };
    let t = p.simple()?;
    p.done()?;
    Ok(t)
}

pub fn parse_multiset(s: &str) -> Result<MultisetType, TypeSyntaxError> {
    let mut p = TypeParser { toks: lex_type(s)?, at: 0 };
    let a = p.multiset()?;
    p.done()?;
    Ok(a)
}
