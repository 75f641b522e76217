//! Terms and patterns of the pair calculus, their binding structure, and
//! the textual front end.
//!
//! Names are kept as written. Bound variables are renamed only when a
//! rewrite would otherwise capture something, and the renaming scheme is
//! deterministic (base name plus the smallest free numeric suffix), so
//! traces print the same way on every run.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Variable names. Cheap to clone and safe to share across threads.
pub type Name = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Var(Name),
    Pair(Box<Pattern>, Box<Pattern>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Abs(Pattern, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `Match(t, p, u)` is the explicit matching `t[p/u]`; `p` binds in `t` only.
    Match(Box<Term>, Pattern, Box<Term>),
}

/// A path of child indices from the root of a term.
///
/// Children are numbered as follows: the body of an abstraction is 0; the
/// function and argument of an application are 0 and 1; the components of
/// a pair are 0 and 1; the body and argument of a matching are 0 and 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Pattern {
    pub fn var(name: &str) -> Pattern {
        Pattern::Var(Name::from(name))
    }

    pub fn pair(left: Pattern, right: Pattern) -> Pattern {
        Pattern::Pair(Box::new(left), Box::new(right))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Pattern::Var(_))
    }

    /// Variables of the pattern, left to right.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Pair(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn binds(&self, x: &str) -> bool {
        match self {
            Pattern::Var(y) => &**y == x,
            Pattern::Pair(l, r) => l.binds(x) || r.binds(x),
        }
    }

    /// The first variable occurring twice, if any.
    pub fn duplicate_var(&self) -> Option<Name> {
        let mut seen = BTreeSet::new();
        self.vars().into_iter().find(|x| !seen.insert(x.clone()))
    }

    pub fn is_linear(&self) -> bool {
        self.duplicate_var().is_none()
    }

    /// Same shape as `other` (variables may differ).
    pub fn same_shape(&self, other: &Pattern) -> bool {
        match (self, other) {
            (Pattern::Var(_), Pattern::Var(_)) => true,
            (Pattern::Pair(a, b), Pattern::Pair(c, d)) => a.same_shape(c) && b.same_shape(d),
            _ => false,
        }
    }

    pub fn rename(&self, from: &str, to: &Name) -> Pattern {
        match self {
            Pattern::Var(x) if &**x == from => Pattern::Var(to.clone()),
            Pattern::Var(_) => self.clone(),
            Pattern::Pair(l, r) => Pattern::pair(l.rename(from, to), r.rename(from, to)),
        }
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::from(name))
    }

    pub fn abs(p: Pattern, body: Term) -> Term {
        Term::Abs(p, Box::new(body))
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::abs(Pattern::var(x), body)
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn matching(body: Term, p: Pattern, arg: Term) -> Term {
        Term::Match(Box::new(body), p, Box::new(arg))
    }

    /// Number of constructors (variables included).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::Pair(a, b) | Term::App(a, b) | Term::Match(a, _, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) => vec![],
            Term::Abs(_, b) => vec![b],
            Term::Pair(a, b) | Term::App(a, b) | Term::Match(a, _, b) => vec![a, b],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(p, b) => {
                let n = bound.len();
                bound.extend(p.vars());
                b.collect_free(bound, out);
                bound.truncate(n);
            }
            Term::Pair(a, b) | Term::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Match(b, p, a) => {
                let n = bound.len();
                bound.extend(p.vars());
                b.collect_free(bound, out);
                bound.truncate(n);
                a.collect_free(bound, out);
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::Abs(p, b) => !p.binds(x) && b.has_free(x),
            Term::Pair(a, b) | Term::App(a, b) => a.has_free(x) || b.has_free(x),
            Term::Match(b, p, a) => (!p.binds(x) && b.has_free(x)) || a.has_free(x),
        }
    }

    /// Every name occurring anywhere in the term, free or bound.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Abs(p, b) => {
                out.extend(p.vars());
                b.collect_names(out);
            }
            Term::Pair(a, b) | Term::App(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Term::Match(b, p, a) => {
                out.extend(p.vars());
                b.collect_names(out);
                a.collect_names(out);
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(_) => {}
            Term::Abs(p, b) => {
                out.extend(p.vars());
                b.collect_bound(out);
            }
            Term::Pair(a, b) | Term::App(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            Term::Match(b, p, a) => {
                out.extend(p.vars());
                b.collect_bound(out);
                a.collect_bound(out);
            }
        }
    }

    /// True when every pattern in the term is linear.
    pub fn is_linear(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(p, b) => p.is_linear() && b.is_linear(),
            Term::Pair(a, b) | Term::App(a, b) => a.is_linear() && b.is_linear(),
            Term::Match(b, p, a) => p.is_linear() && b.is_linear() && a.is_linear(),
        }
    }

    /// Renames the free occurrences of `from` to `to`.
    ///
    /// The caller must make sure `to` is not bound anywhere in the term,
    /// which is the case for names produced by [`fresh_name`] against
    /// `self.names()`.
    pub fn rename_free(&self, from: &str, to: &Name) -> Term {
        match self {
            Term::Var(x) if &**x == from => Term::Var(to.clone()),
            Term::Var(_) => self.clone(),
            Term::Abs(p, b) => {
                if p.binds(from) {
                    self.clone()
                } else {
                    Term::abs(p.clone(), b.rename_free(from, to))
                }
            }
            Term::Pair(a, b) => Term::pair(a.rename_free(from, to), b.rename_free(from, to)),
            Term::App(a, b) => Term::app(a.rename_free(from, to), b.rename_free(from, to)),
            Term::Match(b, p, a) => {
                let body = if p.binds(from) { (**b).clone() } else { b.rename_free(from, to) };
                Term::matching(body, p.clone(), a.rename_free(from, to))
            }
        }
    }

    pub fn subterm_at(&self, pos: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = *t.children().get(i)?;
        }
        Some(t)
    }

    /// Replaces the subterm at `pos` by `new`. No renaming is performed.
    pub fn replace_at(&self, pos: &Position, new: Term) -> Option<Term> {
        self.replace_path(&pos.0, new)
    }

    fn replace_path(&self, path: &[usize], new: Term) -> Option<Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        Some(match (self, i) {
            (Term::Abs(p, b), 0) => Term::abs(p.clone(), b.replace_path(rest, new)?),
            (Term::Pair(a, b), 0) => Term::pair(a.replace_path(rest, new)?, (**b).clone()),
            (Term::Pair(a, b), 1) => Term::pair((**a).clone(), b.replace_path(rest, new)?),
            (Term::App(a, b), 0) => Term::app(a.replace_path(rest, new)?, (**b).clone()),
            (Term::App(a, b), 1) => Term::app((**a).clone(), b.replace_path(rest, new)?),
            (Term::Match(b, p, a), 0) => Term::matching(b.replace_path(rest, new)?, p.clone(), (**a).clone()),
            (Term::Match(b, p, a), 1) => Term::matching((**b).clone(), p.clone(), a.replace_path(rest, new)?),
            _ => return None,
        })
    }

    /// All positions, parents before children, left before right.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, path)) = stack.pop() {
            let kids = t.children();
            for i in (0..kids.len()).rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((kids[i], p));
            }
            out.push(Position(path));
        }
        out
    }
}

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Picks `base` with the smallest numeric suffix `1, 2, ...` that is not
/// taken. Trailing digits of `base` are dropped first, so `y1` yields `y2`
/// rather than `y11`.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1u64..)
        .map(|k| format!("{stem}{k}"))
        .find(|cand| !taken(cand))
        .map(Name::from)
        .expect("the suffix space is unbounded")
}

/// Renames bound variables so that none of them lies in `avoid`.
/// Free variables are left alone, so the result is alpha-equivalent.
pub fn fresh_rename(t: &Term, avoid: &BTreeSet<Name>) -> Term {
    let mut taken: BTreeSet<Name> = avoid.union(&t.names()).cloned().collect();
    rename_bound(t, &|x| avoid.contains(x), &mut taken)
}

/// Renames every binder variable selected by `clashes`, choosing names that
/// are outside `taken` (which is extended as names are chosen).
pub(crate) fn rename_bound(t: &Term, clashes: &dyn Fn(&str) -> bool, taken: &mut BTreeSet<Name>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Abs(p, b) => {
            let (p2, b2) = rename_binder(p, b, clashes, taken);
            Term::abs(p2, rename_bound(&b2, clashes, taken))
        }
        Term::Pair(a, b) => Term::pair(rename_bound(a, clashes, taken), rename_bound(b, clashes, taken)),
        Term::App(a, b) => Term::app(rename_bound(a, clashes, taken), rename_bound(b, clashes, taken)),
        Term::Match(b, p, a) => {
            let (p2, b2) = rename_binder(p, b, clashes, taken);
            Term::matching(rename_bound(&b2, clashes, taken), p2, rename_bound(a, clashes, taken))
        }
    }
}

/// Renames the variables of `p` selected by `clashes`, both in `p` and in
/// the scope `body`.
pub(crate) fn rename_binder(
    p: &Pattern,
    body: &Term,
    clashes: &dyn Fn(&str) -> bool,
    taken: &mut BTreeSet<Name>,
) -> (Pattern, Term) {
    let mut p = p.clone();
    let mut body = body.clone();
    for x in p.vars() {
        if clashes(&x) {
            let y = fresh_name(&x, |c| taken.contains(c));
            taken.insert(y.clone());
            body = body.rename_free(&x, &y);
            p = p.rename(&x, &y);
        }
    }
    (p, body)
}

/// Alpha-equivalence: equal up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let ix = ea.iter().rposition(|v| v == x);
                let iy = eb.iter().rposition(|v| v == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Abs(p, s), Term::Abs(q, t)) => p.same_shape(q) && under(p, q, ea, eb, |ea, eb| go(s, t, ea, eb)),
            (Term::Pair(a1, a2), Term::Pair(b1, b2)) | (Term::App(a1, a2), Term::App(b1, b2)) => {
                go(a1, b1, ea, eb) && go(a2, b2, ea, eb)
            }
            (Term::Match(s, p, u), Term::Match(t, q, v)) => {
                p.same_shape(q) && go(u, v, ea, eb) && under(p, q, ea, eb, |ea, eb| go(s, t, ea, eb))
            }
            _ => false,
        }
    }
    fn under(
        p: &Pattern,
        q: &Pattern,
        ea: &mut Vec<Name>,
        eb: &mut Vec<Name>,
        k: impl FnOnce(&mut Vec<Name>, &mut Vec<Name>) -> bool,
    ) -> bool {
        let (na, nb) = (ea.len(), eb.len());
        ea.extend(p.vars());
        eb.extend(q.vars());
        let r = k(ea, eb);
        ea.truncate(na);
        eb.truncate(nb);
        r
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// A string that is equal for two terms exactly when they are
/// alpha-equivalent. Bound variables are numbered in binding order.
pub fn alpha_key(t: &Term) -> String {
    fn go(t: &Term, env: &mut Vec<(Name, usize)>, next: &mut usize, out: &mut String) {
        match t {
            Term::Var(x) => match env.iter().rev().find(|(v, _)| v == x) {
                Some((_, k)) => out.push_str(&format!("#{k}")),
                None => out.push_str(x),
            },
            Term::Abs(p, b) => {
                out.push('\\');
                let n = env.len();
                bind(p, env, next, out);
                out.push('.');
                go(b, env, next, out);
                env.truncate(n);
            }
            Term::Pair(a, b) => {
                out.push('<');
                go(a, env, next, out);
                out.push(',');
                go(b, env, next, out);
                out.push('>');
            }
            Term::App(a, b) => {
                out.push('(');
                go(a, env, next, out);
                out.push(' ');
                go(b, env, next, out);
                out.push(')');
            }
            Term::Match(b, p, a) => {
                out.push('{');
                go(a, env, next, out);
                out.push('/');
                let n = env.len();
                bind(p, env, next, out);
                out.push('.');
                go(b, env, next, out);
                env.truncate(n);
                out.push('}');
            }
        }
    }
    fn bind(p: &Pattern, env: &mut Vec<(Name, usize)>, next: &mut usize, out: &mut String) {
        match p {
            Pattern::Var(x) => {
                env.push((x.clone(), *next));
                out.push_str(&format!("#{next}"));
                *next += 1;
            }
            Pattern::Pair(l, r) => {
                out.push('<');
                bind(l, env, next, out);
                out.push(',');
                bind(r, env, next, out);
                out.push('>');
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut 0, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Pair(l, r) => write!(f, "<{l}, {r}>"),
        }
    }
}

// Precedence levels: 0 admits abstractions, 1 applications, 2 matchings
// (postfix), 3 atoms only.
fn level(t: &Term) -> u8 {
    match t {
        Term::Abs(..) => 0,
        Term::App(..) => 1,
        Term::Match(..) => 2,
        Term::Var(_) | Term::Pair(..) => 3,
    }
}

fn write_term(t: &Term, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(t) < min {
        f.write_str("(")?;
        write_term(t, 0, f)?;
        return f.write_str(")");
    }
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Pair(a, b) => {
            f.write_str("<")?;
            write_term(a, 0, f)?;
            f.write_str(", ")?;
            write_term(b, 0, f)?;
            f.write_str(">")
        }
        Term::Abs(p, b) => {
            write!(f, "\\{p}.")?;
            write_term(b, 0, f)
        }
        Term::App(a, b) => {
            write_term(a, 1, f)?;
            f.write_str(" ")?;
            write_term(b, 2, f)
        }
        Term::Match(b, p, a) => {
            write_term(b, 2, f)?;
            write!(f, "[{p}/")?;
            write_term(a, 0, f)?;
            f.write_str("]")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-linear pattern: `{0}` occurs twice")]
    Linearity(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lambda,
    Dot,
    LAngle,
    RAngle,
    Comma,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Slash,
    Ident(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Lambda => "`\\`",
            Tok::Dot => "`.`",
            Tok::LAngle => "`<`",
            Tok::RAngle => "`>`",
            Tok::Comma => "`,`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Slash => "`/`",
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '\\' | 'λ' => Tok::Lambda,
            '.' => Tok::Dot,
            '<' | '⟨' => Tok::LAngle,
            '>' | '⟩' => Tok::RAngle,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '/' => Tok::Slash,
            c if c.is_alphabetic() => {
                let mut s = String::from(c);
                while let Some(&(_, d)) = it.peek() {
                    if d != 'λ' && (d.is_alphanumeric() || d == '_' || d == '\'') {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{other}`") }),
        };
        out.push((i, tok));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected {expected}, found {}", self.peek()) })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&tok.to_string())
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let p = self.pattern()?;
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(Term::abs(p, body));
        }
        let mut t = self.postfix()?;
        while matches!(self.peek(), Tok::Ident(_) | Tok::LAngle | Tok::LParen) {
            let a = self.postfix()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while *self.peek() == Tok::LBrack {
            self.bump();
            let p = self.pattern()?;
            self.expect(Tok::Slash)?;
            let u = self.term()?;
            self.expect(Tok::RBrack)?;
            t = Term::matching(t, p, u);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::var(&x))
            }
            Tok::LAngle => {
                self.bump();
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::RAngle)?;
                Ok(Term::pair(a, b))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.error("a term"),
        }
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let p = self.raw_pattern()?;
        match p.duplicate_var() {
            Some(x) => Err(ParseError::Linearity(x)),
            None => Ok(p),
        }
    }

    fn raw_pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Pattern::var(&x))
            }
            Tok::LAngle => {
                self.bump();
                let l = self.raw_pattern()?;
                self.expect(Tok::Comma)?;
                let r = self.raw_pattern()?;
                self.expect(Tok::RAngle)?;
                Ok(Pattern::pair(l, r))
            }
            _ => self.error("a pattern"),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let pat = p.pattern()?;
    p.finish()?;
    Ok(pat)
}
