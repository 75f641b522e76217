//! Derivation trees shared by both type systems, their size, and the
//! `.deriv.json` document format.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{has_head_clash, BudgetExceeded, Counters};
use crate::syntax::{parse, parse_pattern, Name, ParseError, Pattern, Term};
use crate::types::{parse_assigned, parse_multiset, Assigned, TypeSyntaxError, TypingContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Ax,
    Many,
    Abs,
    AbsP,
    App,
    AppP,
    Pair,
    PairP,
    Match,
    PatV,
    PatX,
    PatP,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Ax,
        Rule::Many,
        Rule::Abs,
        Rule::AbsP,
        Rule::App,
        Rule::AppP,
        Rule::Pair,
        Rule::PairP,
        Rule::Match,
        Rule::PatV,
        Rule::PatX,
        Rule::PatP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::Many => "many",
            Rule::Abs => "abs",
            Rule::AbsP => "abs_p",
            Rule::App => "app",
            Rule::AppP => "app_p",
            Rule::Pair => "pair",
            Rule::PairP => "pair_p",
            Rule::Match => "match",
            Rule::PatV => "pat_v",
            Rule::PatX => "pat_x",
            Rule::PatP => "pat_p",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn is_pattern_rule(self) -> bool {
        matches!(self, Rule::PatV | Rule::PatX | Rule::PatP)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    Term(Term),
    Pattern(Pattern),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Term(t) => write!(f, "{t}"),
            Subject::Pattern(p) => write!(f, "{p}"),
        }
    }
}

/// Pattern judgments carry `(e, m, f)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PatternIndices {
    pub e: u64,
    pub m: u64,
    pub f: u64,
}

impl PatternIndices {
    pub fn new(e: u64, m: u64, f: u64) -> PatternIndices {
        PatternIndices { e, m, f }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Indices {
    Term(Counters),
    Pattern(PatternIndices),
}

impl Indices {
    fn to_vec(self) -> Vec<u64> {
        match self {
            Indices::Term(c) => vec![c.b, c.e, c.m, c.f],
            Indices::Pattern(p) => vec![p.e, p.m, p.f],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Judgment {
    pub context: TypingContext,
    pub subject: Subject,
    pub assigned: Assigned,
    pub indices: Option<Indices>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Judgment,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn context(&self) -> &TypingContext {
        &self.conclusion.context
    }

    pub fn assigned(&self) -> &Assigned {
        &self.conclusion.assigned
    }

    pub fn term(&self) -> Option<&Term> {
        match &self.conclusion.subject {
            Subject::Term(t) => Some(t),
            Subject::Pattern(_) => None,
        }
    }

    pub fn pattern(&self) -> Option<&Pattern> {
        match &self.conclusion.subject {
            Subject::Pattern(p) => Some(p),
            Subject::Term(_) => None,
        }
    }

    /// Term indices `(b, e, m, f)`, when present.
    pub fn counters(&self) -> Option<Counters> {
        match self.conclusion.indices {
            Some(Indices::Term(c)) => Some(c),
            _ => None,
        }
    }

    pub fn pattern_indices(&self) -> Option<PatternIndices> {
        match self.conclusion.indices {
            Some(Indices::Pattern(p)) => Some(p),
            _ => None,
        }
    }

    /// Every node with its path from the root, parents first.
    pub fn nodes(&self) -> Vec<(Vec<usize>, &Derivation)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, d)) = stack.pop() {
            for (i, p) in d.premises.iter().enumerate().rev() {
                let mut q = path.clone();
                q.push(i);
                stack.push((q, p));
            }
            out.push((path, d));
        }
        out
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&Derivation> {
        let mut d = self;
        for &i in path {
            d = d.premises.get(i)?;
        }
        Some(d)
    }
}

/// Which of the two systems a derivation is meant for. System E carries
/// indices and has two readings of the pair rule's second index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PairReading {
    /// `e = e_t + e_u`
    #[default]
    Sum,
    /// `e = e_t + b_u`
    Crossed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    U,
    E(PairReading),
}

impl System {
    pub(crate) fn term_indices(self, c: Counters) -> Option<Indices> {
        match self {
            System::U => None,
            System::E(_) => Some(Indices::Term(c)),
        }
    }

    pub(crate) fn pattern_indices(self, p: PatternIndices) -> Option<Indices> {
        match self {
            System::U => None,
            System::E(_) => Some(Indices::Pattern(p)),
        }
    }
}

fn path_text(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// A derivation transformer met a node whose shape does not fit the step.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("shape mismatch at node {}: expected {expected}, found {actual}", path_text(.path))]
pub struct ShapeMismatch {
    pub path: Vec<usize>,
    pub expected: String,
    pub actual: String,
}

impl ShapeMismatch {
    pub fn new(expected: impl fmt::Display, actual: impl fmt::Display) -> ShapeMismatch {
        ShapeMismatch { path: Vec::new(), expected: expected.to_string(), actual: actual.to_string() }
    }

    /// Re-roots the error one premise further down.
    pub fn within(mut self, premise: usize) -> ShapeMismatch {
        self.path.insert(0, premise);
        self
    }
}

/// The first node, in pre-order, that breaks its rule.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("rule violation at node {} ({rule}): {reason}", path_text(.path))]
pub struct RuleViolation {
    pub path: Vec<usize>,
    pub rule: Rule,
    pub reason: String,
}

/// Why synthesis produced no derivation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("not head-normalizing within {} steps", .0.budget)]
    NotHeadNormalizing(Box<BudgetExceeded>),
    #[error("head normal form {0} is a clash, not a canonical form")]
    Clash(Term),
    #[error(transparent)]
    Shape(#[from] ShapeMismatch),
}

impl From<BudgetExceeded> for SynthesisError {
    fn from(b: BudgetExceeded) -> SynthesisError {
        SynthesisError::NotHeadNormalizing(Box::new(b))
    }
}

/// Runs `check` on every node, premises before their conclusion, and
/// reports the first failure.
pub(crate) fn first_violation(
    d: &Derivation,
    check: &dyn Fn(&Derivation) -> Result<(), String>,
) -> Result<(), RuleViolation> {
    for (path, node) in d.nodes().into_iter().rev() {
        check(node).map_err(|reason| RuleViolation { path, rule: node.rule, reason })?;
    }
    Ok(())
}

/// Every term judgment has `dom(Γ) ⊆ fv(t)`, every pattern judgment
/// `dom(Γ) ⊆ var(p)`.
pub fn relevance_holds(d: &Derivation) -> bool {
    d.nodes().into_iter().all(|(_, n)| match &n.conclusion.subject {
        Subject::Term(t) => {
            let fv = t.free_vars();
            n.context().dom().all(|x| fv.contains(x))
        }
        Subject::Pattern(p) => n.context().dom().all(|x| p.binds(x)),
    })
}

/// No term judgment has a clash in head position. A `many` node types
/// nothing by itself: with no premises its subject is unconstrained.
pub fn clash_free_holds(d: &Derivation) -> bool {
    d.nodes().into_iter().all(|(_, n)| n.rule == Rule::Many || n.term().is_none_or(|t| !has_head_clash(t)))
}

/// Number of rule instances other than `many`.
pub fn deriv_size(d: &Derivation) -> usize {
    let own = usize::from(d.rule != Rule::Many);
    own + d.premises.iter().map(deriv_size).sum::<usize>()
}

/// Equality of judgments at every node, where the premises of a `many`
/// node are compared as a multiset.
pub fn judgment_equal(a: &Derivation, b: &Derivation) -> bool {
    if a.rule != b.rule || a.conclusion != b.conclusion || a.premises.len() != b.premises.len() {
        return false;
    }
    if a.rule != Rule::Many {
        return a.premises.iter().zip(&b.premises).all(|(x, y)| judgment_equal(x, y));
    }
    let mut used = vec![false; b.premises.len()];
    a.premises.iter().all(|x| {
        let hit = b.premises.iter().enumerate().find(|(j, y)| !used[*j] && judgment_equal(x, y));
        match hit {
            Some((j, _)) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {path}: unknown rule `{rule}`")]
    UnknownRule { path: String, rule: String },
    #[error("node {path}: bad subject: {source}")]
    Subject { path: String, source: ParseError },
    #[error("node {path}: bad type: {source}")]
    Type { path: String, source: TypeSyntaxError },
    #[error("node {path}: {msg}")]
    Schema { path: String, msg: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Node {
    rule: String,
    context: Vec<(String, String)>,
    subject: String,
    assigned: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<u64>>,
    #[serde(default)]
    premises: Vec<Node>,
}

fn to_node(d: &Derivation) -> Node {
    Node {
        rule: d.rule.name().to_string(),
        context: d.context().iter().map(|(x, a)| (x.to_string(), a.to_string())).collect(),
        subject: d.conclusion.subject.to_string(),
        assigned: d.assigned().to_string(),
        indices: d.conclusion.indices.map(Indices::to_vec),
        premises: d.premises.iter().map(to_node).collect(),
    }
}

fn from_node(n: Node, path: &mut Vec<usize>) -> Result<Derivation, FormatError> {
    let here = path_text(path);
    let rule = Rule::from_name(&n.rule)
        .ok_or_else(|| FormatError::UnknownRule { path: here.clone(), rule: n.rule.clone() })?;
    let subject = if rule.is_pattern_rule() {
        Subject::Pattern(
            parse_pattern(&n.subject).map_err(|source| FormatError::Subject { path: here.clone(), source })?,
        )
    } else {
        Subject::Term(parse(&n.subject).map_err(|source| FormatError::Subject { path: here.clone(), source })?)
    };
    let mut context = TypingContext::new();
    for (x, a) in &n.context {
        if crate::syntax::parse(x).ok() != Some(Term::var(x)) {
            return Err(FormatError::Schema { path: here, msg: format!("`{x}` is not a variable name") });
        }
        let a = parse_multiset(a).map_err(|source| FormatError::Type { path: here.clone(), source })?;
        if context.dom().any(|y| **y == **x) {
            return Err(FormatError::Schema { path: here, msg: format!("variable `{x}` listed twice") });
        }
        context.insert(Name::from(x.as_str()), a);
    }
    let assigned = parse_assigned(&n.assigned).map_err(|source| FormatError::Type { path: here.clone(), source })?;
    let indices = match (n.indices, rule.is_pattern_rule()) {
        (None, _) => None,
        (Some(v), false) if v.len() == 4 => Some(Indices::Term(Counters::new(v[0], v[1], v[2], v[3]))),
        (Some(v), true) if v.len() == 3 => Some(Indices::Pattern(PatternIndices::new(v[0], v[1], v[2]))),
        (Some(v), _) => {
            return Err(FormatError::Schema { path: here, msg: format!("wrong number of indices ({})", v.len()) })
        }
    };
    let mut premises = Vec::with_capacity(n.premises.len());
    for (i, p) in n.premises.into_iter().enumerate() {
        path.push(i);
        premises.push(from_node(p, path)?);
        path.pop();
    }
    Ok(Derivation { rule, conclusion: Judgment { context, subject, assigned, indices }, premises })
}

/// Pretty-printed JSON document.
pub fn serialize(d: &Derivation) -> String {
    serde_json::to_string_pretty(&to_node(d)).expect("derivation nodes always serialize")
}

pub fn deserialize(doc: &str) -> Result<Derivation, FormatError> {
    let node: Node = serde_json::from_str(doc)?;
    from_node(node, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{MultisetType, SimpleType};

    fn ax(x: &str, t: SimpleType) -> Derivation {
        Derivation {
            rule: Rule::Ax,
            conclusion: Judgment {
                context: TypingContext::singleton(Name::from(x), MultisetType::single(t.clone())),
                subject: Subject::Term(Term::var(x)),
                assigned: Assigned::Simple(t),
                indices: Some(Indices::Term(Counters::ZERO)),
            },
            premises: vec![],
        }
    }

    fn many(subject: Term, premises: Vec<Derivation>) -> Derivation {
        let assigned = Assigned::Multi(premises.iter().map(|p| p.assigned().as_simple().unwrap().clone()).collect());
        let context = crate::types::context_meet(premises.iter().map(|p| p.context()));
        Derivation {
            rule: Rule::Many,
            conclusion: Judgment { context, subject: Subject::Term(subject), assigned, indices: None },
            premises,
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(deriv_size(&ax("x", SimpleType::N)), 1);
        assert_eq!(deriv_size(&many(Term::var("x"), vec![])), 0);
        let two = many(Term::var("x"), vec![ax("x", SimpleType::N), ax("x", SimpleType::M)]);
        assert_eq!(deriv_size(&two), 2);
        assert_eq!(two.nodes().len(), 3);
    }

    #[test]
    fn round_trip_of_an_axiom() {
        let d = ax("x", SimpleType::N);
        let back = deserialize(&serialize(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn many_premises_compare_as_a_multiset() {
        let a = many(Term::var("x"), vec![ax("x", SimpleType::N), ax("x", SimpleType::M)]);
        let b = many(Term::var("x"), vec![ax("x", SimpleType::M), ax("x", SimpleType::N)]);
        assert!(judgment_equal(&a, &b));
        let c = many(Term::var("x"), vec![ax("x", SimpleType::M), ax("x", SimpleType::M)]);
        assert!(!judgment_equal(&a, &c));
    }

    #[test]
    fn rejects_schema_violations() {
        let doc = r#"{"rule":"weaken","context":[],"subject":"x","assigned":"*","premises":[]}"#;
        assert!(matches!(deserialize(doc), Err(FormatError::UnknownRule { .. })));
        let doc = r#"{"rule":"ax","context":[],"subject":"x","assigned":"*","indices":[0,0],"premises":[]}"#;
        assert!(matches!(deserialize(doc), Err(FormatError::Schema { .. })));
        let doc = r#"{"rule":"ax","context":[["x","[*"]],"subject":"x","assigned":"*"}"#;
        assert!(matches!(deserialize(doc), Err(FormatError::Type { .. })));
        let doc = r#"{"rule":"ax","context":[],"subject":"x","assigned":"*","extra":1}"#;
        assert!(matches!(deserialize(doc), Err(FormatError::Json(_))));
        let doc = r#"{"rule":"pat_v","context":[],"subject":"\\x.x","assigned":"[]"}"#;
        assert!(matches!(deserialize(doc), Err(FormatError::Subject { .. })));
    }
}
