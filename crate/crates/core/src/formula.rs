//! The language of knowledge and awareness.
//!
//! The core grammar has five constructors: `top`, atoms, negation,
//! conjunction and the knowledge operator `K{a}`. Disjunction, implication,
//! awareness `A{a}` and unawareness `U{a}` are surface sugar; [`Formula::normalize`]
//! rewrites them into the core, with
//!
//! ```text
//! A{a} phi  :=  K{a} phi | K{a} !K{a} phi
//! U{a} phi  :=  !A{a} phi
//! ```
//!
//! Surface syntax (unary operators bind tightest, then `&`, then `|`, then
//! the right-associative `->`):
//!
//! ```text
//! phi ::= "top" | ATOM | "!" phi | "K{" AGENT "}" phi | "A{" AGENT "}" phi
//!       | "U{" AGENT "}" phi | phi "&" phi | phi "|" phi | phi "->" phi | "(" phi ")"
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {0:?}: expected [a-zA-Z][a-zA-Z0-9_]*")]
pub struct IdentError(pub String);

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! ident_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, IdentError> {
                let name = name.into();
                if is_identifier(&name) {
                    Ok(Self(name))
                } else {
                    Err(IdentError(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = IdentError;
            fn try_from(s: String) -> Result<Self, IdentError> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

ident_newtype!(
    /// A propositional atom.
    AtomId
);
ident_newtype!(
    /// An agent name.
    AgentId
);

/// A formula of the epistemic language.
///
/// `Or`, `Implies`, `Aware` and `Unaware` only exist before normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Atom(AtomId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Aware(AgentId, Box<Formula>),
    Unaware(AgentId, Box<Formula>),
}

impl Formula {
    /// Atom constructor for names known to be valid identifiers.
    ///
    /// Panics on an invalid name; use [`AtomId::new`] for untrusted input.
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(AtomId::new(name).expect("invalid atom name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: Formula) -> Formula {
        Formula::Not(Box::new(phi))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// `(lhs -> rhs) & (rhs -> lhs)`.
    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::and(
            Formula::implies(lhs.clone(), rhs.clone()),
            Formula::implies(rhs, lhs),
        )
    }

    pub fn knows(agent: &AgentId, phi: Formula) -> Formula {
        Formula::Knows(agent.clone(), Box::new(phi))
    }

    pub fn aware(agent: &AgentId, phi: Formula) -> Formula {
        Formula::Aware(agent.clone(), Box::new(phi))
    }

    pub fn unaware(agent: &AgentId, phi: Formula) -> Formula {
        Formula::Unaware(agent.clone(), Box::new(phi))
    }

    /// Conjunction of a non-empty list, left-nested. `None` on an empty list.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// Rewrites all sugar into `Top`/`Atom`/`Not`/`And`/`Knows`.
    pub fn normalize(&self) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::Not(phi) => Formula::not(phi.normalize()),
            Formula::And(lhs, rhs) => Formula::and(lhs.normalize(), rhs.normalize()),
            Formula::Knows(a, phi) => Formula::Knows(a.clone(), Box::new(phi.normalize())),
            Formula::Or(lhs, rhs) => Formula::not(Formula::and(
                Formula::not(lhs.normalize()),
                Formula::not(rhs.normalize()),
            )),
            Formula::Implies(lhs, rhs) => {
                Formula::not(Formula::and(lhs.normalize(), Formula::not(rhs.normalize())))
            }
            Formula::Aware(a, phi) => {
                let phi = phi.normalize();
                let knows = Formula::knows(a, phi);
                let knows_not_knows = Formula::knows(a, Formula::not(knows.clone()));
                Formula::not(Formula::and(
                    Formula::not(knows),
                    Formula::not(knows_not_knows),
                ))
            }
            Formula::Unaware(a, phi) => {
                Formula::not(Formula::Aware(a.clone(), phi.clone()).normalize())
            }
        }
    }

    pub fn is_normalized(&self) -> bool {
        match self {
            Formula::Top | Formula::Atom(_) => true,
            Formula::Not(phi) | Formula::Knows(_, phi) => phi.is_normalized(),
            Formula::And(lhs, rhs) => lhs.is_normalized() && rhs.is_normalized(),
            Formula::Or(..) | Formula::Implies(..) | Formula::Aware(..) | Formula::Unaware(..) => {
                false
            }
        }
    }

    /// The atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<AtomId>) {
        match self {
            Formula::Top => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(phi)
            | Formula::Knows(_, phi)
            | Formula::Aware(_, phi)
            | Formula::Unaware(_, phi) => phi.collect_atoms(out),
            Formula::And(lhs, rhs) | Formula::Or(lhs, rhs) | Formula::Implies(lhs, rhs) => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
            }
        }
    }

    /// The agents occurring in the formula.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<AgentId>) {
        match self {
            Formula::Top | Formula::Atom(_) => {}
            Formula::Not(phi) => phi.collect_agents(out),
            Formula::Knows(a, phi) | Formula::Aware(a, phi) | Formula::Unaware(a, phi) => {
                out.insert(a.clone());
                phi.collect_agents(out);
            }
            Formula::And(lhs, rhs) | Formula::Or(lhs, rhs) | Formula::Implies(lhs, rhs) => {
                lhs.collect_agents(out);
                rhs.collect_agents(out);
            }
        }
    }

    /// AST depth; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 0,
            Formula::Not(phi)
            | Formula::Knows(_, phi)
            | Formula::Aware(_, phi)
            | Formula::Unaware(_, phi) => 1 + phi.depth(),
            Formula::And(lhs, rhs) | Formula::Or(lhs, rhs) | Formula::Implies(lhs, rhs) => {
                1 + lhs.depth().max(rhs.depth())
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 1,
            Formula::Not(phi)
            | Formula::Knows(_, phi)
            | Formula::Aware(_, phi)
            | Formula::Unaware(_, phi) => 1 + phi.size(),
            Formula::And(lhs, rhs) | Formula::Or(lhs, rhs) | Formula::Implies(lhs, rhs) => {
                1 + lhs.size() + rhs.size()
            }
        }
    }
}

// Binding strength used by the printer; higher binds tighter.
fn precedence(phi: &Formula) -> u8 {
    match phi {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        _ => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, phi: &Formula, min: u8) -> fmt::Result {
    if precedence(phi) < min {
        write!(f, "({phi})")
    } else {
        write!(f, "{phi}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("top"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(phi) => {
                f.write_str("!")?;
                write_operand(f, phi, 4)
            }
            Formula::Knows(a, phi) => {
                write!(f, "K{{{a}}}")?;
                write_operand(f, phi, 4)
            }
            Formula::Aware(a, phi) => {
                write!(f, "A{{{a}}}")?;
                write_operand(f, phi, 4)
            }
            Formula::Unaware(a, phi) => {
                write!(f, "U{{{a}}}")?;
                write_operand(f, phi, 4)
            }
            Formula::And(lhs, rhs) => {
                write_operand(f, lhs, 3)?;
                f.write_str(" & ")?;
                write_operand(f, rhs, 4)
            }
            Formula::Or(lhs, rhs) => {
                write_operand(f, lhs, 2)?;
                f.write_str(" | ")?;
                write_operand(f, rhs, 3)
            }
            Formula::Implies(lhs, rhs) => {
                write_operand(f, lhs, 2)?;
                f.write_str(" -> ")?;
                write_operand(f, rhs, 1)
            }
        }
    }
}

/// Every normalized formula of depth at most `max_depth` over the given atoms
/// and agents, each exactly once.
///
/// Order: by depth, and within one depth `Not`, then `And` (lexicographic over
/// operand positions), then `Knows` (agent-major).
pub fn enumerate_formulas(atoms: &[AtomId], agents: &[AgentId], max_depth: usize) -> Vec<Formula> {
    let mut atoms = atoms.to_vec();
    atoms.sort();
    atoms.dedup();
    let mut agents = agents.to_vec();
    agents.sort();
    agents.dedup();

    let mut all: Vec<Formula> = std::iter::once(Formula::Top)
        .chain(atoms.into_iter().map(Formula::Atom))
        .collect();
    // all[..prev_end] has depth < d - 1, all[prev_end..] has depth exactly d - 1.
    let mut prev_end = 0;
    for _ in 0..max_depth {
        let below = all.len();
        let mut next = Vec::new();
        for phi in &all[prev_end..below] {
            next.push(Formula::not(phi.clone()));
        }
        for (i, lhs) in all[..below].iter().enumerate() {
            for (j, rhs) in all[..below].iter().enumerate() {
                if i >= prev_end || j >= prev_end {
                    next.push(Formula::and(lhs.clone(), rhs.clone()));
                }
            }
        }
        for agent in &agents {
            for phi in &all[prev_end..below] {
                next.push(Formula::knows(agent, phi.clone()));
            }
        }
        prev_end = below;
        all.extend(next);
    }
    all
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found}")]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown escape {text:?} at byte {offset}")]
    UnknownEscape { offset: usize, text: String },
    #[error("unbalanced parenthesis at byte {offset}")]
    UnbalancedParen { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownEscape { offset, .. }
            | ParseError::UnbalancedParen { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Top,
    Ident(String),
    Bang,
    Modal(char, String),
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Top => "\"top\"".into(),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Bang => "\"!\"".into(),
            Tok::Modal(op, a) => format!("\"{op}{{{a}}}\""),
            Tok::And => "\"&\"".into(),
            Tok::Or => "\"|\"".into(),
            Tok::Arrow => "\"->\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const EXPECT_OPERAND: &[&str] = &["top", "ATOM", "!", "K{", "A{", "U{", "("];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_end = |mut j: usize| {
        while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
            j += 1;
        }
        j
    };
    let skip_ws = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            b'!' => {
                out.push((start, Tok::Bang));
                i += 1;
            }
            b'&' => {
                out.push((start, Tok::And));
                i += 1;
            }
            b'|' => {
                out.push((start, Tok::Or));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Arrow));
                i += 2;
            }
            b'\\' => {
                let end = ident_end(i + 1);
                return Err(ParseError::UnknownEscape {
                    offset: start,
                    text: text[start..end.max(i + 1)].to_string(),
                });
            }
            c if c.is_ascii_alphabetic() => {
                let end = ident_end(i);
                let word = &text[start..end];
                let after = skip_ws(end);
                if matches!(word, "K" | "A" | "U") && bytes.get(after) == Some(&b'{') {
                    let name_start = skip_ws(after + 1);
                    let name_end = ident_end(name_start);
                    let close = skip_ws(name_end);
                    let name = &text[name_start..name_end];
                    if !is_identifier(name) {
                        return Err(ParseError::Syntax {
                            offset: name_start,
                            expected: vec!["AGENT"],
                            found: describe_char(text, name_start),
                        });
                    }
                    if bytes.get(close) != Some(&b'}') {
                        return Err(ParseError::Syntax {
                            offset: close,
                            expected: vec!["}"],
                            found: describe_char(text, close),
                        });
                    }
                    out.push((
                        start,
                        Tok::Modal(word.as_bytes()[0] as char, name.to_string()),
                    ));
                    i = close + 1;
                } else if word == "top" {
                    out.push((start, Tok::Top));
                    i = end;
                } else {
                    out.push((start, Tok::Ident(word.to_string())));
                    i = end;
                }
            }
            _ => {
                let expected = if out.last().is_some_and(|(_, t)| ends_operand(t)) {
                    vec!["&", "|", "->", ")"]
                } else {
                    EXPECT_OPERAND.to_vec()
                };
                return Err(ParseError::Syntax {
                    offset: start,
                    expected,
                    found: describe_char(text, start),
                });
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

fn ends_operand(t: &Tok) -> bool {
    matches!(t, Tok::Top | Tok::Ident(_) | Tok::RParen)
}

fn describe_char(text: &str, offset: usize) -> String {
    match text[offset..].chars().next() {
        Some(c) => format!("{c:?}"),
        None => "end of input".into(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    open_parens: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        if *self.peek() == Tok::End {
            if let Some(&open) = self.open_parens.last() {
                if expected.contains(&")") {
                    return ParseError::UnbalancedParen { offset: open };
                }
            }
        }
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    // implication: right-associative, loosest
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(AtomId(name)))
            }
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Modal(op, agent) => {
                self.bump();
                let agent = AgentId(agent);
                let body = Box::new(self.unary()?);
                Ok(match op {
                    'K' => Formula::Knows(agent, body),
                    'A' => Formula::Aware(agent, body),
                    _ => Formula::Unaware(agent, body),
                })
            }
            Tok::LParen => {
                self.bump();
                self.open_parens.push(offset);
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["&", "|", "->", ")"]));
                }
                self.bump();
                self.open_parens.pop();
                Ok(inner)
            }
            Tok::RParen => Err(ParseError::UnbalancedParen { offset }),
            _ => Err(self.error(EXPECT_OPERAND)),
        }
    }
}

/// Parses surface syntax and returns the normalized formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_surface(text).map(|phi| phi.normalize())
}

/// Parses surface syntax keeping the sugar constructors.
pub fn parse_surface(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        open_parens: Vec::new(),
    };
    let phi = parser.implication()?;
    match parser.peek() {
        Tok::End => Ok(phi),
        Tok::RParen => Err(ParseError::UnbalancedParen {
            offset: parser.offset(),
        }),
        _ => Err(parser.error(&["&", "|", "->", "end of input"])),
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ag(name: &str) -> AgentId {
        AgentId::new(name).unwrap()
    }

    fn at(name: &str) -> AtomId {
        AtomId::new(name).unwrap()
    }

    #[test]
    fn parses_top() {
        assert_eq!(parse("top").unwrap(), Formula::Top);
    }

    #[test]
    fn parses_knowledge_of_negation() {
        let b = ag("B");
        assert_eq!(
            parse("K{B} !i").unwrap(),
            Formula::knows(&b, Formula::not(Formula::atom("i")))
        );
    }

    #[test]
    fn awareness_expands_to_core() {
        let b = ag("B");
        let l = Formula::atom("l");
        let k = Formula::knows(&b, l);
        let expected = Formula::not(Formula::and(
            Formula::not(k.clone()),
            Formula::not(Formula::knows(&b, Formula::not(k))),
        ));
        let got = parse("A{B} l").unwrap();
        assert_eq!(got, expected);
        assert!(got.is_normalized());
    }

    #[test]
    fn unawareness_is_negated_awareness() {
        assert_eq!(
            parse("U{B} l").unwrap(),
            Formula::not(parse("A{B} l").unwrap())
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let i = || Formula::atom("i");
        let l = || Formula::atom("l");
        let m = || Formula::atom("m");
        assert_eq!(
            parse_surface("i & l | m").unwrap(),
            Formula::or(Formula::and(i(), l()), m())
        );
        assert_eq!(
            parse_surface("i | l -> m").unwrap(),
            Formula::implies(Formula::or(i(), l()), m())
        );
        assert_eq!(
            parse_surface("i -> l -> m").unwrap(),
            Formula::implies(i(), Formula::implies(l(), m()))
        );
        assert_eq!(
            parse_surface("i & l & m").unwrap(),
            Formula::and(Formula::and(i(), l()), m())
        );
        assert_eq!(
            parse_surface("!i & l").unwrap(),
            Formula::and(Formula::not(i()), l())
        );
        assert_eq!(
            parse_surface("K{a} i & l").unwrap(),
            Formula::and(Formula::knows(&ag("a"), i()), l())
        );
    }

    #[test]
    fn atoms_named_like_operators() {
        assert_eq!(parse("K").unwrap(), Formula::atom("K"));
        assert_eq!(
            parse("K & A").unwrap(),
            Formula::and(Formula::atom("K"), Formula::atom("A"))
        );
        assert_eq!(
            parse("K {B} K").unwrap(),
            Formula::knows(&ag("B"), Formula::atom("K"))
        );
        assert_eq!(parse("topx").unwrap(), Formula::atom("topx"));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("i & ").unwrap_err() {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"ATOM"));
            }
            e => panic!("unexpected {e:?}"),
        }
        match parse("i l").unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 2),
            e => panic!("unexpected {e:?}"),
        }
        match parse("i # l").unwrap_err() {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 2);
                assert!(expected.contains(&"&"));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse("K{} i").unwrap_err(),
            ParseError::Syntax { offset: 2, .. }
        ));
        assert!(matches!(
            parse("K{B i").unwrap_err(),
            ParseError::Syntax { offset: 4, .. }
        ));
    }

    #[test]
    fn parenthesis_errors() {
        assert_eq!(
            parse("(i & l").unwrap_err(),
            ParseError::UnbalancedParen { offset: 0 }
        );
        assert_eq!(
            parse("i & l)").unwrap_err(),
            ParseError::UnbalancedParen { offset: 5 }
        );
        assert_eq!(
            parse("((i)").unwrap_err(),
            ParseError::UnbalancedParen { offset: 0 }
        );
        assert_eq!(
            parse(")").unwrap_err(),
            ParseError::UnbalancedParen { offset: 0 }
        );
    }

    #[test]
    fn escapes_are_rejected() {
        assert_eq!(
            parse("i \\land l").unwrap_err(),
            ParseError::UnknownEscape {
                offset: 2,
                text: "\\land".into()
            }
        );
    }

    #[test]
    fn atoms_of_formulas() {
        assert!(Formula::Top.atoms().is_empty());
        let phi = Formula::knows(
            &ag("B"),
            Formula::and(Formula::atom("i"), Formula::atom("l")),
        );
        assert_eq!(phi.atoms(), BTreeSet::from([at("i"), at("l")]));
        let aware = parse("A{B} l").unwrap();
        assert_eq!(aware.atoms(), BTreeSet::from([at("l")]));
    }

    #[test]
    fn identifiers_are_checked() {
        assert!(AtomId::new("p_1").is_ok());
        assert!(AtomId::new("1p").is_err());
        assert!(AtomId::new("").is_err());
        assert!(AgentId::new("a-b").is_err());
    }

    #[test]
    fn enumeration_depth_zero_and_one() {
        let atoms = [at("i")];
        let agents = [ag("B")];
        let d0 = enumerate_formulas(&atoms, &agents, 0);
        assert_eq!(d0, vec![Formula::Top, Formula::atom("i")]);

        let d1 = enumerate_formulas(&atoms, &agents, 1);
        let i = || Formula::atom("i");
        let b = ag("B");
        let expected = vec![
            Formula::Top,
            i(),
            Formula::not(Formula::Top),
            Formula::not(i()),
            Formula::and(Formula::Top, Formula::Top),
            Formula::and(Formula::Top, i()),
            Formula::and(i(), Formula::Top),
            Formula::and(i(), i()),
            Formula::knows(&b, Formula::Top),
            Formula::knows(&b, i()),
        ];
        assert_eq!(d1, expected);
    }

    // Independent recount: n(0) = |At| + 1, n(d) = n(0) + n(d-1) + n(d-1)^2 + |Ag| * n(d-1).
    fn count_formulas(atoms: usize, agents: usize, depth: usize) -> usize {
        if depth == 0 {
            atoms + 1
        } else {
            let below = count_formulas(atoms, agents, depth - 1);
            atoms + 1 + below + below * below + agents * below
        }
    }

    #[test]
    fn enumeration_count_matches_recount() {
        let atoms = [at("i"), at("l")];
        let agents = [ag("B"), ag("O")];
        let all = enumerate_formulas(&atoms, &agents, 2);
        assert_eq!(all.len(), count_formulas(2, 2, 2));
        assert_eq!(all.len(), 507);
        let distinct: BTreeSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert!(all.iter().all(|f| f.depth() <= 2 && f.is_normalized()));
        for depth in 0..=3 {
            assert_eq!(
                enumerate_formulas(&atoms[..1], &agents[..1], depth).len(),
                count_formulas(1, 1, depth)
            );
        }
    }

    #[test]
    fn printing_round_trips_exhaustively() {
        let all = enumerate_formulas(&[at("i")], &[ag("B")], 3);
        for phi in all {
            let printed = phi.to_string();
            assert_eq!(parse(&printed).unwrap(), phi, "{printed}");
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Top),
            prop::sample::select(vec!["p", "q", "r"]).prop_map(Formula::atom),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let agent = prop::sample::select(vec!["a", "b"]).prop_map(ag);
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
                (agent.clone(), inner.clone()).prop_map(|(a, f)| Formula::knows(&a, f)),
                (agent.clone(), inner.clone()).prop_map(|(a, f)| Formula::aware(&a, f)),
                (agent, inner).prop_map(|(a, f)| Formula::unaware(&a, f)),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(phi in arb_formula()) {
            let once = phi.normalize();
            prop_assert!(once.is_normalized());
            prop_assert_eq!(once.normalize(), once.clone());
        }

        #[test]
        fn surface_printing_round_trips(phi in arb_formula()) {
            prop_assert_eq!(parse_surface(&phi.to_string()).unwrap(), phi.clone());
            prop_assert_eq!(parse(&phi.normalize().to_string()).unwrap(), phi.normalize());
        }

        #[test]
        fn awareness_preserves_atoms(phi in arb_formula()) {
            let a = ag("a");
            prop_assert_eq!(Formula::aware(&a, phi.clone()).normalize().atoms(), phi.atoms());
            prop_assert_eq!(phi.normalize().atoms(), phi.atoms());
        }
    }
}
