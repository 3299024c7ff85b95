//! In-memory triple store with a Turtle-subset reader and a small
//! conjunctive query language.

mod parse;
mod query;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::{parse_document, parse_query};
pub use query::{Binding, Filter, FilterOp, Query, TriplePattern};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const BOT: &str = "https://w3id.org/bot#";
pub const BRICK: &str = "https://brickschema.org/schema/Brick#";
pub const FSO: &str = "https://w3id.org/fso#";
pub const SOSA: &str = "http://www.w3.org/ns/sosa/";
pub const SSN: &str = "http://www.w3.org/ns/ssn/";
pub const PROPS: &str = "https://w3id.org/props#";
pub const SEAS: &str = "https://w3id.org/seas/";
pub const TIME: &str = "http://www.w3.org/2006/time#";
pub const UNIT: &str = "http://qudt.org/vocab/unit/";

/// Prefixes used by the bundled fixtures and by [`Graph::to_document`].
pub const STANDARD_PREFIXES: [(&str, &str); 11] = [
    ("bot", BOT),
    ("brick", BRICK),
    ("fso", FSO),
    ("props", PROPS),
    ("rdf", RDF),
    ("seas", SEAS),
    ("sosa", SOSA),
    ("ssn", SSN),
    ("time", TIME),
    ("unit", UNIT),
    ("xsd", XSD),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared prefix '{prefix}:'")]
    UndeclaredPrefix { line: usize, prefix: String },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("query variable ?{0} is selected but never bound")]
    UnboundVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    /// Full datatype IRI, if any.
    pub datatype: Option<String>,
}

impl Literal {
    pub fn number(&self) -> Option<f64> {
        self.lexical.trim().parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Variable(String),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn plain(s: impl Into<String>) -> Self {
        Term::Literal(Literal {
            lexical: s.into(),
            datatype: None,
        })
    }

    pub fn typed(s: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal {
            lexical: s.into(),
            datatype: Some(datatype.into()),
        })
    }

    pub fn var(s: impl Into<String>) -> Self {
        Term::Variable(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Variable(v) => write!(f, "?{v}"),
            Term::Literal(l) => {
                write!(f, "\"{}\"", escape(&l.lexical))?;
                if let Some(dt) = &l.datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Triple {
    pub fn new(s: Term, p: Term, o: Term) -> Result<Self, GraphError> {
        if !matches!(s, Term::Iri(_)) || !matches!(p, Term::Iri(_)) || o.is_variable() {
            return Err(GraphError::InvalidTriple(format!("{s} {p} {o}")));
        }
        Ok(Triple { s, p, o })
    }
}

/// Set of ground triples. Iteration order is the total order on triples, so
/// everything derived from a graph is independent of insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    prefixes: BTreeMap<String, String>,
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_standard_prefixes() -> Self {
        let mut g = Graph::new();
        for (p, iri) in STANDARD_PREFIXES {
            g.add_prefix(p, iri);
        }
        g
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        parse_document(text)
    }

    pub fn add_prefix(&mut self, prefix: &str, iri: &str) {
        self.prefixes.insert(prefix.to_string(), iri.to_string());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Returns `false` when the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.triples.insert(t)
    }

    pub fn add(&mut self, s: Term, p: Term, o: Term) -> Result<bool, GraphError> {
        Ok(self.insert(Triple::new(s, p, o)?))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples matching the given positions; `None` is a wildcard.
    pub fn matching<'a: 'q, 'q>(
        &'a self,
        s: Option<&'q Term>,
        p: Option<&'q Term>,
        o: Option<&'q Term>,
    ) -> impl Iterator<Item = &'a Triple> + 'q {
        // Subject-bound lookups use the ordered set directly.
        let range: Box<dyn Iterator<Item = &'a Triple> + 'q> = match s {
            Some(s) => Box::new(self.triples.range(subject_range(s)).take_while(move |t| &t.s == s)),
            None => Box::new(self.triples.iter()),
        };
        range.filter(move |t| p.map_or(true, |p| &t.p == p) && o.map_or(true, |o| &t.o == o))
    }

    /// All objects of `(s, p, ·)`.
    pub fn objects<'a: 'q, 'q>(&'a self, s: &'q Term, p: &'q Term) -> impl Iterator<Item = &'a Term> + 'q {
        self.matching(Some(s), Some(p), None).map(|t| &t.o)
    }

    /// All subjects of `(·, p, o)`.
    pub fn subjects<'a: 'q, 'q>(&'a self, p: &'q Term, o: &'q Term) -> impl Iterator<Item = &'a Term> + 'q {
        self.matching(None, Some(p), Some(o)).map(|t| &t.s)
    }

    pub fn has_type(&self, s: &Term, class: &str) -> bool {
        let ty = Term::iri(RDF_TYPE);
        let c = Term::iri(class);
        let found = self.matching(Some(s), Some(&ty), Some(&c)).next().is_some();
        found
    }

    pub fn query(&self, q: &Query) -> Result<Vec<Binding>, GraphError> {
        query::evaluate(self, q)
    }

    /// Shortest `prefix:local` form of an IRI using the graph's prefixes.
    pub fn compact(&self, iri: &str) -> String {
        self.prefixes
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .max_by_key(|(_, ns)| ns.len())
            .map(|(p, ns)| format!("{p}:{}", &iri[ns.len()..]))
            .filter(|c| parse::is_plain_local(c.split_once(':').unwrap().1))
            .unwrap_or_else(|| format!("<{iri}>"))
    }

    pub fn display_term(&self, t: &Term) -> String {
        match t {
            Term::Iri(s) => self.compact(s),
            Term::Literal(l) => {
                let mut out = if l.number().is_some() && parse::is_number(&l.lexical) {
                    l.lexical.clone()
                } else {
                    format!("\"{}\"", escape(&l.lexical))
                };
                if let Some(dt) = &l.datatype {
                    out.push_str("^^");
                    out.push_str(&self.compact(dt));
                }
                out
            }
            Term::Variable(v) => format!("?{v}"),
        }
    }

    /// Serializes as a document [`Graph::parse`] reads back to an equal graph.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (p, iri) in &self.prefixes {
            out.push_str(&format!("@prefix {p}: <{iri}> .\n"));
        }
        if !self.prefixes.is_empty() {
            out.push('\n');
        }
        for t in &self.triples {
            out.push_str(&format!(
                "{} {} {} .\n",
                self.display_term(&t.s),
                self.display_term(&t.p),
                self.display_term(&t.o)
            ));
        }
        out
    }
}

fn subject_range(s: &Term) -> std::ops::RangeFrom<Triple> {
    // Smallest triple with this subject: terms order Iri < Literal < Variable
    // and the empty IRI is the least IRI.
    (Triple {
        s: s.clone(),
        p: Term::Iri(String::new()),
        o: Term::Iri(String::new()),
    })..
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_and_order() {
        let mut g = Graph::new();
        let a = Term::iri("urn:a");
        let p = Term::iri("urn:p");
        assert!(g.add(a.clone(), p.clone(), Term::plain("x")).unwrap());
        assert!(!g.add(a.clone(), p.clone(), Term::plain("x")).unwrap());
        assert!(g.add(Term::iri("urn:0"), p.clone(), Term::plain("y")).unwrap());
        assert_eq!(g.len(), 2);
        assert_eq!(g.iter().next().unwrap().s, Term::iri("urn:0"));
    }

    #[test]
    fn rejects_bad_positions() {
        assert!(Triple::new(Term::plain("x"), Term::iri("urn:p"), Term::iri("urn:o")).is_err());
        assert!(Triple::new(Term::iri("urn:s"), Term::iri("urn:p"), Term::var("o")).is_err());
    }

    #[test]
    fn subject_lookup() {
        let mut g = Graph::new();
        for s in ["urn:a", "urn:b", "urn:c"] {
            for o in 0..3 {
                g.add(Term::iri(s), Term::iri("urn:p"), Term::plain(o.to_string()))
                    .unwrap();
            }
        }
        let b = Term::iri("urn:b");
        assert_eq!(g.matching(Some(&b), None, None).count(), 3);
        assert!(g.matching(Some(&b), None, None).all(|t| t.s == b));
    }

    #[test]
    fn compact_names() {
        let g = Graph::with_standard_prefixes();
        assert_eq!(g.compact("https://w3id.org/bot#Zone"), "bot:Zone");
        assert_eq!(g.compact("urn:x"), "<urn:x>");
    }
}
