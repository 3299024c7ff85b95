//! Tokenizer and parsers for documents and queries.
//!
//! Documents are a Turtle subset: `@prefix`/`PREFIX` directives, IRIs as
//! `<...>` or `prefix:local`, `a` for `rdf:type`, string and bare numeric
//! literals with an optional `^^datatype`, and `;` / `,` lists. Queries are
//! `SELECT ... WHERE { ... }` over triple patterns and simple `FILTER`s.

use std::collections::BTreeMap;

use super::query::{Filter, FilterOp, Query, TriplePattern};
use super::{Graph, GraphError, Literal, Term, Triple, RDF_TYPE, XSD};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName(String, String),
    Var(String),
    Str(String),
    Num(String),
    Word(String),
    Op(FilterOp),
    DoubleCaret,
    Dot,
    Semi,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Star,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Syntax { line, msg: msg.into() }
}

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
}

pub(super) fn is_plain_local(s: &str) -> bool {
    s.chars().all(is_local_char) && !s.ends_with('.') && !s.starts_with('.')
}

pub(super) fn is_number(s: &str) -> bool {
    let mut chars = s.chars().peekable();
    if matches!(chars.peek(), Some('-') | Some('+')) {
        chars.next();
    }
    let rest: String = chars.collect();
    !rest.is_empty()
        && rest.chars().next().is_some_and(|c| c.is_ascii_digit())
        && rest.parse::<f64>().is_ok()
        && !rest.ends_with('.')
        && rest.chars().all(|c| c.is_ascii_digit() || "eE.+-".contains(c))
}

fn tokenize(text: &str) -> Result<Vec<Token>, GraphError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line });
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '<' => {
                let next = chars.get(i + 1).copied().unwrap_or(' ');
                if next == '=' {
                    push(&mut out, Tok::Op(FilterOp::Le));
                    i += 2;
                } else if next.is_whitespace() || next.is_ascii_digit() || "-+?$\"".contains(next) {
                    push(&mut out, Tok::Op(FilterOp::Lt));
                    i += 1;
                } else {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j] != '>' {
                        if chars[j].is_whitespace() {
                            return Err(err(line, "whitespace inside IRI"));
                        }
                        j += 1;
                    }
                    if j == chars.len() {
                        return Err(err(line, "unterminated IRI"));
                    }
                    push(&mut out, Tok::IriRef(chars[start..j].iter().collect()));
                    i = j + 1;
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Op(FilterOp::Ge));
                    i += 2;
                } else {
                    push(&mut out, Tok::Op(FilterOp::Gt));
                    i += 1;
                }
            }
            '=' => {
                push(&mut out, Tok::Op(FilterOp::Eq));
                i += 1;
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                push(&mut out, Tok::Op(FilterOp::Ne));
                i += 2;
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(start_line, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            let e = chars.get(i + 1).copied();
                            s.push(match e {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('"') => '"',
                                Some('\\') => '\\',
                                other => {
                                    return Err(err(line, format!("bad escape {other:?}")));
                                }
                            });
                            i += 2;
                        }
                        Some('\n') => return Err(err(line, "newline inside string")),
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    line: start_line,
                });
                i += 1;
            }
            '^' if chars.get(i + 1) == Some(&'^') => {
                push(&mut out, Tok::DoubleCaret);
                i += 2;
            }
            '.' if !chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) => {
                push(&mut out, Tok::Dot);
                i += 1;
            }
            ';' => {
                push(&mut out, Tok::Semi);
                i += 1;
            }
            ',' => {
                push(&mut out, Tok::Comma);
                i += 1;
            }
            '{' => {
                push(&mut out, Tok::LBrace);
                i += 1;
            }
            '}' => {
                push(&mut out, Tok::RBrace);
                i += 1;
            }
            '(' => {
                push(&mut out, Tok::LParen);
                i += 1;
            }
            ')' => {
                push(&mut out, Tok::RParen);
                i += 1;
            }
            '*' => {
                push(&mut out, Tok::Star);
                i += 1;
            }
            '?' | '$' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == start {
                    return Err(err(line, "empty variable name"));
                }
                push(&mut out, Tok::Var(chars[start..j].iter().collect()));
                i = j;
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+' || c == '.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) =>
            {
                let start = i;
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                    let frac = d == '.' && chars.get(j + 1).is_some_and(|x| x.is_ascii_digit());
                    if d.is_ascii_digit() || d == 'e' || d == 'E' || exp_sign || frac {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..j].iter().collect();
                if !is_number(&s) {
                    return Err(err(line, format!("malformed number '{s}'")));
                }
                push(&mut out, Tok::Num(s));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == ':' || c == '@' || c == '_' => {
                let start = i;
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '-') {
                    j += 1;
                }
                if c == ':' {
                    j = start;
                }
                if chars.get(j) == Some(&':') {
                    let prefix: String = chars[start..j].iter().collect();
                    let lstart = j + 1;
                    let mut k = lstart;
                    while k < chars.len() && is_local_char(chars[k]) {
                        k += 1;
                    }
                    // A trailing dot ends the statement, not the name.
                    while k > lstart && chars[k - 1] == '.' {
                        k -= 1;
                    }
                    push(&mut out, Tok::PName(prefix, chars[lstart..k].iter().collect()));
                    i = k;
                } else {
                    push(&mut out, Tok::Word(chars[start..j].iter().collect()));
                    i = j;
                }
            }
            other => return Err(err(line, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
    last_line: usize,
}

impl Parser {
    fn new(toks: Vec<Token>, prefixes: BTreeMap<String, String>) -> Self {
        let last_line = toks.last().map_or(1, |t| t.line);
        Parser {
            toks,
            pos: 0,
            prefixes,
            last_line,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.line)
    }

    fn next(&mut self) -> Result<Token, GraphError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| err(self.last_line, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GraphError> {
        let line = self.line();
        let t = self.next()?;
        if t.tok != want {
            return Err(err(line, format!("expected {what}, found {:?}", t.tok)));
        }
        Ok(())
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn expand(&self, prefix: &str, local: &str, line: usize) -> Result<String, GraphError> {
        self.prefixes
            .get(prefix)
            .map(|ns| format!("{ns}{local}"))
            .ok_or_else(|| GraphError::UndeclaredPrefix {
                line,
                prefix: prefix.to_string(),
            })
    }

    fn directive(&mut self, turtle_style: bool) -> Result<(), GraphError> {
        let line = self.line();
        self.next()?;
        let prefix = match self.next()?.tok {
            Tok::PName(p, l) if l.is_empty() => p,
            other => {
                return Err(err(
                    line,
                    format!("expected 'prefix:' after directive, found {other:?}"),
                ))
            }
        };
        let iri = match self.next()?.tok {
            Tok::IriRef(s) => s,
            other => {
                return Err(err(
                    line,
                    format!("expected <iri> in prefix directive, found {other:?}"),
                ))
            }
        };
        self.prefixes.insert(prefix, iri);
        if turtle_style {
            self.expect(Tok::Dot, "'.' after @prefix")?;
        }
        Ok(())
    }

    fn iri(&mut self, allow_var: bool) -> Result<Term, GraphError> {
        let line = self.line();
        let t = self.next()?;
        match t.tok {
            Tok::IriRef(s) => Ok(Term::Iri(s)),
            Tok::PName(p, l) => Ok(Term::Iri(self.expand(&p, &l, line)?)),
            Tok::Word(w) if w == "a" => Ok(Term::iri(RDF_TYPE)),
            Tok::Var(v) if allow_var => Ok(Term::Variable(v)),
            other => Err(err(line, format!("expected IRI, found {other:?}"))),
        }
    }

    fn object(&mut self, allow_var: bool) -> Result<Term, GraphError> {
        let line = self.line();
        let lexical = match self.peek() {
            Some(Tok::Str(s)) => s.clone(),
            Some(Tok::Num(s)) => s.clone(),
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                let w = w.clone();
                self.next()?;
                return Ok(Term::typed(w, format!("{XSD}boolean")));
            }
            Some(Tok::Word(w)) if w != "a" => {
                return Err(err(line, format!("unexpected word '{w}'")));
            }
            _ => return self.iri(allow_var),
        };
        self.next()?;
        let datatype = if self.peek() == Some(&Tok::DoubleCaret) {
            self.next()?;
            match self.iri(false)? {
                Term::Iri(s) => Some(s),
                _ => unreachable!(),
            }
        } else {
            None
        };
        Ok(Term::Literal(Literal { lexical, datatype }))
    }

    /// `subject verb objects (; verb objects)*`, leaving the terminator.
    fn statement(&mut self, allow_var: bool, out: &mut Vec<(Term, Term, Term, usize)>) -> Result<(), GraphError> {
        let s = self.iri(allow_var)?;
        loop {
            let p = self.iri(allow_var)?;
            loop {
                let line = self.line();
                let o = self.object(allow_var)?;
                out.push((s.clone(), p.clone(), o, line));
                if self.peek() == Some(&Tok::Comma) {
                    self.next()?;
                } else {
                    break;
                }
            }
            if self.peek() == Some(&Tok::Semi) {
                self.next()?;
                // Tolerate a dangling ';' before the terminator.
                if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBrace) | None) {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }
}

/// Parses a document into a graph; duplicate statements collapse.
pub fn parse_document(text: &str) -> Result<Graph, GraphError> {
    let mut p = Parser::new(tokenize(text)?, BTreeMap::new());
    let mut g = Graph::new();
    while let Some(tok) = p.peek() {
        match tok {
            Tok::Word(w) if w == "@prefix" => p.directive(true)?,
            Tok::Word(w) if w.eq_ignore_ascii_case("PREFIX") => p.directive(false)?,
            _ => {
                let mut stmts = Vec::new();
                p.statement(false, &mut stmts)?;
                p.expect(Tok::Dot, "'.' at end of statement")?;
                for (s, pr, o, line) in stmts {
                    let t = Triple::new(s, pr, o).map_err(|e| err(line, e.to_string()))?;
                    g.insert(t);
                }
            }
        }
    }
    for (prefix, iri) in &p.prefixes {
        g.add_prefix(prefix, iri);
    }
    Ok(g)
}

/// Parses a query. Prefixes from `base` (typically the target graph's) are
/// visible unless the query redeclares them.
pub fn parse_query(text: &str, base: &BTreeMap<String, String>) -> Result<Query, GraphError> {
    let mut p = Parser::new(tokenize(text)?, base.clone());
    while p.is_word("PREFIX") {
        p.directive(false)?;
    }
    if !p.is_word("SELECT") {
        return Err(err(p.line(), "expected SELECT"));
    }
    p.next()?;
    let mut select = Vec::new();
    let mut star = false;
    loop {
        match p.peek() {
            Some(Tok::Var(v)) => {
                select.push(v.clone());
                p.next()?;
            }
            Some(Tok::Star) if select.is_empty() && !star => {
                star = true;
                p.next()?;
            }
            _ => break,
        }
    }
    if select.is_empty() && !star {
        return Err(err(p.line(), "SELECT needs variables or '*'"));
    }
    if p.is_word("WHERE") {
        p.next()?;
    }
    p.expect(Tok::LBrace, "'{'")?;
    let mut patterns = Vec::new();
    let mut filters = Vec::new();
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.next()?;
                break;
            }
            Some(Tok::Dot) => {
                p.next()?;
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                let line = p.line();
                p.next()?;
                p.expect(Tok::LParen, "'(' after FILTER")?;
                let var = match p.next()?.tok {
                    Tok::Var(v) => v,
                    other => return Err(err(line, format!("FILTER must start with a variable, found {other:?}"))),
                };
                let op = match p.next()?.tok {
                    Tok::Op(op) => op,
                    other => return Err(err(line, format!("expected comparison, found {other:?}"))),
                };
                let value = p.object(false)?;
                p.expect(Tok::RParen, "')' closing FILTER")?;
                filters.push(Filter { var, op, value });
            }
            None => return Err(err(p.last_line, "unterminated WHERE block")),
            _ => {
                let mut stmts = Vec::new();
                p.statement(true, &mut stmts)?;
                for (s, pr, o, line) in stmts {
                    if matches!(s, Term::Literal(_)) {
                        return Err(err(line, "literal in subject position"));
                    }
                    patterns.push(TriplePattern { s, p: pr, o });
                }
            }
        }
    }
    if let Some(t) = p.toks.get(p.pos) {
        return Err(err(t.line, format!("trailing input {:?}", t.tok)));
    }
    let q = Query {
        select: if star { None } else { Some(select) },
        patterns,
        filters,
    };
    q.check()?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BOT, UNIT};

    const DOC: &str = r#"
@prefix bot: <https://w3id.org/bot#> .
@prefix unit: <http://qudt.org/vocab/unit/> .
@prefix : <https://example.org/b#> .
# comment with <not an iri> and "no string"
:Zone a bot:Zone ;
    :area 48^^unit:M2 ;
    :label "zone \"one\"" .
:Zone bot:adjacentElement :W1, :W2 . # trailing comment
:W1 :u -1.5e-1 .
"#;

    #[test]
    fn parses_document() {
        let g = parse_document(DOC).unwrap();
        assert_eq!(g.len(), 6);
        let zone = Term::iri("https://example.org/b#Zone");
        assert!(g.has_type(&zone, &format!("{BOT}Zone")));
        let area: Vec<_> = g.objects(&zone, &Term::iri("https://example.org/b#area")).collect();
        assert_eq!(area, vec![&Term::typed("48", format!("{UNIT}M2"))]);
        let label = g
            .objects(&zone, &Term::iri("https://example.org/b#label"))
            .next()
            .unwrap();
        assert_eq!(label.as_literal().unwrap().lexical, "zone \"one\"");
        let w1 = Term::iri("https://example.org/b#W1");
        let u = g.objects(&w1, &Term::iri("https://example.org/b#u")).next().unwrap();
        assert_eq!(u.as_literal().unwrap().number(), Some(-0.15));
    }

    #[test]
    fn undeclared_prefix_is_named() {
        let e = parse_document("@prefix a: <urn:a#> .\na:x a:p a:y .\nb:x a:p a:y .\n").unwrap_err();
        assert_eq!(
            e,
            GraphError::UndeclaredPrefix {
                line: 3,
                prefix: "b".into()
            }
        );
    }

    #[test]
    fn syntax_errors_carry_lines() {
        for (doc, line) in [
            ("<urn:s> <urn:p> <urn:o>", 1),
            ("<urn:s> <urn:p>\n\n\"open", 3),
            ("<urn:s> <urn:p> <urn:o> .\n\"lit\" <urn:p> <urn:o> .", 2),
            ("<urn:s> <urn:p> 1.2.3 .", 1),
        ] {
            match parse_document(doc) {
                Err(GraphError::Syntax { line: l, .. }) => assert_eq!(l, line, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn duplicates_collapse() {
        let g = parse_document("<urn:s> <urn:p> 1, 1 .\n<urn:s> <urn:p> 1 .").unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn query_parse() {
        let g = parse_document(DOC).unwrap();
        let q = parse_query(
            "PREFIX x: <urn:x#>\nSELECT ?e ?u WHERE {\n :Zone bot:adjacentElement ?e .\n ?e :u ?u .\n FILTER(?u < 0)\n}",
            g.prefixes(),
        )
        .unwrap();
        assert_eq!(q.patterns.len(), 2);
        assert_eq!(q.filters.len(), 1);
        assert_eq!(q.filters[0].op, FilterOp::Lt);
        assert!(parse_query("SELECT ?x WHERE { ?y <urn:p> ?z }", g.prefixes()).is_err());
        assert!(parse_query("SELECT * { ?y <urn:p> ?z . } extra", g.prefixes()).is_err());
    }

    #[test]
    fn document_round_trip() {
        let g = parse_document(DOC).unwrap();
        let again = parse_document(&g.to_document()).unwrap();
        assert_eq!(g, again);
    }
}
