//! Basic-graph-pattern evaluation.

use std::collections::{BTreeMap, BTreeSet};

use super::{Graph, GraphError, Term};

pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl TriplePattern {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        TriplePattern { s, p, o }
    }

    fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.s, &self.p, &self.o].into_iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub var: String,
    pub op: FilterOp,
    pub value: Term,
}

impl Filter {
    fn holds(&self, t: &Term) -> bool {
        use std::cmp::Ordering;
        let numeric = match (t, &self.value) {
            (Term::Literal(a), Term::Literal(b)) => a.number().zip(b.number()),
            _ => None,
        };
        let ord = match numeric {
            Some((a, b)) => a.partial_cmp(&b),
            None => match (t, &self.value) {
                (Term::Literal(a), Term::Literal(b)) if a.number().is_none() && b.number().is_none() => {
                    Some(a.lexical.cmp(&b.lexical))
                }
                (a, b) if a == b => Some(Ordering::Equal),
                _ => None,
            },
        };
        match (self.op, ord) {
            (FilterOp::Ne, None) => true,
            (_, None) => false,
            (FilterOp::Lt, Some(o)) => o == Ordering::Less,
            (FilterOp::Le, Some(o)) => o != Ordering::Greater,
            (FilterOp::Gt, Some(o)) => o == Ordering::Greater,
            (FilterOp::Ge, Some(o)) => o != Ordering::Less,
            (FilterOp::Eq, Some(o)) => o == Ordering::Equal,
            (FilterOp::Ne, Some(o)) => o != Ordering::Equal,
        }
    }
}

/// Conjunctive query. `select == None` projects every variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub select: Option<Vec<String>>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl Query {
    pub fn new(select: Option<Vec<String>>, patterns: Vec<TriplePattern>) -> Self {
        Query {
            select,
            patterns,
            filters: Vec::new(),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.patterns
            .iter()
            .flat_map(|p| p.variables().map(String::from))
            .collect()
    }

    pub fn check(&self) -> Result<(), GraphError> {
        let vars = self.variables();
        let selected = self.select.iter().flatten();
        for v in selected.chain(self.filters.iter().map(|f| &f.var)) {
            if !vars.contains(v) {
                return Err(GraphError::UnboundVariable(v.clone()));
            }
        }
        Ok(())
    }
}

fn resolve<'a>(t: &'a Term, b: &'a Binding) -> Option<&'a Term> {
    match t {
        Term::Variable(v) => b.get(v),
        other => Some(other),
    }
}

fn bind(b: &mut Binding, pat: &Term, value: &Term) -> bool {
    match pat {
        Term::Variable(v) => match b.get(v) {
            Some(existing) => existing == value,
            None => {
                b.insert(v.clone(), value.clone());
                true
            }
        },
        other => other == value,
    }
}

fn extend(g: &Graph, pats: &[TriplePattern], b: &Binding, out: &mut Vec<Binding>) {
    let Some((first, rest)) = pats.split_first() else {
        out.push(b.clone());
        return;
    };
    let (s, p, o) = (resolve(&first.s, b), resolve(&first.p, b), resolve(&first.o, b));
    for t in g.matching(s, p, o) {
        let mut nb = b.clone();
        if bind(&mut nb, &first.s, &t.s) && bind(&mut nb, &first.p, &t.p) && bind(&mut nb, &first.o, &t.o) {
            extend(g, rest, &nb, out);
        }
    }
}

/// Every assignment satisfying all patterns and filters, projected and
/// returned as a sorted set.
pub(super) fn evaluate(g: &Graph, q: &Query) -> Result<Vec<Binding>, GraphError> {
    q.check()?;
    let mut raw = Vec::new();
    extend(g, &q.patterns, &Binding::new(), &mut raw);
    let rows: BTreeSet<Binding> = raw
        .into_iter()
        .filter(|b| q.filters.iter().all(|f| b.get(&f.var).is_some_and(|t| f.holds(t))))
        .map(|b| match &q.select {
            Some(vars) => vars
                .iter()
                .filter_map(|v| b.get_key_value(v))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            None => b,
        })
        .collect();
    Ok(rows.into_iter().collect())
}
