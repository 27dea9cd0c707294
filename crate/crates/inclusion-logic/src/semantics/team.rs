use super::model::{Elem, Model};
use crate::syntax::Var;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type Row = Vec<Elem>;
pub type Assignment = BTreeMap<Var, Elem>;

/// Maps each row of a team to a nonempty set of elements.
pub type SupplementFunction = BTreeMap<Row, BTreeSet<Elem>>;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum TeamError {
    #[error("row has {found} values but the domain has {expected} variables")]
    RowWidth { expected: usize, found: usize },
    #[error("variable `{0}` appears twice in the domain")]
    DuplicateVar(Var),
    #[error("assignment domain differs from the team domain")]
    DomainMismatch,
    #[error("supplement function has no value for a row of the team")]
    MissingRow,
    #[error("supplement function maps a row to the empty set")]
    EmptyImage,
}

/// A set of assignments over a common domain. The domain is kept sorted and
/// every row lists values in domain order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Team {
    domain: Vec<Var>,
    rows: BTreeSet<Row>,
}

impl Team {
    /// Builds a team; the domain may be given in any order and rows are permuted to match.
    pub fn new<I>(domain: Vec<Var>, rows: I) -> Result<Team, TeamError>
    where
        I: IntoIterator<Item = Row>,
    {
        let mut order: Vec<usize> = (0..domain.len()).collect();
        order.sort_by(|&a, &b| domain[a].cmp(&domain[b]));
        let sorted: Vec<Var> = order.iter().map(|&i| domain[i].clone()).collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(TeamError::DuplicateVar(w[0].clone()));
        }
        let mut out = BTreeSet::new();
        for r in rows {
            if r.len() != domain.len() {
                return Err(TeamError::RowWidth { expected: domain.len(), found: r.len() });
            }
            out.insert(order.iter().map(|&i| r[i]).collect());
        }
        Ok(Team { domain: sorted, rows: out })
    }

    pub fn empty(domain: Vec<Var>) -> Team {
        Team::new(domain, Vec::new()).expect("empty team over distinct variables")
    }

    /// `{∅}`: one row over the empty domain.
    pub fn unit() -> Team {
        Team { domain: Vec::new(), rows: [Vec::new()].into_iter().collect() }
    }

    pub fn from_assignments<I>(domain: Vec<Var>, rows: I) -> Result<Team, TeamError>
    where
        I: IntoIterator<Item = Assignment>,
    {
        let mut sorted = domain;
        sorted.sort();
        sorted.dedup();
        let mut out = BTreeSet::new();
        for a in rows {
            if a.len() != sorted.len() || !sorted.iter().all(|v| a.contains_key(v)) {
                return Err(TeamError::DomainMismatch);
            }
            out.insert(sorted.iter().map(|v| a[v]).collect());
        }
        Ok(Team { domain: sorted, rows: out })
    }

    pub(crate) fn from_sorted(domain: Vec<Var>, rows: BTreeSet<Row>) -> Team {
        debug_assert!(domain.windows(2).all(|w| w[0] < w[1]));
        Team { domain, rows }
    }

    pub fn domain(&self) -> &[Var] {
        &self.domain
    }

    pub fn rows(&self) -> &BTreeSet<Row> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn position(&self, v: &Var) -> Option<usize> {
        self.domain.binary_search(v).ok()
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows.iter().map(move |r| self.domain.iter().cloned().zip(r.iter().copied()).collect())
    }

    /// Same domain, a subset of the rows.
    pub fn with_rows<I: IntoIterator<Item = Row>>(&self, rows: I) -> Team {
        Team { domain: self.domain.clone(), rows: rows.into_iter().collect() }
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.domain == other.domain && self.rows.is_subset(&other.rows)
    }

    pub fn union(&self, other: &Team) -> Option<Team> {
        if self.domain != other.domain {
            return None;
        }
        Some(self.with_rows(self.rows.union(&other.rows).cloned()))
    }

    /// `X ↾ vars`: restriction to the given variables (those outside the domain are ignored).
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Team {
        let keep: Vec<usize> = (0..self.domain.len()).filter(|&i| vars.contains(&self.domain[i])).collect();
        Team {
            domain: keep.iter().map(|&i| self.domain[i].clone()).collect(),
            rows: self.rows.iter().map(|r| keep.iter().map(|&i| r[i]).collect()).collect(),
        }
    }

    /// Where `x` sits in the domain after extension, and whether it was already there.
    pub(crate) fn slot(&self, x: &Var) -> (usize, bool) {
        match self.domain.binary_search(x) {
            Ok(i) => (i, true),
            Err(i) => (i, false),
        }
    }

    pub(crate) fn extended_domain(&self, x: &Var) -> Vec<Var> {
        let (i, present) = self.slot(x);
        let mut d = self.domain.clone();
        if !present {
            d.insert(i, x.clone());
        }
        d
    }

    /// `s(a/x)` for a row of this team.
    pub(crate) fn extend_row(row: &[Elem], slot: (usize, bool), a: Elem) -> Row {
        let (i, present) = slot;
        let mut r = row.to_vec();
        if present {
            r[i] = a;
        } else {
            r.insert(i, a);
        }
        r
    }
}

/// `X(M/x)`.
pub fn duplicate(team: &Team, x: &Var, model: &Model) -> Team {
    let slot = team.slot(x);
    let rows = team.rows.iter().flat_map(|r| model.elements().map(move |a| Team::extend_row(r, slot, a))).collect();
    Team::from_sorted(team.extended_domain(x), rows)
}

/// `X(F/x)`.
pub fn supplement(team: &Team, x: &Var, f: &SupplementFunction) -> Result<Team, TeamError> {
    if f.len() != team.len() {
        return Err(TeamError::MissingRow);
    }
    let slot = team.slot(x);
    let mut rows = BTreeSet::new();
    for r in &team.rows {
        let image = f.get(r).ok_or(TeamError::MissingRow)?;
        if image.is_empty() {
            return Err(TeamError::EmptyImage);
        }
        for &a in image {
            rows.insert(Team::extend_row(r, slot, a));
        }
    }
    Ok(Team::from_sorted(team.extended_domain(x), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::vars;

    #[test]
    fn duplicate_examples() {
        let m = Model::with_size(2).unwrap();
        let x = Var::new("x");
        let d = duplicate(&Team::unit(), &x, &m);
        assert_eq!(d.domain(), &vars(&["x"])[..]);
        assert_eq!(d.len(), 2);
        assert!(duplicate(&Team::empty(vec![]), &x, &m).is_empty());
        let one = Team::new(vars(&["y"]), vec![vec![0]]).unwrap();
        let d = duplicate(&one, &x, &m);
        assert_eq!(d.len(), 2);
        assert!(d.assignments().all(|a| a[&Var::new("y")] == 0));
    }

    #[test]
    fn duplicate_overwrites_existing_variable() {
        let m = Model::with_size(2).unwrap();
        let t = Team::new(vars(&["x"]), vec![vec![0]]).unwrap();
        let d = duplicate(&t, &Var::new("x"), &m);
        assert_eq!(d.domain().len(), 1);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn supplement_examples() {
        let t = Team::new(vars(&["y"]), vec![vec![0]]).unwrap();
        let x = Var::new("x");
        let mut f = SupplementFunction::new();
        f.insert(vec![0], [0].into_iter().collect());
        assert_eq!(supplement(&t, &x, &f).unwrap().len(), 1);
        f.insert(vec![0], [0, 1].into_iter().collect());
        assert_eq!(supplement(&t, &x, &f).unwrap().len(), 2);
        f.insert(vec![0], BTreeSet::new());
        assert_eq!(supplement(&t, &x, &f).unwrap_err(), TeamError::EmptyImage);
        assert_eq!(supplement(&t, &x, &SupplementFunction::new()).unwrap_err(), TeamError::MissingRow);
    }

    #[test]
    fn new_sorts_domain_and_permutes_rows() {
        let t = Team::new(vars(&["y", "x"]), vec![vec![1, 0]]).unwrap();
        assert_eq!(t.domain(), &vars(&["x", "y"])[..]);
        assert!(t.rows().contains(&vec![0, 1]));
        assert!(Team::new(vars(&["x", "x"]), vec![]).is_err());
    }
}
