use crate::syntax::{Formula, Signature, SignatureError, Term};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

/// Dense element index; names are kept in [`Model::element_name`].
pub type Elem = u32;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ModelError {
    #[error("a model needs at least two elements, got {0}")]
    TooSmall(usize),
    #[error("element `{0}` listed twice")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("`{name}` expects tuples of length {arity}, got {found}")]
    TupleArity { name: String, arity: usize, found: usize },
    #[error("symbol `{0}` defined twice")]
    Redefined(String),
    #[error("function `{name}` is not total: no value for ({args})")]
    NotTotal { name: String, args: String },
    #[error("function `{name}` has two values for ({args})")]
    NotFunctional { name: String, args: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Clone, Debug)]
pub struct Model {
    sig: Signature,
    names: Vec<String>,
    index: HashMap<String, Elem>,
    relations: BTreeMap<String, HashSet<Vec<Elem>>>,
    functions: BTreeMap<String, HashMap<Vec<Elem>, Elem>>,
    constants: BTreeMap<String, Elem>,
}

impl Model {
    pub fn new<S: AsRef<str>>(universe: &[S]) -> Result<Model, ModelError> {
        if universe.len() < 2 {
            return Err(ModelError::TooSmall(universe.len()));
        }
        let mut index = HashMap::new();
        let mut names = Vec::new();
        for (i, n) in universe.iter().enumerate() {
            let n = n.as_ref().to_string();
            if index.insert(n.clone(), i as Elem).is_some() {
                return Err(ModelError::DuplicateElement(n));
            }
            names.push(n);
        }
        Ok(Model {
            sig: Signature::new(),
            names,
            index,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    /// Universe `0, 1, ..., n-1`.
    pub fn with_size(n: usize) -> Result<Model, ModelError> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Model::new(&names)
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        0..self.names.len() as Elem
    }

    pub fn element(&self, name: &str) -> Result<Elem, ModelError> {
        self.index.get(name).copied().ok_or_else(|| ModelError::UnknownElement(name.to_string()))
    }

    pub fn element_name(&self, e: Elem) -> &str {
        &self.names[e as usize]
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    fn check_tuple(&self, name: &str, arity: usize, t: &[Elem]) -> Result<(), ModelError> {
        if t.len() != arity {
            return Err(ModelError::TupleArity { name: name.to_string(), arity, found: t.len() });
        }
        match t.iter().find(|&&e| e as usize >= self.names.len()) {
            Some(e) => Err(ModelError::UnknownElement(e.to_string())),
            None => Ok(()),
        }
    }

    pub fn add_relation<I>(&mut self, name: &str, arity: usize, tuples: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = Vec<Elem>>,
    {
        if self.relations.contains_key(name) {
            return Err(ModelError::Redefined(name.to_string()));
        }
        self.sig.add_relation(name, arity)?;
        let mut set = HashSet::new();
        for t in tuples {
            self.check_tuple(name, arity, &t)?;
            set.insert(t);
        }
        self.relations.insert(name.to_string(), set);
        Ok(())
    }

    /// Adds a function table; it must be total and single-valued.
    pub fn add_function<I>(&mut self, name: &str, arity: usize, table: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (Vec<Elem>, Elem)>,
    {
        if self.functions.contains_key(name) {
            return Err(ModelError::Redefined(name.to_string()));
        }
        self.sig.add_function(name, arity)?;
        let mut map = HashMap::new();
        for (args, v) in table {
            self.check_tuple(name, arity, &args)?;
            self.check_tuple(name, 1, &[v])?;
            if let Some(old) = map.insert(args.clone(), v) {
                if old != v {
                    return Err(ModelError::NotFunctional { name: name.to_string(), args: self.render_tuple(&args) });
                }
            }
        }
        let n = self.size();
        let mut args = vec![0 as Elem; arity];
        loop {
            if !map.contains_key(&args) {
                return Err(ModelError::NotTotal { name: name.to_string(), args: self.render_tuple(&args) });
            }
            if !next_tuple(&mut args, n) {
                break;
            }
        }
        self.functions.insert(name.to_string(), map);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, value: Elem) -> Result<(), ModelError> {
        if self.constants.contains_key(name) {
            return Err(ModelError::Redefined(name.to_string()));
        }
        self.check_tuple(name, 1, &[value])?;
        self.sig.add_constant(name)?;
        self.constants.insert(name.to_string(), value);
        Ok(())
    }

    fn render_tuple(&self, t: &[Elem]) -> String {
        t.iter().map(|&e| self.element_name(e)).collect::<Vec<_>>().join(",")
    }

    pub fn holds(&self, rel: &str, args: &[Elem]) -> Option<bool> {
        self.relations.get(rel).map(|s| s.contains(args))
    }

    pub fn apply(&self, fun: &str, args: &[Elem]) -> Option<Elem> {
        self.functions.get(fun).and_then(|m| m.get(args).copied())
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn relation_tuples(&self, rel: &str) -> Option<&HashSet<Vec<Elem>>> {
        self.relations.get(rel)
    }

    /// Every symbol of `phi` is interpreted with the right arity.
    pub fn check_symbols(&self, phi: &Formula) -> Result<(), String> {
        fn term(m: &Model, t: &Term) -> Result<(), String> {
            match t {
                Term::Var(_) => Ok(()),
                Term::Const(c) if m.constants.contains_key(c) => Ok(()),
                Term::Const(c) => Err(format!("constant `{}` is not interpreted", c)),
                Term::App(f, args) => match m.sig.functions.get(f) {
                    Some(&a) if a == args.len() => args.iter().try_for_each(|x| term(m, x)),
                    Some(&a) => Err(format!("function `{}` has arity {}, used with {}", f, a, args.len())),
                    None => Err(format!("function `{}` is not interpreted", f)),
                },
            }
        }
        match phi {
            Formula::Bot | Formula::Inc(..) => Ok(()),
            Formula::Eq(a, b) => term(self, a).and_then(|_| term(self, b)),
            Formula::Rel(r, args) => match self.sig.relations.get(r) {
                Some(&a) if a == args.len() => args.iter().try_for_each(|x| term(self, x)),
                Some(&a) => Err(format!("relation `{}` has arity {}, used with {}", r, a, args.len())),
                None => Err(format!("relation `{}` is not interpreted", r)),
            },
            Formula::Not(b) | Formula::Exists(_, b) | Formula::Forall(_, b) => self.check_symbols(b),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.check_symbols(a)?;
                self.check_symbols(b)
            }
        }
    }
}

/// Odometer increment over `{0..n}^k`; false once it wraps around.
pub(crate) fn next_tuple(t: &mut [Elem], n: usize) -> bool {
    for slot in t.iter_mut().rev() {
        if (*slot as usize) + 1 < n {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_needs_two_elements() {
        assert_eq!(Model::new(&["a"]).unwrap_err(), ModelError::TooSmall(1));
        assert!(Model::new(&["a", "a"]).is_err());
    }

    #[test]
    fn functions_must_be_total() {
        let mut m = Model::with_size(2).unwrap();
        assert!(matches!(m.add_function("f", 1, vec![(vec![0], 1)]), Err(ModelError::NotTotal { .. })));
        let mut m = Model::with_size(2).unwrap();
        m.add_function("f", 1, vec![(vec![0], 1), (vec![1], 0)]).unwrap();
        assert_eq!(m.apply("f", &[1]), Some(0));
    }

    #[test]
    fn relation_tuples_checked() {
        let mut m = Model::with_size(2).unwrap();
        assert!(m.add_relation("R", 2, vec![vec![0]]).is_err());
        let mut m = Model::with_size(2).unwrap();
        m.add_relation("<", 2, vec![vec![0, 1]]).unwrap();
        assert_eq!(m.holds("<", &[0, 1]), Some(true));
        assert_eq!(m.holds("<", &[1, 0]), Some(false));
    }

    #[test]
    fn odometer_covers_all_tuples() {
        let mut t = vec![0, 0];
        let mut count = 1;
        while next_tuple(&mut t, 3) {
            count += 1;
        }
        assert_eq!(count, 9);
    }
}
