use super::Var;
use std::collections::BTreeSet;

/// Deterministic gensym: a fresh name is the base name or the base name
/// followed by the lowest unused numeric suffix.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    used: BTreeSet<Var>,
}

impl NameSupply {
    pub fn new<I: IntoIterator<Item = Var>>(used: I) -> NameSupply {
        NameSupply { used: used.into_iter().collect() }
    }

    pub fn reserve(&mut self, v: &Var) {
        self.used.insert(v.clone());
    }

    pub fn reserve_all<'a, I: IntoIterator<Item = &'a Var>>(&mut self, vs: I) {
        for v in vs {
            self.reserve(v);
        }
    }

    pub fn is_used(&self, v: &Var) -> bool {
        self.used.contains(v)
    }

    /// `base` itself if unused, otherwise `base1`, `base2`, ...
    pub fn fresh(&mut self, base: &str) -> Var {
        let plain = Var::new(base);
        if !self.used.contains(&plain) {
            self.used.insert(plain.clone());
            return plain;
        }
        self.fresh_indexed(base)
    }

    /// Always suffixed: `base1`, `base2`, ...
    pub fn fresh_indexed(&mut self, base: &str) -> Var {
        let mut k = 1usize;
        loop {
            let v = Var::new(&format!("{}{}", base, k));
            if !self.used.contains(&v) {
                self.used.insert(v.clone());
                return v;
            }
            k += 1;
        }
    }

    pub fn fresh_seq(&mut self, base: &str, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.fresh(base)).collect()
    }
}

/// The name with trailing digits removed, unless that leaves nothing.
pub(crate) fn base_name(name: &str) -> &str {
    let trimmed = name.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.is_empty() {
        name
    } else {
        trimmed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_unused_suffix() {
        let mut s = NameSupply::new([Var::new("x"), Var::new("x1")]);
        assert_eq!(s.fresh("x").as_str(), "x2");
        assert_eq!(s.fresh("y").as_str(), "y");
        assert_eq!(s.fresh("y").as_str(), "y1");
        assert_eq!(s.fresh_indexed("w").as_str(), "w1");
    }

    #[test]
    fn base_name_strips_digits() {
        assert_eq!(base_name("x12"), "x");
        assert_eq!(base_name("x'"), "x'");
        assert_eq!(base_name("_1"), "_");
    }
}
