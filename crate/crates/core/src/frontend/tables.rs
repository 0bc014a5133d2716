use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::Rational;

/// Where a table came from; determines how it pretty-prints.
#[derive(Clone, Debug, PartialEq)]
pub enum TableSource {
    Named(String),
    Explicit,
}

/// Totally antisymmetric rational tensor given by its nonzero entries.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTable {
    rank: usize,
    entries: BTreeMap<Vec<u32>, Rational>,
    source: TableSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableDefect {
    RankMismatch,
    NotAntisymmetric(Vec<u32>),
    Jacobi([u32; 4]),
}

impl StructureTable {
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "eps3" => {
                let mut entries = BTreeMap::new();
                for (key, sign) in
                    [([1, 2, 3], 1), ([2, 3, 1], 1), ([3, 1, 2], 1), ([2, 1, 3], -1), ([1, 3, 2], -1), ([3, 2, 1], -1)]
                {
                    entries.insert(key.to_vec(), Rational::from_integer(sign.into()));
                }
                Some(StructureTable { rank: 3, entries, source: TableSource::Named(name.into()) })
            }
            _ => None,
        }
    }

    pub fn explicit(entries: Vec<(Vec<u32>, Rational)>) -> Result<Self, TableDefect> {
        let rank = entries.first().map(|(k, _)| k.len()).unwrap_or(3);
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if k.len() != rank {
                return Err(TableDefect::RankMismatch);
            }
            if !v.is_zero() {
                map.insert(k, v);
            }
        }
        Ok(StructureTable { rank, entries: map, source: TableSource::Explicit })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn source(&self) -> &TableSource {
        &self.source
    }

    pub fn get(&self, key: &[u32]) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    fn max_index(&self) -> u32 {
        self.entries.keys().flat_map(|k| k.iter().copied()).max().unwrap_or(0)
    }

    /// Checks total antisymmetry, and for rank-3 tables the Jacobi identity
    /// `Σ_e (f^{abe}f^{ecd} + f^{cbe}f^{aed} + f^{dbe}f^{ace}) = 0`.
    pub fn validate(&self) -> Result<(), TableDefect> {
        for (key, v) in &self.entries {
            for i in 0..self.rank {
                for j in i + 1..self.rank {
                    let mut swapped = key.clone();
                    swapped.swap(i, j);
                    if self.get(&swapped) != -v.clone() {
                        return Err(TableDefect::NotAntisymmetric(key.clone()));
                    }
                }
            }
        }
        if self.rank == 3 {
            let n = self.max_index();
            for a in 1..=n {
                for b in 1..=n {
                    for c in 1..=n {
                        for d in 1..=n {
                            let mut s = Rational::zero();
                            for e in 1..=n {
                                s += self.get(&[a, b, e]) * self.get(&[e, c, d])
                                    + self.get(&[c, b, e]) * self.get(&[a, e, d])
                                    + self.get(&[d, b, e]) * self.get(&[a, c, e]);
                            }
                            if !s.is_zero() {
                                return Err(TableDefect::Jacobi([a, b, c, d]));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for StructureTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let TableSource::Named(name) = &self.source {
            return write!(f, "{name}");
        }
        write!(f, "{{")?;
        for (k, (key, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            let idx: Vec<String> = key.iter().map(|i| i.to_string()).collect();
            let value = if v.is_negative() { format!("-{}", v.abs()) } else { v.to_string() };
            write!(f, "{}: {}", idx.join(" "), value)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn levi_civita_entries() {
        let eps = StructureTable::named("eps3").unwrap();
        assert_eq!(eps.get(&[1, 2, 3]), r(1));
        assert_eq!(eps.get(&[1, 1, 2]), r(0));
        assert_eq!(eps.get(&[3, 2, 1]), r(-1));
        assert!(eps.validate().is_ok());
    }

    #[test]
    fn detects_symmetric_entry() {
        let t = StructureTable::explicit(vec![(vec![1, 2, 3], r(1)), (vec![2, 1, 3], r(1))]).unwrap();
        assert!(matches!(t.validate(), Err(TableDefect::NotAntisymmetric(_))));
    }

    #[test]
    fn detects_jacobi_violation() {
        // Antisymmetric, but two rotation blocks sharing only index 3 do not
        // close. Any antisymmetric table on four indices would.
        let mut entries = Vec::new();
        let perms: [([usize; 3], i64); 6] =
            [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([1, 0, 2], -1), ([0, 2, 1], -1), ([2, 1, 0], -1)];
        for (base, scale) in [([1u32, 2, 3], 1i64), ([3, 4, 5], 1)] {
            for (p, s) in perms {
                entries.push((p.iter().map(|&i| base[i]).collect(), r(s * scale)));
            }
        }
        let t = StructureTable::explicit(entries).unwrap();
        assert!(matches!(t.validate(), Err(TableDefect::Jacobi(_))));
    }
}
