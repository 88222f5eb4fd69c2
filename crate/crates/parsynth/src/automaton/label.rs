//! Compact valuations and symbolic edge labels.

use std::collections::HashMap;

use crate::ltl::{GroundAtom, Ltl};

use super::AutomatonError;

/// A full valuation of the alphabet's atoms, one bit per atom.
pub type Letter = u64;

/// The finite set of ground atoms an automaton's labels may mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
}

impl Alphabet {
    /// Builds an alphabet from atoms, sorted and deduplicated.
    pub fn new(mut atoms: Vec<GroundAtom>) -> Result<Self, AutomatonError> {
        atoms.sort();
        atoms.dedup();
        if atoms.len() > 64 {
            return Err(AutomatonError::AlphabetTooLarge(atoms.len()));
        }
        let index = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(Alphabet { atoms, index })
    }

    /// The alphabet of a ground formula.
    pub fn of_formula(f: &Ltl) -> Result<Self, AutomatonError> {
        let atoms = f.ground_atoms().map_err(|e| AutomatonError::NotGround(e.to_string()))?;
        Alphabet::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn position(&self, atom: &GroundAtom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    /// Letter with exactly the given atoms true.
    pub fn letter(&self, atoms: &[GroundAtom]) -> Result<Letter, AutomatonError> {
        let mut l = 0u64;
        for a in atoms {
            let i = self
                .position(a)
                .ok_or_else(|| AutomatonError::UnknownAtom(a.to_string()))?;
            l |= 1 << i;
        }
        Ok(l)
    }

    /// All `2^n` letters, in numeric order.
    pub fn all_letters(&self) -> impl Iterator<Item = Letter> {
        debug_assert!(self.atoms.len() <= 24, "letter enumeration is for small alphabets");
        0..(1u64 << self.atoms.len())
    }

    pub fn display_letter(&self, letter: Letter) -> String {
        let mut parts = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if letter & (1 << i) != 0 {
                parts.push(a.to_string());
            }
        }
        if parts.is_empty() {
            "{}".to_string()
        } else {
            format!("{{{}}}", parts.join(","))
        }
    }
}

/// Conjunction of literals: atoms in `pos` must hold, atoms in `neg` must
/// not. Unmentioned atoms are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub pos: u64,
    pub neg: u64,
}

impl Label {
    pub fn top() -> Self {
        Label { pos: 0, neg: 0 }
    }

    pub fn literal(atom: usize, positive: bool) -> Self {
        if positive {
            Label { pos: 1 << atom, neg: 0 }
        } else {
            Label { pos: 0, neg: 1 << atom }
        }
    }

    pub fn is_top(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    /// Conjunction; `None` when contradictory.
    pub fn conj(&self, other: &Label) -> Option<Label> {
        let pos = self.pos | other.pos;
        let neg = self.neg | other.neg;
        if pos & neg != 0 {
            None
        } else {
            Some(Label { pos, neg })
        }
    }

    pub fn satisfied_by(&self, letter: Letter) -> bool {
        (letter & self.pos) == self.pos && (letter & self.neg) == 0
    }

    /// True if this label constrains no more than `other` (every letter
    /// satisfying `other` satisfies `self`).
    pub fn subsumes(&self, other: &Label) -> bool {
        (self.pos & other.pos) == self.pos && (self.neg & other.neg) == self.neg
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.is_top() {
            return "*".to_string();
        }
        let mut parts = Vec::new();
        for (i, a) in alphabet.atoms().iter().enumerate() {
            if self.pos & (1 << i) != 0 {
                parts.push(a.to_string());
            } else if self.neg & (1 << i) != 0 {
                parts.push(format!("!{a}"));
            }
        }
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_conjunction_detects_contradiction() {
        let a = Label::literal(0, true);
        let b = Label::literal(0, false);
        assert!(a.conj(&b).is_none());
        let c = Label::literal(1, true);
        let ac = a.conj(&c).unwrap();
        assert!(ac.satisfied_by(0b11));
        assert!(!ac.satisfied_by(0b10));
    }

    #[test]
    fn alphabet_orders_atoms() {
        let a = Alphabet::new(vec![
            GroundAtom::new("r", 2),
            GroundAtom::new("g", 1),
            GroundAtom::new("r", 1),
            GroundAtom::new("g", 1),
        ])
        .unwrap();
        assert_eq!(a.len(), 3);
        let names: Vec<String> = a.atoms().iter().map(|x| x.to_string()).collect();
        assert_eq!(names, vec!["g_1", "r_1", "r_2"]);
    }
}
