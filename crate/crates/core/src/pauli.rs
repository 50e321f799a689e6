//! Real-phase Pauli strings on a chain of sites.
//!
//! Site 0 is the leftmost letter of the text form. Strings carry a `±1`
//! phase only: every operator handled by the toolkit is a Hermitian Pauli
//! product, and conjugation among them never produces `±i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Single-site commutation: identical letters or an identity commute.
    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// (x, z) symplectic bits, with Y = i·X·Z.
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Plus,
    Minus,
}

impl Phase {
    pub fn flip(self) -> Phase {
        match self {
            Phase::Plus => Phase::Minus,
            Phase::Minus => Phase::Plus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Phase::Plus => 1.0,
            Phase::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: Phase) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::ParsePauli(String::new()));
        }
        Ok(Self { letters, phase })
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n.max(1)], phase: Phase::Plus }
    }

    /// `letter` on `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, letter: Pauli) -> Result<Self> {
        Self::from_sites(n, &[(site, letter)])
    }

    pub fn two(n: usize, a: usize, b: usize, letter: Pauli) -> Result<Self> {
        Self::from_sites(n, &[(a, letter), (b, letter)])
    }

    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(site, letter) in sites {
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n });
            }
            p.letters[site] = letter;
        }
        Ok(p)
    }

    /// Same letter on every site, e.g. the global `X^{⊗n}` symmetry.
    pub fn uniform(n: usize, letter: Pauli) -> Self {
        Self { letters: vec![letter; n.max(1)], phase: Phase::Plus }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// The same letters with phase `+1`.
    pub fn unsigned(&self) -> Self {
        Self { letters: self.letters.clone(), phase: Phase::Plus }
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|l| !l.is_identity()).count()
    }

    /// Sites carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_identity())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_len(self, other)?;
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| !a.commutes_with(**b))
            .count();
        Ok(clashes % 2 == 0)
    }

    /// `q · self · q`. Letters are unchanged; the phase flips iff the two
    /// strings anticommute.
    pub fn conjugate_by(&self, q: &PauliString) -> Result<PauliString> {
        let commute = self.commutes(q)?;
        let phase = if commute { self.phase } else { self.phase.flip() };
        Ok(PauliString { letters: self.letters.clone(), phase })
    }

    /// Bit masks of the symplectic representation. Site `q` maps to bit
    /// `n - 1 - q` so that site 0 is the most significant qubit of a basis
    /// index, matching the Kronecker order of the text form.
    pub fn masks(&self) -> (usize, usize, usize) {
        let n = self.len();
        let (mut x, mut z, mut y) = (0usize, 0usize, 0usize);
        for (q, l) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            let (xb, zb) = l.xz();
            if xb {
                x |= bit;
            }
            if zb {
                z |= bit;
            }
            if xb && zb {
                y += 1;
            }
        }
        (x, z, y)
    }
}

/// Free-function form of [`PauliString::weight`].
pub fn weight(p: &PauliString) -> usize {
    p.weight()
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

/// Returns `q · p · q` with the correct sign.
pub fn conjugate(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.conjugate_by(q)
}

fn check_len(a: &PauliString, b: &PauliString) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase == Phase::Minus {
            f.write_str("-")?;
        }
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = match t.strip_prefix('-') {
            Some(rest) => (Phase::Minus, rest),
            None => (Phase::Plus, t.strip_prefix('+').unwrap_or(t)),
        };
        if body.is_empty() {
            return Err(Error::ParsePauli(s.to_string()));
        }
        let letters = body
            .chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::ParsePauli(s.to_string()))?;
        Ok(Self { letters, phase })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(weight(&p("IXZI")), 2);
        assert_eq!(weight(&p("IIII")), 0);
        assert_eq!(weight(&p("ZZZZ")), 4);
    }

    #[test]
    fn commutation_examples() {
        assert!(!commutes(&p("XI"), &p("ZI")).unwrap());
        assert!(commutes(&p("XX"), &p("ZZ")).unwrap());
        for n in 1..8 {
            let z0 = PauliString::single(n, 0, Pauli::Z).unwrap();
            let xs = PauliString::uniform(n, Pauli::X);
            assert!(!commutes(&z0, &xs).unwrap());
        }
    }

    #[test]
    fn conjugation_examples() {
        let c = conjugate(&p("Z"), &p("X")).unwrap();
        assert_eq!(c, p("-Z"));
        assert_eq!(conjugate(&p("Z"), &p("Z")).unwrap(), p("Z"));
        assert_eq!(conjugate(&p("YX"), &p("ZI")).unwrap(), p("-YX"));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            commutes(&p("XX"), &p("X")),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(conjugate(&p("XXX"), &p("ZZ")).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["IXZI", "-ZZ", "Y", "-IIY"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("".parse::<PauliString>().is_err());
        assert!("XA".parse::<PauliString>().is_err());
        assert!("-".parse::<PauliString>().is_err());
    }

    #[test]
    fn masks_put_site_zero_on_the_high_bit() {
        let (x, z, y) = p("XIZY").masks();
        assert_eq!(x, 0b1001);
        assert_eq!(z, 0b0011);
        assert_eq!(y, 1);
    }
}
