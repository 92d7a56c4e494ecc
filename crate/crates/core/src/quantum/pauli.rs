use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

use super::qubit_bit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::Format(format!("bad Pauli letter {c:?}"))),
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A real multiple of a tensor product of Pauli operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coefficient: f64,
    pub letters: Vec<Pauli>,
}

/// Bit masks of a Pauli word: the operator equals `i^y_count X^x Z^z` (X to the left of Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PauliMasks {
    pub x: u64,
    pub z: u64,
    pub y_count: u32,
}

impl PauliString {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Self {
        Self {
            coefficient,
            letters,
        }
    }

    pub fn parse(coefficient: f64, word: &str) -> Result<Self> {
        let letters = word.chars().map(Pauli::from_char).collect::<Result<_>>()?;
        Ok(Self::new(coefficient, letters))
    }

    /// `coefficient` times the identity on `n` qubits.
    pub fn identity(coefficient: f64, n: usize) -> Self {
        Self::new(coefficient, vec![Pauli::I; n])
    }

    /// Places `letters` at the given qubits, identity elsewhere.
    pub fn local(coefficient: f64, n: usize, letters: &[(usize, Pauli)]) -> Self {
        let mut word = vec![Pauli::I; n];
        for &(q, p) in letters {
            word[q] = p;
        }
        Self::new(coefficient, word)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn word(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    pub(crate) fn masks(&self) -> PauliMasks {
        let n = self.n();
        let mut m = PauliMasks {
            x: 0,
            z: 0,
            y_count: 0,
        };
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1u64 << qubit_bit(q, n);
            match p {
                Pauli::I => {}
                Pauli::X => m.x |= bit,
                Pauli::Z => m.z |= bit,
                Pauli::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.y_count += 1;
                }
            }
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.coefficient, self.word())
    }
}

/// A local measurement basis: one of X, Y, Z per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliBasis {
    letters: Vec<Pauli>,
}

impl PauliBasis {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Empty("Pauli basis"));
        }
        if letters.contains(&Pauli::I) {
            return Err(Error::Format("measurement basis cannot contain I".into()));
        }
        Ok(Self { letters })
    }

    pub fn all_z(n: usize) -> Self {
        Self {
            letters: vec![Pauli::Z; n],
        }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Qubits measured in X or Y.
    pub fn non_z(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&q| self.letters[q] != Pauli::Z)
            .collect()
    }

    pub fn word(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }
}

impl FromStr for PauliBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.chars().map(Pauli::from_char).collect::<Result<_>>()?)
    }
}

impl fmt::Display for PauliBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}
