//! Circuits: Clifford gates plus T markers, measurements and classically
//! controlled Paulis, with a line-oriented text format.
//!
//! ```text
//! QUBITS 2
//! H 0
//! CNOT 0 1
//! T 1
//! M 1 -> c0
//! CPAULI c0 X 0
//! ```
//! `QUBITS` is optional on input; without it the width is the largest index + 1.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::clifford::{CliffordOp, Gate};
use crate::error::{QheError, Result};
use crate::pauli::Pauli;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Gate(Gate),
    T(usize),
    Measure { qubit: usize, bit: String },
    CPauli { bit: String, pauli: Pauli, qubit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, elements: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(Element::Gate(*g))?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn push(&mut self, e: Element) -> Result<()> {
        self.validate_element(&e)?;
        self.elements.push(e);
        Ok(())
    }

    fn validate_element(&self, e: &Element) -> Result<()> {
        let n = self.n;
        let in_range = |q: usize| if q < n { Ok(()) } else { Err(QheError::QubitOutOfRange { index: q, n }) };
        match e {
            Element::Gate(g) => g.check(n),
            Element::T(q) => in_range(*q),
            Element::Measure { qubit, bit } => {
                in_range(*qubit)?;
                if self.measured_bits().contains(bit.as_str()) {
                    return Err(QheError::InvalidArgument(format!("classical bit '{bit}' measured twice")));
                }
                Ok(())
            }
            Element::CPauli { bit, qubit, .. } => {
                in_range(*qubit)?;
                if !self.measured_bits().contains(bit.as_str()) {
                    return Err(QheError::InvalidArgument(format!("classical bit '{bit}' used before measurement")));
                }
                Ok(())
            }
        }
    }

    fn measured_bits(&self) -> HashSet<&str> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Measure { bit, .. } => Some(bit.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn t_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::T(_))).count()
    }

    pub fn is_clifford(&self) -> bool {
        self.elements.iter().all(|e| matches!(e, Element::Gate(_)))
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Gate(g) => Some(*g),
                _ => None,
            })
            .collect()
    }

    /// The circuit as one Clifford; fails on any non-gate element.
    pub fn to_clifford(&self) -> Result<CliffordOp> {
        if let Some(e) = self.elements.iter().find(|e| !matches!(e, Element::Gate(_))) {
            return Err(QheError::NonClifford(format!("{e:?}")));
        }
        CliffordOp::from_gates(self.n, &self.gates())
    }

    /// Random circuit of `depth` layers over the elementary gate set.
    pub fn random_clifford<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> Circuit {
        let mut c = Circuit::new(n);
        for _ in 0..depth {
            let kind = if n >= 2 { rng.gen_range(0..8) } else { rng.gen_range(0..5) };
            let q = rng.gen_range(0..n);
            let g = match kind {
                0 => Gate::H(q),
                1 => Gate::S(q),
                2 => Gate::X(q),
                3 => Gate::Y(q),
                4 => Gate::Z(q),
                _ => {
                    let mut r = rng.gen_range(0..n - 1);
                    if r >= q {
                        r += 1;
                    }
                    match kind {
                        5 => Gate::Cnot(q, r),
                        6 => Gate::Cz(q, r),
                        _ => Gate::Swap(q, r),
                    }
                }
            };
            c.elements.push(Element::Gate(g));
        }
        c
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n)?;
        for e in &self.elements {
            match e {
                Element::Gate(g) => writeln!(f, "{g}")?,
                Element::T(q) => writeln!(f, "T {q}")?,
                Element::Measure { qubit, bit } => writeln!(f, "M {qubit} -> {bit}")?,
                Element::CPauli { bit, pauli, qubit } => writeln!(f, "CPAULI {bit} {} {qubit}", pauli.letter())?,
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> QheError {
    QheError::Parse { line, msg: msg.into() }
}

fn parse_qubit(tok: Option<&str>, line: usize) -> Result<usize> {
    let t = tok.ok_or_else(|| parse_err(line, "missing qubit index"))?;
    t.parse().map_err(|_| parse_err(line, format!("bad qubit index '{t}'")))
}

fn valid_label(b: &str) -> bool {
    !b.is_empty() && b.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for Circuit {
    type Err = QheError;

    fn from_str(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut elems: Vec<(usize, Element)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let mut it = toks.iter().copied();
            let head = it.next().unwrap_or_default().to_ascii_uppercase();
            let one = |it: &mut dyn Iterator<Item = &str>| parse_qubit(it.next(), ln);
            let e = match head.as_str() {
                "QUBITS" => {
                    if declared.is_some() || !elems.is_empty() {
                        return Err(parse_err(ln, "QUBITS must come first and only once"));
                    }
                    let n = parse_qubit(it.next(), ln)?;
                    if n == 0 {
                        return Err(parse_err(ln, "QUBITS must be positive"));
                    }
                    declared = Some(n);
                    if it.next().is_some() {
                        return Err(parse_err(ln, "trailing tokens"));
                    }
                    continue;
                }
                "H" => Element::Gate(Gate::H(one(&mut it)?)),
                "S" => Element::Gate(Gate::S(one(&mut it)?)),
                "X" => Element::Gate(Gate::X(one(&mut it)?)),
                "Y" => Element::Gate(Gate::Y(one(&mut it)?)),
                "Z" => Element::Gate(Gate::Z(one(&mut it)?)),
                "T" => Element::T(one(&mut it)?),
                "CNOT" | "CX" => Element::Gate(Gate::Cnot(one(&mut it)?, one(&mut it)?)),
                "CZ" => Element::Gate(Gate::Cz(one(&mut it)?, one(&mut it)?)),
                "SWAP" => Element::Gate(Gate::Swap(one(&mut it)?, one(&mut it)?)),
                "M" => {
                    let q = one(&mut it)?;
                    if it.next() != Some("->") {
                        return Err(parse_err(ln, "expected 'M q -> bit'"));
                    }
                    let bit = it.next().ok_or_else(|| parse_err(ln, "missing bit label"))?;
                    if !valid_label(bit) {
                        return Err(parse_err(ln, format!("bad bit label '{bit}'")));
                    }
                    Element::Measure { qubit: q, bit: bit.to_string() }
                }
                "CPAULI" => {
                    let bit = it.next().ok_or_else(|| parse_err(ln, "missing bit label"))?;
                    let p = match it.next() {
                        Some("X") => Pauli::X,
                        Some("Y") => Pauli::Y,
                        Some("Z") => Pauli::Z,
                        other => return Err(parse_err(ln, format!("bad Pauli {other:?}"))),
                    };
                    let q = one(&mut it)?;
                    Element::CPauli { bit: bit.to_string(), pauli: p, qubit: q }
                }
                other => return Err(parse_err(ln, format!("unknown gate '{other}'"))),
            };
            if it.next().is_some() {
                return Err(parse_err(ln, "trailing tokens"));
            }
            elems.push((ln, e));
        }
        let max_q = elems
            .iter()
            .flat_map(|(_, e)| match e {
                Element::Gate(g) => g.qubits(),
                Element::T(q) | Element::Measure { qubit: q, .. } | Element::CPauli { qubit: q, .. } => vec![*q],
            })
            .max();
        let n = match declared {
            Some(n) => n,
            None => max_q.map(|q| q + 1).ok_or_else(|| parse_err(0, "empty circuit without QUBITS"))?,
        };
        let mut c = Circuit::new(n);
        for (ln, e) in elems {
            c.push(e).map_err(|err| parse_err(ln, err.to_string()))?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_text() {
        let text = "QUBITS 3\nH 0\nCNOT 0 1\nT 2\nM 2 -> b0\nCPAULI b0 Z 1\nSWAP 1 2\n";
        let c: Circuit = text.parse().unwrap();
        assert_eq!(c.to_string(), text);
        assert_eq!(c.t_count(), 1);
    }

    #[test]
    fn width_inferred_and_comments_skipped() {
        let c: Circuit = "# bell\nH 0  # first\nCNOT 0 1\n".parse().unwrap();
        assert_eq!(c.n_qubits(), 2);
        assert!(c.is_clifford());
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = "H 0\nFOO 1\n".parse::<Circuit>().unwrap_err();
        assert!(matches!(err, QheError::Parse { line: 2, .. }));
        let err = "M 0 -> a\nM 0 -> a\n".parse::<Circuit>().unwrap_err();
        assert!(matches!(err, QheError::Parse { line: 2, .. }));
        assert!("CPAULI a X 0\n".parse::<Circuit>().is_err());
        assert!("QUBITS 1\nCNOT 0 1\n".parse::<Circuit>().is_err());
    }
}
