//! Append-only log of everything exchanged between client and server.
//!
//! JSON-lines, one message per line:
//! `{"sender":"server","kind":"classical_bits","slot":"t0.magic","bits":"0110","qubits":0}`

use serde::{Deserialize, Serialize};

use crate::error::{QheError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Client,
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    QuantumHandoff,
    ClassicalBits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: Role,
    pub kind: MessageKind,
    /// Protocol position of the message, stable across runs of the same protocol.
    pub slot: String,
    /// Classical payload as a 0/1 string; empty for quantum hand-offs.
    pub bits: String,
    /// Qubits transferred; 0 for classical messages.
    pub qubits: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn handoff(&mut self, sender: Role, slot: impl Into<String>, qubits: usize) {
        self.messages.push(Message {
            sender,
            kind: MessageKind::QuantumHandoff,
            slot: slot.into(),
            bits: String::new(),
            qubits,
        });
    }

    pub fn classical(&mut self, sender: Role, slot: impl Into<String>, bits: &[bool]) {
        self.messages.push(Message {
            sender,
            kind: MessageKind::ClassicalBits,
            slot: slot.into(),
            bits: bits_to_string(bits),
            qubits: 0,
        });
    }

    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }

    pub fn classical_messages(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(|m| m.kind == MessageKind::ClassicalBits)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("plain data"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut messages = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let m: Message =
                serde_json::from_str(line).map_err(|e| QheError::Parse { line: i + 1, msg: e.to_string() })?;
            messages.push(m);
        }
        Ok(Transcript { messages })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_roundtrip() {
        let mut t = Transcript::new();
        t.handoff(Role::Client, "data", 2);
        t.classical(Role::Server, "t0.magic", &[true, false]);
        let back = Transcript::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.count(MessageKind::ClassicalBits), 1);
        assert!(t.to_jsonl().contains("\"bits\":\"10\""));
    }
}
