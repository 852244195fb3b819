//! Empirical leakage audit: compares what the server sees across plaintexts.
//!
//! A view is either one classical slot or the joint value of two slots whose
//! payloads together fit in [`JOINT_WIDTH`] bits. Pairs catch leaks that are
//! invisible in every marginal, such as a key and a padded bit sent apart.
//!
//! Empirical TV between two finite samples of the same distribution is not
//! zero: with `10³` sessions an 8-outcome view sits near 0.05 by chance. Each
//! view therefore also carries its null floor, the expected empirical TV if
//! both groups were drawn from the pooled distribution, and leakage is the
//! excess over that floor.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::session::{run_session, SessionScheme};
use super::transcript::Transcript;
use crate::circuit::Circuit;
use crate::error::{QheError, Result};
use crate::sim::StateVector;

pub const MIN_AUDIT_SAMPLES: usize = 1000;
pub const JOINT_WIDTH: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct ViewLeak {
    pub view: String,
    /// Largest empirical TV distance between any two plaintext groups.
    pub tv: f64,
    /// Expected empirical TV for that pair under identical distributions.
    pub null_tv: f64,
    /// `max(0, tv − null_tv)`.
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeakageReport {
    pub sessions_per_group: usize,
    pub views: Vec<ViewLeak>,
    /// Largest excess over the null floor.
    pub max_tv: f64,
}

impl LeakageReport {
    pub fn worst(&self) -> Option<&ViewLeak> {
        self.views.iter().max_by(|a, b| a.excess.total_cmp(&b.excess))
    }

    pub fn flagged(&self, threshold: f64) -> bool {
        self.max_tv >= threshold
    }
}

/// Total-variation distance between two empirical distributions.
pub fn tv_distance(a: &HashMap<String, usize>, b: &HashMap<String, usize>) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
        / 2.0
}

/// `½ Σ E|p̂_k − q̂_k|` for samples of sizes `na`, `nb` from the pooled
/// distribution, each difference taken as normal.
pub fn null_tv(a: &HashMap<String, usize>, b: &HashMap<String, usize>) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let total = (na + nb) as f64;
    let scale = 1.0 / na as f64 + 1.0 / nb as f64;
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| {
            let p = (*a.get(k).unwrap_or(&0) + *b.get(k).unwrap_or(&0)) as f64 / total;
            (2.0 / std::f64::consts::PI * p * (1.0 - p) * scale).sqrt()
        })
        .sum::<f64>()
        / 2.0
}

fn slot_values(t: &Transcript) -> BTreeMap<&str, &str> {
    let mut out = BTreeMap::new();
    for m in t.classical_messages() {
        out.insert(m.slot.as_str(), m.bits.as_str());
    }
    out
}

/// One transcript list per plaintext. Each list needs at least
/// [`MIN_AUDIT_SAMPLES`] sessions.
pub fn audit_transcripts(groups: &[Vec<Transcript>]) -> Result<LeakageReport> {
    if groups.len() < 2 {
        return Err(QheError::InvalidArgument("audit needs at least two plaintexts".into()));
    }
    let need = MIN_AUDIT_SAMPLES;
    let got = groups.iter().map(Vec::len).min().unwrap_or(0);
    if got < need {
        return Err(QheError::InsufficientSamples { got, need });
    }

    let mut width: BTreeMap<String, usize> = BTreeMap::new();
    for t in groups.iter().flatten() {
        for m in t.classical_messages() {
            let w = width.entry(m.slot.clone()).or_default();
            *w = (*w).max(m.bits.len());
        }
    }
    let slots: Vec<&String> = width.keys().collect();
    let mut views: Vec<Vec<&String>> = slots.iter().map(|s| vec![*s]).collect();
    for (i, a) in slots.iter().enumerate() {
        for b in &slots[i + 1..] {
            if width[*a] + width[*b] <= JOINT_WIDTH {
                views.push(vec![*a, *b]);
            }
        }
    }

    let histograms: Vec<Vec<HashMap<String, usize>>> = groups
        .iter()
        .map(|g| {
            let mut hs = vec![HashMap::new(); views.len()];
            for t in g {
                let vals = slot_values(t);
                for (h, view) in hs.iter_mut().zip(&views) {
                    let key = view.iter().map(|s| vals.get(s.as_str()).copied().unwrap_or("∅")).collect::<Vec<_>>().join("|");
                    *h.entry(key).or_insert(0) += 1;
                }
            }
            hs
        })
        .collect();

    let mut leaks = Vec::with_capacity(views.len());
    for (v, view) in views.iter().enumerate() {
        let name = view.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("+");
        let mut worst = ViewLeak { view: name, tv: 0.0, null_tv: 0.0, excess: 0.0 };
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let tv = tv_distance(&histograms[i][v], &histograms[j][v]);
                let null = null_tv(&histograms[i][v], &histograms[j][v]);
                let excess = (tv - null).max(0.0);
                if excess >= worst.excess {
                    worst = ViewLeak { tv, null_tv: null, excess, ..worst };
                }
            }
        }
        leaks.push(worst);
    }
    let max_tv = leaks.iter().map(|l| l.excess).fold(0.0, f64::max);
    Ok(LeakageReport { sessions_per_group: got, views: leaks, max_tv })
}

/// Runs `samples` seeded sessions per plaintext and audits them. Every
/// plaintext gets its own seed stream.
pub fn audit_scheme(
    scheme: SessionScheme,
    circuit: &Circuit,
    plaintexts: &[StateVector],
    samples: usize,
    seed: u64,
) -> Result<LeakageReport> {
    if samples < MIN_AUDIT_SAMPLES {
        return Err(QheError::InsufficientSamples { got: samples, need: MIN_AUDIT_SAMPLES });
    }
    let groups = plaintexts
        .iter()
        .enumerate()
        .map(|(g, p)| {
            (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((g as u64) << 32) | i as u64);
                    run_session(scheme, p, circuit, &mut rng).map(|r| r.transcript)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    audit_transcripts(&groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_of_disjoint_and_equal() {
        let a: HashMap<String, usize> = [("0".to_string(), 5)].into();
        let b: HashMap<String, usize> = [("1".to_string(), 3)].into();
        assert_eq!(tv_distance(&a, &b), 1.0);
        assert_eq!(tv_distance(&a, &a), 0.0);
    }

    #[test]
    fn null_floor_of_fair_coin() {
        // two outcomes, each |p̂−q̂| with p̂−q̂ ≈ N(0, ¼·2/1000)
        let h: HashMap<String, usize> = [("0".to_string(), 500), ("1".to_string(), 500)].into();
        let want = (2.0 / std::f64::consts::PI * 0.25 * 2.0 / 1000.0).sqrt();
        assert!((null_tv(&h, &h) - want).abs() < 1e-12);
    }

    #[test]
    fn too_few_sessions() {
        let g = vec![vec![Transcript::new(); 10], vec![Transcript::new(); 10]];
        assert!(matches!(audit_transcripts(&g), Err(QheError::InsufficientSamples { got: 10, need: 1000 })));
    }
}
