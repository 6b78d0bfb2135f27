//! Anonymous multi-party computation: the voting machinery generalized to
//! parties holding several inputs each.
//!
//! With n̄ total input slots, step 1 distributes n̄-particle zero-sum states
//! (n̄ ballot rows after tests), step 2 distributes the n̄-level singlet so
//! each party learns one secret box index per owned slot, and step 3
//! publishes everything through the synchronizer. What comes out is the
//! multiset of all inputs in an order fixed by the hidden permutation —
//! anonymous broadcast is the one-slot special case, and ranking is a sort
//! of the revealed sequence.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    cast_vote, tally, verify_own_vote, BallotMatrix, IndexArray, ParticleMatrix, StepKind,
    SimultaneousBroadcast,
};
use crate::qstate::SparseState;
use crate::rng::SeededRng;

/// Exact-mode cap on total input slots: the n̄-level singlet carries n̄!
/// terms, so anything larger must run with ideal classical resources.
pub const EXACT_SLOT_CAP: usize = 7;

const STREAM_AMC_BALLOT_TEST: u32 = 21;
const STREAM_AMC_BALLOTS: u32 = 22;
const STREAM_AMC_INDEX_TEST: u32 = 23;
const STREAM_AMC_INDICES: u32 = 24;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmcInputs {
    pub parties: usize,
    /// Inputs held by each party; slot counts, not values.
    pub input_counts: Vec<usize>,
    /// `values[k]` are party k's inputs, each in `Z_m`.
    pub values: Vec<Vec<u8>>,
    /// Value alphabet size.
    pub m: usize,
}

impl AmcInputs {
    /// Every party one value; the plain voting shape.
    pub fn single_per_party(values: &[u8], m: usize) -> Self {
        Self {
            parties: values.len(),
            input_counts: vec![1; values.len()],
            values: values.iter().map(|&v| vec![v]).collect(),
            m,
        }
    }

    pub fn total_slots(&self) -> usize {
        self.input_counts.iter().sum()
    }

    /// First slot index owned by party k.
    pub fn slot_offset(&self, party: usize) -> usize {
        self.input_counts[..party].iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.parties == 0
            || self.input_counts.len() != self.parties
            || self.values.len() != self.parties
        {
            return Err(Error::Validation(
                "input_counts and values must list every party".into(),
            ));
        }
        if self.input_counts.iter().any(|&c| c == 0) {
            return Err(Error::Validation(
                "every party must hold at least one input".into(),
            ));
        }
        for (k, vals) in self.values.iter().enumerate() {
            if vals.len() != self.input_counts[k] {
                return Err(Error::Validation(format!(
                    "party {k} declares {} inputs but provides {}",
                    self.input_counts[k],
                    vals.len()
                )));
            }
            if let Some(&v) = vals.iter().find(|&&v| (v as usize) >= self.m) {
                return Err(Error::Validation(format!(
                    "party {k} input {v} outside Z_{}",
                    self.m
                )));
            }
        }
        if self.total_slots() < 2 {
            return Err(Error::Validation(
                "need at least 2 input slots in total".into(),
            ));
        }
        if self.m < 2 || self.m > 256 {
            return Err(Error::Validation(format!(
                "need 2 ≤ m ≤ 256, got {}",
                self.m
            )));
        }
        Ok(())
    }

    fn flat_values(&self) -> Vec<u8> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Resource mode: full quantum simulation, or classically sampled stand-ins
/// with the same distributions. The ideal mode skips the security tests the
/// protocol's guarantees rest on; it exists to scale past the exact cap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmcMode {
    #[default]
    Exact,
    IdealResource,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmcConfig {
    pub delta2: usize,
    pub delta3: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: AmcMode,
}

impl AmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta2 < 1 || self.delta3 < 1 {
            return Err(Error::Validation(format!(
                "security strengths must be ≥ 1, got delta2={}, delta3={}",
                self.delta2, self.delta3
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AmcOutcome {
    pub mode: AmcMode,
    /// Revealed per-box sums: a permutation of all inputs.
    pub anonymized: Vec<u8>,
    /// Per-party verification: every owned slot landed correctly.
    pub verifications: Vec<bool>,
    /// Secret slot indices, experimenter view (party k owns a contiguous
    /// block of slots in party order).
    pub indices: Vec<usize>,
}

/// The generalized protocol end to end.
pub fn run_amc(inputs: &AmcInputs, config: &AmcConfig) -> Result<AmcOutcome> {
    inputs.validate()?;
    config.validate()?;
    let slots = inputs.total_slots();
    let master = SeededRng::new(config.seed);

    let (ballots, indices) = match config.mode {
        AmcMode::Exact => {
            if slots > EXACT_SLOT_CAP {
                return Err(Error::ResourceBudget {
                    what: format!(
                        "exact simulation of {slots} input slots (the {slots}-level singlet \
                         has {slots}! terms); switch mode to ideal_resource"
                    ),
                    required: (1..=slots).product(),
                    budget: (1..=EXACT_SLOT_CAP).product(),
                });
            }
            quantum_artifacts(inputs, config, &master)?
        }
        AmcMode::IdealResource => ideal_artifacts(inputs, &master),
    };

    // Step 3: everyone adds each input to its assigned box and publishes.
    let values = inputs.flat_values();
    let mut broadcast = SimultaneousBroadcast::new(slots, slots, inputs.m);
    for slot in 0..slots {
        let column = cast_vote(
            &ballots.column(slot),
            indices.0[slot],
            values[slot],
            inputs.m,
        )?;
        broadcast.submit(slot, column)?;
    }
    let matrix = broadcast.release()?;
    let result = tally(&matrix);

    let verifications = (0..inputs.parties)
        .map(|party| {
            let offset = inputs.slot_offset(party);
            (0..inputs.input_counts[party]).all(|i| {
                verify_own_vote(&result, indices.0[offset + i], inputs.values[party][i])
            })
        })
        .collect();

    Ok(AmcOutcome {
        mode: config.mode,
        anonymized: result.box_sums,
        verifications,
        indices: indices.0,
    })
}

fn quantum_artifacts(
    inputs: &AmcInputs,
    config: &AmcConfig,
    master: &SeededRng,
) -> Result<(BallotMatrix, IndexArray)> {
    let slots = inputs.total_slots();

    let chi = SparseState::chi(slots, inputs.m)?;
    let rows = slots + inputs.parties * config.delta2;
    let mut ballot_matrix = ParticleMatrix::with_copies(StepKind::BallotDistribution, &chi, rows)?;
    for checker in 0..inputs.parties {
        let mut rng = master.derive2(STREAM_AMC_BALLOT_TEST, checker as u32);
        let round = ballot_matrix.security_test_round(checker, config.delta2, &mut rng)?;
        if !round.pass {
            return Err(Error::Validation(
                "security test failed on an untampered run".into(),
            ));
        }
    }
    let mut rng = master.derive2(STREAM_AMC_BALLOTS, 0);
    let ballots = ballot_matrix.generate_ballots(&mut rng)?;

    let singlet = SparseState::singlet(slots)?;
    let rows = 1 + inputs.parties * config.delta3;
    let mut index_matrix = ParticleMatrix::with_copies(StepKind::IndexDistribution, &singlet, rows)?;
    for checker in 0..inputs.parties {
        let mut rng = master.derive2(STREAM_AMC_INDEX_TEST, checker as u32);
        let round = index_matrix.security_test_round(checker, config.delta3, &mut rng)?;
        if !round.pass {
            return Err(Error::Validation(
                "security test failed on an untampered run".into(),
            ));
        }
    }
    let mut rng = master.derive2(STREAM_AMC_INDICES, 0);
    let indices = index_matrix.generate_indices(&mut rng)?;
    Ok((ballots, indices))
}

/// Classically sampled stand-ins with the exact measurement distributions:
/// uniform zero-sum rows and a uniform slot permutation.
fn ideal_artifacts(inputs: &AmcInputs, master: &SeededRng) -> (BallotMatrix, IndexArray) {
    let slots = inputs.total_slots();
    let mut rng = master.derive2(STREAM_AMC_BALLOTS, 1);
    let rows: Vec<Vec<u8>> = (0..slots)
        .map(|_| {
            let mut row: Vec<u8> = (0..slots - 1)
                .map(|_| rng.below(inputs.m) as u8)
                .collect();
            let sum: usize = row.iter().map(|&v| v as usize).sum();
            row.push(((inputs.m - sum % inputs.m) % inputs.m) as u8);
            row
        })
        .collect();
    let ballots = BallotMatrix::new(rows, inputs.m).expect("sampled rows are square and in range");
    let mut index_rng = master.derive2(STREAM_AMC_INDICES, 1);
    let mut indices: Vec<usize> = (0..slots).collect();
    indices.shuffle(&mut index_rng);
    (ballots, IndexArray(indices))
}

/// One-slot special case: publishing a message is casting a vote for it, and
/// the top alphabet symbol `m−1` is reserved for abstention.
pub fn anonymous_broadcast(
    messages: &[Option<u8>],
    m: usize,
    config: &AmcConfig,
) -> Result<Vec<u8>> {
    if m < 2 {
        return Err(Error::Validation(format!("need m ≥ 2, got {m}")));
    }
    let abstain = (m - 1) as u8;
    let values: Vec<u8> = messages
        .iter()
        .enumerate()
        .map(|(k, msg)| match msg {
            Some(v) if *v >= abstain => Err(Error::Validation(format!(
                "party {k} message {v} collides with the reserved abstain symbol {abstain}"
            ))),
            Some(v) => Ok(*v),
            None => Ok(abstain),
        })
        .collect::<Result<_>>()?;
    let inputs = AmcInputs::single_per_party(&values, m);
    Ok(run_amc(&inputs, config)?.anonymized)
}

/// Anonymize, then self-rank: the revealed multiset sorted descending
/// (stable, so equal values keep their revealed order).
pub fn anonymous_ranking(inputs: &AmcInputs, config: &AmcConfig) -> Result<Vec<u8>> {
    let mut revealed = run_amc(inputs, config)?.anonymized;
    revealed.sort_by(|a, b| b.cmp(a));
    Ok(revealed)
}
