//! Replayable record of one protocol run.
//!
//! The transcript is the experimenter's complete view: every event in
//! broadcast order, every security-test row with its basis and outcomes, and
//! the classical artifacts of each step. Events model the public channel —
//! note that committed votes appear as payload-free markers and the updated
//! ballot columns become visible only at the broadcast release event.

use serde::{Deserialize, Serialize};

use crate::adversary::AttackSpec;
use crate::qstate::Basis;

use super::{ProtocolConfig, Tally};

/// One tested row: which copy, which basis, what every voter announced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub checker: usize,
    pub row: usize,
    pub basis: Basis,
    pub outcomes: Vec<u8>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    StatesDistributed {
        step: u8,
        rows: usize,
    },
    SecurityTestRound {
        step: u8,
        checker: usize,
        rows: Vec<usize>,
        pass: bool,
    },
    BallotsGenerated,
    BallotsInjected,
    IndicesGenerated,
    IndicesInjected,
    /// A voter committed an updated column to the synchronizer. No payload:
    /// nothing about the column is public before release.
    VoteCommitted {
        voter: usize,
    },
    BroadcastReleased,
    TallyComputed,
    VerificationChecked {
        voter: usize,
        pass: bool,
    },
    Aborted {
        reason: AbortReason,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    SecurityTestFailed { step: u8, checker: usize, row: usize },
    BroadcastTimeout { missing: Vec<usize> },
    VerificationFailed { voters: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    Aborted { reason: AbortReason },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub config: ProtocolConfig,
    pub attack: Option<AttackSpec>,
    /// Votes the experimenter asked each voter to cast (private inputs).
    pub votes_in: Vec<u8>,
    pub events: Vec<Event>,
    pub chi_tests: Vec<TestRecord>,
    pub singlet_tests: Vec<TestRecord>,
    /// Ballot matrix, row = box, column = voter.
    pub ballots: Option<Vec<Vec<u8>>>,
    pub indices: Option<Vec<usize>>,
    /// Published matrix of updated ballot columns, row = box, column = voter.
    pub vote_matrix: Option<Vec<Vec<u8>>>,
    pub tally: Option<Tally>,
    pub verifications: Option<Vec<bool>>,
    pub outcome: RunOutcome,
}

impl Transcript {
    pub(super) fn new(
        config: &ProtocolConfig,
        votes: &[u8],
        attack: Option<&AttackSpec>,
    ) -> Self {
        Self {
            schema_version: 1,
            config: config.clone(),
            attack: attack.cloned(),
            votes_in: votes.to_vec(),
            events: Vec::new(),
            chi_tests: Vec::new(),
            singlet_tests: Vec::new(),
            ballots: None,
            indices: None,
            vote_matrix: None,
            tally: None,
            verifications: None,
            outcome: RunOutcome::Completed,
        }
    }

    pub(super) fn abort(&mut self, reason: AbortReason) {
        self.events.push(Event::Aborted {
            reason: reason.clone(),
        });
        self.outcome = RunOutcome::Aborted { reason };
    }

    pub fn completed(&self) -> bool {
        matches!(self.outcome, RunOutcome::Completed)
    }

    /// Position of the broadcast release in the event sequence, if reached.
    pub fn release_position(&self) -> Option<usize> {
        self.events
            .iter()
            .position(|e| matches!(e, Event::BroadcastReleased))
    }
}
