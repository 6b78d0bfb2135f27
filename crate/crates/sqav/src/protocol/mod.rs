//! The three-step voting state machine.
//!
//! Step 1 distributes copies of the zero-sum state and turns the surviving
//! copies into secret ballot numbers; step 2 distributes singlet copies and
//! turns the surviving copy into secret box indices; step 3 adds votes,
//! publishes all columns through the simultaneous broadcast, and lets every
//! party tally and verify on their own. Each voter in turn acts as checker
//! and sacrifices `delta` rows per security test; an untampered run passes
//! every test with certainty, so any test failure aborts the run.

mod broadcast;
mod transcript;

pub use broadcast::SimultaneousBroadcast;
pub use transcript::{AbortReason, Event, RunOutcome, TestRecord, Transcript};

use serde::{Deserialize, Serialize};

use crate::adversary::AttackSpec;
use crate::error::{Error, Result};
use crate::qstate::{Basis, SparseState};
use crate::rng::SeededRng;

// Derived-stream labels; one phase tag per protocol activity keeps runs
// replayable no matter how callers interleave their own rng use.
const STREAM_CHI_TEST: u32 = 1;
const STREAM_BALLOTS: u32 = 2;
const STREAM_SINGLET_TEST: u32 = 3;
const STREAM_INDICES: u32 = 4;
const STREAM_ATTACK: u32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Voter count.
    pub n: usize,
    /// Candidate count.
    pub m: usize,
    /// Security strength of the ballot-state tests (rows sacrificed per checker).
    pub delta0: usize,
    /// Security strength of the index-state tests.
    pub delta1: usize,
    pub seed: u64,
    /// Who prepares and sends the states in both steps.
    #[serde(default)]
    pub distributor: usize,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 voters, got {}",
                self.n
            )));
        }
        if self.m < 2 || self.m > 256 {
            return Err(Error::Validation(format!(
                "need 2 ≤ m ≤ 256 candidates, got {}",
                self.m
            )));
        }
        if self.delta0 < 1 || self.delta1 < 1 {
            return Err(Error::Validation(format!(
                "security strengths must be ≥ 1, got delta0={}, delta1={}",
                self.delta0, self.delta1
            )));
        }
        if self.distributor >= self.n {
            return Err(Error::Validation(format!(
                "distributor {} is not a voter",
                self.distributor
            )));
        }
        Ok(())
    }
}

/// Which step's verdict rule a particle matrix obeys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    /// Zero-sum copies: computational rows must sum to 0 mod m, Fourier rows
    /// must be all-equal.
    BallotDistribution,
    /// Singlet copies: rows must be permutations in either basis.
    IndexDistribution,
}

struct MatrixRow {
    state: SparseState,
    consumed: bool,
}

/// Shared copies in flight: row j is one entangled copy, column k is the
/// particle held by voter k.
pub struct ParticleMatrix {
    kind: StepKind,
    n: usize,
    m: usize,
    rows: Vec<MatrixRow>,
}

/// One checker's test round: per-row records plus the overall verdict.
pub struct TestRound {
    pub records: Vec<TestRecord>,
    pub pass: bool,
}

impl ParticleMatrix {
    /// Step 1 distribution: `n + n·delta0` zero-sum copies.
    pub fn distribute_chi(config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let rows = config.n + config.n * config.delta0;
        let template = SparseState::chi(config.n, config.m)?;
        Ok(Self {
            kind: StepKind::BallotDistribution,
            n: config.n,
            m: config.m,
            rows: (0..rows)
                .map(|_| MatrixRow {
                    state: template.clone(),
                    consumed: false,
                })
                .collect(),
        })
    }

    /// Step 2 distribution: `1 + n·delta1` singlet copies.
    pub fn distribute_singlet(config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let rows = 1 + config.n * config.delta1;
        let template = SparseState::singlet(config.n)?;
        Ok(Self {
            kind: StepKind::IndexDistribution,
            n: config.n,
            m: config.n,
            rows: (0..rows)
                .map(|_| MatrixRow {
                    state: template.clone(),
                    consumed: false,
                })
                .collect(),
        })
    }

    /// Arbitrary copy count of a caller-built template; the generalized
    /// multi-party protocol distributes states whose particle count exceeds
    /// the checker count.
    pub fn with_copies(kind: StepKind, template: &SparseState, rows: usize) -> Result<Self> {
        let min = match kind {
            StepKind::BallotDistribution => template.particles(),
            StepKind::IndexDistribution => 1,
        };
        if rows < min + 1 {
            return Err(Error::Validation(format!(
                "{rows} copies leave no room for tests (need at least {})",
                min + 1
            )));
        }
        Ok(Self {
            kind,
            n: template.particles(),
            m: template.levels(),
            rows: (0..rows)
                .map(|_| MatrixRow {
                    state: template.clone(),
                    consumed: false,
                })
                .collect(),
        })
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    pub fn voters(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.m
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn untested_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.consumed)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn row_state(&self, row: usize) -> &SparseState {
        &self.rows[row].state
    }

    /// Swap in a tampered copy; the adversary's entry point.
    pub fn replace_row(&mut self, row: usize, state: SparseState) -> Result<()> {
        if row >= self.rows.len() {
            return Err(Error::Validation(format!(
                "row {row} out of range for {} rows",
                self.rows.len()
            )));
        }
        if state.particles() != self.n || state.levels() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "replacement state is ({}, {}), matrix rows are ({}, {})",
                state.particles(),
                state.levels(),
                self.n,
                self.m
            )));
        }
        self.rows[row].state = state;
        Ok(())
    }

    /// Mutate one row in place (interception-style disturbance).
    pub fn disturb_row(
        &mut self,
        row: usize,
        f: impl FnOnce(&SparseState) -> Result<SparseState>,
    ) -> Result<()> {
        let state = f(&self.rows[row].state)?;
        self.replace_row(row, state)
    }

    fn verdict(&self, basis: Basis, outcomes: &crate::qstate::BasisTuple) -> bool {
        match (self.kind, basis) {
            (StepKind::BallotDistribution, Basis::Computational) => outcomes.sum_mod(self.m) == 0,
            (StepKind::BallotDistribution, Basis::Fourier) => outcomes.all_equal(),
            (StepKind::IndexDistribution, _) => outcomes.all_distinct(),
        }
    }

    /// One checker's security test: `delta` untested rows chosen uniformly
    /// without replacement, a fair basis coin per row, all voters measure and
    /// announce. Tested rows are consumed whatever the verdict.
    pub fn security_test_round(
        &mut self,
        checker: usize,
        delta: usize,
        rng: &mut SeededRng,
    ) -> Result<TestRound> {
        if checker >= self.n {
            return Err(Error::Validation(format!(
                "checker {checker} is not a voter"
            )));
        }
        let untested = self.untested_rows();
        if untested.len() < delta + self.min_rows_after_tests() {
            return Err(Error::InsufficientRows {
                needed: delta + self.min_rows_after_tests(),
                available: untested.len(),
            });
        }
        let picks = rng.sample_distinct(untested.len(), delta);
        let mut records = Vec::with_capacity(delta);
        let mut pass = true;
        for pick in picks {
            let row = untested[pick];
            let basis = if rng.coin() {
                Basis::Computational
            } else {
                Basis::Fourier
            };
            let (outcomes, _) = self.rows[row].state.measure_all(basis, rng)?;
            let row_pass = self.verdict(basis, &outcomes);
            pass &= row_pass;
            self.rows[row].consumed = true;
            records.push(TestRecord {
                checker,
                row,
                basis,
                outcomes: outcomes.digits().to_vec(),
                pass: row_pass,
            });
        }
        Ok(TestRound { records, pass })
    }

    fn min_rows_after_tests(&self) -> usize {
        match self.kind {
            StepKind::BallotDistribution => self.n,
            StepKind::IndexDistribution => 1,
        }
    }

    /// Step 1.4: measure every surviving copy computationally. Requires all
    /// n test rounds done, i.e. exactly n rows left.
    pub fn generate_ballots(&mut self, rng: &mut SeededRng) -> Result<BallotMatrix> {
        if self.kind != StepKind::BallotDistribution {
            return Err(Error::Sequencing(
                "ballots come from the zero-sum distribution".into(),
            ));
        }
        let untested = self.untested_rows();
        if untested.len() != self.n {
            return Err(Error::Sequencing(format!(
                "ballot generation needs exactly {} untested rows, found {}",
                self.n,
                untested.len()
            )));
        }
        let mut rows = Vec::with_capacity(self.n);
        for row in untested {
            let (outcomes, _) = self.rows[row].state.measure_all(Basis::Computational, rng)?;
            self.rows[row].consumed = true;
            rows.push(outcomes.digits().to_vec());
        }
        BallotMatrix::new(rows, self.m)
    }

    /// Step 2.4: measure the single surviving copy computationally.
    pub fn generate_indices(&mut self, rng: &mut SeededRng) -> Result<IndexArray> {
        if self.kind != StepKind::IndexDistribution {
            return Err(Error::Sequencing(
                "indices come from the singlet distribution".into(),
            ));
        }
        let untested = self.untested_rows();
        if untested.len() != 1 {
            return Err(Error::Sequencing(format!(
                "index generation needs exactly 1 untested row, found {}",
                untested.len()
            )));
        }
        let row = untested[0];
        let (outcomes, _) = self.rows[row].state.measure_all(Basis::Computational, rng)?;
        self.rows[row].consumed = true;
        Ok(IndexArray(
            outcomes.digits().iter().map(|&d| d as usize).collect(),
        ))
    }
}

/// Secret ballot numbers, row = box, column = voter. Honest rows sum to
/// `0 mod m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallotMatrix {
    rows: Vec<Vec<u8>>,
    m: usize,
}

impl BallotMatrix {
    pub fn new(rows: Vec<Vec<u8>>, m: usize) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("ballot matrix must be square".into()));
        }
        if rows
            .iter()
            .any(|r| r.iter().any(|&v| (v as usize) >= m))
        {
            return Err(Error::Validation(format!(
                "ballot entries must lie in Z_{m}"
            )));
        }
        Ok(Self { rows, m })
    }

    /// Fixture entry point: verifies the zero-sum row condition up front.
    pub fn from_fixture(rows: Vec<Vec<u8>>, m: usize) -> Result<Self> {
        let matrix = Self::new(rows, m)?;
        if !matrix.rows_sum_to_zero() {
            return Err(Error::Validation(
                "fixture ballot rows must sum to 0 mod m".into(),
            ));
        }
        Ok(matrix)
    }

    pub fn boxes(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, voter: usize) -> u8 {
        self.rows[row][voter]
    }

    pub fn column(&self, voter: usize) -> Vec<u8> {
        self.rows.iter().map(|r| r[voter]).collect()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn rows_sum_to_zero(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.iter().map(|&v| v as usize).sum::<usize>() % self.m == 0)
    }
}

/// Secret box assignment per voter; honest arrays are permutations of `Z_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexArray(pub Vec<usize>);

impl IndexArray {
    pub fn from_fixture(indices: Vec<usize>) -> Result<Self> {
        let arr = Self(indices);
        if !arr.is_permutation() {
            return Err(Error::InvalidPermutation(format!(
                "fixture indices {:?} are not a permutation",
                arr.0
            )));
        }
        Ok(arr)
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.0.len();
        let mut seen = vec![false; n];
        self.0.iter().all(|&d| {
            if d < n && !seen[d] {
                seen[d] = true;
                true
            } else {
                false
            }
        })
    }
}

/// The published matrix of updated columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteMatrix {
    cells: Vec<Vec<u8>>,
    m: usize,
}

impl VoteMatrix {
    pub fn new(cells: Vec<Vec<u8>>, m: usize) -> Result<Self> {
        if cells.is_empty() || cells.iter().any(|r| r.len() != cells[0].len()) {
            return Err(Error::Validation("vote matrix must be rectangular".into()));
        }
        if cells.iter().flatten().any(|&v| (v as usize) >= m) {
            return Err(Error::Validation(format!("vote entries must lie in Z_{m}")));
        }
        Ok(Self { cells, m })
    }

    pub fn boxes(&self) -> usize {
        self.cells.len()
    }

    pub fn voters(&self) -> usize {
        self.cells[0].len()
    }

    pub fn cell(&self, row: usize, voter: usize) -> u8 {
        self.cells[row][voter]
    }

    pub fn cells(&self) -> &[Vec<u8>] {
        &self.cells
    }

    pub fn levels(&self) -> usize {
        self.m
    }

    /// Tamper with one published cell (used to demonstrate verifiability).
    pub fn set_cell(&mut self, row: usize, voter: usize, value: u8) -> Result<()> {
        if (value as usize) >= self.m {
            return Err(Error::Validation(format!("value {value} outside Z_{}", self.m)));
        }
        self.cells[row][voter] = value;
        Ok(())
    }
}

/// Per-box sums and per-candidate counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    /// Sum of each box row mod m; a permutation of the cast votes in honest runs.
    pub box_sums: Vec<u8>,
    /// `candidate_counts[i]` = number of boxes that summed to candidate i.
    pub candidate_counts: Vec<usize>,
}

/// Step 3.1 for one voter: add the vote into the box named by the voter's
/// index number, leave every other ballot number alone.
pub fn cast_vote(column: &[u8], index: usize, vote: u8, m: usize) -> Result<Vec<u8>> {
    if (vote as usize) >= m {
        return Err(Error::Validation(format!(
            "vote {vote} outside the candidate range Z_{m}"
        )));
    }
    if index >= column.len() {
        return Err(Error::Validation(format!(
            "box index {index} out of range for {} boxes",
            column.len()
        )));
    }
    let mut updated = column.to_vec();
    updated[index] = (((updated[index] as usize) + vote as usize) % m) as u8;
    Ok(updated)
}

/// Step 3.2, self-tallying: computed from the public matrix alone.
pub fn tally(votes: &VoteMatrix) -> Tally {
    let m = votes.levels();
    let box_sums: Vec<u8> = votes
        .cells()
        .iter()
        .map(|row| (row.iter().map(|&v| v as usize).sum::<usize>() % m) as u8)
        .collect();
    let mut candidate_counts = vec![0usize; m];
    for &r in &box_sums {
        candidate_counts[r as usize] += 1;
    }
    Tally {
        box_sums,
        candidate_counts,
    }
}

/// Step 3.3 for one voter: the own box must show exactly the own vote.
pub fn verify_own_vote(tally: &Tally, index: usize, vote: u8) -> bool {
    tally.box_sums.get(index).copied() == Some(vote)
}

fn validate_votes(config: &ProtocolConfig, votes: &[u8]) -> Result<()> {
    if votes.len() != config.n {
        return Err(Error::Validation(format!(
            "expected {} votes, got {}",
            config.n,
            votes.len()
        )));
    }
    if let Some(&v) = votes.iter().find(|&&v| (v as usize) >= config.m) {
        return Err(Error::Validation(format!(
            "vote {v} outside the candidate range Z_{}",
            config.m
        )));
    }
    Ok(())
}

/// Steps 1–3 end to end. Aborts (recorded, never silent) at the first failed
/// security test, a broadcast timeout, or any failed verification.
pub fn run_full_protocol(
    config: &ProtocolConfig,
    votes: &[u8],
    attack: Option<&AttackSpec>,
) -> Result<Transcript> {
    config.validate()?;
    validate_votes(config, votes)?;
    if let Some(spec) = attack {
        spec.validate(config)?;
    }
    let master = SeededRng::new(config.seed);
    let mut t = Transcript::new(config, votes, attack);

    // Step 1: ballot boxes
    let mut chi = ParticleMatrix::distribute_chi(config)?;
    t.events.push(Event::StatesDistributed {
        step: 1,
        rows: chi.row_count(),
    });
    if let Some(spec) = attack {
        let mut attack_rng = master.derive2(STREAM_ATTACK, 1);
        spec.apply(&mut chi, &mut attack_rng)?;
    }
    for checker in 0..config.n {
        let mut rng = master.derive2(STREAM_CHI_TEST, checker as u32);
        let round = chi.security_test_round(checker, config.delta0, &mut rng)?;
        let rows = round.records.iter().map(|r| r.row).collect();
        let pass = round.pass;
        let first_bad = round.records.iter().find(|r| !r.pass).map(|r| r.row);
        t.chi_tests.extend(round.records);
        t.events.push(Event::SecurityTestRound {
            step: 1,
            checker,
            rows,
            pass,
        });
        if !pass {
            t.abort(AbortReason::SecurityTestFailed {
                step: 1,
                checker,
                row: first_bad.unwrap(),
            });
            return Ok(t);
        }
    }
    let mut ballot_rng = master.derive2(STREAM_BALLOTS, 0);
    let ballots = chi.generate_ballots(&mut ballot_rng)?;
    t.ballots = Some(ballots.rows().to_vec());
    t.events.push(Event::BallotsGenerated);

    // Step 2: box indices
    let mut singlet = ParticleMatrix::distribute_singlet(config)?;
    t.events.push(Event::StatesDistributed {
        step: 2,
        rows: singlet.row_count(),
    });
    if let Some(spec) = attack {
        let mut attack_rng = master.derive2(STREAM_ATTACK, 2);
        spec.apply(&mut singlet, &mut attack_rng)?;
    }
    for checker in 0..config.n {
        let mut rng = master.derive2(STREAM_SINGLET_TEST, checker as u32);
        let round = singlet.security_test_round(checker, config.delta1, &mut rng)?;
        let rows = round.records.iter().map(|r| r.row).collect();
        let pass = round.pass;
        let first_bad = round.records.iter().find(|r| !r.pass).map(|r| r.row);
        t.singlet_tests.extend(round.records);
        t.events.push(Event::SecurityTestRound {
            step: 2,
            checker,
            rows,
            pass,
        });
        if !pass {
            t.abort(AbortReason::SecurityTestFailed {
                step: 2,
                checker,
                row: first_bad.unwrap(),
            });
            return Ok(t);
        }
    }
    let mut index_rng = master.derive2(STREAM_INDICES, 0);
    let indices = singlet.generate_indices(&mut index_rng)?;
    t.indices = Some(indices.0.clone());
    t.events.push(Event::IndicesGenerated);

    execute_voting_phase(&mut t, config, &ballots, &indices, votes)?;
    Ok(t)
}

/// Step 3 alone, with the classical artifacts of steps 1–2 injected as
/// validated fixtures. This is how worked examples and the classical-phase
/// tests run without the quantum phases.
pub fn run_with_fixture(
    config: &ProtocolConfig,
    ballots: BallotMatrix,
    indices: IndexArray,
    votes: &[u8],
) -> Result<Transcript> {
    config.validate()?;
    validate_votes(config, votes)?;
    if ballots.boxes() != config.n {
        return Err(Error::Validation(format!(
            "fixture ballot matrix is {}×{}, expected {}×{}",
            ballots.boxes(),
            ballots.boxes(),
            config.n,
            config.n
        )));
    }
    if indices.0.len() != config.n {
        return Err(Error::Validation(format!(
            "fixture index array has {} entries, expected {}",
            indices.0.len(),
            config.n
        )));
    }
    let mut t = Transcript::new(config, votes, None);
    t.ballots = Some(ballots.rows().to_vec());
    t.events.push(Event::BallotsInjected);
    t.indices = Some(indices.0.clone());
    t.events.push(Event::IndicesInjected);
    execute_voting_phase(&mut t, config, &ballots, &indices, votes)?;
    Ok(t)
}

fn execute_voting_phase(
    t: &mut Transcript,
    config: &ProtocolConfig,
    ballots: &BallotMatrix,
    indices: &IndexArray,
    votes: &[u8],
) -> Result<()> {
    let mut broadcast = SimultaneousBroadcast::new(config.n, config.n, config.m);
    for voter in 0..config.n {
        let column = cast_vote(
            &ballots.column(voter),
            indices.0[voter],
            votes[voter],
            config.m,
        )?;
        broadcast.submit(voter, column)?;
        t.events.push(Event::VoteCommitted { voter });
    }
    let matrix = match broadcast.release() {
        Ok(matrix) => matrix,
        Err(Error::BroadcastTimeout { missing }) => {
            t.abort(AbortReason::BroadcastTimeout { missing });
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    t.vote_matrix = Some(matrix.cells().to_vec());
    t.events.push(Event::BroadcastReleased);

    let result = tally(&matrix);
    t.tally = Some(result.clone());
    t.events.push(Event::TallyComputed);

    let mut verdicts = Vec::with_capacity(config.n);
    for voter in 0..config.n {
        let pass = verify_own_vote(&result, indices.0[voter], votes[voter]);
        verdicts.push(pass);
        t.events.push(Event::VerificationChecked { voter, pass });
    }
    t.verifications = Some(verdicts.clone());
    let failed: Vec<usize> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, &p)| !p)
        .map(|(k, _)| k)
        .collect();
    if !failed.is_empty() {
        t.abort(AbortReason::VerificationFailed { voters: failed });
    }
    Ok(())
}

/// The worked four-voter, three-candidate example used across the test and
/// acceptance suites: its ballot matrix, index array, votes, and the tally
/// they produce.
pub mod fixture {
    use super::{BallotMatrix, IndexArray, Result};

    pub const N: usize = 4;
    pub const M: usize = 3;
    pub const INDICES: [usize; 4] = [1, 0, 3, 2];
    pub const VOTES: [u8; 4] = [1, 2, 1, 0];
    pub const EXPECTED_BOX_SUMS: [u8; 4] = [2, 1, 0, 1];
    pub const EXPECTED_COUNTS: [usize; 3] = [1, 2, 1];

    pub fn ballot_rows() -> Vec<Vec<u8>> {
        vec![
            vec![0, 1, 2, 0],
            vec![2, 2, 1, 1],
            vec![1, 0, 2, 0],
            vec![0, 1, 1, 1],
        ]
    }

    pub fn ballots() -> Result<BallotMatrix> {
        BallotMatrix::from_fixture(ballot_rows(), M)
    }

    pub fn indices() -> Result<IndexArray> {
        IndexArray::from_fixture(INDICES.to_vec())
    }
}
