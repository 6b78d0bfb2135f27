//! Attack injection and detection-probability measurement.
//!
//! Three attacker families: an outside eavesdropper intercepting particles
//! in flight (measure-and-resend by default), an eavesdropper replacing one
//! copy with an arbitrary state, and colluding voters preparing correlated
//! states that survive one basis test by construction. Interception and
//! replacement run through the real protocol machinery as Monte Carlo, and
//! every report carries the exact closed-form prediction it must agree with.
//! Collusion is analyzed structurally at small size: the attacker's
//! conditional states are computed exactly and compared class by class.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{ParticleMatrix, ProtocolConfig, StepKind};
use crate::qstate::{fourier_matrix, Basis, BasisTuple, SparseState, StateDump};
use crate::rng::SeededRng;

/// Which distribution step an attack applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackTarget {
    Step1,
    Step2,
}

fn default_target() -> AttackTarget {
    AttackTarget::Step1
}

/// How an intercepted particle is disturbed before being passed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceModel {
    /// Measure the particle in the computational basis and resend the
    /// post-measurement state. Passes computational tests, disturbs Fourier
    /// correlations.
    #[default]
    MeasureResendComputational,
    /// Same, in the Fourier basis.
    MeasureResendFourier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    /// Eve intercepts `x` particles of one voter's column and disturbs them.
    InterceptSubset {
        x: usize,
        #[serde(default = "default_target")]
        target: AttackTarget,
        /// Voter whose column is hit; drawn uniformly when absent.
        #[serde(default)]
        victim: Option<usize>,
        #[serde(default)]
        model: DisturbanceModel,
    },
    /// Eve swaps out one whole copy for `state`.
    ReplaceCopy {
        row: usize,
        #[serde(default = "default_target")]
        target: AttackTarget,
        state: StateDump,
    },
    /// Colluding voters. Not runnable inside the protocol loop — the
    /// entangle-measure families are analyzed structurally by the leakage
    /// analyzers in this module.
    Collusion { dishonest: Vec<usize> },
}

impl AttackSpec {
    pub fn validate(&self, config: &ProtocolConfig) -> Result<()> {
        match self {
            AttackSpec::InterceptSubset {
                x, target, victim, ..
            } => {
                let rows = match target {
                    AttackTarget::Step1 => config.n + config.n * config.delta0,
                    AttackTarget::Step2 => 1 + config.n * config.delta1,
                };
                if *x > rows {
                    return Err(Error::Validation(format!(
                        "cannot intercept {x} of {rows} rows"
                    )));
                }
                if let Some(v) = victim {
                    if *v >= config.n {
                        return Err(Error::Validation(format!("victim {v} is not a voter")));
                    }
                }
                Ok(())
            }
            AttackSpec::ReplaceCopy { row, target, state } => {
                let rows = match target {
                    AttackTarget::Step1 => config.n + config.n * config.delta0,
                    AttackTarget::Step2 => 1 + config.n * config.delta1,
                };
                if *row >= rows {
                    return Err(Error::Validation(format!(
                        "replacement row {row} out of range for {rows} rows"
                    )));
                }
                let m = match target {
                    AttackTarget::Step1 => config.m,
                    AttackTarget::Step2 => config.n,
                };
                if state.n != config.n || state.m != m {
                    return Err(Error::DimensionMismatch(format!(
                        "replacement state is ({}, {}), step needs ({}, {m})",
                        state.n, state.m, config.n
                    )));
                }
                Ok(())
            }
            AttackSpec::Collusion { dishonest } => {
                if dishonest.is_empty() || dishonest.len() > config.n.saturating_sub(2) {
                    return Err(Error::Validation(format!(
                        "collusion needs 1 ≤ dishonest ≤ n−2 voters, got {}",
                        dishonest.len()
                    )));
                }
                Err(Error::Validation(
                    "collusion attacks are analyzed structurally (see the leakage analyzers), \
                     not run through the protocol loop"
                        .into(),
                ))
            }
        }
    }

    fn applies_to(&self, kind: StepKind) -> bool {
        let target = match self {
            AttackSpec::InterceptSubset { target, .. } => *target,
            AttackSpec::ReplaceCopy { target, .. } => *target,
            AttackSpec::Collusion { .. } => return false,
        };
        matches!(
            (target, kind),
            (AttackTarget::Step1, StepKind::BallotDistribution)
                | (AttackTarget::Step2, StepKind::IndexDistribution)
        )
    }

    /// Inject the attack into a freshly distributed matrix. A no-op when the
    /// matrix belongs to the other step.
    pub fn apply(&self, matrix: &mut ParticleMatrix, rng: &mut SeededRng) -> Result<()> {
        if !self.applies_to(matrix.kind()) {
            return Ok(());
        }
        match self {
            AttackSpec::InterceptSubset {
                x, victim, model, ..
            } => {
                let victim = victim.unwrap_or_else(|| rng.below(matrix.voters()));
                let rows = rng.sample_distinct(matrix.row_count(), *x);
                for row in rows {
                    matrix.disturb_row(row, |state| {
                        measure_resend(state, victim, *model, rng)
                    })?;
                }
                Ok(())
            }
            AttackSpec::ReplaceCopy { row, state, .. } => {
                matrix.replace_row(*row, SparseState::from_dump(state)?)
            }
            AttackSpec::Collusion { .. } => unreachable!("rejected by validate"),
        }
    }
}

/// Eve's measure-and-resend disturbance of a single particle.
pub fn measure_resend(
    state: &SparseState,
    particle: usize,
    model: DisturbanceModel,
    rng: &mut SeededRng,
) -> Result<SparseState> {
    match model {
        DisturbanceModel::MeasureResendComputational => state
            .measure_particle(particle, Basis::Computational, rng)
            .map(|(_, collapsed)| collapsed),
        DisturbanceModel::MeasureResendFourier => {
            let f = fourier_matrix(state.levels())?;
            let rotated = state.apply_local_unitary(&f.adjoint(), particle)?;
            let (_, collapsed) = rotated.measure_particle(particle, Basis::Computational, rng)?;
            collapsed.apply_local_unitary(&f, particle)
        }
    }
}

/// Conditional pass rates of tampered rows, split by the basis they were
/// tested in.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BasisPassRates {
    pub p_c: f64,
    pub p_f: f64,
}

/// Predicted-versus-measured summary of one Monte Carlo experiment.
#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub predicted_pass: f64,
    pub measured_pass: f64,
    pub std_err: f64,
    pub trials: u64,
    pub per_basis: Option<BasisPassRates>,
}

impl DetectionReport {
    fn from_counts(predicted: f64, hits: u64, trials: u64, per_basis: Option<BasisPassRates>) -> Self {
        let measured = if trials == 0 {
            f64::NAN
        } else {
            hits as f64 / trials as f64
        };
        let std_err = if trials == 0 {
            f64::NAN
        } else {
            (predicted * (1.0 - predicted) / trials as f64).sqrt()
        };
        Self {
            predicted_pass: predicted,
            measured_pass: measured,
            std_err,
            trials,
            per_basis,
        }
    }

    /// True when the measurement sits within `sigmas` standard errors of the
    /// prediction (with an absolute guard for degenerate p ∈ {0, 1}).
    pub fn agrees_within(&self, sigmas: f64) -> bool {
        self.trials > 0
            && (self.measured_pass - self.predicted_pass).abs()
                <= sigmas * self.std_err + 1e-9
    }
}

/// Exact probability that all `x` intercepted particles land among the rows
/// never picked for testing: `C(n, x) / C(n + n·delta0, x)`, and 0 once
/// `x > n`.
pub fn pass_probability_intercept(n: usize, delta0: usize, x: usize) -> Result<f64> {
    let rows = n + n * delta0;
    if x > rows {
        return Err(Error::Validation(format!(
            "x={x} exceeds the {rows} distributed rows"
        )));
    }
    if x > n {
        return Ok(0.0);
    }
    Ok(binomial(n, x) as f64 / binomial(rows, x) as f64)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Monte Carlo interception experiment through the real test machinery.
///
/// Each trial distributes the step-1 matrix, disturbs `x` random rows in one
/// voter's column, runs all n test rounds, and records whether every
/// disturbed row escaped selection (the event the closed-form ratio counts).
/// Conditional pass rates of disturbed rows that *were* tested are reported
/// per basis.
pub fn simulate_intercept(
    config: &ProtocolConfig,
    x: usize,
    trials: usize,
    rng: &SeededRng,
) -> Result<DetectionReport> {
    config.validate()?;
    let predicted = pass_probability_intercept(config.n, config.delta0, x)?;
    let mut escapes = 0u64;
    let mut tested_c = (0u64, 0u64); // (tested, passed)
    let mut tested_f = (0u64, 0u64);
    for trial in 0..trials {
        let mut trial_rng = rng.derive2(0xE0, trial as u32);
        let mut matrix = ParticleMatrix::distribute_chi(config)?;
        let victim = trial_rng.below(config.n);
        let marked = trial_rng.sample_distinct(matrix.row_count(), x);
        for &row in &marked {
            matrix.disturb_row(row, |state| {
                measure_resend(
                    state,
                    victim,
                    DisturbanceModel::MeasureResendComputational,
                    &mut trial_rng,
                )
            })?;
        }
        let mut any_marked_tested = false;
        for checker in 0..config.n {
            let round = matrix.security_test_round(checker, config.delta0, &mut trial_rng)?;
            for rec in &round.records {
                if marked.contains(&rec.row) {
                    any_marked_tested = true;
                    let slot = match rec.basis {
                        Basis::Computational => &mut tested_c,
                        Basis::Fourier => &mut tested_f,
                    };
                    slot.0 += 1;
                    if rec.pass {
                        slot.1 += 1;
                    }
                }
            }
        }
        if !any_marked_tested {
            escapes += 1;
        }
    }
    let per_basis = if tested_c.0 + tested_f.0 > 0 {
        Some(BasisPassRates {
            p_c: tested_c.1 as f64 / tested_c.0.max(1) as f64,
            p_f: tested_f.1 as f64 / tested_f.0.max(1) as f64,
        })
    } else {
        None
    };
    Ok(DetectionReport::from_counts(
        predicted,
        escapes,
        trials as u64,
        per_basis,
    ))
}

/// Replacement-attack statistics for a copy swapped with `phi_e`.
#[derive(Clone, Debug, Serialize)]
pub struct ReplacementReport {
    /// Exact probability the replaced copy passes a computational-basis test.
    pub p_c: f64,
    /// Exact probability it passes a Fourier-basis test.
    pub p_f: f64,
    /// Exact per-test pass probability under the fair basis coin.
    pub per_test_pass: f64,
    /// Escape probability as the closed form `((p_c+p_f)/2)^(n·delta0)`
    /// reports it — as if every test probed the replaced copy. The literal
    /// protocol tests a row at most once, so this is reported alongside, not
    /// compared against, the Monte Carlo.
    pub formula_escape: f64,
    /// Protocol-faithful escape probability: the replaced row is either never
    /// tested or tested exactly once.
    pub faithful_escape: f64,
    /// Monte Carlo per-test pass rate of the replaced row, conditional on it
    /// being tested; predicted value is `per_test_pass`.
    pub per_test_mc: DetectionReport,
    /// Monte Carlo run-survival rate; predicted value is `faithful_escape`.
    pub escape_mc: DetectionReport,
}

/// Exact pass probabilities of an arbitrary replacement state.
pub fn replacement_pass_rates(phi_e: &SparseState) -> Result<(f64, f64)> {
    let m = phi_e.levels();
    let p_c = phi_e.mass_where(|t| t.sum_mod(m) == 0);
    let p_f = phi_e.to_fourier_frame()?.mass_where(|t| t.all_equal());
    Ok((p_c, p_f))
}

/// Exact closed forms plus a protocol-faithful Monte Carlo cross-validation.
pub fn detection_stats_replacement(
    phi_e: &SparseState,
    config: &ProtocolConfig,
    trials: usize,
    rng: &SeededRng,
) -> Result<ReplacementReport> {
    config.validate()?;
    if phi_e.particles() != config.n || phi_e.levels() != config.m {
        return Err(Error::DimensionMismatch(format!(
            "replacement state is ({}, {}), step 1 needs ({}, {})",
            phi_e.particles(),
            phi_e.levels(),
            config.n,
            config.m
        )));
    }
    let (p_c, p_f) = replacement_pass_rates(phi_e)?;
    let per_test = (p_c + p_f) / 2.0;
    let tests = (config.n * config.delta0) as i32;
    let formula_escape = per_test.powi(tests);
    let rows = config.n + config.n * config.delta0;
    let p_tested = (config.n * config.delta0) as f64 / rows as f64;
    let faithful_escape = (1.0 - p_tested) + p_tested * per_test;

    let mut tested = 0u64;
    let mut tested_passed = 0u64;
    let mut survived = 0u64;
    let mut basis_counts = [(0u64, 0u64); 2]; // computational, fourier
    for trial in 0..trials {
        let mut trial_rng = rng.derive2(0xE1, trial as u32);
        let mut matrix = ParticleMatrix::distribute_chi(config)?;
        let row = trial_rng.below(matrix.row_count());
        matrix.replace_row(row, phi_e.clone())?;
        let mut all_pass = true;
        for checker in 0..config.n {
            let round = matrix.security_test_round(checker, config.delta0, &mut trial_rng)?;
            all_pass &= round.pass;
            for rec in &round.records {
                if rec.row == row {
                    tested += 1;
                    let slot = match rec.basis {
                        Basis::Computational => &mut basis_counts[0],
                        Basis::Fourier => &mut basis_counts[1],
                    };
                    slot.0 += 1;
                    if rec.pass {
                        tested_passed += 1;
                        slot.1 += 1;
                    }
                }
            }
        }
        if all_pass {
            survived += 1;
        }
    }
    let per_basis = BasisPassRates {
        p_c: basis_counts[0].1 as f64 / basis_counts[0].0.max(1) as f64,
        p_f: basis_counts[1].1 as f64 / basis_counts[1].0.max(1) as f64,
    };
    Ok(ReplacementReport {
        p_c,
        p_f,
        per_test_pass: per_test,
        formula_escape,
        faithful_escape,
        per_test_mc: DetectionReport::from_counts(per_test, tested_passed, tested, Some(per_basis)),
        escape_mc: DetectionReport::from_counts(faithful_escape, survived, trials as u64, None),
    })
}

// --- collusion families ------------------------------------------------

/// Attacker-register preparation for the ballot-collusion family: one state
/// of the l dishonest particles per Fourier branch j.
#[derive(Clone, Debug)]
pub enum AncillaChoice {
    /// `|φ_j⟩ = |j…j⟩`: branches fully distinguishable.
    DistinctMarkers,
    /// All branches identical: the honest part reduces to the clean resource
    /// state and the attacker learns nothing.
    AllEqual,
    /// Caller-supplied branch states (must be m states of l particles each).
    Custom(Vec<SparseState>),
}

/// Size guard for the structural analyses; the families are built exactly.
const COLLUSION_MAX_N: usize = 4;

/// Ballot-collusion family: Fourier-correlated over the `n−l` honest
/// particles with attacker branch states `|φ_j⟩`, normalized. Passes every
/// Fourier-basis test on honest particles with certainty by construction.
///
/// Particle layout of the result: honest particles first (indices
/// `0..n−l`), then the l attacker particles.
pub fn build_ballot_collusion_state(
    n: usize,
    m: usize,
    dishonest: usize,
    phi: &AncillaChoice,
) -> Result<SparseState> {
    if n > COLLUSION_MAX_N {
        return Err(Error::ResourceBudget {
            what: format!("ballot collusion family at n={n}"),
            required: n,
            budget: COLLUSION_MAX_N,
        });
    }
    if dishonest == 0 || dishonest + 2 > n {
        return Err(Error::Validation(format!(
            "need 1 ≤ dishonest ≤ n−2, got {dishonest} of n={n}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidDimension(format!("m must be ≥ 2, got {m}")));
    }
    let honest = n - dishonest;
    let branches: Vec<SparseState> = match phi {
        AncillaChoice::DistinctMarkers => (0..m)
            .map(|j| SparseState::basis_state(m, &vec![j as u8; dishonest]))
            .collect::<Result<_>>()?,
        AncillaChoice::AllEqual => (0..m)
            .map(|_| SparseState::basis_state(m, &vec![0u8; dishonest]))
            .collect::<Result<_>>()?,
        AncillaChoice::Custom(states) => {
            if states.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "need {m} branch states, got {}",
                    states.len()
                )));
            }
            for s in states {
                if s.particles() != dishonest || s.levels() != m {
                    return Err(Error::DimensionMismatch(format!(
                        "branch state is ({}, {}), expected ({dishonest}, {m})",
                        s.particles(),
                        s.levels()
                    )));
                }
            }
            states.clone()
        }
    };
    let f = fourier_matrix(m)?;
    let mut terms: Vec<(BasisTuple, Complex64)> = Vec::new();
    for (j, branch) in branches.iter().enumerate() {
        // F|j⟩ on every honest particle
        let mut honest_terms: Vec<(Vec<u8>, Complex64)> =
            vec![(Vec::new(), Complex64::new(1.0, 0.0))];
        for _ in 0..honest {
            let mut next = Vec::with_capacity(honest_terms.len() * m);
            for (digits, amp) in &honest_terms {
                for k in 0..m {
                    let mut d = digits.clone();
                    d.push(k as u8);
                    next.push((d, amp * f.entry(k, j)));
                }
            }
            honest_terms = next;
        }
        for (hdigits, hamp) in &honest_terms {
            for (atuple, aamp) in branch.terms() {
                let digits: Vec<u8> = hdigits
                    .iter()
                    .copied()
                    .chain(atuple.digits().iter().copied())
                    .collect();
                terms.push((BasisTuple::new(digits), hamp * aamp));
            }
        }
    }
    SparseState::from_terms(n, m, terms)
}

/// Attacker-register choice for the index-collusion family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexAncilla {
    /// One orthogonal marker per combination class — the only choice that
    /// survives the computational-basis test.
    PerClassOrthogonal,
    /// A distinct marker per permutation: violates the all-equal-within-class
    /// requirement and leaks mass onto repeated-digit tuples.
    PerPermutation,
}

/// Index-collusion family over `n−l` honest particles of an n-level system,
/// with l attacker particles. Built as the antisymmetrized Fourier state of
/// every (n−l)-permutation, tensored with per-permutation attacker markers.
pub fn build_index_collusion_state(
    n: usize,
    l: usize,
    ancilla: IndexAncilla,
) -> Result<SparseState> {
    use itertools::Itertools;
    if n > COLLUSION_MAX_N {
        return Err(Error::ResourceBudget {
            what: format!("index collusion family at n={n}"),
            required: n,
            budget: COLLUSION_MAX_N,
        });
    }
    if l > 2 || l >= n {
        return Err(Error::Validation(format!(
            "index analysis supports l ≤ 2 dishonest voters with l < n, got l={l}, n={n}"
        )));
    }
    let honest = n - l;
    let f = fourier_matrix(n)?;
    // enumerate (n−l)-permutations grouped so class ids are stable
    let perms: Vec<Vec<usize>> = (0..n).permutations(honest).collect();
    let mut class_ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for p in &perms {
        let mut key = p.clone();
        key.sort_unstable();
        let next = class_ids.len();
        class_ids.entry(key).or_insert(next);
    }
    let marker_capacity = n.pow(l as u32);
    let mut class_member_rank: BTreeMap<usize, usize> = BTreeMap::new();
    let mut terms: Vec<(BasisTuple, Complex64)> = Vec::new();
    for perm in perms.iter() {
        let tau = crate::qstate::inverse_number(perm)?;
        let sign = if tau % 2 == 0 { 1.0 } else { -1.0 };
        let mut key = perm.clone();
        key.sort_unstable();
        let class = class_ids[&key];
        let marker_value = match ancilla {
            IndexAncilla::PerClassOrthogonal => class,
            IndexAncilla::PerPermutation => {
                // markers only need to differ within a class to break the
                // all-equal requirement; wrap into the register capacity
                let rank = class_member_rank.entry(class).or_insert(0);
                let value = *rank % marker_capacity;
                *rank += 1;
                value
            }
        };
        let marker = encode_marker(marker_value, l, n)?;
        // F^⊗honest applied to |perm⟩
        let mut honest_terms: Vec<(Vec<u8>, Complex64)> =
            vec![(Vec::new(), Complex64::new(sign, 0.0))];
        for &s in perm {
            let mut next = Vec::with_capacity(honest_terms.len() * n);
            for (digits, amp) in &honest_terms {
                for k in 0..n {
                    let mut d = digits.clone();
                    d.push(k as u8);
                    next.push((d, amp * f.entry(k, s)));
                }
            }
            honest_terms = next;
        }
        for (hdigits, hamp) in honest_terms {
            let digits: Vec<u8> = hdigits
                .into_iter()
                .chain(marker.iter().copied())
                .collect();
            terms.push((BasisTuple::new(digits), hamp));
        }
    }
    SparseState::from_terms(n, n, terms)
}

fn encode_marker(value: usize, l: usize, base: usize) -> Result<Vec<u8>> {
    if l == 0 {
        return if value == 0 {
            Ok(Vec::new())
        } else {
            Err(Error::Validation(
                "no attacker register to distinguish classes".into(),
            ))
        };
    }
    let capacity = base.pow(l as u32);
    if value >= capacity {
        return Err(Error::Validation(format!(
            "marker {value} does not fit in {l} digits of Z_{base}"
        )));
    }
    let mut digits = vec![0u8; l];
    let mut rest = value;
    for d in digits.iter_mut() {
        *d = (rest % base) as u8;
        rest /= base;
    }
    Ok(digits)
}

/// What the attacker's conditional states reveal.
#[derive(Clone, Debug, Serialize)]
pub struct LeakageReport {
    /// Exact probability mass violating the basis condition the family is
    /// built to satisfy (Fourier all-equal for ballots, Fourier all-distinct
    /// for indices). Zero by construction.
    pub guaranteed_test_violation: f64,
    /// Exact mass violating the other basis condition; nonzero means the
    /// family member would be caught with positive probability.
    pub other_test_violation: f64,
    /// Number of outcome classes with any probability mass.
    pub classes: usize,
    /// Largest distance between attacker conditional states within one class.
    pub within_class_max_diff: f64,
    /// Smallest distance between attacker conditional states across classes.
    pub across_class_min_diff: f64,
    /// Overlap magnitude with the singlet, only for the l = 0 index family
    /// (which must be the singlet up to a global phase).
    pub singlet_fidelity: Option<f64>,
}

impl LeakageReport {
    /// True when the attacker distinguishes at most the class: identical
    /// conditional states within every class.
    pub fn leakage_at_most_class(&self, tol: f64) -> bool {
        self.within_class_max_diff <= tol
    }
}

/// Sparse attacker-side vector conditioned on one honest outcome.
struct Conditional {
    terms: BTreeMap<Vec<u8>, Complex64>,
    norm: f64,
}

impl Conditional {
    fn normalized_overlap(&self, other: &Conditional) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (digits, a) in &self.terms {
            if let Some(b) = other.terms.get(digits) {
                acc += a.conj() * b;
            }
        }
        acc / (self.norm * other.norm)
    }

    /// `‖â − e^{iθ}·b̂‖` over the union support; element-wise, so exactly
    /// equal vectors measure exactly zero.
    fn distance_with_phase(&self, other: &Conditional, phase: Complex64) -> f64 {
        let mut acc = 0.0;
        for (digits, a) in &self.terms {
            let b = other
                .terms
                .get(digits)
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            acc += (a / self.norm - phase * b / other.norm).norm_sqr();
        }
        for (digits, b) in &other.terms {
            if !self.terms.contains_key(digits) {
                acc += (phase * b / other.norm).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Euclidean distance of the normalized vectors.
    fn distance_exact(&self, other: &Conditional) -> f64 {
        self.distance_with_phase(other, Complex64::new(1.0, 0.0))
    }

    /// Distance after aligning global phase: 0 for physically identical states.
    fn distance_up_to_phase(&self, other: &Conditional) -> f64 {
        let overlap = self.normalized_overlap(other);
        let phase = if overlap.norm() > 0.0 {
            overlap.conj() / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.distance_with_phase(other, phase)
    }
}

fn conditionals_by_honest_outcome(
    state: &SparseState,
    honest: usize,
) -> BTreeMap<Vec<u8>, Conditional> {
    let mut map: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
    for (tuple, amp) in state.terms() {
        let honest_digits = tuple.digits()[..honest].to_vec();
        let attacker_digits = tuple.digits()[honest..].to_vec();
        *map.entry(honest_digits)
            .or_default()
            .entry(attacker_digits)
            .or_insert(Complex64::new(0.0, 0.0)) += amp;
    }
    map.into_iter()
        .filter_map(|(honest_digits, terms)| {
            let norm_sqr: f64 = terms.values().map(|a| a.norm_sqr()).sum();
            if norm_sqr < 1e-20 {
                None
            } else {
                Some((
                    honest_digits,
                    Conditional {
                        terms,
                        norm: norm_sqr.sqrt(),
                    },
                ))
            }
        })
        .collect()
}

fn class_structure<K: Ord>(
    conditionals: &BTreeMap<Vec<u8>, Conditional>,
    class_of: impl Fn(&[u8]) -> K,
    distance: impl Fn(&Conditional, &Conditional) -> f64,
) -> (usize, f64, f64) {
    let mut classes: BTreeMap<K, Vec<&Conditional>> = BTreeMap::new();
    for (digits, cond) in conditionals {
        classes.entry(class_of(digits)).or_default().push(cond);
    }
    let mut within_max: f64 = 0.0;
    for members in classes.values() {
        for pair in members.windows(2) {
            within_max = within_max.max(distance(pair[0], pair[1]));
        }
        if members.len() > 1 {
            within_max = within_max.max(distance(members[0], members[members.len() - 1]));
        }
    }
    let reps: Vec<&Conditional> = classes.values().map(|m| m[0]).collect();
    let mut across_min = f64::INFINITY;
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            across_min = across_min.min(distance(reps[i], reps[j]));
        }
    }
    if !across_min.is_finite() {
        across_min = 0.0;
    }
    (classes.len(), within_max, across_min)
}

/// Exact conditional-state analysis of a ballot-collusion family member:
/// honest computational outcomes with equal digit sums mod m must leave the
/// attacker in identical states, so at most the sum leaks.
pub fn analyze_ballot_leakage(state: &SparseState, honest: usize) -> Result<LeakageReport> {
    if honest == 0 || honest > state.particles() {
        return Err(Error::Validation(format!(
            "honest particle count {honest} out of range"
        )));
    }
    let m = state.levels();
    // Fourier test on honest particles passes with certainty by construction
    let f_adj = fourier_matrix(m)?.adjoint();
    let mut rotated = state.clone();
    for p in 0..honest {
        rotated = rotated.apply_local_unitary(&f_adj, p)?;
    }
    let guaranteed = rotated.mass_where(|t| !all_equal_prefix(t, honest));
    let other = state.mass_where(|t| t.digits()[..honest]
        .iter()
        .map(|&d| d as usize)
        .sum::<usize>()
        % m
        != 0)
        .min(1.0); // the computational sum test, over honest digits only
    let conditionals = conditionals_by_honest_outcome(state, honest);
    let (classes, within, across) = class_structure(
        &conditionals,
        |digits| digits.iter().map(|&d| d as usize).sum::<usize>() % m,
        Conditional::distance_exact,
    );
    Ok(LeakageReport {
        guaranteed_test_violation: guaranteed,
        other_test_violation: other,
        classes,
        within_class_max_diff: within,
        across_class_min_diff: across,
        singlet_fidelity: None,
    })
}

fn all_equal_prefix(t: &BasisTuple, len: usize) -> bool {
    t.digits()[..len].windows(2).all(|w| w[0] == w[1])
}

fn all_distinct_prefix(t: &BasisTuple, len: usize) -> bool {
    let prefix = &t.digits()[..len];
    let mut seen = [false; 256];
    prefix.iter().all(|&d| {
        if seen[d as usize] {
            false
        } else {
            seen[d as usize] = true;
            true
        }
    })
}

/// Exact conditional-state analysis of an index-collusion family member.
///
/// Builds the family for `(n, l)` and verifies: (a) computational-basis
/// support on honest particles stays inside the repeat-free tuples exactly
/// when the attacker markers are constant per combination class, and (b)
/// conditional attacker states coincide (up to a global phase) for honest
/// outcomes within one class, so at most the combination leaks. With l = 0
/// the family collapses to the singlet up to phase.
pub fn analyze_index_leakage(
    n: usize,
    l: usize,
    ancilla: IndexAncilla,
) -> Result<LeakageReport> {
    let state = build_index_collusion_state(n, l, ancilla)?;
    let honest = n - l;
    let f_adj = fourier_matrix(n)?.adjoint();
    let mut rotated = state.clone();
    for p in 0..honest {
        rotated = rotated.apply_local_unitary(&f_adj, p)?;
    }
    let guaranteed = rotated.mass_where(|t| !all_distinct_prefix(t, honest));
    let other = state.mass_where(|t| !all_distinct_prefix(t, honest));
    let singlet_fidelity = if l == 0 {
        let singlet = SparseState::singlet(n)?;
        Some(singlet.inner_product(&state)?.norm().min(1.0))
    } else {
        None
    };
    let conditionals = conditionals_by_honest_outcome(&state, honest);
    // only permutation outcomes matter for leakage; repeated-digit outcomes
    // are what the security test catches
    let permutation_conditionals: BTreeMap<Vec<u8>, Conditional> = conditionals
        .into_iter()
        .filter(|(digits, _)| {
            let t = BasisTuple::new(digits.iter().copied());
            all_distinct_prefix(&t, digits.len())
        })
        .collect();
    let (classes, within, across) = class_structure(
        &permutation_conditionals,
        |digits| {
            let mut key = digits.to_vec();
            key.sort_unstable();
            key
        },
        Conditional::distance_up_to_phase,
    );
    Ok(LeakageReport {
        guaranteed_test_violation: guaranteed,
        other_test_violation: other,
        classes,
        within_class_max_diff: within,
        across_class_min_diff: across,
        singlet_fidelity,
    })
}

// --- sweep output ------------------------------------------------------

/// One CSV row of an attack sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub attack: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub x: Option<usize>,
    pub predicted: f64,
    pub measured: f64,
    pub stderr: f64,
    pub trials: u64,
}

pub const SWEEP_CSV_HEADER: &str = "attack,n,m,delta,x,predicted,measured,stderr,trials";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let x = self.x.map(|v| v.to_string()).unwrap_or_default();
        let fmt = |v: f64| {
            if v.is_nan() {
                String::new()
            } else {
                format!("{v}")
            }
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.attack,
            self.n,
            self.m,
            self.delta,
            x,
            fmt(self.predicted),
            fmt(self.measured),
            fmt(self.stderr),
            self.trials
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(n: usize, m: usize, delta0: usize, seed: u64) -> ProtocolConfig {
        ProtocolConfig {
            n,
            m,
            delta0,
            delta1: 1,
            seed,
            distributor: 0,
        }
    }

    #[test]
    fn intercept_probability_exact_values() {
        assert_abs_diff_eq!(
            pass_probability_intercept(4, 2, 1).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            pass_probability_intercept(4, 2, 2).unwrap(),
            1.0 / 11.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            pass_probability_intercept(4, 2, 3).unwrap(),
            1.0 / 55.0,
            epsilon = 1e-15
        );
        // more particles than surviving rows: certain detection
        assert_eq!(pass_probability_intercept(4, 2, 5).unwrap(), 0.0);
        assert_eq!(pass_probability_intercept(4, 2, 0).unwrap(), 1.0);
        assert!(pass_probability_intercept(4, 2, 13).is_err());
    }

    #[test]
    fn intercept_monte_carlo_matches_combinatorics() {
        let rng = SeededRng::new(606);
        let report = simulate_intercept(&config(4, 2, 2, 0), 1, 20_000, &rng).unwrap();
        assert!(
            report.agrees_within(3.0),
            "measured {} vs predicted {} ± {}",
            report.measured_pass,
            report.predicted_pass,
            3.0 * report.std_err
        );
        // measure-and-resend in the computational basis never trips the sum test
        let rates = report.per_basis.unwrap();
        assert_abs_diff_eq!(rates.p_c, 1.0, epsilon = 1e-12);
        assert!(rates.p_f < 1.0);
    }

    #[test]
    fn intercept_with_no_disturbance_always_escapes() {
        let rng = SeededRng::new(7);
        let report = simulate_intercept(&config(3, 2, 1, 0), 0, 200, &rng).unwrap();
        assert_abs_diff_eq!(report.measured_pass, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.predicted_pass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_column_interception_is_almost_surely_aborted() {
        // disturbing every row means every tested row is disturbed; the
        // escape probability decays geometrically in the test count
        let mut aborts = 0usize;
        let total = 200usize;
        for seed in 0..total as u64 {
            let cfg = crate::protocol::ProtocolConfig {
                n: 4,
                m: 2,
                delta0: 4,
                delta1: 1,
                seed,
                distributor: 0,
            };
            let rows = cfg.n + cfg.n * cfg.delta0;
            let attack = AttackSpec::InterceptSubset {
                x: rows,
                target: AttackTarget::Step1,
                victim: None,
                model: DisturbanceModel::default(),
            };
            let t = crate::protocol::run_full_protocol(&cfg, &[0, 1, 0, 1], Some(&attack)).unwrap();
            if !t.completed() {
                aborts += 1;
            }
        }
        assert!(
            aborts as f64 / total as f64 > 0.9,
            "abort rate {aborts}/{total}"
        );
    }

    #[test]
    fn escape_probability_decreases_with_delta_and_x() {
        let mut last = 1.0;
        for delta0 in 1..=6 {
            let p = pass_probability_intercept(4, delta0, 2).unwrap();
            assert!(p < last);
            last = p;
        }
        let mut last = 1.0;
        for x in 1..=4 {
            let p = pass_probability_intercept(4, 2, x).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn replacement_exact_rates_for_product_zero_state() {
        let phi = SparseState::basis_state(2, &[0, 0, 0]).unwrap();
        let (p_c, p_f) = replacement_pass_rates(&phi).unwrap();
        assert_abs_diff_eq!(p_c, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_f, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn replacement_of_clean_state_is_never_detected() {
        let phi = SparseState::chi(3, 2).unwrap();
        let rng = SeededRng::new(5);
        let report = detection_stats_replacement(&phi, &config(3, 2, 2, 0), 300, &rng).unwrap();
        assert_abs_diff_eq!(report.per_test_pass, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.escape_mc.measured_pass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn replacement_monte_carlo_agrees_with_exact_rates() {
        let phi = SparseState::basis_state(2, &[0, 0, 0]).unwrap();
        let rng = SeededRng::new(911);
        let report =
            detection_stats_replacement(&phi, &config(3, 2, 2, 0), 10_000, &rng).unwrap();
        assert_abs_diff_eq!(report.per_test_pass, 0.625, epsilon = 1e-12);
        assert!(
            report.per_test_mc.agrees_within(3.0),
            "per-test {} vs {}",
            report.per_test_mc.measured_pass,
            report.per_test_pass
        );
        assert!(report.escape_mc.agrees_within(3.0));
        // the printed closed form overstates detection (it reuses the row)
        assert!(report.formula_escape < report.faithful_escape);
    }

    #[test]
    fn attack_validation_rejects_nonsense() {
        let cfg = config(3, 2, 1, 0);
        let too_many = AttackSpec::InterceptSubset {
            x: 7,
            target: AttackTarget::Step1,
            victim: None,
            model: DisturbanceModel::default(),
        };
        assert!(too_many.validate(&cfg).is_err());
        let bad_victim = AttackSpec::InterceptSubset {
            x: 1,
            target: AttackTarget::Step1,
            victim: Some(9),
            model: DisturbanceModel::default(),
        };
        assert!(bad_victim.validate(&cfg).is_err());
        let collusion = AttackSpec::Collusion {
            dishonest: vec![1],
        };
        assert!(collusion.validate(&cfg).is_err());
    }

    #[test]
    fn ballot_collusion_passes_fourier_with_certainty() {
        let state =
            build_ballot_collusion_state(3, 2, 1, &AncillaChoice::DistinctMarkers).unwrap();
        let report = analyze_ballot_leakage(&state, 2).unwrap();
        assert!(report.guaranteed_test_violation < 1e-12);
    }

    #[test]
    fn ballot_collusion_leaks_only_the_sum_class() {
        for m in 2..=3usize {
            let state =
                build_ballot_collusion_state(4, m, 1, &AncillaChoice::DistinctMarkers).unwrap();
            let report = analyze_ballot_leakage(&state, 3).unwrap();
            assert!(report.leakage_at_most_class(1e-10), "m={m}: {report:?}");
            assert_eq!(report.classes, m);
            assert!(report.across_class_min_diff > 1e-3, "m={m}: {report:?}");
        }
    }

    #[test]
    fn equal_sum_outcomes_give_identical_attacker_states() {
        let state =
            build_ballot_collusion_state(3, 2, 1, &AncillaChoice::DistinctMarkers).unwrap();
        let conditionals = conditionals_by_honest_outcome(&state, 2);
        let a = &conditionals[&vec![0u8, 1]];
        let b = &conditionals[&vec![1u8, 0]];
        assert!(a.distance_exact(b) < 1e-12, "same sum class");
        let c = &conditionals[&vec![0u8, 0]];
        assert!(a.distance_exact(c) > 1e-3, "different sum class");
    }

    #[test]
    fn degenerate_ancilla_reduces_to_clean_resource_state() {
        let state = build_ballot_collusion_state(3, 2, 1, &AncillaChoice::AllEqual).unwrap();
        // honest part ⊗ |0⟩: compare against the 2-particle resource state ⊗ |0⟩
        let clean = SparseState::chi(2, 2).unwrap();
        let mut expected_terms = Vec::new();
        for (t, a) in clean.terms() {
            let digits: Vec<u8> = t.digits().iter().copied().chain([0u8]).collect();
            expected_terms.push((BasisTuple::new(digits), *a));
        }
        let expected = SparseState::from_terms(3, 2, expected_terms).unwrap();
        let overlap = expected.inner_product(&state).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
        // attacker conditionals no longer distinguish anything
        let report = analyze_ballot_leakage(&state, 2).unwrap();
        assert!(report.across_class_min_diff < 1e-10);
    }

    #[test]
    fn index_collusion_compliant_markers_leak_only_the_class() {
        let report = analyze_index_leakage(3, 1, IndexAncilla::PerClassOrthogonal).unwrap();
        assert!(report.guaranteed_test_violation < 1e-10);
        assert!(report.other_test_violation < 1e-10);
        assert_eq!(report.classes, 3); // the 2-element subsets of a 3-set
        assert!(report.leakage_at_most_class(1e-10));
        assert!(report.across_class_min_diff > 1e-3);
    }

    #[test]
    fn index_collusion_noncompliant_markers_leak_mass_onto_repeats() {
        let report = analyze_index_leakage(3, 1, IndexAncilla::PerPermutation).unwrap();
        assert!(report.guaranteed_test_violation < 1e-10);
        assert!(
            report.other_test_violation > 1e-3,
            "mass on repeated-digit tuples: {report:?}"
        );
    }

    #[test]
    fn index_collusion_without_attackers_is_the_singlet() {
        let report = analyze_index_leakage(3, 0, IndexAncilla::PerClassOrthogonal).unwrap();
        let fidelity = report.singlet_fidelity.unwrap();
        assert_abs_diff_eq!(fidelity, 1.0, epsilon = 1e-10);
        assert!(report.guaranteed_test_violation < 1e-10);
        assert!(report.other_test_violation < 1e-10);
    }

    #[test]
    fn collusion_size_limits_enforced() {
        assert!(matches!(
            build_ballot_collusion_state(5, 2, 1, &AncillaChoice::DistinctMarkers),
            Err(Error::ResourceBudget { .. })
        ));
        assert!(build_ballot_collusion_state(3, 2, 2, &AncillaChoice::DistinctMarkers).is_err());
        assert!(build_index_collusion_state(4, 3, IndexAncilla::PerClassOrthogonal).is_err());
    }

    #[test]
    fn sweep_row_csv_shape() {
        let row = SweepRow {
            attack: "intercept".into(),
            n: 4,
            m: 2,
            delta: 2,
            x: Some(1),
            predicted: 1.0 / 3.0,
            measured: 0.3345,
            stderr: 0.0015,
            trials: 100_000,
        };
        let csv = row.to_csv();
        assert!(csv.starts_with("intercept,4,2,2,1,"));
        assert_eq!(csv.split(',').count(), SWEEP_CSV_HEADER.split(',').count());
    }
}
