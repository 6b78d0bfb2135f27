//! Scenario configs, report emission, and the command implementations behind
//! the `sqav` binary.
//!
//! Every command reads one JSON scenario file, runs deterministically from
//! the seed recorded in it (or the `--seed` override), writes its outputs
//! atomically under the output directory, and prints a short summary. Exit
//! codes are a stable contract: 0 success, 2 validation error, 3 protocol
//! abort, 4 verification/agreement failure.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{
    detection_stats_replacement, pass_probability_intercept, simulate_intercept, AttackSpec,
    SweepRow, SWEEP_CSV_HEADER,
};
use crate::amc::{anonymous_ranking, run_amc, AmcConfig, AmcInputs, AmcMode};
use crate::error::{Error, Result};
use crate::protocol::{
    run_full_protocol, run_with_fixture, BallotMatrix, IndexArray, ProtocolConfig, RunOutcome,
    Transcript,
};
use crate::qstate::{SparseState, StateDump};
use crate::rng::SeededRng;
use crate::theorems::{run_suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// Output directory default: `--out`, else `SQAV_OUT_DIR`, else the cwd.
pub fn resolve_out_dir(cli_out: Option<PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| std::env::var_os("SQAV_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Everything a command needs to run.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub seed_override: Option<u64>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// Write via a temp file in the same directory, then rename into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

// --- vote ----------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteScenario {
    pub n: usize,
    pub m: usize,
    pub delta0: usize,
    pub delta1: usize,
    pub seed: u64,
    #[serde(default)]
    pub distributor: usize,
    pub votes: Vec<u8>,
    #[serde(default)]
    pub attack: Option<AttackSpec>,
    /// Classical artifacts injected in place of the quantum phases.
    #[serde(default)]
    pub fixture: Option<VoteFixture>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteFixture {
    pub ballots: Vec<Vec<u8>>,
    pub indices: Vec<usize>,
}

impl VoteScenario {
    fn protocol_config(&self, seed_override: Option<u64>) -> ProtocolConfig {
        ProtocolConfig {
            n: self.n,
            m: self.m,
            delta0: self.delta0,
            delta1: self.delta1,
            seed: seed_override.unwrap_or(self.seed),
            distributor: self.distributor,
        }
    }
}

/// Run one election scenario; returns the transcript for reuse in tests.
pub fn run_vote_scenario(
    scenario: &VoteScenario,
    seed_override: Option<u64>,
) -> Result<Transcript> {
    let config = scenario.protocol_config(seed_override);
    match &scenario.fixture {
        Some(fixture) => {
            if scenario.attack.is_some() {
                return Err(Error::Validation(
                    "fixture runs skip the quantum phases; attacks do not apply".into(),
                ));
            }
            let ballots = BallotMatrix::from_fixture(fixture.ballots.clone(), scenario.m)?;
            let indices = IndexArray::from_fixture(fixture.indices.clone())?;
            run_with_fixture(&config, ballots, indices, &scenario.votes)
        }
        None => run_full_protocol(&config, &scenario.votes, scenario.attack.as_ref()),
    }
}

fn tally_summary(t: &Transcript) -> String {
    let mut out = String::new();
    match &t.outcome {
        RunOutcome::Completed => out.push_str("run completed\n"),
        RunOutcome::Aborted { reason } => {
            out.push_str(&format!("run aborted: {reason:?}\n"));
        }
    }
    out.push_str(&format!("seed: {}\n", t.config.seed));
    if let Some(tally) = &t.tally {
        out.push_str(&format!("box sums: {:?}\n", tally.box_sums));
        out.push_str("votes per candidate:\n");
        for (candidate, count) in tally.candidate_counts.iter().enumerate() {
            out.push_str(&format!("  candidate {candidate}: {count}\n"));
        }
    }
    if let Some(verifications) = &t.verifications {
        let failed: Vec<usize> = verifications
            .iter()
            .enumerate()
            .filter(|(_, &ok)| !ok)
            .map(|(k, _)| k)
            .collect();
        if failed.is_empty() {
            out.push_str("verifications: all passed\n");
        } else {
            out.push_str(&format!("verifications FAILED for voters {failed:?}\n"));
        }
    }
    out
}

pub fn cmd_vote(manifest: &RunManifest) -> Result<i32> {
    let scenario: VoteScenario = load_config(&manifest.config_path)?;
    let transcript = run_vote_scenario(&scenario, manifest.seed_override)?;
    let json = serde_json::to_string_pretty(&transcript)?;
    write_atomic(&manifest.out_dir.join("vote_transcript.json"), json.as_bytes())?;
    let summary = tally_summary(&transcript);
    write_atomic(
        &manifest.out_dir.join("tally_summary.txt"),
        summary.as_bytes(),
    )?;
    print!("{summary}");
    Ok(if transcript.completed() {
        EXIT_OK
    } else {
        EXIT_ABORT
    })
}

// --- amc -------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmcScenario {
    pub parties: usize,
    pub input_counts: Vec<usize>,
    pub values: Vec<Vec<u8>>,
    pub m: usize,
    pub delta2: usize,
    pub delta3: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: AmcMode,
    /// Also emit the descending ranking of the revealed sequence.
    #[serde(default)]
    pub ranking: bool,
}

/// The `amc_result.json` payload.
#[derive(Clone, Debug, Serialize)]
pub struct AmcRunResult {
    pub schema_version: u32,
    pub seed: u64,
    pub mode: AmcMode,
    pub anonymized: Vec<u8>,
    /// Plain integer sum of the revealed values.
    pub sum: u64,
    pub ranking: Option<Vec<u8>>,
    pub verifications: Vec<bool>,
}

/// Run one computation scenario; shared by the CLI and the C ABI.
pub fn run_amc_scenario(
    scenario: &AmcScenario,
    seed_override: Option<u64>,
) -> Result<AmcRunResult> {
    let inputs = AmcInputs {
        parties: scenario.parties,
        input_counts: scenario.input_counts.clone(),
        values: scenario.values.clone(),
        m: scenario.m,
    };
    let config = AmcConfig {
        delta2: scenario.delta2,
        delta3: scenario.delta3,
        seed: seed_override.unwrap_or(scenario.seed),
        mode: scenario.mode,
    };
    let outcome = run_amc(&inputs, &config)?;
    let ranking = if scenario.ranking {
        Some(anonymous_ranking(&inputs, &config)?)
    } else {
        None
    };
    let sum = outcome.anonymized.iter().map(|&v| v as u64).sum();
    Ok(AmcRunResult {
        schema_version: 1,
        seed: config.seed,
        mode: config.mode,
        anonymized: outcome.anonymized,
        sum,
        ranking,
        verifications: outcome.verifications,
    })
}

pub fn cmd_amc(manifest: &RunManifest) -> Result<i32> {
    let scenario: AmcScenario = load_config(&manifest.config_path)?;
    let result = run_amc_scenario(&scenario, manifest.seed_override)?;
    write_atomic(
        &manifest.out_dir.join("amc_result.json"),
        serde_json::to_string_pretty(&result)?.as_bytes(),
    )?;
    println!("anonymized: {:?}", result.anonymized);
    println!("sum: {}", result.sum);
    if let Some(r) = &result.ranking {
        println!("ranking: {r:?}");
    }
    if result.verifications.iter().all(|&v| v) {
        println!("verifications: all passed");
        Ok(EXIT_OK)
    } else {
        println!("verifications FAILED: {:?}", result.verifications);
        Ok(EXIT_ABORT)
    }
}

// --- attack ----------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "attack", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackScenario {
    /// Eq.-style interception sweep over particle counts.
    Intercept {
        n: usize,
        m: usize,
        delta0: usize,
        x_values: Vec<usize>,
        trials: usize,
        seed: u64,
    },
    /// Copy-replacement sweep over security strengths.
    Replacement {
        n: usize,
        m: usize,
        delta0_values: Vec<usize>,
        trials: usize,
        seed: u64,
        phi: PhiSpec,
    },
}

/// The replacement state: a named preset or an explicit dump.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum PhiSpec {
    Preset(PhiPreset),
    Dump(StateDump),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiPreset {
    AllZeros,
}

fn phi_state(spec: &PhiSpec, n: usize, m: usize) -> Result<SparseState> {
    match spec {
        PhiSpec::Preset(PhiPreset::AllZeros) => SparseState::basis_state(m, &vec![0u8; n]),
        PhiSpec::Dump(dump) => SparseState::from_dump(dump),
    }
}

fn protocol_config(n: usize, m: usize, delta0: usize, seed: u64) -> ProtocolConfig {
    ProtocolConfig {
        n,
        m,
        delta0,
        delta1: 1,
        seed,
        distributor: 0,
    }
}

/// Run the sweep; returns the emitted rows and the agreement verdict.
pub fn run_attack_scenario(
    scenario: &AttackScenario,
    seed_override: Option<u64>,
) -> Result<(Vec<SweepRow>, bool)> {
    match scenario {
        AttackScenario::Intercept {
            n,
            m,
            delta0,
            x_values,
            trials,
            seed,
        } => {
            if x_values.is_empty() {
                return Err(Error::Validation("empty interception grid".into()));
            }
            let rng = SeededRng::new(seed_override.unwrap_or(*seed));
            let mut rows = Vec::new();
            let mut agree = true;
            for (i, &x) in x_values.iter().enumerate() {
                let config = protocol_config(*n, *m, *delta0, rng.seed());
                let report = simulate_intercept(&config, x, *trials, &rng.derive(i as u64))?;
                agree &= report.agrees_within(3.0);
                rows.push(SweepRow {
                    attack: "intercept".into(),
                    n: *n,
                    m: *m,
                    delta: *delta0,
                    x: Some(x),
                    predicted: report.predicted_pass,
                    measured: report.measured_pass,
                    stderr: report.std_err,
                    trials: report.trials,
                });
            }
            Ok((rows, agree))
        }
        AttackScenario::Replacement {
            n,
            m,
            delta0_values,
            trials,
            seed,
            phi,
        } => {
            if delta0_values.is_empty() {
                return Err(Error::Validation("empty replacement grid".into()));
            }
            let phi_e = phi_state(phi, *n, *m)?;
            let rng = SeededRng::new(seed_override.unwrap_or(*seed));
            let mut rows = Vec::new();
            let mut agree = true;
            let mut deltas = delta0_values.clone();
            deltas.sort_unstable();
            let mut last_escape = f64::INFINITY;
            for (i, &delta0) in deltas.iter().enumerate() {
                let config = protocol_config(*n, *m, delta0, rng.seed());
                let report =
                    detection_stats_replacement(&phi_e, &config, *trials, &rng.derive(i as u64))?;
                agree &= report.per_test_mc.agrees_within(3.0);
                agree &= report.escape_mc.agrees_within(3.0);
                // escape probability must shrink as more copies are tested
                agree &= report.escape_mc.measured_pass <= last_escape + 3.0 * report.escape_mc.std_err;
                last_escape = report.escape_mc.measured_pass;
                rows.push(SweepRow {
                    attack: "replacement_per_test".into(),
                    n: *n,
                    m: *m,
                    delta: delta0,
                    x: None,
                    predicted: report.per_test_pass,
                    measured: report.per_test_mc.measured_pass,
                    stderr: report.per_test_mc.std_err,
                    trials: report.per_test_mc.trials,
                });
                rows.push(SweepRow {
                    attack: "replacement_escape".into(),
                    n: *n,
                    m: *m,
                    delta: delta0,
                    x: None,
                    predicted: report.faithful_escape,
                    measured: report.escape_mc.measured_pass,
                    stderr: report.escape_mc.std_err,
                    trials: report.escape_mc.trials,
                });
                // the closed form that reuses the row on every test, reported
                // for reference, never compared against the Monte Carlo
                rows.push(SweepRow {
                    attack: "replacement_formula_escape".into(),
                    n: *n,
                    m: *m,
                    delta: delta0,
                    x: None,
                    predicted: report.formula_escape,
                    measured: f64::NAN,
                    stderr: f64::NAN,
                    trials: 0,
                });
            }
            Ok((rows, agree))
        }
    }
}

fn sweep_seed(scenario: &AttackScenario, seed_override: Option<u64>) -> u64 {
    seed_override.unwrap_or(match scenario {
        AttackScenario::Intercept { seed, .. } => *seed,
        AttackScenario::Replacement { seed, .. } => *seed,
    })
}

pub fn cmd_attack(manifest: &RunManifest) -> Result<i32> {
    let scenario: AttackScenario = load_config(&manifest.config_path)?;
    let (rows, agree) = run_attack_scenario(&scenario, manifest.seed_override)?;
    let seed = sweep_seed(&scenario, manifest.seed_override);
    match manifest.format {
        OutputFormat::Csv | OutputFormat::Json => {
            let mut csv = format!("# schema_version=1 seed={seed}\n{SWEEP_CSV_HEADER}\n");
            for row in &rows {
                csv.push_str(&row.to_csv());
                csv.push('\n');
            }
            write_atomic(&manifest.out_dir.join("attack_sweep.csv"), csv.as_bytes())?;
        }
    }
    if manifest.format == OutputFormat::Json {
        let json = serde_json::json!({
            "schema_version": 1,
            "seed": seed,
            "rows": rows,
            "agreement": agree,
        });
        write_atomic(
            &manifest.out_dir.join("attack_sweep.json"),
            serde_json::to_string_pretty(&json)?.as_bytes(),
        )?;
    }
    for row in &rows {
        println!("{}", row.to_csv());
    }
    if agree {
        println!("verdict: predicted and measured agree within 3 standard errors");
        Ok(EXIT_OK)
    } else {
        println!("verdict: MEASUREMENTS DISAGREE with predictions");
        Ok(EXIT_VERIFICATION)
    }
}

// --- verify ------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyScenario {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_max_m")]
    pub max_m: usize,
    pub seed: u64,
    #[serde(default = "default_random_states")]
    pub random_states: usize,
    #[serde(default = "default_random_unitaries")]
    pub random_unitaries: usize,
    #[serde(default)]
    pub inject_corruption: bool,
}

fn default_max_n() -> usize {
    5
}
fn default_max_m() -> usize {
    4
}
fn default_random_states() -> usize {
    100
}
fn default_random_unitaries() -> usize {
    20
}

/// Run the verification battery for one scenario; shared by the CLI and the
/// C ABI.
pub fn run_verify_scenario(
    scenario: &VerifyScenario,
    seed_override: Option<u64>,
) -> Result<crate::theorems::VerificationReport> {
    let options = SuiteOptions {
        max_n: scenario.max_n,
        max_m: scenario.max_m,
        random_states: scenario.random_states,
        random_unitaries: scenario.random_unitaries,
        inject_corruption: scenario.inject_corruption,
    };
    let mut rng = SeededRng::new(seed_override.unwrap_or(scenario.seed));
    run_suite(&options, &mut rng)
}

pub fn cmd_verify(manifest: &RunManifest) -> Result<i32> {
    let scenario: VerifyScenario = load_config(&manifest.config_path)?;
    let report = run_verify_scenario(&scenario, manifest.seed_override)?;
    write_atomic(
        &manifest.out_dir.join("verification_report.json"),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    for check in &report.checks {
        println!(
            "{} {} {} residual={:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.params,
            check.residual
        );
    }
    Ok(if report.all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

// --- shared helpers for the acceptance suite -----------------------------

/// The intercept sweep the agreement criteria pin down: n=4, delta0=2,
/// x ∈ {1,2,3} against 1/3, 1/11, 1/55.
pub fn reference_intercept_scenario(trials: usize, seed: u64) -> AttackScenario {
    AttackScenario::Intercept {
        n: 4,
        m: 2,
        delta0: 2,
        x_values: vec![1, 2, 3],
        trials,
        seed,
    }
}

/// Exact reference predictions for the sweep above.
pub fn reference_intercept_predictions() -> Vec<f64> {
    vec![
        pass_probability_intercept(4, 2, 1).unwrap(),
        pass_probability_intercept(4, 2, 2).unwrap(),
        pass_probability_intercept(4, 2, 3).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::fixture;

    fn table1_scenario_json() -> String {
        serde_json::json!({
            "n": 4, "m": 3, "delta0": 1, "delta1": 1, "seed": 7,
            "votes": [1, 2, 1, 0],
            "fixture": {
                "ballots": fixture::ballot_rows(),
                "indices": fixture::INDICES,
            }
        })
        .to_string()
    }

    fn manifest_for(dir: &Path, config: &str) -> RunManifest {
        let config_path = dir.join("config.json");
        std::fs::write(&config_path, config).unwrap();
        RunManifest {
            config_path,
            seed_override: None,
            out_dir: dir.to_path_buf(),
            format: OutputFormat::Json,
        }
    }

    #[test]
    fn vote_command_reproduces_the_worked_example() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = manifest_for(dir.path(), &table1_scenario_json());
        let code = cmd_vote(&manifest).unwrap();
        assert_eq!(code, EXIT_OK);
        let transcript: Transcript = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("vote_transcript.json")).unwrap(),
        )
        .unwrap();
        let tally = transcript.tally.unwrap();
        assert_eq!(tally.box_sums, vec![2, 1, 0, 1]);
        assert_eq!(tally.candidate_counts, vec![1, 2, 1]);
        let summary = std::fs::read_to_string(dir.path().join("tally_summary.txt")).unwrap();
        assert!(summary.contains("[2, 1, 0, 1]"));
    }

    #[test]
    fn vote_command_rejects_single_voter_configs() {
        let dir = tempfile::tempdir().unwrap();
        let bad = serde_json::json!({
            "n": 1, "m": 3, "delta0": 1, "delta1": 1, "seed": 7, "votes": [0]
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &bad);
        assert!(matches!(cmd_vote(&manifest), Err(Error::Validation(_))));
    }

    #[test]
    fn vote_command_is_byte_deterministic() {
        let scenario = serde_json::json!({
            "n": 3, "m": 2, "delta0": 1, "delta1": 1, "seed": 11, "votes": [1, 0, 1]
        })
        .to_string();
        let dir_a = tempfile::tempdir().unwrap();
        cmd_vote(&manifest_for(dir_a.path(), &scenario)).unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        cmd_vote(&manifest_for(dir_b.path(), &scenario)).unwrap();
        let a = std::fs::read(dir_a.path().join("vote_transcript.json")).unwrap();
        let b = std::fs::read(dir_b.path().join("vote_transcript.json")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn attack_command_rejects_empty_grids() {
        let dir = tempfile::tempdir().unwrap();
        let bad = serde_json::json!({
            "attack": "intercept", "n": 4, "m": 2, "delta0": 2,
            "x_values": [], "trials": 10, "seed": 5
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &bad);
        assert!(matches!(cmd_attack(&manifest), Err(Error::Validation(_))));
    }

    #[test]
    fn attack_command_emits_rows_and_passes_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = serde_json::json!({
            "attack": "replacement", "n": 3, "m": 2,
            "delta0_values": [1, 2], "trials": 2000, "seed": 5,
            "phi": "all_zeros"
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &scenario);
        let code = cmd_attack(&manifest).unwrap();
        assert_eq!(code, EXIT_OK);
        let csv = std::fs::read_to_string(dir.path().join("attack_sweep.csv")).unwrap();
        assert!(csv.contains(SWEEP_CSV_HEADER));
        assert!(csv.contains("replacement_per_test,3,2,1"));
        assert!(csv.contains("replacement_formula_escape"));
    }

    #[test]
    fn verify_command_rejects_degenerate_ranges() {
        let dir = tempfile::tempdir().unwrap();
        let bad = serde_json::json!({"max_n": 1, "seed": 3}).to_string();
        let manifest = manifest_for(dir.path(), &bad);
        assert!(matches!(cmd_verify(&manifest), Err(Error::Validation(_))));
    }

    #[test]
    fn verify_command_flags_corruption_with_exit_4() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = serde_json::json!({
            "max_n": 3, "max_m": 2, "seed": 3,
            "random_states": 4, "random_unitaries": 2,
            "inject_corruption": true
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &scenario);
        assert_eq!(cmd_verify(&manifest).unwrap(), EXIT_VERIFICATION);
        let report = std::fs::read_to_string(dir.path().join("verification_report.json")).unwrap();
        assert!(report.contains("theorem1_corrupted_fixture"));
    }

    #[test]
    fn amc_command_runs_the_sum_example() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = serde_json::json!({
            "parties": 3, "input_counts": [1, 1, 1], "values": [[2], [3], [6]],
            "m": 7, "delta2": 1, "delta3": 1, "seed": 9,
            "mode": "exact", "ranking": true
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &scenario);
        assert_eq!(cmd_amc(&manifest).unwrap(), EXIT_OK);
        let result: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("amc_result.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(result["sum"], 11);
        assert_eq!(result["ranking"], serde_json::json!([6, 3, 2]));
        let mut revealed: Vec<u64> = result["anonymized"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        revealed.sort_unstable();
        assert_eq!(revealed, vec![2, 3, 6]);
    }

    #[test]
    fn amc_command_suggests_ideal_mode_past_the_cap() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = serde_json::json!({
            "parties": 8, "input_counts": vec![1; 8], "values": vec![vec![0]; 8],
            "m": 2, "delta2": 1, "delta3": 1, "seed": 9
        })
        .to_string();
        let manifest = manifest_for(dir.path(), &scenario);
        match cmd_amc(&manifest) {
            Err(Error::ResourceBudget { what, .. }) => assert!(what.contains("ideal_resource")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn seed_override_wins_over_config_seed() {
        let scenario = serde_json::json!({
            "n": 3, "m": 2, "delta0": 1, "delta1": 1, "seed": 11, "votes": [1, 0, 1]
        })
        .to_string();
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = manifest_for(dir.path(), &scenario);
        manifest.seed_override = Some(999);
        cmd_vote(&manifest).unwrap();
        let transcript: Transcript = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("vote_transcript.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(transcript.config.seed, 999);
    }
}
