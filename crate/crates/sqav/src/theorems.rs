//! Numerical checkers for the algebraic facts behind the protocol's security
//! tests.
//!
//! Everything here is exact linear algebra over small dimensions: probability
//! masses are summed straight from sparse amplitudes (no sampling), ranks and
//! null spaces come from singular values, and each checker has a brute-force
//! flavor that makes it an independent oracle for the protocol layer above.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{fourier_matrix, BasisTuple, LocalUnitary, SparseState};
use crate::rng::SeededRng;

/// Relative singular-value threshold for numerical rank decisions.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Outcome of one dual-basis state check.
///
/// `epsilon_c` is the exact probability mass violating the computational
/// condition, `epsilon_f` the Fourier one, `fidelity` the overlap magnitude
/// with the ideal resource state.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ViolationReport {
    pub epsilon_c: f64,
    pub epsilon_f: f64,
    pub fidelity: f64,
}

/// Zero-sum-state check: computational outcomes must sum to `0 mod m` and
/// Fourier outcomes must all agree; both hold with certainty iff the state is
/// the zero-sum resource state.
pub fn check_theorem1(state: &SparseState) -> Result<ViolationReport> {
    let m = state.levels();
    let epsilon_c = state.mass_where(|t| t.sum_mod(m) != 0);
    let epsilon_f = state.to_fourier_frame()?.mass_where(|t| !t.all_equal());
    let target = SparseState::chi(state.particles(), m)?;
    let fidelity = target.inner_product(state)?.norm().min(1.0);
    Ok(ViolationReport {
        epsilon_c,
        epsilon_f,
        fidelity,
    })
}

/// Singlet check: outcomes must form a permutation in both bases; both hold
/// with certainty iff the state is the singlet (up to a global phase).
pub fn check_theorem2(state: &SparseState) -> Result<ViolationReport> {
    let n = state.particles();
    if state.levels() != n {
        return Err(Error::InvalidDimension(format!(
            "singlet check needs n = m, got n={n}, m={}",
            state.levels()
        )));
    }
    let epsilon_c = state.mass_where(|t| !t.all_distinct());
    let epsilon_f = state.to_fourier_frame()?.mass_where(|t| !t.all_distinct());
    let target = SparseState::singlet(n)?;
    let fidelity = target.inner_product(state)?.norm().min(1.0);
    Ok(ViolationReport {
        epsilon_c,
        epsilon_f,
        fidelity,
    })
}

pub fn to_matrix(u: &LocalUnitary) -> DMatrix<Complex64> {
    DMatrix::from_fn(u.dim(), u.dim(), |r, c| u.entry(r, c))
}

pub fn determinant(u: &LocalUnitary) -> Complex64 {
    to_matrix(u).determinant()
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix, with the phases
/// of R's diagonal folded into Q.
pub fn random_unitary(dim: usize, rng: &mut SeededRng) -> Result<LocalUnitary> {
    if dim == 0 {
        return Err(Error::InvalidDimension("unitary dimension 0".into()));
    }
    let z = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.normal(), rng.normal()));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for rix in 0..dim {
            q[(rix, c)] *= phase;
        }
    }
    let entries: Vec<Complex64> = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| q[(r, c)])
        .collect();
    LocalUnitary::new(dim, entries)
}

/// Total antisymmetry under collective rotation: `U⊗…⊗U` maps the singlet to
/// `det(U)` times itself. Returns the residual norm
/// `‖U^⊗n|S_n⟩ − det(U)|S_n⟩‖`.
pub fn check_property1(u: &LocalUnitary) -> Result<f64> {
    let n = u.dim();
    let singlet = SparseState::singlet(n)?;
    let rotated = singlet.apply_to_all(u)?;
    let det = determinant(u);
    let mut dist_sqr = 0.0;
    for (t, a) in singlet.terms() {
        dist_sqr += (rotated.amplitude(t) - det * a).norm_sqr();
    }
    for (t, a) in rotated.terms() {
        if singlet.amplitude(t).norm_sqr() == 0.0 {
            dist_sqr += a.norm_sqr();
        }
    }
    Ok(dist_sqr.sqrt())
}

/// Rank check for the `n×q` phase matrix `A[j][k] = exp(2πi·j·s_k/n)`.
///
/// The first q rows form a Vandermonde matrix in the distinct roots of unity
/// `exp(2πi·s_k/n)`, so full column rank is expected; returns true iff the
/// numerical rank equals q (only the trivial null vector).
pub fn lemma1_check(n: usize, s_list: &[usize]) -> Result<bool> {
    let q = s_list.len();
    if q == 0 || q > n {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ q ≤ n, got q={q}, n={n}"
        )));
    }
    for (i, s) in s_list.iter().enumerate() {
        if *s >= n {
            return Err(Error::InvalidDimension(format!("s={s} outside Z_{n}")));
        }
        if s_list[i + 1..].contains(s) {
            return Err(Error::InvalidPermutation(format!(
                "entry {s} repeats in {s_list:?}"
            )));
        }
    }
    let a = DMatrix::from_fn(n, q, |j, k| {
        Complex64::from_polar(
            1.0,
            std::f64::consts::TAU * ((j * s_list[k]) % n) as f64 / n as f64,
        )
    });
    Ok(numerical_rank(&a) == q)
}

fn numerical_rank(a: &DMatrix<Complex64>) -> usize {
    let svd = a.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_THRESHOLD * max)
        .count()
}

/// Null space of the antisymmetrized phase constraint system, indexed by the
/// permutations of one m-element subset of `Z_n`.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    /// Permutations of the subset, lexicographically ordered; coefficient k
    /// of every basis vector belongs to permutation k.
    pub permutations: Vec<Vec<usize>>,
    /// Orthonormal basis of the null space.
    pub basis: Vec<Vec<Complex64>>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// True iff the space is one-dimensional and spanned by the all-equal
    /// vector (every coefficient identical up to the overall phase).
    pub fn is_all_equal_span(&self, tol: f64) -> bool {
        if self.basis.len() != 1 {
            return false;
        }
        let v = &self.basis[0];
        let first = v[0];
        v.iter().all(|&x| (x - first).norm() <= tol)
    }

    /// Magnitude of the (common) coefficient of the unit-norm all-equal
    /// solution; equals `1/√(count)` when the span is all-equal.
    pub fn equal_coefficient_magnitude(&self) -> Option<f64> {
        if self.basis.len() == 1 {
            Some(self.basis[0][0].norm())
        } else {
            None
        }
    }
}

fn validate_subset(n: usize, m: usize, w_subset: &[usize]) -> Result<Vec<usize>> {
    if m < 2 || m > n {
        return Err(Error::InvalidDimension(format!(
            "need 2 ≤ m ≤ n, got m={m}, n={n}"
        )));
    }
    if w_subset.len() != m {
        return Err(Error::InvalidDimension(format!(
            "subset {w_subset:?} has size {}, expected m={m}",
            w_subset.len()
        )));
    }
    let mut w = w_subset.to_vec();
    w.sort_unstable();
    w.dedup();
    if w.len() != m || w.iter().any(|&x| x >= n) {
        return Err(Error::InvalidPermutation(format!(
            "subset {w_subset:?} is not an m-combination of Z_{n}"
        )));
    }
    Ok(w)
}

/// Assembles the linear system demanding that the antisymmetrized phase sum
/// vanish on every repeated-entry tuple, and solves for its null space.
///
/// One unknown per permutation `S` of `w_subset`; one equation per tuple
/// `t ∈ Z_n^m` with a repeated entry, with coefficient
/// `(-1)^τ(S) · Π_j exp(2πi·s_j·t_j/n)`. The expected outcome is a
/// one-dimensional space spanned by the all-equal vector.
pub fn lemma2_solution_space(n: usize, m: usize, w_subset: &[usize]) -> Result<SolutionSpace> {
    let w = validate_subset(n, m, w_subset)?;
    let perms: Vec<Vec<usize>> = w.iter().copied().permutations(m).collect();
    let repeated_tuples: Vec<Vec<usize>> = (0..m)
        .map(|_| 0..n)
        .multi_cartesian_product()
        .filter(|t| t.iter().enumerate().any(|(i, x)| t[i + 1..].contains(x)))
        .collect();
    if repeated_tuples.len() < perms.len() {
        return Err(Error::InvalidDimension(format!(
            "underdetermined system: {} constraints for {} unknowns",
            repeated_tuples.len(),
            perms.len()
        )));
    }
    let signs: Vec<f64> = perms
        .iter()
        .map(|p| {
            if inverse_number_of(p) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let a = DMatrix::from_fn(repeated_tuples.len(), perms.len(), |row, col| {
        let t = &repeated_tuples[row];
        let s = &perms[col];
        let phase: f64 = s
            .iter()
            .zip(t.iter())
            .map(|(&sj, &tj)| (sj * tj) as f64)
            .sum::<f64>()
            * std::f64::consts::TAU
            / n as f64;
        Complex64::from_polar(signs[col], phase)
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut basis = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= RANK_THRESHOLD * max {
            let row = v_t.row(i);
            basis.push(row.iter().map(|z| z.conj()).collect());
        }
    }
    Ok(SolutionSpace {
        permutations: perms,
        basis,
    })
}

fn inverse_number_of(seq: &[usize]) -> u64 {
    crate::qstate::inverse_number(seq).expect("permutations have distinct entries")
}

/// Vector-valued version: each coordinate obeys the same constraint system,
/// so the check runs per coordinate and demands the all-equal span each time.
pub fn corollary1_check(n: usize, m: usize, w_subset: &[usize], vector_dim: usize) -> Result<bool> {
    if vector_dim == 0 {
        return Err(Error::InvalidDimension("vector dimension 0".into()));
    }
    for _ in 0..vector_dim {
        let space = lemma2_solution_space(n, m, w_subset)?;
        if !space.is_all_equal_span(RANK_THRESHOLD) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Random normalized state with complex-Gaussian amplitudes on every tuple.
pub fn random_state(n: usize, m: usize, rng: &mut SeededRng) -> Result<SparseState> {
    let mut terms = Vec::new();
    let dim = m.pow(n as u32);
    for code in 0..dim {
        let mut digits = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            digits.push((rest % m) as u8);
            rest /= m;
        }
        terms.push((
            BasisTuple::new(digits),
            Complex64::new(rng.normal(), rng.normal()),
        ));
    }
    SparseState::from_terms(n, m, terms)
}

/// Member of the Fourier-rotated antisymmetric family:
/// `Σ_S (-1)^τ(S) β_S F^⊗n|S⟩` for caller-supplied coefficients, `S` ranging
/// over the permutations of `Z_n` in lexicographic order. These states always
/// satisfy the Fourier permutation condition; the computational condition
/// then forces all β equal.
pub fn antisymmetric_family_state(n: usize, betas: &[Complex64]) -> Result<SparseState> {
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    if betas.len() != perms.len() {
        return Err(Error::DimensionMismatch(format!(
            "need {} coefficients, got {}",
            perms.len(),
            betas.len()
        )));
    }
    let terms = perms.iter().zip(betas).map(|(p, beta)| {
        let sign = if inverse_number_of(p) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (BasisTuple::new(p.iter().map(|&d| d as u8)), beta * sign)
    });
    let unrotated = SparseState::from_terms(n, n, terms)?;
    unrotated.apply_to_all(&fourier_matrix(n)?)
}

// --- verification suite ------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub all_pass: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub max_n: usize,
    pub max_m: usize,
    pub random_states: usize,
    pub random_unitaries: usize,
    /// Inject a deliberately corrupted resource state so the corresponding
    /// check fails; used to exercise failure reporting.
    pub inject_corruption: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            max_n: 5,
            max_m: 4,
            random_states: 100,
            random_unitaries: 20,
            inject_corruption: false,
        }
    }
}

fn record(
    checks: &mut Vec<CheckRecord>,
    name: &str,
    params: serde_json::Value,
    residual: f64,
    tol: f64,
) {
    checks.push(CheckRecord {
        name: name.to_string(),
        params,
        residual,
        pass: residual <= tol,
    });
}

/// Runs the whole battery and produces the JSON-serializable report.
pub fn run_suite(options: &SuiteOptions, rng: &mut SeededRng) -> Result<VerificationReport> {
    if options.max_n < 2 || options.max_m < 2 {
        return Err(Error::Validation(format!(
            "suite ranges must start at 2, got max_n={}, max_m={}",
            options.max_n, options.max_m
        )));
    }
    let mut checks = Vec::new();

    // forward direction on the exact resource states
    for n in 2..=options.max_n {
        for m in 2..=options.max_m {
            let report = check_theorem1(&SparseState::chi(n, m)?)?;
            let residual = report
                .epsilon_c
                .max(report.epsilon_f)
                .max((report.fidelity - 1.0).abs());
            record(
                &mut checks,
                "theorem1_forward",
                serde_json::json!({"n": n, "m": m}),
                residual,
                1e-10,
            );
        }
        let report = check_theorem2(&SparseState::singlet(n)?)?;
        let residual = report
            .epsilon_c
            .max(report.epsilon_f)
            .max((report.fidelity - 1.0).abs());
        record(
            &mut checks,
            "theorem2_forward",
            serde_json::json!({"n": n}),
            residual,
            1e-10,
        );
    }

    // converse direction, sampled: zero violation mass must imply fidelity 1
    let mut converse_rng = rng.derive(1);
    let mut violations = 0usize;
    for _ in 0..options.random_states {
        let state = random_state(3, 2, &mut converse_rng)?;
        let r = check_theorem1(&state)?;
        if r.epsilon_c <= 1e-8 && r.epsilon_f <= 1e-8 && (r.fidelity - 1.0).abs() > 1e-8 {
            violations += 1;
        }
    }
    record(
        &mut checks,
        "theorem1_converse_sampled",
        serde_json::json!({"n": 3, "m": 2, "samples": options.random_states}),
        violations as f64,
        0.0,
    );

    let mut family_rng = rng.derive(2);
    let mut violations = 0usize;
    for n in 2..=options.max_n.min(4) {
        let count: usize = (1..=n).product();
        for _ in 0..options.random_states / 4 {
            let betas: Vec<Complex64> = (0..count)
                .map(|_| Complex64::new(family_rng.normal(), family_rng.normal()))
                .collect();
            let state = antisymmetric_family_state(n, &betas)?;
            let r = check_theorem2(&state)?;
            if r.epsilon_f > 1e-8 {
                violations += 1; // family satisfies the Fourier condition by construction
            }
            if r.epsilon_c <= 1e-8 && (r.fidelity - 1.0).abs() > 1e-8 {
                violations += 1;
            }
        }
        // the all-equal member is the singlet itself, up to a phase
        let equal = vec![Complex64::new(1.0, 0.0); count];
        let state = antisymmetric_family_state(n, &equal)?;
        let r = check_theorem2(&state)?;
        if r.epsilon_c > 1e-10 || r.epsilon_f > 1e-10 || (r.fidelity - 1.0).abs() > 1e-10 {
            violations += 1;
        }
    }
    record(
        &mut checks,
        "theorem2_converse_family",
        serde_json::json!({"max_n": options.max_n.min(4)}),
        violations as f64,
        0.0,
    );

    // collective rotation invariance
    let f2 = fourier_matrix(2)?;
    let det = determinant(&f2);
    let exact_residual = check_property1(&f2)?.max((det - Complex64::new(-1.0, 0.0)).norm());
    record(
        &mut checks,
        "property1_fourier_pair",
        serde_json::json!({"n": 2}),
        exact_residual,
        1e-10,
    );
    let mut unitary_rng = rng.derive(3);
    for n in 2..=options.max_n.min(4) {
        let mut worst = 0.0f64;
        for _ in 0..options.random_unitaries {
            let u = random_unitary(n, &mut unitary_rng)?;
            worst = worst.max(check_property1(&u)?);
        }
        record(
            &mut checks,
            "property1_random_unitaries",
            serde_json::json!({"n": n, "count": options.random_unitaries}),
            worst,
            1e-9,
        );
    }

    // exhaustive rank / null-space structure
    for n in 2..=options.max_n {
        for q in 1..=n {
            let mut all_full_rank = true;
            for s_list in (0..n).combinations(q) {
                all_full_rank &= lemma1_check(n, &s_list)?;
            }
            record(
                &mut checks,
                "lemma1_full_rank",
                serde_json::json!({"n": n, "q": q}),
                if all_full_rank { 0.0 } else { 1.0 },
                0.0,
            );
        }
        for m in 2..=n {
            let mut bad_subsets = 0usize;
            let mut coeff_residual = 0.0f64;
            for w in (0..n).combinations(m) {
                let space = lemma2_solution_space(n, m, &w)?;
                if !space.is_all_equal_span(RANK_THRESHOLD) {
                    bad_subsets += 1;
                } else if m == n {
                    let expected = 1.0 / ((1..=n).product::<usize>() as f64).sqrt();
                    let got = space.equal_coefficient_magnitude().unwrap();
                    coeff_residual = coeff_residual.max((got - expected).abs());
                }
            }
            record(
                &mut checks,
                "lemma2_all_equal_span",
                serde_json::json!({"n": n, "m": m}),
                bad_subsets as f64,
                0.0,
            );
            if m == n {
                record(
                    &mut checks,
                    "lemma2_normalized_coefficient",
                    serde_json::json!({"n": n}),
                    coeff_residual,
                    1e-8,
                );
            }
        }
    }
    for (n, m, dim) in [(3usize, 2usize, 2usize), (4, 3, 2)] {
        let w: Vec<usize> = (0..m).collect();
        let ok = corollary1_check(n, m, &w, dim)?;
        record(
            &mut checks,
            "corollary1_vector_valued",
            serde_json::json!({"n": n, "m": m, "vector_dim": dim}),
            if ok { 0.0 } else { 1.0 },
            0.0,
        );
    }

    if options.inject_corruption {
        // flip one amplitude's sign in the zero-sum state; the Fourier
        // condition must notice
        let clean = SparseState::chi(3, 2)?;
        let mut terms: Vec<(BasisTuple, Complex64)> =
            clean.terms().map(|(t, a)| (t.clone(), *a)).collect();
        terms[0].1 = -terms[0].1;
        let corrupted = SparseState::from_terms(3, 2, terms)?;
        let r = check_theorem1(&corrupted)?;
        let residual = r.epsilon_c.max(r.epsilon_f).max((r.fidelity - 1.0).abs());
        record(
            &mut checks,
            "theorem1_corrupted_fixture",
            serde_json::json!({"n": 3, "m": 2}),
            residual,
            1e-10,
        );
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        schema_version: 1,
        seed: rng.seed(),
        checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theorem1_on_resource_state_is_clean() {
        for n in 2..=5 {
            for m in 2..=4 {
                let r = check_theorem1(&SparseState::chi(n, m).unwrap()).unwrap();
                assert!(r.epsilon_c < 1e-10);
                assert!(r.epsilon_f < 1e-10);
                assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn theorem1_on_product_zero_state() {
        // |000⟩ over m=2: sum condition holds, Fourier mass spreads uniformly
        let zeros = SparseState::basis_state(2, &[0, 0, 0]).unwrap();
        let r = check_theorem1(&zeros).unwrap();
        assert_abs_diff_eq!(r.epsilon_c, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.epsilon_f, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(r.fidelity, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn theorem1_detects_sign_flip() {
        let clean = SparseState::chi(3, 2).unwrap();
        let mut terms: Vec<_> = clean.terms().map(|(t, a)| (t.clone(), *a)).collect();
        terms[0].1 = -terms[0].1;
        let corrupted = SparseState::from_terms(3, 2, terms).unwrap();
        let r = check_theorem1(&corrupted).unwrap();
        assert!(r.epsilon_f > 0.0);
        assert!(r.fidelity < 1.0);
        assert!(r.epsilon_c < 1e-12, "sign flips keep the support");
    }

    #[test]
    fn theorem2_on_singlet_is_clean() {
        for n in 2..=5 {
            let r = check_theorem2(&SparseState::singlet(n).unwrap()).unwrap();
            assert!(r.epsilon_c < 1e-10);
            assert!(r.epsilon_f < 1e-10);
            assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn theorem2_on_single_permutation_state() {
        for n in 2..=4 {
            let digits: Vec<u8> = (0..n as u8).collect();
            let state = SparseState::basis_state(n, &digits).unwrap();
            let r = check_theorem2(&state).unwrap();
            assert_abs_diff_eq!(r.epsilon_c, 0.0, epsilon = 1e-12);
            assert!(r.epsilon_f > 0.0);
            let expect = 1.0 / ((1..=n).product::<usize>() as f64).sqrt();
            assert_abs_diff_eq!(r.fidelity, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn theorem2_rejects_rectangular_shape() {
        let state = SparseState::chi(3, 2).unwrap();
        assert!(check_theorem2(&state).is_err());
    }

    #[test]
    fn property1_identity_and_fourier() {
        let id = LocalUnitary::identity(3);
        assert!(check_property1(&id).unwrap() < 1e-12);
        assert_abs_diff_eq!(determinant(&id).re, 1.0, epsilon = 1e-12);

        // the two-level Fourier matrix negates the pair singlet
        let f = fourier_matrix(2).unwrap();
        assert!(check_property1(&f).unwrap() < 1e-10);
        let det = determinant(&f);
        assert_abs_diff_eq!(det.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-12);
        let s = SparseState::singlet(2).unwrap();
        let rotated = s.apply_to_all(&f).unwrap();
        for (t, a) in s.terms() {
            assert!((rotated.amplitude(t) + a).norm() < 1e-10);
        }
    }

    #[test]
    fn property1_random_unitaries_small() {
        let mut rng = SeededRng::new(31);
        for n in 2..=3 {
            for _ in 0..20 {
                let u = random_unitary(n, &mut rng).unwrap();
                assert!(check_property1(&u).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn random_unitary_is_unitary_and_seeded() {
        let mut a = SeededRng::new(8);
        let mut b = SeededRng::new(8);
        let ua = random_unitary(4, &mut a).unwrap();
        let ub = random_unitary(4, &mut b).unwrap();
        assert!(ua.unitarity_deviation() < 1e-10);
        for r in 0..4 {
            for c in 0..4 {
                assert!((ua.entry(r, c) - ub.entry(r, c)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn lemma1_examples() {
        assert!(lemma1_check(3, &[0, 1]).unwrap());
        assert!(lemma1_check(4, &[0, 1, 2, 3]).unwrap());
        assert!(matches!(
            lemma1_check(3, &[0, 0]),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn lemma2_base_case() {
        let space = lemma2_solution_space(3, 2, &[0, 1]).unwrap();
        assert_eq!(space.dimension(), 1);
        assert!(space.is_all_equal_span(1e-8));
        assert_eq!(space.permutations.len(), 2);
    }

    #[test]
    fn lemma2_full_case_n3() {
        let space = lemma2_solution_space(3, 3, &[0, 1, 2]).unwrap();
        assert_eq!(space.dimension(), 1);
        assert!(space.is_all_equal_span(1e-8));
        assert_eq!(space.permutations.len(), 6);
        let got = space.equal_coefficient_magnitude().unwrap();
        assert_abs_diff_eq!(got, 1.0 / 6f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn lemma2_partial_case_n4() {
        let space = lemma2_solution_space(4, 2, &[1, 3]).unwrap();
        assert_eq!(space.dimension(), 1);
        assert!(space.is_all_equal_span(1e-8));
    }

    #[test]
    fn lemma2_rejects_bad_subset() {
        assert!(lemma2_solution_space(3, 2, &[0, 1, 2]).is_err());
        assert!(lemma2_solution_space(3, 2, &[0, 0]).is_err());
        assert!(lemma2_solution_space(3, 1, &[0]).is_err());
    }

    #[test]
    fn corollary1_reduces_to_lemma2_for_scalars() {
        assert!(corollary1_check(3, 2, &[0, 1], 1).unwrap());
        assert!(corollary1_check(3, 2, &[0, 1], 2).unwrap());
        assert!(corollary1_check(4, 3, &[0, 1, 2], 2).unwrap());
    }

    #[test]
    fn antisymmetric_family_satisfies_fourier_condition() {
        let mut rng = SeededRng::new(77);
        for n in 2..=4 {
            let count: usize = (1..=n).product();
            let betas: Vec<Complex64> = (0..count)
                .map(|_| Complex64::new(rng.normal(), rng.normal()))
                .collect();
            let state = antisymmetric_family_state(n, &betas).unwrap();
            let r = check_theorem2(&state).unwrap();
            assert!(r.epsilon_f < 1e-10, "n={n}: family breaks Fourier condition");
        }
    }

    #[test]
    fn suite_passes_on_defaults() {
        let mut rng = SeededRng::new(4242);
        let opts = SuiteOptions {
            max_n: 4,
            max_m: 3,
            random_states: 20,
            random_unitaries: 5,
            inject_corruption: false,
        };
        let report = run_suite(&opts, &mut rng).unwrap();
        assert!(
            report.all_pass,
            "failing checks: {:?}",
            report.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
    }

    #[test]
    fn suite_flags_injected_corruption() {
        let mut rng = SeededRng::new(4242);
        let opts = SuiteOptions {
            max_n: 3,
            max_m: 2,
            random_states: 5,
            random_unitaries: 2,
            inject_corruption: true,
        };
        let report = run_suite(&opts, &mut rng).unwrap();
        assert!(!report.all_pass);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "theorem1_corrupted_fixture" && !c.pass));
    }
}
