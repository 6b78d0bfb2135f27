//! Sparse state-vector engine for n-particle, m-level systems.
//!
//! States are maps from basis tuples (one digit in `Z_m` per particle) to
//! complex amplitudes; absent keys are zero. The two resource states of the
//! voting protocol have naturally sparse supports — the zero-sum state
//! `|X_n⟩` has m^(n-1) terms and the singlet `|S_n⟩` has n! terms, against a
//! dense dimension of m^n — so a map representation keeps everything exact
//! at desk scale. Keys live in a `BTreeMap` so that iteration (and therefore
//! Born sampling under a fixed seed) is deterministic across platforms.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Amplitudes below this magnitude are dropped after unitary application.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance for algebraic identities (norms, unitarity) at desk scale.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Default cap on stored terms for state constructors.
pub const DEFAULT_SUPPORT_BUDGET: usize = 1 << 20;

/// Measurement basis: computational digits, or the discrete-Fourier rotation
/// of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Computational,
    Fourier,
}

/// One n-digit basis label; digit `k` belongs to particle `k`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisTuple(SmallVec<[u8; 8]>);

impl BasisTuple {
    pub fn new(digits: impl IntoIterator<Item = u8>) -> Self {
        Self(digits.into_iter().collect())
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn digit(&self, particle: usize) -> u8 {
        self.0[particle]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum_mod(&self, m: usize) -> u8 {
        (self.0.iter().map(|&d| d as usize).sum::<usize>() % m) as u8
    }

    pub fn all_equal(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    /// True when no digit repeats. For a tuple of length n over `Z_n` this
    /// is exactly the permutation condition.
    pub fn all_distinct(&self) -> bool {
        let mut seen = [false; 256];
        for &d in self.0.iter() {
            if seen[d as usize] {
                return false;
            }
            seen[d as usize] = true;
        }
        true
    }

    /// Copy with one digit replaced.
    fn with_digit(&self, particle: usize, digit: u8) -> Self {
        let mut out = self.0.clone();
        out[particle] = digit;
        Self(out)
    }
}

impl fmt::Debug for BasisTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "⟩")
    }
}

/// Number of inverted pairs `(i < j, seq[i] > seq[j])` of a distinct-entry
/// sequence; the sign `(-1)^τ` is the antisymmetric amplitude sign.
pub fn inverse_number(seq: &[usize]) -> Result<u64> {
    for (i, a) in seq.iter().enumerate() {
        if seq[i + 1..].contains(a) {
            return Err(Error::InvalidPermutation(format!(
                "entry {a} repeats in {seq:?}"
            )));
        }
    }
    let mut count = 0u64;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// An m×m unitary acting on a single particle, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl LocalUnitary {
    /// Validates `U·U† = I` within [`NORM_TOLERANCE`].
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}×{dim} entries, got {}",
                entries.len()
            )));
        }
        let u = Self { dim, entries };
        let deviation = u.unitarity_deviation();
        if deviation > NORM_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                entries[c * self.dim + r] = self.entry(r, c).conj();
            }
        }
        Self {
            dim: self.dim,
            entries,
        }
    }

    /// Max |(U·U† − I)_{rc}| over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut max = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    acc += self.entry(r, k) * self.entry(c, k).conj();
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                max = max.max((acc - expect).norm());
            }
        }
        max
    }
}

/// The m-level discrete Fourier transform: `entry[k][j] = exp(2πi·jk/m)/√m`.
///
/// Column `j` is the Fourier basis vector `|j'⟩` expanded over the
/// computational digits.
pub fn fourier_matrix(m: usize) -> Result<LocalUnitary> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "fourier matrix needs m ≥ 2, got {m}"
        )));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Vec::with_capacity(m * m);
    for k in 0..m {
        for j in 0..m {
            let phase = std::f64::consts::TAU * (j * k % m) as f64 / m as f64;
            entries.push(Complex64::from_polar(scale, phase));
        }
    }
    LocalUnitary::new(m, entries)
}

/// Sparse normalized state over `(Z_m)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    n: usize,
    m: usize,
    amps: BTreeMap<BasisTuple, Complex64>,
}

impl SparseState {
    /// Computational product state `|digits⟩`.
    pub fn basis_state(m: usize, digits: &[u8]) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDimension(format!("m must be ≥ 2, got {m}")));
        }
        if digits.is_empty() || digits.iter().any(|&d| (d as usize) >= m) {
            return Err(Error::DimensionMismatch(format!(
                "digits {digits:?} not all in Z_{m}"
            )));
        }
        let mut amps = BTreeMap::new();
        amps.insert(
            BasisTuple::new(digits.iter().copied()),
            Complex64::new(1.0, 0.0),
        );
        Ok(Self {
            n: digits.len(),
            m,
            amps,
        })
    }

    /// Build from explicit terms; duplicate tuples are summed. The result is
    /// renormalized, so callers may pass unnormalized superpositions.
    pub fn from_terms(
        n: usize,
        m: usize,
        terms: impl IntoIterator<Item = (BasisTuple, Complex64)>,
    ) -> Result<Self> {
        if n == 0 || m < 2 {
            return Err(Error::InvalidDimension(format!(
                "state shape n={n}, m={m} invalid"
            )));
        }
        let mut amps: BTreeMap<BasisTuple, Complex64> = BTreeMap::new();
        for (tuple, amp) in terms {
            if tuple.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "tuple {tuple:?} has length {}, expected {n}",
                    tuple.len()
                )));
            }
            if tuple.digits().iter().any(|&d| (d as usize) >= m) {
                return Err(Error::DimensionMismatch(format!(
                    "tuple {tuple:?} has digits outside Z_{m}"
                )));
            }
            *amps.entry(tuple).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = Self { n, m, amps };
        state.prune(PRUNE_THRESHOLD);
        state.renormalize()?;
        Ok(state)
    }

    /// Uniform superposition over the m^(n-1) tuples whose digit sum is
    /// `0 mod m`. This is the ballot-box resource state.
    pub fn chi(n: usize, m: usize) -> Result<Self> {
        Self::chi_with_budget(n, m, DEFAULT_SUPPORT_BUDGET)
    }

    pub fn chi_with_budget(n: usize, m: usize, budget: usize) -> Result<Self> {
        if n < 2 || m < 2 || m > 256 {
            return Err(Error::InvalidDimension(format!(
                "zero-sum state needs n ≥ 2 and 2 ≤ m ≤ 256, got n={n}, m={m}"
            )));
        }
        let support = (m as u128).checked_pow(n as u32 - 1).unwrap_or(u128::MAX);
        if support > budget as u128 {
            return Err(Error::ResourceBudget {
                what: format!("|X_{n}⟩ with m={m}"),
                required: support.min(usize::MAX as u128) as usize,
                budget,
            });
        }
        let support = support as usize;
        let amp = Complex64::new(1.0 / (support as f64).sqrt(), 0.0);
        let mut amps = BTreeMap::new();
        let mut prefix = vec![0u8; n - 1];
        loop {
            let sum: usize = prefix.iter().map(|&d| d as usize).sum();
            let last = ((m - sum % m) % m) as u8;
            let tuple = BasisTuple::new(prefix.iter().copied().chain(std::iter::once(last)));
            amps.insert(tuple, amp);
            // next tuple in base-m counting order
            let mut k = n - 1;
            loop {
                if k == 0 {
                    return Ok(Self { n, m, amps });
                }
                k -= 1;
                prefix[k] += 1;
                if (prefix[k] as usize) < m {
                    break;
                }
                prefix[k] = 0;
            }
        }
    }

    /// The n-level n-particle singlet: amplitude `(-1)^τ(S)/√(n!)` on every
    /// permutation `S` of `Z_n`.
    pub fn singlet(n: usize) -> Result<Self> {
        Self::singlet_with_budget(n, DEFAULT_SUPPORT_BUDGET)
    }

    pub fn singlet_with_budget(n: usize, budget: usize) -> Result<Self> {
        if n < 2 || n > 256 {
            return Err(Error::InvalidDimension(format!(
                "singlet state needs 2 ≤ n ≤ 256, got n={n}"
            )));
        }
        let support: usize = (1..=n).product();
        if support > budget {
            return Err(Error::ResourceBudget {
                what: format!("|S_{n}⟩"),
                required: support,
                budget,
            });
        }
        let scale = 1.0 / (support as f64).sqrt();
        let mut amps = BTreeMap::new();
        for perm in (0..n).permutations(n) {
            let tau = inverse_number(&perm).expect("permutation entries are distinct");
            let sign = if tau % 2 == 0 { scale } else { -scale };
            let tuple = BasisTuple::new(perm.iter().map(|&d| d as u8));
            amps.insert(tuple, Complex64::new(sign, 0.0));
        }
        Ok(Self { n, m: n, amps })
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.m
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, tuple: &BasisTuple) -> Complex64 {
        self.amps
            .get(tuple)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisTuple, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    fn check_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(())
    }

    fn prune(&mut self, threshold: f64) {
        self.amps.retain(|_, a| a.norm() >= threshold);
    }

    fn renormalize(&mut self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if norm_sqr < PRUNE_THRESHOLD {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for a in self.amps.values_mut() {
            *a *= inv;
        }
        Ok(())
    }

    /// Apply `u` to one tensor factor. Output is pruned at
    /// [`PRUNE_THRESHOLD`] and renormalized.
    pub fn apply_local_unitary(&self, u: &LocalUnitary, particle: usize) -> Result<Self> {
        if particle >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "particle {particle} out of range for n={}",
                self.n
            )));
        }
        if u.dim() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "unitary dimension {} does not match m={}",
                u.dim(),
                self.m
            )));
        }
        let mut amps: BTreeMap<BasisTuple, Complex64> = BTreeMap::new();
        for (tuple, amp) in &self.amps {
            let col = tuple.digit(particle) as usize;
            for row in 0..self.m {
                let coeff = u.entry(row, col);
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let target = tuple.with_digit(particle, row as u8);
                *amps.entry(target).or_insert(Complex64::new(0.0, 0.0)) += coeff * amp;
            }
        }
        let mut out = Self {
            n: self.n,
            m: self.m,
            amps,
        };
        out.prune(PRUNE_THRESHOLD);
        out.renormalize()?;
        Ok(out)
    }

    /// Apply the same local unitary to every particle.
    pub fn apply_to_all(&self, u: &LocalUnitary) -> Result<Self> {
        let mut state = self.clone();
        for p in 0..self.n {
            state = state.apply_local_unitary(u, p)?;
        }
        Ok(state)
    }

    /// Rotate into the Fourier measurement frame (apply the inverse Fourier
    /// transform to every particle).
    pub fn to_fourier_frame(&self) -> Result<Self> {
        self.apply_to_all(&fourier_matrix(self.m)?.adjoint())
    }

    /// Born-rule measurement of all particles.
    ///
    /// In the Fourier basis the inverse transform is applied to every
    /// particle first, then digits are sampled computationally; outcomes and
    /// the collapsed product state are expressed in that measured frame.
    pub fn measure_all(&self, basis: Basis, rng: &mut SeededRng) -> Result<(BasisTuple, Self)> {
        self.check_normalized()?;
        let frame = match basis {
            Basis::Computational => self.clone(),
            Basis::Fourier => self.to_fourier_frame()?,
        };
        let total = frame.norm_sqr();
        let mut budget = rng.f64() * total;
        let mut picked: Option<&BasisTuple> = None;
        for (tuple, amp) in &frame.amps {
            budget -= amp.norm_sqr();
            picked = Some(tuple);
            if budget <= 0.0 {
                break;
            }
        }
        let outcome = picked.expect("normalized state has support").clone();
        let collapsed =
            Self::basis_state(self.m, outcome.digits()).expect("outcome digits are in range");
        Ok((outcome, collapsed))
    }

    /// Born-rule measurement of a single particle; the collapsed remainder is
    /// renormalized. With `Basis::Fourier` the inverse transform is applied to
    /// that particle first, so the collapsed state (and later measurements of
    /// other particles) stay consistent with [`SparseState::measure_all`].
    pub fn measure_particle(
        &self,
        particle: usize,
        basis: Basis,
        rng: &mut SeededRng,
    ) -> Result<(u8, Self)> {
        if particle >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "particle {particle} out of range for n={}",
                self.n
            )));
        }
        self.check_normalized()?;
        let frame = match basis {
            Basis::Computational => self.clone(),
            Basis::Fourier => {
                self.apply_local_unitary(&fourier_matrix(self.m)?.adjoint(), particle)?
            }
        };
        let mut marginals = vec![0.0f64; self.m];
        for (tuple, amp) in &frame.amps {
            marginals[tuple.digit(particle) as usize] += amp.norm_sqr();
        }
        let total: f64 = marginals.iter().sum();
        let mut budget = rng.f64() * total;
        let mut outcome = 0u8;
        for (digit, p) in marginals.iter().enumerate() {
            budget -= p;
            outcome = digit as u8;
            if budget <= 0.0 && *p > 0.0 {
                break;
            }
        }
        let mut amps = BTreeMap::new();
        for (tuple, amp) in &frame.amps {
            if tuple.digit(particle) == outcome {
                amps.insert(tuple.clone(), *amp);
            }
        }
        let mut collapsed = Self {
            n: self.n,
            m: self.m,
            amps,
        };
        collapsed.renormalize()?;
        Ok((outcome, collapsed))
    }

    /// `⟨self|other⟩` over the sparse supports.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::DimensionMismatch(format!(
                "states have shapes (n={}, m={}) and (n={}, m={})",
                self.n, self.m, other.n, other.m
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (tuple, a) in self.amps.iter() {
            if let Some(b) = other.amps.get(tuple) {
                acc += a.conj() * b;
            }
        }
        Ok(acc)
    }

    /// Probability mass on tuples satisfying `pred` (exact, no sampling).
    pub fn mass_where(&self, pred: impl Fn(&BasisTuple) -> bool) -> f64 {
        self.amps
            .iter()
            .filter(|(t, _)| pred(t))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Serializable dump: `{n, m, terms: [{digits, re, im}]}`.
    pub fn to_dump(&self) -> StateDump {
        StateDump {
            n: self.n,
            m: self.m,
            terms: self
                .amps
                .iter()
                .map(|(t, a)| TermDump {
                    digits: t.digits().to_vec(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &StateDump) -> Result<Self> {
        if dump.n == 0 || dump.m < 2 {
            return Err(Error::InvalidDimension(format!(
                "dump shape n={}, m={} invalid",
                dump.n, dump.m
            )));
        }
        let mut amps = BTreeMap::new();
        for term in &dump.terms {
            if term.digits.len() != dump.n
                || term.digits.iter().any(|&d| (d as usize) >= dump.m)
            {
                return Err(Error::DimensionMismatch(format!(
                    "dump term digits {:?} invalid for (n={}, m={})",
                    term.digits, dump.n, dump.m
                )));
            }
            amps.insert(
                BasisTuple::new(term.digits.iter().copied()),
                Complex64::new(term.re, term.im),
            );
        }
        let state = Self {
            n: dump.n,
            m: dump.m,
            amps,
        };
        state.check_normalized()?;
        Ok(state)
    }
}

/// Golden-file representation of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub n: usize,
    pub m: usize,
    pub terms: Vec<TermDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    pub digits: Vec<u8>,
    pub re: f64,
    pub im: f64,
}
