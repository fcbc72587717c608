//! Uniform-amplitude states and the AME property.
//!
//! A state is stored only through its support: the set of computational basis
//! kets with nonzero amplitude, each carrying amplitude `1/sqrt(|kets|)` and
//! zero phase. For minimal-support states the phases cannot affect whether
//! the state is AME, so no phase data exists to be inconsistent.
//!
//! Two verifiers are provided. [`verify_ame_combinatorial`] checks projection
//! conditions on the ket list and applies only to minimal-support states.
//! [`verify_ame_partial_trace`] builds every reduced density matrix exactly
//! (integer numerators over `|kets|`) and compares it with the maximally mixed
//! state.

use std::collections::HashMap;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{Code, CodeError, Symbol};
use crate::subsets::{checked_pow, Subsets};

/// Default bound on `d^floor(n/2)` for the partial-trace oracle.
pub const DEFAULT_TRACE_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmeError {
    #[error("state has no kets")]
    EmptyState,
    #[error("state needs at least two sites")]
    TooFewSites,
    #[error(
        "support {support} is not minimal (d^floor(n/2) = {minimal}); use the partial-trace oracle"
    )]
    NotMinimalSupport { support: usize, minimal: u64 },
    #[error("reduced density matrices of dimension {dim} exceed the cap {cap}")]
    CapExceeded { dim: u64, cap: u64 },
    #[error("invalid site set {0:?}")]
    InvalidSites(Vec<usize>),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmeState {
    kets: Code,
}

impl AmeState {
    pub fn new<W: AsRef<[u32]>>(n: usize, d: u32, kets: &[W]) -> Result<AmeState, AmeError> {
        state_from_code(&Code::new(d, n, kets)?)
    }

    pub fn n(&self) -> usize {
        self.kets.n()
    }

    pub fn d(&self) -> u32 {
        self.kets.d()
    }

    pub fn kets(&self) -> impl ExactSizeIterator<Item = &[Symbol]> + '_ {
        self.kets.words()
    }

    pub fn as_code(&self) -> &Code {
        &self.kets
    }

    /// `d^floor(n/2)`, saturating.
    pub fn minimal_support(&self) -> u64 {
        checked_pow(self.d() as u64, self.n() / 2).unwrap_or(u64::MAX)
    }
}

pub fn state_from_code(code: &Code) -> Result<AmeState, AmeError> {
    if code.is_empty() {
        return Err(AmeError::EmptyState);
    }
    if code.n() < 2 {
        return Err(AmeError::TooFewSites);
    }
    Ok(AmeState { kets: code.clone() })
}

pub fn code_from_state(state: &AmeState) -> Code {
    state.kets.clone()
}

pub fn support(state: &AmeState) -> usize {
    state.kets.len()
}

pub fn is_minimal_support(state: &AmeState) -> bool {
    support(state) as u64 == state.minimal_support()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Combinatorial,
    PartialTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailingPartition {
    /// Sites kept (the subset B); 0-based.
    pub sites: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmeVerdict {
    pub is_ame: bool,
    pub method: Method,
    pub partitions_checked: usize,
    pub failing_partition: Option<FailingPartition>,
}

impl AmeVerdict {
    fn pass(method: Method, partitions_checked: usize) -> Self {
        AmeVerdict {
            is_ame: true,
            method,
            partitions_checked,
            failing_partition: None,
        }
    }

    fn fail(method: Method, partitions_checked: usize, sites: Vec<usize>, reason: String) -> Self {
        AmeVerdict {
            is_ame: false,
            method,
            partitions_checked,
            failing_partition: Some(FailingPartition { sites, reason }),
        }
    }
}

fn complement(n: usize, sites: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !sites.contains(i)).collect()
}

fn project(ket: &[Symbol], sites: &[usize]) -> Vec<Symbol> {
    sites.iter().map(|&i| ket[i]).collect()
}

/// A projection onto `sites` shared by two kets, if any.
fn first_repeat(state: &AmeState, sites: &[usize]) -> Option<Vec<Symbol>> {
    let d = state.d() as u128;
    if checked_pow(state.d() as u64, sites.len()).is_some() {
        let mut keys: Vec<u128> = state
            .kets()
            .map(|k| sites.iter().fold(0u128, |acc, &i| acc * d + k[i] as u128))
            .collect();
        keys.sort_unstable();
        let dup = keys.windows(2).find(|p| p[0] == p[1])?[0];
        let ket = state
            .kets()
            .find(|k| sites.iter().fold(0u128, |acc, &i| acc * d + k[i] as u128) == dup)?;
        return Some(project(ket, sites));
    }
    let mut traced: Vec<Vec<Symbol>> = state.kets().map(|k| project(k, sites)).collect();
    traced.sort_unstable();
    traced
        .windows(2)
        .find(|p| p[0] == p[1])
        .map(|p| p[0].clone())
}

/// Decides the AME property of a minimal-support state from its kets alone.
///
/// For each set B of floor(n/2) sites: (a) the kets restricted to B hit every
/// tuple exactly once, so the diagonal of the reduced state is uniform, and
/// (b) the kets restricted to the complement are pairwise distinct, so all
/// off-diagonal entries vanish. Smaller B need no check, since their reduced
/// states are partial traces of a maximally mixed one.
pub fn verify_ame_combinatorial(state: &AmeState) -> Result<AmeVerdict, AmeError> {
    if !is_minimal_support(state) {
        return Err(AmeError::NotMinimalSupport {
            support: support(state),
            minimal: state.minimal_support(),
        });
    }
    let (n, d) = (state.n(), state.d() as u64);
    let m = n / 2;
    let mut seen = vec![false; state.minimal_support() as usize];
    let mut checked = 0;
    for b in Subsets::new(n, m) {
        checked += 1;
        seen.iter_mut().for_each(|s| *s = false);
        for ket in state.kets() {
            let idx = b.iter().fold(0u64, |acc, &i| acc * d + ket[i] as u64) as usize;
            if std::mem::replace(&mut seen[idx], true) {
                let reason = format!(
                    "tuple {:?} appears more than once on the kept sites, so the diagonal is not uniform",
                    project(ket, &b)
                );
                return Ok(AmeVerdict::fail(Method::Combinatorial, checked, b, reason));
            }
        }
        let a = complement(n, &b);
        // distinct on m of the traced-out sites already means distinct on all of them
        seen.iter_mut().for_each(|s| *s = false);
        let injective_on_prefix = state.kets().all(|ket| {
            let idx = a[..m].iter().fold(0u64, |acc, &i| acc * d + ket[i] as u64) as usize;
            !std::mem::replace(&mut seen[idx], true)
        });
        if injective_on_prefix {
            continue;
        }
        if let Some(repeated) = first_repeat(state, &a) {
            let reason = format!(
                "two kets agree on the traced-out sites ({repeated:?}), giving a nonzero off-diagonal entry"
            );
            return Ok(AmeVerdict::fail(Method::Combinatorial, checked, b, reason));
        }
    }
    Ok(AmeVerdict::pass(Method::Combinatorial, checked))
}

/// Exact reduced density matrix: `entry(i, j) / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedDensity {
    pub dim: usize,
    pub numerators: Vec<u64>,
    pub denominator: u64,
}

impl ReducedDensity {
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.numerators[i * self.dim + j]
    }

    /// First entry differing from `Id / dim`, as `(row, col)`.
    pub fn first_deviation_from_maximally_mixed(&self) -> Option<(usize, usize)> {
        let dim = self.dim as u64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let num = self.entry(i, j);
                // num / denominator == [i == j] / dim, cross-multiplied
                let ok = if i == j {
                    num * dim == self.denominator
                } else {
                    num == 0
                };
                if !ok {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl fmt::Display for ReducedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}/{}", self.entry(i, j), self.denominator)?;
            }
        }
        write!(f, "]")
    }
}

/// Traces out every site not in `sites`.
pub fn reduced_density(state: &AmeState, sites: &[usize]) -> Result<ReducedDensity, AmeError> {
    let n = state.n();
    let sorted = sites.windows(2).all(|w| w[0] < w[1]);
    if !sorted || sites.iter().any(|&s| s >= n) {
        return Err(AmeError::InvalidSites(sites.to_vec()));
    }
    let d = state.d() as u64;
    let dim = checked_pow(d, sites.len()).ok_or(AmeError::CapExceeded {
        dim: u64::MAX,
        cap: u64::MAX,
    })? as usize;
    let traced = complement(n, sites);
    let mut groups: HashMap<Vec<Symbol>, Vec<usize>> = HashMap::new();
    for ket in state.kets() {
        let row = sites.iter().fold(0u64, |acc, &i| acc * d + ket[i] as u64) as usize;
        groups.entry(project(ket, &traced)).or_default().push(row);
    }
    // <b|rho_B|b'> = sum over traced-out a of <a b|psi><psi|a b'>, each amplitude
    // product contributing 1/|kets|
    let mut numerators = vec![0u64; dim * dim];
    for rows in groups.values() {
        for &i in rows {
            for &j in rows {
                numerators[i * dim + j] += 1;
            }
        }
    }
    Ok(ReducedDensity {
        dim,
        numerators,
        denominator: support(state) as u64,
    })
}

pub fn verify_ame_partial_trace(state: &AmeState) -> Result<AmeVerdict, AmeError> {
    verify_ame_partial_trace_with_cap(state, DEFAULT_TRACE_CAP)
}

pub fn verify_ame_partial_trace_with_cap(
    state: &AmeState,
    cap: u64,
) -> Result<AmeVerdict, AmeError> {
    let dim = state.minimal_support();
    if dim > cap {
        return Err(AmeError::CapExceeded { dim, cap });
    }
    let n = state.n();
    let mut checked = 0;
    for m in 1..=n / 2 {
        for b in Subsets::new(n, m) {
            checked += 1;
            let rho = reduced_density(state, &b)?;
            if let Some((i, j)) = rho.first_deviation_from_maximally_mixed() {
                let expected = if i == j {
                    format!("1/{}", rho.dim)
                } else {
                    "0".to_string()
                };
                let mut reason = format!(
                    "rho[{i}][{j}] = {}/{}, expected {expected}",
                    rho.entry(i, j),
                    rho.denominator
                );
                if rho.dim <= 4 {
                    reason.push_str(&format!("; rho = {rho}"));
                }
                return Ok(AmeVerdict::fail(Method::PartialTrace, checked, b, reason));
            }
        }
    }
    Ok(AmeVerdict::pass(Method::PartialTrace, checked))
}

/// Uniform random `d^floor(n/2)`-subset of the computational basis.
pub fn random_uniform_state(n: usize, d: u32, seed: u64) -> Result<AmeState, AmeError> {
    if n < 2 {
        return Err(AmeError::TooFewSites);
    }
    let space = checked_pow(d as u64, n)
        .filter(|&s| s <= 1 << 32)
        .ok_or(AmeError::CapExceeded {
            dim: u64::MAX,
            cap: 1 << 32,
        })? as usize;
    let size = checked_pow(d as u64, n / 2).unwrap() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = Vec::with_capacity(size * n);
    for idx in sample(&mut rng, space, size).into_iter() {
        let mut rest = idx as u64;
        let mut ket = vec![0 as Symbol; n];
        for slot in ket.iter_mut().rev() {
            *slot = (rest % d as u64) as Symbol;
            rest /= d as u64;
        }
        symbols.extend(ket);
    }
    state_from_code(&Code::from_flat(d, n, symbols)?)
}
