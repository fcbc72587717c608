//! Latin hypercubes and their correspondence with MDS codes.
//!
//! A set of `r` mutually orthogonal latin `k`-hypercubes of order `d` and an
//! MDS code of length `k + r` with `d^k` words carry the same information:
//! the first `k` coordinates of a codeword index the cubes and the remaining
//! `r` coordinates are the cube entries.

use thiserror::Error;

use crate::codes::{oa_check, oa_failure, Code, CodeError, Symbol};
use crate::subsets::checked_pow;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatinError {
    #[error("expected {expected} entries for k = {k}, d = {d}, got {actual}")]
    ShapeMismatch {
        k: usize,
        d: u32,
        expected: usize,
        actual: usize,
    },
    #[error("hypercubes have different shapes")]
    IncompatibleShapes,
    #[error("entry {value} out of range for order {d}")]
    EntryOutOfRange { value: u32, d: u32 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("hypercube {0} is not latin")]
    NotLatin(usize),
    #[error("hypercubes are not mutually orthogonal")]
    NotOrthogonal,
    #[error("code is not MDS: {0}")]
    NotMds(String),
    #[error("conversion produced an invalid result: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// A `k`-dimensional array over `{0..d-1}`, row-major with the first index
/// slowest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatinHypercube {
    k: usize,
    d: u32,
    values: Vec<Symbol>,
}

impl LatinHypercube {
    /// Checks shape and range only; use [`is_latin`] for the latin property.
    pub fn new(k: usize, d: u32, values: Vec<u32>) -> Result<Self, LatinError> {
        if k == 0 {
            return Err(LatinError::ZeroDimension);
        }
        let expected = checked_pow(d as u64, k).unwrap_or(u64::MAX) as usize;
        if values.len() != expected {
            return Err(LatinError::ShapeMismatch {
                k,
                d,
                expected,
                actual: values.len(),
            });
        }
        if let Some(&value) = values.iter().find(|&&v| v >= d) {
            return Err(LatinError::EntryOutOfRange { value, d });
        }
        Ok(LatinHypercube {
            k,
            d,
            values: values.into_iter().map(|v| v as Symbol).collect(),
        })
    }

    /// Fills the cube from a function of the index tuple.
    pub fn from_fn(k: usize, d: u32, f: impl Fn(&[usize]) -> u32) -> Result<Self, LatinError> {
        let total = checked_pow(d as u64, k).unwrap_or(u64::MAX) as usize;
        let mut index = vec![0usize; k];
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            values.push(f(&index));
            for slot in index.iter_mut().rev() {
                *slot += 1;
                if *slot < d as usize {
                    break;
                }
                *slot = 0;
            }
        }
        LatinHypercube::new(k, d, values)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> Symbol {
        let flat = index
            .iter()
            .fold(0usize, |acc, &j| acc * self.d as usize + j);
        self.values[flat]
    }

    fn stride(&self, axis: usize) -> usize {
        (self.d as usize).pow((self.k - 1 - axis) as u32)
    }

    /// Flat offsets with zero coordinate on every axis in `axes`.
    fn bases(&self, axes: &[usize]) -> impl Iterator<Item = usize> + '_ {
        let d = self.d as usize;
        let strides: Vec<usize> = axes.iter().map(|&a| self.stride(a)).collect();
        (0..self.values.len()).filter(move |&i| strides.iter().all(|&s| (i / s) % d == 0))
    }

    pub fn same_shape(&self, other: &LatinHypercube) -> bool {
        self.k == other.k && self.d == other.d
    }
}

/// Every axis-aligned line is a permutation of `{0..d-1}`.
pub fn is_latin(cube: &LatinHypercube) -> bool {
    let d = cube.d as usize;
    let mut seen = vec![false; d];
    for axis in 0..cube.k {
        let stride = cube.stride(axis);
        for base in cube.bases(&[axis]) {
            seen.iter_mut().for_each(|s| *s = false);
            for t in 0..d {
                let v = cube.values[base + t * stride] as usize;
                if std::mem::replace(&mut seen[v], true) {
                    return false;
                }
            }
        }
    }
    true
}

/// Orthogonality of two latin hypercubes of the same shape: every pair of
/// induced squares (all but two indices fixed) is orthogonal. For `k = 1`
/// there are no induced squares and the answer is vacuously true.
pub fn are_orthogonal(a: &LatinHypercube, b: &LatinHypercube) -> Result<bool, LatinError> {
    if !a.same_shape(b) {
        return Err(LatinError::IncompatibleShapes);
    }
    if !is_latin(a) {
        return Err(LatinError::NotLatin(0));
    }
    if !is_latin(b) {
        return Err(LatinError::NotLatin(1));
    }
    let d = a.d as usize;
    let mut seen = vec![false; d * d];
    for x in 0..a.k {
        for y in x + 1..a.k {
            let (sx, sy) = (a.stride(x), a.stride(y));
            for base in a.bases(&[x, y]) {
                seen.iter_mut().for_each(|s| *s = false);
                for i in 0..d {
                    for j in 0..d {
                        let at = base + i * sx + j * sy;
                        let pair = a.values[at] as usize * d + b.values[at] as usize;
                        if std::mem::replace(&mut seen[pair], true) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Cubes of common shape `(k, d)`; the shape is kept so that an empty set
/// still knows what it is a set of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypercubeSet {
    pub k: usize,
    pub d: u32,
    pub cubes: Vec<LatinHypercube>,
}

impl HypercubeSet {
    pub fn new(k: usize, d: u32, cubes: Vec<LatinHypercube>) -> Result<Self, LatinError> {
        if k == 0 {
            return Err(LatinError::ZeroDimension);
        }
        if cubes.iter().any(|c| c.k != k || c.d != d) {
            return Err(LatinError::IncompatibleShapes);
        }
        Ok(HypercubeSet { k, d, cubes })
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

/// All cubes latin and pairwise orthogonal.
pub fn mols_check(set: &HypercubeSet) -> Result<bool, LatinError> {
    if !set.cubes.iter().all(is_latin) {
        return Ok(false);
    }
    for (i, a) in set.cubes.iter().enumerate() {
        for b in &set.cubes[i + 1..] {
            if !are_orthogonal(a, b)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reads `n - k` hypercubes off an MDS code of size `d^k`, indexing by the
/// first `k` coordinates.
pub fn code_to_hypercubes(code: &Code) -> Result<HypercubeSet, LatinError> {
    let k = code
        .power_dimension()
        .filter(|&k| k >= 1)
        .ok_or_else(|| LatinError::NotMds(format!("size {} is not d^k, k >= 1", code.len())))?;
    if k > code.n() {
        return Err(LatinError::NotMds("dimension exceeds length".into()));
    }
    if let Some(bad) = oa_failure(code, k)? {
        return Err(LatinError::NotMds(format!(
            "coordinates {bad:?} do not project bijectively"
        )));
    }
    let d = code.d() as usize;
    let r = code.n() - k;
    let mut values = vec![vec![0u32; code.len()]; r];
    for w in code.words() {
        let idx = w[..k].iter().fold(0usize, |acc, &s| acc * d + s as usize);
        for (i, cube) in values.iter_mut().enumerate() {
            cube[idx] = w[k + i] as u32;
        }
    }
    let cubes = values
        .into_iter()
        .map(|v| LatinHypercube::new(k, code.d(), v))
        .collect::<Result<Vec<_>, _>>()?;
    let set = HypercubeSet::new(k, code.d(), cubes)?;
    if !mols_check(&set)? {
        return Err(LatinError::VerificationFailed(
            "cubes read from an MDS code are not mutually orthogonal".into(),
        ));
    }
    Ok(set)
}

/// Inverse of [`code_to_hypercubes`]; the result is checked to be MDS.
pub fn hypercubes_to_code(set: &HypercubeSet) -> Result<Code, LatinError> {
    if !mols_check(set)? {
        return Err(LatinError::NotOrthogonal);
    }
    let (k, d) = (set.k, set.d);
    let n = k + set.cubes.len();
    let total = checked_pow(d as u64, k).unwrap_or(u64::MAX) as usize;
    let mut symbols: Vec<Symbol> = Vec::with_capacity(total * n);
    let mut index = vec![0 as Symbol; k];
    for flat in 0..total {
        symbols.extend_from_slice(&index);
        symbols.extend(set.cubes.iter().map(|c| c.values[flat]));
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if (*slot as u32) < d {
                break;
            }
            *slot = 0;
        }
    }
    let code = Code::from_flat(d, n, symbols)?;
    if !oa_check(&code, k)? {
        return Err(LatinError::VerificationFailed(format!(
            "code of length {n} is not an orthogonal array of strength {k}"
        )));
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::is_mds;

    fn square(d: u32, f: impl Fn(u32, u32) -> u32) -> LatinHypercube {
        LatinHypercube::from_fn(2, d, |ix| f(ix[0] as u32, ix[1] as u32)).unwrap()
    }

    fn ame43() -> Code {
        let mut words = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                words.push(vec![i, j, (i + j) % 3, (i + 2 * j) % 3]);
            }
        }
        Code::new(3, 4, &words).unwrap()
    }

    #[test]
    fn latin_examples() {
        assert!(is_latin(&square(3, |i, j| (i + j) % 3)));
        let bad = LatinHypercube::new(2, 2, vec![0, 0, 1, 1]).unwrap();
        assert!(!is_latin(&bad));
        let cube =
            LatinHypercube::from_fn(3, 3, |ix| (ix.iter().sum::<usize>() % 3) as u32).unwrap();
        assert!(is_latin(&cube));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            LatinHypercube::new(2, 3, vec![0; 8]),
            Err(LatinError::ShapeMismatch { expected: 9, .. })
        ));
        assert!(matches!(
            LatinHypercube::new(1, 2, vec![0, 2]),
            Err(LatinError::EntryOutOfRange { value: 2, d: 2 })
        ));
        let a = square(3, |i, j| (i + j) % 3);
        let b = square(2, |i, j| (i + j) % 2);
        assert_eq!(are_orthogonal(&a, &b), Err(LatinError::IncompatibleShapes));
    }

    #[test]
    fn orthogonality_examples() {
        let l = square(3, |i, j| (i + j) % 3);
        let m = square(3, |i, j| (i + 2 * j) % 3);
        assert!(are_orthogonal(&l, &m).unwrap());
        assert!(are_orthogonal(&m, &l).unwrap());

        let l2 = square(2, |i, j| (i + j) % 2);
        assert!(!are_orthogonal(&l2, &l2).unwrap());

        let l4 = square(4, |i, j| (i + j) % 4);
        let m4 = square(4, |i, j| (i + 2 * j) % 4);
        assert!(!is_latin(&m4));
        assert_eq!(are_orthogonal(&l4, &m4), Err(LatinError::NotLatin(1)));
    }

    #[test]
    fn mols_examples() {
        let pair = HypercubeSet::new(
            2,
            3,
            vec![
                square(3, |i, j| (i + j) % 3),
                square(3, |i, j| (i + 2 * j) % 3),
            ],
        )
        .unwrap();
        assert!(mols_check(&pair).unwrap());

        let four = HypercubeSet::new(
            2,
            5,
            (1..5)
                .map(|a| square(5, move |i, j| (i + a * j) % 5))
                .collect(),
        )
        .unwrap();
        assert!(mols_check(&four).unwrap());

        let single = HypercubeSet::new(2, 4, vec![square(4, |i, j| (i + j) % 4)]).unwrap();
        assert!(mols_check(&single).unwrap());
    }

    #[test]
    fn ame43_code_gives_two_mols() {
        let set = code_to_hypercubes(&ame43()).unwrap();
        assert_eq!(set.k, 2);
        assert_eq!(set.cubes[0], square(3, |i, j| (i + j) % 3));
        assert_eq!(set.cubes[1], square(3, |i, j| (i + 2 * j) % 3));
        assert_eq!(hypercubes_to_code(&set).unwrap(), ame43());
    }

    #[test]
    fn ghz_gives_identity_permutations() {
        let ghz = crate::rs::ghz_code(4).unwrap();
        let set = code_to_hypercubes(&ghz).unwrap();
        assert_eq!(set.k, 1);
        assert_eq!(set.len(), 2);
        for c in &set.cubes {
            assert_eq!(c.values(), &[0, 1, 2, 3]);
        }
        assert_eq!(hypercubes_to_code(&set).unwrap(), ghz);
    }

    #[test]
    fn single_square_gives_distance_two_code() {
        let set = HypercubeSet::new(2, 4, vec![square(4, |i, j| (i + j) % 4)]).unwrap();
        let code = hypercubes_to_code(&set).unwrap();
        let r = is_mds(&code).unwrap();
        assert_eq!((code.n(), r.k, r.delta), (3, Some(2), 2));
    }

    #[test]
    fn empty_set_gives_full_space() {
        let set = HypercubeSet::new(2, 2, vec![]).unwrap();
        let code = hypercubes_to_code(&set).unwrap();
        assert_eq!(
            code.to_rows(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(is_mds(&code).unwrap().delta, 1);
    }

    #[test]
    fn non_mds_code_is_rejected() {
        let code = Code::new(2, 2, &[[0u32, 0], [1, 0]]).unwrap();
        assert!(matches!(
            code_to_hypercubes(&code),
            Err(LatinError::NotMds(_))
        ));
        let code = Code::new(3, 2, &[[0u32, 0], [1, 0]]).unwrap();
        assert!(matches!(
            code_to_hypercubes(&code),
            Err(LatinError::NotMds(_))
        ));
    }

    #[test]
    fn non_orthogonal_set_is_rejected() {
        let l = square(3, |i, j| (i + j) % 3);
        let set = HypercubeSet::new(2, 3, vec![l.clone(), l]).unwrap();
        assert_eq!(hypercubes_to_code(&set), Err(LatinError::NotOrthogonal));
    }

    #[test]
    fn ame_code_over_gf5_gives_three_cubes() {
        let code = crate::rs::ame_code_for_prime_power(5).unwrap();
        let set = code_to_hypercubes(&code).unwrap();
        assert_eq!((set.k, set.len()), (3, 3));
        assert!(mols_check(&set).unwrap());
    }
}
