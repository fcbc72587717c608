//! Reed–Solomon codes and their single and double extensions.
//!
//! Messages are the polynomials `a_0 + a_1 x + ... + a_{k-1} x^{k-1}` over
//! GF(q), enumerated with `a_0` varying fastest. A codeword lists the
//! evaluations at the field points `0, 1, ..., q-1` (integer encoding order),
//! followed by `a_{k-1}` for the single extension, or by `a_2, a_1` for the
//! double extension (q even, k = 3).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{oa_failure, Code, CodeError, Symbol};
use crate::field::{make_field, FieldError, FieldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    None,
    Single,
    Double,
}

impl std::str::FromStr for Extension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Extension::None),
            "single" => Ok(Extension::Single),
            "double" => Ok(Extension::Double),
            other => Err(format!("unknown extension '{other}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum RsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("constructed code is not MDS: coordinates {0:?} are not a bijection")]
    VerificationFailed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsParams {
    pub field: FieldSpec,
    pub k: usize,
    pub extension: Extension,
}

impl RsParams {
    pub fn new(q: u32, k: usize, extension: Extension) -> Result<RsParams, RsError> {
        let params = RsParams {
            field: make_field(q)?,
            k,
            extension,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn length(&self) -> usize {
        let q = self.field.d as usize;
        match self.extension {
            Extension::None => q,
            Extension::Single => q + 1,
            Extension::Double => q + 2,
        }
    }

    pub fn validate(&self) -> Result<(), RsError> {
        let q = self.field.d as usize;
        let bad = |m: String| Err(RsError::InvalidParams(m));
        if self.k == 0 || self.k > q {
            return bad(format!("dimension {} outside 1..={q}", self.k));
        }
        if self.extension == Extension::Double {
            if self.field.p != 2 || self.k != 3 {
                return bad("double extension needs even q and k = 3".into());
            }
            if q < 4 {
                return bad("double extension needs q >= 4".into());
            }
        }
        Ok(())
    }
}

/// Builds the word set without checking parameters or the MDS property.
///
/// Used to show that the double extension breaks down for odd q; callers
/// wanting a guaranteed MDS code use [`rs_code`].
pub fn rs_candidate(field: &FieldSpec, k: usize, extension: Extension) -> Result<Code, RsError> {
    let q = field.d as usize;
    if k == 0 || (extension == Extension::Double && k < 3) {
        return Err(RsError::InvalidParams(format!(
            "dimension {k} too small for {extension:?}"
        )));
    }
    let tables = field.tables();
    let n = match extension {
        Extension::None => q,
        Extension::Single => q + 1,
        Extension::Double => q + 2,
    };
    let count = q
        .checked_pow(k as u32)
        .ok_or_else(|| RsError::InvalidParams("too many codewords".into()))?;
    let mut symbols: Vec<Symbol> = Vec::with_capacity(count * n);
    let mut coeffs = vec![0u32; k];
    for _ in 0..count {
        for x in 0..field.d {
            symbols.push(tables.eval(&coeffs, x) as Symbol);
        }
        match extension {
            Extension::None => {}
            Extension::Single => symbols.push(coeffs[k - 1] as Symbol),
            Extension::Double => {
                symbols.push(coeffs[2] as Symbol);
                symbols.push(coeffs[1] as Symbol);
            }
        }
        // next message, a_0 fastest
        for c in coeffs.iter_mut() {
            *c += 1;
            if (*c as usize) < q {
                break;
            }
            *c = 0;
        }
    }
    Ok(Code::from_flat(field.d, n, symbols)?)
}

/// Reed–Solomon code for `params`, checked to be MDS before it is returned.
pub fn rs_code(params: &RsParams) -> Result<Code, RsError> {
    params.validate()?;
    let code = rs_candidate(&params.field, params.k, params.extension)?;
    if let Some(bad) = oa_failure(&code, params.k)? {
        return Err(RsError::VerificationFailed(bad));
    }
    Ok(code)
}

/// Dimension of the MDS code behind an AME(d+1, d) state.
pub fn ame_dimension(d: u32) -> usize {
    (d as usize).div_ceil(2)
}

/// Singly extended RS code of length d+1 and dimension floor((d+1)/2).
pub fn ame_code_for_prime_power(d: u32) -> Result<Code, RsError> {
    if d < 3 {
        return Err(RsError::InvalidParams(format!(
            "d = {d}: use the GHZ code for d < 3"
        )));
    }
    rs_code(&RsParams::new(d, ame_dimension(d), Extension::Single)?)
}

/// `{(s, s, ..., s)}`: the repetition code of length `n`.
pub fn repetition_code(n: usize, d: u32) -> Result<Code, CodeError> {
    let symbols = (0..d)
        .flat_map(|s| std::iter::repeat_n(s as Symbol, n))
        .collect();
    Code::from_flat(d, n, symbols)
}

/// Support of the GHZ state on three sites.
pub fn ghz_code(d: u32) -> Result<Code, CodeError> {
    repetition_code(3, d)
}
