//! Deciding whether a minimal-support AME(n, d) state exists.

use serde::Serialize;
use thiserror::Error;

use crate::ame::{state_from_code, verify_ame_combinatorial, AmeState};
use crate::bounds::{BoundReport, BoundsEngine, BoundsError};
use crate::codes::{puncture_to_length, Code};
use crate::field::prime_power;
use crate::rs::{ghz_code, rs_code, Extension, RsParams};
use crate::search::{SearchCertificate, Verdict};

#[derive(Debug, Error)]
pub enum ExistenceError {
    #[error("need n >= 2 and d >= 2, got n = {n}, d = {d}")]
    InvalidParameters { n: usize, d: u32 },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct Existence {
    pub n: usize,
    pub d: u32,
    pub answer: Answer,
    pub reason: String,
    #[serde(skip)]
    pub state: Option<AmeState>,
    pub certificate: Option<SearchCertificate>,
    pub bounds: Option<BoundReport>,
}

impl Existence {
    fn new(n: usize, d: u32, answer: Answer, reason: String) -> Self {
        Existence {
            n,
            d,
            answer,
            reason,
            state: None,
            certificate: None,
            bounds: None,
        }
    }
}

/// Builds a minimal-support AME(n, d) state when one of the known
/// constructions covers `(n, d)`, checking it before returning:
///
/// - n <= 3: the GHZ support, punctured to n = 2 if needed;
/// - d a prime power, n <= d + 1: a singly extended Reed–Solomon code of
///   dimension floor(n/2), punctured to length n;
/// - d = 2^j >= 4, floor(n/2) = 3, n <= d + 2: the doubly extended code,
///   punctured to length n.
pub fn construct_ame_state(n: usize, d: u32) -> Result<Option<(AmeState, String)>, ExistenceError> {
    if n < 2 || d < 2 {
        return Err(ExistenceError::InvalidParameters { n, d });
    }
    let fail = |e: &dyn std::fmt::Display| ExistenceError::Construction(e.to_string());
    let built: Option<(Code, String)> = if n <= 3 {
        let code =
            puncture_to_length(&ghz_code(d).map_err(|e| fail(&e))?, n).map_err(|e| fail(&e))?;
        Some((code, format!("GHZ support over {d} symbols on {n} sites")))
    } else if let Some((p, _)) = prime_power(d) {
        let k = n / 2;
        if d >= 3 && n <= d as usize + 1 {
            let params = RsParams::new(d, k, Extension::Single).map_err(|e| fail(&e))?;
            let code = rs_code(&params).map_err(|e| fail(&e))?;
            let code = puncture_to_length(&code, n).map_err(|e| fail(&e))?;
            Some((
                code,
                format!("singly extended Reed-Solomon code over GF({d}), k = {k}, punctured to length {n}"),
            ))
        } else if p == 2 && d >= 4 && k == 3 && n <= d as usize + 2 {
            let params = RsParams::new(d, 3, Extension::Double).map_err(|e| fail(&e))?;
            let code = rs_code(&params).map_err(|e| fail(&e))?;
            let code = puncture_to_length(&code, n).map_err(|e| fail(&e))?;
            Some((
                code,
                format!("doubly extended Reed-Solomon code over GF({d}), k = 3, punctured to length {n}"),
            ))
        } else {
            None
        }
    } else {
        None
    };
    let Some((code, how)) = built else {
        return Ok(None);
    };
    let state = state_from_code(&code).map_err(|e| fail(&e))?;
    let verdict = verify_ame_combinatorial(&state).map_err(|e| fail(&e))?;
    if !verdict.is_ame {
        return Err(ExistenceError::Construction(format!(
            "{how} failed the AME check: {:?}",
            verdict.failing_partition
        )));
    }
    Ok(Some((state, how)))
}

/// Decision procedure for the existence of a minimal-support AME(n, d) state.
///
/// Known constructions answer true with an explicit, checked state. The case
/// (4, 6) is settled by the exhaustive order-6 search. Everything else is
/// referred to the bounds engine, which may answer true, false or unknown.
pub fn ame_minimal_exists(
    n: usize,
    d: u32,
    engine: &BoundsEngine,
) -> Result<Existence, ExistenceError> {
    if let Some((state, how)) = construct_ame_state(n, d)? {
        let mut out = Existence::new(
            n,
            d,
            Answer::True,
            format!("{how}; AME by the combinatorial checker"),
        );
        out.state = Some(state);
        return Ok(out);
    }
    if (n, d) == (4, 6) {
        let cert = engine.search_certificate(6)?;
        let answer = match cert.verdict {
            Verdict::NotExists => Answer::False,
            Verdict::Exists => Answer::True,
        };
        let reason = format!(
            "AME(4,6) of minimal support exists iff there are two orthogonal latin squares of \
             order 6; {} reduced squares examined, {} with a mate",
            cert.squares_examined, cert.squares_with_mate
        );
        let mut out = Existence::new(n, d, answer, reason);
        out.certificate = Some(cert);
        return Ok(out);
    }
    let report = engine.n_report(d)?;
    let n64 = n as u64;
    let mut out = if let Some(upper) = report.upper.as_ref().filter(|u| n64 > u.value) {
        Existence::new(
            n,
            d,
            Answer::False,
            format!("n = {n} exceeds the upper bound {}", upper.statement()),
        )
    } else if let Some(lower) = report.lower.as_ref().filter(|l| n64 <= l.value) {
        Existence::new(
            n,
            d,
            Answer::True,
            format!("n = {n} is within the lower bound {}", lower.statement()),
        )
    } else {
        Existence::new(
            n,
            d,
            Answer::Unknown,
            format!("n = {n} lies between the known bounds on N({d})"),
        )
    };
    if d == 6 {
        out.certificate = Some(engine.search_certificate(6)?);
    }
    out.bounds = Some(report);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ame::{support, verify_ame_partial_trace};

    #[test]
    fn forty_six_is_ruled_out() {
        let engine = BoundsEngine::with_default_facts();
        let e = ame_minimal_exists(4, 6, &engine).unwrap();
        assert_eq!(e.answer, Answer::False);
        let cert = e.certificate.unwrap();
        assert_eq!((cert.squares_examined, cert.squares_with_mate), (9408, 0));
    }

    #[test]
    fn constructive_cases() {
        let engine = BoundsEngine::with_default_facts();
        let e = ame_minimal_exists(4, 3, &engine).unwrap();
        assert_eq!(e.answer, Answer::True);
        let s = e.state.unwrap();
        assert!(verify_ame_partial_trace(&s).unwrap().is_ame);

        let e = ame_minimal_exists(6, 4, &engine).unwrap();
        assert_eq!(e.answer, Answer::True);
        assert_eq!(support(e.state.as_ref().unwrap()), 64);

        for (n, d) in [(2, 6), (3, 6), (3, 2), (5, 5), (6, 7)] {
            let e = ame_minimal_exists(n, d, &engine).unwrap();
            assert_eq!(e.answer, Answer::True, "({n}, {d})");
            assert!(e.state.is_some());
        }
    }

    #[test]
    fn bounds_cases() {
        let engine = BoundsEngine::with_default_facts();
        assert_eq!(
            ame_minimal_exists(4, 2, &engine).unwrap().answer,
            Answer::False
        );
        assert_eq!(
            ame_minimal_exists(5, 6, &engine).unwrap().answer,
            Answer::False
        );
        assert_eq!(
            ame_minimal_exists(7, 5, &engine).unwrap().answer,
            Answer::False
        );
        assert_eq!(
            ame_minimal_exists(7, 4, &engine).unwrap().answer,
            Answer::False
        );
        // a pair of orthogonal latin squares of order 10 is a cited fact
        let e = ame_minimal_exists(4, 10, &engine).unwrap();
        assert_eq!(e.answer, Answer::True);
        assert!(e.state.is_none());
        assert_eq!(
            ame_minimal_exists(16, 10, &engine).unwrap().answer,
            Answer::False
        );
        assert_eq!(
            ame_minimal_exists(8, 10, &engine).unwrap().answer,
            Answer::Unknown
        );
    }

    #[test]
    fn invalid_parameters() {
        let engine = BoundsEngine::with_default_facts();
        assert!(ame_minimal_exists(1, 3, &engine).is_err());
        assert!(ame_minimal_exists(4, 1, &engine).is_err());
    }
}
