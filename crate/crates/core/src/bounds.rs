//! Bounds on N(d), the largest n for which an AME(n, d) state of minimal
//! support exists, with the provenance of every bound.
//!
//! Lower bounds come from constructions verified in this process. Upper bounds
//! come from exhaustive searches run in this process, from literature facts
//! read from a JSON fact file, or from derivations over such facts. The
//! existence set is an interval `{n : n <= N(d)}`, so ruling out a single n
//! caps N(d) at n - 1.
//!
//! Facts that rest on an unproven conjecture are a separate type,
//! [`ConditionalFact`], and cannot be placed in a [`BoundReport`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::ame::{state_from_code, verify_ame_combinatorial};
use crate::codes::puncture_to_length;
use crate::field::prime_power;
use crate::rs::{ame_code_for_prime_power, ghz_code, rs_code, Extension, RsParams};
use crate::search::{orthogonal_pair_exists, SearchCertificate, SearchOptions, Verdict};
use crate::subsets::checked_pow;

/// The fact file shipped with the crate.
pub const DEFAULT_FACTS: &str = include_str!("../data/facts.json");

/// Constructions with more codewords than this are not materialized.
pub const CONSTRUCTION_CAP: u64 = 1 << 16;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("malformed fact file: {0}")]
    FactFile(String),
    #[error("inconsistent bounds for d = {d}: lower {lower} > upper {upper}")]
    Inconsistent { d: u32, lower: u64, upper: u64 },
    #[error("fact {0} is not an upper bound on M(k,d)")]
    NotAnMUpperBound(String),
    #[error("fact {fact} fails the sanity check value >= k + 1")]
    InsaneFact { fact: String },
    #[error("the general MDS conjecture flag must be set explicitly")]
    ConjectureFlagRequired,
    #[error("d = {0} must be a prime power >= 8")]
    NotApplicable(u32),
    #[error("alphabet size must be at least 2")]
    BadAlphabet,
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("search failed: {0}")]
    Search(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    /// Largest n with a minimal-support AME(n, d) state.
    N { d: u32 },
    /// Largest length of an MDS code of dimension k over d symbols.
    M { k: u32, d: u32 },
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::N { d } => write!(f, "N({d})"),
            Subject::M { k, d } => write!(f, "M({k},{d})"),
        }
    }
}

impl Serialize for Subject {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

impl Relation {
    fn bounds_above(self) -> bool {
        matches!(self, Relation::Le | Relation::Eq)
    }

    fn bounds_below(self) -> bool {
        matches!(self, Relation::Ge | Relation::Eq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ConstructedAndVerified {
        artifact: String,
    },
    SearchedAndVerified {
        artifact: String,
    },
    ExternalCitation {
        tag: String,
    },
    Derived {
        rule: String,
        premises: Vec<BoundFact>,
    },
}

impl Provenance {
    /// Lower is preferred when two facts give the same value.
    fn rank(&self) -> u8 {
        match self {
            Provenance::ConstructedAndVerified { .. } | Provenance::SearchedAndVerified { .. } => 0,
            Provenance::Derived { .. } => 1,
            Provenance::ExternalCitation { .. } => 2,
        }
    }

    pub fn is_verified(&self) -> bool {
        self.rank() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundFact {
    pub subject: Subject,
    pub relation: Relation,
    pub value: u64,
    pub provenance: Provenance,
    /// The fact only speaks about codes with at least this minimum distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_distance_at_least: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundFact {
    fn new(subject: Subject, relation: Relation, value: u64, provenance: Provenance) -> Self {
        BoundFact {
            subject,
            relation,
            value,
            provenance,
            min_distance_at_least: None,
            note: None,
        }
    }

    pub fn statement(&self) -> String {
        format!("{} {} {}", self.subject, self.relation, self.value)
    }

    /// Human-readable derivation, one line per step, premises indented.
    pub fn explain(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.explain_into(0, &mut out);
        out
    }

    fn explain_into(&self, depth: usize, out: &mut Vec<String>) {
        let pad = "  ".repeat(depth);
        let origin = match &self.provenance {
            Provenance::ConstructedAndVerified { artifact } => {
                format!("constructed and verified: {artifact}")
            }
            Provenance::SearchedAndVerified { artifact } => {
                format!("searched and verified: {artifact}")
            }
            Provenance::ExternalCitation { tag } => format!("external citation [{tag}]"),
            Provenance::Derived { rule, .. } => format!("derived: {rule}"),
        };
        out.push(format!("{pad}{}  <-  {origin}", self.statement()));
        if let Provenance::Derived { premises, .. } = &self.provenance {
            for p in premises {
                p.explain_into(depth + 1, out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub d: u32,
    pub lower: Option<BoundFact>,
    pub upper: Option<BoundFact>,
    pub exact: Option<u64>,
    /// Every fact considered, best ones first within each direction.
    pub candidates: Vec<BoundFact>,
    pub trace: Vec<String>,
}

/// A bound that holds only under a stated assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalFact {
    pub subject: Subject,
    pub relation: Relation,
    pub value: u64,
    pub assumption: String,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ValueExpr {
    Const(i64),
    /// `slope * d + offset`
    Linear {
        slope: i64,
        offset: i64,
    },
}

impl ValueExpr {
    fn parse(v: &serde_json::Value) -> Result<ValueExpr, String> {
        if let Some(n) = v.as_i64() {
            return Ok(ValueExpr::Const(n));
        }
        let s: String = v
            .as_str()
            .ok_or("value must be an integer or an expression in d")?
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        let bad = || format!("cannot parse value expression '{s}'");
        let Some((head, tail)) = s.split_once('d') else {
            return s.parse().map(ValueExpr::Const).map_err(|_| bad());
        };
        let slope = match head.trim_end_matches('*') {
            "" => 1,
            "-" => -1,
            h => h.parse().map_err(|_| bad())?,
        };
        let offset = match tail {
            "" => 0,
            t => t
                .strip_prefix('+')
                .unwrap_or(t)
                .parse()
                .map_err(|_| bad())?,
        };
        Ok(ValueExpr::Linear { slope, offset })
    }

    fn eval(&self, d: u32) -> Option<u64> {
        let v = match *self {
            ValueExpr::Const(c) => c,
            ValueExpr::Linear { slope, offset } => slope * d as i64 + offset,
        };
        u64::try_from(v).ok()
    }
}

#[derive(Debug, Deserialize)]
struct FactEntry {
    subject: String,
    relation: Relation,
    value: serde_json::Value,
    provenance: String,
    #[serde(default)]
    d_min: Option<u32>,
    #[serde(default)]
    d_max: Option<u32>,
    #[serde(default)]
    d_exclude: Vec<u32>,
    #[serde(default)]
    min_distance_at_least: Option<u64>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SubjectPattern {
    NAny,
    N(u32),
    M { k: u32, d: u32 },
}

fn parse_subject(s: &str) -> Result<SubjectPattern, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("unknown subject '{s}'");
    if let Some(inner) = s.strip_prefix("N(").and_then(|r| r.strip_suffix(')')) {
        if inner == "d" {
            return Ok(SubjectPattern::NAny);
        }
        return inner.parse().map(SubjectPattern::N).map_err(|_| bad());
    }
    if let Some(inner) = s.strip_prefix("M(").and_then(|r| r.strip_suffix(')')) {
        let (k, d) = inner.split_once(',').ok_or_else(bad)?;
        return Ok(SubjectPattern::M {
            k: k.parse().map_err(|_| bad())?,
            d: d.parse().map_err(|_| bad())?,
        });
    }
    Err(bad())
}

/// One entry of the fact file, parsed.
#[derive(Debug, Clone)]
struct ExternalRule {
    subject: SubjectPattern,
    relation: Relation,
    value: ValueExpr,
    tag: String,
    d_min: Option<u32>,
    d_max: Option<u32>,
    d_exclude: Vec<u32>,
    min_distance_at_least: Option<u64>,
    note: Option<String>,
}

impl ExternalRule {
    fn from_entry(e: FactEntry) -> Result<ExternalRule, String> {
        let subject = parse_subject(&e.subject)?;
        let value = ValueExpr::parse(&e.value)?;
        if subject != SubjectPattern::NAny && matches!(value, ValueExpr::Linear { .. }) {
            return Err(format!(
                "{}: only N(d) may use an expression in d",
                e.subject
            ));
        }
        if e.provenance.trim().is_empty() {
            return Err(format!("{}: missing citation tag", e.subject));
        }
        Ok(ExternalRule {
            subject,
            relation: e.relation,
            value,
            tag: e.provenance,
            d_min: e.d_min,
            d_max: e.d_max,
            d_exclude: e.d_exclude,
            min_distance_at_least: e.min_distance_at_least,
            note: e.note,
        })
    }

    fn alphabet(&self) -> Option<u32> {
        match self.subject {
            SubjectPattern::NAny => None,
            SubjectPattern::N(d) | SubjectPattern::M { d, .. } => Some(d),
        }
    }

    fn applies_to(&self, d: u32) -> bool {
        self.alphabet().is_none_or(|a| a == d)
            && self.d_min.is_none_or(|m| d >= m)
            && self.d_max.is_none_or(|m| d <= m)
            && !self.d_exclude.contains(&d)
    }

    fn instantiate(&self, d: u32) -> Option<BoundFact> {
        if !self.applies_to(d) {
            return None;
        }
        let subject = match self.subject {
            SubjectPattern::NAny | SubjectPattern::N(_) => Subject::N { d },
            SubjectPattern::M { k, d } => Subject::M { k, d },
        };
        Some(BoundFact {
            subject,
            relation: self.relation,
            value: self.value.eval(d)?,
            provenance: Provenance::ExternalCitation {
                tag: self.tag.clone(),
            },
            min_distance_at_least: self.min_distance_at_least,
            note: self.note.clone(),
        })
    }
}

/// From `M(k,d) <= v`: no MDS code of dimension k is longer than v, since a
/// longer one would puncture down to length v + 1. A minimal-support
/// AME(n, d) state needs an MDS code of length n and dimension floor(n/2), so
/// every n in {2k, 2k+1} beyond v is impossible, and N(d) < the least such n.
///
/// Returns `Ok(None)` when no n is excluded, or when the fact is restricted to
/// a minimum distance that the excluded codes do not reach.
pub fn derive_n_upper_from_m(fact: &BoundFact) -> Result<Option<BoundFact>, BoundsError> {
    let Subject::M { k, d } = fact.subject else {
        return Err(BoundsError::NotAnMUpperBound(fact.statement()));
    };
    if !fact.relation.bounds_above() {
        return Err(BoundsError::NotAnMUpperBound(fact.statement()));
    }
    let (k, v) = (k as u64, fact.value);
    if v < k + 1 {
        return Err(BoundsError::InsaneFact {
            fact: fact.statement(),
        });
    }
    let Some(n) = [2 * k, 2 * k + 1].into_iter().find(|&n| n > v) else {
        return Ok(None);
    };
    // the shortest excluded code has length v + 1 and distance v + 2 - k
    if let Some(min_delta) = fact.min_distance_at_least {
        if v + 2 - k < min_delta {
            return Ok(None);
        }
    }
    let rule = format!(
        "no MDS code of length {} and dimension {k} over {d} symbols; puncturing would turn an \
         MDS code of length {n} and dimension {k} into one, so no AME({n},{d}) state of minimal \
         support exists, and by the interval property N({d}) <= {}",
        v + 1,
        n - 1
    );
    Ok(Some(BoundFact::new(
        Subject::N { d },
        Relation::Le,
        n - 1,
        Provenance::Derived {
            rule,
            premises: vec![fact.clone()],
        },
    )))
}

pub struct BoundsEngine {
    rules: Vec<ExternalRule>,
    certificates: Mutex<HashMap<usize, SearchCertificate>>,
    constructions: Mutex<HashMap<u32, Vec<BoundFact>>>,
    search_workers: usize,
}

impl BoundsEngine {
    pub fn with_default_facts() -> BoundsEngine {
        BoundsEngine::from_json(DEFAULT_FACTS).expect("shipped fact file parses")
    }

    pub fn from_json(text: &str) -> Result<BoundsEngine, BoundsError> {
        let entries: Vec<FactEntry> =
            serde_json::from_str(text).map_err(|e| BoundsError::FactFile(e.to_string()))?;
        let rules = entries
            .into_iter()
            .map(ExternalRule::from_entry)
            .collect::<Result<Vec<_>, _>>()
            .map_err(BoundsError::FactFile)?;
        Ok(BoundsEngine {
            rules,
            certificates: Mutex::new(HashMap::new()),
            constructions: Mutex::new(HashMap::new()),
            search_workers: 1,
        })
    }

    pub fn set_search_workers(&mut self, workers: usize) {
        self.search_workers = workers.max(1);
    }

    /// Literature facts from the fact file that apply to alphabet size `d`.
    pub fn external_facts(&self, d: u32) -> Vec<BoundFact> {
        self.rules.iter().filter_map(|r| r.instantiate(d)).collect()
    }

    /// First-hit search certificate for orthogonal pairs of order `d`, cached.
    pub fn search_certificate(&self, d: usize) -> Result<SearchCertificate, BoundsError> {
        if let Some(c) = self.certificates.lock().unwrap().get(&d) {
            return Ok(c.clone());
        }
        let cert = orthogonal_pair_exists(d, &SearchOptions::workers(self.search_workers))
            .map_err(|e| BoundsError::Search(e.to_string()))?;
        self.certificates.lock().unwrap().insert(d, cert.clone());
        Ok(cert)
    }

    /// Every lower bound on N(d) obtained by building a state here and
    /// checking it.
    pub fn constructive_lower_facts(&self, d: u32) -> Result<Vec<BoundFact>, BoundsError> {
        if d < 2 {
            return Err(BoundsError::BadAlphabet);
        }
        if let Some(f) = self.constructions.lock().unwrap().get(&d) {
            return Ok(f.clone());
        }
        let construction = |e: &dyn fmt::Display| BoundsError::Construction(e.to_string());
        let mut facts = Vec::new();

        let ghz = ghz_code(d).map_err(|e| construction(&e))?;
        let state = state_from_code(&ghz).map_err(|e| construction(&e))?;
        let verdict = verify_ame_combinatorial(&state).map_err(|e| construction(&e))?;
        if verdict.is_ame {
            facts.push(BoundFact::new(
                Subject::N { d },
                Relation::Ge,
                3,
                Provenance::ConstructedAndVerified {
                    artifact: format!(
                        "GHZ support {{(s,s,s)}}: {d} kets, AME by the combinatorial checker"
                    ),
                },
            ));
        }

        if let Some((p, _)) = prime_power(d).filter(|_| d >= 3) {
            let k = (d as usize).div_ceil(2);
            let size = checked_pow(d as u64, k).unwrap_or(u64::MAX);
            if size <= CONSTRUCTION_CAP {
                let code = ame_code_for_prime_power(d).map_err(|e| construction(&e))?;
                let state = state_from_code(&code).map_err(|e| construction(&e))?;
                let verdict = verify_ame_combinatorial(&state).map_err(|e| construction(&e))?;
                if verdict.is_ame {
                    facts.push(BoundFact::new(
                        Subject::N { d },
                        Relation::Ge,
                        d as u64 + 1,
                        Provenance::ConstructedAndVerified {
                            artifact: format!(
                                "singly extended Reed-Solomon code over GF({d}), k = {k}: {} kets \
                                 on {} sites, AME by the combinatorial checker over {} partitions",
                                code.len(),
                                code.n(),
                                verdict.partitions_checked
                            ),
                        },
                    ));
                }
            } else {
                let mut fact = BoundFact::new(
                    Subject::N { d },
                    Relation::Ge,
                    d as u64 + 1,
                    Provenance::ExternalCitation {
                        tag: "bernal".into(),
                    },
                );
                fact.note = Some(format!(
                    "Reed-Solomon construction with {size} codewords is above the in-process cap"
                ));
                facts.push(fact);
            }

            if p == 2 && d >= 4 && checked_pow(d as u64, 3).unwrap_or(u64::MAX) <= CONSTRUCTION_CAP
            {
                let params =
                    RsParams::new(d, 3, Extension::Double).map_err(|e| construction(&e))?;
                let code = rs_code(&params).map_err(|e| construction(&e))?;
                let code = puncture_to_length(&code, 6).map_err(|e| construction(&e))?;
                let state = state_from_code(&code).map_err(|e| construction(&e))?;
                let verdict = verify_ame_combinatorial(&state).map_err(|e| construction(&e))?;
                if verdict.is_ame {
                    facts.push(BoundFact::new(
                        Subject::N { d },
                        Relation::Ge,
                        6,
                        Provenance::ConstructedAndVerified {
                            artifact: format!(
                                "doubly extended Reed-Solomon code over GF({d}), k = 3, punctured \
                                 to length 6: {} kets, AME by the combinatorial checker over {} \
                                 partitions",
                                code.len(),
                                verdict.partitions_checked
                            ),
                        },
                    ));
                }
            }
        }
        self.constructions.lock().unwrap().insert(d, facts.clone());
        Ok(facts)
    }

    /// The best constructive lower bound on N(d).
    pub fn n_lower_constructive(&self, d: u32) -> Result<BoundFact, BoundsError> {
        let facts = self.constructive_lower_facts(d)?;
        best_lower(&facts)
            .cloned()
            .ok_or_else(|| BoundsError::Construction("no construction verified".into()))
    }

    /// Upper bound from an exhaustive orthogonal-pair search, for the orders
    /// where the search settles the question negatively.
    fn searched_upper_fact(&self, d: u32) -> Result<Option<BoundFact>, BoundsError> {
        let searchable = (d as usize) <= crate::search::MAX_ENUMERATION_ORDER
            && (d == 2 || prime_power(d).is_none());
        if !searchable {
            return Ok(None);
        }
        let cert = self.search_certificate(d as usize)?;
        if cert.verdict != Verdict::NotExists {
            return Ok(None);
        }
        let artifact = format!(
            "all {} reduced latin squares of order {d} examined, {} with an orthogonal mate; no \
             pair of orthogonal latin squares, so no AME(4,{d}) state of minimal support, and by \
             the interval property N({d}) <= 3",
            cert.squares_examined, cert.squares_with_mate
        );
        Ok(Some(BoundFact::new(
            Subject::N { d },
            Relation::Le,
            3,
            Provenance::SearchedAndVerified { artifact },
        )))
    }

    pub fn n_report(&self, d: u32) -> Result<BoundReport, BoundsError> {
        let mut lowers = self.constructive_lower_facts(d)?;
        let mut uppers = Vec::new();
        uppers.extend(self.searched_upper_fact(d)?);
        for fact in self.external_facts(d) {
            match fact.subject {
                Subject::N { .. } => {
                    if fact.relation.bounds_below() {
                        lowers.push(fact.clone());
                    }
                    if fact.relation.bounds_above() {
                        uppers.push(fact);
                    }
                }
                Subject::M { .. } => {
                    if fact.relation.bounds_above() {
                        uppers.extend(derive_n_upper_from_m(&fact)?);
                    }
                }
            }
        }
        lowers.sort_by(|a, b| {
            b.value
                .cmp(&a.value)
                .then(a.provenance.rank().cmp(&b.provenance.rank()))
        });
        uppers.sort_by(|a, b| {
            a.value
                .cmp(&b.value)
                .then(a.provenance.rank().cmp(&b.provenance.rank()))
        });
        let lower = lowers.first().cloned();
        let upper = uppers.first().cloned();
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l.value > u.value {
                return Err(BoundsError::Inconsistent {
                    d,
                    lower: l.value,
                    upper: u.value,
                });
            }
        }
        let exact = match (&lower, &upper) {
            (Some(l), Some(u)) if l.value == u.value => Some(l.value),
            _ => None,
        };
        let mut trace = Vec::new();
        match &lower {
            Some(l) => {
                trace.push("lower bound:".into());
                trace.extend(l.explain().into_iter().map(|s| format!("  {s}")));
            }
            None => trace.push("lower bound: none".into()),
        }
        match &upper {
            Some(u) => {
                trace.push("upper bound:".into());
                trace.extend(u.explain().into_iter().map(|s| format!("  {s}")));
            }
            None => trace.push("upper bound: none".into()),
        }
        if let Some(e) = exact {
            trace.push(format!("N({d}) = {e}"));
        }
        let other: Vec<&BoundFact> = lowers.iter().skip(1).chain(uppers.iter().skip(1)).collect();
        if !other.is_empty() {
            trace.push("weaker or equal facts also considered:".into());
            for f in other {
                trace.extend(f.explain().into_iter().map(|s| format!("  {s}")));
            }
        }
        let candidates = lowers.into_iter().chain(uppers).collect();
        Ok(BoundReport {
            d,
            lower,
            upper,
            exact,
            candidates,
            trace,
        })
    }
}

fn best_lower(facts: &[BoundFact]) -> Option<&BoundFact> {
    facts
        .iter()
        .filter(|f| f.relation.bounds_below())
        .min_by(|a, b| {
            b.value
                .cmp(&a.value)
                .then(a.provenance.rank().cmp(&b.provenance.rank()))
        })
}

/// N(d) = d + 1 for a prime power d >= 8, assuming the general MDS conjecture
/// for alphabet size d and dimension floor((d+2)/2).
pub fn conditional_n_upper_prime_power(
    engine: &BoundsEngine,
    d: u32,
    assume_general_mds_conjecture: bool,
) -> Result<ConditionalFact, BoundsError> {
    if !assume_general_mds_conjecture {
        return Err(BoundsError::ConjectureFlagRequired);
    }
    if d < 8 || prime_power(d).is_none() {
        return Err(BoundsError::NotApplicable(d));
    }
    let k = (d + 2) / 2;
    debug_assert!(3 < k && k < d - 1);
    let assumption = format!(
        "general MDS conjecture for alphabet size {d} and dimension {k}: since k is neither 3 nor \
         d-1, M({k},{d}) = {}",
        d + 1
    );
    let mut conjectured = BoundFact::new(
        Subject::M { k, d },
        Relation::Eq,
        d as u64 + 1,
        Provenance::ExternalCitation {
            tag: "general-mds-conjecture (assumed)".into(),
        },
    );
    conjectured.note = Some("assumed, not proven".into());
    let upper = derive_n_upper_from_m(&conjectured)?.expect("2k > d + 1 for k = floor((d+2)/2)");
    let lower = engine.n_lower_constructive(d)?;
    let mut trace = vec![format!("assuming {assumption}")];
    trace.extend(upper.explain());
    trace.extend(lower.explain());
    assert_eq!(upper.value, d as u64 + 1);
    let relation = if lower.value == upper.value {
        trace.push(format!("conditionally N({d}) = {}", d + 1));
        Relation::Eq
    } else {
        Relation::Le
    };
    Ok(ConditionalFact {
        subject: Subject::N { d },
        relation,
        value: upper.value,
        assumption,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m_fact(k: u32, d: u32, relation: Relation, value: u64) -> BoundFact {
        BoundFact::new(
            Subject::M { k, d },
            relation,
            value,
            Provenance::ExternalCitation { tag: "test".into() },
        )
    }

    #[test]
    fn value_expressions() {
        let p = |s: &str| ValueExpr::parse(&serde_json::json!(s)).unwrap();
        assert_eq!(p("2d-2").eval(10), Some(18));
        assert_eq!(p("d+1").eval(7), Some(8));
        assert_eq!(p("d").eval(5), Some(5));
        assert_eq!(p("3*d").eval(2), Some(6));
        assert_eq!(p("-d+1").eval(3), None);
        assert_eq!(
            ValueExpr::parse(&serde_json::json!(4)).unwrap().eval(99),
            Some(4)
        );
        assert!(ValueExpr::parse(&serde_json::json!("2x")).is_err());
    }

    #[test]
    fn subjects() {
        assert_eq!(
            parse_subject("M(8,10)"),
            Ok(SubjectPattern::M { k: 8, d: 10 })
        );
        assert_eq!(parse_subject("N(6)"), Ok(SubjectPattern::N(6)));
        assert_eq!(parse_subject("N(d)"), Ok(SubjectPattern::NAny));
        assert!(parse_subject("L(3,4)").is_err());
        assert_eq!(Subject::M { k: 8, d: 10 }.to_string(), "M(8,10)");
    }

    #[test]
    fn derive_examples() {
        let f = derive_n_upper_from_m(&m_fact(8, 10, Relation::Le, 11))
            .unwrap()
            .unwrap();
        assert_eq!(
            (f.subject, f.relation, f.value),
            (Subject::N { d: 10 }, Relation::Le, 15)
        );
        let f = derive_n_upper_from_m(&m_fact(2, 6, Relation::Eq, 3))
            .unwrap()
            .unwrap();
        assert_eq!(f.value, 3);
        let mut kokkala = m_fact(3, 5, Relation::Le, 6);
        kokkala.min_distance_at_least = Some(3);
        assert_eq!(derive_n_upper_from_m(&kokkala).unwrap().unwrap().value, 6);
        // no n in {4, 5} exceeds 6
        assert_eq!(
            derive_n_upper_from_m(&m_fact(2, 5, Relation::Le, 6)).unwrap(),
            None
        );
    }

    #[test]
    fn derive_checks_inputs() {
        assert!(matches!(
            derive_n_upper_from_m(&m_fact(3, 5, Relation::Ge, 6)),
            Err(BoundsError::NotAnMUpperBound(_))
        ));
        assert!(matches!(
            derive_n_upper_from_m(&m_fact(5, 5, Relation::Le, 5)),
            Err(BoundsError::InsaneFact { .. })
        ));
        // the excluded length-7 code would have distance 3, below the proviso
        let mut f = m_fact(5, 9, Relation::Le, 6);
        f.min_distance_at_least = Some(4);
        assert_eq!(derive_n_upper_from_m(&f).unwrap(), None);
    }

    #[test]
    fn fact_file_errors() {
        assert!(BoundsEngine::from_json("{").is_err());
        assert!(BoundsEngine::from_json(
            r#"[{"subject":"Q(1)","relation":"<=","value":1,"provenance":"x"}]"#
        )
        .is_err());
        assert!(BoundsEngine::from_json(
            r#"[{"subject":"N(3)","relation":"<","value":1,"provenance":"x"}]"#
        )
        .is_err());
        assert!(BoundsEngine::from_json(
            r#"[{"subject":"M(2,3)","relation":"<=","value":"d","provenance":"x"}]"#
        )
        .is_err());
        assert!(BoundsEngine::from_json(
            r#"[{"subject":"N(3)","relation":"<=","value":4,"provenance":" "}]"#
        )
        .is_err());
        assert!(BoundsEngine::from_json("[]").is_ok());
    }

    #[test]
    fn bernal_rule_scope() {
        let e = BoundsEngine::with_default_facts();
        let bernal = |d| {
            e.external_facts(d).into_iter().any(|f| {
                f.provenance
                    == Provenance::ExternalCitation {
                        tag: "bernal".into(),
                    }
            })
        };
        assert!(!bernal(2));
        assert!(bernal(3));
        assert!(bernal(10));
    }

    #[test]
    fn constructive_lower_bounds() {
        let e = BoundsEngine::with_default_facts();
        let l = e.n_lower_constructive(7).unwrap();
        assert_eq!(l.value, 8);
        assert!(l.provenance.is_verified());
        assert_eq!(e.n_lower_constructive(6).unwrap().value, 3);
        assert_eq!(e.n_lower_constructive(4).unwrap().value, 6);
        assert!(matches!(
            e.n_lower_constructive(1),
            Err(BoundsError::BadAlphabet)
        ));
    }

    #[test]
    fn small_reports() {
        let e = BoundsEngine::with_default_facts();
        for (d, n) in [(2, 3), (3, 4), (4, 6), (5, 6), (6, 3), (7, 8)] {
            let r = e.n_report(d).unwrap();
            assert_eq!(r.exact, Some(n), "d = {d}: {:#?}", r.trace);
        }
        let r = e.n_report(6).unwrap();
        assert!(matches!(
            r.upper.unwrap().provenance,
            Provenance::SearchedAndVerified { .. }
        ));
    }

    #[test]
    fn report_for_ten() {
        let e = BoundsEngine::with_default_facts();
        let r = e.n_report(10).unwrap();
        assert_eq!(r.upper.as_ref().unwrap().value, 15);
        assert_eq!(r.lower.as_ref().unwrap().value, 4);
        assert_eq!(r.exact, None);
        // the weaker citation is still recorded
        assert!(r.candidates.iter().any(|f| f.value == 18));
    }

    #[test]
    fn conditional_needs_flag_and_range() {
        let e = BoundsEngine::with_default_facts();
        assert!(matches!(
            conditional_n_upper_prime_power(&e, 8, false),
            Err(BoundsError::ConjectureFlagRequired)
        ));
        assert!(matches!(
            conditional_n_upper_prime_power(&e, 7, true),
            Err(BoundsError::NotApplicable(7))
        ));
        assert!(matches!(
            conditional_n_upper_prime_power(&e, 10, true),
            Err(BoundsError::NotApplicable(10))
        ));
        for d in [8, 9] {
            let c = conditional_n_upper_prime_power(&e, d, true).unwrap();
            assert_eq!((c.relation, c.value), (Relation::Eq, d as u64 + 1));
        }
        // unconditional report for 8 does not reach 9 from above
        let r = e.n_report(8).unwrap();
        assert_eq!(r.exact, None);
        assert_eq!(r.upper.unwrap().value, 14);
    }
}
