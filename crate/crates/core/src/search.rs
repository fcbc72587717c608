//! Exhaustive search for orthogonal pairs of latin squares.
//!
//! Any orthogonal pair can be brought to a pair whose first square is reduced
//! (first row and first column in natural order): permuting rows or columns of
//! both squares together, or renaming the symbols of one square, preserves
//! orthogonality. So an order has an orthogonal pair iff some reduced square
//! has an orthogonal mate.
//!
//! A square has a mate iff its cells split into `d` disjoint transversals; the
//! mate then gives symbol `s` to the cells of the `s`-th transversal. Mate
//! existence is decided as an exact cover over the transversal list.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::latin::{are_orthogonal, is_latin, LatinError, LatinHypercube};

/// Largest order [`for_each_reduced`] will enumerate.
pub const MAX_ENUMERATION_ORDER: usize = 7;

/// Largest order handled by the mate finders (cells fit in a `u128`).
pub const MAX_MATE_ORDER: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("order {order} outside the supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("input is not a latin square")]
    NotLatinSquare,
    #[error(transparent)]
    Latin(#[from] LatinError),
}

fn check_order(order: usize, max: usize) -> Result<(), SearchError> {
    if order == 0 || order > max {
        return Err(SearchError::OrderOutOfRange { order, max });
    }
    Ok(())
}

/// A latin square with first row and first column `0, 1, ..., d-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedSquare {
    pub d: usize,
    /// Row-major entries.
    pub values: Vec<u8>,
}

impl ReducedSquare {
    pub fn to_hypercube(&self) -> Result<LatinHypercube, LatinError> {
        LatinHypercube::new(
            2,
            self.d as u32,
            self.values.iter().map(|&v| v as u32).collect(),
        )
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.values.chunks(self.d).map(<[u8]>::to_vec).collect()
    }
}

/// Row-by-row backtracking over the free cells of a reduced square.
struct Filler {
    d: usize,
    grid: Vec<u8>,
    row_used: Vec<u32>,
    col_used: Vec<u32>,
}

impl Filler {
    fn new(d: usize) -> Filler {
        let mut f = Filler {
            d,
            grid: vec![0; d * d],
            row_used: vec![0; d],
            col_used: vec![0; d],
        };
        for i in 0..d {
            f.place(0, i, i as u8);
            if i > 0 {
                f.place(i, 0, i as u8);
            }
        }
        f
    }

    fn place(&mut self, r: usize, c: usize, s: u8) {
        self.grid[r * self.d + c] = s;
        self.row_used[r] |= 1 << s;
        self.col_used[c] |= 1 << s;
    }

    fn unplace(&mut self, r: usize, c: usize, s: u8) {
        self.row_used[r] &= !(1 << s);
        self.col_used[c] &= !(1 << s);
    }

    /// Fills cells from `cell` onward (row-major over rows >= 1, columns >= 1).
    /// Returns `false` if the callback asked to stop.
    fn fill(&mut self, cell: usize, end: usize, f: &mut dyn FnMut(&[u8]) -> bool) -> bool {
        if cell == end {
            return f(&self.grid);
        }
        let d = self.d;
        let (r, c) = (cell / (d - 1) + 1, cell % (d - 1) + 1);
        let free = !(self.row_used[r] | self.col_used[c]) & ((1u32 << d) - 1);
        let mut bits = free;
        while bits != 0 {
            let s = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            self.place(r, c, s);
            let go_on = self.fill(cell + 1, end, f);
            self.unplace(r, c, s);
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Every valid second row of a reduced square of order `d`, in lexicographic
/// order. These are the units of parallel work.
pub fn second_rows(d: usize) -> Result<Vec<Vec<u8>>, SearchError> {
    check_order(d, MAX_ENUMERATION_ORDER)?;
    if d < 2 {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut filler = Filler::new(d);
    filler.fill(0, d - 1, &mut |grid| {
        out.push(grid[d..2 * d].to_vec());
        true
    });
    Ok(out)
}

/// Visits every reduced square whose second row is `row1` (ignored for
/// `d = 1`), in lexicographic order. The callback returns `false` to stop.
pub fn for_each_reduced_with_second_row(
    d: usize,
    row1: &[u8],
    f: &mut dyn FnMut(&[u8]) -> bool,
) -> Result<(), SearchError> {
    check_order(d, MAX_ENUMERATION_ORDER)?;
    if d == 1 {
        f(&[0]);
        return Ok(());
    }
    let mut filler = Filler::new(d);
    for (c, &s) in row1.iter().enumerate().skip(1) {
        if filler.row_used[1] & (1 << s) != 0 || filler.col_used[c] & (1 << s) != 0 {
            return Ok(());
        }
        filler.place(1, c, s);
    }
    filler.fill(d - 1, (d - 1) * (d - 1), f);
    Ok(())
}

/// Visits every reduced latin square of order `d` exactly once, in
/// lexicographic order.
pub fn for_each_reduced(d: usize, f: &mut dyn FnMut(&[u8]) -> bool) -> Result<(), SearchError> {
    check_order(d, MAX_ENUMERATION_ORDER)?;
    if d == 1 {
        f(&[0]);
        return Ok(());
    }
    let mut filler = Filler::new(d);
    filler.fill(0, (d - 1) * (d - 1), f);
    Ok(())
}

pub fn count_reduced(d: usize) -> Result<u64, SearchError> {
    let mut count = 0u64;
    for_each_reduced(d, &mut |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

/// All reduced squares of order `d`, collected. Prefer [`for_each_reduced`]
/// at order 7.
pub fn enumerate_reduced(d: usize) -> Result<Vec<ReducedSquare>, SearchError> {
    let mut out = Vec::new();
    for_each_reduced(d, &mut |g| {
        out.push(ReducedSquare {
            d,
            values: g.to_vec(),
        });
        true
    })?;
    Ok(out)
}

/// One cell per row and column, all symbols distinct. `columns[r]` is the
/// column used in row `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Transversal {
    pub columns: Vec<u8>,
}

impl Transversal {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .map(|(r, &c)| (r, c as usize))
    }

    fn mask(&self, d: usize) -> u128 {
        self.cells().fold(0, |m, (r, c)| m | 1u128 << (r * d + c))
    }
}

fn square_entries(square: &LatinHypercube) -> Result<(usize, Vec<u8>), SearchError> {
    if square.k() != 2 || !is_latin(square) {
        return Err(SearchError::NotLatinSquare);
    }
    let d = square.d() as usize;
    check_order(d, MAX_MATE_ORDER)?;
    Ok((d, square.values().iter().map(|&v| v as u8).collect()))
}

/// All transversals of a latin square given as raw row-major entries.
pub fn transversals_of(d: usize, grid: &[u8]) -> Vec<Transversal> {
    fn go(
        d: usize,
        grid: &[u8],
        row: usize,
        cols: u32,
        syms: u32,
        path: &mut Vec<u8>,
        out: &mut Vec<Transversal>,
    ) {
        if row == d {
            out.push(Transversal {
                columns: path.clone(),
            });
            return;
        }
        for c in 0..d {
            let s = grid[row * d + c];
            if cols & (1 << c) == 0 && syms & (1 << s) == 0 {
                path.push(c as u8);
                go(d, grid, row + 1, cols | 1 << c, syms | 1 << s, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(d, grid, 0, 0, 0, &mut Vec::with_capacity(d), &mut out);
    out
}

pub fn find_transversals(square: &LatinHypercube) -> Result<Vec<Transversal>, SearchError> {
    let (d, grid) = square_entries(square)?;
    Ok(transversals_of(d, &grid))
}

/// Picks `d` pairwise disjoint transversals, returning their indices.
///
/// Depth-first search that always branches on the uncovered cell with the
/// fewest compatible transversals, trying candidates in list order.
pub fn disjoint_transversals(d: usize, transversals: &[Transversal]) -> Option<Vec<usize>> {
    let cells = d * d;
    let masks: Vec<u128> = transversals.iter().map(|t| t.mask(d)).collect();
    let full: u128 = if cells == 128 {
        u128::MAX
    } else {
        (1u128 << cells) - 1
    };

    fn go(masks: &[u128], covered: u128, full: u128, chosen: &mut Vec<usize>) -> bool {
        if covered == full {
            return true;
        }
        let mut best: Option<(u32, usize)> = None;
        let mut free = !covered & full;
        while free != 0 {
            let cell = free.trailing_zeros() as usize;
            free &= free - 1;
            let bit = 1u128 << cell;
            let options = masks
                .iter()
                .filter(|&&m| m & bit != 0 && m & covered == 0)
                .count() as u32;
            if best.is_none_or(|(n, _)| options < n) {
                best = Some((options, cell));
                if options == 0 {
                    return false;
                }
            }
        }
        let (_, cell) = best.expect("uncovered cell exists");
        let bit = 1u128 << cell;
        for (i, &m) in masks.iter().enumerate() {
            if m & bit != 0 && m & covered == 0 {
                chosen.push(i);
                if go(masks, covered | m, full, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::with_capacity(d);
    go(&masks, 0, full, &mut chosen).then_some(chosen)
}

fn mate_from_transversals(d: usize, transversals: &[Transversal], chosen: &[usize]) -> Vec<u8> {
    let mut mate = vec![0u8; d * d];
    for (s, &t) in chosen.iter().enumerate() {
        for (r, c) in transversals[t].cells() {
            mate[r * d + c] = s as u8;
        }
    }
    mate
}

fn to_square(d: usize, grid: &[u8]) -> LatinHypercube {
    LatinHypercube::new(2, d as u32, grid.iter().map(|&v| v as u32).collect())
        .expect("grid has d*d entries below d")
}

/// Result of the transversal route for one square.
#[derive(Debug, Clone)]
pub struct MateAnalysis {
    pub transversals: usize,
    pub mate: Option<Vec<u8>>,
}

pub fn analyse_square(d: usize, grid: &[u8]) -> MateAnalysis {
    let ts = transversals_of(d, grid);
    let mate = if ts.len() < d {
        None
    } else {
        disjoint_transversals(d, &ts).map(|chosen| mate_from_transversals(d, &ts, &chosen))
    };
    MateAnalysis {
        transversals: ts.len(),
        mate,
    }
}

/// An orthogonal mate of `square`, found through a transversal decomposition.
pub fn has_orthogonal_mate(square: &LatinHypercube) -> Result<Option<LatinHypercube>, SearchError> {
    let (d, grid) = square_entries(square)?;
    match analyse_square(d, &grid).mate {
        None => Ok(None),
        Some(mate) => {
            let mate = to_square(d, &mate);
            assert!(
                are_orthogonal(square, &mate)?,
                "transversal decomposition produced a non-orthogonal mate"
            );
            Ok(Some(mate))
        }
    }
}

/// Looks for an orthogonal mate by filling the second square cell by cell
/// under the latin and pair-distinctness constraints. Its first row is fixed
/// to `0..d-1`, which loses nothing since symbols of a mate can be renamed.
///
/// Independent of transversals; used to cross-check [`has_orthogonal_mate`]
/// at small orders.
pub fn direct_mate_search(square: &LatinHypercube) -> Result<Option<LatinHypercube>, SearchError> {
    let (d, grid) = square_entries(square)?;
    struct State<'a> {
        d: usize,
        grid: &'a [u8],
        mate: Vec<u8>,
        row_used: Vec<u32>,
        col_used: Vec<u32>,
        pairs: u128,
    }
    fn go(st: &mut State, cell: usize) -> bool {
        let d = st.d;
        if cell == d * d {
            return true;
        }
        let (r, c) = (cell / d, cell % d);
        let a = st.grid[cell] as usize;
        for s in 0..d {
            let pair = 1u128 << (a * d + s);
            if st.row_used[r] & (1 << s) != 0
                || st.col_used[c] & (1 << s) != 0
                || st.pairs & pair != 0
            {
                continue;
            }
            st.mate[cell] = s as u8;
            st.row_used[r] |= 1 << s;
            st.col_used[c] |= 1 << s;
            st.pairs |= pair;
            if go(st, cell + 1) {
                return true;
            }
            st.row_used[r] &= !(1 << s);
            st.col_used[c] &= !(1 << s);
            st.pairs &= !pair;
        }
        false
    }
    let mut st = State {
        d,
        grid: &grid,
        mate: vec![0; d * d],
        row_used: vec![0; d],
        col_used: vec![0; d],
        pairs: 0,
    };
    for c in 0..d {
        st.mate[c] = c as u8;
        st.row_used[0] |= 1 << c;
        st.col_used[c] |= 1 << c;
        st.pairs |= 1u128 << (grid[c] as usize * d + c);
    }
    if !go(&mut st, d) {
        return Ok(None);
    }
    let mate = to_square(d, &st.mate);
    assert!(are_orthogonal(square, &mate)?);
    Ok(Some(mate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Exists,
    NotExists,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExaminationPolicy {
    /// Every reduced square is examined.
    FullExhaustion,
    /// Squares are examined in lexicographic order up to and including the
    /// first one with a mate.
    FirstHit,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransversalStats {
    /// Number of transversals -> number of squares with that many.
    pub histogram: BTreeMap<usize, u64>,
    pub min: Option<usize>,
    pub max: Option<usize>,
    pub total: u64,
}

impl TransversalStats {
    fn record(&mut self, count: usize) {
        *self.histogram.entry(count).or_default() += 1;
        self.min = Some(self.min.map_or(count, |m| m.min(count)));
        self.max = Some(self.max.map_or(count, |m| m.max(count)));
        self.total += count as u64;
    }

    fn merge(&mut self, other: &TransversalStats) {
        for (&count, &n) in &other.histogram {
            *self.histogram.entry(count).or_default() += n;
        }
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.total += other.total;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstHit {
    /// Position of the square in the lexicographic enumeration, from 0.
    pub index: u64,
    pub square: Vec<Vec<u8>>,
    pub mate: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchCertificate {
    pub order: usize,
    pub verdict: Verdict,
    pub policy: ExaminationPolicy,
    pub squares_examined: u64,
    pub squares_with_mate: u64,
    pub first_hit: Option<FirstHit>,
    pub transversal_stats: TransversalStats,
    pub workers: usize,
    pub elapsed_seconds: f64,
    pub method: String,
}

impl SearchCertificate {
    /// Fields that must not depend on timing or worker count.
    pub fn deterministic_part(
        &self,
    ) -> (usize, Verdict, u64, u64, Option<FirstHit>, TransversalStats) {
        (
            self.order,
            self.verdict,
            self.squares_examined,
            self.squares_with_mate,
            self.first_hit.clone(),
            self.transversal_stats.clone(),
        )
    }
}

const METHOD: &str = "Every reduced latin square of the given order is enumerated by \
row-by-row backtracking. Row and column permutations applied to both squares of an \
orthogonal pair, and symbol renaming within either square, preserve orthogonality, and \
every square reduces under these moves, so an orthogonal pair exists iff some reduced \
square has a mate. A square has a mate iff its cells split into d disjoint transversals; \
this is decided by exact cover over the list of its transversals.";

pub type ProgressFn = dyn Fn(usize, usize) + Send + Sync;

#[derive(Clone, Default)]
pub struct SearchOptions {
    pub workers: usize,
    pub exhaustive: bool,
    /// Called with (units finished, total units) after each unit of work.
    pub progress: Option<Arc<ProgressFn>>,
}

impl SearchOptions {
    pub fn workers(workers: usize) -> Self {
        SearchOptions {
            workers,
            ..Default::default()
        }
    }
}

#[derive(Debug, Default, Clone)]
struct UnitResult {
    squares: u64,
    with_mate: u64,
    stats: TransversalStats,
    /// Local index within the unit, the square and its mate.
    hit: Option<(u64, Vec<u8>, Vec<u8>)>,
}

fn run_unit(d: usize, row1: Option<&[u8]>, stop_at_hit: bool) -> Result<UnitResult, SearchError> {
    let mut res = UnitResult::default();
    let mut visit = |g: &[u8]| {
        let analysis = analyse_square(d, g);
        res.stats.record(analysis.transversals);
        res.squares += 1;
        if let Some(mate) = analysis.mate {
            res.with_mate += 1;
            if res.hit.is_none() {
                res.hit = Some((res.squares - 1, g.to_vec(), mate));
            }
            if stop_at_hit {
                return false;
            }
        }
        true
    };
    match row1 {
        Some(row) => for_each_reduced_with_second_row(d, row, &mut visit)?,
        None => for_each_reduced(d, &mut visit)?,
    }
    Ok(res)
}

fn rows_of(d: usize, grid: &[u8]) -> Vec<Vec<u8>> {
    grid.chunks(d).map(<[u8]>::to_vec).collect()
}

/// Decides whether an orthogonal pair of latin squares of order `d` exists.
///
/// Seconds since the call; always 0 where the platform has no clock.
#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl Fn() -> f64 {
    let start = std::time::Instant::now();
    move || start.elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl Fn() -> f64 {
    || 0.0
}

/// Work is split by the second row of the reduced square. With
/// `exhaustive = false` the search stops at the lexicographically first
/// square with a mate; the examined count and statistics cover exactly the
/// squares up to that one, whatever the worker count.
pub fn orthogonal_pair_exists(
    d: usize,
    opts: &SearchOptions,
) -> Result<SearchCertificate, SearchError> {
    check_order(d, MAX_ENUMERATION_ORDER)?;
    let elapsed = stopwatch();
    let workers = opts.workers.max(1);
    let units: Vec<Option<Vec<u8>>> = if d < 2 {
        vec![None]
    } else {
        second_rows(d)?.into_iter().map(Some).collect()
    };
    let stop_at_hit = !opts.exhaustive;
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let best_hit = AtomicUsize::new(usize::MAX);
    let results: Mutex<Vec<Option<UnitResult>>> = Mutex::new(vec![None; units.len()]);
    let failure: Mutex<Option<SearchError>> = Mutex::new(None);

    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= units.len() {
            break;
        }
        // units after a known hit cannot change the first-hit answer
        if stop_at_hit && i > best_hit.load(Ordering::SeqCst) {
            continue;
        }
        match run_unit(d, units[i].as_deref(), stop_at_hit) {
            Ok(res) => {
                if res.hit.is_some() {
                    best_hit.fetch_min(i, Ordering::SeqCst);
                }
                results.lock().unwrap()[i] = Some(res);
            }
            Err(e) => {
                *failure.lock().unwrap() = Some(e);
                break;
            }
        }
        let finished = done.fetch_add(1, Ordering::SeqCst) + 1;
        if let Some(progress) = &opts.progress {
            progress(finished, units.len());
        }
    };
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(work);
            }
        });
    }
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let results = results.into_inner().unwrap();

    let hit_unit = if stop_at_hit {
        results
            .iter()
            .position(|r| r.as_ref().is_some_and(|r| r.hit.is_some()))
    } else {
        None
    };
    let considered = hit_unit.map_or(results.len(), |h| h + 1);
    let mut stats = TransversalStats::default();
    let mut examined = 0u64;
    let mut with_mate = 0u64;
    let mut first_hit = None;
    for r in &results[..considered] {
        let r = r
            .as_ref()
            .expect("units before the first hit are always run");
        if first_hit.is_none() {
            if let Some((local, square, mate)) = &r.hit {
                first_hit = Some(FirstHit {
                    index: examined + local,
                    square: rows_of(d, square),
                    mate: rows_of(d, mate),
                });
            }
        }
        examined += r.squares;
        with_mate += r.with_mate;
        stats.merge(&r.stats);
    }

    Ok(SearchCertificate {
        order: d,
        verdict: if with_mate > 0 {
            Verdict::Exists
        } else {
            Verdict::NotExists
        },
        policy: if stop_at_hit {
            ExaminationPolicy::FirstHit
        } else {
            ExaminationPolicy::FullExhaustion
        },
        squares_examined: examined,
        squares_with_mate: with_mate,
        first_hit,
        transversal_stats: stats,
        workers,
        elapsed_seconds: elapsed(),
        method: METHOD.to_string(),
    })
}
