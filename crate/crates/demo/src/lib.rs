//! Browser demo: three operations exported through wasm-bindgen, each
//! returning a JSON string for the page in `www/` to render.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use amekit::ame::{state_from_code, verify_ame_combinatorial};
use amekit::bounds::{conditional_n_upper_prime_power, BoundsEngine, BoundsError};
use amekit::field::make_field;
use amekit::latin::{code_to_hypercubes, hypercubes_to_code, mols_check, HypercubeSet, LatinHypercube};
use amekit::rs::{rs_code, Extension, RsParams};
use amekit::search::{analyse_square, count_reduced, for_each_reduced};

pub const MAX_MOLS_ORDER: u32 = 32;
pub const MAX_EXPLORER_ORDER: usize = 6;
pub const MAX_TABLE_D: u32 = 16;

fn rows(d: usize, flat: impl IntoIterator<Item = u32>) -> Vec<Vec<u32>> {
    let flat: Vec<u32> = flat.into_iter().collect();
    flat.chunks(d).map(<[u32]>::to_vec).collect()
}

/// The q - 1 mutually orthogonal latin squares read off the singly extended
/// Reed–Solomon code of dimension 2 over GF(q).
pub fn mols_from_rs(q: u32) -> Result<Value, String> {
    if q > MAX_MOLS_ORDER {
        return Err(format!("order {q} is above the demo limit {MAX_MOLS_ORDER}"));
    }
    let field = make_field(q).map_err(|e| e.to_string())?;
    let params = RsParams::new(q, 2, Extension::Single).map_err(|e| e.to_string())?;
    let code = rs_code(&params).map_err(|e| e.to_string())?;
    let set = code_to_hypercubes(&code).map_err(|e| e.to_string())?;
    let squares: Vec<Vec<Vec<u32>>> = set
        .cubes
        .iter()
        .map(|c| rows(q as usize, c.values().iter().map(|&v| v as u32)))
        .collect();
    Ok(json!({
        "q": q,
        "modulus": field.modulus,
        "code_length": code.n(),
        "codewords": code.len(),
        "squares": squares,
        "mutually_orthogonal": mols_check(&set).map_err(|e| e.to_string())?,
    }))
}

/// Reduced latin square number `index` of order `d`, its transversals, and an
/// orthogonal mate with the AME(4, d) state it yields, if one exists.
pub fn explore_reduced_square(d: usize, index: u64) -> Result<Value, String> {
    if !(1..=MAX_EXPLORER_ORDER).contains(&d) {
        return Err(format!("order must be between 1 and {MAX_EXPLORER_ORDER}"));
    }
    let count = count_reduced(d).map_err(|e| e.to_string())?;
    if index >= count {
        return Err(format!("order {d} has {count} reduced squares; index {index} is out of range"));
    }
    let mut seen = 0u64;
    let mut grid = Vec::new();
    for_each_reduced(d, &mut |g| {
        if seen == index {
            grid = g.to_vec();
            return false;
        }
        seen += 1;
        true
    })
    .map_err(|e| e.to_string())?;
    let analysis = analyse_square(d, &grid);
    let square = rows(d, grid.iter().map(|&v| v as u32));
    let mut out = json!({
        "d": d,
        "index": index,
        "count": count,
        "square": square,
        "transversals": analysis.transversals,
        "mate": Value::Null,
        "ame_state": Value::Null,
    });
    if let Some(mate) = analysis.mate {
        let cube = |g: &[u8]| LatinHypercube::new(2, d as u32, g.iter().map(|&v| v as u32).collect());
        let set = HypercubeSet::new(
            2,
            d as u32,
            vec![cube(&grid).map_err(|e| e.to_string())?, cube(&mate).map_err(|e| e.to_string())?],
        )
        .map_err(|e| e.to_string())?;
        let code = hypercubes_to_code(&set).map_err(|e| e.to_string())?;
        let state = state_from_code(&code).map_err(|e| e.to_string())?;
        let verdict = verify_ame_combinatorial(&state).map_err(|e| e.to_string())?;
        out["mate"] = json!(rows(d, mate.iter().map(|&v| v as u32)));
        out["ame_state"] = json!({
            "n": 4,
            "d": d,
            "kets": code.to_rows(),
            "is_ame": verdict.is_ame,
            "partitions_checked": verdict.partitions_checked,
        });
    }
    Ok(out)
}

/// Bounds on N(d) for d = 2..=max_d, with derivations.
pub fn bounds_table(max_d: u32, assume_mds_conjecture: bool) -> Result<Value, String> {
    if !(2..=MAX_TABLE_D).contains(&max_d) {
        return Err(format!("table size must be between 2 and {MAX_TABLE_D}"));
    }
    let engine = BoundsEngine::with_default_facts();
    let mut table = Vec::new();
    for d in 2..=max_d {
        let r = engine.n_report(d).map_err(|e| e.to_string())?;
        let conditional = if assume_mds_conjecture {
            match conditional_n_upper_prime_power(&engine, d, true) {
                Ok(c) => json!(c),
                Err(BoundsError::NotApplicable(_)) => Value::Null,
                Err(e) => return Err(e.to_string()),
            }
        } else {
            Value::Null
        };
        table.push(json!({
            "d": d,
            "lower": r.lower.as_ref().map(|f| f.value),
            "upper": r.upper.as_ref().map(|f| f.value),
            "exact": r.exact,
            "lower_provenance": r.lower.as_ref().map(|f| f.provenance.clone()),
            "upper_provenance": r.upper.as_ref().map(|f| f.provenance.clone()),
            "trace": r.trace,
            "conditional": conditional,
        }));
    }
    Ok(json!(table))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = mols)]
pub fn mols_js(q: u32) -> Result<String, JsValue> {
    to_js(mols_from_rs(q))
}

#[wasm_bindgen(js_name = reducedSquare)]
pub fn reduced_square_js(d: usize, index: u32) -> Result<String, JsValue> {
    to_js(explore_reduced_square(d, index as u64))
}

#[wasm_bindgen(js_name = boundsTable)]
pub fn bounds_table_js(max_d: u32, assume_mds_conjecture: bool) -> Result<String, JsValue> {
    to_js(bounds_table(max_d, assume_mds_conjecture))
}
