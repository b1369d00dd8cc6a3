//! Browser bindings for exploring co-ranking and merge partitioning.
//!
//! Every export takes plain strings/numbers and returns a JSON string; the
//! page in `www/` draws them. The `*_json` functions hold the logic so they
//! can be tested natively.

use corank::coranker::{co_rank_trace, iteration_bound, log2_width_bound, Violation};
use corank::genbench::{generate, DistKind, Distribution};
use corank::parmerge::plan;
use corank::seqmerge::{stable_merge_by, tag, Origin, Tagged};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Step {
    violation: &'static str,
    delta: usize,
    a: usize,
    b: usize,
    a_low: usize,
    b_low: usize,
}

#[derive(Serialize)]
struct Trace {
    rank: usize,
    a: usize,
    b: usize,
    steps: Vec<Step>,
    bound: u32,
    log2_width_bound: u32,
}

#[derive(Serialize)]
struct Block {
    worker: usize,
    output: [usize; 2],
    a: [usize; 2],
    b: [usize; 2],
}

#[derive(Serialize)]
struct Cell {
    key: u64,
    from_a: bool,
    index: usize,
}

#[derive(Serialize)]
struct Partition {
    blocks: Vec<Block>,
    merged: Vec<Cell>,
}

#[derive(Serialize)]
struct Inputs {
    a: Vec<u64>,
    b: Vec<u64>,
}

/// Parses comma/whitespace-separated keys and checks they are sorted.
pub fn parse_keys(text: &str) -> Result<Vec<u64>, String> {
    let keys = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match keys.windows(2).position(|w| w[1] < w[0]) {
        Some(p) => Err(format!("keys must be nondecreasing (position {})", p + 1)),
        None => Ok(keys),
    }
}

pub fn trace_json(a: &str, b: &str, rank: usize) -> Result<String, String> {
    let (a, b) = (parse_keys(a)?, parse_keys(b)?);
    let (result, steps) = co_rank_trace(rank, &a, &b, |x, y| x < y).map_err(|e| e.to_string())?;
    let trace = Trace {
        rank,
        a: result.a,
        b: result.b,
        steps: steps
            .into_iter()
            .map(|s| Step {
                violation: match s.violation {
                    Violation::TooManyFromA => "too-many-from-a",
                    Violation::TooManyFromB => "too-many-from-b",
                },
                delta: s.delta,
                a: s.a,
                b: s.b,
                a_low: s.a_low,
                b_low: s.b_low,
            })
            .collect(),
        bound: iteration_bound(a.len(), b.len(), rank),
        log2_width_bound: log2_width_bound(a.len(), b.len(), rank),
    };
    serde_json::to_string(&trace).map_err(|e| e.to_string())
}

pub fn partition_json(a: &str, b: &str, workers: usize) -> Result<String, String> {
    let (a, b) = (parse_keys(a)?, parse_keys(b)?);
    let plan = plan(&a, &b, workers).map_err(|e| e.to_string())?;
    let (ta, tb) = (tag(&a, Origin::FromA), tag(&b, Origin::FromB));
    let mut merged = vec![
        Tagged {
            key: 0,
            origin: Origin::FromA,
            index: 0
        };
        a.len() + b.len()
    ];
    // Each worker's step, run in turn: no threads or clock on wasm32-unknown-unknown.
    for blk in &plan.assignments {
        stable_merge_by(
            &ta[blk.a.clone()],
            &tb[blk.b.clone()],
            &mut merged[blk.output.clone()],
            Tagged::key_less,
        )
        .map_err(|e| e.to_string())?;
    }
    let partition = Partition {
        blocks: plan
            .assignments
            .into_iter()
            .map(|blk| Block {
                worker: blk.worker,
                output: [blk.output.start, blk.output.end],
                a: [blk.a.start, blk.a.end],
                b: [blk.b.start, blk.b.end],
            })
            .collect(),
        merged: merged
            .into_iter()
            .map(|t| Cell {
                key: t.key,
                from_a: t.origin == Origin::FromA,
                index: t.index,
            })
            .collect(),
    };
    serde_json::to_string(&partition).map_err(|e| e.to_string())
}

pub fn generate_json(dist: &str, m: usize, n: usize, seed: u64) -> Result<String, String> {
    let kind: DistKind = dist.parse().map_err(|e: corank::Error| e.to_string())?;
    let (a, b) = generate(Distribution::new(kind, seed), m, n);
    serde_json::to_string(&Inputs { a, b }).map_err(|e| e.to_string())
}

/// Co-rank search trace for `rank`.
#[wasm_bindgen(js_name = traceCorank)]
pub fn trace_corank(a: &str, b: &str, rank: usize) -> Result<String, JsError> {
    trace_json(a, b, rank).map_err(|e| JsError::new(&e))
}

/// Per-worker blocks and the tagged merged output.
#[wasm_bindgen(js_name = partitionMerge)]
pub fn partition_merge(a: &str, b: &str, workers: usize) -> Result<String, JsError> {
    partition_json(a, b, workers).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = generateInputs)]
pub fn generate_inputs(dist: &str, m: usize, n: usize, seed: u64) -> Result<String, JsError> {
    generate_json(dist, m, n, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn parses_and_rejects() {
        assert_eq!(parse_keys("1, 2  2\n5").unwrap(), [1, 2, 2, 5]);
        assert_eq!(parse_keys("").unwrap(), Vec::<u64>::new());
        assert!(parse_keys("3,1").unwrap_err().contains("nondecreasing"));
        assert!(parse_keys("1,x").is_err());
    }

    #[test]
    fn trace_reports_result_and_bounds() {
        let v: Value = serde_json::from_str(&trace_json("1,3,5,7", "2,4,6,8", 4).unwrap()).unwrap();
        assert_eq!((v["a"].as_u64(), v["b"].as_u64()), (Some(2), Some(2)));
        let steps = v["steps"].as_array().unwrap();
        assert!(steps.len() as u64 <= v["bound"].as_u64().unwrap());
        assert_eq!(steps[0]["violation"], "too-many-from-a");

        assert!(trace_json("1", "2", 5).unwrap_err().contains("rank out of range"));
    }

    #[test]
    fn partition_is_stable_and_balanced() {
        let v: Value = serde_json::from_str(&partition_json("2,2", "2,2", 2).unwrap()).unwrap();
        let blocks = v["blocks"].as_array().unwrap();
        assert_eq!(blocks[0]["a"], serde_json::json!([0, 2]));
        assert_eq!(blocks[1]["b"], serde_json::json!([0, 2]));
        let from_a: Vec<bool> = v["merged"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["from_a"].as_bool().unwrap())
            .collect();
        assert_eq!(from_a, [true, true, false, false]);
        assert!(partition_json("1", "2", 0).is_err());
    }

    #[test]
    fn generates_requested_sizes() {
        let v: Value = serde_json::from_str(&generate_json("few-distinct:3", 5, 7, 1).unwrap()).unwrap();
        assert_eq!(v["a"].as_array().unwrap().len(), 5);
        assert_eq!(v["b"].as_array().unwrap().len(), 7);
        assert!(generate_json("nope", 1, 1, 0).is_err());
    }
}
