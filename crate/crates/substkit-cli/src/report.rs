//! JSON report builders; key order is insertion order and stays stable
//! across runs.

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use substkit::arith::{CorrelationReport, MomoReport};
use substkit::joinings::Tower;
use substkit::structure::{Classification, HeightResult, SyncFamily, WrapProfile};
use substkit::{Substitution, Symbol};

pub fn sub_json(sub: &Substitution) -> Value {
    let mut rules = Map::new();
    for a in sub.symbols() {
        rules.insert(
            sub.name(a).to_string(),
            Value::Array(
                sub.rule(a)
                    .iter()
                    .map(|s| Value::String(sub.name(*s).to_string()))
                    .collect(),
            ),
        );
    }
    json!({
        "alphabet": sub.names(),
        "lambda": sub.lambda(),
        "rules": Value::Object(rules),
    })
}

pub fn height_json(sub: &Substitution, hr: &HeightResult) -> Value {
    let mut coloring = Map::new();
    for a in sub.symbols() {
        if hr.reachable[a.index()] {
            coloring.insert(
                sub.name(a).to_string(),
                Value::from(hr.coloring[a.index()]),
            );
        }
    }
    json!({
        "h": hr.h,
        "observed_gcd": hr.observed_gcd,
        "certified": hr.certified,
        "coloring": Value::Object(coloring),
    })
}

pub fn sync_family_json(sub: &Substitution, fam: &SyncFamily) -> Value {
    let sets: Vec<Value> = fam
        .sets
        .iter()
        .zip(&fam.witness_j)
        .map(|(m, &j)| {
            json!({
                "set": m.iter().map(|a| sub.name(a).to_string()).collect::<Vec<_>>(),
                "witness_k": fam.witness_k,
                "witness_j": j.to_string(),
            })
        })
        .collect();
    json!({
        "c": fam.c,
        "sets": sets,
        "covers_alphabet": fam.covers_alphabet,
        "is_partition": fam.is_partition,
    })
}

pub fn classification_json(c: &Classification) -> Value {
    json!({
        "c": c.c,
        "h": c.h,
        "c_pure_base": c.c_pure,
        "bijective": c.bijective,
        "quasi_bijective": c.quasi_bijective,
        "synchronizing_case": c.synchronizing_case,
    })
}

pub fn wrap_json(wp: &WrapProfile) -> Value {
    json!({
        "lambda": wp.lambda,
        "c_is_one": wp.c_is_one,
        "counts": wp.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "ratios": wp.ratios,
    })
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im, "abs": z.norm() })
}

pub fn correlation_json(rep: &CorrelationReport) -> Value {
    let rows: Vec<Value> = rep
        .checkpoints
        .iter()
        .zip(&rep.means)
        .map(|(&n, &z)| {
            json!({
                "n": n,
                "re": z.re,
                "im": z.im,
                "abs": z.norm(),
            })
        })
        .collect();
    json!({
        "n": rep.n,
        "workers": rep.workers,
        "elapsed_ms": rep.elapsed.as_millis() as u64,
        "checkpoints": rows,
    })
}

pub fn momo_json(rep: &MomoReport) -> Value {
    json!({
        "value": rep.value,
        "blocks": rep.blocks,
        "b_last": rep.b_last,
        "elapsed_ms": rep.elapsed.as_millis() as u64,
    })
}

pub fn tower_json(t: &Tower) -> Value {
    let ge = &t.extension;
    let group: Vec<String> = ge
        .group
        .elements
        .iter()
        .map(|p| p.cycle_notation())
        .collect();
    let f_table: Vec<Value> = ge
        .group
        .elements
        .iter()
        .zip(&ge.f)
        .map(|(p, &v)| json!({ "element": p.cycle_notation(), "f": v }))
        .collect();
    let kernel: Vec<String> = ge
        .g0
        .iter()
        .map(|&g| ge.group.elements[g].cycle_notation())
        .collect();
    json!({
        "input": sub_json(&t.input),
        "sync_part": sub_json(&t.sync.sub),
        "join_power": t.ordered.join.power,
        "theta_join": sub_json(&t.ordered.join.sub),
        "ordered_join": sub_json(&t.ordered.sub),
        "synchronizing_column": {
            "k0": t.ordered.k0,
            "j0": t.ordered.j0.to_string(),
        },
        "group": {
            "order": ge.group.len(),
            "elements": group,
        },
        "extension_power": ge.power,
        "group_extension": sub_json(&ge.sub),
        "h_hat": ge.h_hat,
        "f_table": f_table,
        "kernel": kernel,
        "eta": sub_json(&t.eta.sub),
        "eta_h": {
            "joined_with_period": t.eta_h.joined,
            "substitution": sub_json(&t.eta_h.sub),
        },
    })
}

pub fn rule_line(sub: &Substitution, a: Symbol) -> String {
    format!("{} -> {}", sub.name(a), sub.word_string(sub.rule(a)))
}

pub fn print_rules(sub: &Substitution, indent: &str) {
    for a in sub.symbols() {
        println!("{indent}{}", rule_line(sub, a));
    }
}
