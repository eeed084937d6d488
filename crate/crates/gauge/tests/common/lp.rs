//! A minimal reader for the LP text written by the separation exporter, plus
//! a brute-force solver: enumerate every binary assignment, derive the
//! continuous variables by interval propagation through the constraints,
//! and report the best objective.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub objective: Vec<(f64, String)>,
    pub constant: f64,
    pub constraints: Vec<Constraint>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
}

fn parse_expr(tokens: &[&str]) -> (Vec<(f64, String)>, f64) {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &t in tokens {
        match t {
            "+" | "-" => {
                if let Some(c) = coef.take() {
                    constant += sign * c;
                }
                sign = if t == "-" { -1.0 } else { 1.0 };
            }
            _ => match t.parse::<f64>() {
                Ok(v) => coef = Some(v),
                Err(_) => {
                    terms.push((sign * coef.take().unwrap_or(1.0), t.to_string()));
                    sign = 1.0;
                }
            },
        }
    }
    if let Some(c) = coef {
        constant += sign * c;
    }
    (terms, constant)
}

pub fn parse(text: &str) -> Lp {
    let mut lp = Lp::default();
    let mut section = "";
    let mut objective_tokens: Vec<String> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Maximize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = match line {
                    "Maximize" => "obj",
                    "Subject To" => "st",
                    "Bounds" => "bounds",
                    "Binaries" => "bin",
                    _ => "end",
                };
                continue;
            }
            _ => {}
        }
        match section {
            "obj" => {
                let body = line.strip_prefix("obj:").unwrap_or(line);
                objective_tokens.extend(body.split_whitespace().map(String::from));
            }
            "st" => {
                let (name, body) = line.split_once(':').expect("named constraint");
                let tokens: Vec<&str> = body.split_whitespace().collect();
                let at = tokens.iter().position(|t| matches!(*t, ">=" | "<=" | "=")).expect("relation");
                let (terms, constant) = parse_expr(&tokens[..at]);
                assert_eq!(constant, 0.0, "constant on constraint left side");
                let sense = match tokens[at] {
                    ">=" => Sense::Ge,
                    "<=" => Sense::Le,
                    _ => Sense::Eq,
                };
                let (rhs_terms, rhs) = parse_expr(&tokens[at + 1..]);
                assert!(rhs_terms.is_empty());
                lp.constraints.push(Constraint { name: name.trim().to_string(), terms, sense, rhs });
            }
            "bounds" => {
                let t: Vec<&str> = line.split_whitespace().collect();
                assert_eq!((t.len(), t[1], t[3]), (5, "<=", "<="), "bound line {line}");
                lp.bounds.insert(t[2].to_string(), (t[0].parse().unwrap(), t[4].parse().unwrap()));
            }
            "bin" => lp.binaries.push(line.to_string()),
            _ => panic!("content after End: {line}"),
        }
    }
    let tokens: Vec<&str> = objective_tokens.iter().map(String::as_str).collect();
    let (terms, constant) = parse_expr(&tokens);
    lp.objective = terms;
    lp.constant = constant;
    lp
}

/// Continuous values forced by the constraints once the binaries are fixed.
/// `None` if some continuous variable is not pinned to a single value or a
/// constraint is violated.
pub fn propagate(lp: &Lp, binaries: &BTreeMap<String, f64>) -> Option<BTreeMap<String, f64>> {
    let mut lo: BTreeMap<String, f64> = lp.bounds.iter().map(|(k, v)| (k.clone(), v.0)).collect();
    let mut hi: BTreeMap<String, f64> = lp.bounds.iter().map(|(k, v)| (k.clone(), v.1)).collect();
    let value = |name: &str, lo: &BTreeMap<String, f64>, hi: &BTreeMap<String, f64>| -> Option<f64> {
        if let Some(&b) = binaries.get(name) {
            return Some(b);
        }
        (lo[name] == hi[name]).then(|| lo[name])
    };
    loop {
        let mut changed = false;
        for c in &lp.constraints {
            let unknown: Vec<&(f64, String)> =
                c.terms.iter().filter(|(_, n)| value(n, &lo, &hi).is_none()).collect();
            if unknown.len() != 1 {
                continue;
            }
            let (a, name) = unknown[0];
            let known: f64 = c
                .terms
                .iter()
                .filter(|(_, n)| n != name)
                .map(|(k, n)| k * value(n, &lo, &hi).unwrap())
                .sum();
            let bound = (c.rhs - known) / a;
            // a·v (sense) rhs − known
            let (new_lo, new_hi) = match (c.sense, *a > 0.0) {
                (Sense::Eq, _) => (Some(bound), Some(bound)),
                (Sense::Ge, true) | (Sense::Le, false) => (Some(bound), None),
                (Sense::Le, true) | (Sense::Ge, false) => (None, Some(bound)),
            };
            if let Some(l) = new_lo {
                if l > lo[name] {
                    lo.insert(name.clone(), l);
                    changed = true;
                }
            }
            if let Some(h) = new_hi {
                if h < hi[name] {
                    hi.insert(name.clone(), h);
                    changed = true;
                }
            }
            if lo[name] > hi[name] {
                return None;
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = BTreeMap::new();
    for name in lp.bounds.keys() {
        out.insert(name.clone(), value(name, &lo, &hi)?);
    }
    // Every constraint must hold at the derived point.
    for c in &lp.constraints {
        let lhs: f64 = c
            .terms
            .iter()
            .map(|(k, n)| k * binaries.get(n).or_else(|| out.get(n)).copied().unwrap())
            .sum();
        let ok = match c.sense {
            Sense::Ge => lhs >= c.rhs,
            Sense::Le => lhs <= c.rhs,
            Sense::Eq => lhs == c.rhs,
        };
        if !ok {
            return None;
        }
    }
    Some(out)
}

pub struct Solution {
    pub objective: f64,
    pub binaries: BTreeMap<String, f64>,
    pub continuous: BTreeMap<String, f64>,
}

/// Calls `visit` for every binary assignment with the forced continuous
/// values (or `None` when they are not uniquely determined).
pub fn for_each_assignment(lp: &Lp, mut visit: impl FnMut(&BTreeMap<String, f64>, Option<&BTreeMap<String, f64>>)) {
    let k = lp.binaries.len();
    assert!(k <= 24, "too many binaries to enumerate");
    for mask in 0u64..(1 << k) {
        let bins: BTreeMap<String, f64> =
            lp.binaries.iter().enumerate().map(|(i, n)| (n.clone(), ((mask >> i) & 1) as f64)).collect();
        let cont = propagate(lp, &bins);
        visit(&bins, cont.as_ref());
    }
}

pub fn evaluate(lp: &Lp, bins: &BTreeMap<String, f64>, cont: &BTreeMap<String, f64>) -> f64 {
    lp.constant
        + lp.objective
            .iter()
            .map(|(k, n)| k * bins.get(n).or_else(|| cont.get(n)).copied().unwrap())
            .sum::<f64>()
}

/// Exhaustive maximization. Panics if some assignment leaves the chain
/// variables undetermined.
pub fn solve(lp: &Lp) -> Solution {
    let mut best: Option<Solution> = None;
    for_each_assignment(lp, |bins, cont| {
        let cont = cont.expect("chain variables determined by the binaries");
        let obj = evaluate(lp, bins, cont);
        if best.as_ref().is_none_or(|b| obj > b.objective) {
            best = Some(Solution { objective: obj, binaries: bins.clone(), continuous: cont.clone() });
        }
    });
    best.expect("at least one assignment")
}
