//! Exchange formats: coordinate-list matrix text and domain descriptors.

use std::fmt::Write as _;

use serde_json::{json, Value};
use spectrans_core::lattice::DomainKind;
use spectrans_core::{LatticeDomain, SparseHermitianOperator};

use crate::output::fmt_f64;

/// `row col value` per line, 1-based, sorted by row then column.
pub fn coo_text(op: &SparseHermitianOperator<'_>) -> String {
    let mut entries: Vec<(usize, usize, f64)> = op.triplets().collect();
    entries.sort_by_key(|e| (e.0, e.1));
    let mut out = String::with_capacity(entries.len() * 32);
    for (i, j, v) in entries {
        writeln!(out, "{} {} {}", i + 1, j + 1, fmt_f64(v)).expect("writing to a String");
    }
    out
}

/// Parses [`coo_text`] back into 0-based triplets.
pub fn parse_coo(text: &str) -> Result<Vec<(usize, usize, f64)>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, line)| {
            let mut it = line.split_whitespace();
            let mut idx = || -> Result<usize, String> {
                let v: usize = it.next().ok_or(format!("line {}: missing index", k + 1))?.parse().map_err(|e| format!("line {}: {e}", k + 1))?;
                v.checked_sub(1).ok_or(format!("line {}: indices are 1-based", k + 1))
            };
            let (i, j) = (idx()?, idx()?);
            let v: f64 = it.next().ok_or(format!("line {}: missing value", k + 1))?.parse().map_err(|e| format!("line {}: {e}", k + 1))?;
            Ok((i, j, v))
        })
        .collect()
}

/// Generator name and parameters; never a site list.
pub fn domain_descriptor(domain: &LatticeDomain) -> Value {
    let (generator, params) = match domain.kind() {
        DomainKind::Box { dim, half_width } => ("box", json!({ "dim": dim, "half_width": half_width })),
        DomainKind::Spiral { turns } => ("spiral", json!({ "turns": turns })),
        DomainKind::HalfLine { length } => ("half-line", json!({ "length": length })),
    };
    json!({
        "dimension": domain.dim(),
        "generator": generator,
        "parameters": params,
        "sites": domain.len(),
        "edges": domain.edge_count(),
        "truncation_radius": domain.truncation_radius(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectrans_core::PotentialSpec;

    #[test]
    fn coo_round_trip() {
        let d = LatticeDomain::build_box(2, 2).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Anderson { disorder: 2.0, seed: 4 }).unwrap();
        let text = coo_text(&op);
        let parsed = parse_coo(&text).unwrap();
        assert_eq!(parsed.len(), d.len() + 2 * d.edge_count());
        assert!(parsed.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        for (i, j, v) in parsed {
            assert_eq!(v, op.entry(i, j));
        }
        assert!(text.starts_with("1 1 "));
        assert!(parse_coo("0 1 1.0").is_err());
    }

    #[test]
    fn descriptor_fields() {
        let d = LatticeDomain::build_spiral(2).unwrap();
        let v = domain_descriptor(&d);
        assert_eq!(v["generator"], "spiral");
        assert_eq!(v["parameters"]["turns"], 2);
        assert_eq!(v["sites"], 41);
    }
}
