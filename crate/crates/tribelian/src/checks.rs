//! Verification routines crossing the automaton and oracle sides.
//!
//! These back both the test suites and the `verify` command: everything here
//! returns data or a descriptive error instead of asserting, so callers
//! decide how loud to be.

use std::collections::BTreeSet;

use crate::automata::Dfao;
use crate::numeration::{from_trib, to_trib};
use crate::oracle::{sweep_window, TribOracle, WindowError};
use crate::pipeline::Artifacts;
use crate::relations::Relation;
use crate::worddfao::eval;

#[derive(Clone, Copy, Debug)]
pub struct Mismatch {
    pub n: u64,
    pub automaton: i64,
    pub oracle: usize,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checked: u64,
    pub mismatch_count: u64,
    /// First few offending indices.
    pub mismatches: Vec<Mismatch>,
    pub values_seen: BTreeSet<i64>,
}

/// Sweeps `n = 0..=max_n` comparing the complexity DFAO against the oracle.
/// `window` fixes the scan window; by default it scales with `n` and is
/// stabilization-checked inside the oracle.
pub fn verify_complexity(
    trac: &Dfao,
    oracle: &TribOracle,
    max_n: u64,
    window: Option<usize>,
) -> Result<VerifyReport, WindowError> {
    let mut report = VerifyReport::default();
    for n in 0..=max_n {
        let w = window.unwrap_or_else(|| sweep_window(n as usize));
        let truth = oracle.abelian_complexity(n as usize, w)?;
        let got = eval(trac, n);
        report.checked += 1;
        report.values_seen.insert(got);
        if got != truth as i64 {
            report.mismatch_count += 1;
            if report.mismatches.len() < 10 {
                report.mismatches.push(Mismatch {
                    n,
                    automaton: got,
                    oracle: truth,
                });
            }
        }
    }
    Ok(report)
}

/// `from_trib(to_trib(n)) = n`, canonicity included, for all `n <= limit`.
pub fn round_trip_check(limit: u64) -> Result<(), String> {
    for n in 0..=limit {
        let rep = to_trib(n);
        if from_trib(&rep) != n {
            return Err(format!("round trip broke at n={n}"));
        }
        if rep.first() == Some(&0) {
            return Err(format!("leading zero in representation of {n}"));
        }
        if rep.windows(3).any(|w| w == [1, 1, 1]) {
            return Err(format!("111 factor in representation of {n}"));
        }
    }
    Ok(())
}

/// `tribsync0(n) + tribsync1(n) + tribsync2(n) = n` for all `n <= limit`,
/// evaluated through the synchronized relations themselves.
pub fn conservation_check(artifacts: &Artifacts, limit: u64) -> Result<(), String> {
    let syncs: Vec<&Relation> = (0..3)
        .map(|a| {
            artifacts
                .relation(&format!("tribsync{a}"))
                .ok_or_else(|| format!("tribsync{a} missing from artifacts"))
        })
        .collect::<Result<_, _>>()?;
    for n in 0..=limit {
        let mut total = 0u64;
        for (a, sync) in syncs.iter().enumerate() {
            total += sync
                .eval_function("n", n, "s")
                .ok_or_else(|| format!("tribsync{a} has no value at n={n}"))?;
        }
        if total != n {
            return Err(format!("letter counts at n={n} sum to {total}"));
        }
    }
    Ok(())
}

/// Every published relation accepts a word exactly when it accepts the word
/// with an all-zeros column prepended.
pub fn zero_prefix_check(artifacts: &Artifacts) -> Result<(), String> {
    for (name, artifact) in artifacts.entries() {
        if let crate::pipeline::Artifact::Relation(rel) = artifact {
            if !rel.is_zero_prefix_invariant() {
                return Err(format!("relation {name} is not zero-prefix invariant"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_small() {
        round_trip_check(20_000).unwrap();
    }
}
