use std::collections::HashSet;
use std::fmt;

use super::{AggregateMessage, ProtocolError};
use crate::graph::NeighborGraph;
use crate::lp::{default_rank_tol, independent_rows, least_squares, DenseMatrix, LinalgError, DEFAULT_FEAS_TOL};
use crate::sparsity::{recover, CsFormulation, Measurement};

#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub coeff_row: Vec<i64>,
    pub value: f64,
    /// `(sensor, round)` of the first message that supplied this row.
    pub provenance: (usize, usize),
}

/// Equations `value = coeff_row · X` gathered by the sinks.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    n: usize,
    rows: Vec<SystemRow>,
    seen: HashSet<(Vec<i64>, u64)>,
}

impl LinearSystem {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[SystemRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends one row per message, skipping rows already present with the
    /// same coefficients and bit-identical value. Returns how many were new.
    pub fn sink_collect<'a>(
        &mut self,
        messages: impl IntoIterator<Item = &'a AggregateMessage>,
    ) -> Result<usize, ProtocolError> {
        let mut added = 0;
        for msg in messages {
            if msg.coeff_row.len() != self.n {
                return Err(ProtocolError::LengthMismatch {
                    expected: self.n,
                    found: msg.coeff_row.len(),
                });
            }
            if self.seen.insert((msg.coeff_row.clone(), msg.aggregate.to_bits())) {
                self.rows.push(SystemRow {
                    coeff_row: msg.coeff_row.clone(),
                    value: msg.aggregate,
                    provenance: (msg.sender, msg.round),
                });
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn matrix(&self) -> DenseMatrix {
        let entries = self.rows.iter().flat_map(|r| r.coeff_row.iter().map(|&b| b as f64)).collect();
        DenseMatrix::from_row_major(self.rows.len(), self.n, entries).expect("rows have length n")
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn rank(&self) -> usize {
        let a = self.matrix();
        independent_rows(&a, default_rank_tol(&a)).len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Full column rank: least-squares solution.
    Determined,
    /// Underdetermined: graph-sparsity linear program.
    CsLp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Determined => "determined",
            Method::CsLp => "cs-lp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub x: Vec<f64>,
    pub method: Method,
    pub rank: usize,
}

/// Solves the sink system: exactly when it pins down every reading,
/// otherwise by minimizing total absolute velocity difference across
/// `graph` edges.
pub fn reconstruct(system: &LinearSystem, graph: &NeighborGraph) -> Result<Reconstruction, ProtocolError> {
    if system.is_empty() {
        return Err(ProtocolError::EmptySystem);
    }
    solve_measurements(&system.matrix(), &system.values(), graph)
}

/// Same dispatch for an arbitrary measurement matrix `a` with `y = a·X`.
/// Only a maximal independent subset of rows enters the LP.
pub fn solve_measurements(a: &DenseMatrix, y: &[f64], graph: &NeighborGraph) -> Result<Reconstruction, ProtocolError> {
    if a.rows() == 0 {
        return Err(ProtocolError::EmptySystem);
    }
    let n = a.cols();
    let basis = independent_rows(a, default_rank_tol(a));
    let rank = basis.len();
    if rank == n {
        match least_squares(a, y) {
            Ok(x) => {
                return Ok(Reconstruction {
                    x,
                    method: Method::Determined,
                    rank,
                })
            }
            // numerically borderline; the LP path below still applies
            Err(LinalgError::RankDeficient { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let kept: Vec<f64> = basis.iter().map(|&r| y[r]).collect();
    let meas = Measurement::new(a.select_rows(&basis), kept)?;
    let x = recover(&meas, &CsFormulation::PairwiseL1(graph.edges().to_vec()), DEFAULT_FEAS_TOL)?;
    Ok(Reconstruction {
        x,
        method: Method::CsLp,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Cap;

    fn msg(sender: usize, round: usize, coeff_row: Vec<i64>, aggregate: f64) -> AggregateMessage {
        AggregateMessage {
            sender,
            round,
            payload_bits: Cap::Limit(32).payload_bits(coeff_row.len()),
            coeff_row,
            aggregate,
        }
    }

    #[test]
    fn duplicate_rows_are_dropped() {
        let mut sys = LinearSystem::new(4);
        let e3 = msg(3, 1, vec![0, 0, 0, 1], 9.0);
        // heard by both sinks
        assert_eq!(sys.sink_collect([&e3, &e3]).unwrap(), 1);
        assert_eq!(sys.len(), 1);
        assert_eq!(sys.rows()[0].provenance, (3, 1));
        // later rounds keep accumulating
        let later = [msg(0, 2, vec![1, -1, 0, 0], 1.0), msg(1, 3, vec![1, 1, 1, 1], 8.0)];
        assert_eq!(sys.sink_collect(&later).unwrap(), 2);
        assert_eq!(sys.len(), 3);
        assert!(matches!(
            sys.sink_collect([&msg(0, 1, vec![1], 1.0)]),
            Err(ProtocolError::LengthMismatch { expected: 4, found: 1 })
        ));
    }

    #[test]
    fn identity_rows_are_determined() {
        let y = [3.0, -1.0, 4.0];
        let mut sys = LinearSystem::new(3);
        let msgs: Vec<_> = (0..3)
            .map(|i| {
                let mut row = vec![0; 3];
                row[i] = 1;
                msg(i, 1, row, y[i])
            })
            .collect();
        sys.sink_collect(&msgs).unwrap();
        let g = NeighborGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let r = reconstruct(&sys, &g).unwrap();
        assert_eq!(r.method, Method::Determined);
        assert_eq!(r.rank, 3);
        for (a, b) in r.x.iter().zip(y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_sum_row_falls_back_to_the_lp() {
        let mut sys = LinearSystem::new(4);
        sys.sink_collect([&msg(0, 3, vec![1, 1, 1, 1], 8.0)]).unwrap();
        let g = NeighborGraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = reconstruct(&sys, &g).unwrap();
        assert_eq!(r.method, Method::CsLp);
        assert_eq!(r.method.to_string(), "cs-lp");
        for v in r.x {
            assert!((v - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_system_is_an_error() {
        let g = NeighborGraph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            reconstruct(&LinearSystem::new(2), &g),
            Err(ProtocolError::EmptySystem)
        ));
    }
}
