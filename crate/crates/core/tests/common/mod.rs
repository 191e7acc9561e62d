#![allow(dead_code)]

use peloton_cs::lp::{solve_square, DenseMatrix, LpProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum objective over all basic feasible solutions, assuming `G` has
/// full row rank. `None` when no basis is feasible.
pub fn brute_force_lp(problem: &LpProblem) -> Option<f64> {
    let g = problem.eq_matrix();
    let m = g.rows();
    let n = g.cols();
    let mut best: Option<f64> = None;
    for cols in combinations(n, m) {
        let b = g.select_columns(&cols);
        let Ok(xb) = solve_square(&b, problem.eq_rhs()) else {
            continue;
        };
        if xb.iter().any(|v| !v.is_finite() || *v < -1e-9) {
            continue;
        }
        // reject near-singular bases whose solve does not reproduce h
        let back = b.matvec(&xb).unwrap();
        if back.iter().zip(problem.eq_rhs()).any(|(a, h)| (a - h).abs() > 1e-7) {
            continue;
        }
        let obj: f64 = cols.iter().zip(&xb).map(|(&j, v)| problem.objective()[j] * v).sum();
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

/// Random feasible, bounded LP: the first row has strictly positive
/// coefficients, so the feasible region is a polytope.
pub fn random_feasible_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let m = rng.random_range(1..=4usize);
    let n = rng.random_range(m + 1..=6usize);
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let row: Vec<f64> = (0..n)
            .map(|_| {
                if r == 0 {
                    rng.random_range(0.5..3.0)
                } else {
                    rng.random_range(-3.0..3.0)
                }
            })
            .collect();
        rows.push(row);
    }
    let g = DenseMatrix::from_rows(&rows).unwrap();
    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..4.0) })
        .collect();
    let h = g.matvec(&x0).unwrap();
    let c = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    LpProblem::new(c, g, h).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random LP with finite upper bounds on some variables, plus the same
/// problem in plain standard form (one slack row `z_j + s_j = u_j` per
/// bounded variable) for the vertex-enumeration oracle.
pub fn random_boxed_lp(rng: &mut ChaCha8Rng) -> (LpProblem, LpProblem) {
    let m = rng.random_range(1..=3usize);
    let n = rng.random_range(m + 1..=5usize);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let g = DenseMatrix::from_rows(&rows).unwrap();
    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..3.0) })
        .collect();
    let h = g.matvec(&x0).unwrap();
    // every variable is boxed so the problem cannot be unbounded
    let upper: Vec<f64> = x0.iter().map(|v| v + rng.random_range(0.0..2.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let boxed = LpProblem::new(c.clone(), g.clone(), h.clone())
        .unwrap()
        .with_upper_bounds(upper.clone())
        .unwrap();

    let mut big = DenseMatrix::zeros(m + n, 2 * n);
    for r in 0..m {
        for j in 0..n {
            big[(r, j)] = g[(r, j)];
        }
    }
    for j in 0..n {
        big[(m + j, j)] = 1.0;
        big[(m + j, n + j)] = 1.0;
    }
    let mut big_c = c;
    big_c.resize(2 * n, 0.0);
    let mut big_h = h;
    big_h.extend(&upper);
    (boxed, LpProblem::new(big_c, big, big_h).unwrap())
}

pub fn pm1_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let entries = (0..rows * cols).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    DenseMatrix::from_row_major(rows, cols, entries).unwrap()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let entries = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DenseMatrix::from_row_major(rows, cols, entries).unwrap()
}

/// Riders scattered over `length` metres of a 10 m wide road.
pub fn scattered_riders(rng: &mut ChaCha8Rng, n: usize, length: f64) -> peloton_cs::graph::RiderPositions {
    use peloton_cs::graph::{Position, RiderPositions};
    let pos = (0..n)
        .map(|_| Position::new(rng.random_range(0.0..length), rng.random_range(-5.0..5.0)))
        .collect();
    RiderPositions::new(0.0, pos).unwrap()
}

/// Rank of `A·P`, where `P` is the 0/1 indicator of each component.
pub fn component_rank(a: &DenseMatrix, comp: &[usize], count: usize) -> usize {
    let mut m: Vec<Vec<f64>> = (0..a.rows())
        .map(|r| {
            let mut sums = vec![0.0; count];
            for (v, &c) in a.row(r).iter().zip(comp) {
                sums[c] += v;
            }
            sums
        })
        .collect();
    let mut rank = 0;
    for col in 0..count {
        let Some(p) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            let f = m[r][col] / m[rank][col];
            for c in col..count {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

/// ±1 rows, redrawn until they pin down every component level.
pub fn identifying_pm1_matrix(rng: &mut ChaCha8Rng, rows: usize, comp: &[usize], count: usize) -> DenseMatrix {
    assert!(rows >= count);
    loop {
        let a = pm1_matrix(rng, rows, comp.len());
        if component_rank(&a, comp, count) == count {
            return a;
        }
    }
}
