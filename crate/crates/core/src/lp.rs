//! Dense tableau simplex (Bland's rule) and zero-sum matrix games.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Shadow prices of the `≤` rows.
    pub dual: Vec<f64>,
}

/// Solves `max cᵀy  s.t.  A y ≤ b, y ≥ 0` for `b ≥ 0`, starting from the slack basis.
pub fn solve_max_leq(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.iter().all(|&v| v >= 0.0));
    let width = n + m + 1;
    // row 0 holds reduced costs z_j − c_j; last column the right-hand side
    let mut tab = vec![vec![0.0; width]; m + 1];
    for j in 0..n {
        tab[0][j] = -c[j];
    }
    for i in 0..m {
        tab[i + 1][..n].copy_from_slice(&a[i]);
        tab[i + 1][n + i] = 1.0;
        tab[i + 1][width - 1] = b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_pivots = 50 * (n + m + 1);
    for _ in 0..max_pivots {
        let Some(enter) = (0..n + m).find(|&j| tab[0][j] < -PIVOT_TOL) else {
            let mut primal = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    primal[bv] = tab[i + 1][width - 1];
                }
            }
            let dual = (0..m).map(|i| tab[0][n + i]).collect();
            return Ok(LpSolution { objective: tab[0][width - 1], primal, dual });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = tab[i + 1][enter];
            if coef > PIVOT_TOL {
                let ratio = tab[i + 1][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave.ok_or(Error::LpUnbounded)?;
        let piv = tab[row + 1][enter];
        for v in tab[row + 1].iter_mut() {
            *v /= piv;
        }
        let pivot_row = tab[row + 1].clone();
        for (i, r) in tab.iter_mut().enumerate() {
            if i != row + 1 {
                let f = r[enter];
                if f != 0.0 {
                    for (v, pv) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        basis[row] = enter;
    }
    Err(Error::LpCycling(max_pivots))
}

#[derive(Debug, Clone)]
pub struct GameSolution {
    pub value: f64,
    /// Mixed strategy of the maximizing column player.
    pub col_strategy: Vec<f64>,
    /// Mixed strategy of the minimizing row player.
    pub row_strategy: Vec<f64>,
}

/// Value of `max_{α∈Δ} min_i (P α)_i` for a payoff matrix `P` (rows minimize).
pub fn matrix_game(payoff: &[Vec<f64>]) -> Result<GameSolution> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(Error::Usage("matrix game needs at least one row and one column".into()));
    }
    let lowest = payoff.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lowest;
    // row player's LP: max Σy  s.t.  Σ_i y_i (P_ij + shift) ≤ 1 for each column j
    let a: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| payoff[i][j] + shift).collect()).collect();
    let sol = solve_max_leq(&vec![1.0; rows], &a, &vec![1.0; cols])?;
    if sol.objective <= 0.0 {
        return Err(Error::LpUnbounded);
    }
    let value = 1.0 / sol.objective - shift;
    let normalize = |v: Vec<f64>| {
        let s: f64 = v.iter().map(|x| x.max(0.0)).sum();
        v.into_iter().map(|x| x.max(0.0) / s).collect::<Vec<_>>()
    };
    Ok(GameSolution { value, col_strategy: normalize(sol.dual), row_strategy: normalize(sol.primal) })
}
