use super::FeasibleScheduleSet;

const BOUNDARY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityStatus {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityMembership {
    pub status: CapacityStatus,
    /// `rho - 1`, where `rho = max { t : t s in conv(schedules) }`; `+inf`
    /// for the zero vector. Negative entries of `s` give their minimum.
    pub margin: f64,
}

/// Position of `s` relative to the capacity region `conv(schedules)`.
///
/// The feasible sets here are closed under switching links off, so the
/// region is down-closed in the unit cube and `s` is inside iff some mixture
/// of schedules dominates it. The gauge `rho` comes from the linear program
///
/// ```text
/// max t  s.t.  t s_i <= sum_v w_v v_i,  sum_v w_v <= 1,  w, t >= 0
/// ```
///
/// solved exactly by a dense simplex with Bland's rule.
pub fn capacity_membership(s: &[f64], schedules: &FeasibleScheduleSet) -> CapacityMembership {
    assert_eq!(s.len(), schedules.n_links(), "rate vector length must match the schedule set");
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return CapacityMembership { status: CapacityStatus::Outside, margin: min };
    }
    if s.iter().all(|&x| x == 0.0) {
        return CapacityMembership { status: CapacityStatus::Boundary, margin: f64::INFINITY };
    }
    let rho = gauge(s, schedules.masks());
    let margin = rho - 1.0;
    let status = if margin.abs() <= BOUNDARY_TOL {
        CapacityStatus::Boundary
    } else if margin < 0.0 {
        CapacityStatus::Outside
    } else if min == 0.0 {
        CapacityStatus::Boundary
    } else {
        CapacityStatus::Interior
    };
    CapacityMembership { status, margin }
}

fn gauge(s: &[f64], masks: &[u32]) -> f64 {
    let n = s.len();
    let m = masks.len();
    // Columns: w_0..w_{m-1}, t, then one slack per row, then the right-hand side.
    let rows = n + 1;
    let cols = m + 1 + rows + 1;
    let rhs = cols - 1;
    let mut tab = vec![vec![0.0; cols]; rows];
    for (i, row) in tab.iter_mut().enumerate().take(n) {
        for (v, &mask) in masks.iter().enumerate() {
            if mask >> i & 1 == 1 {
                row[v] = -1.0;
            }
        }
        row[m] = s[i];
        row[m + 1 + i] = 1.0;
    }
    tab[n][..m].fill(1.0);
    tab[n][m + 1 + n] = 1.0;
    tab[n][rhs] = 1.0;

    // Reduced costs of the maximization objective `t`.
    let mut cost = vec![0.0; cols];
    cost[m] = 1.0;
    let mut basis: Vec<usize> = (0..rows).map(|r| m + 1 + r).collect();

    while let Some(enter) = (0..rhs).find(|&c| cost[c] > PIVOT_TOL) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            let a = tab[r][enter];
            if a > PIVOT_TOL {
                let ratio = tab[r][rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[r] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        // Bounded: sum w <= 1 and some s_i > 0 cap t.
        let Some(r) = leave else { return f64::INFINITY };
        let pivot = tab[r][enter];
        tab[r].iter_mut().for_each(|x| *x /= pivot);
        let pivot_row = tab[r].clone();
        for (q, row) in tab.iter_mut().enumerate() {
            if q != r && row[enter] != 0.0 {
                let f = row[enter];
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
        let f = cost[enter];
        cost.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
        basis[r] = enter;
    }
    basis.iter().position(|&b| b == m).map_or(0.0, |r| tab[r][rhs])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique2() -> FeasibleScheduleSet {
        FeasibleScheduleSet::from_masks(2, vec![0b00, 0b01, 0b10]).unwrap()
    }

    #[test]
    fn two_clique_examples() {
        let c = capacity_membership(&[0.25, 0.25], &clique2());
        assert_eq!(c.status, CapacityStatus::Interior);
        assert!((c.margin - 1.0).abs() < 1e-12);
        assert_eq!(capacity_membership(&[0.5, 0.5], &clique2()).status, CapacityStatus::Boundary);
        let out = capacity_membership(&[0.6, 0.6], &clique2());
        assert_eq!(out.status, CapacityStatus::Outside);
        assert!((out.margin - (1.0 / 1.2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn three_path_gauge() {
        // conv{000,001,010,100,101}: x0 + x1 <= 1, x1 + x2 <= 1.
        let set = FeasibleScheduleSet::from_masks(3, vec![0, 1, 2, 4, 5]).unwrap();
        let c = capacity_membership(&[0.2, 0.4, 0.3], &set);
        assert!((c.margin - (1.0 / 0.7 - 1.0)).abs() < 1e-12);
        assert_eq!(capacity_membership(&[0.9, 0.0, 0.9], &set).status, CapacityStatus::Boundary);
    }
}
