//! Vector box-norm, k-support norm and their duals.
//!
//! The box-norm is the Θ-norm `sqrt(inf_θ Σ w_i²/θ_i)` over the parameter set
//! `{θ : a ≤ θ_i ≤ b, Σ θ_i ≤ c}`. The optimal θ has the form
//! `θ_i = clamp(α|w_i|, a, b)` where α solves the scalar equation
//! `S(α) = Σ clamp(α|w_i|, a, b) = c`. `S` is piecewise linear with at most
//! `2d` breakpoints `{a/|w_i|, b/|w_i|}`, so after one sort the root is found
//! by binary search over the breakpoints and a single linear interpolation.
//!
//! The k-support norm is the limit `a → 0, b = 1, c = k`; it is evaluated on
//! its own closed form so that nothing is ever divided by `a`.

use crate::error::{check_finite, input, param, Result};

/// Relative tolerance used when deciding that `S(α)` hits the budget exactly.
pub(crate) const INTERP_RTOL: f64 = 1e-12;

/// Parameters `(a, b, c)` of the box-norm.
///
/// The budget `c` is checked against the ambient dimension at every call,
/// since the same parameters are reused for vectors and singular-value
/// vectors of different lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BoxParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return param("box parameters must be finite");
        }
        if !(a > 0.0 && a <= b) {
            return param(format!("box parameters need 0 < a <= b, got a={a}, b={b}"));
        }
        if c <= 0.0 {
            return param(format!("box budget c must be positive, got {c}"));
        }
        Ok(Self { a, b, c })
    }

    /// Parameters whose budget is `c = (b - a) k + d a`, i.e. `ρ = k` exactly.
    /// `k` may be fractional.
    pub fn from_k(a: f64, b: f64, k: f64, d: usize) -> Result<Self> {
        if !(k >= 0.0 && k <= d as f64) {
            return param(format!("k must lie in [0, {d}], got {k}"));
        }
        Self::new(a, b, (b - a) * k + d as f64 * a)
    }

    /// `ρ = (c - d a) / (b - a)`; infinite when `a == b`.
    pub fn rho(&self, d: usize) -> f64 {
        if self.a == self.b {
            f64::INFINITY
        } else {
            (self.c - d as f64 * self.a) / (self.b - self.a)
        }
    }

    /// `k = ⌊ρ⌋`, snapped to the nearest integer when ρ is within round-off
    /// of one, and clamped to `[0, d]`.
    pub fn k(&self, d: usize) -> usize {
        let rho = self.rho(d);
        if !rho.is_finite() {
            return d;
        }
        snap_floor(rho).min(d as f64) as usize
    }

    /// Checks `d a ≤ c ≤ d b` up to round-off and returns the budget clamped
    /// into that interval.
    pub fn budget_for(&self, d: usize) -> Result<f64> {
        let lo = d as f64 * self.a;
        let hi = d as f64 * self.b;
        let slack = 1e-12 * hi.max(1.0);
        if self.c < lo - slack || self.c > hi + slack {
            return param(format!(
                "box budget c={} outside [d a, d b] = [{lo}, {hi}] for d={d}",
                self.c
            ));
        }
        Ok(self.c.clamp(lo, hi))
    }
}

pub(crate) fn snap_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Cardinality parameter of the k-support norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KSupportParams {
    pub k: usize,
}

impl KSupportParams {
    pub fn new(k: usize) -> Self {
        Self { k }
    }

    pub fn check(&self, d: usize) -> Result<()> {
        if self.k == 0 || self.k > d {
            param(format!("k must lie in [1, {d}], got {}", self.k))
        } else {
            Ok(())
        }
    }
}

/// Structure of the minimizing θ: `q` entries at the upper bound, `ell` at the
/// lower bound and the rest proportional to `|w_i|` with multiplier `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDecomposition {
    pub q: usize,
    pub ell: usize,
    /// Residual budget `c - q b - ell a` carried by the interpolated entries.
    pub p_res: f64,
    pub alpha: f64,
    /// Minimizer in the original coordinate order.
    pub theta: Vec<f64>,
}

/// Magnitudes sorted nonincreasing together with the permutation and suffix
/// sums. Ties keep the original index order.
///
/// Range sums are differences of suffix sums rather than prefix sums: every
/// term after a range is no larger than the range's smallest term, so the
/// subtraction loses at most about `d ε` relative accuracy even when the
/// range holds magnitudes far below the largest one.
#[derive(Debug, Clone)]
pub(crate) struct SortedMagnitudes {
    pub order: Vec<usize>,
    pub mags: Vec<f64>,
    suffix: Vec<f64>,
    /// Number of nonzero magnitudes; they occupy `mags[..nonzero]`.
    pub nonzero: usize,
}

impl SortedMagnitudes {
    pub fn new(w: &[f64]) -> Self {
        // Nonnegative floats order like their bit patterns, so one integer
        // key sorts by decreasing magnitude and then by increasing index.
        let mut keys: Vec<u128> = w
            .iter()
            .enumerate()
            .map(|(i, x)| (u128::from(!x.abs().to_bits()) << 64) | i as u128)
            .collect();
        keys.sort_unstable();
        let order: Vec<usize> = keys.iter().map(|&k| k as u64 as usize).collect();
        let mags: Vec<f64> = keys
            .iter()
            .map(|&k| f64::from_bits(!((k >> 64) as u64)))
            .collect();
        let mut suffix = vec![0.0; w.len() + 1];
        for i in (0..mags.len()).rev() {
            suffix[i] = suffix[i + 1] + mags[i];
        }
        let nonzero = mags.iter().take_while(|&&m| m > 0.0).count();
        Self {
            order,
            mags,
            suffix,
            nonzero,
        }
    }

    pub fn len(&self) -> usize {
        self.mags.len()
    }

    /// Sum of `mags[from..to]`.
    fn range_sum(&self, from: usize, to: usize) -> f64 {
        if to <= from {
            0.0
        } else {
            self.suffix[from] - self.suffix[to]
        }
    }

    fn unsort(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (pos, &idx) in self.order.iter().enumerate() {
            out[idx] = sorted[pos];
        }
        out
    }
}

/// Minimizer of `Σ u_i²/θ_i` over `{lo ≤ θ_i ≤ hi, Σθ_i ≤ budget}`, in sorted
/// order. This is the common kernel of the norm and of the prox (which uses
/// shifted bounds).
#[derive(Debug, Clone)]
pub(crate) struct CappedSolution {
    pub theta: Vec<f64>,
    pub q: usize,
    pub ell: usize,
    pub alpha: f64,
}

/// Counts at the upper and lower bound for a given α.
fn counts_at(s: &SortedMagnitudes, alpha: f64, lo: f64, hi: f64) -> (usize, usize) {
    let q = s.mags.partition_point(|&m| alpha * m >= hi);
    let above_lo = s.mags.partition_point(|&m| alpha * m > lo);
    (q, s.len() - above_lo.max(q))
}

fn breakpoint_sum(s: &SortedMagnitudes, alpha: f64, lo: f64, hi: f64) -> f64 {
    let (q, ell) = counts_at(s, alpha, lo, hi);
    let d = s.len();
    q as f64 * hi + alpha * s.range_sum(q, d - ell) + ell as f64 * lo
}

/// Sorted breakpoints `{lo/u_i, hi/u_i}` over nonzero magnitudes. Both
/// sequences are already ascending because `u` is sorted nonincreasing, so a
/// merge suffices.
fn breakpoints(s: &SortedMagnitudes, lo: f64, hi: f64) -> Vec<f64> {
    let n = s.nonzero;
    let mut out = Vec::with_capacity(2 * n);
    let (mut i, mut j) = (0, 0);
    while i < n || j < n {
        let left = if i < n { lo / s.mags[i] } else { f64::INFINITY };
        let right = if j < n { hi / s.mags[j] } else { f64::INFINITY };
        if left <= right {
            out.push(left);
            i += 1;
        } else {
            out.push(right);
            j += 1;
        }
    }
    out
}

pub(crate) fn solve_capped(
    s: &SortedMagnitudes,
    lo: f64,
    hi: f64,
    budget: f64,
    rtol: f64,
) -> CappedSolution {
    let d = s.len();
    let n = s.nonzero;

    if lo == hi {
        return CappedSolution {
            theta: vec![hi; d],
            q: d,
            ell: 0,
            alpha: if n > 0 {
                hi / s.mags[n - 1]
            } else {
                f64::INFINITY
            },
        };
    }

    // Every nonzero entry capped at `hi`; the sum constraint may be slack, in
    // which case the leftover is spread over zero entries (their θ does not
    // affect the objective).
    let saturated = n as f64 * hi + (d - n) as f64 * lo;
    if budget >= saturated * (1.0 - rtol) {
        let mut theta = vec![hi; d];
        let zeros = d - n;
        let mut ell = 0;
        if zeros > 0 {
            let share = lo + ((budget - saturated).max(0.0) / zeros as f64);
            let share = share.clamp(lo, hi);
            if share == lo {
                ell = zeros;
            }
            theta[n..].iter_mut().for_each(|t| *t = share);
        }
        return CappedSolution {
            theta,
            q: n,
            ell,
            alpha: if n > 0 {
                hi / s.mags[n - 1]
            } else {
                f64::INFINITY
            },
        };
    }

    let grid = breakpoints(s, lo, hi);
    debug_assert!(
        grid.windows(2).all(|p| breakpoint_sum(s, p[0], lo, hi)
            <= breakpoint_sum(s, p[1], lo, hi) * (1.0 + 1e-12) + 1e-300),
        "S(alpha) must be nondecreasing over the breakpoints"
    );

    let tol = rtol * budget.abs().max(f64::MIN_POSITIVE);
    // First breakpoint at which S reaches the budget; flat stretches at level
    // `budget` therefore resolve to their left endpoint.
    let j = grid.partition_point(|&beta| breakpoint_sum(s, beta, lo, hi) < budget - tol);
    let alpha = if j == 0 {
        grid[0]
    } else {
        let s_hi = breakpoint_sum(s, grid[j], lo, hi);
        if (s_hi - budget).abs() <= tol {
            grid[j]
        } else {
            let (left, right) = (grid[j - 1], grid[j]);
            let mid_alpha = 0.5 * (left + right);
            let (q, ell) = counts_at(s, mid_alpha, lo, hi);
            let middle = s.range_sum(q, d - ell);
            let residual = budget - q as f64 * hi - ell as f64 * lo;
            if middle > 0.0 {
                (residual / middle).clamp(left, right)
            } else {
                left
            }
        }
    };

    let theta: Vec<f64> = s.mags.iter().map(|&m| (alpha * m).clamp(lo, hi)).collect();
    let (q, ell) = counts_at(s, alpha, lo, hi);
    CappedSolution {
        theta,
        q,
        ell,
        alpha,
    }
}

/// Box-norm of `w` together with the minimizing θ.
pub fn box_norm(w: &[f64], params: &BoxParams) -> Result<(f64, NormDecomposition)> {
    check_finite(w, "vector")?;
    let d = w.len();
    if d == 0 {
        return input("empty vector");
    }
    let budget = params.budget_for(d)?;
    let (a, b) = (params.a, params.b);
    let sorted = SortedMagnitudes::new(w);
    let sol = solve_capped(&sorted, a, b, budget, INTERP_RTOL);

    let (q, ell) = (sol.q, sol.ell);
    let p_res = budget - q as f64 * b - ell as f64 * a;
    let head: f64 = sorted.mags[..q].iter().map(|m| m * m).sum::<f64>() / b;
    let tail: f64 = sorted.mags[d - ell..].iter().map(|m| m * m).sum::<f64>() / a;
    let middle = sorted.range_sum(q, d - ell);
    let inner = if middle > 0.0 {
        debug_assert!(p_res > 0.0);
        middle * middle / p_res
    } else {
        0.0
    };

    let value = (head + inner + tail).sqrt();
    Ok((
        value,
        NormDecomposition {
            q,
            ell,
            p_res,
            alpha: sol.alpha,
            theta: sorted.unsort(&sol.theta),
        },
    ))
}

/// k-support norm and the integer `q` of its closed form: the `q` largest
/// magnitudes enter squared, the remaining ones through their ℓ1 mass divided
/// by `k - q`.
pub fn k_support_norm(w: &[f64], params: &KSupportParams) -> Result<(f64, usize)> {
    check_finite(w, "vector")?;
    let d = w.len();
    params.check(d)?;
    let k = params.k;
    let mut u: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    u.sort_by(|x, y| y.total_cmp(x));

    let mut suffix = vec![0.0; d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] + u[i];
    }

    let mut chosen = k - 1;
    for q in 0..k {
        let tail = suffix[q];
        let r = tail / (k - q) as f64;
        let upper_ok = q == 0 || u[q - 1] >= r;
        let lower_ok = tail == 0.0 || r > u[q];
        if upper_ok && lower_ok {
            chosen = q;
            break;
        }
    }
    let q = chosen;
    let head: f64 = u[..q].iter().map(|x| x * x).sum();
    let tail = suffix[q];
    let value = (head + tail * tail / (k - q) as f64).sqrt();
    Ok((value, q))
}

fn sorted_sq_desc(u: &[f64]) -> Vec<f64> {
    let mut sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    sq
}

/// Dual box-norm. `ρ` may be fractional; the residual term
/// `(ρ - k)(|u|↓_{k+1})²` accounts for the fractional part.
pub fn dual_box_norm(u: &[f64], params: &BoxParams) -> Result<f64> {
    check_finite(u, "vector")?;
    let d = u.len();
    if d == 0 {
        return input("empty vector");
    }
    params.budget_for(d)?;
    let (a, b) = (params.a, params.b);
    let sq = sorted_sq_desc(u);
    let l2: f64 = sq.iter().sum();
    if a == b {
        return Ok((a * l2).sqrt());
    }
    let rho = params.rho(d).clamp(0.0, d as f64);
    let k = params.k(d);
    let top: f64 = sq[..k].iter().sum();
    let next = if k < d { sq[k] } else { 0.0 };
    let frac = (rho - k as f64).max(0.0);
    Ok((a * l2 + (b - a) * (top + frac * next)).sqrt())
}

/// ℓ2 norm of the `k` largest magnitudes.
pub fn dual_k_support_norm(u: &[f64], params: &KSupportParams) -> Result<f64> {
    check_finite(u, "vector")?;
    params.check(u.len())?;
    let sq = sorted_sq_desc(u);
    Ok(sq[..params.k].iter().sum::<f64>().sqrt())
}

/// Dual of the k-support p-norm: ℓq norm of the `k` largest magnitudes, with
/// `q = ∞` meaning the largest magnitude.
pub fn dual_ksup_q_norm(u: &[f64], k: usize, q: f64) -> Result<f64> {
    check_finite(u, "vector")?;
    KSupportParams::new(k).check(u.len())?;
    if q.is_nan() || q < 1.0 {
        return param(format!("q must lie in [1, inf], got {q}"));
    }
    let mut mags: Vec<f64> = u.iter().map(|x| x.abs()).collect();
    mags.sort_by(|x, y| y.total_cmp(x));
    let top = &mags[..k];
    if q.is_infinite() {
        return Ok(top[0]);
    }
    if q == 1.0 {
        return Ok(top.iter().sum());
    }
    let scale = top[0];
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = top.iter().map(|m| (m / scale).powf(q)).sum();
    Ok(scale * s.powf(1.0 / q))
}

/// The (k, ∞)-support norm `max(‖w‖∞, ‖w‖₁ / k)`.
pub fn ksup_inf_norm(w: &[f64], k: usize) -> Result<f64> {
    check_finite(w, "vector")?;
    KSupportParams::new(k).check(w.len())?;
    let linf = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let l1: f64 = w.iter().map(|x| x.abs()).sum();
    Ok(linf.max(l1 / k as f64))
}

/// Vertices `γ¹..γᵐ` of a polyhedral parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    gammas: Vec<Vec<f64>>,
}

impl VertexSet {
    pub fn new(gammas: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = gammas.first() else {
            return param("vertex set is empty");
        };
        let d = first.len();
        if gammas.iter().any(|g| g.len() != d) {
            return param("vertices have different lengths");
        }
        if gammas
            .iter()
            .flatten()
            .any(|&x| !(x >= 0.0) || !x.is_finite())
        {
            return param("vertices must be finite and nonnegative");
        }
        let covered = (0..d).all(|i| gammas.iter().map(|g| g[i]).sum::<f64>() > 0.0);
        if !covered {
            return param("sum of vertices must be strictly positive in every coordinate");
        }
        Ok(Self { gammas })
    }

    /// Indicator vectors `1_g` of the given groups.
    pub fn from_groups(d: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut gammas = Vec::with_capacity(groups.len());
        for g in groups {
            let mut v = vec![0.0; d];
            for &i in g {
                if i >= d {
                    return param(format!("group index {i} out of range for d={d}"));
                }
                v[i] = 1.0;
            }
            gammas.push(v);
        }
        Self::new(gammas)
    }

    pub fn dim(&self) -> usize {
        self.gammas[0].len()
    }

    pub fn gammas(&self) -> &[Vec<f64>] {
        &self.gammas
    }
}

/// All nonempty subsets of `{0..d}` with at most `k` elements, in
/// lexicographic order of their bitmasks.
pub fn groups_up_to(d: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(d < usize::BITS as usize);
    (1usize..(1 << d))
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| (0..d).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Dual norm of a polyhedral Θ-norm: `max_ℓ sqrt(Σ γˡ_i u_i²)`.
pub fn polyhedral_dual_norm(u: &[f64], vs: &VertexSet) -> Result<f64> {
    check_finite(u, "vector")?;
    if u.len() != vs.dim() {
        return param(format!(
            "vector has length {} but vertices have length {}",
            u.len(),
            vs.dim()
        ));
    }
    let best = vs
        .gammas
        .iter()
        .map(|g| g.iter().zip(u).map(|(gi, ui)| gi * ui * ui).sum::<f64>())
        .fold(0.0_f64, f64::max);
    Ok(best.sqrt())
}

/// Largest dimension accepted by [`overlap_group_lasso_oracle`].
pub const OVERLAP_ORACLE_MAX_DIM: usize = 8;

/// Group-lasso-with-overlap norm `inf { Σ_g ‖v_g‖₂ : supp v_g ⊆ g, Σ v_g = w }`
/// by brute-force first-order minimization.
///
/// This is a slow reference used to cross-check the closed forms on tiny
/// instances. Each `‖v_g‖` is smoothed to `sqrt(‖v_g‖² + ε)` with `ε = 1e-8`
/// and the smoothed objective is minimized by accelerated projected gradient
/// over the affine set `Σ v_g = w` for `iterations` steps. The returned value
/// is the exact objective at the best feasible iterate.
pub fn overlap_group_lasso_oracle(
    w: &[f64],
    groups: &[Vec<usize>],
    iterations: usize,
) -> Result<f64> {
    check_finite(w, "vector")?;
    let d = w.len();
    if d > OVERLAP_ORACLE_MAX_DIM {
        return Err(crate::Error::Scale(format!(
            "overlap oracle is limited to d <= {OVERLAP_ORACLE_MAX_DIM}, got {d}"
        )));
    }
    if groups.is_empty() {
        return param("no groups given");
    }
    // Flattened variables: one slot per (group, member).
    let mut slots: Vec<(usize, usize)> = Vec::new();
    let mut group_ranges = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let start = slots.len();
        for &i in g {
            if i >= d {
                return param(format!("group index {i} out of range for d={d}"));
            }
            slots.push((gi, i));
        }
        group_ranges.push(start..slots.len());
    }
    let mut owners = vec![0usize; d];
    for &(_, i) in &slots {
        owners[i] += 1;
    }
    if owners.iter().any(|&c| c == 0) {
        return param("groups do not cover every coordinate");
    }

    const EPS: f64 = 1e-8;
    let smooth = |v: &[f64]| -> f64 {
        group_ranges
            .iter()
            .map(|r| (v[r.clone()].iter().map(|x| x * x).sum::<f64>() + EPS).sqrt())
            .sum()
    };
    let exact = |v: &[f64]| -> f64 {
        group_ranges
            .iter()
            .map(|r| v[r.clone()].iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    };
    // Project onto {Σ_{slots owning i} v = w_i}: remove the mean residual of
    // each coordinate from its owners.
    let project = |v: &mut [f64]| {
        let mut residual = w.to_vec();
        for (s, &(_, i)) in slots.iter().enumerate() {
            residual[i] -= v[s];
        }
        for (s, &(_, i)) in slots.iter().enumerate() {
            v[s] += residual[i] / owners[i] as f64;
        }
    };

    let n = slots.len();
    let mut x = vec![0.0; n];
    for (s, &(_, i)) in slots.iter().enumerate() {
        x[s] = w[i] / owners[i] as f64;
    }
    let mut y = x.clone();
    let mut x_prev = x.clone();
    let mut grad = vec![0.0; n];
    let step = EPS.sqrt();
    let mut t = 1.0_f64;
    let mut current = smooth(&x);
    let mut best = exact(&x);
    for _ in 0..iterations {
        for r in &group_ranges {
            let sq: f64 = y[r.clone()].iter().map(|v| v * v).sum();
            let inv = 1.0 / (sq + EPS).sqrt();
            for s in r.clone() {
                grad[s] = y[s] * inv;
            }
        }
        x_prev.copy_from_slice(&x);
        for s in 0..n {
            x[s] = y[s] - step * grad[s];
        }
        project(&mut x);
        let value = smooth(&x);
        // Function-value restart keeps the accelerated scheme monotone.
        if value > current {
            t = 1.0;
            x.copy_from_slice(&x_prev);
            y.copy_from_slice(&x_prev);
            continue;
        }
        current = value;
        best = best.min(exact(&x));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for s in 0..n {
            y[s] = x[s] + beta * (x[s] - x_prev[s]);
        }
        t = t_next;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn negligible_entry_behaves_like_zero() {
        // A round-off sized singular value puts a breakpoint near 1e16.
        let p = BoxParams::new(0.2, 1.0, 1.5).unwrap();
        for tiny in [1e-17, 3e-16, 1e-13] {
            let (with, _) = box_norm(&[2.5, 1.3, 0.4, tiny], &p).unwrap();
            let (without, _) = box_norm(&[2.5, 1.3, 0.4, 0.0], &p).unwrap();
            assert_relative_eq!(with, without, max_relative = 1e-10);
        }
    }

    #[test]
    fn equal_bounds_give_scaled_l2() {
        let p = BoxParams::new(1.0, 1.0, 2.0).unwrap();
        let (v, cert) = box_norm(&[3.0, 4.0], &p).unwrap();
        assert_relative_eq!(v, 5.0, epsilon = 1e-12);
        assert_eq!(cert.theta, vec![1.0, 1.0]);
    }

    #[test]
    fn symmetric_interior_solution() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        let (v, cert) = box_norm(&[1.0, 1.0], &p).unwrap();
        assert_relative_eq!(v, (8.0_f64 / 3.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(cert.theta[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(cert.theta[1], 0.75, epsilon = 1e-12);
        assert_eq!((cert.q, cert.ell), (0, 0));
    }

    #[test]
    fn empty_middle_segment() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        let (v, cert) = box_norm(&[2.0, 0.1], &p).unwrap();
        assert_relative_eq!(v, 4.02_f64.sqrt(), max_relative = 1e-12);
        assert_eq!(cert.theta, vec![1.0, 0.5]);
        assert_eq!((cert.q, cert.ell), (1, 1));
        assert_relative_eq!(cert.p_res, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_entries_sit_at_lower_bound() {
        let p = BoxParams::new(0.2, 1.0, 1.6).unwrap();
        let (v, cert) = box_norm(&[0.0, 3.0, 0.0], &p).unwrap();
        // θ = (0.2, 1.0, 0.2) uses the full budget 1.4 < 1.6, so the leftover
        // goes to the zero coordinates without changing the value.
        assert_relative_eq!(v, 3.0, max_relative = 1e-12);
        assert_relative_eq!(cert.theta.iter().sum::<f64>(), 1.6, max_relative = 1e-12);
        assert_eq!(cert.theta[1], 1.0);
    }

    #[test]
    fn zero_vector() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        let (v, cert) = box_norm(&[0.0, 0.0], &p).unwrap();
        assert_eq!(v, 0.0);
        assert_relative_eq!(cert.theta.iter().sum::<f64>(), 1.5);
    }

    #[test]
    fn full_budget_returns_upper_bound() {
        let p = BoxParams::new(0.3, 2.0, 6.0).unwrap();
        let (v, cert) = box_norm(&[1.0, -2.0, 2.0], &p).unwrap();
        assert_relative_eq!(v, 3.0 / 2.0_f64.sqrt(), max_relative = 1e-12);
        assert!(cert.theta.iter().all(|&t| t == 2.0));
    }

    #[test]
    fn minimal_budget_returns_lower_bound() {
        let p = BoxParams::new(0.5, 2.0, 1.5).unwrap();
        let (v, cert) = box_norm(&[1.0, -2.0, 2.0], &p).unwrap();
        assert_relative_eq!(v, 3.0 / 0.5_f64.sqrt(), max_relative = 1e-12);
        assert!(cert.theta.iter().all(|&t| (t - 0.5).abs() < 1e-15));
    }

    #[test]
    fn budget_outside_range_is_rejected() {
        let p = BoxParams::new(0.5, 1.0, 3.0).unwrap();
        assert!(matches!(
            box_norm(&[1.0, 2.0], &p),
            Err(crate::Error::Parameter(_))
        ));
        let p = BoxParams::new(0.5, 1.0, 0.9).unwrap();
        assert!(box_norm(&[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        assert!(matches!(
            box_norm(&[1.0, f64::NAN], &p),
            Err(crate::Error::Input(_))
        ));
    }

    #[test]
    fn bad_box_parameters() {
        assert!(BoxParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BoxParams::new(2.0, 1.0, 1.0).is_err());
        assert!(BoxParams::new(0.5, 1.0, -1.0).is_err());
        assert!(BoxParams::from_k(0.1, 1.0, 4.0, 3).is_err());
    }

    #[test]
    fn from_k_recovers_rho() {
        let p = BoxParams::from_k(0.1, 1.0, 2.0, 5).unwrap();
        assert_relative_eq!(p.rho(5), 2.0, epsilon = 1e-12);
        assert_eq!(p.k(5), 2);
        let p = BoxParams::from_k(0.1, 1.0, 2.5, 5).unwrap();
        assert_eq!(p.k(5), 2);
    }

    #[test]
    fn k_support_examples() {
        let (v, _) = k_support_norm(&[1.0, -2.0, 3.0], &KSupportParams::new(1)).unwrap();
        assert_relative_eq!(v, 6.0, epsilon = 1e-12);
        let (v, _) = k_support_norm(&[1.0, 1.0, 1.0], &KSupportParams::new(3)).unwrap();
        assert_relative_eq!(v, 3.0_f64.sqrt(), epsilon = 1e-12);
        let (v, q) = k_support_norm(&[2.0, 1.0, 0.5], &KSupportParams::new(2)).unwrap();
        assert_relative_eq!(v, 2.5, epsilon = 1e-12);
        assert_eq!(q, 1);
    }

    #[test]
    fn k_support_with_sparse_input() {
        let (v, _) = k_support_norm(&[0.0, 3.0, 0.0, 4.0], &KSupportParams::new(3)).unwrap();
        assert_relative_eq!(v, 5.0, epsilon = 1e-12);
        assert!(k_support_norm(&[1.0], &KSupportParams::new(2)).is_err());
        assert!(k_support_norm(&[1.0], &KSupportParams::new(0)).is_err());
    }

    #[test]
    fn dual_box_examples() {
        let p = BoxParams::new(0.5, 1.0, 2.0).unwrap();
        assert_relative_eq!(
            dual_box_norm(&[1.0, 1.0, 1.0], &p).unwrap(),
            2.0_f64.sqrt(),
            epsilon = 1e-12
        );
        let p = BoxParams::new(0.5, 1.0, 1.75).unwrap();
        assert_relative_eq!(
            dual_box_norm(&[1.0, 0.0, 0.0], &p).unwrap(),
            0.75_f64.sqrt(),
            epsilon = 1e-12
        );
        let p = BoxParams::new(0.7, 0.7, 2.1).unwrap();
        assert_relative_eq!(
            dual_box_norm(&[1.0, -2.0, 2.0], &p).unwrap(),
            0.7_f64.sqrt() * 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dual_k_support_examples() {
        let k2 = KSupportParams::new(2);
        assert_relative_eq!(dual_k_support_norm(&[3.0, -4.0, 1.0], &k2).unwrap(), 5.0);
        assert_relative_eq!(
            dual_k_support_norm(&[1.0, 1.0], &k2).unwrap(),
            2.0_f64.sqrt()
        );
        let k1 = KSupportParams::new(1);
        assert_relative_eq!(dual_k_support_norm(&[0.2, -7.0, 0.1], &k1).unwrap(), 7.0);
    }

    #[test]
    fn dual_q_examples() {
        let u = [3.0, -4.0, 1.0];
        assert_relative_eq!(dual_ksup_q_norm(&u, 2, 1.0).unwrap(), 7.0);
        assert_relative_eq!(dual_ksup_q_norm(&u, 2, 2.0).unwrap(), 5.0, epsilon = 1e-12);
        assert_relative_eq!(dual_ksup_q_norm(&u, 3, f64::INFINITY).unwrap(), 4.0);
        assert!(dual_ksup_q_norm(&u, 2, 0.5).is_err());
        assert!(dual_ksup_q_norm(&u, 4, 2.0).is_err());
    }

    #[test]
    fn ksup_inf_examples() {
        assert_eq!(ksup_inf_norm(&[1.0, 1.0, 1.0, 1.0], 2).unwrap(), 2.0);
        assert_eq!(ksup_inf_norm(&[5.0, 0.0, 0.0], 2).unwrap(), 5.0);
        assert_eq!(ksup_inf_norm(&[0.0, 0.0, 0.0], 2).unwrap(), 0.0);
        assert!(ksup_inf_norm(&[1.0], 0).is_err());
    }

    #[test]
    fn polyhedral_examples() {
        let l1 = VertexSet::from_groups(3, &[vec![0], vec![1], vec![2]]).unwrap();
        assert_relative_eq!(polyhedral_dual_norm(&[2.0, -3.0, 1.0], &l1).unwrap(), 3.0);
        let g2 = VertexSet::from_groups(3, &groups_up_to(3, 2)).unwrap();
        assert_relative_eq!(polyhedral_dual_norm(&[3.0, -4.0, 1.0], &g2).unwrap(), 5.0);
        let l2 = VertexSet::new(vec![vec![1.0, 1.0, 1.0]]).unwrap();
        assert_relative_eq!(polyhedral_dual_norm(&[1.0, 2.0, 2.0], &l2).unwrap(), 3.0);
        assert!(VertexSet::new(vec![]).is_err());
        assert!(VertexSet::from_groups(3, &[vec![0], vec![1]]).is_err());
    }

    #[test]
    fn groups_enumeration() {
        assert_eq!(groups_up_to(3, 2).len(), 6);
        assert_eq!(groups_up_to(4, 4).len(), 15);
    }

    #[test]
    fn overlap_oracle_rejects_large_dimension() {
        let w = vec![1.0; 9];
        let groups = vec![(0..9).collect::<Vec<_>>()];
        assert!(matches!(
            overlap_group_lasso_oracle(&w, &groups, 10),
            Err(crate::Error::Scale(_))
        ));
    }

    #[test]
    fn overlap_oracle_single_group_and_l1() {
        let v =
            overlap_group_lasso_oracle(&[3.0, 4.0, 0.0], &[vec![0, 1], vec![2]], 20_000).unwrap();
        assert_relative_eq!(v, 5.0, epsilon = 1e-4);
        let v = overlap_group_lasso_oracle(&[1.0, 1.0], &[vec![0], vec![1]], 1000).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-4);
    }
}
