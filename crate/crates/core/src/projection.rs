//! Information projections over divergence balls.
//!
//! [`min_div_in_ball`] solves `inf { D(Q||target) : D(Q||center) <= E }`.
//! The optimiser lies on the geometric-mixture path
//! `Q_a ∝ center^a * target^(1-a)`, `a ∈ [0, 1]`, and `D(Q_a||center)` is
//! monotone along it, so a bisection on `a` pins the active constraint.
//!
//! [`min_div_outside_balls`] handles the complement of a union of balls,
//! which is not convex. When the target is the centre of a ball that no other
//! ball touches the answer is that ball's radius; otherwise boundary
//! candidates are combined with [`grid_oracle_min_div`].
//!
//! The grid oracle is an exhaustive scan of the simplex and shares no code
//! path with the solvers beyond the divergence definition.

use serde::Serialize;

use crate::simplex::{kl_nats, Distribution, LogBase};
use crate::{Error, Result};

/// Numerical settings for the projection solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    /// Bisection stops once `|D(Q||center) - E|` drops below this (nats).
    pub residual: f64,
    pub max_iterations: usize,
    /// Slack allowed when checking a returned point against its constraint.
    pub feasibility: f64,
    /// Largest alphabet the grid fallback accepts.
    pub max_grid_alphabet: usize,
}

pub const SOLVER: SolverTolerances = SolverTolerances {
    residual: 1e-10,
    max_iterations: 200,
    feasibility: 1e-9,
    max_grid_alphabet: 4,
};

/// `{Q : D(Q || center) <= radius}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallConstraint {
    pub center: Distribution,
    pub radius: f64,
}

impl BallConstraint {
    pub fn new(center: Distribution, radius: f64) -> Result<Self> {
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::NegativeRadius(radius));
        }
        Ok(BallConstraint { center, radius })
    }

    pub fn contains(&self, q: &Distribution, base: LogBase) -> bool {
        base.from_nats(kl_nats(q.probs(), self.center.probs())) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionStatus {
    /// Unconstrained minimiser is feasible but the value is positive
    /// (target mass outside the centre's support).
    InteriorOptimum,
    /// Constraint active at the optimum.
    BoundaryOptimum,
    /// The target itself is feasible; value 0.
    TargetInside,
    /// No feasible point with finite value.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    /// Infimum, in the caller's log base. `+inf` when infeasible.
    pub value: f64,
    /// Optimiser (the ball centre when infeasible).
    pub argmin: Distribution,
    pub status: ProjectionStatus,
}

/// Restriction of a (center, target) pair to their common support.
struct Reduced {
    support: Vec<usize>,
    ln_center: Vec<f64>,
    ln_target: Vec<f64>,
    /// `-ln center(S)`: the smallest `D(Q||center)` for `Q` supported on `S`.
    center_floor: f64,
    /// `-ln target(S)`: added to every `D(Q||target)` computed on `S`.
    target_floor: f64,
    k: usize,
}

impl Reduced {
    fn new(center: &Distribution, target: &Distribution) -> Option<Reduced> {
        let (c, t) = (center.probs(), target.probs());
        let support: Vec<usize> = (0..c.len()).filter(|&x| c[x] > 0.0 && t[x] > 0.0).collect();
        if support.is_empty() {
            return None;
        }
        let c_mass: f64 = support.iter().map(|&x| c[x]).sum();
        let t_mass: f64 = support.iter().map(|&x| t[x]).sum();
        Some(Reduced {
            ln_center: support.iter().map(|&x| (c[x] / c_mass).ln()).collect(),
            ln_target: support.iter().map(|&x| (t[x] / t_mass).ln()).collect(),
            center_floor: floor_of(c, &support, c_mass),
            target_floor: floor_of(t, &support, t_mass),
            support,
            k: c.len(),
        })
    }

    /// Point `∝ target^beta * center^(1-beta)` on the common support.
    /// `beta = 0` is the centre, `beta = 1` the target.
    fn geometric(&self, beta: f64) -> Vec<f64> {
        let logs: Vec<f64> = self
            .ln_target
            .iter()
            .zip(&self.ln_center)
            .map(|(lt, lc)| beta * lt + (1.0 - beta) * lc)
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    fn div_center(&self, q: &[f64]) -> f64 {
        kl_ln(q, &self.ln_center)
    }

    fn div_target(&self, q: &[f64]) -> f64 {
        kl_ln(q, &self.ln_target)
    }

    fn embed(&self, q: &[f64]) -> Distribution {
        let mut full = vec![0.0; self.k];
        for (&x, &p) in self.support.iter().zip(q) {
            full[x] = p;
        }
        Distribution::from_raw(full)
    }
}

/// `-ln mass`, exactly zero when `support` holds all of `p`'s mass.
fn floor_of(p: &[f64], support: &[usize], mass: f64) -> f64 {
    if p.iter().filter(|&&v| v > 0.0).count() == support.len() {
        0.0
    } else {
        -mass.ln()
    }
}

fn kl_ln(q: &[f64], ln_g: &[f64]) -> f64 {
    q.iter()
        .zip(ln_g)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, lg)| p * (p.ln() - lg))
        .sum::<f64>()
        .max(0.0)
}

/// `inf { D(Q||target) : D(Q||center) <= radius }`.
pub fn min_div_in_ball(
    center: &Distribution,
    target: &Distribution,
    radius: f64,
    base: LogBase,
) -> Result<ProjectionResult> {
    center.check_same_alphabet(target)?;
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::NegativeRadius(radius));
    }
    let infeasible = || ProjectionResult {
        value: f64::INFINITY,
        argmin: center.clone(),
        status: ProjectionStatus::Infeasible,
    };
    let Some(red) = Reduced::new(center, target) else {
        return Ok(infeasible());
    };
    let slack = base.to_nats(radius) - red.center_floor;
    if slack < -1e-12 {
        return Ok(infeasible());
    }
    let slack = slack.max(0.0);

    let target_point = red.geometric(1.0);
    // relative slack absorbs rounding when the radius is exactly D(target||center)
    if red.div_center(&target_point) <= slack * (1.0 + 1e-12) + 1e-15 {
        let status = if red.target_floor == 0.0 {
            ProjectionStatus::TargetInside
        } else {
            ProjectionStatus::InteriorOptimum
        };
        return Ok(ProjectionResult {
            value: base.from_nats(red.target_floor),
            argmin: red.embed(&target_point),
            status,
        });
    }

    // f(a) = D(Q_a||center) - slack, with Q_a = geometric(1 - a); f(0) > 0, f(1) <= 0
    let residual = |a: f64| -> (f64, Vec<f64>) {
        let q = red.geometric(1.0 - a);
        (red.div_center(&q) - slack, q)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut f_hi, mut q_hi) = residual(hi);
    for _ in 0..SOLVER.max_iterations {
        if f_hi > -SOLVER.residual || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (f_mid, q_mid) = residual(mid);
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            f_hi = f_mid;
            q_hi = q_mid;
        }
    }
    Ok(ProjectionResult {
        value: base.from_nats(red.div_target(&q_hi) + red.target_floor),
        argmin: red.embed(&q_hi),
        status: ProjectionStatus::BoundaryOptimum,
    })
}

/// `inf { D(Q||target) : D(Q||G_j) >= E_j for every ball j }`, the closure of
/// the complement of the union of `balls`.
///
/// Fails with [`Error::EmptyRegion`] when the balls cover the simplex.
pub fn min_div_outside_balls(
    balls: &[BallConstraint],
    target: &Distribution,
    base: LogBase,
) -> Result<ProjectionResult> {
    for b in balls {
        b.center.check_same_alphabet(target)?;
    }
    let feasible = |q: &Distribution| outside_all(balls, q, base);
    if feasible(target) {
        return Ok(ProjectionResult {
            value: 0.0,
            argmin: target.clone(),
            status: ProjectionStatus::TargetInside,
        });
    }

    if let Some(j) = balls.iter().position(|b| same_point(&b.center, target)) {
        if let Some(sphere) = isolated_sphere_point(balls, j, base)? {
            return Ok(ProjectionResult {
                value: balls[j].radius,
                argmin: sphere,
                status: ProjectionStatus::BoundaryOptimum,
            });
        }
    }

    let k = target.len();
    if k > SOLVER.max_grid_alphabet {
        return Err(Error::GuardExceeded(format!(
            "complement-of-balls fallback scans the simplex; alphabet size {k} > {}",
            SOLVER.max_grid_alphabet
        )));
    }
    let mut best: Option<(f64, Distribution)> = None;
    let mut offer = |value: f64, q: Distribution| {
        if best.as_ref().map_or(true, |(v, _)| value < *v) {
            best = Some((value, q));
        }
    };
    for ball in balls {
        for q in sphere_candidates(ball, target, base) {
            if feasible(&q) {
                offer(base.from_nats(kl_nats(q.probs(), target.probs())), q);
            }
        }
    }
    let ln_centers: Vec<Vec<f64>> = balls
        .iter()
        .map(|b| b.center.probs().iter().map(|p| p.ln()).collect())
        .collect();
    let radii: Vec<f64> = balls.iter().map(|b| base.to_nats(b.radius)).collect();
    let oracle = grid_oracle_min_div(
        |p: &GridPoint| {
            ln_centers
                .iter()
                .zip(&radii)
                .all(|(lc, r)| p.divergence_nats(lc) >= *r)
        },
        target,
        fallback_resolution(k),
        base,
    )?;
    if let Some(q) = oracle.argmin {
        offer(oracle.value, q);
    }
    match best {
        Some((value, argmin)) if value.is_finite() => Ok(ProjectionResult {
            value,
            argmin,
            status: ProjectionStatus::BoundaryOptimum,
        }),
        Some((_, argmin)) => Ok(ProjectionResult {
            value: f64::INFINITY,
            argmin,
            status: ProjectionStatus::Infeasible,
        }),
        None => Err(Error::EmptyRegion(
            "the balls cover the whole simplex".into(),
        )),
    }
}

fn fallback_resolution(k: usize) -> f64 {
    match k {
        2 => 1e-5,
        3 => 1e-3,
        _ => 5e-3,
    }
}

fn outside_all(balls: &[BallConstraint], q: &Distribution, base: LogBase) -> bool {
    balls.iter().all(|b| {
        let d = base.from_nats(kl_nats(q.probs(), b.center.probs()));
        d >= b.radius - SOLVER.feasibility * (1.0 + b.radius)
    })
}

fn same_point(a: &Distribution, b: &Distribution) -> bool {
    a.probs()
        .iter()
        .zip(b.probs())
        .all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// A point on the sphere of ball `j` when that sphere is nonempty and no other
/// ball meets ball `j`.
fn isolated_sphere_point(
    balls: &[BallConstraint],
    j: usize,
    base: LogBase,
) -> Result<Option<Distribution>> {
    let ball = &balls[j];
    for (i, other) in balls.iter().enumerate() {
        if i == j {
            continue;
        }
        // ball i stays farther than E_j from G_j
        let gap = min_div_in_ball(&other.center, &ball.center, other.radius, base)?;
        if gap.value <= ball.radius {
            return Ok(None);
        }
    }
    Ok(segment_to_vertex(ball, base))
}

/// Crossing of the sphere `D(Q||G) = E` on the segment from `G` to its
/// lightest vertex, where `D` climbs to its maximum over the simplex.
fn segment_to_vertex(ball: &BallConstraint, base: LogBase) -> Option<Distribution> {
    let g = ball.center.probs();
    let (v, _) = g
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    segment_crossing(ball, v, base)
}

fn segment_crossing(ball: &BallConstraint, v: usize, base: LogBase) -> Option<Distribution> {
    let g = ball.center.probs();
    let e = base.to_nats(ball.radius);
    let peak = if g[v] > 0.0 { -g[v].ln() } else { f64::INFINITY };
    if e >= peak {
        return None;
    }
    let point = |s: f64| -> Vec<f64> {
        g.iter()
            .enumerate()
            .map(|(x, p)| (1.0 - s) * p + if x == v { s } else { 0.0 })
            .collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..SOLVER.max_iterations {
        let mid = 0.5 * (lo + hi);
        if kl_nats(&point(mid), g) < e {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    Some(Distribution::from_raw(point(hi)))
}

/// Sphere crossings of `ball` along the geometric line through its centre and
/// `target`, in both directions. When the target is the centre, the segments
/// toward each vertex are used instead.
fn sphere_candidates(ball: &BallConstraint, target: &Distribution, base: LogBase) -> Vec<Distribution> {
    if same_point(&ball.center, target) {
        return (0..target.len())
            .filter_map(|v| segment_crossing(ball, v, base))
            .collect();
    }
    let Some(red) = Reduced::new(&ball.center, target) else {
        return Vec::new();
    };
    let e = base.to_nats(ball.radius) - red.center_floor;
    if e < 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for direction in [1.0f64, -1.0] {
        // beta = 0 is the centre; the target sits at beta = 1
        let div_at = |beta: f64| red.div_center(&red.geometric(beta));
        let mut hi = direction;
        let mut crossed = div_at(hi) >= e;
        while !crossed && hi.abs() < 1e6 {
            hi *= 2.0;
            crossed = div_at(hi) >= e;
        }
        if !crossed {
            continue;
        }
        let mut lo = 0.0f64;
        for _ in 0..SOLVER.max_iterations {
            let mid = 0.5 * (lo + hi);
            if div_at(mid) < e {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo).abs() <= f64::EPSILON * hi.abs() {
                break;
            }
        }
        out.push(red.embed(&red.geometric(hi)));
    }
    out
}

/// A simplex grid point handed to the oracle's feasibility predicate.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint<'a> {
    probs: &'a [f64],
    ln_probs: &'a [f64],
}

impl<'a> GridPoint<'a> {
    pub fn probs(&self) -> &'a [f64] {
        self.probs
    }

    /// `D(self || g)` in nats, given `ln g` entries.
    #[inline]
    pub fn divergence_nats(&self, ln_g: &[f64]) -> f64 {
        let mut total = 0.0;
        for ((&p, &lp), &lg) in self.probs.iter().zip(self.ln_probs).zip(ln_g) {
            if p > 0.0 {
                if lg == f64::NEG_INFINITY {
                    return f64::INFINITY;
                }
                total += p * (lp - lg);
            }
        }
        total
    }

    pub fn divergence(&self, g: &Distribution, base: LogBase) -> f64 {
        let ln_g: Vec<f64> = g.probs().iter().map(|p| p.ln()).collect();
        base.from_nats(self.divergence_nats(&ln_g))
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::from_raw(self.probs.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Minimum over feasible grid points; `+inf` if none is feasible.
    pub value: f64,
    pub argmin: Option<Distribution>,
    /// Actual spacing `1 / round(1 / resolution)`.
    pub spacing: f64,
    pub points: u64,
    pub feasible_points: u64,
}

/// Exhaustive scan of the simplex grid with the given spacing, minimising
/// `D(Q||target)` over points where `feasible` holds. Alphabets of up to 4
/// symbols only.
pub fn grid_oracle_min_div<F>(
    feasible: F,
    target: &Distribution,
    resolution: f64,
    base: LogBase,
) -> Result<OracleResult>
where
    F: Fn(&GridPoint) -> bool,
{
    let k = target.len();
    if k > SOLVER.max_grid_alphabet {
        return Err(Error::GuardExceeded(format!(
            "grid oracle supports at most {} symbols, got {k}",
            SOLVER.max_grid_alphabet
        )));
    }
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::InvalidSpec(format!(
            "grid resolution must lie in (0, 0.1], got {resolution}"
        )));
    }
    let steps = (1.0 / resolution).round() as u32;
    let spacing = 1.0 / steps as f64;
    let ln_table: Vec<f64> = (0..=steps)
        .map(|i| {
            if i == 0 {
                f64::NEG_INFINITY
            } else {
                (i as f64 / steps as f64).ln()
            }
        })
        .collect();
    let ln_target: Vec<f64> = target.probs().iter().map(|p| p.ln()).collect();

    let mut counts = vec![0u32; k];
    counts[k - 1] = steps;
    let mut probs = vec![0.0; k];
    let mut ln_probs = vec![0.0; k];
    let mut best = f64::INFINITY;
    let mut best_point: Option<Vec<f64>> = None;
    let (mut points, mut feasible_points) = (0u64, 0u64);
    loop {
        for x in 0..k {
            probs[x] = counts[x] as f64 * spacing;
            ln_probs[x] = ln_table[counts[x] as usize];
        }
        let point = GridPoint {
            probs: &probs,
            ln_probs: &ln_probs,
        };
        points += 1;
        if feasible(&point) {
            feasible_points += 1;
            let value = point.divergence_nats(&ln_target);
            if value < best || best_point.is_none() {
                best = value;
                best_point = Some(probs.clone());
            }
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(OracleResult {
        value: base.from_nats(best.max(0.0)),
        argmin: best_point.map(Distribution::from_raw),
        spacing,
        points,
        feasible_points,
    })
}

/// Advances `counts` to the next composition in lexicographic order.
fn next_composition(counts: &mut [u32]) -> bool {
    let k = counts.len();
    let mut suffix = counts[k - 1];
    for j in (0..k - 1).rev() {
        if suffix > 0 {
            counts[j] += 1;
            for slot in counts.iter_mut().take(k - 1).skip(j + 1) {
                *slot = 0;
            }
            counts[k - 1] = suffix - 1;
            return true;
        }
        suffix += counts[j];
    }
    false
}

/// First-order bound on how far the grid minimum can sit above the true
/// infimum: `2 k h (1 + max |log(Q*/target)|)` for spacing `h` around the
/// optimiser `Q*`.
pub fn discretization_bound(
    argmin: &Distribution,
    target: &Distribution,
    spacing: f64,
    base: LogBase,
) -> f64 {
    let slope = argmin
        .probs()
        .iter()
        .zip(target.probs())
        .filter(|(q, t)| **q > 0.0 && **t > 0.0)
        .map(|(q, t)| base.from_nats((q / t).ln()).abs())
        .fold(0.0, f64::max);
    2.0 * argmin.len() as f64 * spacing * (1.0 + slope)
}
