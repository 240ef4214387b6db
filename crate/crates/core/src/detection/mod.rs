//! Randomized plane detection.
//!
//! Each round draws candidate planes from random three-point minimal sets of
//! the remaining points, scores the most promising ones by the size of their
//! largest connected inlier component, and extracts the winner if it reaches
//! the minimum support. Rounds repeat until no candidate does.
//!
//! An inlier lies within `epsilon` of the candidate plane and has a normal
//! within `alpha` of the plane normal (unsigned). Seed triples whose own
//! normals disagree with their plane are discarded before scoring.
//!
//! Candidates are drawn in fixed-size batches. Within a batch every
//! candidate's inlier count is estimated on a per-round random subset of the
//! remaining points; the best few estimates are then scored exactly. A round
//! stops once enough candidates have been drawn that a shape larger than the
//! current best would have been hit with probability `1 - p_t`, or when the
//! budget for a minimum-support shape (capped by `max_candidates`) is spent.
//! All randomness is keyed by `(seed, round, candidate)` and winners are
//! chosen by `(score, lowest candidate serial)`, so the output is independent
//! of thread count.

mod component;
mod params;

pub use component::{connected_component, largest_component_2d, plane_basis};
pub use params::{candidate_budget, DetectionParams, EpsilonMode};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::pointcloud::{PointCloud, Vector3};
use crate::rng;

const BATCH: usize = 256;
const EXACT_PER_BATCH: usize = 2;
const SUBSET: usize = 512;

/// Plane `normal · p + offset = 0` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePlane {
    pub normal: Vector3,
    pub offset: f64,
}

impl CandidatePlane {
    pub fn distance(&self, p: &crate::Point3) -> f64 {
        (self.normal.dot(&p.coords) + self.offset).abs()
    }
}

/// An accepted fragment: indices into the source cloud (ascending) and the
/// candidate plane that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub indices: Vec<usize>,
    pub plane: CandidatePlane,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Disjoint fragments plus every point not assigned to any of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub fragments: Vec<Fragment>,
    pub residual: Vec<usize>,
    pub rounds: usize,
    pub candidates_drawn: usize,
    /// Inlier distance actually used (meters).
    pub epsilon: f64,
}

struct Scored {
    size: usize,
    serial: usize,
    plane: CandidatePlane,
    component: Vec<usize>,
}

struct RoundContext<'a> {
    cloud: &'a PointCloud,
    remaining: &'a [usize],
    subset: &'a [usize],
    epsilon: f64,
    cos_alpha: f64,
    radius: f64,
    seed: u64,
    round: usize,
}

impl RoundContext<'_> {
    fn is_inlier(&self, plane: &CandidatePlane, i: usize) -> bool {
        plane.distance(self.cloud.point(i)) <= self.epsilon
            && self
                .cloud
                .normal(i)
                .is_some_and(|n| n.dot(&plane.normal).abs() > self.cos_alpha)
    }

    fn candidate(&self, serial: usize) -> Option<CandidatePlane> {
        let n = self.remaining.len();
        if n < 3 {
            return None;
        }
        let mut rng = rng::stream(self.seed, &[self.round as u64, serial as u64]);
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let mut c = rng.random_range(0..n - 2);
        for lo in [a.min(b), a.max(b)] {
            if c >= lo {
                c += 1;
            }
        }
        let idx = [self.remaining[a], self.remaining[b], self.remaining[c]];
        let [p0, p1, p2] = idx.map(|i| *self.cloud.point(i));
        let cross = (p1 - p0).cross(&(p2 - p0));
        let len = cross.norm();
        let scale = (p1 - p0).norm() * (p2 - p0).norm();
        if !(len > 1e-9 * scale) || len == 0.0 {
            return None;
        }
        let normal = cross / len;
        let seeds_agree = idx.iter().all(|&i| {
            self.cloud
                .normal(i)
                .is_some_and(|n| n.dot(&normal).abs() > self.cos_alpha)
        });
        seeds_agree.then(|| CandidatePlane {
            normal,
            offset: -normal.dot(&p0.coords),
        })
    }

    fn estimate(&self, plane: &CandidatePlane) -> usize {
        self.subset.iter().filter(|&&i| self.is_inlier(plane, i)).count()
    }

    fn score(&self, plane: &CandidatePlane) -> Vec<usize> {
        let inliers: Vec<usize> = self
            .remaining
            .iter()
            .copied()
            .filter(|&i| self.is_inlier(plane, i))
            .collect();
        if inliers.is_empty() {
            return inliers;
        }
        connected_component(self.cloud, &inliers, &plane.normal, self.radius)
    }
}

/// Splits `cloud` into planar fragments and residual points.
///
/// Requires normals; points with invalid normals always end up in the
/// residual. Zero fragments is a valid outcome.
pub fn detect_planes(cloud: &PointCloud, params: &DetectionParams) -> Result<DetectionResult> {
    params.validate()?;
    if !cloud.has_normals() {
        return Err(Error::Precondition(
            "plane detection requires normals; estimate them first".into(),
        ));
    }
    let epsilon = params.effective_epsilon(cloud.bbox().as_ref());
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(vec![format!(
            "effective epsilon must be > 0, got {epsilon}"
        )]));
    }
    let tau = params.min_support;
    let cos_alpha = params.max_normal_deviation_deg.to_radians().cos();
    let radius = params.component_radius();

    let mut assigned = vec![false; cloud.len()];
    let mut remaining: Vec<usize> = (0..cloud.len()).filter(|&i| cloud.normal_is_valid(i)).collect();
    let mut fragments = Vec::new();
    let mut rounds = 0;
    let mut drawn_total = 0;

    while rounds < params.max_rounds && remaining.len() >= tau.max(3) {
        let subset = round_subset(&remaining, params.seed, rounds);
        let ctx = RoundContext {
            cloud,
            remaining: &remaining,
            subset: &subset,
            epsilon,
            cos_alpha,
            radius,
            seed: params.seed,
            round: rounds,
        };
        let (best, drawn) = run_round(&ctx, params);
        rounds += 1;
        drawn_total += drawn;
        let Some(best) = best.filter(|b| b.size >= tau) else {
            break;
        };
        tracing::debug!(round = rounds, size = best.size, serial = best.serial, "accepted plane");
        for &i in &best.component {
            assigned[i] = true;
        }
        remaining.retain(|&i| !assigned[i]);
        fragments.push(Fragment {
            indices: best.component,
            plane: best.plane,
        });
    }

    let residual = (0..cloud.len()).filter(|&i| !assigned[i]).collect();
    Ok(DetectionResult {
        fragments,
        residual,
        rounds,
        candidates_drawn: drawn_total,
        epsilon,
    })
}

fn round_subset(remaining: &[usize], seed: u64, round: usize) -> Vec<usize> {
    if remaining.len() <= SUBSET {
        return remaining.to_vec();
    }
    let mut rng = rng::stream(seed, &[round as u64, u64::MAX]);
    let picks = rand::seq::index::sample(&mut rng, remaining.len(), SUBSET);
    let mut out: Vec<usize> = picks.into_iter().map(|k| remaining[k]).collect();
    out.sort_unstable();
    out
}

fn run_round(ctx: &RoundContext<'_>, params: &DetectionParams) -> (Option<Scored>, usize) {
    let tau = params.min_support;
    let n = ctx.remaining.len();
    let cap = candidate_budget(tau, n, params.overlook_probability).min(params.max_candidates);
    // Scale an estimate on the subset up to the full remaining set.
    let scale = n as f64 / ctx.subset.len() as f64;
    let mut best: Option<Scored> = None;
    let mut drawn = 0;
    while drawn < cap {
        let end = (drawn + BATCH).min(cap);
        let estimates: Vec<Option<(usize, CandidatePlane, usize)>> = par::map_span(drawn, end, |serial| {
            let plane = ctx.candidate(serial)?;
            let est = ctx.estimate(&plane);
            (est as f64 * scale >= 0.5 * tau as f64).then_some((serial, plane, est))
        });
        let mut promising: Vec<(usize, CandidatePlane, usize)> = estimates.into_iter().flatten().collect();
        promising.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
        promising.truncate(EXACT_PER_BATCH);
        let scored: Vec<Scored> = par::map(&promising, |&(serial, plane, _)| {
            let component = ctx.score(&plane);
            Scored {
                size: component.len(),
                serial,
                plane,
                component,
            }
        });
        for s in scored {
            let better = match &best {
                None => true,
                Some(b) => s.size > b.size || (s.size == b.size && s.serial < b.serial),
            };
            if better {
                best = Some(s);
            }
        }
        drawn = end;
        let target = best.as_ref().map_or(tau, |b| b.size.max(tau));
        if drawn >= candidate_budget(target, n, params.overlook_probability) {
            break;
        }
    }
    (best, drawn)
}
