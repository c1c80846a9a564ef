//! Black-box search over the illusion parameters `(d, w, h)`.
//!
//! A coarse grid visits every point once in `d`-outer, `w`-middle, `h`-inner order and keeps
//! the `top_k` best (earliest wins ties). A sequential surrogate search then refines around the
//! best seed inside a box of `refine_radius` times each range.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{CameraGeometry, IllusionSpec};
use crate::image::RasterImage;
use crate::math;
use crate::oracle::OracleError;
use crate::render::RenderError;
use crate::warp::{self, Decal, PrintConstraints, WarpError};

mod objective;
pub mod surrogate;

pub use objective::{DecalObjective, FnObjective, ViewSettings};
use surrogate::{expected_improvement, GaussianProcess, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObjectiveError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("objective returned invalid loss {0}")]
    InvalidLoss(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("EmptyGrid: search space yields no grid points")]
    EmptyGrid,
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("no seed candidates to refine")]
    NoSeeds,
    #[error("evaluation failed at d={d}, w={w}, h={h}: {source}")]
    Evaluation { d: f64, w: f64, h: f64, source: ObjectiveError },
    #[error(transparent)]
    Decal(#[from] WarpError),
}

/// Inclusive range sampled every `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ParamRange {
    pub const fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    /// `min, min + step, …` up to `max`, tolerant of float drift at the top end.
    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.max < self.min {
            return Vec::new();
        }
        let n = math::floor((self.max - self.min) / self.step + 1e-9) as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// One point of the search: viewing distance, width, illusion height (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub d_range: ParamRange,
    pub w_range: ParamRange,
    pub h_range: ParamRange,
}

impl SearchSpace {
    /// d ∈ [4, 12] step 1, w ∈ [1.4, 2.4] step 0.2, h ∈ [0.4, 0.9·H] step 0.1.
    pub fn default_for(camera_height_m: f64) -> Self {
        Self {
            d_range: ParamRange::new(4.0, 12.0, 1.0),
            w_range: ParamRange::new(1.4, 2.4, 0.2),
            h_range: ParamRange::new(0.4, 0.9 * camera_height_m, 0.1),
        }
    }

    pub fn validate(&self, camera_height_m: f64) -> Result<(), OptimizerError> {
        for (name, r) in [("d", &self.d_range), ("w", &self.w_range), ("h", &self.h_range)] {
            let ok = r.min.is_finite() && r.max.is_finite() && r.step.is_finite();
            if !ok || !(r.min < r.max) || !(r.step > 0.0) {
                return Err(OptimizerError::InvalidSpace(format!(
                    "{name} range needs min < max and step > 0 (got {}..{} step {})",
                    r.min, r.max, r.step
                )));
            }
        }
        if self.d_range.min <= 0.0 || self.w_range.min <= 0.0 || self.h_range.min < 0.0 {
            return Err(OptimizerError::InvalidSpace("d, w must be > 0 and h >= 0".into()));
        }
        if self.h_range.max >= camera_height_m {
            return Err(OptimizerError::InvalidSpace(format!(
                "h_max {} must stay below camera height {camera_height_m}",
                self.h_range.max
            )));
        }
        Ok(())
    }

    /// Grid points in evaluation order.
    pub fn grid(&self) -> Vec<Params> {
        let (ds, ws, hs) = (self.d_range.values(), self.w_range.values(), self.h_range.values());
        let mut out = Vec::with_capacity(ds.len() * ws.len() * hs.len());
        for &d in &ds {
            for &w in &ws {
                for &h in &hs {
                    out.push(Params { d, w, h });
                }
            }
        }
        out
    }

    pub fn contains(&self, p: &Params) -> bool {
        let inside = |r: &ParamRange, v: f64| v >= r.min - 1e-12 && v <= r.max + 1e-12;
        inside(&self.d_range, p.d) && inside(&self.w_range, p.w) && inside(&self.h_range, p.h)
    }
}

/// An evaluated parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub d: f64,
    pub w: f64,
    pub h: f64,
    pub loss: f64,
    pub decal_id: String,
}

impl Candidate {
    pub fn params(&self) -> Params {
        Params { d: self.d, w: self.w, h: self.h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineStrategyKind {
    /// Gaussian-process surrogate with expected-improvement acquisition.
    #[default]
    GpExpectedImprovement,
    /// Random perturbations of the incumbent with a shrinking radius.
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub top_k: usize,
    pub refine_budget: usize,
    /// Fraction of each range's span, in `(0, 0.5]`.
    pub refine_radius: f64,
    pub rng_seed: u64,
    pub strategy: RefineStrategyKind,
    /// Abort on the first failed evaluation instead of scoring it 0.
    pub abort_on_error: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            top_k: 3,
            refine_budget: 20,
            refine_radius: 0.15,
            rng_seed: 0,
            strategy: RefineStrategyKind::default(),
            abort_on_error: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.top_k < 1 {
            return Err(OptimizerError::InvalidConfig("top_k must be >= 1".into()));
        }
        if !(self.refine_radius > 0.0 && self.refine_radius <= 0.5) {
            return Err(OptimizerError::InvalidConfig(format!(
                "refine_radius must lie in (0, 0.5], got {}",
                self.refine_radius
            )));
        }
        Ok(())
    }
}

/// Scores a parameter point. `eval_id` is unique per evaluation within a run.
pub trait Objective {
    fn evaluate(&mut self, params: &Params, eval_id: &str) -> Result<f64, ObjectiveError>;
}

impl<O: Objective + ?Sized> Objective for &mut O {
    fn evaluate(&mut self, params: &Params, eval_id: &str) -> Result<f64, ObjectiveError> {
        (**self).evaluate(params, eval_id)
    }
}

pub fn grid_eval_id(index: usize) -> String {
    format!("g{index:05}")
}

pub fn refine_eval_id(index: usize) -> String {
    format!("r{index:05}")
}

/// Runs one evaluation and applies the error policy.
pub fn score<O: Objective + ?Sized>(
    objective: &mut O,
    p: &Params,
    eval_id: String,
    abort_on_error: bool,
) -> Result<Candidate, OptimizerError> {
    let loss = objective.evaluate(p, &eval_id).and_then(|l| {
        if l.is_finite() && l >= 0.0 {
            Ok(l)
        } else {
            Err(ObjectiveError::InvalidLoss(l))
        }
    });
    let loss = match loss {
        Ok(l) => l,
        Err(e) if abort_on_error => {
            return Err(OptimizerError::Evaluation { d: p.d, w: p.w, h: p.h, source: e })
        }
        Err(_) => 0.0,
    };
    Ok(Candidate { d: p.d, w: p.w, h: p.h, loss, decal_id: eval_id })
}

/// The `k` best candidates by loss; a stable sort keeps the earliest of equal losses first.
pub fn top_k(evaluated: &[Candidate], k: usize) -> Vec<Candidate> {
    let mut sorted: Vec<Candidate> = evaluated.to_vec();
    sorted.sort_by(|a, b| b.loss.total_cmp(&a.loss));
    sorted.truncate(k);
    sorted
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Loss-descending, at most `top_k` entries.
    pub top: Vec<Candidate>,
    /// Every grid evaluation, in iteration order.
    pub evaluated: Vec<Candidate>,
}

pub fn coarse_grid_search<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &mut O,
    cfg: &OptimizerConfig,
) -> Result<GridResult, OptimizerError> {
    cfg.validate()?;
    let grid = space.grid();
    if grid.is_empty() {
        return Err(OptimizerError::EmptyGrid);
    }
    let mut evaluated = Vec::with_capacity(grid.len());
    for (i, p) in grid.iter().enumerate() {
        evaluated.push(score(objective, p, grid_eval_id(i), cfg.abort_on_error)?);
    }
    Ok(GridResult { top: top_k(&evaluated, cfg.top_k), evaluated })
}

/// Axis-aligned refinement box in parameter space, mapped to the unit cube.
struct RefineBox {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl RefineBox {
    fn around(center: &Params, space: &SearchSpace, radius: f64) -> Self {
        let ranges = [&space.d_range, &space.w_range, &space.h_range];
        let c = [center.d, center.w, center.h];
        let lo = core::array::from_fn(|i| ranges[i].clamp(c[i] - radius * ranges[i].span()));
        let hi = core::array::from_fn(|i| ranges[i].clamp(c[i] + radius * ranges[i].span()));
        Self { lo, hi }
    }

    fn to_unit(&self, p: &Params) -> Option<Point> {
        let v = [p.d, p.w, p.h];
        let mut out = [0.0; 3];
        for i in 0..3 {
            let span = self.hi[i] - self.lo[i];
            if v[i] < self.lo[i] - 1e-12 || v[i] > self.hi[i] + 1e-12 {
                return None;
            }
            out[i] = if span > 0.0 { (v[i] - self.lo[i]) / span } else { 0.5 };
        }
        Some(out)
    }

    fn from_unit(&self, u: &Point) -> Params {
        let v: [f64; 3] =
            core::array::from_fn(|i| self.lo[i] + u[i].clamp(0.0, 1.0) * (self.hi[i] - self.lo[i]));
        Params { d: v[0], w: v[1], h: v[2] }
    }
}

/// Proposes the next point to evaluate, in unit-cube coordinates of the refinement box.
pub trait RefineStrategy {
    fn propose(&mut self, observed: &[(Point, f64)], rng: &mut ChaCha8Rng) -> Point;
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    core::array::from_fn(|_| rng.gen::<f64>())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 - u keeps the log argument in (0, 1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}

fn perturb(p: &Point, sigma: f64, rng: &mut ChaCha8Rng) -> Point {
    core::array::from_fn(|i| (p[i] + sigma * gaussian(rng)).clamp(0.0, 1.0))
}

fn incumbent(observed: &[(Point, f64)]) -> Option<&(Point, f64)> {
    observed.iter().fold(None, |best: Option<&(Point, f64)>, o| match best {
        Some(b) if b.1 >= o.1 => Some(b),
        _ => Some(o),
    })
}

fn too_close(p: &Point, observed: &[(Point, f64)]) -> bool {
    observed
        .iter()
        .any(|(q, _)| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < 1e-10)
}

/// Gaussian-process surrogate maximizing expected improvement over a random candidate pool.
pub struct GpExpectedImprovement {
    pub pool_uniform: usize,
    pub pool_local: usize,
    pub xi: f64,
}

impl Default for GpExpectedImprovement {
    fn default() -> Self {
        Self { pool_uniform: 384, pool_local: 128, xi: 1e-3 }
    }
}

impl RefineStrategy for GpExpectedImprovement {
    fn propose(&mut self, observed: &[(Point, f64)], rng: &mut ChaCha8Rng) -> Point {
        let Some(gp) = GaussianProcess::fit(observed) else {
            return random_point(rng);
        };
        let (best_x, best_y) = *incumbent(observed).expect("nonempty when fit succeeds");
        let mut choice: Option<(f64, Point)> = None;
        for i in 0..self.pool_uniform + self.pool_local {
            let x = if i < self.pool_uniform {
                random_point(rng)
            } else {
                let sigma = if i % 2 == 0 { 0.05 } else { 0.15 };
                perturb(&best_x, sigma, rng)
            };
            let (m, s) = gp.predict(&x);
            let ei = expected_improvement(m, s, best_y, self.xi);
            if choice.as_ref().is_none_or(|c| ei > c.0) {
                choice = Some((ei, x));
            }
        }
        match choice {
            Some((ei, x)) if ei > 0.0 && !too_close(&x, observed) => x,
            _ => random_point(rng),
        }
    }
}

/// Fallback: Gaussian perturbations of the incumbent, radius shrinking with each call.
pub struct LocalSearch {
    sigma: f64,
}

impl Default for LocalSearch {
    fn default() -> Self {
        Self { sigma: 0.3 }
    }
}

impl RefineStrategy for LocalSearch {
    fn propose(&mut self, observed: &[(Point, f64)], rng: &mut ChaCha8Rng) -> Point {
        let p = match incumbent(observed) {
            Some((x, _)) => perturb(x, self.sigma, rng),
            None => random_point(rng),
        };
        self.sigma = (self.sigma * 0.85).max(0.02);
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub best: Candidate,
    /// Refinement evaluations in order.
    pub evaluated: Vec<Candidate>,
}

/// Sequential surrogate-guided search near the best seed. Never returns worse than the best
/// seed; deterministic under `cfg.rng_seed`.
pub fn refine<O: Objective + ?Sized>(
    seeds: &[Candidate],
    space: &SearchSpace,
    objective: &mut O,
    cfg: &OptimizerConfig,
) -> Result<RefineResult, OptimizerError> {
    cfg.validate()?;
    let best_seed = top_k(seeds, 1).pop().ok_or(OptimizerError::NoSeeds)?;
    let mut strategy: alloc::boxed::Box<dyn RefineStrategy> = match cfg.strategy {
        RefineStrategyKind::GpExpectedImprovement => alloc::boxed::Box::new(GpExpectedImprovement::default()),
        RefineStrategyKind::LocalSearch => alloc::boxed::Box::new(LocalSearch::default()),
    };
    let rbox = RefineBox::around(&best_seed.params(), space, cfg.refine_radius);
    let mut observed: Vec<(Point, f64)> =
        seeds.iter().filter_map(|c| rbox.to_unit(&c.params()).map(|u| (u, c.loss))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut best = best_seed;
    let mut evaluated = Vec::with_capacity(cfg.refine_budget);
    for i in 0..cfg.refine_budget {
        let u = strategy.propose(&observed, &mut rng);
        let p = rbox.from_unit(&u);
        let c = score(objective, &p, refine_eval_id(i), cfg.abort_on_error)?;
        observed.push((u, c.loss));
        if c.loss > best.loss {
            best = c.clone();
        }
        evaluated.push(c);
    }
    Ok(RefineResult { best, evaluated })
}

/// Decal output settings for the final candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecalSettings {
    pub constraints: PrintConstraints,
    pub resolution_px_per_m: f64,
}

impl Default for DecalSettings {
    fn default() -> Self {
        Self {
            constraints: PrintConstraints::default(),
            resolution_px_per_m: warp::DEFAULT_RESOLUTION_PX_PER_M,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Candidate,
    pub decal: Decal,
    /// Every evaluation: grid points in order, then refinement steps.
    pub trace: Vec<Candidate>,
}

/// Builds the decal for the winning candidate and assembles the trace.
pub fn finish(
    src: &RasterImage,
    camera_height_m: f64,
    grid: GridResult,
    refined: RefineResult,
    decal: &DecalSettings,
) -> Result<OptimizeResult, OptimizerError> {
    let best = refined.best;
    let cam = CameraGeometry::new(camera_height_m, best.d).map_err(WarpError::from)?;
    let spec = IllusionSpec::new(best.h, best.w).map_err(WarpError::from)?;
    let decal = warp::generate_anamorphic(src, &cam, &spec, &decal.constraints, decal.resolution_px_per_m)?;
    let mut trace = grid.evaluated;
    trace.extend(refined.evaluated);
    Ok(OptimizeResult { best, decal, trace })
}

/// Grid search, refinement around the top candidates, and the final decal.
pub fn optimize<O: Objective + ?Sized>(
    src: &RasterImage,
    camera_height_m: f64,
    space: &SearchSpace,
    objective: &mut O,
    cfg: &OptimizerConfig,
    decal: &DecalSettings,
) -> Result<OptimizeResult, OptimizerError> {
    space.validate(camera_height_m)?;
    let grid = coarse_grid_search(space, objective, cfg)?;
    let refined = refine(&grid.top, space, objective, cfg)?;
    finish(src, camera_height_m, grid, refined, decal)
}
