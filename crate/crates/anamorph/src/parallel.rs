//! Multi-threaded grid evaluation and scenario sweeps that reproduce the sequential results
//! exactly: every point keeps its index, eval id and seed no matter which thread runs it.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anamorph_core::optimizer::{
    self, grid_eval_id, score, top_k, Candidate, DecalSettings, GridResult, Objective, OptimizeResult,
    OptimizerConfig, OptimizerError, SearchSpace,
};
use anamorph_core::vanet::{self, ScenarioConfig, SimReport, SweepAxis, VanetError};
use anamorph_core::RasterImage;

/// Runs `f(i)` for `i in 0..n` on up to `jobs` threads and returns the results in index order.
/// Stops handing out work after the first error.
pub fn map_indexed<T, E, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T, E>>>> = Mutex::new((0..n).map(|_| None).collect());
    let failed = std::sync::atomic::AtomicBool::new(false);
    thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                if r.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let slots = slots.into_inner().unwrap();
    let mut out = Vec::with_capacity(n);
    for slot in slots {
        match slot {
            Some(r) => out.push(r?),
            // only skipped after an earlier index failed, which returned above
            None => unreachable!("unfinished slot without a failure"),
        }
    }
    Ok(out)
}

/// Grid search with one objective per worker. `make` is called once per thread.
pub fn coarse_grid_search<O, E, M>(
    space: &SearchSpace,
    make: M,
    cfg: &OptimizerConfig,
    jobs: usize,
) -> Result<GridResult, E>
where
    O: Objective,
    E: From<OptimizerError> + Send,
    M: Fn() -> Result<O, E> + Sync,
{
    cfg.validate()?;
    let grid = space.grid();
    if grid.is_empty() {
        return Err(OptimizerError::EmptyGrid.into());
    }
    let jobs = jobs.clamp(1, grid.len());
    let chunk = grid.len().div_ceil(jobs);
    // contiguous chunks, so each worker builds its objective once
    let parts: Vec<Vec<Candidate>> = map_indexed(jobs, jobs, |j| {
        let mut obj = make()?;
        let lo = j * chunk;
        let hi = (lo + chunk).min(grid.len());
        (lo..hi)
            .map(|i| score(&mut obj, &grid[i], grid_eval_id(i), cfg.abort_on_error).map_err(E::from))
            .collect()
    })?;
    let evaluated: Vec<Candidate> = parts.into_iter().flatten().collect();
    Ok(GridResult { top: top_k(&evaluated, cfg.top_k), evaluated })
}

/// Same result as [`optimizer::optimize`]; the grid runs on `jobs` threads and refinement on
/// one further objective.
pub fn optimize<O, E, M>(
    src: &RasterImage,
    camera_height_m: f64,
    space: &SearchSpace,
    make: M,
    cfg: &OptimizerConfig,
    decal: &DecalSettings,
    jobs: usize,
) -> Result<OptimizeResult, E>
where
    O: Objective,
    E: From<OptimizerError> + Send,
    M: Fn() -> Result<O, E> + Sync,
{
    space.validate(camera_height_m)?;
    if jobs <= 1 {
        let mut obj = make()?;
        return Ok(optimizer::optimize(src, camera_height_m, space, &mut obj, cfg, decal)?);
    }
    let grid = coarse_grid_search(space, &make, cfg, jobs)?;
    let mut obj = make()?;
    let refined = optimizer::refine(&grid.top, space, &mut obj, cfg)?;
    Ok(optimizer::finish(src, camera_height_m, grid, refined, decal)?)
}

/// Same result as [`vanet::sweep`], one scenario per task.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[u64], jobs: usize) -> Result<Vec<SimReport>, VanetError> {
    if values.is_empty() {
        return Err(VanetError::EmptySweep);
    }
    map_indexed(values.len(), jobs, |i| vanet::run(&axis.apply(base, values[i], i)))
}
