//! Sampling runs: sample `i` is a pure function of `(params, seed, i)`.

use rayon::prelude::*;
use thiserror::Error;

use crate::gluing::{build_instance, GluingInstance, ModelError, ModelParams, SurfaceSummary};
use crate::rng::substream;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Samples processed between flushes of streamed output.
pub const CHUNK: usize = 4096;

pub fn sample_instance(
    params: ModelParams,
    seed: u64,
    index: u64,
) -> Result<GluingInstance, ModelError> {
    build_instance(params, &mut substream(seed, index))
}

pub fn sample_one(
    params: ModelParams,
    seed: u64,
    index: u64,
) -> Result<SurfaceSummary, ModelError> {
    Ok(sample_instance(params, seed, index)?.summarize())
}

/// Runs `f` on a pool of `threads` workers, or on the current thread when
/// `threads` is `Some(1)`, or on the global pool when `None`.
pub fn with_workers<T, F>(threads: Option<usize>, f: F) -> Result<T, RunError>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()?;
            Ok(pool.install(f))
        }
    }
}

fn summaries(
    params: ModelParams,
    seed: u64,
    range: std::ops::Range<usize>,
    serial: bool,
) -> Result<Vec<SurfaceSummary>, ModelError> {
    if serial {
        range.map(|i| sample_one(params, seed, i as u64)).collect()
    } else {
        range
            .into_par_iter()
            .map(|i| sample_one(params, seed, i as u64))
            .collect()
    }
}

/// All summaries of a run, in index order.
pub fn run_samples(
    params: ModelParams,
    seed: u64,
    samples: usize,
    threads: Option<usize>,
) -> Result<Vec<SurfaceSummary>, RunError> {
    let serial = threads == Some(1);
    Ok(with_workers(threads, || {
        summaries(params, seed, 0..samples, serial)
    })??)
}

/// Streams summaries to `sink` in index order, one chunk at a time.
pub fn for_each_chunk<F, E>(
    params: ModelParams,
    seed: u64,
    samples: usize,
    threads: Option<usize>,
    mut sink: F,
) -> Result<Result<(), E>, RunError>
where
    F: FnMut(usize, &[SurfaceSummary]) -> Result<(), E> + Send,
    E: Send,
{
    let serial = threads == Some(1);
    let outcome: Result<Result<(), E>, ModelError> = with_workers(threads, || {
        let mut start = 0;
        while start < samples {
            let end = (start + CHUNK).min(samples);
            let chunk = summaries(params, seed, start..end, serial)?;
            if let Err(e) = sink(start, &chunk) {
                return Ok(Err(e));
            }
            start = end;
        }
        Ok(Ok(()))
    })?;
    Ok(outcome?)
}
