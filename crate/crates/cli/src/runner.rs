use apollo_qmc_core::packing::{DeepTally, TaskRunner};
use apollo_qmc_core::{Circle, PackingError};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Thread pool capped by `--threads`; `None` uses one thread per core.
pub fn thread_pool(threads: Option<usize>) -> Result<ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()
}

/// Runs deep-walk tasks on a rayon pool. Results come back in task order,
/// so totals match the sequential runner bit for bit.
pub struct PoolRunner<'a>(pub &'a ThreadPool);

impl TaskRunner for PoolRunner<'_> {
    fn run(
        &self,
        tasks: &[[Circle; 3]],
        work: &(dyn Fn(&[Circle; 3]) -> Result<DeepTally, PackingError> + Sync),
    ) -> Vec<Result<DeepTally, PackingError>> {
        self.0.install(|| tasks.par_iter().map(work).collect())
    }
}
