//! Optional multi-threaded fitness evaluation, selected by `PDPTW_THREADS`.

use pdptw_core::evaluation::{ObjectiveVector, Scorer, Solution};
use pdptw_core::ga::FitnessEvaluator;
use pdptw_core::model::{Instance, PrecedencePair};

/// How fitness batches are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Threads(usize),
}

/// Reads `PDPTW_THREADS`: unset or unparsable means sequential, `0` means
/// one thread per available core, any other number is taken literally.
pub fn parallelism_from_env() -> Parallelism {
    match std::env::var("PDPTW_THREADS") {
        Err(_) => Parallelism::Sequential,
        Ok(raw) => match raw.trim().parse::<usize>() {
            Err(_) => Parallelism::Sequential,
            Ok(0) => Parallelism::Threads(
                std::thread::available_parallelism().map_or(1, |n| n.get()),
            ),
            Ok(n) => Parallelism::Threads(n),
        },
    }
}

/// Scores fitness batches on a fixed number of threads.
///
/// Chunks are contiguous and results are concatenated in batch order, and
/// each solution is scored independently, so the outcome is byte-for-byte
/// the same as sequential evaluation — threads change throughput only.
#[derive(Debug, Clone, Copy)]
pub struct ThreadedEvaluator {
    pub threads: usize,
}

impl FitnessEvaluator for ThreadedEvaluator {
    fn evaluate(
        &mut self,
        instance: &Instance,
        pairs: &[PrecedencePair],
        batch: &[&Solution],
    ) -> Vec<(ObjectiveVector, bool)> {
        let threads = self.threads.max(1);
        if threads == 1 || batch.len() < 2 {
            let mut scorer = Scorer::new(instance, pairs);
            return batch.iter().map(|s| scorer.score(s)).collect();
        }
        let chunk = batch.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        let mut scorer = Scorer::new(instance, pairs);
                        part.iter().map(|s| scorer.score(s)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|handle| handle.join().expect("scoring thread panicked"))
                .collect()
        })
    }
}
