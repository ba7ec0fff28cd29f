//! Deterministic fan-out of independent trials over worker threads.
//!
//! Trial `t` always draws from `trial_rng(seed, t)` and results are reduced in trial
//! order, so summaries are bit-identical for any worker count.

use crate::seed::{trial_rng, Rng};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `f(t)` for every `t < count`, in order.
pub fn parallel_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(workers);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(count)..((w + 1) * chunk).min(count);
                scope.spawn(move || range.map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Mean and standard error of `f` over seeded trials.
pub fn parallel_trials<F>(trials: usize, seed: u64, workers: usize, f: F) -> TrialSummary
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let xs = parallel_map(trials, workers, |t| f(&mut trial_rng(seed, t as u64)));
    let (mean, stderr) = super::stats::mean_stderr(&xs);
    TrialSummary { mean, stderr, trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn order_is_kept() {
        assert_eq!(parallel_map(10, 3, |t| t * t), (0..10).map(|t| t * t).collect::<Vec<_>>());
        assert!(parallel_map(0, 4, |t| t).is_empty());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = parallel_trials(1001, 5, 1, |r| r.gen::<f64>());
        for w in [2, 3, 8] {
            let b = parallel_trials(1001, 5, w, |r| r.gen::<f64>());
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        }
    }
}
