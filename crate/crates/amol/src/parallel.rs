//! Worker pool sized by the `AMOL_THREADS` environment variable.

use std::sync::OnceLock;

use rayon::ThreadPool;

pub const THREADS_VAR: &str = "AMOL_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            b = b.num_threads(n.max(1));
        }
        b.build().expect("failed to start worker pool")
    })
}

/// Runs `f` inside the shared pool; rayon iterators in `f` use its workers.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

pub fn threads() -> usize {
    pool().current_num_threads()
}
