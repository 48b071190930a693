//! Scoped worker pool for the embarrassingly parallel verification scans.
//! Results come back in input order, so output never depends on scheduling.

/// Worker cap: `FLOWPOLY_THREADS` when set to a positive integer, otherwise
/// the machine's available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("FLOWPOLY_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Apply `f` to every item, splitting the slice across up to
/// [`thread_cap`] scoped threads; the result vector preserves input order.
pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = thread_cap().min(items.len()).max(1);
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let chunks: Vec<Vec<R>> = std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    chunks.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let items: Vec<usize> = (0..1000).collect();
        let doubled = parallel_map(&items, |&x| 2 * x);
        assert_eq!(doubled, items.iter().map(|&x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn empty_input() {
        let items: Vec<u32> = Vec::new();
        assert!(parallel_map(&items, |&x| x).is_empty());
    }
}
