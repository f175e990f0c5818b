use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maps `f` over `items` on a pool of `jobs` threads (0 = rayon default) and
/// returns results in input order. The first error by index wins.
pub fn ordered_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    let results: Vec<Result<R>> = pool.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let serial = ordered_map(1, &items, |v| Ok(v * v)).unwrap();
        let par = ordered_map(4, &items, |v| Ok(v * v)).unwrap();
        assert_eq!(serial, par);
    }

    #[test]
    fn first_error_by_index() {
        let items: Vec<u64> = (0..50).collect();
        let err = ordered_map(3, &items, |v| {
            if *v % 7 == 3 {
                Err(Error::Domain(format!("bad {v}")))
            } else {
                Ok(*v)
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("bad 3"));
    }
}
