//! Data-parallel helpers. With the `parallel` feature they run on the rayon
//! pool, otherwise sequentially; results are identical either way.

/// `(0..n).map(f).collect()`.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Calls `f(index, chunk)` on consecutive `chunk_len` pieces of `buf`.
pub fn for_each_chunk<T, F>(buf: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        buf.par_chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        buf.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Name of the active execution mode, for reports and bench ids.
pub fn mode_name() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

/// Keeps faer's internal threading in line with the active mode.
pub(crate) fn sync_linalg_threads() {
    #[cfg(not(feature = "parallel"))]
    faer::set_global_parallelism(faer::Par::Seq);
}
