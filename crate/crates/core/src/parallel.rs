//! Trial scheduling. Results are always collected in trial order, so the
//! sequential and parallel paths produce identical output.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when built with the `parallel` feature, otherwise falls back
    /// to sequential.
    #[default]
    Parallel,
}

pub fn map_trials<T, F>(trials: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(f).collect()
        }
        _ => (0..trials).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_trials(1000, Execution::Sequential, |i| i * i);
        let par = map_trials(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
    }
}
