use std::time::Duration;

/// Bounded retry with exponential backoff for external clients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("gave up after {attempts} attempts: {last}")]
pub struct RetryError<E: std::fmt::Display> {
    pub attempts: u32,
    pub last: E,
}

impl RetryPolicy {
    /// No waiting between attempts; for tests and stubs.
    pub fn immediate(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            initial_backoff: Duration::ZERO,
            multiplier: 1.0,
        }
    }

    pub fn backoff(&self, retry_index: u32) -> Duration {
        self.initial_backoff
            .mul_f64(self.multiplier.powi(retry_index as i32))
    }

    /// Runs `op` until it succeeds or `max_attempts` is exhausted. `op`
    /// receives the 1-based attempt number.
    pub fn run<T, E, F>(&self, mut op: F) -> Result<T, RetryError<E>>
    where
        E: std::fmt::Display,
        F: FnMut(u32) -> Result<T, E>,
    {
        let max = self.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match op(attempt) {
                Ok(v) => return Ok(v),
                Err(e) if attempt >= max => {
                    return Err(RetryError {
                        attempts: attempt,
                        last: e,
                    })
                }
                Err(e) => {
                    let wait = self.backoff(attempt - 1);
                    log::warn!("attempt {attempt}/{max} failed: {e}; retrying in {wait:?}");
                    if !wait.is_zero() {
                        std::thread::sleep(wait);
                    }
                    attempt += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn succeeds_after_two_failures() {
        let mut calls = 0;
        let out = RetryPolicy::immediate(3).run(|_| {
            calls += 1;
            if calls < 3 {
                Err("boom")
            } else {
                Ok(7)
            }
        });
        assert_eq!(out, Ok(7));
        assert_eq!(calls, 3);
    }

    #[test]
    fn gives_up_after_max_attempts() {
        let err = RetryPolicy::immediate(3)
            .run(|n| Err::<(), _>(format!("fail {n}")))
            .unwrap_err();
        assert_eq!(err.attempts, 3);
        assert_eq!(err.last, "fail 3");
    }

    #[test]
    fn default_backoff_doubles_from_one_second() {
        let p = RetryPolicy::default();
        assert_eq!(p.max_attempts, 3);
        assert_eq!(p.backoff(0), Duration::from_secs(1));
        assert_eq!(p.backoff(1), Duration::from_secs(2));
    }
}
