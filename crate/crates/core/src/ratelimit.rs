use std::time::{Duration, Instant};

use parking_lot::Mutex;

/// Blocking token bucket shared by the workers calling one external service.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    /// `rate` tokens per second, bursts of up to `capacity`. A non-positive
    /// or infinite rate disables limiting.
    pub fn new(rate: f64, capacity: f64) -> Self {
        let capacity = capacity.max(1.0);
        Self {
            rate,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(f64::INFINITY, 1.0)
    }

    fn limited(&self) -> bool {
        self.rate.is_finite() && self.rate > 0.0
    }

    /// Takes one token if available, otherwise returns how long to wait.
    pub fn try_acquire(&self) -> Result<(), Duration> {
        if !self.limited() {
            return Ok(());
        }
        let mut st = self.state.lock();
        let now = Instant::now();
        let elapsed = now.duration_since(st.1).as_secs_f64();
        st.0 = (st.0 + elapsed * self.rate).min(self.capacity);
        st.1 = now;
        if st.0 >= 1.0 {
            st.0 -= 1.0;
            Ok(())
        } else {
            Err(Duration::from_secs_f64((1.0 - st.0) / self.rate))
        }
    }

    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            std::thread::sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_then_wait() {
        let b = TokenBucket::new(10.0, 2.0);
        assert!(b.try_acquire().is_ok());
        assert!(b.try_acquire().is_ok());
        let wait = b.try_acquire().unwrap_err();
        assert!(wait <= Duration::from_millis(101));
        let t = Instant::now();
        b.acquire();
        assert!(t.elapsed() >= Duration::from_millis(50));
    }

    #[test]
    fn unlimited_never_blocks() {
        let b = TokenBucket::unlimited();
        for _ in 0..1000 {
            assert!(b.try_acquire().is_ok());
        }
    }
}
