use std::time::Duration;

use locavqg_core::CaptionedTask;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::ModelRunner;

/// Sleeps a fixed time per call. With `accept = Some(p)` it also acts as a
/// filtered model: each post-filter attempt sleeps `filter` and is accepted
/// with probability `p`, up to `max_attempts`.
#[derive(Debug, Clone)]
pub struct SleepRunner {
    pub load: Duration,
    pub infer: Duration,
    pub filter: Duration,
    pub accept: Option<f64>,
    pub max_attempts: usize,
    rng: ChaCha8Rng,
}

impl SleepRunner {
    pub fn new(infer: Duration) -> Self {
        Self {
            load: Duration::ZERO,
            infer,
            filter: Duration::ZERO,
            accept: None,
            max_attempts: 10,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn filtered(mut self, filter: Duration, p: f64, seed: u64) -> Self {
        self.filter = filter;
        self.accept = Some(p);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }
}

impl ModelRunner for SleepRunner {
    fn load(&mut self) -> Result<(), String> {
        std::thread::sleep(self.load);
        Ok(())
    }

    fn infer(&mut self, task: &CaptionedTask) -> Result<String, String> {
        std::thread::sleep(self.infer);
        Ok(format!("What is near {}?", task.task_id()))
    }

    fn post_filter(&mut self, _task: &CaptionedTask, _q: &str) -> Option<Result<usize, String>> {
        let p = self.accept?;
        let mut n = 0;
        while n < self.max_attempts {
            n += 1;
            std::thread::sleep(self.filter);
            if self.rng.gen_bool(p) {
                break;
            }
        }
        Some(Ok(n))
    }

    fn id(&self) -> String {
        format!("stub-sleep:{}ms", self.infer.as_millis())
    }
}
