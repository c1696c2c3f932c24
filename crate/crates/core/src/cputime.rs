//! Process CPU time (user + system, all threads).

/// Seconds of CPU time consumed by this process so far.
pub fn process_cpu_time() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec and the clock id is a constant
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Cumulative CPU-time stopwatch whose readings strictly increase.
#[derive(Debug, Clone)]
pub struct CpuClock {
    start: f64,
    last: f64,
}

impl CpuClock {
    pub fn start() -> Self {
        CpuClock {
            start: process_cpu_time(),
            last: 0.0,
        }
    }

    /// Seconds since [`CpuClock::start`], bumped by one nanosecond when the
    /// clock has not visibly advanced since the previous reading.
    pub fn elapsed(&mut self) -> f64 {
        let now = process_cpu_time() - self.start;
        self.last = if now > self.last { now } else { self.last + 1e-9 };
        self.last
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn readings_strictly_increase() {
        let mut c = CpuClock::start();
        let mut prev = 0.0;
        for _ in 0..100 {
            let t = c.elapsed();
            assert!(t > prev);
            prev = t;
        }
    }
}
