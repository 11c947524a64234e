use alloc::collections::VecDeque;

/// Mean and population variance over the last `capacity` values.
///
/// Updates are O(1) (sliding Welford). The sums are rebuilt from the buffer
/// every `capacity` pushes so rounding error cannot accumulate.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingStats {
    capacity: usize,
    buf: VecDeque<f64>,
    mean: f64,
    m2: f64,
    since_rebuild: usize,
}

impl RollingStats {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        RollingStats {
            capacity,
            buf: VecDeque::with_capacity(capacity),
            mean: 0.0,
            m2: 0.0,
            since_rebuild: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if self.buf.len() < self.capacity {
            self.buf.push_back(x);
            let n = self.buf.len() as f64;
            let delta = x - self.mean;
            self.mean += delta / n;
            self.m2 += delta * (x - self.mean);
        } else {
            let old = self.buf.pop_front().expect("full buffer");
            self.buf.push_back(x);
            let n = self.buf.len() as f64;
            let old_mean = self.mean;
            self.mean += (x - old) / n;
            self.m2 += (x - old) * (x - self.mean + old - old_mean);
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.capacity {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        let n = self.buf.len() as f64;
        self.mean = self.buf.iter().sum::<f64>() / n;
        self.m2 = self
            .buf
            .iter()
            .map(|x| (x - self.mean) * (x - self.mean))
            .sum();
        self.since_rebuild = 0;
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance; 0 while empty.
    pub fn variance(&self) -> f64 {
        if self.buf.is_empty() {
            0.0
        } else {
            self.m2.max(0.0) / self.buf.len() as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance())
    }

    /// Window contents, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &f64> + '_ {
        self.buf.iter()
    }
}
