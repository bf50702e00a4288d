//! Counting semaphore bounding in-flight requests to one endpoint.

use parking_lot::{Condvar, Mutex};

pub(crate) struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

pub(crate) struct Permit<'a>(&'a Limiter);

impl Limiter {
    pub(crate) fn new(max: usize) -> Self {
        Limiter { in_flight: Mutex::new(0), freed: Condvar::new(), max: max.max(1) }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock();
        while *n >= self.max {
            self.freed.wait(&mut n);
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock() -= 1;
        self.0.freed.notify_one();
    }
}
