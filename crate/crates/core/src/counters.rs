use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Calls to the base regressor, model evaluations and aggregation calls.
#[derive(Debug, Default)]
pub struct CostCounters {
    r_calls: AtomicU64,
    evals: AtomicU64,
    phi_calls: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSnapshot {
    pub r_calls: u64,
    pub evals: u64,
    pub phi_calls: u64,
}

impl CostCounters {
    pub fn add_r_calls(&self, n: u64) {
        self.r_calls.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_evals(&self, n: u64) {
        self.evals.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_phi_calls(&self, n: u64) {
        self.phi_calls.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CostSnapshot {
        CostSnapshot {
            r_calls: self.r_calls.load(Ordering::Relaxed),
            evals: self.evals.load(Ordering::Relaxed),
            phi_calls: self.phi_calls.load(Ordering::Relaxed),
        }
    }
}

impl Clone for CostCounters {
    fn clone(&self) -> Self {
        let s = self.snapshot();
        Self {
            r_calls: AtomicU64::new(s.r_calls),
            evals: AtomicU64::new(s.evals),
            phi_calls: AtomicU64::new(s.phi_calls),
        }
    }
}
