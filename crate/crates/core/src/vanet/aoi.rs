//! Age-of-information bookkeeping at the receiver.
//!
//! Age at time t is t minus the generation time of the freshest update received so far. A
//! peak is the age just before an update that makes the receiver fresher; stale updates
//! leave the age alone and record nothing.

use alloc::vec;
use alloc::vec::Vec;

use super::{ns_to_ms, VanetError};
use crate::math;

#[derive(Debug, Clone, Default)]
pub struct AoiTracker {
    last_gen_ns: Vec<Option<u64>>,
    network_last_gen_ns: Option<u64>,
    peaks_ms: Vec<f64>,
    sender_peaks: Vec<(f64, u64)>,
}

impl AoiTracker {
    pub fn new(n_senders: usize) -> Self {
        Self {
            last_gen_ns: vec![None; n_senders],
            network_last_gen_ns: None,
            peaks_ms: Vec::new(),
            sender_peaks: vec![(0.0, 0); n_senders],
        }
    }

    /// Records an update from `sender` generated at `gen_ns` and received at `now_ns`.
    pub fn record(&mut self, sender: usize, gen_ns: u64, now_ns: u64) {
        if sender >= self.last_gen_ns.len() {
            self.last_gen_ns.resize(sender + 1, None);
            self.sender_peaks.resize(sender + 1, (0.0, 0));
        }
        match self.network_last_gen_ns {
            Some(g) if gen_ns <= g => {}
            Some(g) => {
                self.peaks_ms.push(ns_to_ms(now_ns.saturating_sub(g)));
                self.network_last_gen_ns = Some(gen_ns);
            }
            None => self.network_last_gen_ns = Some(gen_ns),
        }
        match self.last_gen_ns[sender] {
            Some(g) if gen_ns <= g => {}
            Some(g) => {
                let s = &mut self.sender_peaks[sender];
                s.0 += ns_to_ms(now_ns.saturating_sub(g));
                s.1 += 1;
                self.last_gen_ns[sender] = Some(gen_ns);
            }
            None => self.last_gen_ns[sender] = Some(gen_ns),
        }
    }

    /// Network-level peaks: age of the freshest information from any sender.
    pub fn peaks_ms(&self) -> &[f64] {
        &self.peaks_ms
    }

    pub fn last_received_generation_ns(&self, sender: usize) -> Option<u64> {
        self.last_gen_ns.get(sender).copied().flatten()
    }

    /// Mean of each sender's own peaks, `None` for senders with fewer than two updates.
    pub fn per_sender_mean_ms(&self) -> Vec<Option<f64>> {
        self.sender_peaks
            .iter()
            .map(|&(sum, n)| (n > 0).then(|| sum / n as f64))
            .collect()
    }
}

/// `(mean, p95)` of the tracker's network-level peaks, in ms.
pub fn paoi_summary(tracker: &AoiTracker) -> Result<(f64, f64), VanetError> {
    paoi_stats(tracker.peaks_ms())
}

pub fn paoi_stats(peaks_ms: &[f64]) -> Result<(f64, f64), VanetError> {
    if peaks_ms.is_empty() {
        return Err(VanetError::NoSamples);
    }
    let mean = peaks_ms.iter().sum::<f64>() / peaks_ms.len() as f64;
    let mut sorted = peaks_ms.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((mean, nearest_rank(&sorted, 0.95)))
}

/// Nearest-rank percentile of an ascending, nonempty slice.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = math::ceil(q * sorted.len() as f64) as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_three() {
        let (mean, p95) = paoi_stats(&[100.0, 200.0, 300.0]).unwrap();
        assert_eq!(mean, 200.0);
        assert_eq!(p95, 300.0);
    }

    #[test]
    fn p95_is_95th_order_statistic() {
        let peaks: Vec<f64> = (1..=100).rev().map(|i| i as f64).collect();
        assert_eq!(paoi_stats(&peaks).unwrap().1, 95.0);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(paoi_summary(&AoiTracker::new(3)), Err(VanetError::NoSamples));
    }

    #[test]
    fn periodic_stream_peaks_are_constant() {
        let mut t = AoiTracker::new(1);
        let (period, delay) = (1_000_000_000u64, 166_667u64);
        for k in 0..20 {
            t.record(0, k * period, k * period + delay);
        }
        assert_eq!(t.peaks_ms().len(), 19);
        assert!(t.peaks_ms().iter().all(|&p| (p - 1000.166667).abs() < 1e-9));
        assert!((t.per_sender_mean_ms()[0].unwrap() - 1000.166667).abs() < 1e-9);
    }

    #[test]
    fn stale_update_records_nothing() {
        let mut t = AoiTracker::new(2);
        t.record(0, 100, 200);
        t.record(1, 50, 300);
        assert!(t.peaks_ms().is_empty());
        t.record(1, 250, 400);
        assert_eq!(t.peaks_ms(), &[ns_to_ms(300)]);
        assert_eq!(t.per_sender_mean_ms(), vec![None, Some(ns_to_ms(350))]);
    }
}
