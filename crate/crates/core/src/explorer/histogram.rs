use serde::{Deserialize, Serialize};

/// Fixed-width histogram with explicit under/overflow bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: Edge,
    pub bin_width: Edge,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub total: u64,
}

/// An `f64` compared by bit pattern so the histogram can be `Eq`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(pub f64);

impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Edge {}

impl Histogram {
    /// Bins of `bin_width` covering [lo, hi); the bin count is rounded to
    /// the nearest integer.
    pub fn new(lo: f64, hi: f64, bin_width: f64) -> Result<Self, String> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(format!("bin width must be positive, got {bin_width}"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("histogram range must satisfy lo < hi, got {lo} .. {hi}"));
        }
        let bins = ((hi - lo) / bin_width).round().max(1.0);
        if bins > 1e8 {
            return Err(format!("{bins} bins requested; widen the bins or narrow the range"));
        }
        Ok(Histogram {
            lo: Edge(lo),
            bin_width: Edge(bin_width),
            counts: vec![0; bins as usize],
            underflow: 0,
            overflow: 0,
            total: 0,
        })
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|k| self.lo.0 + k as f64 * self.bin_width.0)
            .collect()
    }

    pub fn push(&mut self, x: f64) {
        self.total += 1;
        let pos = (x - self.lo.0) / self.bin_width.0;
        if pos < 0.0 {
            self.underflow += 1;
        } else if pos >= self.counts.len() as f64 || pos.is_nan() {
            self.overflow += 1;
        } else {
            self.counts[pos as usize] += 1;
        }
    }

    /// Adds the counts of a histogram with identical binning.
    pub fn merge(mut self, other: &Histogram) -> Histogram {
        assert!(
            self.lo == other.lo && self.bin_width == other.bin_width && self.counts.len() == other.counts.len(),
            "merging histograms with different binning"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.total += other.total;
        self
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow == self.total
    }
}
