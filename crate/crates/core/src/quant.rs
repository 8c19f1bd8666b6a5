//! Saturating fixed-point arithmetic model for the hardware datapath.
//!
//! Values are represented as `f64` constrained to the format's grid
//! (multiples of 2^-fracBits) and clamped to its representable range, which
//! keeps the model bit-accurate while staying interoperable with the
//! floating-point decoders. Rounding is half-away-from-zero. Saturation
//! events on the internal-LLR and metric paths are counted so the metric
//! normalization claim can be checked empirically instead of assumed.

use std::cell::Cell;

/// A signed or unsigned fixed-point format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedFormat {
    pub total_bits: u32,
    pub frac_bits: u32,
    pub signed: bool,
}

impl FixedFormat {
    pub const fn signed(total_bits: u32, frac_bits: u32) -> Self {
        Self { total_bits, frac_bits, signed: true }
    }

    pub const fn unsigned(total_bits: u32, frac_bits: u32) -> Self {
        Self { total_bits, frac_bits, signed: false }
    }

    pub fn step(&self) -> f64 {
        2f64.powi(-(self.frac_bits as i32))
    }

    pub fn max_value(&self) -> f64 {
        let levels = if self.signed {
            (1u64 << (self.total_bits - 1)) - 1
        } else {
            (1u64 << self.total_bits) - 1
        };
        levels as f64 * self.step()
    }

    pub fn min_value(&self) -> f64 {
        if self.signed {
            -((1u64 << (self.total_bits - 1)) as f64) * self.step()
        } else {
            0.0
        }
    }

    /// Round to the grid (half away from zero) and saturate.
    /// Returns the value and whether saturation occurred.
    pub fn quantize(&self, x: f64) -> (f64, bool) {
        let scaled = (x / self.step()).round(); // f64::round is half-away-from-zero
        let lo = self.min_value() / self.step();
        let hi = self.max_value() / self.step();
        if scaled > hi {
            (self.max_value(), true)
        } else if scaled < lo {
            (self.min_value(), true)
        } else {
            (scaled * self.step(), false)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (q, sat) = self.quantize(x);
        !sat && q == x
    }
}

/// Exact sum clamped to the format's range.
pub fn sat_add(a: f64, b: f64, fmt: FixedFormat) -> (f64, bool) {
    fmt.quantize(a + b)
}

/// Exact difference clamped to the format's range.
pub fn sat_sub(a: f64, b: f64, fmt: FixedFormat) -> (f64, bool) {
    fmt.quantize(a - b)
}

/// Per-signal bit widths: channel LLRs, internal LLRs, metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantProfile {
    pub channel: FixedFormat,
    pub internal: FixedFormat,
    pub metric: FixedFormat,
}

impl QuantProfile {
    /// (Q_chn, Q_int, Q_m) = (5, 6, 5), one fractional bit. Used at order 1.
    pub fn w1() -> Self {
        Self {
            channel: FixedFormat::signed(5, 1),
            internal: FixedFormat::signed(6, 1),
            metric: FixedFormat::unsigned(5, 1),
        }
    }

    /// (Q_chn, Q_int, Q_m) = (6, 7, 7), two fractional bits. Used at order > 1.
    pub fn w2() -> Self {
        Self {
            channel: FixedFormat::signed(6, 2),
            internal: FixedFormat::signed(7, 2),
            metric: FixedFormat::unsigned(7, 2),
        }
    }
}

/// Arithmetic mode selector: exact floating point or saturating fixed point.
///
/// One model instance serves one decoding context; saturation counters use
/// interior mutability so decode paths can stay `&self`.
#[derive(Debug)]
pub struct NumericModel {
    profile: Option<QuantProfile>,
    llr_saturations: Cell<u64>,
    metric_saturations: Cell<u64>,
}

impl NumericModel {
    pub fn exact() -> Self {
        Self {
            profile: None,
            llr_saturations: Cell::new(0),
            metric_saturations: Cell::new(0),
        }
    }

    pub fn fixed(profile: QuantProfile) -> Self {
        Self {
            profile: Some(profile),
            llr_saturations: Cell::new(0),
            metric_saturations: Cell::new(0),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.profile.is_none()
    }

    pub fn profile(&self) -> Option<&QuantProfile> {
        self.profile.as_ref()
    }

    pub fn llr_saturations(&self) -> u64 {
        self.llr_saturations.get()
    }

    pub fn metric_saturations(&self) -> u64 {
        self.metric_saturations.get()
    }

    pub fn reset_counters(&self) {
        self.llr_saturations.set(0);
        self.metric_saturations.set(0);
    }

    /// Map a real channel LLR into the channel format.
    /// Channel clipping is expected and not counted as a saturation event.
    pub fn quantize_channel(&self, x: f64) -> f64 {
        match &self.profile {
            None => x,
            Some(p) => p.channel.quantize(x).0,
        }
    }

    /// Internal-LLR addition (the g update and Rep sums).
    pub fn add_llr(&self, a: f64, b: f64) -> f64 {
        match &self.profile {
            None => a + b,
            Some(p) => {
                let (v, sat) = sat_add(a, b, p.internal);
                if sat {
                    self.llr_saturations.set(self.llr_saturations.get() + 1);
                }
                v
            }
        }
    }

    /// Bring a metric term onto the metric grid (no accumulation).
    ///
    /// Clamping here is silent: a candidate whose metric exceeds the grid is
    /// simply pinned at the ceiling. What the normalization claim is about is
    /// saturated metrics entering the sorted candidate list, which is counted
    /// by the scheduler via [`NumericModel::note_metric_saturation`].
    pub fn metric_value(&self, x: f64) -> f64 {
        match &self.profile {
            None => x,
            Some(p) => p.metric.quantize(x).0,
        }
    }

    /// Metric accumulation with unsigned saturation (silent clamp).
    pub fn metric_add(&self, a: f64, b: f64) -> f64 {
        match &self.profile {
            None => a + b,
            Some(p) => sat_add(a, b, p.metric).0,
        }
    }

    /// Largest representable metric value, when quantized.
    pub fn metric_ceiling(&self) -> Option<f64> {
        self.profile.as_ref().map(|p| p.metric.max_value())
    }

    /// Record one saturated metric retained by the candidate sorter.
    pub fn note_metric_saturation(&self) {
        self.metric_saturations.set(self.metric_saturations.get() + 1);
    }

    /// Metric normalization step; clamps at zero, not counted as saturation
    /// (the popped base is by construction the list minimum).
    pub fn metric_sub(&self, a: f64, b: f64) -> f64 {
        match &self.profile {
            None => a - b,
            Some(p) => sat_sub(a, b, p.metric).0,
        }
    }
}

impl Clone for NumericModel {
    fn clone(&self) -> Self {
        Self {
            profile: self.profile,
            llr_saturations: Cell::new(self.llr_saturations.get()),
            metric_saturations: Cell::new(self.metric_saturations.get()),
        }
    }
}
