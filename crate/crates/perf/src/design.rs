//! Design points and knob domains.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::PerfError;

pub const KNOB_NAMES: [&str; 8] = [
    "msm_pes",
    "msm_window",
    "msm_points_per_pe",
    "fracmle_pes",
    "sumcheck_pes",
    "mle_update_pes",
    "modmuls_per_update_pe",
    "bandwidth_gbps",
];

/// One assignment of the hardware knobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignPoint {
    pub msm_pes: u32,
    pub msm_window: u32,
    pub msm_points_per_pe: u32,
    pub fracmle_pes: u32,
    pub sumcheck_pes: u32,
    pub mle_update_pes: u32,
    pub modmuls_per_update_pe: u32,
    pub bandwidth_gbps: u32,
}

impl DesignPoint {
    /// The design whose area and power anchor the cost tables.
    pub const REFERENCE: DesignPoint = DesignPoint {
        msm_pes: 16,
        msm_window: 9,
        msm_points_per_pe: 2048,
        fracmle_pes: 1,
        sumcheck_pes: 2,
        mle_update_pes: 11,
        modmuls_per_update_pe: 4,
        bandwidth_gbps: 2048,
    };

    pub fn knobs(&self) -> [u32; 8] {
        [
            self.msm_pes,
            self.msm_window,
            self.msm_points_per_pe,
            self.fracmle_pes,
            self.sumcheck_pes,
            self.mle_update_pes,
            self.modmuls_per_update_pe,
            self.bandwidth_gbps,
        ]
    }

    pub fn from_knobs(k: [u32; 8]) -> Self {
        Self {
            msm_pes: k[0],
            msm_window: k[1],
            msm_points_per_pe: k[2],
            fracmle_pes: k[3],
            sumcheck_pes: k[4],
            mle_update_pes: k[5],
            modmuls_per_update_pe: k[6],
            bandwidth_gbps: k[7],
        }
    }

    /// Checks every knob against the published domains.
    pub fn validate(&self) -> Result<(), PerfError> {
        let table = KnobDomains::full_space();
        for (i, (v, dom)) in self.knobs().iter().zip(table.domains()).enumerate() {
            if !dom.contains(v) {
                return Err(PerfError::KnobOutOfDomain {
                    knob: KNOB_NAMES[i],
                    value: *v,
                });
            }
        }
        Ok(())
    }

    /// Bytes per cycle at the 1 GHz clock.
    pub fn bytes_per_cycle(&self) -> f64 {
        self.bandwidth_gbps as f64
    }

    pub fn with_bandwidth(mut self, gbps: u32) -> Self {
        self.bandwidth_gbps = gbps;
        self
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.knobs();
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7]
        )
    }
}

/// Parses either the positional tuple `16,9,2048,1,2,11,4,2048` (knob order
/// of [`KNOB_NAMES`]) or `key=value` pairs; missing keys take the reference
/// design's value.
pub fn parse_design(s: &str) -> Result<DesignPoint, PerfError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(PerfError::Parse("empty design".into()));
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<u32>()
            .map_err(|_| PerfError::Parse(format!("bad knob value {p:?}")))
    };
    let d = if parts.iter().all(|p| !p.contains('=')) {
        if parts.len() != 8 {
            return Err(PerfError::Parse(format!("expected 8 knobs, got {}", parts.len())));
        }
        let mut k = [0u32; 8];
        for (slot, p) in k.iter_mut().zip(&parts) {
            *slot = num(p)?;
        }
        DesignPoint::from_knobs(k)
    } else {
        let mut k = DesignPoint::REFERENCE.knobs();
        let mut seen = [false; 8];
        for p in parts {
            let (key, val) = p
                .split_once('=')
                .ok_or_else(|| PerfError::Parse(format!("expected key=value, got {p:?}")))?;
            let i = KNOB_NAMES
                .iter()
                .position(|n| *n == key.trim())
                .ok_or_else(|| PerfError::Parse(format!("unknown knob {key:?}")))?;
            if seen[i] {
                return Err(PerfError::Parse(format!("knob {key:?} given twice")));
            }
            seen[i] = true;
            k[i] = num(val.trim())?;
        }
        DesignPoint::from_knobs(k)
    };
    d.validate()?;
    Ok(d)
}

/// Values each knob may take during exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnobDomains {
    pub msm_pes: Vec<u32>,
    pub msm_window: Vec<u32>,
    pub msm_points_per_pe: Vec<u32>,
    pub fracmle_pes: Vec<u32>,
    pub sumcheck_pes: Vec<u32>,
    pub mle_update_pes: Vec<u32>,
    pub modmuls_per_update_pe: Vec<u32>,
    pub bandwidth_gbps: Vec<u32>,
}

pub const KNOBS_TOML: &str = include_str!("../presets/knobs.toml");

impl KnobDomains {
    pub fn full_space() -> Self {
        Self {
            msm_pes: vec![1, 2, 4, 8, 16],
            msm_window: vec![7, 8, 9, 10],
            msm_points_per_pe: vec![1024, 2048, 4096, 8192, 16384],
            fracmle_pes: vec![1, 2, 4],
            sumcheck_pes: vec![1, 2, 4, 8, 16],
            mle_update_pes: (1..=11).collect(),
            modmuls_per_update_pe: vec![1, 2, 4, 8, 16],
            bandwidth_gbps: vec![64, 128, 256, 512, 1024, 2048, 4096],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PerfError> {
        let d: Self = toml::from_str(text).map_err(|e| PerfError::Parse(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn domains(&self) -> [&[u32]; 8] {
        [
            &self.msm_pes,
            &self.msm_window,
            &self.msm_points_per_pe,
            &self.fracmle_pes,
            &self.sumcheck_pes,
            &self.mle_update_pes,
            &self.modmuls_per_update_pe,
            &self.bandwidth_gbps,
        ]
    }

    /// Every domain non-empty, duplicate-free and inside the published one.
    pub fn validate(&self) -> Result<(), PerfError> {
        let table = Self::full_space();
        for (i, (dom, full)) in self.domains().iter().zip(table.domains()).enumerate() {
            if dom.is_empty() {
                return Err(PerfError::EmptyDomain(KNOB_NAMES[i]));
            }
            for (j, v) in dom.iter().enumerate() {
                if !full.contains(v) {
                    return Err(PerfError::KnobOutOfDomain {
                        knob: KNOB_NAMES[i],
                        value: *v,
                    });
                }
                if dom[..j].contains(v) {
                    return Err(PerfError::Parse(format!("duplicate {} = {v}", KNOB_NAMES[i])));
                }
            }
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        self.domains().iter().map(|d| d.len()).product()
    }

    /// The `i`-th design in mixed-radix order, bandwidth varying slowest.
    pub fn nth(&self, mut i: usize) -> DesignPoint {
        let doms = self.domains();
        let mut k = [0u32; 8];
        for (slot, dom) in k.iter_mut().zip(doms.iter()) {
            *slot = dom[i % dom.len()];
            i /= dom.len();
        }
        DesignPoint::from_knobs(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = DesignPoint> + '_ {
        (0..self.cardinality()).map(|i| self.nth(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_space_cross_product() {
        assert_eq!(KnobDomains::full_space().cardinality(), 577_500);
        assert_eq!(KnobDomains::from_toml(KNOBS_TOML).unwrap(), KnobDomains::full_space());
    }

    #[test]
    fn parse_forms() {
        let a = parse_design("16,9,2048,1,2,11,4,2048").unwrap();
        assert_eq!(a, DesignPoint::REFERENCE);
        let b = parse_design("sumcheck_pes=8, bandwidth_gbps=512").unwrap();
        assert_eq!(b.sumcheck_pes, 8);
        assert_eq!(b.bandwidth_gbps, 512);
        assert_eq!(b.msm_pes, 16);
        assert!(parse_design("16,9,2048,1,2,12,4,2048").is_err());
        assert!(parse_design("msm_pes=3").is_err());
        assert!(parse_design("bogus=1").is_err());
        assert!(parse_design("msm_pes=1,msm_pes=2").is_err());
    }

    #[test]
    fn nth_covers_every_design_once() {
        let d = KnobDomains {
            msm_pes: vec![1, 2],
            msm_window: vec![9],
            msm_points_per_pe: vec![1024, 2048],
            fracmle_pes: vec![1],
            sumcheck_pes: vec![1, 4, 16],
            mle_update_pes: vec![11],
            modmuls_per_update_pe: vec![4],
            bandwidth_gbps: vec![512, 2048],
        };
        let all: std::collections::HashSet<_> = d.iter().collect();
        assert_eq!(all.len(), d.cardinality());
        assert!(all.iter().all(|p| p.validate().is_ok()));
    }
}
