use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear hop-latency plus serialization model for one network path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathProfile {
    pub hops: u32,
    pub per_hop_latency: f64,
    /// Bytes per second.
    pub bandwidth: f64,
}

impl PathProfile {
    pub fn default_edge_path() -> Self {
        PathProfile {
            hops: 2,
            per_hop_latency: 0.0005,
            bandwidth: 50_000_000.0,
        }
    }

    pub fn default_cloud_path() -> Self {
        PathProfile {
            hops: 8,
            per_hop_latency: 0.0015,
            bandwidth: 25_000_000.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if self.hops < 1 {
            return Err(Error::Config(format!("{field}.hops must be >= 1")));
        }
        if !self.per_hop_latency.is_finite() || self.per_hop_latency <= 0.0 {
            return Err(Error::Config(format!(
                "{field}.per_hop_latency must be > 0 (got {})",
                self.per_hop_latency
            )));
        }
        if !self.bandwidth.is_finite() || self.bandwidth <= 0.0 {
            return Err(Error::Config(format!(
                "{field}.bandwidth must be > 0 (got {})",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// hops * per_hop_latency + payload_bytes / bandwidth.
    pub fn one_way_delay(&self, payload_bytes: u64) -> f64 {
        self.hops as f64 * self.per_hop_latency + payload_bytes as f64 / self.bandwidth
    }

    pub fn round_trip(&self, request_bytes: u64, response_bytes: u64) -> f64 {
        self.one_way_delay(request_bytes) + self.one_way_delay(response_bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn propagation_only_for_empty_payload() {
        let path = PathProfile {
            hops: 2,
            per_hop_latency: 0.001,
            bandwidth: 1e6,
        };
        assert_eq!(path.one_way_delay(0), 0.002);
    }

    #[test]
    fn serialization_only_for_zero_latency_limit() {
        // 1 MB at 100 MB/s through a single cheap hop is dominated by the
        // serialization term.
        let path = PathProfile {
            hops: 1,
            per_hop_latency: 1e-12,
            bandwidth: 100_000_000.0,
        };
        let d = path.one_way_delay(1_000_000);
        assert!((d - 0.01).abs() < 1e-9);
    }

    #[test]
    fn more_hops_cost_more() {
        let edge = PathProfile::default_edge_path();
        let cloud = PathProfile::default_cloud_path();
        for payload in [0u64, 1000, 1_000_000] {
            assert!(cloud.one_way_delay(payload) > edge.one_way_delay(payload));
        }
    }

    #[test]
    fn symmetric_empty_round_trip_is_twice_propagation() {
        let path = PathProfile {
            hops: 3,
            per_hop_latency: 0.002,
            bandwidth: 1e6,
        };
        assert_eq!(path.round_trip(0, 0), 2.0 * 0.006);
    }

    #[test]
    fn round_trip_is_dominated_by_the_large_direction() {
        let path = PathProfile::default_cloud_path();
        let rt = path.round_trip(1_000_000, 64);
        let uplink = path.one_way_delay(1_000_000);
        assert!(uplink / rt > 0.5);
    }

    #[test]
    fn validation_names_the_field() {
        let mut path = PathProfile::default_edge_path();
        path.bandwidth = 0.0;
        let message = path.validate("edge_path").unwrap_err().to_string();
        assert!(message.contains("edge_path.bandwidth"));
    }

    proptest! {
        #[test]
        fn round_trip_is_exactly_the_sum_of_one_ways(
            hops in 1u32..20,
            latency in 1e-6f64..0.1,
            bandwidth in 1e3f64..1e9,
            request in 0u64..10_000_000,
            response in 0u64..10_000_000,
        ) {
            let path = PathProfile { hops, per_hop_latency: latency, bandwidth };
            prop_assert_eq!(
                path.round_trip(request, response),
                path.one_way_delay(request) + path.one_way_delay(response)
            );
        }

        #[test]
        fn delay_is_monotone(
            hops in 1u32..20,
            latency in 1e-6f64..0.1,
            bandwidth in 1e3f64..1e9,
            payload in 0u64..10_000_000,
            extra_bytes in 1u64..1_000_000,
        ) {
            let path = PathProfile { hops, per_hop_latency: latency, bandwidth };
            let more_hops = PathProfile { hops: hops + 1, ..path };
            let less_bandwidth = PathProfile { bandwidth: bandwidth / 2.0, ..path };
            prop_assert!(more_hops.one_way_delay(payload) > path.one_way_delay(payload));
            prop_assert!(path.one_way_delay(payload + extra_bytes) > path.one_way_delay(payload));
            prop_assert!(less_bandwidth.one_way_delay(payload + 1) > path.one_way_delay(payload + 1));
        }
    }
}
