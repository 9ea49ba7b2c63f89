#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linetherm/geo.hpp"

namespace linetherm {

struct FeatureWeights {
    double geographic = -1.0;  // < 0: auto (1 degree ~ the scale of 2 degC ambient)
    double ambient = 1.0;
    double wind_speed = 1.0;
    double wind_direction = 1.0;
    double azimuth = 1.0;
    double conductor = 1.0;
};

struct ClusterSpec {
    int k = 500;
    FeatureWeights weights;
    int max_iterations = 100;
    std::uint64_t seed = 0;
};

struct ClusterResult {
    int k_effective = 0;
    std::vector<int> assignment;       // per segment
    std::vector<int> representative;   // per cluster: index of nearest segment
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;  // within-cluster sum of squares
    int iterations = 0;
};

/// K-means over segment features (position, ambient temperature, wind speed
/// and direction, line axis, conductor type). Angular features are embedded
/// as sin/cos pairs, everything is z-scored before weighting, seeding is
/// k-means++ from the given seed, ties break toward the lower cluster index.
/// Degrades to k = n when there are fewer segments than clusters.
ClusterResult cluster_segments(const std::vector<Segment>& segments,
                               const std::vector<EnvironmentSample>& envs,
                               const ClusterSpec& spec, unsigned threads = 0);

struct ClusterQuality {
    struct PerCluster {
        int cluster_id;
        int size;
        double ambient_spread_c;
        double wind_speed_spread_ms;
        double wind_direction_spread_deg;
    };
    std::vector<PerCluster> clusters;
    double max_ambient_spread_c = 0.0;
    double max_wind_speed_spread_ms = 0.0;
    double max_wind_direction_spread_deg = 0.0;
    /// Clusters exceeding 2 degC / 2 m/s / 10 degree spreads.
    int violating_clusters = 0;
};

ClusterQuality cluster_quality(const std::vector<Segment>& segments,
                               const std::vector<EnvironmentSample>& envs,
                               const std::vector<int>& assignment);

/// CSV dump: segment_id, cluster_id.
void save_cluster_assignment(const std::vector<Segment>& segments,
                             const std::vector<int>& assignment,
                             const std::string& path);

}  // namespace linetherm
