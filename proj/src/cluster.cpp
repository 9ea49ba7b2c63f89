#include "linetherm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "linetherm/util.hpp"

namespace linetherm {

namespace {

// Feature layout: lat, lon, ambient, wind speed, wind dir (sin, cos),
// axis (sin2, cos2: the line axis has period 180), then one-hot conductor.
std::vector<std::vector<double>> build_features(
        const std::vector<Segment>& segments,
        const std::vector<EnvironmentSample>& envs, const ClusterSpec& spec) {
    std::map<std::string, std::size_t> conductor_index;
    for (const auto& s : segments)
        conductor_index.emplace(s.conductor_name, conductor_index.size());
    std::size_t base_dims = 8;
    std::size_t dims = base_dims + conductor_index.size();

    std::size_t n = segments.size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const Segment& s = segments[i];
        const EnvironmentSample& e = envs[i];
        double wd = deg_to_rad(e.wind_from_deg);
        double ax = deg_to_rad(2.0 * s.azimuth_deg);
        auto& r = rows[i];
        r[0] = s.midpoint.lat_deg;
        r[1] = s.midpoint.lon_deg;
        r[2] = e.ambient_c;
        r[3] = e.wind_speed_ms;
        r[4] = std::sin(wd);
        r[5] = std::cos(wd);
        r[6] = std::sin(ax);
        r[7] = std::cos(ax);
        r[base_dims + conductor_index.at(s.conductor_name)] = 1.0;
    }

    // z-score, then weight.
    std::vector<double> mean(dims, 0.0), sd(dims, 0.0);
    for (const auto& r : rows)
        for (std::size_t d = 0; d < dims; ++d) mean[d] += r[d];
    for (double& m : mean) m /= static_cast<double>(n);
    for (const auto& r : rows)
        for (std::size_t d = 0; d < dims; ++d)
            sd[d] += (r[d] - mean[d]) * (r[d] - mean[d]);
    for (double& s : sd) s = std::sqrt(s / static_cast<double>(n));

    double geo_weight = spec.weights.geographic;
    if (geo_weight < 0.0) {
        // One raw degree of position should weigh like 2 degC of raw ambient
        // spread, keeping clusters geographically compact. After z-scoring,
        // 1 degree is 1/sd_geo units and 2 degC is 2/sd_ta units.
        double sd_geo = std::max({sd[0], sd[1], 1e-12});
        double sd_ta = std::max(sd[2], 1e-12);
        geo_weight = 2.0 * sd_geo / sd_ta;
    }

    std::vector<double> weight(dims, 1.0);
    weight[0] = weight[1] = geo_weight;
    weight[2] = spec.weights.ambient;
    weight[3] = spec.weights.wind_speed;
    weight[4] = weight[5] = spec.weights.wind_direction;
    weight[6] = weight[7] = spec.weights.azimuth;
    for (std::size_t d = base_dims; d < dims; ++d)
        weight[d] = spec.weights.conductor;

    for (auto& r : rows)
        for (std::size_t d = 0; d < dims; ++d) {
            double s = sd[d] > 1e-12 ? sd[d] : 1.0;
            r[d] = (r[d] - mean[d]) / s * weight[d];
        }
    return rows;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return acc;
}

/// Largest angular spread of a set of azimuths: 360 minus the widest gap
/// between consecutive sorted values.
double circular_spread_deg(std::vector<double>& dirs) {
    if (dirs.size() < 2) return 0.0;
    for (double& d : dirs) d = wrap_azimuth(d);
    std::sort(dirs.begin(), dirs.end());
    double max_gap = 360.0 - dirs.back() + dirs.front();
    for (std::size_t i = 1; i < dirs.size(); ++i)
        max_gap = std::max(max_gap, dirs[i] - dirs[i - 1]);
    return 360.0 - max_gap;
}

}  // namespace

ClusterResult cluster_segments(const std::vector<Segment>& segments,
                               const std::vector<EnvironmentSample>& envs,
                               const ClusterSpec& spec, unsigned threads) {
    if (segments.size() != envs.size())
        throw InputError("cluster_segments: one environment per segment required");
    if (segments.empty()) throw InputError("cluster_segments: no segments");
    if (spec.k < 1) throw InputError("cluster_segments: k must be >= 1");
    if (spec.max_iterations < 1)
        throw InputError("cluster_segments: max_iterations must be >= 1");

    std::size_t n = segments.size();
    int k = std::min<std::size_t>(spec.k, n);  // degrade when n < k
    std::vector<std::vector<double>> feats = build_features(segments, envs, spec);
    std::size_t dims = feats.front().size();

    // k-means++ seeding; d2 tracks the distance to the nearest centroid
    // chosen so far, so each new centroid costs one pass.
    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centroids.push_back(feats[first(rng)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i)
        d2[i] = sq_dist(feats[i], centroids[0]);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];
        std::size_t pick;
        if (total <= 0.0) {
            pick = first(rng);
        } else {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            pick = n - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(feats[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist(feats[i], centroids.back()));
    }

    std::vector<int> assignment(n, 0);
    std::vector<double> nearest(n, 0.0);
    int iterations = 0;
    for (int iter = 0; iter < spec.max_iterations; ++iter) {
        iterations = iter + 1;
        // Assignment step; ties go to the lowest cluster index.
        std::vector<int> next(n);
        parallel_for(n, [&](std::size_t i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d = sq_dist(feats[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            next[i] = best_c;
            nearest[i] = best;
        }, threads);

        bool changed = iter == 0 || next != assignment;
        assignment = std::move(next);

        // Update step.
        std::vector<std::vector<double>> sums(k, std::vector<double>(dims, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[assignment[i]]++;
            const auto& f = feats[i];
            auto& s = sums[assignment[i]];
            for (std::size_t d = 0; d < dims; ++d) s[d] += f[d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < dims; ++d)
                centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        if (!changed) break;
    }

    ClusterResult result;
    result.k_effective = k;
    result.assignment = assignment;
    result.centroids = centroids;
    result.iterations = iterations;
    for (std::size_t i = 0; i < n; ++i) result.inertia += nearest[i];

    // Representative: nearest member of each cluster to its centroid, so the
    // cluster's solution parameters come from a real environment.
    result.representative.assign(k, -1);
    std::vector<double> best(k, std::numeric_limits<double>::max());
    for (std::size_t i = 0; i < n; ++i) {
        int c = assignment[i];
        double d = sq_dist(feats[i], centroids[c]);
        if (d < best[c]) {
            best[c] = d;
            result.representative[c] = static_cast<int>(i);
        }
    }
    for (int c = 0; c < k; ++c)
        if (result.representative[c] < 0) result.representative[c] = 0;
    return result;
}

ClusterQuality cluster_quality(const std::vector<Segment>& segments,
                               const std::vector<EnvironmentSample>& envs,
                               const std::vector<int>& assignment) {
    if (segments.size() != envs.size() || segments.size() != assignment.size())
        throw InputError("cluster_quality: mismatched input sizes");

    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        members[assignment[i]].push_back(i);

    ClusterQuality q;
    for (const auto& [cid, idx] : members) {
        double ta_lo = std::numeric_limits<double>::max(), ta_hi = -ta_lo;
        double v_lo = std::numeric_limits<double>::max(), v_hi = -v_lo;
        std::vector<double> dirs;
        dirs.reserve(idx.size());
        for (std::size_t i : idx) {
            ta_lo = std::min(ta_lo, envs[i].ambient_c);
            ta_hi = std::max(ta_hi, envs[i].ambient_c);
            v_lo = std::min(v_lo, envs[i].wind_speed_ms);
            v_hi = std::max(v_hi, envs[i].wind_speed_ms);
            dirs.push_back(envs[i].wind_from_deg);
        }
        ClusterQuality::PerCluster pc;
        pc.cluster_id = cid;
        pc.size = static_cast<int>(idx.size());
        pc.ambient_spread_c = ta_hi - ta_lo;
        pc.wind_speed_spread_ms = v_hi - v_lo;
        pc.wind_direction_spread_deg = circular_spread_deg(dirs);
        q.max_ambient_spread_c = std::max(q.max_ambient_spread_c,
                                          pc.ambient_spread_c);
        q.max_wind_speed_spread_ms = std::max(q.max_wind_speed_spread_ms,
                                              pc.wind_speed_spread_ms);
        q.max_wind_direction_spread_deg =
                std::max(q.max_wind_direction_spread_deg,
                         pc.wind_direction_spread_deg);
        if (pc.ambient_spread_c > 2.0 || pc.wind_speed_spread_ms > 2.0 ||
            pc.wind_direction_spread_deg > 10.0)
            q.violating_clusters++;
        q.clusters.push_back(pc);
    }
    return q;
}

void save_cluster_assignment(const std::vector<Segment>& segments,
                             const std::vector<int>& assignment,
                             const std::string& path) {
    if (segments.size() != assignment.size())
        throw InputError("save_cluster_assignment: mismatched sizes");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write cluster file: " + path);
    out << "segment_id,cluster_id\n";
    for (std::size_t i = 0; i < segments.size(); ++i)
        out << segments[i].segment_id << ',' << assignment[i] << '\n';
}

}  // namespace linetherm
