#include "oracles.hpp"

#include <algorithm>

namespace voxagent::testing {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3d ray_direction(double yaw_deg, double pitch_deg) {
    const double yaw = yaw_deg * kPi / 180.0;
    const double pitch = pitch_deg * kPi / 180.0;
    return {std::cos(pitch) * std::cos(yaw), std::sin(pitch), std::cos(pitch) * std::sin(yaw)};
}

double wrap_degrees(double d) {
    while (d > 180.0) d -= 360.0;
    while (d <= -180.0) d += 360.0;
    return d;
}

// True when some sampled ray's first non-occluded pass reaches `target`.
bool block_witnessed(const world::WorldConfig& cfg, const world::WorldState& w,
                     const world::AgentState& agent, const Vec3i& target, double fov_deg,
                     double max_dist) {
    const Vec3d eye = center_of(agent.position);
    const double step = cfg.perception.ray_step;
    const int steps = static_cast<int>(max_dist / step);
    const int half = static_cast<int>(fov_deg / 2.0);

    // Conservative angular window from the cell's corners; a ray can only
    // pass through the cell if its direction points inside this window.
    double yaw_lo = 1e9;
    double yaw_hi = -1e9;
    double pitch_lo = 1e9;
    double pitch_hi = -1e9;
    bool seam = false;
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3d c{target.x + ((corner & 1) ? 1.0 : 0.0), target.y + ((corner & 2) ? 1.0 : 0.0),
                      target.z + ((corner & 4) ? 1.0 : 0.0)};
        const Vec3d d = c - eye;
        const double yaw = std::atan2(d.z, d.x) * 180.0 / kPi;
        const double pitch = std::atan2(d.y, std::hypot(d.x, d.z)) * 180.0 / kPi;
        const double dyaw = wrap_degrees(yaw - agent.yaw);
        yaw_lo = std::min(yaw_lo, dyaw);
        yaw_hi = std::max(yaw_hi, dyaw);
        pitch_lo = std::min(pitch_lo, pitch - agent.pitch);
        pitch_hi = std::max(pitch_hi, pitch - agent.pitch);
    }
    if (yaw_hi - yaw_lo > 180.0) seam = true;  // cell straddles the +/-180 wrap

    const int i_lo = seam ? -half : std::max(-half, static_cast<int>(std::floor(yaw_lo)) - 2);
    const int i_hi = seam ? half : std::min(half, static_cast<int>(std::ceil(yaw_hi)) + 2);
    const int j_lo = std::max(-half, static_cast<int>(std::floor(pitch_lo)) - 2);
    const int j_hi = std::min(half, static_cast<int>(std::ceil(pitch_hi)) + 2);

    for (int i = i_lo; i <= i_hi; ++i) {
        for (int j = j_lo; j <= j_hi; ++j) {
            const double pitch = agent.pitch + j;
            if (pitch < -89.0 || pitch > 89.0) continue;
            const Vec3d dir = ray_direction(agent.yaw + i, pitch);
            for (int k = 1; k <= steps; ++k) {
                const double t = k * step;
                const Vec3d p = eye + dir * t;
                const Vec3i v{static_cast<int>(std::floor(p.x)),
                              static_cast<int>(std::floor(p.y)),
                              static_cast<int>(std::floor(p.z))};
                if (v == agent.position) continue;
                if (!w.in_bounds(v)) break;
                const std::uint16_t idx = w.at(v);
                if (idx == 0) continue;
                if (v == target) return true;
                if (cfg.block(idx).opaque) break;
            }
        }
    }
    return false;
}

}  // namespace

std::set<Vec3i> oracle_visible_set(const world::WorldConfig& cfg, const world::WorldState& w,
                                   const world::AgentState& agent, double fov_deg,
                                   double max_dist) {
    std::set<Vec3i> out;
    const Vec3i dims = w.dims();
    for (int y = 0; y < dims.y; ++y) {
        for (int z = 0; z < dims.z; ++z) {
            for (int x = 0; x < dims.x; ++x) {
                const Vec3i p{x, y, z};
                if (w.at(p) == 0 || p == agent.position) continue;
                if (block_witnessed(cfg, w, agent, p, fov_deg, max_dist)) out.insert(p);
            }
        }
    }
    return out;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) /
           (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    long double dot = 0.0L;
    long double aa = 0.0L;
    long double bb = 0.0L;
    for (std::size_t i = a.size(); i-- > 0;) {
        dot += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
        aa += static_cast<long double>(a[i]) * static_cast<long double>(a[i]);
        bb += static_cast<long double>(b[i]) * static_cast<long double>(b[i]);
    }
    return static_cast<double>(dot / (std::sqrt(aa) * std::sqrt(bb)));
}

RandomScene random_scene(const world::WorldConfig& cfg, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const Vec3i dims{rng.next_range(10, 16), rng.next_range(8, 16), rng.next_range(10, 16)};
    RandomScene scene{world::WorldState(dims, seed, "fixture"), {}, 0.0, 0.0};

    // Sprinkle blocks, opaque and otherwise, at a density that leaves air.
    const int block_count = static_cast<int>(cfg.blocks.size());
    const int fills = rng.next_range(30, 240);
    for (int i = 0; i < fills; ++i) {
        const Vec3i p{rng.next_range(0, dims.x - 1), rng.next_range(0, dims.y - 1),
                      rng.next_range(0, dims.z - 1)};
        scene.world.set_block(p, static_cast<std::uint16_t>(rng.next_range(1, block_count - 1)));
    }

    Vec3i pos;
    do {
        pos = {rng.next_range(0, dims.x - 1), rng.next_range(0, dims.y - 1),
               rng.next_range(0, dims.z - 1)};
    } while (scene.world.at(pos) != 0);
    scene.agent.position = pos;
    scene.agent.yaw = static_cast<double>(rng.next_range(0, 359));
    scene.agent.pitch = static_cast<double>(rng.next_range(-60, 60));
    scene.fov_deg = static_cast<double>(rng.next_range(30, 110));
    scene.max_dist = static_cast<double>(rng.next_range(6, 14));
    return scene;
}

}  // namespace voxagent::testing
