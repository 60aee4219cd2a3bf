#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace voxagent {

struct Vec3i {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr bool operator==(const Vec3i&) const = default;
    constexpr auto operator<=>(const Vec3i&) const = default;
    constexpr Vec3i operator+(const Vec3i& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3i operator-(const Vec3i& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

struct Vec3d {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3d operator+(const Vec3d& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3d operator-(const Vec3d& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3d operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3d center_of(const Vec3i& v) {
    return {v.x + 0.5, v.y + 0.5, v.z + 0.5};
}

inline double distance(const Vec3i& a, const Vec3i& b) {
    const Vec3d d = center_of(a) - center_of(b);
    return d.norm();
}

struct Vec3iHash {
    std::size_t operator()(const Vec3i& v) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        auto mix = [&h](int c) {
            h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(c));
            h *= 1099511628211ULL;
        };
        mix(v.x);
        mix(v.y);
        mix(v.z);
        return h;
    }
};

enum class ErrorCode {
    UnknownScenario,
    DimsTooSmall,
    UnknownTask,
    UnknownItem,
    UnknownRecipe,
    EmptyText,
    ZeroEmbedding,
    DimensionMismatch,
    ZeroVector,
    EmptyDatabase,
    UnboundParameter,
    StepCapExceeded,
    SyntaxError,
    DepthExceeded,
    BackendError,
    Transport,
    RateLimited,
    MalformedResponse,
    MalformedScore,
    ParseFailure,
    CurriculumExhausted,
    BudgetInfeasible,
    EmptyOutcome,
    LengthMismatch,
    DegenerateSeries,
    SchemaViolation,
    IoError,
    ConfigError,
    UsageError,
};

const char* error_code_name(ErrorCode code);

/// Typed error used across the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// FNV-1a, 64-bit. Used for content hashes and the hashed bag-of-words embedder.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 1469598103934665603ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Small deterministic PRNG (SplitMix64). Used instead of <random> engines so
/// generated worlds are reproducible independent of the standard library.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    int next_range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace voxagent
