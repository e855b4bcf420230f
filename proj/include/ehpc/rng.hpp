// Counter-based per-run random streams: run r of seed s draws the splitmix64
// sequence started at a mixed function of (s, r), so runs are reproducible
// and independent of execution order.
#pragma once

#include <cstdint>

namespace ehpc {

class RunRng {
public:
    RunRng(std::uint64_t seed, std::uint64_t run) {
        state_ = mix(seed ^ mix(run * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t stream_key() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace ehpc
