#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ripp/data_model.hpp"
#include "ripp/rng.hpp"

namespace ripp {

// Randomized assignment mechanism.  Only complete randomization is
// implemented; the interface exists so blocked designs can be added without
// touching the engine.
class AssignmentMechanism {
public:
    virtual ~AssignmentMechanism() = default;

    virtual int n_total() const = 0;

    // Fills z with a fresh assignment (exactly the design's treated count).
    virtual void draw_into(std::vector<std::uint8_t>& z, Rng& rng) const = 0;

    // Number of distinct assignments, saturated at cap + 1 when larger.
    virtual std::uint64_t space_size(std::uint64_t cap) const = 0;

    // Visits every assignment exactly once in a deterministic order.
    // Throws limit_error when the space exceeds limit.
    virtual void for_each_assignment(std::uint64_t limit,
                                     const std::function<void(const std::vector<std::uint8_t>&)>& fn) const = 0;

    std::vector<std::uint8_t> draw(Rng& rng) const {
        std::vector<std::uint8_t> z;
        draw_into(z, rng);
        return z;
    }

    std::vector<std::vector<std::uint8_t>> enumerate(std::uint64_t limit) const {
        std::vector<std::vector<std::uint8_t>> all;
        for_each_assignment(limit, [&](const std::vector<std::uint8_t>& z) { all.push_back(z); });
        return all;
    }
};

// Completely randomized design with a fixed number of treated units: every
// size-n_treated subset is equally probable.
class CompleteRandomization final : public AssignmentMechanism {
public:
    CompleteRandomization(int n_total, int n_treated);

    static CompleteRandomization from_observed(const ObservedDataset& obs) {
        return {obs.size(), obs.n_treated};
    }

    int n_total() const override { return n_total_; }
    int n_treated() const { return n_treated_; }

    void draw_into(std::vector<std::uint8_t>& z, Rng& rng) const override;
    std::uint64_t space_size(std::uint64_t cap) const override;

    // Treated-index sets are visited in colexicographic order.
    void for_each_assignment(std::uint64_t limit,
                             const std::function<void(const std::vector<std::uint8_t>&)>& fn) const override;

private:
    int n_total_;
    int n_treated_;
};

}  // namespace ripp
