#include "ripp/assignment.hpp"

#include <numeric>
#include <string>

#include "ripp/errors.hpp"

namespace ripp {

CompleteRandomization::CompleteRandomization(int n_total, int n_treated)
    : n_total_(n_total), n_treated_(n_treated) {
    if (n_total < 0 || n_treated < 0 || n_treated > n_total)
        throw config_error("complete randomization requires 0 <= n_treated <= n_total");
}

void CompleteRandomization::draw_into(std::vector<std::uint8_t>& z, Rng& rng) const {
    const int n = n_total_;
    z.assign(n, 0);
    // Partial Fisher-Yates over unit indices; the first n_treated slots form a
    // uniformly random subset.
    thread_local std::vector<int> idx;
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n_treated_; ++i) {
        const int pick = i + static_cast<int>(rbelow(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[pick]);
        z[idx[i]] = 1;
    }
}

std::uint64_t CompleteRandomization::space_size(std::uint64_t cap) const {
    // C(n, k) with saturation at cap + 1; each partial product divides exactly.
    const int n = n_total_;
    const int k = std::min(n_treated_, n - n_treated_);
    unsigned __int128 value = 1;
    for (int i = 1; i <= k; ++i) {
        value = value * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (value > cap) return cap + 1;
    }
    return static_cast<std::uint64_t>(value);
}

void CompleteRandomization::for_each_assignment(
    std::uint64_t limit, const std::function<void(const std::vector<std::uint8_t>&)>& fn) const {
    const std::uint64_t count = space_size(limit);
    if (count > limit)
        throw limit_error("enumeration limit exceeded: C(" + std::to_string(n_total_) + "," +
                          std::to_string(n_treated_) + ") > " + std::to_string(limit));

    const int n = n_total_;
    const int k = n_treated_;
    std::vector<std::uint8_t> z(n, 0);
    if (k == 0) {
        fn(z);
        return;
    }

    // Colexicographic successor: bump the lowest index that can move, reset
    // everything below it.
    std::vector<int> comb(k);
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
        std::fill(z.begin(), z.end(), 0);
        for (int c : comb) z[c] = 1;
        fn(z);

        int i = 0;
        while (i < k) {
            const int ceiling = (i + 1 < k) ? comb[i + 1] : n;
            if (comb[i] + 1 < ceiling) break;
            ++i;
        }
        if (i == k) return;
        ++comb[i];
        std::iota(comb.begin(), comb.begin() + i, 0);
    }
}

}  // namespace ripp
