#include "ripp/adjusters.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ripp {

const char* to_string(AdjustmentMethod method) {
    switch (method) {
        case AdjustmentMethod::bonferroni: return "bonferroni";
        case AdjustmentMethod::holm: return "holm";
        case AdjustmentMethod::hochberg: return "hochberg";
        case AdjustmentMethod::hommel: return "hommel";
        case AdjustmentMethod::randomization: return "randomization";
    }
    return "?";
}

std::optional<AdjustmentMethod> parse_adjustment(const std::string& name) {
    if (name == "bonferroni") return AdjustmentMethod::bonferroni;
    if (name == "holm") return AdjustmentMethod::holm;
    if (name == "hochberg") return AdjustmentMethod::hochberg;
    if (name == "hommel") return AdjustmentMethod::hommel;
    if (name == "randomization") return AdjustmentMethod::randomization;
    return std::nullopt;
}

namespace {

// Indices that sort p ascending, ties broken by original position.
std::vector<std::size_t> ascending_order(std::span<const double> p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return order;
}

}  // namespace

std::vector<double> bonferroni(std::span<const double> p) {
    const auto n = static_cast<double>(p.size());
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::min(1.0, n * p[i]);
    return out;
}

std::vector<double> holm(std::span<const double> p) {
    const std::size_t n = p.size();
    const auto order = ascending_order(p);
    std::vector<double> out(n);
    double running_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double scaled = std::min(1.0, static_cast<double>(n - k) * p[order[k]]);
        running_max = std::max(running_max, scaled);
        out[order[k]] = running_max;
    }
    return out;
}

std::vector<double> hochberg(std::span<const double> p) {
    const std::size_t n = p.size();
    const auto order = ascending_order(p);
    std::vector<double> out(n);
    double running_min = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const double scaled = std::min(1.0, static_cast<double>(n - k) * p[order[k]]);
        running_min = std::min(running_min, scaled);
        out[order[k]] = running_min;
    }
    return out;
}

std::vector<double> hommel(std::span<const double> p) {
    const std::size_t n = p.size();
    if (n <= 1) return {p.begin(), p.end()};
    const auto order = ascending_order(p);
    std::vector<double> sp(n);
    for (std::size_t i = 0; i < n; ++i) sp[i] = p[order[i]];

    // Quadratic algorithm over Simes combinations, as in standard references.
    // Scalings are computed as (m / k) * p rather than m * p / k: correctly
    // rounded division makes equal rational ratios bit-identical, so the
    // hochberg >= hommel ordering survives floating point at ties (a ratio of
    // 1 multiplies exactly).
    auto scaled = [](std::size_t num, std::size_t den, double p) {
        return (static_cast<double>(num) / static_cast<double>(den)) * p;
    };
    double q_init = scaled(n, 1, sp[0]);
    for (std::size_t i = 0; i < n; ++i) q_init = std::min(q_init, scaled(n, i + 1, sp[i]));
    std::vector<double> q(n, q_init), pa(n, q_init);

    for (std::size_t m = n - 1; m >= 2; --m) {
        const std::size_t split = n - m + 1;  // i1 = [0, split), i2 = [split, n)
        double q1 = std::numeric_limits<double>::infinity();
        for (std::size_t j = split; j < n; ++j)
            q1 = std::min(q1, scaled(m, 2 + (j - split), sp[j]));
        for (std::size_t j = 0; j < split; ++j)
            q[j] = std::min(scaled(m, 1, sp[j]), q1);
        for (std::size_t j = split; j < n; ++j) q[j] = q[split - 1];
        for (std::size_t j = 0; j < n; ++j) pa[j] = std::max(pa[j], q[j]);
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[order[i]] = std::max(pa[i], sp[i]);
    return out;
}

std::vector<double> adjust(AdjustmentMethod method, std::span<const double> p) {
    switch (method) {
        case AdjustmentMethod::bonferroni: return bonferroni(p);
        case AdjustmentMethod::holm: return holm(p);
        case AdjustmentMethod::hochberg: return hochberg(p);
        case AdjustmentMethod::hommel: return hommel(p);
        case AdjustmentMethod::randomization:
            throw std::logic_error("randomization adjustment requires the iteration matrix");
    }
    throw std::logic_error("unknown adjustment method");
}

}  // namespace ripp
