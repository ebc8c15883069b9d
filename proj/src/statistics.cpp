#include "ripp/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "ripp/errors.hpp"

namespace ripp {

const char* to_string(StatisticKind kind) {
    return kind == StatisticKind::itt ? "itt" : "cace";
}

const char* to_string(TailConvention tail) {
    switch (tail) {
        case TailConvention::two_sided_abs: return "two";
        case TailConvention::right_tail: return "right";
        case TailConvention::left_tail: return "left";
    }
    return "?";
}

namespace {

struct ArmSums {
    double y1 = 0, y0 = 0;  // outcome score sums by arm
    double d1 = 0, d0 = 0;  // receipt sums by arm
    long n1 = 0, n0 = 0;
};

ArmSums accumulate(const ObservedDataset& obs, const EstimandDef& e) {
    ArmSums s;
    const int j = e.outcome_index;
    for (const auto& u : obs.units) {
        if (e.cell_filter && u.cell != *e.cell_filter) continue;
        const auto y = static_cast<double>(u.y_obs[j]);
        if (u.z) {
            s.y1 += y;
            s.d1 += u.d_obs;
            ++s.n1;
        } else {
            s.y0 += y;
            s.d0 += u.d_obs;
            ++s.n0;
        }
    }
    return s;
}

void check_estimand(const ObservedDataset& obs, const EstimandDef& e) {
    if (e.outcome_index < 0 || e.outcome_index >= obs.j_outcomes)
        throw config_error("estimand '" + e.label + "': outcome index out of range");
    if (e.cell_filter && (*e.cell_filter < 0 || *e.cell_filter >= obs.cell_count))
        throw config_error("estimand '" + e.label + "': cell filter out of range");
}

double category_mean(std::span<const double> counts, double total) {
    double sum = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) sum += static_cast<double>(k) * counts[k];
    return sum / total;
}

// Constrained em for the one-sided mixture likelihood: treated compliers and
// never-takers are labeled; control units are an omega-weighted mixture with
// eta_n shared across arms (exclusion restriction).  Starts from the clipped
// moment solution.
double cace_by_em(std::span<const double> treated_never, std::span<const double> control,
                  std::span<const double> initial_c0, double mean_treated_compliers,
                  double n_treated_compliers, double n_treated_never, double n_total,
                  double omega_start) {
    const std::size_t k_count = control.size();
    std::vector<double> eta_c0(initial_c0.begin(), initial_c0.end());
    std::vector<double> eta_n(k_count);
    for (std::size_t k = 0; k < k_count; ++k) eta_n[k] = treated_never[k] / n_treated_never;
    double omega = omega_start;

    std::vector<double> to_complier(k_count), to_never(k_count);
    for (int iter = 0; iter < 500; ++iter) {
        double sum_complier = 0.0, sum_never = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            const double num = omega * eta_c0[k];
            const double den = num + (1.0 - omega) * eta_n[k];
            const double resp = den > 0.0 ? num / den : 0.0;
            to_complier[k] = control[k] * resp;
            to_never[k] = control[k] * (1.0 - resp);
            sum_complier += to_complier[k];
            sum_never += to_never[k];
        }
        const double new_omega = (n_treated_compliers + sum_complier) / n_total;
        double delta = std::abs(new_omega - omega);
        omega = new_omega;
        for (std::size_t k = 0; k < k_count; ++k) {
            const double c0 = sum_complier > 0.0 ? to_complier[k] / sum_complier : eta_c0[k];
            const double nn = (treated_never[k] + to_never[k]) / (n_treated_never + sum_never);
            delta += std::abs(c0 - eta_c0[k]) + std::abs(nn - eta_n[k]);
            eta_c0[k] = c0;
            eta_n[k] = nn;
        }
        if (delta < 1e-11) break;
    }
    double mean_c0 = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) mean_c0 += static_cast<double>(k) * eta_c0[k];
    return mean_treated_compliers - mean_c0;
}

}  // namespace

std::optional<double> try_itt(const ObservedDataset& obs, const EstimandDef& e) {
    const ArmSums s = accumulate(obs, e);
    if (s.n1 == 0 || s.n0 == 0) return std::nullopt;
    return s.y1 / static_cast<double>(s.n1) - s.y0 / static_cast<double>(s.n0);
}

std::optional<CaceFit> cace_fit(const ObservedDataset& obs, const EstimandDef& e) {
    const int k_count = obs.k_categories;
    const int j = e.outcome_index;
    std::vector<double> treated_complier(k_count, 0.0), treated_never(k_count, 0.0),
        control(k_count, 0.0);
    double n_tc = 0, n_tn = 0, n_control = 0;
    for (const auto& u : obs.units) {
        if (e.cell_filter && u.cell != *e.cell_filter) continue;
        const int k = u.y_obs[j];
        if (u.z == 1 && u.d_obs == 1) {
            treated_complier[k] += 1.0;
            n_tc += 1.0;
        } else if (u.z == 1) {
            treated_never[k] += 1.0;
            n_tn += 1.0;
        } else {
            control[k] += 1.0;
            n_control += 1.0;
        }
    }
    if (n_tc + n_tn == 0.0 || n_control == 0.0) return std::nullopt;  // empty arm
    if (n_tc == 0.0) return std::nullopt;  // no identified compliers

    const double mean_tc = category_mean(treated_complier, n_tc);
    if (n_tn == 0.0)  // universal compliance: controls are all compliers
        return CaceFit{mean_tc - category_mean(control, n_control), false};

    // Moment solution: subtract the never-taker component from the control
    // mixture.  Inside the simplex this exactly fits every observed frequency
    // and is the mle (and equals the iv ratio itt_y / itt_d).
    const double omega = n_tc / (n_tc + n_tn);
    std::vector<double> eta_c0(k_count);
    bool interior = true;
    for (int k = 0; k < k_count; ++k) {
        eta_c0[k] =
            (control[k] / n_control - (1.0 - omega) * treated_never[k] / n_tn) / omega;
        if (eta_c0[k] < -1e-12) interior = false;
    }
    if (interior) {
        double mean_c0 = 0.0;
        for (int k = 0; k < k_count; ++k)
            mean_c0 += static_cast<double>(k) * std::max(0.0, eta_c0[k]);
        return CaceFit{mean_tc - mean_c0, false};
    }

    // Boundary case: renormalize the clipped subtraction as the em start.
    double clipped_sum = 0.0;
    for (auto& v : eta_c0) {
        v = std::max(v, 0.0);
        clipped_sum += v;
    }
    if (clipped_sum <= 0.0)
        eta_c0.assign(k_count, 1.0 / k_count);
    else
        for (auto& v : eta_c0) v /= clipped_sum;
    const double value = cace_by_em(treated_never, control, eta_c0, mean_tc, n_tc, n_tn,
                                    n_tc + n_tn + n_control, omega);
    return CaceFit{value, true};
}

std::optional<double> try_cace(const ObservedDataset& obs, const EstimandDef& e) {
    const auto fit = cace_fit(obs, e);
    if (!fit) return std::nullopt;
    return fit->value;
}

std::optional<double> try_statistic(StatisticKind kind, const ObservedDataset& obs,
                                    const EstimandDef& e) {
    return kind == StatisticKind::itt ? try_itt(obs, e) : try_cace(obs, e);
}

double itt(const ObservedDataset& obs, const EstimandDef& e) {
    check_estimand(obs, e);
    const auto v = try_itt(obs, e);
    if (!v) throw input_error("estimand '" + e.label + "': empty arm after filtering");
    return *v;
}

double cace(const ObservedDataset& obs, const EstimandDef& e) {
    check_estimand(obs, e);
    if (!try_itt(obs, e))
        throw input_error("estimand '" + e.label + "': empty arm after filtering");
    const auto v = try_cace(obs, e);
    if (!v)
        throw input_error("estimand '" + e.label +
                          "': no identified compliers (receipt-rate difference <= 0)");
    return *v;
}

std::vector<double> statistic_vector(const ObservedDataset& obs, StatisticKind kind,
                                     std::span<const EstimandDef> estimands) {
    std::vector<double> out;
    out.reserve(estimands.size());
    for (const auto& e : estimands)
        out.push_back(kind == StatisticKind::itt ? itt(obs, e) : cace(obs, e));
    return out;
}

std::vector<EstimandDef> default_estimands(const ObservedDataset& obs) {
    std::vector<EstimandDef> out;
    if (obs.cell_count <= 1) {
        for (int j = 0; j < obs.j_outcomes; ++j)
            out.push_back({"y" + std::to_string(j), std::nullopt, j});
        return out;
    }
    for (int c = 0; c < obs.cell_count; ++c)
        for (int j = 0; j < obs.j_outcomes; ++j)
            out.push_back({"cell" + std::to_string(c) + ":y" + std::to_string(j), c, j});
    return out;
}

}  // namespace ripp
