#include "ripp/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "ripp/errors.hpp"

namespace ripp {

namespace {

using Marginal = std::array<double, 3>;

constexpr Marginal kHealthyControl{.45, .45, .10};   // complier control arm
constexpr Marginal kNeverTaker{.02, .02, .96};       // never-takers, both arms
constexpr Marginal kComplierTreatAlt{.80, .10, .10};
constexpr Marginal kMultiAltTreat{.50, .45, .05};
constexpr Marginal kCombinedAlt2Control{.30, .60, .10};
constexpr Marginal kCombinedAlt3Control{.25, .55, .20};

int draw_categorical(const Marginal& probs, Rng& rng) {
    const double u = runif01(rng);
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
        acc += probs[k];
        if (u < acc) return k;
    }
    return 2;
}

[[noreturn]] void illegal(ComplianceStatus cls, int arm, Hypothesis hypothesis, Family family) {
    throw config_error(std::string("no marginal distribution for (") + to_string(cls) + ", arm " +
                       std::to_string(arm) + ", " + to_string(hypothesis) + ", " +
                       to_string(family) + ")");
}

const Marginal& marginal_table(ComplianceStatus cls, int arm, Hypothesis hypothesis,
                               Family family) {
    if (arm != 0 && arm != 1) illegal(cls, arm, hypothesis, family);
    switch (family) {
        case Family::noncompliance_single:
            if (hypothesis != Hypothesis::null_effect && hypothesis != Hypothesis::alt)
                illegal(cls, arm, hypothesis, family);
            if (cls == ComplianceStatus::never_taker) return kNeverTaker;
            if (cls != ComplianceStatus::complier) illegal(cls, arm, hypothesis, family);
            if (arm == 1 && hypothesis == Hypothesis::alt) return kComplierTreatAlt;
            return kHealthyControl;

        case Family::multiple_no_compliance:
            if (hypothesis != Hypothesis::null_effect && hypothesis != Hypothesis::alt)
                illegal(cls, arm, hypothesis, family);
            if (cls != ComplianceStatus::complier) illegal(cls, arm, hypothesis, family);
            if (arm == 1 && hypothesis == Hypothesis::alt) return kMultiAltTreat;
            return kHealthyControl;

        case Family::combined:
            if (hypothesis == Hypothesis::alt) illegal(cls, arm, hypothesis, family);
            if (cls == ComplianceStatus::never_taker) return kNeverTaker;
            if (cls != ComplianceStatus::complier) illegal(cls, arm, hypothesis, family);
            if (hypothesis == Hypothesis::null_effect) return kHealthyControl;
            if (arm == 1) return kComplierTreatAlt;
            switch (hypothesis) {
                case Hypothesis::alt1: return kHealthyControl;
                case Hypothesis::alt2: return kCombinedAlt2Control;
                case Hypothesis::alt3: return kCombinedAlt3Control;
                default: illegal(cls, arm, hypothesis, family);
            }
    }
    illegal(cls, arm, hypothesis, family);
}

}  // namespace

const char* to_string(Family family) {
    switch (family) {
        case Family::noncompliance_single: return "noncompliance_single";
        case Family::multiple_no_compliance: return "multiple_no_compliance";
        case Family::combined: return "combined";
    }
    return "?";
}

const char* to_string(Hypothesis hypothesis) {
    switch (hypothesis) {
        case Hypothesis::null_effect: return "null";
        case Hypothesis::alt: return "alt";
        case Hypothesis::alt1: return "alt1";
        case Hypothesis::alt2: return "alt2";
        case Hypothesis::alt3: return "alt3";
    }
    return "?";
}

const char* to_string(Correlation correlation) {
    switch (correlation) {
        case Correlation::zero: return "zero";
        case Correlation::partial: return "partial";
        case Correlation::perfect: return "perfect";
    }
    return "?";
}

ScenarioSpec ScenarioSpec::for_family(Family family) {
    ScenarioSpec spec;
    spec.family = family;
    spec.j_outcomes = family == Family::noncompliance_single ? 1 : 3;
    spec.omega_c = family == Family::multiple_no_compliance ? 1.0 : 0.1;
    return spec;
}

void ScenarioSpec::validate() const {
    if (n_units < 1) throw config_error("scenario needs at least one unit");
    if (n_treated < 0 || n_treated > n_units)
        throw config_error("scenario treated count out of range");
    if (!(omega_c > 0.0) || omega_c > 1.0)
        throw config_error("scenario omega_c must lie in (0, 1]");
    const bool combined = family == Family::combined;
    const bool alt_numbered = hypothesis == Hypothesis::alt1 || hypothesis == Hypothesis::alt2 ||
                              hypothesis == Hypothesis::alt3;
    if (combined && hypothesis == Hypothesis::alt)
        throw config_error("the combined family uses alt1/alt2/alt3");
    if (!combined && alt_numbered)
        throw config_error("alt1/alt2/alt3 apply to the combined family only");
    if (family == Family::multiple_no_compliance && omega_c != 1.0)
        throw config_error("the no-compliance family fixes omega_c = 1");
    const int expected_j = family == Family::noncompliance_single ? 1 : 3;
    if (j_outcomes != expected_j)
        throw config_error("family " + std::string(to_string(family)) + " has J=" +
                           std::to_string(expected_j));
    if (j_outcomes == 1 && correlation != Correlation::zero)
        throw config_error("correlation structure applies only to multi-outcome families");
}

std::string ScenarioSpec::name() const {
    std::ostringstream out;
    out << to_string(family) << '/' << to_string(hypothesis);
    if (j_outcomes > 1) out << '/' << to_string(correlation);
    out << "/omega=" << omega_c;
    return out.str();
}

ScenarioSpec parse_scenario(const std::string& text) {
    std::vector<std::string> tokens;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, '/')) tokens.push_back(token);
    if (tokens.size() < 2) throw config_error("scenario must be family/hypothesis[...]: " + text);

    ScenarioSpec spec;
    if (tokens[0] == "noncompliance_single")
        spec = ScenarioSpec::for_family(Family::noncompliance_single);
    else if (tokens[0] == "multiple_no_compliance")
        spec = ScenarioSpec::for_family(Family::multiple_no_compliance);
    else if (tokens[0] == "combined")
        spec = ScenarioSpec::for_family(Family::combined);
    else
        throw config_error("unknown scenario family: " + tokens[0]);

    const std::string& hyp = tokens[1];
    if (hyp == "null") spec.hypothesis = Hypothesis::null_effect;
    else if (hyp == "alt") spec.hypothesis = Hypothesis::alt;
    else if (hyp == "alt1") spec.hypothesis = Hypothesis::alt1;
    else if (hyp == "alt2") spec.hypothesis = Hypothesis::alt2;
    else if (hyp == "alt3") spec.hypothesis = Hypothesis::alt3;
    else throw config_error("unknown scenario hypothesis: " + hyp);

    for (std::size_t i = 2; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (t == "zero") spec.correlation = Correlation::zero;
        else if (t == "partial") spec.correlation = Correlation::partial;
        else if (t == "perfect") spec.correlation = Correlation::perfect;
        else if (t.rfind("omega=", 0) == 0) {
            try {
                spec.omega_c = std::stod(t.substr(6));
            } catch (const std::exception&) {
                throw config_error("bad omega token: " + t);
            }
        } else {
            throw config_error("unknown scenario token: " + t);
        }
    }
    spec.validate();
    return spec;
}

int draw_marginal(ComplianceStatus cls, int arm, Hypothesis hypothesis, Family family, Rng& rng) {
    return draw_categorical(marginal_table(cls, arm, hypothesis, family), rng);
}

std::array<int, 3> apply_correlation(int first, const std::function<int()>& second_fresh,
                                     const std::function<int()>& third_fresh, Correlation mode,
                                     Rng& rng) {
    std::array<int, 3> y{first, first, first};
    switch (mode) {
        case Correlation::perfect:
            break;
        case Correlation::zero:
            y[1] = second_fresh();
            y[2] = third_fresh();
            break;
        case Correlation::partial: {
            y[1] = rbernoulli(rng, 0.5) ? first : second_fresh();
            const double u = runif01(rng);
            if (u < 1.0 / 3.0)
                y[2] = first;
            else if (u < 2.0 / 3.0)
                y[2] = y[1];
            else
                y[2] = third_fresh();
            break;
        }
    }
    return y;
}

ScienceTable generate(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    ScienceTable table;
    table.j_outcomes = spec.j_outcomes;
    table.k_categories = 3;
    table.cell_count = 1;
    table.units.reserve(spec.n_units);

    for (int i = 0; i < spec.n_units; ++i) {
        ScienceUnit unit;
        unit.id = std::to_string(i + 1);
        unit.cell = 0;
        unit.compliance = (spec.family == Family::multiple_no_compliance ||
                           rbernoulli(rng, spec.omega_c))
                              ? ComplianceStatus::complier
                              : ComplianceStatus::never_taker;

        for (int arm = 0; arm < 2; ++arm) {
            auto fresh = [&]() {
                return draw_marginal(unit.compliance, arm, spec.hypothesis, spec.family, rng);
            };
            std::vector<int> y;
            if (spec.j_outcomes == 1) {
                y = {fresh()};
            } else {
                const auto triple = apply_correlation(fresh(), fresh, fresh, spec.correlation, rng);
                y = {triple[0], triple[1], triple[2]};
            }
            (arm == 0 ? unit.y0 : unit.y1) = std::move(y);
        }
        table.units.push_back(std::move(unit));
    }
    return table;
}

RejectionRates replicate(const ScenarioSpec& spec, std::span<const MethodCombo> combos, int reps,
                         int m_iterations, double alpha, int burn_in, std::uint64_t master_seed,
                         int workers, TailConvention tail) {
    spec.validate();
    if (reps < 1) throw config_error("reps must be at least 1");
    if (combos.empty()) throw config_error("at least one (statistic, method) combo is required");

    bool wants_itt = false, wants_cace = false;
    for (const auto& c : combos) (c.kind == StatisticKind::itt ? wants_itt : wants_cace) = true;

    const CompleteRandomization mech(spec.n_units, spec.n_treated);
    std::vector<long> reject_counts(combos.size(), 0);
    std::mutex merge_mutex;

    const int thread_count = std::max(1, std::min(workers, reps));
    std::vector<std::thread> pool;
    const int chunk = (reps + thread_count - 1) / thread_count;
    for (int w = 0; w < thread_count; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(reps, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            std::vector<long> local(combos.size(), 0);
            for (int rep = lo; rep < hi; ++rep) {
                const std::uint64_t rep_key = derive_key(master_seed, static_cast<std::uint64_t>(rep));
                Rng rng = substream(rep_key, 0, 0x5151);
                const ScienceTable truth = generate(spec, rng);
                std::vector<std::uint8_t> z_actual;
                mech.draw_into(z_actual, rng);
                const ObservedDataset obs = reobserve(truth, z_actual);
                const auto estimands = default_estimands(obs);

                AnalysisResult by_kind[2];
                bool have[2] = {false, false};
                for (int k = 0; k < 2; ++k) {
                    const StatisticKind kind = k == 0 ? StatisticKind::itt : StatisticKind::cace;
                    if ((kind == StatisticKind::itt && !wants_itt) ||
                        (kind == StatisticKind::cace && !wants_cace))
                        continue;
                    EngineConfig config;
                    config.kind = kind;
                    config.tail = tail;
                    config.m_iterations = m_iterations;
                    config.alpha = alpha;
                    config.burn_in = burn_in;
                    config.seed = derive_key(rep_key, 0x1000 + static_cast<std::uint64_t>(k));
                    config.workers = 1;  // reps are the parallel axis here
                    by_kind[k] = analyze(obs, estimands, config);
                    have[k] = true;
                }

                for (std::size_t c = 0; c < combos.size(); ++c) {
                    const int k = combos[c].kind == StatisticKind::itt ? 0 : 1;
                    if (!have[k]) continue;
                    const auto& adjusted = by_kind[k].adjusted_p.at(combos[c].method);
                    const double min_p = *std::min_element(adjusted.begin(), adjusted.end());
                    if (min_p <= alpha) ++local[c];
                }
            }
            std::lock_guard<std::mutex> lock(merge_mutex);
            for (std::size_t c = 0; c < combos.size(); ++c) reject_counts[c] += local[c];
        });
    }
    for (auto& t : pool) t.join();

    RejectionRates out;
    out.combos.assign(combos.begin(), combos.end());
    out.reps = reps;
    out.rate.resize(combos.size());
    out.mc_se.resize(combos.size());
    for (std::size_t c = 0; c < combos.size(); ++c) {
        const double r = static_cast<double>(reject_counts[c]) / static_cast<double>(reps);
        out.rate[c] = r;
        out.mc_se[c] = std::sqrt(r * (1.0 - r) / static_cast<double>(reps));
    }
    return out;
}

}  // namespace ripp
