#include "ripp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "ripp/errors.hpp"

namespace ripp {

namespace {

constexpr std::uint64_t kSaltImpute = 0x11;
constexpr std::uint64_t kSaltAssign = 0x22;
constexpr std::uint64_t kSaltSequential = 0x33;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sharp-null completion with observed compliance; control units stay unknown
// and are filled per iteration (itt runs never read them, so they get
// never_taker placeholders).
ScienceTable null_table_template(const ObservedDataset& obs) {
    ScienceTable table;
    table.j_outcomes = obs.j_outcomes;
    table.k_categories = obs.k_categories;
    table.cell_count = obs.cell_count;
    table.units.reserve(obs.units.size());
    for (const auto& u : obs.units) {
        ScienceUnit s;
        s.id = u.id;
        s.cell = u.cell;
        s.compliance = observed_compliance(u.z, u.d_obs);
        s.y0 = u.y_obs;
        s.y1 = u.y_obs;
        table.units.push_back(std::move(s));
    }
    return table;
}

void check_estimands(const ObservedDataset& obs, std::span<const EstimandDef> estimands) {
    if (estimands.empty()) throw config_error("at least one estimand is required");
    for (const auto& e : estimands) {
        if (e.outcome_index < 0 || e.outcome_index >= obs.j_outcomes)
            throw config_error("estimand '" + e.label + "': outcome index out of range");
        if (e.cell_filter && (*e.cell_filter < 0 || *e.cell_filter >= obs.cell_count))
            throw config_error("estimand '" + e.label + "': cell filter out of range");
    }
}

void parallel_for(int count, int workers, const std::function<void(int, int)>& run_range) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        run_range(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
}

}  // namespace

void EngineConfig::validate() const {
    if (m_iterations < 1) throw config_error("M must be at least 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
    if (burn_in < 1) throw config_error("burn_in must be at least 1");
    if (workers < 1) throw config_error("workers must be at least 1");
    prior.validate();
}

IterationMatrix run_iterations(const ObservedDataset& obs, StatisticKind kind,
                               std::span<const EstimandDef> estimands,
                               const CompliancePrior& prior, const AssignmentMechanism& mech,
                               int m_iterations, std::uint64_t master_seed, TailConvention tail,
                               int burn_in, int workers, StepOrder order, StreamLayout layout) {
    if (m_iterations < 1) throw config_error("M must be at least 1");
    if (burn_in < 1) throw config_error("burn_in must be at least 1");
    check_estimands(obs, estimands);
    obs.validate();
    if (mech.n_total() != obs.size())
        throw config_error("assignment mechanism size does not match the dataset");

    const int n = obs.size();
    const int j_count = static_cast<int>(estimands.size());
    const bool needs_imputation = kind == StatisticKind::cace;

    const ScienceTable base = null_table_template(obs);
    const ImputationWorkspace ws =
        needs_imputation ? ImputationWorkspace::build(obs) : ImputationWorkspace{};

    IterationMatrix out;
    out.m_count = m_iterations;
    out.j_count = j_count;
    out.tail = tail;
    out.t_hyp.assign(static_cast<std::size_t>(m_iterations) * j_count, 0.0);
    out.degenerate.assign(static_cast<std::size_t>(m_iterations) * j_count, 0);
    out.iteration_seeds.resize(m_iterations);

    parallel_for(m_iterations, workers, [&](int lo, int hi) {
        ScienceTable table = base;
        if (!needs_imputation)
            for (auto& u : table.units)
                if (u.compliance == ComplianceStatus::unknown)
                    u.compliance = ComplianceStatus::never_taker;

        ObservedDataset scratch;
        std::vector<ComplianceStatus> imputed;
        std::vector<std::uint8_t> z_hyp;

        for (int m = lo; m < hi; ++m) {
            const std::uint64_t key = derive_key(master_seed, static_cast<std::uint64_t>(m));
            out.iteration_seeds[m] = key;

            if (layout == StreamLayout::split) {
                // Imputation and assignment consume independent salted
                // substreams; procedural order cannot matter here.
                if (needs_imputation) {
                    Rng rng_impute = substream(key, 0, kSaltImpute);
                    impute_compliance_grouped(ws, prior, burn_in, rng_impute, imputed);
                }
                Rng rng_assign = substream(key, 0, kSaltAssign);
                mech.draw_into(z_hyp, rng_assign);
            } else {
                Rng rng_seq = substream(key, 0, kSaltSequential);
                if (order == StepOrder::impute_then_draw) {
                    if (needs_imputation)
                        impute_compliance_grouped(ws, prior, burn_in, rng_seq, imputed);
                    mech.draw_into(z_hyp, rng_seq);
                } else {
                    mech.draw_into(z_hyp, rng_seq);
                    if (needs_imputation)
                        impute_compliance_grouped(ws, prior, burn_in, rng_seq, imputed);
                }
            }

            if (needs_imputation)
                for (int i = 0; i < n; ++i)
                    if (obs.units[i].z == 0) table.units[i].compliance = imputed[i];

            reobserve_into(table, z_hyp, scratch);

            for (int j = 0; j < j_count; ++j) {
                const auto value = try_statistic(kind, scratch, estimands[j]);
                const std::size_t cell = static_cast<std::size_t>(m) * j_count + j;
                if (value) {
                    out.t_hyp[cell] = *value;
                } else {
                    out.t_hyp[cell] = 0.0;  // never read; the flag wins
                    out.degenerate[cell] = 1;
                }
            }
        }
    });

    return out;
}

std::vector<double> nominal_pvalues(std::span<const double> t_obs, const IterationMatrix& it) {
    if (static_cast<int>(t_obs.size()) != it.j_count)
        throw config_error("t_obs length does not match the iteration matrix");
    std::vector<double> p(it.j_count);
    for (int j = 0; j < it.j_count; ++j) {
        const double threshold = extremity(t_obs[j], it.tail);
        long count = 0;
        for (int m = 0; m < it.m_count; ++m) {
            if (it.is_degenerate(m, j)) continue;  // conservatively non-extreme
            if (extremity(it.at(m, j), it.tail) >= threshold) ++count;
        }
        p[j] = static_cast<double>(count) / static_cast<double>(it.m_count);
    }
    return p;
}

ProbMatrix hypothetical_pvalue_matrix(const IterationMatrix& it) {
    ProbMatrix out;
    out.rows = it.m_count;
    out.cols = it.j_count;
    out.values.assign(static_cast<std::size_t>(it.m_count) * it.j_count, 0.0);

    std::vector<double> column(it.m_count), sorted(it.m_count);
    for (int j = 0; j < it.j_count; ++j) {
        for (int m = 0; m < it.m_count; ++m)
            column[m] = it.is_degenerate(m, j) ? kNegInf : extremity(it.at(m, j), it.tail);
        sorted = column;
        std::sort(sorted.begin(), sorted.end());
        const auto m_total = static_cast<double>(it.m_count);
        for (int m = 0; m < it.m_count; ++m) {
            // count of values >= column[m], self-inclusive
            const auto lower = std::lower_bound(sorted.begin(), sorted.end(), column[m]);
            const auto count = static_cast<double>(sorted.end() - lower);
            out.values[static_cast<std::size_t>(m) * it.j_count + j] = count / m_total;
        }
    }
    return out;
}

namespace {

std::vector<double> row_minima(const ProbMatrix& p_hyp) {
    std::vector<double> mins(p_hyp.rows, 1.0);
    for (int m = 0; m < p_hyp.rows; ++m) {
        double lo = p_hyp.at(m, 0);
        for (int j = 1; j < p_hyp.cols; ++j) lo = std::min(lo, p_hyp.at(m, j));
        mins[m] = lo;
    }
    return mins;
}

}  // namespace

std::vector<double> adjust_randomization(std::span<const double> nominal,
                                         const ProbMatrix& p_hyp) {
    if (static_cast<int>(nominal.size()) != p_hyp.cols)
        throw config_error("nominal p length does not match the p-value matrix");
    auto mins = row_minima(p_hyp);
    std::sort(mins.begin(), mins.end());
    std::vector<double> adjusted(nominal.size());
    const auto m_total = static_cast<double>(p_hyp.rows);
    for (std::size_t j = 0; j < nominal.size(); ++j) {
        const auto count = static_cast<double>(
            std::upper_bound(mins.begin(), mins.end(), nominal[j]) - mins.begin());
        adjusted[j] = count / m_total;
    }
    return adjusted;
}

double familywise_cutoff(const ProbMatrix& p_hyp, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
    auto mins = row_minima(p_hyp);
    std::sort(mins.begin(), mins.end());
    const auto m_total = static_cast<double>(p_hyp.rows);
    auto rank = static_cast<long>(std::ceil(alpha * m_total - 1e-9));
    rank = std::clamp<long>(rank, 1, p_hyp.rows);
    return mins[rank - 1];
}

double achieved_alpha_at(const ProbMatrix& p_hyp, double cutoff) {
    const auto mins = row_minima(p_hyp);
    long count = 0;
    for (double v : mins) count += v <= cutoff ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(p_hyp.rows);
}

AnalysisResult analyze(const ObservedDataset& obs, std::span<const EstimandDef> estimands,
                       const EngineConfig& config) {
    config.validate();
    check_estimands(obs, estimands);

    AnalysisResult result;
    result.kind = config.kind;
    result.tail = config.tail;
    result.estimands.assign(estimands.begin(), estimands.end());
    result.m_iterations = config.m_iterations;
    result.alpha = config.alpha;
    result.seed = config.seed;
    result.burn_in = config.burn_in;

    result.t_obs = statistic_vector(obs, config.kind, estimands);

    const CompleteRandomization mech = CompleteRandomization::from_observed(obs);
    const IterationMatrix it =
        run_iterations(obs, config.kind, estimands, config.prior, mech, config.m_iterations,
                       config.seed, config.tail, config.burn_in, config.workers);

    result.nominal_p = nominal_pvalues(result.t_obs, it);
    const ProbMatrix p_hyp = hypothetical_pvalue_matrix(it);
    result.adjusted_p[AdjustmentMethod::bonferroni] = bonferroni(result.nominal_p);
    result.adjusted_p[AdjustmentMethod::holm] = holm(result.nominal_p);
    result.adjusted_p[AdjustmentMethod::hochberg] = hochberg(result.nominal_p);
    result.adjusted_p[AdjustmentMethod::hommel] = hommel(result.nominal_p);
    result.adjusted_p[AdjustmentMethod::randomization] =
        adjust_randomization(result.nominal_p, p_hyp);
    result.familywise_cutoff = familywise_cutoff(p_hyp, config.alpha);
    result.achieved_alpha = achieved_alpha_at(p_hyp, result.familywise_cutoff);

    result.degenerate_counts.assign(it.j_count, 0);
    for (int m = 0; m < it.m_count; ++m)
        for (int j = 0; j < it.j_count; ++j)
            if (it.is_degenerate(m, j)) ++result.degenerate_counts[j];

    return result;
}

namespace {

// Shared tally for the fixed-compliance oracle paths.
struct ExtremeCounter {
    std::vector<long> counts;
    std::vector<double> thresholds;
    long total = 0;

    ExtremeCounter(std::span<const double> t_obs, TailConvention tail)
        : counts(t_obs.size(), 0), thresholds(t_obs.size()) {
        for (std::size_t j = 0; j < t_obs.size(); ++j) thresholds[j] = extremity(t_obs[j], tail);
    }

    void tally(const ObservedDataset& data, StatisticKind kind,
               std::span<const EstimandDef> estimands, TailConvention tail) {
        ++total;
        for (std::size_t j = 0; j < estimands.size(); ++j) {
            const auto value = try_statistic(kind, data, estimands[j]);
            if (value && extremity(*value, tail) >= thresholds[j]) ++counts[j];
        }
    }

    std::vector<double> pvalues() const {
        std::vector<double> p(counts.size());
        for (std::size_t j = 0; j < counts.size(); ++j)
            p[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
        return p;
    }
};

}  // namespace

std::vector<double> exact_pvalue(const ScienceTable& table, std::span<const double> t_obs,
                                 StatisticKind kind, std::span<const EstimandDef> estimands,
                                 const AssignmentMechanism& mech, TailConvention tail,
                                 std::uint64_t enum_limit) {
    if (t_obs.size() != estimands.size())
        throw config_error("t_obs length does not match the estimand list");
    table.validate();
    ExtremeCounter counter(t_obs, tail);
    ObservedDataset scratch;
    mech.for_each_assignment(enum_limit, [&](const std::vector<std::uint8_t>& z) {
        reobserve_into(table, z, scratch);
        counter.tally(scratch, kind, estimands, tail);
    });
    return counter.pvalues();
}

std::vector<double> mc_pvalue(const ScienceTable& table, std::span<const double> t_obs,
                              StatisticKind kind, std::span<const EstimandDef> estimands,
                              const AssignmentMechanism& mech, TailConvention tail,
                              int m_iterations, std::uint64_t master_seed) {
    if (t_obs.size() != estimands.size())
        throw config_error("t_obs length does not match the estimand list");
    if (m_iterations < 1) throw config_error("M must be at least 1");
    table.validate();
    ExtremeCounter counter(t_obs, tail);
    ObservedDataset scratch;
    std::vector<std::uint8_t> z;
    for (int m = 0; m < m_iterations; ++m) {
        Rng rng = substream(master_seed, static_cast<std::uint64_t>(m), kSaltAssign);
        mech.draw_into(z, rng);
        reobserve_into(table, z, scratch);
        counter.tally(scratch, kind, estimands, tail);
    }
    return counter.pvalues();
}

}  // namespace ripp
