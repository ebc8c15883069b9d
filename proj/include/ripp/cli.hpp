#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ripp/adjusters.hpp"
#include "ripp/data_model.hpp"
#include "ripp/statistics.hpp"

namespace ripp {

enum class Command { analyze, simulate, exact, replicate };
enum class OutputFormat { tsv, jsonl };

// Exit codes: 0 success, 2 input error, 3 config error, 4 resource limit.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitLimit = 4;

struct RunConfig {
    Command command = Command::analyze;
    std::string input_path;              // "-" reads stdin
    std::string schema;                  // "id=COL,cell=COL,z=COL,d=COL,y=C1:C2:..."
    std::string estimands;               // "CELL:OUTCOME,..." with CELL "*" for unfiltered
    StatisticKind statistic = StatisticKind::cace;
    std::vector<StatisticKind> replicate_statistics{StatisticKind::itt, StatisticKind::cace};
    TailConvention tail = TailConvention::two_sided_abs;
    std::vector<AdjustmentMethod> methods{
        AdjustmentMethod::bonferroni, AdjustmentMethod::holm, AdjustmentMethod::hochberg,
        AdjustmentMethod::hommel, AdjustmentMethod::randomization};
    int m_iterations = 10000;
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;   // generated and reported when absent
    int burn_in = 50;
    int workers = 0;                     // 0: RIPP_WORKERS env or hardware default
    OutputFormat format = OutputFormat::tsv;
    std::uint64_t enum_limit = 1000000;
    std::string scenario;                // for simulate / replicate
    int reps = 300;
    std::optional<int> scenario_n;
    std::optional<int> scenario_treated;
};

// Executes one command, writing the report to out and a single-line
// machine-parsable message to err on failure.  Returns an exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Helpers shared with the binary front end (exposed for tests).
ColumnSchema parse_schema(const std::string& text);
std::vector<EstimandDef> parse_estimands(const std::string& text, const ColumnSchema& schema);
int resolve_workers(int requested);

}  // namespace ripp
