#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ripp {

enum class AdjustmentMethod { bonferroni, holm, hochberg, hommel, randomization };

const char* to_string(AdjustmentMethod method);
std::optional<AdjustmentMethod> parse_adjustment(const std::string& name);

// Closed-form familywise adjustments.  All return adjusted p-values in the
// input order, capped at 1; sorting ties break by original index.
std::vector<double> bonferroni(std::span<const double> p);
std::vector<double> holm(std::span<const double> p);       // step-down
std::vector<double> hochberg(std::span<const double> p);   // step-up
std::vector<double> hommel(std::span<const double> p);     // Simes-based

// Dispatch over the closed-form methods; randomization is engine-side and is
// rejected here.
std::vector<double> adjust(AdjustmentMethod method, std::span<const double> p);

}  // namespace ripp
