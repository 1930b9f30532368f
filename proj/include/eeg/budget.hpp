#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "eeg/error.hpp"

namespace eeg {

inline constexpr const char* kBudgetNote =
    "no_ops is the literal sum over response positions i=1..floor(r) of (t+i)*m*n. "
    "For t=46.72, r=463, n=32, m=4096 this is ~1.69e10 (aor ~0.036%), not the ~7.32e7 "
    "(aor ~8.37%) sometimes given for the same inputs; that value does not follow "
    "from the formula.";

/// Operation-count estimate for the early-exit guard.
/// `mean_prompt_tokens` is the mean prompt length (not the guard threshold).
struct BudgetReport {
  double mean_prompt_tokens = 0.0;
  double mean_response_tokens = 0.0;
  std::uint32_t n_layers = 0;
  std::uint32_t dim = 0;
  double no_ops = 0.0;   // operations of the unguarded generation
  double ano_ops = 0.0;  // additional operations for the guard pass
  double aor = 0.0;      // ano_ops / no_ops
  double rejection_rate = 0.0;
  double net_overhead = 0.0;  // aor - rejection_rate
  std::string note = kBudgetNote;
};

inline BudgetReport compute_budget(double mean_prompt_tokens, double mean_response_tokens,
                                   std::uint32_t n_layers, std::uint32_t dim,
                                   double rejection_rate) {
  if (!std::isfinite(mean_prompt_tokens) || mean_prompt_tokens < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "mean prompt tokens must be >= 0");
  }
  if (!std::isfinite(mean_response_tokens) || mean_response_tokens < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "mean response tokens must be >= 1");
  }
  if (n_layers == 0 || dim == 0) {
    throw Error(ErrorKind::InvalidArgument, "layers and dim must be positive");
  }
  if (!(rejection_rate >= 0.0 && rejection_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "rejection rate must lie in [0, 1]");
  }

  BudgetReport report;
  report.mean_prompt_tokens = mean_prompt_tokens;
  report.mean_response_tokens = mean_response_tokens;
  report.n_layers = n_layers;
  report.dim = dim;
  report.rejection_rate = rejection_rate;

  const double m = dim;
  const double n = n_layers;
  const auto r = static_cast<std::uint64_t>(std::floor(mean_response_tokens));
  double no = 0.0;
  for (std::uint64_t i = 1; i <= r; ++i) {
    no += (mean_prompt_tokens + static_cast<double>(i)) * m * n;
  }
  report.no_ops = no;
  report.ano_ops = n * m * mean_prompt_tokens;
  report.aor = report.ano_ops / report.no_ops;
  report.net_overhead = report.aor - rejection_rate;
  return report;
}

}  // namespace eeg
