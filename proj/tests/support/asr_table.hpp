#pragma once

// Per-attack ASR rows (percent) and defended averages for two models, used as
// arithmetic fixtures.

#include <array>
#include <string>
#include <vector>

#include "eeg/metrics.hpp"

namespace eeg::asr_table {

inline const std::array<const char*, 10> kAttacks = {
    "GCG", "GPTFuzz", "AutoDAN", "Pair", "Tap", "AIM", "Wiki", "DT", "RS", "DN"};

inline const std::array<int, 10> kVicunaNoDefense = {88, 100, 94, 99, 92, 70, 60, 100, 78, 92};
inline const std::array<int, 10> kLlama2NoDefense = {13, 12, 29, 90, 49, 0, 0, 48, 12, 18};

inline constexpr double kVicunaAvg = 87.30;
inline constexpr double kLlama2Avg = 27.10;

struct DefenseRow {
  const char* name;
  double vicuna_avg;
  double llama2_avg;
  double reduction_percent;
};

inline const std::array<DefenseRow, 6> kDefenses = {{
    {"PPL", 79.30, 20.50, 16.76},
    {"ICD", 62.80, 3.40, 57.76},
    {"Self-Reminder", 59.10, 8.50, 50.47},
    {"RA-LLM", 26.30, 21.80, 44.72},
    {"SafeDecoding", 9.50, 20.00, 57.66},
    {"early-exit guard", 8.40, 5.70, 84.67},
}};

/// 100 trials per attack with `percent[k]` of them bypassing.
inline std::vector<AttackOutcome> outcomes_from_row(const std::array<int, 10>& percent) {
  std::vector<AttackOutcome> out;
  for (std::size_t k = 0; k < kAttacks.size(); ++k) {
    for (int trial = 0; trial < 100; ++trial) out.push_back({kAttacks[k], trial < percent[k]});
  }
  return out;
}

}  // namespace eeg::asr_table
