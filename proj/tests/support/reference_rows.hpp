#pragma once

// Published (Pred, TP) counts with their micro rates, gold total 1242.

#include <array>
#include <cstddef>

namespace oracle {

struct ReferenceRow {
  const char* method;
  std::size_t pred;
  std::size_t tp;
  double micro_recall;
  double micro_precision;
  double micro_f1;
};

inline constexpr std::size_t kReferenceGoldTotal = 1242;

inline constexpr std::array<ReferenceRow, 10> kReferenceRows{{
    {"LLM Simple", 4922, 123, 0.099, 0.025, 0.040},
    {"LLM With Context", 7377, 336, 0.271, 0.046, 0.078},
    {"LLM With RAG", 7792, 436, 0.351, 0.056, 0.097},
    {"LKG Retrieval (k=1)", 1253, 497, 0.400, 0.397, 0.398},
    {"LKG Retrieval (k=2)", 2403, 712, 0.573, 0.296, 0.391},
    {"LKG Retrieval (k=3)", 3470, 829, 0.667, 0.239, 0.352},
    {"LKG Retrieval (k=4)", 4415, 887, 0.714, 0.201, 0.314},
    {"LKG Retrieval (k=5)", 5423, 920, 0.741, 0.170, 0.276},
    {"LKG Retrieval (k=6)", 6464, 953, 0.767, 0.147, 0.247},
    {"LKG Retrieval (k=7)", 7482, 965, 0.777, 0.129, 0.221},
}};

// Rates are printed to three decimals.
inline constexpr double kRateTolerance = 0.0005;

}  // namespace oracle
