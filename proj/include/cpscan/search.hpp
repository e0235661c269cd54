#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpscan/types.hpp"

namespace cpscan {

struct Probe {
  Index k;
  double value;
};

/// One divide-and-conquer step: the triple (s, t, e) entering the step, the
/// probe w, and the triple kept afterwards.
struct BranchRecord {
  Index s, t, e, w;
  Index kept_s, kept_t, kept_e;
};

struct SearchTrace {
  std::vector<Probe> probes;  // distinct evaluations, in evaluation order
  std::vector<Index> dyadic_grid;
  Index k_star = 0;
  double k_star_value = 0.0;
  std::vector<BranchRecord> branch_log;
  Index bracket_s = 0;  // final base-case bracket (exclusive ends)
  Index bracket_e = 0;
};

struct SearchOutcome {
  Index theta_hat = 0;
  int q_hat = 0;
  SearchTrace trace;
};

using Evaluator = std::function<double(Index)>;

/// { floor(n/2^l), ceil(n - n/2^l) : l = 1..L }, L = floor(log2(n/(2 varpi))),
/// deduplicated and sorted. Requires varpi >= 1 and n >= 4 varpi.
std::vector<Index> dyadic_grid(Index n, Index varpi);

/// Advanced optimistic search: screen the dyadic grid, stop with (n, 0) if
/// the grid maximum does not exceed zeta, otherwise narrow down around the
/// grid maximiser with O(log n) memoised evaluations.
SearchOutcome optimistic_search(const Evaluator& eval, Index n, double zeta, Index varpi);

/// Divide-and-conquer phase from the bracket s < t < e: probe the wider side,
/// keep the side whose probe wins (probe wins ties), stop once e - s <= 5 and
/// return the smallest argmax over s+1..e-1. Probes and branches go to `trace`.
Index narrow_bracket(const Evaluator& eval, Index s, Index t, Index e, SearchTrace& trace);

/// Exhaustive argmax over varpi < k < n - varpi (smallest index on ties).
SearchOutcome full_grid(const Evaluator& eval, Index n, double zeta, Index varpi);

/// Upper bound on distinct evaluations made by optimistic_search.
Index evaluation_budget(Index n, Index varpi);

nlohmann::json to_json(const SearchTrace& trace);

}  // namespace cpscan
