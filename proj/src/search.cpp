#include "cpscan/search.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cpscan {

std::vector<Index> dyadic_grid(Index n, Index varpi) {
  if (varpi < 1 || n < 4 * varpi) {
    std::ostringstream msg;
    msg << "dyadic grid is empty for n = " << n << ", trimming = " << varpi << " (need n >= 4 * trimming >= 4)";
    throw ConfigError(msg.str());
  }
  // Largest L with 2^L * 2 varpi <= n, i.e. floor(log2(n / (2 varpi))).
  int levels = 0;
  while ((2 * varpi) << (levels + 1) <= n) ++levels;
  std::vector<Index> grid;
  grid.reserve(static_cast<std::size_t>(2 * levels));
  for (int l = 1; l <= levels; ++l) {
    const Index lower = n >> l;   // floor(n / 2^l)
    grid.push_back(lower);
    grid.push_back(n - lower);    // ceil(n - n / 2^l)
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Index evaluation_budget(Index n, Index varpi) {
  int levels = 0;
  while ((2 * varpi) << (levels + 1) <= n) ++levels;
  int ceil_log2 = 0;
  while ((Index{1} << ceil_log2) < n) ++ceil_log2;
  return 2 * levels + 3 * ceil_log2 + 5;
}

namespace {

class MemoEval {
 public:
  MemoEval(const Evaluator& eval, SearchTrace& trace) : eval_(eval), trace_(trace) {}

  double operator()(Index k) {
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const double v = eval_(k);
    cache_.emplace(k, v);
    trace_.probes.push_back({k, v});
    return v;
  }

 private:
  const Evaluator& eval_;
  SearchTrace& trace_;
  std::map<Index, double> cache_;
};

// Smallest index attaining the maximum over [first, last].
Index argmax_range(MemoEval& value, Index first, Index last) {
  Index best = first;
  double best_value = value(first);
  for (Index k = first + 1; k <= last; ++k) {
    const double v = value(k);
    if (v > best_value) {
      best = k;
      best_value = v;
    }
  }
  return best;
}

Index narrow(MemoEval& value, Index s, Index t, Index e, SearchTrace& trace) {
  while (e - s > 5) {
    if (!(s < t && t < e)) throw InternalError("optimistic search: probe left its bracket");
    if (e - t > t - s) {
      const Index w = e - (e - t) / 2;  // ceil(e - (e - t)/2)
      BranchRecord rec{s, t, e, w, 0, 0, 0};
      if (value(w) >= value(t)) {
        s = t;
        t = w;
      } else {
        e = w;
      }
      rec.kept_s = s;
      rec.kept_t = t;
      rec.kept_e = e;
      trace.branch_log.push_back(rec);
    } else {
      const Index w = s + (t - s) / 2;  // floor(s + (t - s)/2)
      BranchRecord rec{s, t, e, w, 0, 0, 0};
      if (value(w) >= value(t)) {
        e = t;
        t = w;
      } else {
        s = w;
      }
      rec.kept_s = s;
      rec.kept_t = t;
      rec.kept_e = e;
      trace.branch_log.push_back(rec);
    }
    if (e - s <= 2) throw InternalError("optimistic search: bracket collapsed below width 3");
  }
  trace.bracket_s = s;
  trace.bracket_e = e;
  return argmax_range(value, s + 1, e - 1);
}

}  // namespace

Index narrow_bracket(const Evaluator& eval, Index s, Index t, Index e, SearchTrace& trace) {
  if (!(s < t && t < e)) throw ConfigError("narrow_bracket needs s < t < e");
  MemoEval value(eval, trace);
  return narrow(value, s, t, e, trace);
}

SearchOutcome optimistic_search(const Evaluator& eval, Index n, double zeta, Index varpi) {
  SearchOutcome out;
  SearchTrace& trace = out.trace;
  MemoEval value(eval, trace);

  trace.dyadic_grid = dyadic_grid(n, varpi);
  Index k_star = trace.dyadic_grid.front();
  double best = value(k_star);
  for (std::size_t i = 1; i < trace.dyadic_grid.size(); ++i) {
    const Index k = trace.dyadic_grid[i];
    const double v = value(k);
    if (v > best) {
      best = v;
      k_star = k;
    }
  }
  trace.k_star = k_star;
  trace.k_star_value = best;

  if (!(best > zeta)) {
    out.theta_hat = n;
    out.q_hat = 0;
    return out;
  }

  Index a, b;
  if (2 * k_star <= n) {
    a = k_star / 2;
    b = 2 * k_star;
  } else {
    a = 2 * k_star - n;
    b = k_star + (n - k_star + 1) / 2;
  }
  // Keep every probe strictly inside the trimmed range while leaving k* interior.
  a = std::max(a, std::min(varpi + 1, k_star - 1));
  b = std::min(b, std::max(n - varpi - 1, k_star + 1));

  out.theta_hat = narrow(value, a, k_star, b, trace);
  out.q_hat = 1;
  return out;
}

SearchOutcome full_grid(const Evaluator& eval, Index n, double zeta, Index varpi) {
  const Index first = varpi + 1;
  const Index last = n - varpi - 1;
  if (varpi < 0 || first > last) {
    std::ostringstream msg;
    msg << "full grid: empty search range for n = " << n << ", trimming = " << varpi;
    throw ConfigError(msg.str());
  }
  SearchOutcome out;
  MemoEval value(eval, out.trace);
  const Index best = argmax_range(value, first, last);
  const double best_value = value(best);
  out.trace.k_star = best;
  out.trace.k_star_value = best_value;
  out.trace.bracket_s = first - 1;
  out.trace.bracket_e = last + 1;
  if (best_value > zeta) {
    out.theta_hat = best;
    out.q_hat = 1;
  } else {
    out.theta_hat = n;
    out.q_hat = 0;
  }
  return out;
}

nlohmann::json to_json(const SearchTrace& trace) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& pr : trace.probes) probes.push_back({{"k", pr.k}, {"value", pr.value}});
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : trace.branch_log) {
    branches.push_back({{"s", b.s},
                        {"t", b.t},
                        {"e", b.e},
                        {"w", b.w},
                        {"kept", {b.kept_s, b.kept_t, b.kept_e}}});
  }
  return {{"probes", probes},
          {"dyadic_grid", trace.dyadic_grid},
          {"k_star", trace.k_star},
          {"k_star_value", trace.k_star_value},
          {"branch_log", branches},
          {"final_bracket", {trace.bracket_s, trace.bracket_e}}};
}

}  // namespace cpscan
