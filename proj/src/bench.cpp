#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cpscan/harness.hpp"
#include "cpscan/rng.hpp"

namespace cpscan {

namespace {

using Clock = std::chrono::steady_clock;

// Dense change at n/3 so that both searches run past the grid screen.
Dataset bench_dataset(const BenchSize& size, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(size.n), static_cast<std::uint64_t>(size.p)}));
  Matrix x(size.n, size.p);
  Vector beta(size.p);
  for (Index j = 0; j < size.p; ++j) beta(j) = rng.normal();
  beta /= beta.norm();
  Vector y(size.n);
  const Index theta = size.n / 3;
  for (Index t = 0; t < size.n; ++t) {
    for (Index j = 0; j < size.p; ++j) x(t, j) = rng.normal();
    const double sign = t < theta ? 1.0 : -1.0;
    y(t) = sign * x.row(t).dot(beta) + rng.normal();
  }
  return Dataset(std::move(x), std::move(y));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace

std::vector<BenchEntry> run_bench(const std::vector<BenchSize>& sizes, int reps, double min_sample_us,
                                  std::uint64_t seed) {
  if (reps < 1) throw ConfigError("bench: reps must be >= 1");
  DetectorConfig cfg;
  cfg.calibration = ManualCalibration{};
  cfg.zeta_mc = 0.0;
  cfg.zeta_qc = 0.0;

  struct Slot {
    Dataset ds;
    PrefixSummaries ps;
    int pre_inner = 1;
    std::vector<double> pre_times, detect_times;
  };
  auto elapsed_us = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  };
  auto inner_for = [min_sample_us](double once) {
    int inner = 1;
    while (once * inner < min_sample_us && inner < (1 << 24)) inner *= 2;
    return inner;
  };

  std::vector<Slot> slots;
  std::vector<BenchEntry> entries;
  Index checksum = 0;
  for (const auto& size : sizes) {
    Dataset ds = bench_dataset(size, seed);
    // warm-up runs size the inner loops
    auto t0 = Clock::now();
    PrefixSummaries ps = precompute(ds);
    const double pre_once = elapsed_us(t0);
    t0 = Clock::now();
    checksum += run_ocscan(ps, cfg).theta_oc;
    const double detect_once = elapsed_us(t0);
    BenchEntry entry;
    entry.size = size;
    entry.reps = reps;
    entry.detect_inner_loops = inner_for(detect_once);
    entries.push_back(entry);
    slots.push_back({std::move(ds), std::move(ps), inner_for(pre_once), {}, {}});
  }

  // Sizes are interleaved so that machine-load drift hits all of them alike.
  for (int r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      Slot& slot = slots[i];
      auto t0 = Clock::now();
      for (int k = 0; k < slot.pre_inner; ++k) checksum += static_cast<Index>(precompute(slot.ds).r(1) > 0.0);
      slot.pre_times.push_back(elapsed_us(t0) / slot.pre_inner);

      const int inner = entries[i].detect_inner_loops;
      t0 = Clock::now();
      for (int k = 0; k < inner; ++k) checksum += run_ocscan(slot.ps, cfg).theta_oc;
      slot.detect_times.push_back(elapsed_us(t0) / inner);
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    entries[i].precompute_us = median(slots[i].pre_times);
    entries[i].detect_us = median(slots[i].detect_times);
    if (checksum == -1) entries[i].reps = 0;  // keeps the timed work observable
  }
  return entries;
}

std::vector<ScalingCheck> scaling_checks(const std::vector<BenchEntry>& entries) {
  std::vector<ScalingCheck> checks;
  auto add = [&checks](std::string label, double ratio, double lo, double hi) {
    checks.push_back({std::move(label), ratio, lo, hi, ratio >= lo && ratio <= hi});
  };
  for (const auto& a : entries) {
    for (const auto& b : entries) {
      const std::string from = std::to_string(a.size.n) + "x" + std::to_string(a.size.p);
      const std::string to = std::to_string(b.size.n) + "x" + std::to_string(b.size.p);
      if (b.size.n == 2 * a.size.n && b.size.p == a.size.p) {
        add("precompute n doubling " + from + " -> " + to, b.precompute_us / a.precompute_us, 1.6, 2.6);
        add("detection n doubling " + from + " -> " + to, b.detect_us / a.detect_us, 0.0, 1.5);
      } else if (b.size.p == 2 * a.size.p && b.size.n == a.size.n) {
        add("precompute p doubling " + from + " -> " + to, b.precompute_us / a.precompute_us, 1.6, 2.6);
        add("detection p doubling " + from + " -> " + to, b.detect_us / a.detect_us, 1.6, 2.6);
      }
    }
  }
  return checks;
}

std::string bench_json(const BenchReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"n", e.size.n},
                       {"p", e.size.p},
                       {"precompute_us", e.precompute_us},
                       {"detect_us", e.detect_us},
                       {"detect_inner_loops", e.detect_inner_loops},
                       {"reps", e.reps}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"label", c.label}, {"ratio", c.ratio}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}});
  }
  return nlohmann::json{{"entries", entries}, {"checks", checks}}.dump(2) + "\n";
}

}  // namespace cpscan
