#include "bootmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bootmatch/errors.hpp"

namespace bootmatch::matching {

namespace {

// "Next alive position >= i" with path compression; m is the none sentinel.
class NextAlive {
 public:
  explicit NextAlive(std::size_t m) : next_(m + 1) {
    for (std::size_t i = 0; i <= m; ++i) next_[i] = i;
  }
  std::size_t find(std::size_t i) {
    std::size_t root = i;
    while (next_[root] != root) root = next_[root];
    while (next_[i] != root) {
      const std::size_t hop = next_[i];
      next_[i] = root;
      i = hop;
    }
    return root;
  }
  void remove(std::size_t i) { next_[i] = i + 1; }

 private:
  std::vector<std::size_t> next_;
};

// "Largest alive position <= i"; -1 is the none sentinel (stored shifted).
class PrevAlive {
 public:
  explicit PrevAlive(std::size_t m) : prev_(m + 1) {
    for (std::size_t i = 0; i <= m; ++i) prev_[i] = i;
  }
  std::ptrdiff_t find(std::ptrdiff_t i) {
    std::size_t s = static_cast<std::size_t>(i + 1);
    std::size_t root = s;
    while (prev_[root] != root) root = prev_[root];
    while (prev_[s] != root) {
      const std::size_t hop = prev_[s];
      prev_[s] = root;
      s = hop;
    }
    return static_cast<std::ptrdiff_t>(root) - 1;
  }
  void remove(std::size_t i) { prev_[i + 1] = i; }

 private:
  std::vector<std::size_t> prev_;
};

struct Entry {
  double logit;
  std::size_t row;
};

}  // namespace

double logit(double p) { return std::log(p) - std::log1p(-p); }

std::optional<double> resolve_caliper(std::span<const double> scores,
                                      const CaliperPolicy& policy) {
  switch (policy.mode) {
    case CaliperPolicy::Mode::none:
      return std::nullopt;
    case CaliperPolicy::Mode::fixed:
      return policy.value;
    case CaliperPolicy::Mode::sd_multiple: {
      std::vector<double> logits(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) logits[i] = logit(scores[i]);
      return policy.value * std::sqrt(stats::sample_variance(logits));
    }
  }
  return std::nullopt;
}

MatchedSample nearest_neighbor_match(std::span<const double> scores,
                                     std::span<const std::uint8_t> groups,
                                     std::optional<double> caliper_logit) {
  if (scores.size() != groups.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and groups differ in length");
  }
  std::vector<Entry> treated;
  std::vector<Entry> controls;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Entry e{logit(scores[i]), i};
    if (groups[i] == 1) {
      treated.push_back(e);
    } else {
      controls.push_back(e);
    }
  }
  if (controls.empty()) throw Error(ErrorCode::NoControls, "no control subjects");
  if (treated.empty()) throw Error(ErrorCode::NoTreated, "no treated subjects");

  std::sort(controls.begin(), controls.end(), [](const Entry& a, const Entry& b) {
    return a.logit != b.logit ? a.logit < b.logit : a.row < b.row;
  });
  std::sort(treated.begin(), treated.end(), [](const Entry& a, const Entry& b) {
    return a.logit != b.logit ? a.logit > b.logit : a.row < b.row;
  });

  const std::size_t m = controls.size();
  std::vector<double> clogit(m);
  for (std::size_t i = 0; i < m; ++i) clogit[i] = controls[i].logit;

  NextAlive next_alive(m);
  PrevAlive prev_alive(m);

  MatchedSample out;
  out.caliper_logit = caliper_logit;
  out.pairs.reserve(std::min(treated.size(), m));
  std::size_t remaining = m;

  for (const Entry& t : treated) {
    if (remaining == 0) {
      ++out.unmatched_treated;
      continue;
    }
    const std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(clogit.begin(), clogit.end(), t.logit) - clogit.begin());
    const std::size_t right = next_alive.find(pos);
    const std::ptrdiff_t left =
        pos == 0 ? -1 : prev_alive.find(static_cast<std::ptrdiff_t>(pos) - 1);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double dist_right = kInf;
    double dist_left = kInf;
    std::size_t left_best = 0;
    if (right < m) dist_right = clogit[right] - t.logit;
    if (left >= 0) {
      dist_left = t.logit - clogit[static_cast<std::size_t>(left)];
      // Equal-logit controls share the distance; take the lowest surviving
      // row, which is the first alive slot of the run.
      const std::size_t run_start = static_cast<std::size_t>(
          std::lower_bound(clogit.begin(), clogit.begin() + left + 1,
                           clogit[static_cast<std::size_t>(left)]) -
          clogit.begin());
      left_best = next_alive.find(run_start);
    }

    std::size_t chosen;
    double dist;
    if (dist_left < dist_right) {
      chosen = left_best;
      dist = dist_left;
    } else if (dist_right < dist_left) {
      chosen = right;
      dist = dist_right;
    } else {
      chosen = controls[left_best].row < controls[right].row ? left_best : right;
      dist = dist_left;
    }

    if (caliper_logit && dist > *caliper_logit) {
      ++out.unmatched_treated;
      continue;
    }
    out.pairs.emplace_back(t.row, controls[chosen].row);
    out.max_pair_distance = std::max(out.max_pair_distance, dist);
    next_alive.remove(chosen);
    prev_alive.remove(chosen);
    --remaining;
  }

  if (out.pairs.empty()) {
    throw Error(ErrorCode::EmptyMatch, "no treated subject found a control within the caliper");
  }
  return out;
}

stats::TestResult balance_test(const PanelDataset& dataset, const MatchedSample& matched) {
  if (matched.pairs.empty()) {
    throw Error(ErrorCode::EmptyMatch, "balance test needs a nonempty matched sample");
  }
  std::vector<double> pre_t;
  std::vector<double> pre_c;
  pre_t.reserve(matched.pairs.size());
  pre_c.reserve(matched.pairs.size());
  for (const auto& [t_row, c_row] : matched.pairs) {
    pre_t.push_back(pre_period_mean(dataset, t_row));
    pre_c.push_back(pre_period_mean(dataset, c_row));
  }
  return stats::welch_t_test(pre_t, pre_c);
}

std::pair<std::vector<double>, std::vector<double>> daily_group_means(
    const PanelDataset& dataset, std::span<const std::size_t> rows_t,
    std::span<const std::size_t> rows_c) {
  if (rows_t.empty() || rows_c.empty()) {
    throw Error(ErrorCode::EmptyGroup, "daily_group_means needs nonempty row sets");
  }
  const std::size_t periods = dataset.n_periods();
  auto per_period_mean = [&](std::span<const std::size_t> rows) {
    std::vector<double> means(periods, 0.0);
    for (std::size_t row : rows) {
      if (row >= dataset.n_subjects()) {
        throw Error(ErrorCode::IndexOutOfBounds, "row " + std::to_string(row) + " out of bounds");
      }
      for (std::size_t l = 0; l < periods; ++l) means[l] += dataset.responses(row, l);
    }
    for (double& v : means) v /= static_cast<double>(rows.size());
    return means;
  };
  return {per_period_mean(rows_t), per_period_mean(rows_c)};
}

std::vector<double> matched_pre_period_differences(const PanelDataset& dataset,
                                                   const MatchedSample& matched) {
  if (matched.pairs.empty()) {
    throw Error(ErrorCode::EmptyMatch, "need a nonempty matched sample");
  }
  std::vector<std::size_t> rows_t;
  std::vector<std::size_t> rows_c;
  rows_t.reserve(matched.pairs.size());
  rows_c.reserve(matched.pairs.size());
  for (const auto& [t_row, c_row] : matched.pairs) {
    rows_t.push_back(t_row);
    rows_c.push_back(c_row);
  }
  auto [means_t, means_c] = daily_group_means(dataset, rows_t, rows_c);
  std::vector<double> diffs(dataset.pre_periods);
  for (std::size_t l = 0; l < dataset.pre_periods; ++l) diffs[l] = means_t[l] - means_c[l];
  return diffs;
}

}  // namespace bootmatch::matching
