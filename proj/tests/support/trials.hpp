#pragma once

// Hand-built trials and responses plus a closed-form kappa reference.

#include <string>
#include <vector>

#include "forumdiv/experiment.hpp"

namespace forumdiv::testing {

inline Trial make_trial(const std::string& id, double lambda, ListLabel mmr_list) {
  Trial t;
  t.trial_id = id;
  t.topic_id = "topic";
  t.question = "What do you think?";
  for (int i = 0; i < 5; ++i) {
    t.list_a.push_back({"a" + std::to_string(i), "text a" + std::to_string(i)});
    t.list_b.push_back({"b" + std::to_string(i), "text b" + std::to_string(i)});
  }
  t.probe_c = {"p", "probe text"};
  t.hidden = {mmr_list, lambda, 42};
  return t;
}

inline Response make_response(const std::string& trial, const std::string& subject, ListLabel inclusion,
                              ListLabel diversity, ListLabel redundancy) {
  return Response{trial, subject, Answers{inclusion, diversity, redundancy}, "2024-01-01T00:00:00Z"};
}

/// Two-category kappa from the 2x2 agreement table:
///   2(ad - bc) / ((a + b)(b + d) + (a + c)(c + d)).
inline double binary_kappa(const std::vector<ListLabel>& r1, const std::vector<ListLabel>& r2) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    const bool x = r1[i] == ListLabel::A;
    const bool y = r2[i] == ListLabel::A;
    (x && y ? a : x ? b : y ? c : d) += 1;
  }
  const double denom = (a + b) * (b + d) + (a + c) * (c + d);
  if (denom == 0.0) return (b + c) == 0.0 ? 1.0 : 0.0;
  return 2.0 * (a * d - b * c) / denom;
}

}  // namespace forumdiv::testing
