#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// A cascade counts as active while its latest event is at most this many
/// minutes old (12 hours).
inline constexpr double kActivityWindow = 720.0;

enum class CandidatePolicy {
  /// Every cascade posted before t whose observation window is still open.
  AllOpen,
  /// AllOpen, restricted to cascades that are active at t.
  ActiveOnly,
};

const char* to_string(CandidatePolicy policy);
CandidatePolicy candidate_policy_from_string(const std::string& name);

/// Indices of the feed's cascades that may be shown at clock time t.
std::vector<std::size_t> candidate_set(std::span<const Cascade> feed, double t,
                                       CandidatePolicy policy = CandidatePolicy::AllOpen);

struct ScoredCandidate {
  std::size_t index = 0;
  double score = 0.0;
  /// Clock time of the cascade's latest event before the ranking time.
  double last_event = 0.0;
  const std::string* id = nullptr;
};

/// Highest score first; ties go to the most recent event, then the smaller id.
std::vector<std::size_t> order_candidates(std::vector<ScoredCandidate> scored);

}  // namespace hawkesfeed
