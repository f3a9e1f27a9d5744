#pragma once

#include <cstdint>
#include <vector>

namespace mmh {

/// One queue observation: flow f at BS node on an active or backlogged path.
struct QueueRow {
  long slot = 0;
  int flow = -1;
  int node = -1;
  double q_bits = 0.0;
  double y = 0.0;  // flow virtual queue, normalized units
};

/// One allocation observation: power/rate granted to a link for a flow.
struct AllocRow {
  long slot = 0;
  int flow = -1;
  int from = -1;
  int to = -1;
  double power_w = 0.0;
  double rate_bits = 0.0;
  double slack_bits = 0.0;
};

/// Mixed strategy snapshot at a path re-selection boundary.
struct LearnerRow {
  long window = 0;
  long slot = 0;
  int flow = -1;
  std::vector<double> pi;
  double l1_step = 0.0;
};

struct ScaIterRow {
  long slot = 0;
  int iterations = 0;
  bool restored = false;
};

struct Trace {
  std::vector<QueueRow> queues;
  std::vector<AllocRow> allocs;
  std::vector<LearnerRow> learner;
  std::vector<ScaIterRow> sca;
};

}  // namespace mmh
