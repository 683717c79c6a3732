#pragma once

#include <filesystem>
#include <vector>

namespace latentforge {

struct TraceRow {
  long iter = 0;
  double score = 0.0;      // primary objective s
  double loss = 0.0;       // secondary loss l
  double lambda = 0.0;     // barrier coefficient
  double grad_norm_score = 0.0;
  double grad_norm_loss = 0.0;
};

/// Per-iteration optimization log. Iterations are strictly increasing and
/// start at 0.
class ScoreTrace {
 public:
  void append(const TraceRow& row);
  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<TraceRow> rows_;
};

/// CSV with header `iter,s,l,lambda,gnorm_s,gnorm_l`, one row per entry.
void write_trace_csv(const ScoreTrace& trace, const std::filesystem::path& path);

}  // namespace latentforge
