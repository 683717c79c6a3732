#include "latentforge/trace.hpp"

#include <fstream>
#include <stdexcept>

#include "latentforge/csv.hpp"

namespace latentforge {

void ScoreTrace::append(const TraceRow& row) {
  if (rows_.empty()) {
    if (row.iter != 0)
      throw std::invalid_argument("ScoreTrace: first iteration must be 0");
  } else if (row.iter <= rows_.back().iter) {
    throw std::invalid_argument("ScoreTrace: iterations must strictly increase");
  }
  rows_.push_back(row);
}

void write_trace_csv(const ScoreTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "iter,s,l,lambda,gnorm_s,gnorm_l\n";
  for (const TraceRow& row : trace.rows()) {
    out << row.iter << ',' << format_double(row.score) << ','
        << format_double(row.loss) << ',' << format_double(row.lambda) << ','
        << format_double(row.grad_norm_score) << ','
        << format_double(row.grad_norm_loss) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace latentforge
