#include <cstdio>
#include <sstream>

#include "hypoloop/pipeline.hpp"

namespace hypoloop::pipeline {

namespace {

// Two decimals across every format, matching the precision the series is
// reported at.
std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Summary {
  double first_round_elo = 0.0;
  double final_round_elo = 0.0;
  double elo_delta = 0.0;  // final - first
  double delta_h = 0.0;    // H_T - H_0
};

Summary summarize(const RunState& state) {
  Summary s;
  bool seen_elo = false;
  for (const auto& r : state.records) {
    if (!r.elo_delta) continue;
    if (!seen_elo) {
      s.first_round_elo = *r.elo_delta;
      seen_elo = true;
    }
    s.final_round_elo = *r.elo_delta;
  }
  s.elo_delta = s.final_round_elo - s.first_round_elo;
  s.delta_h = state.records.back().shannon_entropy - state.records.front().shannon_entropy;
  return s;
}

}  // namespace

std::string report(const RunState& state, ReportFormat format) {
  if (state.records.empty()) throw Error(ErrorCode::EmptyState, "no rounds to report");
  Summary s = summarize(state);

  std::ostringstream out;
  switch (format) {
    case ReportFormat::Table: {
      out << "status: " << run_status_name(state.status) << "\n";
      out << "rounds: " << state.records.size() << " (round 0 is the proposal round)\n";
      out << "first-round ELO delta: " << fixed2(s.first_round_elo) << "\n";
      out << "final-round ELO delta: " << fixed2(s.final_round_elo) << "\n";
      out << "ELO delta (final - first): " << fixed2(s.elo_delta) << "\n";
      out << "entropy H_0: " << fixed2(state.records.front().shannon_entropy) << "\n";
      out << "entropy H_T: " << fixed2(state.records.back().shannon_entropy) << "\n";
      out << "delta H (H_T - H_0): " << fixed2(s.delta_h) << "\n";
      out << "\n";
      out << "round  entropy  elo_delta  refined\n";
      for (const auto& r : state.records) {
        char line[128];
        std::snprintf(line, sizeof(line), "%5d  %7.2f  %9s  %7zu\n", r.round, r.shannon_entropy,
                      r.elo_delta ? fixed2(*r.elo_delta).c_str() : "-", r.refinements.size());
        out << line;
      }
      break;
    }
    case ReportFormat::Csv: {
      out << "first_round_elo,final_round_elo,elo_delta,delta_h\n";
      out << fixed2(s.first_round_elo) << "," << fixed2(s.final_round_elo) << ","
          << fixed2(s.elo_delta) << "," << fixed2(s.delta_h) << "\n";
      out << "\n";
      out << "round,entropy,elo_delta,refined\n";
      for (const auto& r : state.records) {
        out << r.round << "," << fixed2(r.shannon_entropy) << ","
            << (r.elo_delta ? fixed2(*r.elo_delta) : "") << "," << r.refinements.size() << "\n";
      }
      break;
    }
    case ReportFormat::JsonLines: {
      out << "{\"type\":\"summary\",\"first_round_elo\":" << fixed2(s.first_round_elo)
          << ",\"final_round_elo\":" << fixed2(s.final_round_elo)
          << ",\"elo_delta\":" << fixed2(s.elo_delta) << ",\"delta_h\":" << fixed2(s.delta_h)
          << ",\"status\":\"" << run_status_name(state.status) << "\"}\n";
      for (const auto& r : state.records) {
        out << "{\"type\":\"round\",\"round\":" << r.round << ",\"entropy\":"
            << fixed2(r.shannon_entropy) << ",\"elo_delta\":"
            << (r.elo_delta ? fixed2(*r.elo_delta) : "null") << ",\"refined\":" << r.refinements.size()
            << "}\n";
      }
      break;
    }
  }
  return out.str();
}

}  // namespace hypoloop::pipeline
