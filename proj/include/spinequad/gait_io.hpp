#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spinequad/csv.hpp"
#include "spinequad/errors.hpp"
#include "spinequad/gait.hpp"

namespace spinequad {

// Contact log format: header `t,LF,RF,LH,RH`, one row per sample, contacts
// as 0/1. The time column is i*dt; dt is recovered on read.
inline void write_contact_csv(const ContactTimeline& tl,
                              const std::string& path) {
  validate_timeline(tl);
  auto out = csv::open_output(path);
  out << "t,LF,RF,LH,RH\n";
  for (int i = 0; i < tl.samples(); ++i) {
    out << csv::fmt(i * tl.dt);
    for (int f = 0; f < kNumLegs; ++f)
      out << ',' << (tl.contacts[i][f] ? '1' : '0');
    out << '\n';
  }
}

inline ContactTimeline read_contact_csv(const std::string& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path + ": empty contact log");
  if (line == "t,LF,RF,LH,RH\r") line.pop_back();
  if (line != "t,LF,RF,LH,RH")
    throw FormatError(path + ": expected header 't,LF,RF,LH,RH', got '" +
                      line + "'");

  ContactTimeline tl;
  std::vector<double> times;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (fields.size() != 5)
      throw FormatError(ctx + ": expected 5 fields, got " +
                        std::to_string(fields.size()));
    times.push_back(csv::parse_double(fields[0], ctx));
    std::array<bool, kNumLegs> row{};
    for (int f = 0; f < kNumLegs; ++f) {
      const std::string& v = fields[f + 1];
      if (v == "1")
        row[f] = true;
      else if (v == "0")
        row[f] = false;
      else
        throw FormatError(ctx + ": contact flags must be 0 or 1, got '" + v +
                          "'");
    }
    tl.contacts.push_back(row);
  }
  if (times.size() < 2)
    throw FormatError(path + ": need at least 2 samples");
  tl.dt = times[1] - times[0];
  if (!(tl.dt > 0.0))
    throw FormatError(path + ": time column must be strictly increasing");
  for (size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - tl.dt) > 1e-9 * std::max(1.0, tl.dt))
      throw FormatError(path + ": non-uniform sample interval near t=" +
                        csv::fmt(times[i]));
  }
  return tl;
}

// Gait diagram: per-foot contact intervals plus debounced aerial windows,
// one interval per row, suitable for bar-style gait plots. The leading
// comment line carries dt and the sample count so the boolean timeline can
// be reconstructed exactly from the foot intervals.
inline void emit_gait_diagram(const ContactTimeline& tl,
                              const std::string& path,
                              const AnalysisParams& params = {}) {
  validate_timeline(tl);
  auto out = csv::open_output(path);
  out << "# dt=" << csv::fmt(tl.dt) << " samples=" << tl.samples() << '\n';
  out << "track,start,end\n";

  auto emit_runs = [&](const std::string& name, auto&& active) {
    int i = 0;
    while (i < tl.samples()) {
      if (!active(i)) {
        ++i;
        continue;
      }
      int j = i;
      while (j < tl.samples() && active(j)) ++j;
      out << name << ',' << csv::fmt(i * tl.dt) << ',' << csv::fmt(j * tl.dt)
          << '\n';
      i = j;
    }
  };

  for (int f = 0; f < kNumLegs; ++f)
    emit_runs(foot_name(static_cast<FootIndex>(f)),
              [&, f](int i) { return tl.contacts[i][f]; });

  // Aerial windows use the same debounce as the analyzer so the diagram
  // matches the counted flight phases.
  const int need = gait_detail::debounce_samples(params.debounce_window, tl.dt);
  {
    auto airborne = [&](int i) {
      const auto& c = tl.contacts[i];
      return !c[0] && !c[1] && !c[2] && !c[3];
    };
    int i = 0;
    while (i < tl.samples()) {
      if (!airborne(i)) {
        ++i;
        continue;
      }
      int j = i;
      while (j < tl.samples() && airborne(j)) ++j;
      if (j - i >= need)
        out << "aerial," << csv::fmt(i * tl.dt) << ',' << csv::fmt(j * tl.dt)
            << '\n';
      i = j;
    }
  }
}

// Inverse of emit_gait_diagram: rebuilds the boolean timeline from the foot
// intervals (aerial rows are redundant and skipped).
inline ContactTimeline read_gait_diagram(const std::string& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path + ": empty gait diagram");
  double dt = 0.0;
  int samples = 0;
  if (std::sscanf(line.c_str(), "# dt=%lf samples=%d", &dt, &samples) != 2)
    throw FormatError(path + ": missing '# dt=... samples=...' metadata line");
  if (!(dt > 0.0) || samples < 2)
    throw FormatError(path + ": invalid metadata (dt=" + csv::fmt(dt) +
                      ", samples=" + std::to_string(samples) + ")");
  if (!std::getline(in, line) ||
      (line != "track,start,end" && line != "track,start,end\r"))
    throw FormatError(path + ": expected header 'track,start,end'");

  ContactTimeline tl;
  tl.dt = dt;
  tl.contacts.assign(samples, {});
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (fields.size() != 3)
      throw FormatError(ctx + ": expected 3 fields");
    if (fields[0] == "aerial") continue;
    int foot = -1;
    for (int f = 0; f < kNumLegs; ++f)
      if (fields[0] == foot_name(static_cast<FootIndex>(f))) foot = f;
    if (foot < 0)
      throw FormatError(ctx + ": unknown track '" + fields[0] + "'");
    const double start = csv::parse_double(fields[1], ctx);
    const double end = csv::parse_double(fields[2], ctx);
    const int i0 = static_cast<int>(std::llround(start / dt));
    const int i1 = static_cast<int>(std::llround(end / dt));
    if (i0 < 0 || i1 > samples || i0 >= i1)
      throw FormatError(ctx + ": interval outside the trace");
    for (int i = i0; i < i1; ++i) tl.contacts[i][foot] = true;
  }
  return tl;
}

}  // namespace spinequad
