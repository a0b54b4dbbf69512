#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"
#include "spinequad/reward.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

// Boolean per-foot contact series sampled at a fixed interval. Column order
// is LF, RF, LH, RH (FootIndex).
struct ContactTimeline {
  double dt = 0.02;
  std::vector<std::array<bool, kNumLegs>> contacts;

  int samples() const { return static_cast<int>(contacts.size()); }
  double duration() const { return samples() * dt; }
};

inline void validate_timeline(const ContactTimeline& tl) {
  if (!(tl.dt > 0.0))
    throw ValidationError("contact timeline: dt must be > 0");
  if (tl.samples() < 2)
    throw ValidationError("contact timeline: need at least 2 samples");
}

enum class GaitFamily {
  kTrot,
  kBound,
  kPace,
  kTransverseGallop,
  kRotaryGallop,
  kOther,
};

// Aerial-phase subclass: no flight, gathered suspension, extended
// suspension, double-flight, or unclassifiable.
enum class AerialClass { kG0, kGG, kGE, kG2, kNone };

inline std::string to_string(GaitFamily f) {
  switch (f) {
    case GaitFamily::kTrot: return "trot";
    case GaitFamily::kBound: return "bound";
    case GaitFamily::kPace: return "pace";
    case GaitFamily::kTransverseGallop: return "transverse_gallop";
    case GaitFamily::kRotaryGallop: return "rotary_gallop";
    case GaitFamily::kOther: return "other";
  }
  return "other";
}

inline std::string to_string(AerialClass c) {
  switch (c) {
    case AerialClass::kG0: return "G0";
    case AerialClass::kGG: return "GG";
    case AerialClass::kGE: return "GE";
    case AerialClass::kG2: return "G2";
    case AerialClass::kNone: return "none";
  }
  return "none";
}

inline std::string foot_name(FootIndex f) {
  switch (f) {
    case kFootLF: return "LF";
    case kFootRF: return "RF";
    case kFootLH: return "LH";
    case kFootRH: return "RH";
  }
  return "?";
}

struct GaitLabel {
  GaitFamily family = GaitFamily::kOther;
  AerialClass aerial_class = AerialClass::kNone;
  std::array<FootIndex, 4> footfall_order{kFootLH, kFootRH, kFootRF, kFootLF};
  double front_offset = 0.0;  // cycle fraction between LF/RF touchdowns
  double rear_offset = 0.0;   // cycle fraction between LH/RH touchdowns
  std::array<double, 4> duty_factor{};
  double stride_period = 0.0;       // s
  double aerial_per_cycle = 0.0;    // measured (possibly fractional) count
};

// Tunables of the analysis pipeline. The debounce window is specified in
// seconds so results don't change when a trace is resampled at a finer rate.
struct AnalysisParams {
  double debounce_window = 0.06;  // s (3 samples at 50 Hz)
  double sync_tol = 0.05;         // cycle fraction treated as "synchronous"
};

namespace gait_detail {

inline int debounce_samples(double window, double dt) {
  return std::max(1, static_cast<int>(std::llround(window / dt)));
}

// Circular mean of phases in [0,1); returns a value in [0,1).
inline double circular_mean_phase(const std::vector<double>& phases) {
  double c = 0.0, s = 0.0;
  for (double p : phases) {
    c += std::cos(2.0 * kPi * p);
    s += std::sin(2.0 * kPi * p);
  }
  if (std::hypot(c, s) < 1e-12) return 0.5;  // degenerate spread
  double m = std::atan2(s, c) / (2.0 * kPi);
  if (m < 0.0) m += 1.0;
  return m;
}

}  // namespace gait_detail

// Rising edges per foot, debounced: a touchdown is a false→true transition
// whose preceding false run lasted at least the debounce window. Returns
// event times i*dt per foot. Contact at sample 0 is not an event (there is
// no preceding swing to confirm it).
inline std::array<std::vector<double>, kNumLegs> detect_touchdowns(
    const ContactTimeline& tl, const AnalysisParams& params = {}) {
  validate_timeline(tl);
  const int need =
      gait_detail::debounce_samples(params.debounce_window, tl.dt);
  std::array<std::vector<double>, kNumLegs> events;
  for (int f = 0; f < kNumLegs; ++f) {
    int false_run = 0;
    for (int i = 0; i < tl.samples(); ++i) {
      const bool c = tl.contacts[i][f];
      if (c) {
        if (i > 0 && !tl.contacts[i - 1][f] && false_run >= need)
          events[f].push_back(i * tl.dt);
        false_run = 0;
      } else {
        ++false_run;
      }
    }
  }
  return events;
}

// Pooled median of consecutive same-foot touchdown intervals. Robust to a
// few irregular strides; needs at least one foot with three touchdowns.
inline double estimate_stride_period(
    const std::array<std::vector<double>, kNumLegs>& events) {
  std::vector<double> intervals;
  bool any_foot_ok = false;
  for (const auto& ev : events) {
    if (ev.size() >= 3) any_foot_ok = true;
    for (size_t i = 1; i < ev.size(); ++i)
      intervals.push_back(ev[i] - ev[i - 1]);
  }
  if (!any_foot_ok || intervals.empty())
    throw AnalysisError(
        "stride period: need at least one foot with 3 touchdowns");
  std::sort(intervals.begin(), intervals.end());
  const size_t n = intervals.size();
  if (n % 2 == 1) return intervals[n / 2];
  return 0.5 * (intervals[n / 2 - 1] + intervals[n / 2]);
}

// Mean phase lag, in cycle fractions, from each lead touchdown to its
// nearest trail touchdown; averaged circularly so lags near 0.95 don't
// cancel against lags near 0.05.
inline double pair_phase_offset(const std::vector<double>& lead_events,
                                const std::vector<double>& trail_events,
                                double period) {
  if (!(period > 0.0))
    throw ArgumentError("pair_phase_offset: period must be > 0");
  if (lead_events.empty() || trail_events.empty())
    throw AnalysisError("pair_phase_offset: empty event list");
  std::vector<double> offsets;
  offsets.reserve(lead_events.size());
  for (double tl_ : lead_events) {
    double best = trail_events.front();
    for (double tt : trail_events)
      if (std::abs(tt - tl_) < std::abs(best - tl_)) best = tt;
    double o = std::fmod((best - tl_) / period, 1.0);
    if (o < 0.0) o += 1.0;
    offsets.push_back(o);
  }
  return gait_detail::circular_mean_phase(offsets);
}

struct AerialPhaseReport {
  int runs = 0;               // debounced all-feet-airborne runs in the trace
  double per_cycle = 0.0;     // runs divided by the number of stride cycles
  AerialClass cls = AerialClass::kNone;
};

// Counts maximal all-false runs lasting at least the debounce window and
// classifies: 0 per cycle → G0, 2 → G2. A single flight per cycle is split
// by which girdle left the ground last: a fore foot in the final contact
// sample means the body was extended at lift-off (GE); hind-only contact
// means it was gathered (GG).
inline AerialPhaseReport count_aerial_phases(const ContactTimeline& tl,
                                             double period,
                                             const AnalysisParams& params = {}) {
  validate_timeline(tl);
  if (!(period > 0.0))
    throw ArgumentError("count_aerial_phases: period must be > 0");
  const int need =
      gait_detail::debounce_samples(params.debounce_window, tl.dt);

  auto airborne = [&](int i) {
    const auto& c = tl.contacts[i];
    return !c[0] && !c[1] && !c[2] && !c[3];
  };

  AerialPhaseReport rep;
  int ge_votes = 0, gg_votes = 0;
  int i = 0;
  while (i < tl.samples()) {
    if (!airborne(i)) {
      ++i;
      continue;
    }
    int j = i;
    while (j < tl.samples() && airborne(j)) ++j;
    if (j - i >= need) {
      ++rep.runs;
      if (i > 0) {
        const auto& last = tl.contacts[i - 1];
        if (last[kFootLF] || last[kFootRF])
          ++ge_votes;
        else
          ++gg_votes;
      }
    }
    i = j;
  }

  const double cycles = tl.duration() / period;
  rep.per_cycle = cycles > 0.0 ? rep.runs / cycles : 0.0;
  const long rounded = std::llround(rep.per_cycle);
  if (rounded == 0)
    rep.cls = AerialClass::kG0;
  else if (rounded == 2)
    rep.cls = AerialClass::kG2;
  else if (rounded == 1)
    rep.cls = ge_votes >= gg_votes ? AerialClass::kGE : AerialClass::kGG;
  else
    rep.cls = AerialClass::kNone;
  return rep;
}

// Per-foot fraction of time in contact. For (near-)periodic traces this
// equals the duty factor per stride cycle; `period` is only validated, the
// estimate itself is the whole-trace sample fraction.
inline std::array<double, kNumLegs> duty_factors(const ContactTimeline& tl,
                                                 double period) {
  validate_timeline(tl);
  if (!(period > 0.0))
    throw ArgumentError("duty_factors: period must be > 0");
  std::array<double, kNumLegs> duty{};
  for (int f = 0; f < kNumLegs; ++f) {
    int on = 0;
    for (int i = 0; i < tl.samples(); ++i)
      if (tl.contacts[i][f]) ++on;
    duty[f] = static_cast<double>(on) / tl.samples();
  }
  return duty;
}

namespace gait_detail {

// Lead/trail-resolved touchdown offset within a foot pair: the lead is the
// member whose touchdowns come first, so the returned offset lies in
// [0, 0.5] and compares directly against the reward targets.
inline double resolved_pair_offset(
    const std::array<std::vector<double>, kNumLegs>& events, FootIndex a,
    FootIndex b, double period) {
  const double o_ab = pair_phase_offset(events[a], events[b], period);
  if (o_ab <= 0.5) return o_ab;
  return pair_phase_offset(events[b], events[a], period);
}

inline bool is_rotation(const std::array<FootIndex, 4>& order,
                        const std::array<FootIndex, 4>& candidate) {
  for (int shift = 0; shift < 4; ++shift) {
    bool match = true;
    for (int i = 0; i < 4; ++i)
      if (order[i] != candidate[(i + shift) % 4]) match = false;
    if (match) return true;
  }
  return false;
}

}  // namespace gait_detail

// Full pipeline: touchdowns → stride period → pair offsets, duty factors,
// footfall order → family + aerial class. Needs roughly three full strides
// of data.
inline GaitLabel classify_gait(const ContactTimeline& tl,
                               const AnalysisParams& params = {}) {
  validate_timeline(tl);
  const auto events = detect_touchdowns(tl, params);
  for (int f = 0; f < kNumLegs; ++f)
    if (events[f].size() < 2)
      throw AnalysisError("classify_gait: need >= 3 full strides (foot " +
                          foot_name(static_cast<FootIndex>(f)) +
                          " has too few touchdowns)");
  const double period = estimate_stride_period(events);
  if (tl.duration() < 3.0 * period)
    throw AnalysisError("classify_gait: need >= 3 full strides in the trace");

  GaitLabel label;
  label.stride_period = period;
  label.duty_factor = duty_factors(tl, period);
  label.front_offset =
      gait_detail::resolved_pair_offset(events, kFootLF, kFootRF, period);
  label.rear_offset =
      gait_detail::resolved_pair_offset(events, kFootLH, kFootRH, period);

  // Mean touchdown phase per foot against a common origin; the cyclic order
  // of these phases is the footfall order.
  std::array<double, kNumLegs> phase{};
  for (int f = 0; f < kNumLegs; ++f) {
    std::vector<double> ph;
    ph.reserve(events[f].size());
    for (double t : events[f]) {
      double p = std::fmod(t / period, 1.0);
      if (p < 0.0) p += 1.0;
      ph.push_back(p);
    }
    phase[f] = gait_detail::circular_mean_phase(ph);
  }
  std::array<FootIndex, 4> order = {kFootLF, kFootRF, kFootLH, kFootRH};
  std::sort(order.begin(), order.end(), [&](FootIndex a, FootIndex b) {
    return phase[a] < phase[b];
  });
  label.footfall_order = order;

  const double tol = params.sync_tol;
  auto dist = [&](FootIndex a, FootIndex b) {
    return phase_distance(phase[a], phase[b]);
  };
  const bool front_sync = dist(kFootLF, kFootRF) < tol;
  const bool rear_sync = dist(kFootLH, kFootRH) < tol;
  const bool diag_sync =
      dist(kFootLF, kFootRH) < tol && dist(kFootRF, kFootLH) < tol;
  const bool lateral_sync =
      dist(kFootLF, kFootLH) < tol && dist(kFootRF, kFootRH) < tol;
  // Girdle alternation: the front pair's phase is well away from the rear
  // pair's (rules out pronking).
  const bool girdles_alternate = dist(kFootLF, kFootLH) >= tol;

  using A = std::array<FootIndex, 4>;
  const A rotary{kFootLH, kFootRH, kFootRF, kFootLF};
  const A rotary_mirror{kFootRH, kFootLH, kFootLF, kFootRF};
  const A transverse{kFootLH, kFootRH, kFootLF, kFootRF};
  const A transverse_mirror{kFootRH, kFootLH, kFootRF, kFootLF};

  if (diag_sync && !front_sync) {
    label.family = GaitFamily::kTrot;
  } else if (lateral_sync && !front_sync) {
    label.family = GaitFamily::kPace;
  } else if (front_sync && rear_sync && girdles_alternate) {
    label.family = GaitFamily::kBound;
  } else if (!front_sync && !rear_sync &&
             (gait_detail::is_rotation(order, rotary) ||
              gait_detail::is_rotation(order, rotary_mirror))) {
    label.family = GaitFamily::kRotaryGallop;
  } else if (!front_sync && !rear_sync &&
             (gait_detail::is_rotation(order, transverse) ||
              gait_detail::is_rotation(order, transverse_mirror))) {
    label.family = GaitFamily::kTransverseGallop;
  } else {
    label.family = GaitFamily::kOther;
  }

  const AerialPhaseReport aerial = count_aerial_phases(tl, period, params);
  label.aerial_class = aerial.cls;
  label.aerial_per_cycle = aerial.per_cycle;
  return label;
}

// Convenience for live reward computation over a rolling contact window:
// returns false (leaving offsets untouched) until the window holds enough
// touchdowns to analyze.
inline bool measure_pair_offsets(const ContactTimeline& tl,
                                 double& front_offset, double& rear_offset,
                                 const AnalysisParams& params = {}) {
  if (tl.samples() < 2) return false;
  try {
    const auto events = detect_touchdowns(tl, params);
    for (int f = 0; f < kNumLegs; ++f)
      if (events[f].empty()) return false;
    const double period = estimate_stride_period(events);
    front_offset =
        gait_detail::resolved_pair_offset(events, kFootLF, kFootRF, period);
    rear_offset =
        gait_detail::resolved_pair_offset(events, kFootLH, kFootRH, period);
    return true;
  } catch (const AnalysisError&) {
    return false;
  }
}

}  // namespace spinequad
