// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tempo/ioutil.hpp"

namespace tempo {

void validate(const QueueParams& p) {
  if (p.q_max_vph <= 0.0) throw std::invalid_argument("queue params: q_max must be positive");
  if (p.jam_density_vpkm <= 0.0)
    throw std::invalid_argument("queue params: jam density must be positive");
  if (p.critical_density_vpkm <= 0.0 || p.critical_density_vpkm >= p.jam_density_vpkm)
    throw std::invalid_argument(
        "queue params: critical density must lie strictly between zero and jam density");
  if (p.free_flow_kmh <= 0.0)
    throw std::invalid_argument("queue params: free-flow speed must be positive");
  if (p.mu1_vph < 0.0) throw std::invalid_argument("queue params: mu1 must be non-negative");
  if (p.mu2_vph <= 0.0) throw std::invalid_argument("queue params: mu2 must be positive");
  if (p.bottleneck_speed_kmh <= 0.0)
    throw std::invalid_argument("queue params: bottleneck speed must be positive");
  if (p.bottleneck_length_km < 0.0)
    throw std::invalid_argument("queue params: bottleneck length must be non-negative");
  if (p.t_f_hr < 0.0) throw std::invalid_argument("queue params: t_f must be non-negative");
}

ArrivalCurve::ArrivalCurve(std::vector<double> hourly_rates_vph, double start_clock,
                           double horizon_hr)
    : rates_(std::move(hourly_rates_vph)), start_clock_(start_clock), horizon_hr_(horizon_hr) {
  if (horizon_hr_ <= 0.0) throw std::invalid_argument("arrival curve: horizon must be positive");
  if (start_clock_ < 0.0 || start_clock_ >= 24.0)
    throw std::invalid_argument("arrival curve: start clock must lie in [0, 24)");
  const auto hours = static_cast<std::size_t>(std::ceil(horizon_hr_ - 1e-12));
  if (rates_.size() != hours)
    throw std::invalid_argument("arrival curve: need one hourly rate per hour of the horizon");
  for (double r : rates_)
    if (!(r >= 0.0)) throw std::invalid_argument("arrival curve: rates must be non-negative");
}

double ArrivalCurve::cumulative(double t_hr) const {
  if (t_hr < -1e-9 || t_hr > horizon_hr_ + 1e-9)
    throw std::invalid_argument("arrival curve: time outside [0, horizon]");
  t_hr = std::clamp(t_hr, 0.0, horizon_hr_);
  double total = 0.0;
  double t = t_hr;
  for (double r : rates_) {
    if (t <= 0.0) break;
    total += r * std::min(t, 1.0);
    t -= 1.0;
  }
  return total;
}

double ArrivalCurve::rate_at(double t_hr) const {
  if (t_hr < -1e-9 || t_hr > horizon_hr_ + 1e-9)
    throw std::invalid_argument("arrival curve: time outside [0, horizon]");
  auto idx = static_cast<std::size_t>(std::max(t_hr, 0.0));
  if (idx >= rates_.size()) idx = rates_.size() - 1;
  return rates_[idx];
}

std::vector<double> ArrivalCurve::breakpoints() const {
  std::vector<double> marks;
  for (double t = 0.0; t < horizon_hr_; t += 1.0) marks.push_back(t);
  marks.push_back(horizon_hr_);
  return marks;
}

ArrivalCurve build_arrivals(const std::vector<double>& flows_vph, double start_clock,
                            double horizon_hr) {
  if (flows_vph.empty()) throw std::invalid_argument("build_arrivals: need at least one flow");
  const auto hours = static_cast<std::size_t>(std::ceil(horizon_hr - 1e-12));
  std::vector<double> rates = flows_vph;
  if (rates.size() > hours) rates.resize(hours);
  while (rates.size() < hours) rates.push_back(flows_vph.back());
  return ArrivalCurve(std::move(rates), start_clock, horizon_hr);
}

std::vector<HourlyRow> hourly_table(const ArrivalCurve& arr) {
  std::vector<HourlyRow> rows;
  long cumulative = 0;
  const auto& rates = arr.hourly_rates();
  for (std::size_t h = 0; h < rates.size(); ++h) {
    HourlyRow row;
    row.from_clock = std::fmod(arr.start_clock() + static_cast<double>(h), 24.0);
    row.to_clock = std::fmod(arr.start_clock() + static_cast<double>(h) + 1.0, 24.0);
    row.flow_vph = rates[h];
    row.headway_min =
        rates[h] > 0.0 ? 60.0 / rates[h] : std::numeric_limits<double>::infinity();
    // Vehicle counts accumulate per published hourly totals: each hour is
    // rounded to whole vehicles before it enters the running sum.
    cumulative += std::lround(rates[h]);
    row.cumulative_veh = cumulative;
    rows.push_back(row);
  }
  return rows;
}

namespace {

// Linear interpolation of the cumulative arrival / departure curves between
// recorded breakpoints.
double interp_at(const std::vector<CurvePoint>& pts, double t_hr, bool departures) {
  if (pts.empty()) return 0.0;
  if (t_hr <= pts.front().t_hr)
    return departures ? pts.front().departures : pts.front().arrivals;
  if (t_hr >= pts.back().t_hr) return departures ? pts.back().departures : pts.back().arrivals;
  auto it = std::lower_bound(pts.begin(), pts.end(), t_hr,
                             [](const CurvePoint& p, double t) { return p.t_hr < t; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  if (hi.t_hr == lo.t_hr) return departures ? lo.departures : lo.arrivals;
  const double f = (t_hr - lo.t_hr) / (hi.t_hr - lo.t_hr);
  const double a = departures ? lo.departures : lo.arrivals;
  const double b = departures ? hi.departures : hi.arrivals;
  return a + f * (b - a);
}

// Earliest time at which the chosen curve reaches the given vehicle count.
double inverse_at(const std::vector<CurvePoint>& pts, double count, bool departures) {
  auto value = [&](const CurvePoint& p) { return departures ? p.departures : p.arrivals; };
  if (pts.empty() || count <= value(pts.front())) return pts.empty() ? 0.0 : pts.front().t_hr;
  if (count >= value(pts.back())) return pts.back().t_hr;
  auto it = std::lower_bound(pts.begin(), pts.end(), count,
                             [&](const CurvePoint& p, double c) { return value(p) < c; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  const double dv = value(hi) - value(lo);
  if (dv <= 0.0) return lo.t_hr;
  return lo.t_hr + (count - value(lo)) / dv * (hi.t_hr - lo.t_hr);
}

}  // namespace

IoDiagram io_diagram(const ArrivalCurve& arr, double closure_duration_hr,
                     const QueueParams& p) {
  validate(p);
  if (closure_duration_hr < 0.0)
    throw std::invalid_argument("io_diagram: closure duration must be non-negative");
  if (closure_duration_hr > arr.horizon_hr() + 1e-9)
    throw std::invalid_argument("io_diagram: closure outlasts the arrival horizon");

  // Fixed event times: arrival-rate changes plus the reopening instant.
  std::vector<double> events = arr.breakpoints();
  events.push_back(closure_duration_hr);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               events.end());

  IoDiagram dia;
  dia.start_clock = arr.start_clock();
  dia.closure_duration_hr = closure_duration_hr;
  dia.points.push_back({0.0, 0.0, 0.0});

  double t = 0.0;
  double queue = 0.0;
  bool cleared = closure_duration_hr == 0.0 && queue == 0.0;
  if (cleared) dia.clearance_offset_hr = 0.0;

  std::size_t next_event = 0;
  while (next_event < events.size() && events[next_event] <= t + 1e-12) ++next_event;

  while (!cleared && next_event <= events.size()) {
    const double te = next_event < events.size() ? events[next_event] : arr.horizon_hr();
    if (te <= t + 1e-12) {
      ++next_event;
      continue;
    }
    const double lambda = arr.rate_at(t + 1e-9 > arr.horizon_hr() ? arr.horizon_hr() : t + 1e-9);
    const double mu = t < closure_duration_hr - 1e-12 ? p.mu1_vph : p.mu2_vph;
    const double slope = lambda - mu;

    double t_end = te;
    if (queue > 1e-9 && slope < 0.0 && queue + slope * (te - t) < -1e-12) {
      t_end = t + queue / (mu - lambda);  // queue drains to zero mid-interval
    }
    if (queue <= 1e-9 && slope <= 0.0) {
      // No queue and the section keeps up: departures shadow arrivals.
      queue = 0.0;
      t = t_end;
      dia.points.push_back({t, arr.cumulative(t), arr.cumulative(t)});
    } else {
      queue = std::max(queue + slope * (t_end - t), 0.0);
      t = t_end;
      dia.points.push_back({t, arr.cumulative(t), arr.cumulative(t) - queue});
    }
    if (t >= closure_duration_hr - 1e-12 && queue <= 1e-9) {
      cleared = true;
      dia.clearance_offset_hr = std::max(t, closure_duration_hr);
      break;
    }
    if (t_end == te) ++next_event;
    if (next_event > events.size() || t >= arr.horizon_hr() - 1e-12) break;
  }

  if (!cleared)
    throw std::runtime_error("io_diagram: queue does not clear within the arrival horizon");
  return dia;
}

namespace {

// Piecewise-linear pieces of the per-vehicle delay, indexed by cumulative
// vehicle count. Breakpoints of either curve delimit the pieces.
struct DelayPiece {
  double n0 = 0.0, n1 = 0.0;  // vehicle-count range
  double w0 = 0.0, w1 = 0.0;  // delay (hours) at the range ends
};

std::vector<DelayPiece> delay_pieces(const IoDiagram& dia) {
  std::vector<double> counts;
  for (const CurvePoint& pt : dia.points) {
    counts.push_back(pt.arrivals);
    counts.push_back(pt.departures);
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               counts.end());
  std::vector<DelayPiece> pieces;
  for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
    DelayPiece piece;
    piece.n0 = counts[i];
    piece.n1 = counts[i + 1];
    piece.w0 = inverse_at(dia.points, piece.n0, true) - inverse_at(dia.points, piece.n0, false);
    piece.w1 = inverse_at(dia.points, piece.n1, true) - inverse_at(dia.points, piece.n1, false);
    pieces.push_back(piece);
  }
  return pieces;
}

// Measure of delayed vehicles whose delay is at most w (hours).
double delayed_at_most(const std::vector<DelayPiece>& pieces, double w) {
  double measure = 0.0;
  for (const DelayPiece& pc : pieces) {
    if (std::max(pc.w0, pc.w1) <= 1e-12) continue;  // undelayed stretch
    const double lo = std::min(pc.w0, pc.w1);
    const double hi = std::max(pc.w0, pc.w1);
    const double len = pc.n1 - pc.n0;
    if (w >= hi)
      measure += len;
    else if (w > lo && hi > lo)
      measure += len * (w - lo) / (hi - lo);
  }
  return measure;
}

double max_horizontal_gap_hr(const IoDiagram& dia) {
  // Identical all-zero curves carry no vehicles, so nothing waits.
  if (dia.points.empty() || dia.points.back().arrivals <= 1e-12) return 0.0;
  double max_gap = 0.0;
  for (const CurvePoint& pt : dia.points) {
    // Vehicle that departs at this breakpoint: how long ago did it arrive?
    max_gap = std::max(max_gap, pt.t_hr - inverse_at(dia.points, pt.departures, false));
    // Vehicle that arrives at this breakpoint: how long until it departs?
    max_gap = std::max(max_gap, inverse_at(dia.points, pt.arrivals, true) - pt.t_hr);
  }
  return max_gap;
}

}  // namespace

DelayResult io_delay(const ArrivalCurve& arr, double closure_duration_hr,
                     const QueueParams& p) {
  const IoDiagram dia = io_diagram(arr, closure_duration_hr, p);
  DelayResult res;
  res.clearance_offset_hr = dia.clearance_offset_hr;
  res.clearance_clock = std::fmod(dia.start_clock + dia.clearance_offset_hr, 24.0);
  res.bottleneck_traversal_min = 60.0 * p.bottleneck_length_km / p.bottleneck_speed_kmh;

  for (std::size_t i = 0; i + 1 < dia.points.size(); ++i) {
    const CurvePoint& a = dia.points[i];
    const CurvePoint& b = dia.points[i + 1];
    const double gap_a = a.arrivals - a.departures;
    const double gap_b = b.arrivals - b.departures;
    res.total_delay_veh_hr += 0.5 * (gap_a + gap_b) * (b.t_hr - a.t_hr);
    // Vehicles arriving while a queue stands are the delayed ones.
    if (gap_a > 1e-9 || gap_b > 1e-9) res.delayed_vehicles += b.arrivals - a.arrivals;
    res.max_queue_veh = std::max(res.max_queue_veh, std::max(gap_a, gap_b));
  }
  res.max_queue_km = res.max_queue_veh / p.jam_density_vpkm;
  res.max_delay_min = 60.0 * max_horizontal_gap_hr(dia);
  res.avg_delay_min =
      res.delayed_vehicles > 0.0 ? 60.0 * res.total_delay_veh_hr / res.delayed_vehicles : 0.0;
  if (p.include_bottleneck_traversal) {
    if (res.max_delay_min > 0.0) res.max_delay_min += res.bottleneck_traversal_min;
    if (res.avg_delay_min > 0.0) res.avg_delay_min += res.bottleneck_traversal_min;
  }
  return res;
}

double queue_extent_km(const DelayResult& res, int lanes, const QueueParams& p) {
  if (lanes < 1) throw std::invalid_argument("queue_extent_km: lanes must be >= 1");
  const double density =
      p.jam_density_per_lane ? p.jam_density_vpkm * lanes : p.jam_density_vpkm;
  return res.max_queue_veh / density;
}

std::string_view to_string(DelayStatistic s) {
  switch (s) {
    case DelayStatistic::average_over_delayed: return "average";
    case DelayStatistic::maximum: return "maximum";
    case DelayStatistic::percentile: return "percentile";
  }
  return "maximum";
}

DelayStatistic delay_statistic_from_string(std::string_view s) {
  if (s == "average" || s == "average_over_delayed") return DelayStatistic::average_over_delayed;
  if (s == "maximum" || s == "max") return DelayStatistic::maximum;
  if (s == "percentile") return DelayStatistic::percentile;
  throw std::runtime_error("unknown delay statistic: '" + std::string(s) + "'");
}

double delay_statistic_min(const DelayResult& res, const IoDiagram& dia, DelayStatistic stat,
                           double percentile) {
  switch (stat) {
    case DelayStatistic::average_over_delayed: return res.avg_delay_min;
    case DelayStatistic::maximum: return res.max_delay_min;
    case DelayStatistic::percentile: break;
  }
  if (percentile <= 0.0 || percentile >= 1.0)
    throw std::invalid_argument("delay percentile must lie in (0, 1)");
  const std::vector<DelayPiece> pieces = delay_pieces(dia);
  const double pure_max = 60.0 * max_horizontal_gap_hr(dia);
  double delayed = 0.0;
  for (const DelayPiece& pc : pieces)
    if (std::max(pc.w0, pc.w1) > 1e-12) delayed += pc.n1 - pc.n0;
  if (delayed <= 0.0) return 0.0;
  // Bisect the delay level whose cumulative share of delayed vehicles hits
  // the requested percentile; the distribution is piecewise linear, so this
  // converges to machine precision.
  double lo = 0.0;
  double hi = pure_max / 60.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (delayed_at_most(pieces, mid) / delayed < percentile)
      lo = mid;
    else
      hi = mid;
  }
  // Keep any traversal offset folded into the published statistics.
  const double extra = std::max(res.max_delay_min - pure_max, 0.0);
  return 60.0 * hi + extra;
}

std::vector<BracketSweepEntry> bracket_delay_sweep(const ArrivalCurve& arr,
                                                   const QueueParams& p,
                                                   const std::vector<DurationBracket>& brackets,
                                                   const std::vector<double>& target_delays_min) {
  if (brackets.empty()) throw std::invalid_argument("bracket sweep: no brackets given");
  if (!target_delays_min.empty() && target_delays_min.size() != brackets.size())
    throw std::invalid_argument("bracket sweep: need one target per bracket");
  for (const DurationBracket& b : brackets)
    if (!(b.hi_hr > b.lo_hr) || b.lo_hr < 0.0)
      throw std::invalid_argument("bracket sweep: brackets must satisfy 0 <= lo < hi");

  const DelayStatistic stats[] = {DelayStatistic::average_over_delayed, DelayStatistic::maximum};
  const double fractions[] = {0.25, 0.5, 0.75, 1.0};
  std::vector<BracketSweepEntry> entries;
  for (DelayStatistic stat : stats) {
    for (double f : fractions) {
      for (bool traversal : {false, true}) {
        BracketSweepEntry e;
        e.statistic = stat;
        e.rep_fraction = f;
        e.traversal = traversal;
        QueueParams q = p;
        q.include_bottleneck_traversal = traversal;
        for (std::size_t i = 0; i < brackets.size(); ++i) {
          const double duration = brackets[i].lo_hr + f * (brackets[i].hi_hr - brackets[i].lo_hr);
          const DelayResult res = io_delay(arr, duration, q);
          const double d = stat == DelayStatistic::maximum ? res.max_delay_min : res.avg_delay_min;
          e.delays_min.push_back(d);
          if (!target_delays_min.empty() && target_delays_min[i] > 0.0)
            e.max_rel_err =
                std::max(e.max_rel_err, std::abs(d - target_delays_min[i]) / target_delays_min[i]);
        }
        entries.push_back(std::move(e));
      }
    }
  }
  if (!target_delays_min.empty())
    std::stable_sort(entries.begin(), entries.end(),
                     [](const BracketSweepEntry& a, const BracketSweepEntry& b) {
                       return a.max_rel_err < b.max_rel_err;
                     });
  return entries;
}

void write_curve_csv(const IoDiagram& dia, const std::string& path) {
  std::vector<double> times;
  for (const CurvePoint& pt : dia.points) times.push_back(pt.t_hr);
  const double t_end = dia.points.empty() ? 0.0 : dia.points.back().t_hr;
  for (long k = 0; k * 60 <= static_cast<long>(std::floor(t_end * 3600.0)); ++k)
    times.push_back(static_cast<double>(k) / 60.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              times.end());

  std::ostringstream out;
  out << "t_hr,N_arrivals,D_departures,queue_veh\n";
  for (double t : times) {
    const long n = std::lround(interp_at(dia.points, t, false));
    const long d = std::lround(interp_at(dia.points, t, true));
    out << num_str(dia.start_clock + t) << ',' << n << ',' << d << ',' << std::max(n - d, 0L)
        << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace tempo
