#include "coinspect/engine.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace coinspect {

ScoreLedger::ScoreLedger(std::span<const InterestPoint> points, double quality_floor) : floor_(quality_floor) {
  ids_.reserve(points.size());
  records_.resize(points.size());
  for (const auto& p : points) {
    if (!index_.emplace(p.id, ids_.size()).second) throw ConfigError(fmt::format("duplicate interest point id {}", p.id));
    ids_.push_back(p.id);
  }
}

void ScoreLedger::update(std::span<const Observation> observations) {
  for (const auto& o : observations) {
    const auto it = index_.find(o.point_id);
    if (it == index_.end()) throw RangeError(fmt::format("observation of unknown interest point {}", o.point_id));
    // Strict: a frame exactly at the floor does not count.
    if (!(o.q > floor_)) continue;
    PointRecord& r = records_[it->second];
    ++r.count;
    if (o.q > r.best_q) {
      r.best_q = o.q;
      r.best_q_blur = o.q_blur;
      r.best_q_res = o.q_res;
      r.best_timestep = o.timestep;
      r.best_agent = o.agent_id;
    }
  }
}

const PointRecord& ScoreLedger::record(int point_id) const {
  const auto it = index_.find(point_id);
  if (it == index_.end()) throw RangeError(fmt::format("unknown interest point {}", point_id));
  return records_[it->second];
}

double ScoreLedger::score() const {
  double q = 0.0;
  for (const auto& r : records_) q += r.best_q;
  return q;
}

double ScoreLedger::average() const { return records_.empty() ? 0.0 : score() / static_cast<double>(records_.size()); }

std::size_t ScoreLedger::observed_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const PointRecord& r) { return r.count > 0; }));
}

ScoreLedger& update_ledger(ScoreLedger& ledger, std::span<const Observation> observations) {
  ledger.update(observations);
  return ledger;
}

double inspection_score(const ScoreLedger& ledger) { return ledger.score(); }

std::vector<IntensityRecord> intensity_heatmap(const ScoreLedger& ledger, const Scene& scene) {
  std::vector<IntensityRecord> out;
  out.reserve(scene.interest_points.size());
  for (const auto& p : scene.interest_points) {
    const PointRecord& r = ledger.record(p.id);
    out.push_back({p.id, p.position, p.normal, r.count, r.best_q});
  }
  return out;
}

std::vector<double> average_quality_trace(std::span<const Observation> log, std::span<const InterestPoint> points,
                                          double quality_floor, long ticks) {
  ScoreLedger ledger(points, quality_floor);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(std::max(ticks, 0L)));
  std::size_t i = 0;
  for (long k = 0; k < ticks; ++k) {
    std::size_t j = i;
    while (j < log.size() && log[j].timestep == k) ++j;
    ledger.update(log.subspan(i, j - i));
    i = j;
    trace.push_back(ledger.average());
  }
  return trace;
}

}  // namespace coinspect
