#include "d2dlab/mcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace d2dlab {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

McsTable McsTable::lte_default() {
  // SNR thresholds (dB, with implementation margin) and bits per symbol for
  // QPSK/16QAM/64QAM at the usual coding rates.
  static const struct {
    double snr_db;
    double rate;
  } rows[] = {
      {-2.6, 0.25}, {-0.4, 0.4},  {0.8, 0.5},   {1.5, 0.67},  {4.5, 1.0},
      {6.8, 1.3},   {8.0, 1.5},   {8.7, 1.6},   {10.9, 2.0},  {14.3, 2.66},
      {15.2, 3.0},  {15.8, 3.2},  {19.3, 4.0},  {21.5, 4.5},  {22.6, 4.8},
  };
  std::vector<McsEntry> entries;
  entries.push_back({0.0, 0.0});  // outage
  for (const auto& r : rows) entries.push_back({db_to_linear(r.snr_db), r.rate});
  return McsTable(std::move(entries));
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) throw std::invalid_argument("mcs: table needs outage level plus at least one rate");
  if (entries_[0].threshold != 0.0 || entries_[0].rate != 0.0)
    throw std::invalid_argument("mcs: level 0 must be the zero-rate outage level");
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    if (!(entries_[k].threshold > entries_[k - 1].threshold))
      throw std::invalid_argument("mcs: thresholds must be strictly increasing");
    if (!(entries_[k].rate > entries_[k - 1].rate))
      throw std::invalid_argument("mcs: rates must be strictly increasing");
  }
}

double McsTable::upper(std::size_t k) const {
  return k + 1 < entries_.size() ? entries_[k + 1].threshold
                                 : std::numeric_limits<double>::infinity();
}

std::size_t McsTable::level_for(double snr) const {
  // First entry with threshold > snr, minus one. Exact threshold hits map to
  // the level that starts there.
  auto it = std::upper_bound(entries_.begin(), entries_.end(), snr,
                             [](double v, const McsEntry& e) { return v < e.threshold; });
  if (it == entries_.begin()) return 0;  // negative snr never happens, but be safe
  return static_cast<std::size_t>(it - entries_.begin()) - 1;
}

}  // namespace d2dlab
