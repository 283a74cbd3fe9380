#pragma once

#include <cstddef>
#include <vector>

namespace d2dlab {

// One link-adaptation level: the lowest linear SNR at which the level is
// usable, and the spectral efficiency it delivers.
struct McsEntry {
  double threshold = 0.0;  // linear SNR at the lower bucket edge
  double rate = 0.0;       // bits per symbol
};

double db_to_linear(double db);
double linear_to_db(double lin);

// Monotone MCS ladder. Level 0 is a synthetic outage level (rate 0,
// threshold 0) so that every nonnegative SNR maps to exactly one level and
// the level probabilities of a fading user always sum to one.
class McsTable {
 public:
  // 16 levels: outage plus the 15 modulation/coding pairs of a 20 MHz
  // LTE-A downlink with SNR thresholds that include implementation margin.
  static McsTable lte_default();

  // Validates monotonicity; entries[0] must be the outage level.
  explicit McsTable(std::vector<McsEntry> entries);

  std::size_t size() const { return entries_.size(); }
  const McsEntry& operator[](std::size_t k) const { return entries_[k]; }

  // Upper bucket edge of level k (threshold of k+1, +inf at the top).
  double upper(std::size_t k) const;

  // Level for an instantaneous SNR: the largest k with threshold <= snr.
  std::size_t level_for(double snr) const;

  double max_rate() const { return entries_.back().rate; }

 private:
  std::vector<McsEntry> entries_;
};

}  // namespace d2dlab
