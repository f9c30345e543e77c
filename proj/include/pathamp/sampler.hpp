#pragma once

// Reproducible pointer-reading trials and interval counting.
//
// Randomness comes from Philox4x32-10, a counter-based generator: draw i of
// a stream is a pure function of (key, i, stream), so any sharding of the
// draws over threads gives the same record as a sequential loop.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "pathamp/pointer.hpp"

namespace pathamp::sampler {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block encrypt(Block counter, Key key);
};

// Uniform doubles in [0, 1) addressed by (seed, stream, index).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  double uniform(std::uint64_t index) const;
  std::uint64_t bits(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Independent child seed for a labelled sub-experiment (e.g. one sweep
// point), so results do not depend on the order in which they are run.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t label);

struct TrialRecord {
  std::vector<double> readings;
  std::uint64_t seed = 0;

  std::size_t trials() const { return readings.size(); }
  bool operator==(const TrialRecord&) const = default;
};

// Cells (-inf, b_0), [b_0, b_1), ..., [b_{M-2}, +inf).
class IntervalPartition {
 public:
  explicit IntervalPartition(std::vector<double> boundaries);

  const std::vector<double>& boundaries() const { return boundaries_; }
  std::size_t cells() const { return boundaries_.size() + 1; }
  std::size_t cell_of(double reading) const;
  pointer::Interval cell(std::size_t nu) const;

 private:
  std::vector<double> boundaries_;
};

struct CountVector {
  std::vector<std::size_t> counts;

  std::size_t total() const;
  std::vector<double> frequencies() const;
  CountVector& operator+=(const CountVector& other);
  bool operator==(const CountVector&) const = default;
};

// K draws by inverse cdf; `workers` threads share the work.
TrialRecord sample(const pointer::ReadingDensity& density, std::size_t trials, std::uint64_t seed,
                   unsigned workers = 1);

CountVector count(std::span<const double> readings, const IntervalPartition& partition);
inline CountVector count(const TrialRecord& record, const IntervalPartition& partition) {
  return count(record.readings, partition);
}

void write_trials(std::ostream& out, const TrialRecord& record);
TrialRecord read_trials(std::istream& in);

}  // namespace pathamp::sampler
