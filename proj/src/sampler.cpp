#include "pathamp/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <thread>

#include "pathamp/error.hpp"
#include "pathamp/format.hpp"

namespace pathamp::sampler {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Stream-id tag that keeps derived seeds apart from ordinary draws.
constexpr std::uint32_t kDeriveTag = 0x5EEDC0DEu;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

Philox4x32::Block Philox4x32::encrypt(Block x, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * x[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * x[2];
    x = {hi32(p1) ^ x[1] ^ key[0], lo32(p1), hi32(p0) ^ x[3] ^ key[1], lo32(p0)};
  }
  return x;
}

std::uint64_t CounterRng::bits(std::uint64_t index) const {
  const auto out = Philox4x32::encrypt({lo32(index), hi32(index), lo32(stream_), hi32(stream_)},
                                       {lo32(seed_), hi32(seed_)});
  return (std::uint64_t{out[1]} << 32) | out[0];
}

double CounterRng::uniform(std::uint64_t index) const {
  return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t label) {
  const auto out = Philox4x32::encrypt({lo32(label), hi32(label), kDeriveTag, kDeriveTag},
                                       {lo32(root), hi32(root)});
  return (std::uint64_t{out[1]} << 32) | out[0];
}

IntervalPartition::IntervalPartition(std::vector<double> boundaries)
    : boundaries_(std::move(boundaries)) {
  if (boundaries_.empty()) throw InvalidArgument("a partition needs at least one boundary (M >= 2)");
  for (std::size_t i = 0; i < boundaries_.size(); ++i) {
    if (!std::isfinite(boundaries_[i])) throw InvalidArgument("partition boundaries must be finite");
    if (i > 0 && !(boundaries_[i] > boundaries_[i - 1])) {
      throw InvalidArgument("partition boundaries must be strictly increasing", boundaries_[i]);
    }
  }
}

std::size_t IntervalPartition::cell_of(double reading) const {
  return static_cast<std::size_t>(std::upper_bound(boundaries_.begin(), boundaries_.end(), reading) -
                                  boundaries_.begin());
}

pointer::Interval IntervalPartition::cell(std::size_t nu) const {
  if (nu >= cells()) throw InvalidArgument("cell index " + std::to_string(nu) + " out of range");
  return {nu == 0 ? -pointer::kInf : boundaries_[nu - 1],
          nu + 1 == cells() ? pointer::kInf : boundaries_[nu]};
}

std::size_t CountVector::total() const {
  std::size_t k = 0;
  for (std::size_t c : counts) k += c;
  return k;
}

std::vector<double> CountVector::frequencies() const {
  const std::size_t k = total();
  if (k == 0) throw InvalidArgument("frequencies of an empty count vector");
  std::vector<double> out;
  out.reserve(counts.size());
  for (std::size_t c : counts) out.push_back(static_cast<double>(c) / static_cast<double>(k));
  return out;
}

CountVector& CountVector::operator+=(const CountVector& other) {
  if (counts.size() != other.counts.size()) {
    throw DimensionError("count vectors", counts.size(), other.counts.size());
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

TrialRecord sample(const pointer::ReadingDensity& density, std::size_t trials, std::uint64_t seed,
                   unsigned workers) {
  if (trials == 0) throw InvalidArgument("at least one trial is required");
  TrialRecord record{std::vector<double>(trials), seed};
  const CounterRng rng(seed);
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) record.readings[i] = density.quantile(rng.uniform(i));
  };
  const std::size_t shards = std::clamp<std::size_t>(workers, 1, trials);
  if (shards == 1) {
    fill(0, trials);
    return record;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (trials + shards - 1) / shards;
  for (std::size_t begin = 0; begin < trials; begin += chunk) {
    pool.emplace_back(fill, begin, std::min(trials, begin + chunk));
  }
  pool.clear();
  return record;
}

CountVector count(std::span<const double> readings, const IntervalPartition& partition) {
  CountVector out{std::vector<std::size_t>(partition.cells(), 0)};
  for (double f : readings) ++out.counts[partition.cell_of(f)];
  return out;
}

void write_trials(std::ostream& out, const TrialRecord& record) {
  out << "# seed=" << record.seed << " K=" << record.trials() << "\n";
  out << "reading\n";
  for (double f : record.readings) out << format_double(f) << "\n";
  if (!out) throw IoError("failed writing trial record");
}

TrialRecord read_trials(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# seed=", 0) != 0) {
    throw IoError("trial record must start with '# seed=S K=N'");
  }
  TrialRecord record;
  std::size_t k = 0;
  const auto k_pos = line.find(" K=");
  if (k_pos == std::string::npos) throw IoError("trial record header lacks K");
  const char* begin = line.data();
  auto r1 = std::from_chars(begin + 7, begin + k_pos, record.seed);
  auto r2 = std::from_chars(begin + k_pos + 3, begin + line.size(), k);
  if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw IoError("malformed trial record header");
  if (!std::getline(in, line) || line != "reading") throw IoError("trial record lacks 'reading' header");
  record.readings.reserve(k);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double f = 0.0;
    auto r = std::from_chars(line.data(), line.data() + line.size(), f);
    if (r.ec != std::errc{}) throw IoError("malformed reading '" + line + "'");
    record.readings.push_back(f);
  }
  if (record.readings.size() != k) {
    throw IoError("trial record declares K=" + std::to_string(k) + " but holds " +
                  std::to_string(record.readings.size()) + " readings");
  }
  return record;
}

}  // namespace pathamp::sampler
