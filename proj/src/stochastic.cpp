#include "bsde/stochastic.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "bsde/rng.hpp"

namespace bsde {

TimeGrid make_grid(double T, std::size_t N) {
  if (!(T > 0.0)) throw std::invalid_argument("make_grid: horizon T must be positive");
  if (N < 1) throw std::invalid_argument("make_grid: N must be at least 1");
  TimeGrid g;
  g.horizon = T;
  g.n_steps = N;
  g.nodes.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i)
    g.nodes[i] = T * static_cast<double>(i) / static_cast<double>(N);
  g.nodes[0] = 0.0;
  g.nodes[N] = T;
  return g;
}

namespace {

// Nested mode keys bridge midpoints by their dyadic time position k/2^l in
// lowest terms, so a 2N-step grid reuses the N-step grid's draws at shared
// nodes. The high bit of the key separates the nested stream from Direct.
constexpr std::uint64_t kNestedTag = std::uint64_t{1} << 62;

void fill_path_nested(std::vector<double>& values, std::size_t N, double T,
                      std::uint64_t seed, std::size_t m, std::size_t c) {
  const std::size_t L = static_cast<std::size_t>(std::countr_zero(N));
  values[0] = 0.0;
  values[N] = std::sqrt(T) * rng::normal(seed, m, kNestedTag, c);
  for (std::size_t len = N; len > 1; len /= 2) {
    const std::size_t half = len / 2;
    const double bridge_sd = std::sqrt(T * static_cast<double>(half) /
                                       static_cast<double>(N) / 2.0);
    for (std::size_t j = 0; j < N; j += len) {
      const std::size_t mid = j + half;
      const std::size_t tz = static_cast<std::size_t>(std::countr_zero(mid));
      const std::uint64_t level = static_cast<std::uint64_t>(L - tz);
      const std::uint64_t odd = static_cast<std::uint64_t>(mid >> tz);
      const std::uint64_t key = kNestedTag | (level << 48) | odd;
      values[mid] = 0.5 * (values[j] + values[j + len]) +
                    bridge_sd * rng::normal(seed, m, key, c);
    }
  }
}

}  // namespace

PathBundle simulate_paths(const TimeGrid& grid, std::size_t d, std::size_t M,
                          std::uint64_t seed, PathMode mode,
                          std::size_t max_elements) {
  if (d < 1) throw std::invalid_argument("simulate_paths: d must be at least 1");
  if (M < 1) throw std::invalid_argument("simulate_paths: M must be at least 1");
  const std::size_t N = grid.n_steps;
  if (mode == PathMode::Nested && !std::has_single_bit(N))
    throw std::invalid_argument("simulate_paths: nested mode requires N to be a power of two");
  if (M > max_elements / N / d)
    throw resource_error("simulate_paths: M*N*d exceeds the configured memory cap");

  PathBundle b;
  b.grid = grid;
  b.dim = d;
  b.path_count = M;
  b.seed = seed;
  b.mode = mode;
  b.increments.resize(M * N * d);

  if (mode == PathMode::Direct) {
    for (std::size_t m = 0; m < M; ++m) {
      double* row = &b.increments[m * N * d];
      for (std::size_t i = 0; i < N; ++i) {
        const double sd = std::sqrt(grid.dt(i));
        for (std::size_t c = 0; c < d; ++c)
          row[i * d + c] = sd * rng::normal(seed, m, i, c);
      }
    }
  } else {
    std::vector<double> values(N + 1);
    for (std::size_t m = 0; m < M; ++m) {
      double* row = &b.increments[m * N * d];
      for (std::size_t c = 0; c < d; ++c) {
        fill_path_nested(values, N, grid.horizon, seed, m, c);
        for (std::size_t i = 0; i < N; ++i)
          row[i * d + c] = values[i + 1] - values[i];
      }
    }
  }
  return b;
}

std::vector<double> brownian_at(const PathBundle& bundle, std::size_t m,
                                std::size_t i) {
  if (m >= bundle.path_count) throw std::out_of_range("brownian_at: path index");
  if (i > bundle.grid.n_steps) throw std::out_of_range("brownian_at: time index");
  std::vector<double> value(bundle.dim, 0.0);
  for (std::size_t j = 0; j < i; ++j)
    for (std::size_t c = 0; c < bundle.dim; ++c)
      value[c] += bundle.increment(m, j, c);
  return value;
}

namespace {

constexpr char kMagic[8] = {'B', 'S', 'D', 'E', 'P', 'A', 'T', 'H'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little,
                "bundle i/o assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_bundle(const PathBundle& b, std::ostream& os) {
  os.write(kMagic, sizeof(kMagic));
  write_le(os, kVersion);
  write_le(os, b.grid.horizon);
  write_le(os, static_cast<std::uint64_t>(b.grid.n_steps));
  write_le(os, static_cast<std::uint64_t>(b.dim));
  write_le(os, static_cast<std::uint64_t>(b.path_count));
  write_le(os, b.seed);
  os.write(reinterpret_cast<const char*>(b.increments.data()),
           static_cast<std::streamsize>(b.increments.size() * sizeof(double)));
  if (!os) throw std::runtime_error("save_bundle: write failed");
}

void save_bundle(const PathBundle& b, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_bundle: cannot open " + path);
  save_bundle(b, os);
}

PathBundle load_bundle(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_bundle: bad magic");
  const auto version = read_le<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("load_bundle: unsupported version");
  const double T = read_le<double>(is);
  const auto N = read_le<std::uint64_t>(is);
  const auto d = read_le<std::uint64_t>(is);
  const auto M = read_le<std::uint64_t>(is);
  const auto seed = read_le<std::uint64_t>(is);
  PathBundle b;
  b.grid = make_grid(T, static_cast<std::size_t>(N));
  b.dim = static_cast<std::size_t>(d);
  b.path_count = static_cast<std::size_t>(M);
  b.seed = seed;
  b.increments.resize(b.path_count * b.grid.n_steps * b.dim);
  is.read(reinterpret_cast<char*>(b.increments.data()),
          static_cast<std::streamsize>(b.increments.size() * sizeof(double)));
  if (!is) throw std::runtime_error("load_bundle: truncated increment block");
  return b;
}

PathBundle load_bundle(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_bundle: cannot open " + path);
  return load_bundle(is);
}

}  // namespace bsde
