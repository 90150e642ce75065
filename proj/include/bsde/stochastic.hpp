#ifndef BSDE_STOCHASTIC_HPP
#define BSDE_STOCHASTIC_HPP

#include <cstdint>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsde {

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform time grid 0 = t_0 < t_1 < ... < t_N = T.
struct TimeGrid {
  double horizon = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> nodes;

  double dt(std::size_t i) const { return nodes[i + 1] - nodes[i]; }
};

TimeGrid make_grid(double T, std::size_t N);

enum class PathMode {
  Direct,  // increment (m,i,c) drawn independently, keyed on (seed,m,i,c)
  Nested   // Levy bridge keyed on dyadic node position; grids with N and 2N
           // steps (both powers of two) agree on shared nodes
};

/// M forward Brownian paths on a time grid. Increments are stored; the
/// path itself is reconstructed by left-to-right prefix sums.
struct PathBundle {
  TimeGrid grid;
  std::size_t dim = 1;
  std::size_t path_count = 0;
  std::uint64_t seed = 0;
  PathMode mode = PathMode::Direct;
  std::vector<double> increments;  // row-major (m, i, component)

  double increment(std::size_t m, std::size_t i, std::size_t c) const {
    return increments[(m * grid.n_steps + i) * dim + c];
  }
};

inline constexpr std::size_t kDefaultIncrementCap = std::size_t{1} << 28;

PathBundle simulate_paths(const TimeGrid& grid, std::size_t d, std::size_t M,
                          std::uint64_t seed, PathMode mode = PathMode::Direct,
                          std::size_t max_elements = kDefaultIncrementCap);

/// B_{t_i} on path m; B_{t_0} = 0.
std::vector<double> brownian_at(const PathBundle& bundle, std::size_t m,
                                std::size_t i);

void save_bundle(const PathBundle& bundle, std::ostream& os);
void save_bundle(const PathBundle& bundle, const std::string& path);
PathBundle load_bundle(std::istream& is);
PathBundle load_bundle(const std::string& path);

}  // namespace bsde

#endif
