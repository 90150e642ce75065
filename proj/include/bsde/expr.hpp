#ifndef BSDE_EXPR_HPP
#define BSDE_EXPR_HPP

#include <functional>
#include <span>
#include <string>

namespace bsde::expr {

using Evaluator = std::function<double(double t, std::span<const double> b,
                                       double y, std::span<const double> z)>;

/// Parses a small arithmetic formula over the variables t, y, b1..bd,
/// z1..zd (grammar documented in the README) into an evaluation tree.
/// Comparisons evaluate to the indicator values 1 or 0.
/// Throws std::invalid_argument with the offending position on bad input.
Evaluator parse(const std::string& source, int d);

}  // namespace bsde::expr

#endif
