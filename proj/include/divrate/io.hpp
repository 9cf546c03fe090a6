#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "divrate/distribution.hpp"
#include "divrate/histogram.hpp"

namespace divrate {

/// Distribution files: newline-delimited decimal probabilities, UTF-8,
/// '#' starts a comment line, blank lines ignored.
DiscreteDistribution read_distribution_file(const std::string& path);
void write_distribution_file(const DiscreteDistribution& p,
                             const std::string& path);

/// Histogram files: newline-delimited non-negative integers, same comment
/// and blank-line rules.
SampleHistogram read_histogram_file(const std::string& path);
void write_histogram_file(const SampleHistogram& h, const std::string& path);

/// key=value configuration text: one pair per line, '#' comments, blank
/// lines ignored. Returns pairs in file order.
std::vector<std::pair<std::string, std::string>>
read_key_value_file(const std::string& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_decimal(double v);

} // namespace divrate
