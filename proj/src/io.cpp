#include "divrate/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "divrate/error.hpp"

namespace divrate {
namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Yields the payload of each line: comments ('#' to end of line) removed,
// whitespace trimmed, blank results skipped.
template <typename Fn>
void for_each_payload_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string payload = strip(line);
    if (!payload.empty()) fn(payload, lineno);
  }
  if (in.bad()) throw io_error("read failure on: " + path);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  return out;
}

} // namespace

DiscreteDistribution read_distribution_file(const std::string& path) {
  std::vector<double> probs;
  for_each_payload_line(path, [&](const std::string& payload,
                                  std::size_t lineno) {
    double v = 0.0;
    auto [ptr, ec] =
        std::from_chars(payload.data(), payload.data() + payload.size(), v);
    if (ec != std::errc() || ptr != payload.data() + payload.size())
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": not a decimal number: '" + payload + "'");
    probs.push_back(v);
  });
  if (probs.empty())
    throw io_error(path + ": no probability entries found");
  return DiscreteDistribution(std::move(probs));
}

void write_distribution_file(const DiscreteDistribution& p,
                             const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (std::int64_t i = 0; i < p.size(); ++i)
    out << format_decimal(p[i]) << '\n';
  if (!out) throw io_error("write failure on: " + path);
}

SampleHistogram read_histogram_file(const std::string& path) {
  std::vector<std::int64_t> counts;
  for_each_payload_line(path, [&](const std::string& payload,
                                  std::size_t lineno) {
    std::int64_t v = 0;
    auto [ptr, ec] =
        std::from_chars(payload.data(), payload.data() + payload.size(), v);
    if (ec != std::errc() || ptr != payload.data() + payload.size() || v < 0)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": not a non-negative integer: '" + payload + "'");
    counts.push_back(v);
  });
  if (counts.empty()) throw io_error(path + ": no count entries found");
  return SampleHistogram(std::move(counts));
}

void write_histogram_file(const SampleHistogram& h, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (std::int64_t i = 0; i < h.alphabet_size(); ++i) out << h[i] << '\n';
  if (!out) throw io_error("write failure on: " + path);
}

std::vector<std::pair<std::string, std::string>>
read_key_value_file(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for_each_payload_line(path, [&](const std::string& payload,
                                  std::size_t lineno) {
    std::size_t eq = payload.find('=');
    if (eq == std::string::npos)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected key=value, got '" + payload + "'");
    std::string key = strip(payload.substr(0, eq));
    std::string value = strip(payload.substr(eq + 1));
    if (key.empty())
      throw io_error(path + ":" + std::to_string(lineno) + ": empty key");
    pairs.emplace_back(std::move(key), std::move(value));
  });
  return pairs;
}

std::string format_decimal(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace divrate
