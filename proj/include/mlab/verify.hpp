#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlab {

class UnknownSuite : public std::runtime_error {
 public:
  explicit UnknownSuite(const std::string& name) : std::runtime_error("unknown suite '" + name + "'") {}
};

struct PropertyReport {
  std::string suite;
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  /// First failing case, empty when the property holds.
  std::string counterexample;
  /// Summary numbers worth printing (counts, maxima).
  std::string note;
  double seconds = 0;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Largest threshold of the counting suite.
  std::uint64_t counting_threshold = 12;
};

/// fairness, averaging, saving, totalize, diagonal, splitting, counting.
const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Throws UnknownSuite.
std::vector<PropertyReport> run_suite(const std::string& name, const VerifyOptions& options = {});

/// One line per property: "PASS suite/name (cases, note)" or
/// "FAIL suite/name: counterexample".
void write_report(std::ostream& out, const std::vector<PropertyReport>& reports);

}  // namespace mlab
