#pragma once

// Regression checks over the problem corpus and the property suites.
//
// Each corpus file may carry an "expect" list; an entry names the command
// that produces a report, a JSON pointer into it ("*" expands arrays), the
// expected value and a tolerance class. Tolerance values live in code.

#include <filesystem>
#include <string>
#include <vector>

#include "pfaffopt/commands.hpp"

namespace pfaffopt::verify {

enum class Status { pass, fail, skip };
std::string_view status_name(Status s);

struct Outcome {
  int criterion = 0;
  std::string source;      // corpus file or property suite
  std::string label;
  Status status = Status::pass;
  std::string expected;
  std::string actual;
  double tolerance = 0.0;
  std::string detail;
};

/// Tolerance classes usable in "expect" entries.
double tolerance_of(const std::string& name);  // throws InputError for unknown names

/// Corpus files the regression suite expects, with the criterion each one covers.
struct ManifestEntry {
  std::string file;
  std::vector<int> criteria;
};
const std::vector<ManifestEntry>& manifest();

std::vector<Outcome> check_file(const io::ProblemFile& pf, std::uint64_t seed);

/// Manifest files (missing ones are reported as skips), then any other
/// *.json file in the directory that carries expectations.
std::vector<Outcome> check_corpus(const std::filesystem::path& dir, std::uint64_t seed);

/// Property suites; `programs` are the corpus problems they range over.
std::vector<Outcome> property_suite(const std::vector<io::ProblemFile>& programs, std::uint64_t seed);

/// Outcomes as the 'verify' JSON report (checks, per-criterion summary, overall verdict).
nlohmann::json report_json(const std::vector<Outcome>& outcomes);

std::vector<io::ProblemFile> load_corpus(const std::filesystem::path& dir);

/// Bundled corpus location: PFAFFOPT_CORPUS_DIR, else the directory configured at build time.
std::filesystem::path default_corpus_dir();

}  // namespace pfaffopt::verify
