#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ipslab/lattice.hpp"
#include "ipslab/stats.hpp"

namespace ipslab {

/// Plain key=value configuration. '#' starts a comment, lists are comma
/// separated. Keys outside `allowed` are rejected by name.
class Config {
 public:
  Config() = default;
  explicit Config(std::set<std::string> allowed) : allowed_(std::move(allowed)) {}

  static Config parse(std::string_view text, std::set<std::string> allowed);
  static Config load(const std::filesystem::path& file, std::set<std::string> allowed);

  /// Sets one key, checking it against the allowed set. `assignment` is "key=value".
  void set(const std::string& key, const std::string& value);
  void assign(std::string_view assignment);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
  [[nodiscard]] std::string str(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double num(const std::string& key, double fallback) const;
  [[nodiscard]] long integer(const std::string& key, long fallback) const;
  [[nodiscard]] std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

  /// Sorted "key=value" lines; the hash is FNV-1a over this text.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;
  [[nodiscard]] std::string hash_hex() const;
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::set<std::string> allowed_;
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a(std::string_view s);

/// Shortest decimal text that reads back to the same double.
std::string fmt_double(double v);

// ---------------------------------------------------------------------------
// writers

/// RFC-4180 CSV with a mandatory header row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row_numbers(const std::vector<double>& cells);
  [[nodiscard]] std::size_t rows() const { return rows_; }

  static std::string quote(const std::string& cell);

 private:
  std::ostream& out_;
  std::size_t cols_;
  std::size_t rows_ = 0;
};

struct Statistic {
  std::string name;
  Estimate value;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ResultRecord {
  std::string experiment;
  std::string config_hash;
  std::vector<Statistic> stats;
  std::vector<Verdict> verdicts;
  double wall_time = 0.0;

  [[nodiscard]] bool passed() const;
  /// One JSON object on a single line; exact values are tagged "exact".
  [[nodiscard]] std::string to_json_line() const;
};

/// Whitespace-separated columns, one row per line, no header.
void write_columns(std::ostream& out, const std::vector<std::vector<double>>& rows);

// ---------------------------------------------------------------------------
// experiment plumbing

/// Catalyzing / initial functions by name: zero, one, x, 1-x, x^2, x(1-x),
/// 1-(1-x)^7; the result is multiplied by `scale`.
std::function<double(double)> named_function(const std::string& name, double scale = 1.0);

/// Lattice and kernel from the keys lattice, dim, side, boundary, depth, branch,
/// kernel, rate, right, left, hier_ratio.
GroupLattice lattice_from(const Config& c);
Kernel kernel_from(const Config& c, const GroupLattice& lat);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::ostream* log = nullptr;  // verdict lines; nullptr for silence
};

/// Keys accepted by a subcommand (common keys included); throws for unknown subcommands.
std::set<std::string> subcommand_keys(const std::string& sub);
std::vector<std::string> subcommands();

/// Runs one subcommand, writes <sub>.csv and <sub>.jsonl (plus .dat plot data
/// where the output is a grid) into the output directory.
std::vector<ResultRecord> run(const std::string& sub, const Config& c, const RunOptions& opt = {});

}  // namespace ipslab
