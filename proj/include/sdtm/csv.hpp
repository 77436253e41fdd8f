#pragma once

// Plain CSV output: header row, '.' decimal point, RFC 4180 quoting.

#include "sdtm/driver.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sdtm {

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values,
/// independent of the global locale.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// step,t,fit_residual,rel_l2,linf,r_current,reinit,wall_ms,solves followed by
/// one rel_l2_<name> column per component for vector problems.
void write_run_csv(std::ostream& out, const RunRecord& record);

/// Columns x[,y] then one column per component name.
void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot, const std::vector<std::string>& components);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sdtm
