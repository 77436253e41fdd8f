#include "sdtm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sdtm {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  CsvWriter w(out);
  std::vector<std::string> header{"step", "t", "fit_residual", "rel_l2", "linf", "r_current", "reinit", "wall_ms", "solves"};
  const size_t extra = record.components.size() > 1 ? record.components.size() : 0;
  for (size_t i = 0; i < extra; ++i) header.push_back("rel_l2_" + record.components[i]);
  w.row(header);
  for (const RunRow& r : record.rows) {
    std::vector<std::string> f{std::to_string(r.step),       format_double(r.t),        format_double(r.fit_residual),
                               format_double(r.rel_l2),      format_double(r.linf),     format_double(r.r_current),
                               r.reinit ? "1" : "0",         format_double(r.wall_ms),  std::to_string(r.solves)};
    for (size_t i = 0; i < extra; ++i)
      f.push_back(i < r.component_rel_l2.size() ? format_double(r.component_rel_l2[i]) : "nan");
    w.row(f);
  }
}

void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot, const std::vector<std::string>& components) {
  static const char* axes[] = {"x", "y", "z"};
  const long dim = snapshot.points.cols();
  const long cols = snapshot.values.cols();
  CsvWriter w(out);
  std::vector<std::string> header;
  for (long d = 0; d < dim; ++d) header.push_back(axes[d]);
  for (long c = 0; c < cols; ++c)
    header.push_back(c < static_cast<long>(components.size()) ? components[c] : "u" + std::to_string(c));
  w.row(header);
  for (long i = 0; i < snapshot.points.rows(); ++i) {
    std::vector<std::string> f;
    for (long d = 0; d < dim; ++d) f.push_back(format_double(snapshot.points(i, d)));
    for (long c = 0; c < cols; ++c) f.push_back(format_double(snapshot.values(i, c)));
    w.row(f);
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace sdtm
