#include "xxzcoll/series_io.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace xxzcoll {
namespace {

void append_number(std::string& out, double v) { fmt::format_to(std::back_inserter(out), "{}", v); }

void append_optional(std::string& out, const std::optional<std::vector<double>>& col, std::size_t k, bool on) {
  out += ',';
  if (on && col) append_number(out, (*col)[k]);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("write to {} failed", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string series_csv(const ObservableSeries& s, const std::set<std::string>& selected) {
  const auto n_sites = s.site_density.rows();
  std::string out = "t,ipr,ier,imb,svn";
  for (Eigen::Index i = 0; i < n_sites; ++i) fmt::format_to(std::back_inserter(out), ",n_{}", i + 1);
  out += '\n';
  const bool density = selected.contains("density");
  const bool ier = selected.contains("ier");
  for (std::size_t k = 0; k < s.size(); ++k) {
    append_number(out, s.times[k]);
    append_optional(out, s.ipr, k, selected.contains("ipr"));
    out += ',';
    if (ier) append_number(out, s.ier[k]);
    append_optional(out, s.imb, k, selected.contains("imb"));
    append_optional(out, s.svn, k, selected.contains("svn"));
    const auto col = static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < n_sites; ++i) {
      out += ',';
      if (density) append_number(out, s.site_density(i, col));
    }
    out += '\n';
  }
  return out;
}

std::string stderr_csv(const ObservableSeries& s) {
  std::string out = "t,ipr_se,ier_se,svn_se\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    append_number(out, s.times[k]);
    append_optional(out, s.ipr_stderr, k, true);
    append_optional(out, s.ier_stderr, k, true);
    append_optional(out, s.svn_stderr, k, true);
    out += '\n';
  }
  return out;
}

std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues) {
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    fmt::format_to(std::back_inserter(out), "{},{}\n", i, eigenvalues(i));
  }
  return out;
}

std::string histogram_csv(const CollisionHistogram& h) {
  std::string out = "site,bin_start,count\n";
  for (int site = 0; site < h.n_sites; ++site) {
    for (std::size_t b = 0; b < h.n_bins; ++b) {
      fmt::format_to(std::back_inserter(out), "{},{},{}\n", site + 1, static_cast<double>(b) * h.bin_width,
                     h.at(site, b));
    }
  }
  return out;
}

bool SeriesTable::has(const std::string& name) const { return columns.contains(name); }

std::vector<double> SeriesTable::dense(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) throw IoError(fmt::format("series has no column '{}'", name));
  std::vector<double> out;
  out.reserve(it->second.size());
  for (std::size_t r = 0; r < it->second.size(); ++r) {
    if (!it->second[r]) throw IoError(fmt::format("column '{}' is empty at row {}", name, r + 1));
    out.push_back(*it->second[r]);
  }
  return out;
}

int SeriesTable::n_sites() const {
  int n = 0;
  while (columns.contains(fmt::format("n_{}", n + 1))) ++n;
  return n;
}

SeriesTable parse_series_csv(const std::string& text, const std::string& origin) {
  SeriesTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("{}: empty series file", origin));
  t.header = split_csv_line(line);
  for (const auto& h : t.header) {
    if (h.empty()) throw IoError(fmt::format("{}: empty column name in header", origin));
    if (t.columns.contains(h)) throw IoError(fmt::format("{}: duplicate column '{}'", origin, h));
    t.columns[h];
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != t.header.size()) {
      throw IoError(fmt::format("{}:{}: {} fields, header has {}", origin, line_no, fields.size(), t.header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto& col = t.columns[t.header[c]];
      if (fields[c].empty()) {
        col.emplace_back();
        continue;
      }
      double v = 0.0;
      const auto& f = fields[c];
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || end != f.data() + f.size()) {
        throw IoError(fmt::format("{}:{}: column '{}' has non-numeric value '{}'", origin, line_no, t.header[c], f));
      }
      col.push_back(v);
    }
    ++t.rows;
  }
  return t;
}

SeriesTable read_series_csv(const std::string& path) { return parse_series_csv(read_text_file(path), path); }

}  // namespace xxzcoll
