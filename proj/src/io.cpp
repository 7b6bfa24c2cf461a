#include "wva/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wva/error.hpp"

namespace wva::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto pos = text.find('\n');
    const auto line = trim(text.substr(0, pos));
    if (!line.empty()) out.push_back(line);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::optional<double> parse_cell(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw InvalidInput("not a number: '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

LoadedSpectrum parse_spectrum_csv(std::string_view text, std::string_view column) {
  // Optional UTF-8 byte order mark.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const auto lines = lines_of(text);
  if (lines.empty()) throw InvalidInput("spectrum file is empty");
  const auto header = split_csv_line(lines.front());
  if (header.empty() || header.front() != "frequency_thz") {
    throw InvalidInput("spectrum header must start with frequency_thz");
  }
  std::size_t col = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] == column) col = i;
  }
  if (col == 0) throw InvalidInput("spectrum file has no column '" + std::string(column) + "'");

  std::vector<std::pair<double, double>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw InvalidInput("spectrum row " + std::to_string(i + 1) + " has the wrong number of cells");
    }
    const auto nu = parse_cell(cells[0]);
    const auto s = parse_cell(cells[col]);
    if (!nu || !s) throw InvalidInput("spectrum row " + std::to_string(i + 1) + " has an empty cell");
    rows.emplace_back(*nu, *s);
  }
  return load_spectrum(rows);
}

LoadedSpectrum read_spectrum_csv(const std::filesystem::path& path, std::string_view column) {
  return parse_spectrum_csv(read_text(path), column);
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::string out = "frequency_thz,density\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += format_double(s.grid().node(i));
    out += ',';
    out += format_double(s[i]);
    out += '\n';
  }
  write_text(path, out);
}

FitData parse_fit_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const auto lines = lines_of(text);
  if (lines.empty()) throw InvalidInput("fit data file is empty");
  const auto header = split_csv_line(lines.front());
  if (header.size() < 3 || header[0] != "gamma_rad" || header[1] != "delta_f_thz" || header[2] != "loss_db") {
    throw InvalidInput("fit data header must start with gamma_rad,delta_f_thz,loss_db");
  }
  FitData data;
  std::vector<double> shift;
  std::vector<double> loss;
  bool any_shift = false;
  bool any_loss = false;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() < 3) throw InvalidInput("fit data row " + std::to_string(i + 1) + " is too short");
    const auto g = parse_cell(cells[0]);
    if (!g || !std::isfinite(*g)) throw InvalidInput("fit data row " + std::to_string(i + 1) + " lacks an angle");
    const auto s = parse_cell(cells[1]);
    const auto l = parse_cell(cells[2]);
    data.gamma.push_back(*g);
    shift.push_back(s && std::isfinite(*s) ? *s : nan);
    loss.push_back(l && std::isfinite(*l) ? *l : nan);
    any_shift = any_shift || !std::isnan(shift.back());
    any_loss = any_loss || !std::isnan(loss.back());
  }
  if (any_shift) data.shift = std::move(shift);
  if (any_loss) data.loss = std::move(loss);
  return data;
}

FitData read_fit_csv(const std::filesystem::path& path) { return parse_fit_csv(read_text(path)); }

std::string format_sweep_csv(const SweepResult& sweep) {
  std::string out = "gamma_rad,delta_f_thz,loss_db,flags\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    out += format_double(sweep.gammas[i]);
    out += ',';
    if (sweep.shifts[i]) out += format_double(*sweep.shifts[i]);
    out += ',';
    out += format_double(sweep.losses[i]);
    out += ',';
    if (!sweep.shifts[i]) out += "singular";
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Io("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Io("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Io("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace wva::io
