#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wva/regimes.hpp"
#include "wva/spectra.hpp"

namespace wva::io {

/// Shortest decimal string that parses back to the same double. Infinities
/// are written as "inf"/"-inf"; NaN as an empty cell.
std::string format_double(double v);

/// Parses one CSV cell; empty -> nullopt. Throws InvalidInput on garbage.
std::optional<double> parse_cell(std::string_view cell);

std::vector<std::string> split_csv_line(std::string_view line);

/// Reads `frequency_thz,<column>[,...]` and resamples onto a uniform grid.
LoadedSpectrum read_spectrum_csv(const std::filesystem::path& path, std::string_view column = "density");
LoadedSpectrum parse_spectrum_csv(std::string_view text, std::string_view column = "density");

/// Writes `frequency_thz,density`.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);

/// Gamma-sweep data. Missing cells are NaN; a column without any value is
/// reported as absent.
struct FitData {
  std::vector<double> gamma;
  std::optional<std::vector<double>> shift;
  std::optional<std::vector<double>> loss;
};

/// Reads `gamma_rad,delta_f_thz,loss_db[,...]`; trailing columns are ignored.
FitData read_fit_csv(const std::filesystem::path& path);
FitData parse_fit_csv(std::string_view text);

/// Writes `gamma_rad,delta_f_thz,loss_db,flags`; singular rows carry an empty
/// shift cell and the flag `singular`.
std::string format_sweep_csv(const SweepResult& sweep);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace wva::io
