#pragma once

// CSV artifacts exchanged between pipeline stages, the structured bound
// report, and the SVG plot. Numbers are written with %.17g so that a value
// read back is bit-identical to the one written.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ustail/bounds.hpp"
#include "ustail/gls_empirics.hpp"
#include "ustail/metric_entropy.hpp"
#include "ustail/ustat.hpp"

namespace ustail {

std::string format_double(double x);
/// Parses a full string as a double; context names the source in errors.
double parse_double(const std::string& s, const std::string& context);

struct CsvTable {
  std::filesystem::path source;
  /// "# key=value" lines preceding the header.
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

std::string field_to_csv(const FieldSampleMatrix& field);
FieldSampleMatrix read_field_csv(const std::filesystem::path& path);

std::string tail_curve_to_csv(const TailCurve& curve);
TailCurve read_tail_curve_csv(const std::filesystem::path& path);

std::string moments_to_csv(std::span<const MomentTable> tables);

/// Square matrix with a leading label column, or a single column "t" of
/// points on the line with distance |s - t|.
std::string metric_to_csv(const FiniteMetricSpace& space);
FiniteMetricSpace read_metric_csv(const std::filesystem::path& path);

std::string entropy_profile_to_csv(const EntropyIntegral& integral);
std::string decomposition_to_csv(std::span<const HoeffdingEntry> entries, std::size_t n);
std::string comparison_to_csv(const ComparisonReport& report);
std::string moment_growth_to_csv(const MomentGrowthResult& result);

/// Key-value sections followed by the curves as embedded CSV blocks.
std::string report_to_text(const BoundReport& report, const std::map<std::string, std::string>& extra = {});

std::string tail_curves_svg(std::span<const TailCurve> curves, const std::string& title);

}  // namespace ustail
