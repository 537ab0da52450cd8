#include "fpanel/panel_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fpanel/errors.hpp"

namespace fpanel {

namespace {

constexpr std::string_view kHeader = "series_id,replicate_index,grid_point,value";

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw StructuralError("line " + std::to_string(line) + ": cannot parse " +
                          what + " \"" + std::string(field) + "\"");
  }
  return v;
}

long parse_long(std::string_view field, std::size_t line, const char* what) {
  long v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw StructuralError("line " + std::to_string(line) + ": cannot parse " +
                          what + " \"" + std::string(field) + "\"");
  }
  return v;
}

struct Record {
  int series = 0;
  long replicate = 0;
  double t = 0.0;
  double value = 0.0;
  std::size_t line = 0;
};

} // namespace

FunctionalPanel read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw StructuralError("panel CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw StructuralError("panel CSV header must be \"" + std::string(kHeader) +
                          "\", got \"" + line + "\"");
  }

  std::vector<std::string> labels;
  std::unordered_map<std::string, int> label_index;
  std::map<double, int> grid_index; // sorted unique grid points
  std::vector<Record> records;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string_view rest(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos) {
          throw StructuralError("line " + std::to_string(line_no) +
                                ": expected 4 comma-separated fields");
        }
        fields[f] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) {
          throw StructuralError("line " + std::to_string(line_no) +
                                ": expected 4 comma-separated fields");
        }
        fields[f] = rest;
      }
    }

    Record rec;
    const std::string label(fields[0]);
    const auto [it, inserted] =
        label_index.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    rec.series = it->second;
    rec.replicate = parse_long(fields[1], line_no, "replicate_index");
    rec.t = parse_double(fields[2], line_no, "grid_point");
    rec.value = parse_double(fields[3], line_no, "value");
    if (!std::isfinite(rec.t)) {
      throw StructuralError("line " + std::to_string(line_no) +
                            ": grid_point is not finite");
    }
    if (!std::isfinite(rec.value)) {
      throw StructuralError("line " + std::to_string(line_no) +
                            ": value is not finite");
    }
    rec.line = line_no;
    grid_index.try_emplace(rec.t, 0);
    records.push_back(rec);
  }

  if (records.empty()) {
    throw StructuralError("panel CSV has a header but no data rows");
  }
  const int t_count = static_cast<int>(grid_index.size());
  if (t_count < 2) {
    throw StructuralError("panel CSV needs at least 2 distinct grid points");
  }
  {
    int idx = 0;
    for (auto& [t, i] : grid_index) i = idx++;
  }

  // Replicate indices must be the contiguous block 1..N, identically in
  // every series.
  const int i_count = static_cast<int>(labels.size());
  std::vector<long> max_rep(static_cast<std::size_t>(i_count),
                            std::numeric_limits<long>::min());
  for (const Record& r : records) {
    if (r.replicate < 1) {
      throw StructuralError("line " + std::to_string(r.line) +
                            ": replicate_index must be >= 1, got " +
                            std::to_string(r.replicate));
    }
    auto& m = max_rep[static_cast<std::size_t>(r.series)];
    m = std::max(m, r.replicate);
  }
  const long n_count = max_rep[0];
  for (int i = 1; i < i_count; ++i) {
    if (max_rep[static_cast<std::size_t>(i)] != n_count) {
      throw StructuralError("series \"" + labels[static_cast<std::size_t>(i)] +
                            "\" has replicates up to " +
                            std::to_string(max_rep[static_cast<std::size_t>(i)]) +
                            " but series \"" + labels[0] + "\" goes up to " +
                            std::to_string(n_count));
    }
  }

  // NaN marks a cell not yet seen; legitimate values are checked finite at
  // parse time, so the sentinel cannot collide.
  std::vector<Eigen::MatrixXd> series(
      static_cast<std::size_t>(i_count),
      Eigen::MatrixXd::Constant(n_count, t_count,
                                std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<int>> cell_counts(
      static_cast<std::size_t>(i_count),
      std::vector<int>(static_cast<std::size_t>(n_count), 0));

  for (const Record& r : records) {
    const int row = static_cast<int>(r.replicate - 1);
    const int col = grid_index.at(r.t);
    double& cell = series[static_cast<std::size_t>(r.series)](row, col);
    if (!std::isnan(cell)) {
      throw StructuralError("duplicate sample: series \"" +
                            labels[static_cast<std::size_t>(r.series)] +
                            "\", replicate " + std::to_string(r.replicate) +
                            ", grid point " + fmt_double(r.t) + " (line " +
                            std::to_string(r.line) + ")");
    }
    cell = r.value;
    ++cell_counts[static_cast<std::size_t>(r.series)][static_cast<std::size_t>(row)];
  }

  // Distinguish a ragged replicate (wrong number of points) from a single
  // missing cell, naming the offender in both cases.
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(t_count));
  for (const auto& [t, idx] : grid_index) points.push_back(t);
  for (int i = 0; i < i_count; ++i) {
    for (long n = 0; n < n_count; ++n) {
      const int have =
          cell_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
      if (have == t_count) continue;
      // Find the first absent grid point for the message.
      std::string missing_at = "?";
      for (int c = 0; c < t_count; ++c) {
        if (std::isnan(series[static_cast<std::size_t>(i)](n, c))) {
          missing_at = fmt_double(points[static_cast<std::size_t>(c)]);
          break;
        }
      }
      if (have == 0) {
        throw StructuralError("missing replicate: series \"" +
                              labels[static_cast<std::size_t>(i)] +
                              "\" has no samples for replicate " +
                              std::to_string(n + 1));
      }
      if (t_count - have > 1) {
        throw StructuralError("ragged grid: series \"" +
                              labels[static_cast<std::size_t>(i)] +
                              "\", replicate " + std::to_string(n + 1) +
                              " covers " + std::to_string(have) + " of " +
                              std::to_string(t_count) +
                              " grid points (first missing at " + missing_at + ")");
      }
      throw StructuralError("missing cell: series \"" +
                            labels[static_cast<std::size_t>(i)] +
                            "\", replicate " + std::to_string(n + 1) +
                            ", grid point " + missing_at);
    }
  }

  // The domain becomes the unit interval: affine in the observed min/max.
  // A grid already spanning [0, 1] maps to itself exactly, which is what
  // makes emit-then-ingest round-trips bitwise faithful.
  Eigen::VectorXd grid_points(t_count);
  const double lo = points.front();
  const double span = points.back() - points.front();
  for (int c = 0; c < t_count; ++c) {
    grid_points[c] = (points[static_cast<std::size_t>(c)] - lo) / span;
  }

  return FunctionalPanel(std::make_shared<Grid>(std::move(grid_points)),
                         std::move(series), std::move(labels));
}

FunctionalPanel load_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path);
  }
  return read_panel_csv(in);
}

void write_panel_csv(const FunctionalPanel& panel, std::ostream& out) {
  for (const std::string& label : panel.labels()) {
    if (label.find_first_of(",\"\r\n") != std::string::npos) {
      throw StructuralError("series label \"" + label +
                            "\" cannot be written to CSV");
    }
  }
  out << kHeader << '\n';
  const auto& points = panel.grid()->points();
  for (int i = 0; i < panel.series_count(); ++i) {
    const auto& label = panel.labels()[static_cast<std::size_t>(i)];
    const auto& s = panel.series(i);
    for (int n = 0; n < panel.replicate_count(); ++n) {
      for (Eigen::Index c = 0; c < points.size(); ++c) {
        out << label << ',' << (n + 1) << ',' << fmt_double(points[c]) << ','
            << fmt_double(s(n, c)) << '\n';
      }
    }
  }
}

void save_panel_csv(const FunctionalPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open " + path + " for writing");
  }
  write_panel_csv(panel, out);
  if (!out) {
    throw Error("failed writing " + path);
  }
}

} // namespace fpanel
