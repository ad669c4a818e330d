#include "embedgeom/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unistd.h>

#include "embedgeom/error.hpp"

namespace embedgeom {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw InputError(path.parent_path().string() + ": cannot create directory: " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InputError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError(path.string() + ": rename failed: " + ec.message());
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw InputError("unterminated quote in CSV line");
  return fields;
}

std::string csv_preamble(const nlohmann::ordered_json& provenance) {
  std::string out;
  for (const auto& [key, value] : provenance.items()) {
    out += "# " + key + ": " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
  }
  return out;
}

std::vector<std::string> ordered_metric_names(const MetricReport& report) {
  std::vector<std::string> names;
  if (!report.per_unit.empty()) {
    for (const auto& [name, value] : report.per_unit.begin()->second) names.push_back(name);
  }
  auto key = [](const std::string& name) {
    const auto at = name.find('@');
    std::size_t k = 0;
    if (at != std::string::npos) {
      std::from_chars(name.data() + at + 1, name.data() + name.size(), k);
    }
    const int family = name.rfind("R@", 0) == 0 ? 0 : name.rfind("N@", 0) == 0 ? 1 : 2;
    return std::tuple(k, family, name);
  };
  std::sort(names.begin(), names.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return names;
}

std::string report_csv(const MetricReport& report, std::string_view unit_column,
                       const nlohmann::ordered_json& provenance) {
  const auto names = ordered_metric_names(report);
  const bool with_rank = !report.rank_of_relevant.empty();
  std::string out = csv_preamble(provenance);
  out += unit_column;
  if (with_rank) out += ",rank";
  for (const auto& name : names) out += "," + name;
  out += "\n";
  for (const auto& [unit, values] : report.per_unit) {
    out += csv_field(unit);
    if (with_rank) out += "," + std::to_string(report.rank_of_relevant.at(unit));
    for (const auto& name : names) out += "," + format_double(values.at(name));
    out += "\n";
  }
  return out;
}

MetricReport parse_report_csv(std::string_view text, std::string label) {
  MetricReport report;
  report.system_label = std::move(label);
  std::vector<std::string> header;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto fields = parse_csv_line(line);
    if (header.empty()) {
      header = std::move(fields);
      if (header.size() < 2) throw InputError("report CSV header has no metric columns");
      continue;
    }
    if (fields.size() != header.size()) {
      throw InputError("report CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    const std::string& unit = fields[0];
    if (report.per_unit.count(unit)) {
      throw InputError("duplicate unit id " + unit + " (line " + std::to_string(line_no) + ")");
    }
    MetricValues& values = report.per_unit[unit];
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const std::string& field = fields[c];
      if (header[c] == "rank") {
        std::size_t rank = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), rank);
        if (ec != std::errc() || ptr != field.data() + field.size()) {
          throw InputError("bad rank '" + field + "' on line " + std::to_string(line_no));
        }
        report.rank_of_relevant[unit] = rank;
        continue;
      }
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw InputError("bad value '" + field + "' for " + header[c] + " on line " +
                         std::to_string(line_no));
      }
      values[header[c]] = value;
    }
  }
  if (report.per_unit.empty()) throw InputError("report CSV has no rows");
  report.finalize();
  return report;
}

nlohmann::ordered_json report_json(const MetricReport& report) {
  nlohmann::ordered_json out;
  out["system"] = report.system_label;
  out["unit_count"] = report.unit_count();
  nlohmann::ordered_json aggregates = nlohmann::ordered_json::object();
  const auto names = ordered_metric_names(report);
  for (const auto& name : names) aggregates[name] = report.aggregates.at(name);
  out["aggregates"] = aggregates;
  out["aggregates_percent"] = nlohmann::ordered_json::object();
  for (const auto& name : names) out["aggregates_percent"][name] = 100.0 * report.aggregates.at(name);
  out["degenerate_scores"] = report.degenerate_scores;
  nlohmann::ordered_json units = nlohmann::ordered_json::object();
  for (const auto& [unit, values] : report.per_unit) {
    nlohmann::ordered_json row;
    if (auto it = report.rank_of_relevant.find(unit); it != report.rank_of_relevant.end()) {
      row["rank"] = it->second;
    }
    for (const auto& name : names) row[name] = values.at(name);
    units[unit] = row;
  }
  out["per_unit"] = units;
  return out;
}

nlohmann::ordered_json significance_json(const SignificanceResult& result) {
  nlohmann::ordered_json out;
  out["metric"] = result.metric;
  out["mean_delta"] = result.mean_delta;
  out["p_value"] = result.p_value;
  out["p_floor"] = p_value_floor(result.resamples);
  out["resamples"] = result.resamples;
  out["seed"] = result.seed;
  out["units"] = result.units;
  out["test"] = "paired sign-flip permutation, two-sided";
  if (result.p_value < 0.001) out["marker"] = "*";
  return out;
}

namespace {

std::string epsilon_label(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", eps);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepCurve& curve, const nlohmann::ordered_json& provenance) {
  std::string out = csv_preamble(provenance);
  out += "k,metric,epsilon_mark\n";
  for (std::size_t i = 0; i < curve.component_grid.size(); ++i) {
    const std::size_t k = curve.component_grid[i];
    std::string marks;
    for (const auto& [eps, mark] : curve.epsilon_marks) {
      if (mark.components != k) continue;
      if (!marks.empty()) marks += ";";
      marks += epsilon_label(eps);
    }
    out += std::to_string(k) + "," + format_double(curve.metric_at_k[i]) + "," + marks + "\n";
  }
  return out;
}

nlohmann::ordered_json sweep_json(const SweepCurve& curve) {
  nlohmann::ordered_json out;
  out["metric"] = curve.metric_name;
  out["grid"] = curve.auto_grid ? "auto (powers of two up to rank, plus epsilon points)" : "explicit";
  out["rank"] = curve.rank;
  out["shape"] = std::string(to_string(curve.shape));
  out["shape_threshold"] = kShapeThreshold;
  out["baseline_metric"] = curve.baseline_metric;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < curve.component_grid.size(); ++i) {
    points.push_back({{"k", curve.component_grid[i]}, {"metric", curve.metric_at_k[i]}});
  }
  out["points"] = points;
  nlohmann::ordered_json marks = nlohmann::ordered_json::array();
  for (const auto& [eps, mark] : curve.epsilon_marks) {
    marks.push_back({{"epsilon", eps}, {"components", mark.components}, {"metric", mark.metric}});
  }
  out["epsilon_marks"] = marks;
  return out;
}

}  // namespace embedgeom
