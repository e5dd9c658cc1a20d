#include "ifbm/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ifbm/error.hpp"

namespace ifbm {

namespace {

[[noreturn]] void load_error(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(ErrorKind::Io, msg.str());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(line.substr(start)));
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string_view>* header,
                           const std::string& source, std::size_t header_line) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) return *idx;
  const auto& name = std::get<std::string>(ref);
  if (!header) load_error(source, header_line, "column '" + name + "' requested but the file has no header");
  for (std::size_t i = 0; i < header->size(); ++i) {
    if ((*header)[i] == name) return i;
  }
  load_error(source, header_line, "missing column '" + name + "'");
}

}  // namespace

PriceSeries parse_price_csv(const std::string& text, const ColumnSpec& spec,
                            const std::string& source) {
  const auto lines = read_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) load_error(source, 1, "file contains no rows");

  const bool named = std::holds_alternative<std::string>(spec.price) ||
                     (spec.timestamp && std::holds_alternative<std::string>(*spec.timestamp));
  bool has_header = false;
  switch (spec.header) {
    case HeaderMode::Present: has_header = true; break;
    case HeaderMode::Absent: has_header = false; break;
    case HeaderMode::Auto: {
      if (named) {
        has_header = true;
      } else {
        const auto fields = split_fields(lines[first]);
        const auto idx = std::get<std::size_t>(spec.price);
        has_header = idx >= fields.size() || !parse_number(fields[idx]);
      }
      break;
    }
  }

  std::vector<std::string_view> header_fields;
  if (has_header) header_fields = split_fields(lines[first]);
  const auto* header = has_header ? &header_fields : nullptr;
  const std::size_t price_col = resolve_column(spec.price, header, source, first + 1);
  std::optional<std::size_t> time_col;
  if (spec.timestamp) time_col = resolve_column(*spec.timestamp, header, source, first + 1);

  PriceSeries series;
  series.label = has_header && price_col < header_fields.size()
                     ? std::string(header_fields[price_col])
                     : std::filesystem::path(source).stem().string();
  for (std::size_t i = first + (has_header ? 1 : 0); i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    const auto fields = split_fields(lines[i]);
    if (price_col >= fields.size() || fields[price_col].empty()) {
      load_error(source, line_no, "missing price field");
    }
    const auto price = parse_number(fields[price_col]);
    if (!price) load_error(source, line_no, "non-numeric price '" + std::string(fields[price_col]) + "'");
    if (!std::isfinite(*price) || *price <= 0.0) {
      load_error(source, line_no, "price must be positive and finite (got " + std::string(fields[price_col]) + ")");
    }
    if (time_col) {
      if (*time_col >= fields.size() || fields[*time_col].empty()) {
        load_error(source, line_no, "missing timestamp field");
      }
      series.timestamps.emplace_back(fields[*time_col]);
    }
    series.prices.push_back(*price);

    if (time_col && series.timestamps.size() >= 2) {
      const auto& prev = series.timestamps[series.timestamps.size() - 2];
      const auto& cur = series.timestamps.back();
      const auto a = parse_number(prev);
      const auto b = parse_number(cur);
      const bool increasing = (a && b) ? *b > *a : cur > prev;
      if (!increasing) {
        load_error(source, line_no, "timestamp '" + cur + "' does not follow '" + prev + "'");
      }
    }
  }
  if (series.prices.empty()) load_error(source, first + 1, "file contains no price rows");
  return series;
}

PriceSeries load_csv(const std::filesystem::path& path, const ColumnSpec& spec) {
  return parse_price_csv(read_file(path), spec, path.string());
}

ReturnsSample log_returns(const PriceSeries& series) {
  if (series.size() < 2) throw_domain("log returns need at least 2 prices");
  std::vector<double> out(series.size() - 1);
  for (std::size_t t = 1; t < series.size(); ++t) {
    out[t - 1] = std::log(series.prices[t] / series.prices[t - 1]);
  }
  return ReturnsSample(std::move(out), SampleSource::Empirical);
}

ReturnsSample load_returns(const std::filesystem::path& path) {
  const auto lines = read_lines(read_file(path));
  std::vector<double> values;
  bool seen_data = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto v = parse_number(line);
    if (!v) {
      if (!seen_data && values.empty()) {
        seen_data = true;  // header
        continue;
      }
      load_error(path.string(), i + 1, "non-numeric return '" + std::string(line) + "'");
    }
    if (!std::isfinite(*v)) load_error(path.string(), i + 1, "return is not finite");
    seen_data = true;
    values.push_back(*v);
  }
  return ReturnsSample(std::move(values), SampleSource::Empirical);
}

}  // namespace ifbm
