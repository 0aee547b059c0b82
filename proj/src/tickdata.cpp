#include "asyncov/tickdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "asyncov/error.hpp"

namespace asyncov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                        : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line, std::string_view what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorKind::Parse,
                "line " + std::to_string(line) + ": cannot parse " + std::string(what) + " '" +
                    std::string(field) + "'",
                line);
  }
  return value;
}

struct Trade {
  double time;
  double price;
  double volume;
};

struct AssetBucket {
  std::string id;
  std::vector<Trade> trades;
  std::size_t missing = 0;
};

// Sorts by time and merges equal timestamps at the volume-weighted price.
std::size_t merge_ties(std::vector<Trade>& trades, std::vector<double>& times,
                       std::vector<double>& prices) {
  std::stable_sort(trades.begin(), trades.end(),
                   [](const Trade& a, const Trade& b) { return a.time < b.time; });
  std::size_t merged = 0;
  for (std::size_t i = 0; i < trades.size();) {
    std::size_t j = i;
    double pv = 0.0;
    double v = 0.0;
    while (j < trades.size() && trades[j].time == trades[i].time) {
      pv += trades[j].price * trades[j].volume;
      v += trades[j].volume;
      ++j;
    }
    times.push_back(trades[i].time);
    prices.push_back(j - i == 1 ? trades[i].price : pv / v);
    merged += j - i - 1;
    i = j;
  }
  return merged;
}

IngestResult finish(std::vector<AssetBucket>& buckets, TableLayout layout, std::size_t rows) {
  IngestResult result;
  result.diagnostics.layout = layout;
  result.diagnostics.data_rows = rows;
  for (auto& bucket : buckets) {
    AssetIngestStats stats;
    stats.asset_id = bucket.id;
    stats.rows = bucket.trades.size() + bucket.missing;
    stats.missing_cells = bucket.missing;
    std::vector<double> times;
    std::vector<double> prices;
    stats.merged_duplicates = merge_ties(bucket.trades, times, prices);
    stats.observations = times.size();
    if (times.size() < 2) {
      throw Error(ErrorKind::Underpopulated, "asset '" + bucket.id + "' has " +
                                                 std::to_string(times.size()) +
                                                 " observation(s); at least 2 required");
    }
    result.series.emplace_back(bucket.id, std::move(times), std::move(prices));
    result.diagnostics.assets.push_back(stats);
  }
  return result;
}

IngestResult ingest_long(const std::vector<std::string_view>& header,
                         const std::vector<std::pair<std::size_t, std::string>>& lines) {
  std::ptrdiff_t asset_col = -1, time_col = -1, price_col = -1, volume_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "asset") asset_col = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == "time") time_col = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == "price") price_col = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == "volume") volume_col = static_cast<std::ptrdiff_t>(c);
  }
  if (asset_col < 0 || time_col < 0 || price_col < 0) {
    throw Error(ErrorKind::Parse, "long table header must contain asset,time,price[,volume]");
  }

  std::vector<AssetBucket> buckets;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& [lineno, text] : lines) {
    const auto fields = split_fields(text);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  lineno);
    }
    const std::string asset(fields[static_cast<std::size_t>(asset_col)]);
    if (asset.empty()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": empty asset id", lineno);
    }
    const double t = parse_number(fields[static_cast<std::size_t>(time_col)], lineno, "time");
    const double p = parse_number(fields[static_cast<std::size_t>(price_col)], lineno, "price");
    const double v = volume_col < 0
                         ? 1.0
                         : parse_number(fields[static_cast<std::size_t>(volume_col)], lineno,
                                        "volume");
    if (p <= 0.0) {
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(lineno) + ": non-positive price for '" + asset + "'",
                  lineno);
    }
    if (v <= 0.0) {
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(lineno) + ": non-positive volume for '" + asset + "'",
                  lineno);
    }
    auto [it, inserted] = index.try_emplace(asset, buckets.size());
    if (inserted) buckets.push_back(AssetBucket{asset, {}, 0});
    buckets[it->second].trades.push_back(Trade{t, p, v});
  }
  return finish(buckets, TableLayout::Long, lines.size());
}

IngestResult ingest_wide(const std::vector<std::string_view>& header,
                         const std::vector<std::pair<std::size_t, std::string>>& lines) {
  if (header.size() < 2) {
    throw Error(ErrorKind::Parse, "wide table needs a time column and at least one asset");
  }
  std::vector<AssetBucket> buckets;
  for (std::size_t c = 1; c < header.size(); ++c) {
    buckets.push_back(AssetBucket{std::string(header[c]), {}, 0});
  }
  for (const auto& [lineno, text] : lines) {
    const auto fields = split_fields(text);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  lineno);
    }
    const double t = parse_number(fields[0], lineno, "time");
    for (std::size_t c = 1; c < fields.size(); ++c) {
      auto& bucket = buckets[c - 1];
      if (fields[c].empty() || fields[c] == "NaN" || fields[c] == "NA" || fields[c] == "nan") {
        ++bucket.missing;
        continue;
      }
      const double p = parse_number(fields[c], lineno, "price");
      if (p <= 0.0) {
        throw Error(ErrorKind::Validation,
                    "line " + std::to_string(lineno) + ": non-positive price for '" +
                        bucket.id + "'",
                    lineno);
      }
      bucket.trades.push_back(Trade{t, p, 1.0});
    }
  }
  return finish(buckets, TableLayout::Wide, lines.size());
}

const char* layout_name(TableLayout layout) {
  switch (layout) {
    case TableLayout::Long: return "long";
    case TableLayout::Wide: return "wide";
    case TableLayout::Auto: return "auto";
  }
  return "auto";
}

}  // namespace

EventSeries::EventSeries(std::string asset_id, std::vector<double> times,
                         std::vector<double> prices)
    : asset_id_(std::move(asset_id)) {
  if (times.size() != prices.size()) {
    throw Error(ErrorKind::Validation, "asset '" + asset_id_ + "': " +
                                           std::to_string(times.size()) + " times but " +
                                           std::to_string(prices.size()) + " prices");
  }
  times_.reserve(times.size());
  prices_.reserve(prices.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::isnan(times[i]) || std::isnan(prices[i])) continue;
    if (!std::isfinite(times[i])) {
      throw Error(ErrorKind::Validation, "asset '" + asset_id_ + "': non-finite timestamp");
    }
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw Error(ErrorKind::Validation, "asset '" + asset_id_ + "': non-positive price at index " +
                                             std::to_string(i));
    }
    if (!times_.empty() && !(times[i] > times_.back())) {
      throw Error(ErrorKind::Validation,
                  "asset '" + asset_id_ + "': timestamps not strictly increasing at index " +
                      std::to_string(i));
    }
    times_.push_back(times[i]);
    prices_.push_back(prices[i]);
  }
  if (times_.size() < 2) {
    throw Error(ErrorKind::Underpopulated, "asset '" + asset_id_ + "' has " +
                                               std::to_string(times_.size()) +
                                               " observation(s); at least 2 required");
  }
}

std::string IngestDiagnostics::to_json() const {
  nlohmann::ordered_json j;
  j["layout"] = layout_name(layout);
  j["data_rows"] = data_rows;
  auto& arr = j["assets"] = nlohmann::ordered_json::array();
  for (const auto& a : assets) {
    arr.push_back({{"asset", a.asset_id},
                   {"rows", a.rows},
                   {"missing_cells", a.missing_cells},
                   {"merged_duplicates", a.merged_duplicates},
                   {"observations", a.observations}});
  }
  return j.dump(2);
}

IngestResult ingest_taq(std::istream& in, TableLayout layout) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string header_text;
  std::size_t header_line = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_line == 0) {
      header_text = std::string(t);
      header_line = lineno;
    } else {
      lines.emplace_back(lineno, std::string(t));
    }
  }
  if (header_line == 0) throw Error(ErrorKind::Parse, "input table has no header row");

  const auto header = split_fields(header_text);
  if (layout == TableLayout::Auto) {
    const bool has_asset = std::find(header.begin(), header.end(), "asset") != header.end();
    layout = has_asset ? TableLayout::Long : TableLayout::Wide;
  }
  if (layout == TableLayout::Wide && (header.empty() || header[0] != "time")) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(header_line) +
                                      ": wide table header must start with 'time'",
                header_line);
  }
  return layout == TableLayout::Long ? ingest_long(header, lines) : ingest_wide(header, lines);
}

IngestResult ingest_taq_file(const std::string& path, TableLayout layout) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return ingest_taq(in, layout);
}

PanelTimes rescale_times(std::span<const EventSeries> series) {
  if (series.empty()) throw Error(ErrorKind::Validation, "rescale_times needs at least one series");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    lo = std::min(lo, s.times().front());
    hi = std::max(hi, s.times().back());
  }
  return rescale_times(series, lo, hi);
}

PanelTimes rescale_times(std::span<const EventSeries> series, double t_min, double t_max) {
  if (!(t_max > t_min)) {
    throw Error(ErrorKind::DegenerateSpan, "time span is degenerate: t_max must exceed t_min");
  }
  PanelTimes panel;
  panel.t_min = t_min;
  panel.t_max = t_max;
  const double scale = kTwoPi / (t_max - t_min);
  panel.rescaled.reserve(series.size());
  for (const auto& s : series) {
    std::vector<double> r(s.size());
    for (std::size_t h = 0; h < s.size(); ++h) {
      const double t = s.times()[h];
      if (t < t_min || t > t_max) {
        throw Error(ErrorKind::Domain, "asset '" + s.asset_id() + "' has a timestamp outside [" +
                                           std::to_string(t_min) + ", " +
                                           std::to_string(t_max) + "]");
      }
      // Pin the extrema so they map to exactly 0 and 2pi.
      r[h] = t == t_min ? 0.0 : (t == t_max ? kTwoPi : scale * (t - t_min));
    }
    panel.rescaled.push_back(std::move(r));
  }
  return panel;
}

ReturnSeries log_returns(const EventSeries& series, std::span<const double> rescaled_times) {
  if (rescaled_times.size() != series.size()) {
    throw Error(ErrorKind::Dimension, "rescaled time vector does not match series length");
  }
  ReturnSeries out;
  out.asset_id = series.asset_id();
  const auto& p = series.prices();
  out.times.assign(rescaled_times.begin(), rescaled_times.end() - 1);
  out.deltas.resize(series.size() - 1);
  double prev = std::log(p[0]);
  for (std::size_t h = 0; h + 1 < p.size(); ++h) {
    const double next = std::log(p[h + 1]);
    out.deltas[h] = next - prev;
    prev = next;
  }
  out.last_time = rescaled_times.back();
  return out;
}

ReturnSeries log_returns(const EventSeries& series, const PanelTimes& panel, std::size_t asset) {
  if (asset >= panel.rescaled.size()) {
    throw Error(ErrorKind::Dimension, "asset index out of range for panel");
  }
  return log_returns(series, panel.rescaled[asset]);
}

std::vector<ReturnSeries> panel_returns(std::span<const EventSeries> series) {
  const auto panel = rescale_times(series);
  std::vector<ReturnSeries> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out.push_back(log_returns(series[i], panel, i));
  return out;
}

std::vector<ReturnSeries> panel_returns(std::span<const EventSeries> series, double t_min,
                                        double t_max) {
  const auto panel = rescale_times(series, t_min, t_max);
  std::vector<ReturnSeries> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out.push_back(log_returns(series[i], panel, i));
  return out;
}

double min_gap(const ReturnSeries& series) {
  if (series.times.empty()) {
    throw Error(ErrorKind::Underpopulated, "asset '" + series.asset_id + "' has no returns");
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h + 1 < series.times.size(); ++h) {
    gap = std::min(gap, series.times[h + 1] - series.times[h]);
  }
  gap = std::min(gap, series.last_time - series.times.back());
  return gap;
}

int nyquist_cutoff(const ReturnSeries& series) {
  const double gap = min_gap(series);
  if (!(gap > 0.0)) {
    throw Error(ErrorKind::DegenerateSpacing,
                "asset '" + series.asset_id + "' has coincident rescaled times");
  }
  // Half of N0 = 2pi / gap. The relative guard keeps grids whose spacing is an
  // exact fraction of 2pi from losing a mode to rounding in the differences.
  const double half = std::numbers::pi / gap;
  const double guarded = std::floor(half * (1.0 + 1e-9));
  if (guarded > static_cast<double>(std::numeric_limits<int>::max())) {
    throw Error(ErrorKind::DegenerateSpacing,
                "asset '" + series.asset_id + "' has a minimum gap too small for an int cutoff");
  }
  return static_cast<int>(guarded);
}

int nyquist_cutoff(std::span<const ReturnSeries> series) {
  if (series.empty()) throw Error(ErrorKind::Validation, "nyquist_cutoff needs at least one series");
  int n = std::numeric_limits<int>::max();
  for (const auto& s : series) n = std::min(n, nyquist_cutoff(s));
  return n;
}

}  // namespace asyncov
