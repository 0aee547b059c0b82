#pragma once

// Asynchronous event data: ingestion, clock rescaling and log-returns.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace asyncov {

/// One asset's observations on the original clock.
///
/// Construction strips missing entries (NaN time or price), then enforces
/// strictly increasing times, strictly positive prices and at least two
/// observations.
class EventSeries {
 public:
  EventSeries(std::string asset_id, std::vector<double> times, std::vector<double> prices);

  const std::string& asset_id() const noexcept { return asset_id_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& prices() const noexcept { return prices_; }
  std::size_t size() const noexcept { return times_.size(); }

  friend bool operator==(const EventSeries&, const EventSeries&) = default;

 private:
  std::string asset_id_;
  std::vector<double> times_;
  std::vector<double> prices_;
};

/// Log-price increments on the rescaled [0, 2pi] clock.
///
/// `deltas[h]` is the increment over [times[h], next observation time]; it is
/// attached to the left endpoint. `last_time` is the rescaled time of the
/// final observation, which carries no increment but bounds the last gap.
struct ReturnSeries {
  std::string asset_id;
  std::vector<double> times;
  std::vector<double> deltas;
  double last_time = 0.0;

  std::size_t n_returns() const noexcept { return deltas.size(); }
};

/// Common affine map of every asset's clock onto [0, 2pi].
struct PanelTimes {
  std::vector<std::vector<double>> rescaled;
  double t_min = 0.0;
  double t_max = 0.0;

  double span() const noexcept { return t_max - t_min; }
};

enum class TableLayout { Auto, Long, Wide };

struct AssetIngestStats {
  std::string asset_id;
  std::size_t rows = 0;
  std::size_t missing_cells = 0;
  std::size_t merged_duplicates = 0;
  std::size_t observations = 0;
};

struct IngestDiagnostics {
  TableLayout layout = TableLayout::Long;
  std::size_t data_rows = 0;
  std::vector<AssetIngestStats> assets;

  std::string to_json() const;
};

struct IngestResult {
  std::vector<EventSeries> series;
  IngestDiagnostics diagnostics;
};

/// Parses a long (`asset,time,price,volume`) or wide (`time,<asset>...`) CSV
/// table. Lines starting with '#' are metadata and ignored. Same-timestamp
/// trades of one asset are merged at their volume-weighted average price
/// (wide rows weigh equally).
IngestResult ingest_taq(std::istream& in, TableLayout layout = TableLayout::Auto);
IngestResult ingest_taq_file(const std::string& path, TableLayout layout = TableLayout::Auto);

/// Maps t to 2pi (t - t_min) / (t_max - t_min) with panel-wide extrema.
PanelTimes rescale_times(std::span<const EventSeries> series);

/// Same map with caller-supplied bounds, used when a subset of the events
/// must keep the full sample's clock.
PanelTimes rescale_times(std::span<const EventSeries> series, double t_min, double t_max);

ReturnSeries log_returns(const EventSeries& series, std::span<const double> rescaled_times);
ReturnSeries log_returns(const EventSeries& series, const PanelTimes& panel, std::size_t asset);

/// Rescales and differences a whole panel.
std::vector<ReturnSeries> panel_returns(std::span<const EventSeries> series);
std::vector<ReturnSeries> panel_returns(std::span<const EventSeries> series, double t_min,
                                        double t_max);

/// Smallest gap between consecutive rescaled observation times.
double min_gap(const ReturnSeries& series);

/// floor(pi / min_gap) for one asset.
int nyquist_cutoff(const ReturnSeries& series);

/// Minimum per-asset Nyquist cutoff across the panel.
int nyquist_cutoff(std::span<const ReturnSeries> series);

}  // namespace asyncov
