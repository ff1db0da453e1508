#pragma once

#include "spinbeat/config.hpp"
#include "spinbeat/io.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace spinbeat {

/// Raised when a pipeline stage fails; the message is prefixed with the stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error(stage + " stage: " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ProductRecord {
    std::string name;     ///< path relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::filesystem::path output_dir;
    std::string command;
    std::string config_echo;
    std::map<std::string, double> derived;
    std::vector<std::size_t> cluster_counts;  ///< index k holds clusters of size k+1
    std::vector<ProductRecord> products;
    std::vector<std::pair<std::string, double>> timings;  ///< seconds

    const ProductRecord* product(const std::string& name) const;
    /// Writes manifest.json into output_dir (the manifest is not a product).
    void write() const;
};

/// Results of the time-frequency stage for one normalized series.
struct Analysis {
    Spectrum spectrum;
    Scalogram cwt;
    SSTMap sst;
    std::vector<Band> bands;
    std::vector<std::vector<double>> sst_bands;  ///< parallel to bands
    std::vector<std::vector<double>> cwt_bands;
};

BathRealization build_realization(const RunConfig& config);
ClusterSet build_clusters(const BathRealization& realization, const RunConfig& config);
CorrelationSeries simulate(const BathRealization& realization, const RunConfig& config,
                           const TermMask& mask);
Analysis analyze(std::span<const double> cbar, const TimeGrid& grid, const RunConfig& config);

/// `generate-bath`: realization file only.
RunManifest generate_bath(const RunConfig& config);
/// `simulate`: realization and normalized correlation.
RunManifest simulate_only(const RunConfig& config);
/// `analyze`: spectra, scalograms and band traces from an exported correlation.
RunManifest analyze_file(const RunConfig& config, const std::filesystem::path& correlation);
/// `run`: every stage.
RunManifest run_pipeline(const RunConfig& config);

struct DeviationReport {
    TimeGrid grid;
    std::vector<int> orders;
    std::vector<std::vector<double>> cbar;   ///< per order
    std::vector<double> max_dev;             ///< vs highest order
    std::vector<double> l2_dev;
    std::optional<std::vector<double>> exact_cbar;
    std::vector<double> max_dev_exact;       ///< vs exact, when available
    std::vector<double> l2_dev_exact;
    double window_lo = 0.0;
    double window_hi = 0.0;

    void write(std::ostream& out) const;
};

/// Max-norm and L2 deviation of `a` from `b` over samples whose time lies in
/// [lo, hi]. L2 is the RMS over the window.
std::pair<double, double> deviation(std::span<const double> a, std::span<const double> b,
                                    const TimeGrid& grid, double lo, double hi);

/// `compare-orders`: C-bar for each order plus deviations from the highest
/// order (and from the exact bath when it fits in kExactDimensionCap).
DeviationReport compare_orders(const RunConfig& config, const std::vector<int>& orders);
RunManifest compare_orders_run(const RunConfig& config);

/// `sweep-axis`: one product set per axis on a fixed realization, each with
/// the full run plus channel runs (A+B, A+CD, A+EF; only A+B when secular).
std::vector<RunManifest> sweep_hf_axis(const RunConfig& config,
                                       const std::vector<std::string>& axes);

/// SHA-256 of a file's content, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace spinbeat
