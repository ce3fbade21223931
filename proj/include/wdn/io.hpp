#ifndef WDN_IO_HPP_
#define WDN_IO_HPP_

#include <string>
#include <vector>

#include "wdn/sim.hpp"

namespace wdn {

/// Discrete model round-trip as JSON with explicit dimensions.
void save_model_json(const LinearTankModel& model, const std::string& path);
LinearTankModel load_model_json(const std::string& path);

/// Identification dataset as CSV.  Leading comment lines
///   # edge,<id>,<tank>,<neighbor>,<tank_area>
/// carry edge metadata; the header row names the numeric columns
/// h1..hn,u1..um,d_a,q1..qE.  Parse errors name the offending line.
void save_dataset_csv(const TrajectoryDataset& data, const std::string& path);
TrajectoryDataset load_dataset_csv(const std::string& path);

/// Closed-loop trace, one row per hour.
void save_trace_csv(const ClosedLoopTrace& trace, const std::string& path);

/// Experiment summary table; the string form is byte-stable for a given
/// result (fixed column order, shortest round-trip number formatting).
std::string summary_csv_string(const std::vector<CellSummary>& cells);
void save_summary_csv(const std::vector<CellSummary>& cells, const std::string& path);

/// Experiment description loaded from JSON (comments allowed).
struct ExperimentConfig {
  std::vector<std::string> controllers = {"dfmpc", "nompc", "ctmpc-1", "ctmpc-1.5", "ctmpc-2"};
  std::vector<std::string> scenarios = {"normal", "challenging", "extreme"};
  int days = 100;
  int horizon = 24;
  std::uint64_t seed = 1;
  int workers = 1;
  bool soft = true;
  double rho = 1e4;
  Vector h0;  // empty means mid-box default
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

/// Sparse matrix as a "row,col,value" triplet CSV (for inspection).
void save_triplets_csv(const SpMat& A, const std::string& path);

/// Tank-level plot: one polyline per tank, dashed bound lines, red markers
/// on violated hours.
void write_levels_svg(const ClosedLoopTrace& trace, const ConstraintSpec& spec,
                      const std::string& path);

}  // namespace wdn

#endif  // WDN_IO_HPP_
