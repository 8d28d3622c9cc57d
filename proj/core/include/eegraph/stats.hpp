#pragma once

#include <string>
#include <vector>

#include "eegraph/dataset.hpp"
#include "eegraph/error.hpp"
#include "eegraph/features.hpp"
#include "eegraph/matrix.hpp"
#include "eegraph/preprocess.hpp"

namespace eegraph {

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of the first sample
  double z = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero rank variance
};

/// Two-sided, normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b);

struct WelchTResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;
};

/// Two-sided Welch's t-test (unequal variances).
WelchTResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

enum class GroupTest { mann_whitney, welch_t };
const char* group_test_name(GroupTest t);
GroupTest group_test_from_name(const std::string& name);

struct ConditionConnectivity {
  Task task = Task::EC;
  Matrix mean_addicted;       // 19 x 19 mean wPLI, addicted group
  Matrix mean_not_addicted;   // same, control group
  Matrix difference;          // addicted - control
};

struct BandPowerTest {
  Task task = Task::EC;
  std::string band;
  double mean_addicted = 0.0;
  double mean_not_addicted = 0.0;
  double statistic = 0.0;  // U or t
  double p_value = 1.0;
};

struct GroupStatsReport {
  std::string test_name;
  std::vector<ConditionConnectivity> connectivity;
  std::vector<BandPowerTest> band_tests;
};

/// Per task: group-mean wPLI matrices and their difference; per task x band:
/// a two-sided group test on per-subject mean band power.
GroupStatsReport group_stats(const Dataset& ds, const PreprocessConfig& pre,
                             const WelchSpec& welch,
                             GroupTest test = GroupTest::mann_whitney,
                             WarningLog* log = nullptr);

}  // namespace eegraph
