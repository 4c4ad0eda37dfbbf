/*
 Copyright 2026 The dmdlpv Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DMDLPV_REPRODUCE_HPP
#define DMDLPV_REPRODUCE_HPP

#include "dmdlpv/config.hpp"

#include <string>
#include <vector>

namespace dmdlpv {

struct ReproduceCheck {
    std::string name;
    bool passed = false;
    bool required = true;  ///< informational checks do not affect the verdict
    std::string detail;
};

struct ReproduceReport {
    std::string target;
    std::vector<ReproduceCheck> checks;
    std::vector<std::string> files;  ///< written, relative to the output directory

    bool passed() const;
    std::string summary() const;
};

/// table1 | pod-sweep | local-tables | sim-test | exp2
std::vector<std::string> reproduce_targets();

/// The config each target uses when none is supplied.
ExperimentConfig default_config_for(const std::string& target);

/// Runs one pinned-seed pipeline, writes its CSV bundle into out_dir (created
/// if needed) plus <target>_summary.txt, and returns the acceptance checks.
ReproduceReport reproduce(const std::string& target, const ExperimentConfig& config,
                          const std::string& out_dir, unsigned threads = 1);

/// Rank lists used by the targets.
std::vector<Index> table1_ranks();
std::vector<Index> pod_sweep_ranks(Index n_states);
std::vector<Index> local_table_ranks();

/// RMS of (model - truth) over RMS deviation of truth from its mean.
double probe_error_ratio(const ProbeSeries& probe);

} // namespace dmdlpv

#endif // DMDLPV_REPRODUCE_HPP
