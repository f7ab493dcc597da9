#pragma once

#include "hamlearn/dataset.hpp"
#include "hamlearn/objective.hpp"
#include "hamlearn/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace hamlearn {

enum class BaselineKind { SGD, Adam, LBFGS, NelderMead };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::Adam;
    double learning_rate = 0.03;

    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    std::size_t lbfgs_memory = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    std::size_t max_line_search = 20;
    double fallback_step = 1e-3;

    double nm_reflect = 1.0;
    double nm_expand = 2.0;
    double nm_contract = 0.5;
    double nm_shrink = 0.5;
    double nm_initial_edge = 0.05;

    void validate() const;
};

/// T iterations from theta0. L-BFGS counts one outer step per iteration
/// (line-search evaluations show up in gradient_calls). Nelder-Mead performs
/// one simplex operation per iteration and records the best vertex; it only
/// calls Objective::value. Runs that exceed kDivergenceThreshold or go
/// non-finite are padded and flagged instead of throwing.
Trajectory run_baseline(const BaselineConfig& config, const Eigen::VectorXd& theta0, Objective& objective,
                        std::size_t T);

struct SweepRow {
    double eta = 0.0;
    std::vector<double> mean_curve;  // T + 1 entries, mean over problems
    double mean_final = 0.0;         // +inf when any run diverged
    double std_final = 0.0;
    double mean_trajectory = 0.0;    // mean over problems of sum_{k>=1} f / T
    std::size_t n_diverged = 0;
    bool flagged = false;
};

struct SweepTable {
    BaselineKind kind = BaselineKind::Adam;
    std::size_t T = 0;
    std::vector<SweepRow> rows;
    std::size_t best = 0;  // argmin of mean_final

    /// Row indices ordered by mean_final, best first.
    std::vector<std::size_t> ranking() const;
};

SweepTable sweep_learning_rates(BaselineKind kind, const std::vector<double>& etas,
                                const std::vector<ProblemInstance>& problems, std::size_t T,
                                const BaselineConfig& base = {}, std::size_t threads = 1);

}  // namespace hamlearn
