#pragma once

#include <string>
#include <vector>

#include "gridfuse/grid.hpp"

namespace gridfuse {

struct ClassScore {
    double precision = 1.0;
    double recall = 1.0;
    double dice = 1.0;
    int64_t support = 0;  // label cells of this class
};

struct ClassScores {
    ClassScore occupied;
    ClassScore free;
};

struct EvalRecord {
    std::string sample_id;
    char config = 'A';  // A-D
    std::string method;  // "ours" | "baseline"
    double kld = 0.0;
    ClassScores scores;
};

enum class KldMode {
    PignisticBernoulli,  // default: Bernoulli over pignistic probabilities
    MassTriplet,         // {F, O, Theta} mass-vector divergence, for sensitivity checks
};

/// Mean per-cell KLD between label and prediction distributions, both
/// clamped to [1e-6, 1 - 1e-6].
double kld_score(const EvidentialGrid& pred, const EvidentialGrid& label,
                 KldMode mode = KldMode::PignisticBernoulli);

/// Per-class precision/recall/dice after thresholding the pignistic
/// occupancy probability at 0.5. Classes with zero support and zero
/// predictions score 1.0 with support flagged as 0.
ClassScores classification_scores(const EvidentialGrid& pred, const EvidentialGrid& label);

struct SummaryRow {
    char config;
    std::string method;
    double kld_q1, kld_med, kld_q3, kld_lo, kld_hi;
    double mean_p_occ, mean_r_occ, mean_d_occ;
    double mean_p_free, mean_r_free, mean_d_free;
    int64_t count;
};

/// Boxplot statistics (whiskers at 1.5 IQR) plus mean class scores per
/// (config, method) pair.
std::vector<SummaryRow> aggregate(const std::vector<EvalRecord>& records);

/// Linear-interpolation quantile at position p*(n+1), 1-based, clamped.
double quantile(std::vector<double> values, double p);

void write_eval_csv(const std::vector<EvalRecord>& records, const std::string& path);
std::vector<EvalRecord> read_eval_csv(const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace gridfuse
