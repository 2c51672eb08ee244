#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fjcal/parallel.hpp"
#include "fjcal/stats.hpp"

namespace fjcal {

using MomentMatrix = Eigen::Matrix<double, kMomentCount, kMomentCount>;
using MomentColumn = Eigen::Matrix<double, kMomentCount, 1>;

struct WeightInfo {
    int block_length = 0;
    int replicates = 0;          // requested
    int failed_replicates = 0;   // dropped because a statistic could not be computed
    std::uint64_t seed = 0;
    double condition_number = 0; // of the covariance
    bool pseudo_inverse = false;
    double cutoff = 0;           // eigenvalue cutoff when pseudo_inverse
    std::string data_hash;       // of the empirical returns, hex

    bool operator==(const WeightInfo&) const = default;
};

/// W, the inverse of the bootstrap covariance of the moment vector.
struct WeightMatrix {
    MomentMatrix entries = MomentMatrix::Identity();
    WeightInfo info;

    bool operator==(const WeightMatrix& o) const { return entries == o.entries && info == o.info; }
};

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kMaxFailedFraction = 0.2;

/// Start positions for one replicate: ceil(n / block_len) draws from 0..n-block_len.
[[nodiscard]] std::vector<std::size_t> block_starts(std::size_t n, std::size_t block_len, std::uint64_t seed);

/// Concatenates r[s..s+block_len) for each start and truncates to r.size().
[[nodiscard]] std::vector<double> assemble_blocks(std::span<const double> r, std::size_t block_len,
                                                  std::span<const std::size_t> starts);

/// Moving block bootstrap replicate of r (no wrap-around).
[[nodiscard]] std::vector<double> moving_block_bootstrap(std::span<const double> r, std::size_t block_len,
                                                         std::uint64_t seed);

struct BootstrapMoments {
    std::vector<MomentVector> moments;  // successful replicates, in replicate order
    int failed = 0;
};

/// Moment vectors of `replicates` bootstrap replicates; replicate i uses
/// derive_seed(seed, Stream::Bootstrap, i). The KS entry compares the
/// replicate to r_emp. Throws if more than 20% of replicates fail.
[[nodiscard]] BootstrapMoments bootstrap_moments(std::span<const double> r_emp, std::size_t block_len,
                                                 int replicates, std::uint64_t seed,
                                                 Execution exec = Execution::Parallel);

/// Unbiased sample covariance, accumulated in input order.
[[nodiscard]] MomentMatrix moment_covariance(std::span<const MomentVector> moments);

/// Symmetric inverse via eigendecomposition; switches to the Moore-Penrose
/// pseudo-inverse when the condition number exceeds kMaxConditionNumber.
[[nodiscard]] WeightMatrix weight_from_covariance(const MomentMatrix& covariance);

[[nodiscard]] WeightMatrix estimate_weight_matrix(std::span<const double> r_emp, std::size_t block_len = 100,
                                                  int replicates = 1000, std::uint64_t seed = 1,
                                                  Execution exec = Execution::Parallel);

[[nodiscard]] std::string weight_matrix_to_json(const WeightMatrix& w);
[[nodiscard]] WeightMatrix weight_matrix_from_json(const std::string& text);

/// Cache file name for (data, block_len, replicates, seed) inside `dir`.
[[nodiscard]] std::filesystem::path weight_cache_path(const std::filesystem::path& dir, std::span<const double> r_emp,
                                                      std::size_t block_len, int replicates, std::uint64_t seed);

}  // namespace fjcal
