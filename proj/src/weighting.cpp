#include "fjcal/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "fjcal/io_util.hpp"
#include "fjcal/rng.hpp"

namespace fjcal {

std::vector<std::size_t> block_starts(std::size_t n, std::size_t block_len, std::uint64_t seed) {
    if (block_len < 2) throw std::invalid_argument("block length must be >= 2");
    if (block_len > n)
        throw std::invalid_argument("block length " + std::to_string(block_len) + " exceeds series length " +
                                    std::to_string(n));
    RandomStream rng(seed);
    const std::size_t positions = n - block_len + 1;
    const std::size_t blocks = (n + block_len - 1) / block_len;
    std::vector<std::size_t> starts(blocks);
    for (auto& s : starts)
        s = std::min(positions - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(positions)));
    return starts;
}

std::vector<double> assemble_blocks(std::span<const double> r, std::size_t block_len,
                                    std::span<const std::size_t> starts) {
    std::vector<double> out;
    out.reserve(starts.size() * block_len);
    for (auto s : starts) {
        if (s + block_len > r.size()) throw std::invalid_argument("block start out of range");
        out.insert(out.end(), r.begin() + static_cast<std::ptrdiff_t>(s),
                   r.begin() + static_cast<std::ptrdiff_t>(s + block_len));
    }
    if (out.size() < r.size()) throw std::invalid_argument("not enough blocks to cover the series");
    out.resize(r.size());
    return out;
}

std::vector<double> moving_block_bootstrap(std::span<const double> r, std::size_t block_len, std::uint64_t seed) {
    const auto starts = block_starts(r.size(), block_len, seed);
    return assemble_blocks(r, block_len, starts);
}

BootstrapMoments bootstrap_moments(std::span<const double> r_emp, std::size_t block_len, int replicates,
                                   std::uint64_t seed, Execution exec) {
    if (replicates < static_cast<int>(kMomentCount) + 1)
        throw std::invalid_argument("need at least " + std::to_string(kMomentCount + 1) + " bootstrap replicates");
    if (block_len < 2 || block_len > r_emp.size())
        throw std::invalid_argument("block length " + std::to_string(block_len) + " invalid for series length " +
                                    std::to_string(r_emp.size()));
    const auto n = static_cast<std::size_t>(replicates);
    std::vector<MomentVector> all(n);
    std::vector<char> ok(n, 0);
    for_each_index(n, exec, [&](std::size_t i) {
        const auto rep = moving_block_bootstrap(r_emp, block_len, derive_seed(seed, Stream::Bootstrap, i));
        try {
            all[i] = moment_vector(rep, r_emp);
            ok[i] = 1;
        } catch (const StatisticError&) {
        }
    });
    BootstrapMoments out;
    for (std::size_t i = 0; i < n; ++i) {
        if (ok[i])
            out.moments.push_back(all[i]);
        else
            ++out.failed;
    }
    if (out.failed > kMaxFailedFraction * replicates)
        throw std::runtime_error("bootstrap: " + std::to_string(out.failed) + " of " + std::to_string(replicates) +
                                 " replicates failed (limit 20%)");
    return out;
}

MomentMatrix moment_covariance(std::span<const MomentVector> moments) {
    if (moments.size() < 2) throw std::invalid_argument("covariance needs at least two moment vectors");
    MomentColumn mean = MomentColumn::Zero();
    for (const auto& m : moments)
        for (std::size_t j = 0; j < kMomentCount; ++j) mean(static_cast<Eigen::Index>(j)) += m[j];
    mean /= static_cast<double>(moments.size());
    MomentMatrix cov = MomentMatrix::Zero();
    for (const auto& m : moments) {
        MomentColumn d;
        for (std::size_t j = 0; j < kMomentCount; ++j)
            d(static_cast<Eigen::Index>(j)) = m[j] - mean(static_cast<Eigen::Index>(j));
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(moments.size() - 1);
    return cov;
}

WeightMatrix weight_from_covariance(const MomentMatrix& covariance) {
    if (!covariance.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
    const MomentMatrix sym = 0.5 * (covariance + covariance.transpose());
    Eigen::SelfAdjointEigenSolver<MomentMatrix> eig(sym);
    const auto& lambda = eig.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double lmin = lambda.minCoeff();
    if (!(lmax > 0)) throw std::invalid_argument("covariance has no positive eigenvalue");

    WeightMatrix w;
    w.info.condition_number = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    w.info.pseudo_inverse = !(w.info.condition_number <= kMaxConditionNumber);
    w.info.cutoff = w.info.pseudo_inverse ? lmax / kMaxConditionNumber : 0.0;

    MomentColumn inv;
    for (Eigen::Index i = 0; i < inv.size(); ++i)
        inv(i) = (w.info.pseudo_inverse && lambda(i) <= w.info.cutoff) ? 0.0 : 1.0 / lambda(i);
    const MomentMatrix raw = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    w.entries = 0.5 * (raw + raw.transpose());
    return w;
}

WeightMatrix estimate_weight_matrix(std::span<const double> r_emp, std::size_t block_len, int replicates,
                                    std::uint64_t seed, Execution exec) {
    const auto boot = bootstrap_moments(r_emp, block_len, replicates, seed, exec);
    auto w = weight_from_covariance(moment_covariance(boot.moments));
    w.info.block_length = static_cast<int>(block_len);
    w.info.replicates = replicates;
    w.info.failed_replicates = boot.failed;
    w.info.seed = seed;
    w.info.data_hash = hex64(fnv1a(r_emp));
    return w;
}

std::string weight_matrix_to_json(const WeightMatrix& w) {
    nlohmann::ordered_json j;
    j["moments"] = std::vector<std::string>(kMomentNames.begin(), kMomentNames.end());
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.entries.rows(); ++i) {
        std::vector<double> row(w.entries.cols());
        for (Eigen::Index k = 0; k < w.entries.cols(); ++k) row[static_cast<std::size_t>(k)] = w.entries(i, k);
        rows.push_back(row);
    }
    j["entries"] = rows;
    const auto& m = w.info;
    j["metadata"] = {{"block_length", m.block_length},
                     {"replicates", m.replicates},
                     {"failed_replicates", m.failed_replicates},
                     {"seed", m.seed},
                     {"condition_number", std::isfinite(m.condition_number) ? nlohmann::json(m.condition_number)
                                                                              : nlohmann::json("inf")},
                     {"pseudo_inverse", m.pseudo_inverse},
                     {"cutoff", m.cutoff},
                     {"data_hash", m.data_hash}};
    return j.dump(2) + "\n";
}

WeightMatrix weight_matrix_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    WeightMatrix w;
    const auto& rows = j.at("entries");
    if (rows.size() != kMomentCount) throw std::runtime_error("weight matrix JSON: expected 9 rows");
    for (std::size_t i = 0; i < kMomentCount; ++i) {
        if (rows[i].size() != kMomentCount) throw std::runtime_error("weight matrix JSON: expected 9 columns");
        for (std::size_t k = 0; k < kMomentCount; ++k)
            w.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
    const auto& m = j.at("metadata");
    w.info.block_length = m.at("block_length").get<int>();
    w.info.replicates = m.at("replicates").get<int>();
    w.info.failed_replicates = m.at("failed_replicates").get<int>();
    w.info.seed = m.at("seed").get<std::uint64_t>();
    w.info.condition_number = m.at("condition_number").is_string() ? std::numeric_limits<double>::infinity()
                                                                    : m.at("condition_number").get<double>();
    w.info.pseudo_inverse = m.at("pseudo_inverse").get<bool>();
    w.info.cutoff = m.at("cutoff").get<double>();
    w.info.data_hash = m.at("data_hash").get<std::string>();
    return w;
}

std::filesystem::path weight_cache_path(const std::filesystem::path& dir, std::span<const double> r_emp,
                                        std::size_t block_len, int replicates, std::uint64_t seed) {
    return dir / ("W_" + hex64(fnv1a(r_emp)) + "_b" + std::to_string(block_len) + "_r" + std::to_string(replicates) +
                  "_s" + std::to_string(seed) + ".json");
}

}  // namespace fjcal
