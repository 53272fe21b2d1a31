// SPDX-License-Identifier: Apache-2.0
//
// Synthetic data laws with known ground truth. Inputs are standard normal
// (identity covariance), so for the square loss the expected risk is
// ||f - w*||^2 + sigma^2 exactly.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sgdlab/rng.hpp"
#include "sgdlab/types.hpp"

namespace sgdlab {

enum class DistributionKind { LinearGaussian, LogisticGaussian, CustomEmpirical };

std::string to_string(DistributionKind kind);

class DataDistribution {
public:
    /// y = <w*, x> + sigma * eps, with x ~ N(0, I) and eps ~ N(0, 1).
    static DataDistribution linear_gaussian(Vector w_star, double noise_sigma);
    /// y in {-1, +1} with P(y = +1 | x) = 1 / (1 + exp(-<w*, x>)), x ~ N(0, I).
    static DataDistribution logistic_gaussian(Vector w_star);
    /// Uniform resampling from a fixed pool of observations.
    static DataDistribution custom_empirical(std::vector<Sample> pool);

    DistributionKind kind() const noexcept { return kind_; }
    Eigen::Index dimension() const noexcept { return w_star_.size(); }
    const Vector& w_star() const noexcept { return w_star_; }
    double noise_sigma() const noexcept { return noise_sigma_; }
    bool analytic_minimizer_available() const noexcept {
        return kind_ == DistributionKind::LinearGaussian;
    }
    const std::vector<Sample>& pool() const noexcept { return *pool_; }

    /// Deterministic in (key, index); distinct indices give independent draws.
    Sample draw(StreamKey key, std::uint64_t index) const;

private:
    DataDistribution() = default;

    DistributionKind kind_ = DistributionKind::LinearGaussian;
    Vector w_star_;
    double noise_sigma_ = 0.0;
    std::shared_ptr<const std::vector<Sample>> pool_;
};

inline DataDistribution make_linear_gaussian(Vector w_star, double noise_sigma) {
    return DataDistribution::linear_gaussian(std::move(w_star), noise_sigma);
}

/// Draw `index` of the data stream for `seed`.
inline Sample draw(const DataDistribution& dist, std::uint64_t seed,
                   std::uint64_t index) {
    return dist.draw(StreamKey{seed, streams::kData}, index);
}

/// S_n = z_0, ..., z_{n-1} in online presentation order.
struct Dataset {
    std::vector<Sample> samples;
    std::uint64_t seed = 0;
    std::string origin;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

/// The first n draws of the data stream for `seed`; the same draws run_sgd consumes.
Dataset sample_dataset(const DataDistribution& dist, std::uint64_t seed,
                       std::size_t n);

}  // namespace sgdlab
