// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/distribution.hpp"

#include <cmath>

namespace sgdlab {

std::string to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::LinearGaussian: return "linear-gaussian";
        case DistributionKind::LogisticGaussian: return "logistic-gaussian";
        case DistributionKind::CustomEmpirical: return "custom-empirical";
    }
    return "unknown";
}

DataDistribution DataDistribution::linear_gaussian(Vector w_star,
                                                   double noise_sigma) {
    if (w_star.size() == 0) throw InvalidArgument("w_star must be nonempty");
    require_finite(w_star, "w_star");
    if (!std::isfinite(noise_sigma) || noise_sigma < 0.0)
        throw InvalidArgument("noise_sigma must be finite and >= 0");
    DataDistribution d;
    d.kind_ = DistributionKind::LinearGaussian;
    d.w_star_ = std::move(w_star);
    d.noise_sigma_ = noise_sigma;
    return d;
}

DataDistribution DataDistribution::logistic_gaussian(Vector w_star) {
    if (w_star.size() == 0) throw InvalidArgument("w_star must be nonempty");
    require_finite(w_star, "w_star");
    DataDistribution d;
    d.kind_ = DistributionKind::LogisticGaussian;
    d.w_star_ = std::move(w_star);
    return d;
}

DataDistribution DataDistribution::custom_empirical(std::vector<Sample> pool) {
    if (pool.empty()) throw InvalidArgument("empirical pool must be nonempty");
    const Eigen::Index p = pool.front().x.size();
    for (const Sample& s : pool) {
        require_dimension(s.x, p);
        require_finite(s.x, "pool sample");
        if (!std::isfinite(s.y)) throw InvalidArgument("pool label is not finite");
    }
    DataDistribution d;
    d.kind_ = DistributionKind::CustomEmpirical;
    d.w_star_ = Vector::Zero(p);
    d.pool_ = std::make_shared<const std::vector<Sample>>(std::move(pool));
    return d;
}

Sample DataDistribution::draw(StreamKey key, std::uint64_t index) const {
    const Eigen::Index p = dimension();
    switch (kind_) {
        case DistributionKind::LinearGaussian: {
            // p inputs followed by the noise variate, two normals per block.
            Vector buf(p + 1);
            fill_normals(key, index, 0, {buf.data(), static_cast<std::size_t>(p + 1)});
            Sample s{buf.head(p), 0.0};
            s.y = w_star_.dot(s.x) + noise_sigma_ * buf[p];
            return s;
        }
        case DistributionKind::LogisticGaussian: {
            Sample s{Vector(p), 0.0};
            fill_normals(key, index, 0, {s.x.data(), static_cast<std::size_t>(p)});
            const auto label_block = static_cast<std::uint32_t>((p + 1) / 2);
            const double u = uniform_pair(key, index, label_block)[0];
            const double prob_pos = 1.0 / (1.0 + std::exp(-w_star_.dot(s.x)));
            s.y = u < prob_pos ? 1.0 : -1.0;
            return s;
        }
        case DistributionKind::CustomEmpirical: {
            const double u = uniform_pair(key, index, 0)[0];
            auto i = static_cast<std::size_t>(u * static_cast<double>(pool_->size()));
            if (i >= pool_->size()) i = pool_->size() - 1;
            return (*pool_)[i];
        }
    }
    return {};
}

Dataset sample_dataset(const DataDistribution& dist, std::uint64_t seed,
                       std::size_t n) {
    Dataset data;
    data.seed = seed;
    data.origin = to_string(dist.kind());
    data.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) data.samples.push_back(draw(dist, seed, i));
    return data;
}

}  // namespace sgdlab
