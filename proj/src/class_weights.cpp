#include "lexclass/class_weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lexclass/error.hpp"

namespace lexclass {

void WeightConfig::validate() const {
    if (!(clip_min > 0.0) || !(clip_max >= clip_min) || !std::isfinite(clip_max)) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("clip bounds must satisfy 0 < clip_min <= clip_max (got {}, {})", clip_min, clip_max));
    }
    if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
}

nlohmann::json ClassWeights::to_json() const {
    return {{"weights", weights},
            {"config", {{"clip_min", config.clip_min}, {"clip_max", config.clip_max}, {"epsilon", config.epsilon}}},
            {"counts", counts}};
}

ClassWeights ClassWeights::from_json(const nlohmann::json& j) {
    try {
        ClassWeights w;
        w.weights = j.at("weights").get<std::vector<double>>();
        const auto& c = j.at("config");
        w.config = {c.at("clip_min").get<double>(), c.at("clip_max").get<double>(), c.at("epsilon").get<double>()};
        w.counts = j.value("counts", std::vector<std::uint64_t>{});
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("malformed weights file: ") + e.what());
    }
}

double smoothed_inverse_frequency(double total, double count) { return std::log1p(total / count); }

ClassWeights compute_weights(std::span<const std::uint64_t> counts, const WeightConfig& config) {
    config.validate();
    if (counts.size() < 2) throw Error(ErrorCode::kInvalidArgument, "class weights need at least two classes");
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) throw Error(ErrorCode::kInvalidArgument, "class counts are all zero");

    ClassWeights out;
    out.config = config;
    out.counts.assign(counts.begin(), counts.end());
    out.weights.reserve(counts.size());
    for (const auto n : counts) {
        const double effective = n == 0 ? config.epsilon : static_cast<double>(n);
        const double w = smoothed_inverse_frequency(static_cast<double>(total), effective);
        out.weights.push_back(std::clamp(w, config.clip_min, config.clip_max));
    }
    return out;
}

ClassWeights uniform_weights(std::size_t k) {
    ClassWeights out;
    out.config = {1.0, 1.0, 1e-6};
    out.weights.assign(k, 1.0);
    return out;
}

LossAndGradient weighted_cross_entropy(std::span<const double> logits, LabelId target, const ClassWeights& weights) {
    const std::size_t k = logits.size();
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "cross-entropy needs at least two logits");
    if (weights.size() != k) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("{} logits but {} class weights", k, weights.size()));
    }
    if (target < 0 || static_cast<std::size_t>(target) >= k) {
        throw Error(ErrorCode::kOutOfRange, fmt::format("target {} out of range for {} classes", target, k));
    }
    for (double x : logits) {
        if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "non-finite logit");
    }

    const auto t = static_cast<std::size_t>(target);
    const std::size_t top = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    const double shift = logits[top];

    // exp(x_j - max) for every j; the max term is exactly 1 and kept out of `rest`.
    std::vector<double> e(k);
    double rest = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        e[j] = j == top ? 1.0 : std::exp(logits[j] - shift);
        if (j != top) rest += e[j];
    }
    const double denom = 1.0 + rest;
    const double w = weights[target];

    LossAndGradient out;
    // When the target is the arg-max, shift - x_t is exactly 0 and the loss is log1p(rest).
    out.loss = w * ((shift - logits[t]) + std::log1p(rest));

    out.gradient.resize(k);
    double others = 0.0;  // sum of p_j over j != t
    for (std::size_t j = 0; j < k; ++j) {
        if (j == t) continue;
        const double p = e[j] / denom;
        out.gradient[j] = w * p;
        others += e[j];
    }
    out.gradient[t] = -w * (others / denom);  // p_t - 1 without cancellation
    return out;
}

}  // namespace lexclass
