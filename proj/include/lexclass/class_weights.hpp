#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexclass/ontology.hpp"

namespace lexclass {

struct WeightConfig {
    double clip_min = 0.1;
    double clip_max = 10.0;
    /// Stand-in count for classes with no examples; drives them to clip_max.
    double epsilon = 1e-6;

    void validate() const;
};

struct ClassWeights {
    std::vector<double> weights;  // index = label id
    WeightConfig config;
    std::vector<std::uint64_t> counts;

    std::size_t size() const { return weights.size(); }
    double operator[](LabelId id) const { return weights[static_cast<std::size_t>(id)]; }

    /// {"weights": [...], "config": {...}, "counts": [...]}
    nlohmann::json to_json() const;
    static ClassWeights from_json(const nlohmann::json& j);
};

/// Unclipped smoothed inverse frequency: ln(1 + total / count).
double smoothed_inverse_frequency(double total, double count);

/// w_c = clamp(ln(1 + N / max(n_c, epsilon)), clip_min, clip_max).
ClassWeights compute_weights(std::span<const std::uint64_t> counts, const WeightConfig& config = {});

/// Unit weights over K classes (plain cross-entropy).
ClassWeights uniform_weights(std::size_t k);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// loss = -w_target * log softmax(logits)_target; gradient_j = w_target * (p_j - [j == target]).
/// The log-sum-exp is shifted by the max logit and accumulated with log1p so
/// confident predictions keep full relative precision in both outputs.
LossAndGradient weighted_cross_entropy(std::span<const double> logits, LabelId target, const ClassWeights& weights);

}  // namespace lexclass
