#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lexclass/decision.hpp"
#include "lexclass/error.hpp"

using namespace lexclass;

namespace {

std::vector<ChunkPrediction> chunks(std::vector<std::optional<LabelId>> labels, std::vector<std::optional<double>> conf = {}) {
    std::vector<ChunkPrediction> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({"d", i, labels[i], i < conf.size() ? conf[i] : std::nullopt});
    }
    return out;
}

}  // namespace

TEST(Majority, WorkedCases) {
    const auto a = majority_vote(chunks({0, 0, 1}));
    EXPECT_EQ(a.label, 0);
    EXPECT_EQ(a.support, 2u);
    EXPECT_FALSE(a.abstained);

    EXPECT_EQ(majority_vote(chunks({3, 1})).label, 1);  // tie without confidences -> lower id
    EXPECT_EQ(majority_vote(chunks({3, 1}, {0.9, 0.2})).label, 3);
    EXPECT_EQ(majority_vote(chunks({std::nullopt, 4, std::nullopt})).label, 4);
}

TEST(Majority, AllAbstainedAbstains) {
    const auto d = majority_vote(chunks({std::nullopt, std::nullopt}));
    EXPECT_TRUE(d.abstained);
    EXPECT_FALSE(d.label.has_value());
    EXPECT_EQ(d.support, 0u);
}

TEST(Majority, OrdinalWeights) {
    DecisionOptions o;
    o.ordinal_weights = {3.0};
    const auto d = majority_vote(chunks({2, 5, 5}), o);
    EXPECT_EQ(d.label, 2);
    EXPECT_EQ(d.support, 1u);
    EXPECT_EQ(majority_vote(chunks({2, 5, 5, 5}), o).label, 2);
    EXPECT_EQ(majority_vote(chunks({2, 5, 5, 5, 5}), o).label, 5);
}

TEST(BestConfidence, WorkedCases) {
    EXPECT_EQ(best_confidence(chunks({0, 1}, {0.4, 0.9})).label, 1);
    EXPECT_EQ(best_confidence(chunks({7, 8, 9}, {0.2, 0.9, 0.5})).label, 8);
    EXPECT_EQ(best_confidence(chunks({7, 8}, {0.7, 0.7})).label, 7);
    EXPECT_EQ(best_confidence(chunks({std::nullopt, 8}, {0.99, 0.1})).label, 8);
    EXPECT_TRUE(best_confidence(chunks({std::nullopt, std::nullopt})).abstained);
    EXPECT_THROW(best_confidence(chunks({1, 2})), Error);
}

TEST(FirstChunk, LowestOrdinalAndStrictAbstention) {
    auto preds = chunks({4, 5, 6});
    std::reverse(preds.begin(), preds.end());
    EXPECT_EQ(first_chunk(preds).label, 4);
    EXPECT_TRUE(first_chunk(chunks({std::nullopt, 5})).abstained);
}

TEST(FixedPosition, PicksTheOrdinal) {
    EXPECT_EQ(fixed_position(chunks({4, 5, 6}), 2).label, 6);
    EXPECT_TRUE(fixed_position(chunks({4, 5}), 2).abstained);
    DecisionOptions o;
    o.fixed_position = 1;
    EXPECT_EQ(decide(DecisionRule::kFixedPosition, chunks({4, 5}), o).label, 5);
}

TEST(Rules, NamesRoundTrip) {
    for (auto r : {DecisionRule::kMajority, DecisionRule::kBestConfidence, DecisionRule::kFirstChunk, DecisionRule::kFixedPosition}) {
        EXPECT_EQ(parse_decision_rule(to_string(r)), r);
    }
    EXPECT_THROW(parse_decision_rule("plurality"), Error);
    EXPECT_THROW(majority_vote({}), Error);
}

TEST(Rules, RandomizedProperties) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        std::vector<std::optional<LabelId>> labels;
        std::vector<std::optional<double>> conf;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::bernoulli_distribution(0.15)(rng)) {
                labels.emplace_back();
            } else {
                labels.emplace_back(std::uniform_int_distribution<LabelId>(0, 4)(rng));
            }
            conf.emplace_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        }
        const auto preds = chunks(labels, conf);
        const bool all_abstained = std::none_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });

        for (auto rule : {DecisionRule::kMajority, DecisionRule::kBestConfidence}) {
            const auto d = decide(rule, preds);
            ASSERT_EQ(d.abstained, all_abstained);
            if (!d.abstained) {
                ASSERT_TRUE(std::find(labels.begin(), labels.end(), d.label) != labels.end());
            }
        }

        // The winner has at least as many votes as any other label.
        const auto m = majority_vote(preds);
        if (!m.abstained) {
            for (LabelId l = 0; l < 5; ++l) {
                ASSERT_LE(static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l)), m.support);
            }
        }

        // Order of the input does not change any rule.
        auto shuffled = preds;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto rule : {DecisionRule::kMajority, DecisionRule::kBestConfidence, DecisionRule::kFirstChunk}) {
            ASSERT_EQ(decide(rule, shuffled), decide(rule, preds));
        }

        // A unanimous document yields that label under every rule.
        auto unanimous = preds;
        for (auto& p : unanimous) p.label = 3;
        for (auto rule : {DecisionRule::kMajority, DecisionRule::kBestConfidence, DecisionRule::kFirstChunk}) {
            ASSERT_EQ(decide(rule, unanimous).label, 3);
        }
    }
}

TEST(Rules, DecideAllGroupsByDocument) {
    std::vector<ChunkPrediction> preds{{"b", 0, 1, {}}, {"a", 0, 2, {}}, {"b", 1, 1, {}}, {"a", 1, std::nullopt, {}}};
    const auto ds = decide_all(DecisionRule::kMajority, preds);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].doc_id, "b");
    EXPECT_EQ(ds[0].support, 2u);
    EXPECT_EQ(ds[1].doc_id, "a");
    EXPECT_EQ(ds[1].label, 2);
}

TEST(Rules, JsonlRoundTrip) {
    std::vector<DocumentDecision> ds{{"a", 3, DecisionRule::kMajority, 2, false},
                                     {"b", std::nullopt, DecisionRule::kBestConfidence, 0, true}};
    const auto text = decisions_to_jsonl(ds);
    EXPECT_EQ(parse_decisions_jsonl(text), ds);
    EXPECT_THROW(parse_decisions_jsonl("{\"doc_id\": 3}\n"), Error);
}
