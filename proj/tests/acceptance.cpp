// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "lexclass/chunker.hpp"
#include "lexclass/class_weights.hpp"
#include "lexclass/cli.hpp"
#include "lexclass/decision.hpp"
#include "lexclass/eval.hpp"
#include "lexclass/prompt.hpp"
#include "lexclass/retrieval.hpp"
#include "lexclass/tokenizer.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lexclass;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kChunkerSeconds = 5.0;
constexpr double kWeightTolerance = 1e-12;
constexpr double kGradientStep = 1e-5;
constexpr double kGradientTolerance = 1e-6;
constexpr double kUnitWeightTolerance = 1e-12;
constexpr double kMetricsTolerance = 1e-12;
constexpr double kPipelineSeconds = 30.0;

/// Collects the first failure message of a criterion.
struct Check {
    std::string failure;
    std::string note;

    bool ok() const { return failure.empty(); }
    void expect(bool condition, const std::string& what) {
        if (!condition && failure.empty()) failure = what;
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- chunker ---------------------------------------------------------------

Check chunker_suite() {
    Check c;
    const auto start = Clock::now();
    c.expect(plan_spans(1000, {ChunkStrategy::kStride, 512, 64, 5000}) ==
                 std::vector<TokenSpan>{{0, 512}, {448, 960}, {896, 1000}},
             "worked stride example");

    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 1000 && c.ok(); ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3000)(rng);
        const std::size_t w = std::uniform_int_distribution<std::size_t>(1, 700)(rng);
        const std::size_t o = std::uniform_int_distribution<std::size_t>(0, w - 1)(rng);
        const auto spans = plan_spans(n, {ChunkStrategy::kStride, w, o, 5000});
        const auto where = fmt::format("n={} window={} overlap={}", n, w, o);

        // Coverage: starts at 0, ends at n, no gaps.
        c.expect(!spans.empty() && spans.front().start == 0 && spans.back().end == n, "coverage " + where);
        for (std::size_t i = 0; i + 1 < spans.size() && c.ok(); ++i) {
            c.expect(spans[i].size() == w, "full interior window " + where);
            c.expect(spans[i + 1].start <= spans[i].end, "gap " + where);
            c.expect(spans[i].end - spans[i + 1].start == o, "overlap " + where);
        }
        for (const auto& s : spans) c.expect(s.size() >= 1 && s.size() <= w, "span size " + where);

        // Reassembly: dropping each overlap rebuilds 0..n-1 exactly once.
        std::vector<std::size_t> rebuilt;
        std::size_t covered = 0;
        for (const auto& s : spans) {
            for (std::size_t t = std::max(s.start, covered); t < s.end; ++t) rebuilt.push_back(t);
            covered = std::max(covered, s.end);
        }
        bool sequential = rebuilt.size() == n;
        for (std::size_t t = 0; sequential && t < n; ++t) sequential = rebuilt[t] == t;
        c.expect(sequential, "reassembly " + where);

        // Chunk texts on real text for a share of the triples.
        if (trial % 10 == 0 && o * 4 <= w * 3) {
            std::string text;
            for (std::size_t t = 0; t < n; ++t) text += (t ? (t % 13 == 0 ? "\n" : " ") : "") + fmt::format("t{}", t);
            const Document doc{"r", text, {}, {}};
            const auto all = tokenize(text);
            for (const auto& ch : chunk(doc, {ChunkStrategy::kStride, w, o, 5000})) {
                const auto toks = tokenize(ch.text);
                c.expect(toks.size() == ch.span.size() &&
                             std::equal(toks.begin(), toks.end(), all.begin() + static_cast<std::ptrdiff_t>(ch.span.start)),
                         "chunk text " + where);
            }
        }
    }
    const double elapsed = seconds_since(start);
    c.expect(elapsed < kChunkerSeconds, fmt::format("runtime {:.2f} s", elapsed));
    c.note = fmt::format("1000 triples, {:.2f} s", elapsed);
    return c;
}

// ---- class weights ---------------------------------------------------------

long double weight_oracle(std::uint64_t total, std::uint64_t n, const WeightConfig& cfg) {
    const long double ratio = static_cast<long double>(total) / std::max<long double>(static_cast<long double>(n), cfg.epsilon);
    return std::clamp(std::log1p(ratio), static_cast<long double>(cfg.clip_min), static_cast<long double>(cfg.clip_max));
}

Check weight_math() {
    Check c;
    const WeightConfig cfg{0.1, 10.0, 1e-6};
    const auto worked = compute_weights(std::vector<std::uint64_t>{90, 10}, cfg);
    const double e0 = std::abs(worked.weights[0] - static_cast<double>(weight_oracle(100, 90, cfg)));
    const double e1 = std::abs(worked.weights[1] - static_cast<double>(weight_oracle(100, 10, cfg)));
    c.expect(e0 <= kWeightTolerance && e1 <= kWeightTolerance, fmt::format("(90,10) errors {:.2e} {:.2e}", e0, e1));

    std::mt19937_64 rng(2002);
    double worst = 0;
    for (int trial = 0; trial < 1000 && c.ok(); ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 300)(rng);
        std::vector<std::uint64_t> counts(k);
        const auto cap = std::uniform_int_distribution<std::uint64_t>(1, 100000)(rng);
        for (auto& n : counts) n = std::bernoulli_distribution(0.05)(rng) ? 0 : std::uniform_int_distribution<std::uint64_t>(0, cap)(rng);
        counts[trial % k] += 1;
        const double lo = std::uniform_real_distribution<double>(0.001, 1.0)(rng);
        const double hi = lo + std::uniform_real_distribution<double>(0.0, 15.0)(rng);
        const WeightConfig rc{lo, hi, 1e-6};
        const auto w = compute_weights(counts, rc);
        std::uint64_t total = 0;
        for (auto n : counts) total += n;

        std::vector<std::size_t> order(k);
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
        for (std::size_t i = 0; i < k; ++i) {
            c.expect(w.weights[i] >= lo && w.weights[i] <= hi, fmt::format("clip bounds, trial {}", trial));
            worst = std::max(worst, std::abs(w.weights[i] - static_cast<double>(weight_oracle(total, counts[i], rc))));
            if (i + 1 < k) {
                const auto a = order[i], b = order[i + 1];
                if (counts[a] < counts[b]) c.expect(w.weights[a] >= w.weights[b], fmt::format("monotonicity, trial {}", trial));
                if (counts[a] == counts[b]) c.expect(w.weights[a] == w.weights[b], fmt::format("equal counts, trial {}", trial));
            }
        }

        const std::vector<std::uint64_t> uniform(k, counts[0] + 1);
        const auto u = compute_weights(uniform, rc);
        c.expect(std::all_of(u.weights.begin(), u.weights.end(), [&](double x) { return x == u.weights[0]; }),
                 fmt::format("uniform symmetry, trial {}", trial));
    }
    c.expect(worst <= kWeightTolerance, fmt::format("oracle deviation {:.2e}", worst));
    c.note = fmt::format("1000 vectors, max oracle deviation {:.1e}", worst);
    return c;
}

// ---- gradient --------------------------------------------------------------

Check gradient_check() {
    Check c;
    std::mt19937_64 rng(3003);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 300)(rng);
        std::vector<double> logits(k);
        const double scale = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
        for (auto& x : logits) x = std::normal_distribution<double>(0.0, scale)(rng);
        ClassWeights w;
        for (std::size_t j = 0; j < k; ++j) w.weights.push_back(std::uniform_real_distribution<double>(0.1, 10.0)(rng));
        const auto t = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
        const auto r = weighted_cross_entropy(logits, static_cast<LabelId>(t), w);
        worst = std::max(worst, oracle::relative_error(r.gradient, oracle::central_difference(logits, t, w.weights, kGradientStep)));
    }
    c.expect(worst <= kGradientTolerance, fmt::format("gradient relative error {:.2e}", worst));

    double unit_worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 300)(rng);
        std::vector<double> logits(k);
        for (auto& x : logits) x = std::normal_distribution<double>(0.0, 4.0)(rng);
        const auto t = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
        const double plain = static_cast<double>(oracle::weighted_ce(logits, t, std::vector<double>(k, 1.0)));
        const double got = weighted_cross_entropy(logits, static_cast<LabelId>(t), uniform_weights(k)).loss;
        unit_worst = std::max(unit_worst, std::abs(got - plain) / std::max(1.0, std::abs(plain)));
    }
    c.expect(unit_worst <= kUnitWeightTolerance, fmt::format("unit-weight deviation {:.2e}", unit_worst));
    c.note = fmt::format("500 cases, max relative error {:.1e}; unit weights {:.1e}", worst, unit_worst);
    return c;
}

// ---- parser ----------------------------------------------------------------

std::string garbage(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces{"Category", ":", "(", ")", " ", "\n", "-", "<think>", "</think>",
                                                 "confidence", "0.", "Civil", "Rights", "Unions", "the", ",", "*"};
    std::string s;
    const int mode = std::uniform_int_distribution<int>(0, 2)(rng);
    const auto len = std::uniform_int_distribution<std::size_t>(0, 60)(rng);
    for (std::size_t i = 0; i < len; ++i) {
        if (mode == 0) {
            s += static_cast<char>(std::uniform_int_distribution<int>(1, 255)(rng));
        } else if (mode == 1) {
            s += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
        } else {
            s += std::bernoulli_distribution(0.3)(rng)
                     ? std::to_string(std::uniform_int_distribution<long long>(-500, 100000)(rng))
                     : pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
        }
    }
    return s;
}

Check parser_suite() {
    Check c;
    const auto broad13 = support::broad13();
    const LabelOntology fine263 = LabelOntology::load(support::data("ontologies/fine263.json"));
    std::size_t roundtrips = 0;
    for (const auto* o : {&support::broad15(), &support::fine279(), &broad13, &fine263}) {
        for (const auto& l : o->labels()) {
            for (auto format : {AnswerFormat::kCategoryNumber, AnswerFormat::kCategoryName}) {
                const auto r = parse_response(render_answer(*o, l.id, format), *o, format);
                c.expect(r.ok() && r.parsed->label == l.id, fmt::format("round trip of {} ({})", l.id, l.name));
                ++roundtrips;
            }
        }
    }
    for (int id : {115, 120, 259, 226, 66}) {
        const auto r = parse_response(fmt::format("Category: ({})", id), support::fine279(), AnswerFormat::kCategoryNumber);
        c.expect(r.ok() && r.parsed->label == id, fmt::format("answer string for {}", id));
    }
    std::mt19937_64 rng(4004);
    std::size_t parsed = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = garbage(rng);
        for (const auto* o : {&support::broad15(), &support::fine279()}) {
            for (auto format : {AnswerFormat::kCategoryNumber, AnswerFormat::kCategoryName}) {
                const auto r = parse_response(s, *o, format);
                if (r.ok()) {
                    ++parsed;
                    c.expect(o->contains(r.parsed->label), "out-of-ontology label from garbage: " + s);
                }
            }
        }
    }
    c.note = fmt::format("{} round trips, 10000 garbage strings ({} parses, all in range)", roundtrips, parsed);
    return c;
}

// ---- metrics ---------------------------------------------------------------

MetricsReport metrics_of(const std::vector<oracle::Doc>& docs, std::size_t k, AbstainPolicy policy) {
    std::vector<GoldLabel> golds;
    std::vector<DocumentDecision> decisions;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        golds.push_back({fmt::format("d{}", i), docs[i].gold});
        decisions.push_back({fmt::format("d{}", i), docs[i].predicted, DecisionRule::kMajority, 1, !docs[i].predicted});
    }
    return metrics(confusion(golds, decisions, k), policy);
}

Check metrics_oracle() {
    Check c;
    std::mt19937_64 rng(5005);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = std::uniform_int_distribution<int>(2, 15)(rng);
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
        std::vector<oracle::Doc> docs;
        for (std::size_t i = 0; i < n; ++i) {
            oracle::Doc d;
            d.gold = std::uniform_int_distribution<int>(0, k - 1)(rng);
            if (!std::bernoulli_distribution(0.1)(rng)) {
                d.predicted = std::bernoulli_distribution(0.5)(rng) ? d.gold : std::uniform_int_distribution<int>(0, k - 1)(rng);
            }
            docs.push_back(d);
        }
        for (auto policy : {AbstainPolicy::kCountAsError, AbstainPolicy::kExclude}) {
            const auto got = metrics_of(docs, static_cast<std::size_t>(k), policy);
            const auto want = oracle::brute_force_metrics(docs, k, policy);
            for (auto [a, b] : {std::pair{got.accuracy, want.accuracy}, {got.macro_precision, want.macro_precision},
                                {got.macro_recall, want.macro_recall}, {got.macro_f1, want.macro_f1},
                                {got.micro_f1, want.micro_f1}, {got.abstain_rate, want.abstain_rate}}) {
                worst = std::max(worst, std::abs(a - b));
            }
            for (int cl = 0; cl < k; ++cl) {
                worst = std::max(worst, std::abs(got.per_class[cl].precision - want.per_class[cl].precision));
                worst = std::max(worst, std::abs(got.per_class[cl].recall - want.per_class[cl].recall));
                worst = std::max(worst, std::abs(got.per_class[cl].f1 - want.per_class[cl].f1));
                c.expect(got.per_class[cl].support == want.per_class[cl].support, "support mismatch");
            }
        }
    }
    c.expect(worst <= kMetricsTolerance, fmt::format("oracle deviation {:.2e}", worst));

    const auto half = metrics_of({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, 2, AbstainPolicy::kCountAsError);
    c.expect(half.accuracy == 0.5 && half.macro_precision == 0.5 && half.macro_recall == 0.5 && half.macro_f1 == 0.5 &&
                 half.micro_f1 == 0.5,
             "[[1,1],[1,1]] is not exactly 0.5");
    c.note = fmt::format("200 runs x 2 policies, max deviation {:.1e}", worst);
    return c;
}

// ---- decision rules --------------------------------------------------------

Check decision_rules() {
    Check c;
    auto preds = [](std::vector<std::optional<LabelId>> labels, std::vector<std::optional<double>> conf) {
        std::vector<ChunkPrediction> out;
        for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({"d", i, labels[i], i < conf.size() ? conf[i] : std::nullopt});
        return out;
    };
    const auto aab = majority_vote(preds({0, 0, 1}, {}));
    c.expect(aab.label == 0 && aab.support == 2, "majority A,A,B");
    c.expect(majority_vote(preds({4, 2}, {})).label == 2, "majority tie to lower id");
    c.expect(majority_vote(preds({4, 2}, {0.8, 0.3})).label == 4, "majority tie to higher confidence");
    c.expect(best_confidence(preds({0, 1}, {0.4, 0.9})).label == 1, "best confidence 0.4/0.9");
    c.expect(best_confidence(preds({0, 1, 2}, {0.2, 0.9, 0.5})).label == 1, "best confidence 0.2/0.9/0.5");
    c.expect(best_confidence(preds({5, 6}, {0.7, 0.7})).label == 5, "best confidence tie to earlier chunk");
    c.expect(majority_vote(preds({std::nullopt, std::nullopt}, {})).abstained, "all abstained");
    c.expect(first_chunk(preds({std::nullopt, 3}, {})).abstained, "first chunk abstention propagates");

    const std::vector<DecisionRule> rules{DecisionRule::kMajority, DecisionRule::kBestConfidence, DecisionRule::kFirstChunk,
                                          DecisionRule::kFixedPosition};
    std::mt19937_64 rng(6006);
    for (int trial = 0; trial < 2000 && c.ok(); ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
        std::vector<ChunkPrediction> p;
        for (std::size_t i = 0; i < n; ++i) {
            std::optional<LabelId> label;
            if (!std::bernoulli_distribution(0.15)(rng)) label = std::uniform_int_distribution<LabelId>(0, 5)(rng);
            p.push_back({"d", i, label, std::uniform_real_distribution<double>(0.0, 1.0)(rng)});
        }
        auto shuffled = p;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto rule : rules) c.expect(decide(rule, shuffled) == decide(rule, p), fmt::format("permutation, {}", to_string(rule)));

        auto unanimous = p;
        const LabelId l = std::uniform_int_distribution<LabelId>(0, 5)(rng);
        for (auto& q : unanimous) q.label = l;
        for (auto rule : rules) c.expect(decide(rule, unanimous).label == l, fmt::format("unanimity, {}", to_string(rule)));

        const std::vector<ChunkPrediction> single{p.front()};
        for (auto rule : rules) {
            const auto d = decide(rule, single);
            c.expect(d.label == single[0].label && d.abstained == single[0].abstained(),
                     fmt::format("single chunk, {}", to_string(rule)));
        }
    }
    c.note = "worked cases and 2000 randomized sets";
    return c;
}

// ---- retrieval -------------------------------------------------------------

Check retrieval_scoring() {
    Check c;
    const auto& onto = support::broad15();
    const auto worked = KeywordLexicon::parse("'Unions': collective bargaining, union", onto);
    const auto s = score_categories("collective bargaining agreement with the union", worked);
    c.expect(s.size() == 1 && s[0].score == 3.0, "collective bargaining example");

    std::vector<std::string> vocab;
    for (int i = 0; i < 40; ++i) vocab.push_back(fmt::format("w{}", i));
    std::mt19937_64 rng(7007);
    auto pick = [&] { return vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)]; };

    for (int trial = 0; trial < 300 && c.ok(); ++trial) {
        std::string lex_text;
        const int cats = std::uniform_int_distribution<int>(1, 8)(rng);
        for (int cat = 0; cat < cats; ++cat) {
            lex_text += onto.name(cat) + ":";
            const int terms = std::uniform_int_distribution<int>(1, 6)(rng);
            for (int t = 0; t < terms; ++t) {
                const int words = std::uniform_int_distribution<int>(1, 3)(rng);
                lex_text += t ? ", " : " ";
                for (int w = 0; w < words; ++w) lex_text += (w ? " " : "") + pick();
            }
            lex_text += "\n";
        }
        const auto lex = KeywordLexicon::parse(lex_text, onto);

        std::vector<std::string> paragraphs;
        const int np = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int p = 0; p < np; ++p) {
            std::string para;
            const int len = std::uniform_int_distribution<int>(1, 50)(rng);
            for (int w = 0; w < len; ++w) para += (w ? (w % 9 == 0 ? "\n" : " ") : "") + pick();
            paragraphs.push_back(para);
        }
        auto join = [](const std::vector<std::string>& ps) {
            std::string out;
            for (std::size_t i = 0; i < ps.size(); ++i) out += (i ? "\n\n" : "") + ps[i];
            return out;
        };
        const Document doc{"r", join(paragraphs), {}, {}};
        auto shuffled = paragraphs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);

        for (auto rule : {ScoringRule::kPhraseLength, ScoringRule::kBinary, ScoringRule::kTfIdf}) {
            RetrievalOptions opt;
            opt.rule = rule;
            std::map<LabelId, double> once, twice, permuted;
            for (const auto& cs : score_document(doc, lex, opt)) once[cs.label] = cs.score;
            for (const auto& cs : score_document(Document{"r", doc.text + "\n\n" + doc.text, {}, {}}, lex, opt)) twice[cs.label] = cs.score;
            for (const auto& cs : score_document(Document{"r", join(shuffled), {}, {}}, lex, opt)) permuted[cs.label] = cs.score;
            for (const auto& [label, score] : once) {
                c.expect(std::abs(twice[label] - 2 * score) <= 1e-12 * std::max(1.0, score),
                         fmt::format("duplication, rule {}, trial {}", to_string(rule), trial));
                c.expect(std::abs(permuted[label] - score) <= 1e-12 * std::max(1.0, score),
                         fmt::format("permutation, rule {}, trial {}", to_string(rule), trial));
            }
        }
    }
    c.note = "300 random lexicons x 3 scoring rules";
    return c;
}

// ---- end to end ------------------------------------------------------------

int cli(const std::vector<std::string>& args, std::string* output = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (output) *output = out.str();
    if (code != kExitOk) std::cerr << err.str();
    return code;
}

nlohmann::json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::size_t lines_in(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
}

Check end_to_end() {
    Check c;
    support::TempDir dir("e2e");
    const auto corpus = support::fixture("mini15.jsonl").string();
    const auto start = Clock::now();

    const int gold = cli({"classify", "--corpus", corpus, "--mock-fixture", support::fixture("mini15_gold_numeric.jsonl").string(),
                          "--mock-log", (dir / "gold-requests.jsonl").string(), "--output-dir", dir.path().string(),
                          "--run-name", "gold"});
    c.expect(gold == kExitOk, "gold run failed");
    double gold_acc = -1;
    if (gold == kExitOk) {
        gold_acc = read_json(dir / "gold" / "report.json").at("accuracy").get<double>();
        c.expect(gold_acc == 1.0, fmt::format("gold accuracy {:.3f}", gold_acc));
        // Every request went to the in-process loopback mock.
        c.expect(lines_in(dir / "gold-requests.jsonl") == lines_in(dir / "gold" / "exchanges.jsonl"), "requests bypassed the mock");
    }

    const auto manifest = read_json(support::fixture("mini15_manifest.json"));
    const auto histogram = manifest.at("broad_histogram").get<std::vector<double>>();
    const double documents = manifest.at("documents").get<double>();
    const LabelId wrong = 0;
    const int constant = cli({"classify", "--corpus", corpus, "--mock-default", fmt::format("Category: ({})", wrong),
                              "--output-dir", dir.path().string(), "--run-name", "constant"});
    c.expect(constant == kExitOk, "default-label run failed");
    double constant_acc = -1;
    const double share = histogram[static_cast<std::size_t>(wrong)] / documents;
    if (constant == kExitOk) {
        constant_acc = read_json(dir / "constant" / "report.json").at("accuracy").get<double>();
        c.expect(std::abs(constant_acc - share) <= 1e-12, fmt::format("default-label accuracy {:.4f} vs share {:.4f}", constant_acc, share));
    }
    const double elapsed = seconds_since(start);
    c.expect(elapsed < kPipelineSeconds, fmt::format("runtime {:.2f} s", elapsed));
    c.note = fmt::format("gold accuracy {:.3f}; label-{} accuracy {:.3f} = share {:.3f}; {:.2f} s, loopback mock only", gold_acc,
                         wrong, constant_acc, share, elapsed);
    return c;
}

// ---- qualitative -----------------------------------------------------------

Check qualitative() {
    Check c;
    support::TempDir dir("qualitative");
    const char* url = std::getenv("LEXCLASS_ENDPOINT_URL");
    const char* data = std::getenv("LEXCLASS_SCDB_CORPUS");
    const bool real = url != nullptr && data != nullptr && *url && *data;

    std::vector<std::vector<std::string>> runs;
    if (real) {
        const char* model = std::getenv("LEXCLASS_ENDPOINT_MODEL");
        const std::vector<std::string> base{"classify", "--corpus", data, "--base-url", url, "--model", model ? model : "default",
                                            "--output-dir", dir.path().string()};
        auto truncate = base;
        truncate.insert(truncate.end(), {"--run-name", "truncate"});
        auto stride = base;
        stride.insert(stride.end(), {"--run-name", "stride", "--strategy", "stride", "--window", "512", "--overlap", "64"});
        runs = {truncate, stride};
    } else {
        // Stand-in: loopback mock and the lexicon baseline on the fixture corpus.
        const auto corpus = support::fixture("mini15.jsonl").string();
        runs = {{"classify", "--corpus", corpus, "--mock-fixture", support::fixture("mini15_gold_numeric.jsonl").string(),
                 "--model", "mock-gold", "--output-dir", dir.path().string(), "--run-name", "mock"},
                {"classify", "--corpus", corpus, "--backend", "lexicon", "--lexicon",
                 support::data("lexicons/broad14.txt").string(), "--strategy", "prompt_window", "--output-dir",
                 dir.path().string(), "--run-name", "lexicon"}};
    }
    std::vector<std::string> compare{"compare"};
    for (const auto& args : runs) {
        c.expect(cli(args) == kExitOk, "classify run failed");
        const auto name = args[static_cast<std::size_t>(std::find(args.begin(), args.end(), "--run-name") - args.begin()) + 1];
        compare.insert(compare.end(), {"--report", (dir.path() / name / "report.json").string()});
    }
    std::string table;
    if (c.ok()) {
        c.expect(cli(compare, &table) == kExitOk, "compare failed");
        c.expect(table.find("Model") != std::string::npos && table.find("Accuracy") != std::string::npos &&
                     table.find("F1") != std::string::npos,
                 "comparison table lacks the expected columns");
    }
    c.note = real ? "real endpoint run" : "stand-in: no real endpoint configured (set LEXCLASS_ENDPOINT_URL and LEXCLASS_SCDB_CORPUS); loopback mock and lexicon baseline on the fixture corpus";
    if (c.ok()) {
        std::cout << table;
    }
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"chunker-suite", chunker_suite},
        {"weight-math", weight_math},
        {"gradient-check", gradient_check},
        {"parser-suite", parser_suite},
        {"metrics-oracle", metrics_oracle},
        {"decision-rules", decision_rules},
        {"retrieval-scoring", retrieval_scoring},
        {"end-to-end", end_to_end},
        {"qualitative", qualitative},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Check c;
        try {
            c = run();
        } catch (const std::exception& e) {
            c.failure = std::string("exception: ") + e.what();
        }
        if (c.ok()) {
            std::cout << fmt::format("PASS {}: {}\n", name, c.note) << std::flush;
        } else {
            ++failures;
            std::cout << fmt::format("FAIL {}: {}\n", name, c.failure) << std::flush;
        }
    }
    return failures == 0 ? 0 : 1;
}
