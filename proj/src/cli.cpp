#include "lexclass/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <numeric>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lexclass/class_weights.hpp"
#include "lexclass/digest.hpp"
#include "lexclass/error.hpp"
#include "lexclass/mock_server.hpp"
#include "lexclass/pipeline.hpp"
#include "lexclass/tokenizer.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested = true; }

const std::string kDataDir = LEXCLASS_DATA_DIR;
const std::string kTemplateDir = LEXCLASS_TEMPLATE_DIR;

std::vector<std::string> names(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

struct CorpusSettings {
    std::string path;
    std::string format;  // empty = by extension
    std::string broad_ontology;
    std::string fine_ontology;
};

void add_corpus_options(CLI::App* sub, CorpusSettings& s, const char* flag = "--corpus") {
    sub->add_option(flag, s.path, "Corpus file (JSONL or CSV)")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", s.format, "Corpus format; default from the file extension")
        ->check(CLI::IsMember(names({"jsonl", "csv"})));
}

Corpus load_corpus_with(const CorpusSettings& s, const LabelOntology* broad, const LabelOntology* fine) {
    const std::filesystem::path path = s.path;
    const auto format = !s.format.empty()       ? parse_corpus_format(s.format)
                        : path.extension() == ".csv" ? CorpusFormat::kCsv
                                                     : CorpusFormat::kJsonl;
    return load_corpus(path, format, OntologyRefs{broad, fine});
}

struct EndpointSettings {
    std::string base_url = EndpointConfig{}.base_url;
    std::string model = EndpointConfig{}.model_name;
    double temperature = 0.0;
    int max_tokens = 64;
    int timeout_ms = 60000;
    int max_retries = 3;
    int backoff_ms = 500;
    int parallelism = 1;
    std::string api_key_env;
    std::string mock_fixture;
    std::string mock_default;
    std::string mock_log;

    bool mocked() const { return !mock_fixture.empty() || !mock_default.empty(); }
};

void add_endpoint_options(CLI::App* sub, EndpointSettings& e) {
    sub->add_option("--base-url", e.base_url, "Chat-completions base URL")->capture_default_str();
    sub->add_option("--model", e.model, "Model name sent to the endpoint")->capture_default_str();
    sub->add_option("--temperature", e.temperature)->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--max-tokens", e.max_tokens)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--timeout-ms", e.timeout_ms)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-retries", e.max_retries)->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--backoff-ms", e.backoff_ms)->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--parallelism", e.parallelism, "Concurrent requests")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--api-key-env", e.api_key_env, "Environment variable holding the bearer token");
    sub->add_option("--mock-fixture", e.mock_fixture, "Serve answers from this fixture on a loopback mock endpoint")
        ->check(CLI::ExistingFile);
    sub->add_option("--mock-default", e.mock_default, "Mock answer for requests no fixture rule matches");
    sub->add_option("--mock-log", e.mock_log, "Write the mock's request log (JSONL) here");
}

EndpointConfig endpoint_config(const EndpointSettings& e) {
    EndpointConfig c;
    c.base_url = e.base_url;
    c.model_name = e.model;
    c.temperature = e.temperature;
    c.max_tokens = e.max_tokens;
    c.timeout = std::chrono::milliseconds(e.timeout_ms);
    c.max_retries = e.max_retries;
    c.backoff_base = std::chrono::milliseconds(e.backoff_ms);
    c.parallelism = e.parallelism;
    c.api_key_env = e.api_key_env;
    return c;
}

/// Real endpoint, or an in-process loopback mock when a fixture is given.
struct EndpointSession {
    std::unique_ptr<MockServer> mock;
    EndpointConfig config;
};

EndpointSession open_endpoint(const EndpointSettings& e) {
    EndpointSession s;
    s.config = endpoint_config(e);
    if (!e.mocked()) return s;
    MockFixture fixture = e.mock_fixture.empty() ? MockFixture{} : MockFixture::load(e.mock_fixture);
    MockOptions options;
    if (!e.mock_default.empty()) options.default_response = e.mock_default;
    if (!e.mock_log.empty()) options.log_path = e.mock_log;
    s.mock = std::make_unique<MockServer>(std::move(fixture), std::move(options));
    s.mock->start(0);
    s.config.base_url = s.mock->base_url();
    s.config.loopback_only = true;
    s.config.api_key_env.clear();
    return s;
}

struct ChunkSettings {
    std::string strategy = "truncate";
    std::size_t window = 512;
    std::size_t overlap = 0;
    std::size_t budget = 5000;
};

void add_chunk_options(CLI::App* sub, ChunkSettings& c) {
    sub->add_option("--strategy", c.strategy)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"truncate", "concat", "stride", "summarize", "prompt_window"})));
    sub->add_option("--window", c.window, "Window size in tokens")->capture_default_str();
    sub->add_option("--overlap", c.overlap, "Stride overlap in tokens")->capture_default_str();
    sub->add_option("--budget", c.budget, "Token budget for summarize and prompt_window")->capture_default_str();
}

ChunkPlan chunk_plan(const ChunkSettings& c) {
    ChunkPlan plan;
    plan.strategy = parse_chunk_strategy(c.strategy);
    plan.window = c.window;
    plan.overlap = c.overlap;
    plan.budget = c.budget;
    try {
        plan.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    return plan;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (auto part : detail::split(text, ',')) {
        const auto t = std::string(detail::trim(part));
        if (t.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw Error(ErrorCode::kConfig, fmt::format("{}: '{}' is not a number", what, t));
        }
    }
    return out;
}

double median(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? static_cast<double>(v[n / 2]) : (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

std::optional<std::vector<std::size_t>> histogram_if_labeled(const Corpus& corpus, Level level,
                                                            const LabelOntology* ontology) {
    LabelId max_label = -1;
    for (const auto& d : corpus) {
        const auto l = d.label(level);
        if (!l) return std::nullopt;
        max_label = std::max(max_label, *l);
    }
    const std::size_t k = ontology != nullptr ? ontology->size() : static_cast<std::size_t>(max_label + 1);
    return label_histogram(corpus, level, k);
}

std::string format_histogram(const std::vector<std::size_t>& h) {
    std::string out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] == 0) continue;
        if (!out.empty()) out += ' ';
        out += fmt::format("{}:{}", i, h[i]);
    }
    return out;
}

Corpus restrict_to(const Corpus& corpus, const std::string& ids_path) {
    if (ids_path.empty()) return corpus;
    return select_documents(corpus, detail::read_list_file(ids_path));
}

/// Splices `--config FILE` into the argument list: its `key = value` lines
/// become `--key=value` right after the subcommand, so later flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 == args.size()) throw Error(ErrorCode::kConfig, "--config needs a file");
            config_path = args[++i];
        } else if (args[i].starts_with("--config=")) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> out{"lexclass"};
    if (!config_path) {
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
    }
    if (!std::filesystem::is_regular_file(*config_path)) {
        throw Error(ErrorCode::kConfig, fmt::format("config file '{}' not found", *config_path));
    }
    std::vector<std::string> injected;
    std::size_t line_no = 0;
    const std::string contents = detail::read_file(*config_path);
    for (auto line : detail::split(contents, '\n')) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kConfig, fmt::format("{}:{}: expected key = value", *config_path, line_no));
        }
        auto key = std::string(detail::trim(line.substr(0, eq)));
        auto value = std::string(detail::trim(line.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty()) throw Error(ErrorCode::kConfig, fmt::format("{}:{}: empty key", *config_path, line_no));
        injected.push_back(fmt::format("--{}={}", key, value));
    }
    // The first non-option argument is the subcommand.
    const auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (sub == rest.end()) throw Error(ErrorCode::kConfig, "--config given without a subcommand");
    out.insert(out.end(), rest.begin(), std::next(sub));
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), std::next(sub), rest.end());
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Long-document legal classification pipeline", "lexclass"};
    app.set_version_flag("--version", std::string(LEXCLASS_VERSION));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write it as normalized JSONL");
    CorpusSettings ingest_corpus;
    std::string ingest_out;
    add_corpus_options(ingest, ingest_corpus, "--input");
    ingest->add_option("--broad-ontology", ingest_corpus.broad_ontology)->check(CLI::ExistingFile);
    ingest->add_option("--fine-ontology", ingest_corpus.fine_ontology)->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "Output JSONL")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Document count, token lengths and label histograms");
    CorpusSettings stats_corpus;
    std::string stats_json;
    add_corpus_options(stats, stats_corpus);
    stats->add_option("--broad-ontology", stats_corpus.broad_ontology)->check(CLI::ExistingFile);
    stats->add_option("--fine-ontology", stats_corpus.fine_ontology)->check(CLI::ExistingFile);
    stats->add_option("--json", stats_json, "Also write the statistics as JSON");

    // split
    auto* split = app.add_subcommand("split", "Seeded train/validation/test split into id-list files");
    CorpusSettings split_corpus_settings;
    std::string split_ratios = "0.8,0.1,0.1";
    std::uint64_t split_seed = 0;
    std::string split_out;
    add_corpus_options(split, split_corpus_settings);
    split->add_option("--ratios", split_ratios, "train,validation,test")->capture_default_str();
    split->add_option("--seed", split_seed)->capture_default_str();
    split->add_option("--out-dir", split_out)->required();

    // weights
    auto* weights = app.add_subcommand("weights", "Log-smoothed, clipped class weights from label counts");
    CorpusSettings weights_corpus;
    std::string weights_ontology = kDataDir + "/ontologies/broad15.json";
    std::string weights_level = "broad";
    std::string weights_ids;
    WeightConfig weight_config;
    std::string weights_out;
    add_corpus_options(weights, weights_corpus);
    weights->add_option("--ontology", weights_ontology)->capture_default_str()->check(CLI::ExistingFile);
    weights->add_option("--level", weights_level)->capture_default_str()->check(CLI::IsMember(names({"broad", "fine"})));
    weights->add_option("--ids", weights_ids, "Only count these documents (id list, e.g. a train split)")
        ->check(CLI::ExistingFile);
    weights->add_option("--clip-min", weight_config.clip_min)->capture_default_str();
    weights->add_option("--clip-max", weight_config.clip_max)->capture_default_str();
    weights->add_option("--epsilon", weight_config.epsilon)->capture_default_str();
    weights->add_option("--out", weights_out, "Write weights JSON here");

    // chunk
    auto* chunk_cmd = app.add_subcommand("chunk", "Chunk every document and write the spans as JSONL");
    CorpusSettings chunk_corpus;
    ChunkSettings chunk_settings;
    std::string chunk_abbrev;
    std::string chunk_out;
    add_corpus_options(chunk_cmd, chunk_corpus);
    add_chunk_options(chunk_cmd, chunk_settings);
    chunk_cmd->add_option("--abbreviations", chunk_abbrev, "Sentence-splitter abbreviation list")->check(CLI::ExistingFile);
    chunk_cmd->add_option("--out", chunk_out)->required();

    // classify
    auto* classify = app.add_subcommand("classify", "Chunk, prompt, query the endpoint, parse and decide");
    CorpusSettings classify_corpus_settings;
    std::string classify_ontology = kDataDir + "/ontologies/broad15.json";
    std::string classify_level = "broad";
    std::string classify_template = kTemplateDir + "/scdb_broad_numeric.txt";
    std::string classify_answer_format;
    ChunkSettings classify_chunk;
    std::string classify_rule = "majority";
    std::size_t classify_fixed_position = 0;
    std::string classify_vote_weights;
    bool classify_fuzzy = false;
    std::string classify_backend = "llm";
    std::string classify_lexicon;
    std::size_t classify_k = 5;
    std::string classify_scoring = "phrase_length";
    std::string classify_markers;
    std::string classify_ids;
    std::size_t classify_fewshot_k = 0;
    std::string classify_fewshot_ids;
    std::size_t classify_fewshot_cap = 1;
    std::uint64_t classify_seed = 0;
    std::string classify_policy = "count_as_error";
    std::string classify_output = "runs";
    std::string classify_run = "run";
    EndpointSettings classify_endpoint;
    add_corpus_options(classify, classify_corpus_settings);
    classify->add_option("--ontology", classify_ontology)->capture_default_str()->check(CLI::ExistingFile);
    classify->add_option("--level", classify_level)->capture_default_str()->check(CLI::IsMember(names({"broad", "fine"})));
    classify->add_option("--template", classify_template)->capture_default_str()->check(CLI::ExistingFile);
    classify->add_option("--answer-format", classify_answer_format, "Override the template's answer format")
        ->check(CLI::IsMember(names({"category_number", "category_name"})));
    add_chunk_options(classify, classify_chunk);
    classify->add_option("--rule", classify_rule)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"majority", "best_confidence", "first_chunk", "fixed_position"})));
    classify->add_option("--fixed-position", classify_fixed_position, "Chunk ordinal for the fixed_position rule")
        ->capture_default_str();
    classify->add_option("--vote-weights", classify_vote_weights, "Per-ordinal majority vote weights, comma separated");
    classify->add_flag("--fuzzy-names", classify_fuzzy, "Accept near-miss category names");
    classify->add_option("--backend", classify_backend)->capture_default_str()->check(CLI::IsMember(names({"llm", "lexicon"})));
    classify->add_option("--lexicon", classify_lexicon, "Keyword lexicon; enables retrieval-augmented prompts")
        ->check(CLI::ExistingFile);
    classify->add_option("--retrieve-k", classify_k, "Categories placed in the retrieved block")->capture_default_str();
    classify->add_option("--scoring-rule", classify_scoring)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"phrase_length", "binary", "tfidf"})));
    classify->add_option("--markers", classify_markers, "Structural marker list")->check(CLI::ExistingFile);
    classify->add_option("--ids", classify_ids, "Only classify these documents (id list)")->check(CLI::ExistingFile);
    classify->add_option("--fewshot-k", classify_fewshot_k, "Replace template examples with k corpus examples")
        ->capture_default_str();
    classify->add_option("--fewshot-ids", classify_fewshot_ids, "Documents eligible as few-shot examples")
        ->check(CLI::ExistingFile);
    classify->add_option("--fewshot-per-label", classify_fewshot_cap, "Few-shot cap per label (0 = none)")
        ->capture_default_str();
    classify->add_option("--seed", classify_seed)->capture_default_str();
    classify->add_option("--abstain-policy", classify_policy)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"count_as_error", "exclude"})));
    classify->add_option("--output-dir", classify_output)->capture_default_str();
    classify->add_option("--run-name", classify_run)->capture_default_str();
    add_endpoint_options(classify, classify_endpoint);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Metrics report for a decisions file against gold labels");
    std::string eval_decisions;
    CorpusSettings eval_corpus;
    std::string eval_ontology = kDataDir + "/ontologies/broad15.json";
    std::string eval_level = "broad";
    std::string eval_policy = "count_as_error";
    std::string eval_run = "run";
    std::string eval_model;
    std::string eval_technique;
    std::string eval_out;
    evaluate->add_option("--decisions", eval_decisions)->required()->check(CLI::ExistingFile);
    add_corpus_options(evaluate, eval_corpus);
    evaluate->add_option("--ontology", eval_ontology)->capture_default_str()->check(CLI::ExistingFile);
    evaluate->add_option("--level", eval_level)->capture_default_str()->check(CLI::IsMember(names({"broad", "fine"})));
    evaluate->add_option("--abstain-policy", eval_policy)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"count_as_error", "exclude"})));
    evaluate->add_option("--run-name", eval_run)->capture_default_str();
    evaluate->add_option("--model", eval_model);
    evaluate->add_option("--technique", eval_technique);
    evaluate->add_option("--out", eval_out, "Write the report JSON here");

    // compare
    auto* compare = app.add_subcommand("compare", "Comparison table over several metrics reports");
    std::vector<std::string> compare_reports;
    std::string compare_average = "macro";
    std::string compare_format = "text";
    std::string compare_out;
    compare->add_option("--report", compare_reports, "Report JSON (repeatable)")->required()->check(CLI::ExistingFile);
    compare->add_option("--average", compare_average)->capture_default_str()->check(CLI::IsMember(names({"macro", "micro"})));
    compare->add_option("--format", compare_format)
        ->capture_default_str()
        ->check(CLI::IsMember(names({"text", "csv", "json"})));
    compare->add_option("--out", compare_out, "Also write the JSON comparison here");

    // mock-serve
    auto* mock = app.add_subcommand("mock-serve", "Serve a fixture-driven chat-completions endpoint");
    std::string mock_fixture;
    std::string mock_host = "127.0.0.1";
    int mock_port = 8089;
    std::string mock_default;
    std::string mock_log;
    int mock_threads = 16;
    int mock_duration = 0;
    mock->add_option("--fixture", mock_fixture)->required()->check(CLI::ExistingFile);
    mock->add_option("--host", mock_host)->capture_default_str();
    mock->add_option("--port", mock_port)->capture_default_str()->check(CLI::Range(0, 65535));
    mock->add_option("--default-response", mock_default, "Answer for unmatched requests (default: 404)");
    mock->add_option("--log", mock_log, "Request log (JSONL)");
    mock->add_option("--threads", mock_threads)->capture_default_str()->check(CLI::PositiveNumber);
    mock->add_option("--duration-ms", mock_duration, "Stop after this long (0 = until SIGINT/SIGTERM)")
        ->capture_default_str();

    // lexicon
    auto* lexicon_cmd = app.add_subcommand("lexicon", "Generate a keyword lexicon by asking the endpoint");
    std::string lex_ontology = kDataDir + "/ontologies/broad15.json";
    std::string lex_template = kTemplateDir + "/lexicon_request.txt";
    std::string lex_out;
    bool lex_refresh = false;
    EndpointSettings lex_endpoint;
    lexicon_cmd->add_option("--ontology", lex_ontology)->capture_default_str()->check(CLI::ExistingFile);
    lexicon_cmd->add_option("--template", lex_template)->capture_default_str()->check(CLI::ExistingFile);
    lexicon_cmd->add_option("--out", lex_out)->required();
    lexicon_cmd->add_flag("--refresh", lex_refresh, "Ignore a cached lexicon with the same prompt digest");
    add_endpoint_options(lexicon_cmd, lex_endpoint);

    for (auto* sub : app.get_subcommands({})) {
        sub->footer("--config FILE reads option defaults from key = value lines; flags override them.");
    }

    std::vector<std::string> argv_storage;
    try {
        argv_storage = expand_config(args);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest->parsed()) {
            std::optional<LabelOntology> broad;
            std::optional<LabelOntology> fine;
            if (!ingest_corpus.broad_ontology.empty()) broad = LabelOntology::load(ingest_corpus.broad_ontology);
            if (!ingest_corpus.fine_ontology.empty()) fine = LabelOntology::load(ingest_corpus.fine_ontology);
            const auto corpus = load_corpus_with(ingest_corpus, broad ? &*broad : nullptr, fine ? &*fine : nullptr);
            write_corpus_jsonl(corpus, ingest_out);
            out << fmt::format("ingested {} documents -> {}\n", corpus.size(), ingest_out);
            return kExitOk;
        }

        if (stats->parsed()) {
            std::optional<LabelOntology> broad;
            std::optional<LabelOntology> fine;
            if (!stats_corpus.broad_ontology.empty()) broad = LabelOntology::load(stats_corpus.broad_ontology);
            if (!stats_corpus.fine_ontology.empty()) fine = LabelOntology::load(stats_corpus.fine_ontology);
            const auto corpus = load_corpus_with(stats_corpus, broad ? &*broad : nullptr, fine ? &*fine : nullptr);
            if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus is empty");
            std::vector<std::size_t> lengths;
            for (const auto& d : corpus) lengths.push_back(count_tokens(d.text));
            const double mean = static_cast<double>(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0})) /
                                static_cast<double>(lengths.size());
            const double med = median(lengths);
            const auto [min_it, max_it] = std::minmax_element(lengths.begin(), lengths.end());
            const auto broad_h = histogram_if_labeled(corpus, Level::kBroad, broad ? &*broad : nullptr);
            const auto fine_h = histogram_if_labeled(corpus, Level::kFine, fine ? &*fine : nullptr);

            out << fmt::format("documents: {}\n", corpus.size());
            out << fmt::format("tokens: median {:.1f}, mean {:.1f}, min {}, max {}\n", med, mean, *min_it, *max_it);
            if (broad_h) out << "broad labels (id:count): " << format_histogram(*broad_h) << '\n';
            if (fine_h) out << "fine labels (id:count): " << format_histogram(*fine_h) << '\n';

            if (!stats_json.empty()) {
                nlohmann::ordered_json j;
                j["documents"] = corpus.size();
                j["token_median"] = med;
                j["token_mean"] = mean;
                j["token_lengths"] = lengths;
                j["broad_histogram"] = broad_h ? nlohmann::ordered_json(*broad_h) : nlohmann::ordered_json(nullptr);
                j["fine_histogram"] = fine_h ? nlohmann::ordered_json(*fine_h) : nlohmann::ordered_json(nullptr);
                detail::write_file(stats_json, j.dump(1) + "\n");
            }
            return kExitOk;
        }

        if (split->parsed()) {
            const auto ratios = parse_number_list(split_ratios, "--ratios");
            if (ratios.size() != 3) throw Error(ErrorCode::kConfig, "--ratios needs exactly three values");
            const auto corpus = load_corpus_with(split_corpus_settings, nullptr, nullptr);
            CorpusSplit s;
            try {
                s = split_corpus(corpus, {ratios[0], ratios[1], ratios[2]}, split_seed);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::kInvalidArgument) throw Error(ErrorCode::kConfig, e.what());
                throw;
            }
            const std::filesystem::path dir = split_out;
            auto write_ids = [&](const char* name, const std::vector<std::string>& ids) {
                std::string text;
                for (const auto& id : ids) text += id + '\n';
                detail::write_file(dir / name, text);
            };
            write_ids("train.txt", s.train);
            write_ids("validation.txt", s.validation);
            write_ids("test.txt", s.test);
            nlohmann::ordered_json j;
            j["seed"] = s.seed;
            j["ratios"] = s.ratios;
            j["sizes"] = {s.train.size(), s.validation.size(), s.test.size()};
            detail::write_file(dir / "split.json", j.dump(2) + "\n");
            out << fmt::format("split {} documents: train {}, validation {}, test {} -> {}\n", corpus.size(),
                               s.train.size(), s.validation.size(), s.test.size(), split_out);
            return kExitOk;
        }

        if (weights->parsed()) {
            try {
                weight_config.validate();
            } catch (const Error& e) {
                throw Error(ErrorCode::kConfig, e.what());
            }
            const auto ontology = LabelOntology::load(weights_ontology);
            const auto level = parse_level(weights_level);
            const OntologyRefs refs = level == Level::kBroad ? OntologyRefs{&ontology, nullptr} : OntologyRefs{nullptr, &ontology};
            auto corpus = restrict_to(load_corpus_with(weights_corpus, refs.broad, refs.fine), weights_ids);
            const auto hist = label_histogram(corpus, level, ontology.size());
            const std::vector<std::uint64_t> counts(hist.begin(), hist.end());
            const auto w = compute_weights(counts, weight_config);
            for (const auto& l : ontology.labels()) {
                out << fmt::format("{:>4}  {:>6}  {:>8.4f}  {}\n", l.id, counts[static_cast<std::size_t>(l.id)], w[l.id], l.name);
            }
            if (!weights_out.empty()) detail::write_file(weights_out, w.to_json().dump(2) + "\n");
            return kExitOk;
        }

        if (chunk_cmd->parsed()) {
            const auto plan = chunk_plan(chunk_settings);
            const auto rules = chunk_abbrev.empty() ? SentenceRules::defaults() : SentenceRules::load(chunk_abbrev);
            const auto corpus = load_corpus_with(chunk_corpus, nullptr, nullptr);
            std::string text;
            std::size_t total = 0;
            for (const auto& d : corpus) {
                const auto chunks = chunk(d, plan, rules);
                total += chunks.size();
                text += chunks_to_jsonl(chunks);
            }
            detail::write_file(chunk_out, text);
            out << fmt::format("{} chunks from {} documents -> {}\n", total, corpus.size(), chunk_out);
            return kExitOk;
        }

        if (classify->parsed()) {
            ClassifyOptions options;
            options.level = parse_level(classify_level);
            options.plan = chunk_plan(classify_chunk);
            options.rule = parse_decision_rule(classify_rule);
            options.decision.fixed_position = classify_fixed_position;
            options.decision.ordinal_weights = parse_number_list(classify_vote_weights, "--vote-weights");
            options.parse.fuzzy_names = classify_fuzzy;
            options.backend = parse_backend(classify_backend);
            options.retrieve_k = classify_k;
            options.retrieval.rule = parse_scoring_rule(classify_scoring);
            if (!classify_markers.empty()) options.retrieval.markers = StructureMarkers::load(classify_markers);

            const auto ontology = LabelOntology::load(classify_ontology);
            const OntologyRefs refs =
                options.level == Level::kBroad ? OntologyRefs{&ontology, nullptr} : OntologyRefs{nullptr, &ontology};
            const auto full = load_corpus_with(classify_corpus_settings, refs.broad, refs.fine);
            const auto docs = restrict_to(full, classify_ids);

            auto tmpl = PromptTemplate::load(classify_template);
            if (!classify_answer_format.empty()) tmpl.answer_format = parse_answer_format(classify_answer_format);
            if (classify_fewshot_k > 0) {
                const auto pool = restrict_to(full, classify_fewshot_ids);
                tmpl.fewshot = select_fewshot(pool, options.level, classify_fewshot_k, classify_seed,
                                              classify_fewshot_cap, tmpl.excerpt_budget);
            }
            if (options.backend == Backend::kLlm) {
                try {
                    check_compatible(tmpl, ontology);
                } catch (const Error& e) {
                    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", classify_template, e.what()));
                }
            }
            std::optional<KeywordLexicon> lexicon;
            if (!classify_lexicon.empty()) lexicon = KeywordLexicon::load(classify_lexicon, ontology);
            if (options.backend == Backend::kLexicon && !lexicon) {
                throw Error(ErrorCode::kConfig, "--backend lexicon needs --lexicon");
            }
            if (lexicon && (classify_k < 1 || classify_k > ontology.size())) {
                throw Error(ErrorCode::kConfig, fmt::format("--retrieve-k must lie in 1..{}", ontology.size()));
            }

            std::optional<EndpointSession> session;
            if (options.backend == Backend::kLlm) {
                session.emplace(open_endpoint(classify_endpoint));
                options.endpoint = session->config;
                try {
                    options.endpoint.validate();
                } catch (const Error& e) {
                    throw Error(ErrorCode::kConfig, e.what());
                }
            }

            const auto result = classify_corpus(docs, ontology, tmpl, lexicon ? &*lexicon : nullptr, options);
            if (session && session->mock) session->mock->stop();

            const std::string technique = technique_label(options, lexicon.has_value());
            const std::string model = options.backend == Backend::kLexicon ? "lexicon" : classify_endpoint.model;

            RunArtifacts run;
            run.dir = std::filesystem::path(classify_output) / classify_run;
            run.config_text = classify->config_to_str(true, false);
            run.config = {
                {"run_name", classify_run},
                {"corpus", classify_corpus_settings.path},
                {"ontology", classify_ontology},
                {"level", classify_level},
                {"template", classify_template},
                {"answer_format", to_string(tmpl.answer_format)},
                {"strategy", classify_chunk.strategy},
                {"window", classify_chunk.window},
                {"overlap", classify_chunk.overlap},
                {"budget", classify_chunk.budget},
                {"rule", classify_rule},
                {"fixed_position", classify_fixed_position},
                {"vote_weights", options.decision.ordinal_weights},
                {"fuzzy_names", classify_fuzzy},
                {"backend", classify_backend},
                {"lexicon", classify_lexicon},
                {"retrieve_k", classify_k},
                {"scoring_rule", classify_scoring},
                {"ids", classify_ids},
                {"fewshot_k", classify_fewshot_k},
                {"seed", classify_seed},
                {"abstain_policy", classify_policy},
                {"endpoint",
                 {{"base_url", classify_endpoint.mocked() ? std::string("mock") : classify_endpoint.base_url},
                  {"model", classify_endpoint.model},
                  {"temperature", classify_endpoint.temperature},
                  {"max_tokens", classify_endpoint.max_tokens},
                  {"timeout_ms", classify_endpoint.timeout_ms},
                  {"max_retries", classify_endpoint.max_retries},
                  {"backoff_ms", classify_endpoint.backoff_ms},
                  {"parallelism", classify_endpoint.parallelism},
                  {"api_key_env", classify_endpoint.api_key_env},
                  {"mock_fixture", classify_endpoint.mock_fixture},
                  {"mock_default", classify_endpoint.mock_default}}},
            };
            run.inputs["corpus"] = classify_corpus_settings.path;
            run.inputs["ontology"] = classify_ontology;
            run.inputs["template"] = classify_template;
            if (!classify_lexicon.empty()) run.inputs["lexicon"] = classify_lexicon;
            if (!classify_ids.empty()) run.inputs["ids"] = classify_ids;
            if (!classify_endpoint.mock_fixture.empty()) run.inputs["mock_fixture"] = classify_endpoint.mock_fixture;
            write_run_artifacts(run, result);

            std::size_t abstained_chunks = 0;
            for (const auto& p : result.predictions) abstained_chunks += p.prediction.abstained() ? 1 : 0;
            out << fmt::format("classified {} documents ({} chunks, {} abstained) -> {}\n", docs.size(),
                               result.predictions.size(), abstained_chunks, run.dir.string());

            const bool has_gold = std::all_of(docs.begin(), docs.end(), [&](const Document& d) {
                return d.label(options.level).has_value();
            });
            if (has_gold) {
                const auto cm = confusion(gold_labels(docs, options.level), result.decisions, ontology.size());
                const auto report = metrics(cm, parse_abstain_policy(classify_policy));
                auto j = report_to_json(classify_run, report);
                j["model"] = model;
                j["technique"] = technique;
                detail::write_file(run.dir / "report.json", j.dump(2) + "\n");
                out << compare_runs({RunSummary::from_json(j)});
            }
            return kExitOk;
        }

        if (evaluate->parsed()) {
            const auto ontology = LabelOntology::load(eval_ontology);
            const auto level = parse_level(eval_level);
            const OntologyRefs refs = level == Level::kBroad ? OntologyRefs{&ontology, nullptr} : OntologyRefs{nullptr, &ontology};
            const auto corpus = load_corpus_with(eval_corpus, refs.broad, refs.fine);
            const auto decisions = parse_decisions_jsonl(detail::read_file(eval_decisions));
            std::vector<std::string> ids;
            for (const auto& d : decisions) ids.push_back(d.doc_id);
            const auto cm = confusion(gold_labels(select_documents(corpus, ids), level), decisions, ontology.size());
            const auto report = metrics(cm, parse_abstain_policy(eval_policy));
            auto j = report_to_json(eval_run, report);
            j["model"] = eval_model.empty() ? eval_run : eval_model;
            j["technique"] = eval_technique;
            if (!eval_out.empty()) detail::write_file(eval_out, j.dump(2) + "\n");
            out << compare_runs({RunSummary::from_json(j)});
            out << fmt::format("micro F1 {:.3f}, abstain rate {:.3f} ({} of {} documents), policy {}\n", report.micro_f1,
                               report.abstain_rate, cm.abstain_count, cm.total(), eval_policy);
            return kExitOk;
        }

        if (compare->parsed()) {
            std::vector<RunSummary> runs;
            for (const auto& path : compare_reports) {
                try {
                    runs.push_back(RunSummary::from_json(nlohmann::json::parse(detail::read_file(path))));
                } catch (const nlohmann::json::exception& e) {
                    throw Error(ErrorCode::kParse, fmt::format("{}: {}", path, e.what()));
                }
            }
            const auto averaging = parse_averaging(compare_average);
            if (compare_format == "csv") {
                out << compare_runs_csv(runs, averaging);
            } else if (compare_format == "json") {
                out << compare_runs_json(runs, averaging).dump(2) << '\n';
            } else {
                out << compare_runs(runs, averaging);
            }
            if (!compare_out.empty()) detail::write_file(compare_out, compare_runs_json(runs, averaging).dump(2) + "\n");
            return kExitOk;
        }

        if (mock->parsed()) {
            MockOptions options;
            options.host = mock_host;
            options.threads = mock_threads;
            if (!mock_default.empty()) options.default_response = mock_default;
            if (!mock_log.empty()) options.log_path = mock_log;
            MockServer server(MockFixture::load(mock_fixture), options);
            server.start(mock_port);
            out << fmt::format("mock endpoint listening on {}\n", server.base_url()) << std::flush;

            g_stop_requested = false;
            const auto previous_int = std::signal(SIGINT, on_stop_signal);
            const auto previous_term = std::signal(SIGTERM, on_stop_signal);
            const auto started = std::chrono::steady_clock::now();
            while (!g_stop_requested) {
                if (mock_duration > 0 && std::chrono::steady_clock::now() - started >= std::chrono::milliseconds(mock_duration)) {
                    break;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            server.stop();
            std::signal(SIGINT, previous_int);
            std::signal(SIGTERM, previous_term);
            out << fmt::format("served {} requests\n", server.requests().size());
            return kExitOk;
        }

        if (lexicon_cmd->parsed()) {
            const auto ontology = LabelOntology::load(lex_ontology);
            const auto tmpl = PromptTemplate::load(lex_template);
            PromptFields fields;
            fields.label_block = render_label_block(ontology, tmpl.label_block_style);
            const auto prompt = render_prompt(tmpl, ontology, fields);
            const std::string digest = sha256_hex(prompt.system + '\x1f' + prompt.user + '\x1f' + lex_endpoint.model);
            const std::string header_key = "prompt_sha256=" + digest;

            if (!lex_refresh && std::filesystem::exists(lex_out)) {
                const auto cached = detail::read_file(lex_out);
                if (cached.find(header_key) != std::string::npos) {
                    const auto lex = KeywordLexicon::parse(cached, ontology, false);
                    out << fmt::format("cached lexicon {} ({} categories, {} terms)\n", lex_out, lex.entries.size(),
                                       lex.term_count());
                    return kExitOk;
                }
            }

            auto session = open_endpoint(lex_endpoint);
            auto config = session.config;
            config.max_tokens = std::max(config.max_tokens, 2048);
            const auto ex = complete(config, prompt.system, prompt.user);
            if (!ex.ok()) throw Error(ErrorCode::kEndpoint, *ex.endpoint_error);
            const auto lex = KeywordLexicon::parse(ex.response_text, ontology, false);
            std::string text = fmt::format("# generated by lexclass {} model={} {}\n", LEXCLASS_VERSION,
                                           lex_endpoint.model, header_key);
            text += lex.to_text(ontology);
            detail::write_file(lex_out, text);
            out << fmt::format("wrote {} ({} categories, {} terms)\n", lex_out, lex.entries.size(), lex.term_count());
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::kConfig ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace lexclass
