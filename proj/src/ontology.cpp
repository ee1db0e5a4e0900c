#include "lexclass/ontology.hpp"

#include <set>

#include <fmt/format.h>

#include "lexclass/error.hpp"
#include "text_util.hpp"

namespace lexclass {

std::string_view to_string(Level level) {
    return level == Level::kBroad ? "broad" : "fine";
}

Level parse_level(std::string_view s) {
    if (s == "broad") return Level::kBroad;
    if (s == "fine") return Level::kFine;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown level '{}' (expected broad|fine)", s));
}

LabelOntology::LabelOntology(std::string level_name, std::vector<Label> labels,
                             std::optional<std::vector<LabelId>> fine_to_broad)
    : level_name_(std::move(level_name)), labels_(std::move(labels)), fine_to_broad_(std::move(fine_to_broad)) {
    if (labels_.empty()) throw Error(ErrorCode::kInvalidArgument, "ontology has no labels");

    std::vector<bool> seen(labels_.size(), false);
    for (const auto& l : labels_) {
        if (!contains(l.id) || seen[static_cast<std::size_t>(l.id)]) {
            throw Error(ErrorCode::kInvalidArgument,
                        fmt::format("ontology ids must be exactly 0..{}; offending id {}", labels_.size() - 1, l.id));
        }
        seen[static_cast<std::size_t>(l.id)] = true;
    }
    std::sort(labels_.begin(), labels_.end(), [](const Label& a, const Label& b) { return a.id < b.id; });

    std::set<std::string> names;
    for (const auto& l : labels_) {
        if (!names.insert(detail::normalize_key(l.name)).second) {
            throw Error(ErrorCode::kDuplicate, fmt::format("duplicate label name '{}'", l.name));
        }
    }
    if (fine_to_broad_ && fine_to_broad_->size() != labels_.size()) {
        throw Error(ErrorCode::kInvalidArgument, "fine_to_broad must map every fine id");
    }
}

LabelOntology LabelOntology::from_json(const nlohmann::json& j) {
    try {
        std::vector<Label> labels;
        for (const auto& e : j.at("labels")) {
            labels.push_back({e.at("id").get<LabelId>(), e.at("name").get<std::string>(),
                              e.value("gloss", std::string{})});
        }
        std::optional<std::vector<LabelId>> mapping;
        if (j.contains("fine_to_broad") && !j.at("fine_to_broad").is_null()) {
            std::vector<LabelId> m(labels.size(), -1);
            for (const auto& [key, value] : j.at("fine_to_broad").items()) {
                const int fine = std::stoi(key);
                if (fine < 0 || static_cast<std::size_t>(fine) >= m.size()) {
                    throw Error(ErrorCode::kOutOfRange, fmt::format("fine_to_broad key {} is not a fine id", key));
                }
                m[static_cast<std::size_t>(fine)] = value.get<LabelId>();
            }
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] < 0) {
                    throw Error(ErrorCode::kInvalidArgument, fmt::format("fine_to_broad is missing fine id {}", i));
                }
            }
            mapping = std::move(m);
        }
        return LabelOntology(j.at("level_name").get<std::string>(), std::move(labels), std::move(mapping));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("malformed ontology: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error(ErrorCode::kParse, "malformed ontology: non-integer fine_to_broad key");
    }
}

LabelOntology LabelOntology::load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::kParse, fmt::format("{}: {}", path.string(), e.what()));
    }
    return from_json(j);
}

nlohmann::json LabelOntology::to_json() const {
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : labels_) {
        nlohmann::json e = {{"id", l.id}, {"name", l.name}};
        if (!l.gloss.empty()) e["gloss"] = l.gloss;
        labels.push_back(std::move(e));
    }
    nlohmann::json mapping = nullptr;
    if (fine_to_broad_) {
        mapping = nlohmann::json::object();
        for (std::size_t i = 0; i < fine_to_broad_->size(); ++i) mapping[std::to_string(i)] = (*fine_to_broad_)[i];
    }
    return {{"level_name", level_name_}, {"labels", labels}, {"fine_to_broad", mapping}};
}

const std::string& LabelOntology::name(LabelId id) const {
    if (!contains(id)) throw Error(ErrorCode::kOutOfRange, fmt::format("label {} out of range", id));
    return labels_[static_cast<std::size_t>(id)].name;
}

std::optional<LabelId> LabelOntology::find(std::string_view name) const {
    const std::string key = detail::normalize_key(name);
    for (const auto& l : labels_) {
        if (detail::normalize_key(l.name) == key) return l.id;
    }
    return std::nullopt;
}

void LabelOntology::validate_mapping(const LabelOntology& broad) const {
    if (!fine_to_broad_) return;
    for (std::size_t i = 0; i < fine_to_broad_->size(); ++i) {
        if (!broad.contains((*fine_to_broad_)[i])) {
            throw Error(ErrorCode::kOutOfRange,
                        fmt::format("fine id {} maps to broad id {}, which is not in the broad ontology", i,
                                    (*fine_to_broad_)[i]));
        }
    }
}

}  // namespace lexclass
