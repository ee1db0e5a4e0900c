#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexclass {

using LabelId = int;

enum class Level { kBroad, kFine };

std::string_view to_string(Level level);
Level parse_level(std::string_view s);

struct Label {
    LabelId id = 0;
    std::string name;
    std::string gloss;  // optional one-line description used by gloss-style label blocks

    bool operator==(const Label&) const = default;
};

/// One level of the two-level category scheme. Ids are dense: exactly
/// {0, ..., K-1}. Names are unique after case folding and whitespace trimming.
class LabelOntology {
public:
    LabelOntology() = default;
    LabelOntology(std::string level_name, std::vector<Label> labels,
                  std::optional<std::vector<LabelId>> fine_to_broad = std::nullopt);

    static LabelOntology from_json(const nlohmann::json& j);
    static LabelOntology load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const std::string& level_name() const { return level_name_; }
    const std::vector<Label>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool contains(LabelId id) const { return id >= 0 && static_cast<std::size_t>(id) < labels_.size(); }
    const std::string& name(LabelId id) const;

    /// Case-insensitive, whitespace-normalized exact lookup.
    std::optional<LabelId> find(std::string_view name) const;

    const std::optional<std::vector<LabelId>>& fine_to_broad() const { return fine_to_broad_; }

    /// Checks a fine_to_broad map against the broad ontology it points into.
    void validate_mapping(const LabelOntology& broad) const;

    bool operator==(const LabelOntology&) const = default;

private:
    std::string level_name_;
    std::vector<Label> labels_;
    std::optional<std::vector<LabelId>> fine_to_broad_;
};

}  // namespace lexclass
