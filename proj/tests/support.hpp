#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lexclass/ontology.hpp"

namespace lexclass::support {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(LEXCLASS_FIXTURE_DIR) / name; }
inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(LEXCLASS_DATA_DIR) / name; }
inline std::filesystem::path template_file(const std::string& name) {
    return std::filesystem::path(LEXCLASS_TEMPLATE_DIR) / name;
}

inline const LabelOntology& broad15() {
    static const LabelOntology o = LabelOntology::load(data("ontologies/broad15.json"));
    return o;
}
inline const LabelOntology& broad13() {
    static const LabelOntology o = LabelOntology::load(data("ontologies/broad13.json"));
    return o;
}
inline const LabelOntology& fine279() {
    static const LabelOntology o = LabelOntology::load(data("ontologies/fine279.json"));
    return o;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("lexclass-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace lexclass::support
