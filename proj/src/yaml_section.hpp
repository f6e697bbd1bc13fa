#pragma once

#include <yaml-cpp/yaml.h>

#include <set>
#include <string>

#include "jjmeta/errors.hpp"

namespace jjmeta::detail {

// Key set per section; unknown keys are rejected so typos surface.
class Section {
public:
    Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
        : node_(node), name_(std::move(name)) {
        if (!node_) return;
        if (!node_.IsMap()) throw ConfigError(name_, "expected a mapping" + where(node_));
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key)) throw ConfigError(path(key), "unknown key" + where(kv.first));
        }
    }

    template <typename T>
    void read(const std::string& key, T& out) const {
        if (!node_ || !node_[key]) return;
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path(key), "cannot convert value" + where(node_[key]));
        }
    }

    bool has(const std::string& key) const { return node_ && node_[key]; }
    YAML::Node get(const std::string& key) const { return node_ ? node_[key] : YAML::Node{}; }
    std::string path(const std::string& key) const { return name_ + "." + key; }

    static std::string where(const YAML::Node& n) {
        const auto m = n.Mark();
        if (m.line < 0) return {};
        return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
    }

private:
    YAML::Node node_;
    std::string name_;
};

} // namespace jjmeta::detail
