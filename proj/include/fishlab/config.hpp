#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fishlab/types.hpp"

namespace fishlab {

/// Flat `key = value` configuration with `[section]` headers. Lists are
/// comma separated; `#` starts a comment. Lookups name the offending
/// `section.key` in their errors.
class ConfigFile {
public:
    static ConfigFile load(const std::string& path);
    static ConfigFile parse(std::string_view text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;

    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
    std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;

    [[noreturn]] void fail(const std::string& section, const std::string& key,
                           const std::string& why) const;
};

}  // namespace fishlab
