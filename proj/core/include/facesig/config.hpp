#ifndef FACESIG_CONFIG_HPP
#define FACESIG_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace facesig {

/// Flat key-value configuration parsed from a TOML-subset file.
///
/// Supported syntax: `key = value` lines, `[section]` headers,
/// `[[table]]` array-of-tables, strings in double quotes, integers,
/// floats, booleans, and `#` comments. Section names are folded into
/// the key as `section.key`. Array-of-tables entries are collected
/// separately (used by cohort manifests for their recording lists).
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return values_; }

    /// Entries of every `[[name]]` block, in file order.
    const std::vector<std::map<std::string, std::string>>& tables(const std::string& name) const;

    /// Keys must all be members of `allowed` (prefix match for dotted
    /// sections); throws ConfigError otherwise.
    void reject_unknown_keys(const std::vector<std::string>& allowed) const;

    /// FNV-1a hash of the canonical (sorted) key=value rendering.
    std::uint64_t content_hash() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::map<std::string, std::string>>> tables_;
    static const std::vector<std::map<std::string, std::string>> kNoTables;
};

std::uint64_t fnv1a64(const std::string& data);

} // namespace facesig

#endif
