#include "facesig/config.hpp"
#include "facesig/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace facesig {

const std::vector<std::map<std::string, std::string>> Config::kNoTables;

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::map<std::string, std::string>* current_table = nullptr;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.size() >= 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
            std::string name = trim(line.substr(2, line.size() - 4));
            cfg.tables_[name].emplace_back();
            current_table = &cfg.tables_[name].back();
            section.clear();
            continue;
        }
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            current_table = nullptr;
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (current_table) {
            (*current_table)[key] = value;
        } else {
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = value;
        }
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        size_t pos = 0;
        std::int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer: " + v);
    }
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: " + v);
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config key " + key + ": not a boolean: " + v);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}
std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}
double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}
bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

const std::vector<std::map<std::string, std::string>>& Config::tables(const std::string& name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? kNoTables : it->second;
}

void Config::reject_unknown_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const std::string& a) {
            return key == a || (a.back() == '.' && key.rfind(a, 0) == 0);
        });
        if (!ok) throw ConfigError("unknown config key: " + key);
    }
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t Config::content_hash() const {
    std::string canon;
    for (const auto& [key, value] : values_) {
        canon += key;
        canon += '=';
        canon += value;
        canon += '\n';
    }
    for (const auto& [name, rows] : tables_) {
        for (const auto& row : rows) {
            canon += "[[" + name + "]]\n";
            for (const auto& [key, value] : row) {
                canon += key;
                canon += '=';
                canon += value;
                canon += '\n';
            }
        }
    }
    return fnv1a64(canon);
}

} // namespace facesig
