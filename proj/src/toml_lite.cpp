#include "rnls/toml_lite.hpp"

#include <fstream>
#include <sstream>

#include "rnls/errors.hpp"

namespace rnls::toml_lite {

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

Value parse_scalar(const std::string& tok, int lineno) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
    } catch (...) {
    }
    throw ConfigError("toml: cannot parse value '" + tok + "' at line " +
                      std::to_string(lineno));
}

Value parse_array(const std::string& body, int lineno) {
    std::vector<std::string> toks;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            toks.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!strip(cur).empty()) toks.push_back(strip(cur));
    if (toks.empty()) return std::vector<double>{};
    if (!toks[0].empty() && toks[0].front() == '"') {
        std::vector<std::string> out;
        for (const auto& t : toks) out.push_back(std::get<std::string>(parse_scalar(t, lineno)));
        return out;
    }
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(std::get<double>(parse_scalar(t, lineno)));
    return out;
}

} // namespace

Table parse_string(const std::string& text) {
    Table table;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("toml: malformed section at line " + std::to_string(lineno));
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("toml: expected key = value at line " + std::to_string(lineno));
        std::string key = strip(line.substr(0, eq));
        std::string val = strip(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("toml: empty key or value at line " + std::to_string(lineno));
        std::string full = section.empty() ? key : section + "." + key;
        if (val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError("toml: unterminated array at line " + std::to_string(lineno));
            table[full] = parse_array(val.substr(1, val.size() - 2), lineno);
        } else {
            table[full] = parse_scalar(val, lineno);
        }
    }
    return table;
}

Table parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("toml: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

} // namespace rnls::toml_lite
