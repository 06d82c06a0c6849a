#include "splanner/efsm/semantics.hpp"

#include <cctype>

namespace splanner::efsm {

bool eval_guard(const Guard& g, const Valuation& v) {
    for (const auto& atom : g.atoms) {
        bool eq = v.value_index(static_cast<size_t>(atom.var_index)) ==
                  static_cast<uint8_t>(atom.literal_index);
        if (eq != atom.equals) return false;
    }
    return true;
}

Valuation apply_update(const Update& u, const Valuation& v) {
    Valuation out = v;
    for (const auto& a : u.assignments)
        out.set_value_index(static_cast<size_t>(a.var_index), static_cast<uint8_t>(a.literal_index));
    return out;
}

Configuration initial_configuration(const Efsm& m) {
    Configuration c;
    c.state_index = m.initial_index;
    c.valuation = m.initial_valuation();
    c.achieved = 0;
    return c;
}

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Finds the placeholder starting at text[i] (which must be '{'); returns the
// name and advances past the closing '}' on success.
bool scan_placeholder(const std::string& text, size_t& i, std::string& name) {
    size_t j = i + 1;
    size_t start = j;
    while (j < text.size() && ident_char(text[j])) ++j;
    if (j > start && j < text.size() && text[j] == '}') {
        name = text.substr(start, j - start);
        i = j + 1;
        return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> extract_placeholders(const std::string& text) {
    std::vector<std::string> out;
    for (size_t i = 0; i < text.size();) {
        if (text[i] == '{') {
            std::string name;
            size_t j = i;
            if (scan_placeholder(text, j, name)) {
                out.push_back(std::move(name));
                i = j;
                continue;
            }
        }
        ++i;
    }
    return out;
}

std::string substitute_placeholders(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& bindings) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        if (text[i] == '{') {
            std::string name;
            size_t j = i;
            if (scan_placeholder(text, j, name)) {
                bool bound = false;
                for (const auto& [k, v] : bindings) {
                    if (k == name) {
                        out += v;
                        bound = true;
                        break;
                    }
                }
                if (!bound) out.append(text, i, j - i);
                i = j;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

}  // namespace splanner::efsm
