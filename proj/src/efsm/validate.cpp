#include "splanner/efsm/validate.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "splanner/efsm/semantics.hpp"

namespace splanner::efsm {

namespace {

constexpr size_t kMaxEnumValues = 64;
constexpr uint64_t kValuationWarnThreshold = uint64_t{1} << 16;

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

class Validator {
public:
    explicit Validator(const RawApp& raw) : raw_(raw) {}

    ValidationResult run() {
        check_app_id();
        check_states();
        check_initial();
        check_vars();
        check_functions();
        check_transitions();
        warn_degenerate();

        ValidationResult result;
        result.diagnostics = std::move(diags_);
        if (!has_errors(result.diagnostics)) result.machine = build();
        return result;
    }

private:
    void error(DiagCode code, std::string message, std::string location, const SourceSpan& span) {
        Diagnostic d{code, Severity::Error, std::move(message), std::move(location), std::nullopt};
        if (span.known()) d.span = span;
        diags_.push_back(std::move(d));
    }

    void warning(DiagCode code, std::string message, std::string location, const SourceSpan& span) {
        Diagnostic d{code, Severity::Warning, std::move(message), std::move(location), std::nullopt};
        if (span.known()) d.span = span;
        diags_.push_back(std::move(d));
    }

    void check_app_id() {
        if (!is_identifier(raw_.app_id))
            error(DiagCode::DOMAIN_MISMATCH,
                  "app id '" + raw_.app_id + "' is not an identifier", raw_.app_id, raw_.span);
    }

    void check_states() {
        if (raw_.states.empty()) {
            error(DiagCode::NO_INITIAL_STATE, "machine declares no states", raw_.app_id, raw_.span);
            return;
        }
        std::unordered_set<std::string> seen;
        for (size_t i = 0; i < raw_.states.size(); ++i) {
            const auto& s = raw_.states[i];
            const SourceSpan& span = i < raw_.state_spans.size() ? raw_.state_spans[i] : raw_.span;
            if (!seen.insert(s).second)
                error(DiagCode::DUPLICATE_NAME, "state '" + s + "' declared more than once", s, span);
        }
    }

    void check_initial() {
        if (raw_.initial_states.empty()) {
            error(DiagCode::NO_INITIAL_STATE, "no initial state is marked", raw_.app_id, raw_.span);
            return;
        }
        if (raw_.initial_states.size() > 1) {
            error(DiagCode::NO_INITIAL_STATE,
                  "more than one initial state is marked", raw_.initial_states[1], raw_.span);
            return;
        }
        const auto& init = raw_.initial_states[0];
        if (std::find(raw_.states.begin(), raw_.states.end(), init) == raw_.states.end())
            error(DiagCode::NO_INITIAL_STATE,
                  "initial state '" + init + "' is not a declared state", init, raw_.span);
    }

    void check_vars() {
        std::unordered_set<std::string> seen;
        for (const auto& v : raw_.vars) {
            if (!seen.insert(v.name).second)
                error(DiagCode::DUPLICATE_NAME,
                      "variable '" + v.name + "' declared more than once", v.name, v.span);
            std::vector<std::string> domain = domain_of(v);
            if (!v.is_bool) {
                if (v.enum_values.size() < 2)
                    error(DiagCode::DOMAIN_MISMATCH,
                          "enum variable '" + v.name + "' needs at least 2 values", v.name, v.span);
                if (v.enum_values.size() > kMaxEnumValues)
                    error(DiagCode::DOMAIN_MISMATCH,
                          "enum variable '" + v.name + "' exceeds " +
                              std::to_string(kMaxEnumValues) + " values",
                          v.name, v.span);
                std::unordered_set<std::string> lits;
                for (const auto& lit : v.enum_values)
                    if (!lits.insert(lit).second)
                        error(DiagCode::DUPLICATE_NAME,
                              "enum value '" + lit + "' repeated in variable '" + v.name + "'",
                              v.name, v.span);
            }
            if (std::find(domain.begin(), domain.end(), v.initial) == domain.end())
                error(DiagCode::DOMAIN_MISMATCH,
                      "initial value '" + v.initial + "' is outside the domain of '" + v.name + "'",
                      v.name, v.span);
        }
    }

    void check_functions() {
        std::unordered_set<std::string> seen;
        for (const auto& f : raw_.functions) {
            if (!seen.insert(f.name).second)
                error(DiagCode::DUPLICATE_NAME,
                      "function '" + f.name + "' declared more than once", f.name, f.span);
            std::unordered_set<std::string> params;
            for (const auto& p : f.params)
                if (!params.insert(p).second)
                    error(DiagCode::DUPLICATE_NAME,
                          "parameter '" + p + "' repeated in function '" + f.name + "'", f.name,
                          f.span);
        }
    }

    const RawVar* find_var(const std::string& name) const {
        for (const auto& v : raw_.vars)
            if (v.name == name) return &v;
        return nullptr;
    }

    const RawFunction* find_function(const std::string& name) const {
        for (const auto& f : raw_.functions)
            if (f.name == name) return &f;
        return nullptr;
    }

    static std::vector<std::string> domain_of(const RawVar& v) {
        if (v.is_bool) return {"false", "true"};
        return v.enum_values;
    }

    bool state_exists(const std::string& name) const {
        return std::find(raw_.states.begin(), raw_.states.end(), name) != raw_.states.end();
    }

    void check_var_literal(const std::string& var, const std::string& literal,
                           const std::string& where, const SourceSpan& span) {
        const RawVar* decl = find_var(var);
        if (!decl) {
            error(DiagCode::UNKNOWN_VAR, "variable '" + var + "' is not declared", where, span);
            return;
        }
        auto domain = domain_of(*decl);
        if (std::find(domain.begin(), domain.end(), literal) == domain.end())
            error(DiagCode::DOMAIN_MISMATCH,
                  "literal '" + literal + "' is outside the domain of '" + var + "'", where, span);
    }

    void check_transitions() {
        std::unordered_set<std::string> ids;
        for (const auto& t : raw_.transitions) {
            if (!ids.insert(t.id).second)
                error(DiagCode::DUPLICATE_NAME,
                      "transition id '" + t.id + "' declared more than once", t.id, t.span);
            if (!state_exists(t.source))
                error(DiagCode::UNKNOWN_STATE,
                      "source state '" + t.source + "' is not declared", t.id, t.span);
            if (!state_exists(t.target))
                error(DiagCode::UNKNOWN_STATE,
                      "target state '" + t.target + "' is not declared", t.id, t.span);
            if (t.event_text.empty())
                error(DiagCode::DOMAIN_MISMATCH, "event text must be non-empty", t.id, t.span);

            for (const auto& atom : t.guard)
                check_var_literal(atom.var, atom.literal, t.id,
                                  atom.span.known() ? atom.span : t.span);

            std::unordered_set<std::string> assigned;
            for (const auto& a : t.update) {
                if (!assigned.insert(a.var).second)
                    error(DiagCode::DUPLICATE_NAME,
                          "variable '" + a.var + "' assigned twice in one update", t.id,
                          a.span.known() ? a.span : t.span);
                check_var_literal(a.var, a.literal, t.id, a.span.known() ? a.span : t.span);
            }

            std::vector<std::string> slots;
            if (t.action) {
                const SourceSpan& aspan = t.action->span.known() ? t.action->span : t.span;
                const RawFunction* fn = find_function(t.action->function);
                if (!fn) {
                    error(DiagCode::UNKNOWN_FUNCTION,
                          "function '" + t.action->function + "' is not declared", t.id, aspan);
                } else {
                    slots = t.action->has_slot_list ? t.action->slots : fn->params;
                    if (slots.size() != fn->params.size())
                        error(DiagCode::DOMAIN_MISMATCH,
                              "action names " + std::to_string(slots.size()) +
                                  " slot(s) but function '" + fn->name + "' has " +
                                  std::to_string(fn->params.size()) + " parameter(s)",
                              t.id, aspan);
                    std::unordered_set<std::string> slot_set;
                    for (const auto& s : slots)
                        if (!slot_set.insert(s).second)
                            error(DiagCode::DUPLICATE_NAME,
                                  "slot '" + s + "' repeated in action of '" + t.id + "'", t.id,
                                  aspan);
                }
            }

            for (const auto& ph : extract_placeholders(t.event_text)) {
                if (std::find(slots.begin(), slots.end(), ph) == slots.end())
                    error(DiagCode::BAD_PLACEHOLDER,
                          "placeholder '{" + ph + "}' does not match a parameter of the "
                          "transition's function",
                          t.id, t.span);
            }
        }
    }

    void warn_degenerate() {
        if (raw_.functions.empty())
            warning(DiagCode::NO_FUNCTIONS, "machine declares no primary functions", raw_.app_id,
                    raw_.span);
        uint64_t count = 1;
        for (const auto& v : raw_.vars) {
            count *= std::max<uint64_t>(1, domain_of(v).size());
            if (count > kValuationWarnThreshold) {
                std::ostringstream os;
                os << "machine has more than " << kValuationWarnThreshold
                   << " distinct valuations; solving may be expensive";
                warning(DiagCode::VALUATION_SPACE_LARGE, os.str(), raw_.app_id, raw_.span);
                break;
            }
        }
    }

    Efsm build() const {
        Efsm m;
        m.app_id = raw_.app_id;
        m.states = raw_.states;
        m.initial_index = static_cast<int>(
            std::find(raw_.states.begin(), raw_.states.end(), raw_.initial_states[0]) -
            raw_.states.begin());

        for (const auto& v : raw_.vars) {
            VarDecl d;
            d.name = v.name;
            d.is_bool = v.is_bool;
            d.domain = domain_of(v);
            d.initial_index = static_cast<int>(
                std::find(d.domain.begin(), d.domain.end(), v.initial) - d.domain.begin());
            m.vars.push_back(std::move(d));
        }
        for (const auto& f : raw_.functions)
            m.functions.push_back({f.name, f.params, f.description});

        m.rebuild_indexes();

        for (const auto& t : raw_.transitions) {
            Transition out;
            out.id = t.id;
            out.source = t.source;
            out.target = t.target;
            out.source_index = m.state_index(t.source);
            out.target_index = m.state_index(t.target);
            out.event_text = t.event_text;
            for (const auto& atom : t.guard) {
                GuardAtom g;
                g.var = atom.var;
                g.equals = atom.equals;
                g.literal = atom.literal;
                g.var_index = m.var_index(atom.var);
                g.literal_index = literal_index(m, g.var_index, atom.literal);
                out.guard.atoms.push_back(std::move(g));
            }
            for (const auto& a : t.update) {
                Assignment s;
                s.var = a.var;
                s.literal = a.literal;
                s.var_index = m.var_index(a.var);
                s.literal_index = literal_index(m, s.var_index, a.literal);
                out.update.assignments.push_back(std::move(s));
            }
            if (t.action) {
                ActionRef a;
                a.function = t.action->function;
                a.function_index = m.function_index(t.action->function);
                a.slots = t.action->has_slot_list
                              ? t.action->slots
                              : m.functions[static_cast<size_t>(a.function_index)].params;
                out.action = std::move(a);
            }
            m.transitions.push_back(std::move(out));
        }
        return m;
    }

    static int literal_index(const Efsm& m, int var_index, const std::string& literal) {
        const auto& domain = m.vars[static_cast<size_t>(var_index)].domain;
        return static_cast<int>(std::find(domain.begin(), domain.end(), literal) - domain.begin());
    }

    const RawApp& raw_;
    std::vector<Diagnostic> diags_;
};

}  // namespace

ValidationResult validate_efsm(const RawApp& raw) {
    return Validator(raw).run();
}

KbValidationResult validate_document(const ModelDocument& doc) {
    KbValidationResult result;
    KnowledgeBase kb;
    std::unordered_set<std::string> ids;
    bool failed = false;

    for (const auto& raw : doc.apps) {
        if (!ids.insert(raw.app_id).second) {
            Diagnostic d{DiagCode::DUPLICATE_NAME, Severity::Error,
                         "app '" + raw.app_id + "' defined more than once", raw.app_id,
                         std::nullopt};
            if (raw.span.known()) d.span = raw.span;
            result.diagnostics.push_back(std::move(d));
            failed = true;
        }
        ValidationResult r = validate_efsm(raw);
        result.diagnostics.insert(result.diagnostics.end(), r.diagnostics.begin(),
                                  r.diagnostics.end());
        if (r.ok())
            kb.add(std::move(*r.machine));
        else
            failed = true;
    }
    if (!failed) result.kb = std::move(kb);
    return result;
}

}  // namespace splanner::efsm
