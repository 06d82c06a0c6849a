#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace splanner::efsm {

// A declared variable. Boolean variables use the fixed domain {false, true};
// enumerations carry their literals in declaration order.
struct VarDecl {
    std::string name;
    bool is_bool = true;
    std::vector<std::string> domain;  // for bool: {"false", "true"}
    int initial_index = 0;

    const std::string& initial() const { return domain[static_cast<size_t>(initial_index)]; }
    bool operator==(const VarDecl&) const = default;
};

struct PrimaryFunction {
    std::string name;
    std::vector<std::string> params;
    std::string description;

    bool operator==(const PrimaryFunction&) const = default;
};

// One conjunct of a guard: var <op> literal, with indices resolved at validation.
struct GuardAtom {
    std::string var;
    bool equals = true;  // false means "!="
    std::string literal;
    int var_index = -1;
    int literal_index = -1;

    bool operator==(const GuardAtom&) const = default;
};

struct Guard {
    std::vector<GuardAtom> atoms;  // empty conjunction is always true

    bool operator==(const Guard&) const = default;
};

struct Assignment {
    std::string var;
    std::string literal;
    int var_index = -1;
    int literal_index = -1;

    bool operator==(const Assignment&) const = default;
};

struct Update {
    std::vector<Assignment> assignments;  // applied in order; empty means no change

    bool operator==(const Update&) const = default;
};

// The primary function invoked by a transition. slots maps the function's
// formals (positionally) to the placeholder names used in the event text.
struct ActionRef {
    std::string function;
    std::vector<std::string> slots;
    int function_index = -1;

    bool operator==(const ActionRef&) const = default;
};

enum class TransitionKind { Navigation, Configuration, FunctionExecution, Combined };

struct Transition {
    std::string id;
    std::string source;
    std::string target;
    int source_index = -1;
    int target_index = -1;
    std::string event_text;
    Guard guard;
    Update update;
    std::optional<ActionRef> action;

    bool has_action() const { return action.has_value(); }
    bool has_update() const { return !update.assignments.empty(); }

    TransitionKind kind() const {
        if (has_action() && has_update()) return TransitionKind::Combined;
        if (has_action()) return TransitionKind::FunctionExecution;
        if (has_update()) return TransitionKind::Configuration;
        return TransitionKind::Navigation;
    }

    bool operator==(const Transition&) const = default;
};

// A total assignment of values to all declared variables, stored as indices
// into each variable's domain (declaration order). Immutable in practice:
// updates produce fresh valuations.
class Valuation {
public:
    Valuation() = default;
    explicit Valuation(std::vector<uint8_t> values) : values_(std::move(values)) {}

    size_t size() const { return values_.size(); }
    uint8_t value_index(size_t var) const { return values_[var]; }
    void set_value_index(size_t var, uint8_t v) { values_[var] = v; }
    const std::vector<uint8_t>& raw() const { return values_; }

    bool operator==(const Valuation&) const = default;

private:
    std::vector<uint8_t> values_;
};

// One application's validated state machine. Instances are immutable after
// validation and safe to share across threads.
class Efsm {
public:
    std::string app_id;
    std::vector<std::string> states;  // declaration order; pairwise distinct
    int initial_index = 0;
    std::vector<VarDecl> vars;
    std::vector<PrimaryFunction> functions;
    std::vector<Transition> transitions;  // declaration order is significant

    const std::string& initial_state() const { return states[static_cast<size_t>(initial_index)]; }

    int state_index(const std::string& name) const { return lookup(state_index_, name); }
    int var_index(const std::string& name) const { return lookup(var_index_, name); }
    int function_index(const std::string& name) const { return lookup(function_index_, name); }

    const PrimaryFunction* find_function(const std::string& name) const {
        int i = function_index(name);
        return i < 0 ? nullptr : &functions[static_cast<size_t>(i)];
    }

    // Every variable at its declared initial value.
    Valuation initial_valuation() const {
        std::vector<uint8_t> v(vars.size());
        for (size_t i = 0; i < vars.size(); ++i) v[i] = static_cast<uint8_t>(vars[i].initial_index);
        return Valuation(std::move(v));
    }

    // Total number of distinct valuations (product of domain sizes), clamped
    // at 2^62 to keep the arithmetic overflow-free.
    uint64_t valuation_count() const {
        uint64_t n = 1;
        const uint64_t cap = uint64_t{1} << 62;
        for (const auto& v : vars) {
            n *= static_cast<uint64_t>(v.domain.size());
            if (n > cap) return cap;
        }
        return n;
    }

    // Renders a valuation as (name, literal) pairs in declaration order.
    std::vector<std::pair<std::string, std::string>> valuation_bindings(const Valuation& v) const {
        std::vector<std::pair<std::string, std::string>> out;
        out.reserve(vars.size());
        for (size_t i = 0; i < vars.size(); ++i)
            out.emplace_back(vars[i].name, vars[i].domain[v.value_index(i)]);
        return out;
    }

    void rebuild_indexes();

    bool operator==(const Efsm& other) const {
        return app_id == other.app_id && states == other.states &&
               initial_index == other.initial_index && vars == other.vars &&
               functions == other.functions && transitions == other.transitions;
    }

private:
    static int lookup(const std::unordered_map<std::string, int>& m, const std::string& k) {
        auto it = m.find(k);
        return it == m.end() ? -1 : it->second;
    }

    std::unordered_map<std::string, int> state_index_;
    std::unordered_map<std::string, int> var_index_;
    std::unordered_map<std::string, int> function_index_;
};

// The knowledge base: one validated machine per application, in insertion order.
class KnowledgeBase {
public:
    void add(Efsm machine) {
        index_[machine.app_id] = machines_.size();
        machines_.push_back(std::move(machine));
    }

    const std::vector<Efsm>& machines() const { return machines_; }
    size_t size() const { return machines_.size(); }

    const Efsm* find(const std::string& app_id) const {
        auto it = index_.find(app_id);
        return it == index_.end() ? nullptr : &machines_[it->second];
    }

    bool operator==(const KnowledgeBase& other) const { return machines_ == other.machines_; }

private:
    std::vector<Efsm> machines_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace splanner::efsm
