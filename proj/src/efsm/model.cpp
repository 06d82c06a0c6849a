#include "splanner/efsm/model.hpp"

namespace splanner::efsm {

void Efsm::rebuild_indexes() {
    state_index_.clear();
    var_index_.clear();
    function_index_.clear();
    for (size_t i = 0; i < states.size(); ++i) state_index_[states[i]] = static_cast<int>(i);
    for (size_t i = 0; i < vars.size(); ++i) var_index_[vars[i].name] = static_cast<int>(i);
    for (size_t i = 0; i < functions.size(); ++i)
        function_index_[functions[i].name] = static_cast<int>(i);
}

}  // namespace splanner::efsm
