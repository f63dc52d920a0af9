#pragma once
// The named verification checks behind the command-line tool's `verify`
// command.  Each check is a self-contained computation returning a
// structured result; results are safe to compute from several threads at
// once.

#include "json.hpp"

#include <string>
#include <vector>

namespace fquad::checks {

struct CheckOptions {
    unsigned max_dim = 4;  // largest site dimension (even, >= 2)
};

struct CheckResult {
    std::string id;
    bool ok = false;
    // {"schema": "fquad.check/1", "id", "ok", "tables": [{name, columns,
    //  rows}], "notes": [...], "failure"?}
    nlohmann::json payload;
};

// Registered check ids, in registration order.
const std::vector<std::string>& check_ids();
bool has_check(const std::string& id);

// Runs one check; throws std::invalid_argument for an unknown id.
CheckResult run_check(const std::string& id, const CheckOptions& opts);

}  // namespace fquad::checks
