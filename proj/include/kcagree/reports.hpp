#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kcagree::reports {

using nlohmann::json;

inline constexpr int kSchema = 1;

/// Experiment names: ci, c, hash_verify, lemma5, break, levin, decide, gl,
/// s_count, cor3.
std::vector<std::string> experiments();

/// Default configuration of an experiment. Throws ValidationError for an
/// unknown name.
json defaults(const std::string& experiment);

/// flags > file > defaults. Unknown keys and wrongly typed values are
/// validation errors, as are values outside an experiment's preconditions.
json resolve(const std::string& experiment, const json& file, const json& flags);

/// Runs a resolved configuration and returns
/// {schema, version, experiment, config, result}. `threads` only changes
/// the schedule and is not part of the report.
json run(const std::string& experiment, const json& config, unsigned threads = 1);

/// "name": "inf" or a number of bits.
json complexity_json(const std::optional<std::size_t>& bits);

/// One "path,value" line per scalar in the document, depth first.
std::string to_csv(const json& doc);

}  // namespace kcagree::reports
