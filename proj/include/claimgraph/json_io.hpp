#pragma once

// JSON encodings of the domain types, shared by the snapshot, event-log and
// HTTP layers. Vectors are written as the exact double value of each float
// so a read-back is bit-identical.

#include "claimgraph/core.hpp"
#include "claimgraph/engine.hpp"
#include "json.hpp"

namespace claimgraph::io {

using json = nlohmann::json;

json vector_to_json(std::span<const float> values);
EmbeddingVector vector_from_json(const json& arr);

json to_json(const Factcheck& fc);
Factcheck factcheck_from_json(const json& j);

/// {"id","text","article_id","char_start","char_end","detection_score",
///  "category","factcheck","vector"}; the vector is omitted when
/// include_vector is false.
json to_json(const Claim& c, bool include_vector = true);
Claim claim_from_json(const json& j);

json to_json(const InsertionReport& r);

}  // namespace claimgraph::io
