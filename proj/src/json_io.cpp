#include "claimgraph/json_io.hpp"

namespace claimgraph::io {

json vector_to_json(std::span<const float> values) {
    json arr = json::array();
    for (float f : values) arr.push_back(static_cast<double>(f));
    return arr;
}

EmbeddingVector vector_from_json(const json& arr) {
    std::vector<float> values;
    values.reserve(arr.size());
    for (const auto& v : arr) values.push_back(static_cast<float>(v.get<double>()));
    return EmbeddingVector(std::move(values));
}

json to_json(const Factcheck& fc) {
    return {{"verdict", std::string(to_string(fc.verdict))},
            {"note", fc.note},
            {"checked_at", fc.checked_at},
            {"source_claim_id", fc.source_claim_id}};
}

Factcheck factcheck_from_json(const json& j) {
    return Factcheck{parse_verdict(j.at("verdict").get<std::string>()), j.at("note").get<std::string>(),
                     j.at("checked_at").get<std::string>(), j.at("source_claim_id").get<std::string>()};
}

json to_json(const Claim& c, bool include_vector) {
    json j = {{"id", c.id},
              {"text", c.sentence.text},
              {"article_id", c.sentence.article_id},
              {"char_start", c.sentence.char_start},
              {"char_end", c.sentence.char_end},
              {"detection_score", c.detection_score},
              {"category", std::string(to_string(c.category))},
              {"factcheck", c.factcheck ? to_json(*c.factcheck) : json(nullptr)}};
    if (include_vector) j["vector"] = vector_to_json(c.embedding.values());
    return j;
}

Claim claim_from_json(const json& j) {
    Claim c{j.at("id").get<std::string>(),
            Sentence{j.at("text").get<std::string>(), j.value("article_id", std::string{}),
                     j.value("char_start", std::size_t{0}), j.value("char_end", std::size_t{0})},
            vector_from_json(j.at("vector")),
            j.value("detection_score", 1.0),
            parse_category(j.value("category", std::string("checkable"))),
            std::nullopt};
    if (j.contains("factcheck") && !j["factcheck"].is_null()) c.factcheck = factcheck_from_json(j["factcheck"]);
    return c;
}

json to_json(const InsertionReport& r) {
    json merges = json::array();
    for (const auto& m : r.merges) merges.push_back({{"into", m.into}, {"from", m.from}});
    return {{"claim_id", r.claim_id},
            {"new_edges", r.new_edges},
            {"community_id", r.community_id},
            {"subgraph_size", r.subgraph_size},
            {"elapsed_ms", r.elapsed_ms},
            {"merges", std::move(merges)}};
}

}  // namespace claimgraph::io
