#pragma once

// Line-delimited evaluation records: one JSON object per line, UTF-8, each
// carrying a query id plus exactly one payload form.

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "probe/errors.hpp"

namespace probe::report {

enum class PayloadKind { kScore, kGenerationReference, kGenerationKeywords };

inline const char* payload_name(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::kScore: return "score";
        case PayloadKind::kGenerationReference: return "generation+reference";
        case PayloadKind::kGenerationKeywords: return "generation+keywords";
    }
    return "?";
}

struct EvaluationRecord {
    std::string query_id;
    PayloadKind kind = PayloadKind::kScore;
    double score = 0.0;           // kScore
    std::string generation;      // kGenerationReference / kGenerationKeywords
    std::string reference;       // kGenerationReference
    std::vector<std::string> keywords;  // kGenerationKeywords
    std::size_t source_line = 0;  // provenance only, never serialized
};

inline EvaluationRecord parse_record(const nlohmann::json& j, std::size_t line) {
    if (!j.is_object()) throw IngestionError("record must be a JSON object", line);

    EvaluationRecord rec;
    rec.source_line = line;
    if (!j.contains("query_id") || !j["query_id"].is_string()) {
        throw IngestionError("record requires a string 'query_id'", line);
    }
    rec.query_id = j["query_id"].get<std::string>();
    if (rec.query_id.empty()) throw IngestionError("'query_id' must be non-empty", line);

    const bool has_score = j.contains("score");
    const bool has_generation = j.contains("generation");
    const bool has_reference = j.contains("reference");
    const bool has_keywords = j.contains("keywords");

    if (has_score && !has_generation && !has_reference && !has_keywords) {
        if (!j["score"].is_number()) throw IngestionError("'score' must be a number", line);
        rec.kind = PayloadKind::kScore;
        rec.score = j["score"].get<double>();
        if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
            throw IngestionError("score out of [0,1]: " + std::to_string(rec.score), line);
        }
    } else if (has_generation && has_reference && !has_score && !has_keywords) {
        if (!j["generation"].is_string() || !j["reference"].is_string()) {
            throw IngestionError("'generation' and 'reference' must be strings", line);
        }
        rec.kind = PayloadKind::kGenerationReference;
        rec.generation = j["generation"].get<std::string>();
        rec.reference = j["reference"].get<std::string>();
    } else if (has_generation && has_keywords && !has_score && !has_reference) {
        if (!j["generation"].is_string() || !j["keywords"].is_array()) {
            throw IngestionError("'generation' must be a string and 'keywords' an array", line);
        }
        rec.kind = PayloadKind::kGenerationKeywords;
        rec.generation = j["generation"].get<std::string>();
        for (const auto& kw : j["keywords"]) {
            if (!kw.is_string()) throw IngestionError("'keywords' must hold strings", line);
            rec.keywords.push_back(kw.get<std::string>());
        }
        if (rec.keywords.empty()) throw IngestionError("'keywords' must be non-empty", line);
    } else {
        throw IngestionError(
            "record must carry exactly one payload: 'score', 'generation'+'reference', or "
            "'generation'+'keywords'",
            line);
    }

    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "query_id" && key != "score" && key != "generation" && key != "reference" &&
            key != "keywords") {
            throw IngestionError("unknown record field '" + key + "'", line);
        }
    }
    return rec;
}

inline std::vector<EvaluationRecord> read_records(std::istream& in) {
    std::vector<EvaluationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IngestionError("invalid JSON record", lineno);
        records.push_back(parse_record(j, lineno));
    }
    if (records.empty()) throw IngestionError("input holds no records");
    return records;
}

inline nlohmann::json record_to_json(const EvaluationRecord& rec) {
    nlohmann::json j;
    j["query_id"] = rec.query_id;
    switch (rec.kind) {
        case PayloadKind::kScore:
            j["score"] = rec.score;
            break;
        case PayloadKind::kGenerationReference:
            j["generation"] = rec.generation;
            j["reference"] = rec.reference;
            break;
        case PayloadKind::kGenerationKeywords:
            j["generation"] = rec.generation;
            j["keywords"] = rec.keywords;
            break;
    }
    return j;
}

inline void write_records(std::ostream& out, const std::vector<EvaluationRecord>& records) {
    for (const auto& rec : records) {
        out << record_to_json(rec).dump() << "\n";
    }
}

}  // namespace probe::report
